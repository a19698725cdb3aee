//! Scalar numerical kernels: adaptive Gauss–Kronrod quadrature and a
//! bracketed Newton iteration with bisection fallback.

// Kronrod 15-point abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights. Values from QUADPACK.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 30;

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

fn adapt(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if err <= abs_tol.max(rel_tol * k.abs()) || depth >= MAX_DEPTH {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * abs_tol, rel_tol, depth + 1) + adapt(f, m, b, 0.5 * abs_tol, rel_tol, depth + 1)
}

/// Integrates `f` over `[a, b]` by recursive bisection of 15-point
/// Gauss–Kronrod panels until `|K15 - G7|` on each panel is below the
/// combined absolute/relative tolerance.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    adapt(&mut f, a, b, abs_tol, rel_tol, 0)
}

/// Outcome of a failed bracketed solve.
#[derive(Debug, Clone, Copy)]
pub struct NotConverged {
    pub iterations: usize,
    pub residual: f64,
}

/// Solves `g(x) = 0` on a bracket `[lo, hi]` where `g` is monotone with the
/// given orientation. `eval` returns `(g(x), g'(x))`. Newton steps that leave
/// the current bracket are replaced by bisection. Terminates when the step
/// (or the bracket width) falls below `xtol(x)`.
pub fn newton_bracketed(
    mut eval: impl FnMut(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    increasing: bool,
    xtol: impl Fn(f64) -> f64,
    max_iter: usize,
) -> Result<f64, NotConverged> {
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    let mut last = f64::NAN;
    for _ in 0..max_iter {
        let (g, dg) = eval(x);
        last = g;
        if g == 0.0 {
            return Ok(x);
        }
        if (g < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - g / dg;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let tol = xtol(next);
        if (next - x).abs() <= tol || hi - lo <= tol {
            return Ok(next);
        }
        x = next;
    }
    Err(NotConverged {
        iterations: max_iter,
        residual: last,
    })
}

/// Plain bisection for a monotone predicate-style function; used where only
/// function values are cheap and robustness matters more than speed.
pub fn bisect(mut g: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let glo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid == lo || mid == hi {
            return mid;
        }
        let gm = g(mid);
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
