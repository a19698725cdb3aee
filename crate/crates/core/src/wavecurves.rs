//! Scalar reduction of the nonlinear wave families.
//!
//! Across any non-stationary wave the longitudinal displacement `d0 = D·ω` is
//! constant, and the problem reduces to a p-system in the transverse
//! component `d` with flux `f(d, d0) = c² d / (1 + εr p²(sqrt(d0² + d²)))`.
//! Everything here is built from `f`:
//!
//! * `λ(d, d0)`, the genuinely nonlinear characteristic speed, `λ² = ∂f/∂d`;
//! * `S` (shock jump in the magnetic field) and `R` (rarefaction integral);
//! * `φ`, the 6×6 wave function on magnitudes `d ≥ 0`;
//! * `φ̃` ([`varphi_tm`]), the TM wave function on signed `d` that switches
//!   to Liu shocks and shock+rarefaction composites when a wave would cross
//!   `d = 0`;
//! * `d*`, the tangency point of a Liu shock, and the stationary-contact
//!   transfer map `G = f(·, d0+)⁻¹ ∘ f(·, d0-)`.

use std::cell::Cell;

use crate::constitutive::{scaled_field_of_d, MaterialParams};
use crate::error::{KerrError, Result};
use crate::numerics::{integrate, newton_bracketed};

/// Relative tolerance of the rarefaction quadrature.
pub const QUAD_TOL: f64 = 1e-12;
const ROOT_RTOL: f64 = 1e-14;
/// Newton step size, relative to the iterate, below which the next iterate
/// is accurate to roughly its square.
pub(crate) const NEWTON_STOP: f64 = 1e-8;
const MAX_ITER: usize = 200;

/// `a = εr p²(sqrt(d0² + d²))`.
#[inline]
fn factor(d: f64, d0: f64, mat: &MaterialParams) -> f64 {
    let y = scaled_field_of_d(d0.hypot(d), mat);
    y * y
}

#[inline]
fn kerr_k(mat: &MaterialParams) -> f64 {
    mat.eps_r() / (mat.eps0() * mat.eps0())
}

/// `f(d, d0)`: the transverse flux `μ0⁻¹ (ω×E)` as a function of the transverse
/// displacement.
#[inline]
pub fn f_of(d: f64, d0: f64, mat: &MaterialParams) -> f64 {
    let a = factor(d, d0, mat);
    mat.c() * mat.c() * d / (1.0 + a)
}

/// `∂f/∂d`, by direct differentiation of `f`:
/// `c²/(1+a) - 2 c² εr d² / (ε0² (1+a)³ (1+3a))` with `a = εr p²`.
#[inline]
pub fn df_dd(d: f64, d0: f64, mat: &MaterialParams) -> f64 {
    f_and_slope(d, d0, mat).1
}

/// `(f, ∂f/∂d)` sharing one constitutive evaluation.
#[inline]
pub(crate) fn f_and_slope(d: f64, d0: f64, mat: &MaterialParams) -> (f64, f64) {
    let a = factor(d, d0, mat);
    let c2 = mat.c() * mat.c();
    let inv = 1.0 / (1.0 + a);
    let f = c2 * d * inv;
    let df = c2 * inv - 2.0 * c2 * kerr_k(mat) * d * d * inv * inv * inv / (1.0 + 3.0 * a);
    (f, df)
}

/// `∂²f/∂d²`, used by the tangency solve.
fn d2f_dd2(d: f64, d0: f64, mat: &MaterialParams) -> f64 {
    let a = factor(d, d0, mat);
    let k = kerr_k(mat);
    let c2 = mat.c() * mat.c();
    // λ² = c² N / M, N = 1 + B/(1+a)², B = k (3 d0² + d²), M = (1+a)(1+3a)
    let da = 2.0 * k * d / ((1.0 + a) * (1.0 + 3.0 * a));
    let b = k * (3.0 * d0 * d0 + d * d);
    let db = 2.0 * k * d;
    let n = 1.0 + b / (1.0 + a).powi(2);
    let dn = db / (1.0 + a).powi(2) - 2.0 * b * da / (1.0 + a).powi(3);
    let m = (1.0 + a) * (1.0 + 3.0 * a);
    let dm = da * (4.0 + 6.0 * a);
    c2 * (dn * m - n * dm) / (m * m)
}

/// Characteristic speed `λ(|d|, d0)`; even in `d`.
#[inline]
pub(crate) fn lambda_of(d: f64, d0: f64, mat: &MaterialParams) -> f64 {
    let a = factor(d, d0, mat);
    let inv = 1.0 / (1.0 + a);
    let c2 = mat.c() * mat.c();
    let l2 = c2 * (1.0 + a + 2.0 * kerr_k(mat) * d0 * d0 * inv * inv) * inv / (1.0 + 3.0 * a);
    l2.sqrt()
}

/// Characteristic speed of the nonlinear families for a state with
/// `D·ω = d0` and transverse magnitude `d`.
pub fn lambda_scalar(d: f64, d0: f64, mat: &MaterialParams) -> Result<f64> {
    if d < 0.0 {
        return Err(KerrError::InvalidArgument(format!(
            "lambda_scalar requires d >= 0, got {d}"
        )));
    }
    Ok(lambda_of(d, d0, mat))
}

/// Magnetic jump across a shock joining transverse displacements `d_plus`
/// and `d_minus`: `sqrt((f(d+) - f(d-)) (d+ - d-))`, evaluated as
/// `|d+ - d-| sqrt([f]/[d])` so that tiny fields do not underflow.
#[inline]
pub fn s_of(d_plus: f64, d_minus: f64, d0: f64, mat: &MaterialParams) -> f64 {
    if d_plus == d_minus {
        return 0.0;
    }
    jump_from_secant(d_plus - d_minus, f_of(d_plus, d0, mat) - f_of(d_minus, d0, mat))
}

#[inline]
fn jump_from_secant(jd: f64, jf: f64) -> f64 {
    jd.abs() * (jf / jd).max(0.0).sqrt()
}

/// Intervals shorter than this fraction of the distance from the real axis
/// to the nearest singularity of `λ` use a fixed 5-point Gauss rule, whose
/// error then scales like `(h/ρ)^10`; below `TINY_FRACTION` a 3-point rule
/// suffices.
const SHORT_FRACTION: f64 = 0.05;

/// Lower bound for the distance to the complex branch points of `p`,
/// `|q(e)|` at `q'(e) = 0`.
#[inline]
fn singular_radius(mat: &MaterialParams) -> f64 {
    2.0 * mat.eps0() / (3.0 * (3.0 * mat.eps_r()).sqrt())
}

const TINY_FRACTION: f64 = 0.005;
const GL3_X: f64 = 0.774_596_669_241_483_4;
const GL3_W: [f64; 2] = [8.0 / 9.0, 5.0 / 9.0];
const GL5_X: [f64; 3] = [0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GL5_W: [f64; 3] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

#[inline]
fn r_unchecked(d1: f64, d2: f64, d0: f64, mat: &MaterialParams) -> f64 {
    if d1 == d2 {
        return 0.0;
    }
    let h = 0.5 * (d2 - d1);
    let rho = singular_radius(mat);
    let m = 0.5 * (d1 + d2);
    if h.abs() <= 0.5 * TINY_FRACTION * rho {
        let dx = h * GL3_X;
        let sum =
            GL3_W[0] * lambda_of(m, d0, mat) + GL3_W[1] * (lambda_of(m - dx, d0, mat) + lambda_of(m + dx, d0, mat));
        return sum * h;
    }
    if h.abs() <= 0.5 * SHORT_FRACTION * rho {
        let mut sum = GL5_W[0] * lambda_of(m, d0, mat);
        for k in 1..3 {
            let dx = h * GL5_X[k];
            sum += GL5_W[k] * (lambda_of(m - dx, d0, mat) + lambda_of(m + dx, d0, mat));
        }
        return sum * h;
    }
    let abs_tol = QUAD_TOL * mat.c() * (d2 - d1).abs();
    integrate(|s| lambda_of(s, d0, mat), d1, d2, abs_tol, QUAD_TOL)
}

/// Rarefaction integral `R(d1, d2, d0) = ∫_{d1}^{d2} λ(s, d0) ds`, `0 ≤ d1 ≤ d2`.
pub fn r_of(d1: f64, d2: f64, d0: f64, mat: &MaterialParams) -> Result<f64> {
    if !(d1 >= 0.0 && d2 >= d1) {
        return Err(KerrError::InvalidArgument(format!(
            "R requires 0 <= d1 <= d2, got d1 = {d1}, d2 = {d2}"
        )));
    }
    Ok(r_unchecked(d1, d2, d0, mat))
}

/// The 6×6 wave function on transverse magnitudes: a shock jump `S` when
/// `d2 ≤ d1`, minus the rarefaction integral when `d2 ≥ d1`. Decreasing in
/// `d2`.
pub fn phi66(d1: f64, d2: f64, d0: f64, mat: &MaterialParams) -> f64 {
    debug_assert!(d1 >= 0.0 && d2 >= 0.0);
    if d2 <= d1 {
        s_of(d1, d2, d0, mat)
    } else {
        -r_unchecked(d1, d2, d0, mat)
    }
}

/// Tangency point of the Liu shock issued from `d_minus`: the unique `d*`
/// with `d_minus · d* < 0` and
/// `∂f(d*) = (f(d_minus) - f(d*)) / (d_minus - d*)`. `d*(0) = 0`.
pub fn d_star(d_minus: f64, d0: f64, mat: &MaterialParams) -> Result<f64> {
    if d_minus == 0.0 {
        return Ok(0.0);
    }
    let s = d_minus.signum();
    let dm = d_minus.abs();
    let fm = f_of(dm, d0, mat);
    // g(x) = f'(x)(dm - x) - (f(dm) - f(x)) is increasing on (-dm, 0) with
    // g(-dm) < 0 < g(0).
    let eval = |x: f64| {
        let g = df_dd(x, d0, mat) * (dm - x) - (fm - f_of(x, d0, mat));
        let dg = d2f_dd2(x, d0, mat) * (dm - x);
        (g, dg)
    };
    let root = newton_bracketed(eval, -dm, 0.0, -0.3 * dm, true, |_| ROOT_RTOL * dm, MAX_ITER).map_err(|e| {
        KerrError::NoConvergence {
            what: "Liu tangency point",
            iterations: e.iterations,
            residual: e.residual,
        }
    })?;
    Ok(s * root)
}

/// Stationary-contact transfer map: the `x` with `f(x, d0_plus) = f(d, d0_minus)`.
pub fn transfer_g(d: f64, d0_minus: f64, d0_plus: f64, mat: &MaterialParams) -> Result<f64> {
    Ok(transfer_g_with_slope(d, d0_minus, d0_plus, mat)?.0)
}

/// `G(d)` together with `G'(d) = ∂f(d, d0-) / ∂f(G(d), d0+)`. `guess`, when
/// given, seeds the Newton iteration.
pub(crate) fn transfer_g_with_slope(d: f64, d0_minus: f64, d0_plus: f64, mat: &MaterialParams) -> Result<(f64, f64)> {
    transfer_g_seeded(d, d0_minus, d0_plus, None, mat)
}

pub(crate) fn transfer_g_seeded(
    d: f64,
    d0_minus: f64,
    d0_plus: f64,
    guess: Option<f64>,
    mat: &MaterialParams,
) -> Result<(f64, f64)> {
    if d0_minus == d0_plus {
        return Ok((d, 1.0));
    }
    if d == 0.0 {
        return Ok((0.0, df_dd(0.0, d0_minus, mat) / df_dd(0.0, d0_plus, mat)));
    }
    let s = d.signum();
    let (target, slope_minus) = f_and_slope(d.abs(), d0_minus, mat);
    // x ↦ f(x, d0+) is increasing and concave on x > 0, so Newton converges
    // monotonically once it is left of the root; steps through zero are halved.
    let mut x = guess.map(f64::abs).filter(|g| *g > 0.0).unwrap_or(d.abs());
    let mut last = f64::NAN;
    for _ in 0..MAX_ITER {
        let (fx, dfx) = f_and_slope(x, d0_plus, mat);
        last = fx - target;
        let next = x - last / dfx;
        if next <= 0.0 || !next.is_finite() {
            x *= 0.5;
            continue;
        }
        // Quadratic convergence: a step of relative size δ leaves an error of
        // order δ², so δ ≤ NEWTON_STOP already meets the target accuracy.
        if (next - x).abs() <= NEWTON_STOP * x {
            return Ok((s * next, slope_minus / dfx));
        }
        x = next;
    }
    Err(KerrError::NoConvergence {
        what: "stationary-contact transfer",
        iterations: MAX_ITER,
        residual: last,
    })
}

/// Which piece of the TM wave curve a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TmBranch {
    Rarefaction,
    Shock,
    /// Liu shock to `d_star` followed by a rarefaction.
    Composite {
        d_star: f64,
    },
}

/// Classifies `d2` relative to the anchor `d1` without computing `d*` unless
/// the two lie on opposite sides of zero.
fn classify_tm(d1: f64, d2: f64, star: impl Fn() -> Result<f64>) -> Result<TmBranch> {
    if d1 * d2 >= 0.0 {
        if d2.abs() <= d1.abs() && d1 != 0.0 {
            return Ok(TmBranch::Shock);
        }
        return Ok(TmBranch::Rarefaction);
    }
    let ds = star()?;
    if d2.abs() <= ds.abs() {
        Ok(TmBranch::Shock)
    } else {
        Ok(TmBranch::Composite { d_star: ds })
    }
}

/// The TM wave function `φ̃(d1, d2, d0)` on signed transverse components.
pub fn varphi_tm(d1: f64, d2: f64, d0: f64, mat: &MaterialParams) -> Result<f64> {
    let curve = TmWaveCurve::new(d1, d0, mat);
    Ok(curve.eval(d2)?.value)
}

/// Branch of `φ̃(d1, d2, d0)`.
pub fn varphi_tm_branch(d1: f64, d2: f64, d0: f64, mat: &MaterialParams) -> Result<TmBranch> {
    classify_tm(d1, d2, || d_star(d1, d0, mat))
}

/// Value, slope and branch of a wave function at one point.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint<B> {
    pub value: f64,
    pub slope: f64,
    pub branch: B,
}

/// Rarefaction integrals from a fixed base point, evaluated incrementally
/// from the previously requested end point. Newton iterates converge, so
/// later requests integrate over short intervals only.
#[derive(Debug)]
struct IncrementalR {
    cache: Cell<Option<(f64, f64, f64)>>, // (base, end, value)
}

impl IncrementalR {
    fn new() -> Self {
        IncrementalR { cache: Cell::new(None) }
    }

    fn get(&self, base: f64, end: f64, d0: f64, mat: &MaterialParams) -> f64 {
        let v = match self.cache.get() {
            Some((b, e, v)) if b == base && (end - e).abs() < (end - base).abs() => v + signed_r(e, end, d0, mat),
            _ => signed_r(base, end, d0, mat),
        };
        self.cache.set(Some((base, end, v)));
        v
    }
}

/// `∫_a^b λ` for magnitudes in either order.
fn signed_r(a: f64, b: f64, d0: f64, mat: &MaterialParams) -> f64 {
    if b >= a {
        r_unchecked(a, b, d0, mat)
    } else {
        -r_unchecked(b, a, d0, mat)
    }
}

/// Shock jump `S(d1, d2)` from an anchor with cached `f(d1)`, with
/// `∂S/∂d2` when it is defined and `λ(d2)`.
#[inline]
fn shock_point(d1: f64, f1: f64, d2: f64, d0: f64, mat: &MaterialParams) -> (f64, Option<f64>, f64) {
    let (f2, df2) = f_and_slope(d2, d0, mat);
    let lam = df2.max(0.0).sqrt();
    if d1 == d2 {
        return (0.0, None, lam);
    }
    let s = jump_from_secant(d1 - d2, f1 - f2);
    if s == 0.0 {
        return (s, None, lam);
    }
    (s, Some((f2 - f1 - df2 * (d1 - d2)) / (2.0 * s)), lam)
}

/// The 6×6 wave curve `d2 ↦ φ(anchor, d2, d0)` with its slope.
#[derive(Debug)]
pub(crate) struct Phi66Curve<'a> {
    anchor: f64,
    f_anchor: f64,
    d0: f64,
    mat: &'a MaterialParams,
    r: IncrementalR,
}

impl<'a> Phi66Curve<'a> {
    pub(crate) fn new(anchor: f64, d0: f64, mat: &'a MaterialParams) -> Self {
        Phi66Curve {
            anchor,
            f_anchor: f_of(anchor, d0, mat),
            d0,
            mat,
            r: IncrementalR::new(),
        }
    }

    /// Returns `(φ, ∂φ/∂d2)`.
    pub(crate) fn eval(&self, d2: f64) -> (f64, f64) {
        let (d1, d0, mat) = (self.anchor, self.d0, self.mat);
        if d2 <= d1 {
            let (s, ds, lam) = shock_point(d1, self.f_anchor, d2, d0, mat);
            (s, ds.unwrap_or(-lam))
        } else {
            (-self.r.get(d1, d2, d0, mat), -lambda_of(d2, d0, mat))
        }
    }
}

/// The TM wave curve `d2 ↦ φ̃(anchor, d2, d0)`. The tangency point of the
/// anchor and the Liu shock jump to it are computed once, on first need.
#[derive(Debug)]
pub struct TmWaveCurve<'a> {
    anchor: f64,
    f_anchor: f64,
    d0: f64,
    mat: &'a MaterialParams,
    star: Cell<Option<(f64, f64)>>,
    r: IncrementalR,
}

impl<'a> TmWaveCurve<'a> {
    pub fn new(anchor: f64, d0: f64, mat: &'a MaterialParams) -> Self {
        TmWaveCurve {
            anchor,
            f_anchor: f_of(anchor, d0, mat),
            d0,
            mat,
            star: Cell::new(None),
            r: IncrementalR::new(),
        }
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    fn star(&self) -> Result<(f64, f64)> {
        if let Some(v) = self.star.get() {
            return Ok(v);
        }
        let ds = d_star(self.anchor, self.d0, self.mat)?;
        let v = (ds, s_of(self.anchor, ds, self.d0, self.mat));
        self.star.set(Some(v));
        Ok(v)
    }

    /// Tangency point `d*` of the anchor.
    pub fn d_star(&self) -> Result<f64> {
        Ok(self.star()?.0)
    }

    pub fn eval(&self, d2: f64) -> Result<CurvePoint<TmBranch>> {
        let (d1, d0, mat) = (self.anchor, self.d0, self.mat);
        let branch = classify_tm(d1, d2, || self.d_star())?;
        let pt = match branch {
            TmBranch::Rarefaction => CurvePoint {
                value: -d2.signum() * self.r.get(d1.abs(), d2.abs(), d0, mat),
                slope: -lambda_of(d2, d0, mat),
                branch,
            },
            TmBranch::Shock => {
                let (s, ds, lam) = shock_point(d1, self.f_anchor, d2, d0, mat);
                CurvePoint {
                    value: d1.signum() * s,
                    slope: ds.map_or(-lam, |v| d1.signum() * v),
                    branch,
                }
            }
            TmBranch::Composite { d_star } => {
                let s_star = self.star()?.1;
                CurvePoint {
                    value: d1.signum() * (s_star + self.r.get(d_star.abs(), d2.abs(), d0, mat)),
                    slope: -lambda_of(d2, d0, mat),
                    branch,
                }
            }
        };
        Ok(pt)
    }
}
