//! Exact Riemann solver for the transverse-magnetic reduction.
//!
//! In direction `ω` the TM system splits into the longitudinal component
//! `d0 = D·ω`, which only jumps across a stationary contact, and a p-system
//! in `(d, H3)` with `d = D·ω⊥`, `ω⊥ = (-ω2, ω1)`:
//! `∂t d + ∂x H3 = 0`, `∂t H3 + ∂x f(d, d0) = 0`.
//! `f` is concave for `d > 0` and convex for `d < 0`, so waves that cross
//! `d = 0` are Liu shocks or shock/rarefaction composites.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constitutive::{e_of_d, MaterialParams, StateTM, TINY};
use crate::error::{KerrError, Result};
use crate::numerics::bisect;
use crate::riemann66::Wave;
use crate::vector::Vec2;
use crate::wavecurves::{f_of, lambda_of, transfer_g_seeded, TmBranch, TmWaveCurve, NEWTON_STOP};

const ROOT_RTOL: f64 = 1e-13;
const SNAP_RTOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

/// Relative tolerance of the Rankine–Hugoniot check in [`shock_dissipation`].
pub const RH_TOL: f64 = 1e-9;

/// Default number of interior Hugoniot points sampled by [`liu_admissible`].
pub const LIU_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FanScalarsTM {
    pub d0_minus: f64,
    pub d0_plus: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    pub d1: f64,
    pub d2: f64,
    /// Tangency point used by a composite 1-wave.
    pub d_star_1: Option<f64>,
    /// Tangency point used by a composite 3-wave.
    pub d_star_3: Option<f64>,
}

/// Self-similar solution of a TM Riemann problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFanTM {
    pub omega: Vec2,
    /// `[u-, u(1), u(2), u+]`.
    pub states: [StateTM; 4],
    /// 1-wave, stationary contact, 3-wave.
    pub waves: [Wave; 3],
    pub scalars: FanScalarsTM,
}

fn check_unit2(omega: Vec2) -> Result<()> {
    let n = omega.norm();
    if (n - 1.0).abs() > 1e-12 || !n.is_finite() {
        return Err(KerrError::NonUnitDirection { norm: n });
    }
    Ok(())
}

/// `(d0, d) = (D·ω, D·ω⊥)`.
#[inline]
pub fn tm_coordinates(u: &StateTM, omega: Vec2) -> (f64, f64) {
    let d = u.d();
    (d.dot(omega), d.dot(omega.perp()))
}

#[inline]
fn tm_state(d0: f64, d: f64, h3: f64, omega: Vec2) -> StateTM {
    StateTM::from_parts(omega * d0 + omega.perp() * d, h3)
}

fn secant(a: f64, b: f64, d0: f64, mat: &MaterialParams) -> f64 {
    ((f_of(a, d0, mat) - f_of(b, d0, mat)) / (a - b)).max(0.0)
}

struct MiddleTM {
    scalars: FanScalarsTM,
    u1: StateTM,
    u2: StateTM,
    b1: TmBranch,
    b3: TmBranch,
}

fn middle_tm(u_minus: &StateTM, u_plus: &StateTM, omega: Vec2, mat: &MaterialParams) -> Result<MiddleTM> {
    check_unit2(omega)?;
    if !u_minus.is_finite() || !u_plus.is_finite() {
        return Err(KerrError::InvalidArgument("non-finite Riemann data".into()));
    }
    let (d0m, dm) = tm_coordinates(u_minus, omega);
    let (d0p, dp) = tm_coordinates(u_plus, omega);
    let jump = u_plus.h3 - u_minus.h3;
    let left = TmWaveCurve::new(dm, d0m, mat);
    let right = TmWaveCurve::new(dp, d0p, mat);

    let (mut d1, mut d2) = if dm == dp && d0m == d0p && jump == 0.0 {
        (dm, dp)
    } else {
        solve_scalar_tm(&left, &right, dm, dp, d0m, d0p, jump, mat)?
    };
    if (d1 - dm).abs() <= SNAP_RTOL * dm.abs() {
        d1 = dm;
        d2 = transfer_g_seeded(dm, d0m, d0p, None, mat)?.0;
    }
    if (d2 - dp).abs() <= SNAP_RTOL * dp.abs() {
        d2 = dp;
    }
    let p1 = left.eval(d1)?;
    let p3 = right.eval(d2)?;
    let u1 = tm_state(d0m, d1, u_minus.h3 + p1.value, omega);
    let u2 = tm_state(d0p, d2, u_plus.h3 - p3.value, omega);
    let star = |b: TmBranch| match b {
        TmBranch::Composite { d_star } => Some(d_star),
        _ => None,
    };
    Ok(MiddleTM {
        scalars: FanScalarsTM {
            d0_minus: d0m,
            d0_plus: d0p,
            d_minus: dm,
            d_plus: dp,
            d1,
            d2,
            d_star_1: star(p1.branch),
            d_star_3: star(p3.branch),
        },
        u1,
        u2,
        b1: p1.branch,
        b3: p3.branch,
    })
}

/// Solves `φ̃(d-, x, d0-) + φ̃(d+, G(x), d0+) = jump` over `x ∈ ℝ`; the
/// left-hand side is strictly decreasing.
#[allow(clippy::too_many_arguments)]
fn solve_scalar_tm(
    left: &TmWaveCurve,
    right: &TmWaveCurve,
    dm: f64,
    dp: f64,
    d0m: f64,
    d0p: f64,
    jump: f64,
    mat: &MaterialParams,
) -> Result<(f64, f64)> {
    let mut prev: Option<(f64, f64, f64)> = None;
    let mut eval = |x: f64| -> Result<(f64, f64, f64)> {
        let guess = prev.map(|(px, pg, ps)| pg + ps * (x - px));
        let (g, dg) = transfer_g_seeded(x, d0m, d0p, guess, mat)?;
        prev = Some((x, g, dg));
        let a = left.eval(x)?;
        let b = right.eval(g)?;
        Ok((a.value + b.value - jump, a.slope + b.slope * dg, g))
    };

    let la = lambda_of(dm, d0m, mat);
    let lb = lambda_of(dp, d0p, mat);
    let guess = (la * dm + lb * dp - jump) / (la + lb);
    let scale = dm.abs().max(dp.abs()).max(guess.abs()).max(TINY);
    let xtol = |x: f64| ROOT_RTOL * x.abs().max(1e-6 * scale);

    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut x = guess;
    let mut last = f64::NAN;
    for _ in 0..MAX_ITER {
        let (f, df, g) = eval(x)?;
        last = f;
        if f == 0.0 {
            return Ok((x, g));
        }
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - f / df;
        let newton = next > lo && next < hi && next.is_finite();
        if !newton {
            let step = 2.0 * x.abs().max(scale);
            next = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo + step,
                _ => hi - step,
            };
        }
        let converged = if newton {
            (next - x).abs() <= NEWTON_STOP * x.abs().max(1e-6 * scale)
        } else {
            hi - lo <= xtol(next)
        };
        if converged {
            let g = transfer_g_seeded(next, d0m, d0p, Some(g), mat)?.0;
            return Ok((next, g));
        }
        x = next;
    }
    Err(KerrError::NoConvergence {
        what: "TM stationary-contact root",
        iterations: MAX_ITER,
        residual: last,
    })
}

/// Solves the TM Riemann problem between `u_minus` and `u_plus` in direction
/// `omega`, using Liu-admissible shocks and composite waves.
pub fn solve_riemann_tm(u_minus: &StateTM, u_plus: &StateTM, omega: Vec2, mat: &MaterialParams) -> Result<WaveFanTM> {
    let m = middle_tm(u_minus, u_plus, omega, mat)?;
    let s = m.scalars;
    let (d0m, d0p) = (s.d0_minus, s.d0_plus);
    let c = mat.c();

    let w1 = if s.d1 == s.d_minus {
        Wave::Trivial
    } else {
        match m.b1 {
            TmBranch::Rarefaction => Wave::Rarefaction {
                head: -lambda_of(s.d_minus, d0m, mat),
                tail: -lambda_of(s.d1, d0m, mat),
            },
            TmBranch::Shock => Wave::Shock {
                speed: -secant(s.d_minus, s.d1, d0m, mat).sqrt(),
            },
            TmBranch::Composite { d_star } => {
                let shock = -secant(s.d_minus, d_star, d0m, mat).sqrt();
                check_tangency(shock, -lambda_of(d_star, d0m, mat), c)?;
                Wave::Composite {
                    shock,
                    tail: -lambda_of(s.d1, d0m, mat),
                }
            }
        }
    };
    let w3 = if s.d2 == s.d_plus {
        Wave::Trivial
    } else {
        match m.b3 {
            TmBranch::Rarefaction => Wave::Rarefaction {
                head: lambda_of(s.d_plus, d0p, mat),
                tail: lambda_of(s.d2, d0p, mat),
            },
            TmBranch::Shock => Wave::Shock {
                speed: secant(s.d_plus, s.d2, d0p, mat).sqrt(),
            },
            TmBranch::Composite { d_star } => {
                let shock = secant(s.d_plus, d_star, d0p, mat).sqrt();
                check_tangency(shock, lambda_of(d_star, d0p, mat), c)?;
                Wave::Composite {
                    shock,
                    tail: lambda_of(s.d2, d0p, mat),
                }
            }
        }
    };
    let stationary = {
        let same = |a: f64, b: f64| (a - b).abs() <= 1e-14 * (a.abs() + b.abs()) + TINY;
        if same(m.u1.d1, m.u2.d1) && same(m.u1.d2, m.u2.d2) && same(m.u1.h3, m.u2.h3) {
            Wave::Trivial
        } else {
            Wave::StationaryContact
        }
    };
    Ok(WaveFanTM {
        omega,
        states: [*u_minus, m.u1, m.u2, *u_plus],
        waves: [w1, stationary, w3],
        scalars: s,
    })
}

fn check_tangency(shock: f64, lambda: f64, c: f64) -> Result<()> {
    if (shock - lambda).abs() > 1e-9 * c {
        return Err(KerrError::NoConvergence {
            what: "Liu tangency (shock speed differs from characteristic speed)",
            iterations: 0,
            residual: (shock - lambda).abs() / c,
        });
    }
    Ok(())
}

/// The state at `ξ = 0`, which determines the Godunov flux: `u(2)`.
pub fn interface_state_tm(u_minus: &StateTM, u_plus: &StateTM, omega: Vec2, mat: &MaterialParams) -> Result<StateTM> {
    Ok(middle_tm(u_minus, u_plus, omega, mat)?.u2)
}

/// State of the TM fan at `ξ = x/t`; ties at discontinuities go right.
pub fn sample_tm(fan: &WaveFanTM, xi: f64, mat: &MaterialParams) -> StateTM {
    for (i, wave) in fan.waves.iter().enumerate() {
        let Some((lo, hi)) = wave.span() else { continue };
        if xi < lo {
            return fan.states[i];
        }
        if xi < hi {
            return interior_tm(fan, i, xi, mat);
        }
    }
    fan.states[3]
}

fn interior_tm(fan: &WaveFanTM, wave: usize, xi: f64, mat: &MaterialParams) -> StateTM {
    let s = &fan.scalars;
    let (anchor, end, start, d0) = if wave == 0 {
        (s.d_minus, s.d1, s.d_star_1.unwrap_or(s.d_minus), s.d0_minus)
    } else {
        (s.d_plus, s.d2, s.d_star_3.unwrap_or(s.d_plus), s.d0_plus)
    };
    // the smooth part runs from `start` to `end`, on the side of zero of `end`
    let (a, b) = (start.abs().min(end.abs()), start.abs().max(end.abs()));
    let target = xi.abs();
    let mag = bisect(|d| lambda_of(d, d0, mat) - target, a, b, 1e-15 * b.max(TINY));
    let d = mag.copysign(end);
    let curve = TmWaveCurve::new(anchor, d0, mat);
    let phi = curve.eval(d).map(|p| p.value).unwrap_or(f64::NAN);
    let h3 = if wave == 0 {
        fan.states[0].h3 + phi
    } else {
        fan.states[3].h3 - phi
    };
    tm_state(d0, d, h3, fan.omega)
}

/// Liu's condition (E) for a discontinuity of speed sign `family`
/// (`-1` for 1-shocks, `+1` for 3-shocks) between transverse components
/// `d_left` and `d_right`: `σ(d_right; d_left) ≤ σ(d; d_left)` at `samples`
/// interior points of the segment, to `1e-9 c`.
pub fn liu_admissible(d_left: f64, d_right: f64, d0: f64, family: f64, samples: usize, mat: &MaterialParams) -> bool {
    if d_left == d_right {
        return true;
    }
    let speed = |d: f64| family.signum() * secant(d_left, d, d0, mat).sqrt();
    let s = speed(d_right);
    let tol = 1e-9 * mat.c();
    (1..=samples).all(|k| {
        let t = k as f64 / (samples + 1) as f64;
        s <= speed(d_left + t * (d_right - d_left)) + tol
    })
}

/// Entropy dissipation rate `-σ[η] + [H3 (ω×E)]` of a discontinuity. Negative
/// values dissipate energy; zero means the energy is conserved.
///
/// The pair must satisfy the Rankine–Hugoniot relations of the TM system in
/// direction `omega` with speed `sigma`.
pub fn shock_dissipation(
    sigma: f64,
    u_minus: &StateTM,
    u_plus: &StateTM,
    omega: Vec2,
    mat: &MaterialParams,
) -> Result<f64> {
    check_unit2(omega)?;
    let (d0m, dm) = tm_coordinates(u_minus, omega);
    let (d0p, dp) = tm_coordinates(u_plus, omega);
    let (fm, fp) = (f_of(dm, d0m, mat), f_of(dp, d0p, mat));
    let jd = dp - dm;
    let jh = u_plus.h3 - u_minus.h3;
    let jf = fp - fm;
    let rel = |a: f64, b: f64| (a - b).abs() / (a.abs() + b.abs()).max(TINY);
    let scale_d = dm.abs().max(dp.abs()).max(TINY);
    let r0 = (d0p - d0m).abs() / (d0m.abs().max(d0p.abs()) + scale_d);
    let (r1, r2) = if jd == 0.0 && jh == 0.0 && jf == 0.0 {
        (0.0, 0.0)
    } else {
        (rel(sigma * jd, jh), rel(sigma * jh, jf))
    };
    let residual = r0.max(r1).max(r2);
    if residual > RH_TOL {
        return Err(KerrError::NotRankineHugoniot { residual });
    }
    // With the Rankine–Hugoniot relations the magnetic terms cancel and the
    // rate reduces to -σ([W] - <E>·[D]), W the electric energy. For the cubic
    // law that is -σ εr ε0 (|E+|² - |E-|²) |E+ - E-|² / 4, which keeps full
    // relative accuracy for weak shocks.
    let em = e_of_d(u_minus.d().to_vec3(), mat);
    let ep = e_of_d(u_plus.d().to_vec3(), mat);
    let de = ep - em;
    let da2 = de.dot(ep + em);
    Ok(-0.25 * sigma * mat.eps0() * mat.eps_r() * da2 * de.norm2())
}

impl WaveFanTM {
    /// CSV dump mirroring [`crate::riemann66::WaveFan66::to_csv`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("wave,type,speed_left,speed_right,l_D1,l_D2,l_H3,r_D1,r_D2,r_H3\n");
        let labels = [1, 2, 3];
        for (i, w) in self.waves.iter().enumerate() {
            let (a, b) = w.span().unwrap_or((f64::NAN, f64::NAN));
            let _ = write!(out, "{},{},{:e},{:e}", labels[i], w.kind(), a, b);
            for u in [&self.states[i], &self.states[i + 1]] {
                let _ = write!(out, ",{:.17e},{:.17e},{:.17e}", u.d1, u.d2, u.h3);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat() -> MaterialParams {
        MaterialParams::default()
    }

    const E1: Vec2 = Vec2::new(1.0, 0.0);

    #[test]
    fn coordinates_follow_rotated_frame() {
        let w = Vec2::new(0.6, 0.8);
        let u = StateTM::new(0.3, -0.1, 0.0);
        let (d0, d) = tm_coordinates(&u, w);
        assert!((d0 - (0.18 - 0.08)).abs() < 1e-15);
        assert!((d - (-0.8 * 0.3 + 0.6 * -0.1)).abs() < 1e-15);
        let back = tm_state(d0, d, 0.0, w);
        assert!((back.d1 - u.d1).abs() < 1e-15 && (back.d2 - u.d2).abs() < 1e-15);
    }

    #[test]
    fn equal_states_give_trivial_fan() {
        let m = mat();
        let u = StateTM::new(0.01, 0.02, 1e6);
        let fan = solve_riemann_tm(&u, &u, E1, &m).unwrap();
        assert!(fan.waves.iter().all(Wave::is_trivial));
        assert!(fan.states.iter().all(|s| *s == u));
    }

    #[test]
    fn contact_reference_is_rarefaction_plus_composite() {
        // D± = (0, ±0.03) joined by the 6×6 contact relation for H3.
        let m = mat();
        let d = 0.03;
        let um = StateTM::new(0.0, d, 3.0 / m.mu0());
        let e2 = crate::constitutive::p_of_d(d, &m).powi(2);
        let sp = m.c() / (1.0 + m.eps_r() * e2).sqrt();
        let up = StateTM::new(0.0, -d, um.h3 + sp * (-2.0 * d));
        let fan = solve_riemann_tm(&um, &up, E1, &m).unwrap();
        assert!(matches!(fan.waves[0], Wave::Rarefaction { .. }), "{:?}", fan.waves);
        assert!(fan.waves[1].is_trivial());
        assert!(matches!(fan.waves[2], Wave::Composite { .. }), "{:?}", fan.waves);
    }

    #[test]
    fn sampling_composite_interior_is_characteristic() {
        let m = mat();
        let d = 0.03;
        let um = StateTM::new(0.0, d, 3.0 / m.mu0());
        let e2 = crate::constitutive::p_of_d(d, &m).powi(2);
        let sp = m.c() / (1.0 + m.eps_r() * e2).sqrt();
        let up = StateTM::new(0.0, -d, um.h3 - 2.0 * sp * d);
        let fan = solve_riemann_tm(&um, &up, E1, &m).unwrap();
        let (lo, hi) = fan.waves[2].span().unwrap();
        let xi = 0.5 * (lo + hi);
        let u = sample_tm(&fan, xi, &m);
        let l = lambda_of(u.d2.abs(), u.d1, &m);
        assert!((l - xi).abs() <= 1e-9 * m.c());
        assert_eq!(sample_tm(&fan, hi, &m), up);
        assert_eq!(sample_tm(&fan, -1.01 * m.c(), &m), um);
        assert_eq!(sample_tm(&fan, 0.0, &m), fan.states[2]);
    }

    #[test]
    fn dissipation_rejects_non_hugoniot_pairs() {
        let m = mat();
        let a = StateTM::new(0.0, 0.03, 0.0);
        let b = StateTM::new(0.0, 0.02, 0.0);
        assert!(matches!(
            shock_dissipation(-1e8, &a, &b, E1, &m),
            Err(KerrError::NotRankineHugoniot { .. })
        ));
        assert_eq!(shock_dissipation(123.0, &a, &a, E1, &m).unwrap(), 0.0);
    }

    fn hugoniot_pair(dm: f64, dp: f64, d0: f64, h3m: f64, m: &MaterialParams) -> (f64, StateTM, StateTM) {
        let sigma = -secant(dm, dp, d0, m).sqrt();
        let um = StateTM::new(d0, dm, h3m);
        let up = StateTM::new(d0, dp, h3m + sigma * (dp - dm));
        (sigma, um, up)
    }

    // -σ[η] + [Q·ω] evaluated literally.
    fn direct_dissipation(sigma: f64, um: &StateTM, up: &StateTM, m: &MaterialParams) -> f64 {
        let (em, qm) = crate::constitutive::energy_tm(um, m);
        let (ep, qp) = crate::constitutive::energy_tm(up, m);
        -sigma * (ep - em) + (qp.x - qm.x)
    }

    #[test]
    fn dissipation_golden_liu_shock() {
        // 50-digit mpmath evaluation of the closed form at these data.
        let m = mat();
        let (sigma, um, up) = hugoniot_pair(0.03, 0.02, 0.0, 3.0 / m.mu0(), &m);
        let got = shock_dissipation(sigma, &um, &up, E1, &m).unwrap();
        let golden = -4.917994683663849e12;
        assert!(((got - golden) / golden).abs() < 1e-12, "{got}");
        let direct = direct_dissipation(sigma, &um, &up, &m);
        assert!(((direct - golden) / golden).abs() < 1e-8, "{direct}");
    }

    #[test]
    fn dissipation_vanishes_for_contact_pair() {
        let m = mat();
        let d = 0.03;
        let um = StateTM::new(0.0, d, 3.0 / m.mu0());
        let e2 = crate::constitutive::p_of_d(d, &m).powi(2);
        let sp = m.c() / (1.0 + m.eps_r() * e2).sqrt();
        let up = StateTM::new(0.0, -d, um.h3 - 2.0 * sp * d);
        let r = shock_dissipation(sp, &um, &up, E1, &m).unwrap();
        let scale = sp * crate::constitutive::energy_tm(&um, &m).0;
        assert!(r.abs() <= 1e-12 * scale, "{r}");
    }

    #[test]
    fn dissipation_is_monotone_on_liu_segment() {
        let m = mat();
        let (dm, d0) = (0.04, 0.01);
        let ds = crate::wavecurves::d_star(dm, d0, &m).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 1..64 {
            let dp = ds + (dm - ds) * k as f64 / 64.0;
            let (sigma, um, up) = hugoniot_pair(dm, dp, d0, 0.0, &m);
            let r = shock_dissipation(sigma, &um, &up, E1, &m).unwrap();
            assert!(r <= 0.0);
            assert!(r >= prev * (1.0 + 1e-12), "{k}: {r} < {prev}");
            prev = r;
        }
    }

    #[test]
    fn liu_check_distinguishes_admissible_shocks() {
        let m = mat();
        let ds = crate::wavecurves::d_star(0.03, 0.0, &m).unwrap();
        assert!(liu_admissible(0.03, 0.5 * ds, 0.0, -1.0, LIU_SAMPLES, &m));
        assert!(liu_admissible(0.03, 0.01, 0.0, -1.0, LIU_SAMPLES, &m));
        assert!(!liu_admissible(0.03, 2.0 * ds, 0.0, -1.0, LIU_SAMPLES, &m));
        // rarefaction-side jump (expansion shock)
        assert!(!liu_admissible(0.01, 0.03, 0.0, -1.0, LIU_SAMPLES, &m));
    }

    #[test]
    fn rejects_bad_direction() {
        let m = mat();
        let u = StateTM::new(0.0, 0.01, 0.0);
        assert!(solve_riemann_tm(&u, &u, Vec2::new(1.0, 1.0), &m).is_err());
    }

    #[test]
    fn csv_dump_shape() {
        let m = mat();
        let um = StateTM::new(0.0, 0.03, 0.0);
        let up = StateTM::new(0.01, 0.02, 1e5);
        let fan = solve_riemann_tm(&um, &up, E1, &m).unwrap();
        let csv = fan.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 10);
    }
}
