//! Exact Riemann solver for the full-vector Kerr system.
//!
//! The solution is a fan of five waves between `u-` and `u+`:
//!
//! ```text
//!   u-  |1-contact|  u1  |2-wave|  u*  |stationary|  u**  |5-wave|  u2  |6-contact|  u+
//! ```
//!
//! The contacts travel at `∓c (1 + εr|E±|²)^(-1/2)` and rotate the transverse
//! displacement into a common direction `ζ`. Along `ζ` the problem is a pair
//! of scalar p-systems joined by the stationary contact, solved for the
//! transverse magnitude `d*` by a safeguarded Newton iteration.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constitutive::{check_unit, e_of_d, MaterialParams, State66, TINY};
use crate::error::{KerrError, Result};
use crate::numerics::bisect;
use crate::vector::Vec3;
use crate::wavecurves::{f_of, lambda_of, transfer_g_seeded, transfer_g_with_slope, Phi66Curve, NEWTON_STOP};

const ROOT_RTOL: f64 = 1e-13;
const MAX_ITER: usize = 200;
const SNAP_RTOL: f64 = 1e-12;

/// One wave of a fan, with its speed(s) in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Wave {
    Trivial,
    Contact {
        speed: f64,
    },
    Shock {
        speed: f64,
    },
    /// `head` is the leading edge (farther from `ξ = 0`), `tail` the trailing one.
    Rarefaction {
        head: f64,
        tail: f64,
    },
    /// Shock at `shock` followed by an attached rarefaction ending at `tail`.
    Composite {
        shock: f64,
        tail: f64,
    },
    StationaryContact,
}

impl Wave {
    /// `(leftmost, rightmost)` speed, or `None` for trivial waves.
    pub fn span(&self) -> Option<(f64, f64)> {
        match *self {
            Wave::Trivial => None,
            Wave::Contact { speed } | Wave::Shock { speed } => Some((speed, speed)),
            Wave::Rarefaction { head, tail } | Wave::Composite { shock: head, tail } => {
                Some((head.min(tail), head.max(tail)))
            }
            Wave::StationaryContact => Some((0.0, 0.0)),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Wave::Trivial => "trivial",
            Wave::Contact { .. } => "contact",
            Wave::Shock { .. } => "shock",
            Wave::Rarefaction { .. } => "rarefaction",
            Wave::Composite { .. } => "composite",
            Wave::StationaryContact => "stationary_contact",
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, Wave::Trivial)
    }
}

/// Scalar parameters of a 6×6 fan.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FanScalars66 {
    pub d0_minus: f64,
    pub d0_plus: f64,
    pub d1: f64,
    pub d2: f64,
    pub d_star: f64,
    pub d_star_star: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
}

/// Self-similar solution of a 6×6 Riemann problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFan66 {
    pub omega: Vec3,
    /// `[u-, u1, u*, u**, u2, u+]`.
    pub states: [State66; 6],
    /// 1-contact, 2-wave, stationary contact, 5-wave, 6-contact.
    pub waves: [Wave; 5],
    /// Common transverse direction; `None` when `V` vanishes.
    pub zeta: Option<Vec3>,
    pub scalars: FanScalars66,
}

/// Contact speeds `σ± = ±c (1 + εr|E±|²)^(-1/2)`.
pub fn contact_speeds(u_minus: &State66, u_plus: &State66, mat: &MaterialParams) -> (f64, f64) {
    let speed = |d: Vec3| {
        let e2 = e_of_d(d, mat).norm2();
        mat.c() / (1.0 + mat.eps_r() * e2).sqrt()
    };
    (-speed(u_minus.d), speed(u_plus.d))
}

/// `V = ω×(H+ - H- - ω×(σ+ D+ - σ- D-))`.
pub fn compute_v(u_minus: &State66, u_plus: &State66, omega: Vec3, mat: &MaterialParams) -> Vec3 {
    let (sm, sp) = contact_speeds(u_minus, u_plus, mat);
    v_with_speeds(u_minus, u_plus, omega, sm, sp)
}

fn v_with_speeds(um: &State66, up: &State66, omega: Vec3, sm: f64, sp: f64) -> Vec3 {
    omega.cross(up.h - um.h - omega.cross(up.d * sp - um.d * sm))
}

/// Threshold below which `V` is treated as zero.
fn v_tolerance(um: &State66, up: &State66, mat: &MaterialParams) -> f64 {
    1e-12 * (mat.c() * (um.d.norm() + up.d.norm()) + um.h.norm() + up.h.norm()) + TINY
}

fn check_inputs(um: &State66, up: &State66, omega: Vec3) -> Result<()> {
    check_unit(omega)?;
    if !um.is_finite() || !up.is_finite() {
        return Err(KerrError::InvalidArgument("non-finite Riemann data".into()));
    }
    Ok(())
}

fn states_coincide(a: &State66, b: &State66) -> bool {
    let sd = 1e-14 * (a.d.norm() + b.d.norm()) + TINY;
    let sh = 1e-14 * (a.h.norm() + b.h.norm()) + TINY;
    (a.d - b.d).norm() <= sd && (a.h - b.h).norm() <= sh
}

fn secant_speed(a: f64, b: f64, d0: f64, mat: &MaterialParams) -> f64 {
    ((f_of(a, d0, mat) - f_of(b, d0, mat)) / (a - b)).max(0.0).sqrt()
}

/// Intermediate states and scalars, before wave classification.
struct Middle {
    zeta: Option<Vec3>,
    scalars: FanScalars66,
    /// `[u1, u*, u**, u2]`.
    states: [State66; 4],
}

fn middle_states(u_minus: &State66, u_plus: &State66, omega: Vec3, mat: &MaterialParams) -> Result<Middle> {
    check_inputs(u_minus, u_plus, omega)?;
    let (sm, sp) = contact_speeds(u_minus, u_plus, mat);
    let v = v_with_speeds(u_minus, u_plus, omega, sm, sp);
    let d0m = u_minus.d.dot(omega);
    let d0p = u_plus.d.dot(omega);
    let d1 = u_minus.d.transverse_to(omega).norm();
    let d2 = u_plus.d.transverse_to(omega).norm();
    let mut scalars = FanScalars66 {
        d0_minus: d0m,
        d0_plus: d0p,
        d1,
        d2,
        d_star: 0.0,
        d_star_star: 0.0,
        sigma_minus: sm,
        sigma_plus: sp,
    };

    if v.norm() <= v_tolerance(u_minus, u_plus, mat) {
        let us = State66::new(omega * d0m, u_minus.h - omega.cross(u_minus.d) * sm);
        let uss = State66::new(omega * d0p, u_plus.h - omega.cross(u_plus.d) * sp);
        return Ok(Middle {
            zeta: None,
            scalars,
            states: [*u_minus, us, uss, *u_plus],
        });
    }

    let zeta = v / v.norm();
    let wz = omega.cross(zeta);
    let dd1 = omega * d0m + zeta * d1;
    let dd2 = omega * d0p + zeta * d2;
    let u1 = State66::new(dd1, u_minus.h + omega.cross(dd1 - u_minus.d) * sm);
    let u2 = State66::new(dd2, u_plus.h - omega.cross(u_plus.d - dd2) * sp);
    let jump = u2.h.dot(wz) - u1.h.dot(wz);

    let left = Phi66Curve::new(d1, d0m, mat);
    let right = Phi66Curve::new(d2, d0p, mat);
    let (mut d_star, mut d_ss) = solve_middle(&left, &right, d1, d2, d0m, d0p, jump, mat)?;
    // A root within solver tolerance of an anchor means that wave is absent.
    if (d_star - d1).abs() <= SNAP_RTOL * d1 {
        d_star = d1;
        d_ss = transfer_g_with_slope(d1, d0m, d0p, mat)?.0;
    }
    if (d_ss - d2).abs() <= SNAP_RTOL * d2 {
        d_ss = d2;
    }
    let phi1 = left.eval(d_star).0;
    let phi2 = right.eval(d_ss).0;
    let us = State66::new(omega * d0m + zeta * d_star, u1.h + wz * phi1);
    let uss = State66::new(omega * d0p + zeta * d_ss, u2.h - wz * phi2);
    scalars.d_star = d_star;
    scalars.d_star_star = d_ss;
    Ok(Middle {
        zeta: Some(zeta),
        scalars,
        states: [u1, us, uss, u2],
    })
}

/// Solves the Riemann problem between `u_minus` (left) and `u_plus` (right)
/// in direction `omega`.
pub fn solve_riemann66(u_minus: &State66, u_plus: &State66, omega: Vec3, mat: &MaterialParams) -> Result<WaveFan66> {
    let Middle { zeta, scalars, states } = middle_states(u_minus, u_plus, omega, mat)?;
    let [u1, us, uss, u2] = states;
    let FanScalars66 {
        d0_minus: d0m,
        d0_plus: d0p,
        d1,
        d2,
        d_star,
        d_star_star: d_ss,
        sigma_minus: sm,
        sigma_plus: sp,
    } = scalars;
    let present = |a: &State66, b: &State66, w: Wave| if states_coincide(a, b) { Wave::Trivial } else { w };

    let waves = if zeta.is_none() {
        [
            Wave::Trivial,
            present(u_minus, &us, Wave::Shock { speed: sm }),
            present(&us, &uss, Wave::StationaryContact),
            present(&uss, u_plus, Wave::Shock { speed: sp }),
            Wave::Trivial,
        ]
    } else {
        let w2 = if d_star == d1 {
            Wave::Trivial
        } else if d_star < d1 {
            Wave::Shock {
                speed: -secant_speed(d1, d_star, d0m, mat),
            }
        } else {
            Wave::Rarefaction {
                head: -lambda_of(d1, d0m, mat),
                tail: -lambda_of(d_star, d0m, mat),
            }
        };
        let w5 = if d_ss == d2 {
            Wave::Trivial
        } else if d_ss < d2 {
            Wave::Shock {
                speed: secant_speed(d2, d_ss, d0p, mat),
            }
        } else {
            Wave::Rarefaction {
                head: lambda_of(d2, d0p, mat),
                tail: lambda_of(d_ss, d0p, mat),
            }
        };
        [
            present(u_minus, &u1, Wave::Contact { speed: sm }),
            w2,
            present(&us, &uss, Wave::StationaryContact),
            w5,
            present(&u2, u_plus, Wave::Contact { speed: sp }),
        ]
    };

    Ok(WaveFan66 {
        omega,
        states: [*u_minus, u1, us, uss, u2, *u_plus],
        waves,
        zeta,
        scalars,
    })
}

/// Solves `φ(d1, x, d0-) + φ(d2, G(x), d0+) = jump` for `x ≥ 0`; returns
/// `(x, G(x))`. The left-hand side is strictly decreasing in `x`, so Newton
/// steps are safeguarded by a bracket that starts as `[0, ∞)` and tightens
/// with every evaluation.
#[allow(clippy::too_many_arguments)]
fn solve_middle(
    left: &Phi66Curve,
    right: &Phi66Curve,
    d1: f64,
    d2: f64,
    d0m: f64,
    d0p: f64,
    jump: f64,
    mat: &MaterialParams,
) -> Result<(f64, f64)> {
    if d1 == d2 && jump == 0.0 && d0m == d0p {
        return Ok((d1, d1));
    }
    let mut prev: Option<(f64, f64, f64)> = None; // (x, G(x), G'(x))
    let mut eval = |x: f64| -> Result<(f64, f64, f64)> {
        let guess = prev.map(|(px, pg, ps)| pg + ps * (x - px));
        let (g, dg) = transfer_g_seeded(x, d0m, d0p, guess, mat)?;
        prev = Some((x, g, dg));
        let (p1, s1) = left.eval(x);
        let (p2, s2) = right.eval(g);
        Ok((p1 + p2 - jump, s1 + s2 * dg, g))
    };

    // Linearised guess: speeds frozen at the anchors.
    let la = lambda_of(d1, d0m, mat);
    let lb = lambda_of(d2, d0p, mat);
    let guess = (la * d1 + lb * d2 - jump) / (la + lb);
    let scale = d1.max(d2).max(guess.abs()).max(TINY);
    let xtol = |x: f64| ROOT_RTOL * x.max(1e-6 * scale);

    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    let mut zero_checked = false;
    let mut x = if guess > 0.0 { guess } else { 0.5 * scale };
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
        if next <= lo && lo == 0.0 && !zero_checked {
            zero_checked = true;
            let (f0, _, g0) = eval(0.0)?;
            if f0 <= 0.0 {
                return Ok((0.0, g0));
            }
        }
        let newton = next > lo && next < hi && next.is_finite();
        if !newton {
            next = if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * x.max(scale)
            };
        }
        let converged = if newton {
            (next - x).abs() <= NEWTON_STOP * x.max(1e-6 * scale)
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
        what: "stationary-contact root",
        iterations: MAX_ITER,
        residual: last,
    })
}

/// Transverse magnitude inside a rarefaction whose edges have magnitudes `a`
/// and `b`, at characteristic speed `|xi|`.
fn rarefaction_magnitude(a: f64, b: f64, d0: f64, xi: f64, mat: &MaterialParams) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let target = xi.abs();
    // λ decreases with the transverse magnitude
    bisect(|d| lambda_of(d, d0, mat) - target, lo, hi, 1e-15 * hi.max(TINY))
}

/// State of the fan at `ξ = x/t`. At a discontinuity the right-hand state is
/// returned.
pub fn sample66(fan: &WaveFan66, xi: f64, mat: &MaterialParams) -> State66 {
    for (i, wave) in fan.waves.iter().enumerate() {
        let Some((lo, hi)) = wave.span() else { continue };
        if xi < lo {
            return fan.states[i];
        }
        if xi < hi {
            return rarefaction_state66(fan, i, xi, mat);
        }
    }
    fan.states[5]
}

fn rarefaction_state66(fan: &WaveFan66, wave: usize, xi: f64, mat: &MaterialParams) -> State66 {
    let s = &fan.scalars;
    let omega = fan.omega;
    let zeta = fan.zeta.expect("rarefactions only occur when V is nonzero");
    let wz = omega.cross(zeta);
    if wave == 1 {
        let d = rarefaction_magnitude(s.d1, s.d_star, s.d0_minus, xi, mat);
        let phi = Phi66Curve::new(s.d1, s.d0_minus, mat).eval(d).0;
        State66::new(omega * s.d0_minus + zeta * d, fan.states[1].h + wz * phi)
    } else {
        let d = rarefaction_magnitude(s.d2, s.d_star_star, s.d0_plus, xi, mat);
        let phi = Phi66Curve::new(s.d2, s.d0_plus, mat).eval(d).0;
        State66::new(omega * s.d0_plus + zeta * d, fan.states[4].h - wz * phi)
    }
}

/// The state at `ξ = 0`, which determines the Godunov flux. Every 2-wave
/// moves left and every 5-wave right, so this is `u**`.
pub fn interface_state66(u_minus: &State66, u_plus: &State66, omega: Vec3, mat: &MaterialParams) -> Result<State66> {
    Ok(middle_states(u_minus, u_plus, omega, mat)?.states[2])
}

impl WaveFan66 {
    /// CSV dump, one row per wave: index, type, speed span and the six
    /// components of the states on either side.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "wave,type,speed_left,speed_right,\
             l_D1,l_D2,l_D3,l_H1,l_H2,l_H3,r_D1,r_D2,r_D3,r_H1,r_H2,r_H3\n",
        );
        let labels = [1, 2, 3, 5, 6];
        for (i, w) in self.waves.iter().enumerate() {
            let (a, b) = w.span().unwrap_or((f64::NAN, f64::NAN));
            let _ = write!(out, "{},{},{:e},{:e}", labels[i], w.kind(), a, b);
            for v in self.states[i]
                .to_array()
                .iter()
                .chain(self.states[i + 1].to_array().iter())
            {
                let _ = write!(out, ",{v:.17e}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{eigenvalues66, EPS_R_DEFAULT};

    fn mat() -> MaterialParams {
        MaterialParams::default()
    }

    fn data1d(m: &MaterialParams) -> (State66, State66) {
        let mu0 = m.mu0();
        (
            State66::new(Vec3::new(0.0, 0.03, 0.0), Vec3::new(0.0, 0.0, 3.0 / mu0)),
            State66::new(Vec3::new(0.03, 0.04, 0.04), Vec3::new(0.001 / mu0, 0.0, 3.0 / mu0)),
        )
    }

    #[test]
    fn v_vanishes_for_equal_longitudinal_states() {
        let m = mat();
        let u = State66::new(Vec3::new(0.02, 0.0, 0.0), Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(compute_v(&u, &u, Vec3::E1, &m), Vec3::ZERO);
    }

    #[test]
    fn v_for_equal_states_with_transverse_part() {
        // D = d0 ω + d ζ on both sides: V = -ω×(ω×((σ+ - σ-) D)) = 2σ+ d ζ.
        let m = mat();
        let d = Vec3::new(0.01, 0.02, 0.0);
        let u = State66::new(d, Vec3::new(0.0, 0.0, 1e5));
        let (sm, sp) = contact_speeds(&u, &u, &m);
        assert_eq!(sm, -sp);
        let v = compute_v(&u, &u, Vec3::E1, &m);
        let expect = Vec3::new(0.0, 2.0 * sp * 0.02, 0.0);
        assert!((v - expect).norm() <= 1e-15 * expect.norm());
        assert!(v.dot(Vec3::E1).abs() <= 1e-12 * v.norm());
    }

    #[test]
    fn v_on_reference_data_matches_hand_expansion() {
        let m = mat();
        let (um, up) = data1d(&m);
        let (sm, sp) = contact_speeds(&um, &up, &m);
        // ω = e1: ω×a = (0, -a3, a2)
        let jh = up.h - um.h;
        let b = up.d * sp - um.d * sm;
        let inner = Vec3::new(jh.x, jh.y + b.z, jh.z - b.y);
        let expect = Vec3::new(0.0, -inner.z, inner.y);
        let v = compute_v(&um, &up, Vec3::E1, &m);
        assert!((v - expect).norm() <= 1e-14 * expect.norm());
    }

    #[test]
    fn rejects_bad_direction() {
        let m = mat();
        let (um, up) = data1d(&m);
        assert!(matches!(
            solve_riemann66(&um, &up, Vec3::new(1.0, 1.0, 0.0), &m),
            Err(KerrError::NonUnitDirection { .. })
        ));
    }

    #[test]
    fn equal_states_give_trivial_fan() {
        let m = mat();
        let u = State66::new(Vec3::new(0.01, 0.02, -0.01), Vec3::new(1e4, -2e4, 3e4));
        let fan = solve_riemann66(&u, &u, Vec3::E1, &m).unwrap();
        assert!(fan.waves.iter().all(Wave::is_trivial), "{:?}", fan.waves);
        for s in &fan.states {
            assert!((s.d - u.d).norm() <= 1e-15 * u.d.norm());
            assert!((s.h - u.h).norm() <= 1e-12 * u.h.norm());
        }
    }

    #[test]
    fn reference_data_wave_sequence() {
        let m = mat();
        let (um, up) = data1d(&m);
        let fan = solve_riemann66(&um, &up, Vec3::E1, &m).unwrap();
        let kinds: Vec<_> = fan.waves.iter().map(Wave::kind).collect();
        assert_eq!(
            kinds,
            ["contact", "rarefaction", "stationary_contact", "shock", "contact"]
        );
    }

    #[test]
    fn tm_contact_reference_is_pure_six_contact() {
        let m = mat();
        let um = State66::new(Vec3::new(0.0, 0.03, 0.0), Vec3::new(0.0, 0.0, 3.0 / m.mu0()));
        let dp = Vec3::new(0.0, -0.03, 0.0);
        let (_, sp) = contact_speeds(&um, &um, &m);
        let up = State66::new(dp, um.h + Vec3::E1.cross(dp - um.d) * sp);
        let fan = solve_riemann66(&um, &up, Vec3::E1, &m).unwrap();
        let kinds: Vec<_> = fan.waves.iter().map(Wave::kind).collect();
        assert_eq!(
            kinds,
            ["trivial", "trivial", "trivial", "trivial", "contact"],
            "{fan:#?}"
        );
        assert!((fan.states[4].h - um.h).norm() <= 1e-12 * um.h.norm());
    }

    #[test]
    fn zero_v_branch_is_used_for_longitudinal_data() {
        let m = mat();
        let um = State66::new(Vec3::new(0.02, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.0));
        let up = State66::new(Vec3::new(0.01, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.0));
        let fan = solve_riemann66(&um, &up, Vec3::E1, &m).unwrap();
        assert!(fan.zeta.is_none());
        assert_eq!(fan.states[2].d, Vec3::new(0.02, 0.0, 0.0));
        assert_eq!(fan.states[3].d, Vec3::new(0.01, 0.0, 0.0));
        assert_eq!(fan.waves[2], Wave::StationaryContact);
        assert!(fan.waves[1].is_trivial() && fan.waves[3].is_trivial());
    }

    #[test]
    fn sampling_edges_and_ties() {
        let m = mat();
        let (um, up) = data1d(&m);
        let fan = solve_riemann66(&um, &up, Vec3::E1, &m).unwrap();
        assert_eq!(sample66(&fan, -1.01 * m.c(), &m), um);
        assert_eq!(sample66(&fan, 1.01 * m.c(), &m), up);
        assert_eq!(sample66(&fan, 0.0, &m), fan.states[3]);
        let Wave::Shock { speed } = fan.waves[3] else { panic!() };
        assert_eq!(sample66(&fan, speed, &m), fan.states[4]);
    }

    #[test]
    fn rarefaction_interior_is_characteristic() {
        let m = mat();
        let (um, up) = data1d(&m);
        let fan = solve_riemann66(&um, &up, Vec3::E1, &m).unwrap();
        let Wave::Rarefaction { head, tail } = fan.waves[1] else {
            panic!()
        };
        let xi = 0.5 * (head + tail);
        let u = sample66(&fan, xi, &m);
        let (_, l) = eigenvalues66(u.d, Vec3::E1, &m).unwrap();
        assert!((-l - xi).abs() <= 1e-9 * m.c());
        // continuity at both edges
        let a = sample66(&fan, head.min(tail) + 1e-9 * m.c(), &m);
        assert!((a.d - fan.states[1].d).norm() < 1e-6 * um.d.norm());
    }

    #[test]
    fn csv_dump_has_one_row_per_wave() {
        let m = mat();
        let (um, up) = data1d(&m);
        let fan = solve_riemann66(&um, &up, Vec3::E1, &m).unwrap();
        let csv = fan.to_csv();
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.lines().nth(2).unwrap().starts_with("2,rarefaction,"));
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 16);
    }

    #[test]
    fn linear_limit_reduces_to_maxwell() {
        let m = MaterialParams::new(1e-40).unwrap();
        assert!(m.eps_r() < EPS_R_DEFAULT);
        let (um, up) = data1d(&m);
        let fan = solve_riemann66(&um, &up, Vec3::E1, &m).unwrap();
        for w in &fan.waves {
            if let Some((a, b)) = w.span() {
                let s = a.abs().max(b.abs());
                assert!(s == 0.0 || (s - m.c()).abs() < 1e-9 * m.c(), "{w:?}");
            }
        }
    }
}
