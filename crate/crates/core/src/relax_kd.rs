//! Relaxed Kerr–Debye scheme.
//!
//! Each step projects the cells onto the equilibrium manifold
//! `χ = εr p²(|D|)` and evaluates the interface flux of the Kerr–Debye
//! system, whose fields are all linearly degenerate, so its Riemann problem
//! only has contact discontinuities with speeds `0` and `±c/√(1+χ)`.

use serde::{Deserialize, Serialize};

use crate::constitutive::{p_of_d, MaterialParams, State66};
use crate::error::Result;
use crate::fv::{self, CellField, Grid, SchemeOptions, Solver};
use crate::vector::Vec3;

/// Kerr–Debye state: fields plus the susceptibility `χ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateKD {
    pub d: Vec3,
    pub h: Vec3,
    pub chi: f64,
}

impl StateKD {
    /// `E = D / (ε0 (1 + χ))`.
    #[inline]
    pub fn e(&self, mat: &MaterialParams) -> Vec3 {
        self.d * (1.0 / (mat.eps0() * (1.0 + self.chi)))
    }

    /// Relaxation speed `c/√(1+χ)`.
    pub fn speed(&self, mat: &MaterialParams) -> f64 {
        mat.c() / (1.0 + self.chi).sqrt()
    }

    pub fn fields(&self) -> State66 {
        State66::new(self.d, self.h)
    }
}

/// Sets `χ = εr p(|D|)²`.
#[inline]
pub fn project_equilibrium(u: &State66, mat: &MaterialParams) -> StateKD {
    let p = p_of_d(u.d.norm(), mat);
    StateKD {
        d: u.d,
        h: u.h,
        chi: mat.eps_r() * p * p,
    }
}

/// Distance of a state from the equilibrium manifold,
/// `εr |D|² / (ε0² (1+χ)²) - χ`.
pub fn equilibrium_residual(u: &StateKD, mat: &MaterialParams) -> f64 {
    let s = 1.0 + u.chi;
    mat.eps_r() * u.d.norm2() / (mat.eps0() * mat.eps0() * s * s) - u.chi
}

/// Interface flux of the relaxation system between `ul` and `ur` in
/// direction `omega`, `(D-flux, H-flux)` packed as a [`State66`].
pub fn kd_flux(ul: &StateKD, ur: &StateKD, omega: Vec3, mat: &MaterialParams) -> State66 {
    let (rm, rp) = ((1.0 + ul.chi).sqrt(), (1.0 + ur.chi).sqrt());
    let sum = rm + rp;
    let (em, ep) = (ul.e(mat), ur.e(mat));
    let (c, mu0) = (mat.c(), mat.mu0());

    let h_avg = (ul.h * rp + ur.h * rm) * (1.0 / sum);
    let e_jump = (ep - em) * (rp * rm / (c * mu0 * sum));
    let d_flux = -omega.cross(h_avg) + omega.cross(omega.cross(e_jump));

    let e_avg = (ep * rp + em * rm) * (1.0 / (mu0 * sum));
    let h_jump = (ur.h - ul.h) * (c / sum);
    let h_flux = omega.cross(e_avg) + omega.cross(omega.cross(h_jump));
    State66::new(d_flux, h_flux)
}

/// One relaxed Kerr–Debye step. It is the finite-volume step with the
/// interface flux swapped; limiter, time integrator and boundaries are
/// shared with the Godunov scheme.
pub fn kd_advance(
    field: &CellField,
    grid: &Grid,
    opts: &SchemeOptions,
    mat: &MaterialParams,
    t: f64,
    dt: f64,
) -> Result<CellField> {
    let opts = SchemeOptions {
        solver: Solver::KerrDebye,
        ..*opts
    };
    fv::advance(field, grid, &opts, mat, t, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fv::kerr_flux;

    fn mat() -> MaterialParams {
        MaterialParams::default()
    }

    fn data1d(m: &MaterialParams) -> (State66, State66) {
        (
            State66::new(Vec3::new(0.0, 0.03, 0.0), Vec3::new(0.0, 0.0, 3.0) * (1.0 / m.mu0())),
            State66::new(
                Vec3::new(0.03, 0.04, 0.04),
                Vec3::new(0.001, 0.0, 3.0) * (1.0 / m.mu0()),
            ),
        )
    }

    #[test]
    fn projection_of_zero_field() {
        let k = project_equilibrium(&State66::ZERO, &mat());
        assert_eq!(k.chi, 0.0);
    }

    #[test]
    fn projection_lands_on_manifold() {
        let m = mat();
        for d in [1e-6, 0.003, 0.03, 0.1, 3.0] {
            let u = State66::new(Vec3::new(0.6 * d, -0.8 * d, 0.0), Vec3::ZERO);
            let k = project_equilibrium(&u, &m);
            assert!(k.chi >= 0.0);
            let r = equilibrium_residual(&k, &m);
            assert!(r.abs() <= 1e-11 * k.chi.max(1.0), "{d}: {r:e}");
            // the relaxed field equals the Kerr field
            let e = crate::constitutive::e_of_d(u.d, &m);
            assert!((k.e(&m) - e).norm() <= 1e-13 * e.norm());
        }
    }

    #[test]
    fn projection_golden_at_reference_magnitude() {
        // εr p(0.03)², p from a 50-digit mpmath root of q(e) = 0.03
        let m = mat();
        let u = State66::new(Vec3::new(0.0, 0.03, 0.0), Vec3::ZERO);
        let chi = project_equilibrium(&u, &m).chi;
        assert!((chi / 2.2176595243266206 - 1.0).abs() < 1e-12, "{chi}");
    }

    #[test]
    fn equilibrium_flux_is_consistent() {
        let m = mat();
        let (a, b) = data1d(&m);
        for u in [a, b] {
            let k = project_equilibrium(&u, &m);
            for w in [Vec3::E1, Vec3::E2, Vec3::new(0.6, 0.0, 0.8)] {
                let f = kd_flux(&k, &k, w, &m);
                let g = kerr_flux(&u, w, &m);
                let scale = g.d.norm() + g.h.norm() / m.c();
                assert!((f.d - g.d).norm() + (f.h - g.h).norm() / m.c() <= 1e-12 * scale);
            }
        }
        let z = StateKD::default();
        assert_eq!(kd_flux(&z, &z, Vec3::E1, &m), State66::ZERO);
    }

    // Independent transcription, component by component for ω = e1.
    fn kd_flux_e1(l: &StateKD, r: &StateKD, m: &MaterialParams) -> [f64; 6] {
        let (rm, rp) = ((1.0 + l.chi).sqrt(), (1.0 + r.chi).sqrt());
        let s = rm + rp;
        let el = l.d * (1.0 / (m.eps0() * (1.0 + l.chi)));
        let er = r.d * (1.0 / (m.eps0() * (1.0 + r.chi)));
        let cm = m.c() * m.mu0();
        // ω×(ω×v) = (0, -v2, -v3) and ω×v = (0, -v3, v2) for ω = e1
        [
            0.0,
            (rp * l.h.z + rm * r.h.z) / s - rp * rm * (er.y - el.y) / (cm * s),
            -(rp * l.h.y + rm * r.h.y) / s - rp * rm * (er.z - el.z) / (cm * s),
            0.0,
            -(rp * er.z + rm * el.z) / (m.mu0() * s) - m.c() * (r.h.y - l.h.y) / s,
            (rp * er.y + rm * el.y) / (m.mu0() * s) - m.c() * (r.h.z - l.h.z) / s,
        ]
    }

    #[test]
    fn reference_pair_flux_matches_transcription() {
        let m = mat();
        let (a, b) = data1d(&m);
        let (l, r) = (project_equilibrium(&a, &m), project_equilibrium(&b, &m));
        let got = kd_flux(&l, &r, Vec3::E1, &m).to_array();
        let want = kd_flux_e1(&l, &r, &m);
        for k in 0..6 {
            let scale = if k < 3 {
                want[1].abs() + want[2].abs()
            } else {
                want[4].abs() + want[5].abs()
            };
            assert!(
                (got[k] - want[k]).abs() <= 1e-13 * scale,
                "{k}: {} vs {}",
                got[k],
                want[k]
            );
        }
        assert_eq!(got[0], 0.0);
        assert_eq!(got[3], 0.0);
    }

    #[test]
    fn linear_limit_matches_exact_solver() {
        // With a vanishing Kerr coefficient both fluxes are the upwind flux
        // of linear Maxwell equations.
        let m = MaterialParams::new(1e-30).unwrap();
        let (a, b) = data1d(&m);
        let w = Vec3::new(0.0, 0.6, 0.8);
        let kd = kd_flux(&project_equilibrium(&a, &m), &project_equilibrium(&b, &m), w, &m);
        let god = crate::fv::godunov_flux(&a, &b, w, &m, Solver::Godunov66).unwrap();
        let scale = god.d.norm() + god.h.norm() / m.c();
        assert!((kd.d - god.d).norm() + (kd.h - god.h).norm() / m.c() <= 1e-9 * scale);
    }

    #[test]
    fn relaxation_speed_is_bounded_by_c() {
        let m = mat();
        for d in [0.0, 0.01, 0.1, 1.0] {
            let k = project_equilibrium(&State66::new(Vec3::new(d, 0.0, 0.0), Vec3::ZERO), &m);
            assert!(k.speed(&m) <= m.c());
        }
    }
}
