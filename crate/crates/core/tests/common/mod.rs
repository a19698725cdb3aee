//! Helpers shared by the integration tests: random data and independent
//! checks of fan invariants (written against the raw conservation law, not
//! against solver internals).
#![allow(dead_code)]

use kerr_core::constitutive::{e_of_d, eigenvalues66};
use kerr_core::riemann66::{Wave, WaveFan66};
use kerr_core::riemann_tm::WaveFanTM;
use kerr_core::{MaterialParams, State66, StateTM, Vec2, Vec3};
use rand::Rng;

pub const RH_TOL: f64 = 1e-9;

pub fn unit3(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v * (1.0 / n);
        }
    }
}

pub fn unit2(rng: &mut impl Rng) -> Vec2 {
    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    Vec2::new(t.cos(), t.sin())
}

fn ball3(rng: &mut impl Rng, r: f64) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if v.norm2() <= 1.0 {
            return v * r;
        }
    }
}

/// `|D| ≤ 0.1`, `|μ0 H| ≤ 10`.
pub fn random_state66(rng: &mut impl Rng, mat: &MaterialParams) -> State66 {
    State66::new(ball3(rng, 0.1), ball3(rng, 10.0) * (1.0 / mat.mu0()))
}

pub fn random_state_tm(rng: &mut impl Rng, mat: &MaterialParams) -> StateTM {
    let d = ball3(rng, 0.1);
    StateTM::new(d.x, d.y, rng.gen_range(-10.0..10.0) / mat.mu0())
}

/// Physical flux `(-ω×H, μ0⁻¹ ω×E)`.
pub fn flux66(u: &State66, omega: Vec3, mat: &MaterialParams) -> (Vec3, Vec3) {
    let e = e_of_d(u.d, mat);
    (-omega.cross(u.h), omega.cross(e) * (1.0 / mat.mu0()))
}

/// Relative Rankine–Hugoniot residual of a jump of speed `s`.
pub fn rh_residual66(s: f64, a: &State66, b: &State66, omega: Vec3, mat: &MaterialParams) -> f64 {
    let c = mat.c();
    let (fda, fha) = flux66(a, omega, mat);
    let (fdb, fhb) = flux66(b, omega, mat);
    let rd = (b.d - a.d) * s - (fdb - fda);
    let rh = (b.h - a.h) * s - (fhb - fha);
    // both residuals scaled by the natural flux magnitudes c|D| + |H|
    let scale_d = c * (a.d.norm() + b.d.norm()) + a.h.norm() + b.h.norm();
    let scale_h = c * scale_d;
    (rd.norm() / scale_d.max(1e-300)).max(rh.norm() / scale_h.max(1e-300))
}

fn states_close(a: &State66, b: &State66, tol: f64) -> bool {
    let s = a.d.norm() + b.d.norm() + (a.h.norm() + b.h.norm()) / 299792458.0;
    (a.d - b.d).norm() + (a.h - b.h).norm() / 299792458.0 <= tol * s + 1e-300
}

/// Checks RH, ordering, Lax inequalities and the contact/stationary
/// structure of a 6×6 fan.
pub fn check_fan66(fan: &WaveFan66, mat: &MaterialParams) -> Result<(), String> {
    let c = mat.c();
    let w = fan.omega;
    let speed_tol = 1e-9 * c;
    let lam = |u: &State66| eigenvalues66(u.d, w, mat).unwrap();
    let mut last = f64::NEG_INFINITY;
    for (i, wave) in fan.waves.iter().enumerate() {
        let (a, b) = (&fan.states[i], &fan.states[i + 1]);
        if let Some((lo, hi)) = wave.span() {
            if lo < last - speed_tol {
                return Err(format!("wave {i} overlaps its left neighbour: {lo} < {last}"));
            }
            last = hi;
        }
        if !wave.is_trivial() && i == 2 && !matches!(wave, Wave::StationaryContact) {
            return Err(format!("middle wave is {wave:?}"));
        }
        match *wave {
            Wave::Trivial => {
                if !states_close(a, b, 1e-12) {
                    return Err(format!("trivial wave {i} joins distinct states"));
                }
            }
            Wave::StationaryContact => {
                let r = rh_residual66(0.0, a, b, w, mat);
                if r > RH_TOL {
                    return Err(format!("stationary contact residual {r:e}"));
                }
            }
            Wave::Contact { speed } | Wave::Shock { speed } => {
                let r = rh_residual66(speed, a, b, w, mat);
                if r > RH_TOL {
                    return Err(format!("wave {i} RH residual {r:e}"));
                }
                let sign = if i < 2 { -1.0 } else { 1.0 };
                let (l1a, la) = lam(a);
                let (l1b, lb) = lam(b);
                let contact = (speed - sign * l1a).abs() <= speed_tol && (speed - sign * l1b).abs() <= speed_tol;
                let lax = if i < 2 {
                    -la + speed_tol >= speed && speed >= -lb - speed_tol
                } else {
                    la + speed_tol >= speed && speed >= lb - speed_tol
                };
                let ok = match (i, wave) {
                    (0 | 4, _) | (_, Wave::Contact { .. }) => contact,
                    _ => lax || contact,
                };
                if !ok {
                    return Err(format!(
                        "wave {i} ({wave:?}) fails Lax/contact test: λ(a)={la}, λ(b)={lb}, λ1={l1a},{l1b}"
                    ));
                }
            }
            Wave::Rarefaction { head, tail } => {
                let sign = if i < 2 { -1.0 } else { 1.0 };
                let (ha, ta) = if i < 2 { (a, b) } else { (b, a) };
                if (head - sign * lam(ha).1).abs() > speed_tol || (tail - sign * lam(ta).1).abs() > speed_tol {
                    return Err(format!("rarefaction {i} edges off characteristic speeds"));
                }
                // head must be farther from ξ = 0 than tail
                if head.abs() < tail.abs() - speed_tol {
                    return Err(format!("rarefaction {i} is compressive"));
                }
            }
            Wave::Composite { .. } => return Err("composite wave in a 6×6 fan".into()),
        }
    }
    Ok(())
}

/// `(d0, d, H3)` along `ω`.
pub fn tm_coords(u: &StateTM, w: Vec2) -> (f64, f64, f64) {
    (u.d1 * w.x + u.d2 * w.y, u.d2 * w.x - u.d1 * w.y, u.h3)
}

pub fn tm_from_coords(d0: f64, d: f64, h3: f64, w: Vec2) -> StateTM {
    StateTM::new(d0 * w.x - d * w.y, d0 * w.y + d * w.x, h3)
}

/// Relative RH residual of a TM jump of speed `s`.
pub fn rh_residual_tm(s: f64, a: &StateTM, b: &StateTM, w: Vec2, mat: &MaterialParams) -> f64 {
    let fa = flux66(&a.embed(), w.to_vec3(), mat);
    let fb = flux66(&b.embed(), w.to_vec3(), mat);
    let (da, db) = (a.embed(), b.embed());
    let rd = (db.d - da.d) * s - (fb.0 - fa.0);
    let rh = (db.h - da.h) * s - (fb.1 - fa.1);
    let c = mat.c();
    let scale_d = c * (da.d.norm() + db.d.norm()) + da.h.norm() + db.h.norm();
    (rd.norm() / scale_d.max(1e-300)).max(rh.norm() / (c * scale_d).max(1e-300))
}

/// Checks RH, ordering, stationary contact, Lax and Liu conditions of a TM fan.
pub fn check_fan_tm(fan: &WaveFanTM, mat: &MaterialParams) -> Result<(), String> {
    use kerr_core::riemann_tm::{liu_admissible, LIU_SAMPLES};
    let c = mat.c();
    let w = fan.omega;
    let tol = 1e-9 * c;
    let lam = |u: &StateTM| eigenvalues66(u.d().to_vec3(), w.to_vec3(), mat).unwrap().1;
    let mut last = f64::NEG_INFINITY;
    for (i, wave) in fan.waves.iter().enumerate() {
        let (a, b) = (&fan.states[i], &fan.states[i + 1]);
        if let Some((lo, hi)) = wave.span() {
            if lo < last - tol {
                return Err(format!("wave {i} out of order"));
            }
            last = hi;
        }
        let sign = if i == 0 { -1.0 } else { 1.0 };
        let (d0a, da, _) = tm_coords(a, w);
        let (d0b, db, _) = tm_coords(b, w);
        match *wave {
            Wave::Trivial => {
                if a != b && rh_residual_tm(0.0, a, b, w, mat) > 1e-12 {
                    return Err(format!("trivial wave {i} joins distinct states"));
                }
            }
            Wave::StationaryContact => {
                let r = rh_residual_tm(0.0, a, b, w, mat);
                if r > RH_TOL || i != 1 {
                    return Err(format!("stationary contact residual {r:e}"));
                }
            }
            Wave::Shock { speed } => {
                if (d0a - d0b).abs() > 1e-12 * (d0a.abs() + d0b.abs()) {
                    return Err("d0 jumps across a moving shock".into());
                }
                let r = rh_residual_tm(speed, a, b, w, mat);
                if r > RH_TOL {
                    return Err(format!("shock {i} RH residual {r:e}"));
                }
                let (la, lb) = (lam(a), lam(b));
                let lax = if i == 0 {
                    -la + tol >= speed && speed >= -lb - tol
                } else {
                    la + tol >= speed && speed >= lb - tol
                };
                // Liu is stated from the left state of the discontinuity
                if !lax || !liu_admissible(da, db, d0a, sign, LIU_SAMPLES, mat) {
                    return Err(format!("shock {i} not Liu/Lax admissible (d {da} -> {db})"));
                }
            }
            Wave::Rarefaction { head, tail } => {
                let (ha, ta) = if i == 0 { (a, b) } else { (b, a) };
                if (head - sign * lam(ha)).abs() > tol || (tail - sign * lam(ta)).abs() > tol {
                    return Err(format!("rarefaction {i} edges off characteristic speeds"));
                }
                if da * db < 0.0 {
                    return Err(format!("rarefaction {i} crosses d = 0"));
                }
            }
            Wave::Composite { shock, tail } => {
                let (ha, ta) = if i == 0 { (a, b) } else { (b, a) };
                let (_, dh, _) = tm_coords(ha, w);
                let (_, dt, _) = tm_coords(ta, w);
                if dh * dt >= 0.0 {
                    return Err(format!("composite {i} does not cross d = 0"));
                }
                if (tail - sign * lam(ta)).abs() > tol || shock.abs() < tail.abs() - tol {
                    return Err(format!("composite {i} speeds inconsistent"));
                }
                // rebuild the shock part from the tangency point
                let (anchor, star) = if i == 0 {
                    (a, fan.scalars.d_star_1)
                } else {
                    (b, fan.scalars.d_star_3)
                };
                let star = star.ok_or("composite without tangency point")?;
                let (d0, dx, h3) = tm_coords(anchor, w);
                let phi = kerr_core::wavecurves::varphi_tm(dx, star, d0, mat).map_err(|e| e.to_string())?;
                let mid = tm_from_coords(d0, star, if i == 0 { h3 + phi } else { h3 - phi }, w);
                let (l, r) = if i == 0 { (anchor, &mid) } else { (&mid, anchor) };
                let res = rh_residual_tm(shock, l, r, w, mat);
                let (_, dl, _) = tm_coords(l, w);
                let (_, dr, _) = tm_coords(r, w);
                if res > RH_TOL || !liu_admissible(dl, dr, d0, sign, LIU_SAMPLES, mat) {
                    return Err(format!("composite {i} shock part: RH {res:e} or Liu failure"));
                }
                if (shock - sign * lam(&mid)).abs() > tol {
                    return Err(format!("composite {i} shock not tangent"));
                }
            }
            Wave::Contact { .. } => return Err("moving contact in a TM fan".into()),
        }
    }
    Ok(())
}
