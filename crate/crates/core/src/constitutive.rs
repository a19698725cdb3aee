//! Constitutive laws of an instantaneous Kerr medium.
//!
//! The medium is described by `D = ε0 (1 + εr |E|²) E`. Along a line the map
//! reduces to the odd cubic `q(e) = ε0 (e + εr e³)`, whose inverse `p` gives
//! `|E| = p(|D|)` and hence the field map `E = P(D)`.

use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{KerrError, Result};
use crate::vector::{Vec2, Vec3};

/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854_187_817e-12;
/// Vacuum permeability (H/m).
pub const MU0: f64 = 4.0 * std::f64::consts::PI * 1e-7;
/// Kerr coefficient used throughout the reference experiments (m²/V²).
pub const EPS_R_DEFAULT: f64 = 2e-18;

/// Absolute floor used when forming relative tolerances.
pub const TINY: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MaterialSpec", into = "MaterialSpec")]
pub struct MaterialParams {
    eps0: f64,
    mu0: f64,
    eps_r: f64,
    c: f64,
    sqrt_eps_r: f64,
}

/// Serialized form: only the independent constants are stored.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct MaterialSpec {
    #[serde(default = "default_eps0")]
    eps0: f64,
    #[serde(default = "default_mu0")]
    mu0: f64,
    eps_r: f64,
}

fn default_eps0() -> f64 {
    EPS0
}

fn default_mu0() -> f64 {
    MU0
}

impl TryFrom<MaterialSpec> for MaterialParams {
    type Error = KerrError;
    fn try_from(s: MaterialSpec) -> Result<Self> {
        MaterialParams::with_constants(s.eps0, s.mu0, s.eps_r)
    }
}

impl From<MaterialParams> for MaterialSpec {
    fn from(m: MaterialParams) -> Self {
        MaterialSpec {
            eps0: m.eps0,
            mu0: m.mu0,
            eps_r: m.eps_r,
        }
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams::new(EPS_R_DEFAULT).expect("default constants are valid")
    }
}

impl MaterialParams {
    /// Kerr medium with the standard vacuum constants.
    pub fn new(eps_r: f64) -> Result<Self> {
        Self::with_constants(EPS0, MU0, eps_r)
    }

    pub fn with_constants(eps0: f64, mu0: f64, eps_r: f64) -> Result<Self> {
        for (name, value) in [("eps0", eps0), ("mu0", mu0), ("eps_r", eps_r)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(KerrError::InvalidMaterial { name, value });
            }
        }
        Ok(MaterialParams {
            eps0,
            mu0,
            eps_r,
            c: 1.0 / (eps0 * mu0).sqrt(),
            sqrt_eps_r: eps_r.sqrt(),
        })
    }

    #[inline]
    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    #[inline]
    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    #[inline]
    pub fn eps_r(&self) -> f64 {
        self.eps_r
    }

    /// Speed of light in vacuum, `1/sqrt(ε0 μ0)`.
    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Conserved variables of the full-vector system.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State66 {
    /// Electric displacement (C/m²).
    pub d: Vec3,
    /// Magnetic field (A/m).
    pub h: Vec3,
}

impl State66 {
    pub const ZERO: State66 = State66 {
        d: Vec3::ZERO,
        h: Vec3::ZERO,
    };

    pub const fn new(d: Vec3, h: Vec3) -> Self {
        State66 { d, h }
    }

    pub fn is_finite(&self) -> bool {
        self.d.is_finite() && self.h.is_finite()
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.d.x, self.d.y, self.d.z, self.h.x, self.h.y, self.h.z]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        State66::new(Vec3::new(a[0], a[1], a[2]), Vec3::new(a[3], a[4], a[5]))
    }

    /// Transverse-magnetic components `(D1, D2, H3)`; the others are dropped.
    pub fn to_tm(&self) -> StateTM {
        StateTM::new(self.d.x, self.d.y, self.h.z)
    }
}

impl Add for State66 {
    type Output = State66;
    #[inline]
    fn add(self, o: State66) -> State66 {
        State66::new(self.d + o.d, self.h + o.h)
    }
}

impl Sub for State66 {
    type Output = State66;
    #[inline]
    fn sub(self, o: State66) -> State66 {
        State66::new(self.d - o.d, self.h - o.h)
    }
}

impl Mul<f64> for State66 {
    type Output = State66;
    #[inline]
    fn mul(self, a: f64) -> State66 {
        State66::new(self.d * a, self.h * a)
    }
}

impl AddAssign for State66 {
    #[inline]
    fn add_assign(&mut self, o: State66) {
        self.d += o.d;
        self.h += o.h;
    }
}

/// Conserved variables of the transverse-magnetic reduction: `D = (D1, D2, 0)`,
/// `H = (0, 0, H3)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateTM {
    pub d1: f64,
    pub d2: f64,
    pub h3: f64,
}

impl StateTM {
    pub const fn new(d1: f64, d2: f64, h3: f64) -> Self {
        StateTM { d1, d2, h3 }
    }

    #[inline]
    pub fn d(&self) -> Vec2 {
        Vec2::new(self.d1, self.d2)
    }

    pub fn from_parts(d: Vec2, h3: f64) -> Self {
        StateTM::new(d.x, d.y, h3)
    }

    /// The same field viewed as a full-vector state.
    pub fn embed(&self) -> State66 {
        State66::new(Vec3::new(self.d1, self.d2, 0.0), Vec3::new(0.0, 0.0, self.h3))
    }

    pub fn is_finite(&self) -> bool {
        self.d1.is_finite() && self.d2.is_finite() && self.h3.is_finite()
    }
}

/// `q(e) = ε0 (e + εr e³)`.
#[inline]
pub fn q_of_e(e: f64, mat: &MaterialParams) -> f64 {
    mat.eps0 * e * (1.0 + mat.eps_r * e * e)
}

/// Inverse of [`q_of_e`].
///
/// In the scaled variables `y = sqrt(εr) e`, `t = sqrt(εr) d / ε0` the
/// relation is `y³ + y = t`. Its real root is
/// `y = (2/√3) sinh(asinh(x)/3)` with `x = (3√3/2) t`, and writing
/// `w = x + sqrt(x² + 1)` turns the hyperbolic pair into a single cube root:
/// `sinh(asinh(x)/3) = (w^(1/3) - w^(-1/3)) / 2`. Small arguments use the
/// series instead. One Newton polish follows.
#[inline]
pub fn p_of_d(d: f64, mat: &MaterialParams) -> f64 {
    scaled_field(d * mat.sqrt_eps_r / mat.eps0) / mat.sqrt_eps_r
}

/// Real root of `y³ + y = t`.
#[inline]
pub(crate) fn scaled_field(t: f64) -> f64 {
    const K: f64 = 2.598_076_211_353_316; // 3√3/2
    const TWO_OVER_ROOT3: f64 = 1.154_700_538_379_251_5;
    let ta = t.abs();
    let mut y = if ta < 1e-3 {
        let t2 = ta * ta;
        ta * (1.0 - t2 * (1.0 - 3.0 * t2 * (1.0 - 4.0 * t2)))
    } else {
        let x = K * ta;
        let w = (x + (x * x + 1.0).sqrt()).cbrt();
        0.5 * TWO_OVER_ROOT3 * (w - 1.0 / w)
    };
    let y2 = y * y;
    y -= (y * (1.0 + y2) - ta) / (1.0 + 3.0 * y2);
    y.copysign(t)
}

/// `sqrt(εr) p(d)`: the dimensionless field, with `εr p² = y²`.
#[inline]
pub(crate) fn scaled_field_of_d(d: f64, mat: &MaterialParams) -> f64 {
    scaled_field(d * mat.sqrt_eps_r / mat.eps0)
}

/// `1 + εr p(|D|)²` for a displacement magnitude: the factor relating `D` and
/// `ε0 E`.
#[inline]
pub fn nonlinear_factor(d_norm: f64, mat: &MaterialParams) -> f64 {
    let e = p_of_d(d_norm, mat);
    1.0 + mat.eps_r * e * e
}

/// Electric field `E = P(D) = D / (ε0 (1 + εr p²(|D|)))`.
#[inline]
pub fn e_of_d(d: Vec3, mat: &MaterialParams) -> Vec3 {
    d / (mat.eps0 * nonlinear_factor(d.norm(), mat))
}

/// Checks `|omega| = 1` to 1e-12.
pub fn check_unit(omega: Vec3) -> Result<()> {
    let n = omega.norm();
    if (n - 1.0).abs() > 1e-12 || !n.is_finite() {
        return Err(KerrError::NonUnitDirection { norm: n });
    }
    Ok(())
}

/// The characteristic speeds `(λ1, λ)` of the full-vector system in direction
/// `omega`: the spectrum is `-λ1 ≤ -λ < 0 = 0 < λ ≤ λ1`.
pub fn eigenvalues66(d: Vec3, omega: Vec3, mat: &MaterialParams) -> Result<(f64, f64)> {
    check_unit(omega)?;
    Ok(eigenvalues66_unchecked(d, omega, mat))
}

#[inline]
pub(crate) fn eigenvalues66_unchecked(d: Vec3, omega: Vec3, mat: &MaterialParams) -> (f64, f64) {
    let e = e_of_d(d, mat);
    let e2 = e.norm2();
    let ew = e.dot(omega);
    let a = mat.eps_r * e2;
    let c2 = mat.c * mat.c;
    let l1 = (c2 / (1.0 + a)).sqrt();
    let l = (c2 * (1.0 + mat.eps_r * (e2 + 2.0 * ew * ew)) / ((1.0 + a) * (1.0 + 3.0 * a))).sqrt();
    // λ ≤ λ1 holds analytically; rounding can push λ a few ulps above.
    (l1, l.min(l1))
}

/// Electromagnetic energy density `η` and entropy flux `Q` of a TM state.
///
/// `η = ε0 (|E|²/2 + (3 εr / 4) |E|⁴) + μ0 H3² / 2`, `Q = H3 (E2, -E1)`.
/// The electric part is `∫ E·dD`, so `∇η = (E1, E2, μ0 H3)`.
pub fn energy_tm(u: &StateTM, mat: &MaterialParams) -> (f64, Vec2) {
    let e = e_of_d(Vec3::new(u.d1, u.d2, 0.0), mat);
    let e2 = e.norm2();
    let eta = mat.eps0 * (0.5 * e2 + 0.75 * mat.eps_r * e2 * e2) + 0.5 * mat.mu0 * u.h3 * u.h3;
    (eta, Vec2::new(u.h3 * e.y, -u.h3 * e.x))
}
