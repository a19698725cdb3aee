//! Finite-volume engine on Cartesian grids.
//!
//! Cell averages of `(D, H)` are updated with interface fluxes from an exact
//! Riemann solver (or the relaxed Kerr–Debye flux). Second order uses
//! componentwise minmod-limited affine reconstruction and Heun's two-stage
//! Runge–Kutta method; both directions are updated unsplit.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constitutive::{e_of_d, MaterialParams, State66};
use crate::error::{KerrError, Result};
use crate::relax_kd;
use crate::riemann66::interface_state66;
use crate::riemann_tm::interface_state_tm;
use crate::vector::{Vec2, Vec3};

/// Ghost layer width; enough for the MUSCL stencil.
pub const GHOST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub n_cells: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(n_cells: usize, x_min: f64, x_max: f64) -> Result<Self> {
        let dx = (x_max - x_min) / n_cells as f64;
        if n_cells == 0 || !(dx > 0.0) || !dx.is_finite() {
            return Err(KerrError::InvalidArgument(format!(
                "1D grid needs n_cells > 0 and x_max > x_min (n = {n_cells}, [{x_min}, {x_max}])"
            )));
        }
        Ok(Grid1D {
            n_cells,
            x_min,
            x_max,
            dx,
        })
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        let gx = Grid1D::new(nx, x.0, x.1)?;
        let gy = Grid1D::new(ny, y.0, y.1)?;
        Ok(Grid2D {
            nx,
            ny,
            x_min: x.0,
            x_max: x.1,
            y_min: y.0,
            y_max: y.1,
            dx: gx.dx,
            dy: gy.dx,
        })
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x_min + (i as f64 + 0.5) * self.dx,
            self.y_min + (j as f64 + 0.5) * self.dy,
        )
    }
}

/// A 1D or 2D mesh. A 1D mesh has a single row and no y ghosts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dimension")]
pub enum Grid {
    #[serde(rename = "1")]
    One(Grid1D),
    #[serde(rename = "2")]
    Two(Grid2D),
}

impl From<Grid1D> for Grid {
    fn from(g: Grid1D) -> Self {
        Grid::One(g)
    }
}

impl From<Grid2D> for Grid {
    fn from(g: Grid2D) -> Self {
        Grid::Two(g)
    }
}

impl Grid {
    pub fn nx(&self) -> usize {
        match self {
            Grid::One(g) => g.n_cells,
            Grid::Two(g) => g.nx,
        }
    }

    pub fn ny(&self) -> usize {
        match self {
            Grid::One(_) => 1,
            Grid::Two(g) => g.ny,
        }
    }

    pub fn dx(&self) -> f64 {
        match self {
            Grid::One(g) => g.dx,
            Grid::Two(g) => g.dx,
        }
    }

    /// `dy`, or `None` in 1D.
    pub fn dy(&self) -> Option<f64> {
        match self {
            Grid::One(_) => None,
            Grid::Two(g) => Some(g.dy),
        }
    }

    pub fn is_2d(&self) -> bool {
        matches!(self, Grid::Two(_))
    }

    pub fn x_center(&self, i: usize) -> f64 {
        match self {
            Grid::One(g) => g.center(i),
            Grid::Two(g) => g.center(i, 0).0,
        }
    }

    /// `y` of row `j`; `0` in 1D.
    pub fn y_center(&self, j: usize) -> f64 {
        match self {
            Grid::One(_) => 0.0,
            Grid::Two(g) => g.center(0, j).1,
        }
    }

    /// Area (2D) or length (1D) of one cell.
    pub fn cell_measure(&self) -> f64 {
        self.dx() * self.dy().unwrap_or(1.0)
    }
}

/// Cell averages with a ghost layer, row-major (`x` fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    nx: usize,
    ny: usize,
    gy: usize,
    data: Vec<State66>,
}

impl CellField {
    pub fn new(grid: &Grid, fill: State66) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let gy = if grid.is_2d() { GHOST } else { 0 };
        CellField {
            nx,
            ny,
            gy,
            data: vec![fill; (nx + 2 * GHOST) * (ny + 2 * gy)],
        }
    }

    /// Samples `f(x, y)` at cell centres (`y = 0` in 1D).
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> State66) -> Self {
        let mut field = CellField::new(grid, State66::ZERO);
        for j in 0..field.ny {
            let y = grid.y_center(j);
            for i in 0..field.nx {
                field.set(i, j, f(grid.x_center(i), y));
            }
        }
        field
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Length of the storage, ghosts included.
    pub fn storage_len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    fn stride(&self) -> usize {
        self.nx + 2 * GHOST
    }

    /// Storage index of cell `(i, j)`; negative or past-the-end indices
    /// address ghosts.
    #[inline]
    fn idx(&self, i: isize, j: isize) -> usize {
        let ii = (i + GHOST as isize) as usize;
        let jj = (j + self.gy as isize) as usize;
        jj * self.stride() + ii
    }

    #[inline]
    fn at(&self, i: isize, j: isize) -> State66 {
        self.data[self.idx(i, j)]
    }

    #[inline]
    fn put(&mut self, i: isize, j: isize, u: State66) {
        let k = self.idx(i, j);
        self.data[k] = u;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> State66 {
        self.at(i as isize, j as isize)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, u: State66) {
        self.put(i as isize, j as isize, u)
    }

    /// Interior cells in row-major order.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize, State66)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j, self.get(i, j))))
    }

    /// Interior cells as a contiguous vector, row-major.
    pub fn interior_values(&self) -> Vec<State66> {
        self.interior().map(|(_, _, u)| u).collect()
    }

    /// Sum of each conserved component times the cell measure.
    pub fn totals(&self, grid: &Grid) -> State66 {
        let mut s = [0.0; 6];
        for (_, _, u) in self.interior() {
            for (acc, v) in s.iter_mut().zip(u.to_array()) {
                *acc += v;
            }
        }
        State66::from_array(s) * grid.cell_measure()
    }

    fn check_finite(&self, time: f64) -> Result<()> {
        match self.interior().position(|(_, _, u)| !u.is_finite()) {
            Some(cell) => Err(KerrError::BlowUp { cell, time }),
            None => Ok(()),
        }
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.nx != grid.nx() || self.ny != grid.ny() || (self.gy > 0) != grid.is_2d() {
            return Err(KerrError::GridMismatch(format!(
                "field is {}x{}, grid is {}x{}",
                self.nx,
                self.ny,
                grid.nx(),
                grid.ny()
            )));
        }
        Ok(())
    }
}

/// Gaussian beam imposed as a timed boundary value of `H3`:
/// `μ0 H3(y, t) = B0 (1 - cos(2πt/T)) exp(-y²/w²)` for `t ∈ [0, T]`, else 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSource {
    pub b0_tesla: f64,
    pub period_s: f64,
    pub waist_m: f64,
}

impl PulseSource {
    pub fn h3(&self, y: f64, t: f64, mat: &MaterialParams) -> f64 {
        if !(0.0..=self.period_s).contains(&t) {
            return 0.0;
        }
        let phase = std::f64::consts::TAU * t / self.period_s;
        self.b0_tesla * (1.0 - phase.cos()) * (-(y / self.waist_m).powi(2)).exp() / mat.mu0()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    /// Zeroth-order extrapolation.
    #[default]
    Outflow,
    /// Mirror plane: normal `D` and tangential `H` even, the rest odd.
    ReflectSymmetry,
    /// Wraps around; both sides of the axis must be periodic.
    Periodic,
    /// Prescribed `H3(y, t)`, other components extrapolated. Only meaningful
    /// on the `x` sides.
    DirichletTimed { source: PulseSource },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Boundaries {
    #[serde(default)]
    pub x_lo: Boundary,
    #[serde(default)]
    pub x_hi: Boundary,
    #[serde(default)]
    pub y_lo: Boundary,
    #[serde(default)]
    pub y_hi: Boundary,
}

impl Boundaries {
    pub fn uniform(b: Boundary) -> Self {
        Boundaries {
            x_lo: b,
            x_hi: b,
            y_lo: b,
            y_hi: b,
        }
    }

    fn validate(&self) -> Result<()> {
        let periodic = |b: &Boundary| matches!(b, Boundary::Periodic);
        for (lo, hi, axis) in [(&self.x_lo, &self.x_hi, "x"), (&self.y_lo, &self.y_hi, "y")] {
            if periodic(lo) != periodic(hi) {
                return Err(KerrError::Config {
                    field: format!("boundaries.{axis}"),
                    message: "periodic boundaries must be set on both sides".into(),
                });
            }
        }
        if matches!(self.y_lo, Boundary::DirichletTimed { .. }) || matches!(self.y_hi, Boundary::DirichletTimed { .. })
        {
            return Err(KerrError::Config {
                field: "boundaries.y".into(),
                message: "timed sources are only supported on x sides".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Solver {
    /// Exact 6×6 Riemann solver.
    #[default]
    #[serde(rename = "godunov6")]
    Godunov66,
    /// Exact TM Riemann solver; only `(D1, D2, H3)` enter the flux.
    #[serde(rename = "godunovTM")]
    GodunovTm,
    /// Relaxed Kerr–Debye flux.
    #[serde(rename = "kerr_debye")]
    KerrDebye,
}

impl Solver {
    pub fn name(&self) -> &'static str {
        match self {
            Solver::Godunov66 => "godunov6",
            Solver::GodunovTm => "godunovTM",
            Solver::KerrDebye => "kerr_debye",
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = KerrError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "godunov6" => Ok(Solver::Godunov66),
            "godunovTM" | "godunov_tm" => Ok(Solver::GodunovTm),
            "kerr_debye" => Ok(Solver::KerrDebye),
            _ => Err(KerrError::Config {
                field: "solver".into(),
                message: format!("unknown solver `{s}` (expected godunov6, godunovTM or kerr_debye)"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limiter {
    #[default]
    Minmod,
}

/// How the CFL number bounds the 2D time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CflRule {
    /// `dt = cfl · min(dx, dy) / c`.
    #[default]
    Min,
    /// `dt = cfl / (c (1/dx + 1/dy))`.
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeOptions {
    #[serde(default = "default_order")]
    pub order: u8,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub limiter: Limiter,
    #[serde(default)]
    pub cfl_rule: CflRule,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub boundaries: Boundaries,
}

fn default_order() -> u8 {
    2
}

fn default_cfl() -> f64 {
    0.3
}

impl Default for SchemeOptions {
    fn default() -> Self {
        SchemeOptions {
            order: 2,
            cfl: 0.3,
            limiter: Limiter::Minmod,
            cfl_rule: CflRule::Min,
            solver: Solver::Godunov66,
            boundaries: Boundaries::default(),
        }
    }
}

impl SchemeOptions {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.order, 1 | 2) {
            return Err(KerrError::Config {
                field: "order".into(),
                message: format!("must be 1 or 2, got {}", self.order),
            });
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(KerrError::Config {
                field: "cfl".into(),
                message: format!("must lie in (0, 1], got {}", self.cfl),
            });
        }
        self.boundaries.validate()
    }

    /// Largest admissible step; every wave speed is bounded by `c`.
    pub fn max_dt(&self, grid: &Grid, mat: &MaterialParams) -> f64 {
        let c = mat.c();
        match (grid.dy(), self.cfl_rule) {
            (None, _) => self.cfl * grid.dx() / c,
            (Some(dy), CflRule::Min) => self.cfl * grid.dx().min(dy) / c,
            (Some(dy), CflRule::Sum) => self.cfl / (c * (1.0 / grid.dx() + 1.0 / dy)),
        }
    }
}

/// Physical flux in direction `omega`: `(-ω×H, μ0⁻¹ ω×E)`.
#[inline]
pub fn kerr_flux(u: &State66, omega: Vec3, mat: &MaterialParams) -> State66 {
    let e = e_of_d(u.d, mat);
    State66::new(-omega.cross(u.h), omega.cross(e) * (1.0 / mat.mu0()))
}

/// Interface flux between traces `ul` and `ur`.
pub fn godunov_flux(ul: &State66, ur: &State66, omega: Vec3, mat: &MaterialParams, solver: Solver) -> Result<State66> {
    if ul == ur {
        return Ok(kerr_flux(ul, omega, mat));
    }
    match solver {
        Solver::Godunov66 => Ok(kerr_flux(&interface_state66(ul, ur, omega, mat)?, omega, mat)),
        Solver::GodunovTm => {
            let w = Vec2::new(omega.x, omega.y);
            let u0 = interface_state_tm(&ul.to_tm(), &ur.to_tm(), w, mat)?;
            Ok(kerr_flux(&u0.embed(), omega, mat))
        }
        Solver::KerrDebye => Ok(relax_kd::kd_flux(
            &relax_kd::project_equilibrium(ul, mat),
            &relax_kd::project_equilibrium(ur, mat),
            omega,
            mat,
        )),
    }
}

/// `minmod(w_c - w_l, w_r - w_c)`.
#[inline]
pub fn reconstruct_minmod(w_left: f64, w_center: f64, w_right: f64) -> f64 {
    minmod(w_center - w_left, w_right - w_center)
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a > 0.0 {
        a.min(b)
    } else {
        a.max(b)
    }
}

#[inline]
fn slope(l: State66, c: State66, r: State66) -> State66 {
    let (l, c, r) = (l.to_array(), c.to_array(), r.to_array());
    State66::from_array(std::array::from_fn(|k| reconstruct_minmod(l[k], c[k], r[k])))
}

/// Mirror image across a plane with normal along axis `axis` (0 = x, 1 = y).
fn reflect(u: State66, axis: usize) -> State66 {
    let mut d = u.d.to_array();
    let mut h = u.h.to_array();
    for k in 0..3 {
        if k == axis {
            h[k] = -h[k];
        } else {
            d[k] = -d[k];
        }
    }
    State66::new(Vec3::from_array(d), Vec3::from_array(h))
}

fn fill_ghosts(field: &mut CellField, grid: &Grid, b: &Boundaries, t: f64, mat: &MaterialParams) {
    let (nx, ny) = (field.nx as isize, field.ny as isize);
    let g = GHOST as isize;
    for j in 0..ny {
        let y = grid.y_center(j as usize);
        for k in 1..=g {
            let lo = ghost_value(field, &b.x_lo, (0, j), (k - 1, j), (nx - k, j), 0, y, t, mat);
            let hi = ghost_value(field, &b.x_hi, (nx - 1, j), (nx - k, j), (k - 1, j), 0, y, t, mat);
            field.put(-k, j, lo);
            field.put(nx - 1 + k, j, hi);
        }
    }
    if field.gy == 0 {
        return;
    }
    for i in 0..nx {
        for k in 1..=g {
            let lo = ghost_value(field, &b.y_lo, (i, 0), (i, k - 1), (i, ny - k), 1, 0.0, t, mat);
            let hi = ghost_value(field, &b.y_hi, (i, ny - 1), (i, ny - k), (i, k - 1), 1, 0.0, t, mat);
            field.put(i, -k, lo);
            field.put(i, ny - 1 + k, hi);
        }
    }
}

/// Value of one ghost cell from its nearest interior cell `edge`, its mirror
/// image `mirror` and its periodic image `wrap`.
#[allow(clippy::too_many_arguments)]
fn ghost_value(
    field: &CellField,
    b: &Boundary,
    edge: (isize, isize),
    mirror: (isize, isize),
    wrap: (isize, isize),
    axis: usize,
    y: f64,
    t: f64,
    mat: &MaterialParams,
) -> State66 {
    match b {
        Boundary::Outflow => field.at(edge.0, edge.1),
        Boundary::Periodic => field.at(wrap.0, wrap.1),
        Boundary::ReflectSymmetry => reflect(field.at(mirror.0, mirror.1), axis),
        Boundary::DirichletTimed { source } => {
            let mut u = field.at(edge.0, edge.1);
            u.h.z = source.h3(y, t, mat);
            u
        }
    }
}

/// Time derivative of the interior cell averages; ghosts must be filled.
fn residual(field: &CellField, grid: &Grid, opts: &SchemeOptions, mat: &MaterialParams) -> Result<Vec<State66>> {
    let (nx, ny) = (field.nx, field.ny);
    let second = opts.order == 2;
    let solver = opts.solver;
    let trace = |i: isize, j: isize, di: isize, dj: isize, side: f64| -> State66 {
        let u = field.at(i, j);
        if !second {
            return u;
        }
        let s = slope(field.at(i - di, j - dj), u, field.at(i + di, j + dj));
        u + s * (0.5 * side)
    };

    // x faces: face i sits between cells i-1 and i
    let fx: Vec<State66> = (0..(nx + 1) * ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = ((k % (nx + 1)) as isize, (k / (nx + 1)) as isize);
            let ul = trace(i - 1, j, 1, 0, 1.0);
            let ur = trace(i, j, 1, 0, -1.0);
            godunov_flux(&ul, &ur, Vec3::E1, mat, solver)
        })
        .collect::<Result<_>>()?;
    let fy: Vec<State66> = if grid.is_2d() {
        (0..nx * (ny + 1))
            .into_par_iter()
            .map(|k| {
                let (i, j) = ((k % nx) as isize, (k / nx) as isize);
                let ul = trace(i, j - 1, 0, 1, 1.0);
                let ur = trace(i, j, 0, 1, -1.0);
                godunov_flux(&ul, &ur, Vec3::E2, mat, solver)
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    let (rdx, rdy) = (1.0 / grid.dx(), grid.dy().map_or(0.0, |d| 1.0 / d));
    Ok((0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let row = j * (nx + 1);
            let mut r = (fx[row + i + 1] - fx[row + i]) * (-rdx);
            if !fy.is_empty() {
                r += (fy[(j + 1) * nx + i] - fy[j * nx + i]) * (-rdy);
            }
            r
        })
        .collect())
}

/// `out = a·x + b·(y + dt·r)` on the interior.
fn combine(x: &CellField, y: &CellField, r: &[State66], a: f64, b: f64, dt: f64) -> CellField {
    let mut out = x.clone();
    let nx = x.nx;
    let vals: Vec<State66> = (0..r.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let yk = y.get(i, j) + r[k] * dt;
            if a == 0.0 {
                yk * b
            } else {
                x.get(i, j) * a + yk * b
            }
        })
        .collect();
    for (k, v) in vals.into_iter().enumerate() {
        out.set(k % nx, k / nx, v);
    }
    out
}

/// One time step from `t` to `t + dt`.
pub fn advance(
    field: &CellField,
    grid: &Grid,
    opts: &SchemeOptions,
    mat: &MaterialParams,
    t: f64,
    dt: f64,
) -> Result<CellField> {
    field.check_grid(grid)?;
    let limit = opts.max_dt(grid, mat);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(KerrError::InvalidArgument(format!(
            "dt = {dt:e} outside (0, {limit:e}] allowed by the CFL condition"
        )));
    }
    let mut u = field.clone();
    fill_ghosts(&mut u, grid, &opts.boundaries, t, mat);
    let r0 = residual(&u, grid, opts, mat)?;
    let mut u1 = combine(&u, &u, &r0, 0.0, 1.0, dt);
    u1.check_finite(t + dt)?;
    if opts.order == 1 {
        return Ok(u1);
    }
    fill_ghosts(&mut u1, grid, &opts.boundaries, t + dt, mat);
    let r1 = residual(&u1, grid, opts, mat)?;
    let u2 = combine(&u, &u1, &r1, 0.5, 0.5, dt);
    u2.check_finite(t + dt)?;
    Ok(u2)
}

/// Number of steps and the uniform step used to reach `duration`.
pub fn step_plan(duration: f64, grid: &Grid, opts: &SchemeOptions, mat: &MaterialParams) -> (usize, f64) {
    let limit = opts.max_dt(grid, mat);
    let n = ((duration / limit) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (n, duration / n as f64)
}

/// Advances from `t0` to `t0 + duration` with a constant step, calling
/// `observe(step, t, field)` after every step.
pub fn integrate(
    field: CellField,
    grid: &Grid,
    opts: &SchemeOptions,
    mat: &MaterialParams,
    t0: f64,
    duration: f64,
    mut observe: impl FnMut(usize, f64, &CellField) -> Result<()>,
) -> Result<(CellField, usize, f64)> {
    opts.validate()?;
    let (n, dt) = step_plan(duration, grid, opts, mat);
    let mut u = field;
    for step in 1..=n {
        let t = t0 + (step - 1) as f64 * dt;
        u = advance(&u, grid, opts, mat, t, dt)?;
        observe(step, t0 + step as f64 * dt, &u)?;
    }
    Ok((u, n, dt))
}

/// `∫|div D| / ∫|∇D|` from centred differences on interior cells whose
/// neighbours are interior too; `None` when the denominator vanishes.
pub fn divergence_ratio(field: &CellField, grid: &Grid2D) -> Option<f64> {
    let (nx, ny) = (field.nx, field.ny);
    if nx < 3 || ny < 3 {
        return None;
    }
    let (hx, hy) = (0.5 / grid.dx, 0.5 / grid.dy);
    let (mut div, mut grad) = (0.0, 0.0);
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let ddx = (field.get(i + 1, j).d - field.get(i - 1, j).d) * hx;
            let ddy = (field.get(i, j + 1).d - field.get(i, j - 1).d) * hy;
            div += (ddx.x + ddy.y).abs();
            grad += (ddx.norm2() + ddy.norm2()).sqrt();
        }
    }
    (grad > 0.0).then(|| div / grad)
}

/// CSV snapshot: cell centre, `D`, `H`, `B = μ0 H` and optionally the
/// equilibrium susceptibility, in 17-digit scientific notation.
pub fn snapshot_csv(field: &CellField, grid: &Grid, mat: &MaterialParams, with_chi: bool) -> String {
    let mut out = String::new();
    out.push_str(if grid.is_2d() { "x,y" } else { "x" });
    out.push_str(",D1,D2,D3,H1,H2,H3,B1,B2,B3");
    if with_chi {
        out.push_str(",chi");
    }
    out.push('\n');
    for (i, j, u) in field.interior() {
        let _ = write!(out, "{:.16e}", grid.x_center(i));
        if grid.is_2d() {
            let _ = write!(out, ",{:.16e}", grid.y_center(j));
        }
        let b = u.h * mat.mu0();
        for v in u.to_array().into_iter().chain(b.to_array()) {
            let _ = write!(out, ",{v:.16e}");
        }
        if with_chi {
            let _ = write!(out, ",{:.16e}", relax_kd::project_equilibrium(&u, mat).chi);
        }
        out.push('\n');
    }
    out
}
