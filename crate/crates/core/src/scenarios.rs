//! Experiment harness: declarative configs, built-in experiments, error
//! norms, convergence studies and run comparison.
//!
//! Configs are JSON with SI units and unit-suffixed keys. Magnetic data are
//! given as `B = μ0 H` in tesla (`b_tesla`); cells store `H` in A/m.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constitutive::{e_of_d, MaterialParams, State66, StateTM};
use crate::error::{KerrError, Result};
use crate::fv::{
    self, divergence_ratio, Boundaries, Boundary, CellField, Grid, Grid1D, Grid2D, PulseSource, SchemeOptions, Solver,
};
use crate::riemann66::{contact_speeds, sample66, solve_riemann66, WaveFan66};
use crate::riemann_tm::{sample_tm, solve_riemann_tm, WaveFanTM};
use crate::vector::{Vec2, Vec3};
use crate::wavecurves::{r_of, s_of};

/// Final time of the Riemann experiments.
pub const RIEMANN_END_TIME: f64 = 10e-15;

/// Full-vector state as written in configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    /// `D` in C/m².
    pub d: [f64; 3],
    /// `μ0 H` in T.
    pub b_tesla: [f64; 3],
}

impl FieldSpec {
    pub fn to_state(&self, mat: &MaterialParams) -> State66 {
        State66::new(
            Vec3::from_array(self.d),
            Vec3::from_array(self.b_tesla) * (1.0 / mat.mu0()),
        )
    }

    pub fn from_state(u: &State66, mat: &MaterialParams) -> Self {
        FieldSpec {
            d: u.d.to_array(),
            b_tesla: (u.h * mat.mu0()).to_array(),
        }
    }
}

/// TM state as written in configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmSpec {
    pub d1: f64,
    pub d2: f64,
    pub b3_tesla: f64,
}

impl TmSpec {
    pub fn to_state(&self, mat: &MaterialParams) -> StateTM {
        StateTM::new(self.d1, self.d2, self.b3_tesla / mat.mu0())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `left` for `x < interface_x_m`, `right` otherwise.
    Riemann {
        left: FieldSpec,
        right: FieldSpec,
        #[serde(default)]
        interface_x_m: f64,
    },
    /// Four TM states split at `x = 0`, `y = 0`, listed as
    /// `[x<0 & y>0, x>0 & y>0, x>0 & y<0, x<0 & y<0]`.
    Quadrant {
        states: [TmSpec; 4],
    },
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    /// Absent for 1D runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    pub x_min_m: f64,
    pub x_max_m: f64,
    #[serde(default)]
    pub y_min_m: f64,
    #[serde(default)]
    pub y_max_m: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        let cfg = |e: KerrError| KerrError::Config {
            field: "grid".into(),
            message: e.to_string(),
        };
        Ok(match self.ny {
            None => Grid1D::new(self.nx, self.x_min_m, self.x_max_m).map_err(cfg)?.into(),
            Some(ny) => Grid2D::new(self.nx, ny, (self.x_min_m, self.x_max_m), (self.y_min_m, self.y_max_m))
                .map_err(cfg)?
                .into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    /// Extra snapshot times; the final state is always kept.
    #[serde(default)]
    pub snapshot_times_s: Vec<f64>,
    /// Record `I(t) = max |E|²` after every step.
    #[serde(default)]
    pub intensity_history: bool,
    /// Record the divergence ratio every `n` steps (2D only).
    #[serde(default)]
    pub divergence_every: Option<usize>,
    /// Add the equilibrium susceptibility column to snapshots.
    #[serde(default)]
    pub chi_column: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub initial_data: InitialData,
    #[serde(default)]
    pub material: MaterialParams,
    pub grid: GridSpec,
    pub end_time_s: f64,
    #[serde(default)]
    pub scheme: SchemeOptions,
    #[serde(default)]
    pub outputs: OutputSpec,
}

fn config_err(field: &str, message: impl Into<String>) -> KerrError {
    KerrError::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| config_err("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(config_err("name", "must not be empty"));
        }
        if !(self.end_time_s > 0.0 && self.end_time_s.is_finite()) {
            return Err(config_err(
                "end_time_s",
                format!("must be positive, got {}", self.end_time_s),
            ));
        }
        let grid = self.grid.build()?;
        self.scheme.validate()?;
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match &self.initial_data {
            InitialData::Riemann {
                left,
                right,
                interface_x_m,
            } => {
                for (n, s) in [("left", left), ("right", right)] {
                    if !finite(&s.d) || !finite(&s.b_tesla) {
                        return Err(config_err(&format!("initial_data.{n}"), "non-finite value"));
                    }
                }
                if !interface_x_m.is_finite() {
                    return Err(config_err("initial_data.interface_x_m", "non-finite value"));
                }
            }
            InitialData::Quadrant { states } => {
                if !grid.is_2d() {
                    return Err(config_err("initial_data", "quadrant data need a 2D grid (set grid.ny)"));
                }
                if states.iter().any(|s| !finite(&[s.d1, s.d2, s.b3_tesla])) {
                    return Err(config_err("initial_data.states", "non-finite value"));
                }
            }
            InitialData::Zero => {}
        }
        for t in &self.outputs.snapshot_times_s {
            if !(*t >= 0.0 && *t <= self.end_time_s) {
                return Err(config_err(
                    "outputs.snapshot_times_s",
                    format!("{t} outside [0, end_time_s]"),
                ));
            }
        }
        if self.outputs.divergence_every == Some(0) {
            return Err(config_err("outputs.divergence_every", "must be at least 1"));
        }
        Ok(())
    }

    /// Cell-centre samples of the initial data.
    pub fn initial_field(&self, grid: &Grid) -> CellField {
        let m = &self.material;
        match &self.initial_data {
            InitialData::Riemann {
                left,
                right,
                interface_x_m,
            } => {
                let (a, b) = (left.to_state(m), right.to_state(m));
                CellField::from_fn(grid, |x, _| if x < *interface_x_m { a } else { b })
            }
            InitialData::Quadrant { states } => {
                let u: Vec<State66> = states.iter().map(|s| s.to_state(m).embed()).collect();
                CellField::from_fn(grid, |x, y| match (x < 0.0, y < 0.0) {
                    (true, false) => u[0],
                    (false, false) => u[1],
                    (false, true) => u[2],
                    (true, true) => u[3],
                })
            }
            InitialData::Zero => CellField::new(grid, State66::ZERO),
        }
    }
}

/// The 1D Riemann test: data of the reference pair on `[-cT, cT]`.
pub fn riemann1d(n_cells: usize, solver: Solver) -> ScenarioConfig {
    let mat = MaterialParams::default();
    let x = mat.c() * RIEMANN_END_TIME;
    ScenarioConfig {
        name: format!("riemann1d_{n_cells}_{}", solver.name()),
        initial_data: InitialData::Riemann {
            left: FieldSpec {
                d: [0.0, 0.03, 0.0],
                b_tesla: [0.0, 0.0, 3.0],
            },
            right: FieldSpec {
                d: [0.03, 0.04, 0.04],
                b_tesla: [0.001, 0.0, 3.0],
            },
            interface_x_m: 0.0,
        },
        material: mat,
        grid: GridSpec {
            nx: n_cells,
            ny: None,
            x_min_m: -x,
            x_max_m: x,
            y_min_m: 0.0,
            y_max_m: 0.0,
        },
        end_time_s: RIEMANN_END_TIME,
        scheme: SchemeOptions {
            solver,
            ..Default::default()
        },
        outputs: OutputSpec::default(),
    }
}

/// Contact-family member `m`: `D+ = R_m D-` with `R_m` the rotation by
/// `mπ/12` about `e1`, and `H+ = H- + σ+ ω×(D+ - D-)`, a pure 6-contact.
pub fn contact_family(m: u32, n_cells: usize, solver: Solver) -> ScenarioConfig {
    let mat = MaterialParams::default();
    let (dm, hm) = (Vec3::new(0.0, 0.03, 0.0), Vec3::new(0.0, 0.0, 3.0) * (1.0 / mat.mu0()));
    let theta = m as f64 * std::f64::consts::PI / 12.0;
    let (s, c) = theta.sin_cos();
    let dp = Vec3::new(dm.x, c * dm.y - s * dm.z, s * dm.y + c * dm.z);
    let um = State66::new(dm, hm);
    let (_, sp) = contact_speeds(&um, &State66::new(dp, hm), &mat);
    let hp = hm + Vec3::E1.cross(dp - dm) * sp;
    let mut cfg = riemann1d(n_cells, solver);
    cfg.name = format!("contact_family_m{m}_{n_cells}_{}", solver.name());
    cfg.initial_data = InitialData::Riemann {
        left: FieldSpec::from_state(&um, &mat),
        right: FieldSpec::from_state(&State66::new(dp, hp), &mat),
        interface_x_m: 0.0,
    };
    cfg
}

/// Quadrant TM states for transverse levels `delta_m < delta_p`, with
/// `H3 = 0` in quadrants 1 and 4. Quadrant 2 is the right state of a single
/// 5-shock from quadrant 1 and quadrant 3 the right state of a single
/// 2-rarefaction from quadrant 4 (both across `x = 0`).
pub fn quadrant_states(delta_m: f64, delta_p: f64, mat: &MaterialParams) -> Result<[TmSpec; 4]> {
    if !(0.0 < delta_m && delta_m < delta_p) {
        return Err(config_err("quadrant", "need 0 < delta_m < delta_p"));
    }
    // across x = 0 the longitudinal component is D1 and the transverse one D2
    let d0 = delta_m;
    let s = s_of(delta_p, delta_m, d0, mat);
    let d0r = delta_p;
    let r = r_of(delta_m, delta_p, d0r, mat)?;
    let b = |h: f64| h * mat.mu0();
    Ok([
        TmSpec {
            d1: delta_m,
            d2: delta_m,
            b3_tesla: 0.0,
        },
        TmSpec {
            d1: delta_m,
            d2: delta_p,
            b3_tesla: b(s),
        },
        TmSpec {
            d1: delta_p,
            d2: delta_p,
            b3_tesla: b(-r),
        },
        TmSpec {
            d1: delta_p,
            d2: delta_m,
            b3_tesla: 0.0,
        },
    ])
}

/// 2D quadrant test on `]-cT, cT[²` with `T = 10 fs`.
pub fn quadrant2d(n: usize, solver: Solver) -> Result<ScenarioConfig> {
    let mat = MaterialParams::default();
    let x = mat.c() * RIEMANN_END_TIME;
    Ok(ScenarioConfig {
        name: format!("quadrant2d_{n}_{}", solver.name()),
        initial_data: InitialData::Quadrant {
            states: quadrant_states(0.03, 0.04, &mat)?,
        },
        material: mat,
        grid: GridSpec {
            nx: n,
            ny: Some(n),
            x_min_m: -x,
            x_max_m: x,
            y_min_m: -x,
            y_max_m: x,
        },
        end_time_s: RIEMANN_END_TIME,
        scheme: SchemeOptions {
            solver,
            ..Default::default()
        },
        outputs: OutputSpec {
            divergence_every: Some(10),
            ..Default::default()
        },
    })
}

/// Default pulse parameters: `B0 = 6.087 T`, `T = 20 fs`, `w = 10 μm`.
pub const PULSE: PulseSource = PulseSource {
    b0_tesla: 6.087,
    period_s: 20e-15,
    waist_m: 10e-6,
};

/// Pulse self-focusing test on `]0, X[ × ]0, Y[` with a symmetry plane at
/// `y = 0` and the beam imposed on `x = 0`.
pub fn pulse2d(nx: usize, ny: usize, x_m: f64, y_m: f64, end_time_s: f64, solver: Solver) -> ScenarioConfig {
    ScenarioConfig {
        name: format!("pulse2d_{nx}x{ny}_{}", solver.name()),
        initial_data: InitialData::Zero,
        material: MaterialParams::default(),
        grid: GridSpec {
            nx,
            ny: Some(ny),
            x_min_m: 0.0,
            x_max_m: x_m,
            y_min_m: 0.0,
            y_max_m: y_m,
        },
        end_time_s,
        scheme: SchemeOptions {
            solver,
            boundaries: Boundaries {
                x_lo: Boundary::DirichletTimed { source: PULSE },
                x_hi: Boundary::Outflow,
                y_lo: Boundary::ReflectSymmetry,
                y_hi: Boundary::Outflow,
            },
            ..Default::default()
        },
        outputs: OutputSpec {
            intensity_history: true,
            ..Default::default()
        },
    }
}

/// Identifier of the library build that produced a run.
pub fn build_id() -> String {
    format!(
        "{}-{}+{}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        option_env!("KERR_GIT_REV").unwrap_or("unknown")
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config: ScenarioConfig,
    pub build_id: String,
    pub dt_s: f64,
    pub steps: usize,
    pub cfl_rule: fv::CflRule,
    /// Initial states in SI (`H` in A/m), alongside the `B` values of the config.
    pub initial_states_si: Vec<State66>,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time_s: f64,
    pub field: CellField,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub grid: Grid,
    pub metadata: RunMetadata,
    /// Requested snapshots in time order; the last entry is the final state.
    pub snapshots: Vec<Snapshot>,
    pub intensity: Vec<(f64, f64)>,
    pub divergence: Vec<(f64, Option<f64>)>,
    /// Last good state when the run blew up, with the error.
    pub failure: Option<(Snapshot, KerrError)>,
}

impl RunArtifacts {
    pub fn final_field(&self) -> &CellField {
        &self.snapshots.last().expect("at least one snapshot").field
    }

    pub fn final_time(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.time_s)
    }

    /// Writes `metadata.json`, `snapshot_<k>.csv`, `final.csv` and the
    /// requested histories into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mat = &self.metadata.config.material;
        let chi = self.metadata.config.outputs.chi_column;
        let meta = serde_json::to_string_pretty(&self.metadata).map_err(|e| KerrError::Io(e.to_string()))?;
        std::fs::write(dir.join("metadata.json"), meta)?;
        let n = self.snapshots.len();
        for (k, s) in self.snapshots.iter().enumerate() {
            let name = if k + 1 == n {
                "final.csv".to_string()
            } else {
                format!("snapshot_{k}.csv")
            };
            let mut text = format!("# t = {:.16e}\n", s.time_s);
            text.push_str(&fv::snapshot_csv(&s.field, &self.grid, mat, chi));
            std::fs::write(dir.join(name), text)?;
        }
        if !self.intensity.is_empty() {
            let mut text = String::from("t,intensity\n");
            for (t, i) in &self.intensity {
                let _ = writeln!(text, "{t:.16e},{i:.16e}");
            }
            std::fs::write(dir.join("intensity.csv"), text)?;
        }
        if !self.divergence.is_empty() {
            let mut text = String::from("t,divergence_ratio\n");
            for (t, r) in &self.divergence {
                match r {
                    Some(r) => writeln!(text, "{t:.16e},{r:.16e}"),
                    None => writeln!(text, "{t:.16e},nan"),
                }
                .expect("write to string");
            }
            std::fs::write(dir.join("divergence.csv"), text)?;
        }
        if let Some((s, e)) = &self.failure {
            let mut text = format!("# last good state at t = {:.16e}; {e}\n", s.time_s);
            text.push_str(&fv::snapshot_csv(&s.field, &self.grid, mat, chi));
            std::fs::write(dir.join("last_good.csv"), text)?;
        }
        Ok(())
    }
}

/// `max |E|²` over the interior cells.
pub fn max_intensity(field: &CellField, mat: &MaterialParams) -> f64 {
    field
        .interior()
        .map(|(_, _, u)| e_of_d(u.d, mat).norm2())
        .fold(0.0, f64::max)
}

/// Runs a scenario. A blow-up ends the run early: the artifacts keep the
/// last good state in `failure` and the error is returned alongside.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunArtifacts> {
    config.validate()?;
    let grid = config.grid.build()?;
    let mat = &config.material;
    let opts = &config.scheme;
    let (steps, dt) = fv::step_plan(config.end_time_s, &grid, opts, mat);
    let initial = config.initial_field(&grid);
    let initial_states_si = match &config.initial_data {
        InitialData::Riemann { left, right, .. } => vec![left.to_state(mat), right.to_state(mat)],
        InitialData::Quadrant { states } => states.iter().map(|s| s.to_state(mat).embed()).collect(),
        InitialData::Zero => Vec::new(),
    };
    let metadata = RunMetadata {
        config: config.clone(),
        build_id: build_id(),
        dt_s: dt,
        steps,
        cfl_rule: opts.cfl_rule,
        initial_states_si,
    };

    let mut times: Vec<f64> = config.outputs.snapshot_times_s.clone();
    times.sort_by(f64::total_cmp);
    let mut snapshots = Vec::new();
    let mut next = 0;
    while next < times.len() && times[next] <= 0.0 {
        snapshots.push(Snapshot {
            time_s: 0.0,
            field: initial.clone(),
        });
        next += 1;
    }
    let mut intensity = Vec::new();
    let mut divergence = Vec::new();
    let g2 = match grid {
        Grid::Two(g) => Some(g),
        Grid::One(_) => None,
    };
    if config.outputs.intensity_history {
        intensity.push((0.0, max_intensity(&initial, mat)));
    }

    let mut last_good = Snapshot {
        time_s: 0.0,
        field: initial.clone(),
    };
    let mut u = initial;
    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        let t_new = if step == steps {
            config.end_time_s
        } else {
            step as f64 * dt
        };
        match fv::advance(&u, &grid, opts, mat, t, dt) {
            Ok(v) => u = v,
            Err(e @ KerrError::BlowUp { .. }) => {
                return Ok(RunArtifacts {
                    grid,
                    metadata,
                    snapshots,
                    intensity,
                    divergence,
                    failure: Some((last_good, e)),
                });
            }
            Err(e) => return Err(e),
        }
        if config.outputs.intensity_history {
            intensity.push((t_new, max_intensity(&u, mat)));
        }
        if let (Some(every), Some(g)) = (config.outputs.divergence_every, g2.as_ref()) {
            if step % every == 0 || step == steps {
                divergence.push((t_new, divergence_ratio(&u, g)));
            }
        }
        while next < times.len() && times[next] <= t_new + 0.5 * dt && step < steps {
            snapshots.push(Snapshot {
                time_s: t_new,
                field: u.clone(),
            });
            next += 1;
        }
        last_good = Snapshot {
            time_s: t_new,
            field: u.clone(),
        };
    }
    snapshots.push(last_good);
    Ok(RunArtifacts {
        grid,
        metadata,
        snapshots,
        intensity,
        divergence,
        failure: None,
    })
}

/// Exact self-similar solution centred at `x0`.
#[derive(Debug, Clone)]
pub enum ExactSolution {
    Full { fan: WaveFan66, x0: f64 },
    Tm { fan: WaveFanTM, x0: f64 },
    Constant(State66),
}

impl ExactSolution {
    /// The 6×6 solution of a Riemann config, in direction `e1`.
    pub fn full(config: &ScenarioConfig) -> Result<Self> {
        let (a, b, x0) = riemann_pair(config)?;
        Ok(ExactSolution::Full {
            fan: solve_riemann66(&a, &b, Vec3::E1, &config.material)?,
            x0,
        })
    }

    /// Liu's TM solution of a Riemann config; only `(D1, D2, H3)` enter.
    pub fn tm(config: &ScenarioConfig) -> Result<Self> {
        let (a, b, x0) = riemann_pair(config)?;
        Ok(ExactSolution::Tm {
            fan: solve_riemann_tm(&a.to_tm(), &b.to_tm(), Vec2::new(1.0, 0.0), &config.material)?,
            x0,
        })
    }

    pub fn sample(&self, x: f64, t: f64, mat: &MaterialParams) -> State66 {
        match self {
            ExactSolution::Full { fan, x0 } => {
                if t <= 0.0 {
                    return if x < *x0 { fan.states[0] } else { fan.states[5] };
                }
                sample66(fan, (x - x0) / t, mat)
            }
            ExactSolution::Tm { fan, x0 } => {
                let u = if t <= 0.0 {
                    if x < *x0 {
                        fan.states[0]
                    } else {
                        fan.states[3]
                    }
                } else {
                    sample_tm(fan, (x - x0) / t, mat)
                };
                u.embed()
            }
            ExactSolution::Constant(u) => *u,
        }
    }
}

fn riemann_pair(config: &ScenarioConfig) -> Result<(State66, State66, f64)> {
    match &config.initial_data {
        InitialData::Riemann {
            left,
            right,
            interface_x_m,
        } => Ok((
            left.to_state(&config.material),
            right.to_state(&config.material),
            *interface_x_m,
        )),
        _ => Err(config_err("initial_data", "an exact solution needs Riemann data")),
    }
}

/// L1 relative errors of a 1D field against an exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Error {
    /// Per component `D1, D2, D3, H1, H2, H3` (relative to that component's
    /// exact norm, or absolute when it vanishes).
    pub components: [f64; 6],
    /// `Σ_k Σ_i |D_k - D_k,exact| / Σ_k Σ_i |D_k,exact|`.
    pub d: f64,
    /// Same for `H`.
    pub h: f64,
    /// Mean of `d` and `h`.
    pub aggregate: f64,
    /// True when some exact norm vanished and an absolute norm was used.
    pub absolute_fallback: bool,
}

/// L1 errors on a 1D grid at time `t` (midpoint rule: cell values against
/// the exact solution at cell centres).
pub fn l1_relative_error(
    field: &CellField,
    grid: &Grid,
    exact: &ExactSolution,
    t: f64,
    mat: &MaterialParams,
) -> L1Error {
    let dx = grid.dx();
    let mut num = [0.0; 6];
    let mut den = [0.0; 6];
    for (i, _, u) in field.interior() {
        let e = exact.sample(grid.x_center(i), t, mat).to_array();
        for (k, v) in u.to_array().into_iter().enumerate() {
            num[k] += (v - e[k]).abs() * dx;
            den[k] += e[k].abs() * dx;
        }
    }
    let mut fallback = false;
    let mut rel = |n: f64, d: f64| {
        if d > 0.0 {
            n / d
        } else {
            fallback |= n > 0.0;
            n
        }
    };
    let components = std::array::from_fn(|k| rel(num[k], den[k]));
    let d = rel(num[..3].iter().sum(), den[..3].iter().sum());
    let h = rel(num[3..].iter().sum(), den[3..].iter().sum());
    L1Error {
        components,
        d,
        h,
        aggregate: 0.5 * (d + h),
        absolute_fallback: fallback,
    }
}

/// Which exact solution the errors of a convergence study refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Full,
    Tm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub dx: f64,
    pub error: L1Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log e` against `log dx`; `None` when some
    /// error vanishes.
    pub order_d: Option<f64>,
    pub order_h: Option<f64>,
    pub order: Option<f64>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_cells,dx,err_d,err_h,err_aggregate\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.n_cells, r.dx, r.error.d, r.error.h, r.error.aggregate
            );
        }
        let fmt = |o: Option<f64>| o.map_or("undefined".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(
            out,
            "# observed order: d = {}, h = {}, aggregate = {}",
            fmt(self.order_d),
            fmt(self.order_h),
            fmt(self.order)
        );
        out
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn observed_order(dx: &[f64], err: &[f64]) -> Option<f64> {
    if dx.len() < 2 || err.iter().any(|e| !(*e > 0.0)) {
        return None;
    }
    let n = dx.len() as f64;
    let lx: Vec<f64> = dx.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs a 1D Riemann config at each cell count and measures L1 errors at
/// the final time against the chosen exact solution.
pub fn convergence_study(base: &ScenarioConfig, cells: &[usize], reference: Reference) -> Result<ConvergenceTable> {
    if cells.len() < 2 {
        return Err(config_err(
            "cells",
            "a convergence study needs at least two cell counts",
        ));
    }
    if base.grid.ny.is_some() {
        return Err(config_err("grid", "convergence studies are 1D"));
    }
    let exact = match reference {
        Reference::Full => ExactSolution::full(base)?,
        Reference::Tm => ExactSolution::tm(base)?,
    };
    let mut rows = Vec::new();
    for &n in cells {
        let mut cfg = base.clone();
        cfg.grid.nx = n;
        cfg.outputs = OutputSpec::default();
        let run = run_scenario(&cfg)?;
        if let Some((_, e)) = run.failure {
            return Err(e);
        }
        let err = l1_relative_error(run.final_field(), &run.grid, &exact, run.final_time(), &cfg.material);
        rows.push(ConvergenceRow {
            n_cells: n,
            dx: run.grid.dx(),
            error: err,
        });
    }
    let dx: Vec<f64> = rows.iter().map(|r| r.dx).collect();
    let pick = |f: fn(&L1Error) -> f64| observed_order(&dx, &rows.iter().map(|r| f(&r.error)).collect::<Vec<_>>());
    Ok(ConvergenceTable {
        order_d: pick(|e| e.d),
        order_h: pick(|e| e.h),
        order: pick(|e| e.aggregate),
        rows,
    })
}

/// Cell values read back from a snapshot CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotData {
    pub coords: Vec<[f64; 2]>,
    pub values: Vec<[f64; 6]>,
}

impl SnapshotData {
    pub fn from_field(field: &CellField, grid: &Grid) -> Self {
        let mut coords = Vec::new();
        let mut values = Vec::new();
        for (i, j, u) in field.interior() {
            coords.push([grid.x_center(i), grid.y_center(j)]);
            values.push(u.to_array());
        }
        SnapshotData { coords, values }
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| KerrError::Io("empty snapshot".into()))?
            .split(',')
            .collect();
        let col = |name: &str| header.iter().position(|h| *h == name);
        let x = col("x").ok_or_else(|| KerrError::Io("snapshot lacks an x column".into()))?;
        let y = col("y");
        let fields: Vec<usize> = ["D1", "D2", "D3", "H1", "H2", "H3"]
            .iter()
            .map(|n| col(n).ok_or_else(|| KerrError::Io(format!("snapshot lacks column {n}"))))
            .collect::<Result<_>>()?;
        let mut out = SnapshotData {
            coords: Vec::new(),
            values: Vec::new(),
        };
        for (ln, line) in lines.enumerate() {
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| KerrError::Io(format!("snapshot row {}: {e}", ln + 1)))?;
            if v.len() != header.len() {
                return Err(KerrError::Io(format!(
                    "snapshot row {} has {} columns",
                    ln + 1,
                    v.len()
                )));
            }
            out.coords.push([v[x], y.map_or(0.0, |k| v[k])]);
            out.values.push(std::array::from_fn(|k| v[fields[k]]));
        }
        Ok(out)
    }
}

/// Per-component distances between two snapshots on the same cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunDistance {
    /// `Σ |a - b| / n_cells` per component (mean absolute difference).
    pub l1: [f64; 6],
    pub linf: [f64; 6],
    /// `Σ_k Σ_i |a - b| / Σ_k Σ_i |b|` over each of the `D` and `H` groups.
    pub l1_rel_d: f64,
    pub l1_rel_h: f64,
}

pub fn compare_runs(a: &SnapshotData, b: &SnapshotData) -> Result<RunDistance> {
    if a.coords.len() != b.coords.len() {
        return Err(KerrError::GridMismatch(format!(
            "{} cells vs {} cells",
            a.coords.len(),
            b.coords.len()
        )));
    }
    for (p, q) in a.coords.iter().zip(&b.coords) {
        let tol = 1e-9 * (p[0].abs() + p[1].abs() + q[0].abs() + q[1].abs()).max(1e-300);
        if (p[0] - q[0]).abs() > tol || (p[1] - q[1]).abs() > tol {
            return Err(KerrError::GridMismatch(format!("cell centres differ: {p:?} vs {q:?}")));
        }
    }
    let n = a.values.len().max(1) as f64;
    let mut l1 = [0.0; 6];
    let mut linf = [0.0f64; 6];
    let mut norm = [0.0; 6];
    for (u, v) in a.values.iter().zip(&b.values) {
        for k in 0..6 {
            let d = (u[k] - v[k]).abs();
            l1[k] += d / n;
            linf[k] = linf[k].max(d);
            norm[k] += v[k].abs() / n;
        }
    }
    let rel = |r: std::ops::Range<usize>| {
        let den: f64 = norm[r.clone()].iter().sum();
        let num: f64 = l1[r].iter().sum();
        if den > 0.0 {
            num / den
        } else {
            num
        }
    };
    Ok(RunDistance {
        l1,
        linf,
        l1_rel_d: rel(0..3),
        l1_rel_h: rel(3..6),
    })
}
