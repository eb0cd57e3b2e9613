//! Time evolution of `u_t + (u_xx + u^2)_x = 0` on truncated domains.
//!
//! One implicit step solves
//!
//! ```text
//! (I + dt*theta*D3) u_next = u - dt*(1-theta)*(D3 u + N(u)) - dt*theta*N(u_next)
//! ```
//!
//! with `D3` the five-point third-derivative operator (skewed rows next to the
//! ends) and `N(v)` the central divergence form of `(v^2)_x`. The nonlinear
//! coupling is resolved by fixed-point iteration inside the step; the banded
//! matrix is factored once per run. Dirichlet data are imposed by constraint
//! rows that clamp the boundary nodes after each solve:
//!
//! * right half-line: one value at `x = 0`, decay pair `u = u_x = 0` at the far end;
//! * left half-line (forward time): value and slope at `x = 0`, decay `u = 0` at the far end;
//! * full line: decay values at both ends.
//!
//! Negative-time left-boundary runs reduce to a forward right-half-line run
//! through the reflection `u(x, t) = v(-x, -t)` and are handled by
//! [`evolve_left_negative_time`].

use std::fmt;
use std::sync::Arc;

use crate::banded::BandedMatrix;
use crate::calculus::{d1_at, d2_at, d3_at, derivative};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Side};

/// Time-dependent boundary value.
#[derive(Clone)]
pub enum BoundarySignal {
    /// Identically zero.
    Homogeneous,
    /// Arbitrary signal `t -> value`; must agree with the initial datum at `t = 0`.
    Signal(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl BoundarySignal {
    /// Wraps a closure.
    pub fn signal(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> BoundarySignal {
        BoundarySignal::Signal(Arc::new(f))
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match self {
            BoundarySignal::Homogeneous => 0.0,
            BoundarySignal::Signal(f) => f(t),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self, BoundarySignal::Homogeneous)
    }
}

impl fmt::Debug for BoundarySignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundarySignal::Homogeneous => write!(f, "Homogeneous"),
            BoundarySignal::Signal(_) => write!(f, "Signal(..)"),
        }
    }
}

/// Everything a run needs besides the initial datum.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    /// Value of `u` at the physical boundary `x = 0`.
    pub boundary_value: BoundarySignal,
    /// Slope of `u` at `x = 0`; required exactly for forward left-half-line runs.
    pub boundary_slope: Option<BoundarySignal>,
    /// Implicitness weight for the third derivative; 0.5 is trapezoidal.
    pub scheme_theta: f64,
    /// Max-norm tolerance for the in-step fixed-point iteration.
    pub nonlinear_tol: f64,
    pub nonlinear_max_iter: usize,
    /// Keep every `snapshot_stride`-th state (first and last always kept).
    pub snapshot_stride: usize,
}

impl SolverConfig {
    /// Homogeneous config with the default scheme parameters.
    pub fn homogeneous(grid: Grid, dt: f64, t_end: f64) -> SolverConfig {
        SolverConfig {
            grid,
            dt,
            t_end,
            boundary_value: BoundarySignal::Homogeneous,
            boundary_slope: None,
            scheme_theta: 0.5,
            nonlinear_tol: 1e-12,
            nonlinear_max_iter: 25,
            snapshot_stride: 10,
        }
    }

    fn validate(&self, u0: &Field, negative_time: bool) -> Result<()> {
        if self.grid != u0.grid {
            return Err(Error::GridMismatch);
        }
        if !u0.is_finite() {
            return Err(Error::NonFinite { step: 0 });
        }
        for (what, value) in [("dt", self.dt), ("t_end", self.t_end), ("nonlinear_tol", self.nonlinear_tol)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::BadParameter { what, value });
            }
        }
        if !(0.0..=1.0).contains(&self.scheme_theta) {
            return Err(Error::BadParameter {
                what: "scheme_theta",
                value: self.scheme_theta,
            });
        }
        if self.nonlinear_max_iter == 0 {
            return Err(Error::BadParameter {
                what: "nonlinear_max_iter",
                value: 0.0,
            });
        }
        if self.snapshot_stride == 0 {
            return Err(Error::BadParameter {
                what: "snapshot_stride",
                value: 0.0,
            });
        }
        match (self.grid.side, negative_time) {
            (Side::RightHalfLine, false) => {
                if self.boundary_slope.is_some() {
                    return Err(Error::BoundaryConditionMismatch(
                        "right half-line runs take a single boundary value, no slope",
                    ));
                }
            }
            (Side::LeftHalfLine, false) => {
                if self.boundary_slope.is_none() {
                    return Err(Error::BoundaryConditionMismatch(
                        "forward left half-line runs need both a boundary value and a slope",
                    ));
                }
            }
            (Side::LeftHalfLine, true) => {
                if self.boundary_slope.is_some() {
                    return Err(Error::BoundaryConditionMismatch(
                        "negative-time left half-line runs take a single boundary value, no slope",
                    ));
                }
            }
            (Side::FullLine, false) => {
                if !self.boundary_value.is_homogeneous() || self.boundary_slope.is_some() {
                    return Err(Error::BoundaryConditionMismatch(
                        "full-line runs have truncation ends only and take no boundary signal",
                    ));
                }
            }
            (_, true) => {
                return Err(Error::BoundaryConditionMismatch(
                    "negative-time evolution is defined for left half-line grids",
                ));
            }
        }
        Ok(())
    }
}

/// What a single matrix row encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    /// Clamp to zero (truncation ends).
    ClampZero,
    /// Clamp to the boundary value signal.
    ClampValue,
    /// One-sided first-derivative constraint equal to the slope signal.
    SlopeConstraint,
    /// Five-point central third derivative.
    Central,
    /// Skewed five-point stencil reaching rightward (left-end closures).
    SkewLeft,
}

fn row_kind(side: Side, i: usize, n: usize) -> RowKind {
    match side {
        Side::RightHalfLine => {
            if i == 0 {
                RowKind::ClampValue
            } else if i >= n - 2 {
                RowKind::ClampZero
            } else if i == 1 {
                RowKind::SkewLeft
            } else {
                RowKind::Central
            }
        }
        Side::LeftHalfLine => {
            if i == 0 {
                RowKind::ClampZero
            } else if i == n - 1 {
                RowKind::ClampValue
            } else if i == n - 2 {
                RowKind::SlopeConstraint
            } else if i == 1 {
                RowKind::SkewLeft
            } else {
                RowKind::Central
            }
        }
        // the third derivative carries high wavenumbers leftward, so the left
        // truncation end takes one closure and the right end two; a skewed row
        // at the right end would mirror a dissipative closure into a growing one
        Side::FullLine => {
            if i == 0 || i >= n - 2 {
                RowKind::ClampZero
            } else if i == 1 {
                RowKind::SkewLeft
            } else {
                RowKind::Central
            }
        }
    }
}

/// Third-derivative stencil of a PDE row, matching the matrix exactly.
#[inline]
fn d3_row(v: &[f64], i: usize, h3: f64, kind: RowKind) -> f64 {
    match kind {
        RowKind::Central => (-v[i - 2] + 2.0 * v[i - 1] - 2.0 * v[i + 1] + v[i + 2]) / (2.0 * h3),
        RowKind::SkewLeft => {
            (-1.5 * v[i - 1] + 5.0 * v[i] - 6.0 * v[i + 1] + 3.0 * v[i + 2] - 0.5 * v[i + 3]) / h3
        }
        _ => 0.0,
    }
}

/// Central divergence form of `(v^2)_x` at an interior node.
#[inline]
fn nonlinear_row(v: &[f64], i: usize, h: f64) -> f64 {
    (v[i + 1] * v[i + 1] - v[i - 1] * v[i - 1]) / (2.0 * h)
}

/// Result of a run: strided states plus per-step boundary traces.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SolverConfig,
    /// Snapshot instants, strictly monotone (decreasing for negative-time runs).
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    /// One entry per accepted step, starting at the initial time.
    pub trace_times: Vec<f64>,
    pub trace_u0: Vec<f64>,
    pub trace_ux0: Vec<f64>,
    pub trace_uxx0: Vec<f64>,
    pub trace_uxxx0: Vec<f64>,
    pub steps: usize,
    /// True when a negative-time run produced this trajectory.
    pub backward: bool,
    /// Set when the far field grew past the truncation-contamination threshold.
    pub contaminated: bool,
}

impl Trajectory {
    /// Node index on which boundary traces are evaluated.
    pub fn boundary_node(&self) -> usize {
        boundary_node(self.config.grid)
    }

    pub fn final_state(&self) -> &Field {
        self.snapshots.last().expect("trajectory has snapshots")
    }

    /// True when every recorded boundary value is zero.
    pub fn is_homogeneous(&self) -> bool {
        self.config.boundary_value.is_homogeneous()
    }
}

/// Node at the physical boundary `x = 0` (nearest node to 0 on the full line).
pub fn boundary_node(grid: Grid) -> usize {
    match grid.side {
        Side::RightHalfLine => 0,
        Side::LeftHalfLine => grid.n_points - 1,
        Side::FullLine => grid.nearest_node(0.0),
    }
}

/// Relative far-field amplitude above which a run is flagged as contaminated.
const CONTAMINATION_RATIO: f64 = 1e-8;

struct Stepper {
    config: SolverConfig,
    kinds: Vec<RowKind>,
    lu: crate::banded::BandedLu,
    /// Nodes checked against the contamination threshold (90% of extent).
    watch_nodes: Vec<usize>,
}

impl Stepper {
    fn new(config: &SolverConfig) -> Result<Stepper> {
        let grid = config.grid;
        let n = grid.n_points;
        let h = grid.h;
        let h3 = h * h * h;
        let kinds: Vec<RowKind> = (0..n).map(|i| row_kind(grid.side, i, n)).collect();
        let mut m = BandedMatrix::new(n, 3, 3);
        let w = config.dt * config.scheme_theta;
        for (i, kind) in kinds.iter().enumerate() {
            match kind {
                RowKind::ClampZero | RowKind::ClampValue => m.set(i, i, 1.0),
                RowKind::SlopeConstraint => {
                    m.set(i, i - 1, 1.0 / (2.0 * h));
                    m.set(i, i, -2.0 / h);
                    m.set(i, i + 1, 3.0 / (2.0 * h));
                }
                RowKind::Central => {
                    m.set(i, i, 1.0);
                    m.add(i, i - 2, w * -1.0 / (2.0 * h3));
                    m.add(i, i - 1, w * 2.0 / (2.0 * h3));
                    m.add(i, i + 1, w * -2.0 / (2.0 * h3));
                    m.add(i, i + 2, w * 1.0 / (2.0 * h3));
                }
                RowKind::SkewLeft => {
                    m.set(i, i, 1.0);
                    m.add(i, i - 1, w * -1.5 / h3);
                    m.add(i, i, w * 5.0 / h3);
                    m.add(i, i + 1, w * -6.0 / h3);
                    m.add(i, i + 2, w * 3.0 / h3);
                    m.add(i, i + 3, w * -0.5 / h3);
                }
            }
        }
        let lu = m.factor()?;
        let watch_nodes = match grid.side {
            Side::RightHalfLine => vec![grid.nearest_node(0.9 * grid.x_max)],
            Side::LeftHalfLine => vec![grid.nearest_node(0.9 * grid.x_min)],
            Side::FullLine => vec![
                grid.nearest_node(0.9 * grid.x_min),
                grid.nearest_node(0.9 * grid.x_max),
            ],
        };
        Ok(Stepper {
            config: config.clone(),
            kinds,
            lu,
            watch_nodes,
        })
    }

    /// Clamps the constrained nodes of `u` to their values at time `t`.
    /// Value clamps go first so the slope rewrite sees the final boundary value.
    fn apply_constraints(&self, u: &mut [f64], t: f64) {
        let h = self.config.grid.h;
        for (i, kind) in self.kinds.iter().enumerate() {
            match kind {
                RowKind::ClampZero => u[i] = 0.0,
                RowKind::ClampValue => u[i] = self.config.boundary_value.value(t),
                _ => {}
            }
        }
        for (i, kind) in self.kinds.iter().enumerate() {
            if *kind == RowKind::SlopeConstraint {
                // rewrite node i so the one-sided slope at the boundary
                // equals the prescribed signal
                let f1 = self
                    .config
                    .boundary_slope
                    .as_ref()
                    .map_or(0.0, |s| s.value(t));
                u[i] = (u[i - 1] + 3.0 * u[i + 1] - 2.0 * h * f1) / 4.0;
            }
        }
    }

    /// One implicit step from `u` (time `t`) to the returned state at `t + dt`.
    fn step(&self, u: &[f64], t: f64, step_index: usize, scratch: &mut StepScratch) -> Result<Vec<f64>> {
        let cfg = &self.config;
        let grid = cfg.grid;
        let h = grid.h;
        let h3 = h * h * h;
        let dt = cfg.dt;
        let theta = cfg.scheme_theta;
        let t_next = t + dt;
        let base = &mut scratch.base;
        base.clone_from_slice(u);
        for (i, kind) in self.kinds.iter().enumerate() {
            match kind {
                RowKind::Central | RowKind::SkewLeft => {
                    base[i] = u[i]
                        - dt * (1.0 - theta) * (d3_row(u, i, h3, *kind) + nonlinear_row(u, i, h))
                }
                RowKind::ClampZero => base[i] = 0.0,
                RowKind::ClampValue => base[i] = cfg.boundary_value.value(t_next),
                RowKind::SlopeConstraint => {
                    base[i] = cfg.boundary_slope.as_ref().map_or(0.0, |s| s.value(t_next))
                }
            }
        }
        let v = &mut scratch.iterate;
        v.clone_from_slice(u);
        let mut residual = f64::INFINITY;
        for _it in 0..cfg.nonlinear_max_iter {
            let rhs = &mut scratch.rhs;
            rhs.clone_from_slice(base);
            for (i, kind) in self.kinds.iter().enumerate() {
                if matches!(kind, RowKind::Central | RowKind::SkewLeft) {
                    rhs[i] -= dt * theta * nonlinear_row(v, i, h);
                }
            }
            self.lu.solve_in_place(rhs);
            residual = v
                .iter()
                .zip(rhs.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            v.clone_from_slice(rhs);
            if residual <= cfg.nonlinear_tol {
                if !v.iter().all(|x| x.is_finite()) {
                    return Err(Error::NonFinite { step: step_index });
                }
                return Ok(v.clone());
            }
        }
        if !residual.is_finite() {
            return Err(Error::NonFinite { step: step_index });
        }
        Err(Error::NonlinearDivergence {
            step: step_index,
            iters: cfg.nonlinear_max_iter,
            residual,
            tol: cfg.nonlinear_tol,
        })
    }
}

struct StepScratch {
    base: Vec<f64>,
    iterate: Vec<f64>,
    rhs: Vec<f64>,
}

/// Runs the forward problem on the configured grid.
pub fn evolve(config: &SolverConfig, u0: &Field) -> Result<Trajectory> {
    config.validate(u0, false)?;
    let grid = config.grid;
    let n = grid.n_points;
    let stepper = Stepper::new(config)?;
    let n_steps = (config.t_end / config.dt).round().max(1.0) as usize;

    let mut u = u0.values.clone();
    stepper.apply_constraints(&mut u, 0.0);

    let b_node = boundary_node(grid);
    let h = grid.h;
    let mut traj = Trajectory {
        config: config.clone(),
        times: Vec::new(),
        snapshots: Vec::new(),
        trace_times: Vec::with_capacity(n_steps + 1),
        trace_u0: Vec::with_capacity(n_steps + 1),
        trace_ux0: Vec::with_capacity(n_steps + 1),
        trace_uxx0: Vec::with_capacity(n_steps + 1),
        trace_uxxx0: Vec::with_capacity(n_steps + 1),
        steps: n_steps,
        backward: false,
        contaminated: false,
    };
    let record_traces = |traj: &mut Trajectory, u: &[f64], t: f64| {
        traj.trace_times.push(t);
        traj.trace_u0.push(u[b_node]);
        traj.trace_ux0.push(d1_at(u, b_node, h));
        traj.trace_uxx0.push(d2_at(u, b_node, h));
        traj.trace_uxxx0.push(d3_at(u, b_node, h));
    };
    record_traces(&mut traj, &u, 0.0);
    traj.times.push(0.0);
    traj.snapshots.push(Field::new(grid, u.clone()));

    let mut scratch = StepScratch {
        base: vec![0.0; n],
        iterate: vec![0.0; n],
        rhs: vec![0.0; n],
    };
    for step in 1..=n_steps {
        let t = (step - 1) as f64 * config.dt;
        u = stepper.step(&u, t, step, &mut scratch)?;
        let t_now = step as f64 * config.dt;
        stepper.apply_constraints(&mut u, t_now);
        record_traces(&mut traj, &u, t_now);
        if !traj.contaminated {
            let peak = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for &k in &stepper.watch_nodes {
                if u[k].abs() > CONTAMINATION_RATIO * peak && peak > 0.0 {
                    traj.contaminated = true;
                    log::warn!(
                        "far field at x = {:.2} reached {:.2e} of the peak at step {step}; \
                         the truncation boundary is no longer quiet",
                        grid.x(k),
                        u[k].abs() / peak
                    );
                    break;
                }
            }
        }
        if step % config.snapshot_stride == 0 || step == n_steps {
            traj.times.push(t_now);
            traj.snapshots.push(Field::new(grid, u.clone()));
        }
    }
    Ok(traj)
}

/// Runs the negative-time problem on a left half-line grid.
///
/// The substitution `u(x, t) = v(-x, -t)` turns it into a forward
/// right-half-line run with the time-reversed boundary signal; the returned
/// trajectory is the reflection of that run, so its times are negative and
/// decreasing and odd-order boundary traces change sign.
pub fn evolve_left_negative_time(config: &SolverConfig, u0: &Field) -> Result<Trajectory> {
    config.validate(u0, true)?;
    let mut mirrored = config.clone();
    mirrored.grid = config.grid.reflected();
    mirrored.boundary_value = match &config.boundary_value {
        BoundarySignal::Homogeneous => BoundarySignal::Homogeneous,
        BoundarySignal::Signal(f) => {
            let f = Arc::clone(f);
            BoundarySignal::signal(move |t| f(-t))
        }
    };
    let forward = evolve(&mirrored, &u0.reflected())?;
    Ok(Trajectory {
        config: config.clone(),
        times: forward.times.iter().map(|t| -t).collect(),
        snapshots: forward.snapshots.iter().map(Field::reflected).collect(),
        trace_times: forward.trace_times.iter().map(|t| -t).collect(),
        trace_u0: forward.trace_u0.clone(),
        trace_ux0: forward.trace_ux0.iter().map(|v| -v).collect(),
        trace_uxx0: forward.trace_uxx0.clone(),
        trace_uxxx0: forward.trace_uxxx0.iter().map(|v| -v).collect(),
        steps: forward.steps,
        backward: true,
        contaminated: forward.contaminated,
    })
}

/// Time derivatives of the solution at `t = 0` induced by the equation:
/// `phi_0 = u0` and
/// `phi_m = -phi_{m-1}''' - sum_{l<m} C(m-1, l) phi_l phi'_{m-1-l}`.
///
/// Each level spends three derivative orders, so the returned fields lose
/// accuracy near the ends as `m` grows; a warning is logged when the requested
/// depth is unreasonable for the grid.
pub fn compatibility_sequence(u0: &Field, m_max: usize) -> Result<Vec<Field>> {
    let n = u0.grid.n_points;
    if 6 * m_max + 5 > n / 2 {
        log::warn!(
            "compatibility depth {m_max} spends {} one-sided stencil layers on a {n}-node grid; \
             boundary values of the deeper fields are unreliable",
            3 * m_max
        );
    }
    let mut phis: Vec<Field> = vec![u0.clone()];
    let mut binom_row: Vec<f64> = vec![1.0];
    for m in 1..=m_max {
        // binomial coefficients C(m-1, l) for l = 0..m-1
        if m > 1 {
            let mut next = vec![1.0; m];
            for l in 1..m - 1 {
                next[l] = binom_row[l - 1] + binom_row[l];
            }
            binom_row = next;
        }
        let d3 = derivative(&phis[m - 1], 3)?;
        let mut values: Vec<f64> = d3.values.iter().map(|v| -v).collect();
        for l in 0..m {
            let dphi = derivative(&phis[m - 1 - l], 1)?;
            let coeff = binom_row[l];
            for k in 0..n {
                values[k] -= coeff * phis[l].values[k] * dphi.values[k];
            }
        }
        phis.push(Field::new(u0.grid, values));
    }
    Ok(phis)
}
