//! Time-dependent Bogoliubov-de Gennes evolution.
//!
//! In the Heisenberg picture `c_n(t) = sum_m u_{nm}(t) gamma_m + v_{nm}(t)^* gamma_m^dag`
//! with the `gamma_m` fixed by the initial ground state. The mode amplitudes
//! obey, for `u± = u ± v`,
//!
//! ```text
//! i d/dt u+_n = 2 g_n(t) u-_n - 2 u-_{n-1}
//! i d/dt u-_n = 2 g_n(t) u+_n - 2 u+_{n+1}
//! ```
//!
//! Two fixed-step integrators are available. [`Method::Splitting`] splits the
//! generator into on-site and bond parts, each a set of disjoint 2x2 blocks
//! that are exponentiated exactly, and composes them symmetrically (second
//! order, unitary to rounding). [`Method::Rk4`] is the classical Runge-Kutta
//! scheme on the same equations.

mod kernel;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::analytic::{self, LZConfig, Regime};
use crate::error::{Error, Result};
use crate::model::{self, ChainGeometry, FieldProfile, QuenchWindow};
use crate::observables::{self, MajoranaCovariance, C64};
use crate::static_solver::{self, BogoliubovBasis};

use kernel::{ModeBlock, LANES};

pub const DEFAULT_DT: f64 = 0.02;
pub const DEFAULT_RK4_DT: f64 = 0.005;
pub const DEFAULT_DRIFT_TOLERANCE: f64 = 1e-6;

/// Upper bound on `dt * max|g|`.
pub const MAX_STEP_FIELD_PRODUCT: f64 = 0.05;

/// Steps between cheap norm checks.
const CHUNK_STEPS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Splitting,
    Rk4,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "splitting" => Ok(Method::Splitting),
            "rk4" => Ok(Method::Rk4),
            other => Err(Error::Integrator(format!("unknown method '{other}' (splitting | rk4)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub method: Method,
    /// Record the covariance every this many steps.
    pub checkpoint_stride: Option<usize>,
    pub drift_tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: DEFAULT_DT, method: Method::Splitting, checkpoint_stride: None, drift_tolerance: DEFAULT_DRIFT_TOLERANCE }
    }
}

impl IntegratorConfig {
    pub fn rk4() -> Self {
        Self { dt: DEFAULT_RK4_DT, method: Method::Rk4, ..Self::default() }
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }

    pub fn validate(&self, max_field: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Integrator(format!("dt = {} must be positive", self.dt)));
        }
        if self.dt * max_field > MAX_STEP_FIELD_PRODUCT * (1.0 + 1e-12) {
            return Err(Error::Integrator(format!(
                "dt = {} too large for max field {max_field} (need dt <= {})",
                self.dt,
                MAX_STEP_FIELD_PRODUCT / max_field
            )));
        }
        if !(self.drift_tolerance > 0.0) {
            return Err(Error::Integrator(format!("drift tolerance {} must be positive", self.drift_tolerance)));
        }
        if self.checkpoint_stride == Some(0) {
            return Err(Error::Integrator("checkpoint stride must be positive".into()));
        }
        Ok(())
    }
}

/// Complex mode matrices at time `t`; column `m` is mode `m`.
#[derive(Debug, Clone)]
pub struct EvolvedState {
    pub u: DMatrix<C64>,
    pub v: DMatrix<C64>,
    pub t: f64,
}

impl EvolvedState {
    pub fn from_basis(basis: &BogoliubovBasis, t: f64) -> Self {
        Self { u: basis.u.map(|x| C64::new(x, 0.0)), v: basis.v.map(|x| C64::new(x, 0.0)), t }
    }

    pub fn n_sites(&self) -> usize {
        self.u.nrows()
    }

    pub fn unitarity_defect(&self) -> f64 {
        observables::bogoliubov_defect(&self.u, &self.v)
    }

    pub fn covariance(&self) -> MajoranaCovariance {
        MajoranaCovariance::from_plus_minus(&(&self.u + &self.v), &(&self.u - &self.v))
    }

    pub fn excitation_density(&self, target: &BogoliubovBasis) -> Result<f64> {
        observables::excitation_density(&self.u, &self.v, target)
    }
}

/// Time derivative `(dU/dt, dV/dt)` of the mode matrices under `g(t)`.
pub fn rhs(state: &EvolvedState, profile: &FieldProfile, t: f64) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = state.n_sites();
    let modes = state.u.ncols();
    let up = &state.u + &state.v;
    let um = &state.u - &state.v;
    let minus_i = C64::new(0.0, -1.0);
    let mut du = DMatrix::zeros(n, modes);
    let mut dv = DMatrix::zeros(n, modes);
    for s in 0..n {
        let g2 = 2.0 * profile.value((s + 1) as f64, t);
        for m in 0..modes {
            let mut wp = um[(s, m)] * g2;
            if s > 0 {
                wp -= um[(s - 1, m)] * 2.0;
            }
            let mut wm = up[(s, m)] * g2;
            if s + 1 < n {
                wm -= up[(s + 1, m)] * 2.0;
            }
            let (dp, dm) = (wp * minus_i, wm * minus_i);
            du[(s, m)] = (dp + dm) * 0.5;
            dv[(s, m)] = (dp - dm) * 0.5;
        }
    }
    (du, dv)
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub t: f64,
    pub covariance: MajoranaCovariance,
}

/// Mode amplitudes being integrated, stored in SIMD-friendly blocks.
pub struct Propagator {
    profile: FieldProfile,
    config: IntegratorConfig,
    n_sites: usize,
    n_modes: usize,
    blocks: Vec<ModeBlock>,
    t: f64,
    steps: usize,
    max_norm_defect: f64,
    checkpoints: Vec<Checkpoint>,
}

impl Propagator {
    pub fn new(initial: &EvolvedState, profile: &FieldProfile, config: IntegratorConfig) -> Result<Self> {
        profile.validate()?;
        config.validate(0.0)?;
        let n = initial.n_sites();
        let n_modes = initial.u.ncols();
        let up = &initial.u + &initial.v;
        let um = &initial.u - &initial.v;
        let n_blocks = n_modes.div_ceil(LANES);
        let mut blocks = vec![ModeBlock::zeros(n); n_blocks];
        for m in 0..n_modes {
            let (b, j) = (m / LANES, m % LANES);
            let blk = &mut blocks[b];
            for s in 0..n {
                blk.up_re[s][j] = up[(s, m)].re;
                blk.up_im[s][j] = up[(s, m)].im;
                blk.um_re[s][j] = um[(s, m)].re;
                blk.um_im[s][j] = um[(s, m)].im;
            }
        }
        Ok(Self {
            profile: *profile,
            config,
            n_sites: n,
            n_modes,
            blocks,
            t: initial.t,
            steps: 0,
            max_norm_defect: 0.0,
            checkpoints: Vec::new(),
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn checkpoints(&self) -> &[Checkpoint] {
        &self.checkpoints
    }

    pub fn take_checkpoints(&mut self) -> Vec<Checkpoint> {
        std::mem::take(&mut self.checkpoints)
    }

    /// Largest column-norm deviation seen at any check so far.
    pub fn max_norm_defect(&self) -> f64 {
        self.max_norm_defect
    }

    pub fn plus_minus(&self) -> (DMatrix<C64>, DMatrix<C64>) {
        let n = self.n_sites;
        let mut up = DMatrix::zeros(n, self.n_modes);
        let mut um = DMatrix::zeros(n, self.n_modes);
        for m in 0..self.n_modes {
            let blk = &self.blocks[m / LANES];
            let j = m % LANES;
            for s in 0..n {
                up[(s, m)] = C64::new(blk.up_re[s][j], blk.up_im[s][j]);
                um[(s, m)] = C64::new(blk.um_re[s][j], blk.um_im[s][j]);
            }
        }
        (up, um)
    }

    pub fn state(&self) -> EvolvedState {
        let (up, um) = self.plus_minus();
        EvolvedState { u: (&up + &um) * C64::new(0.5, 0.0), v: (&up - &um) * C64::new(0.5, 0.0), t: self.t }
    }

    pub fn covariance(&self) -> MajoranaCovariance {
        let (up, um) = self.plus_minus();
        MajoranaCovariance::from_plus_minus(&up, &um)
    }

    /// `max_m |sum_n (|u+|^2 + |u-|^2) / 2 - 1|`, the diagonal of `U^dag U + V^dag V - I`.
    fn norm_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (b, blk) in self.blocks.iter().enumerate() {
            let mut acc = [0.0; LANES];
            for s in 0..self.n_sites {
                for (j, a) in acc.iter_mut().enumerate() {
                    *a += blk.up_re[s][j].powi(2) + blk.up_im[s][j].powi(2) + blk.um_re[s][j].powi(2) + blk.um_im[s][j].powi(2);
                }
            }
            for (j, a) in acc.iter().enumerate() {
                if b * LANES + j < self.n_modes {
                    worst = worst.max((0.5 * a - 1.0).abs());
                }
            }
        }
        worst
    }

    /// Integrate up to `t_target` in equal steps no longer than `dt`.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        let span = t_target - self.t;
        if span < 0.0 {
            return Err(Error::Integrator(format!("cannot integrate backwards from {} to {t_target}", self.t)));
        }
        if span == 0.0 {
            return Ok(());
        }
        let max_field = self.profile.max_field(self.t, t_target);
        self.config.validate(max_field)?;
        let n_steps = ((span / self.config.dt) - 1e-9).ceil().max(1.0) as usize;
        let h = span / n_steps as f64;
        let t0 = self.t;
        let mut done = 0;
        while done < n_steps {
            let mut chunk = (n_steps - done).min(CHUNK_STEPS);
            if let Some(stride) = self.config.checkpoint_stride {
                let to_next = stride - self.steps % stride;
                chunk = chunk.min(to_next);
            }
            let times: Vec<f64> = (done..=done + chunk).map(|k| t0 + k as f64 * h).collect();
            self.run_chunk(&times);
            done += chunk;
            self.steps += chunk;
            self.t = if done == n_steps { t_target } else { times[chunk] };

            let defect = self.norm_defect();
            self.max_norm_defect = self.max_norm_defect.max(defect);
            if !(defect <= self.config.drift_tolerance) {
                return Err(Error::Drift { defect, tolerance: self.config.drift_tolerance, t: self.t });
            }
            if let Some(stride) = self.config.checkpoint_stride {
                if self.steps % stride == 0 {
                    let covariance = self.covariance();
                    self.checkpoints.push(Checkpoint { t: self.t, covariance });
                }
            }
        }
        Ok(())
    }

    /// One run of consecutive steps over the time grid `times`.
    fn run_chunk(&mut self, times: &[f64]) {
        let n = self.n_sites;
        let steps = times.len() - 1;
        let profile = self.profile;
        match self.config.method {
            Method::Splitting => {
                // site rotations exp(-i theta sigma^x), theta = 2 int g dt (3-point Gauss-Legendre)
                let x = (0.6f64).sqrt();
                let nodes = [(-x, 5.0 / 9.0), (0.0, 8.0 / 9.0), (x, 5.0 / 9.0)];
                let mut table = vec![(0.0, 0.0); steps * n];
                for k in 0..steps {
                    let (ta, tb) = (times[k], times[k + 1]);
                    let (mid, half) = (0.5 * (ta + tb), 0.5 * (tb - ta));
                    for s in 0..n {
                        let pos = (s + 1) as f64;
                        let integral: f64 =
                            nodes.iter().map(|&(xi, w)| w * profile.value(pos, mid + half * xi)).sum::<f64>() * half;
                        let theta = 2.0 * integral;
                        table[k * n + s] = (theta.cos(), theta.sin());
                    }
                }
                // bond rotations exp(2 i tau sigma^x): half step, full steps, half step
                let bond = |tau: f64| ((2.0 * tau).cos(), (2.0 * tau).sin());
                let bonds: Vec<(f64, f64)> = (0..steps)
                    .map(|k| {
                        let prev = if k == 0 { 0.0 } else { times[k] - times[k - 1] };
                        bond(0.5 * (prev + times[k + 1] - times[k]))
                    })
                    .collect();
                let closing = bond(0.5 * (times[steps] - times[steps - 1]));
                self.blocks.par_iter_mut().for_each(|blk| {
                    for k in 0..steps {
                        let step = kernel::SplitStep { bond: bonds[k], site: &table[k * n..(k + 1) * n] };
                        kernel::split_sweep(blk, &step);
                    }
                    kernel::bond_sweep(blk, closing);
                });
            }
            Method::Rk4 => {
                let mut fields = vec![0.0; steps * 3 * n];
                for k in 0..steps {
                    let (ta, tb) = (times[k], times[k + 1]);
                    for (i, t) in [ta, 0.5 * (ta + tb), tb].into_iter().enumerate() {
                        for s in 0..n {
                            fields[(3 * k + i) * n + s] = profile.value((s + 1) as f64, t);
                        }
                    }
                }
                self.blocks.par_iter_mut().for_each(|blk| {
                    let mut scratch = kernel::Rk4Scratch::new(n);
                    for k in 0..steps {
                        let h = times[k + 1] - times[k];
                        let base = 3 * k * n;
                        let g0 = &fields[base..base + n];
                        let gm = &fields[base + n..base + 2 * n];
                        let g1 = &fields[base + 2 * n..base + 3 * n];
                        kernel::rk4_step(blk, h, g0, gm, g1, &mut scratch);
                    }
                });
            }
        }
    }
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: EvolvedState,
    pub checkpoints: Vec<Checkpoint>,
    /// Full Bogoliubov unitarity defect of the final state.
    pub unitarity_defect: f64,
    pub steps: usize,
}

/// Evolve the ground state `initial` of `g(t_start)` across `window`.
pub fn evolve(
    initial: &BogoliubovBasis,
    profile: &FieldProfile,
    window: &QuenchWindow,
    config: &IntegratorConfig,
) -> Result<Evolution> {
    if !(window.t_start < window.t_end) {
        return Err(Error::Invalid(format!("empty window [{}, {}]", window.t_start, window.t_end)));
    }
    config.validate(profile.max_field(window.t_start, window.t_end))?;
    let mut prop = Propagator::new(&EvolvedState::from_basis(initial, window.t_start), profile, *config)?;
    prop.advance_to(window.t_end)?;
    finish(prop, config)
}

fn finish(mut prop: Propagator, config: &IntegratorConfig) -> Result<Evolution> {
    let state = prop.state();
    let unitarity_defect = state.unitarity_defect().max(prop.max_norm_defect());
    if unitarity_defect > config.drift_tolerance {
        return Err(Error::Drift { defect: unitarity_defect, tolerance: config.drift_tolerance, t: state.t });
    }
    Ok(Evolution { state, checkpoints: prop.take_checkpoints(), unitarity_defect, steps: prop.steps() })
}

/// Measurement options for [`run_quench`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchOptions {
    pub integrator: IntegratorConfig,
    pub margin: f64,
    pub lz: LZConfig,
    /// Record a correlator profile when the front reaches this position.
    pub correlator_at: Option<f64>,
    /// Reference site of the profile (default: deepest site with epsilon <= -0.5).
    pub n_ref: Option<usize>,
    pub r_cal: usize,
}

impl Default for QuenchOptions {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            margin: model::DEFAULT_MARGIN,
            lz: LZConfig::default(),
            correlator_at: None,
            n_ref: None,
            r_cal: observables::DEFAULT_R_CAL,
        }
    }
}

/// Per-site snapshot `(n, g_n, Z_n, sigma^x_n, C(n_ref, n))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub n: usize,
    pub g: f64,
    pub z: f64,
    pub sigma_x: f64,
    pub c_ref: f64,
}

#[derive(Debug, Clone)]
pub struct CorrelatorProfile {
    pub t: f64,
    pub n_ref: usize,
    pub rows: Vec<ProfileRow>,
}

/// Profile table for any covariance; `Z_n = C(n_ref, n) / sqrt(C(n_ref - r, n_ref + r))`.
pub fn site_profile(
    cov: &MajoranaCovariance,
    profile: &FieldProfile,
    t: f64,
    n_ref: usize,
    r_cal: usize,
) -> Result<Vec<ProfileRow>> {
    let z = observables::magnetization_profile(cov, profile, t, n_ref, r_cal)?;
    let n = cov.n_sites();
    (1..=n)
        .map(|s| {
            Ok(ProfileRow {
                n: s,
                g: profile.value(s as f64, t),
                z: z[s - 1],
                sigma_x: observables::transverse_magnetization(cov, s)?,
                c_ref: observables::zz_correlator(cov, n_ref, s)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct QuenchResult {
    pub n_sites: usize,
    pub alpha: Option<f64>,
    pub v: Option<f64>,
    pub tau_q: f64,
    /// Quasiparticle density against the final static basis.
    pub d: f64,
    pub kink_density: f64,
    /// Analytic density: Landau-Zener closed form for fronts, `d_kzm` for ramps.
    pub d_closed: f64,
    pub d_kzm: f64,
    pub unitarity_defect: f64,
    pub window: QuenchWindow,
    pub steps: usize,
    pub correlator_profile: Option<CorrelatorProfile>,
    pub checkpoints: Vec<Checkpoint>,
}

/// Full quench: ground state at `t_start`, evolution across the window, then
/// measurements against the final Hamiltonian.
pub fn run_quench(geometry: &ChainGeometry, profile: &FieldProfile, options: &QuenchOptions) -> Result<QuenchResult> {
    profile.validate()?;
    let window = model::window_for(profile, geometry, options.margin)?;
    let (alpha, v, tau_q, d_closed, d_kzm) = match *profile {
        FieldProfile::MovingTanhFront { alpha, v } => {
            let p = analytic::predict_kink_density(alpha, v, &options.lz)?;
            let closed = if p.regime == Regime::BelowThreshold { 0.0 } else { p.d_closed };
            (Some(alpha), Some(v), p.tau_q, closed, p.d_kzm)
        }
        FieldProfile::HomogeneousRamp { tau_q, .. } => {
            let d = analytic::kzm_density(tau_q);
            (None, None, tau_q, d, d)
        }
        _ => unreachable!("window_for accepts only quench profiles"),
    };
    let config = options.integrator;
    config.validate(profile.max_field(window.t_start, window.t_end))?;

    let initial = static_solver::solve_fields(geometry, &profile.fields(geometry, window.t_start))?;
    let mut prop = Propagator::new(&EvolvedState::from_basis(&initial, window.t_start), profile, config)?;

    let mut correlator_profile = None;
    if let Some(front) = options.correlator_at {
        let t_snap = match *profile {
            FieldProfile::MovingTanhFront { v, .. } if v > 0.0 => front / v,
            _ => return Err(Error::Invalid("correlator snapshots need a moving front".into())),
        };
        if !(t_snap > window.t_start && t_snap < window.t_end) {
            return Err(Error::Invalid(format!("front position {front} is outside the quench window")));
        }
        prop.advance_to(t_snap)?;
        let cov = prop.covariance();
        let n_ref = match options.n_ref {
            Some(n) => n,
            None => observables::default_reference_site(profile, t_snap, geometry.n_sites(), options.r_cal)
                .ok_or_else(|| Error::Invalid(format!("no ordered reference site when the front is at {front}")))?,
        };
        let rows = site_profile(&cov, profile, t_snap, n_ref, options.r_cal)?;
        correlator_profile = Some(CorrelatorProfile { t: t_snap, n_ref, rows });
    }
    prop.advance_to(window.t_end)?;
    let evolution = finish(prop, &config)?;

    let target = static_solver::solve_fields(geometry, &profile.fields(geometry, window.t_end))?;
    let d = evolution.state.excitation_density(&target)?;
    let kink_density = observables::kink_density(&evolution.state.covariance());

    Ok(QuenchResult {
        n_sites: geometry.n_sites(),
        alpha,
        v,
        tau_q,
        d,
        kink_density,
        d_closed,
        d_kzm,
        unitarity_defect: evolution.unitarity_defect,
        window,
        steps: evolution.steps,
        correlator_profile,
        checkpoints: evolution.checkpoints,
    })
}
