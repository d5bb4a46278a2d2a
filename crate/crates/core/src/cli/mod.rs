//! Config-driven runs and their CSV tables.
//!
//! [`execute`] dispatches a validated [`RunConfig`]:
//!
//! * `static`: ground state of a static front; per-site profile and spectrum,
//! * `quench`: one evolution, plus optional correlator snapshot and trajectory,
//! * `scan`: one quench per grid point, evaluated on a worker pool,
//! * `predict`: analytic densities only.

mod config;
mod table;

pub use config::{parse_config, parse_config_with_mode, GridPoint, Mode, ProfileKind, RunConfig, ScanSpec, MIN_MARGIN};
pub use table::{
    output_paths, write_outputs, Cell, OutputTable, PREDICT_COLUMNS, PROFILE_COLUMNS, QUENCH_COLUMNS,
    SCHEMA_VERSION, SPECTRUM_COLUMNS, TRAJECTORY_COLUMNS,
};

use rayon::prelude::*;

use crate::analytic::{self, ISING_THRESHOLD_VELOCITY};
use crate::dynamics::{self, QuenchOptions, QuenchResult};
use crate::error::{Error, Result};
use crate::model::{ChainGeometry, FieldProfile};
use crate::observables;
use crate::static_solver;

/// Run the configured job and return its tables, primary table first.
pub fn execute(config: &RunConfig) -> Result<Vec<OutputTable>> {
    match config.mode {
        Mode::Static => run_static(config),
        Mode::Quench => run_single_quench(config),
        Mode::Scan => run_scan(config),
        Mode::Predict => run_predict(config),
    }
}

fn single_point(config: &RunConfig) -> Result<GridPoint> {
    match config.grid_points().as_slice() {
        [p] => Ok(*p),
        ps => Err(Error::Invalid(format!("{} mode takes one parameter point, got {}", config.mode.name(), ps.len()))),
    }
}

fn profile_at(config: &RunConfig, point: &GridPoint) -> Result<(ChainGeometry, FieldProfile)> {
    let n = point.n_sites.ok_or_else(|| Error::Invalid("missing N".into()))?;
    let geometry = ChainGeometry::new(n)?;
    let need = |x: Option<f64>, key: &str| x.ok_or_else(|| Error::Invalid(format!("missing {key}")));
    let profile = match config.profile {
        ProfileKind::Uniform => FieldProfile::uniform(need(config.g, "g")?)?,
        ProfileKind::Ramp => FieldProfile::ramp_between(need(point.tau_q, "tau_q")?, config.g_start, config.g_end)?,
        ProfileKind::StaticFront => {
            FieldProfile::static_front(need(point.alpha, "alpha")?, config.n_c.unwrap_or(0.5 * n as f64))?
        }
        ProfileKind::MovingFront => FieldProfile::moving_front(need(point.alpha, "alpha")?, need(point.v, "v")?)?,
    };
    Ok((geometry, profile))
}

fn quench_options(config: &RunConfig) -> QuenchOptions {
    QuenchOptions {
        integrator: config.integrator,
        margin: config.margin,
        lz: config.lz,
        correlator_at: config.snapshot_front,
        n_ref: config.n_ref,
        r_cal: config.r_cal,
    }
}

fn quench_row(r: &QuenchResult) -> Vec<Cell> {
    vec![
        r.n_sites.into(),
        r.alpha.into(),
        r.v.into(),
        r.tau_q.into(),
        r.d.into(),
        r.kink_density.into(),
        r.d_closed.into(),
        r.d_kzm.into(),
        r.unitarity_defect.into(),
    ]
}

fn profile_table(rows: &[dynamics::ProfileRow]) -> Result<OutputTable> {
    let mut t = OutputTable::new("profile", PROFILE_COLUMNS);
    for r in rows {
        t.push(vec![r.n.into(), r.g.into(), r.z.into(), r.sigma_x.into(), r.c_ref.into()])?;
    }
    Ok(t)
}

fn run_static(config: &RunConfig) -> Result<Vec<OutputTable>> {
    let (geometry, profile) = profile_at(config, &single_point(config)?)?;
    let basis = static_solver::solve_fields(&geometry, &profile.fields(&geometry, 0.0))?;
    let cov = observables::ground_covariance(&basis);
    let n_ref = match config.n_ref {
        Some(n) => n,
        None => observables::default_reference_site(&profile, 0.0, geometry.n_sites(), config.r_cal)
            .ok_or_else(|| Error::Invalid("no ordered reference site; set n_ref".into()))?,
    };
    let rows = dynamics::site_profile(&cov, &profile, 0.0, n_ref, config.r_cal)?;
    let mut spectrum = OutputTable::new("spectrum", SPECTRUM_COLUMNS);
    for (m, &w) in basis.omega.iter().enumerate() {
        spectrum.push(vec![m.into(), w.into()])?;
    }
    Ok(vec![profile_table(&rows)?, spectrum])
}

fn run_single_quench(config: &RunConfig) -> Result<Vec<OutputTable>> {
    let (geometry, profile) = profile_at(config, &single_point(config)?)?;
    let r = dynamics::run_quench(&geometry, &profile, &quench_options(config))?;
    let mut main = OutputTable::new("quench", QUENCH_COLUMNS);
    main.push(quench_row(&r))?;
    let mut tables = vec![main];
    if let Some(snap) = &r.correlator_profile {
        tables.push(profile_table(&snap.rows)?);
    }
    if !r.checkpoints.is_empty() {
        let mut traj = OutputTable::new("trajectory", TRAJECTORY_COLUMNS);
        for c in &r.checkpoints {
            let kinks = observables::bond_kinks(&c.covariance);
            for n in 1..=geometry.n_sites() {
                traj.push(vec![
                    c.t.into(),
                    n.into(),
                    profile.value(n as f64, c.t).into(),
                    observables::transverse_magnetization(&c.covariance, n)?.into(),
                    kinks.get(n - 1).copied().into(),
                ])?;
            }
        }
        tables.push(traj);
    }
    Ok(tables)
}

/// Evaluate `f` on every grid point with `jobs` workers; results keep grid
/// order and the first failing point (by index) is reported.
fn map_grid<T: Send>(
    points: &[GridPoint],
    jobs: usize,
    f: impl Fn(&GridPoint) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    if points.is_empty() {
        return Err(Error::Invalid("empty scan grid".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start {jobs} workers: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| points.par_iter().map(&f).collect());
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::GridPoint { index, label: points[index].label(), source: Box::new(e) })
        })
        .collect()
}

fn run_scan(config: &RunConfig) -> Result<Vec<OutputTable>> {
    let points = config.grid_points();
    let options = quench_options(config);
    let results = map_grid(&points, config.jobs, |p| {
        let (geometry, profile) = profile_at(config, p)?;
        dynamics::run_quench(&geometry, &profile, &options)
    })?;
    let mut t = OutputTable::new("scan", QUENCH_COLUMNS);
    for r in &results {
        t.push(quench_row(r))?;
    }
    Ok(vec![t])
}

fn run_predict(config: &RunConfig) -> Result<Vec<OutputTable>> {
    let points = config.grid_points();
    if points.is_empty() {
        return Err(Error::Invalid("empty prediction grid".into()));
    }
    let mut t = OutputTable::new("predict", PREDICT_COLUMNS);
    for (index, p) in points.iter().enumerate() {
        let (alpha, v) = (p.alpha.unwrap_or(f64::NAN), p.v.unwrap_or(f64::NAN));
        let pred = analytic::predict_kink_density(alpha, v, &config.lz)
            .map_err(|e| Error::GridPoint { index, label: p.label(), source: Box::new(e) })?;
        t.push(vec![
            alpha.into(),
            v.into(),
            pred.tau_q.into(),
            pred.d_closed.into(),
            pred.d_numeric.into(),
            pred.d_kzm.into(),
            ISING_THRESHOLD_VELOCITY.into(),
        ])?;
    }
    Ok(vec![t])
}
