//! Experiment orchestration: single runs, paired Class-II/Class-I runs with
//! relative-entropy tracking, and epsilon sweeps with log-log rate fitting.

use std::collections::VecDeque;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::class1::{self, StateI};
use crate::class2::{self, StateII};
use crate::diagnostics::{
    self, entropy_production_class1, entropy_production_class2, lift, RelEntropyReport,
};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::harness::config::RunConfig;
use crate::harness::fit::{fit_rate, RateFit};
use crate::maxwell_stefan::FrictionMatrix;
use crate::sources::SourceConfig;
use crate::thermo::ThermoModel;

/// Which model a single run advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Class1,
    Class2,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Class1 => "class1",
            Model::Class2 => "class2",
        }
    }
}

/// Deterministic float formatting shared by all table writers.
fn fmt(x: f64) -> String {
    format!("{x:.15e}")
}

/// Writes the configured output formats (csv and gnuplot-style dat).
pub struct TableWriter {
    dir: PathBuf,
    csv: bool,
    dat: bool,
}

impl TableWriter {
    pub fn new(dir: &Path, formats: &[String]) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            csv: formats.iter().any(|f| f == "csv"),
            dat: formats.iter().any(|f| f == "dat"),
        })
    }

    pub fn write(&self, name: &str, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
        if self.csv {
            let mut out = String::new();
            out.push_str(&header.join(","));
            out.push('\n');
            for row in rows {
                let cells: Vec<String> = row.iter().map(|&x| fmt(x)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            let mut f = fs::File::create(self.dir.join(format!("{name}.csv")))?;
            f.write_all(out.as_bytes())?;
        }
        if self.dat {
            let mut out = String::new();
            out.push_str("# ");
            out.push_str(&header.join(" "));
            out.push('\n');
            for row in rows {
                let cells: Vec<String> = row.iter().map(|&x| fmt(x)).collect();
                out.push_str(&cells.join(" "));
                out.push('\n');
            }
            let mut f = fs::File::create(self.dir.join(format!("{name}.dat")))?;
            f.write_all(out.as_bytes())?;
        }
        Ok(())
    }
}

/// Entropy-monotonicity audit accumulated over a run.
#[derive(Debug, Clone, Copy)]
pub struct EntropyAudit {
    /// min over steps of S(t+dt) - S(t).
    pub min_increment: f64,
    /// per-step tolerance dx*dt*(1 + |S(0)|); undershoot beyond it is a failure.
    pub tolerance: f64,
    /// worst undershoot beyond the tolerance (0 when monotone up to tolerance).
    pub worst_violation: f64,
    /// smallest conduction/friction production seen (each is a sum of squares).
    pub min_production: f64,
}

impl EntropyAudit {
    fn new() -> Self {
        Self {
            min_increment: f64::INFINITY,
            tolerance: 0.0,
            worst_violation: 0.0,
            min_production: f64::INFINITY,
        }
    }

    fn record(&mut self, increment: f64, tolerance: f64, production: f64) {
        self.min_increment = self.min_increment.min(increment);
        self.tolerance = self.tolerance.max(tolerance);
        self.worst_violation = self.worst_violation.max(-(increment + tolerance));
        self.min_production = self.min_production.min(production);
    }

    pub fn monotone_up_to_tolerance(&self) -> bool {
        self.worst_violation <= 0.0
    }
}

/// Outcome of a single-model run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub model: &'static str,
    pub steps: usize,
    pub final_time: f64,
    pub entropy_initial: f64,
    pub entropy_final: f64,
    pub entropy_audit: EntropyAudit,
    pub snapshots: usize,
}

enum AnyState {
    One(StateI),
    Two(StateII),
}

/// Class-II initial state: the lifted Class-I profiles when well prepared,
/// otherwise the barycentric velocity plus explicit per-species offsets.
pub fn class2_initial(
    config: &RunConfig,
    grid: &Grid1D,
    thermo: &ThermoModel,
    friction: &FrictionMatrix,
    sources: &SourceConfig,
) -> Result<StateII> {
    let (rho, v, theta) = config.initial_profiles(grid);
    let n = config.species.n;
    let v_species: Vec<Vec<f64>> = if config.ic.well_prepared {
        let u = class1::diffusional_velocities(&rho, &theta, 0.0, grid, thermo, friction, sources)?;
        (0..n)
            .map(|i| (0..grid.ncells()).map(|j| v[j] + u[i][j]).collect())
            .collect()
    } else {
        let zeros = vec![0.0; n];
        let dv = config.ic.dv.as_deref().unwrap_or(&zeros);
        (0..n)
            .map(|i| (0..grid.ncells()).map(|j| v[j] + dv[i]).collect())
            .collect()
    };
    let state = StateII::from_primitives(0.0, rho, v_species, theta, thermo)?;
    state.check_validity(thermo)?;
    Ok(state)
}

pub fn class1_initial(
    config: &RunConfig,
    grid: &Grid1D,
    thermo: &ThermoModel,
    friction: &FrictionMatrix,
    sources: &SourceConfig,
) -> Result<StateI> {
    let (rho, v, theta) = config.initial_profiles(grid);
    StateI::from_primitives(0.0, rho, v, theta, grid, thermo, friction, sources)
}

/// Deterministic simulation of one model to t_end with snapshot and entropy
/// time-series output.
pub fn run_single(config: &RunConfig, model: Model) -> Result<RunSummary> {
    let thermo = config.thermo_model()?;
    let grid = config.build_grid()?;
    let friction = config.friction_single()?;
    let sources = config.source_config()?;
    let writer = TableWriter::new(Path::new(&config.outputs.directory), &config.outputs.formats)?;

    let mut state = match model {
        Model::Class1 => AnyState::One(class1_initial(config, &grid, &thermo, &friction, &sources)?),
        Model::Class2 => AnyState::Two(class2_initial(config, &grid, &thermo, &friction, &sources)?),
    };

    let n = config.species.n;
    let mut snap_rows: Vec<Vec<f64>> = Vec::new();
    let mut entropy_rows: Vec<Vec<f64>> = Vec::new();
    let push_snapshot = |rows: &mut Vec<Vec<f64>>, state: &AnyState, grid: &Grid1D| match state {
        AnyState::Two(s) => {
            for j in 0..grid.ncells() {
                let mut row = vec![s.time, grid.center(j)];
                for i in 0..n {
                    row.push(s.rho[i][j]);
                }
                for i in 0..n {
                    row.push(s.v[i][j]);
                }
                row.push(s.theta[j]);
                rows.push(row);
            }
        }
        AnyState::One(s) => {
            for j in 0..grid.ncells() {
                let mut row = vec![s.time, grid.center(j)];
                for i in 0..n {
                    row.push(s.rho[i][j]);
                }
                row.push(s.v[j]);
                row.push(s.theta[j]);
                for i in 0..n {
                    row.push(s.u[i][j]);
                }
                rows.push(row);
            }
        }
    };
    let entropy_of = |state: &AnyState| -> f64 {
        match state {
            AnyState::One(s) => s.integrated_entropy(&thermo, &grid),
            AnyState::Two(s) => s.integrated_entropy(&thermo, &grid),
        }
    };
    let production_of = |state: &AnyState| -> (f64, f64, f64) {
        match state {
            AnyState::One(s) => {
                let p = entropy_production_class1(s, &grid, &friction, &sources);
                (p.conduction, p.friction, p.supply)
            }
            AnyState::Two(s) => {
                let p = entropy_production_class2(s, &grid, &friction, &sources);
                (p.conduction, p.friction, p.supply)
            }
        }
    };

    let entropy_initial = entropy_of(&state);
    let mut audit = EntropyAudit::new();
    let mut time = 0.0;
    let mut steps = 0usize;
    let mut next_snapshot = 0.0;
    let t_end = config.time.t_end;

    loop {
        if time + 1e-12 >= next_snapshot {
            push_snapshot(&mut snap_rows, &state, &grid);
            let (cond, fric, supply) = production_of(&state);
            entropy_rows.push(vec![time, entropy_of(&state), cond, fric, supply]);
            next_snapshot += config.time.snapshot_interval;
        }
        if time >= t_end - 1e-12 {
            break;
        }
        let dt_cfl = match &state {
            AnyState::One(s) => class1::cfl_dt(s, &grid, &thermo, &sources, config.time.cfl_number),
            AnyState::Two(s) => class2::cfl_dt(s, &grid, &thermo, &sources, config.time.cfl_number),
        };
        let dt = dt_cfl.min(t_end - time).min(next_snapshot - time + 1e-13);
        let s_before = entropy_of(&state);
        state = match state {
            AnyState::One(s) => {
                AnyState::One(class1::step(&s, &grid, &thermo, &friction, &sources, dt)?)
            }
            AnyState::Two(s) => {
                AnyState::Two(class2::step(&s, &grid, &thermo, &friction, &sources, dt)?)
            }
        };
        let s_after = entropy_of(&state);
        let (cond, fric, _) = production_of(&state);
        let tol = class2::entropy_tolerance(&grid, dt, entropy_initial);
        audit.record(s_after - s_before, tol, cond.min(fric));
        time += dt;
        steps += 1;
    }

    let mut header = vec!["t".to_string(), "x".to_string()];
    for i in 0..n {
        header.push(format!("rho_{}", i + 1));
    }
    match model {
        Model::Class2 => {
            for i in 0..n {
                header.push(format!("v_{}", i + 1));
            }
            header.push("theta".to_string());
        }
        Model::Class1 => {
            header.push("v".to_string());
            header.push("theta".to_string());
            for i in 0..n {
                header.push(format!("u_{}", i + 1));
            }
        }
    }
    writer.write(&format!("{}_snapshots", model.name()), &header, &snap_rows)?;
    writer.write(
        &format!("{}_entropy", model.name()),
        &[
            "t".to_string(),
            "total_entropy".to_string(),
            "conduction_production".to_string(),
            "friction_production".to_string(),
            "supply_production".to_string(),
        ],
        &entropy_rows,
    )?;

    Ok(RunSummary {
        model: model.name(),
        steps,
        final_time: time,
        entropy_initial,
        entropy_final: entropy_of(&state),
        entropy_audit: audit,
        snapshots: snap_rows.len() / grid.ncells(),
    })
}

/// One row of the paired-run diagnostics time series.
#[derive(Debug, Clone)]
pub struct PairedRow {
    pub t: f64,
    pub report: RelEntropyReport,
}

/// Outcome of a paired Class-II/Class-I run.
#[derive(Debug, Clone)]
pub struct PairedOutcome {
    pub rows: Vec<PairedRow>,
    pub steps: usize,
    pub dt: f64,
    pub h_initial: f64,
    pub h_final: f64,
    pub class2_audit: EntropyAudit,
    pub class1_audit: EntropyAudit,
    /// Largest |sum rho_i u_i| seen on any Class-I cell.
    pub max_constraint_defect: f64,
}

/// Run both models side by side with a common fixed dt (minimum of both CFL
/// contracts at t = 0), lifting the Class-I state at every output time.
pub fn run_paired(config: &RunConfig) -> Result<PairedOutcome> {
    let thermo = config.thermo_model()?;
    let grid = config.build_grid()?;
    let friction = config.friction_single()?;
    let sources = config.source_config()?;
    let writer = TableWriter::new(Path::new(&config.outputs.directory), &config.outputs.formats)?;

    let mut state1 = class1_initial(config, &grid, &thermo, &friction, &sources)?;
    let mut state2 = class2_initial(config, &grid, &thermo, &friction, &sources)?;

    let dt_candidate = class2::cfl_dt(&state2, &grid, &thermo, &sources, config.time.cfl_number)
        .min(class1::cfl_dt(
            &state1,
            &grid,
            &thermo,
            &sources,
            config.time.cfl_number,
        ));
    let n_steps = (config.time.t_end / dt_candidate).ceil().max(1.0) as usize;
    let dt = config.time.t_end / n_steps as f64;
    let stride = ((config.time.snapshot_interval / dt).round() as usize).max(1);

    let mut history: VecDeque<StateI> = VecDeque::with_capacity(3);
    history.push_back(state1.clone());

    let mut rows: Vec<PairedRow> = Vec::new();
    let mut class2_audit = EntropyAudit::new();
    let mut class1_audit = EntropyAudit::new();
    let mut max_constraint = state1.constraint_defect();
    let s2_initial = state2.integrated_entropy(&thermo, &grid);
    let s1_initial = state1.integrated_entropy(&thermo, &grid);

    let evaluate = |state2: &StateII,
                        state1: &StateI,
                        history: &VecDeque<StateI>|
     -> Result<PairedRow> {
        let lifted = lift(state1);
        let mut report = diagnostics::relative_entropy(
            state2,
            &lifted,
            &thermo,
            &grid,
            &friction,
            &sources,
            config.diagnostics.coercivity_c,
        )?;
        if history.len() == 3 {
            let refs: Vec<&StateI> = history.iter().collect();
            let res = class1::residuals(&refs, &grid)?;
            report.r_norm = Some(res.r_norm(&grid));
            report.q_norm = Some(res.q_norm(&grid));
        }
        Ok(PairedRow {
            t: state1.time,
            report,
        })
    };

    rows.push(evaluate(&state2, &state1, &history)?);
    let h_initial = rows[0].report.h;

    for step_idx in 1..=n_steps {
        let s2_before = state2.integrated_entropy(&thermo, &grid);
        let s1_before = state1.integrated_entropy(&thermo, &grid);
        state2 = class2::step(&state2, &grid, &thermo, &friction, &sources, dt)?;
        state1 = class1::step(&state1, &grid, &thermo, &friction, &sources, dt)?;
        max_constraint = max_constraint.max(state1.constraint_defect());

        let p2 = entropy_production_class2(&state2, &grid, &friction, &sources);
        let p1 = entropy_production_class1(&state1, &grid, &friction, &sources);
        let tol2 = class2::entropy_tolerance(&grid, dt, s2_initial);
        let tol1 = class2::entropy_tolerance(&grid, dt, s1_initial);
        class2_audit.record(
            state2.integrated_entropy(&thermo, &grid) - s2_before,
            tol2,
            p2.conduction.min(p2.friction),
        );
        class1_audit.record(
            state1.integrated_entropy(&thermo, &grid) - s1_before,
            tol1,
            p1.conduction.min(p1.friction),
        );

        if history.len() == 3 {
            history.pop_front();
        }
        history.push_back(state1.clone());

        if step_idx % stride == 0 || step_idx == n_steps {
            rows.push(evaluate(&state2, &state1, &history)?);
        }
    }

    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            vec![
                row.t,
                row.report.h,
                row.report.friction_dissipation,
                row.report.conduction_dissipation,
                row.report.coercivity_margin,
                row.report.r_norm.unwrap_or(f64::NAN),
                row.report.q_norm.unwrap_or(f64::NAN),
            ]
        })
        .collect();
    writer.write(
        "relative_entropy",
        &[
            "t".to_string(),
            "H".to_string(),
            "friction_dissipation".to_string(),
            "conduction_dissipation".to_string(),
            "coercivity_margin".to_string(),
            "R_norm".to_string(),
            "Q_norm".to_string(),
        ],
        &table,
    )?;

    let h_final = rows.last().map(|r| r.report.h).unwrap_or(f64::NAN);
    Ok(PairedOutcome {
        rows,
        steps: n_steps,
        dt,
        h_initial,
        h_final,
        class2_audit,
        class1_audit,
        max_constraint_defect: max_constraint,
    })
}

/// One sweep member.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub h_final: f64,
    pub steps: usize,
    /// Wall-clock seconds; reported on stdout only so file outputs stay
    /// byte-identical across runs and worker counts.
    pub runtime_secs: f64,
}

/// Outcome of an epsilon sweep.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub entries: Vec<SweepEntry>,
    pub fit: RateFit,
    pub threshold: f64,
    pub pass: bool,
    /// H(t_end) nonincreasing as epsilon decreases, with 5% slack.
    pub monotone: bool,
    /// Empirical exponential growth rate of H(t) fitted on the largest-eps
    /// member (reported, never gated).
    pub gronwall_rate: f64,
}

fn member_config(config: &RunConfig, idx: usize, eps: f64) -> RunConfig {
    let mut member = config.clone();
    member.friction.epsilon = Some(eps);
    member.friction.epsilon_sweep = None;
    member.outputs.directory = format!(
        "{}/eps_{:02}_{:.3e}",
        config.outputs.directory, idx, eps
    );
    member
}

/// Run run_paired per epsilon and fit the slope of log H(t_end) vs log eps.
pub fn run_sweep(config: &RunConfig) -> Result<SweepOutcome> {
    let sweep = config.friction.epsilon_sweep.clone().ok_or_else(|| {
        Error::InvalidArgument("sweep needs `friction.epsilon_sweep`".into())
    })?;
    if sweep.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "sweep needs at least 3 epsilon values, got {}",
            sweep.len()
        )));
    }
    let max = sweep.iter().cloned().fold(f64::MIN, f64::max);
    let min = sweep.iter().cloned().fold(f64::MAX, f64::min);
    if max / min < 99.999 {
        return Err(Error::InvalidArgument(format!(
            "sweep epsilons must span at least two decades, got {min:.3e}..{max:.3e}"
        )));
    }
    if !config.ic.well_prepared {
        return Err(Error::InvalidArgument(
            "sweep requires well-prepared initial data (`ic.well_prepared = true`)".into(),
        ));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.sweep.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let members: Vec<(usize, f64)> = sweep.iter().cloned().enumerate().collect();
    let results: Vec<(f64, std::result::Result<(PairedOutcome, f64), Error>)> = pool.install(|| {
        use rayon::prelude::*;
        members
            .par_iter()
            .map(|&(idx, eps)| {
                let member = member_config(config, idx, eps);
                let start = Instant::now();
                let out = run_paired(&member).map(|o| (o, start.elapsed().as_secs_f64()));
                (eps, out)
            })
            .collect()
    });

    let mut statuses = Vec::new();
    let mut failed = false;
    for (eps, res) in &results {
        match res {
            Ok(_) => statuses.push(format!("eps = {eps:.3e}: ok")),
            Err(e) => {
                failed = true;
                statuses.push(format!("eps = {eps:.3e}: FAILED ({e})"));
            }
        }
    }
    if failed {
        return Err(Error::SweepMembers(statuses));
    }

    let mut entries = Vec::new();
    let mut points = Vec::new();
    let mut gronwall_rate = f64::NAN;
    for (k, (eps, res)) in results.into_iter().enumerate() {
        let (outcome, runtime) = res.expect("failures handled above");
        points.push((eps, outcome.h_final));
        if k == 0 {
            gronwall_rate = estimate_growth_rate(&outcome.rows);
        }
        entries.push(SweepEntry {
            epsilon: eps,
            h_final: outcome.h_final,
            steps: outcome.steps,
            runtime_secs: runtime,
        });
    }

    let fit = fit_rate(&points)?;
    let pass = fit.slope >= config.sweep.slope_threshold;

    // ordering check: sort by descending eps, H must not increase (5% slack)
    let mut sorted = points.clone();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let monotone = sorted.windows(2).all(|w| w[1].1 <= w[0].1 * 1.05);

    let writer = TableWriter::new(Path::new(&config.outputs.directory), &config.outputs.formats)?;
    let rows: Vec<Vec<f64>> = entries
        .iter()
        .map(|e| {
            vec![
                e.epsilon,
                e.h_final,
                e.steps as f64,
                fit.slope,
                fit.intercept,
                fit.residual,
                if pass { 1.0 } else { 0.0 },
            ]
        })
        .collect();
    writer.write(
        "sweep_summary",
        &[
            "epsilon".to_string(),
            "h_final".to_string(),
            "steps".to_string(),
            "fit_slope".to_string(),
            "fit_intercept".to_string(),
            "fit_residual".to_string(),
            "pass".to_string(),
        ],
        &rows,
    )?;

    Ok(SweepOutcome {
        entries,
        fit,
        threshold: config.sweep.slope_threshold,
        pass,
        monotone,
        gronwall_rate,
    })
}

/// Exponential growth rate of H(t) over the second half of a paired series.
fn estimate_growth_rate(rows: &[PairedRow]) -> f64 {
    let positive: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.report.h > 0.0)
        .map(|r| (r.t, r.report.h))
        .collect();
    if positive.len() < 4 {
        return f64::NAN;
    }
    let half = positive.len() / 2;
    let tail = &positive[half..];
    let (t0, h0) = tail[0];
    let (t1, h1) = tail[tail.len() - 1];
    if t1 <= t0 || h0 <= 0.0 || h1 <= 0.0 {
        return f64::NAN;
    }
    (h1 / h0).ln() / (t1 - t0)
}
