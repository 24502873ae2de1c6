//! Global quench driver: Z = 1 product state evolved under the clock model.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qrtebd::clock::{BondPosition, ClockModel};
use qrtebd::mps::{write_checkpoint, Checkpoint, FiniteMps, MatrixProductState, UniformMps};
use qrtebd::tebd::{
    trotter_schedule, trotter_schedule_bonds, Evolvable, GateRecord, Scheme, TrotterSchedule, TruncationPolicy,
};
use qrtebd::{ComplexTensor, C64};

use crate::config::{RunConfig, SystemKind};
use crate::error::{CliError, CliResult};

/// Observables after one Trotter step.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesRow {
    pub step: usize,
    pub t: f64,
    /// `⟨Z⟩` per site.
    pub z: Vec<C64>,
    /// Bond labels, aligned with the per-bond vectors below.
    pub bonds: Vec<usize>,
    pub entropy: Vec<f64>,
    /// Largest truncation error of any gate on the bond during this step.
    pub eps_trunc: Vec<f64>,
    pub chi: Vec<usize>,
    pub max_eps_trunc: f64,
    pub max_chi: usize,
    /// Wall time since the start of the run.
    pub wall_s: f64,
}

#[derive(Clone, Debug)]
pub enum QuenchState {
    Uniform(UniformMps),
    Finite(FiniteMps),
}

impl QuenchState {
    pub fn as_mps(&self) -> &dyn MatrixProductState {
        match self {
            QuenchState::Uniform(u) => u,
            QuenchState::Finite(f) => f,
        }
    }

    pub fn checkpoint(&self) -> Checkpoint {
        match self {
            QuenchState::Uniform(u) => Checkpoint::Uniform(u.clone()),
            QuenchState::Finite(f) => Checkpoint::Finite(f.clone()),
        }
    }
}

/// A quench in progress.
pub struct Quench {
    config: RunConfig,
    policy: TruncationPolicy,
    schedule: TrotterSchedule,
    state: QuenchState,
    z: ComplexTensor,
    bonds: Vec<usize>,
    step: usize,
    started: Instant,
}

impl Quench {
    pub fn new(config: &RunConfig) -> CliResult<Self> {
        config.validate()?;
        let (d, n, dt) = (config.model.d, config.system.size, config.evolution.dt);
        let model = ClockModel::new(d, config.model.g)?;
        let mut up = vec![C64::new(0.0, 0.0); d];
        up[0] = C64::new(1.0, 0.0);
        let order = config.evolution.trotter_order;
        let (state, schedule, bonds) = match config.system.kind {
            SystemKind::Uniform => (
                QuenchState::Uniform(UniformMps::product_state(d, n, &up)?),
                trotter_schedule(&model.bond_hamiltonian(BondPosition::Bulk), d, dt, order)?,
                (0..n).collect(),
            ),
            SystemKind::Finite => (
                QuenchState::Finite(FiniteMps::product_state(d, n, &up)?),
                trotter_schedule_bonds(&model.chain_bond_hamiltonians(n)?, d, dt, order)?,
                (1..n).collect(),
            ),
        };
        Ok(Self {
            config: config.clone(),
            policy: config.policy(),
            schedule,
            state,
            z: model.operators().0,
            bonds,
            step: 0,
            started: Instant::now(),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn state(&self) -> &QuenchState {
        &self.state
    }

    /// Switches rescaling of the bond matrices after truncation.
    pub fn set_renormalize(&mut self, on: bool) {
        self.policy.renormalize = on;
    }

    pub fn steps_done(&self) -> usize {
        self.step
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.config.steps()
    }

    /// Advances by one Trotter step.
    pub fn step(&mut self) -> CliResult<TimeSeriesRow> {
        self.step_observed(|_, _| Ok(()))
    }

    /// Advances by one Trotter step, calling `after_layer` with the state and
    /// the gate records after every layer of the schedule.
    pub fn step_observed<F>(&mut self, mut after_layer: F) -> CliResult<TimeSeriesRow>
    where
        F: FnMut(&QuenchState, &[GateRecord]) -> CliResult<()>,
    {
        let scheme: Scheme = self.config.truncation.scheme;
        let mut records = Vec::new();
        for layer in &self.schedule {
            let mut out = Vec::new();
            match &mut self.state {
                QuenchState::Uniform(u) => u.apply_layer(layer, scheme, &self.policy, &mut out)?,
                QuenchState::Finite(f) => f.apply_layer(layer, scheme, &self.policy, &mut out)?,
            }
            after_layer(&self.state, &out)?;
            records.extend(out);
        }
        self.step += 1;
        self.observe(&records)
    }

    fn observe(&self, records: &[GateRecord]) -> CliResult<TimeSeriesRow> {
        let mps = self.state.as_mps();
        let z = mps.expectation_profile(&self.z)?;
        let mut entropy = Vec::with_capacity(self.bonds.len());
        let mut chi = Vec::with_capacity(self.bonds.len());
        for &b in &self.bonds {
            let s = mps.schmidt_values(b)?;
            entropy.push(qrtebd::mps::entropy_from_schmidt(&s));
            chi.push(s.len());
        }
        let eps_trunc: Vec<f64> = self
            .bonds
            .iter()
            .map(|&b| {
                records
                    .iter()
                    .filter(|r| r.bond == b)
                    .map(|r| r.report.eps_trunc)
                    .fold(0.0, f64::max)
            })
            .collect();
        if z.iter().any(|x| !x.is_finite()) || entropy.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Numeric(format!("non-finite observables at step {}", self.step)));
        }
        Ok(TimeSeriesRow {
            step: self.step,
            t: self.step as f64 * self.config.evolution.dt,
            max_eps_trunc: eps_trunc.iter().copied().fold(0.0, f64::max),
            max_chi: chi.iter().copied().max().unwrap_or(1),
            z,
            bonds: self.bonds.clone(),
            entropy,
            eps_trunc,
            chi,
            wall_s: self.started.elapsed().as_secs_f64(),
        })
    }
}

/// Runs the whole quench in memory.
pub fn simulate(config: &RunConfig) -> CliResult<Vec<TimeSeriesRow>> {
    let mut q = Quench::new(config)?;
    let mut rows = Vec::with_capacity(config.steps());
    while !q.is_done() {
        rows.push(q.step()?);
    }
    Ok(rows)
}

/// Files written by [`run_quench`].
#[derive(Clone, Debug)]
pub struct QuenchOutput {
    pub dir: PathBuf,
    pub steps: usize,
    pub final_checkpoint: PathBuf,
    pub wall_s: f64,
}

struct Writers {
    observables: csv::Writer<File>,
    bonds: csv::Writer<File>,
    timing: csv::Writer<File>,
}

impl Writers {
    fn create(dir: &Path) -> CliResult<Self> {
        let open = |name: &str, header: &[&str]| -> CliResult<csv::Writer<File>> {
            let path = dir.join(name);
            let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
            w.write_record(header).map_err(|e| csv_err(&path, e))?;
            Ok(w)
        };
        Ok(Self {
            observables: open("observables.csv", &["t", "site", "z_re", "z_im"])?,
            bonds: open("bonds.csv", &["t", "bond", "entropy", "eps_trunc", "chi"])?,
            timing: open("timing.csv", &["t", "max_eps_trunc", "max_chi", "wall_s"])?,
        })
    }

    fn write(&mut self, row: &TimeSeriesRow) -> csv::Result<()> {
        let t = num(row.t);
        for (site, z) in row.z.iter().enumerate() {
            self.observables
                .write_record([t.clone(), site.to_string(), num(z.re), num(z.im)])?;
        }
        for (k, &b) in row.bonds.iter().enumerate() {
            self.bonds.write_record([
                t.clone(),
                b.to_string(),
                num(row.entropy[k]),
                num(row.eps_trunc[k]),
                row.chi[k].to_string(),
            ])?;
        }
        self.timing.write_record([
            t,
            num(row.max_eps_trunc),
            row.max_chi.to_string(),
            num(row.wall_s),
        ])
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.observables.flush()?;
        self.bonds.flush()?;
        self.timing.flush()
    }
}

/// Shortest round-trip form; scientific outside `[1e-4, 1e6)`.
pub(crate) fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}

fn save_checkpoint(path: &Path, state: &QuenchState) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(&path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    write_checkpoint(&mut w, &state.checkpoint()).map_err(|e| CliError::io(&path.display().to_string(), e))
}

/// Runs the quench and writes `config.json`, `observables.csv`, `bonds.csv`,
/// `timing.csv` and checkpoints into `config.output.path`.
///
/// One row per Trotter step is written, starting at `t = dt`.
pub fn run_quench(config: &RunConfig) -> CliResult<QuenchOutput> {
    let mut q = Quench::new(config)?;
    let dir = config.output.path.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&format!("cannot create {}", dir.display()), e))?;
    fs::write(dir.join("config.json"), config.to_json() + "\n")
        .map_err(|e| CliError::io("cannot write config.json", e))?;
    let mut out = Writers::create(&dir)?;
    let every = config.output.checkpoint_every;
    while !q.is_done() {
        let row = q.step()?;
        out.write(&row).map_err(|e| CliError::Validation(format!("writing CSV: {e}")))?;
        if every > 0 && row.step % every == 0 {
            out.flush().map_err(|e| CliError::io("flushing CSV", e))?;
            save_checkpoint(&dir.join(format!("checkpoint_{:06}.qmps", row.step)), q.state())?;
        }
    }
    out.flush().map_err(|e| CliError::io("flushing CSV", e))?;
    let final_checkpoint = dir.join("final.qmps");
    save_checkpoint(&final_checkpoint, q.state())?;
    Ok(QuenchOutput {
        dir,
        steps: q.steps_done(),
        final_checkpoint,
        wall_s: q.started.elapsed().as_secs_f64(),
    })
}
