//! Paired relaxation/limit runs over a list of ε.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::initial_data::{DataSpectrum, InitialData};
use crate::error::Result;
use crate::integrator::{drive, EnsStepper, KsnsStepper, PairedStepper};
use crate::littlewood_paley::{besov_from_blocks, BesovSpec, BlockNorms, DyadicDecomposition, ThresholdConfig};
use crate::models::diagnostics::accumulate;
use crate::models::{delta_e0, e0, EnsState, InstantDiagnostics, KsnsState};
use crate::spectral::{Grid, SpectralField};

/// One entry of the long-format series table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub run_id: String,
    pub t: f64,
    pub name: String,
    pub value: f64,
}

/// Scalar outcomes of one paired run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub epsilon: f64,
    pub accepted_steps: usize,
    /// Set when the run aborted; the remaining fields then cover `[0, final_time]`.
    pub failure: Option<String>,
    pub final_time: f64,
    /// `sup_t (‖δa‖ + ‖δu‖)_{Ḃ⁰}`.
    pub err_sup_b0: f64,
    /// Same quantity with the supremum taken per block (Chemin-Lerner form).
    pub err_cl_b0: f64,
    /// `∫ (‖δa‖ + ‖δu‖)_{Ḃ²} dt`.
    pub err_l1_b2: f64,
    /// `∫ (‖∂_t δa‖ + ‖∂_t δu‖)_{Ḃ⁰} dt`, time derivatives by finite differences.
    pub dt_err_l1_b0: f64,
    /// `∫ ‖ε⁻¹w − W*‖_{Ḃ¹ + Ḃ²} dt`.
    pub darcy_l1: f64,
    /// `∫ ‖Z‖_{Ḃ¹} dt`.
    pub z_l1: f64,
    /// `∫ ‖R‖_{Ḃ⁰ ∩ Ḃ¹} dt`.
    pub r_l1: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub e0: f64,
    pub delta_e0: f64,
    pub min_density: f64,
    pub j_eps: i32,
}

impl RunSummary {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

pub struct RunOutput {
    pub summary: RunSummary,
    pub series: Vec<SeriesPoint>,
    pub final_state: Option<(EnsState, KsnsState)>,
}

pub struct SweepOutput {
    pub grid: Arc<Grid>,
    pub amplitude: f64,
    pub runs: Vec<RunOutput>,
}

fn b21(blocks: &BlockNorms, s: f64) -> f64 {
    besov_from_blocks(blocks, &BesovSpec::b21(s))
}

/// Running time integrals by the trapezoidal rule.
struct Trapezoid {
    last: Option<(f64, Vec<f64>)>,
    totals: Vec<f64>,
}

impl Trapezoid {
    fn new(n: usize) -> Self {
        Self { last: None, totals: vec![0.0; n] }
    }

    fn push(&mut self, t: f64, values: Vec<f64>) {
        if let Some((t0, v0)) = &self.last {
            let h = t - t0;
            for ((tot, a), b) in self.totals.iter_mut().zip(v0).zip(&values) {
                *tot += 0.5 * h * (a + b);
            }
        }
        self.last = Some((t, values));
    }
}

struct Observer<'a> {
    dec: &'a DyadicDecomposition,
    threshold: ThresholdConfig,
    run_id: String,
    interval: f64,
    next_emit: f64,
    t_end: f64,
    instants: Vec<InstantDiagnostics>,
    emitted: Vec<usize>,
    err_sup: f64,
    block_sup: Vec<f64>,
    integrals: Trapezoid,
    dt_err: f64,
    previous: Option<(SpectralField, SpectralField)>,
    min_density: f64,
    series: Vec<SeriesPoint>,
    last_state: Option<(EnsState, KsnsState)>,
}

const INTEGRAL_NAMES: [&str; 4] = ["err_b2", "darcy_residual", "z_b1", "r_b0_b1"];

impl Observer<'_> {
    fn observe(&mut self, t: f64, state: &(EnsState, KsnsState), keep_state: bool) -> Result<()> {
        let (ens, ksns) = state;
        let inst = InstantDiagnostics::evaluate(ens, ksns, self.dec, &self.threshold, t)?;
        let da = ens.a.sub(&ksns.a);
        let du = ens.u.sub(&ksns.u);
        let (ba, bu) = (self.dec.block_norms(&da), self.dec.block_norms(&du));
        let err_b0 = b21(&ba, 0.0) + b21(&bu, 0.0);
        let err_b2 = b21(&ba, 2.0) + b21(&bu, 2.0);
        self.err_sup = self.err_sup.max(err_b0);
        if self.block_sup.is_empty() {
            self.block_sup = vec![0.0; ba.norms.len()];
        }
        for (s, (x, y)) in self.block_sup.iter_mut().zip(ba.norms.iter().zip(&bu.norms)) {
            *s = s.max(x + y);
        }
        let mut dt_err_rate = 0.0;
        if let Some((pa, pu)) = &self.previous {
            let h = t - self.integrals.last.as_ref().map_or(t, |l| l.0);
            let jump = b21(&self.dec.block_norms(&da.sub(pa)), 0.0) + b21(&self.dec.block_norms(&du.sub(pu)), 0.0);
            self.dt_err += jump;
            if h > 0.0 {
                dt_err_rate = jump / h;
            }
        }
        self.previous = Some((da, du));
        self.integrals.push(t, vec![err_b2, inst.darcy_residual, inst.z_norm, inst.r_norm]);
        let min_density = ens.min_density();
        self.min_density = self.min_density.min(min_density);

        let tol = 1e-9 * self.interval;
        let last = (t - self.t_end).abs() <= tol;
        if t >= self.next_emit - tol || last {
            self.emitted.push(self.instants.len());
            let mut push = |name: &str, value: f64| {
                self.series.push(SeriesPoint { run_id: self.run_id.clone(), t, name: name.into(), value })
            };
            push("err_b0", err_b0);
            push("err_b2", err_b2);
            push("dt_err_b0", dt_err_rate);
            push("darcy_residual", inst.darcy_residual);
            push("z_b1", inst.z_norm);
            push("r_b0_b1", inst.r_norm);
            push("min_density", min_density);
            while self.next_emit <= t + tol {
                self.next_emit += self.interval;
            }
        }
        self.instants.push(inst);
        if keep_state {
            self.last_state = Some(state.clone());
        }
        Ok(())
    }
}

/// Runs the relaxation and limit systems from `data` for one ε.
pub fn run_pair(
    grid: &Arc<Grid>,
    cfg: &ExperimentConfig,
    data: &InitialData,
    epsilon: f64,
    run_id: &str,
) -> Result<RunOutput> {
    let dec = DyadicDecomposition::for_grid(grid);
    let threshold = ThresholdConfig::new(epsilon, cfg.m0)?;
    dec.check_threshold(&threshold)?;
    let ksns0 = data.ksns(cfg.mu);
    let ens0 = if cfg.control { data.ens_prepared(epsilon, cfg.mu) } else { data.ens(epsilon, cfg.mu) };
    let mut ens = EnsStepper::new(grid, epsilon, cfg.mu);
    let mut ksns = KsnsStepper::new(grid, cfg.mu);
    if cfg.control {
        ens = ens.linear_only().with_limit_symbols();
        ksns = ksns.linear_only();
    }
    let mut stepper = PairedStepper { ens, ksns };
    let stepper_cfg = cfg.stepper(epsilon);

    let mut summary = RunSummary {
        run_id: run_id.to_string(),
        epsilon,
        e0: e0(&ksns0, &dec),
        delta_e0: delta_e0(&ens0, &ksns0, &dec, &threshold),
        j_eps: threshold.j_eps(),
        ..Default::default()
    };
    let mut obs = Observer {
        dec: &dec,
        threshold,
        run_id: run_id.to_string(),
        interval: 1.0 / cfg.output_stride,
        next_emit: 0.0,
        t_end: cfg.t_end,
        instants: Vec::new(),
        emitted: Vec::new(),
        err_sup: 0.0,
        block_sup: Vec::new(),
        integrals: Trapezoid::new(INTEGRAL_NAMES.len()),
        dt_err: 0.0,
        previous: None,
        min_density: f64::INFINITY,
        series: Vec::new(),
        last_state: None,
    };
    let keep = cfg.snapshots;
    let result = drive(&mut stepper, (ens0, ksns0), &stepper_cfg, |t, s| obs.observe(t, s, keep));
    match result {
        Ok((_, n)) => summary.accepted_steps = n,
        Err(e) => summary.failure = Some(e.to_string()),
    }

    let samples = accumulate(&obs.instants);
    for &k in &obs.emitted {
        let s = &samples[k];
        for (name, value) in [("energy", s.energy), ("dissipation", s.dissipation)] {
            obs.series.push(SeriesPoint { run_id: run_id.to_string(), t: s.time, name: name.into(), value });
        }
    }
    if let Some(last) = samples.last() {
        summary.final_time = last.time;
        summary.energy = last.energy;
        summary.dissipation = last.dissipation;
    }
    let totals = &obs.integrals.totals;
    summary.err_sup_b0 = obs.err_sup;
    summary.err_cl_b0 = obs.block_sup.iter().sum();
    summary.err_l1_b2 = totals[0];
    summary.darcy_l1 = totals[1];
    summary.z_l1 = totals[2];
    summary.r_l1 = totals[3];
    summary.dt_err_l1_b0 = obs.dt_err;
    summary.min_density = obs.min_density;
    Ok(RunOutput { summary, series: obs.series, final_state: obs.last_state })
}

/// Shared data for a sweep, normalised to the configured size.
pub fn sweep_data(grid: &Arc<Grid>, cfg: &ExperimentConfig) -> Result<(InitialData, f64)> {
    let spectrum = DataSpectrum { sigma1: cfg.sigma1, cutoff: cfg.data_cutoff };
    let raw = InitialData::synthesize(grid, &spectrum, cfg.seed);
    let (data, amplitude) =
        raw.normalized(grid, &cfg.epsilon_list, cfg.m0, cfg.mu, cfg.control, cfg.amplitude_target)?;
    Ok((data.scaled(cfg.amplitude_scale), amplitude * cfg.amplitude_scale))
}

/// Runs every ε of `cfg.epsilon_list` in parallel on common data.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let grid = Grid::new(cfg.n, cfg.length)?;
    let (data, amplitude) = sweep_data(&grid, cfg)?;
    let runs = cfg
        .epsilon_list
        .par_iter()
        .enumerate()
        .map(|(k, &eps)| run_pair(&grid, cfg, &data, eps, &format!("eps{k}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepOutput { grid, amplitude, runs })
}
