//! Exponential time differencing with exact per-mode linear flow.
//!
//! Each state is split per Fourier mode into 2×2 blocks on which the
//! linearisation about rest is exact: `(â, ξ̂·ŵ)` evolves under `−B₁` and
//! `(ξ̂^⊥·ŵ, ξ̂^⊥·û)` under `−B₂` (see [`crate::spectrum`]). At `ξ = 0` the
//! density is frozen and each Cartesian pair `(ŵ_m, û_m)` follows `−B₂(0)`.
//! The limit system is diagonal: `e^{−t|ξ|²}` on `a` and `e^{−tμ|ξ|²}` on `u`.
//!
//! Nonlinear terms are coupled with the second-order Cox–Matthews scheme
//!
//! ```text
//! A       = e^{hL} yₙ + h φ₁(hL) N(yₙ)
//! yₙ₊₁    = A + h φ₂(hL) (N(A) − N(yₙ))
//! ```
//!
//! so all ε-stiffness is absorbed by the exact exponentials. After every step
//! the state is dealiased, `u` re-projected and Hermitian symmetry restored.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    check_density, ens_nonlinear, ksns_nonlinear, DiagnosticsSample, EnsState, EnsTendency, KsnsState,
};
use crate::spectral::{Grid, SpectralField};
use crate::spectrum::{self, Mat2, SymbolPoint, C64};

/// Maximum number of step halvings before a CFL failure aborts the run.
pub const MAX_HALVINGS: u32 = 20;

/// Fine time stepping through the initial relaxation layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialLayer {
    pub duration: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Snapshots per unit time.
    pub output_stride: f64,
    pub cfl_safety: f64,
    pub dealias_fraction: f64,
    #[serde(default)]
    pub initial_layer: Option<InitialLayer>,
}

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            output_stride: 1.0 / dt,
            cfl_safety: 0.5,
            dealias_fraction: 2.0 / 3.0,
            initial_layer: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0) {
            return bad(format!("t_end must be nonnegative, got {}", self.t_end));
        }
        if !(self.output_stride > 0.0) {
            return bad(format!("output_stride must be positive, got {}", self.output_stride));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return bad(format!("cfl_safety must lie in (0, 1), got {}", self.cfl_safety));
        }
        if (self.dealias_fraction - 2.0 / 3.0).abs() > 1e-12 {
            return bad("only the two-thirds dealiasing rule is supported".into());
        }
        if let Some(layer) = self.initial_layer {
            if !(layer.dt > 0.0 && layer.duration >= 0.0) {
                return bad("initial layer needs positive dt and nonnegative duration".into());
            }
        }
        Ok(())
    }

    /// Macro step sizes from `0` to `t_end`.
    pub fn schedule(&self) -> Vec<f64> {
        let mut steps = Vec::new();
        let mut t = 0.0;
        let tol = 1e-12 * self.t_end.max(1.0);
        if let Some(layer) = self.initial_layer.filter(|l| l.dt < self.dt) {
            let end = layer.duration.min(self.t_end);
            while t < end - tol {
                let h = layer.dt.min(end - t);
                steps.push(h);
                t += h;
            }
        }
        let remaining = self.t_end - t;
        if remaining > tol {
            let n = (remaining / self.dt - 1e-9).ceil().max(1.0) as usize;
            let h = remaining / n as f64;
            steps.extend(std::iter::repeat(h).take(n));
        }
        steps
    }
}

/// A time-steppable system.
pub trait Dynamics {
    type State: Clone;

    fn grid(&self) -> &Arc<Grid>;

    /// One step of size `h`.
    fn step(&mut self, state: &Self::State, h: f64) -> Result<Self::State>;

    /// Transport speed entering the CFL bound.
    fn transport_speed(&self, state: &Self::State) -> f64;
}

#[derive(Clone, Copy, Debug)]
struct BlockOps {
    exp: Mat2,
    phi1: Mat2,
    phi2: Mat2,
}

impl BlockOps {
    fn zero() -> Self {
        let z = Mat2::zeros();
        Self { exp: z, phi1: z, phi2: z }
    }
}

/// `φ₁(A)` and `φ₂(A)` of a 2×2 matrix from the exponential of the augmented
/// 6×6 matrix `[[A, I, 0], [0, 0, I], [0, 0, 0]]`.
pub fn phi_matrices(a: &Mat2) -> (Mat2, Mat2) {
    let mut big = SMatrix::<C64, 6, 6>::zeros();
    big.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    let one = C64::new(1.0, 0.0);
    big[(0, 2)] = one;
    big[(1, 3)] = one;
    big[(2, 4)] = one;
    big[(3, 5)] = one;
    let e = big.exp();
    (e.fixed_view::<2, 2>(0, 2).into_owned(), e.fixed_view::<2, 2>(0, 4).into_owned())
}

fn block_ops(generator: &Mat2, exact: Mat2, h: f64) -> BlockOps {
    let (phi1, phi2) = phi_matrices(&(generator * C64::new(h, 0.0)));
    BlockOps { exp: exact, phi1, phi2 }
}

fn diag(a: f64, b: f64) -> Mat2 {
    Mat2::new(C64::new(a, 0.0), C64::default(), C64::default(), C64::new(b, 0.0))
}

/// Per-mode propagators of the relaxation system for one step size.
struct EnsOps {
    compressible: Vec<BlockOps>,
    solenoidal: Vec<BlockOps>,
}

/// Exponential integrator for [`EnsState`].
pub struct EnsStepper {
    grid: Arc<Grid>,
    epsilon: f64,
    mu: f64,
    nonlinear: bool,
    limit_symbols: bool,
    cache: HashMap<u64, Arc<EnsOps>>,
}

impl EnsStepper {
    pub fn new(grid: &Arc<Grid>, epsilon: f64, mu: f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            epsilon,
            mu,
            nonlinear: true,
            limit_symbols: false,
            cache: HashMap::new(),
        }
    }

    /// Drops the nonlinear terms (linearised dynamics).
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    /// Replaces the coupled symbols by their ε → 0 limits: `a` diffuses with
    /// `e^{−t|ξ|²}`, `u` with `e^{−tμ|ξ|²}`, and `w` relaxes at rate `1/ε²`.
    /// Used as a control experiment against the limit system.
    pub fn with_limit_symbols(mut self) -> Self {
        self.limit_symbols = true;
        self.cache.clear();
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn ops(&mut self, h: f64) -> Arc<EnsOps> {
        if let Some(ops) = self.cache.get(&h.to_bits()) {
            return Arc::clone(ops);
        }
        let grid = Arc::clone(&self.grid);
        let mut by_radius: HashMap<u64, (BlockOps, BlockOps)> = HashMap::new();
        let mut compressible = Vec::with_capacity(grid.len());
        let mut solenoidal = Vec::with_capacity(grid.len());
        let inv_e2 = 1.0 / (self.epsilon * self.epsilon);
        for i in 0..grid.len() {
            if !grid.is_dealiased_mode(i) {
                compressible.push(BlockOps::zero());
                solenoidal.push(BlockOps::zero());
                continue;
            }
            let k2 = grid.xi_norm_sq(i);
            let (c, s) = *by_radius.entry(k2.to_bits()).or_insert_with(|| {
                let p = SymbolPoint::new(k2.sqrt(), self.epsilon, self.mu, Grid::DIM);
                if self.limit_symbols {
                    let gc = diag(-k2, -inv_e2);
                    let gs = diag(-inv_e2, -self.mu * k2);
                    let ec = diag((-k2 * h).exp(), (-inv_e2 * h).exp());
                    let es = diag((-inv_e2 * h).exp(), (-self.mu * k2 * h).exp());
                    (block_ops(&gc, ec, h), block_ops(&gs, es, h))
                } else {
                    let gc = -spectrum::b1_matrix(&p);
                    let gs = -spectrum::b2_matrix(&p);
                    (
                        block_ops(&gc, spectrum::propagator_b1(&p, h), h),
                        block_ops(&gs, spectrum::propagator_b2(&p, h), h),
                    )
                }
            });
            compressible.push(c);
            solenoidal.push(s);
        }
        let ops = Arc::new(EnsOps { compressible, solenoidal });
        self.cache.insert(h.to_bits(), Arc::clone(&ops));
        ops
    }

    fn nonlinear_modal(&self, state: &EnsState) -> Result<EnsModal> {
        if self.nonlinear {
            let n = ens_nonlinear(state)?;
            Ok(EnsModal::from_fields(&self.grid, &n.a, &n.w, &n.u))
        } else {
            check_density(&state.a)?;
            Ok(EnsModal::zeros(self.grid.len()))
        }
    }

    /// Applies the exact linear flow `e^{hL}` only.
    pub fn propagate_linear(&mut self, state: &EnsState, h: f64) -> EnsState {
        let ops = self.ops(h);
        let y = EnsModal::from_fields(&self.grid, &state.a, &state.w, &state.u);
        let out = y.apply(&ops, |b| &b.exp);
        out.into_state(&self.grid, state)
    }
}

/// Modal coordinates of a relaxation-system state: `comp[i] = (â, ξ̂·ŵ)`,
/// `sol[i] = (ξ̂^⊥·ŵ, ξ̂^⊥·û)`; at `ξ = 0`, `comp = (â, 0)`, `sol = (ŵ₂, û₂)`
/// and `zero_extra = (ŵ₁, û₁)`.
#[derive(Clone)]
struct EnsModal {
    comp: Vec<[C64; 2]>,
    sol: Vec<[C64; 2]>,
    zero_extra: [C64; 2],
}

fn basis(grid: &Grid, i: usize) -> ([f64; 2], [f64; 2]) {
    let [x0, x1] = grid.xi(i);
    let r = (x0 * x0 + x1 * x1).sqrt();
    let along = [x0 / r, x1 / r];
    (along, [-along[1], along[0]])
}

fn mat_vec(m: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [m[(0, 0)] * v[0] + m[(0, 1)] * v[1], m[(1, 0)] * v[0] + m[(1, 1)] * v[1]]
}

impl EnsModal {
    fn zeros(n: usize) -> Self {
        let z = [C64::default(); 2];
        Self { comp: vec![z; n], sol: vec![z; n], zero_extra: z }
    }

    fn from_fields(grid: &Grid, a: &SpectralField, w: &SpectralField, u: &SpectralField) -> Self {
        let n = grid.len();
        let mut out = Self::zeros(n);
        let (a, w0, w1, u0, u1) = (a.component(0), w.component(0), w.component(1), u.component(0), u.component(1));
        out.comp[0] = [a[0], C64::default()];
        out.sol[0] = [w1[0], u1[0]];
        out.zero_extra = [w0[0], u0[0]];
        for i in 1..n {
            let (e, p) = basis(grid, i);
            out.comp[i] = [a[i], w0[i] * e[0] + w1[i] * e[1]];
            out.sol[i] = [w0[i] * p[0] + w1[i] * p[1], u0[i] * p[0] + u1[i] * p[1]];
        }
        out
    }

    fn into_state(self, grid: &Arc<Grid>, template: &EnsState) -> EnsState {
        let n = grid.len();
        let mut a = vec![C64::default(); n];
        let mut w = vec![vec![C64::default(); n]; 2];
        let mut u = vec![vec![C64::default(); n]; 2];
        a[0] = self.comp[0][0];
        w[0][0] = self.zero_extra[0];
        u[0][0] = self.zero_extra[1];
        w[1][0] = self.sol[0][0];
        u[1][0] = self.sol[0][1];
        for i in 1..n {
            let (e, p) = basis(grid, i);
            let [ai, q] = self.comp[i];
            let [pw, v] = self.sol[i];
            a[i] = ai;
            for m in 0..2 {
                w[m][i] = q * e[m] + pw * p[m];
                u[m][i] = v * p[m];
            }
        }
        let field = |c| SpectralField::from_coefficients(grid, c, true).expect("grid-sized");
        let mut state = EnsState {
            a: field(vec![a]),
            w: field(w),
            u: field(u),
            epsilon: template.epsilon,
            mu: template.mu,
        };
        state.normalize();
        state
    }

    fn apply<'a, F>(&self, ops: &'a EnsOps, pick: F) -> Self
    where
        F: Fn(&'a BlockOps) -> &'a Mat2,
    {
        let comp = self.comp.iter().zip(&ops.compressible).map(|(v, b)| mat_vec(pick(b), *v)).collect();
        let sol = self.sol.iter().zip(&ops.solenoidal).map(|(v, b)| mat_vec(pick(b), *v)).collect();
        let zero_extra = mat_vec(pick(&ops.solenoidal[0]), self.zero_extra);
        Self { comp, sol, zero_extra }
    }

    fn axpy(&mut self, s: C64, other: &Self) {
        for (x, y) in self.comp.iter_mut().zip(&other.comp) {
            x[0] += s * y[0];
            x[1] += s * y[1];
        }
        for (x, y) in self.sol.iter_mut().zip(&other.sol) {
            x[0] += s * y[0];
            x[1] += s * y[1];
        }
        self.zero_extra[0] += s * other.zero_extra[0];
        self.zero_extra[1] += s * other.zero_extra[1];
    }
}

impl Dynamics for EnsStepper {
    type State = EnsState;

    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn step(&mut self, state: &EnsState, h: f64) -> Result<EnsState> {
        let ops = self.ops(h);
        let hc = C64::new(h, 0.0);
        let y = EnsModal::from_fields(&self.grid, &state.a, &state.w, &state.u);
        let n0 = self.nonlinear_modal(state)?;
        let mut stage = y.apply(&ops, |b| &b.exp);
        stage.axpy(hc, &n0.apply(&ops, |b| &b.phi1));
        if !self.nonlinear {
            return Ok(stage.into_state(&self.grid, state));
        }
        let stage_state = stage.clone().into_state(&self.grid, state);
        let n1 = self.nonlinear_modal(&stage_state)?;
        let mut diff = n1;
        diff.axpy(C64::new(-1.0, 0.0), &n0);
        let mut next = stage;
        next.axpy(hc, &diff.apply(&ops, |b| &b.phi2));
        let out = next.into_state(&self.grid, state);
        check_density(&out.a)?;
        Ok(out)
    }

    fn transport_speed(&self, state: &EnsState) -> f64 {
        (state.w.sup_norm() / self.epsilon).max(state.u.sup_norm())
    }
}

/// Real `φ₁(z)`, `φ₂(z)`.
pub fn phi12_real(z: f64) -> (f64, f64) {
    if z.abs() < 0.5 {
        let (mut t1, mut t2) = (1.0, 0.5);
        let (mut s1, mut s2) = (t1, t2);
        for j in 1..20 {
            t1 *= z / (j + 1) as f64;
            t2 *= z / (j + 2) as f64;
            s1 += t1;
            s2 += t2;
        }
        (s1, s2)
    } else {
        let p1 = z.exp_m1() / z;
        (p1, (p1 - 1.0) / z)
    }
}

#[derive(Clone, Copy)]
struct ScalarOps {
    exp: f64,
    phi1: f64,
    phi2: f64,
}

impl ScalarOps {
    fn new(rate: f64, h: f64) -> Self {
        let (phi1, phi2) = phi12_real(-rate * h);
        Self { exp: (-rate * h).exp(), phi1, phi2 }
    }
}

struct KsnsOps {
    density: Vec<ScalarOps>,
    velocity: Vec<ScalarOps>,
}

/// Exponential integrator for [`KsnsState`].
pub struct KsnsStepper {
    grid: Arc<Grid>,
    mu: f64,
    nonlinear: bool,
    cache: HashMap<u64, Arc<KsnsOps>>,
}

impl KsnsStepper {
    pub fn new(grid: &Arc<Grid>, mu: f64) -> Self {
        Self { grid: Arc::clone(grid), mu, nonlinear: true, cache: HashMap::new() }
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    fn ops(&mut self, h: f64) -> Arc<KsnsOps> {
        if let Some(ops) = self.cache.get(&h.to_bits()) {
            return Arc::clone(ops);
        }
        let grid = &self.grid;
        let density = (0..grid.len()).map(|i| ScalarOps::new(grid.xi_norm_sq(i), h)).collect();
        let velocity = (0..grid.len()).map(|i| ScalarOps::new(self.mu * grid.xi_norm_sq(i), h)).collect();
        let ops = Arc::new(KsnsOps { density, velocity });
        self.cache.insert(h.to_bits(), Arc::clone(&ops));
        ops
    }
}

fn scale_modes(f: &SpectralField, ops: &[ScalarOps], pick: impl Fn(&ScalarOps) -> f64) -> SpectralField {
    f.map_modes(|i, z| z * pick(&ops[i]))
}

impl Dynamics for KsnsStepper {
    type State = KsnsState;

    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn step(&mut self, state: &KsnsState, h: f64) -> Result<KsnsState> {
        let ops = self.ops(h);
        let lin = |s: &KsnsState| KsnsState {
            a: scale_modes(&s.a, &ops.density, |o| o.exp),
            u: scale_modes(&s.u, &ops.velocity, |o| o.exp),
            mu: s.mu,
        };
        let mut stage = lin(state);
        if !self.nonlinear {
            stage.normalize();
            return Ok(stage);
        }
        let n0 = ksns_nonlinear(state);
        stage.a.axpy(h, &scale_modes(&n0.a, &ops.density, |o| o.phi1));
        stage.u.axpy(h, &scale_modes(&n0.u, &ops.velocity, |o| o.phi1));
        stage.normalize();
        let n1 = ksns_nonlinear(&stage);
        let mut next = stage;
        next.a.axpy(h, &scale_modes(&n1.a.sub(&n0.a), &ops.density, |o| o.phi2));
        next.u.axpy(h, &scale_modes(&n1.u.sub(&n0.u), &ops.velocity, |o| o.phi2));
        next.normalize();
        Ok(next)
    }

    fn transport_speed(&self, state: &KsnsState) -> f64 {
        state.u.sup_norm()
    }
}

/// Relaxation system and limit system advanced on a common time grid.
pub struct PairedStepper {
    pub ens: EnsStepper,
    pub ksns: KsnsStepper,
}

impl Dynamics for PairedStepper {
    type State = (EnsState, KsnsState);

    fn grid(&self) -> &Arc<Grid> {
        self.ens.grid()
    }

    fn step(&mut self, state: &Self::State, h: f64) -> Result<Self::State> {
        Ok((self.ens.step(&state.0, h)?, self.ksns.step(&state.1, h)?))
    }

    fn transport_speed(&self, state: &Self::State) -> f64 {
        self.ens.transport_speed(&state.0).max(self.ksns.transport_speed(&state.1))
    }
}

/// Advances `state` by `h`, halving the step while the CFL bound
/// `h · speed ≤ cfl_safety · Δx` fails. Returns the new state and the
/// number of accepted sub-steps.
pub fn step_with_cfl<D: Dynamics>(
    dynamics: &mut D,
    state: &D::State,
    h: f64,
    cfl_safety: f64,
) -> Result<(D::State, usize)> {
    let dx = dynamics.grid().spacing();
    let mut current = state.clone();
    let mut remaining = h;
    let mut accepted = 0;
    let tol = 1e-14 * h;
    while remaining > tol {
        let speed = dynamics.transport_speed(&current);
        let mut sub = remaining;
        let mut halvings = 0;
        while sub * speed > cfl_safety * dx {
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::CflViolation { halvings: MAX_HALVINGS, dt: sub });
            }
            sub = h / f64::from(1u32 << halvings.min(31));
            sub = sub.min(remaining);
        }
        current = dynamics.step(&current, sub)?;
        remaining -= sub;
        accepted += 1;
    }
    Ok((current, accepted))
}

/// Steps through `cfg.schedule()`, calling `observer(t, state)` at `t = 0`
/// and after every macro step. Returns the final state and the number of
/// accepted steps.
pub fn drive<D, F>(dynamics: &mut D, initial: D::State, cfg: &StepperConfig, mut observer: F) -> Result<(D::State, usize)>
where
    D: Dynamics,
    F: FnMut(f64, &D::State) -> Result<()>,
{
    cfg.validate()?;
    let mut state = initial;
    let mut t = 0.0;
    let mut accepted = 0;
    observer(t, &state)?;
    for h in cfg.schedule() {
        let (next, n) = step_with_cfl(dynamics, &state, h, cfg.cfl_safety)?;
        state = next;
        accepted += n;
        t += h;
        observer(t, &state)?;
    }
    Ok((state, accepted))
}

#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub diagnostics: Vec<DiagnosticsSample>,
    pub accepted_steps: usize,
    /// Set when the run aborted; the trajectory then holds the snapshots emitted so far.
    pub failure: Option<String>,
}

impl<S> Trajectory<S> {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Integrates to `cfg.t_end`, emitting a snapshot every `1/output_stride`
/// time units (and at the final time). `hook` runs on every emitted snapshot.
pub fn integrate<D, H>(dynamics: &mut D, initial: D::State, cfg: &StepperConfig, mut hook: H) -> Trajectory<D::State>
where
    D: Dynamics,
    H: FnMut(f64, &D::State) -> Option<DiagnosticsSample>,
{
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        diagnostics: Vec::new(),
        accepted_steps: 0,
        failure: None,
    };
    let interval = 1.0 / cfg.output_stride;
    let mut next_emit = 0.0;
    let t_end = cfg.t_end;
    let tol = 1e-9 * cfg.dt;
    let result = drive(dynamics, initial, cfg, |t, s| {
        let last = (t - t_end).abs() <= tol;
        if t >= next_emit - tol || last {
            if traj.times.last().map_or(true, |&tl| t > tl + tol) {
                traj.times.push(t);
                traj.states.push(s.clone());
                if let Some(d) = hook(t, s) {
                    traj.diagnostics.push(d);
                }
            }
            while next_emit <= t + tol {
                next_emit += interval;
            }
        }
        Ok(())
    });
    match result {
        Ok((_, n)) => traj.accepted_steps = n,
        Err(e) => traj.failure = Some(e.to_string()),
    }
    traj
}

/// Single exponential step of the relaxation system.
pub fn step_ens(stepper: &mut EnsStepper, state: &EnsState, cfg: &StepperConfig) -> Result<EnsState> {
    Ok(step_with_cfl(stepper, state, cfg.dt, cfg.cfl_safety)?.0)
}

/// Single exponential step of the limit system.
pub fn step_ksns(stepper: &mut KsnsStepper, state: &KsnsState, cfg: &StepperConfig) -> Result<KsnsState> {
    Ok(step_with_cfl(stepper, state, cfg.dt, cfg.cfl_safety)?.0)
}

/// Tendency of a state under the exact linear part, used by tests to
/// cross-check the modal decomposition against the field operators.
pub fn ens_linear_modal(stepper: &EnsStepper, state: &EnsState) -> EnsTendency {
    let grid = &stepper.grid;
    let y = EnsModal::from_fields(grid, &state.a, &state.w, &state.u);
    let mut out = EnsModal::zeros(grid.len());
    for i in 0..grid.len() {
        if !grid.is_dealiased_mode(i) {
            continue;
        }
        let p = SymbolPoint::new(grid.xi_norm(i), stepper.epsilon, stepper.mu, Grid::DIM);
        let gc = -spectrum::b1_matrix(&p);
        let gs = -spectrum::b2_matrix(&p);
        out.comp[i] = mat_vec(&gc, y.comp[i]);
        out.sol[i] = mat_vec(&gs, y.sol[i]);
        if i == 0 {
            out.zero_extra = mat_vec(&gs, y.zero_extra);
        }
    }
    let s = out.into_state(grid, state);
    EnsTendency { a: s.a, w: s.w, u: s.u }
}
