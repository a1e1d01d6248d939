//! Economic primitives shared by all three solvers: parameters, occupation
//! partitions, wage schedules, firm profit functions, the no-arbitrage audit
//! and the output/income accounting identity.

use crate::distributions::KnowledgeDistribution;
use crate::numerics::{integrate_adaptive, GridFunction, NumericsError};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Certification tolerance: residuals and deviation profits must stay below
/// this for an equilibrium to be accepted. About 10x the solve precision, so
/// model errors separate cleanly from float noise.
pub const CERT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("span of control diverges as z -> 1 (z = {0})")]
    DivergentSpan(f64),
    #[error("firm precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("accounting identity violated: output {output}, labor {labor}, capital {capital}")]
    IdentityViolated {
        output: f64,
        labor: f64,
        capital: f64,
    },
    #[error("invalid economy parameters: {0}")]
    InvalidParams(String),
    #[error("invalid occupation partition: {0}")]
    InvalidPartition(String),
    #[error("invalid wage schedule: {0}")]
    InvalidWageSchedule(String),
    #[error("invalid compute allocation: {0}")]
    InvalidAllocation(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Errors shared by the three equilibrium solvers.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("solver failed to converge: {0}")]
    NoConvergence(String),
    #[error("no-arbitrage audit failed: max deviation profit {max_profit:.3e} by {argmax:?}")]
    AuditFailed { max_profit: f64, argmax: FirmKind },
    #[error("compute is not abundant relative to human time for these parameters")]
    AbundanceViolated,
    #[error("no occupational configuration certified; best residual per configuration: {0:?}")]
    NoConfigCertified(Vec<(String, f64)>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Numerical settings carried with every solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Fixed RK4 steps for the matching ODE.
    pub ode_steps: usize,
    /// Tolerance for bracketed root finding.
    pub root_tol: f64,
    /// Absolute tolerance for adaptive quadrature.
    pub quad_tol: f64,
    /// Grid points per knowledge argument in the no-arbitrage audit.
    pub audit_grid: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            ode_steps: 4096,
            root_tol: 1e-12,
            quad_tol: 1e-10,
            audit_grid: 200,
        }
    }
}

impl SolverSettings {
    fn validate(&self) -> Result<(), ModelError> {
        if self.ode_steps < 16 {
            return Err(ModelError::InvalidParams(
                "ode_steps must be at least 16".into(),
            ));
        }
        if !(self.root_tol > 0.0 && self.quad_tol > 0.0) {
            return Err(ModelError::InvalidParams(
                "tolerances must be positive".into(),
            ));
        }
        if self.audit_grid < 2 {
            return Err(ModelError::InvalidParams(
                "audit_grid must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

/// Primitives of the economy: the knowledge distribution, the helping cost
/// `h`, the AI knowledge level and the compute stock.
#[derive(Debug, Clone, PartialEq)]
pub struct EconomyParams {
    dist: KnowledgeDistribution,
    h: f64,
    z_ai: f64,
    mu: f64,
    settings: SolverSettings,
}

const PARAM_MARGIN: f64 = 1e-6;

impl EconomyParams {
    pub fn new(
        dist: KnowledgeDistribution,
        h: f64,
        z_ai: f64,
        mu: f64,
    ) -> Result<Self, ModelError> {
        if !(h > PARAM_MARGIN && h < 1.0 - PARAM_MARGIN) {
            return Err(ModelError::InvalidParams(format!(
                "helping cost h = {h} out of (0, 1)"
            )));
        }
        if !(0.0..=1.0 - PARAM_MARGIN).contains(&z_ai) {
            return Err(ModelError::InvalidParams(format!(
                "z_ai = {z_ai} out of [0, 1)"
            )));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(ModelError::InvalidParams(format!(
                "compute stock mu = {mu} negative"
            )));
        }
        Ok(Self {
            dist,
            h,
            z_ai,
            mu,
            settings: SolverSettings::default(),
        })
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Result<Self, ModelError> {
        settings.validate()?;
        self.settings = settings;
        Ok(self)
    }

    pub fn dist(&self) -> &KnowledgeDistribution {
        &self.dist
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn z_ai(&self) -> f64 {
        self.z_ai
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    /// Span of control n(z) at this economy's helping cost.
    pub fn span_at(&self, z: f64) -> Result<f64, ModelError> {
        span(self.h, z)
    }
}

/// Span of control: a solver of knowledge `z` supports `n(z) = 1/(h (1 - z))`
/// workers, the number that exactly exhausts one unit of solver time.
pub fn span(h: f64, z: f64) -> Result<f64, ModelError> {
    if z >= 1.0 - 1e-9 {
        return Err(ModelError::DivergentSpan(z));
    }
    Ok(1.0 / (h * (1.0 - z)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    PreAi,
    Autonomous,
    NonAutonomous,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::PreAi => write!(f, "pre"),
            Regime::Autonomous => write!(f, "autonomous"),
            Regime::NonAutonomous => write!(f, "non_autonomous"),
        }
    }
}

/// Occupations along the knowledge line, in their stratified order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Occupation {
    /// Worker whose exceptions are handled by an AI solver (tA firms).
    AiAssistedWorker,
    /// Worker whose exceptions are handled by a human solver (nA firms).
    HumanAssistedWorker,
    /// Single-layer independent producer.
    IndependentProducer,
    /// Solver assisting human workers (nA firms).
    SolverOfHumans,
    /// Solver supervising AI workers (bA firms).
    SolverOfAi,
}

impl Occupation {
    /// Short label used in CSV output and summaries.
    pub fn label(self) -> &'static str {
        match self {
            Occupation::AiAssistedWorker => "Wa",
            Occupation::HumanAssistedWorker => "Wp",
            Occupation::IndependentProducer => "I",
            Occupation::SolverOfHumans => "Sp",
            Occupation::SolverOfAi => "Sa",
        }
    }

    pub fn is_worker(self) -> bool {
        matches!(
            self,
            Occupation::AiAssistedWorker | Occupation::HumanAssistedWorker
        )
    }

    pub fn is_solver(self) -> bool {
        matches!(self, Occupation::SolverOfHumans | Occupation::SolverOfAi)
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// One labeled interval of the occupation partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionSegment {
    pub lo: f64,
    pub hi: f64,
    pub occupation: Occupation,
}

/// Ordered intervals tiling `[0, 1]`, labeled by occupation. Zero-measure
/// intervals are dropped; the label order along the line must follow the
/// stratification Wa, Wp, I, Sp, Sa.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationPartition {
    segments: Vec<PartitionSegment>,
}

const TILE_TOL: f64 = 1e-9;

impl OccupationPartition {
    /// Validates tiling, stratification order and — for the autonomous regime —
    /// that no worker is more knowledgeable than AI and no solver less.
    pub fn new(
        segments: Vec<PartitionSegment>,
        regime: Regime,
        z_ai: f64,
    ) -> Result<Self, ModelError> {
        if segments.is_empty() {
            return Err(ModelError::InvalidPartition("no segments".into()));
        }
        if (segments[0].lo - 0.0).abs() > TILE_TOL
            || (segments.last().unwrap().hi - 1.0).abs() > TILE_TOL
        {
            return Err(ModelError::InvalidPartition(
                "segments must span [0, 1]".into(),
            ));
        }
        for w in segments.windows(2) {
            if (w[0].hi - w[1].lo).abs() > TILE_TOL {
                return Err(ModelError::InvalidPartition(format!(
                    "gap or overlap between {} and {}",
                    w[0].occupation, w[1].occupation
                )));
            }
            if w[1].occupation <= w[0].occupation {
                return Err(ModelError::InvalidPartition(format!(
                    "label order {} before {} breaks stratification",
                    w[0].occupation, w[1].occupation
                )));
            }
        }
        for s in &segments {
            if s.hi <= s.lo {
                return Err(ModelError::InvalidPartition(format!(
                    "zero-measure segment {} at {}",
                    s.occupation, s.lo
                )));
            }
        }
        if regime == Regime::Autonomous {
            let p = Self { segments };
            if let Some(sup_w) = p.sup_workers() {
                if sup_w > z_ai + TILE_TOL {
                    return Err(ModelError::InvalidPartition(format!(
                        "worker at {sup_w} more knowledgeable than AI at {z_ai}"
                    )));
                }
            }
            if let Some(inf_s) = p.inf_solvers() {
                if inf_s < z_ai - TILE_TOL {
                    return Err(ModelError::InvalidPartition(format!(
                        "solver at {inf_s} less knowledgeable than AI at {z_ai}"
                    )));
                }
            }
            return Ok(p);
        }
        if regime == Regime::NonAutonomous {
            // AI-assisted workers must lie below the AI knowledge level;
            // human-assisted workers may sit above it (the AI is only a co-pilot)
            if let Some((_, hi)) = Self::interval_of(&segments, Occupation::AiAssistedWorker) {
                if hi > z_ai + TILE_TOL {
                    return Err(ModelError::InvalidPartition(format!(
                        "AI-assisted worker at {hi} above z_ai = {z_ai}"
                    )));
                }
            }
            if Self::interval_of(&segments, Occupation::SolverOfAi).is_some() {
                return Err(ModelError::InvalidPartition(
                    "bottom-automated firms cannot emerge with non-autonomous AI".into(),
                ));
            }
        }
        Ok(Self { segments })
    }

    fn interval_of(segments: &[PartitionSegment], occ: Occupation) -> Option<(f64, f64)> {
        segments
            .iter()
            .find(|s| s.occupation == occ)
            .map(|s| (s.lo, s.hi))
    }

    pub fn segments(&self) -> &[PartitionSegment] {
        &self.segments
    }

    /// The interval carrying `occ`, if that occupation is populated.
    pub fn interval(&self, occ: Occupation) -> Option<(f64, f64)> {
        Self::interval_of(&self.segments, occ)
    }

    /// The occupation at `z`; breakpoints resolve to the lower segment.
    pub fn label_at(&self, z: f64) -> Occupation {
        let z = z.clamp(0.0, 1.0);
        for s in &self.segments {
            if z <= s.hi {
                return s.occupation;
            }
        }
        self.segments.last().unwrap().occupation
    }

    /// Knowledge of the most knowledgeable human worker (sup of Wa ∪ Wp).
    pub fn sup_workers(&self) -> Option<f64> {
        self.segments
            .iter()
            .filter(|s| s.occupation.is_worker())
            .map(|s| s.hi)
            .fold(None, |acc: Option<f64>, hi| {
                Some(acc.map_or(hi, |v| v.max(hi)))
            })
    }

    /// Knowledge of the least knowledgeable human solver (inf of Sp ∪ Sa).
    pub fn inf_solvers(&self) -> Option<f64> {
        self.segments
            .iter()
            .filter(|s| s.occupation.is_solver())
            .map(|s| s.lo)
            .fold(None, |acc: Option<f64>, lo| {
                Some(acc.map_or(lo, |v| v.min(lo)))
            })
    }

    /// Interval length carrying `occ` (zero if unpopulated).
    pub fn measure(&self, occ: Occupation) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.occupation == occ)
            .map(|s| s.hi - s.lo)
            .sum()
    }

    /// Total interval length of the worker occupations.
    pub fn worker_measure(&self) -> f64 {
        self.measure(Occupation::AiAssistedWorker) + self.measure(Occupation::HumanAssistedWorker)
    }

    /// Total interval length of the solver occupations.
    pub fn solver_measure(&self) -> f64 {
        self.measure(Occupation::SolverOfHumans) + self.measure(Occupation::SolverOfAi)
    }
}

/// Functional form of one wage segment.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentForm {
    /// `w(z) = intercept + slope * z`; the closed forms on Wa and Sa.
    Linear { intercept: f64, slope: f64 },
    /// `w(z) = z` on the independent producer interval.
    IndependentProducer,
    /// Worker wage through the matching and the solver wage:
    /// `w(z) = m(z) - h (1 - z) (C + ∫ n(e(u)) du up to m(z))`.
    WorkerComposite {
        matching: GridFunction,
        /// ∫ n(e(u)) du from the start of the solver interval, tabulated
        /// against worker knowledge.
        wage_integral: GridFunction,
        solver_constant: f64,
        helping_cost: f64,
    },
    /// Solver wage `w(s) = C + ∫ n(e(u)) du` with the integral tabulated
    /// against solver knowledge.
    SolverIntegral {
        constant: f64,
        integral: GridFunction,
    },
}

/// One wage segment over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WageSegment {
    pub lo: f64,
    pub hi: f64,
    pub form: SegmentForm,
}

impl WageSegment {
    fn eval(&self, z: f64) -> f64 {
        match &self.form {
            SegmentForm::Linear { intercept, slope } => intercept + slope * z,
            SegmentForm::IndependentProducer => z,
            SegmentForm::WorkerComposite {
                matching,
                wage_integral,
                solver_constant,
                helping_cost,
            } => {
                let m = matching.eval_clamped(z);
                let solver_wage = solver_constant + wage_integral.eval_clamped(z);
                m - helping_cost * (1.0 - z) * solver_wage
            }
            SegmentForm::SolverIntegral { constant, integral } => {
                constant + integral.eval_clamped(z)
            }
        }
    }
}

/// The equilibrium wage schedule: ordered segments covering `[0, 1]`,
/// continuous at breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct WageSchedule {
    segments: Vec<WageSegment>,
}

impl WageSchedule {
    pub fn new(segments: Vec<WageSegment>, continuity_tol: f64) -> Result<Self, ModelError> {
        if segments.is_empty() {
            return Err(ModelError::InvalidWageSchedule("no segments".into()));
        }
        if (segments[0].lo).abs() > TILE_TOL || (segments.last().unwrap().hi - 1.0).abs() > TILE_TOL
        {
            return Err(ModelError::InvalidWageSchedule(
                "segments must span [0, 1]".into(),
            ));
        }
        for w in segments.windows(2) {
            if (w[0].hi - w[1].lo).abs() > TILE_TOL {
                return Err(ModelError::InvalidWageSchedule(
                    "gap between segments".into(),
                ));
            }
            let left = w[0].eval(w[0].hi);
            let right = w[1].eval(w[1].lo);
            if (left - right).abs() > continuity_tol {
                return Err(ModelError::InvalidWageSchedule(format!(
                    "discontinuity {:.3e} at breakpoint {}",
                    (left - right).abs(),
                    w[0].hi
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[WageSegment] {
        &self.segments
    }

    /// Wage at `z`. Shared breakpoints agree across segments within the
    /// construction tolerance; the lower segment answers.
    pub fn wage_at(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, 1.0);
        for s in &self.segments {
            if z <= s.hi {
                return s.eval(z);
            }
        }
        self.segments.last().unwrap().eval(z)
    }
}

/// Split of the compute stock across AI independent producers, AI workers and
/// AI solvers. Under non-autonomous AI the `mu_i` slot holds idle compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeAllocation {
    pub mu_i: f64,
    pub mu_w: f64,
    pub mu_s: f64,
}

impl ComputeAllocation {
    pub fn new(mu_i: f64, mu_w: f64, mu_s: f64, mu: f64) -> Result<Self, ModelError> {
        let sum = mu_i + mu_w + mu_s;
        if (sum - mu).abs() > 1e-9 {
            return Err(ModelError::InvalidAllocation(format!(
                "allocation sums to {sum}, stock is {mu}"
            )));
        }
        for (name, v) in [("mu_i", mu_i), ("mu_w", mu_w), ("mu_s", mu_s)] {
            if v < -1e-12 {
                return Err(ModelError::InvalidAllocation(format!(
                    "{name} = {v} negative"
                )));
            }
        }
        Ok(Self { mu_i, mu_w, mu_s })
    }

    pub fn zero() -> Self {
        Self {
            mu_i: 0.0,
            mu_w: 0.0,
            mu_s: 0.0,
        }
    }
}

/// A solved competitive equilibrium.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub params: EconomyParams,
    pub regime: Regime,
    pub partition: OccupationPartition,
    /// Matching function on Wp; absent when Wp is empty.
    pub matching: Option<GridFunction>,
    pub wages: WageSchedule,
    /// Rental rate of compute: `z_ai` under autonomous AI, zero otherwise.
    pub r: f64,
    pub compute: ComputeAllocation,
    /// Which occupational configuration certified, plus flags such as
    /// "knife-edge" or "idle".
    pub config_tag: String,
    /// Named solve residuals, all below [`CERT_TOL`] for a certified result.
    pub residuals: BTreeMap<String, f64>,
}

impl Equilibrium {
    pub fn wage_at(&self, z: f64) -> f64 {
        self.wages.wage_at(z)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Firm structures whose deviation profits the audit evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FirmKind {
    /// Single-layer firm with a human independent producer.
    SingleHuman { z: f64 },
    /// Single-layer firm run by one AI agent.
    SingleAi,
    /// Top-automated firm: an AI solver assisting human workers `z <= z_ai`.
    TopAutomated { worker: f64 },
    /// Bottom-automated firm: a human solver `s >= z_ai` supervising AI workers.
    BottomAutomated { solver: f64 },
    /// Two-layer human firm with workers `z` and a solver `s >= z`.
    TwoLayerHuman { worker: f64, solver: f64 },
}

/// Profit of one candidate firm at the given wage schedule and rental rate.
pub fn firm_profit(
    params: &EconomyParams,
    wages: &WageSchedule,
    r: f64,
    kind: FirmKind,
) -> Result<f64, ModelError> {
    let in_unit = |v: f64| (0.0..=1.0).contains(&v);
    match kind {
        FirmKind::SingleHuman { z } => {
            if !in_unit(z) {
                return Err(ModelError::PreconditionViolated(format!("z = {z}")));
            }
            Ok(z - wages.wage_at(z))
        }
        FirmKind::SingleAi => Ok(params.z_ai() - r),
        FirmKind::TopAutomated { worker } => {
            if !in_unit(worker) || worker > params.z_ai() + 1e-12 {
                return Err(ModelError::PreconditionViolated(format!(
                    "tA worker {worker} above z_ai {}",
                    params.z_ai()
                )));
            }
            let n = span(params.h(), worker)?;
            Ok(n * (params.z_ai() - wages.wage_at(worker)) - r)
        }
        FirmKind::BottomAutomated { solver } => {
            if !in_unit(solver) || solver < params.z_ai() - 1e-12 {
                return Err(ModelError::PreconditionViolated(format!(
                    "bA solver {solver} below z_ai {}",
                    params.z_ai()
                )));
            }
            let n = span(params.h(), params.z_ai())?;
            Ok(n * (solver - r) - wages.wage_at(solver))
        }
        FirmKind::TwoLayerHuman { worker, solver } => {
            if !in_unit(worker) || !in_unit(solver) || worker > solver {
                return Err(ModelError::PreconditionViolated(format!(
                    "nA pair ({worker}, {solver})"
                )));
            }
            let n = span(params.h(), worker)?;
            Ok(n * (solver - wages.wage_at(worker)) - wages.wage_at(solver))
        }
    }
}

/// Outcome of the no-arbitrage audit: the most profitable deviation found on
/// the firm grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditReport {
    pub max_profit: f64,
    pub argmax: FirmKind,
}

impl AuditReport {
    pub fn certified(&self) -> bool {
        self.max_profit <= CERT_TOL
    }
}

/// Grid search over every firm kind available in the regime. At a competitive
/// equilibrium no firm earns more than zero, so the report certifies the
/// candidate iff `max_profit <= CERT_TOL`.
///
/// Worker arguments run over `[0, 1)` (the span of control diverges at 1) and
/// solver arguments over `[0, 1]`; two-layer firms use the full `grid_n x
/// grid_n` grid restricted to `worker <= solver`.
pub fn audit_no_arbitrage(eq: &Equilibrium, grid_n: usize) -> AuditReport {
    let params = &eq.params;
    let wages = &eq.wages;
    let z_ai = params.z_ai();
    let mut best = AuditReport {
        max_profit: f64::NEG_INFINITY,
        argmax: FirmKind::SingleHuman { z: 0.0 },
    };
    let mut consider = |profit: f64, kind: FirmKind| {
        if profit > best.max_profit {
            best = AuditReport {
                max_profit: profit,
                argmax: kind,
            };
        }
    };
    // clamp away one-ulp overshoots of lo + (hi - lo); worker grids also stay
    // clear of z = 1 where the span of control diverges
    let solver_grid = |i: usize, lo: f64, hi: f64| {
        (lo + (hi - lo) * i as f64 / (grid_n - 1) as f64).clamp(lo, hi)
    };
    let worker_grid = |i: usize, lo: f64, hi: f64| {
        (lo + (hi - lo) * i as f64 / grid_n as f64).clamp(lo, hi.min(1.0 - 2e-9))
    };

    for i in 0..grid_n {
        let z = solver_grid(i, 0.0, 1.0);
        let profit = firm_profit(params, wages, eq.r, FirmKind::SingleHuman { z }).unwrap();
        consider(profit, FirmKind::SingleHuman { z });
    }
    for i in 0..grid_n {
        let worker = worker_grid(i, 0.0, 1.0);
        for j in 0..grid_n {
            let solver = solver_grid(j, 0.0, 1.0);
            if solver < worker {
                continue;
            }
            let kind = FirmKind::TwoLayerHuman { worker, solver };
            consider(firm_profit(params, wages, eq.r, kind).unwrap(), kind);
        }
    }
    match eq.regime {
        Regime::PreAi => {}
        Regime::Autonomous => {
            consider(
                firm_profit(params, wages, eq.r, FirmKind::SingleAi).unwrap(),
                FirmKind::SingleAi,
            );
            for i in 0..grid_n {
                let worker = worker_grid(i, 0.0, z_ai.min(1.0 - 1e-9));
                let kind = FirmKind::TopAutomated { worker };
                consider(firm_profit(params, wages, eq.r, kind).unwrap(), kind);
            }
            for i in 0..grid_n {
                let solver = solver_grid(i, z_ai, 1.0);
                let kind = FirmKind::BottomAutomated { solver };
                consider(firm_profit(params, wages, eq.r, kind).unwrap(), kind);
            }
        }
        Regime::NonAutonomous => {
            for i in 0..grid_n {
                let worker = worker_grid(i, 0.0, z_ai.min(1.0 - 1e-9));
                let kind = FirmKind::TopAutomated { worker };
                consider(firm_profit(params, wages, eq.r, kind).unwrap(), kind);
            }
        }
    }
    best
}

/// Output and income totals of a certified equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accounts {
    pub output: f64,
    pub labor_income: f64,
    pub capital_income: f64,
}

/// Total output by firm type, total labor income and total capital income.
/// Zero profits make output equal labor plus capital income; a violation
/// beyond `1e-8` relative signals a solver bug and is returned as an error.
pub fn accounting(eq: &Equilibrium) -> Result<Accounts, ModelError> {
    let params = &eq.params;
    let dist = params.dist();
    let tol = params.settings().quad_tol;
    let g = |z: f64| dist.density_clamped(z);

    let mut output = 0.0;
    for seg in eq.partition.segments() {
        match seg.occupation {
            Occupation::HumanAssistedWorker => {
                let m = eq
                    .matching
                    .as_ref()
                    .expect("human-assisted workers require a matching function");
                output += integrate_adaptive(|z| m.eval_clamped(z) * g(z), seg.lo, seg.hi, tol)?;
            }
            Occupation::AiAssistedWorker => {
                output += params.z_ai() * dist.mass_between(seg.lo, seg.hi).unwrap_or(0.0);
            }
            Occupation::IndependentProducer => {
                output += integrate_adaptive(|z| z * g(z), seg.lo, seg.hi, tol)?;
            }
            Occupation::SolverOfHumans => {} // counted through their workers
            Occupation::SolverOfAi => {
                let n_ai = span(params.h(), params.z_ai())?;
                output += n_ai * integrate_adaptive(|z| z * g(z), seg.lo, seg.hi, tol)?;
            }
        }
    }
    if eq.regime == Regime::Autonomous {
        // non-autonomous mu_i is idle compute and produces nothing
        output += params.z_ai() * eq.compute.mu_i;
    }

    let labor_income: f64 = eq
        .wages
        .segments()
        .iter()
        .map(|s| integrate_adaptive(|z| eq.wages.wage_at(z) * g(z), s.lo, s.hi, tol))
        .sum::<Result<f64, _>>()?;
    let capital_income = params.mu() * eq.r;

    let gap = (output - labor_income - capital_income).abs();
    if gap > 1e-8 * output.max(1e-3) {
        return Err(ModelError::IdentityViolated {
            output,
            labor: labor_income,
            capital: capital_income,
        });
    }
    Ok(Accounts {
        output,
        labor_income,
        capital_income,
    })
}
