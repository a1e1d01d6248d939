//! Comparative statics across equilibria: occupational displacement, match
//! quality and span-of-control changes, winners and losers, the bottom-winner
//! threshold, the autonomy tradeoff and Gini summaries.

use crate::autonomous::solve_autonomous;
use crate::distributions::KnowledgeDistribution;
use crate::model::{
    accounting, EconomyParams, Equilibrium, ModelError, Occupation, Regime, SolveError,
};
use crate::non_autonomous::solve_non_autonomous;
use crate::numerics::find_root_bracketed;
use crate::pre_ai::solve_pre_ai;
use thiserror::Error;

/// Wage differences smaller than this count as ties, so the winner sets stay
/// open as in their strict-inequality definition.
const WIN_TIE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("equilibria being compared were solved from different parameters")]
    ParamsMismatch,
    #[error("indicator never changes sign: {0}")]
    NoCrossing(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("model prediction failed numerically: {0}")]
    PredictionFailed(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Condensed view of one equilibrium used in comparison reports.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSummary {
    pub regime: Regime,
    pub config_tag: String,
    pub sup_workers: Option<f64>,
    pub inf_solvers: Option<f64>,
    pub r: f64,
    pub output: f64,
    pub labor_income: f64,
    pub capital_income: f64,
    pub gini: f64,
}

pub fn summarize(eq: &Equilibrium, grid_n: usize) -> Result<EquilibriumSummary, AnalysisError> {
    let accounts = accounting(eq)?;
    Ok(EquilibriumSummary {
        regime: eq.regime,
        config_tag: eq.config_tag.clone(),
        sup_workers: eq.partition.sup_workers(),
        inf_solvers: eq.partition.inf_solvers(),
        r: eq.r,
        output: accounts.output,
        labor_income: accounts.labor_income,
        capital_income: accounts.capital_income,
        gini: gini_of(eq, grid_n),
    })
}

/// How the worker and solver sets moved between two equilibria.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub workers_shrank: bool,
    pub solvers_grew: bool,
    pub sup_workers_pre: f64,
    pub sup_workers_post: f64,
    pub inf_solvers_pre: f64,
    pub inf_solvers_post: f64,
}

/// Full comparison of a pre-AI equilibrium against a post-AI one.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub pre: EquilibriumSummary,
    pub post: EquilibriumSummary,
    pub displacement: Displacement,
    /// Upper end of the bottom winner set `[0, z_b)`, when nonempty.
    pub z_b: Option<f64>,
    /// Lower end of the top winner set `(z_t, 1]`, when nonempty.
    pub z_t: Option<f64>,
    /// `w_post - w_pre` on the comparison grid.
    pub wage_delta: Vec<(f64, f64)>,
    /// Solver-knowledge change for humans who are workers in both equilibria.
    pub productivity_delta: Vec<(f64, f64)>,
    /// Span-of-control change for humans who are solvers in both equilibria.
    pub span_delta: Vec<(f64, f64)>,
    pub output_delta: f64,
    pub labor_income_delta: f64,
    pub gini_pre: f64,
    pub gini_post: f64,
    /// Whether the wage difference has at most two sign changes (winners at
    /// the extremes); reported as a diagnostic, never asserted.
    pub single_crossing_shape: bool,
}

/// Knowledge of the solver serving a worker at `z`, if `z` works.
fn solver_knowledge_of(eq: &Equilibrium, z: f64) -> Option<f64> {
    match eq.partition.label_at(z) {
        Occupation::AiAssistedWorker => Some(eq.params.z_ai()),
        Occupation::HumanAssistedWorker => eq.matching.as_ref().map(|m| m.eval_clamped(z)),
        _ => None,
    }
}

/// Span of control of a solver at `z`, if `z` solves.
fn span_of(eq: &Equilibrium, z: f64) -> Option<f64> {
    let h = eq.params.h();
    match eq.partition.label_at(z) {
        Occupation::SolverOfHumans => {
            let worker = eq.matching.as_ref()?.inverse_eval_clamped(z);
            Some(1.0 / (h * (1.0 - worker)))
        }
        Occupation::SolverOfAi => Some(1.0 / (h * (1.0 - eq.params.z_ai()))),
        _ => None,
    }
}

/// Compares a pre-AI equilibrium against a post-AI equilibrium solved from
/// the same parameters.
pub fn compare_pre_post(
    pre: &Equilibrium,
    post: &Equilibrium,
    grid_n: usize,
) -> Result<ComparisonReport, AnalysisError> {
    if pre.params != post.params {
        return Err(AnalysisError::ParamsMismatch);
    }
    let grid_n = grid_n.max(16);
    let z_ai = post.params.z_ai();
    let delta = |z: f64| post.wage_at(z) - pre.wage_at(z);

    let sup_w_pre = pre.partition.sup_workers().unwrap_or(0.0);
    let sup_w_post = post.partition.sup_workers().unwrap_or(0.0);
    let inf_s_pre = pre.partition.inf_solvers().unwrap_or(1.0);
    let inf_s_post = post.partition.inf_solvers().unwrap_or(1.0);
    let displacement = Displacement {
        workers_shrank: sup_w_post < sup_w_pre - WIN_TIE,
        solvers_grew: inf_s_post < inf_s_pre - WIN_TIE,
        sup_workers_pre: sup_w_pre,
        sup_workers_post: sup_w_post,
        inf_solvers_pre: inf_s_pre,
        inf_solvers_post: inf_s_post,
    };

    let z_b = scan_crossing_down(&delta, 0.0, z_ai, grid_n);
    let z_t = scan_crossing_up(&delta, z_ai, 1.0, grid_n);

    let grid = |i: usize| i as f64 / (grid_n - 1) as f64;
    let mut wage_delta = Vec::with_capacity(grid_n);
    let mut productivity_delta = Vec::new();
    let mut span_delta = Vec::new();
    let mut signs = Vec::new();
    for i in 0..grid_n {
        let z = grid(i);
        let d = delta(z);
        wage_delta.push((z, d));
        if d.abs() > WIN_TIE {
            signs.push(d > 0.0);
        }
        if let (Some(a), Some(b)) = (solver_knowledge_of(pre, z), solver_knowledge_of(post, z)) {
            productivity_delta.push((z, b - a));
        }
        if let (Some(a), Some(b)) = (span_of(pre, z), span_of(post, z)) {
            span_delta.push((z, b - a));
        }
    }
    let sign_changes = signs.windows(2).filter(|w| w[0] != w[1]).count();

    let pre_summary = summarize(pre, grid_n)?;
    let post_summary = summarize(post, grid_n)?;
    Ok(ComparisonReport {
        output_delta: post_summary.output - pre_summary.output,
        labor_income_delta: post_summary.labor_income - pre_summary.labor_income,
        gini_pre: pre_summary.gini,
        gini_post: post_summary.gini,
        pre: pre_summary,
        post: post_summary,
        displacement,
        z_b,
        z_t,
        wage_delta,
        productivity_delta,
        span_delta,
        single_crossing_shape: sign_changes <= 2,
    })
}

/// First point where a positive-at-`lo` difference turns nonpositive,
/// refined by bisection: the boundary of the bottom winner set.
fn scan_crossing_down<F: Fn(f64) -> f64>(delta: &F, lo: f64, hi: f64, n: usize) -> Option<f64> {
    if hi <= lo || delta(lo) <= WIN_TIE {
        return None;
    }
    let mut prev = lo;
    for i in 1..=n {
        let z = lo + (hi - lo) * i as f64 / n as f64;
        if delta(z) <= WIN_TIE {
            return Some(find_root_bracketed(|x| delta(x) - WIN_TIE, prev, z, 1e-9).unwrap_or(z));
        }
        prev = z;
    }
    Some(hi)
}

/// Last point where the difference turns positive scanning toward `hi`:
/// the boundary of the top winner set `(z_t, 1]`.
fn scan_crossing_up<F: Fn(f64) -> f64>(delta: &F, lo: f64, hi: f64, n: usize) -> Option<f64> {
    if hi <= lo || delta(hi) <= WIN_TIE {
        return None;
    }
    let mut upper = hi;
    for i in (0..n).rev() {
        let z = lo + (hi - lo) * i as f64 / n as f64;
        if delta(z) <= WIN_TIE {
            return Some(find_root_bracketed(|x| delta(x) - WIN_TIE, z, upper, 1e-9).unwrap_or(z));
        }
        upper = z;
    }
    Some(lo)
}

/// The AI knowledge threshold above which the least knowledgeable humans gain
/// from autonomous AI: bisection of the indicator `w*(0) > w(0)` over `z_ai`,
/// each evaluation a full autonomous solve.
pub fn find_zbar(template: &EconomyParams) -> Result<f64, AnalysisError> {
    let pre = solve_pre_ai(template)?;
    if pre
        .partition
        .interval(Occupation::IndependentProducer)
        .is_some()
    {
        return Err(AnalysisError::PreconditionViolated(
            "the bottom-winner threshold is defined for h below the regime threshold".into(),
        ));
    }
    let w0_pre = pre.wage_at(0.0);
    let sup_w_pre = pre.partition.sup_workers().unwrap_or(1.0);
    let with_z = |z_ai: f64| -> Result<EconomyParams, AnalysisError> {
        Ok(
            EconomyParams::new(template.dist().clone(), template.h(), z_ai, template.mu())?
                .with_settings(template.settings().clone())?,
        )
    };
    let indicator = |z_ai: f64| -> Result<f64, AnalysisError> {
        let eq = solve_autonomous(&with_z(z_ai)?)?;
        Ok(eq.wage_at(0.0) - w0_pre)
    };
    let mut lo = 0.02;
    let mut hi = 0.98;
    let f_lo = indicator(lo)?;
    let f_hi = indicator(hi)?;
    if f_lo >= 0.0 || f_hi <= 0.0 {
        return Err(AnalysisError::NoCrossing(format!(
            "bottom wage gain is {f_lo:.4} at z_ai = {lo} and {f_hi:.4} at z_ai = {hi}"
        )));
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if indicator(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zbar = 0.5 * (lo + hi);
    if !(zbar > 0.0 && zbar < sup_w_pre) {
        return Err(AnalysisError::PredictionFailed(format!(
            "threshold {zbar} should lie inside the pre-AI worker set (0, {sup_w_pre})"
        )));
    }
    Ok(zbar)
}

/// Side-by-side outcome of the two AI regimes against the pre-AI baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffReport {
    pub output_pre: f64,
    pub output_auto: f64,
    pub output_nonauto: f64,
    pub w0_pre: f64,
    pub w0_auto: f64,
    pub w0_nonauto: f64,
    pub w1_pre: f64,
    pub w1_auto: f64,
    pub w1_nonauto: f64,
    pub gini_pre: f64,
    pub gini_auto: f64,
    pub gini_nonauto: f64,
}

/// Solves all three regimes and tabulates the autonomy tradeoff. The model's
/// predictions — higher output under autonomy, the least knowledgeable best
/// off under non-autonomy, the most knowledgeable under autonomy — are
/// verified and a violation is an error.
pub fn autonomy_tradeoff(params: &EconomyParams) -> Result<TradeoffReport, AnalysisError> {
    let grid_n = 2001;
    let pre = solve_pre_ai(params)?;
    let auto = solve_autonomous(params)?;
    let nonauto = solve_non_autonomous(params)?;
    let report = TradeoffReport {
        output_pre: accounting(&pre)?.output,
        output_auto: accounting(&auto)?.output,
        output_nonauto: accounting(&nonauto)?.output,
        w0_pre: pre.wage_at(0.0),
        w0_auto: auto.wage_at(0.0),
        w0_nonauto: nonauto.wage_at(0.0),
        w1_pre: pre.wage_at(1.0),
        w1_auto: auto.wage_at(1.0),
        w1_nonauto: nonauto.wage_at(1.0),
        gini_pre: gini_of(&pre, grid_n),
        gini_auto: gini_of(&auto, grid_n),
        gini_nonauto: gini_of(&nonauto, grid_n),
    };
    if report.output_auto <= report.output_nonauto {
        return Err(AnalysisError::PredictionFailed(format!(
            "output under autonomy {} should exceed {}",
            report.output_auto, report.output_nonauto
        )));
    }
    if report.w0_nonauto < report.w0_pre.max(report.w0_auto) - WIN_TIE {
        return Err(AnalysisError::PredictionFailed(
            "the least knowledgeable should do best under non-autonomous AI".into(),
        ));
    }
    if report.w1_nonauto > report.w1_auto + WIN_TIE {
        return Err(AnalysisError::PredictionFailed(
            "the most knowledgeable should do best under autonomous AI".into(),
        ));
    }
    Ok(report)
}

/// Gini coefficient of labor income: the Lorenz curve of `w(z)` with
/// population weights `dG(z)`, trapezoid rule on `grid_n` cells. Wages are
/// nondecreasing in knowledge, so the knowledge order is the income order.
pub fn gini_of(eq: &Equilibrium, grid_n: usize) -> f64 {
    gini_of_wage(eq.params.dist(), |z| eq.wage_at(z), grid_n)
}

/// Gini of an arbitrary nondecreasing income schedule over the distribution.
pub fn gini_of_wage<F: Fn(f64) -> f64>(
    dist: &KnowledgeDistribution,
    wage: F,
    grid_n: usize,
) -> f64 {
    let cells = grid_n.max(16) - 1;
    let mut masses = Vec::with_capacity(cells);
    let mut incomes = Vec::with_capacity(cells);
    let mut total_income = 0.0;
    for k in 0..cells {
        let a = k as f64 / cells as f64;
        let b = (k + 1) as f64 / cells as f64;
        let mass = dist.cdf_clamped(b) - dist.cdf_clamped(a);
        let income = wage(0.5 * (a + b)) * mass;
        masses.push(mass);
        incomes.push(income);
        total_income += income;
    }
    if total_income <= 0.0 {
        return 0.0;
    }
    let mut gini = 1.0;
    let mut lorenz = 0.0;
    for k in 0..cells {
        let next = lorenz + incomes[k] / total_income;
        gini -= masses[k] * (lorenz + next);
        lorenz = next;
    }
    gini
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::KnowledgeDistribution;

    fn params(z_ai: f64) -> EconomyParams {
        EconomyParams::new(KnowledgeDistribution::uniform(), 0.5, z_ai, 10.0).unwrap()
    }

    #[test]
    fn gini_closed_forms() {
        let d = KnowledgeDistribution::uniform();
        assert!(gini_of_wage(&d, |_| 1.0, 2001).abs() < 1e-9);
        // uniform incomes w(z) = z have Gini exactly 1/3
        assert!((gini_of_wage(&d, |z| z, 2001) - 1.0 / 3.0).abs() < 1e-5);
        let a = gini_of_wage(&d, |z| 0.2 + z, 2001);
        let b = gini_of_wage(&d, |z| 2.0 * (0.2 + z), 2001);
        assert!((a - b).abs() < 1e-12, "Gini must be scale invariant");
    }

    #[test]
    fn basic_ai_displaces_into_solving() {
        let pre = solve_pre_ai(&params(0.425)).unwrap();
        let post = solve_autonomous(&params(0.425)).unwrap();
        let report = compare_pre_post(&pre, &post, 2001).unwrap();
        assert!(report.displacement.workers_shrank);
        assert!(report.displacement.solvers_grew);
        assert!((report.displacement.sup_workers_pre - 0.7639).abs() < 1e-3);
        assert!((report.displacement.sup_workers_post - 0.425).abs() < 1e-6);
        assert!((report.displacement.inf_solvers_post - 0.53311).abs() < 5e-4);
        // no winners at the bottom for modest AI, always winners at the top
        assert!(report.z_b.is_none());
        let z_t = report.z_t.unwrap();
        assert!(z_t > 0.425 && z_t < 1.0);
        assert!(report.single_crossing_shape);
        assert!(report.labor_income_delta > 0.0);
    }

    #[test]
    fn advanced_ai_creates_bottom_winners() {
        let pre = solve_pre_ai(&params(0.85)).unwrap();
        let post = solve_autonomous(&params(0.85)).unwrap();
        let report = compare_pre_post(&pre, &post, 2001).unwrap();
        // w*(0) = 0.425 > w(0) = 0.357
        let z_b = report.z_b.expect("bottom winners at z_ai = 0.85");
        assert!(z_b > 0.0);
        assert!(report.z_t.is_some());
        // displacement reverses: the worker set grows
        assert!(!report.displacement.workers_shrank);
        assert!(report.displacement.sup_workers_post > report.displacement.sup_workers_pre);
    }

    #[test]
    fn match_quality_shifts_with_basic_ai() {
        // basic AI worsens every continuing worker's match; it improves the
        // span of solvers whose pre-AI workers knew less than the AI and
        // shrinks the span of those whose workers knew more
        let pre = solve_pre_ai(&params(0.425)).unwrap();
        let post = solve_autonomous(&params(0.425)).unwrap();
        let report = compare_pre_post(&pre, &post, 2001).unwrap();
        assert!(!report.productivity_delta.is_empty());
        for (z, d) in &report.productivity_delta {
            assert!(*d < 0.0, "worker {z} should lose match quality, delta {d}");
        }
        let e_pre = pre.matching.as_ref().unwrap();
        assert!(!report.span_delta.is_empty());
        for (z, d) in &report.span_delta {
            let worker_pre = e_pre.inverse_eval_clamped(*z);
            if worker_pre < 0.425 - 1e-3 {
                assert!(
                    *d > 0.0,
                    "solver {z} (worker {worker_pre}) should gain span, got {d}"
                );
            } else if worker_pre > 0.425 + 1e-3 {
                assert!(
                    *d < 0.0,
                    "solver {z} (worker {worker_pre}) should lose span, got {d}"
                );
            }
        }
    }

    #[test]
    fn match_quality_shifts_with_advanced_ai() {
        // advanced AI: continuing workers below the AI's pre-AI helper gain
        // match quality, those above lose; continuing solvers all gain span
        let pre = solve_pre_ai(&params(0.85)).unwrap();
        let post = solve_autonomous(&params(0.85)).unwrap();
        let report = compare_pre_post(&pre, &post, 2001).unwrap();
        let e_of_zai = pre.matching.as_ref().unwrap().inverse_eval_clamped(0.85);
        for (z, d) in &report.productivity_delta {
            if *z < e_of_zai - 1e-3 {
                assert!(
                    *d > 0.0,
                    "worker {z} below e(z_ai) = {e_of_zai} should gain, got {d}"
                );
            } else if *z > e_of_zai + 1e-3 {
                assert!(
                    *d < 0.0,
                    "worker {z} above e(z_ai) = {e_of_zai} should lose, got {d}"
                );
            }
        }
        assert!(!report.span_delta.is_empty());
        for (z, d) in &report.span_delta {
            assert!(
                *d > 0.0,
                "solver {z} should gain span under advanced AI, got {d}"
            );
        }
    }

    #[test]
    fn params_mismatch_is_rejected() {
        let pre = solve_pre_ai(&params(0.425)).unwrap();
        let post = solve_autonomous(&params(0.85)).unwrap();
        assert!(matches!(
            compare_pre_post(&pre, &post, 512),
            Err(AnalysisError::ParamsMismatch)
        ));
    }

    #[test]
    fn zbar_matches_closed_form() {
        // at the crossing the bottom is AI-assisted, so w*(0) = z_ai (1 - h);
        // the oracle solves zbar (1 - h) = w(0)
        let pre = solve_pre_ai(&params(0.425)).unwrap();
        let oracle = pre.wage_at(0.0) / (1.0 - 0.5);
        assert!((oracle - 0.7141).abs() < 1e-3);
        let zbar = find_zbar(&params(0.425)).unwrap();
        assert!(
            (zbar - oracle).abs() < 5e-3,
            "zbar = {zbar} vs oracle {oracle}"
        );
        assert!(zbar < 0.7639320225);

        let below = solve_autonomous(&params(zbar - 0.01)).unwrap();
        let above = solve_autonomous(&params(zbar + 0.01)).unwrap();
        assert!(below.wage_at(0.0) < pre.wage_at(0.0));
        assert!(above.wage_at(0.0) > pre.wage_at(0.0));
    }

    #[test]
    fn zbar_requires_no_independent_producers() {
        let p = EconomyParams::new(KnowledgeDistribution::uniform(), 0.8125, 0.425, 10.0).unwrap();
        assert!(matches!(
            find_zbar(&p),
            Err(AnalysisError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn tradeoff_fixture() {
        let report = autonomy_tradeoff(&params(0.425)).unwrap();
        assert!((report.w0_nonauto - 0.425).abs() < 1e-9);
        assert!((report.w0_pre - 0.35704).abs() < 5e-4);
        assert!((report.w0_auto - 0.26656).abs() < 5e-4);
        assert!((report.w1_auto - 2.0).abs() < 1e-6);
        assert!((report.w1_nonauto - 1.5563).abs() < 1e-3);
        assert!(report.output_auto > report.output_nonauto);
        assert!(report.gini_auto > 0.0 && report.gini_auto < 1.0);
    }
}
