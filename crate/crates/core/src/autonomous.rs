//! The equilibrium with autonomous AI: the rental rate of compute equals the
//! AI knowledge level, and the occupational configuration is found by
//! enumerating the feasible partition shapes, solving each free-boundary
//! system and keeping whichever passes the no-arbitrage audit.

use crate::model::{
    audit_no_arbitrage, span, ComputeAllocation, EconomyParams, Equilibrium, Occupation,
    OccupationPartition, PartitionSegment, Regime, SegmentForm, SolveError, WageSchedule,
    WageSegment, CERT_TOL,
};
use crate::numerics::{
    find_root_bracketed, integrate_adaptive, scan_bracket, solve_matching_path, MatchingPath,
};
use crate::pre_ai::{SHOOT_PENALTY, SNAP_WIDTH};
use std::collections::BTreeMap;

/// Below this AI knowledge level the worker-side intervals have no float
/// resolution left; the partition collapses to AI-supervising solvers only.
const DEGENERATE_AI: f64 = 1e-9;

/// Sufficient condition for compute to be abundant relative to human time:
/// even if every human below `z_ai` used an AI solver and every human above
/// it supervised AI workers, some compute would remain for independent
/// production.
pub fn check_abundance(params: &EconomyParams) -> bool {
    let dist = params.dist();
    let h = params.h();
    let z_ai = params.z_ai();
    // 1/n(z) = h (1 - z) units of compute per AI-assisted worker
    let worker_side = integrate_adaptive(
        |z| h * (1.0 - z) * dist.density_clamped(z),
        0.0,
        z_ai,
        params.settings().quad_tol,
    )
    .unwrap_or(f64::INFINITY);
    let n_ai = match span(h, z_ai) {
        Ok(n) => n,
        Err(_) => return false,
    };
    let solver_side = n_ai * (1.0 - dist.cdf_clamped(z_ai));
    worker_side + solver_side < params.mu()
}

/// Splits the compute stock implied by an autonomous partition: one AI agent
/// per top-automated firm, `n(z_ai)` AI workers per bottom-automated solver,
/// and the remainder in independent production.
pub fn compute_allocation(
    params: &EconomyParams,
    partition: &OccupationPartition,
) -> Result<ComputeAllocation, SolveError> {
    let dist = params.dist();
    let h = params.h();
    let mu_s = match partition.interval(Occupation::AiAssistedWorker) {
        Some((lo, hi)) => integrate_adaptive(
            |z| h * (1.0 - z) * dist.density_clamped(z),
            lo,
            hi,
            params.settings().quad_tol,
        )?,
        None => 0.0,
    };
    let mu_w = match partition.interval(Occupation::SolverOfAi) {
        Some((lo, hi)) => {
            span(params.h(), params.z_ai())? * (dist.cdf_clamped(hi) - dist.cdf_clamped(lo))
        }
        None => 0.0,
    };
    let mu_i = params.mu() - mu_s - mu_w;
    if mu_i < -1e-9 {
        return Err(SolveError::AbundanceViolated);
    }
    Ok(ComputeAllocation::new(
        mu_i.max(0.0),
        mu_w,
        mu_s,
        params.mu(),
    )?)
}

/// Solves the unique autonomous-AI equilibrium. Candidate configurations:
///
/// * A — AI works and produces; humans: Wp, I, Sp, Sa
/// * B — AI solves, works and produces; humans: Wa, Wp, Sp, Sa
/// * E — AI solves and produces only; humans: Wa, Wp, Sp
/// * C — knife-edge with every boundary pinned at `z_ai`; humans: Wp, Sp
///
/// A partition with Wa and I both nonempty is analytically infeasible: wage
/// continuity at the end of Wa forces the independent interval shut. Within
/// tolerance exactly one candidate certifies except at knife-edge parameters,
/// where the smallest-residual candidate wins and is tagged.
pub fn solve_autonomous(params: &EconomyParams) -> Result<Equilibrium, SolveError> {
    if !check_abundance(params) {
        return Err(SolveError::AbundanceViolated);
    }
    if params.z_ai() <= DEGENERATE_AI {
        return solve_degenerate_ai(params);
    }
    type Config = fn(&EconomyParams) -> Result<Equilibrium, SolveError>;
    let configs: [(&str, Config); 4] = [
        ("A", config_a),
        ("B", config_b),
        ("E", config_e),
        ("C", config_c),
    ];
    let mut diagnostics = Vec::new();
    let mut certified: Vec<Equilibrium> = Vec::new();
    for (tag, solve) in configs {
        match solve(params) {
            Ok(eq) => {
                let residual = eq.max_residual();
                diagnostics.push((tag.to_string(), residual));
                if residual <= CERT_TOL {
                    certified.push(eq);
                }
            }
            Err(e) => diagnostics.push((format!("{tag}: {e}"), f64::INFINITY)),
        }
    }
    match certified.len() {
        0 => Err(SolveError::NoConfigCertified(diagnostics)),
        1 => Ok(certified.into_iter().next().unwrap()),
        _ => {
            // materially different partitions certifying together only happen
            // at knife-edge parameters; keep the smallest residual
            let spread = certified
                .iter()
                .map(|eq| eq.partition.sup_workers().unwrap_or(0.0))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
            let distinct = spread.1 - spread.0 > 1e-6;
            let mut best = certified
                .into_iter()
                .reduce(|best, eq| {
                    if eq.max_residual() < best.max_residual() {
                        eq
                    } else {
                        best
                    }
                })
                .unwrap();
            if distinct {
                best.config_tag = format!("{};knife-edge", best.config_tag);
            }
            Ok(best)
        }
    }
}

/// Config A: `m*` runs from `(0, s0)` to `z_ai`; the single unknown `s0` is
/// pinned by worker-side wage continuity at `z_ai`. The solver/Sa continuity
/// at `s1 = m*(z_ai)` is the same equation scaled by `-h (1 - z_ai)` and is
/// asserted as a cross-check.
fn config_a(params: &EconomyParams) -> Result<Equilibrium, SolveError> {
    let (dist, h, z_ai) = (params.dist(), params.h(), params.z_ai());
    let steps = params.settings().ode_steps;
    let residual = |s0: f64| match solve_matching_path(dist, h, 0.0, z_ai, s0, steps) {
        Ok(p) => p.m_end() - h * (1.0 - z_ai) * (s0 + p.integral_end()) - z_ai,
        Err(_) => SHOOT_PENALTY,
    };
    // the scan floor sits a hair below z_ai so the boundary root is still
    // bracketed when the independent interval closes exactly (the A/B
    // transition); the snap below restores s0 >= z_ai
    let floor = (z_ai - SNAP_WIDTH).max(0.0);
    let (lo, hi) = scan_bracket(&residual, floor, 1.0 - SNAP_WIDTH, 64).ok_or_else(|| {
        SolveError::NoConvergence("config A: no feasible solver boundary above z_ai".into())
    })?;
    let s0 = find_root_bracketed(residual, lo, hi, params.settings().root_tol)
        .map_err(|e| SolveError::NoConvergence(format!("config A: {e}")))?;
    let path = solve_matching_path(dist, h, 0.0, z_ai, s0, steps)?;
    let s1 = path.m_end().min(1.0);
    let n_ai = span(h, z_ai)?;
    let solver_top_wage = s0 + path.integral_end();

    let mut residuals = BTreeMap::new();
    let worker_side = path.m_end() - h * (1.0 - z_ai) * solver_top_wage;
    residuals.insert("continuity_w_zai".into(), (worker_side - z_ai).abs());

    let s0 = if s0 - z_ai > SNAP_WIDTH { s0 } else { z_ai };
    let s1 = if 1.0 - s1 > SNAP_WIDTH { s1 } else { 1.0 };

    let mut partition = vec![PartitionSegment {
        lo: 0.0,
        hi: z_ai,
        occupation: Occupation::HumanAssistedWorker,
    }];
    let mut wages = vec![WageSegment {
        lo: 0.0,
        hi: z_ai,
        form: SegmentForm::WorkerComposite {
            matching: path.matching_grid()?,
            wage_integral: path.integral_by_worker()?,
            solver_constant: s0,
            helping_cost: h,
        },
    }];
    if s0 > z_ai {
        partition.push(PartitionSegment {
            lo: z_ai,
            hi: s0,
            occupation: Occupation::IndependentProducer,
        });
        wages.push(WageSegment {
            lo: z_ai,
            hi: s0,
            form: SegmentForm::IndependentProducer,
        });
    }
    partition.push(PartitionSegment {
        lo: s0,
        hi: s1,
        occupation: Occupation::SolverOfHumans,
    });
    wages.push(WageSegment {
        lo: s0,
        hi: s1,
        form: SegmentForm::SolverIntegral {
            constant: s0,
            integral: path.integral_by_solver()?,
        },
    });
    if s1 < 1.0 {
        residuals.insert(
            "continuity_sp_sa".into(),
            (solver_top_wage - n_ai * (s1 - z_ai)).abs(),
        );
        partition.push(PartitionSegment {
            lo: s1,
            hi: 1.0,
            occupation: Occupation::SolverOfAi,
        });
        wages.push(WageSegment {
            lo: s1,
            hi: 1.0,
            form: SegmentForm::Linear {
                intercept: -n_ai * z_ai,
                slope: n_ai,
            },
        });
    }
    assemble(params, "A", partition, wages, Some(path), residuals)
}

/// Config B: AI both solves for `[0, z_a]` and works under the top solvers.
/// `m*` runs from `(z_a, z_ai)`; the unknown `z_a` is pinned by solver-wage
/// continuity at `s1 = m*(z_ai)`.
fn config_b(params: &EconomyParams) -> Result<Equilibrium, SolveError> {
    let (dist, h, z_ai) = (params.dist(), params.h(), params.z_ai());
    let steps = params.settings().ode_steps;
    let n_ai = span(h, z_ai)?;
    let residual = |z_a: f64| match solve_matching_path(dist, h, z_a, z_ai, z_ai, steps) {
        Ok(p) => z_ai + p.integral_end() - n_ai * (p.m_end() - z_ai),
        // overshoot means s1 is far too large, i.e. the residual is very negative
        Err(_) => -SHOOT_PENALTY,
    };
    let (lo, hi) = scan_bracket(&residual, SNAP_WIDTH, z_ai - SNAP_WIDTH, 64).ok_or_else(|| {
        SolveError::NoConvergence("config B: no AI-assisted interval admits continuity".into())
    })?;
    let z_a = find_root_bracketed(residual, lo, hi, params.settings().root_tol)
        .map_err(|e| SolveError::NoConvergence(format!("config B: {e}")))?;
    let path = solve_matching_path(dist, h, z_a, z_ai, z_ai, steps)?;
    let s1 = path.m_end().min(1.0);
    let solver_top_wage = z_ai + path.integral_end();

    let mut residuals = BTreeMap::new();
    if 1.0 - s1 > SNAP_WIDTH {
        residuals.insert(
            "continuity_sp_sa".into(),
            (solver_top_wage - n_ai * (s1 - z_ai)).abs(),
        );
    }
    // worker-side continuity at z_ai is the same equation scaled; record it
    let worker_side = path.m_end() - h * (1.0 - z_ai) * solver_top_wage;
    residuals.insert("continuity_w_zai".into(), (worker_side - z_ai).abs());

    let (partition, wages) =
        wa_wp_sp_segments(params, z_a, s1, &path, z_ai /* solver constant */)?;
    assemble(params, "B", partition, wages, Some(path), residuals)
}

/// Config E: AI solves and produces but nobody supervises AI workers; human
/// solvers span `[z_ai, 1]`. The unknown `z_a` is pinned by `m*(z_ai) = 1`;
/// wage continuity at `z_ai` and the absence of profitable bottom-automated
/// entrants then hold only where this configuration is the true equilibrium.
fn config_e(params: &EconomyParams) -> Result<Equilibrium, SolveError> {
    let (dist, h, z_ai) = (params.dist(), params.h(), params.z_ai());
    let steps = params.settings().ode_steps;
    let residual = |z_a: f64| match solve_matching_path(dist, h, z_a, z_ai, z_ai, steps) {
        Ok(p) => p.m_end() - 1.0,
        Err(_) => SHOOT_PENALTY,
    };
    let (lo, hi) = scan_bracket(&residual, SNAP_WIDTH, z_ai - SNAP_WIDTH, 64).ok_or_else(|| {
        SolveError::NoConvergence("config E: matching cannot reach the top".into())
    })?;
    let z_a = find_root_bracketed(residual, lo, hi, params.settings().root_tol)
        .map_err(|e| SolveError::NoConvergence(format!("config E: {e}")))?;
    let path = solve_matching_path(dist, h, z_a, z_ai, z_ai, steps)?;
    let solver_top_wage = z_ai + path.integral_end();

    let mut residuals = BTreeMap::new();
    residuals.insert("matching_endpoint".into(), (path.m_end() - 1.0).abs());
    let worker_side = path.m_end() - h * (1.0 - z_ai) * solver_top_wage;
    residuals.insert("continuity_w_zai".into(), (worker_side - z_ai).abs());

    let (partition, wages) = wa_wp_sp_segments(params, z_a, 1.0, &path, z_ai)?;
    assemble(params, "E", partition, wages, Some(path), residuals)
}

/// Config C: the knife-edge with no AI-assisted workers and no independent
/// producers; both matching boundaries are forced at `z_ai` with zero free
/// unknowns, so the residuals alone decide.
fn config_c(params: &EconomyParams) -> Result<Equilibrium, SolveError> {
    let (dist, h, z_ai) = (params.dist(), params.h(), params.z_ai());
    let steps = params.settings().ode_steps;
    let path = solve_matching_path(dist, h, 0.0, z_ai, z_ai, steps)
        .map_err(|e| SolveError::NoConvergence(format!("config C: {e}")))?;
    let solver_top_wage = z_ai + path.integral_end();

    let mut residuals = BTreeMap::new();
    residuals.insert("matching_endpoint".into(), (path.m_end() - 1.0).abs());
    let worker_side = path.m_end() - h * (1.0 - z_ai) * solver_top_wage;
    residuals.insert("continuity_w_zai".into(), (worker_side - z_ai).abs());
    if residuals.values().any(|v| *v > CERT_TOL) {
        // the wage schedule would be discontinuous; report the residuals
        // without building it
        return Err(SolveError::NoConfigCertified(
            residuals
                .iter()
                .map(|(k, v)| (format!("C/{k}"), *v))
                .collect(),
        ));
    }

    let partition = vec![
        PartitionSegment {
            lo: 0.0,
            hi: z_ai,
            occupation: Occupation::HumanAssistedWorker,
        },
        PartitionSegment {
            lo: z_ai,
            hi: 1.0,
            occupation: Occupation::SolverOfHumans,
        },
    ];
    let wages = vec![
        WageSegment {
            lo: 0.0,
            hi: z_ai,
            form: SegmentForm::WorkerComposite {
                matching: path.matching_grid()?,
                wage_integral: path.integral_by_worker()?,
                solver_constant: z_ai,
                helping_cost: h,
            },
        },
        WageSegment {
            lo: z_ai,
            hi: 1.0,
            form: SegmentForm::SolverIntegral {
                constant: z_ai,
                integral: path.integral_by_solver()?,
            },
        },
    ];
    assemble(params, "C", partition, wages, Some(path), residuals)
}

/// Shared layout of configs B and E: Wa on `[0, z_a]`, Wp on `[z_a, z_ai]`,
/// Sp from `z_ai` to `s1`, and Sa above `s1` when `s1 < 1`.
fn wa_wp_sp_segments(
    params: &EconomyParams,
    z_a: f64,
    s1: f64,
    path: &MatchingPath,
    solver_constant: f64,
) -> Result<(Vec<PartitionSegment>, Vec<WageSegment>), SolveError> {
    let (h, z_ai) = (params.h(), params.z_ai());
    let n_ai = span(h, z_ai)?;
    let z_a = if z_a > SNAP_WIDTH { z_a } else { 0.0 };
    let s1 = if 1.0 - s1 > SNAP_WIDTH { s1 } else { 1.0 };
    let mut partition = Vec::new();
    let mut wages = Vec::new();
    if z_a > 0.0 {
        partition.push(PartitionSegment {
            lo: 0.0,
            hi: z_a,
            occupation: Occupation::AiAssistedWorker,
        });
        // zero profit of top-automated firms: w(z) = z_ai (1 - 1/n(z))
        wages.push(WageSegment {
            lo: 0.0,
            hi: z_a,
            form: SegmentForm::Linear {
                intercept: z_ai * (1.0 - h),
                slope: z_ai * h,
            },
        });
    }
    partition.push(PartitionSegment {
        lo: z_a,
        hi: z_ai,
        occupation: Occupation::HumanAssistedWorker,
    });
    wages.push(WageSegment {
        lo: z_a,
        hi: z_ai,
        form: SegmentForm::WorkerComposite {
            matching: path.matching_grid()?,
            wage_integral: path.integral_by_worker()?,
            solver_constant,
            helping_cost: h,
        },
    });
    partition.push(PartitionSegment {
        lo: z_ai,
        hi: s1,
        occupation: Occupation::SolverOfHumans,
    });
    wages.push(WageSegment {
        lo: z_ai,
        hi: s1,
        form: SegmentForm::SolverIntegral {
            constant: solver_constant,
            integral: path.integral_by_solver()?,
        },
    });
    if s1 < 1.0 {
        partition.push(PartitionSegment {
            lo: s1,
            hi: 1.0,
            occupation: Occupation::SolverOfAi,
        });
        wages.push(WageSegment {
            lo: s1,
            hi: 1.0,
            form: SegmentForm::Linear {
                intercept: -n_ai * z_ai,
                slope: n_ai,
            },
        });
    }
    Ok((partition, wages))
}

/// At `z_ai = 0` AI still floods independent production, so the rental rate
/// is zero-ish and every human supervises AI workers at wage `n(z_ai)(z -
/// z_ai)`. The partition is a single Sa interval.
fn solve_degenerate_ai(params: &EconomyParams) -> Result<Equilibrium, SolveError> {
    let z_ai = params.z_ai();
    let n_ai = span(params.h(), z_ai)?;
    let partition = vec![PartitionSegment {
        lo: 0.0,
        hi: 1.0,
        occupation: Occupation::SolverOfAi,
    }];
    let wages = vec![WageSegment {
        lo: 0.0,
        hi: 1.0,
        form: SegmentForm::Linear {
            intercept: -n_ai * z_ai,
            slope: n_ai,
        },
    }];
    let mut residuals = BTreeMap::new();
    residuals.insert("continuity_bottom".into(), (n_ai * (0.0 - z_ai)).abs());
    assemble(params, "Sa-degenerate", partition, wages, None, residuals)
}

fn assemble(
    params: &EconomyParams,
    tag: &str,
    partition: Vec<PartitionSegment>,
    wages: Vec<WageSegment>,
    path: Option<MatchingPath>,
    mut residuals: BTreeMap<String, f64>,
) -> Result<Equilibrium, SolveError> {
    let partition = OccupationPartition::new(partition, Regime::Autonomous, params.z_ai())?;
    let wages = WageSchedule::new(wages, params.settings().root_tol * 100.0)?;
    let compute = compute_allocation(params, &partition)?;
    let matching = match path {
        Some(p) => Some(p.matching_grid()?),
        None => None,
    };
    let mut eq = Equilibrium {
        params: params.clone(),
        regime: Regime::Autonomous,
        partition,
        matching,
        wages,
        r: params.z_ai(),
        compute,
        config_tag: tag.to_string(),
        residuals: BTreeMap::new(),
    };
    let audit = audit_no_arbitrage(&eq, params.settings().audit_grid);
    residuals.insert("audit_max_profit".into(), audit.max_profit.max(0.0));
    eq.residuals = residuals;
    Ok(eq)
}
