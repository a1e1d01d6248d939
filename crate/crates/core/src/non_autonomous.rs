//! The equilibrium with non-autonomous AI: agents act only as co-pilots, so
//! bottom-automated and single-layer automated firms never form, some compute
//! idles and the rental rate is zero. AI is adopted at all only when it knows
//! more than the lowest pre-AI wage.

use crate::model::{
    audit_no_arbitrage, ComputeAllocation, EconomyParams, Equilibrium, Occupation,
    OccupationPartition, PartitionSegment, Regime, SegmentForm, SolveError, WageSchedule,
    WageSegment, CERT_TOL,
};
use crate::numerics::{
    find_root_bracketed, integrate_adaptive, scan_bracket, solve_matching_path, MatchingPath,
};
use crate::pre_ai::{solve_pre_ai, SHOOT_PENALTY, SNAP_WIDTH};
use std::collections::BTreeMap;

/// Solves the unique non-autonomous-AI equilibrium.
///
/// * N0 — `z_ai <= w(0)`: AI advice is worth less than the lowest human wage;
///   occupations and wages coincide with the pre-AI equilibrium and the
///   whole compute stock idles.
/// * N1 — the least knowledgeable humans work under AI co-pilots at the flat
///   wage `z_ai` (zero profit of top-automated firms at `r = 0`); no
///   independent producers.
/// * N2 — as N1 but with an independent-producer interval.
pub fn solve_non_autonomous(params: &EconomyParams) -> Result<Equilibrium, SolveError> {
    let pre = solve_pre_ai(params)?;
    if params.z_ai() <= pre.wage_at(0.0) {
        return adopt_nothing(params, pre);
    }
    let mut diagnostics = Vec::new();
    for (tag, solve) in [
        (
            "N1",
            config_n1 as fn(&EconomyParams) -> Result<Equilibrium, SolveError>,
        ),
        ("N2", config_n2),
    ] {
        match solve(params) {
            Ok(eq) => {
                let residual = eq.max_residual();
                if residual <= CERT_TOL {
                    return Ok(eq);
                }
                diagnostics.push((tag.to_string(), residual));
            }
            Err(e) => diagnostics.push((format!("{tag}: {e}"), f64::INFINITY)),
        }
    }
    Err(SolveError::NoConfigCertified(diagnostics))
}

/// N0: the pre-AI allocation carries over unchanged; compute idles.
fn adopt_nothing(params: &EconomyParams, pre: Equilibrium) -> Result<Equilibrium, SolveError> {
    let partition = OccupationPartition::new(
        pre.partition.segments().to_vec(),
        Regime::NonAutonomous,
        params.z_ai(),
    )?;
    let mut eq = Equilibrium {
        params: params.clone(),
        regime: Regime::NonAutonomous,
        partition,
        matching: pre.matching.clone(),
        wages: pre.wages.clone(),
        r: 0.0,
        compute: ComputeAllocation::new(params.mu(), 0.0, 0.0, params.mu())?,
        config_tag: "N0-idle".to_string(),
        residuals: BTreeMap::new(),
    };
    let mut residuals = pre.residuals.clone();
    let audit = audit_no_arbitrage(&eq, params.settings().audit_grid);
    residuals.insert("audit_max_profit".into(), audit.max_profit.max(0.0));
    eq.residuals = residuals;
    if audit.max_profit > CERT_TOL {
        return Err(SolveError::AuditFailed {
            max_profit: audit.max_profit,
            argmax: audit.argmax,
        });
    }
    Ok(eq)
}

/// N1: unknowns `(z_a, z_w)` with Wa on `[0, z_a]`, Wp on `[z_a, z_w]` and Sp
/// on `[z_w, 1]`. Inner shoot pins `z_w` through `m(z_w) = 1`; the outer root
/// makes the worker wage meet the flat AI-assisted wage `z_ai` at `z_a`.
fn config_n1(params: &EconomyParams) -> Result<Equilibrium, SolveError> {
    let (dist, h, z_ai) = (params.dist(), params.h(), params.z_ai());
    let steps = params.settings().ode_steps;
    let root_tol = params.settings().root_tol;

    let inner = |z_a: f64| -> Result<(f64, MatchingPath), SolveError> {
        let residual = |z_w: f64| match solve_matching_path(dist, h, z_a, z_w, z_w, steps) {
            Ok(p) => p.m_end() - 1.0,
            Err(_) => SHOOT_PENALTY,
        };
        let z_w = find_root_bracketed(residual, z_a + SNAP_WIDTH, 1.0 - SNAP_WIDTH, root_tol)
            .map_err(|e| SolveError::NoConvergence(format!("N1 inner shoot: {e}")))?;
        let path = solve_matching_path(dist, h, z_a, z_w, z_w, steps)?;
        Ok((z_w, path))
    };
    // solver wage constant from continuity at z_w, then the wage the marginal
    // AI-assisted worker would earn in a human team must equal z_ai
    let outer = |z_a: f64| -> Result<f64, SolveError> {
        let (z_w, path) = inner(z_a)?;
        let c = solver_constant(h, z_w, path.integral_end());
        Ok(z_w - h * (1.0 - z_a) * c - z_ai)
    };
    let outer_value = |z_a: f64| outer(z_a).unwrap_or(f64::NAN);
    let (lo, hi) = scan_bracket(&outer_value, SNAP_WIDTH, z_ai - SNAP_WIDTH, 64)
        .ok_or_else(|| SolveError::NoConvergence("N1: no adoption boundary".into()))?;
    let z_a = find_root_bracketed(outer_value, lo, hi, root_tol)
        .map_err(|e| SolveError::NoConvergence(format!("N1 outer root: {e}")))?;
    let (z_w, path) = inner(z_a)?;
    let c = solver_constant(h, z_w, path.integral_end());

    let mut residuals = BTreeMap::new();
    residuals.insert("matching_endpoint".into(), (path.m_end() - 1.0).abs());
    residuals.insert(
        "continuity_wa_wp".into(),
        (z_w - h * (1.0 - z_a) * c - z_ai).abs(),
    );
    let worker_side = path.m_end() - h * (1.0 - z_w) * (c + path.integral_end());
    residuals.insert("continuity_wp_sp".into(), (worker_side - c).abs());

    let partition = vec![
        PartitionSegment {
            lo: 0.0,
            hi: z_a,
            occupation: Occupation::AiAssistedWorker,
        },
        PartitionSegment {
            lo: z_a,
            hi: z_w,
            occupation: Occupation::HumanAssistedWorker,
        },
        PartitionSegment {
            lo: z_w,
            hi: 1.0,
            occupation: Occupation::SolverOfHumans,
        },
    ];
    let wages = vec![
        WageSegment {
            lo: 0.0,
            hi: z_a,
            form: SegmentForm::Linear {
                intercept: z_ai,
                slope: 0.0,
            },
        },
        WageSegment {
            lo: z_a,
            hi: z_w,
            form: SegmentForm::WorkerComposite {
                matching: path.matching_grid()?,
                wage_integral: path.integral_by_worker()?,
                solver_constant: c,
                helping_cost: h,
            },
        },
        WageSegment {
            lo: z_w,
            hi: 1.0,
            form: SegmentForm::SolverIntegral {
                constant: c,
                integral: path.integral_by_solver()?,
            },
        },
    ];
    assemble(params, "N1-idle", partition, wages, path, residuals)
}

/// N2: as N1 plus an independent interval `[z_w, s0]`; unknowns
/// `(z_a, z_w, s0)`. Continuity at `z_a` pins the solver boundary in closed
/// form — the flat wage `z_ai` must equal the wage of joining a human team
/// whose solver earns `s0`, so `s0 = z_ai / (1 - h (1 - z_a))` — leaving a
/// two-level nest: the outer root over `z_a` makes the worker wage meet the
/// diagonal at `z_w`, the inner shoot pins `z_w` through `m(z_w) = 1`.
fn config_n2(params: &EconomyParams) -> Result<Equilibrium, SolveError> {
    let (dist, h, z_ai) = (params.dist(), params.h(), params.z_ai());
    let steps = params.settings().ode_steps;
    let root_tol = params.settings().root_tol;

    let s0_of = |z_a: f64| z_ai / (1.0 - h * (1.0 - z_a));
    let inner = |z_a: f64| -> Result<(f64, MatchingPath), SolveError> {
        let s0 = s0_of(z_a);
        if !(0.0..1.0).contains(&s0) {
            return Err(SolveError::NoConvergence(format!(
                "N2: implied solver boundary {s0} out of range"
            )));
        }
        let residual = |z_w: f64| match solve_matching_path(dist, h, z_a, z_w, s0, steps) {
            Ok(p) => p.m_end() - 1.0,
            Err(_) => SHOOT_PENALTY,
        };
        let z_w = find_root_bracketed(residual, z_a + SNAP_WIDTH, 1.0 - SNAP_WIDTH, root_tol)
            .map_err(|e| SolveError::NoConvergence(format!("N2 inner shoot: {e}")))?;
        let path = solve_matching_path(dist, h, z_a, z_w, s0, steps)?;
        Ok((z_w, path))
    };
    // worker-side wage meets the diagonal at z_w
    let outer = |z_a: f64| -> Result<f64, SolveError> {
        let (z_w, path) = inner(z_a)?;
        Ok(1.0 - h * (1.0 - z_w) * (s0_of(z_a) + path.integral_end()) - z_w)
    };
    let outer_value = |z_a: f64| outer(z_a).unwrap_or(f64::NAN);
    // s0 < 1 requires z_a above this closed-form edge
    let lo_lim = (1.0 - (1.0 - z_ai) / h + SNAP_WIDTH).max(SNAP_WIDTH);
    let hi_lim = z_ai - SNAP_WIDTH;
    if lo_lim >= hi_lim {
        return Err(SolveError::NoConvergence(
            "N2: no feasible adoption interval".into(),
        ));
    }
    let bracket = match scan_bracket(&outer_value, lo_lim, hi_lim, 32) {
        Some(b) => Some(b),
        None => {
            // The residual can cross zero inside a sliver where the shoot is
            // still feasible but z_w is already near 1 (the solver interval
            // [s0, 1] barely absorbs the workers). Bisect the feasibility
            // edge, then bracket against it.
            let mut feasible = None;
            let mut infeasible = None;
            for i in 0..=32 {
                let z_a = lo_lim + (hi_lim - lo_lim) * i as f64 / 32.0;
                let v = outer_value(z_a);
                if v.is_finite() && v > 0.0 {
                    feasible = Some((z_a, v));
                } else if feasible.is_some() && !v.is_finite() {
                    infeasible = Some(z_a);
                    break;
                }
            }
            match (feasible, infeasible) {
                (Some((mut f_za, _)), Some(mut i_za)) => {
                    for _ in 0..45 {
                        let mid = 0.5 * (f_za + i_za);
                        if outer_value(mid).is_finite() {
                            f_za = mid;
                        } else {
                            i_za = mid;
                        }
                    }
                    let edge = outer_value(f_za);
                    if edge.is_finite() && edge < 0.0 {
                        Some((lo_lim, f_za))
                    } else {
                        None
                    }
                }
                _ => None,
            }
        }
    };
    let (lo, hi) =
        bracket.ok_or_else(|| SolveError::NoConvergence("N2: no adoption boundary".into()))?;
    let z_a = find_root_bracketed(outer_value, lo, hi, root_tol)
        .map_err(|e| SolveError::NoConvergence(format!("N2 outer root: {e}")))?;
    let (z_w, path) = inner(z_a)?;
    let s0 = s0_of(z_a);
    if s0 < z_w - SNAP_WIDTH {
        return Err(SolveError::NoConvergence(
            "N2: independent interval inverted".into(),
        ));
    }

    let mut residuals = BTreeMap::new();
    residuals.insert("matching_endpoint".into(), (path.m_end() - 1.0).abs());
    residuals.insert(
        "continuity_wa_wp".into(),
        (s0 * (1.0 - h * (1.0 - z_a)) - z_ai).abs(),
    );
    let worker_side = path.m_end() - h * (1.0 - z_w) * (s0 + path.integral_end());
    residuals.insert("continuity_wp_i".into(), (worker_side - z_w).abs());

    let s0 = if s0 - z_w > SNAP_WIDTH { s0 } else { z_w };
    let mut partition = vec![
        PartitionSegment {
            lo: 0.0,
            hi: z_a,
            occupation: Occupation::AiAssistedWorker,
        },
        PartitionSegment {
            lo: z_a,
            hi: z_w,
            occupation: Occupation::HumanAssistedWorker,
        },
    ];
    let mut wages = vec![
        WageSegment {
            lo: 0.0,
            hi: z_a,
            form: SegmentForm::Linear {
                intercept: z_ai,
                slope: 0.0,
            },
        },
        WageSegment {
            lo: z_a,
            hi: z_w,
            form: SegmentForm::WorkerComposite {
                matching: path.matching_grid()?,
                wage_integral: path.integral_by_worker()?,
                solver_constant: s0,
                helping_cost: h,
            },
        },
    ];
    if s0 > z_w {
        partition.push(PartitionSegment {
            lo: z_w,
            hi: s0,
            occupation: Occupation::IndependentProducer,
        });
        wages.push(WageSegment {
            lo: z_w,
            hi: s0,
            form: SegmentForm::IndependentProducer,
        });
    }
    partition.push(PartitionSegment {
        lo: s0,
        hi: 1.0,
        occupation: Occupation::SolverOfHumans,
    });
    wages.push(WageSegment {
        lo: s0,
        hi: 1.0,
        form: SegmentForm::SolverIntegral {
            constant: s0,
            integral: path.integral_by_solver()?,
        },
    });
    assemble(params, "N2-idle", partition, wages, path, residuals)
}

fn solver_constant(h: f64, z_w: f64, integral_total: f64) -> f64 {
    // continuity at z_w: C = 1 - h (1 - z_w) w(1) with w(1) = C + ∫ n(e(u)) du
    let hf = h * (1.0 - z_w);
    (1.0 - hf * integral_total) / (1.0 + hf)
}

fn assemble(
    params: &EconomyParams,
    tag: &str,
    partition: Vec<PartitionSegment>,
    wages: Vec<WageSegment>,
    path: MatchingPath,
    mut residuals: BTreeMap<String, f64>,
) -> Result<Equilibrium, SolveError> {
    let partition = OccupationPartition::new(partition, Regime::NonAutonomous, params.z_ai())?;
    let wages = WageSchedule::new(wages, params.settings().root_tol * 100.0)?;
    let mu_s = match partition.interval(Occupation::AiAssistedWorker) {
        Some((lo, hi)) => integrate_adaptive(
            |z| params.h() * (1.0 - z) * params.dist().density_clamped(z),
            lo,
            hi,
            params.settings().quad_tol,
        )?,
        None => 0.0,
    };
    if mu_s > params.mu() + 1e-9 {
        return Err(SolveError::AbundanceViolated);
    }
    let compute = ComputeAllocation::new((params.mu() - mu_s).max(0.0), 0.0, mu_s, params.mu())?;
    let mut eq = Equilibrium {
        params: params.clone(),
        regime: Regime::NonAutonomous,
        partition,
        matching: Some(path.matching_grid()?),
        wages,
        r: 0.0,
        compute,
        config_tag: tag.to_string(),
        residuals: BTreeMap::new(),
    };
    let audit = audit_no_arbitrage(&eq, params.settings().audit_grid);
    residuals.insert("audit_max_profit".into(), audit.max_profit.max(0.0));
    eq.residuals = residuals;
    Ok(eq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::KnowledgeDistribution;
    use crate::model::accounting;

    fn params(z_ai: f64) -> EconomyParams {
        EconomyParams::new(KnowledgeDistribution::uniform(), 0.5, z_ai, 10.0).unwrap()
    }

    /// Oracle for the N1 system under uniform G, independent of the ODE:
    /// m(z) = z_w + h (Phi(z) - Phi(z_a)) in closed form, solved by bisection.
    fn n1_oracle(h: f64, z_ai: f64) -> (f64, f64, f64) {
        let phi = |z: f64| z - z * z / 2.0;
        let solve_zw = |z_a: f64| {
            let f = |z_w: f64| z_w + h * (phi(z_w) - phi(z_a)) - 1.0;
            let (mut lo, mut hi) = (z_a, 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(lo) * f(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let outer = |z_a: f64| {
            let z_w = solve_zw(z_a);
            let c = solver_constant(h, z_w, z_w - z_a);
            z_w - h * (1.0 - z_a) * c - z_ai
        };
        let (mut lo, mut hi) = (1e-9, z_ai);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if outer(lo) * outer(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let z_a = 0.5 * (lo + hi);
        let z_w = solve_zw(z_a);
        (z_a, z_w, solver_constant(h, z_w, z_w - z_a))
    }

    #[test]
    fn below_adoption_threshold_matches_pre_ai() {
        // w(0) = 0.357 pre-AI, so z_ai = 0.3 is never adopted
        let eq = solve_non_autonomous(&params(0.3)).unwrap();
        let pre = solve_pre_ai(&params(0.3)).unwrap();
        assert_eq!(eq.config_tag, "N0-idle");
        assert_eq!(eq.r, 0.0);
        assert_eq!(eq.compute.mu_i, 10.0);
        for i in 0..=2000 {
            let z = i as f64 / 2000.0;
            assert!((eq.wage_at(z) - pre.wage_at(z)).abs() < 1e-8);
        }
    }

    #[test]
    fn basic_copilot_fixture() {
        let (z_a_oracle, z_w_oracle, c_oracle) = n1_oracle(0.5, 0.425);
        assert!((z_a_oracle - 0.10076).abs() < 1e-4);
        assert!((z_w_oracle - 0.80714).abs() < 1e-4);

        let eq = solve_non_autonomous(&params(0.425)).unwrap();
        assert_eq!(eq.config_tag, "N1-idle");
        assert_eq!(eq.r, 0.0);
        let (_, z_a) = eq.partition.interval(Occupation::AiAssistedWorker).unwrap();
        let (z_w, _) = eq.partition.interval(Occupation::SolverOfHumans).unwrap();
        assert!((z_a - z_a_oracle).abs() < 1e-5);
        assert!((z_w - z_w_oracle).abs() < 1e-5);
        assert!((eq.wage_at(1.0) - (c_oracle + z_w_oracle - z_a_oracle)).abs() < 1e-5);
        assert!((eq.wage_at(1.0) - 1.55631).abs() < 1e-3);
        // flat wage at exactly z_ai on the AI-assisted interval
        for z in [0.0, 0.05, z_a] {
            assert_eq!(eq.wage_at(z), 0.425);
        }
    }

    #[test]
    fn wage_curve_matches_closed_form_mid_segment() {
        // uniform-G closed form on the human-assisted interval:
        // w(z) = m(z) - h (1 - z)(C + z - z_a) with m(z) = z_w + h(Phi(z) - Phi(z_a)),
        // and on the solver interval w(s) = C + e(s) - z_a with
        // e(s) = 1 - sqrt(1 - 2 Phi(z_a) - 2 (s - z_w) / h) ... for h = 1/2
        let (z_a, z_w, c) = n1_oracle(0.5, 0.425);
        let phi = |z: f64| z - z * z / 2.0;
        let eq = solve_non_autonomous(&params(0.425)).unwrap();
        for z in [0.3, 0.5, 0.7] {
            let m = z_w + 0.5 * (phi(z) - phi(z_a));
            let closed = m - 0.5 * (1.0 - z) * (c + z - z_a);
            assert!(
                (eq.wage_at(z) - closed).abs() < 1e-6,
                "w({z}) = {}",
                eq.wage_at(z)
            );
        }
        for s in [0.85, 0.95] {
            let e = 1.0 - (1.0 - 2.0 * phi(z_a) - 4.0 * (s - z_w)).sqrt();
            let closed = c + e - z_a;
            assert!(
                (eq.wage_at(s) - closed).abs() < 1e-6,
                "w({s}) = {}",
                eq.wage_at(s)
            );
        }
    }

    #[test]
    fn advanced_copilot_fixture() {
        let (z_a_oracle, z_w_oracle, _) = n1_oracle(0.5, 0.85);
        assert!((z_a_oracle - 0.7326).abs() < 1e-3);
        assert!((z_w_oracle - 0.9822).abs() < 1e-3);
        let eq = solve_non_autonomous(&params(0.85)).unwrap();
        let (_, z_a) = eq.partition.interval(Occupation::AiAssistedWorker).unwrap();
        let (z_w, _) = eq.partition.interval(Occupation::SolverOfHumans).unwrap();
        assert!((z_a - z_a_oracle).abs() < 1e-5);
        assert!((z_w - z_w_oracle).abs() < 1e-5);
    }

    #[test]
    fn high_h_keeps_independent_producers() {
        // oracle for the N2 system under uniform G, independent of the ODE:
        // s0 = z_ai / (1 - h(1-z_a)), z_w from Phi(z_w) = Phi(z_a) + (1-s0)/h,
        // outer residual 1 - h(1-z_w)(s0 + z_w - z_a) - z_w
        let (h, z_ai) = (0.8125, 0.3);
        let phi = |z: f64| z - z * z / 2.0;
        let zw_of = |z_a: f64| {
            let s0 = z_ai / (1.0 - h * (1.0 - z_a));
            1.0 - (1.0 - 2.0 * phi(z_a) - 2.0 * (1.0 - s0) / h).sqrt()
        };
        let outer = |z_a: f64| {
            let s0 = z_ai / (1.0 - h * (1.0 - z_a));
            let z_w = zw_of(z_a);
            1.0 - h * (1.0 - z_w) * (s0 + z_w - z_a) - z_w
        };
        let (mut lo, mut hi) = (0.05, z_ai);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if outer(lo) * outer(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let z_a_oracle = 0.5 * (lo + hi);
        let z_w_oracle = zw_of(z_a_oracle);
        let s0_oracle = z_ai / (1.0 - h * (1.0 - z_a_oracle));

        let p = EconomyParams::new(KnowledgeDistribution::uniform(), h, z_ai, 10.0).unwrap();
        let eq = solve_non_autonomous(&p).unwrap();
        assert_eq!(eq.config_tag, "N2-idle");
        let (_, z_a) = eq.partition.interval(Occupation::AiAssistedWorker).unwrap();
        let (z_w, s0) = eq
            .partition
            .interval(Occupation::IndependentProducer)
            .unwrap();
        assert!(
            (z_a - z_a_oracle).abs() < 1e-5,
            "z_a = {z_a} vs {z_a_oracle}"
        );
        assert!(
            (z_w - z_w_oracle).abs() < 1e-5,
            "z_w = {z_w} vs {z_w_oracle}"
        );
        assert!((s0 - s0_oracle).abs() < 1e-5, "s0 = {s0} vs {s0_oracle}");
        assert!(eq.residuals["audit_max_profit"] <= 1e-6);
        // wages sit on the diagonal across the independent interval
        for t in 0..=10 {
            let z = z_w + (s0 - z_w) * t as f64 / 10.0;
            assert!((eq.wage_at(z) - z).abs() < 1e-8);
        }
    }

    #[test]
    fn adoption_root_near_feasibility_edge() {
        // the outer root can sit in a sliver where the solver interval
        // [s0, 1] barely absorbs the workers (z_w near 1); the bracket then
        // has to be built against the feasibility edge
        let p =
            EconomyParams::new(KnowledgeDistribution::uniform(), 0.8, 0.529166667, 50.0).unwrap();
        let eq = solve_non_autonomous(&p).unwrap();
        assert_eq!(eq.config_tag, "N2-idle");
        assert!(eq.residuals["audit_max_profit"] <= 1e-6);
        let (z_w, s0) = eq
            .partition
            .interval(Occupation::IndependentProducer)
            .unwrap();
        assert!(
            z_w > 0.8 && s0 < 0.95,
            "unexpected independent interval [{z_w}, {s0}]"
        );
    }

    #[test]
    fn no_ai_workers_and_no_capital_income() {
        for z_ai in [0.3, 0.425, 0.85] {
            let eq = solve_non_autonomous(&params(z_ai)).unwrap();
            assert_eq!(eq.compute.mu_w, 0.0);
            assert!(eq.partition.interval(Occupation::SolverOfAi).is_none());
            let accounts = accounting(&eq).unwrap();
            assert_eq!(accounts.capital_income, 0.0);
            assert!((accounts.output - accounts.labor_income).abs() < 1e-8 * accounts.output);
        }
    }

    #[test]
    fn adoption_is_monotone_in_ai_knowledge() {
        let pre = solve_pre_ai(&params(0.3)).unwrap();
        let w0 = pre.wage_at(0.0);
        let below = solve_non_autonomous(&params(w0 - 0.01)).unwrap();
        assert_eq!(below.partition.measure(Occupation::AiAssistedWorker), 0.0);
        let above = solve_non_autonomous(&params(w0 + 0.01)).unwrap();
        assert!(above.partition.measure(Occupation::AiAssistedWorker) > 0.0);
    }

    #[test]
    fn labor_income_is_locally_maximal_in_adoption_boundary() {
        // capital income is zero, so labor income equals output; move the
        // adoption boundary off its equilibrium value, rebalance the matching
        // and output must fall
        let eq = solve_non_autonomous(&params(0.425)).unwrap();
        let base = accounting(&eq).unwrap().labor_income;
        let (_, z_a_star) = eq.partition.interval(Occupation::AiAssistedWorker).unwrap();
        let output_at = |z_a: f64| {
            let p = params(0.425);
            let residual =
                |z_w: f64| match solve_matching_path(p.dist(), p.h(), z_a, z_w, z_w, 4096) {
                    Ok(path) => path.m_end() - 1.0,
                    Err(_) => SHOOT_PENALTY,
                };
            let z_w = find_root_bracketed(residual, z_a + 1e-9, 1.0 - 1e-9, 1e-12).unwrap();
            let path = solve_matching_path(p.dist(), p.h(), z_a, z_w, z_w, 4096).unwrap();
            let m = path.matching_grid().unwrap();
            // Wa produces z_ai each, Wp produces m(z) each, solvers produce nothing
            0.425 * z_a + integrate_adaptive(|z| m.eval_clamped(z), z_a, z_w, 1e-10).unwrap()
        };
        for z_a in [z_a_star - 0.01, z_a_star + 0.01] {
            let perturbed = output_at(z_a);
            assert!(
                perturbed <= base + 1e-6,
                "feasible reallocation at z_a = {z_a} beats equilibrium: {perturbed} > {base}"
            );
        }
    }
}
