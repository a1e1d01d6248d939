//! The equilibrium without AI: a free-boundary problem solved by shooting the
//! matching ODE, in two regimes depending on whether independent producers
//! exist (`h` above or below the threshold `h0`).

use crate::distributions::KnowledgeDistribution;
use crate::model::{
    audit_no_arbitrage, ComputeAllocation, EconomyParams, Equilibrium, Occupation,
    OccupationPartition, PartitionSegment, Regime, SegmentForm, SolveError, SolverSettings,
    WageSchedule, WageSegment, CERT_TOL,
};
use crate::numerics::{find_root_bracketed, scan_bracket, solve_matching_path, MatchingPath};
use std::collections::BTreeMap;

/// Residual stand-in when a shoot leaves the unit interval.
pub(crate) const SHOOT_PENALTY: f64 = 1e3;

/// Brackets for free boundaries stay this far inside [0, 1].
pub(crate) const BOUNDARY_MARGIN: f64 = 1e-6;

/// Within this distance of the regime threshold the two pre-AI regimes
/// coincide and the simpler one (no independent producers) is returned.
const REGIME_MARGIN: f64 = 1e-6;

/// Minimum interval width kept as a partition segment; anything thinner is
/// snapped shut.
pub(crate) const SNAP_WIDTH: f64 = 1e-9;

pub(crate) struct P1Solution {
    pub z1: f64,
    pub constant: f64,
    pub path: MatchingPath,
}

/// Solves the no-independent-producers system: the single unknown is the
/// worker/solver boundary `z1`, shot so that `m(z1) = 1` with `m(0) = z1`.
/// The solver wage constant follows from continuity at `z1`.
pub(crate) fn solve_p1(
    dist: &KnowledgeDistribution,
    h: f64,
    settings: &SolverSettings,
) -> Result<P1Solution, SolveError> {
    let steps = settings.ode_steps;
    let residual = |z1: f64| match solve_matching_path(dist, h, 0.0, z1, z1, steps) {
        Ok(path) => path.m_end() - 1.0,
        Err(_) => SHOOT_PENALTY,
    };
    let z1 = find_root_bracketed(
        residual,
        BOUNDARY_MARGIN,
        1.0 - BOUNDARY_MARGIN,
        settings.root_tol,
    )
    .map_err(|e| SolveError::NoConvergence(format!("pre-AI worker boundary: {e}")))?;
    let path = solve_matching_path(dist, h, 0.0, z1, z1, steps)?;
    // Continuity at z1 pins the solver wage constant C:
    //   C = w(z1) = m(z1) - h (1 - z1) w(1)  with  w(1) = C + ∫ n(e(u)) du,
    // a 2x2 linear system solved in closed form.
    let hf = h * (1.0 - z1);
    let constant = (1.0 - hf * path.integral_end()) / (1.0 + hf);
    Ok(P1Solution { z1, constant, path })
}

struct P2Solution {
    z_w: f64,
    s0: f64,
    path: MatchingPath,
}

/// Solves the regime with independent producers on `[z_w, s0]`: nested root
/// finding, outer over `z_w` (wage continuity at `z_w`), inner over `s0`
/// (the ODE shoot `m(z_w) = 1` from `m(0) = s0`).
fn solve_p2(
    dist: &KnowledgeDistribution,
    h: f64,
    settings: &SolverSettings,
) -> Result<P2Solution, SolveError> {
    let steps = settings.ode_steps;
    let inner = |z_w: f64| -> Result<(f64, MatchingPath), SolveError> {
        let residual = |s0: f64| match solve_matching_path(dist, h, 0.0, z_w, s0, steps) {
            Ok(path) => path.m_end() - 1.0,
            Err(_) => SHOOT_PENALTY,
        };
        let s0 = find_root_bracketed(residual, SNAP_WIDTH, 1.0 - SNAP_WIDTH, settings.root_tol)
            .map_err(|e| SolveError::NoConvergence(format!("pre-AI solver boundary: {e}")))?;
        let path = solve_matching_path(dist, h, 0.0, z_w, s0, steps)?;
        Ok((s0, path))
    };
    // worker-side wage at z_w must meet the independent producer wage z_w:
    //   z_w = 1 - h (1 - z_w) w(1)  with  w(1) = s0 + ∫ n(e(u)) du
    let outer = |z_w: f64| -> Result<f64, SolveError> {
        let (s0, path) = inner(z_w)?;
        let w1 = s0 + path.integral_end();
        Ok(z_w - 1.0 + h * (1.0 - z_w) * w1)
    };
    let outer_value = |z_w: f64| outer(z_w).unwrap_or(f64::NAN);
    let (lo, hi) = scan_bracket(&outer_value, BOUNDARY_MARGIN, 1.0 - BOUNDARY_MARGIN, 64)
        .ok_or_else(|| SolveError::NoConvergence("no worker boundary admits continuity".into()))?;
    let z_w = find_root_bracketed(outer_value, lo, hi, settings.root_tol)
        .map_err(|e| SolveError::NoConvergence(format!("pre-AI regime P2: {e}")))?;
    let (s0, path) = inner(z_w)?;
    if s0 < z_w - SNAP_WIDTH {
        return Err(SolveError::NoConvergence(format!(
            "independent producer interval inverted: z_w = {z_w}, s0 = {s0}"
        )));
    }
    Ok(P2Solution { z_w, s0, path })
}

/// Solves the unique pre-AI equilibrium. AI parameters in `params` are
/// ignored; the result has a zero rental rate and no compute in use.
pub fn solve_pre_ai(params: &EconomyParams) -> Result<Equilibrium, SolveError> {
    let dist = params.dist();
    let h = params.h();
    let settings = params.settings();
    let p1 = solve_p1(dist, h, settings)?;
    // P1 is the equilibrium iff its wage constant clears the diagonal
    // (C = z1 exactly at the regime threshold h0)
    if p1.constant >= p1.z1 - REGIME_MARGIN {
        build_p1(params, p1)
    } else {
        build_p2(params, solve_p2(dist, h, settings)?)
    }
}

fn build_p1(params: &EconomyParams, sol: P1Solution) -> Result<Equilibrium, SolveError> {
    let h = params.h();
    let P1Solution { z1, constant, path } = sol;
    let i_total = path.integral_end();

    let mut residuals = BTreeMap::new();
    residuals.insert("matching_endpoint".into(), (path.m_end() - 1.0).abs());
    let worker_side = path.m_end() - h * (1.0 - z1) * (constant + i_total);
    residuals.insert("continuity_w_s".into(), (worker_side - constant).abs());

    let partition = OccupationPartition::new(
        vec![
            PartitionSegment {
                lo: 0.0,
                hi: z1,
                occupation: Occupation::HumanAssistedWorker,
            },
            PartitionSegment {
                lo: z1,
                hi: 1.0,
                occupation: Occupation::SolverOfHumans,
            },
        ],
        Regime::PreAi,
        params.z_ai(),
    )?;
    let wages = WageSchedule::new(
        vec![
            WageSegment {
                lo: 0.0,
                hi: z1,
                form: SegmentForm::WorkerComposite {
                    matching: path.matching_grid()?,
                    wage_integral: path.integral_by_worker()?,
                    solver_constant: constant,
                    helping_cost: h,
                },
            },
            WageSegment {
                lo: z1,
                hi: 1.0,
                form: SegmentForm::SolverIntegral {
                    constant,
                    integral: path.integral_by_solver()?,
                },
            },
        ],
        params.settings().root_tol * 100.0,
    )?;
    finish_pre_ai(params, partition, path, wages, residuals, "P1")
}

fn build_p2(params: &EconomyParams, sol: P2Solution) -> Result<Equilibrium, SolveError> {
    let h = params.h();
    let P2Solution { z_w, s0, path } = sol;
    let i_total = path.integral_end();
    let w1 = s0 + i_total;

    let mut residuals = BTreeMap::new();
    residuals.insert("matching_endpoint".into(), (path.m_end() - 1.0).abs());
    residuals.insert(
        "continuity_w_i".into(),
        (z_w - (1.0 - h * (1.0 - z_w) * w1)).abs(),
    );

    let mut partition_segments = vec![PartitionSegment {
        lo: 0.0,
        hi: z_w,
        occupation: Occupation::HumanAssistedWorker,
    }];
    let mut wage_segments = vec![WageSegment {
        lo: 0.0,
        hi: z_w,
        form: SegmentForm::WorkerComposite {
            matching: path.matching_grid()?,
            wage_integral: path.integral_by_worker()?,
            solver_constant: s0,
            helping_cost: h,
        },
    }];
    let s0 = if s0 - z_w > SNAP_WIDTH {
        partition_segments.push(PartitionSegment {
            lo: z_w,
            hi: s0,
            occupation: Occupation::IndependentProducer,
        });
        wage_segments.push(WageSegment {
            lo: z_w,
            hi: s0,
            form: SegmentForm::IndependentProducer,
        });
        s0
    } else {
        z_w
    };
    partition_segments.push(PartitionSegment {
        lo: s0,
        hi: 1.0,
        occupation: Occupation::SolverOfHumans,
    });
    wage_segments.push(WageSegment {
        lo: s0,
        hi: 1.0,
        form: SegmentForm::SolverIntegral {
            constant: s0,
            integral: path.integral_by_solver()?,
        },
    });

    let partition = OccupationPartition::new(partition_segments, Regime::PreAi, params.z_ai())?;
    let wages = WageSchedule::new(wage_segments, params.settings().root_tol * 100.0)?;
    finish_pre_ai(params, partition, path, wages, residuals, "P2")
}

fn finish_pre_ai(
    params: &EconomyParams,
    partition: OccupationPartition,
    path: MatchingPath,
    wages: WageSchedule,
    mut residuals: BTreeMap<String, f64>,
    tag: &str,
) -> Result<Equilibrium, SolveError> {
    let mut eq = Equilibrium {
        params: params.clone(),
        regime: Regime::PreAi,
        partition,
        matching: Some(path.matching_grid()?),
        wages,
        r: 0.0,
        compute: ComputeAllocation::zero(),
        config_tag: tag.to_string(),
        residuals: BTreeMap::new(),
    };
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

/// The helping-cost threshold above which independent producers exist in the
/// pre-AI equilibrium: the `h` at which the P1 wage constant meets the
/// worker/solver boundary (`C = z1`).
pub fn compute_h0(
    dist: &KnowledgeDistribution,
    settings: &SolverSettings,
) -> Result<f64, SolveError> {
    let gap = |h: f64| -> Result<f64, SolveError> {
        let sol = solve_p1(dist, h, settings)?;
        Ok(sol.constant - sol.z1)
    };
    let mut lo = 1e-3;
    let mut hi = 1.0 - 1e-3;
    let g_lo = gap(lo)?;
    let g_hi = gap(hi)?;
    if g_lo <= 0.0 || g_hi >= 0.0 {
        return Err(SolveError::NoConvergence(format!(
            "no regime threshold inside ({lo}, {hi}): gap({lo}) = {g_lo}, gap({hi}) = {g_hi}"
        )));
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::KnowledgeDistribution;
    use crate::model::{accounting, EconomyParams, Occupation};

    fn uniform_params(h: f64) -> EconomyParams {
        EconomyParams::new(KnowledgeDistribution::uniform(), h, 0.0, 0.0).unwrap()
    }

    fn tent_params(h: f64) -> EconomyParams {
        let d = KnowledgeDistribution::from_density_knots(&[(0.0, 1.0), (0.5, 3.0), (1.0, 1.0)])
            .unwrap();
        EconomyParams::new(d, h, 0.0, 0.0).unwrap()
    }

    #[test]
    fn uniform_half_matches_closed_form() {
        // oracle: z1 solves z^2 - 6z + 4 = 0, C = (1 - h(1-z1) z1)/(1 + h(1-z1))
        let z1_oracle = 3.0 - 5.0_f64.sqrt();
        let hf = 0.5 * (1.0 - z1_oracle);
        let c_oracle = (1.0 - hf * z1_oracle) / (1.0 + hf);
        let eq = solve_pre_ai(&uniform_params(0.5)).unwrap();
        let (_, z1) = eq
            .partition
            .interval(Occupation::HumanAssistedWorker)
            .unwrap();
        assert!((z1 - z1_oracle).abs() < 1e-5);
        assert!((eq.wage_at(z1) - c_oracle).abs() < 5e-4);
        assert!((eq.wage_at(0.0) - 0.35704).abs() < 5e-4);
        assert!((eq.wage_at(1.0) - 1.57771).abs() < 5e-4);
        assert_eq!(eq.config_tag, "P1");
        assert!(eq
            .partition
            .interval(Occupation::IndependentProducer)
            .is_none());
    }

    #[test]
    fn uniform_high_h_has_independent_producers() {
        // oracle: the closed-form system s0 = 1 - h Phi(z_w),
        // z_w = 1 - h (1 - z_w)(s0 + z_w) solved by bisection
        let h = 0.8125;
        let phi = |z: f64| z - z * z / 2.0;
        let f = |z_w: f64| {
            let s0 = 1.0 - h * phi(z_w);
            z_w - (1.0 - h * (1.0 - z_w) * (s0 + z_w))
        };
        let (mut lo, mut hi) = (0.01, 0.99);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let z_w_oracle = 0.5 * (lo + hi);
        let s0_oracle = 1.0 - h * phi(z_w_oracle);
        assert!((z_w_oracle - 0.5575).abs() < 1e-3);
        assert!((s0_oracle - 0.6733).abs() < 1e-3);

        let eq = solve_pre_ai(&uniform_params(h)).unwrap();
        assert_eq!(eq.config_tag, "P2");
        let (z_w, s0) = eq
            .partition
            .interval(Occupation::IndependentProducer)
            .unwrap();
        assert!((z_w - z_w_oracle).abs() < 1e-5);
        assert!((s0 - s0_oracle).abs() < 1e-5);
        assert!((eq.wage_at(0.0) - 0.1262).abs() < 5e-4);
        assert!((eq.wage_at(1.0) - 1.2308).abs() < 5e-4);
        // wages sit on the diagonal exactly on I
        for z in [z_w, 0.5 * (z_w + s0), s0] {
            assert!((eq.wage_at(z) - z).abs() < 1e-9);
        }
    }

    #[test]
    fn matching_spans_solver_interval() {
        for params in [
            uniform_params(0.5),
            uniform_params(0.8125),
            tent_params(0.6),
        ] {
            let eq = solve_pre_ai(&params).unwrap();
            let m = eq.matching.as_ref().unwrap();
            let (m0, m_end) = m.y_range();
            let inf_s = eq.partition.inf_solvers().unwrap();
            assert!((m0 - inf_s).abs() < 1e-6, "m(0) = {m0} vs inf S = {inf_s}");
            assert!((m_end - 1.0).abs() < 1e-6);
            // strict positive assortative matching
            assert!(m.ys().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn wages_stay_above_diagonal() {
        let eq = solve_pre_ai(&uniform_params(0.5)).unwrap();
        for i in 0..=1000 {
            let z = i as f64 / 1000.0;
            assert!(
                eq.wage_at(z) > z - 1e-8,
                "w({z}) = {} below diagonal",
                eq.wage_at(z)
            );
        }
    }

    #[test]
    fn audit_passes_across_h_and_distributions() {
        for h in [0.3, 0.5, 0.75, 0.9] {
            for params in [uniform_params(h), tent_params(h)] {
                let eq = solve_pre_ai(&params).unwrap();
                assert!(
                    eq.residuals["audit_max_profit"] <= 1e-6,
                    "audit failed at h = {h} for {:?}",
                    params.dist().kind()
                );
                let accounts = accounting(&eq).unwrap();
                assert_eq!(accounts.capital_income, 0.0);
            }
        }
    }

    #[test]
    fn h0_uniform_is_three_quarters() {
        let params = uniform_params(0.5);
        let h0 = compute_h0(params.dist(), params.settings()).unwrap();
        assert!((h0 - 0.75).abs() < 1e-4, "h0 = {h0}");
    }

    #[test]
    fn regime_flips_at_h0() {
        let params = uniform_params(0.5);
        let h0 = compute_h0(params.dist(), params.settings()).unwrap();
        let below = solve_pre_ai(&uniform_params(h0 - 0.01)).unwrap();
        assert!(below
            .partition
            .interval(Occupation::IndependentProducer)
            .is_none());
        let above = solve_pre_ai(&uniform_params(h0 + 0.01)).unwrap();
        assert!(above
            .partition
            .interval(Occupation::IndependentProducer)
            .is_some());
    }

    #[test]
    fn h0_tent_agrees_with_full_solve_scan() {
        let params = tent_params(0.5);
        let h0 = compute_h0(params.dist(), params.settings()).unwrap();
        // independent route: scan h and find the first full solve in which
        // the independent producer interval opens up
        let mut first_open = None;
        let mut h = h0 - 5e-3;
        while h <= h0 + 5e-3 {
            let eq = solve_pre_ai(&tent_params(h)).unwrap();
            if eq.partition.measure(Occupation::IndependentProducer) > 1e-6 {
                first_open = Some(h);
                break;
            }
            h += 1e-3;
        }
        let first_open = first_open.expect("scan never opened the independent interval");
        assert!(
            (first_open - h0).abs() <= 2e-3,
            "scan {first_open} vs bisection {h0}"
        );
    }
}
