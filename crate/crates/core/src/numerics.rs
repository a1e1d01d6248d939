//! Deterministic numerical kernel: bracketed root finding, the matching ODE
//! integrator, adaptive Simpson quadrature, and tabulated monotone functions
//! with inverses.
//!
//! Everything here is seedless and allocation-predictable: identical inputs
//! produce bit-identical outputs.

use crate::distributions::KnowledgeDistribution;
use thiserror::Error;

/// Iteration cap for [`find_root_bracketed`].
pub const ROOT_MAX_ITERATIONS: usize = 200;

/// Recursion cap for [`integrate_adaptive`].
pub const QUAD_MAX_DEPTH: usize = 50;

/// Slack allowed when evaluating a [`GridFunction`] just outside its range.
const RANGE_SLACK: f64 = 1e-12;

/// Overshoot allowed before the matching ODE reports [`NumericsError::RangeExceeded`].
const ODE_OVERSHOOT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("no sign change on bracket: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("root finder exceeded {0} iterations")]
    MaxIterations(usize),
    #[error("matching value {m} left [0, 1] during integration near z = {z}")]
    RangeExceeded { z: f64, m: f64 },
    #[error("degenerate integration interval [{z_lo}, {z_hi}]")]
    DegenerateInterval { z_lo: f64, z_hi: f64 },
    #[error("adaptive quadrature exceeded depth {0}")]
    MaxDepth(usize),
    #[error("grid function needs two or more strictly increasing points on both axes")]
    InvalidGrid,
    #[error("query {q} outside tabulated range [{lo}, {hi}]")]
    OutOfRange { q: f64, lo: f64, hi: f64 },
    #[error("function evaluated to a non-finite value at x = {x}")]
    NonFiniteEvaluation { x: f64 },
}

/// A tabulated strictly increasing function with piecewise-linear evaluation
/// and exact inverse evaluation. Used for the matching function `m`, its
/// inverse (the employee function), and solver wage integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl GridFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, NumericsError> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(NumericsError::InvalidGrid);
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1] && w[1].is_finite());
        if !increasing(&xs) || !increasing(&ys) {
            return Err(NumericsError::InvalidGrid);
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.ys[0], *self.ys.last().unwrap())
    }

    /// Piecewise-linear interpolation at `x`; errors beyond ±1e-12 of the range.
    pub fn eval(&self, x: f64) -> Result<f64, NumericsError> {
        let (lo, hi) = self.x_range();
        if x < lo - RANGE_SLACK || x > hi + RANGE_SLACK {
            return Err(NumericsError::OutOfRange { q: x, lo, hi });
        }
        Ok(interp(&self.xs, &self.ys, x.clamp(lo, hi)))
    }

    /// Inverse evaluation: the `x` with `f(x) = y`, exact on the tabulation.
    pub fn inverse_eval(&self, y: f64) -> Result<f64, NumericsError> {
        let (lo, hi) = self.y_range();
        if y < lo - RANGE_SLACK || y > hi + RANGE_SLACK {
            return Err(NumericsError::OutOfRange { q: y, lo, hi });
        }
        Ok(interp(&self.ys, &self.xs, y.clamp(lo, hi)))
    }

    /// Like [`GridFunction::eval`] but clamps the query into the tabulated
    /// range. Wage segments own exactly their tabulated interval, so clamping
    /// only ever absorbs float noise at shared breakpoints.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range();
        interp(&self.xs, &self.ys, x.clamp(lo, hi))
    }

    /// Clamped inverse evaluation; see [`GridFunction::eval_clamped`].
    pub fn inverse_eval_clamped(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range();
        interp(&self.ys, &self.xs, y.clamp(lo, hi))
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    // partition_point yields the first index with xs[i] > x; the segment is [i-1, i]
    let idx = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[idx - 1], xs[idx]);
    let (y0, y1) = (ys[idx - 1], ys[idx]);
    if x == x0 {
        return y0;
    }
    y0 + (x - x0) * (y1 - y0) / (x1 - x0)
}

/// Bracketed scalar root finding: bisection with secant acceleration.
///
/// Returns `x` with `|f(x)| <= tol` or bracket width `<= tol`. The result is
/// invariant under swapping `lo` and `hi`.
pub fn find_root_bracketed<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    assert!(tol > 0.0, "root tolerance must be positive");
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_a = f(a);
    let mut f_b = f(b);
    if !f_a.is_finite() {
        return Err(NumericsError::NonFiniteEvaluation { x: a });
    }
    if !f_b.is_finite() {
        return Err(NumericsError::NonFiniteEvaluation { x: b });
    }
    if f_a == 0.0 {
        return Ok(a);
    }
    if f_b == 0.0 {
        return Ok(b);
    }
    if f_a.signum() == f_b.signum() {
        return Err(NumericsError::NoSignChange {
            lo: a,
            hi: b,
            f_lo: f_a,
            f_hi: f_b,
        });
    }
    let mut force_bisect = false;
    for _ in 0..ROOT_MAX_ITERATIONS {
        let width = b - a;
        let mut x = if force_bisect {
            a + 0.5 * width
        } else {
            // secant through the bracket endpoints, in the numerically stable form
            let s = (a * f_b - b * f_a) / (f_b - f_a);
            if s.is_finite() && s > a && s < b {
                s
            } else {
                a + 0.5 * width
            }
        };
        if x <= a || x >= b {
            x = a + 0.5 * width;
        }
        let f_x = f(x);
        if !f_x.is_finite() {
            return Err(NumericsError::NonFiniteEvaluation { x });
        }
        if f_x == 0.0 || f_x.abs() <= tol || width <= tol {
            return Ok(x);
        }
        if f_x.signum() == f_a.signum() {
            a = x;
            f_a = f_x;
        } else {
            b = x;
            f_b = f_x;
        }
        // fall back to plain bisection whenever the secant step stalls
        force_bisect = (b - a) > 0.5 * width;
    }
    Err(NumericsError::MaxIterations(ROOT_MAX_ITERATIONS))
}

/// Scans `[lo, hi]` on `n` equal subintervals and returns the first bracket
/// with a sign change (endpoints included). Non-finite evaluations break the
/// chain rather than pairing with a finite neighbor. Residual shapes here are
/// monotone or single-crossing, so the first bracket is the right one.
pub(crate) fn scan_bracket<F>(f: &F, lo: f64, hi: f64, n: usize) -> Option<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut prev_x = lo;
    let mut prev_f = f(lo);
    for i in 1..=n {
        let x = lo + (hi - lo) * (i as f64) / (n as f64);
        let fx = f(x);
        if prev_f.is_finite() && fx.is_finite() && (prev_f == 0.0 || prev_f.signum() != fx.signum())
        {
            return Some((prev_x, x));
        }
        prev_x = x;
        prev_f = fx;
    }
    if prev_f == 0.0 {
        return Some((prev_x, prev_x));
    }
    None
}

/// Adaptive Simpson quadrature with absolute tolerance `tol` and a fixed
/// left-then-right recursion order.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    assert!(a <= b, "integration bounds must satisfy a <= b");
    assert!(tol > 0.0, "quadrature tolerance must be positive");
    if a == b {
        return Ok(0.0);
    }
    let whole = simpson(&f, a, b);
    adaptive_step(&f, a, b, tol, whole, 0)
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b))
}

fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    whole: f64,
    depth: usize,
) -> Result<f64, NumericsError> {
    if depth > QUAD_MAX_DEPTH {
        return Err(NumericsError::MaxDepth(QUAD_MAX_DEPTH));
    }
    let c = 0.5 * (a + b);
    let left = simpson(f, a, c);
    let right = simpson(f, c, b);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let l = adaptive_step(f, a, c, 0.5 * tol, left, depth + 1)?;
    let r = adaptive_step(f, c, b, 0.5 * tol, right, depth + 1)?;
    Ok(l + r)
}

/// One tabulated solution of the matching ODE together with the running
/// solver wage integral.
///
/// `ms[k]` is the solver knowledge matched to worker knowledge `zs[k]`, and
/// `wage_integrals[k]` is the integral of the span of control along the match,
/// i.e. the solver wage accumulated from the start of the solver interval:
/// `∫ n(e(u)) du` for `u` from `ms[0]` to `ms[k]`.
#[derive(Debug, Clone)]
pub(crate) struct MatchingPath {
    pub zs: Vec<f64>,
    pub ms: Vec<f64>,
    pub wage_integrals: Vec<f64>,
}

impl MatchingPath {
    pub fn m_end(&self) -> f64 {
        *self.ms.last().unwrap()
    }

    pub fn integral_end(&self) -> f64 {
        *self.wage_integrals.last().unwrap()
    }

    /// The matching function m as a grid over worker knowledge.
    pub fn matching_grid(&self) -> Result<GridFunction, NumericsError> {
        GridFunction::new(self.zs.clone(), self.ms.clone())
    }

    /// The wage integral ∫ n(e(u)) du tabulated over worker knowledge.
    pub fn integral_by_worker(&self) -> Result<GridFunction, NumericsError> {
        GridFunction::new(self.zs.clone(), self.wage_integrals.clone())
    }

    /// The wage integral ∫ n(e(u)) du tabulated over solver knowledge.
    pub fn integral_by_solver(&self) -> Result<GridFunction, NumericsError> {
        GridFunction::new(self.ms.clone(), self.wage_integrals.clone())
    }
}

/// Integrates the matching ODE `m'(z) = h (1 - z) g(z) / g(m(z))` with
/// classical fixed-step fourth-order Runge-Kutta on a uniform grid, starting
/// from `m(z_lo) = m_lo`, together with the solver wage integrand
/// `I'(z) = g(z) / g(m(z))`.
///
/// The wage integrand is the matching slope times the span of control, so a
/// single pass tabulates both the matching function and the solver wages.
pub(crate) fn solve_matching_path(
    dist: &KnowledgeDistribution,
    h: f64,
    z_lo: f64,
    z_hi: f64,
    m_lo: f64,
    steps: usize,
) -> Result<MatchingPath, NumericsError> {
    assert!(steps >= 16, "matching ODE needs at least 16 steps");
    assert!((0.0..1.0).contains(&h), "helping cost must lie in (0, 1)");
    if z_hi <= z_lo {
        return Err(NumericsError::DegenerateInterval { z_lo, z_hi });
    }
    if !(0.0..=1.0).contains(&m_lo) {
        return Err(NumericsError::RangeExceeded { z: z_lo, m: m_lo });
    }
    let dz = (z_hi - z_lo) / steps as f64;
    let mut zs = Vec::with_capacity(steps + 1);
    let mut ms = Vec::with_capacity(steps + 1);
    let mut integrals = Vec::with_capacity(steps + 1);
    let mut m = m_lo;
    let mut integral = 0.0;
    zs.push(z_lo);
    ms.push(m);
    integrals.push(0.0);

    // density ratio g(z)/g(m); stage values of m may poke past the support by
    // a rounding step, so clamp the density query
    let ratio = |z: f64, m: f64| dist.density_clamped(z) / dist.density_clamped(m);

    for k in 0..steps {
        let z = z_lo + dz * k as f64;
        let zm = z + 0.5 * dz;
        let z1 = z_lo + dz * (k + 1) as f64;

        let q1 = ratio(z, m);
        let k1_m = h * (1.0 - z) * q1;
        let q2 = ratio(zm, m + 0.5 * dz * k1_m);
        let k2_m = h * (1.0 - zm) * q2;
        let q3 = ratio(zm, m + 0.5 * dz * k2_m);
        let k3_m = h * (1.0 - zm) * q3;
        let q4 = ratio(z1, m + dz * k3_m);
        let k4_m = h * (1.0 - z1) * q4;

        m += dz / 6.0 * (k1_m + 2.0 * k2_m + 2.0 * k3_m + k4_m);
        integral += dz / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
        if !(-ODE_OVERSHOOT..=1.0 + ODE_OVERSHOOT).contains(&m) {
            return Err(NumericsError::RangeExceeded { z: z1, m });
        }
        zs.push(z1);
        ms.push(m);
        integrals.push(integral);
    }
    Ok(MatchingPath {
        zs,
        ms,
        wage_integrals: integrals,
    })
}

/// Public form of the matching integrator: tabulates `m` on a uniform grid of
/// `steps` intervals over `[z_lo, z_hi]` with `m(z_lo) = m_lo`.
pub fn solve_matching_ode(
    dist: &KnowledgeDistribution,
    h: f64,
    z_lo: f64,
    z_hi: f64,
    m_lo: f64,
    steps: usize,
) -> Result<GridFunction, NumericsError> {
    solve_matching_path(dist, h, z_lo, z_hi, m_lo, steps)?.matching_grid()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::KnowledgeDistribution;

    fn uniform_m(m_lo: f64, h: f64, z: f64) -> f64 {
        // closed form for G(z) = z: m(z) = m_lo + h (z - z^2/2)
        m_lo + h * (z - z * z / 2.0)
    }

    #[test]
    fn root_sqrt_two() {
        let r = find_root_bracketed(|x| x * x - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r - 2.0_f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn root_identity() {
        let r = find_root_bracketed(|x| x, -1.0, 1.0, 1e-12).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn root_pre_ai_boundary_quadratic() {
        // z^2 - 6z + 4 = 0 on [0, 1]: the pre-AI worker boundary for uniform G, h = 1/2
        let r = find_root_bracketed(|z| z * z - 6.0 * z + 4.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((r - 0.7639320225).abs() < 1e-9);
        assert!((r - (3.0 - 5.0_f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn root_swap_invariant() {
        let f = |x: f64| x.powi(3) - 0.3;
        let a = find_root_bracketed(f, 0.0, 1.0, 1e-13).unwrap();
        let b = find_root_bracketed(f, 1.0, 0.0, 1e-13).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn root_no_sign_change() {
        let err = find_root_bracketed(|x| x * x + 1.0, -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, NumericsError::NoSignChange { .. }));
    }

    #[test]
    fn grid_eval_and_inverse() {
        let g = GridFunction::new(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        assert!((g.eval(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((g.inverse_eval(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(g.eval(1.5).is_err());
        assert!(g.inverse_eval(-0.5).is_err());
    }

    #[test]
    fn grid_rejects_non_monotone() {
        assert!(GridFunction::new(vec![0.0, 0.0, 1.0], vec![0.0, 0.5, 1.0]).is_err());
        assert!(GridFunction::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(GridFunction::new(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn ode_uniform_hits_closed_form() {
        let d = KnowledgeDistribution::uniform();
        let z1 = 0.763932;
        let g = solve_matching_ode(&d, 0.5, 0.0, z1, z1, 4096).unwrap();
        let (_, m_end) = g.y_range();
        assert!((m_end - 1.0).abs() < 1e-7);
        assert!((m_end - uniform_m(z1, 0.5, z1)).abs() < 1e-12);
    }

    #[test]
    fn ode_figure_level_segment() {
        // autonomous-AI matching at z_ai = 0.425: m(0.425) from m(0) = 0.53311
        let d = KnowledgeDistribution::uniform();
        let g = solve_matching_ode(&d, 0.5, 0.0, 0.425, 0.53311, 4096).unwrap();
        assert!((g.eval(0.425).unwrap() - 0.70046).abs() < 1e-5);
    }

    #[test]
    fn ode_rejects_degenerate_interval() {
        let d = KnowledgeDistribution::uniform();
        assert!(matches!(
            solve_matching_ode(&d, 0.5, 0.3, 0.3, 0.5, 64),
            Err(NumericsError::DegenerateInterval { .. })
        ));
    }

    #[test]
    fn ode_tiny_interval_stays_put() {
        let d = KnowledgeDistribution::uniform();
        let g = solve_matching_ode(&d, 0.5, 0.3, 0.3 + 1e-9, 0.5, 16).unwrap();
        let (_, m_end) = g.y_range();
        assert!((m_end - 0.5).abs() < 1e-9);
    }

    #[test]
    fn ode_reports_range_exceeded() {
        let d = KnowledgeDistribution::uniform();
        assert!(matches!(
            solve_matching_ode(&d, 0.5, 0.0, 0.9, 0.99, 64),
            Err(NumericsError::RangeExceeded { .. })
        ));
    }

    #[test]
    fn ode_inverse_recovers_worker() {
        let d = KnowledgeDistribution::uniform();
        let g = solve_matching_ode(&d, 0.5, 0.0, 0.425, 0.5331140351, 4096).unwrap();
        let e = g.inverse_eval(0.70045).unwrap();
        assert!((e - g.eval(0.425).map(|m| g.inverse_eval(m).unwrap()).unwrap()).abs() < 1e-4);
        assert!((g.inverse_eval_clamped(0.70046) - 0.425).abs() < 1e-5);
    }

    #[test]
    fn quad_linear_and_constant() {
        assert!((integrate_adaptive(|x| x, 0.0, 1.0, 1e-12).unwrap() - 0.5).abs() < 1e-12);
        assert!((integrate_adaptive(|_| 1.0, 0.0, 1.0, 1e-12).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quad_solver_wage_integral_change_of_variables() {
        // ∫ n(e(u)) du over the solver interval equals the matched worker span:
        // with u = m(z) the integrand du is exactly dz, so the value is e(s) - e(s0).
        let d = KnowledgeDistribution::uniform();
        let path = solve_matching_path(&d, 0.5, 0.0, 0.425, 0.5331140351, 4096).unwrap();
        let m = path.matching_grid().unwrap();
        let n = |z: f64| 1.0 / (0.5 * (1.0 - z));
        let integrand = |u: f64| n(m.inverse_eval_clamped(u));
        let (s0, s1) = m.y_range();
        let val = integrate_adaptive(integrand, s0, s1, 1e-10).unwrap();
        assert!((val - 0.425).abs() < 1e-6);
        // and the co-integrated tabulation agrees with the quadrature route
        assert!((path.integral_end() - val).abs() < 1e-8);
    }

    #[test]
    fn ode_fourth_order_on_sloped_density() {
        // closed form for a linear density a + (b - a) z (normalized):
        // G(m) = G(m0) + h ∫ (1-u) g(u) du, inverted per segment.
        let (a, b) = (0.5, 1.5);
        let d = KnowledgeDistribution::from_density_knots(&[(0.0, a), (1.0, b)]).unwrap();
        let mass = 0.5 * (a + b);
        let big_g = |z: f64| (2.0 * a * z + (b - a) * z * z) / (2.0 * mass);
        let inv_g = |y: f64| (-a + (a * a + 2.0 * mass * (b - a) * y).sqrt()) / (b - a);
        let flow = |z: f64| {
            (2.0 * a * z + (b - a) * z * z - a * z * z - 2.0 / 3.0 * (b - a) * z.powi(3))
                / (2.0 * mass)
        };
        let h = 0.5;
        let (m0, z_hi) = (0.3, 0.8);
        let exact = inv_g(big_g(m0) + h * flow(z_hi));
        let err = |steps: usize| {
            let g = solve_matching_ode(&d, h, 0.0, z_hi, m0, steps).unwrap();
            (g.y_range().1 - exact).abs()
        };
        let e64 = err(64);
        let e128 = err(128);
        let ratio = e64 / e128;
        assert!(
            e128 > 1e-13,
            "error must sit above rounding noise, got {e128:e}"
        );
        assert!(
            (10.0..24.0).contains(&ratio),
            "expected ~16x error growth, got {ratio}"
        );
        assert!(err(4096) < 1e-12);
    }

    #[test]
    fn scan_bracket_finds_first_crossing() {
        let f = |x: f64| (x - 0.3) * (x - 0.7);
        let (lo, hi) = scan_bracket(&f, 0.0, 1.0, 16).unwrap();
        assert!(lo <= 0.3 && 0.3 <= hi);
        assert!(scan_bracket(&|x: f64| x + 1.0, 0.0, 1.0, 16).is_none());
    }
}
