//! Damped Picard iteration on the market level `f(t)`.
//!
//! Each sweep solves the HJB equation for the current path, forms the
//! control `q = (f - u_x) / 2`, transports the density, and recomputes the
//! level from `(u_x, m)`. Only the path is iterated; the returned fields
//! are recomputed from the converged level.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, MfgError, Result};
use crate::fp::{solve_fp, FpOptions};
use crate::geometry::{check_nonnegative, derivative_field, derivative_raw, trapezoid_raw, FieldRole, Grid, ScalarField, TimeSlice};
use crate::hjb::{hjb_residual, solve_hjb, HjbOptions};
use crate::market::{coupling_level, BoundarySpec, MarketParams, MarketPath};
use crate::weak_form::fp_weak_residual;

/// Threshold under which both energy-gap terms count as zero.
pub const ENERGY_GAP_TOL: f64 = 1e-6;
/// Allowed drift of the trapezoid mass under reflection.
pub const MASS_TOL: f64 = 1e-8;
/// Absolute slack on the gradient bound, for round-off in flat data.
pub const GRADIENT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "values")]
pub enum InitialPath {
    /// `f = b`, the zero-gradient guess.
    #[default]
    ConstantB,
    /// Constant level.
    Constant(f64),
    /// Values at the `nt + 1` time nodes.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixedPointOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub initial_f: InitialPath,
    pub hjb: HjbOptions,
    pub fp: FpOptions,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-8,
            max_iter: 200,
            initial_f: InitialPath::ConstantB,
            hjb: HjbOptions::default(),
            fp: FpOptions::default(),
        }
    }
}

impl FixedPointOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(invalid("damping", format!("must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantFlags {
    pub mass_conserved: bool,
    pub u_nonnegative: bool,
    pub gradient_bound: bool,
    pub energy_gap_zero: bool,
}

impl InvariantFlags {
    pub fn all(&self) -> bool {
        self.mass_conserved && self.u_nonnegative && self.gradient_bound && self.energy_gap_zero
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub invariant_flags: InvariantFlags,
    pub wall_time: f64,
    /// Max over time of `|int m(t) - 1|` (reflection) or of the mass increase (absorbing).
    pub mass_error_max: f64,
    pub u_min: f64,
    pub gradient_max: f64,
    /// `e^{rT} max |u_T'|`.
    pub gradient_bound: f64,
    /// `iint m u_x^2`.
    pub energy_norm: f64,
    /// Energy-gap terms between the returned solution and the previous iterate.
    pub energy_gap_last: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfgSolution {
    pub u: ScalarField,
    pub m: ScalarField,
    /// `G(u_x, m)` at every node.
    pub q: ScalarField,
    pub path: MarketPath,
    pub report: SolveReport,
    pub params: MarketParams,
    pub bc: BoundarySpec,
    pub initial_density: TimeSlice,
    pub terminal_value: TimeSlice,
}

impl MfgSolution {
    pub fn grid(&self) -> Grid {
        self.u.grid
    }
}

fn validate_data(params: &MarketParams, m0: &TimeSlice, u_t: &TimeSlice, grid: &Grid, bc: BoundarySpec) -> Result<()> {
    if grid.nx < 2 {
        return Err(MfgError::GridTooSmall { nx: grid.nx, required: 2 });
    }
    grid.ensure_same(&m0.grid)?;
    grid.ensure_same(&u_t.grid)?;
    params.ensure_grid(grid)?;
    if !m0.is_finite() || !u_t.is_finite() {
        return Err(MfgError::InvalidData("non-finite initial or terminal data".into()));
    }
    check_nonnegative(&m0.values)?;
    if let Some((i, v)) = u_t.values.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(MfgError::InvalidData(format!("terminal value is negative ({v:e}) at node {i}")));
    }
    let nx = grid.nx;
    let dx = grid.dx();
    let slope = derivative_raw(&u_t.values, dx);
    let slope_max = slope.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let slope_tol = 10.0 * dx * (1.0 + slope_max);
    let m_tol = 1e-3 * m0.max_abs();
    if slope[nx].abs() > slope_tol {
        return Err(MfgError::InvalidData(format!("terminal slope at x = L is {:e}, expected 0", slope[nx])));
    }
    if m0.values[nx] > m_tol {
        return Err(MfgError::InvalidData(format!("initial density at x = L is {:e}, expected 0", m0.values[nx])));
    }
    if m0.values[0] > m_tol {
        return Err(MfgError::InvalidData(format!("initial density at x = 0 is {:e}, expected 0", m0.values[0])));
    }
    match bc {
        BoundarySpec::NeumannReflection => {
            if slope[0].abs() > slope_tol {
                return Err(MfgError::InvalidData(format!("terminal slope at x = 0 is {:e}, expected 0", slope[0])));
            }
        }
        BoundarySpec::DirichletLeft => {
            if u_t.values[0].abs() > 1e-8 * (1.0 + u_t.max_abs()) {
                return Err(MfgError::InvalidData(format!("terminal value at x = 0 is {:e}, expected 0", u_t.values[0])));
            }
        }
    }
    Ok(())
}

fn initial_levels(opts: &FixedPointOptions, params: &MarketParams, grid: &Grid) -> Result<Vec<f64>> {
    let n = grid.nt + 1;
    match &opts.initial_f {
        InitialPath::ConstantB => Ok(vec![params.b; n]),
        InitialPath::Constant(v) if v.is_finite() => Ok(vec![*v; n]),
        InitialPath::Constant(v) => Err(invalid("initial_f", format!("non-finite level {v}"))),
        InitialPath::Custom(values) => {
            if values.len() != n {
                return Err(MfgError::GridMismatch(format!("initial path has {} entries, grid expects {n}", values.len())));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(invalid("initial_f", "contains non-finite entries"));
            }
            Ok(values.clone())
        }
    }
}

/// `(u, u_x, m, f_new)` produced by one sweep from the level `f`.
struct Sweep {
    u: ScalarField,
    u_x: ScalarField,
    m: ScalarField,
    f_new: Vec<f64>,
}

struct Problem<'a> {
    params: &'a MarketParams,
    m0: &'a TimeSlice,
    u_t: &'a TimeSlice,
    grid: &'a Grid,
    bc: BoundarySpec,
    opts: &'a FixedPointOptions,
}

impl Problem<'_> {
    fn sweep(&self, f: &[f64]) -> Result<Sweep> {
        let grid = *self.grid;
        let path = MarketPath::from_levels(grid, f.to_vec(), self.params)?;
        let u = solve_hjb(&path, self.u_t, self.params, self.grid, self.bc, &self.opts.hjb)?;
        let u_x = derivative_field(&u, FieldRole::Control)?;
        let q = u_x.map_rows(FieldRole::Control, |k, row| row.iter().map(|d| 0.5 * (f[k] - d)).collect());
        let m = solve_fp(&q, self.m0, self.params, self.grid, self.bc, &self.opts.fp)?;
        let dx = grid.dx();
        let f_new = (0..=grid.nt)
            .map(|k| coupling_level(u_x.row(k), m.row(k), dx, self.params, self.bc))
            .collect();
        Ok(Sweep { u, u_x, m, f_new })
    }

    /// Packages a sweep with `q = G(u_x, m)` and the report fields.
    fn assemble(&self, sweep: Sweep, previous: Option<&Sweep>, history: Vec<f64>, started: Instant) -> Result<MfgSolution> {
        let grid = *self.grid;
        let dx = grid.dx();
        let path = MarketPath::from_fields(&sweep.u_x, &sweep.m, self.params, self.bc)?;
        let q = sweep
            .u_x
            .map_rows(FieldRole::Control, |k, row| row.iter().map(|d| 0.5 * (path.f[k] - d)).collect());

        let masses: Vec<f64> = (0..=grid.nt).map(|k| trapezoid_raw(sweep.m.row(k), dx)).collect();
        let (mass_error_max, mass_conserved) = match self.bc {
            BoundarySpec::NeumannReflection => {
                let e = masses.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
                (e, e <= MASS_TOL)
            }
            BoundarySpec::DirichletLeft => {
                let rise = masses.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
                (rise, rise <= MASS_TOL)
            }
        };
        let u_min = sweep.u.min();
        let gradient_max = sweep.u_x.max_abs();
        let slope_max = derivative_raw(&self.u_t.values, dx).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let gradient_bound = (self.params.r * grid.horizon).exp() * slope_max;
        let energy_norm = left_point_time(&grid, |k| {
            let e: Vec<f64> = sweep.u_x.row(k).iter().zip(sweep.m.row(k)).map(|(d, m)| m * d * d).collect();
            trapezoid_raw(&e, dx)
        });
        let energy_gap_last = match previous {
            Some(prev) => gap_terms(
                (&sweep.u_x, &sweep.m),
                (&prev.u_x, &prev.m),
                self.params,
                self.bc,
            ),
            None => (0.0, 0.0),
        };
        let flags = InvariantFlags {
            mass_conserved,
            u_nonnegative: u_min >= -crate::geometry::NEGATIVITY_TOL,
            gradient_bound: gradient_max <= gradient_bound * (1.0 + 1e-6) + GRADIENT_FLOOR,
            energy_gap_zero: energy_gap_last.0 <= ENERGY_GAP_TOL && energy_gap_last.1 <= ENERGY_GAP_TOL,
        };
        let report = SolveReport {
            iterations: history.len(),
            residual_history: history,
            invariant_flags: flags,
            wall_time: started.elapsed().as_secs_f64(),
            mass_error_max,
            u_min,
            gradient_max,
            gradient_bound,
            energy_norm,
            energy_gap_last,
        };
        Ok(MfgSolution {
            u: sweep.u,
            m: sweep.m,
            q,
            path,
            report,
            params: *self.params,
            bc: self.bc,
            initial_density: self.m0.clone(),
            terminal_value: self.u_t.clone(),
        })
    }
}

pub fn solve_mfg(
    params: &MarketParams,
    m0: &TimeSlice,
    u_t: &TimeSlice,
    grid: &Grid,
    bc: BoundarySpec,
    opts: &FixedPointOptions,
) -> Result<MfgSolution> {
    let started = Instant::now();
    opts.validate()?;
    validate_data(params, m0, u_t, grid, bc)?;
    let problem = Problem { params, m0, u_t, grid, bc, opts };

    let mut f = initial_levels(opts, params, grid)?;
    let mut history = Vec::new();
    let mut last = None;
    for _ in 0..opts.max_iter {
        let sweep = problem.sweep(&f)?;
        let residual = sup_diff(&sweep.f_new, &f);
        history.push(residual);
        if !residual.is_finite() {
            break;
        }
        if residual <= opts.tol {
            let converged = problem.sweep(&sweep.f_new)?;
            return problem.assemble(converged, Some(&sweep), history, started);
        }
        let theta = opts.damping;
        for (old, new) in f.iter_mut().zip(&sweep.f_new) {
            *old = theta * new + (1.0 - theta) * *old;
        }
        last = Some(sweep);
    }
    let residual = history.last().copied().unwrap_or(f64::INFINITY);
    let iterations = history.len();
    let partial = match last {
        Some(sweep) => problem.assemble(sweep, None, history, started)?,
        None => problem.assemble(problem.sweep(&f)?, None, history, started)?,
    };
    Err(MfgError::NoConvergence { iterations, residual, partial: Box::new(partial) })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| {
        let d = (x - y).abs();
        if d.is_nan() {
            f64::NAN
        } else {
            acc.max(d)
        }
    })
}

/// `sum_{k < nt} dt e^{-r t_k} g(k)`.
fn discounted_left_point(grid: &Grid, r: f64, g: impl Fn(usize) -> f64) -> f64 {
    let dt = grid.dt();
    (0..grid.nt).map(|k| dt * (-r * grid.t(k)).exp() * g(k)).sum()
}

fn left_point_time(grid: &Grid, g: impl Fn(usize) -> f64) -> f64 {
    discounted_left_point(grid, 0.0, g)
}

/// Energy terms for two `(u_x, m)` states; `G` and its mean are
/// recomputed from the fields.
fn gap_terms(s1: (&ScalarField, &ScalarField), s2: (&ScalarField, &ScalarField), params: &MarketParams, bc: BoundarySpec) -> (f64, f64) {
    let grid = s1.0.grid;
    let dx = grid.dx();
    let g_of = |ux: &[f64], m: &[f64]| -> Vec<f64> {
        let level = coupling_level(ux, m, dx, params, bc);
        ux.iter().map(|d| 0.5 * (level - d)).collect()
    };
    let mut term1 = 0.0;
    let mut term2 = 0.0;
    let dt = grid.dt();
    for k in 0..grid.nt {
        let w = dt * (-params.r * grid.t(k)).exp();
        let (ux1, m1, ux2, m2) = (s1.0.row(k), s1.1.row(k), s2.0.row(k), s2.1.row(k));
        let (g1, g2) = (g_of(ux1, m1), g_of(ux2, m2));
        let sq: Vec<f64> = (0..=grid.nx).map(|i| (g1[i] - g2[i]).powi(2) * (m1[i] + m2[i])).collect();
        term1 += w * trapezoid_raw(&sq, dx);
        let mean = |g: &[f64], m: &[f64]| {
            let p: Vec<f64> = g.iter().zip(m).map(|(a, b)| a * b).collect();
            trapezoid_raw(&p, dx)
        };
        term2 += w * (mean(&g1, m1) - mean(&g2, m2)).powi(2);
    }
    // 2c/(1-c) and the absorbing-model weight both reduce to epsilon
    (term1, params.epsilon * term2)
}

fn gap_between(sol1: &MfgSolution, sol2: &MfgSolution, params: &MarketParams, grid: &Grid, bc: BoundarySpec) -> Result<(f64, f64)> {
    grid.ensure_same(&sol1.u.grid)?;
    grid.ensure_same(&sol2.u.grid)?;
    let ux1 = derivative_field(&sol1.u, FieldRole::Control)?;
    let ux2 = derivative_field(&sol2.u, FieldRole::Control)?;
    Ok(gap_terms((&ux1, &sol1.m), (&ux2, &sol2.m), params, bc))
}

/// `(iint e^{-rt} (G1 - G2)^2 (m1 + m2), 2c/(1-c) int e^{-rt} (Gbar1 - Gbar2)^2)`
/// for the reflecting model.
pub fn energy_gap(sol1: &MfgSolution, sol2: &MfgSolution, params: &MarketParams, grid: &Grid) -> Result<(f64, f64)> {
    gap_between(sol1, sol2, params, grid, BoundarySpec::NeumannReflection)
}

/// Absorbing-model counterpart, with second weight `epsilon`. The discount
/// rate is taken from the first solution.
pub fn energy_gap_dirichlet(sol1: &MfgSolution, sol2: &MfgSolution, epsilon: f64, grid: &Grid) -> Result<(f64, f64)> {
    let base = sol1.params;
    let params = crate::market::derive_params(epsilon, base.r, base.sigma, base.horizon, base.length)?;
    gap_between(sol1, sol2, &params, grid, BoundarySpec::DirichletLeft)
}

/// `(hjb_residual, weak FP residual over the test battery)`.
pub fn system_residuals(sol: &MfgSolution, params: &MarketParams, grid: &Grid) -> (f64, f64) {
    let hjb = hjb_residual(&sol.u, &sol.path, params, grid);
    let fp = fp_weak_residual(&sol.m, &sol.q, &sol.initial_density, params, sol.bc);
    (hjb, fp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::trapezoid;
    use crate::market::{coupling_g, derive_params};
    use std::f64::consts::PI;

    pub(crate) fn bump(g: Grid) -> TimeSlice {
        let s = TimeSlice::from_fn(g, |x| {
            let z = (x - 0.5) / 0.2;
            if z.abs() < 0.5 {
                (PI * z).cos().powi(2)
            } else {
                0.0
            }
        });
        let mass = trapezoid(&s);
        TimeSlice { grid: g, values: s.values.iter().map(|v| v / mass).collect() }
    }

    fn ramp(g: Grid) -> TimeSlice {
        TimeSlice::from_fn(g, |x| 0.25 * (x - (2.0 * PI * x).sin() / (2.0 * PI)))
    }

    fn setup(nx: usize, nt: usize, eps: f64, sigma: f64) -> (Grid, MarketParams) {
        (Grid::new(nx, nt, 1.0, 1.0).unwrap(), derive_params(eps, 0.5, sigma, 1.0, 1.0).unwrap())
    }

    fn solve(g: Grid, p: MarketParams, u_t: &TimeSlice, opts: &FixedPointOptions) -> MfgSolution {
        solve_mfg(&p, &bump(g), u_t, &g, BoundarySpec::NeumannReflection, opts).unwrap()
    }

    #[test]
    fn decoupled_case_matches_pipeline() {
        let (g, p) = setup(60, 120, 0.0, 0.5);
        let u_t = ramp(g);
        let sol = solve(g, p, &u_t, &FixedPointOptions::default());
        assert_eq!(sol.report.iterations, 1);
        let path = MarketPath::constant(g, 1.0, 0.0);
        let u = solve_hjb(&path, &u_t, &p, &g, BoundarySpec::NeumannReflection, &HjbOptions::default()).unwrap();
        let ux = derivative_field(&u, FieldRole::Control).unwrap();
        let q = ux.map_rows(FieldRole::Control, |_, row| row.iter().map(|d| 0.5 * (1.0 - d)).collect());
        let m = solve_fp(&q, &bump(g), &p, &g, BoundarySpec::NeumannReflection, &FpOptions::default()).unwrap();
        assert!(sol.u.sup_distance(&u).unwrap() <= 1e-10);
        assert!(sol.m.sup_distance(&m).unwrap() <= 1e-10);
        assert!(sol.report.invariant_flags.all());
    }

    #[test]
    fn zero_terminal_data_keeps_level_at_b() {
        let (g, p) = setup(50, 100, 2.0, 0.5);
        let sol = solve(g, p, &TimeSlice::constant(g, 0.0), &FixedPointOptions::default());
        assert!(sol.u.min() >= 0.0);
        assert!(sol.path.f.iter().all(|f| (f - p.b).abs() < 1e-12));
    }

    #[test]
    fn distinct_initializations_agree() {
        for sigma in [0.5, 0.0] {
            let (g, p) = setup(50, 100, 2.0, sigma);
            let u_t = ramp(g);
            let opts = FixedPointOptions { tol: 1e-10, ..Default::default() };
            let a = solve(g, p, &u_t, &opts);
            let b = solve(g, p, &u_t, &FixedPointOptions { initial_f: InitialPath::Constant(p.b + 0.3 * p.c), ..opts.clone() });
            assert!(a.path.sup_distance(&b.path) <= 10.0 * opts.tol);
            assert!(a.u.sup_distance(&b.u).unwrap() <= 1e-8);
            assert!(a.m.sup_distance(&b.m).unwrap() <= 1e-8);
            let (t1, t2) = energy_gap(&a, &b, &p, &g).unwrap();
            assert!(t1 <= 1e-6 && t2 <= 1e-6);
            assert!(a.report.invariant_flags.all(), "{:?}", a.report);
        }
    }

    #[test]
    fn stored_control_matches_coupling() {
        let (g, p) = setup(50, 100, 1.0, 0.3);
        let sol = solve(g, p, &ramp(g), &FixedPointOptions::default());
        let ux = derivative_field(&sol.u, FieldRole::Control).unwrap();
        for k in 0..=g.nt {
            let (gk, _) = coupling_g(&ux.slice(k), &sol.m.slice(k), &p).unwrap();
            for i in 0..=g.nx {
                assert!((gk.values[i] - sol.q.get(k, i)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn level_stays_within_gradient_bound() {
        let (g, p) = setup(50, 100, 2.0, 0.2);
        let sol = solve(g, p, &ramp(g), &FixedPointOptions::default());
        let bound = p.c * sol.report.gradient_bound + 1e-9;
        assert!(sol.path.f.iter().all(|f| (f - p.b).abs() <= bound));
        assert!(sol.report.energy_norm <= sol.report.gradient_max.powi(2) * g.horizon + 1e-12);
    }

    #[test]
    fn energy_gap_examples() {
        let (g, p) = setup(40, 80, 1.0, 0.5);
        let sol = solve(g, p, &ramp(g), &FixedPointOptions::default());
        assert_eq!(energy_gap(&sol, &sol, &p, &g).unwrap(), (0.0, 0.0));
        assert_eq!(energy_gap_dirichlet(&sol, &sol, 1.0, &g).unwrap(), (0.0, 0.0));
        let mut other = sol.clone();
        let pert = ScalarField::from_fn(g, FieldRole::ValueFunction, |_, x| 0.1 * (PI * x).sin());
        for (v, d) in other.u.values_mut().iter_mut().zip(pert.values()) {
            *v += d;
        }
        let (t1, t2) = energy_gap(&sol, &other, &p, &g).unwrap();
        assert!(t1 > 0.0 && t2 >= 0.0);
        let (d1, d2) = energy_gap_dirichlet(&sol, &other, 0.0, &g).unwrap();
        assert!(d1 > 0.0);
        assert_eq!(d2, 0.0);
        let small = Grid::new(20, 80, 1.0, 1.0).unwrap();
        assert!(matches!(energy_gap(&sol, &other, &p, &small), Err(MfgError::GridMismatch(_))));
    }

    #[test]
    fn residuals_shrink_under_refinement() {
        for sigma in [0.8, 0.3] {
            let mut prev = (f64::INFINITY, f64::INFINITY);
            for (nx, nt) in [(160, 320), (320, 640)] {
                let (g, p) = setup(nx, nt, 1.0, sigma);
                let sol = solve(g, p, &ramp(g), &FixedPointOptions::default());
                let (h, w) = system_residuals(&sol, &p, &g);
                assert!(h < prev.0 / 1.8 && w < prev.1 / 1.8, "{sigma} {nx}: {h} {w} vs {prev:?}");
                prev = (h, w);
            }
        }
    }

    #[test]
    fn zero_density_residual_is_initial_term() {
        let (g, p) = setup(40, 80, 1.0, 0.5);
        let mut sol = solve(g, p, &ramp(g), &FixedPointOptions::default());
        sol.m = ScalarField::zeros(g, FieldRole::Density);
        let (_, w) = system_residuals(&sol, &p, &g);
        let expected = crate::weak_form::test_battery(&g, BoundarySpec::NeumannReflection)
            .iter()
            .map(|phi| trapezoid(&sol.initial_density.product(&TimeSlice::from_fn(g, |x| phi.eval(0.0, x).phi))).abs())
            .fold(0.0, f64::max);
        assert!((w - expected).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_data_and_options() {
        let (g, p) = setup(40, 80, 1.0, 0.5);
        let opts = FixedPointOptions::default();
        let neg = TimeSlice::from_fn(g, |x| x - 0.5);
        assert!(matches!(
            solve_mfg(&p, &bump(g), &neg, &g, BoundarySpec::NeumannReflection, &opts),
            Err(MfgError::InvalidData(_))
        ));
        let steep = TimeSlice::from_fn(g, |x| x);
        assert!(matches!(
            solve_mfg(&p, &bump(g), &steep, &g, BoundarySpec::NeumannReflection, &opts),
            Err(MfgError::InvalidData(_))
        ));
        let bad = FixedPointOptions { damping: 0.0, ..Default::default() };
        assert!(solve_mfg(&p, &bump(g), &ramp(g), &g, BoundarySpec::NeumannReflection, &bad).is_err());
        let short = FixedPointOptions { max_iter: 1, tol: 1e-14, ..Default::default() };
        match solve_mfg(&p, &bump(g), &ramp(g), &g, BoundarySpec::NeumannReflection, &short) {
            Err(MfgError::NoConvergence { iterations, partial, .. }) => {
                assert_eq!(iterations, 1);
                assert_eq!(partial.report.residual_history.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn absorbing_variant_converges() {
        let mut prev = f64::INFINITY;
        for (nx, nt) in [(100, 200), (200, 400)] {
            let (g, p) = setup(nx, nt, 1.0, 0.5);
            let sol = solve_mfg(&p, &bump(g), &ramp(g), &g, BoundarySpec::DirichletLeft, &FixedPointOptions::default()).unwrap();
            assert!(sol.report.invariant_flags.all(), "{:?}", sol.report);
            assert!((1..=g.nt).all(|k| sol.u.get(k, 0) == 0.0 && sol.m.get(k, 0) == 0.0));
            let (_, w) = system_residuals(&sol, &p, &g);
            assert!(w < prev / 1.8, "{nx}: {w} vs {prev}");
            prev = w;
        }
    }
}
