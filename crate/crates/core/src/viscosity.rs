//! Vanishing-viscosity study: solves along a decreasing sequence of
//! diffusion levels and measures the quantities whose bounds must not
//! depend on `sigma` (time regularity of `u`, Hoelder continuity of `m` in
//! the Wasserstein-1 distance, equicontinuity of the market level, energy
//! norms), plus the weak subsolution test for the first-order limit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, MfgError, Result};
use crate::fixed_point::{solve_mfg, FixedPointOptions, MfgSolution};
use crate::geometry::{cdf_raw, derivative_field, derivative_raw, trapezoid_raw, w1_from_cdfs, FieldRole, Grid, ScalarField, TimeSlice};
use crate::market::{BoundarySpec, MarketParams, MarketPath, UNIT_MASS_TOL};
use crate::weak_form::{nonnegative_battery, test_battery, trapezoid_time, TestFunction};

/// Random time pairs added to the structured pairs in the Hoelder samplers.
pub const RANDOM_PAIRS: usize = 1000;
/// Lags (in time steps) of [`f_equicontinuity_modulus`].
pub const MODULUS_LAGS: [usize; 4] = [1, 2, 4, 8];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub fixed_point: FixedPointOptions,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { fixed_point: FixedPointOptions::default(), seed: 0, parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyNorms {
    pub ut_l2: Vec<f64>,
    pub sigma2_uxx_l2: Vec<f64>,
    pub fisher_like: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub sigmas: Vec<f64>,
    pub solutions: Vec<MfgSolution>,
    /// False where the fixed point stopped at `max_iter`; the stored
    /// solution is then the last iterate.
    pub converged: Vec<bool>,
    /// `max_k d1(m_i(t_k), m_{i+1}(t_k))`.
    pub d1_consecutive: Vec<f64>,
    /// `sup_k |f_i - f_{i+1}|`.
    pub f_sup_diffs: Vec<f64>,
    /// `max_k d1(m_i(t_k), m_last(t_k))` for every entry but the last.
    pub d1_to_last: Vec<f64>,
    pub f_to_last: Vec<f64>,
    /// Weak distance of `m u_x` to the last entry.
    pub momentum_to_last: Vec<f64>,
    /// Hoelder-1/2 quotient of `t -> m(t)` in `d1`, per entry.
    pub holder_constants: Vec<f64>,
    /// Hoelder-1/3 quotient of `u` in time, per entry.
    pub holder_u: Vec<f64>,
    pub f_modulus: Vec<Vec<f64>>,
    pub energy_norms: EnergyNorms,
}

fn validate_sigmas(sigmas: &[f64]) -> Result<()> {
    if sigmas.is_empty() {
        return Err(invalid("sigmas", "list is empty"));
    }
    if sigmas.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(invalid("sigmas", "entries must lie in [0, 1]"));
    }
    if sigmas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("sigmas", "must be strictly decreasing"));
    }
    Ok(())
}

fn solve_entry(
    base: &MarketParams,
    sigma: f64,
    m0: &TimeSlice,
    u_t: &TimeSlice,
    grid: &Grid,
    bc: BoundarySpec,
    opts: &FixedPointOptions,
) -> Result<(MfgSolution, bool)> {
    let params = base.with_sigma(sigma)?;
    match solve_mfg(&params, m0, u_t, grid, bc, opts) {
        Ok(sol) => Ok((sol, true)),
        Err(MfgError::NoConvergence { partial, .. }) => Ok((*partial, false)),
        Err(e) => Err(e),
    }
}

fn cdfs(m: &ScalarField) -> Vec<Vec<f64>> {
    let dx = m.grid.dx();
    (0..=m.grid.nt).map(|k| cdf_raw(m.row(k), dx)).collect()
}

fn max_d1(a: &[Vec<f64>], b: &[Vec<f64>], dx: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| w1_from_cdfs(x, y, dx)).fold(0.0, f64::max)
}

pub fn sigma_sweep(
    params_base: &MarketParams,
    sigmas: &[f64],
    m0: &TimeSlice,
    u_t: &TimeSlice,
    grid: &Grid,
    bc: BoundarySpec,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    validate_sigmas(sigmas)?;
    let solve = |s: &f64| solve_entry(params_base, *s, m0, u_t, grid, bc, &opts.fixed_point);
    let entries: Vec<(MfgSolution, bool)> = if opts.parallel {
        sigmas.par_iter().map(solve).collect::<Result<_>>()?
    } else {
        sigmas.iter().map(solve).collect::<Result<_>>()?
    };
    let (solutions, converged): (Vec<_>, Vec<_>) = entries.into_iter().unzip();

    let dx = grid.dx();
    let all_cdfs: Vec<Vec<Vec<f64>>> = solutions.iter().map(|s| cdfs(&s.m)).collect();
    let n = solutions.len();
    let last = n - 1;
    let mut out = SweepResult {
        sigmas: sigmas.to_vec(),
        converged,
        d1_consecutive: Vec::new(),
        f_sup_diffs: Vec::new(),
        d1_to_last: Vec::new(),
        f_to_last: Vec::new(),
        momentum_to_last: Vec::new(),
        holder_constants: Vec::new(),
        holder_u: Vec::new(),
        f_modulus: Vec::new(),
        energy_norms: EnergyNorms::default(),
        solutions: Vec::new(),
    };
    for i in 0..last {
        out.d1_consecutive.push(max_d1(&all_cdfs[i], &all_cdfs[i + 1], dx));
        out.f_sup_diffs.push(solutions[i].path.sup_distance(&solutions[i + 1].path));
        out.d1_to_last.push(max_d1(&all_cdfs[i], &all_cdfs[last], dx));
        out.f_to_last.push(solutions[i].path.sup_distance(&solutions[last].path));
        out.momentum_to_last.push(momentum_distance(&solutions[i], &solutions[last])?);
    }
    for sol in &solutions {
        let holder = match bc {
            BoundarySpec::NeumannReflection => holder_d1_quotient(&sol.m, grid, opts.seed)?,
            BoundarySpec::DirichletLeft => f64::NAN,
        };
        out.holder_constants.push(holder);
        out.holder_u.push(holder_time_quotient_u(&sol.u, grid, opts.seed));
        out.f_modulus.push(f_equicontinuity_modulus(&sol.path, grid));
        out.energy_norms.ut_l2.push(ut_l2_norm(&sol.u, grid));
        out.energy_norms.sigma2_uxx_l2.push(sigma2_uxx_l2(&sol.u, &sol.params, grid));
        out.energy_norms.fisher_like.push(fisher_like_norm(&sol.m, &sol.params, grid)?);
    }
    out.solutions = solutions;
    Ok(out)
}

/// Discrete `L^2(Q_T)` norm of the forward time differences of `u`.
pub fn ut_l2_norm(u: &ScalarField, grid: &Grid) -> f64 {
    let (dx, dt) = (grid.dx(), grid.dt());
    let mut total = 0.0;
    for k in 0..grid.nt {
        let sq: Vec<f64> = u.row(k + 1).iter().zip(u.row(k)).map(|(a, b)| ((a - b) / dt).powi(2)).collect();
        total += dt * trapezoid_raw(&sq, dx);
    }
    total.sqrt()
}

/// `sigma^2 ||u_xx||_2`, with reflection ghosts at the ends.
pub fn sigma2_uxx_l2(u: &ScalarField, params: &MarketParams, grid: &Grid) -> f64 {
    let (dx, dt, nx) = (grid.dx(), grid.dt(), grid.nx);
    let per_level: Vec<f64> = (0..=grid.nt)
        .map(|k| {
            let row = u.row(k);
            let sq: Vec<f64> = (0..=nx)
                .map(|i| {
                    let l = if i == 0 { row[1] } else { row[i - 1] };
                    let r = if i == nx { row[nx - 1] } else { row[i + 1] };
                    ((l - 2.0 * row[i] + r) / (dx * dx)).powi(2)
                })
                .collect();
            trapezoid_raw(&sq, dx)
        })
        .collect();
    params.sigma * params.sigma * trapezoid_time(&per_level, dt).sqrt()
}

/// Time-index pairs `(k1, k2)`, `k1 < k2`: the full-horizon pair, every
/// pair at a power-of-two lag, and seeded random pairs.
fn time_pairs(nt: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut pairs = vec![(0, nt)];
    let mut lag = 1;
    while lag <= nt {
        pairs.extend((0..=nt - lag).map(|k| (k, k + lag)));
        lag *= 2;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_PAIRS {
        let a = rng.gen_range(0..=nt);
        let b = rng.gen_range(0..=nt);
        if a != b {
            pairs.push((a.min(b), a.max(b)));
        }
    }
    pairs
}

/// Max over sampled time pairs and all nodes of
/// `|u(t1, x) - u(t2, x)| / |t1 - t2|^{1/3}`.
pub fn holder_time_quotient_u(u: &ScalarField, grid: &Grid, seed: u64) -> f64 {
    if grid.nt == 0 {
        return 0.0;
    }
    let dt = grid.dt();
    time_pairs(grid.nt, seed)
        .into_iter()
        .map(|(a, b)| {
            let diff = u.row(a).iter().zip(u.row(b)).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
            diff / (dt * (b - a) as f64).cbrt()
        })
        .fold(0.0, f64::max)
}

/// Max over sampled time pairs of `d1(m(t1), m(t2)) / |t1 - t2|^{1/2}`.
pub fn holder_d1_quotient(m: &ScalarField, grid: &Grid, seed: u64) -> Result<f64> {
    let dx = grid.dx();
    for k in 0..=grid.nt {
        let mass = trapezoid_raw(m.row(k), dx);
        if (mass - 1.0).abs() > UNIT_MASS_TOL {
            return Err(MfgError::MassMismatch { left: mass, right: 1.0 });
        }
    }
    if grid.nt == 0 {
        return Ok(0.0);
    }
    let c = cdfs(m);
    let dt = grid.dt();
    Ok(time_pairs(grid.nt, seed)
        .into_iter()
        .map(|(a, b)| w1_from_cdfs(&c[a], &c[b], dx) / (dt * (b - a) as f64).sqrt())
        .fold(0.0, f64::max))
}

/// `omega(l) = max_{j <= l} max_k |f(t_{k+j}) - f(t_k)|` for the lags in
/// [`MODULUS_LAGS`].
pub fn f_equicontinuity_modulus(path: &MarketPath, grid: &Grid) -> Vec<f64> {
    let f = &path.f;
    let nt = grid.nt.min(f.len().saturating_sub(1));
    let mut running: f64 = 0.0;
    let mut by_lag = vec![0.0; MODULUS_LAGS[MODULUS_LAGS.len() - 1] + 1];
    for (j, slot) in by_lag.iter_mut().enumerate().skip(1) {
        if j <= nt {
            running = running.max((0..=nt - j).map(|k| (f[k + j] - f[k]).abs()).fold(0.0, f64::max));
        }
        *slot = running;
    }
    MODULUS_LAGS.iter().map(|&l| by_lag[l]).collect()
}

/// `sigma^2 (iint m_x^2 / (m + 1))^{1/2}`.
pub fn fisher_like_norm(m: &ScalarField, params: &MarketParams, grid: &Grid) -> Result<f64> {
    if let Some(v) = m.values().iter().find(|v| **v < 0.0) {
        return Err(MfgError::NegativeDensity { index: 0, value: *v });
    }
    if params.sigma == 0.0 {
        return Ok(0.0);
    }
    let (dx, dt) = (grid.dx(), grid.dt());
    let per_level: Vec<f64> = (0..=grid.nt)
        .map(|k| {
            let row = m.row(k);
            let mx = derivative_raw(row, dx);
            let q: Vec<f64> = mx.iter().zip(row).map(|(d, v)| d * d / (v + 1.0)).collect();
            trapezoid_raw(&q, dx)
        })
        .collect();
    Ok(params.sigma * params.sigma * trapezoid_time(&per_level, dt).sqrt())
}

/// Weak subsolution functional
/// `e^{-rT} int u(T) phi(T) - int u(0) phi(0) - iint e^{-rt} u phi_t + 1/4 iint e^{-rt} (f - u_x)^2 phi`
/// for one nonnegative test function.
pub fn subsolution_functional(u: &ScalarField, path: &MarketPath, params: &MarketParams, phi: &TestFunction) -> f64 {
    let grid = u.grid;
    let (dx, dt) = (grid.dx(), grid.dt());
    let xs = grid.xs();
    let per_level: Vec<f64> = (0..=grid.nt)
        .map(|k| {
            let t = grid.t(k);
            let row = u.row(k);
            let ux = derivative_raw(row, dx);
            let integrand: Vec<f64> = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let v = phi.eval(t, x);
                    let gap = path.f[k] - ux[i];
                    -row[i] * v.phi_t + 0.25 * gap * gap * v.phi
                })
                .collect();
            (-params.r * t).exp() * trapezoid_raw(&integrand, dx)
        })
        .collect();
    let boundary = |k: usize| -> f64 {
        let t = grid.t(k);
        let prod: Vec<f64> = xs.iter().zip(u.row(k)).map(|(&x, v)| v * phi.eval(t, x).phi).collect();
        (-params.r * t).exp() * trapezoid_raw(&prod, dx)
    };
    boundary(grid.nt) - boundary(0) + trapezoid_time(&per_level, dt)
}

/// Max of [`subsolution_functional`] over the nonnegative battery.
pub fn viscosity_subsolution_check(u: &ScalarField, path: &MarketPath, params: &MarketParams, grid: &Grid) -> f64 {
    nonnegative_battery(grid)
        .iter()
        .map(|phi| subsolution_functional(u, path, params, phi))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Max over the test battery of `|iint phi (m1 u1_x - m2 u2_x)|`.
pub fn momentum_distance(a: &MfgSolution, b: &MfgSolution) -> Result<f64> {
    let grid = a.grid();
    grid.ensure_same(&b.grid())?;
    let (dx, dt) = (grid.dx(), grid.dt());
    let ux_a = derivative_field(&a.u, FieldRole::Control)?;
    let ux_b = derivative_field(&b.u, FieldRole::Control)?;
    let xs = grid.xs();
    Ok(test_battery(&grid, a.bc)
        .iter()
        .map(|phi| {
            let per_level: Vec<f64> = (0..=grid.nt)
                .map(|k| {
                    let t = grid.t(k);
                    let diff: Vec<f64> = (0..=grid.nx)
                        .map(|i| phi.eval(t, xs[i]).phi * (a.m.get(k, i) * ux_a.get(k, i) - b.m.get(k, i) * ux_b.get(k, i)))
                        .collect();
                    trapezoid_raw(&diff, dx)
                })
                .collect();
            trapezoid_time(&per_level, dt).abs()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::{solve_fp, FpOptions};
    use crate::geometry::trapezoid;
    use crate::hjb::{solve_hjb, HjbOptions};
    use crate::market::derive_params;
    use crate::weak_form::SpaceProfile;
    use std::f64::consts::PI;

    fn bump(g: Grid, center: f64, width: f64) -> TimeSlice {
        let s = TimeSlice::from_fn(g, |x| {
            let z = (x - center) / width;
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

    fn ode_solution(k0: f64, b: f64, r: f64, tau: f64) -> f64 {
        k0 * (-r * tau).exp() + b * b / (4.0 * r) * (1.0 - (-r * tau).exp())
    }

    #[test]
    fn ut_norm_examples() {
        let g = Grid::new(50, 100, 1.0, 2.0).unwrap();
        assert_eq!(ut_l2_norm(&ScalarField::from_fn(g, FieldRole::ValueFunction, |_, x| x * x), &g), 0.0);
        let u = ScalarField::from_fn(g, FieldRole::ValueFunction, |t, x| (2.0 - t) * (PI * x).cos());
        let expected = (0.5f64).sqrt() * 2.0f64.sqrt();
        assert!((ut_l2_norm(&u, &g) - expected).abs() < 1e-3);
    }

    #[test]
    fn holder_u_examples() {
        let g = Grid::new(10, 64, 1.0, 1.0).unwrap();
        assert_eq!(holder_time_quotient_u(&ScalarField::zeros(g, FieldRole::ValueFunction), &g, 1), 0.0);
        let u = ScalarField::from_fn(g, FieldRole::ValueFunction, |t, _| t);
        assert!((holder_time_quotient_u(&u, &g, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holder_d1_examples() {
        let g = Grid::new(400, 100, 1.0, 0.2).unwrap();
        let m0 = bump(g, 0.5, 0.2);
        let still = ScalarField::from_fn(g, FieldRole::Density, |_, x| m0.values[(x / g.dx()).round() as usize]);
        assert_eq!(holder_d1_quotient(&still, &g, 3).unwrap(), 0.0);
        let v = 0.5;
        let moving = ScalarField::from_fn(g, FieldRole::Density, |t, x| {
            let z = (x + v * t - 0.5) / 0.2;
            if z.abs() < 0.5 {
                (PI * z).cos().powi(2) / 0.1
            } else {
                0.0
            }
        });
        let h = holder_d1_quotient(&moving, &g, 3).unwrap();
        assert!(h <= v * g.horizon.sqrt() * (1.0 + 1e-3), "{h}");
        assert!((h - v * g.horizon.sqrt()).abs() < 1e-3);
        let half = ScalarField::from_fn(g, FieldRole::Density, |_, _| 0.5);
        assert!(matches!(holder_d1_quotient(&half, &g, 3), Err(MfgError::MassMismatch { .. })));
    }

    #[test]
    fn modulus_examples() {
        let g = Grid::new(4, 100, 1.0, 1.0).unwrap();
        let p = derive_params(1.0, 0.5, 0.5, 1.0, 1.0).unwrap();
        let flat = MarketPath::constant(g, 0.7, 1.0);
        assert_eq!(f_equicontinuity_modulus(&flat, &g), vec![0.0; 4]);
        let lin = MarketPath::from_levels(g, g.ts(), &p).unwrap();
        let w = f_equicontinuity_modulus(&lin, &g);
        for (l, v) in MODULUS_LAGS.iter().zip(&w) {
            assert!((v - *l as f64 * g.dt()).abs() < 1e-12);
        }
    }

    #[test]
    fn fisher_examples() {
        let g = Grid::new(40, 40, 1.0, 1.0).unwrap();
        let uniform = ScalarField::from_fn(g, FieldRole::Density, |_, _| 1.0);
        let p = derive_params(1.0, 0.5, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(fisher_like_norm(&uniform, &p, &g).unwrap(), 0.0);
        let bumpy = ScalarField::from_fn(g, FieldRole::Density, |_, x| 1.0 + (PI * x).cos());
        assert!(fisher_like_norm(&bumpy, &p, &g).unwrap() > 0.0);
        assert_eq!(fisher_like_norm(&bumpy, &p.with_sigma(0.0).unwrap(), &g).unwrap(), 0.0);
    }

    #[test]
    fn subsolution_examples() {
        let g = Grid::new(50, 400, 1.0, 1.0).unwrap();
        let p = derive_params(1.0, 0.5, 0.0, 1.0, 1.0).unwrap();
        let path = MarketPath::constant(g, p.b, 1.0);
        let exact = ScalarField::from_fn(g, FieldRole::ValueFunction, |t, _| ode_solution(0.5, p.b, p.r, 1.0 - t));
        let base = viscosity_subsolution_check(&exact, &path, &p, &g);
        assert!(base.abs() < 1e-5, "{base}");

        let zero_phi = TestFunction { space: SpaceProfile::Cosine(0), time_power: 1, length: 1.0, horizon: 1.0 };
        let u0 = ScalarField::zeros(g, FieldRole::ValueFunction);
        let flat = MarketPath::constant(g, 0.0, 1.0);
        assert_eq!(subsolution_functional(&u0, &flat, &p, &zero_phi), 0.0);

        let delta = 0.1;
        let lifted = exact.map_rows(FieldRole::ValueFunction, |k, row| {
            row.iter().map(|v| v + delta * (1.0 - g.t(k))).collect()
        });
        for phi in nonnegative_battery(&g) {
            let change = subsolution_functional(&lifted, &path, &p, &phi) - subsolution_functional(&exact, &path, &p, &phi);
            let weight: Vec<f64> = (0..=g.nt)
                .map(|k| {
                    let t = g.t(k);
                    let s = TimeSlice::from_fn(g, |x| phi.eval(t, x).phi);
                    (-p.r * t).exp() * (1.0 + p.r * (1.0 - t)) * trapezoid(&s)
                })
                .collect();
            let expected = -delta * trapezoid_time(&weight, g.dt());
            assert!((change - expected).abs() < 1e-5, "{change} vs {expected}");
        }
    }

    #[test]
    fn sweep_with_decoupled_market_matches_pipeline() {
        let g = Grid::new(60, 120, 1.0, 1.0).unwrap();
        let p = derive_params(0.0, 0.5, 0.5, 1.0, 1.0).unwrap();
        let (m0, u_t) = (bump(g, 0.5, 0.2), ramp(g));
        let sweep = sigma_sweep(&p, &[0.5, 0.25, 0.125], &m0, &u_t, &g, BoundarySpec::NeumannReflection, &SweepOptions::default())
            .unwrap();
        assert_eq!(sweep.solutions.len(), 3);
        assert_eq!(sweep.d1_consecutive.len(), 2);
        for (sigma, sol) in sweep.sigmas.iter().zip(&sweep.solutions) {
            let ps = p.with_sigma(*sigma).unwrap();
            let path = MarketPath::constant(g, 1.0, 0.0);
            let u = solve_hjb(&path, &u_t, &ps, &g, BoundarySpec::NeumannReflection, &HjbOptions::default()).unwrap();
            let ux = derivative_field(&u, FieldRole::Control).unwrap();
            let q = ux.map_rows(FieldRole::Control, |_, row| row.iter().map(|d| 0.5 * (1.0 - d)).collect());
            let m = solve_fp(&q, &m0, &ps, &g, BoundarySpec::NeumannReflection, &FpOptions::default()).unwrap();
            assert!(sol.u.sup_distance(&u).unwrap() <= 1e-10);
            assert!(sol.m.sup_distance(&m).unwrap() <= 1e-10);
        }
        assert!(sweep.converged.iter().all(|&c| c));
    }

    #[test]
    fn consecutive_distances_shrink_along_halving_sequence() {
        let g = Grid::new(100, 200, 1.0, 1.0).unwrap();
        let p = derive_params(1.0, 0.5, 0.5, 1.0, 1.0).unwrap();
        let sigmas = [0.5, 0.25, 0.125, 0.0625];
        let sweep = sigma_sweep(&p, &sigmas, &bump(g, 0.5, 0.2), &ramp(g), &g, BoundarySpec::NeumannReflection, &SweepOptions::default())
            .unwrap();
        for w in sweep.d1_consecutive.windows(2) {
            assert!(w[1] < w[0], "{:?}", sweep.d1_consecutive);
        }
        assert_eq!(sweep.holder_constants.len(), 4);
        assert_eq!(sweep.energy_norms.fisher_like.len(), 4);
    }

    #[test]
    fn sweep_edge_cases() {
        let g = Grid::new(30, 60, 1.0, 1.0).unwrap();
        let p = derive_params(1.0, 0.5, 0.5, 1.0, 1.0).unwrap();
        let (m0, u_t) = (bump(g, 0.5, 0.2), ramp(g));
        let one = sigma_sweep(&p, &[0.3], &m0, &u_t, &g, BoundarySpec::NeumannReflection, &SweepOptions::default()).unwrap();
        assert_eq!(one.solutions.len(), 1);
        assert!(one.d1_consecutive.is_empty() && one.f_sup_diffs.is_empty());
        for bad in [&[][..], &[0.2, 0.3][..], &[0.5, 0.5][..], &[1.5][..]] {
            assert!(sigma_sweep(&p, bad, &m0, &u_t, &g, BoundarySpec::NeumannReflection, &SweepOptions::default()).is_err());
        }
        let serial = SweepOptions { parallel: false, ..Default::default() };
        let a = sigma_sweep(&p, &[0.4, 0.0], &m0, &u_t, &g, BoundarySpec::NeumannReflection, &serial).unwrap();
        let b = sigma_sweep(&p, &[0.4, 0.0], &m0, &u_t, &g, BoundarySpec::NeumannReflection, &SweepOptions::default()).unwrap();
        assert_eq!(a.solutions[1].u, b.solutions[1].u);
        assert_eq!(a.holder_constants, b.holder_constants);
    }
}
