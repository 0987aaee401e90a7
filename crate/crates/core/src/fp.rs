//! Forward solver for `m_t - (sigma^2/2) m_xx - (q m)_x = 0`.
//!
//! Node-centred finite volumes (half cells at the two ends) with interface
//! fluxes `F = (sigma^2/2) m_x + q m`; diffusion is implicit and the drift
//! explicit and upwinded. Boundary fluxes are set to zero, so the trapezoid
//! mass telescopes and is conserved to round-off.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, MfgError, Result};
use crate::geometry::{check_nonnegative, trapezoid_raw, FieldRole, Grid, ScalarField, TimeSlice};
use crate::market::{BoundarySpec, MarketParams};
use crate::tridiag::Tridiagonal;

/// Tolerance on unit initial mass for the reflecting problem.
pub const INITIAL_MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FluxForm {
    /// First-order upwind interface values.
    #[default]
    Upwind,
    /// Second-order reconstruction with a minmod limiter.
    CentralWithLimiter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct FpOptions {
    pub positivity_clip: bool,
    pub flux_form: FluxForm,
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Control value at face `j` (between nodes `j` and `j + 1`).
#[inline]
fn face_control(q: &[f64], j: usize) -> f64 {
    0.5 * (q[j] + q[j + 1])
}

/// Density carried through face `j`. Transport velocity is `-q`, so a
/// positive face control takes the value from the right node.
fn face_density(m: &[f64], j: usize, qf: f64, form: FluxForm) -> f64 {
    let n = m.len();
    match form {
        FluxForm::Upwind => {
            if qf > 0.0 {
                m[j + 1]
            } else {
                m[j]
            }
        }
        FluxForm::CentralWithLimiter => {
            if qf > 0.0 {
                let up = j + 1;
                if up + 1 < n {
                    m[up] - 0.5 * minmod(m[up] - m[up - 1], m[up + 1] - m[up])
                } else {
                    m[up]
                }
            } else if j >= 1 {
                m[j] + 0.5 * minmod(m[j] - m[j - 1], m[j + 1] - m[j])
            } else {
                m[j]
            }
        }
    }
}

/// Explicit drift flux `q m` at the `nx` interior faces.
fn drift_fluxes(m: &[f64], q: &[f64], form: FluxForm) -> Vec<f64> {
    let nx = m.len() - 1;
    (0..nx)
        .map(|j| {
            let qf = face_control(q, j);
            qf * face_density(m, j, qf, form)
        })
        .collect()
}

fn volumes(nx: usize, dx: f64) -> Vec<f64> {
    let mut v = vec![dx; nx + 1];
    v[0] = 0.5 * dx;
    v[nx] = 0.5 * dx;
    v
}

/// Largest step keeping the explicit drift update nonnegative.
fn drift_step_bound(q: &[f64], vol: &[f64], form: FluxForm, start: usize) -> f64 {
    let nx = q.len() - 1;
    let factor = match form {
        FluxForm::Upwind => 1.0,
        FluxForm::CentralWithLimiter => 1.5,
    };
    let mut bound = f64::INFINITY;
    for j in start..=nx {
        let mut out = 0.0;
        if j < nx {
            out += (-face_control(q, j)).max(0.0);
        }
        if j > 0 {
            out += face_control(q, j - 1).max(0.0);
        }
        if out > 0.0 {
            bound = bound.min(vol[j] / (factor * out));
        }
    }
    bound
}

fn diffusion_operator(nx: usize, dx: f64, dt: f64, nu: f64, vol: &[f64], bc: BoundarySpec) -> Tridiagonal {
    let kappa = dt * nu / dx;
    let mut a = Tridiagonal::zeros(nx + 1);
    for j in 0..=nx {
        a.diag[j] = vol[j];
        if j > 0 {
            a.diag[j] += kappa;
            a.lower[j] = -kappa;
        }
        if j < nx {
            a.diag[j] += kappa;
            a.upper[j] = -kappa;
        }
    }
    if bc == BoundarySpec::DirichletLeft {
        a.diag[0] = 1.0;
        a.upper[0] = 0.0;
    }
    a
}

pub fn solve_fp(
    q: &ScalarField,
    m0: &TimeSlice,
    params: &MarketParams,
    grid: &Grid,
    bc: BoundarySpec,
    opts: &FpOptions,
) -> Result<ScalarField> {
    if grid.nx < 2 {
        return Err(MfgError::GridTooSmall { nx: grid.nx, required: 2 });
    }
    grid.ensure_same(&q.grid)?;
    grid.ensure_same(&m0.grid)?;
    params.ensure_grid(grid)?;
    check_nonnegative(&m0.values)?;
    if !m0.is_finite() || !q.is_finite() {
        return Err(MfgError::InvalidData("non-finite initial density or control".into()));
    }
    let (nx, nt) = (grid.nx, grid.nt);
    let (dx, dt) = (grid.dx(), grid.dt());
    if bc == BoundarySpec::NeumannReflection {
        let mass = trapezoid_raw(&m0.values, dx);
        if (mass - 1.0).abs() > INITIAL_MASS_TOL {
            return Err(MfgError::MassMismatch { left: mass, right: 1.0 });
        }
    }

    let vol = volumes(nx, dx);
    let operator = diffusion_operator(nx, dx, dt, params.diffusion(), &vol, bc);
    let start = match bc {
        BoundarySpec::NeumannReflection => 0,
        BoundarySpec::DirichletLeft => 1,
    };
    let mut m = ScalarField::zeros(*grid, FieldRole::Density);
    m.set_slice(0, &m0.values);
    let mut current = m0.values.clone();

    for k in 0..nt {
        let qk = q.row(k);
        let bound = drift_step_bound(qk, &vol, opts.flux_form, start);
        if dt > bound {
            return Err(MfgError::CflViolation { step: k, dt, bound });
        }
        if bc == BoundarySpec::DirichletLeft {
            current[0] = 0.0;
        }
        let flux = drift_fluxes(&current, qk, opts.flux_form);
        let mut rhs = vol.iter().zip(&current).map(|(v, mj)| v * mj).collect::<Vec<_>>();
        for j in 0..=nx {
            let right = if j < nx { flux[j] } else { 0.0 };
            let left = if j > 0 { flux[j - 1] } else { 0.0 };
            rhs[j] += dt * (right - left);
        }
        if bc == BoundarySpec::DirichletLeft {
            rhs[0] = 0.0;
        }
        operator.solve(&mut rhs);
        if opts.positivity_clip {
            for v in rhs.iter_mut() {
                *v = v.max(0.0);
            }
        }
        m.set_slice(k + 1, &rhs);
        current = rhs;
    }
    Ok(m)
}

/// Discrete flux `(sigma^2/2) m_x + q m` at the `nx + 2` faces of the
/// reflecting problem: entry 0 is the face at `x = 0`, entry `j + 1` the
/// face between nodes `j` and `j + 1`, and the last entry the face at
/// `x = L`. Both boundary entries are zero.
pub fn fp_flux(m: &TimeSlice, q: &TimeSlice, params: &MarketParams) -> Result<Vec<f64>> {
    m.grid.ensure_same(&q.grid)?;
    let nx = m.grid.nx;
    if nx < 1 {
        return Err(MfgError::GridTooSmall { nx, required: 1 });
    }
    let dx = m.grid.dx();
    let nu = params.diffusion();
    let drift = drift_fluxes(&m.values, &q.values, FluxForm::Upwind);
    let mut out = Vec::with_capacity(nx + 2);
    out.push(0.0);
    for j in 0..nx {
        out.push(nu * (m.values[j + 1] - m.values[j]) / dx + drift[j]);
    }
    out.push(0.0);
    Ok(out)
}

/// Checks `int_{m(t) >= 2K} m(t) <= 2 int (m0 - K)_+` at every time level.
pub fn uniform_integrability_check(m: &ScalarField, m0: &TimeSlice, threshold: f64) -> Result<bool> {
    if !(threshold >= 0.0) {
        return Err(invalid("K", "must be nonnegative"));
    }
    m.grid.ensure_same(&m0.grid)?;
    let dx = m.grid.dx();
    let excess: Vec<f64> = m0.values.iter().map(|v| (v - threshold).max(0.0)).collect();
    let rhs = 2.0 * trapezoid_raw(&excess, dx) + 1e-8;
    let level = 2.0 * threshold;
    Ok((0..=m.grid.nt).all(|k| {
        let high: Vec<f64> = m.row(k).iter().map(|&v| if v >= level { v } else { 0.0 }).collect();
        trapezoid_raw(&high, dx) <= rhs
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{wasserstein1, trapezoid};
    use crate::market::derive_params;
    use proptest::prelude::*;

    fn bump(g: Grid, center: f64, width: f64) -> TimeSlice {
        let s = TimeSlice::from_fn(g, |x| {
            let z = (x - center) / width;
            if z.abs() < 0.5 {
                (std::f64::consts::PI * z).cos().powi(2)
            } else {
                0.0
            }
        });
        let mass = trapezoid(&s);
        TimeSlice { grid: g, values: s.values.iter().map(|v| v / mass).collect() }
    }

    fn setup(nx: usize, nt: usize, sigma: f64) -> (Grid, MarketParams) {
        (Grid::new(nx, nt, 1.0, 1.0).unwrap(), derive_params(1.0, 0.5, sigma, 1.0, 1.0).unwrap())
    }

    fn mass_error(m: &ScalarField) -> f64 {
        (0..=m.grid.nt)
            .map(|k| (trapezoid_raw(m.row(k), m.grid.dx()) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn uniform_density_is_stationary_without_drift() {
        let (g, p) = setup(50, 100, 0.7);
        let q = ScalarField::zeros(g, FieldRole::Control);
        let m = solve_fp(&q, &TimeSlice::constant(g, 1.0), &p, &g, BoundarySpec::NeumannReflection, &FpOptions::default())
            .unwrap();
        assert!(m.values().iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn mass_is_conserved_without_drift() {
        for sigma in [1.0, 0.5, 0.1, 0.0] {
            let (g, p) = setup(80, 160, sigma);
            let q = ScalarField::zeros(g, FieldRole::Control);
            let m = solve_fp(&q, &bump(g, 0.3, 0.3), &p, &g, BoundarySpec::NeumannReflection, &FpOptions::default())
                .unwrap();
            assert!(mass_error(&m) <= 1e-12);
        }
    }

    #[test]
    fn pure_transport_follows_characteristics() {
        let v = 0.5;
        let mut prev = f64::INFINITY;
        for (nx, nt) in [(200, 200), (400, 400), (800, 800)] {
            let g = Grid::new(nx, nt, 1.0, 0.2).unwrap();
            let p = derive_params(1.0, 0.5, 0.0, 0.2, 1.0).unwrap();
            let q = ScalarField::from_fn(g, FieldRole::Control, |_, _| v);
            let m0 = bump(g, 0.375, 0.125);
            let m = solve_fp(&q, &m0, &p, &g, BoundarySpec::NeumannReflection, &FpOptions::default()).unwrap();
            let t = g.horizon;
            let exact = bump(g, 0.375 - v * t, 0.125);
            let last = m.slice(nt);
            let d = wasserstein1(&last, &exact).unwrap();
            // first moment moves with the exact speed
            let xm = |s: &TimeSlice| trapezoid(&s.product(&TimeSlice::from_fn(g, |x| x)));
            assert!((xm(&last) - xm(&exact)).abs() < 1e-10);
            assert!(d < 5.0 * g.dx().sqrt() * 0.1, "{nx}: {d}");
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn limiter_is_sharper_than_upwind() {
        let g = Grid::new(200, 400, 1.0, 0.2).unwrap();
        let p = derive_params(1.0, 0.5, 0.0, 0.2, 1.0).unwrap();
        let q = ScalarField::from_fn(g, FieldRole::Control, |_, _| 0.5);
        let m0 = bump(g, 0.375, 0.125);
        let exact = bump(g, 0.275, 0.125);
        let mut dists = Vec::new();
        for form in [FluxForm::Upwind, FluxForm::CentralWithLimiter] {
            let opts = FpOptions { flux_form: form, ..Default::default() };
            let m = solve_fp(&q, &m0, &p, &g, BoundarySpec::NeumannReflection, &opts).unwrap();
            assert!(m.min() >= 0.0);
            assert!(mass_error(&m) <= 1e-12);
            dists.push(wasserstein1(&m.slice(g.nt), &exact).unwrap());
        }
        assert!(dists[1] < dists[0]);
    }

    #[test]
    fn flux_examples() {
        let g = Grid::new(10, 1, 2.0, 1.0).unwrap();
        let p = derive_params(1.0, 0.5, 0.6, 1.0, 2.0).unwrap();
        let uniform = TimeSlice::constant(g, 0.5);
        let f = fp_flux(&uniform, &TimeSlice::constant(g, 0.0), &p).unwrap();
        assert!(f.iter().all(|&v| v == 0.0));
        let v = 0.3;
        let f = fp_flux(&uniform, &TimeSlice::constant(g, v), &p).unwrap();
        assert_eq!(f.len(), 12);
        assert_eq!(f[0], 0.0);
        assert_eq!(f[11], 0.0);
        for &fi in &f[1..11] {
            assert!((fi - v / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let (g, p) = setup(20, 20, 0.5);
        let q = ScalarField::zeros(g, FieldRole::Control);
        let mut m0 = TimeSlice::constant(g, 1.0);
        m0.values[3] = -0.5;
        assert!(matches!(
            solve_fp(&q, &m0, &p, &g, BoundarySpec::NeumannReflection, &FpOptions::default()),
            Err(MfgError::NegativeDensity { index: 3, .. })
        ));
        let (g, p) = setup(20, 2, 0.0);
        let q = ScalarField::from_fn(g, FieldRole::Control, |_, _| 1.0);
        assert!(matches!(
            solve_fp(&q, &TimeSlice::constant(g, 1.0), &p, &g, BoundarySpec::NeumannReflection, &FpOptions::default()),
            Err(MfgError::CflViolation { .. })
        ));
    }

    #[test]
    fn dirichlet_mass_is_nonincreasing() {
        let (g, p) = setup(100, 200, 0.5);
        let q = ScalarField::from_fn(g, FieldRole::Control, |t, x| 0.4 + 0.1 * (3.0 * x + t).sin());
        let m = solve_fp(&q, &bump(g, 0.4, 0.3), &p, &g, BoundarySpec::DirichletLeft, &FpOptions::default()).unwrap();
        let masses: Vec<f64> = (0..=g.nt).map(|k| trapezoid_raw(m.row(k), g.dx())).collect();
        for w in masses.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        assert!(masses[g.nt] < 0.9 * masses[0]);
        assert!(m.min() >= 0.0);
        assert!((1..=g.nt).all(|k| m.get(k, 0) == 0.0));
    }

    #[test]
    fn integrability_check_examples() {
        let (g, p) = setup(100, 200, 0.5);
        let m0 = bump(g, 0.5, 0.2);
        let peak = m0.max_abs();
        let q = ScalarField::from_fn(g, FieldRole::Control, |_, _| 0.3);
        let m = solve_fp(&q, &m0, &p, &g, BoundarySpec::NeumannReflection, &FpOptions::default()).unwrap();
        assert!(uniform_integrability_check(&m, &m0, 0.0).unwrap());
        assert!(uniform_integrability_check(&m, &m0, peak).unwrap());
        assert!(uniform_integrability_check(&m, &m0, 0.5 * peak).unwrap());
        assert!(uniform_integrability_check(&m, &m0, -1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn positive_and_conservative(
            amp in 0.0f64..0.5,
            freq in 0.5f64..6.0,
            shift in 0.0f64..6.0,
            sigma in 0.0f64..1.0,
            center in 0.2f64..0.8,
        ) {
            let (g, p) = setup(60, 120, sigma);
            let q = ScalarField::from_fn(g, FieldRole::Control, |t, x| amp * (freq * x + shift + 2.0 * t).sin());
            let m = solve_fp(&q, &bump(g, center, 0.3), &p, &g, BoundarySpec::NeumannReflection, &FpOptions::default()).unwrap();
            prop_assert!(m.min() >= 0.0);
            prop_assert!(mass_error(&m) <= 1e-12);
            prop_assert!(m.is_finite());
        }
    }
}
