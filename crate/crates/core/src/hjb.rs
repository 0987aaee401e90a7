//! Backward solver for `u_t + (sigma^2/2) u_xx - r u + (f(t) - u_x)^2 / 4 = 0`.
//!
//! The Hamiltonian is discretized with the monotone upwind flux
//! `H(a, b) = ((a - f)^-)^2 / 4 + ((b - f)^+)^2 / 4` on the backward and
//! forward differences `a`, `b`; diffusion and discount are implicit. The
//! default scheme keeps the Hamiltonian explicit (monotone under a CFL
//! restriction); the Newton scheme makes the whole step implicit.

use serde::{Deserialize, Serialize};

use crate::error::{MfgError, Result};
use crate::geometry::{check_nonnegative, FieldRole, Grid, ScalarField, TimeSlice};
use crate::market::{BoundarySpec, MarketParams, MarketPath};
use crate::tridiag::Tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum HjbScheme {
    /// Explicit upwind Hamiltonian, implicit diffusion and discount.
    #[default]
    SemiImplicit,
    /// Fully implicit step solved by Newton's method.
    FullyImplicitNewton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HjbOptions {
    pub scheme: HjbScheme,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for HjbOptions {
    fn default() -> Self {
        Self { scheme: HjbScheme::SemiImplicit, newton_tol: 1e-10, newton_max_iter: 50 }
    }
}

/// Upwind numerical Hamiltonian: nonincreasing in `a`, nondecreasing in `b`,
/// and equal to `(f - p)^2 / 4` when `a = b = p`.
#[inline]
pub(crate) fn upwind_hamiltonian(a: f64, b: f64, level: f64) -> f64 {
    let lo = (a - level).min(0.0);
    let hi = (b - level).max(0.0);
    0.25 * (lo * lo + hi * hi)
}

/// Partial derivatives of [`upwind_hamiltonian`] with respect to `a` and `b`.
#[inline]
fn upwind_hamiltonian_grad(a: f64, b: f64, level: f64) -> (f64, f64) {
    (0.5 * (a - level).min(0.0), 0.5 * (b - level).max(0.0))
}

/// Neighbour indices with reflection ghosts at both ends.
#[inline]
fn neighbours(i: usize, nx: usize) -> (usize, usize) {
    let left = if i == 0 { 1 } else { i - 1 };
    let right = if i == nx { nx - 1 } else { i + 1 };
    (left, right)
}

/// First unknown row: the Dirichlet variant pins `u(t, 0) = 0`.
#[inline]
fn first_free(bc: BoundarySpec) -> usize {
    match bc {
        BoundarySpec::NeumannReflection => 0,
        BoundarySpec::DirichletLeft => 1,
    }
}

/// One-sided differences at every node, reflection ghosts included.
pub(crate) fn one_sided_differences(v: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>) {
    let nx = v.len() - 1;
    let mut back = vec![0.0; nx + 1];
    let mut fwd = vec![0.0; nx + 1];
    for i in 0..=nx {
        let (l, r) = neighbours(i, nx);
        back[i] = (v[i] - v[l]) / dx;
        fwd[i] = (v[r] - v[i]) / dx;
    }
    (back, fwd)
}

/// Largest `dt` for which the explicit Hamiltonian update stays monotone.
pub(crate) fn explicit_step_bound(back: &[f64], fwd: &[f64], level: f64, dx: f64) -> f64 {
    let speed = back
        .iter()
        .zip(fwd)
        .map(|(&a, &b)| (a - level).min(0.0).abs() + (b - level).max(0.0))
        .fold(0.0, f64::max);
    if speed > 0.0 {
        2.0 * dx / speed
    } else {
        f64::INFINITY
    }
}

/// Implicit operator `(1 + r dt) I - dt (sigma^2/2) D2` with the boundary
/// closure of `bc`.
fn implicit_operator(nx: usize, dx: f64, dt: f64, params: &MarketParams, bc: BoundarySpec) -> Tridiagonal {
    let mut a = Tridiagonal::zeros(nx + 1);
    let kappa = dt * params.diffusion() / (dx * dx);
    for i in 0..=nx {
        a.diag[i] = 1.0 + params.r * dt + 2.0 * kappa;
        let (l, r) = neighbours(i, nx);
        // ghost reflection doubles the single real neighbour at the ends
        if l == r {
            if i == 0 {
                a.upper[i] = -2.0 * kappa;
            } else {
                a.lower[i] = -2.0 * kappa;
            }
        } else {
            a.lower[i] = -kappa;
            a.upper[i] = -kappa;
        }
    }
    if bc == BoundarySpec::DirichletLeft {
        a.diag[0] = 1.0;
        a.upper[0] = 0.0;
    }
    a
}

pub fn solve_hjb(
    path: &MarketPath,
    u_terminal: &TimeSlice,
    params: &MarketParams,
    grid: &Grid,
    bc: BoundarySpec,
    opts: &HjbOptions,
) -> Result<ScalarField> {
    if grid.nx < 2 {
        return Err(MfgError::GridTooSmall { nx: grid.nx, required: 2 });
    }
    grid.ensure_same(&u_terminal.grid)?;
    grid.ensure_same(&path.grid)?;
    params.ensure_grid(grid)?;
    check_nonnegative(&u_terminal.values)
        .map_err(|e| MfgError::InvalidData(format!("terminal value must be nonnegative: {e}")))?;
    if !u_terminal.is_finite() {
        return Err(MfgError::InvalidData("terminal value is not finite".into()));
    }
    if !(opts.newton_tol > 0.0) {
        return Err(crate::error::invalid("newton_tol", "must be positive"));
    }

    let (nx, nt) = (grid.nx, grid.nt);
    let (dx, dt) = (grid.dx(), grid.dt());
    let mut u = ScalarField::zeros(*grid, FieldRole::ValueFunction);
    let mut terminal = u_terminal.values.clone();
    if bc == BoundarySpec::DirichletLeft {
        terminal[0] = 0.0;
    }
    // the terminal row is stored as given; only earlier rows see the pin
    u.set_slice(nt, &u_terminal.values);
    let operator = implicit_operator(nx, dx, dt, params, bc);
    let mut current = terminal;

    for k in (0..nt).rev() {
        let next = match opts.scheme {
            HjbScheme::SemiImplicit => {
                semi_implicit_step(&current, path.f[k + 1], &operator, dx, dt, bc, k)?
            }
            HjbScheme::FullyImplicitNewton => {
                newton_step(&current, path.f[k], &operator, dx, dt, bc, k, opts)?
            }
        };
        u.set_slice(k, &next);
        current = next;
    }
    Ok(u)
}

fn semi_implicit_step(
    v: &[f64],
    level: f64,
    operator: &Tridiagonal,
    dx: f64,
    dt: f64,
    bc: BoundarySpec,
    step: usize,
) -> Result<Vec<f64>> {
    let (back, fwd) = one_sided_differences(v, dx);
    let bound = explicit_step_bound(&back, &fwd, level, dx);
    if dt > bound {
        return Err(MfgError::CflViolation { step, dt, bound });
    }
    let mut rhs: Vec<f64> = v
        .iter()
        .zip(back.iter().zip(&fwd))
        .map(|(&vi, (&a, &b))| vi + dt * upwind_hamiltonian(a, b, level))
        .collect();
    if bc == BoundarySpec::DirichletLeft {
        rhs[0] = 0.0;
    }
    operator.solve(&mut rhs);
    Ok(rhs)
}

#[allow(clippy::too_many_arguments)]
fn newton_step(
    v: &[f64],
    level: f64,
    operator: &Tridiagonal,
    dx: f64,
    dt: f64,
    bc: BoundarySpec,
    step: usize,
    opts: &HjbOptions,
) -> Result<Vec<f64>> {
    let nx = v.len() - 1;
    let start = first_free(bc);
    let mut w = v.to_vec();
    if bc == BoundarySpec::DirichletLeft {
        w[0] = 0.0;
    }
    let mut residual = f64::INFINITY;
    for _ in 0..=opts.newton_max_iter {
        let (back, fwd) = one_sided_differences(&w, dx);
        let mut jac = operator.clone();
        let mut res = vec![0.0; nx + 1];
        for i in start..=nx {
            let mut lin = operator.diag[i] * w[i];
            if i > 0 {
                lin += operator.lower[i] * w[i - 1];
            }
            if i < nx {
                lin += operator.upper[i] * w[i + 1];
            }
            res[i] = lin - dt * upwind_hamiltonian(back[i], fwd[i], level) - v[i];

            let (ha, hb) = upwind_hamiltonian_grad(back[i], fwd[i], level);
            let (l, r) = neighbours(i, nx);
            let scale = dt / dx;
            // d/dw of -dt H(a, b) with a = (w_i - w_l)/dx, b = (w_r - w_i)/dx
            jac.diag[i] -= scale * (ha - hb);
            for (j, coeff) in [(l, -scale * (-ha)), (r, -scale * hb)] {
                if j + 1 == i {
                    jac.lower[i] += coeff;
                } else {
                    jac.upper[i] += coeff;
                }
            }
        }
        residual = res.iter().fold(0.0, |acc, x| acc.max(x.abs()));
        if residual <= opts.newton_tol {
            return Ok(w);
        }
        if bc == BoundarySpec::DirichletLeft {
            jac.diag[0] = 1.0;
            jac.upper[0] = 0.0;
            res[0] = 0.0;
        }
        jac.solve(&mut res);
        for (wi, d) in w.iter_mut().zip(&res) {
            *wi -= d;
        }
        if !w.iter().all(|x| x.is_finite()) {
            break;
        }
    }
    Err(MfgError::NewtonDivergence { step, residual })
}

/// Max over interior nodes of the pointwise residual of the HJB equation,
/// with centered differences in space and forward differences in time.
pub fn hjb_residual(u: &ScalarField, path: &MarketPath, params: &MarketParams, grid: &Grid) -> f64 {
    let (dx, dt) = (grid.dx(), grid.dt());
    let nu = params.diffusion();
    let mut worst: f64 = 0.0;
    for k in 0..grid.nt {
        let (now, later) = (u.row(k), u.row(k + 1));
        let level = path.f[k];
        for i in 1..grid.nx {
            let ut = (later[i] - now[i]) / dt;
            let uxx = (now[i + 1] - 2.0 * now[i] + now[i - 1]) / (dx * dx);
            let ux = (now[i + 1] - now[i - 1]) / (2.0 * dx);
            let gap = level - ux;
            let r = ut + nu * uxx - params.r * now[i] + 0.25 * gap * gap;
            worst = worst.max(r.abs());
        }
    }
    worst
}
