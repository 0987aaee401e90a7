//! Economic layer: parameter map, linear demand schedule, the producers'
//! optimal price and quantity, market clearing, and the nonlocal coupling
//! term `G` for both boundary variants.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, MfgError, Result};
use crate::geometry::{trapezoid_raw, Grid, ScalarField, TimeSlice};

/// Tolerance on unit mass required by [`coupling_g`].
pub const UNIT_MASS_TOL: f64 = 1e-6;

/// Economic and diffusion constants with the coefficients derived from the
/// substitutability `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub epsilon: f64,
    pub r: f64,
    pub sigma: f64,
    pub horizon: f64,
    pub length: f64,
    pub b: f64,
    pub c: f64,
    pub b_bar: f64,
    pub c_bar: f64,
}

pub fn derive_params(epsilon: f64, r: f64, sigma: f64, horizon: f64, length: f64) -> Result<MarketParams> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(invalid("r", format!("must be finite and >= 0, got {r}")));
    }
    if !(0.0..=1.0).contains(&sigma) {
        return Err(invalid("sigma", format!("must lie in [0, 1], got {sigma}")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(invalid("T", format!("must be finite and > 0, got {horizon}")));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(invalid("L", format!("must be finite and > 0, got {length}")));
    }
    let b = 2.0 / (2.0 + epsilon);
    let c = epsilon / (2.0 + epsilon);
    Ok(MarketParams {
        epsilon,
        r,
        sigma,
        horizon,
        length,
        b,
        c,
        // b / (1 - c) and c / (1 - c) simplify exactly to these
        b_bar: 1.0,
        c_bar: epsilon / 2.0,
    })
}

impl MarketParams {
    /// Same market with a different diffusion level.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        derive_params(self.epsilon, self.r, sigma, self.horizon, self.length)
    }

    /// `sigma^2 / 2`.
    #[inline]
    pub fn diffusion(&self) -> f64 {
        0.5 * self.sigma * self.sigma
    }

    pub(crate) fn ensure_grid(&self, grid: &Grid) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);
        if close(self.length, grid.length) && close(self.horizon, grid.horizon) {
            Ok(())
        } else {
            Err(MfgError::GridMismatch(format!(
                "params (L = {}, T = {}) vs grid (L = {}, T = {})",
                self.length, self.horizon, grid.length, grid.horizon
            )))
        }
    }
}

/// Boundary behaviour at the capacity ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundarySpec {
    /// Reflection at both ends: `u_x = 0` and zero density flux.
    NeumannReflection,
    /// Exhausted producers exit: `u = m = 0` at `x = 0`, reflection at `x = L`.
    DirichletLeft,
}

/// `q = 1/(1+eps) - p + eps/(1+eps) p_bar`.
pub fn demand(p: f64, p_bar: f64, epsilon: f64) -> f64 {
    (1.0 + epsilon * p_bar) / (1.0 + epsilon) - p
}

/// Profit-maximizing price of `p -> D(p, p_bar)(p - u_x)`.
pub fn equilibrium_price(u_x: f64, p_bar: f64, epsilon: f64) -> f64 {
    0.5 * ((1.0 + epsilon * p_bar) / (1.0 + epsilon) + u_x)
}

/// Quantity sold at the optimal price.
pub fn equilibrium_demand(u_x: f64, p_bar: f64, epsilon: f64) -> f64 {
    0.5 * ((1.0 + epsilon * p_bar) / (1.0 + epsilon) - u_x)
}

/// Market-clearing price `1/(2+eps) + (1+eps)/(2+eps) int u_x m`.
pub fn market_price(u_x: &TimeSlice, m: &TimeSlice, params: &MarketParams) -> f64 {
    let moment = trapezoid(&u_x.product(m));
    market_price_from_moment(moment, params.epsilon)
}

fn trapezoid(s: &TimeSlice) -> f64 {
    crate::geometry::trapezoid(s)
}

pub(crate) fn market_price_from_moment(moment: f64, epsilon: f64) -> f64 {
    (1.0 + (1.0 + epsilon) * moment) / (2.0 + epsilon)
}

/// `int u_x m dx` on raw node values.
pub(crate) fn gradient_moment(u_x: &[f64], m: &[f64], dx: f64) -> f64 {
    let prod: Vec<f64> = u_x.iter().zip(m).map(|(a, b)| a * b).collect();
    trapezoid_raw(&prod, dx)
}

/// The time-dependent level `f(t)` in `G = (f - u_x) / 2` for either
/// boundary variant.
pub(crate) fn coupling_level(u_x: &[f64], m: &[f64], dx: f64, params: &MarketParams, bc: BoundarySpec) -> f64 {
    let moment = gradient_moment(u_x, m, dx);
    match bc {
        BoundarySpec::NeumannReflection => params.b + params.c * moment,
        BoundarySpec::DirichletLeft => {
            let eta = trapezoid_raw(m, dx);
            let denom = 2.0 + params.epsilon * eta;
            (2.0 + params.epsilon * moment) / denom
        }
    }
}

fn half_gap(level: f64, u_x: &TimeSlice) -> TimeSlice {
    TimeSlice {
        grid: u_x.grid,
        values: u_x.values.iter().map(|d| 0.5 * (level - d)).collect(),
    }
}

/// `G_i = (b + c int u_x m - u_x,i) / 2`, returned with the level
/// `f = b + c int u_x m`. The density must carry unit mass.
pub fn coupling_g(u_x: &TimeSlice, m: &TimeSlice, params: &MarketParams) -> Result<(TimeSlice, f64)> {
    u_x.grid.ensure_same(&m.grid)?;
    let mass = trapezoid(m);
    if (mass - 1.0).abs() > UNIT_MASS_TOL {
        return Err(MfgError::MassMismatch { left: mass, right: 1.0 });
    }
    let f = coupling_level(&u_x.values, &m.values, u_x.grid.dx(), params, BoundarySpec::NeumannReflection);
    Ok((half_gap(f, u_x), f))
}

/// Coupling for the absorbing-left model, where the density may have lost
/// mass: `G_i = (2/(2+eps eta) + eps/(2+eps eta) int u_x m - u_x,i) / 2`
/// with `eta = int m`.
pub fn coupling_g_dirichlet(u_x: &TimeSlice, m: &TimeSlice, epsilon: f64) -> Result<(TimeSlice, f64)> {
    u_x.grid.ensure_same(&m.grid)?;
    let dx = u_x.grid.dx();
    let eta = trapezoid_raw(&m.values, dx);
    let moment = gradient_moment(&u_x.values, &m.values, dx);
    let f = (2.0 + epsilon * moment) / (2.0 + epsilon * eta);
    Ok((half_gap(f, u_x), f))
}

/// Nonlocal quantities along the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketPath {
    pub grid: Grid,
    /// `f(t_k)`, the level entering `G = (f - u_x) / 2`.
    pub f: Vec<f64>,
    /// Market price at each time node.
    pub p_bar: Vec<f64>,
}

impl MarketPath {
    /// Path with constant level `f` and the price of the zero-gradient state.
    pub fn constant(grid: Grid, level: f64, epsilon: f64) -> Self {
        let p = market_price_from_moment(0.0, epsilon);
        Self { grid, f: vec![level; grid.nt + 1], p_bar: vec![p; grid.nt + 1] }
    }

    /// Path with user-supplied levels; prices are filled from the inverse
    /// of the Neumann coupling.
    pub fn from_levels(grid: Grid, f: Vec<f64>, params: &MarketParams) -> Result<Self> {
        if f.len() != grid.nt + 1 {
            return Err(MfgError::GridMismatch(format!(
                "path has {} entries, grid expects {}",
                f.len(),
                grid.nt + 1
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(MfgError::InvalidData("market path contains non-finite entries".into()));
        }
        let p_bar = f
            .iter()
            .map(|&level| {
                let moment = if params.c > 0.0 { (level - params.b) / params.c } else { 0.0 };
                market_price_from_moment(moment, params.epsilon)
            })
            .collect();
        Ok(Self { grid, f, p_bar })
    }

    /// Recomputes `f` and `p_bar` slice by slice from `(u_x, m)`.
    pub fn from_fields(u_x: &ScalarField, m: &ScalarField, params: &MarketParams, bc: BoundarySpec) -> Result<Self> {
        u_x.grid.ensure_same(&m.grid)?;
        let grid = u_x.grid;
        let dx = grid.dx();
        let mut f = Vec::with_capacity(grid.nt + 1);
        let mut p_bar = Vec::with_capacity(grid.nt + 1);
        for k in 0..=grid.nt {
            let (ux, mk) = (u_x.row(k), m.row(k));
            f.push(coupling_level(ux, mk, dx, params, bc));
            p_bar.push(market_price_from_moment(gradient_moment(ux, mk, dx), params.epsilon));
        }
        Ok(Self { grid, f, p_bar })
    }

    pub fn sup_distance(&self, other: &MarketPath) -> f64 {
        self.f.iter().zip(&other.f).fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.f.iter().chain(&self.p_bar).all(|v| v.is_finite())
    }
}
