//! Convex control formulation: the functional `J` over density/momentum
//! pairs `(m, w = q m)` constrained by the Fokker-Planck equation, feasible
//! competitors, and the optimality certificate of the equilibrium.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{MfgError, Result};
use crate::fixed_point::MfgSolution;
use crate::fp::{solve_fp, FpOptions};
use crate::geometry::{derivative_field, trapezoid_raw, FieldRole, Grid, ScalarField, TimeSlice};
use crate::market::{BoundarySpec, MarketParams};

/// Densities below this are treated as vacuum when the momentum is not small.
pub const VACUUM_DENSITY: f64 = 1e-14;
/// Momentum magnitude that makes a vacuum node infeasible.
pub const VACUUM_MOMENTUM: f64 = 1e-7;
/// Largest competitor control magnitude; keeps the transport step stable
/// on grids with `dt <= dx`.
pub const COMPETITOR_CAP: f64 = 0.9;

/// Value of `Psi` or `J`, with an explicit infinite case. Finite values
/// order below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Cost {
    Finite(f64),
    Infinite,
}

impl Cost {
    pub fn is_finite(&self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Cost::Finite(v) => Some(*v),
            Cost::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSource {
    Equilibrium,
    Competitor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlPair {
    pub m: ScalarField,
    pub w: ScalarField,
    pub source: PairSource,
}

impl ControlPair {
    /// `(m, q m)` nodewise.
    pub fn from_control(m: ScalarField, q: &ScalarField, source: PairSource) -> Result<Self> {
        m.grid.ensure_same(&q.grid)?;
        let w = ScalarField::from_values(
            m.grid,
            FieldRole::Flux,
            m.values().iter().zip(q.values()).map(|(a, b)| a * b).collect(),
        )?;
        Ok(Self { m, w, source })
    }

    pub fn equilibrium(sol: &MfgSolution) -> Result<Self> {
        Self::from_control(sol.m.clone(), &sol.q, PairSource::Equilibrium)
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn blend(&self, other: &ControlPair, lambda: f64) -> Result<Self> {
        self.m.grid.ensure_same(&other.m.grid)?;
        let mix = |a: &ScalarField, b: &ScalarField| -> Vec<f64> {
            a.values().iter().zip(b.values()).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect()
        };
        Ok(Self {
            m: ScalarField::from_values(self.m.grid, FieldRole::Density, mix(&self.m, &other.m))?,
            w: ScalarField::from_values(self.m.grid, FieldRole::Flux, mix(&self.w, &other.w))?,
            source: PairSource::Competitor,
        })
    }
}

/// `|w|^2 / m`, zero on vacuum without momentum, infinite on vacuum with
/// momentum.
pub fn psi(m: f64, w: f64) -> Result<Cost> {
    if m < 0.0 || m.is_nan() {
        return Err(MfgError::NegativeDensity { index: 0, value: m });
    }
    if m == 0.0 {
        return Ok(if w == 0.0 { Cost::Finite(0.0) } else { Cost::Infinite });
    }
    if m < VACUUM_DENSITY && w.abs() > VACUUM_MOMENTUM {
        return Ok(Cost::Infinite);
    }
    Ok(Cost::Finite(w * w / m))
}

fn check_pair(pair: &ControlPair, grid: &Grid) -> Result<()> {
    grid.ensure_same(&pair.m.grid)?;
    grid.ensure_same(&pair.w.grid)?;
    if let Some((idx, v)) = pair.m.values().iter().enumerate().find(|(_, v)| **v < 0.0 || v.is_nan()) {
        return Err(MfgError::InfeasiblePair(format!("density {v:e} at flat index {idx}")));
    }
    if !pair.w.is_finite() {
        return Err(MfgError::InfeasiblePair("non-finite momentum".into()));
    }
    Ok(())
}

/// Left-point-in-time, trapezoid-in-space quadrature of
/// `e^{-rt} (Psi(m, w) - b_bar w) + c_bar e^{-rt} (int w)^2`, minus
/// `e^{-rT} int u_T m(T)`.
pub fn evaluate_j(pair: &ControlPair, u_terminal: &TimeSlice, params: &MarketParams, grid: &Grid) -> Result<Cost> {
    check_pair(pair, grid)?;
    grid.ensure_same(&u_terminal.grid)?;
    if u_terminal.values.iter().any(|v| *v < 0.0) {
        return Err(MfgError::InvalidData("terminal value must be nonnegative".into()));
    }
    let (dx, dt) = (grid.dx(), grid.dt());
    let mut running = 0.0;
    let mut integrand = vec![0.0; grid.nx + 1];
    for k in 0..grid.nt {
        let (mk, wk) = (pair.m.row(k), pair.w.row(k));
        for i in 0..=grid.nx {
            match psi(mk[i], wk[i])? {
                Cost::Finite(v) => integrand[i] = v - params.b_bar * wk[i],
                Cost::Infinite => return Ok(Cost::Infinite),
            }
        }
        let total_w = trapezoid_raw(wk, dx);
        let level = trapezoid_raw(&integrand, dx) + params.c_bar * total_w * total_w;
        running += dt * (-params.r * grid.t(k)).exp() * level;
    }
    let terminal: Vec<f64> = u_terminal.values.iter().zip(pair.m.row(grid.nt)).map(|(u, m)| u * m).collect();
    let terminal = (-params.r * grid.horizon).exp() * trapezoid_raw(&terminal, dx);
    Ok(Cost::Finite(running - terminal))
}

/// `(m~, q~ m~)` with `m~` transported by `q~` from `m0`.
pub fn competitor_from_control(
    q_tilde: &ScalarField,
    m0: &TimeSlice,
    params: &MarketParams,
    grid: &Grid,
    bc: BoundarySpec,
) -> Result<ControlPair> {
    if !q_tilde.is_finite() {
        return Err(MfgError::InvalidData("competitor control must be finite".into()));
    }
    let m = solve_fp(q_tilde, m0, params, grid, bc, &FpOptions::default())?;
    ControlPair::from_control(m, q_tilde, PairSource::Competitor)
}

/// Max over the lattice of `|b_bar - 2 q - 2 c_bar int q m - u_x|`.
pub fn first_order_residual(sol: &MfgSolution, params: &MarketParams, grid: &Grid) -> Result<f64> {
    grid.ensure_same(&sol.u.grid)?;
    let u_x = derivative_field(&sol.u, FieldRole::Control)?;
    let dx = grid.dx();
    let mut worst: f64 = 0.0;
    for k in 0..=grid.nt {
        let (q, m, d) = (sol.q.row(k), sol.m.row(k), u_x.row(k));
        let qm: Vec<f64> = q.iter().zip(m).map(|(a, b)| a * b).collect();
        let shift = params.b_bar - 2.0 * params.c_bar * trapezoid_raw(&qm, dx);
        for i in 0..=grid.nx {
            worst = worst.max((shift - 2.0 * q[i] - d[i]).abs());
        }
    }
    Ok(worst)
}

/// Quadratic part of `J(competitor) - J(equilibrium)`:
/// `iint e^{-rt} m~ (q~ - q)^2 + c_bar int e^{-rt} (int (w~ - w))^2`, with the
/// equilibrium control recovered from `u` through the first-order condition
/// so that it is defined where the equilibrium density vanishes.
pub fn optimality_gap(
    equilibrium: &ControlPair,
    competitor: &ControlPair,
    u: &ScalarField,
    params: &MarketParams,
    grid: &Grid,
) -> Result<f64> {
    check_pair(equilibrium, grid)?;
    check_pair(competitor, grid)?;
    grid.ensure_same(&u.grid)?;
    let u_x = derivative_field(u, FieldRole::Control)?;
    let (dx, dt) = (grid.dx(), grid.dt());
    let mut total = 0.0;
    let mut integrand = vec![0.0; grid.nx + 1];
    for k in 0..grid.nt {
        let (w, mt, wt, d) = (equilibrium.w.row(k), competitor.m.row(k), competitor.w.row(k), u_x.row(k));
        let total_w = trapezoid_raw(w, dx);
        let shift = params.b_bar - 2.0 * params.c_bar * total_w;
        for i in 0..=grid.nx {
            integrand[i] = match psi(mt[i], wt[i])? {
                Cost::Infinite => {
                    return Err(MfgError::InfeasiblePair(format!("competitor momentum on vacuum at ({k}, {i})")))
                }
                Cost::Finite(_) => {
                    let q = 0.5 * (shift - d[i]);
                    // m~ (q~ - q)^2 = w~^2/m~ - 2 q w~ + q^2 m~
                    let kinetic = if mt[i] > 0.0 { wt[i] * wt[i] / mt[i] } else { 0.0 };
                    kinetic - 2.0 * q * wt[i] + q * q * mt[i]
                }
            };
        }
        let dw = trapezoid_raw(wt, dx) - total_w;
        total += dt * (-params.r * grid.t(k)).exp() * (trapezoid_raw(&integrand, dx) + params.c_bar * dw * dw);
    }
    Ok(total)
}

/// Twenty bounded controls around the equilibrium control `q_star`:
/// constants, shifted and sinusoidally perturbed copies, and sign flips.
pub fn competitor_controls(q_star: &ScalarField) -> Vec<ScalarField> {
    let grid = q_star.grid;
    let (l, horizon) = (grid.length, grid.horizon);
    let around = |g: &dyn Fn(f64, f64, f64) -> f64| -> ScalarField {
        let mut out = ScalarField::zeros(grid, FieldRole::Control);
        for k in 0..=grid.nt {
            let t = grid.t(k);
            for i in 0..=grid.nx {
                let v = g(t, grid.x(i), q_star.get(k, i));
                out.set(k, i, v.clamp(-COMPETITOR_CAP, COMPETITOR_CAP));
            }
        }
        out
    };
    let mut out = Vec::with_capacity(20);
    for c in [0.0, 0.25, -0.25, 0.5] {
        out.push(around(&move |_, _, _| c));
    }
    for d in [0.05, -0.05, 0.1, -0.1] {
        out.push(around(&move |_, _, q| q + d));
    }
    for a in [0.1, 0.2] {
        for j in 1..=3 {
            let w = 2.0 * PI * j as f64 / l;
            out.push(around(&move |_, x, q| q + a * (w * x).sin()));
        }
    }
    out.push(around(&move |t, x, q| q + 0.2 * (2.0 * PI * x / l).sin() * (PI * t / horizon).cos()));
    out.push(around(&move |_, x, q| q + 0.1 * (PI * x / l).cos()));
    out.push(around(&|_, _, q| -q));
    out.push(around(&|_, _, q| 0.5 * q));
    out.push(around(&|_, _, q| 1.5 * q));
    out.push(around(&move |t, x, q| q + 0.15 * (4.0 * PI * x / l + 2.0 * t).sin()));
    out
}

/// Competitor pairs for every control of [`competitor_controls`], built in
/// parallel.
pub fn competitor_corpus(sol: &MfgSolution, params: &MarketParams, grid: &Grid) -> Result<Vec<ControlPair>> {
    competitor_controls(&sol.q)
        .par_iter()
        .map(|q| competitor_from_control(q, &sol.initial_density, params, grid, sol.bc))
        .collect()
}
