//! Smooth test functions and weak-form residuals.
//!
//! Space profiles satisfy the homogeneous boundary conditions of the
//! adjoint problem: cosines (`phi_x = 0` at both ends) for reflection,
//! quarter-wave sines (`phi = 0` at `x = 0`, `phi_x = 0` at `x = L`) for the
//! absorbing variant. Time profiles are `psi(t) = (1 + cos(pi t/T)) / 2`
//! and `psi^2`, both flat at `t = 0` and `t = T`.

use std::f64::consts::PI;

use crate::geometry::{trapezoid_raw, Grid, ScalarField, TimeSlice};
use crate::market::{BoundarySpec, MarketParams};

pub const SPACE_MODES: usize = 5;

/// Values of `phi` and of the derivatives that enter the weak forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestValue {
    pub phi: f64,
    pub phi_t: f64,
    pub phi_x: f64,
    pub phi_xx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceProfile {
    Cosine(usize),
    QuarterSine(usize),
    /// `1 + cos(k pi x / L)`: nonnegative, flat at both ends.
    ShiftedCosine(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub space: SpaceProfile,
    /// 1 for `psi`, 2 for `psi^2`.
    pub time_power: i32,
    pub length: f64,
    pub horizon: f64,
}

impl TestFunction {
    fn space_eval(&self, x: f64) -> (f64, f64, f64) {
        let l = self.length;
        match self.space {
            SpaceProfile::Cosine(k) => {
                let w = k as f64 * PI / l;
                ((w * x).cos(), -w * (w * x).sin(), -w * w * (w * x).cos())
            }
            SpaceProfile::QuarterSine(k) => {
                let w = (k as f64 + 0.5) * PI / l;
                ((w * x).sin(), w * (w * x).cos(), -w * w * (w * x).sin())
            }
            SpaceProfile::ShiftedCosine(k) => {
                let w = k as f64 * PI / l;
                (1.0 + (w * x).cos(), -w * (w * x).sin(), -w * w * (w * x).cos())
            }
        }
    }

    fn time_eval(&self, t: f64) -> (f64, f64) {
        let a = PI / self.horizon;
        let psi = 0.5 * (1.0 + (a * t).cos());
        let dpsi = -0.5 * a * (a * t).sin();
        match self.time_power {
            1 => (psi, dpsi),
            _ => (psi * psi, 2.0 * psi * dpsi),
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> TestValue {
        let (s, sx, sxx) = self.space_eval(x);
        let (p, pt) = self.time_eval(t);
        TestValue { phi: s * p, phi_t: s * pt, phi_x: sx * p, phi_xx: sxx * p }
    }
}

/// The ten-function battery adapted to `bc`.
pub fn test_battery(grid: &Grid, bc: BoundarySpec) -> Vec<TestFunction> {
    let mut out = Vec::with_capacity(2 * SPACE_MODES);
    for k in 0..SPACE_MODES {
        let space = match bc {
            BoundarySpec::NeumannReflection => SpaceProfile::Cosine(k),
            BoundarySpec::DirichletLeft => SpaceProfile::QuarterSine(k),
        };
        for time_power in [1, 2] {
            out.push(TestFunction { space, time_power, length: grid.length, horizon: grid.horizon });
        }
    }
    out
}

/// Nonnegative battery for one-sided (subsolution) checks under reflection.
pub fn nonnegative_battery(grid: &Grid) -> Vec<TestFunction> {
    let mut out = Vec::with_capacity(2 * SPACE_MODES);
    for k in 0..SPACE_MODES {
        for time_power in [1, 2] {
            out.push(TestFunction {
                space: SpaceProfile::ShiftedCosine(k),
                time_power,
                length: grid.length,
                horizon: grid.horizon,
            });
        }
    }
    out
}

/// Trapezoid rule in time over per-level values.
pub(crate) fn trapezoid_time(values: &[f64], dt: f64) -> f64 {
    trapezoid_raw(values, dt)
}

/// Weak Fokker-Planck functional
/// `int m(T) phi(T) - int m0 phi(0) - iint m phi_t - (sigma^2/2) iint m phi_xx + iint q m phi_x`.
pub fn fp_weak_functional(m: &ScalarField, q: &ScalarField, m0: &TimeSlice, params: &MarketParams, phi: &TestFunction) -> f64 {
    let grid = m.grid;
    let (dx, dt) = (grid.dx(), grid.dt());
    let nu = params.diffusion();
    let xs = grid.xs();
    let nt = grid.nt;
    let mut per_level = vec![0.0; nt + 1];
    for (k, level) in per_level.iter_mut().enumerate() {
        let t = grid.t(k);
        let (mk, qk) = (m.row(k), q.row(k));
        let integrand: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let v = phi.eval(t, x);
                -mk[i] * v.phi_t - nu * mk[i] * v.phi_xx + qk[i] * mk[i] * v.phi_x
            })
            .collect();
        *level = trapezoid_raw(&integrand, dx);
    }
    let bulk = trapezoid_time(&per_level, dt);
    let t_end = grid.horizon;
    let end: Vec<f64> = xs.iter().enumerate().map(|(i, &x)| m.get(nt, i) * phi.eval(t_end, x).phi).collect();
    let start: Vec<f64> = xs.iter().enumerate().map(|(i, &x)| m0.values[i] * phi.eval(0.0, x).phi).collect();
    trapezoid_raw(&end, dx) - trapezoid_raw(&start, dx) + bulk
}

/// Max over the battery of the absolute weak FP functional.
pub fn fp_weak_residual(
    m: &ScalarField,
    q: &ScalarField,
    m0: &TimeSlice,
    params: &MarketParams,
    bc: BoundarySpec,
) -> f64 {
    test_battery(&m.grid, bc)
        .iter()
        .map(|phi| fp_weak_functional(m, q, m0, params, phi).abs())
        .fold(0.0, f64::max)
}
