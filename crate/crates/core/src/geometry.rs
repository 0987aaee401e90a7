//! Uniform space-time lattice over `(0, T) x (0, L)` and the discrete
//! calculus used by the solvers: trapezoid quadrature, second-order
//! differentiation, cumulative distributions and the 1D Wasserstein-1
//! distance.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, MfgError, Result};

/// Tolerance below which a density entry counts as negative.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// Tolerance on equal masses for [`wasserstein1`].
pub const MASS_MATCH_TOL: f64 = 1e-8;

/// Uniform discretization with `nx` space cells and `nt` time steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub nt: usize,
    /// Spatial extent `L`.
    pub length: f64,
    /// Time horizon `T`.
    pub horizon: f64,
}

impl Grid {
    pub fn new(nx: usize, nt: usize, length: f64, horizon: f64) -> Result<Self> {
        if nx == 0 {
            return Err(invalid("nx", "must be positive"));
        }
        if nt == 0 {
            return Err(invalid("nt", "must be positive"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid("L", format!("must be finite and > 0, got {length}")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid("T", format!("must be finite and > 0, got {horizon}")));
        }
        Ok(Self { nx, nt, length, horizon })
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }

    /// Space node `x_i = i dx`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// Time node `t_k = k dt`.
    #[inline]
    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..=self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..=self.nt).map(|k| self.t(k)).collect()
    }

    /// Number of lattice nodes, `(nt + 1) (nx + 1)`.
    pub fn node_count(&self) -> usize {
        (self.nt + 1) * (self.nx + 1)
    }

    /// Same grid with both resolutions doubled.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx, nt: 2 * self.nt, ..*self }
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(MfgError::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// What a lattice field represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldRole {
    ValueFunction,
    Density,
    Control,
    Flux,
}

/// Values on a single time level, one per space node.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSlice {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl TimeSlice {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nx + 1 {
            return Err(MfgError::GridMismatch(format!(
                "slice has {} values, grid expects {}",
                values.len(),
                grid.nx + 1
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..=grid.nx).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { grid, values: vec![value; grid.nx + 1] }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Nodewise product with another slice on the same grid.
    pub fn product(&self, other: &TimeSlice) -> TimeSlice {
        debug_assert_eq!(self.values.len(), other.values.len());
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        TimeSlice { grid: self.grid, values }
    }
}

/// Space-time lattice of values, row-major in time: entry `(k, i)` lives
/// at `t_k`, `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub role: FieldRole,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid, role: FieldRole) -> Self {
        Self { grid, role, values: vec![0.0; grid.node_count()] }
    }

    pub fn from_values(grid: Grid, role: FieldRole, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(MfgError::GridMismatch(format!(
                "field has {} values, grid expects {}",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(Self { grid, role, values })
    }

    pub fn from_fn(grid: Grid, role: FieldRole, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut field = Self::zeros(grid, role);
        for k in 0..=grid.nt {
            let t = grid.t(k);
            for (i, v) in field.row_mut(k).iter_mut().enumerate() {
                *v = f(t, grid.x(i));
            }
        }
        field
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.values[k * (self.grid.nx + 1) + i]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, v: f64) {
        let w = self.grid.nx + 1;
        self.values[k * w + i] = v;
    }

    /// Borrowed values of time level `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.grid.nx + 1;
        &self.values[k * w..(k + 1) * w]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        let w = self.grid.nx + 1;
        &mut self.values[k * w..(k + 1) * w]
    }

    /// Owned copy of time level `k`.
    pub fn slice(&self, k: usize) -> TimeSlice {
        TimeSlice { grid: self.grid, values: self.row(k).to_vec() }
    }

    pub fn set_slice(&mut self, k: usize, values: &[f64]) {
        self.row_mut(k).copy_from_slice(values);
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Sup-norm distance to a field on the same grid.
    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }

    /// Applies `f` to each time level and collects the results into a new
    /// field.
    pub fn map_rows(&self, role: FieldRole, mut f: impl FnMut(usize, &[f64]) -> Vec<f64>) -> Self {
        let mut out = Self::zeros(self.grid, role);
        for k in 0..=self.grid.nt {
            let row = f(k, self.row(k));
            out.set_slice(k, &row);
        }
        out
    }
}

/// Trapezoid rule on raw node values with spacing `dx`.
pub(crate) fn trapezoid_raw(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        _ => {
            let inner: f64 = values[1..n - 1].iter().sum();
            dx * (0.5 * values[0] + inner + 0.5 * values[n - 1])
        }
    }
}

/// `dx (v_0/2 + v_1 + ... + v_{nx-1} + v_nx/2)`.
pub fn trapezoid(slice: &TimeSlice) -> f64 {
    trapezoid_raw(&slice.values, slice.grid.dx())
}

/// Second-order first derivative on raw values: centered in the interior,
/// one-sided three-point at the ends. Requires at least three nodes.
pub(crate) fn derivative_raw(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    debug_assert!(n >= 3);
    let mut out = vec![0.0; n];
    let inv2dx = 0.5 / dx;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) * inv2dx;
    }
    out[0] = (4.0 * (values[1] - values[0]) - (values[2] - values[0])) * inv2dx;
    out[n - 1] = ((values[n - 3] - values[n - 1]) - 4.0 * (values[n - 2] - values[n - 1])) * inv2dx;
    out
}

pub fn derivative(slice: &TimeSlice) -> Result<TimeSlice> {
    let nx = slice.grid.nx;
    if nx < 2 {
        return Err(MfgError::GridTooSmall { nx, required: 2 });
    }
    Ok(TimeSlice { grid: slice.grid, values: derivative_raw(&slice.values, slice.grid.dx()) })
}

/// Spatial derivative of every time level of a field.
pub fn derivative_field(field: &ScalarField, role: FieldRole) -> Result<ScalarField> {
    let nx = field.grid.nx;
    if nx < 2 {
        return Err(MfgError::GridTooSmall { nx, required: 2 });
    }
    let dx = field.grid.dx();
    Ok(field.map_rows(role, |_, row| derivative_raw(row, dx)))
}

pub(crate) fn cdf_raw(values: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

pub(crate) fn check_nonnegative(values: &[f64]) -> Result<()> {
    match values.iter().position(|&v| v < -NEGATIVITY_TOL) {
        Some(index) => Err(MfgError::NegativeDensity { index, value: values[index] }),
        None => Ok(()),
    }
}

/// Cumulative distribution `F_i = int_0^{x_i} m` by the trapezoid rule.
pub fn cdf(density: &TimeSlice) -> Result<TimeSlice> {
    check_nonnegative(&density.values)?;
    Ok(TimeSlice { grid: density.grid, values: cdf_raw(&density.values, density.grid.dx()) })
}

/// `int_0^L |F_1 - F_2| dx` for two precomputed CDFs.
pub(crate) fn w1_from_cdfs(f1: &[f64], f2: &[f64], dx: f64) -> f64 {
    let n = f1.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.5 * ((f1[0] - f2[0]).abs() + (f1[n - 1] - f2[n - 1]).abs());
    for i in 1..n - 1 {
        acc += (f1[i] - f2[i]).abs();
    }
    dx * acc
}

/// Wasserstein-1 distance between two equal-mass nonnegative densities,
/// via the one-dimensional CDF formula.
pub fn wasserstein1(m1: &TimeSlice, m2: &TimeSlice) -> Result<f64> {
    m1.grid.ensure_same(&m2.grid)?;
    let f1 = cdf(m1)?;
    let f2 = cdf(m2)?;
    let (a, b) = (f1.values[m1.grid.nx], f2.values[m2.grid.nx]);
    if (a - b).abs() > MASS_MATCH_TOL {
        return Err(MfgError::MassMismatch { left: a, right: b });
    }
    Ok(w1_from_cdfs(&f1.values, &f2.values, m1.grid.dx()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(nx: usize, l: f64) -> Grid {
        Grid::new(nx, 1, l, 1.0).unwrap()
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid::new(0, 4, 1.0, 1.0).is_err());
        assert!(Grid::new(4, 0, 1.0, 1.0).is_err());
        assert!(Grid::new(4, 4, -1.0, 1.0).is_err());
        assert!(Grid::new(4, 4, 1.0, f64::NAN).is_err());
        let g = Grid::new(4, 8, 2.0, 1.0).unwrap();
        assert_eq!(g.node_count(), 45);
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.dt(), 0.125);
    }

    #[test]
    fn trapezoid_examples() {
        assert_eq!(trapezoid(&TimeSlice::constant(grid(4, 2.0), 1.0)), 2.0);
        for nx in [1, 3, 10, 37] {
            let s = TimeSlice::from_fn(grid(nx, 1.0), |x| x);
            assert!((trapezoid(&s) - 0.5).abs() < 1e-15);
        }
        // dx = 1/2: 0.5 * (0/2 + 0.25 + 1/2) = 0.375
        let s = TimeSlice::from_fn(grid(2, 1.0), |x| x * x);
        assert!((trapezoid(&s) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let g = grid(10, 1.0);
        let lin = derivative(&TimeSlice::from_fn(g, |x| 3.0 * x)).unwrap();
        assert!(lin.values.iter().all(|v| (v - 3.0).abs() < 1e-12));
        let c = derivative(&TimeSlice::constant(g, 4.2)).unwrap();
        assert!(c.values.iter().all(|&v| v == 0.0));
        let q = derivative(&TimeSlice::from_fn(g, |x| x * x)).unwrap();
        for i in 0..=10 {
            // one-sided three-point stencils are exact on quadratics too
            assert!((q.values[i] - 2.0 * g.x(i)).abs() < 1e-12);
        }
        assert!(matches!(
            derivative(&TimeSlice::constant(grid(1, 1.0), 1.0)),
            Err(MfgError::GridTooSmall { nx: 1, .. })
        ));
    }

    #[test]
    fn cdf_examples() {
        let g = grid(8, 2.0);
        let f = cdf(&TimeSlice::constant(g, 0.5)).unwrap();
        for i in 0..=8 {
            assert!((f.values[i] - g.x(i) / 2.0).abs() < 1e-15);
        }
        let z = cdf(&TimeSlice::constant(g, 0.0)).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));

        let g = grid(100, 1.0);
        let tri = cdf(&TimeSlice::from_fn(g, |x| 2.0 * x)).unwrap();
        for i in 0..=100 {
            assert!((tri.values[i] - g.x(i).powi(2)).abs() < 1e-12);
        }

        let mut neg = TimeSlice::constant(g, 1.0);
        neg.values[3] = -1e-9;
        assert!(matches!(cdf(&neg), Err(MfgError::NegativeDensity { index: 3, .. })));
    }

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

    #[test]
    fn wasserstein_examples() {
        let g = grid(400, 1.0);
        let a = bump(g, 0.25, 0.02);
        assert_eq!(wasserstein1(&a, &a).unwrap(), 0.0);
        let b = bump(g, 0.75, 0.02);
        assert!((wasserstein1(&a, &b).unwrap() - 0.5).abs() < 0.02);

        // uniform on [0, 1] inside [0, 2] vs uniform on [0, 2]
        let g = grid(400, 2.0);
        let mut u1 = TimeSlice::from_fn(g, |x| if x < 1.0 { 1.0 } else { 0.0 });
        u1.values[200] = 0.5;
        let u2 = TimeSlice::constant(g, 0.5);
        assert!((wasserstein1(&u1, &u2).unwrap() - 0.5).abs() < 1e-4);

        let half = TimeSlice::constant(g, 0.25);
        assert!(matches!(wasserstein1(&u2, &half), Err(MfgError::MassMismatch { .. })));
    }

    fn density_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..5.0, n).prop_map(|v| {
            let g = grid(v.len() - 1, 1.0);
            let mass = trapezoid_raw(&v, g.dx()).max(1e-9);
            v.into_iter().map(|x| x / mass).collect()
        })
    }

    proptest! {
        #[test]
        fn trapezoid_is_linear(
            u in prop::collection::vec(-10.0f64..10.0, 17),
            v in prop::collection::vec(-10.0f64..10.0, 17),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let g = grid(16, 1.7);
            let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
            let lhs = trapezoid(&TimeSlice::new(g, combo).unwrap());
            let rhs = a * trapezoid(&TimeSlice::new(g, u).unwrap()) + b * trapezoid(&TimeSlice::new(g, v).unwrap());
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn wasserstein_is_a_metric(
            a in density_strategy(25),
            b in density_strategy(25),
            c in density_strategy(25),
        ) {
            let g = grid(24, 1.0);
            let (a, b, c) = (
                TimeSlice::new(g, a).unwrap(),
                TimeSlice::new(g, b).unwrap(),
                TimeSlice::new(g, c).unwrap(),
            );
            let ab = wasserstein1(&a, &b).unwrap();
            let ba = wasserstein1(&b, &a).unwrap();
            let bc = wasserstein1(&b, &c).unwrap();
            let ac = wasserstein1(&a, &c).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() < 1e-14);
            prop_assert!(wasserstein1(&a, &a).unwrap() < 1e-12);
            prop_assert!(ac <= ab + bc + 1e-12);
        }

        #[test]
        fn derivative_exact_on_quadratics(c0 in -5.0f64..5.0, c1 in -5.0f64..5.0, c2 in -5.0f64..5.0) {
            let g = grid(12, 2.0);
            let d = derivative(&TimeSlice::from_fn(g, |x| c0 + c1 * x + c2 * x * x)).unwrap();
            for i in 1..12 {
                prop_assert!((d.values[i] - (c1 + 2.0 * c2 * g.x(i))).abs() < 1e-9);
            }
        }
    }
}
