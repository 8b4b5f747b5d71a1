//! Periodic grids and the sampled fields that live on them.
//!
//! A [`Grid`] is the box `[-L/2, L/2)^n` sampled with `N` points per axis.
//! Samples are stored row-major with axis 0 varying slowest, which is also
//! the layout the FFT helpers expect.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, structural, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, points_per_axis: usize, box_length: f64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(config(format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
        }
        if points_per_axis < 2 || !points_per_axis.is_power_of_two() {
            return Err(config(format!(
                "points per axis must be a power of two >= 2, got {points_per_axis}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(config(format!("box length must be positive, got {box_length}")));
        }
        Ok(Self {
            dim,
            points: points_per_axis,
            length: box_length,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn box_length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Total number of nodes, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `Δx^n`, the weight of the rectangle rule.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Node coordinates along one axis, `-L/2 + jΔx`.
    pub fn axis_nodes(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.points)
            .map(|j| -0.5 * self.length + j as f64 * dx)
            .collect()
    }

    /// Dual frequencies along one axis in FFT order:
    /// `(2π/L)·{0, 1, …, N/2-1, -N/2, …, -1}`.
    pub fn axis_frequencies(&self) -> Vec<f64> {
        let n = self.points as i64;
        let base = 2.0 * PI / self.length;
        (0..n)
            .map(|j| {
                let m = if j < n / 2 { j } else { j - n };
                base * m as f64
            })
            .collect()
    }

    /// Same as [`Grid::axis_frequencies`] with the Nyquist mode zeroed, used
    /// for odd-order derivatives so real input stays real.
    pub fn derivative_frequencies(&self) -> Vec<f64> {
        let mut xi = self.axis_frequencies();
        xi[self.points / 2] = 0.0;
        xi
    }

    /// `max |ξ_j| = πN/L`.
    pub fn max_frequency(&self) -> f64 {
        PI * self.points as f64 / self.length
    }

    /// Per-axis multi-index of a flat index.
    pub fn multi_index(&self, mut index: usize, out: &mut [usize]) {
        for a in (0..self.dim).rev() {
            out[a] = index % self.points;
            index /= self.points;
        }
    }

    /// `|ξ|²` at every node of the spectral array, in FFT order.
    pub fn frequency_norms_sq(&self) -> Vec<f64> {
        let xi = self.axis_frequencies();
        let mut idx = [0usize; MAX_DIM];
        (0..self.len())
            .map(|i| {
                self.multi_index(i, &mut idx);
                idx[..self.dim].iter().map(|&j| xi[j] * xi[j]).sum()
            })
            .collect()
    }

    /// Coordinates of every node, flattened with stride `dim`.
    pub fn coordinates(&self) -> Vec<f64> {
        let nodes = self.axis_nodes();
        let mut idx = [0usize; MAX_DIM];
        let mut out = Vec::with_capacity(self.len() * self.dim);
        for i in 0..self.len() {
            self.multi_index(i, &mut idx);
            out.extend(idx[..self.dim].iter().map(|&j| nodes[j]));
        }
        out
    }

    /// The same lattice with the box scaled by `factor`.
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        Self::new(self.dim, self.points, self.length * factor)
    }

    pub(crate) fn ensure_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self != other {
            return Err(structural(format!(
                "{what}: grid mismatch ({self:?} vs {other:?})"
            )));
        }
        Ok(())
    }
}

/// Scalar sample types a [`Field`] can hold.
pub trait Sample: Copy + Send + Sync + std::fmt::Debug + 'static {
    fn is_finite_sample(&self) -> bool;
    fn modulus_sq(&self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl Sample for f64 {
    fn is_finite_sample(&self) -> bool {
        self.is_finite()
    }
    fn modulus_sq(&self) -> f64 {
        self * self
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Sample for Complex64 {
    fn is_finite_sample(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn modulus_sq(&self) -> f64 {
        self.norm_sqr()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Samples of a function on a [`Grid`], one per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T = Complex64> {
    grid: Grid,
    values: Vec<T>,
}

/// A real-valued field (densities, phases).
pub type RealField = Field<f64>;

impl<T: Sample> Field<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(structural(format!(
                "field has {} samples, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite_sample()) {
            return Err(structural(format!("non-finite sample at node {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor for values already known to be consistent.
    pub(crate) fn from_parts(grid: Grid, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    /// Samples `f` at every node; `f` receives the node coordinates.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> T) -> Self {
        let coords = grid.coordinates();
        let values = coords.chunks(grid.dim()).map(|x| f(x)).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self
    where
        T: Default,
    {
        Self {
            grid,
            values: vec![T::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(Sample::is_finite_sample)
    }

    pub fn max_modulus(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.modulus_sq())
            .fold(0.0, f64::max)
            .sqrt()
    }

    /// `‖f‖_{L²}` with the rectangle rule.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(Sample::modulus_sq).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn to_complex(&self) -> Field {
        self.map(Sample::to_complex)
    }
}

impl Field {
    pub fn real_part(&self) -> RealField {
        self.map(|z| z.re)
    }

    pub fn modulus_sq(&self) -> RealField {
        self.map(|z| z.norm_sqr())
    }

    pub fn scale(&self, factor: Complex64) -> Field {
        self.map(|z| z * factor)
    }
}

/// `n` real components on one grid (velocities, currents).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: Grid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(structural(format!(
                "vector field has {} components on a {}-dimensional grid",
                components.len(),
                grid.dim()
            )));
        }
        for c in &components {
            if c.len() != grid.len() {
                return Err(structural("vector component length does not match grid"));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(structural("non-finite vector component sample"));
            }
        }
        Ok(Self { grid, components })
    }

    pub(crate) fn from_parts(grid: Grid, components: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(components.len(), grid.dim());
        Self { grid, components }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            components: vec![vec![0.0; grid.len()]; grid.dim()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &[f64] {
        &self.components[j]
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.components
    }

    /// Pointwise Euclidean norm `|v(x)|`.
    pub fn magnitude(&self) -> RealField {
        let values = (0..self.grid.len())
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c[i] * c[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        Field::from_parts(self.grid, values)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitude().values().iter().copied().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_times_points_is_length() {
        let g = Grid::new(1, 256, 12.5).unwrap();
        assert_eq!(g.spacing() * 256.0, 12.5);
        assert_eq!(g.axis_nodes()[0], -6.25);
    }

    #[test]
    fn frequencies_follow_fft_order() {
        let g = Grid::new(1, 8, 2.0 * PI).unwrap();
        let xi = g.axis_frequencies();
        assert_eq!(xi, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        let max = xi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((max - g.max_frequency()).abs() < 1e-14);
        assert_eq!(g.derivative_frequencies()[4], 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1, 100, 1.0).is_err());
        assert!(Grid::new(0, 64, 1.0).is_err());
        assert!(Grid::new(1, 64, -1.0).is_err());
        assert!(Grid::new(4, 4, 1.0).is_err());
    }

    #[test]
    fn field_checks_length_and_finiteness() {
        let g = Grid::new(1, 4, 1.0).unwrap();
        assert!(RealField::new(g, vec![0.0; 3]).is_err());
        assert!(RealField::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(RealField::new(g, vec![0.0; 4]).is_ok());
    }

    #[test]
    fn two_dimensional_layout_is_row_major() {
        let g = Grid::new(2, 4, 4.0).unwrap();
        let f = RealField::from_fn(g, |x| 10.0 * x[0] + x[1]);
        // node (1, 2): x0 = -1, x1 = 0
        assert_eq!(f.values()[4 + 2], -10.0);
        let mut idx = [0; MAX_DIM];
        g.multi_index(6, &mut idx);
        assert_eq!(&idx[..2], &[1, 2]);
    }
}
