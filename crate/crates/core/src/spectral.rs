//! FFT-based differential calculus, Sobolev (semi)norms and quadrature on
//! periodic grids.
//!
//! Norms are computed by Plancherel with the rectangle-rule normalization
//! `‖f‖² = Δx^n Σ|f_j|² = (Δx^n / N^n) Σ|f̂_m|²`, so every norm reported here is
//! consistent with [`integrate`].

use std::iter::Sum;
use std::ops::Mul;

use rustfft::num_complex::Complex64;

use crate::error::{domain, structural, Result};
use crate::fft;
use crate::grid::{Field, Grid, RealField, Sample, VectorField, MAX_DIM};

/// Rectangle rule on the torus: `Δx^n Σ g_j`.
pub fn integrate<T>(grid: &Grid, samples: &[T]) -> T
where
    T: Copy + Sum<T> + Mul<f64, Output = T>,
{
    samples.iter().copied().sum::<T>() * grid.cell_volume()
}

/// Unnormalized forward FFT of a field.
pub fn spectrum<T: Sample>(f: &Field<T>) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = f.values().iter().map(|v| v.to_complex()).collect();
    fft::forward(f.grid(), &mut data);
    data
}

/// Inverse of [`spectrum`].
pub fn from_spectrum(grid: &Grid, mut data: Vec<Complex64>) -> Field {
    fft::inverse(grid, &mut data);
    Field::from_parts(*grid, data)
}

fn check_len<T: Sample>(f: &Field<T>) -> Result<()> {
    if f.values().len() != f.grid().len() {
        return Err(structural("field length does not match its grid"));
    }
    Ok(())
}

/// Applies `i ε ξ_axis` in Fourier space to an already transformed array.
fn derivative_from_spectrum(grid: &Grid, spec: &[Complex64], axis: usize, eps: f64) -> Vec<Complex64> {
    let xi = grid.derivative_frequencies();
    let mut idx = [0usize; MAX_DIM];
    let mut out: Vec<Complex64> = spec
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            grid.multi_index(i, &mut idx);
            z * Complex64::new(0.0, eps * xi[idx[axis]])
        })
        .collect();
    fft::inverse(grid, &mut out);
    out
}

/// `ε∇f`, one complex field per axis. `ε = 1` gives the plain gradient.
pub fn gradient<T: Sample>(f: &Field<T>, eps: f64) -> Result<Vec<Field>> {
    check_len(f)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(domain(format!("gradient scale must be >= 0, got {eps}")));
    }
    let grid = *f.grid();
    let spec = spectrum(f);
    Ok((0..grid.dim())
        .map(|a| Field::from_parts(grid, derivative_from_spectrum(&grid, &spec, a, eps)))
        .collect())
}

/// `ε∇f` for real `f`, returned as a real vector field.
pub fn real_gradient(f: &RealField, eps: f64) -> Result<VectorField> {
    let parts = gradient(f, eps)?;
    let grid = *f.grid();
    Ok(VectorField::from_parts(
        grid,
        parts
            .into_iter()
            .map(|c| c.values().iter().map(|z| z.re).collect())
            .collect(),
    ))
}

/// `div v` computed spectrally.
pub fn divergence(v: &VectorField) -> RealField {
    let grid = *v.grid();
    let mut acc = vec![0.0; grid.len()];
    for (a, comp) in v.components().iter().enumerate() {
        let mut spec: Vec<Complex64> = comp.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft::forward(&grid, &mut spec);
        let d = derivative_from_spectrum(&grid, &spec, a, 1.0);
        acc.iter_mut().zip(&d).for_each(|(s, z)| *s += z.re);
    }
    Field::from_parts(grid, acc)
}

/// Scalar curl `∂₀v₁ − ∂₁v₀` of a planar vector field.
pub fn curl_2d(v: &VectorField) -> Result<RealField> {
    let grid = *v.grid();
    if grid.dim() != 2 {
        return Err(structural("curl_2d needs a two-dimensional field"));
    }
    let d = |comp: &[f64], axis| {
        let mut spec: Vec<Complex64> = comp.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft::forward(&grid, &mut spec);
        derivative_from_spectrum(&grid, &spec, axis, 1.0)
    };
    let d0v1 = d(v.component(1), 0);
    let d1v0 = d(v.component(0), 1);
    Ok(Field::from_parts(
        grid,
        d0v1.iter().zip(&d1v0).map(|(a, b)| a.re - b.re).collect(),
    ))
}

fn check_order(k: f64, eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&k) {
        return Err(domain(format!("fractional order must lie in [0, 1], got {k}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(domain(format!("semiclassical scale must be > 0, got {eps}")));
    }
    Ok(())
}

/// Multiplier `|εξ|^k` in FFT order; the zero mode maps to `0` for `k > 0`.
fn fractional_multiplier(grid: &Grid, k: f64, eps: f64) -> Vec<f64> {
    grid.frequency_norms_sq()
        .into_iter()
        .map(|x2| (eps * x2.sqrt()).powf(k))
        .collect()
}

/// `|εD|^k f` with `D = -i∇`, for `k ∈ [0, 1]`.
pub fn frac_deriv<T: Sample>(f: &Field<T>, k: f64, eps: f64) -> Result<Field> {
    check_order(k, eps)?;
    check_len(f)?;
    if k == 0.0 {
        return Ok(f.to_complex());
    }
    let grid = *f.grid();
    let mult = fractional_multiplier(&grid, k, eps);
    let mut spec = spectrum(f);
    spec.iter_mut().zip(&mult).for_each(|(z, m)| *z *= *m);
    Ok(from_spectrum(&grid, spec))
}

fn weighted_spectral_norm<T: Sample>(f: &Field<T>, weight: impl Fn(f64) -> f64) -> f64 {
    let grid = f.grid();
    let spec = spectrum(f);
    let xi2 = grid.frequency_norms_sq();
    let sum: f64 = spec
        .iter()
        .zip(&xi2)
        .map(|(z, &x2)| weight(x2) * z.norm_sqr())
        .sum();
    (sum * grid.cell_volume() / grid.len() as f64).sqrt()
}

/// `‖|εD|^k f‖_{L²}` by Plancherel. `k = 0` is the plain `L²` norm.
pub fn sobolev_seminorm<T: Sample>(f: &Field<T>, k: f64, eps: f64) -> Result<f64> {
    check_order(k, eps)?;
    check_len(f)?;
    if k == 0.0 {
        return Ok(weighted_spectral_norm(f, |_| 1.0));
    }
    Ok(weighted_spectral_norm(f, |x2| (eps * eps * x2).powf(k)))
}

/// Homogeneous `Ḣ^m` seminorm for any order `m >= 0` (no `ε` scaling).
pub fn homogeneous_norm<T: Sample>(f: &Field<T>, m: f64) -> Result<f64> {
    if !(m >= 0.0 && m.is_finite()) {
        return Err(domain(format!("Sobolev order must be >= 0, got {m}")));
    }
    check_len(f)?;
    if m == 0.0 {
        return Ok(weighted_spectral_norm(f, |_| 1.0));
    }
    Ok(weighted_spectral_norm(f, |x2| x2.powf(m)))
}

/// Inhomogeneous `H^s` norm, weight `(1 + |ξ|²)^s`.
pub fn sobolev_norm<T: Sample>(f: &Field<T>, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(domain(format!("Sobolev order must be >= 0, got {s}")));
    }
    check_len(f)?;
    Ok(weighted_spectral_norm(f, |x2| (1.0 + x2).powf(s)))
}

/// Mask of the modes kept by the 2/3 rule: `|m| <= N/3` on every axis.
pub fn dealias_mask(grid: &Grid) -> Vec<bool> {
    let n = grid.points_per_axis() as i64;
    let cutoff = n / 3;
    let keep_axis: Vec<bool> = (0..n)
        .map(|j| {
            let m = if j < n / 2 { j } else { j - n };
            m.abs() <= cutoff
        })
        .collect();
    let mut idx = [0usize; MAX_DIM];
    (0..grid.len())
        .map(|i| {
            grid.multi_index(i, &mut idx);
            idx[..grid.dim()].iter().all(|&j| keep_axis[j])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(n: usize, l: f64) -> Grid {
        Grid::new(1, n, l).unwrap()
    }

    #[test]
    fn plane_wave_gradient() {
        // L = 4π puts ξ₀ = 5 on the lattice (m = 10)
        let g = line(128, 4.0 * PI);
        let xi0 = 5.0;
        let f = Field::from_fn(g, |x| Complex64::from_polar(1.0, xi0 * x[0]));
        let grad = gradient(&f, 0.1).unwrap();
        for (d, z) in grad[0].values().iter().zip(f.values()) {
            assert!((d - Complex64::new(0.0, 0.5) * z).norm() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_zero_is_zero() {
        let g = line(32, 3.0);
        let f = Field::<Complex64>::zeros(g);
        let grad = gradient(&f, 1.0).unwrap();
        assert!(grad[0].values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn gaussian_derivative_is_spectral() {
        let g = line(256, 30.0);
        let f = RealField::from_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
        let grad = real_gradient(&f, 1.0).unwrap();
        let xs = g.axis_nodes();
        let err = grad
            .component(0)
            .iter()
            .zip(&xs)
            .map(|(d, &x)| (d + x * (-x * x / 2.0).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn fractional_plane_wave_and_identity() {
        let g = line(128, 4.0 * PI);
        let f = Field::from_fn(g, |x| Complex64::from_polar(1.0, 5.0 * x[0]));
        let d = frac_deriv(&f, 0.5, 0.1).unwrap();
        for (a, b) in d.values().iter().zip(f.values()) {
            assert!((a - b * 0.5f64.sqrt()).norm() < 1e-12);
        }
        let same = frac_deriv(&f, 0.0, 0.3).unwrap();
        assert_eq!(same.values(), f.values());
        assert!(frac_deriv(&f, 1.5, 0.1).is_err());
        assert!(frac_deriv(&f, -0.1, 0.1).is_err());
        assert!(sobolev_seminorm(&f, 0.5, 0.0).is_err());
    }

    #[test]
    fn seminorm_examples() {
        let g = line(512, 40.0);
        assert_eq!(sobolev_seminorm(&RealField::zeros(g), 0.7, 1.0).unwrap(), 0.0);
        let f = RealField::from_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
        // ∫ x² e^{-x²} dx = √π / 2
        let expect = (PI.sqrt() / 2.0).sqrt();
        let got = sobolev_seminorm(&f, 1.0, 1.0).unwrap();
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
        assert!((expect - 0.94139).abs() < 1e-5);
        let l2 = sobolev_seminorm(&f, 0.0, 1.0).unwrap();
        assert!((l2 - f.l2_norm()).abs() < 1e-13);
    }

    #[test]
    fn integrate_examples() {
        let g = line(64, 10.0);
        let ones = vec![1.0; 64];
        assert!((integrate(&g, &ones) - 10.0).abs() < 1e-13);
        let g = line(512, 20.0);
        let gauss = RealField::from_fn(g, |x| (-2.0 * x[0] * x[0]).exp());
        assert!((integrate(&g, gauss.values()) - (PI / 2.0).sqrt()).abs() < 1e-13);
        // odd about the box center: sample x and -x symmetrically (node 0 is -L/2)
        let odd = RealField::from_fn(g, |x| x[0] * (-x[0] * x[0]).exp());
        assert!(integrate(&g, odd.values()).abs() < 1e-15);
        let c = Field::from_fn(g, |_| Complex64::new(0.0, 2.0));
        assert!((integrate(&g, c.values()) - Complex64::new(0.0, 40.0)).norm() < 1e-12);
    }

    #[test]
    fn dealias_keeps_low_modes() {
        let g = line(12usize.next_power_of_two(), 1.0);
        let m = dealias_mask(&g);
        // N = 16, cutoff 5: keep 0..=5 and -5..=-1
        assert_eq!(m.iter().filter(|&&k| k).count(), 11);
        assert!(m[0] && m[5] && !m[6] && !m[8] && m[11]);
    }

    #[test]
    fn curl_of_gradient_vanishes_2d() {
        let g = Grid::new(2, 64, 12.0).unwrap();
        let phi = RealField::from_fn(g, |x| (-(x[0] * x[0] + 0.5 * x[1] * x[1])).exp() * (1.0 + x[0]));
        let v = real_gradient(&phi, 1.0).unwrap();
        let c = curl_2d(&v).unwrap();
        assert!(c.values().iter().fold(0.0f64, |m, x| m.max(x.abs())) < 1e-12);
        let div = divergence(&v);
        assert!(div.is_finite());
    }
}
