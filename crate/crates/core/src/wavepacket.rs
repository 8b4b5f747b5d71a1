//! Gaussian wave-packet (FBI) transform in one space dimension
//!
//! ```text
//! W u(x, ξ) = c ε^{-3/4} ∫ exp(i(x−y)ξ/ε − (x−y)²/(2ε)) u(y) dy,   c = 2^{-1/2} π^{-3/4},
//! ```
//!
//! an isometry `L²(ℝ) → L²(ℝ²)`, together with the commutator estimates that
//! transfer pointwise weights in `x` and `ξ` across the transform, and the
//! resulting lower bound for `‖|εD|^k u‖` in terms of `‖|v|^k a‖`.
//!
//! The `y`-integral is a trapezoid sum over the periodic input lattice with
//! the Gaussian window cut at `9.1√ε`. Output `x` nodes are every `stride`-th
//! input node; the `ξ` axis is `[−Ξ, Ξ)` with its own resolution. Before
//! transforming, the spectral content of `u` is used to certify that the mass
//! of `|Wu|²` outside `[−Ξ, Ξ]` is below `1e-10`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::grid::{Field, Grid, RealField, VectorField};
use crate::par;
use crate::spectral::{frac_deriv, gradient, integrate, real_gradient, sobolev_seminorm, spectrum};
use crate::Complex64;

/// Window cut-off in units of `√ε`; `exp(−9.1²/2) ≈ 1e-18`.
const WINDOW_WIDTHS: f64 = 9.1;
/// Maximum discarded `ξ` mass.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// `c_n` for `n = 1`.
pub fn normalization() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 * PI.powf(-0.75)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacketConfig {
    pub eps: f64,
    /// Output `x` nodes are every `x_stride`-th input node (power of two).
    pub x_stride: usize,
    /// Number of `ξ` nodes (power of two).
    pub xi_points: usize,
    /// `Ξ`: the `ξ` axis is `[−Ξ, Ξ)`.
    pub xi_extent: f64,
}

impl WavePacketConfig {
    /// Resolution picked from the data: output spacing `≤ √ε/3`, `ξ` spacing
    /// `≤ √ε/4`, and `Ξ` large enough for the tail test, at least `4 max|v|`.
    pub fn auto(u: &Field, eps: f64, v_max: f64) -> Result<Self> {
        check_eps(eps)?;
        let dy = u.grid().spacing();
        let se = eps.sqrt();
        let mut stride = 1;
        while (2 * stride) as f64 * dy <= se / 3.0 && 2 * stride < u.grid().points_per_axis() {
            stride *= 2;
        }
        let xi_extent = (4.0 * v_max).max(spectral_reach(u, eps) + 6.0 * se);
        let xi_points = ((2.0 * xi_extent) / (0.25 * se)).ceil().max(2.0) as usize;
        Ok(Self { eps, x_stride: stride, xi_points: xi_points.next_power_of_two(), xi_extent })
    }

    /// Both output resolutions doubled.
    pub fn refined(&self) -> Self {
        Self {
            x_stride: (self.x_stride / 2).max(1),
            xi_points: self.xi_points * 2,
            ..*self
        }
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        check_eps(self.eps)?;
        if grid.dim() != 1 {
            return Err(config("the wave-packet transform is implemented for n = 1"));
        }
        if !self.x_stride.is_power_of_two() || self.x_stride >= grid.points_per_axis() {
            return Err(config(format!("x stride {} must be a power of two below N", self.x_stride)));
        }
        if !self.xi_points.is_power_of_two() || self.xi_points < 2 {
            return Err(config(format!("ξ resolution {} must be a power of two ≥ 2", self.xi_points)));
        }
        if !(self.xi_extent > 0.0 && self.xi_extent.is_finite()) {
            return Err(config("ξ extent must be > 0"));
        }
        if grid.spacing() > 0.25 * self.eps.sqrt() {
            return Err(config(format!(
                "input spacing {:.3e} exceeds √ε/4 = {:.3e}",
                grid.spacing(),
                0.25 * self.eps.sqrt()
            )));
        }
        Ok(())
    }

    pub fn x_grid(&self, input: &Grid) -> Result<Grid> {
        Grid::new(1, input.points_per_axis() / self.x_stride, input.box_length())
    }

    pub fn xi_grid(&self) -> Result<Grid> {
        Grid::new(1, self.xi_points, 2.0 * self.xi_extent)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(config(format!("ε must be > 0, got {eps}")));
    }
    Ok(())
}

/// `ε·η*` where `η*` bounds all but `1e-14` of the spectral mass of `u`.
fn spectral_reach(u: &Field, eps: f64) -> f64 {
    let spec = spectrum(u);
    let eta = u.grid().axis_frequencies();
    let mut pairs: Vec<(f64, f64)> = spec.iter().zip(&eta).map(|(z, e)| (e.abs(), z.norm_sqr())).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut tail = 0.0;
    for (e, w) in pairs {
        tail += w;
        if tail > 1e-14 * total {
            return eps * e;
        }
    }
    0.0
}

/// Fraction of `∫∫|Wu|²` lying outside `|ξ| ≤ Ξ`, computed from the Fourier
/// coefficients of `u` (each mode contributes a Gaussian in `ξ` of variance
/// `ε/2` centred at `εη`).
pub fn xi_tail_fraction(u: &Field, eps: f64, xi_extent: f64) -> f64 {
    let spec = spectrum(u);
    let eta = u.grid().axis_frequencies();
    let se = eps.sqrt();
    let mut total = 0.0;
    let mut tail = 0.0;
    for (z, e) in spec.iter().zip(&eta) {
        let w = z.norm_sqr();
        total += w;
        let c = eps * e;
        tail += w * 0.5 * (libm::erfc((xi_extent - c) / se) + libm::erfc((xi_extent + c) / se));
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Samples of `Wu` on the product grid, stored `ξ`-major.
#[derive(Debug, Clone)]
pub struct PhaseSpaceField {
    pub x_grid: Grid,
    pub xi_grid: Grid,
    pub values: Vec<Complex64>,
}

impl PhaseSpaceField {
    pub fn xi_nodes(&self) -> Vec<f64> {
        self.xi_grid.axis_nodes()
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        self.x_grid.axis_nodes()
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        let nx = self.x_grid.points_per_axis();
        &self.values[j * nx..(j + 1) * nx]
    }

    pub fn cell_area(&self) -> f64 {
        self.x_grid.spacing() * self.xi_grid.spacing()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_area()).sqrt()
    }

    /// Combines two fields node by node; `f` also receives the `x` index and
    /// the `ξ` coordinate.
    fn combine(&self, other: &Self, f: impl Fn(Complex64, Complex64, usize, f64) -> Complex64) -> Self {
        let xis = self.xi_nodes();
        let nx = self.x_grid.points_per_axis();
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| f(*a, *b, i % nx, xis[i / nx]))
            .collect();
        Self { x_grid: self.x_grid, xi_grid: self.xi_grid, values }
    }
}

/// `W^ε u` on the grids described by `cfg`.
pub fn wp_transform(u: &Field, cfg: &WavePacketConfig) -> Result<PhaseSpaceField> {
    let grid = *u.grid();
    cfg.check(&grid)?;
    let peak = u.max_modulus();
    let edge = u.values()[0].norm().max(u.values()[grid.len() - 1].norm());
    if peak > 0.0 && edge > 1e-12 * peak {
        return Err(config(format!(
            "data do not decay at the box boundary (|u| = {edge:.2e} relative to max {peak:.2e})"
        )));
    }
    let tail = xi_tail_fraction(u, cfg.eps, cfg.xi_extent);
    if tail > TAIL_TOLERANCE {
        return Err(config(format!(
            "ξ extent {} leaves a tail mass fraction {tail:.2e} > {TAIL_TOLERANCE:e}",
            cfg.xi_extent
        )));
    }
    Ok(transform_unchecked(u, cfg))
}

fn transform_unchecked(u: &Field, cfg: &WavePacketConfig) -> PhaseSpaceField {
    let grid = *u.grid();
    let n = grid.points_per_axis();
    let dy = grid.spacing();
    let eps = cfg.eps;
    let half = ((WINDOW_WIDTHS * eps.sqrt() / dy).ceil() as usize).min(n / 2 - 1);
    let x_grid = cfg.x_grid(&grid).expect("checked");
    let xi_grid = cfg.xi_grid().expect("checked");
    let nx = x_grid.points_per_axis();
    let prefactor = normalization() * eps.powf(-0.75) * dy;
    let window: Vec<f64> = (0..=2 * half)
        .map(|j| {
            let z = (j as f64 - half as f64) * dy;
            (-z * z / (2.0 * eps)).exp()
        })
        .collect();
    let vals = u.values();
    let xis = xi_grid.axis_nodes();
    let rows = par::map(&xis, |&xi| {
        let kernel: Vec<Complex64> = window
            .iter()
            .enumerate()
            .map(|(j, w)| {
                let z = (j as f64 - half as f64) * dy;
                Complex64::from_polar(prefactor * w, z * xi / eps)
            })
            .collect();
        (0..nx)
            .map(|i| {
                let centre = i * cfg.x_stride;
                kernel
                    .iter()
                    .enumerate()
                    .map(|(j, k)| {
                        // y = x − z with z = (j − half)·Δy
                        let idx = (centre + n + half - j) % n;
                        k * vals[idx]
                    })
                    .sum::<Complex64>()
            })
            .collect::<Vec<_>>()
    });
    PhaseSpaceField { x_grid, xi_grid, values: rows.into_iter().flatten().collect() }
}

/// `|‖Wu‖ − ‖u‖| / ‖u‖`.
pub fn isometry_defect(u: &Field, cfg: &WavePacketConfig) -> Result<f64> {
    let w = wp_transform(u, cfg)?;
    let nu = u.l2_norm();
    Ok(if nu == 0.0 { w.l2_norm() } else { (w.l2_norm() - nu).abs() / nu })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub eps: f64,
    pub s: f64,
    /// `‖|v|^s Wu − W(|v|^s u)‖`, `‖|ξ|^s Wu − W(|εD|^s u)‖`,
    /// `‖(iξ − iv)Wu − W((ε∇ − iv)u)‖`.
    pub residuals: [f64; 3],
    /// `ε^{s/2}‖∇v‖_∞^s‖u‖`, `ε^{s/2}‖u‖`, `ε^{1/2}(1 + ‖∇v‖_∞)‖u‖`.
    pub envelopes: [f64; 3],
}

impl CommutatorReport {
    /// Residual over envelope; the smallest constant the estimate holds with.
    pub fn constants(&self) -> [f64; 3] {
        let mut k = [0.0; 3];
        for j in 0..3 {
            k[j] = if self.envelopes[j] > 0.0 { self.residuals[j] / self.envelopes[j] } else { 0.0 };
        }
        k
    }
}

fn sup_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// The three commutator residuals for a real velocity `v`, each paired with
/// its envelope (constant 1).
pub fn commutator_residuals(u: &Field, v: &RealField, s: f64, cfg: &WavePacketConfig) -> Result<CommutatorReport> {
    if !(0.0..=1.0).contains(&s) {
        return Err(config(format!("commutator order s must be in [0, 1], got {s}")));
    }
    u.grid().ensure_same(v.grid(), "velocity")?;
    let eps = cfg.eps;
    let grad_v = sup_abs(real_gradient(v, 1.0)?.component(0));
    let norm_u = u.l2_norm();
    let vs: Vec<f64> = v.values().iter().map(|x| x.abs().powf(s)).collect();
    let stride = cfg.x_stride;
    let v_out: Vec<f64> = v.values().iter().step_by(stride).copied().collect();
    let vs_out: Vec<f64> = vs.iter().step_by(stride).copied().collect();

    let wu = wp_transform(u, cfg)?;
    let weighted = Field::from_parts(*u.grid(), u.values().iter().zip(&vs).map(|(z, w)| z * w).collect());
    let w_weighted = transform_unchecked(&weighted, cfg);
    let r1 = wu.combine(&w_weighted, |a, b, i, _| a * vs_out[i] - b);
    let w_frac = transform_unchecked(&frac_deriv(u, s, eps)?, cfg);
    let r2 = wu.combine(&w_frac, |a, b, _, xi| a * xi.abs().powf(s) - b);

    let du = &gradient(u, eps)?[0];
    let cov = Field::from_parts(
        *u.grid(),
        du.values()
            .iter()
            .zip(u.values())
            .zip(v.values())
            .map(|((d, z), vx)| d - Complex64::i() * vx * z)
            .collect(),
    );
    let w_cov = transform_unchecked(&cov, cfg);
    let r3 = wu.combine(&w_cov, |a, b, i, xi| Complex64::i() * (xi - v_out[i]) * a - b);

    let es = eps.powf(0.5 * s);
    Ok(CommutatorReport {
        eps,
        s,
        residuals: [r1.l2_norm(), r2.l2_norm(), r3.l2_norm()],
        envelopes: [es * grad_v.powf(s) * norm_u, es * norm_u, eps.sqrt() * (1.0 + grad_v) * norm_u],
    })
}

/// `|x|^s ≤ |y|^s + |x − y|^s`, allowing a few ulps of rounding.
pub fn elementary_inequality_check(x: &[f64], y: &[f64], s: f64) -> bool {
    let norm = |z: &mut dyn Iterator<Item = f64>| z.map(|c| c * c).sum::<f64>().sqrt();
    let nx = norm(&mut x.iter().copied());
    let ny = norm(&mut y.iter().copied());
    let nd = norm(&mut x.iter().zip(y).map(|(a, b)| a - b));
    let lhs = nx.powf(s);
    let rhs = ny.powf(s) + nd.powf(s);
    lhs <= rhs * (1.0 + 8.0 * f64::EPSILON)
}

/// Counts violations of [`elementary_inequality_check`] over `samples`
/// random pairs of vectors in dimensions 1–3 with log-uniform scales.
pub fn elementary_inequality_sweep(samples: usize, s: f64, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut x = [0.0; 3];
    let mut y = [0.0; 3];
    for _ in 0..samples {
        let dim = rng.gen_range(1..=3);
        let sx = 10f64.powf(rng.gen_range(-6.0..6.0));
        let sy = 10f64.powf(rng.gen_range(-6.0..6.0));
        for j in 0..dim {
            x[j] = sx * rng.gen_range(-1.0..1.0);
            y[j] = if rng.gen_bool(0.1) { x[j] * rng.gen_range(0.0..2.0) } else { sy * rng.gen_range(-1.0..1.0) };
        }
        if !elementary_inequality_check(&x[..dim], &y[..dim], s) {
            violations += 1;
        }
    }
    violations
}

/// Terms of the lower bound
/// `‖|v|^k u‖ ≤ ‖|εD|^k u‖ + ‖(ε∇ − iv)u‖^k‖u‖^{1−k} + K ε^{k/2}(1 + ‖∇v‖_∞)‖u‖`
/// and of its comparison with the limit amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicrolocalReport {
    pub k: f64,
    pub eps: f64,
    /// `‖|v|^k u‖`.
    pub lhs: f64,
    /// `‖|εD|^k u‖`.
    pub frac: f64,
    /// `‖(ε∇ − iv)u‖^k ‖u‖^{1−k}`.
    pub covariant: f64,
    /// `ε^{k/2}(1 + ‖∇v‖_∞)‖u‖`.
    pub envelope: f64,
    /// `‖|v|^k a‖`.
    pub target: f64,
    /// `‖|v|^{2k}‖_{L^{1+1/σ}} ‖ρ^ε − ρ‖_{L^{σ+1}}`.
    pub holder_bridge: f64,
}

impl MicrolocalReport {
    /// Smallest `K ≥ 0` for which the inequality holds.
    pub fn measured_constant(&self) -> f64 {
        let gap = self.lhs - self.frac - self.covariant;
        if gap <= 0.0 || self.envelope == 0.0 {
            0.0
        } else {
            gap / self.envelope
        }
    }
}

fn lp_norm(grid: &Grid, values: &[f64], p: f64) -> f64 {
    let pw: Vec<f64> = values.iter().map(|x| x.abs().powf(p)).collect();
    integrate(grid, &pw).powf(1.0 / p)
}

pub fn microlocal_lower_bound(
    u_eps: &Field,
    v: &VectorField,
    a: &Field,
    k: f64,
    eps: f64,
    sigma: u32,
) -> Result<MicrolocalReport> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(config(format!("k must lie in (0, 1], got {k}")));
    }
    check_eps(eps)?;
    let grid = *u_eps.grid();
    grid.ensure_same(v.grid(), "velocity")?;
    grid.ensure_same(a.grid(), "amplitude")?;
    let speed = v.magnitude();
    let weight: Vec<f64> = speed.values().iter().map(|m| m.powf(k)).collect();
    let weighted_norm = |f: &Field| {
        let d: Vec<f64> = f.values().iter().zip(&weight).map(|(z, w)| w * w * z.norm_sqr()).collect();
        integrate(&grid, &d).sqrt()
    };
    let mut grad_v: f64 = 0.0;
    for c in v.components() {
        for comp in real_gradient(&RealField::from_parts(grid, c.clone()), 1.0)?.components() {
            grad_v = grad_v.max(sup_abs(comp));
        }
    }
    let grads = gradient(u_eps, eps)?;
    let mut cov = vec![0.0; grid.len()];
    for (g, vj) in grads.iter().zip(v.components()) {
        for ((c, d), (z, vx)) in cov.iter_mut().zip(g.values()).zip(u_eps.values().iter().zip(vj)) {
            *c += (d - Complex64::i() * vx * z).norm_sqr();
        }
    }
    let cov_norm = integrate(&grid, &cov).sqrt();
    let nu = u_eps.l2_norm();
    let sf = f64::from(sigma);
    let w2k: Vec<f64> = weight.iter().map(|w| w * w).collect();
    let drho: Vec<f64> = u_eps.values().iter().zip(a.values()).map(|(z, w)| z.norm_sqr() - w.norm_sqr()).collect();
    Ok(MicrolocalReport {
        k,
        eps,
        lhs: weighted_norm(u_eps),
        frac: sobolev_seminorm(u_eps, k, eps)?,
        covariant: cov_norm.powf(k) * nu.powf(1.0 - k),
        envelope: eps.powf(0.5 * k) * (1.0 + grad_v) * nu,
        target: weighted_norm(a),
        holder_bridge: lp_norm(&grid, &w2k, 1.0 + 1.0 / sf) * lp_norm(&grid, &drho, sf + 1.0),
    })
}
