//! Browser bindings used by `www/index.html`.
//!
//! Three operations are exposed: evolving a Gaussian under the semiclassical
//! equation next to its dispersionless limit, the wave-packet phase-space
//! picture of a chirped Gaussian, and the norm-growth table of the
//! concentrating initial data.

use nlsinflate::inflation::{make_datum, predict_exponent, ScalingParams};
use nlsinflate::limit::{LimitConfig, LimitSolver};
use nlsinflate::nls::{run, NlsConfig};
use nlsinflate::spectral::homogeneous_norm;
use nlsinflate::wavepacket::{wp_transform, WavePacketConfig};
use nlsinflate::{Complex64, Field, Grid};
use wasm_bindgen::prelude::*;

const MIN_STEPS: f64 = 200.0;

fn js_err(e: nlsinflate::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn gaussian(grid: Grid, amplitude: f64) -> Field {
    Field::from_fn(grid, |x| Complex64::new(amplitude * (-x[0] * x[0]).exp(), 0.0))
}

/// Densities at a single time on a 1-D grid.
#[wasm_bindgen]
pub struct Snapshot {
    x: Vec<f64>,
    nls: Vec<f64>,
    limit: Vec<f64>,
    limit_time: f64,
}

#[wasm_bindgen]
impl Snapshot {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    /// `|u^ε(t)|²`.
    #[wasm_bindgen(getter)]
    pub fn nls(&self) -> Vec<f64> {
        self.nls.clone()
    }

    /// `|a(t)|²` of the limit system, or at the last time it stayed smooth.
    #[wasm_bindgen(getter)]
    pub fn limit(&self) -> Vec<f64> {
        self.limit.clone()
    }

    #[wasm_bindgen(getter, js_name = limitTime)]
    pub fn limit_time(&self) -> f64 {
        self.limit_time
    }
}

/// Evolves `a₀ = amplitude·exp(−x²)` to time `t` under both the `ε`
/// equation and the limit system.
#[wasm_bindgen]
pub fn evolve(eps: f64, sigma: u32, amplitude: f64, t: f64, points: usize, length: f64) -> Result<Snapshot, JsError> {
    let grid = Grid::new(1, points, length).map_err(js_err)?;
    let a0 = gaussian(grid, amplitude);
    let x = grid.axis_nodes();
    if t <= 0.0 {
        let rho = a0.modulus_sq().into_values();
        return Ok(Snapshot { x, nls: rho.clone(), limit: rho, limit_time: 0.0 });
    }

    let probe = NlsConfig::new(eps, sigma, 1.0, t);
    let dt = probe.max_dt(&a0).map_err(js_err)?.min(t / MIN_STEPS);
    let states = run(NlsConfig { dt, ..probe }, a0.clone(), &[t]).map_err(js_err)?;
    let nls = states.last().map(|s| s.u().modulus_sq().into_values()).unwrap_or_default();

    let solver = LimitSolver::new(LimitConfig::new(sigma, t), grid).map_err(js_err)?;
    let traj = solver.solve(&a0, &[0.0, t]).map_err(js_err)?;
    let last = traj.states.last().ok_or_else(|| JsError::new("empty limit trajectory"))?;
    Ok(Snapshot { x, nls, limit: last.a.modulus_sq().into_values(), limit_time: last.t })
}

/// `|Wu|²` on a phase-space grid, row-major with `ξ` as the slow index.
#[wasm_bindgen]
pub struct PhaseSpace {
    nx: usize,
    nxi: usize,
    x_extent: f64,
    xi_extent: f64,
    values: Vec<f64>,
}

#[wasm_bindgen]
impl PhaseSpace {
    #[wasm_bindgen(getter)]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[wasm_bindgen(getter)]
    pub fn nxi(&self) -> usize {
        self.nxi
    }

    #[wasm_bindgen(getter, js_name = xExtent)]
    pub fn x_extent(&self) -> f64 {
        self.x_extent
    }

    #[wasm_bindgen(getter, js_name = xiExtent)]
    pub fn xi_extent(&self) -> f64 {
        self.xi_extent
    }

    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
}

/// Transforms `exp(−x²)·exp(i·chirp·x²/(2ε))`, whose mass sits on the line
/// `ξ = chirp·x`.
#[wasm_bindgen]
pub fn phase_space(eps: f64, chirp: f64, points: usize, length: f64) -> Result<PhaseSpace, JsError> {
    let grid = Grid::new(1, points, length).map_err(js_err)?;
    let u = Field::from_fn(grid, |x| Complex64::from_polar((-x[0] * x[0]).exp(), chirp * x[0] * x[0] / (2.0 * eps)));
    let cfg = WavePacketConfig::auto(&u, eps, chirp.abs() * 0.5 * length).map_err(js_err)?;
    let w = wp_transform(&u, &cfg).map_err(js_err)?;
    Ok(PhaseSpace {
        nx: w.x_grid.points_per_axis(),
        nxi: w.xi_grid.points_per_axis(),
        x_extent: 0.5 * w.x_grid.box_length(),
        xi_extent: 0.5 * w.xi_grid.box_length(),
        values: w.values.iter().map(|z| z.norm_sqr()).collect(),
    })
}

/// Measured `‖φ^h‖_{Ḣ^k}` for `h = 2^{-1}, …, 2^{-levels}`, then the
/// exponent `s − k` those norms should follow, then the predicted exponent
/// of `h` in `‖ψ^h(t^h)‖_{Ḣ^k}` after the nonlinear evolution.
#[wasm_bindgen]
pub fn datum_norms(n: u32, sigma: u32, s: f64, k: f64, levels: u32) -> Result<Vec<f64>, JsError> {
    let base = ScalingParams::new(n, sigma, s, 0.5).map_err(js_err)?;
    let grid = Grid::new(n as usize, if n == 1 { 1024 } else { 64 }, 16.0).map_err(js_err)?;
    let a0 = Field::from_fn(grid, |x| Complex64::new((-x.iter().map(|c| c * c).sum::<f64>()).exp(), 0.0));
    let mut out = Vec::with_capacity(levels as usize + 2);
    for j in 1..=levels {
        let p = base.with_h(0.5f64.powi(j as i32)).map_err(js_err)?;
        let datum = make_datum(&p, &a0).map_err(js_err)?;
        out.push(homogeneous_norm(&datum, k).map_err(js_err)?);
    }
    out.push(s - k);
    out.push(predict_exponent(&base, k).1);
    Ok(out)
}
