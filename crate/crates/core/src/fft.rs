//! n-dimensional complex FFTs on grid-shaped buffers.
//!
//! Forward transforms are unnormalized; inverse transforms divide by `N^n`.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::Grid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.points_per_axis();
    let dim = grid.dim();
    debug_assert_eq!(data.len(), grid.len());
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });

    // Last axis is contiguous.
    fft.process(data);
    if dim > 1 {
        let mut line = vec![Complex64::default(); n];
        for axis in 0..dim - 1 {
            let stride = n.pow((dim - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, z) in line.iter_mut().enumerate() {
                        *z = data[base + j * stride];
                    }
                    fft.process(&mut line);
                    for (j, z) in line.iter().enumerate() {
                        data[base + j * stride] = *z;
                    }
                }
            }
        }
    }
    if inverse {
        let scale = 1.0 / grid.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }
}

pub(crate) fn forward(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, false);
}

pub(crate) fn inverse(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, true);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let orig: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut d = orig.clone();
        forward(&g, &mut d);
        inverse(&g, &mut d);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn separable_plane_wave_hits_one_mode() {
        let g = Grid::new(2, 8, 8.0).unwrap();
        let nodes = g.axis_nodes();
        let xi = g.axis_frequencies();
        // mode (1, 3)
        let mut d: Vec<Complex64> = (0..g.len())
            .map(|i| {
                let (a, b) = (i / 8, i % 8);
                Complex64::from_polar(1.0, xi[1] * nodes[a] + xi[3] * nodes[b])
            })
            .collect();
        forward(&g, &mut d);
        let (imax, _) = d
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.norm().partial_cmp(&y.1.norm()).unwrap())
            .unwrap();
        assert_eq!(imax, 8 + 3);
        assert!((d[imax].norm() - 64.0).abs() < 1e-10);
    }
}
