//! Tensor-product sampling plans.

use std::f64::consts::PI;

use crate::error::Result;
use crate::gek::SamplePlan;

/// Full tensor grid of `nodes` in `d` dimensions; the first axis varies slowest.
pub fn tensor_grid(nodes: &[f64], d: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                nodes.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(*x);
                    p
                })
            })
            .collect();
    }
    out
}

/// Chebyshev nodes `(b-a)/2 cos((2j-1) pi / 2k) + (b+a)/2`, `j = 1..k`.
pub fn chebyshev_nodes(a: f64, b: f64, k: usize) -> Vec<f64> {
    (1..=k)
        .map(|j| 0.5 * (b - a) * ((2 * j - 1) as f64 * PI / (2 * k) as f64).cos() + 0.5 * (b + a))
        .collect()
}

/// Equispaced nodes including both endpoints; a single node sits at the midpoint.
pub fn uniform_nodes(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..k)
        .map(|j| a + (b - a) * j as f64 / (k - 1) as f64)
        .collect()
}

pub fn chebyshev_plan(a: f64, b: f64, k_per_axis: usize, d: usize) -> Result<SamplePlan> {
    SamplePlan::new(tensor_grid(&chebyshev_nodes(a, b, k_per_axis), d))
}

pub fn uniform_plan(a: f64, b: f64, k_per_axis: usize, d: usize) -> Result<SamplePlan> {
    SamplePlan::new(tensor_grid(&uniform_nodes(a, b, k_per_axis), d))
}
