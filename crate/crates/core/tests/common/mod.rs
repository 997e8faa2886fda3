//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use frac_orlicz::{GridFunction, OrliczFunction};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense Riemann-sum reference for `\iint G(|u(x)-u(y)|/|x-y|^s) dx dy/|x-y|`.
///
/// Works in the difference variable `t = y - x > 0` (doubling for symmetry):
/// `t = D tau^8` with `tau_cells` midpoint cells on `(0, 1)` tames the weak
/// singularity at `t = 0`; for each `t` the inner `x` integral is a midpoint sum with
/// `x_cells` cells over `[L - t, R]`. Separations `t > D` only see one point of the
/// support and use `t = D e^v`, a midpoint sum in `v`.
pub fn brute_force_modular(g: &OrliczFunction, s: f64, u: &GridFunction, tau_cells: usize, x_cells: usize) -> f64 {
    let (l, r) = (u.left(), u.right());
    let d = r - l;
    let beta = 8.0;
    let mut near = 0.0;
    for k in 0..tau_cells {
        let tau = (k as f64 + 0.5) / tau_cells as f64;
        let t = d * tau.powf(beta);
        let dt = d * beta * tau.powf(beta - 1.0) / tau_cells as f64;
        let (a, b) = (l - t, r);
        let hx = (b - a) / x_cells as f64;
        let ts = t.powf(s);
        let mut inner = 0.0;
        for j in 0..x_cells {
            let x = a + (j as f64 + 0.5) * hx;
            inner += g.value((u.eval(x + t) - u.eval(x)).abs() / ts);
        }
        near += inner * hx / t * dt;
    }
    // Disjoint supports: the inner integral is 2 \int_Omega G(|u|/t^s).
    let v_max = 80.0;
    let v_cells = 8000;
    let hxo = d / x_cells as f64;
    let mut far = 0.0;
    for k in 0..v_cells {
        let v = (k as f64 + 0.5) * v_max / v_cells as f64;
        let t = d * v.exp();
        let ts = t.powf(s);
        let mut inner = 0.0;
        for j in 0..x_cells {
            let x = l + (j as f64 + 0.5) * hxo;
            inner += g.value(u.eval(x).abs() / ts);
        }
        far += 2.0 * inner * hxo * v_max / v_cells as f64;
    }
    2.0 * (near + far)
}

/// Random function in the discrete W_0 cone: a few random hats and ramps, plus noise.
pub fn random_w0(rng: &mut ChaCha8Rng, left: f64, right: f64, nodes: usize) -> GridFunction {
    let len = right - left;
    let bumps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..4))
        .map(|_| {
            let c = left + len * rng.random_range(0.15..0.85);
            let w = len * rng.random_range(0.1..0.5);
            let a = rng.random_range(-2.0..2.0);
            (c, w, a)
        })
        .collect();
    let mut u = GridFunction::from_fn(left, right, nodes, |x| {
        bumps.iter().map(|&(c, w, a)| a * (1.0f64 - ((x - c) / w).abs()).max(0.0)).sum()
    })
    .unwrap();
    let n = u.node_count();
    let v = u.values_mut();
    v[0] = 0.0;
    v[n - 1] = 0.0;
    u
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
