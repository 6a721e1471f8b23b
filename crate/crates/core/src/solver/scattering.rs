//! Pullback (interaction-picture) profiles as a finite-window scattering proxy.
//!
//! On the torus nothing scatters; the report only measures Cauchy decay of
//! `W_s(t) = e^{ist<D>_M} psi_s(t)` and `V(t) = e^{it<D>_m} phi_+(t)` on a window
//! shorter than the wrap-around time.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::{norm2, Ops, Packed};
use super::Trajectory;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::spectral_grid::FrequencyLattice;

/// Longest window before a packet moving at speed below 1 wraps around: `L/4`.
pub fn wrap_around_limit(lat: &FrequencyLattice) -> f64 {
    lat.length() / 4.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicDifference {
    pub t_lo: f64,
    pub t_hi: f64,
    /// `||W(t_hi) - W(t_lo)||` over both spinor components.
    pub dirac: f64,
    /// `||V(t_hi) - V(t_lo)||`.
    pub klein_gordon: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub proxy: String,
    pub times: Vec<f64>,
    /// `||W(t) - W(t_0)||` at every stored time.
    pub drift: Vec<f64>,
    /// Windows `[T/2^{i+1}, T/2^i]`, largest first.
    pub dyadic: Vec<DyadicDifference>,
    /// `sum_i ||W(t_{i+1}) - W(t_i)||^2` along the stored times.
    pub two_variation: f64,
    /// `||W(T) - W(T/2)|| < ||W(T/2) - W(T/4)||`.
    pub late_decay: bool,
    pub wrap_warning: bool,
}

/// Dirac and Klein-Gordon parts of `a - b`.
fn split_diff(np: usize, a: &[Complex64], b: &[Complex64]) -> (f64, f64) {
    let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    (norm2(&d[..8 * np]).sqrt(), norm2(&d[8 * np..]).sqrt())
}

pub fn scattering_profile(traj: &Trajectory) -> Result<ScatteringReport> {
    let first = traj
        .states
        .first()
        .ok_or_else(|| Error::Precondition("scattering profile needs stored states".into()))?;
    let lat = *first.lattice();
    let ops = Ops::new(lat, first.masses, true, Exec::Sequential);
    let np = ops.np;
    let t0 = first.t;
    let pulled: Vec<Packed> = traj
        .states
        .iter()
        .map(|s| {
            let mut u = ops.pack(s);
            ops.apply_phases(&ops.phases(-s.t), &mut u);
            u
        })
        .collect();
    let times: Vec<f64> = traj.states.iter().map(|s| s.t - t0).collect();
    let drift = pulled.iter().map(|w| split_diff(np, w, &pulled[0]).0).collect();
    let two_variation = pulled
        .windows(2)
        .map(|p| split_diff(np, &p[1], &p[0]).0.powi(2))
        .sum();

    let big_t = *times.last().expect("nonempty");
    let tol = 0.5 * traj.dt + 1e-12;
    let find = |t: f64| times.iter().position(|&s| (s - t).abs() <= tol);
    let mut dyadic = Vec::new();
    let mut hi = big_t;
    while hi > 0.0 {
        let lo = hi / 2.0;
        match (find(lo), find(hi)) {
            (Some(a), Some(b)) if a != b => {
                let (dirac, kg) = split_diff(np, &pulled[b], &pulled[a]);
                dyadic.push(DyadicDifference {
                    t_lo: times[a],
                    t_hi: times[b],
                    dirac,
                    klein_gordon: kg,
                });
            }
            _ => break,
        }
        hi = lo;
    }
    let late_decay = dyadic.len() >= 2 && dyadic[0].dirac < dyadic[1].dirac;
    Ok(ScatteringReport {
        proxy: "pullback Cauchy differences on a pre-wrap-around torus window".into(),
        times,
        drift,
        dyadic,
        two_variation,
        late_decay,
        wrap_warning: big_t > wrap_around_limit(&lat),
    })
}
