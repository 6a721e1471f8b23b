//! Picard iteration of the Duhamel map in the interaction picture.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::{axpy, norm2, Ops, Packed};
use super::DKGState;
use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardConfig {
    pub t_end: f64,
    /// Number of time intervals of the trapezoid grid.
    pub nt: usize,
    pub n_iter: usize,
    pub exec: Exec,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            t_end: 5.0,
            nt: 50,
            n_iter: 6,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PicardReport {
    pub config: PicardConfig,
    /// `d_n = sup_t ||u^{(n)}(t) - u^{(n-1)}(t)||_{L^2}`, `n = 1..=n_iter`.
    pub distances: Vec<f64>,
    /// `d_{n+1} / d_n`; zero where `d_n = 0`.
    pub ratios: Vec<f64>,
    pub diverged: bool,
}

impl PicardReport {
    /// Largest ratio `d_{n+1}/d_n` with `n >= from` (1-based).
    pub fn max_ratio_from(&self, from: usize) -> f64 {
        self.ratios
            .iter()
            .skip(from.saturating_sub(1))
            .cloned()
            .fold(0.0, f64::max)
    }
}

/// Iterate `w -> w(0) + int_0^t E(-s) N(E(s) w(s)) ds` from the free evolution.
pub fn picard_iterate(initial: &DKGState, cfg: &PicardConfig) -> Result<PicardReport> {
    if cfg.nt == 0 || !(cfg.t_end > 0.0) {
        return Err(Error::Precondition("Picard grid needs nt >= 1 and T > 0".into()));
    }
    let ops = Ops::new(*initial.lattice(), initial.masses, true, cfg.exec);
    ops.check(initial)?;
    let h = cfg.t_end / cfg.nt as f64;
    let w0 = ops.pack(initial);
    let fwd: Vec<_> = (0..=cfg.nt).map(|k| ops.phases(k as f64 * h)).collect();
    let back: Vec<_> = (0..=cfg.nt).map(|k| ops.phases(-(k as f64) * h)).collect();

    let mut w: Vec<Packed> = vec![w0.clone(); cfg.nt + 1];
    let mut distances = Vec::with_capacity(cfg.n_iter);
    let mut diverged = false;
    for _ in 0..cfg.n_iter {
        let g: Vec<Packed> = (0..=cfg.nt)
            .map(|k| {
                let mut u = w[k].clone();
                ops.apply_phases(&fwd[k], &mut u);
                let mut n = ops.nonlinear(&u);
                ops.apply_phases(&back[k], &mut n);
                n
            })
            .collect();
        let mut next = Vec::with_capacity(cfg.nt + 1);
        let mut acc = w0.clone();
        next.push(acc.clone());
        for k in 1..=cfg.nt {
            axpy(&mut acc, h / 2.0, &g[k - 1]);
            axpy(&mut acc, h / 2.0, &g[k]);
            next.push(acc.clone());
        }
        let d = next
            .iter()
            .zip(&w)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y): (&Complex64, &Complex64)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        distances.push(d);
        w = next;
        if !d.is_finite() || !norm2(&w[cfg.nt]).is_finite() {
            diverged = true;
            break;
        }
    }
    let ratios: Vec<f64> = distances
        .windows(2)
        .map(|p| if p[0] > 0.0 { p[1] / p[0] } else { 0.0 })
        .collect();
    if let (Some(first), Some(last)) = (distances.first(), distances.last()) {
        if last > first || !last.is_finite() {
            diverged = true;
        }
    }
    Ok(PicardReport {
        config: cfg.clone(),
        distances,
        ratios,
        diverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{generate_initial_data, split_state, InitialDataConfig};
    use crate::spectral_grid::{FrequencyLattice, MassParams};

    fn state(delta: f64) -> DKGState {
        let lat = FrequencyLattice::new(8, 4.0 * std::f64::consts::PI).unwrap();
        let cfg = InitialDataConfig {
            delta,
            seed: 2,
            width: 1.5,
            ..Default::default()
        };
        split_state(&generate_initial_data(lat, &cfg), MassParams::unit()).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_distances() {
        let r = picard_iterate(&state(0.0), &PicardConfig { nt: 10, n_iter: 3, ..Default::default() }).unwrap();
        assert!(r.distances.iter().all(|&d| d == 0.0));
        assert!(!r.diverged);
    }

    #[test]
    fn small_data_contracts() {
        let cfg = PicardConfig {
            t_end: 2.0,
            nt: 20,
            n_iter: 4,
            exec: Exec::Sequential,
        };
        let r = picard_iterate(&state(0.05), &cfg).unwrap();
        assert!(r.max_ratio_from(1) < 0.5, "{:?}", r.ratios);
    }

    #[test]
    fn large_data_is_reported_as_divergent() {
        let cfg = PicardConfig {
            t_end: 5.0,
            nt: 20,
            n_iter: 6,
            exec: Exec::Sequential,
        };
        let r = picard_iterate(&state(50.0), &cfg).unwrap();
        assert!(r.diverged, "{:?}", r.distances);
    }
}
