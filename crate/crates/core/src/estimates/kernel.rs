//! Quadrature of `K(t, x) = int e^{it<xi> + ix.xi} rho_k^2(|xi|) gamma_{k',n}^2(xi) dxi`.
//!
//! With `xi = n + 2^{k'} eta` the modulus becomes
//! `2^{3k'} |int e^{i t R(eta) + i y.eta} a(eta) deta|`, where
//! `R(eta) = <n + 2^{k'} eta> - <n> - 2^{k'} v.eta`, `v = n / <n>` and
//! `y = 2^{k'}(x + t v)`; the sup over `x` is a sup over `y`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decomposition::{gamma1, shell_symbol, CubeIndex};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::spectral_grid::Fft3;
use crate::vec3;

const HALF_WIDTH: f64 = 2.0 / 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub k: u32,
    pub kp: u32,
    /// Cube center on `2^{k'} Z^3`.
    pub n: [i64; 3],
    pub mass: f64,
    /// Rescaled times `2^{2k'-k} t`.
    pub taus: Vec<f64>,
    /// Minimum quadrature points per axis; raised with the phase gradient.
    pub points: usize,
    /// Minimum points per axis of the refinement run.
    pub refined_points: usize,
    /// Upper limit on points per axis.
    pub max_points: usize,
    /// Largest tolerated relative change under refinement.
    pub tolerance: f64,
}

impl KernelConfig {
    /// Cube centered at `2^k e3` with the default time grid and resolution.
    pub fn new(k: u32, kp: u32) -> Self {
        let mut taus = vec![0.0];
        taus.extend((0..=8).map(|i| 0.25 * 2f64.powi(i)));
        Self {
            k,
            kp,
            n: [0, 0, 1i64 << k],
            mass: 1.0,
            taus,
            points: 16,
            refined_points: 24,
            max_points: 144,
            tolerance: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub tau: f64,
    pub t: f64,
    /// `sup_x |K(t, x)| / 2^{3k'}`
    pub sup: f64,
    /// `sup * (1 + tau)`
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub config: KernelConfig,
    pub samples: Vec<KernelSample>,
    /// `sup_t |K| (1 + 2^{2k'-k}|t|) / 2^{3k'}`
    pub constant: f64,
    pub refined_constant: f64,
    /// `|refined - constant| / refined`
    pub disagreement: f64,
    /// Least-squares slope of `log sup` against `log tau` over `tau >= 16`.
    pub decay_exponent: f64,
}

struct Quadrature {
    points: usize,
    h: f64,
    eta: Vec<f64>,
    amp: Vec<f64>,
    phase: Vec<f64>,
}

/// Largest `|grad_eta R|` over the support of the amplitude, sampled on a coarse grid.
fn max_phase_gradient(cfg: &KernelConfig) -> f64 {
    let m = 24;
    let side = (cfg.kp as f64).exp2();
    let n = [cfg.n[0] as f64, cfg.n[1] as f64, cfg.n[2] as f64];
    let v = vec3::scale(1.0 / vec3::bracket(cfg.mass, n), n);
    let mut best: f64 = 0.0;
    for i in 0..=m {
        for j in 0..=m {
            for l in 0..=m {
                let e = [i, j, l].map(|a| -HALF_WIDTH + 2.0 * HALF_WIDTH * a as f64 / m as f64);
                let xi = vec3::add(n, vec3::scale(side, e));
                if shell_symbol(cfg.k, vec3::norm(xi)) == 0.0 {
                    continue;
                }
                let g = vec3::scale(side, vec3::sub(vec3::scale(1.0 / vec3::bracket(cfg.mass, xi), xi), v));
                best = best.max(vec3::norm(g));
            }
        }
    }
    best
}

/// Points per axis keeping the phase step below `pi / 4` at time `t`.
fn points_for(cfg: &KernelConfig, floor: usize, grad: f64, t: f64) -> usize {
    let need = (2.0 * HALF_WIDTH * grad * t.abs() * 4.0 / std::f64::consts::PI).ceil() as usize;
    let p = floor.max(need).min(cfg.max_points);
    p + p % 2
}

impl Quadrature {
    fn new(cfg: &KernelConfig, points: usize) -> Self {
        let h = 2.0 * HALF_WIDTH / points as f64;
        let eta: Vec<f64> = (0..points).map(|i| -HALF_WIDTH + (i as f64 + 0.5) * h).collect();
        let side = (cfg.kp as f64).exp2();
        let n = [cfg.n[0] as f64, cfg.n[1] as f64, cfg.n[2] as f64];
        let bn = vec3::bracket(cfg.mass, n);
        let v = vec3::scale(1.0 / bn, n);
        let total = points * points * points;
        let mut amp = vec![0.0; total];
        let mut phase = vec![0.0; total];
        for i in 0..points {
            for j in 0..points {
                for l in 0..points {
                    let e = [eta[i], eta[j], eta[l]];
                    let xi = vec3::add(n, vec3::scale(side, e));
                    let rho = shell_symbol(cfg.k, vec3::norm(xi));
                    let g = gamma1(e[0]) * gamma1(e[1]) * gamma1(e[2]);
                    let idx = (i * points + j) * points + l;
                    amp[idx] = (rho * g).powi(2);
                    phase[idx] = vec3::bracket(cfg.mass, xi) - bn - side * vec3::dot(v, e);
                }
            }
        }
        Self {
            points,
            h,
            eta,
            amp,
            phase,
        }
    }

    fn integrand(&self, t: f64) -> Vec<Complex64> {
        self.amp
            .iter()
            .zip(&self.phase)
            .map(|(&a, &r)| Complex64::from_polar(a, t * r))
            .collect()
    }

    /// `|int g(eta) e^{-i y.eta} deta|` by direct summation.
    fn eval(&self, g: &[Complex64], y: [f64; 3]) -> f64 {
        let p = self.points;
        let ax: Vec<Vec<Complex64>> = (0..3)
            .map(|d| self.eta.iter().map(|&e| Complex64::from_polar(1.0, -y[d] * e)).collect())
            .collect();
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..p {
            for j in 0..p {
                let w = ax[0][i] * ax[1][j];
                let row = &g[(i * p + j) * p..(i * p + j + 1) * p];
                let inner: Complex64 = row.iter().zip(&ax[2]).map(|(a, b)| a * b).sum();
                s += w * inner;
            }
        }
        s.norm() * self.h.powi(3)
    }

    /// Sup over `y`: zero-padded FFT to locate the peak, then local zooming.
    fn sup(&self, t: f64) -> f64 {
        let p = self.points;
        let q = if p <= 48 { 2 * p } else { p };
        let g = self.integrand(t);
        let mut buf = vec![Complex64::new(0.0, 0.0); q * q * q];
        for i in 0..p {
            for j in 0..p {
                for l in 0..p {
                    buf[(i * q + j) * q + l] = g[(i * p + j) * p + l];
                }
            }
        }
        Fft3::new(q).forward(&mut buf);
        let (best, _) = buf
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
        let dy = 2.0 * std::f64::consts::PI / (q as f64 * self.h);
        let freq = |m: usize| {
            let m = m as i64;
            (if m < q as i64 / 2 { m } else { m - q as i64 }) as f64 * dy
        };
        let mut y = [freq(best / (q * q)), freq((best / q) % q), freq(best % q)];
        let mut val = self.eval(&g, y);
        let mut step = dy / 2.0;
        for _ in 0..6 {
            let mut moved = true;
            while moved {
                moved = false;
                for d in 0..3 {
                    for s in [-1.0, 1.0] {
                        let mut z = y;
                        z[d] += s * step;
                        let v = self.eval(&g, z);
                        if v > val {
                            val = v;
                            y = z;
                            moved = true;
                        }
                    }
                }
            }
            step /= 2.0;
        }
        val
    }
}

fn constant_for(cfg: &KernelConfig, floor: usize, grad: f64) -> Vec<KernelSample> {
    let scale = (2.0 * cfg.kp as f64 - cfg.k as f64).exp2();
    cfg.taus
        .iter()
        .map(|&tau| {
            let t = tau / scale;
            let quad = Quadrature::new(cfg, points_for(cfg, floor, grad, t));
            let sup = quad.sup(t);
            KernelSample {
                tau,
                t,
                sup,
                normalized: sup * (1.0 + tau),
            }
        })
        .collect()
}

fn fit_slope(samples: &[KernelSample]) -> f64 {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.tau >= 16.0 && s.sup > 0.0)
        .map(|s| (s.tau.ln(), s.sup.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Normalized kernel constant at two resolutions.
pub fn kernel_decay_check(cfg: &KernelConfig) -> Result<KernelReport> {
    if cfg.kp > cfg.k {
        return Err(Error::Precondition(format!("need k' <= k (k = {}, k' = {})", cfg.k, cfg.kp)));
    }
    CubeIndex::new(cfg.kp, cfg.n)?;
    if cfg.points < 4 || cfg.refined_points <= cfg.points || cfg.taus.is_empty() {
        return Err(Error::Precondition("need 4 <= points < refined_points and a nonempty time grid".into()));
    }
    let grad = max_phase_gradient(cfg);
    let samples = constant_for(cfg, cfg.points, grad);
    let refined = constant_for(cfg, cfg.refined_points.max(cfg.points * 3 / 2), grad * 1.5);
    let constant = samples.iter().map(|s| s.normalized).fold(0.0, f64::max);
    let refined_constant = refined.iter().map(|s| s.normalized).fold(0.0, f64::max);
    if refined_constant == 0.0 {
        return Err(Error::Precondition(format!("cube {:?} misses shell {}", cfg.n, cfg.k)));
    }
    let disagreement = (refined_constant - constant).abs() / refined_constant;
    if disagreement > cfg.tolerance {
        return Err(Error::Quadrature(disagreement));
    }
    Ok(KernelReport {
        config: cfg.clone(),
        decay_exponent: fit_slope(&refined),
        samples: refined,
        constant,
        refined_constant,
        disagreement,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSweep {
    pub reports: Vec<KernelReport>,
    pub min_constant: f64,
    pub max_constant: f64,
    /// `max_constant / min_constant`
    pub spread: f64,
    pub max_disagreement: f64,
}

/// [`kernel_decay_check`] over `0 <= k' <= k <= kmax`, cubes at `2^k e3`.
pub fn kernel_sweep(exec: Exec, kmax: u32, template: &KernelConfig) -> Result<KernelSweep> {
    let pairs: Vec<(u32, u32)> = (0..=kmax).flat_map(|k| (0..=k).map(move |kp| (k, kp))).collect();
    let reports = exec::map(exec, &pairs, |&(k, kp)| {
        kernel_decay_check(&KernelConfig {
            k,
            kp,
            n: [0, 0, 1i64 << k],
            ..template.clone()
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let min_constant = reports.iter().map(|r| r.refined_constant).fold(f64::INFINITY, f64::min);
    let max_constant = reports.iter().map(|r| r.refined_constant).fold(0.0, f64::max);
    let max_disagreement = reports.iter().map(|r| r.disagreement).fold(0.0, f64::max);
    Ok(KernelSweep {
        reports,
        min_constant,
        max_constant,
        spread: max_constant / min_constant,
        max_disagreement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_zero_is_the_volume_integral() {
        let cfg = KernelConfig::new(3, 1);
        let quad = Quadrature::new(&cfg, 16);
        let vol: f64 = quad.amp.iter().sum::<f64>() * quad.h.powi(3);
        assert!((quad.sup(0.0) - vol).abs() < 1e-12 * vol);
        let wide = Quadrature::new(&cfg, 32);
        let vol2: f64 = wide.amp.iter().sum::<f64>() * wide.h.powi(3);
        assert!((vol - vol2).abs() < 1e-2 * vol2);
    }

    #[test]
    fn decays_in_time() {
        let r = kernel_decay_check(&KernelConfig::new(4, 4)).unwrap();
        assert!(r.decay_exponent < -0.7, "{r:?}");
        assert!(r.samples.last().unwrap().sup < 0.5 * r.samples[0].sup);
    }

    #[test]
    fn rejects_off_lattice_center() {
        let mut cfg = KernelConfig::new(3, 2);
        cfg.n = [0, 0, 6];
        assert!(kernel_decay_check(&cfg).is_err());
        assert!(kernel_decay_check(&KernelConfig::new(2, 3)).is_err());
    }
}
