//! Seeded Gaussian wave-packet initial data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::SecondOrderState;
use crate::spectral_grid::{FrequencyLattice, ScalarField, SpinorField};
use crate::vec3::{self, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialDataConfig {
    /// Common size of `psi_0` in `H^eps`, `phi_0` in `H^{1/2+eps}`, `phi_1` in `H^{-1/2+eps}`.
    pub delta: f64,
    pub seed: u64,
    pub eps: f64,
    /// Gaussian width in physical units.
    pub width: f64,
    /// Largest carrier wavenumber `|k_p|`.
    pub max_carrier: f64,
}

impl Default for InitialDataConfig {
    fn default() -> Self {
        Self {
            delta: 0.01,
            seed: 0,
            eps: 0.1,
            width: 3.0,
            max_carrier: 0.3,
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn carrier(rng: &mut ChaCha8Rng, max: f64) -> Vec3 {
    let d = [normal(rng), normal(rng), normal(rng)];
    let r = max * rng.gen::<f64>();
    match vec3::normalize(d) {
        Some(u) => vec3::scale(r, u),
        None => [0.0; 3],
    }
}

fn center(rng: &mut ChaCha8Rng, lat: &FrequencyLattice) -> Vec3 {
    let l = lat.length();
    let mut c = [0.0; 3];
    for x in &mut c {
        *x = l * (0.5 + 0.125 * (2.0 * rng.gen::<f64>() - 1.0));
    }
    c
}

/// Periodic squared distance on the box.
fn dist2(x: Vec3, c: Vec3, l: f64) -> f64 {
    (0..3)
        .map(|i| {
            let d = (x[i] - c[i]).rem_euclid(l);
            let d = d.min(l - d);
            d * d
        })
        .sum()
}

/// Gaussian packets scaled to size `delta` in the data norms.
pub fn generate_initial_data(lat: FrequencyLattice, cfg: &InitialDataConfig) -> SecondOrderState {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let l = lat.length();
    let w2 = 2.0 * cfg.width * cfg.width;

    let kp = carrier(&mut rng, cfg.max_carrier);
    let c = center(&mut rng, &lat);
    let mut v = [Complex64::new(0.0, 0.0); 4];
    for z in &mut v {
        *z = Complex64::new(normal(&mut rng), normal(&mut rng));
    }
    let psi = SpinorField::from_physical_fn(lat, |x| {
        let g = (-dist2(x, c, l) / w2).exp();
        let ph = Complex64::from_polar(g, vec3::dot(kp, x));
        [v[0] * ph, v[1] * ph, v[2] * ph, v[3] * ph]
    });

    let bump = |rng: &mut ChaCha8Rng| {
        let c = center(rng, &lat);
        let a = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        ScalarField::from_physical_fn(lat, |x| Complex64::new(a * (-dist2(x, c, l) / w2).exp(), 0.0))
    };
    let phi = bump(&mut rng);
    let dphi = bump(&mut rng);

    let mut out = SecondOrderState {
        t: 0.0,
        psi: psi.to_fourier(),
        phi: phi.to_fourier(),
        dphi: dphi.to_fourier(),
    };
    let scale = |n: f64| {
        if n > 0.0 {
            Complex64::new(cfg.delta / n, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let sp = scale(out.psi.sobolev_norm(cfg.eps));
    out.psi.scale(sp);
    let s0 = scale(out.phi.sobolev_norm(0.5 + cfg.eps));
    out.phi.scale(s0);
    let s1 = scale(out.dphi.sobolev_norm(-0.5 + cfg.eps));
    out.dphi.scale(s1);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_has_requested_size_and_is_real() {
        let lat = FrequencyLattice::new(16, 16.0 * std::f64::consts::PI).unwrap();
        let cfg = InitialDataConfig::default();
        let d = generate_initial_data(lat, &cfg);
        assert!((d.psi.sobolev_norm(0.1) - 0.01).abs() < 1e-14);
        assert!((d.phi.sobolev_norm(0.6) - 0.01).abs() < 1e-14);
        assert!((d.dphi.sobolev_norm(-0.4) - 0.01).abs() < 1e-14);
        assert!(d.max_imag() < 1e-12);
    }

    #[test]
    fn zero_delta_gives_zero_data() {
        let lat = FrequencyLattice::new(8, 10.0).unwrap();
        let d = generate_initial_data(
            lat,
            &InitialDataConfig {
                delta: 0.0,
                ..Default::default()
            },
        );
        assert_eq!(d.psi.norm_l2() + d.phi.norm_l2() + d.dphi.norm_l2(), 0.0);
    }

    #[test]
    fn seeds_are_reproducible() {
        let lat = FrequencyLattice::new(8, 10.0).unwrap();
        let cfg = InitialDataConfig::default();
        let a = generate_initial_data(lat, &cfg);
        let b = generate_initial_data(lat, &cfg);
        assert_eq!(a.psi.data(), b.psi.data());
        assert_eq!(a.phi.data(), b.phi.data());
    }
}
