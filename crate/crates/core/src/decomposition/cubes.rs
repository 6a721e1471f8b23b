//! Smooth cube localization `Gamma_{k', n}` with centers on `2^{k'} Z^3`.

use serde::{Deserialize, Serialize};

use super::cutoffs::gamma1;
use super::Localize;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::spectral_grid::FrequencyLattice;
use crate::vec3::Vec3;

/// Cube of side `2^kp` centered at the frequency `n`, which must lie in `2^kp Z^3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CubeIndex {
    pub kp: u32,
    pub n: [i64; 3],
}

impl CubeIndex {
    pub fn new(kp: u32, n: [i64; 3]) -> Result<Self> {
        let side = 1i64 << kp;
        if n.iter().any(|c| c.rem_euclid(side) != 0) {
            return Err(Error::CubeCenter(n, kp));
        }
        Ok(Self { kp, n })
    }

    pub fn center(&self) -> Vec3 {
        [self.n[0] as f64, self.n[1] as f64, self.n[2] as f64]
    }

    pub fn side(&self) -> f64 {
        (self.kp as f64).exp2()
    }
}

/// `gamma_{k', n}(xi) = prod_i gamma1((xi_i - n_i) / 2^{k'})`.
#[inline]
pub fn cube_symbol(cube: &CubeIndex, xi: Vec3) -> f64 {
    let h = cube.side();
    (0..3).map(|i| gamma1((xi[i] - cube.n[i] as f64) / h)).product()
}

pub fn cube_project<F: Localize>(field: &F, cube: &CubeIndex) -> F {
    let c = *cube;
    field.multiply(Exec::Sequential, move |xi| cube_symbol(&c, xi))
}

/// Every cube of side `2^kp` whose symbol meets the lattice's frequency box.
pub fn cube_centers(lat: &FrequencyLattice, kp: u32) -> Vec<CubeIndex> {
    let h = (kp as f64).exp2();
    let half = (lat.n() / 2) as f64;
    let lo = -half * lat.dk() / h - 2.0 / 3.0;
    let hi = (half - 1.0) * lat.dk() / h + 2.0 / 3.0;
    let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
    let side = 1i64 << kp;
    let mut out = Vec::new();
    for i in a..=b {
        for j in a..=b {
            for k in a..=b {
                out.push(CubeIndex {
                    kp,
                    n: [i * side, j * side, k * side],
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_grid::{Repr, ScalarField};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn center_has_weight_one() {
        let c = CubeIndex::new(2, [4, -8, 0]).unwrap();
        assert_eq!(cube_symbol(&c, [4.0, -8.0, 0.0]), 1.0);
        assert!(CubeIndex::new(2, [4, 3, 0]).is_err());
    }

    #[test]
    fn near_edge_mode_is_shared() {
        let xi = [1.4, -0.5, 0.55];
        let mut total = 0.0;
        let mut count = 0;
        for i in -3..=3 {
            for j in -3..=3 {
                for k in -3..=3 {
                    let w = cube_symbol(&CubeIndex { kp: 0, n: [i, j, k] }, xi);
                    if w > 0.0 {
                        count += 1;
                    }
                    total += w;
                }
            }
        }
        assert!(count > 1 && count <= 8);
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cubes_resum_and_are_almost_orthogonal() {
        let lat = FrequencyLattice::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut f = ScalarField::zeros(lat, Repr::Fourier);
        for z in f.data_mut() {
            *z = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        for kp in 0..=2 {
            let mut sum = f.zeros_like();
            let mut sq = 0.0;
            for c in cube_centers(&lat, kp) {
                let p = cube_project(&f, &c);
                sq += p.norm_l2().powi(2);
                sum.add_assign(&p);
            }
            assert!(sum.distance(&f).unwrap() <= 1e-12 * f.norm_l2());
            let ratio = f.norm_l2().powi(2) / sq;
            assert!(ratio >= 1.0 - 1e-12 && ratio <= 8.0, "kp={kp}: {ratio}");
        }
    }
}
