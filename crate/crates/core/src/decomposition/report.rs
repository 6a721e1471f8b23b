//! Partition-of-unity residuals on random fields, as reported by
//! `decompose-check`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::caps::build_cap_cover;
use super::cubes::{cube_centers, cube_project};
use super::modulation::{modulation_partition, SpaceTimeField, TimeGrid};
use super::{shell_pieces, tilde_support, Localize};
use crate::dirac_algebra::Sign;
use crate::error::Result;
use crate::exec::{self, Exec};
use crate::spectral_grid::{FrequencyLattice, Repr, SpinorField};
use crate::vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecomposeCheckConfig {
    pub n: usize,
    pub length: f64,
    pub seed: u64,
    pub cap_levels: Vec<u32>,
    pub cube_scales: Vec<u32>,
    pub time_samples: usize,
    pub time_window: f64,
    pub mass: f64,
    pub overlap_samples: usize,
    pub tolerance: f64,
}

impl Default for DecomposeCheckConfig {
    fn default() -> Self {
        Self {
            n: 16,
            length: 2.0 * std::f64::consts::PI,
            seed: 0,
            cap_levels: vec![1, 2, 3, 4],
            cube_scales: vec![0, 1, 2],
            time_samples: 32,
            time_window: 2.0 * std::f64::consts::PI,
            mass: 1.0,
            overlap_samples: 20_000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionResidual {
    pub family: String,
    pub parameter: i64,
    pub pieces: usize,
    /// `||sum of pieces - f|| / ||f||`
    pub residual: f64,
    /// `||f||^2 / sum ||piece||^2`, where meaningful
    pub overlap_ratio: Option<f64>,
    pub min_overlap: Option<usize>,
    pub max_overlap: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecomposeReport {
    pub config: DecomposeCheckConfig,
    pub partitions: Vec<PartitionResidual>,
    /// Relative energy of `P_k f` outside the fattened shell, worst over `k`.
    pub shell_leakage: f64,
    /// `||Gamma P_kappa f - P_kappa Gamma f|| / ||f||` on one cube/cap pair.
    pub cube_cap_commutator: f64,
    pub worst_residual: f64,
    pub worst_overlap: usize,
    pub pass: bool,
}

fn random_spinor(lat: FrequencyLattice, rng: &mut ChaCha8Rng) -> SpinorField {
    let mut f = SpinorField::zeros(lat, Repr::Fourier);
    for z in f.data_mut() {
        *z = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    }
    f
}

fn resum<F: Localize>(f: &F, pieces: &[F]) -> (f64, f64) {
    let mut sum = f.zeros_like();
    let mut sq = 0.0;
    for p in pieces {
        sum.add_assign(p);
        sq += p.l2().powi(2);
    }
    let mut diff = sum;
    let mut neg = f.clone();
    neg = neg.times_table(&vec![-1.0; f.lattice().num_points()]);
    diff.add_assign(&neg);
    (diff.l2() / f.l2(), f.l2().powi(2) / sq)
}

pub fn decompose_check(exec: Exec, cfg: &DecomposeCheckConfig) -> Result<DecomposeReport> {
    let lat = FrequencyLattice::new(cfg.n, cfg.length)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let f = random_spinor(lat, &mut rng);
    let mut partitions = Vec::new();

    let shells = shell_pieces(exec, &f);
    let (res, ratio) = resum(&f, &shells);
    partitions.push(PartitionResidual {
        family: "shells".into(),
        parameter: shells.len() as i64 - 1,
        pieces: shells.len(),
        residual: res,
        overlap_ratio: Some(ratio),
        min_overlap: None,
        max_overlap: None,
    });
    let mut leak = 0.0f64;
    for (k, p) in shells.iter().enumerate() {
        let (lo, hi) = tilde_support(k as u32);
        let out: f64 = (0..lat.num_points())
            .filter(|&i| {
                let r = vec3::norm(lat.xi(i));
                r < lo || r > hi
            })
            .map(|i| p.point(i).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        leak = leak.max(out / f.l2().powi(2));
    }

    for &kp in &cfg.cube_scales {
        let cubes = cube_centers(&lat, kp);
        let pieces = exec::map(exec, &cubes, |c| cube_project(&f, c));
        let (res, ratio) = resum(&f, &pieces);
        partitions.push(PartitionResidual {
            family: "cubes".into(),
            parameter: kp as i64,
            pieces: pieces.len(),
            residual: res,
            overlap_ratio: Some(ratio),
            min_overlap: None,
            max_overlap: None,
        });
    }

    let mut commutator = 0.0;
    for &l in &cfg.cap_levels {
        let fam = build_cap_cover(l);
        let idx: Vec<_> = fam.indices().collect();
        let pieces = exec::map(exec, &idx, |&i| fam.project(&f, i).expect("valid cap"));
        let (res, ratio) = resum(&f, &pieces);
        let (lo, hi) = fam.sample_overlap(cfg.overlap_samples);
        partitions.push(PartitionResidual {
            family: "caps".into(),
            parameter: l as i64,
            pieces: pieces.len(),
            residual: res,
            overlap_ratio: Some(ratio),
            min_overlap: Some(lo),
            max_overlap: Some(hi),
        });
        if l == cfg.cap_levels[0] {
            if let Some(cube) = cube_centers(&lat, 1).get(0).copied() {
                let a = cube_project(&fam.project(&f, idx[0])?, &cube);
                let b = fam.project(&cube_project(&f, &cube), idx[0])?;
                commutator = a.distance(&b)? / f.l2();
            }
        }
    }

    let time = TimeGrid::new(cfg.time_samples, cfg.time_window)?;
    let slices: Vec<SpinorField> = (0..time.len()).map(|_| random_spinor(lat, &mut rng)).collect();
    let st = SpaceTimeField::from_spinor_slices(time, &slices)?;
    let (jlo, jhi) = time.resolvable()?;
    for sign in Sign::BOTH {
        let parts = modulation_partition(exec, &st, sign, cfg.mass, jlo, jhi)?;
        let mut sum = SpaceTimeField::zeros(lat, time, 4);
        for p in &parts {
            sum.add_assign(p)?;
        }
        partitions.push(PartitionResidual {
            family: format!("modulation{}", sign.symbol()),
            parameter: jhi as i64,
            pieces: parts.len(),
            residual: sum.distance(&st)? / st.l2(),
            overlap_ratio: None,
            min_overlap: None,
            max_overlap: None,
        });
    }

    let worst_residual = partitions.iter().map(|p| p.residual).fold(0.0, f64::max);
    let worst_overlap = partitions.iter().filter_map(|p| p.max_overlap).max().unwrap_or(0);
    let min_cover = partitions.iter().filter_map(|p| p.min_overlap).min().unwrap_or(1);
    let pass = worst_residual <= cfg.tolerance
        && worst_overlap <= 8
        && min_cover >= 1
        && leak <= 1e-12
        && commutator <= 1e-12;
    Ok(DecomposeReport {
        config: cfg.clone(),
        partitions,
        shell_leakage: leak,
        cube_cap_commutator: commutator,
        worst_residual,
        worst_overlap,
        pass,
    })
}
