//! Random sampling of `|int phi <psi1, beta psi2> dx dt|` against
//! `G(k, k1, k2) ||phi||_{S_k^+} ||psi1||_{S_{k1}^{s1}} ||psi2||_{S_{k2}^{s2}}`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sparse::{localized_amp, norm_i, random_dressing, random_packet, shell_points, Mode, SparseField, PERIOD};
use super::summation::{g_weight, G_FORMULA, MAX_MED_GAP};
use crate::decomposition::shell_symbol;
use crate::dirac_algebra::{apply_beta, Sign};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::spectral_grid::FrequencyLattice;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrilinearConfig {
    /// Lattice side whose resolvable shells bound `k, k1, k2`.
    pub grid: usize,
    pub trials: usize,
    pub packet_size: usize,
    pub seed: u64,
    /// Dirac mass `M`.
    pub big: f64,
    /// Klein-Gordon mass `m`.
    pub small: f64,
    /// Bound the observed ratio is compared against.
    pub bound: f64,
}

impl Default for TrilinearConfig {
    fn default() -> Self {
        Self {
            grid: 64,
            trials: 50,
            packet_size: 4,
            seed: 0,
            big: 1.0,
            small: 1.0,
            bound: 1.0,
        }
    }
}

impl TrilinearConfig {
    pub fn max_shell(&self) -> Result<u32> {
        Ok(FrequencyLattice::new(self.grid, PERIOD)?.max_resolved_shell())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriEntry {
    pub k: u32,
    pub k1: u32,
    pub k2: u32,
    pub s1: Sign,
    pub s2: Sign,
    /// `case1` when the output frequency is lowest, `case2` otherwise.
    pub case: String,
    pub g: f64,
    pub sampled: usize,
    pub empty: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrilinearReport {
    pub config: TrilinearConfig,
    pub formula: String,
    pub entries: Vec<TriEntry>,
    pub max_ratio: f64,
    pub pass: bool,
}

fn integral_t(omega: f64) -> Complex64 {
    if (omega * PERIOD).abs() < 1e-9 {
        Complex64::new(PERIOD, 0.0)
    } else {
        (Complex64::from_polar(1.0, omega * PERIOD) - 1.0) / Complex64::new(0.0, omega)
    }
}

/// `int_0^{2pi} int_{T^3} phi <psi1, beta psi2> dx dt` in closed form.
pub fn trilinear_integral(phi: &SparseField, psi1: &SparseField, psi2: &SparseField) -> Result<Complex64> {
    if phi.components != 1 || psi1.components != 4 || psi2.components != 4 {
        return Err(Error::Precondition("expected a scalar and two spinor fields".into()));
    }
    let vol = PERIOD.powi(3);
    let mut total = Complex64::new(0.0, 0.0);
    for a in phi.modes() {
        for b in psi1.modes() {
            for c in psi2.modes() {
                if (0..3).any(|i| a.xi[i] - b.xi[i] + c.xi[i] != 0) {
                    continue;
                }
                let vc: [Complex64; 4] = [c.amp[0], c.amp[1], c.amp[2], c.amp[3]];
                let bvc = apply_beta(&vc);
                let pair: Complex64 = b.amp.iter().zip(&bvc).map(|(x, y)| x.conj() * y).sum();
                let omega = phi.theta(a) - psi1.theta(b) + psi2.theta(c);
                total += a.amp[0] * pair * integral_t(omega) * vol;
            }
        }
    }
    Ok(total)
}

fn mix(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h ^= h >> 31;
    }
    h
}

fn sign_bit(s: Sign) -> u64 {
    match s {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

struct Packet {
    field: SparseField,
    norm: f64,
}

fn packet(cfg: &TrilinearConfig, k1: u32, s1: Sign, trial: usize) -> Packet {
    let seed = mix(&[cfg.seed, 1, k1 as u64, sign_bit(s1), trial as u64]);
    let field = random_packet(seed, k1, s1, cfg.big, 4, cfg.packet_size);
    let norm = field.sk_norm(k1).total;
    Packet { field, norm }
}

/// Partners `(phi, psi2)` of `psi1` meeting the frequency constraint, or `None`.
fn partners(cfg: &TrilinearConfig, k: u32, k2: u32, s2: Sign, psi1: &SparseField, seed: u64) -> Option<(SparseField, SparseField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = psi1.modes();
    for _ in 0..256 {
        let xb = modes[rng.gen_range(0..modes.len())].xi;
        let (xa, xc) = if k <= k2 {
            let pts = shell_points(k);
            let xa = pts[rng.gen_range(0..pts.len())];
            (xa, [xb[0] - xa[0], xb[1] - xa[1], xb[2] - xa[2]])
        } else {
            let pts = shell_points(k2);
            let xc = pts[rng.gen_range(0..pts.len())];
            ([xb[0] - xc[0], xb[1] - xc[1], xb[2] - xc[2]], xc)
        };
        if shell_symbol(k, norm_i(xa)) == 0.0 || shell_symbol(k2, norm_i(xc)) == 0.0 {
            continue;
        }
        let ca = localized_amp(&mut rng, k, Sign::Plus, cfg.small, 1, xa);
        let vc = localized_amp(&mut rng, k2, s2, cfg.big, 4, xc);
        let nc: f64 = vc.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nc < 1e-12 || ca[0].norm() < 1e-12 {
            continue;
        }
        let (da, dc) = (random_dressing(&mut rng), random_dressing(&mut rng));
        let phi = SparseField::new(Sign::Plus, cfg.small, 1, vec![Mode { xi: xa, dressing: da, amp: ca }]).ok()?;
        let psi2 = SparseField::new(s2, cfg.big, 4, vec![Mode { xi: xc, dressing: dc, amp: vc }]).ok()?;
        return Some((phi, psi2));
    }
    None
}

fn entry(cfg: &TrilinearConfig, k: u32, k1: u32, k2: u32, s1: Sign, s2: Sign, packets: &[Packet]) -> TriEntry {
    let g = g_weight(k, k1, k2);
    let mut ratios = Vec::new();
    let mut empty = 0;
    for (trial, p) in packets.iter().enumerate() {
        let seed = mix(&[cfg.seed, 2, k as u64, k1 as u64, k2 as u64, sign_bit(s1), sign_bit(s2), trial as u64]);
        match partners(cfg, k, k2, s2, &p.field, seed) {
            None => empty += 1,
            Some((phi, psi2)) => {
                let i = trilinear_integral(&phi, &p.field, &psi2).expect("component counts fixed");
                let d = g * phi.sk_norm(k).total * p.norm * psi2.sk_norm(k2).total;
                ratios.push(i.norm() / d);
            }
        }
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let mean_ratio = if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    TriEntry {
        k,
        k1,
        k2,
        s1,
        s2,
        case: if k <= k1.min(k2) { "case1" } else { "case2" }.to_string(),
        g,
        sampled: ratios.len(),
        empty,
        max_ratio,
        mean_ratio,
    }
}

fn check_shells(cfg: &TrilinearConfig, ks: &[u32]) -> Result<()> {
    let max = cfg.max_shell()?;
    match ks.iter().find(|&&k| k > max) {
        Some(&k) => Err(Error::UnresolvedShell { k, max }),
        None => Ok(()),
    }
}

/// Maximal observed ratio for one dyadic triple and sign pair.
pub fn trilinear_ratio(k: u32, k1: u32, k2: u32, s1: Sign, s2: Sign, cfg: &TrilinearConfig) -> Result<TriEntry> {
    check_shells(cfg, &[k, k1, k2])?;
    let packets: Vec<Packet> = (0..cfg.trials).map(|t| packet(cfg, k1, s1, t)).collect();
    Ok(entry(cfg, k, k1, k2, s1, s2, &packets))
}

/// Every triple with `k, k1, k2 <= kmax` and `max - med <= MAX_MED_GAP`, all four sign pairs.
pub fn trilinear_sweep(exec: Exec, kmax: u32, cfg: &TrilinearConfig) -> Result<TrilinearReport> {
    check_shells(cfg, &[kmax])?;
    let keys: Vec<(u32, Sign, usize)> = (0..=kmax)
        .flat_map(|k1| Sign::BOTH.into_iter().flat_map(move |s| (0..cfg.trials).map(move |t| (k1, s, t))))
        .collect();
    let flat = exec::map(exec, &keys, |&(k1, s, t)| packet(cfg, k1, s, t));
    let mut by_key: Vec<Vec<Packet>> = Vec::new();
    let mut it = flat.into_iter();
    for _ in 0..keys.len() / cfg.trials.max(1) {
        by_key.push(it.by_ref().take(cfg.trials).collect());
    }
    let mut jobs = Vec::new();
    for k in 0..=kmax {
        for k1 in 0..=kmax {
            for k2 in 0..=kmax {
                let mut s = [k, k1, k2];
                s.sort_unstable();
                if s[2] - s[1] > MAX_MED_GAP {
                    continue;
                }
                for s1 in Sign::BOTH {
                    for s2 in Sign::BOTH {
                        jobs.push((k, k1, k2, s1, s2));
                    }
                }
            }
        }
    }
    let entries = exec::map(exec, &jobs, |&(k, k1, k2, s1, s2)| {
        let slot = (k1 as usize) * 2 + sign_bit(s1) as usize;
        entry(cfg, k, k1, k2, s1, s2, &by_key[slot])
    });
    let max_ratio = entries.iter().map(|e| e.max_ratio).fold(0.0, f64::max);
    Ok(TrilinearReport {
        config: cfg.clone(),
        formula: G_FORMULA.to_string(),
        pass: max_ratio <= cfg.bound,
        entries,
        max_ratio,
    })
}
