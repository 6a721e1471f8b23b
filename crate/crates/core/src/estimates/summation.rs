//! The dyadic weight `G(k, k1, k2)` and the summation condition it must satisfy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Triples enter the sum only when `max - med <= MAX_MED_GAP`.
pub const MAX_MED_GAP: u32 = 10;

/// Closed form recorded in reports.
pub const G_FORMULA: &str = "G(k,k1,k2) = 2^{k/2} <min>^3 2^{-(max-min)/6}, <m> = (1+m^2)^{1/2}";

fn bracket(m: u32) -> f64 {
    (1.0 + (m as f64).powi(2)).sqrt()
}

fn sorted(k: u32, k1: u32, k2: u32) -> [u32; 3] {
    let mut s = [k, k1, k2];
    s.sort_unstable();
    s
}

/// `2^{k/2} <min>^3 2^{-(max - min)/6}`; symmetric in `(k1, k2)`.
pub fn g_weight(k: u32, k1: u32, k2: u32) -> f64 {
    let [lo, _, hi] = sorted(k, k1, k2);
    (k as f64 / 2.0).exp2() * bracket(lo).powi(3) * (-((hi - lo) as f64) / 6.0).exp2()
}

/// Coefficient of `a_k b_{k1} c_{k2}` on the left side of the summation
/// condition; zero outside `max ~ med`.
pub fn g_term(k: u32, k1: u32, k2: u32) -> f64 {
    let [lo, med, hi] = sorted(k, k1, k2);
    if hi - med > MAX_MED_GAP {
        return 0.0;
    }
    g_weight(k, k1, k2) / ((k as f64 / 2.0).exp2() * ((lo + 1) as f64).powi(10))
}

/// `63 (sum_m w(m)^2)^{1/2}` with `w(m) = <m>^3 / (m+1)^10`: three positions
/// of the minimum, `2 MAX_MED_GAP + 1` offsets, Cauchy-Schwarz in each.
pub fn g_constant(kmax: u32) -> f64 {
    let w2: f64 = (0..=kmax)
        .map(|m| (bracket(m).powi(3) / ((m + 1) as f64).powi(10)).powi(2))
        .sum();
    (3 * (2 * MAX_MED_GAP + 1)) as f64 * w2.sqrt()
}

fn check(seq: &[f64]) -> Result<()> {
    match seq.iter().position(|&x| !(x >= 0.0)) {
        Some(i) => Err(Error::NegativeEntry(i)),
        None => Ok(()),
    }
}

/// Left side of the summation condition over all indices below the common length.
pub fn g_summation_lhs(a: &[f64], b: &[f64], c: &[f64]) -> Result<f64> {
    check(a)?;
    check(b)?;
    check(c)?;
    let mut s = 0.0;
    for (k, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (k1, &y) in b.iter().enumerate() {
            if y == 0.0 {
                continue;
            }
            for (k2, &z) in c.iter().enumerate() {
                if z != 0.0 {
                    s += g_term(k as u32, k1 as u32, k2 as u32) * x * y * z;
                }
            }
        }
    }
    Ok(s)
}

/// Left side divided by `||a|| ||b|| ||c||` (zero for a zero sequence).
pub fn g_summation_check(a: &[f64], b: &[f64], c: &[f64]) -> Result<f64> {
    let lhs = g_summation_lhs(a, b, c)?;
    let n = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let d = n(a) * n(b) * n(c);
    Ok(if d == 0.0 { 0.0 } else { lhs / d })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GSweepReport {
    pub formula: String,
    pub kmax: u32,
    pub trials: usize,
    pub seed: u64,
    pub constant: f64,
    pub random_ratios: Vec<f64>,
    pub max_random: f64,
    /// `a_k = b_k = c_k = 2^{-k/4}`
    pub geometric: f64,
    /// Worst unit-spike placement.
    pub spike: f64,
    pub pass: bool,
}

/// Random nonnegative `l^2` triples of length `kmax + 1`, a geometric triple and
/// every spike placement, all compared against [`g_constant`].
pub fn g_sweep(seed: u64, trials: usize, kmax: u32) -> Result<GSweepReport> {
    let len = kmax as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let decay: f64 = rng.gen_range(0.0..1.0);
        (0..len)
            .map(|k| rng.gen::<f64>() * (-decay * k as f64).exp2())
            .collect()
    };
    let mut random_ratios = Vec::with_capacity(trials);
    for _ in 0..trials {
        let (a, b, c) = (random(&mut rng), random(&mut rng), random(&mut rng));
        random_ratios.push(g_summation_check(&a, &b, &c)?);
    }
    let geo: Vec<f64> = (0..len).map(|k| (-(k as f64) / 4.0).exp2()).collect();
    let geometric = g_summation_check(&geo, &geo, &geo)?;
    let mut spike: f64 = 0.0;
    for k in 0..=kmax {
        for k1 in 0..=kmax {
            for k2 in 0..=kmax {
                spike = spike.max(g_term(k, k1, k2));
            }
        }
    }
    let constant = g_constant(kmax);
    let max_random = random_ratios.iter().cloned().fold(0.0, f64::max);
    Ok(GSweepReport {
        formula: G_FORMULA.to_string(),
        kmax,
        trials,
        seed,
        constant,
        pass: max_random <= constant && geometric <= constant && spike <= constant,
        random_ratios,
        max_random,
        geometric,
        spike,
    })
}
