//! Seeded grid of vanishing queries checked against the hypotheses.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{cap_vanishing_check, lemma_case, lemma_predicts_empty, vanishing_support_check};
use super::{CapPair, LemmaCase, SupportVerdict, VanishingQuery};
use crate::dirac_algebra::Sign;
use crate::exec::{self, Exec};
use crate::spectral_grid::MassParams;
use crate::vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingSuiteConfig {
    pub seed: u64,
    pub low_modulation: usize,
    pub high_modulation: usize,
    pub angular: usize,
    pub outside: usize,
    pub min_witnesses: usize,
    pub masses: MassParams,
}

impl Default for VanishingSuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            low_modulation: 60,
            high_modulation: 60,
            angular: 50,
            outside: 30,
            min_witnesses: 10,
            masses: MassParams::unit(),
        }
    }
}

impl VanishingSuiteConfig {
    pub fn total(&self) -> usize {
        self.low_modulation + self.high_modulation + self.angular + self.outside
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingCase {
    pub query: VanishingQuery,
    pub caps: Option<CapPair>,
    pub predicted: Option<LemmaCase>,
    pub verdict: SupportVerdict,
}

impl VanishingCase {
    /// In-hypothesis cases must come back empty.
    pub fn agrees(&self) -> bool {
        self.predicted.is_none() || self.verdict.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingSuiteReport {
    pub config: VanishingSuiteConfig,
    pub cases: Vec<VanishingCase>,
    pub in_hypothesis: usize,
    pub in_hypothesis_empty: usize,
    pub out_of_hypothesis: usize,
    pub witnesses: usize,
    pub pass: bool,
}

fn random_sign(rng: &mut ChaCha8Rng) -> Sign {
    if rng.gen::<bool>() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Modulation indices with maximum exactly `jmax`.
fn modulations(rng: &mut ChaCha8Rng, jmax: i32) -> (i32, i32, i32) {
    let mut js = [jmax, jmax - rng.gen_range(0..4), jmax - rng.gen_range(0..4)];
    js.shuffle(rng);
    (js[0], js[1], js[2])
}

fn query(k: u32, k1: u32, k2: u32, js: (i32, i32, i32), s: (Sign, Sign), masses: MassParams) -> VanishingQuery {
    VanishingQuery {
        k,
        k1,
        k2,
        j: js.0,
        j1: js.1,
        j2: js.2,
        s1: s.0,
        s2: s.1,
        masses,
    }
}

fn low_case(rng: &mut ChaCha8Rng, m: MassParams) -> (VanishingQuery, Option<CapPair>) {
    let k1 = rng.gen_range(0..=6);
    let k2 = (k1 as i32 + rng.gen_range(-1..=1)).max(0) as u32;
    let k = rng.gen_range(0..=k1.max(k2) + 1);
    let kmin = k.min(k1).min(k2) as i32;
    let jmax = -kmin - super::PREC_GAP - rng.gen_range(0..3);
    let s = (random_sign(rng), random_sign(rng));
    (query(k, k1, k2, modulations(rng, jmax), s, m), None)
}

fn high_case(rng: &mut ChaCha8Rng, m: MassParams) -> (VanishingQuery, Option<CapPair>) {
    loop {
        let (q, caps) = high_candidate(rng, m);
        if lemma_predicts_empty(&q, None) == Some(LemmaCase::HighModulation) {
            return (q, caps);
        }
    }
}

fn high_candidate(rng: &mut ChaCha8Rng, m: MassParams) -> (VanishingQuery, Option<CapPair>) {
    let k = rng.gen_range(0..=3);
    let (s, k1) = if rng.gen::<bool>() {
        ((Sign::Plus, Sign::Minus), rng.gen_range(0..=12))
    } else {
        ((Sign::Minus, Sign::Plus), k + super::PREC_GAP as u32 + rng.gen_range(0..3))
    };
    let k2 = if s.0 == Sign::Plus {
        (k1 as i32 + rng.gen_range(-1..=1)).max(0) as u32
    } else {
        k1 + rng.gen_range(0..2)
    };
    let kmax = k.max(k1).max(k2) as i32;
    let kmin = k.min(k1).min(k2) as i32;
    let lo = -kmin - super::PREC_GAP + 1;
    let hi = kmax - super::PREC_GAP;
    let jmax = if lo <= hi { rng.gen_range(lo..=hi) } else { hi };
    (query(k, k1, k2, modulations(rng, jmax), s, m), None)
}

fn angular_case(rng: &mut ChaCha8Rng, m: MassParams) -> (VanishingQuery, Option<CapPair>) {
    loop {
        let s = match rng.gen_range(0..3) {
            0 => (Sign::Plus, Sign::Plus),
            1 => (Sign::Minus, Sign::Minus),
            _ => (Sign::Minus, Sign::Plus),
        };
        let k1 = rng.gen_range(8..=12);
        let k2 = k1 + rng.gen_range(0..2);
        let k = rng.gen_range(0..=k1);
        let l = rng.gen_range(1..=3u32);
        let w1 = vec3::from_spherical(rng.gen_range(0.0..std::f64::consts::PI), rng.gen_range(0.0..std::f64::consts::TAU));
        let a = rng.gen_range(0.0..std::f64::consts::PI);
        let w2 = vec3::from_spherical(a, 0.0);
        let w1 = if rng.gen::<bool>() { w1 } else { [0.0, 0.0, 1.0] };
        let caps = CapPair { l, w1, w2 };
        let thr = k1 as i32 + k2 as i32 - k as i32 - 2 * l as i32;
        let kmin = k.min(k1).min(k2) as i32;
        let lo = -kmin - super::PREC_GAP + 1;
        let hi = thr - super::PREC_GAP;
        if lo > hi {
            continue;
        }
        let jmax = rng.gen_range(lo..=hi);
        let q = query(k, k1, k2, modulations(rng, jmax), s, m);
        if lemma_case(&q) {
            continue;
        }
        if lemma_predicts_empty(&q, Some(&caps)) == Some(LemmaCase::Angular) {
            return (q, Some(caps));
        }
    }
}

fn outside_case(rng: &mut ChaCha8Rng, m: MassParams) -> (VanishingQuery, Option<CapPair>) {
    loop {
        let k1 = rng.gen_range(0..=8);
        let k2 = (k1 as i32 + rng.gen_range(-1..=1)).max(0) as u32;
        let k = rng.gen_range(0..=k1.max(k2));
        let s = (random_sign(rng), random_sign(rng));
        let kmax = k.max(k1).max(k2) as i32;
        let jmax = kmax + rng.gen_range(-1..=3);
        let q = query(k, k1, k2, modulations(rng, jmax), s, m);
        if lemma_predicts_empty(&q, None).is_none() {
            return (q, None);
        }
    }
}

/// Build the seeded grid: low-modulation, high-modulation (sign case 1) and
/// angular (sign case 2) in-hypothesis cases, then out-of-hypothesis cases.
pub fn vanishing_grid(cfg: &VanishingSuiteConfig) -> Vec<(VanishingQuery, Option<CapPair>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = cfg.masses;
    let mut out = Vec::with_capacity(cfg.total());
    out.extend((0..cfg.low_modulation).map(|_| low_case(&mut rng, m)));
    out.extend((0..cfg.high_modulation).map(|_| high_case(&mut rng, m)));
    out.extend((0..cfg.angular).map(|_| angular_case(&mut rng, m)));
    out.extend((0..cfg.outside).map(|_| outside_case(&mut rng, m)));
    out
}

pub fn vanishing_suite(exec: Exec, cfg: &VanishingSuiteConfig) -> VanishingSuiteReport {
    let grid = vanishing_grid(cfg);
    let cases = exec::map(exec, &grid, |(q, caps)| {
        let predicted = lemma_predicts_empty(q, caps.as_ref());
        let verdict = match caps {
            Some(c) => cap_vanishing_check(q, c).expect("generated caps satisfy the preconditions"),
            None => vanishing_support_check(q),
        };
        VanishingCase {
            query: q.clone(),
            caps: caps.clone(),
            predicted,
            verdict,
        }
    });
    let in_hypothesis = cases.iter().filter(|c| c.predicted.is_some()).count();
    let in_hypothesis_empty = cases.iter().filter(|c| c.predicted.is_some() && c.verdict.is_empty()).count();
    let out_of_hypothesis = cases.len() - in_hypothesis;
    let witnesses = cases.iter().filter(|c| c.predicted.is_none() && c.verdict.witness().is_some()).count();
    VanishingSuiteReport {
        config: cfg.clone(),
        pass: in_hypothesis == in_hypothesis_empty && witnesses >= cfg.min_witnesses,
        cases,
        in_hypothesis,
        in_hypothesis_empty,
        out_of_hypothesis,
        witnesses,
    }
}
