//! Empirical certification of the resonance lower bounds by log-uniform
//! sampling, explicit probes and local Nelder-Mead refinement.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nelder_mead;
use super::{Bound, CaseLabel, ResonanceSample};
use crate::dirac_algebra::Sign;
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::spectral_grid::MassParams;
use crate::vec3::{self, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyConfig {
    /// Number of sampled geometries; each is evaluated for all four sign pairs.
    pub samples: usize,
    pub seed: u64,
    pub log2_rmin: f64,
    pub log2_rmax: f64,
    /// Worst samples per bound used as Nelder-Mead starts.
    pub refine: usize,
    pub shards: usize,
    /// Restrict to one case label.
    pub case_filter: Option<CaseLabel>,
    /// Keep every evaluated sample in the report.
    pub keep_samples: bool,
    /// An infimum at or below this counts as a failed bound.
    pub positivity: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            log2_rmin: -6.0,
            log2_rmax: 12.0,
            refine: 8,
            shards: 16,
            case_filter: None,
            keep_samples: false,
            positivity: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstant {
    pub bound: Bound,
    /// Infimum of `|mu| / rhs` over all applicable samples.
    pub infimum: f64,
    pub witness: Option<ResonanceSample>,
    pub evaluated: usize,
    pub per_case: BTreeMap<CaseLabel, f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub masses: MassParams,
    pub config: CertifyConfig,
    pub bounds: Vec<BoundConstant>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub samples: Vec<ResonanceSample>,
}

const SIGN_PAIRS: [(Sign, Sign); 4] = [
    (Sign::Plus, Sign::Plus),
    (Sign::Plus, Sign::Minus),
    (Sign::Minus, Sign::Plus),
    (Sign::Minus, Sign::Minus),
];

fn geometry(rng: &mut ChaCha8Rng, cfg: &CertifyConfig) -> (Vec3, Vec3) {
    let span = cfg.log2_rmax - cfg.log2_rmin;
    let r1 = (cfg.log2_rmin + span * rng.gen::<f64>()).exp2();
    let r2 = if rng.gen::<f64>() < 0.25 {
        r1 * (1.0 + 1e-3 * (rng.gen::<f64>() - 0.5))
    } else {
        (cfg.log2_rmin + span * rng.gen::<f64>()).exp2()
    };
    let u1 = vec3::uniform_direction(rng.gen(), rng.gen());
    let u2 = if rng.gen::<bool>() {
        vec3::uniform_direction(rng.gen(), rng.gen())
    } else {
        // near-parallel or near-antiparallel to u1
        let a = 10f64.powf(-6.0 + 6.5 * rng.gen::<f64>()).min(std::f64::consts::PI);
        let helper = if u1[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let e1 = vec3::normalize(vec3::cross(u1, helper)).unwrap();
        let e2 = vec3::cross(u1, e1);
        let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        let flip = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let mut w = [0.0; 3];
        for d in 0..3 {
            w[d] = flip * a.cos() * u1[d] + a.sin() * (phi.cos() * e1[d] + phi.sin() * e2[d]);
        }
        w
    };
    (vec3::scale(r1, u1), vec3::scale(r2, u2))
}

fn probes() -> Vec<(Vec3, Vec3)> {
    let e = [0.0, 0.0, 1.0];
    let mut out = vec![([0.0; 3], [0.0; 3])];
    for p in [-6, -3, 0, 3] {
        let r = (p as f64).exp2();
        out.push(([0.0; 3], vec3::scale(r, e)));
        out.push((vec3::scale(r, e), [0.0; 3]));
        out.push((vec3::scale(r, e), vec3::scale(r, e)));
        out.push((vec3::scale(r, e), vec3::scale(-r, e)));
    }
    out
}

#[derive(Clone)]
struct Best {
    inf: f64,
    witness: Option<ResonanceSample>,
    evaluated: usize,
    per_case: BTreeMap<CaseLabel, f64>,
    starts: Vec<(f64, ResonanceSample)>,
}

impl Best {
    fn new() -> Self {
        Self {
            inf: f64::INFINITY,
            witness: None,
            evaluated: 0,
            per_case: BTreeMap::new(),
            starts: Vec::new(),
        }
    }

    fn offer(&mut self, r: f64, s: &ResonanceSample, keep: usize) {
        self.evaluated += 1;
        let e = self.per_case.entry(s.case).or_insert(f64::INFINITY);
        *e = e.min(r);
        if r < self.inf {
            self.inf = r;
            self.witness = Some(s.clone());
        }
        if keep > 0 && s.angle.is_some() {
            if self.starts.len() < keep {
                self.starts.push((r, s.clone()));
            } else if let Some(worst) = self.starts.iter_mut().max_by(|a, b| a.0.total_cmp(&b.0)) {
                if r < worst.0 {
                    *worst = (r, s.clone());
                }
            }
        }
    }

    fn merge(&mut self, other: Best, keep: usize) {
        self.evaluated += other.evaluated;
        for (c, v) in other.per_case {
            let e = self.per_case.entry(c).or_insert(f64::INFINITY);
            *e = e.min(v);
        }
        if other.inf < self.inf {
            self.inf = other.inf;
            self.witness = other.witness;
        }
        self.starts.extend(other.starts);
        self.starts.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.starts.truncate(keep);
    }
}

fn to_params(s: &ResonanceSample) -> Vec<f64> {
    let sph = |v: Vec3| {
        let r = vec3::norm(v);
        let u = vec3::scale(1.0 / r, v);
        (r.log2(), u[2].clamp(-1.0, 1.0).acos(), u[1].atan2(u[0]))
    };
    let (a, b, c) = sph(s.xi1);
    let (d, e, f) = sph(s.xi2);
    vec![a, b, c, d, e, f]
}

fn from_params(p: &[f64], cfg: &CertifyConfig) -> (Vec3, Vec3) {
    let r1 = p[0].clamp(cfg.log2_rmin, cfg.log2_rmax).exp2();
    let r2 = p[3].clamp(cfg.log2_rmin, cfg.log2_rmax).exp2();
    (
        vec3::scale(r1, vec3::from_spherical(p[1], p[2])),
        vec3::scale(r2, vec3::from_spherical(p[4], p[5])),
    )
}

/// Estimate the constant of each lower bound as the infimum of `|mu| / rhs`.
pub fn certify_bounds(exec: Exec, masses: &MassParams, cfg: &CertifyConfig) -> Result<CertifyReport> {
    if !masses.allow_resonant && !masses.is_nonresonant() {
        return Err(Error::MassCondition {
            big: masses.big,
            small: masses.small,
        });
    }
    if cfg.samples == 0 || cfg.shards == 0 || !(cfg.log2_rmin < cfg.log2_rmax) {
        return Err(Error::Sampler(format!(
            "need samples > 0, shards > 0 and log2_rmin < log2_rmax (got {}, {}, [{}, {}])",
            cfg.samples, cfg.shards, cfg.log2_rmin, cfg.log2_rmax
        )));
    }
    let keep = cfg.refine;
    let accept = |s: &ResonanceSample| cfg.case_filter.map_or(true, |c| c == s.case);
    let shard_results = exec::map_range(exec, cfg.shards, |shard| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(shard as u64);
        let count = cfg.samples / cfg.shards + usize::from(shard < cfg.samples % cfg.shards);
        let mut best: Vec<Best> = Bound::ALL.iter().map(|_| Best::new()).collect();
        let mut kept = Vec::new();
        let mut geoms: Vec<(Vec3, Vec3)> = if shard == 0 { probes() } else { Vec::new() };
        geoms.extend((0..count).map(|_| geometry(&mut rng, cfg)));
        for (xi1, xi2) in geoms {
            for (s1, s2) in SIGN_PAIRS {
                let s = ResonanceSample::evaluate(s1, s2, xi1, xi2, masses);
                if !accept(&s) {
                    continue;
                }
                for (bi, b) in Bound::ALL.iter().enumerate() {
                    if let Some(r) = s.ratio(*b) {
                        best[bi].offer(r, &s, keep);
                    }
                }
                if cfg.keep_samples {
                    kept.push(s);
                }
            }
        }
        (best, kept)
    });
    let mut best: Vec<Best> = Bound::ALL.iter().map(|_| Best::new()).collect();
    let mut samples = Vec::new();
    for (b, kept) in shard_results {
        for (acc, part) in best.iter_mut().zip(b) {
            acc.merge(part, keep);
        }
        samples.extend(kept);
    }

    let mut bounds = Vec::new();
    for (bi, bound) in Bound::ALL.iter().copied().enumerate() {
        let starts = std::mem::take(&mut best[bi].starts);
        let refined = exec::map(exec, &starts, |(_, s)| {
            let objective = |p: &[f64]| {
                let (a, b) = from_params(p, cfg);
                let e = ResonanceSample::evaluate(s.s1, s.s2, a, b, masses);
                if !accept(&e) {
                    return f64::INFINITY;
                }
                e.ratio(bound).unwrap_or(f64::INFINITY)
            };
            let (p, _) = nelder_mead::minimize(objective, &to_params(s), 0.3, 2000, 1e-12);
            let (a, b) = from_params(&p, cfg);
            ResonanceSample::evaluate(s.s1, s.s2, a, b, masses)
        });
        for s in refined {
            if accept(&s) {
                if let Some(r) = s.ratio(bound) {
                    best[bi].offer(r, &s, 0);
                }
            }
        }
        let b = &best[bi];
        let pass = b.evaluated == 0 || b.inf > cfg.positivity;
        bounds.push(BoundConstant {
            bound,
            infimum: b.inf,
            witness: b.witness.clone(),
            evaluated: b.evaluated,
            per_case: b.per_case.clone(),
            pass,
        });
    }
    let pass = bounds.iter().all(|b| b.pass);
    Ok(CertifyReport {
        masses: *masses,
        config: cfg.clone(),
        bounds,
        pass,
        samples,
    })
}

/// Non-resonance constant for each small mass `m` at fixed `M`.
pub fn nonres_constant_vs_small_mass(exec: Exec, big: f64, smalls: &[f64], cfg: &CertifyConfig) -> Result<Vec<(f64, f64)>> {
    smalls
        .iter()
        .map(|&m| {
            let masses = MassParams::new(big, m, true)?;
            let r = certify_bounds(exec, &masses, cfg)?;
            let c = r.bounds.iter().find(|b| b.bound == Bound::NonRes).map(|b| b.infimum).unwrap_or(0.0);
            Ok((m, c))
        })
        .collect()
}
