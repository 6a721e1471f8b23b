//! Finite sums of dressed plane waves on the torus `(R / 2 pi Z)^3` over the
//! time window `[0, 2 pi]`.
//!
//! A mode `c e^{i(xi.x - (s<xi> - tau) t)}` carries modulation exactly `tau`
//! once pulled back by the free flow, so `Q_j` acts on it as `rho_j(tau)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dense::cubes_at;
use super::{cap_family, ExponentPair, NormReport, StrichartzEntry};
use crate::decomposition::{shell_symbol, ModRange};
use crate::dirac_algebra::{apply_projector, Sign};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::vec3::{self, Vec3};

/// Box length and time window.
pub const PERIOD: f64 = 2.0 * PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub xi: [i64; 3],
    pub dressing: i64,
    pub amp: Vec<Complex64>,
}

impl Mode {
    pub fn xi_f(&self) -> Vec3 {
        [self.xi[0] as f64, self.xi[1] as f64, self.xi[2] as f64]
    }

    pub fn amp_norm(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseField {
    pub sign: Sign,
    pub mass: f64,
    pub components: usize,
    modes: Vec<Mode>,
}

struct Term {
    xi: [i64; 3],
    theta: f64,
    amp: Vec<Complex64>,
}

impl SparseField {
    /// Frequencies must be distinct and every amplitude must have `components` entries.
    pub fn new(sign: Sign, mass: f64, components: usize, modes: Vec<Mode>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for m in &modes {
            if m.amp.len() != components {
                return Err(Error::Precondition(format!(
                    "mode amplitude has {} entries, expected {components}",
                    m.amp.len()
                )));
            }
            if !seen.insert(m.xi) {
                return Err(Error::Precondition(format!("repeated frequency {:?}", m.xi)));
            }
        }
        Ok(Self {
            sign,
            mass,
            components,
            modes,
        })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Time frequency `tau - s <xi>_m` of a mode.
    pub fn theta(&self, m: &Mode) -> f64 {
        m.dressing as f64 - self.sign.value() * vec3::bracket(self.mass, m.xi_f())
    }

    pub fn eval(&self, x: Vec3, t: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.components];
        for m in &self.modes {
            let ph = Complex64::from_polar(1.0, vec3::dot(m.xi_f(), x) + self.theta(m) * t);
            for (o, a) in out.iter_mut().zip(&m.amp) {
                *o += a * ph;
            }
        }
        out
    }

    /// Apply the modulation operator `range` mode by mode.
    pub fn modulate(&self, range: ModRange) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let w = range.symbol(m.dressing as f64);
                Mode {
                    xi: m.xi,
                    dressing: m.dressing,
                    amp: m.amp.iter().map(|a| a * w).collect(),
                }
            })
            .filter(|m| m.amp_norm() > 0.0)
            .collect();
        Self { modes, ..self.clone() }
    }

    pub fn l2_sq(&self) -> f64 {
        PERIOD.powi(3) * self.modes.iter().map(|m| m.amp_norm().powi(2)).sum::<f64>()
    }

    /// `||f||_{L^inf_t L^2_x}`; constant in time for distinct frequencies.
    pub fn linf_l2(&self) -> f64 {
        self.l2_sq().sqrt()
    }

    /// `sup_j 2^{bj} ||Q_j f||_{L^2_{t,x}}`.
    pub fn xnorm_sup(&self, b: f64) -> f64 {
        let taus: Vec<f64> = self
            .modes
            .iter()
            .map(|m| (m.dressing as f64).abs())
            .filter(|&t| t > 0.0)
            .collect();
        if taus.is_empty() {
            return 0.0;
        }
        let lo = taus.iter().cloned().fold(f64::INFINITY, f64::min).log2().floor() as i32 - 1;
        let hi = taus.iter().cloned().fold(0.0, f64::max).log2().ceil() as i32 + 1;
        let mut best: f64 = 0.0;
        for j in lo..=hi {
            let e: f64 = self
                .modes
                .iter()
                .map(|m| {
                    let w = crate::decomposition::rho_j(j, m.dressing as f64);
                    w * w * m.amp_norm().powi(2)
                })
                .sum();
            best = best.max((b * j as f64).exp2() * (PERIOD.powi(4) * e).sqrt());
        }
        best
    }

    fn pieces(&self, kp: u32, l: u32) -> BTreeMap<([i64; 3], usize), Vec<Term>> {
        let caps = cap_family(l);
        let mut map: BTreeMap<([i64; 3], usize), Vec<Term>> = BTreeMap::new();
        for m in &self.modes {
            let xi = m.xi_f();
            let theta = self.theta(m);
            let cw = caps.weights(xi);
            for (n, g) in cubes_at(kp, xi) {
                for &(kappa, e) in &cw {
                    map.entry((n, kappa)).or_default().push(Term {
                        xi: m.xi,
                        theta,
                        amp: m.amp.iter().map(|a| a * (g * e)).collect(),
                    });
                }
            }
        }
        map
    }

    /// `||f||_{L^p_t L^q_x[k; l, k']}`.
    pub fn localized_norm(&self, l: u32, kp: u32, pair: ExponentPair) -> f64 {
        let (p, q) = pair.pq();
        let total: f64 = self
            .pieces(kp, l)
            .values()
            .map(|terms| piece_norm(terms, p, q).powi(2))
            .sum();
        total.sqrt()
    }

    /// `||f||_{S_k}` with the supremum over `0 <= k', l <= k`.
    pub fn sk_norm(&self, k: u32) -> NormReport {
        let mut entries = Vec::new();
        for kp in 0..=k {
            for l in 0..=k {
                entries.push(StrichartzEntry {
                    kp,
                    l,
                    l3l6: self.localized_norm(l, kp, ExponentPair::L3L6),
                    l6l3: self.localized_norm(l, kp, ExponentPair::L6L3),
                });
            }
        }
        NormReport::new(k, self.linf_l2(), self.xnorm_sup(0.5), entries)
    }
}

fn piece_norm(terms: &[Term], p: f64, q: f64) -> f64 {
    if terms.len() == 1 {
        let a: f64 = terms[0].amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        return a * PERIOD.powf(1.0 / p) * PERIOD.powf(3.0 / q);
    }
    quadrature_norm(terms, p, q)
}

/// Space-time norm of a multi-mode piece: exact grid sum in `x` after shifting
/// frequencies to the origin, composite Simpson in `t` refined to `1e-8`.
fn quadrature_norm(terms: &[Term], p: f64, q: f64) -> f64 {
    let comps = terms[0].amp.len();
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for t in terms {
        for i in 0..3 {
            lo[i] = lo[i].min(t.xi[i]);
            hi[i] = hi[i].max(t.xi[i]);
        }
    }
    let span = (0..3).map(|i| hi[i] - lo[i]).max().unwrap_or(0) as usize;
    let m = (3 * span + 1).next_power_of_two().clamp(4, 32);
    let npts = m * m * m;
    let h = PERIOD / m as f64;
    // spatial phase of every term at every grid point, times its amplitude
    let mut basis = vec![Complex64::new(0.0, 0.0); terms.len() * comps * npts];
    for (a, t) in terms.iter().enumerate() {
        let d = [t.xi[0] - lo[0], t.xi[1] - lo[1], t.xi[2] - lo[2]];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let idx = (i * m + j) * m + k;
                    let ph = 2.0 * PI * ((d[0] as usize * i + d[1] as usize * j + d[2] as usize * k) % m) as f64
                        / m as f64;
                    let e = Complex64::from_polar(1.0, ph);
                    for c in 0..comps {
                        basis[(a * comps + c) * npts + idx] = t.amp[c] * e;
                    }
                }
            }
        }
    }
    let mut g = vec![Complex64::new(0.0, 0.0); comps * npts];
    let mut slice = |t: f64| -> f64 {
        g.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (a, term) in terms.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, term.theta * t);
            let b = &basis[a * comps * npts..(a + 1) * comps * npts];
            for (z, w) in g.iter_mut().zip(b) {
                *z += w * ph;
            }
        }
        let mut s = 0.0;
        for idx in 0..npts {
            let a2: f64 = (0..comps).map(|c| g[c * npts + idx].norm_sqr()).sum();
            s += if q == 6.0 { a2 * a2 * a2 } else { a2.powf(q / 2.0) };
        }
        (s * h * h * h).powf(p / q)
    };
    let mut nt = 16usize;
    let mut vals: Vec<f64> = (0..=nt).map(|n| slice(PERIOD * n as f64 / nt as f64)).collect();
    let simpson = |v: &[f64]| -> f64 {
        let n = v.len() - 1;
        let h = PERIOD / n as f64;
        let inner: f64 = (1..n).map(|i| if i % 2 == 1 { 4.0 * v[i] } else { 2.0 * v[i] }).sum();
        h / 3.0 * (v[0] + v[n] + inner)
    };
    let mut prev = simpson(&vals);
    loop {
        let mut next = Vec::with_capacity(2 * nt + 1);
        for n in 0..nt {
            next.push(vals[n]);
            next.push(slice(PERIOD * (2 * n + 1) as f64 / (2 * nt) as f64));
        }
        next.push(vals[nt]);
        nt *= 2;
        vals = next;
        let cur = simpson(&vals);
        if (cur - prev).abs() <= 1e-8 * cur.abs() || nt >= 512 {
            return cur.powf(1.0 / p);
        }
        prev = cur;
    }
}

/// Integer frequencies where `P_k` is nonzero, inside the ball of radius `2^{k+1}`.
pub fn shell_points(k: u32) -> &'static [[i64; 3]] {
    use std::sync::OnceLock;
    static CACHE: [OnceLock<Vec<[i64; 3]>>; 16] = [const { OnceLock::new() }; 16];
    CACHE[k as usize].get_or_init(|| {
        let r = 1i64 << (k + 1);
        let mut out = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    let x = [a, b, c];
                    if shell_symbol(k, norm_i(x)) > 0.0 {
                        out.push(x);
                    }
                }
            }
        }
        out
    })
}

pub(crate) fn norm_i(x: [i64; 3]) -> f64 {
    ((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) as f64).sqrt()
}

pub(crate) fn to_f(x: [i64; 3]) -> Vec3 {
    [x[0] as f64, x[1] as f64, x[2] as f64]
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
}

/// Amplitude `rho_k(|xi|) Pi_s(xi) v` for a random `v` (spinors) or
/// `rho_k(|xi|) c` (scalars).
pub(crate) fn localized_amp(rng: &mut ChaCha8Rng, k: u32, sign: Sign, mass: f64, comps: usize, xi: [i64; 3]) -> Vec<Complex64> {
    let w = shell_symbol(k, norm_i(xi));
    if comps == 1 {
        return vec![random_complex(rng) * w];
    }
    let v = [random_complex(rng), random_complex(rng), random_complex(rng), random_complex(rng)];
    apply_projector(sign, mass, to_f(xi), &v).iter().map(|z| z * w).collect()
}

/// `0` with probability 1/2, otherwise `+-2^u` with `u` uniform in `0..=4`.
pub(crate) fn random_dressing(rng: &mut ChaCha8Rng) -> i64 {
    if rng.gen::<bool>() {
        0
    } else {
        let u = rng.gen_range(0..=4);
        let s = if rng.gen::<bool>() { 1 } else { -1 };
        s * (1i64 << u)
    }
}

/// A packet of `size` distinct modes at `{-1, 0, 1}^3` offsets around a random
/// point of shell `k`, sharing one dressing.
pub fn random_packet(seed: u64, k: u32, sign: Sign, mass: f64, comps: usize, size: usize) -> SparseField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = shell_points(k);
    let dressing = random_dressing(&mut rng);
    loop {
        let c = pts[rng.gen_range(0..pts.len())];
        let mut offsets: Vec<[i64; 3]> = Vec::new();
        let mut modes = Vec::new();
        for _ in 0..64 {
            if modes.len() == size {
                break;
            }
            let o = [rng.gen_range(-1..=1), rng.gen_range(-1..=1), rng.gen_range(-1..=1)];
            if offsets.contains(&o) {
                continue;
            }
            offsets.push(o);
            let xi = [c[0] + o[0], c[1] + o[1], c[2] + o[2]];
            let amp = localized_amp(&mut rng, k, sign, mass, comps, xi);
            if amp.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-20 {
                modes.push(Mode { xi, dressing, amp });
            }
        }
        if !modes.is_empty() {
            return SparseField::new(sign, mass, comps, modes).expect("distinct offsets");
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisposabilityConfig {
    pub k: u32,
    pub kp: u32,
    pub l: u32,
    pub j: i32,
    pub sign: Sign,
    pub mass: f64,
    pub trials: usize,
    pub packet_size: usize,
    pub seed: u64,
}

impl DisposabilityConfig {
    pub fn new(k: u32, kp: u32, l: u32, j: i32, sign: Sign) -> Self {
        Self {
            k,
            kp,
            l,
            j,
            sign,
            mass: 1.0,
            trials: 20,
            packet_size: 4,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisposabilityReport {
    pub config: DisposabilityConfig,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// `max_ratio / <k'>`
    pub log_normalized: f64,
    /// Whether `j >= 2k' - k`.
    pub uniform_regime: bool,
}

/// Ratio of the `(k', l)` Strichartz part of `Q_{<=j} f` to `||f||_{S_k}` for
/// random shell-`k` packets.
pub fn disposability_check(exec: Exec, cfg: &DisposabilityConfig) -> Result<DisposabilityReport> {
    if cfg.kp > cfg.k || cfg.l > cfg.k {
        return Err(Error::Precondition(format!(
            "need k', l <= k (k = {}, k' = {}, l = {})",
            cfg.k, cfg.kp, cfg.l
        )));
    }
    if cfg.trials == 0 || cfg.packet_size == 0 {
        return Err(Error::Precondition("trials and packet size must be positive".into()));
    }
    let ratios = exec::map_range(exec, cfg.trials, |i| {
        let f = random_packet(cfg.seed.wrapping_mul(1_000_003).wrapping_add(i as u64), cfg.k, cfg.sign, cfg.mass, 4, cfg.packet_size);
        let qf = f.modulate(ModRange::AtMost(cfg.j));
        let e = StrichartzEntry {
            kp: cfg.kp,
            l: cfg.l,
            l3l6: qf.localized_norm(cfg.l, cfg.kp, ExponentPair::L3L6),
            l6l3: qf.localized_norm(cfg.l, cfg.kp, ExponentPair::L6L3),
        };
        e.weighted(cfg.k) / f.sk_norm(cfg.k).total
    });
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let bracket = (1.0 + (cfg.kp as f64).powi(2)).sqrt();
    Ok(DisposabilityReport {
        config: cfg.clone(),
        max_ratio,
        log_normalized: max_ratio / bracket,
        uniform_regime: cfg.j >= 2 * cfg.kp as i32 - cfg.k as i32,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_norm(f: &SparseField, p: f64, q: f64, m: usize, nt: usize) -> f64 {
        let h = PERIOD / m as f64;
        let mut vals = Vec::new();
        for n in 0..=nt {
            let t = PERIOD * n as f64 / nt as f64;
            let mut s = 0.0;
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let v = f.eval([i as f64 * h, j as f64 * h, k as f64 * h], t);
                        let a2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                        s += a2.powf(q / 2.0);
                    }
                }
            }
            vals.push((s * h * h * h).powf(p / q));
        }
        let dt = PERIOD / nt as f64;
        let inner: f64 = vals[1..nt].iter().sum();
        (dt * (inner + 0.5 * (vals[0] + vals[nt]))).powf(1.0 / p)
    }

    #[test]
    fn single_mode_norms_are_analytic() {
        let f = SparseField::new(
            Sign::Plus,
            1.0,
            1,
            vec![Mode {
                xi: [3, 0, 1],
                dressing: 4,
                amp: vec![Complex64::new(0.6, 0.8)],
            }],
        )
        .unwrap();
        assert!((f.linf_l2() - PERIOD.powf(1.5)).abs() < 1e-12);
        // rho_2(4) = 1 and no other scale sees tau = 4
        assert!((f.xnorm_sup(0.5) - 2.0 * PERIOD.powi(2)).abs() < 1e-10);
        let a = f.localized_norm(0, 0, ExponentPair::L3L6);
        assert!((a - PERIOD.powf(1.0 / 3.0) * PERIOD.powf(0.5)).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_brute_force() {
        let f = random_packet(3, 2, Sign::Minus, 1.0, 4, 4);
        let terms: Vec<Term> = f
            .modes()
            .iter()
            .map(|m| Term {
                xi: m.xi,
                theta: f.theta(m),
                amp: m.amp.clone(),
            })
            .collect();
        for (p, q) in [(3.0, 6.0), (6.0, 3.0)] {
            let a = quadrature_norm(&terms, p, q);
            let b = brute_norm(&f, p, q, 16, 256);
            assert!((a / b - 1.0).abs() < 1e-4, "{a} {b}");
        }
    }

    #[test]
    fn zero_dressing_has_zero_xnorm() {
        let mut f = random_packet(1, 3, Sign::Plus, 1.0, 4, 4);
        f.modes.iter_mut().for_each(|m| m.dressing = 0);
        assert_eq!(f.xnorm_sup(0.5), 0.0);
    }

    #[test]
    fn modulation_cutoff_is_identity_on_free_waves() {
        let mut f = random_packet(2, 3, Sign::Plus, 1.0, 4, 4);
        f.modes.iter_mut().for_each(|m| m.dressing = 0);
        assert_eq!(f.modulate(ModRange::AtMost(-3)), f);
    }

    #[test]
    fn repeated_frequency_rejected() {
        let m = Mode {
            xi: [1, 0, 0],
            dressing: 0,
            amp: vec![Complex64::new(1.0, 0.0)],
        };
        assert!(SparseField::new(Sign::Plus, 1.0, 1, vec![m.clone(), m]).is_err());
    }

    #[test]
    fn disposability_free_wave_ratio() {
        let mut cfg = DisposabilityConfig::new(3, 1, 1, 0, Sign::Plus);
        cfg.trials = 4;
        let r = disposability_check(Exec::Parallel, &cfg).unwrap();
        assert!(r.max_ratio > 0.0 && r.max_ratio < 1.5, "{}", r.max_ratio);
        cfg.kp = 5;
        assert!(disposability_check(Exec::Parallel, &cfg).is_err());
    }
}
