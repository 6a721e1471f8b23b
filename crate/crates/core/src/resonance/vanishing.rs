//! Decide whether a trilinear interaction can be nonzero under dyadic
//! frequency and modulation localization.
//!
//! The constraint set is
//! `xi_i in A~_{k_i}`, `xi2 - xi1 in A~_k`,
//! `|tau1 + s1 <xi1>_M| ~ 2^{j1}`, `|tau2 + s2 <xi2>_M| ~ 2^{j2}`,
//! `|tau2 - tau1 + <xi2 - xi1>_m| ~ 2^j`, with `~ 2^j` read as `[2^{j-2}, 2^{j+2}]`.
//! Eliminating the time frequencies leaves the condition `mu in S`, where `S` is the
//! Minkowski combination `sigma0 + sigma1 - sigma2` of the three bands. `mu`
//! depends only on `(|xi1|, |xi2|, angle(xi1, xi2))`, so the search is a
//! branch-and-bound over that box with Lipschitz cell bounds: a cell is
//! discarded only when no point in it can satisfy the constraints.

use serde::{Deserialize, Serialize};

use super::{mu, prec};
use crate::decomposition::tilde_support;
use crate::dirac_algebra::Sign;
use crate::error::{Error, Result};
use crate::spectral_grid::MassParams;
use crate::vec3::{self, Vec3};

/// Angular support radius of a fattened cap symbol at level `l`.
pub fn tilde_cap_radius(l: u32) -> f64 {
    2.5 * (-(l as f64)).exp2()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingQuery {
    pub k: u32,
    pub k1: u32,
    pub k2: u32,
    pub j: i32,
    pub j1: i32,
    pub j2: i32,
    pub s1: Sign,
    pub s2: Sign,
    pub masses: MassParams,
}

/// Two cap directions at level `l`, each widened to the fattened cap support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapPair {
    pub l: u32,
    pub w1: Vec3,
    pub w2: Vec3,
}

impl CapPair {
    /// Angular distance between the fattened supports of `s1 kappa1` and `s2 kappa2`.
    pub fn dist(&self, s1: Sign, s2: Sign) -> Result<f64> {
        let a = vec3::angle(vec3::scale(s1.value(), self.w1), vec3::scale(s2.value(), self.w2))
            .ok_or(Error::ZeroVector)?;
        Ok(a - 2.0 * tilde_cap_radius(self.l))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub xi1: Vec3,
    pub xi2: Vec3,
    pub tau1: f64,
    pub tau2: f64,
    /// `(sigma0, sigma1, sigma2)` modulations of `phi`, `u1`, `u2`.
    pub sigma: [f64; 3],
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum SupportVerdict {
    Empty { cells: usize },
    Nonempty { witness: Witness, cells: usize },
    Inconclusive { cells: usize, unresolved: usize },
}

impl SupportVerdict {
    pub fn is_empty(&self) -> bool {
        matches!(self, SupportVerdict::Empty { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            SupportVerdict::Nonempty { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

/// Which part of the vanishing statement applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaCase {
    /// `max j ≺ -min k`
    LowModulation,
    /// `(+,-)`, or `(-,+)` with `k ≺ min(k1,k2)`; `max j ≺ max k`
    HighModulation,
    /// separated caps, `max j ≺ k1 + k2 - k - 2l`
    Angular,
}

/// Case 1 versus Case 2 sign condition.
pub fn lemma_case(q: &VanishingQuery) -> bool {
    match (q.s1, q.s2) {
        (Sign::Plus, Sign::Minus) => true,
        (Sign::Minus, Sign::Plus) => prec(q.k as i32, q.k1.min(q.k2) as i32),
        _ => false,
    }
}

/// Hypotheses under which the interaction is predicted to vanish.
pub fn lemma_predicts_empty(q: &VanishingQuery, caps: Option<&CapPair>) -> Option<LemmaCase> {
    let jmax = q.j.max(q.j1).max(q.j2);
    let kmin = q.k.min(q.k1).min(q.k2) as i32;
    let kmax = q.k.max(q.k1).max(q.k2) as i32;
    if prec(jmax, -kmin) {
        return Some(LemmaCase::LowModulation);
    }
    let case1 = lemma_case(q);
    if case1 && prec(jmax, kmax) {
        return Some(LemmaCase::HighModulation);
    }
    if let Some(c) = caps {
        let sep = c.dist(q.s1, q.s2).map(|d| d >= (-(c.l as f64)).exp2()).unwrap_or(false);
        let thr = q.k1 as i32 + q.k2 as i32 - q.k as i32 - 2 * c.l as i32;
        if !case1 && c.l >= 1 && sep && prec(jmax, thr) {
            return Some(LemmaCase::Angular);
        }
    }
    None
}

fn band(j: i32) -> (f64, f64) {
    ((j as f64 - 2.0).exp2(), (j as f64 + 2.0).exp2())
}

/// Decompose `mu = sigma0 + sigma1 - sigma2` with each `|sigma_i|` in its band.
fn split_mu(mu: f64, j: i32, j1: i32, j2: i32) -> Option<[f64; 3]> {
    let b = [band(j), band(j1), band(j2)];
    for e0 in [1.0, -1.0] {
        for e1 in [1.0, -1.0] {
            for e2 in [1.0, -1.0] {
                // signed intervals for sigma0, sigma1 and -sigma2
                let iv = |(lo, hi): (f64, f64), e: f64| if e > 0.0 { (lo, hi) } else { (-hi, -lo) };
                let i0 = iv(b[0], e0);
                let i1 = iv(b[1], e1);
                let i2 = iv(b[2], -e2);
                let lo = i0.0 + i1.0 + i2.0;
                let hi = i0.1 + i1.1 + i2.1;
                if mu < lo || mu > hi {
                    continue;
                }
                // walk from the lower corner, filling one interval at a time
                let mut rest = mu - lo;
                let mut pick = [i0.0, i1.0, i2.0];
                for (p, w) in pick.iter_mut().zip([i0.1 - i0.0, i1.1 - i1.0, i2.1 - i2.0]) {
                    let d = rest.min(w);
                    *p += d;
                    rest -= d;
                }
                return Some([pick[0], pick[1], -pick[2]]);
            }
        }
    }
    None
}

/// Distance from `mu` to the admissible set `S` (0 inside).
fn dist_to_set(mu: f64, j: i32, j1: i32, j2: i32) -> f64 {
    let b = [band(j), band(j1), band(j2)];
    let mut best = f64::INFINITY;
    for e0 in [1.0, -1.0] {
        for e1 in [1.0, -1.0] {
            for e2 in [1.0, -1.0] {
                let iv = |(lo, hi): (f64, f64), e: f64| if e > 0.0 { (lo, hi) } else { (-hi, -lo) };
                let (i0, i1, i2) = (iv(b[0], e0), iv(b[1], e1), iv(b[2], -e2));
                let lo = i0.0 + i1.0 + i2.0;
                let hi = i0.1 + i1.1 + i2.1;
                best = best.min(if mu < lo { lo - mu } else if mu > hi { mu - hi } else { 0.0 });
            }
        }
    }
    best
}

fn interval_gap(x: f64, (lo, hi): (f64, f64)) -> f64 {
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

const MAX_CELLS: usize = 4_000_000;
const MAX_DEPTH: u32 = 24;

struct Search<'a> {
    q: &'a VanishingQuery,
    r0_range: (f64, f64),
}

impl Search<'_> {
    fn eval(&self, r1: f64, r2: f64, th: f64) -> (f64, f64) {
        let xi1 = [0.0, 0.0, r1];
        let xi2 = [r2 * th.sin(), 0.0, r2 * th.cos()];
        let r0 = vec3::norm(vec3::sub(xi2, xi1));
        (r0, mu(self.q.s1, self.q.s2, xi1, xi2, &self.q.masses))
    }

    fn witness(&self, r1: f64, r2: f64, th: f64) -> Option<Witness> {
        let (r0, m) = self.eval(r1, r2, th);
        if interval_gap(r0, self.r0_range) > 0.0 {
            return None;
        }
        let q = self.q;
        let sigma = split_mu(m, q.j, q.j1, q.j2)?;
        let xi1 = [0.0, 0.0, r1];
        let xi2 = [r2 * th.sin(), 0.0, r2 * th.cos()];
        let tau1 = sigma[1] - q.s1.value() * vec3::bracket(q.masses.big, xi1);
        let tau2 = sigma[2] - q.s2.value() * vec3::bracket(q.masses.big, xi2);
        Some(Witness {
            xi1,
            xi2,
            tau1,
            tau2,
            sigma,
            mu: m,
        })
    }

    /// Bound on `|mu - mu(c)|` over the cell from the gradient at the center
    /// plus a second-order remainder.
    fn taylor_bound(&self, c: &[f64; 3], h: &[f64; 3], dr0: f64) -> f64 {
        let q = self.q;
        let (r1, r2, th) = (c[0], c[1], c[2]);
        let v = [r2 * th.sin(), 0.0, r2 * th.cos() - r1];
        let bv = vec3::bracket(q.masses.small, v);
        let dv = [[0.0, 0.0, -1.0], [th.sin(), 0.0, th.cos()], [r2 * th.cos(), 0.0, -r2 * th.sin()]];
        let b1 = vec3::bracket(q.masses.big, [0.0, 0.0, r1]);
        let b2 = vec3::bracket(q.masses.big, [0.0, 0.0, r2]);
        let grad = [
            vec3::dot(v, dv[0]) / bv + q.s1.value() * r1 / b1,
            vec3::dot(v, dv[1]) / bv - q.s2.value() * r2 / b2,
            vec3::dot(v, dv[2]) / bv,
        ];
        let first: f64 = (0..3).map(|i| grad[i].abs() * h[i]).sum();
        let r0_min = (vec3::norm(v) - dr0).max(0.0);
        let inv0 = 1.0 / (q.masses.small.powi(2) + r0_min * r0_min).sqrt();
        let inv1 = 1.0 / (q.masses.big.powi(2) + (r1 - h[0]).max(0.0).powi(2)).sqrt();
        let inv2 = 1.0 / (q.masses.big.powi(2) + (r2 - h[1]).max(0.0).powi(2)).sqrt();
        let jd = h[0] + h[1] + (r2 + h[1]) * h[2];
        let curv = 2.0 * h[1] * h[2] + (r2 + h[1]) * h[2] * h[2];
        let second = 0.5 * (jd * jd * inv0 + curv + h[0] * h[0] * inv1 + h[1] * h[1] * inv2);
        first + second
    }

    /// Could some point of the cell satisfy every constraint?
    fn possible(&self, c: &[f64; 3], h: &[f64; 3]) -> bool {
        let (r0, m) = self.eval(c[0], c[1], c[2]);
        let reach = (c[0] + h[0]).min(c[1] + h[1]);
        let dr0 = h[0] + h[1] + reach * h[2];
        let dmu = (dr0 + h[0] + h[1]).min(self.taylor_bound(c, h, dr0));
        let slack = 1e-12 * (1.0 + m.abs());
        interval_gap(r0, self.r0_range) <= dr0 + slack && dist_to_set(m, self.q.j, self.q.j1, self.q.j2) <= dmu + slack
    }
}

fn search(q: &VanishingQuery, theta: (f64, f64)) -> SupportVerdict {
    let r1 = tilde_support(q.k1);
    let r2 = tilde_support(q.k2);
    let s = Search {
        q,
        r0_range: tilde_support(q.k),
    };
    let lo = [r1.0, r2.0, theta.0];
    let hi = [r1.1, r2.1, theta.1];
    let g = 8usize;
    let h0 = [
        (hi[0] - lo[0]) / (2 * g) as f64,
        (hi[1] - lo[1]) / (2 * g) as f64,
        (hi[2] - lo[2]) / (2 * g) as f64,
    ];
    let mut stack: Vec<([f64; 3], [f64; 3], u32)> = Vec::new();
    for a in 0..g {
        for b in 0..g {
            for c in 0..g {
                let idx = [a, b, c];
                let mut ctr = [0.0; 3];
                for d in 0..3 {
                    ctr[d] = lo[d] + (2 * idx[d] + 1) as f64 * h0[d];
                }
                stack.push((ctr, h0, 0));
            }
        }
    }
    let mut cells = 0usize;
    let mut unresolved = 0usize;
    while let Some((c, h, depth)) = stack.pop() {
        cells += 1;
        if let Some(w) = s.witness(c[0], c[1], c[2]) {
            return SupportVerdict::Nonempty { witness: w, cells };
        }
        if !s.possible(&c, &h) {
            continue;
        }
        if depth >= MAX_DEPTH || cells + stack.len() >= MAX_CELLS {
            unresolved += 1;
            continue;
        }
        let hh = [h[0] / 2.0, h[1] / 2.0, h[2] / 2.0];
        for corner in 0..8 {
            let mut cc = c;
            for d in 0..3 {
                cc[d] += if corner >> d & 1 == 1 { hh[d] } else { -hh[d] };
            }
            stack.push((cc, hh, depth + 1));
        }
    }
    if unresolved > 0 {
        SupportVerdict::Inconclusive { cells, unresolved }
    } else {
        SupportVerdict::Empty { cells }
    }
}

pub fn vanishing_support_check(q: &VanishingQuery) -> SupportVerdict {
    search(q, (0.0, std::f64::consts::PI))
}

/// As `vanishing_support_check`, with `xi_i` further restricted to the fattened
/// cones over the caps. Requires `1 <= l <= min(k1,k2) + 10` and
/// `dist(s1 kappa1, s2 kappa2) >= 2^-l`.
pub fn cap_vanishing_check(q: &VanishingQuery, caps: &CapPair) -> Result<SupportVerdict> {
    let l = caps.l;
    if l < 1 || l > q.k1.min(q.k2) + 10 {
        return Err(Error::Precondition(format!(
            "cap level l = {l} outside 1..=min(k1,k2)+10"
        )));
    }
    let required = (-(l as f64)).exp2();
    let d = caps.dist(q.s1, q.s2)?;
    if d < required {
        return Err(Error::CapsNotSeparated { dist: d, required });
    }
    let a = vec3::angle(caps.w1, caps.w2).ok_or(Error::ZeroVector)?;
    let rho = tilde_cap_radius(l);
    let lo = (a - 2.0 * rho).max(0.0);
    let hi = (a + 2.0 * rho).min(std::f64::consts::PI);
    Ok(search(q, (lo, hi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(k: u32, k1: u32, k2: u32, j: i32, j1: i32, j2: i32, s1: Sign, s2: Sign) -> VanishingQuery {
        VanishingQuery {
            k,
            k1,
            k2,
            j,
            j1,
            j2,
            s1,
            s2,
            masses: MassParams::unit(),
        }
    }

    fn check_witness(q: &VanishingQuery, w: &Witness) {
        let m = &q.masses;
        let in_band = |x: f64, j: i32| {
            let (lo, hi) = band(j);
            x.abs() >= lo * (1.0 - 1e-9) && x.abs() <= hi * (1.0 + 1e-9)
        };
        let s1 = w.tau1 + q.s1.value() * vec3::bracket(m.big, w.xi1);
        let s2 = w.tau2 + q.s2.value() * vec3::bracket(m.big, w.xi2);
        let s0 = w.tau2 - w.tau1 + vec3::bracket(m.small, vec3::sub(w.xi2, w.xi1));
        assert!(in_band(s0, q.j) && in_band(s1, q.j1) && in_band(s2, q.j2), "{w:?}");
    }

    #[test]
    fn same_signs_at_high_modulation_interact() {
        let q = query(3, 3, 3, 3, 3, 3, Sign::Plus, Sign::Plus);
        let v = vanishing_support_check(&q);
        let w = v.witness().expect("nonempty");
        check_witness(&q, w);
    }

    #[test]
    fn low_modulation_is_empty() {
        for s1 in Sign::BOTH {
            for s2 in Sign::BOTH {
                let q = query(2, 1, 2, -11, -12, -11, s1, s2);
                assert_eq!(lemma_predicts_empty(&q, None), Some(LemmaCase::LowModulation));
                assert!(vanishing_support_check(&q).is_empty(), "{s1}{s2}");
            }
        }
    }

    #[test]
    fn opposite_signs_below_frequency_are_empty() {
        let q = query(4, 3, 4, -6, -7, -6, Sign::Plus, Sign::Minus);
        assert_eq!(lemma_predicts_empty(&q, None), Some(LemmaCase::HighModulation));
        assert!(vanishing_support_check(&q).is_empty());
        let q = query(0, 12, 12, 2, 1, 2, Sign::Minus, Sign::Plus);
        assert_eq!(lemma_predicts_empty(&q, None), Some(LemmaCase::HighModulation));
        assert!(vanishing_support_check(&q).is_empty());
    }

    #[test]
    fn separated_caps_are_empty() {
        let l = 2;
        let w1 = [0.0, 0.0, 1.0];
        let a: f64 = 6.0 * 0.25 + 0.1;
        let w2 = [a.sin(), 0.0, a.cos()];
        let caps = CapPair { l, w1, w2 };
        let q = query(2, 8, 8, 0, 0, 0, Sign::Plus, Sign::Plus);
        assert_eq!(lemma_predicts_empty(&q, Some(&caps)), Some(LemmaCase::Angular));
        assert!(cap_vanishing_check(&q, &caps).unwrap().is_empty());
        // output frequency large enough for the angle, modulation well above threshold
        let hot = query(8, 8, 8, 14, 14, 14, Sign::Plus, Sign::Plus);
        let v = cap_vanishing_check(&hot, &caps).unwrap();
        check_witness(&hot, v.witness().expect("nonempty"));
    }

    #[test]
    fn cap_preconditions() {
        let near = CapPair {
            l: 2,
            w1: [0.0, 0.0, 1.0],
            w2: [0.0, 0.1, 1.0],
        };
        let q = query(2, 4, 4, 0, 0, 0, Sign::Plus, Sign::Plus);
        assert!(matches!(cap_vanishing_check(&q, &near), Err(Error::CapsNotSeparated { .. })));
        let far = CapPair {
            l: 15,
            w1: [0.0, 0.0, 1.0],
            w2: [0.0, 0.0, -1.0],
        };
        assert!(cap_vanishing_check(&q, &far).is_err());
    }

    #[test]
    fn split_mu_round_trip() {
        let s = split_mu(5.0, 1, 2, 0).unwrap();
        assert!((s[0] + s[1] - s[2] - 5.0).abs() < 1e-12);
        assert!(split_mu(100.0, 0, 0, 0).is_none());
        assert_eq!(dist_to_set(3.0, 0, 0, 0), 0.0);
    }
}
