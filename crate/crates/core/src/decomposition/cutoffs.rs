//! Scalar cutoff functions: the smooth step, the base bump `rho0`, dyadic
//! shells and the one-dimensional cube profile.

use serde::{Deserialize, Serialize};

/// Shape of the transition region of `rho0` on `[1, 2]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionProfile {
    /// `S(x) = e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)})`.
    #[default]
    ExpBridge,
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, `C^inf` in between, and
/// `S(x) + S(1 - x) = 1`.
#[inline]
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Base cutoff: even, 1 on `[-1, 1]`, 0 outside `(-2, 2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rho0 {
    pub profile: TransitionProfile,
}

impl Rho0 {
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match self.profile {
            TransitionProfile::ExpBridge => 1.0 - smooth_step(s.abs() - 1.0),
        }
    }
}

pub fn build_rho0(profile: TransitionProfile) -> Rho0 {
    Rho0 { profile }
}

/// `rho0` with the default profile.
#[inline]
pub fn rho0(s: f64) -> f64 {
    1.0 - smooth_step(s.abs() - 1.0)
}

/// Dyadic annulus `rho_j(r) = rho0(2^-j r) - rho0(2^{1-j} r)` for any integer `j`.
#[inline]
pub fn rho_j(j: i32, r: f64) -> f64 {
    let s = (-j as f64).exp2() * r.abs();
    rho0(s) - rho0(2.0 * s)
}

/// Largest shell index whose symbol can be nonzero at radius `r`.
#[inline]
pub fn top_shell(r: f64) -> u32 {
    if r < 1.0 {
        1
    } else {
        r.log2().floor() as u32 + 2
    }
}

/// Littlewood-Paley symbol of `P_k` at radius `r`; `P_0` is the remainder
/// `1 - sum_{k >= 1} rho_k`.
#[inline]
pub fn shell_symbol(k: u32, r: f64) -> f64 {
    if k >= 1 {
        rho_j(k as i32, r)
    } else {
        let mut s = 0.0;
        for kk in 1..=top_shell(r) {
            s += rho_j(kk as i32, r);
        }
        1.0 - s
    }
}

/// Symbol of `P_{<=k}`.
pub fn low_symbol(k: u32, r: f64) -> f64 {
    (0..=k).map(|kk| shell_symbol(kk, r)).sum()
}

/// Symbol of the fattened projector `P~_k = P_{k-1} + P_k + P_{k+1}`.
pub fn tilde_shell_symbol(k: u32, r: f64) -> f64 {
    let lo = k.saturating_sub(1);
    (lo..=k + 1).map(|kk| shell_symbol(kk, r)).sum()
}

/// Radial interval `[lo, hi]` outside which `P~_k` vanishes.
pub fn tilde_support(k: u32) -> (f64, f64) {
    if k <= 1 {
        (0.0, 2f64.powi(k as i32 + 2))
    } else {
        (2f64.powi(k as i32 - 2), 2f64.powi(k as i32 + 2))
    }
}

/// One-dimensional cube profile: 1 on `|x| <= 1/3`, 0 on `|x| >= 2/3`, with
/// `sum_n gamma1(x - n) = 1` over integer `n`.
#[inline]
pub fn gamma1(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 / 3.0 {
        1.0
    } else if a >= 2.0 / 3.0 {
        0.0
    } else {
        1.0 - smooth_step(3.0 * a - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho0_examples() {
        let r = build_rho0(TransitionProfile::ExpBridge);
        assert_eq!(r.eval(0.5), 1.0);
        assert_eq!(r.eval(2.5), 0.0);
        let v = r.eval(1.5);
        assert!(v > 0.0 && v < 1.0);
        assert_eq!(r.eval(-1.5), v);
        assert_eq!(r.eval(1.0), 1.0);
        assert_eq!(r.eval(2.0), 0.0);
    }

    #[test]
    fn smooth_step_symmetry() {
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((smooth_step(x) + smooth_step(1.0 - x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn shells_resum_pointwise() {
        for i in 0..2000 {
            let r = 1e-3 * (i as f64).powf(1.7);
            let s: f64 = (0..=top_shell(r) + 2).map(|k| shell_symbol(k, r)).sum();
            assert!((s - 1.0).abs() < 1e-12, "r={r}: {s}");
        }
        assert_eq!(shell_symbol(0, 0.9), 1.0);
        assert!((shell_symbol(0, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shell_supports() {
        for k in 1..8u32 {
            let lo = 2f64.powi(k as i32 - 1);
            let hi = 2f64.powi(k as i32 + 1);
            assert_eq!(shell_symbol(k, 0.999 * lo), 0.0);
            assert_eq!(shell_symbol(k, 1.001 * hi), 0.0);
            // at |xi| = 2^k exactly the neighbouring shells share the weight
            let r = 2f64.powi(k as i32);
            let w = shell_symbol(k, r);
            assert!((0.0..=1.0).contains(&w));
            let s = shell_symbol(k - 1, r) + w + shell_symbol(k + 1, r);
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tilde_dominates_shell() {
        for i in 1..400 {
            let r = 0.05 * i as f64;
            for k in 0..5 {
                if shell_symbol(k, r) > 0.0 {
                    assert!((tilde_shell_symbol(k, r) - 1.0).abs() < 1e-12);
                }
                let (lo, hi) = tilde_support(k);
                if r < lo || r > hi {
                    assert_eq!(tilde_shell_symbol(k, r), 0.0);
                }
            }
        }
    }

    #[test]
    fn low_symbol_telescopes() {
        for i in 0..300 {
            let r = 0.07 * i as f64;
            for k in 0..4 {
                assert!((low_symbol(k, r) - rho0(r / 2f64.powi(k as i32))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gamma1_partition() {
        for i in 0..1000 {
            let x = -2.0 + 4.0 * i as f64 / 999.0;
            let s: f64 = (-4..=4).map(|n| gamma1(x - n as f64)).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }
}
