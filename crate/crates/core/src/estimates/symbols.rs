//! Size of the centered expansion of `Pi_s(xi) - Pi_s(2^k omega)` on the
//! fattened support of `P~_k P~_{kappa, l}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decomposition::{cap_support_radius, rho0, tilde_shell_symbol, tilde_support};
use crate::dirac_algebra::{alpha, beta, op_norm, projector, Mat4, Sign};
use crate::vec3::{self, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolReport {
    pub sign: Sign,
    pub k: u32,
    pub l: u32,
    pub omega: Vec3,
    pub mass: f64,
    pub samples: usize,
    pub sup_p11: f64,
    pub sup_p12: f64,
    pub sup_p2: f64,
    /// `2^k sup ||p11||`
    pub c11: f64,
    /// `2^l sup ||p12||`
    pub c12: f64,
    /// `2^k sup ||p2||`
    pub c2: f64,
    /// `sup ||p11 + p12 + p2 - 2 (Pi(xi) - Pi(2^k omega)) rho~ eta~||`
    pub residual: f64,
    /// `(||p11||, ||p12||, ||p2||)` at `xi = 2^k omega`.
    pub at_center: [f64; 3],
}

fn dot_alpha(v: Vec3) -> Mat4 {
    alpha(1) * Complex64::from(v[0]) + alpha(2) * Complex64::from(v[1]) + alpha(3) * Complex64::from(v[2])
}

struct Pieces {
    p11: Mat4,
    p12: Mat4,
    p2: Mat4,
    full: Mat4,
}

fn pieces(sign: Sign, k: u32, l: u32, omega: Vec3, mass: f64, xi: Vec3) -> Pieces {
    let r = vec3::norm(xi);
    let rk = (k as f64).exp2();
    let br = vec3::bracket_r(mass, r);
    let brk = vec3::bracket_r(mass, rk);
    let theta = vec3::angle(xi, omega).unwrap_or(0.0);
    let cut = tilde_shell_symbol(k, r) * rho0(theta / cap_support_radius(l));
    let s = Complex64::from(sign.value() * cut);
    let dir = vec3::normalize(xi).unwrap_or(omega);
    let p11 = dot_alpha(omega) * (s * (r / br - rk / brk));
    let p12 = dot_alpha(vec3::sub(dir, omega)) * (s * (r / br));
    let p2 = beta() * (s * mass * (1.0 / br - 1.0 / brk));
    let full = (projector(sign, mass, xi) - projector(sign, mass, vec3::scale(rk, omega))) * Complex64::from(2.0 * cut);
    Pieces { p11, p12, p2, full }
}

/// Sup norms of `p11, p12, p2` over a polar grid covering the support of
/// `rho~_k(|xi|) eta~_kappa(xi)` around the cap center `omega`.
pub fn symbol_stability_check(sign: Sign, k: u32, l: u32, omega: Vec3, mass: f64) -> SymbolReport {
    let omega = vec3::normalize(omega).unwrap_or([0.0, 0.0, 1.0]);
    let (rlo, rhi) = tilde_support(k);
    let tmax = (2.0 * cap_support_radius(l)).min(std::f64::consts::PI);
    let helper = if omega[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = vec3::normalize(vec3::cross(omega, helper)).expect("non-parallel helper");
    let e2 = vec3::cross(omega, e1);
    let (nr, nt, np) = (48, 24, 16);
    let mut sup = [0.0f64; 3];
    let mut residual: f64 = 0.0;
    let mut samples = 0;
    let mut visit = |xi: Vec3| {
        let p = pieces(sign, k, l, omega, mass, xi);
        let n = [op_norm(&p.p11), op_norm(&p.p12), op_norm(&p.p2)];
        for (s, v) in sup.iter_mut().zip(n) {
            *s = s.max(v);
        }
        residual = residual.max(op_norm(&(p.p11 + p.p12 + p.p2 - p.full)));
        samples += 1;
    };
    for ir in 0..=nr {
        let r = rlo + (rhi - rlo) * ir as f64 / nr as f64;
        for it in 0..=nt {
            let th = tmax * it as f64 / nt as f64;
            let azimuths = if it == 0 { 1 } else { np };
            for ip in 0..azimuths {
                let ph = 2.0 * std::f64::consts::PI * ip as f64 / np as f64;
                let d = vec3::add(
                    vec3::scale(th.cos(), omega),
                    vec3::add(vec3::scale(th.sin() * ph.cos(), e1), vec3::scale(th.sin() * ph.sin(), e2)),
                );
                visit(vec3::scale(r, d));
            }
        }
    }
    let c = pieces(sign, k, l, omega, mass, vec3::scale((k as f64).exp2(), omega));
    let at_center = [op_norm(&c.p11), op_norm(&c.p12), op_norm(&c.p2)];
    let two_k = (k as f64).exp2();
    SymbolReport {
        sign,
        k,
        l,
        omega,
        mass,
        samples,
        sup_p11: sup[0],
        sup_p12: sup[1],
        sup_p2: sup[2],
        c11: two_k * sup[0],
        c12: (l as f64).exp2() * sup[1],
        c2: two_k * sup[2],
        residual,
        at_center,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::cap_family;

    #[test]
    fn vanishes_at_center() {
        for sign in Sign::BOTH {
            let r = symbol_stability_check(sign, 4, 2, [0.3, -0.2, 0.9], 1.0);
            assert!(r.at_center.iter().all(|&v| v < 1e-14), "{:?}", r.at_center);
            assert!(r.residual < 1e-13);
        }
    }

    #[test]
    fn constants_moderate() {
        let caps = cap_family(3);
        let r = symbol_stability_check(Sign::Plus, 6, 3, caps.centers()[5], 1.0);
        assert!(r.c11 < 16.0 && r.c12 < 16.0 && r.c2 < 16.0, "{r:?}");
        let deep = symbol_stability_check(Sign::Minus, 6, 16, [0.0, 0.0, 1.0], 1.0);
        assert!(deep.sup_p12 <= deep.sup_p11, "{deep:?}");
    }

    #[test]
    fn constants_uniform_in_k() {
        let mut c = Vec::new();
        for k in 2..=8 {
            let r = symbol_stability_check(Sign::Plus, k, 2, [1.0, 0.0, 0.0], 1.0);
            c.push(r.c11.max(r.c12).max(r.c2));
        }
        let (lo, hi) = c.iter().fold((f64::INFINITY, 0.0f64), |a, &x| (a.0.min(x), a.1.max(x)));
        assert!(hi / lo < 4.0, "{c:?}");
    }
}
