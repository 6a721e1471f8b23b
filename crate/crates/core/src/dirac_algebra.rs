//! Dirac and Pauli matrices, spectral projector symbols and their identities.
//!
//! Conventions: metric `g = diag(1,-1,-1,-1)`, `gamma^0 = diag(I2, -I2)`,
//! `gamma^j = [[0, sigma^j], [-sigma^j, 0]]`, `alpha^j = gamma^0 gamma^j`,
//! `beta = gamma^0`. The projector symbols are
//!
//! `Pi_s^M(xi) = 1/2 [I + s <xi>_M^{-1} (xi . alpha + M beta)]`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

pub type Mat4 = Matrix4<Complex64>;
pub type Spinor = [Complex64; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Half-wave sign `s` in `e^{-ist<D>}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn parse(s: &str) -> Option<Sign> {
        match s.trim() {
            "+" | "plus" | "+1" | "1" => Some(Sign::Plus),
            "-" | "minus" | "-1" => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Pauli matrix `sigma^j`, `j` in 1..=3.
pub fn sigma(j: usize) -> Matrix2<Complex64> {
    match j {
        1 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        2 => Matrix2::new(ZERO, -I, I, ZERO),
        3 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {j} out of range"),
    }
}

fn blocks(
    a: Matrix2<Complex64>,
    b: Matrix2<Complex64>,
    c: Matrix2<Complex64>,
    d: Matrix2<Complex64>,
) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&b);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&c);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&d);
    m
}

/// Dirac matrix `gamma^mu` in the standard representation.
pub fn gamma(mu: usize) -> Result<Mat4> {
    let i2 = Matrix2::<Complex64>::identity();
    let z2 = Matrix2::<Complex64>::zeros();
    match mu {
        0 => Ok(blocks(i2, z2, z2, -i2)),
        1..=3 => {
            let s = sigma(mu);
            Ok(blocks(z2, s, -s, z2))
        }
        _ => Err(Error::GammaIndex(mu)),
    }
}

/// Minkowski metric entry `g^{mu nu}`.
pub fn metric(mu: usize, nu: usize) -> f64 {
    match (mu, nu) {
        (0, 0) => 1.0,
        (a, b) if a == b => -1.0,
        _ => 0.0,
    }
}

pub fn beta() -> Mat4 {
    gamma(0).expect("gamma(0)")
}

/// `alpha^j = gamma^0 gamma^j`, `j` in 1..=3.
pub fn alpha(j: usize) -> Mat4 {
    beta() * gamma(j).expect("gamma(j)")
}

/// Entrywise max modulus.
pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &Mat4, tol: f64) -> bool {
    max_abs(&(m - m.adjoint())) <= tol
}

pub fn is_unitary(m: &Mat4, tol: f64) -> bool {
    max_abs(&(m.adjoint() * m - Mat4::identity())) <= tol
}

/// Operator 2-norm (largest singular value).
pub fn op_norm(m: &Mat4) -> f64 {
    m.singular_values().max()
}

/// Max over `alpha, beta` of `|gamma^a gamma^b + gamma^b gamma^a - 2 g^{ab} I|_inf`.
pub fn check_clifford() -> f64 {
    let mut worst = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            let ga = gamma(a).unwrap();
            let gb = gamma(b).unwrap();
            let r = ga * gb + gb * ga - Mat4::identity() * Complex64::from(2.0 * metric(a, b));
            worst = worst.max(max_abs(&r));
        }
    }
    worst
}

/// Max residual of `alpha^j beta + beta alpha^j = 0` and
/// `alpha^j alpha^k + alpha^k alpha^j = 2 delta^{jk} I`.
pub fn check_alpha_beta() -> f64 {
    let b = beta();
    let mut worst = 0.0f64;
    for j in 1..=3 {
        let aj = alpha(j);
        worst = worst.max(max_abs(&(aj * b + b * aj)));
        for k in 1..=3 {
            let ak = alpha(k);
            let delta = if j == k { 2.0 } else { 0.0 };
            worst = worst.max(max_abs(&(aj * ak + ak * aj - Mat4::identity() * Complex64::from(delta))));
        }
    }
    worst
}

/// Dirac symbol `xi . alpha + M beta`.
pub fn dirac_symbol(mass: f64, xi: Vec3) -> Mat4 {
    alpha(1) * Complex64::from(xi[0])
        + alpha(2) * Complex64::from(xi[1])
        + alpha(3) * Complex64::from(xi[2])
        + beta() * Complex64::from(mass)
}

/// Projector symbol `Pi_s^M(xi)`.
pub fn projector(sign: Sign, mass: f64, xi: Vec3) -> Mat4 {
    let b = vec3::bracket(mass, xi);
    if b == 0.0 {
        // M = 0 at xi = 0: the symbol is undefined; use the massless limit along e3.
        return projector(sign, 0.0, [0.0, 0.0, 1.0]);
    }
    let h = dirac_symbol(mass, xi) * Complex64::from(sign.value() / b);
    (Mat4::identity() + h) * Complex64::from(0.5)
}

/// Apply `xi . alpha + M beta` to a spinor without forming the matrix.
#[inline]
pub fn apply_dirac_symbol(mass: f64, xi: Vec3, v: &Spinor) -> Spinor {
    // sigma . xi = [[x3, x1 - i x2], [x1 + i x2, -x3]]
    let a = Complex64::new(xi[0], -xi[1]);
    let c = Complex64::new(xi[0], xi[1]);
    let x3 = xi[2];
    let su0 = v[0] * x3 + v[1] * a;
    let su1 = v[0] * c - v[1] * x3;
    let sl0 = v[2] * x3 + v[3] * a;
    let sl1 = v[2] * c - v[3] * x3;
    [
        sl0 + v[0] * mass,
        sl1 + v[1] * mass,
        su0 - v[2] * mass,
        su1 - v[3] * mass,
    ]
}

/// Apply `Pi_s^M(xi)` to a spinor.
#[inline]
pub fn apply_projector(sign: Sign, mass: f64, xi: Vec3, v: &Spinor) -> Spinor {
    let b = vec3::bracket(mass, xi);
    if b == 0.0 {
        return apply_projector(sign, 0.0, [0.0, 0.0, 1.0], v);
    }
    let h = apply_dirac_symbol(mass, xi, v);
    let f = 0.5 * sign.value() / b;
    [
        v[0] * 0.5 + h[0] * f,
        v[1] * 0.5 + h[1] * f,
        v[2] * 0.5 + h[2] * f,
        v[3] * 0.5 + h[3] * f,
    ]
}

/// `beta v`.
#[inline]
pub fn apply_beta(v: &Spinor) -> Spinor {
    [v[0], v[1], -v[2], -v[3]]
}

/// Residual of `Pi_s beta - beta Pi_{-s} - s M <xi>_M^{-1}`.
///
/// The correction term is a multiple of the identity: `alpha_j` anticommutes
/// with `beta` and `beta^2 = I`, so no `beta` factor survives.
pub fn commutation_residual(sign: Sign, mass: f64, xi: Vec3) -> f64 {
    let b = beta();
    let br = vec3::bracket(mass, xi);
    let corr = if br == 0.0 { 0.0 } else { sign.value() * mass / br };
    let lhs = projector(sign, mass, xi) * b;
    let rhs = b * projector(sign.flip(), mass, xi) + Mat4::identity() * Complex64::from(corr);
    max_abs(&(lhs - rhs))
}

/// Operator 2-norm of `Pi_{s1}(xi) Pi_{s2}(eta)`.
pub fn null_product_norm(s1: Sign, s2: Sign, mass: f64, xi: Vec3, eta: Vec3) -> f64 {
    op_norm(&(projector(s1, mass, xi) * projector(s2, mass, eta)))
}

/// Angle that controls `Pi_{s1}(xi) Pi_{s2}(eta)`: `angle(xi, eta)` for opposite
/// signs and `angle(-xi, eta)` for equal signs.
pub fn null_angle(s1: Sign, s2: Sign, xi: Vec3, eta: Vec3) -> Result<f64> {
    let f = if s1 == s2 { -1.0 } else { 1.0 };
    vec3::angle(vec3::scale(f, xi), eta).ok_or(Error::ZeroVector)
}

/// `|Pi_{s1}(xi) Pi_{s2}(eta)| / (angle + <xi>^{-1} + <eta>^{-1})`.
pub fn null_product_ratio(s1: Sign, s2: Sign, mass: f64, xi: Vec3, eta: Vec3) -> Result<f64> {
    let a = null_angle(s1, s2, xi, eta)?;
    let den = a + 1.0 / vec3::bracket(1.0, xi) + 1.0 / vec3::bracket(1.0, eta);
    Ok(null_product_norm(s1, s2, mass, xi, eta) / den)
}

/// Fitted constant of the product bound at `|xi| = |eta| = 2^k`: the sup of
/// [`null_product_ratio`] over all sign pairs and `n_angles` angles in `[0, pi]`.
pub fn null_constant_sweep(mass: f64, k: i32, n_angles: usize) -> f64 {
    let r = 2f64.powi(k);
    let xi = [0.0, 0.0, r];
    let mut best = 0.0f64;
    for i in 0..n_angles {
        let th = std::f64::consts::PI * i as f64 / (n_angles - 1).max(1) as f64;
        let eta = [r * th.sin(), 0.0, r * th.cos()];
        for s1 in Sign::BOTH {
            for s2 in Sign::BOTH {
                let q = null_product_ratio(s1, s2, mass, xi, eta).expect("nonzero");
                best = best.max(q);
            }
        }
    }
    best
}

/// Sharp constant `|Pi_{s2}(2^{k2} w2) beta Pi_{s1}(2^{k1} w1)|` of the cap-localized
/// bilinear form, for directions whose signed distance is at most `2^{-l}`.
#[allow(clippy::too_many_arguments)]
pub fn cap_bilinear_bound(
    mass: f64,
    s1: Sign,
    s2: Sign,
    k1: i32,
    k2: i32,
    l: i32,
    w1: Vec3,
    w2: Vec3,
) -> Result<f64> {
    if l < 1 || l > k1.min(k2) + 10 {
        return Err(Error::Precondition(format!(
            "cap level l = {l} outside 1..=min(k1,k2)+10"
        )));
    }
    let u1 = vec3::normalize(w1).ok_or(Error::ZeroVector)?;
    let u2 = vec3::normalize(w2).ok_or(Error::ZeroVector)?;
    let d = vec3::angle(vec3::scale(s1.value(), u1), vec3::scale(s2.value(), u2))
        .ok_or(Error::ZeroVector)?;
    let cap = 2f64.powi(-l);
    if d > cap * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "dist(s1 w1, s2 w2) = {d:.3e} exceeds 2^-l = {cap:.3e}"
        )));
    }
    let xi1 = vec3::scale(2f64.powi(k1), u1);
    let xi2 = vec3::scale(2f64.powi(k2), u2);
    Ok(op_norm(&(projector(s2, mass, xi2) * beta() * projector(s1, mass, xi1))))
}

/// Summary of the algebra suite over a set of frequencies.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub samples: usize,
    pub clifford: f64,
    pub alpha_beta: f64,
    pub completeness: f64,
    pub idempotence: f64,
    pub orthogonality: f64,
    pub hermiticity: f64,
    pub commutation: f64,
}

impl AlgebraReport {
    pub fn worst(&self) -> f64 {
        [
            self.clifford,
            self.alpha_beta,
            self.completeness,
            self.idempotence,
            self.orthogonality,
            self.hermiticity,
            self.commutation,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Run every projector identity over the given frequencies.
pub fn algebra_suite(mass: f64, xis: &[Vec3]) -> AlgebraReport {
    let mut r = AlgebraReport {
        samples: xis.len(),
        clifford: check_clifford(),
        alpha_beta: check_alpha_beta(),
        ..Default::default()
    };
    for &xi in xis {
        let p = projector(Sign::Plus, mass, xi);
        let m = projector(Sign::Minus, mass, xi);
        r.completeness = r.completeness.max(max_abs(&(p + m - Mat4::identity())));
        r.idempotence = r.idempotence.max(max_abs(&(p * p - p))).max(max_abs(&(m * m - m)));
        r.orthogonality = r.orthogonality.max(max_abs(&(p * m)));
        r.hermiticity = r
            .hermiticity
            .max(max_abs(&(p - p.adjoint())))
            .max(max_abs(&(m - m.adjoint())));
        for s in Sign::BOTH {
            r.commutation = r.commutation.max(commutation_residual(s, mass, xi));
        }
    }
    r
}

/// Seeded frequencies with uniform directions and `log2 |xi|` uniform in `log2_range`.
pub fn sample_frequencies(seed: u64, n: usize, log2_range: (f64, f64)) -> Vec<Vec3> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = rng.gen_range(log2_range.0..log2_range.1).exp2();
            vec3::scale(r, vec3::uniform_direction(rng.gen(), rng.gen()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_zero_is_diagonal() {
        let g = gamma(0).unwrap();
        let want = [1.0, 1.0, -1.0, -1.0];
        for i in 0..4 {
            for j in 0..4 {
                let w = if i == j { c(want[i], 0.0) } else { c(0.0, 0.0) };
                assert_eq!(g[(i, j)], w);
            }
        }
    }

    #[test]
    fn gamma_one_squares_to_minus_identity() {
        let g = gamma(1).unwrap();
        assert_eq!(g * g, -Mat4::identity());
    }

    #[test]
    fn gamma_two_top_right_block_is_sigma_two() {
        let g = gamma(2).unwrap();
        assert_eq!(g[(0, 2)], c(0.0, 0.0));
        assert_eq!(g[(0, 3)], c(0.0, -1.0));
        assert_eq!(g[(1, 2)], c(0.0, 1.0));
        assert_eq!(g[(1, 3)], c(0.0, 0.0));
        assert!(gamma(4).is_err());
    }

    #[test]
    fn clifford_and_alpha_beta_exact() {
        assert_eq!(check_clifford(), 0.0);
        assert_eq!(check_alpha_beta(), 0.0);
        let g0 = gamma(0).unwrap();
        assert_eq!(g0 * g0 + g0 * g0, Mat4::identity() * c(2.0, 0.0));
        let (g1, g2) = (gamma(1).unwrap(), gamma(2).unwrap());
        assert_eq!(g1 * g2 + g2 * g1, Mat4::zeros());
        assert_eq!(alpha(1) * alpha(1), Mat4::identity());
        assert_eq!(alpha(1) * alpha(2) + alpha(2) * alpha(1), Mat4::zeros());
    }

    #[test]
    fn projector_at_zero_frequency() {
        let p = projector(Sign::Plus, 1.0, [0.0; 3]);
        let mut want = Mat4::zeros();
        want[(0, 0)] = c(1.0, 0.0);
        want[(1, 1)] = c(1.0, 0.0);
        assert!(max_abs(&(p - want)) < 1e-15);
    }

    #[test]
    fn projector_idempotent_on_axis() {
        let p = projector(Sign::Plus, 1.0, [1.0, 0.0, 0.0]);
        assert!(max_abs(&(p * p - p)) < 1e-14);
        assert!(is_hermitian(&p, 1e-14));
        assert!((op_norm(&p) - 1.0).abs() < 1e-12);
        assert!(is_unitary(&beta(), 0.0));
    }

    #[test]
    fn fast_projector_matches_matrix() {
        let xi = [0.3, -1.7, 2.2];
        let v = [c(1.0, 0.5), c(-0.2, 0.1), c(0.7, -0.3), c(0.0, 2.0)];
        for s in Sign::BOTH {
            let p = projector(s, 1.3, xi);
            let fast = apply_projector(s, 1.3, xi, &v);
            for i in 0..4 {
                let mut z = c(0.0, 0.0);
                for j in 0..4 {
                    z += p[(i, j)] * v[j];
                }
                assert!((z - fast[i]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn commutation_examples() {
        assert!(commutation_residual(Sign::Plus, 1.0, [0.0; 3]) < 1e-15);
        assert!(commutation_residual(Sign::Minus, 1.0, [0.4, -2.0, 7.0]) < 1e-13);
        assert!(commutation_residual(Sign::Plus, 0.0, [0.4, -2.0, 7.0]) < 1e-13);
    }

    #[test]
    fn null_products() {
        let xi = [0.3, 0.4, 1.2];
        assert!(null_product_norm(Sign::Minus, Sign::Plus, 0.0, xi, xi) < 1e-13);
        assert!(null_product_norm(Sign::Minus, Sign::Plus, 0.0, xi, vec3::scale(5.0, xi)) < 1e-13);
        let same = null_product_norm(Sign::Plus, Sign::Plus, 1.0, xi, xi);
        assert!((same - 1.0).abs() < 1e-12);
        assert!(null_angle(Sign::Plus, Sign::Plus, [0.0; 3], xi).is_err());
    }

    #[test]
    fn null_constant_is_small_and_scale_stable() {
        for k in 0..=8 {
            let c = null_constant_sweep(1.0, k, 181);
            assert!(c <= 4.0, "k={k}: {c}");
            assert!((c - 0.5).abs() < 0.1, "k={k}: {c}");
        }
    }

    #[test]
    fn cap_bilinear_aligned_pairs() {
        let e3 = [0.0, 0.0, 1.0];
        let m3 = [0.0, 0.0, -1.0];
        // opposite signs with antipodal directions: s1 w1 = s2 w2
        let v = cap_bilinear_bound(1.0, Sign::Plus, Sign::Minus, 10, 10, 1, e3, m3).unwrap();
        assert!(v <= 8.0 * 0.5);
        // equal signs, equal directions
        let w = cap_bilinear_bound(1.0, Sign::Plus, Sign::Plus, 10, 10, 1, e3, e3).unwrap();
        assert!(w <= 8.0 * 0.5);
        // massless equal frequencies vanish exactly
        let z = cap_bilinear_bound(0.0, Sign::Plus, Sign::Plus, 4, 4, 1, e3, e3).unwrap();
        assert!(z < 1e-13);
        // separated directions violate the precondition
        assert!(cap_bilinear_bound(1.0, Sign::Plus, Sign::Minus, 10, 10, 1, e3, e3).is_err());
    }

    #[test]
    fn suite_on_random_frequencies() {
        let xis: Vec<Vec3> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.37;
                [t.sin() * 10.0, (1.3 * t).cos() * 3.0, t * 0.1 - 5.0]
            })
            .collect();
        let r = algebra_suite(1.0, &xis);
        assert!(r.worst() <= 1e-13, "{r:?}");
    }
}
