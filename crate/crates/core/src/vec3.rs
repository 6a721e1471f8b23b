//! Small helpers for real 3-vectors used as frequencies and directions.

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(s: f64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

/// Unit vector along `a`; `None` for the zero vector.
pub fn normalize(a: Vec3) -> Option<Vec3> {
    let r = norm(a);
    if r == 0.0 {
        None
    } else {
        Some(scale(1.0 / r, a))
    }
}

/// Japanese bracket `sqrt(mass^2 + |xi|^2)`.
#[inline]
pub fn bracket(mass: f64, xi: Vec3) -> f64 {
    (mass * mass + dot(xi, xi)).sqrt()
}

/// Bracket of a radius.
#[inline]
pub fn bracket_r(mass: f64, r: f64) -> f64 {
    (mass * mass + r * r).sqrt()
}

/// Angle between two nonzero vectors via `atan2(|a x b|, a . b)`.
///
/// Returns `None` if either vector is zero.
pub fn angle(a: Vec3, b: Vec3) -> Option<f64> {
    if norm(a) == 0.0 || norm(b) == 0.0 {
        return None;
    }
    Some(norm(cross(a, b)).atan2(dot(a, b)))
}

/// Unit vector from polar angle `theta` and azimuth `phi`.
pub fn from_spherical(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Uniformly distributed unit vector from two uniforms in [0,1).
pub fn uniform_direction(u: f64, v: f64) -> Vec3 {
    let z = 1.0 - 2.0 * u;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * std::f64::consts::PI * v;
    [r * phi.cos(), r * phi.sin(), z]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_is_accurate_near_zero_and_pi() {
        let a = [1.0, 0.0, 0.0];
        let b = [1.0, 1e-9, 0.0];
        assert!((angle(a, b).unwrap() - 1e-9).abs() < 1e-20);
        let c = [-1.0, 1e-9, 0.0];
        assert!((angle(a, c).unwrap() - (std::f64::consts::PI - 1e-9)).abs() < 1e-15);
        assert!(angle(a, [0.0; 3]).is_none());
    }

    #[test]
    fn bracket_dominates_mass_and_radius() {
        let xi = [3.0, 4.0, 0.0];
        assert_eq!(bracket(0.0, xi), 5.0);
        assert!(bracket(1.0, xi) >= 5.0);
        assert!((bracket(1.0, xi).powi(2) - 26.0).abs() < 1e-12);
    }
}
