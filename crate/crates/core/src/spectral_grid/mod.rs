//! Periodic box discretization, FFTs and Fourier multipliers.
//!
//! Grid points `x = (i, j, k) L / N`, frequencies `xi = 2 pi m / L` with integer
//! `m` in `[-N/2, N/2)`. Fourier coefficients are normalized so that
//! `sum |f_hat|^2 = dV sum |f|^2`, i.e. the coefficient vector is an orthonormal
//! expansion of the periodic function.

mod fft;
mod field;
pub mod io;

pub use fft::{fft_for, Fft3};
pub use field::{transform_components, Repr, ScalarField, SpinorField};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Cubic periodic lattice of `n^3` points on a box of side `length`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyLattice {
    n: usize,
    length: f64,
}

impl FrequencyLattice {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::GridSize(n));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Precondition(format!("box length {length} must be positive")));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn num_points(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Frequency spacing `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    /// Grid spacing `L / N`.
    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(3)
    }

    /// Signed integer wavenumber of FFT index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT index of a signed wavenumber, if it lies on the lattice.
    #[inline]
    pub fn index_of_wavenumber(&self, m: i64) -> Option<usize> {
        let n = self.n as i64;
        if m < -n / 2 || m >= n / 2 {
            None
        } else {
            Some(m.rem_euclid(n) as usize)
        }
    }

    #[inline]
    pub fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unflat(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Integer wavenumber triple of a flat index.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let (i, j, k) = self.unflat(idx);
        [self.wavenumber(i), self.wavenumber(j), self.wavenumber(k)]
    }

    /// Flat index of an integer wavenumber triple.
    pub fn index_of(&self, m: [i64; 3]) -> Option<usize> {
        Some(self.flat(
            self.index_of_wavenumber(m[0])?,
            self.index_of_wavenumber(m[1])?,
            self.index_of_wavenumber(m[2])?,
        ))
    }

    /// Frequency vector `xi` of a flat index.
    #[inline]
    pub fn xi(&self, idx: usize) -> Vec3 {
        let m = self.wavevector(idx);
        let dk = self.dk();
        [m[0] as f64 * dk, m[1] as f64 * dk, m[2] as f64 * dk]
    }

    /// Physical coordinate of a flat index.
    pub fn x(&self, idx: usize) -> Vec3 {
        let (i, j, k) = self.unflat(idx);
        let h = self.dx();
        [i as f64 * h, j as f64 * h, k as f64 * h]
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = -(self.n as i64) / 2;
        self.wavevector(idx).iter().any(|&m| m == half)
    }

    /// Table of `<xi>_mass` over all modes.
    pub fn brackets(&self, mass: f64) -> Vec<f64> {
        (0..self.num_points())
            .map(|idx| vec3::bracket(mass, self.xi(idx)))
            .collect()
    }

    /// Largest `|xi|` on the lattice.
    pub fn max_abs_xi(&self) -> f64 {
        (3.0f64).sqrt() * (self.n / 2) as f64 * self.dk()
    }

    /// Largest `k` such that the closed shell `|xi| <= 2^{k+1}` lies inside the
    /// symmetric part of the lattice (strictly below the Nyquist wavenumber).
    pub fn max_resolved_shell(&self) -> u32 {
        let kmax_xi = (self.n / 2) as f64 * self.dk();
        let mut k = 0u32;
        while 2f64.powi(k as i32 + 2) < kmax_xi + 1e-12 {
            k += 1;
        }
        k
    }

    /// Mask for the optional 2/3-rule dealiasing: true where the mode is kept.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let cut = (self.n as i64) / 3;
        (0..self.num_points())
            .map(|idx| self.wavevector(idx).iter().all(|m| m.abs() <= cut))
            .collect()
    }
}

/// Dirac and Klein-Gordon masses with the non-resonance condition `2M > m > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassParams {
    pub big: f64,
    pub small: f64,
    pub allow_resonant: bool,
}

impl MassParams {
    pub fn new(big: f64, small: f64, allow_resonant: bool) -> Result<Self> {
        if !(big > 0.0 && big.is_finite()) {
            return Err(Error::InvalidMass(format!("M = {big} must be positive")));
        }
        if !(small > 0.0 && small.is_finite()) {
            return Err(Error::InvalidMass(format!("m = {small} must be positive")));
        }
        if !allow_resonant && small >= 2.0 * big {
            return Err(Error::MassCondition { big, small });
        }
        Ok(Self {
            big,
            small,
            allow_resonant,
        })
    }

    /// `M = m = 1`.
    pub fn unit() -> Self {
        Self {
            big: 1.0,
            small: 1.0,
            allow_resonant: false,
        }
    }

    pub fn is_nonresonant(&self) -> bool {
        2.0 * self.big > self.small && self.small > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_frequencies_are_centered() {
        let lat = FrequencyLattice::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let ms: Vec<i64> = (0..8).map(|i| lat.wavenumber(i)).collect();
        assert_eq!(ms, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for m in -4..4 {
            assert_eq!(lat.wavenumber(lat.index_of_wavenumber(m).unwrap()), m);
        }
        assert!(lat.index_of_wavenumber(4).is_none());
        assert!(FrequencyLattice::new(12, 1.0).is_err());
    }

    #[test]
    fn bracket_table_identity() {
        let lat = FrequencyLattice::new(8, 3.0).unwrap();
        let b = lat.brackets(1.5);
        for (idx, &v) in b.iter().enumerate() {
            let r = vec3::norm(lat.xi(idx));
            assert!(v >= r.max(1.5));
            assert!(((v * v) - (2.25 + r * r)).abs() <= 1e-12 * v * v);
        }
    }

    #[test]
    fn resolved_shells() {
        let pi = std::f64::consts::PI;
        assert_eq!(FrequencyLattice::new(64, 2.0 * pi).unwrap().max_resolved_shell(), 4);
        assert_eq!(FrequencyLattice::new(16, 2.0 * pi).unwrap().max_resolved_shell(), 2);
        assert_eq!(FrequencyLattice::new(32, 16.0 * pi).unwrap().max_resolved_shell(), 0);
    }

    #[test]
    fn mass_condition() {
        assert!(MassParams::new(1.0, 2.0, false).is_err());
        assert!(MassParams::new(1.0, 2.0, true).is_ok());
        assert!(MassParams::new(1.0, 1.0, false).is_ok());
        assert!(MassParams::new(0.0, 1.0, false).is_err());
        let msg = MassParams::new(1.0, 2.0, false).unwrap_err().to_string();
        assert!(msg.contains("2M > m > 0"));
    }
}
