//! Packed `[psi_+ | psi_- | phi_+]` Fourier vectors and the operators acting on them.

use num_complex::Complex64;

use super::DKGState;
use crate::dirac_algebra::{self, Spinor};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::spectral_grid::{transform_components, FrequencyLattice, MassParams, Repr, ScalarField, SpinorField};
use crate::vec3::Vec3;

pub(crate) type Packed = Vec<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Precomputed symbol tables for one lattice and mass pair.
pub(crate) struct Ops {
    pub lat: FrequencyLattice,
    pub masses: MassParams,
    pub exec: Exec,
    pub coupling: bool,
    pub np: usize,
    pub xi: Vec<Vec3>,
    pub om_big: Vec<f64>,
    pub om_small: Vec<f64>,
}

/// `E(tau)`: `e^{-i tau <xi>_M}` on `psi_+`, its conjugate on `psi_-`, `e^{-i tau <xi>_m}` on `phi_+`.
pub(crate) struct Phases {
    big: Vec<Complex64>,
    small: Vec<Complex64>,
}

impl Ops {
    pub fn new(lat: FrequencyLattice, masses: MassParams, coupling: bool, exec: Exec) -> Self {
        let np = lat.num_points();
        Self {
            lat,
            masses,
            exec,
            coupling,
            np,
            xi: (0..np).map(|i| lat.xi(i)).collect(),
            om_big: lat.brackets(masses.big),
            om_small: lat.brackets(masses.small),
        }
    }

    pub fn len(&self) -> usize {
        9 * self.np
    }

    pub fn pack(&self, s: &DKGState) -> Packed {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(s.psi_plus.to_fourier().data());
        v.extend_from_slice(s.psi_minus.to_fourier().data());
        v.extend_from_slice(s.phi_plus.to_fourier().data());
        v
    }

    pub fn unpack(&self, t: f64, v: &[Complex64]) -> DKGState {
        let np = self.np;
        DKGState {
            t,
            psi_plus: SpinorField::from_data(self.lat, Repr::Fourier, v[..4 * np].to_vec()).expect("size"),
            psi_minus: SpinorField::from_data(self.lat, Repr::Fourier, v[4 * np..8 * np].to_vec()).expect("size"),
            phi_plus: ScalarField::from_data(self.lat, Repr::Fourier, v[8 * np..].to_vec()).expect("size"),
            masses: self.masses,
        }
    }

    pub fn phases(&self, tau: f64) -> Phases {
        Phases {
            big: self.om_big.iter().map(|w| Complex64::from_polar(1.0, -tau * w)).collect(),
            small: self.om_small.iter().map(|w| Complex64::from_polar(1.0, -tau * w)).collect(),
        }
    }

    pub fn apply_phases(&self, p: &Phases, v: &mut [Complex64]) {
        let np = self.np;
        let (psi, phi) = v.split_at_mut(8 * np);
        for (c, chunk) in psi.chunks_mut(np).enumerate() {
            if c < 4 {
                for (z, e) in chunk.iter_mut().zip(&p.big) {
                    *z *= e;
                }
            } else {
                for (z, e) in chunk.iter_mut().zip(&p.big) {
                    *z *= e.conj();
                }
            }
        }
        for (z, e) in phi.iter_mut().zip(&p.small) {
            *z *= e;
        }
    }

    /// Nonlinear part `N(u)`: `i Pi_s(Re phi_+ beta psi)` and `i <D>_m^{-1} psi^dagger beta psi`.
    pub fn nonlinear(&self, u: &[Complex64]) -> Packed {
        let np = self.np;
        let mut out = vec![ZERO; self.len()];
        if !self.coupling {
            return out;
        }
        let mut psi: Vec<Complex64> = u[..4 * np].iter().zip(&u[4 * np..8 * np]).map(|(a, b)| a + b).collect();
        let mut phi = u[8 * np..].to_vec();
        transform_components(self.exec, &self.lat, &mut psi, false);
        transform_components(self.exec, &self.lat, &mut phi, false);

        // psi becomes Re(phi) beta psi; phi slot becomes psi^dagger beta psi.
        for i in 0..np {
            let f = phi[i].re;
            let a = [psi[i], psi[np + i], psi[2 * np + i], psi[3 * np + i]];
            phi[i] = Complex64::new(a[0].norm_sqr() + a[1].norm_sqr() - a[2].norm_sqr() - a[3].norm_sqr(), 0.0);
            psi[i] = a[0] * f;
            psi[np + i] = a[1] * f;
            psi[2 * np + i] = -a[2] * f;
            psi[3 * np + i] = -a[3] * f;
        }
        transform_components(self.exec, &self.lat, &mut psi, true);
        transform_components(self.exec, &self.lat, &mut phi, true);

        let big = self.masses.big;
        for i in 0..np {
            let v: Spinor = [psi[i], psi[np + i], psi[2 * np + i], psi[3 * np + i]];
            let h = dirac_algebra::apply_dirac_symbol(big, self.xi[i], &v);
            let f = 0.5 / self.om_big[i];
            for c in 0..4 {
                let p = v[c] * 0.5 + h[c] * f;
                out[c * np + i] = I * p;
                out[(4 + c) * np + i] = I * (v[c] - p);
            }
            out[8 * np + i] = I * phi[i] / self.om_small[i];
        }
        out
    }

    /// Linear part `L u = -i s <D>_M psi_s, -i <D>_m phi_+`.
    pub fn linear(&self, u: &[Complex64]) -> Packed {
        let np = self.np;
        let mut out = vec![ZERO; self.len()];
        for c in 0..9 {
            for i in 0..np {
                let w = match c {
                    0..=3 => self.om_big[i],
                    4..=7 => -self.om_big[i],
                    _ => self.om_small[i],
                };
                out[c * np + i] = -I * w * u[c * np + i];
            }
        }
        out
    }

    pub fn check(&self, s: &DKGState) -> Result<()> {
        if *s.lattice() != self.lat || *s.psi_minus.lattice() != self.lat || *s.phi_plus.lattice() != self.lat {
            return Err(Error::LatticeMismatch);
        }
        Ok(())
    }
}

pub(crate) fn axpy(y: &mut [Complex64], a: f64, x: &[Complex64]) {
    for (p, q) in y.iter_mut().zip(x) {
        *p += q * a;
    }
}

pub(crate) fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
