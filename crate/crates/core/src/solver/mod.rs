//! Time integration of the half-wave Dirac-Klein-Gordon system, a second-order
//! reference discretization, Picard iteration and scattering diagnostics.
//!
//! All solver states keep their fields in Fourier representation.

mod data;
mod dkgf;
mod ops;
mod picard;
mod reference;
mod scattering;

pub use data::{generate_initial_data, InitialDataConfig};
pub use dkgf::{rhs_dkgf, step_exponential_rk4, DiagnosticsRow, Dkgf, SolveOptions, Trajectory};
pub use picard::{picard_iterate, PicardConfig, PicardReport};
pub use reference::{relative_difference, solve_second_order_reference, ReferenceOptions, ReferenceTrajectory};
pub use scattering::{scattering_profile, wrap_around_limit, DyadicDifference, ScatteringReport};

use num_complex::Complex64;

use crate::dirac_algebra::Sign;
use crate::error::{Error, Result};
use crate::spectral_grid::{FrequencyLattice, MassParams, Repr, ScalarField, SpinorField};

/// State of the first-order system: `psi_+`, `psi_-` and `phi_+` at time `t`.
#[derive(Clone, Debug)]
pub struct DKGState {
    pub t: f64,
    pub psi_plus: SpinorField,
    pub psi_minus: SpinorField,
    pub phi_plus: ScalarField,
    pub masses: MassParams,
}

/// `(psi, phi, d_t phi)` of the original system at time `t`.
#[derive(Clone, Debug)]
pub struct SecondOrderState {
    pub t: f64,
    pub psi: SpinorField,
    pub phi: ScalarField,
    pub dphi: ScalarField,
}

impl SecondOrderState {
    pub fn zeros(lattice: FrequencyLattice) -> Self {
        Self {
            t: 0.0,
            psi: SpinorField::zeros(lattice, Repr::Fourier),
            phi: ScalarField::zeros(lattice, Repr::Fourier),
            dphi: ScalarField::zeros(lattice, Repr::Fourier),
        }
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        self.psi.lattice()
    }

    /// Largest imaginary part of `phi` and `d_t phi` in physical space.
    pub fn max_imag(&self) -> f64 {
        self.phi
            .to_physical()
            .max_imag()
            .max(self.dphi.to_physical().max_imag())
    }

    /// Fourier-representation copy.
    pub fn to_fourier(&self) -> Self {
        Self {
            t: self.t,
            psi: self.psi.to_fourier(),
            phi: self.phi.to_fourier(),
            dphi: self.dphi.to_fourier(),
        }
    }
}

impl DKGState {
    pub fn zeros(lattice: FrequencyLattice, masses: MassParams) -> Self {
        Self {
            t: 0.0,
            psi_plus: SpinorField::zeros(lattice, Repr::Fourier),
            psi_minus: SpinorField::zeros(lattice, Repr::Fourier),
            phi_plus: ScalarField::zeros(lattice, Repr::Fourier),
            masses,
        }
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        self.psi_plus.lattice()
    }

    pub fn psi_sign(&self, s: Sign) -> &SpinorField {
        match s {
            Sign::Plus => &self.psi_plus,
            Sign::Minus => &self.psi_minus,
        }
    }

    /// `psi_+ + psi_-`.
    pub fn psi(&self) -> SpinorField {
        let mut p = self.psi_plus.clone();
        p.axpy(Complex64::new(1.0, 0.0), &self.psi_minus)
            .expect("components share a lattice");
        p
    }

    /// Dirac charge `||psi||_{L^2}^2`.
    pub fn charge(&self) -> f64 {
        self.psi().norm_l2().powi(2)
    }

    /// `max_s ||(I - Pi_s) psi_s||_{L^2}`.
    pub fn projector_defect(&self) -> f64 {
        Sign::BOTH
            .iter()
            .map(|&s| {
                let f = self.psi_sign(s);
                let p = f.apply_projector(s, self.masses.big).expect("fourier state");
                f.distance(&p).expect("same lattice")
            })
            .fold(0.0, f64::max)
    }

    /// Physical-space imaginary part of the reconstructed `phi`.
    pub fn phi_imag(&self) -> f64 {
        let (phi, _) = real_parts(&self.phi_plus, self.masses.small);
        phi.to_physical().max_imag()
    }

    /// Combined `L^2` norm of all three components.
    pub fn norm_l2(&self) -> f64 {
        (self.psi_plus.norm_l2().powi(2) + self.psi_minus.norm_l2().powi(2) + self.phi_plus.norm_l2().powi(2)).sqrt()
    }
}

/// `psi_s = Pi_s psi_0`, `phi_+ = phi_0 + i <D>_m^{-1} phi_1`.
pub fn split_initial_data(
    psi0: &SpinorField,
    phi0: &ScalarField,
    phi1: &ScalarField,
    masses: MassParams,
) -> Result<DKGState> {
    let lat = *psi0.lattice();
    if *phi0.lattice() != lat || *phi1.lattice() != lat {
        return Err(Error::LatticeMismatch);
    }
    let psi = psi0.to_fourier();
    let psi_plus = psi.apply_projector(Sign::Plus, masses.big)?;
    let psi_minus = psi.apply_projector(Sign::Minus, masses.big)?;
    let f0 = phi0.to_fourier();
    let f1 = phi1.to_fourier();
    let om = lat.brackets(masses.small);
    let data = f0
        .data()
        .iter()
        .zip(f1.data())
        .zip(&om)
        .map(|((a, b), w)| a + Complex64::i() * b / w)
        .collect();
    Ok(DKGState {
        t: 0.0,
        psi_plus,
        psi_minus,
        phi_plus: ScalarField::from_data(lat, Repr::Fourier, data)?,
        masses,
    })
}

/// Split a second-order state, keeping its time.
pub fn split_state(state: &SecondOrderState, masses: MassParams) -> Result<DKGState> {
    let mut s = split_initial_data(&state.psi, &state.phi, &state.dphi, masses)?;
    s.t = state.t;
    Ok(s)
}

/// `(phi, d_t phi)` from `phi_+`, both Fourier.
pub(crate) fn real_parts(phi_plus: &ScalarField, small: f64) -> (ScalarField, ScalarField) {
    let f = phi_plus.to_fourier();
    let lat = *f.lattice();
    let om = lat.brackets(small);
    let neg = negation_table(&lat);
    let d = f.data();
    let mut phi = Vec::with_capacity(d.len());
    let mut dphi = Vec::with_capacity(d.len());
    for i in 0..d.len() {
        let a = d[i];
        let b = d[neg[i]].conj();
        phi.push((a + b) * 0.5);
        dphi.push((a - b) * om[i] / Complex64::new(0.0, 2.0));
    }
    (
        ScalarField::from_data(lat, Repr::Fourier, phi).expect("sizes match"),
        ScalarField::from_data(lat, Repr::Fourier, dphi).expect("sizes match"),
    )
}

/// Inverse of [`split_initial_data`].
pub fn reconstruct(state: &DKGState) -> SecondOrderState {
    let (phi, dphi) = real_parts(&state.phi_plus, state.masses.small);
    SecondOrderState {
        t: state.t,
        psi: state.psi(),
        phi,
        dphi,
    }
}

/// Index of `-xi` for every lattice index.
pub(crate) fn negation_table(lat: &FrequencyLattice) -> Vec<usize> {
    let n = lat.n();
    (0..lat.num_points())
        .map(|idx| {
            let (i, j, k) = lat.unflat(idx);
            lat.flat((n - i) % n, (n - j) % n, (n - k) % n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac_algebra;

    fn lattice() -> FrequencyLattice {
        FrequencyLattice::new(8, 2.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn zero_data_splits_to_zero() {
        let lat = lattice();
        let z = SecondOrderState::zeros(lat);
        let s = split_state(&z, MassParams::unit()).unwrap();
        assert_eq!(s.norm_l2(), 0.0);
    }

    #[test]
    fn projected_plane_wave_has_no_minus_part() {
        let lat = lattice();
        let m = [1, -2, 0];
        let xi = lat.xi(lat.index_of(m).unwrap());
        let e = [
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(0.1, -0.4),
        ];
        let v = dirac_algebra::apply_projector(Sign::Plus, 1.0, xi, &e);
        let psi = SpinorField::plane_wave(lat, m, v);
        let z = ScalarField::zeros(lat, Repr::Physical);
        let s = split_initial_data(&psi, &z, &z, MassParams::unit()).unwrap();
        assert!(s.psi_minus.norm_l2() < 1e-12 * psi.norm_l2().max(1.0));
    }

    #[test]
    fn split_then_reconstruct_is_identity() {
        let lat = lattice();
        let cfg = InitialDataConfig {
            delta: 0.7,
            seed: 3,
            width: 0.8,
            ..InitialDataConfig::default()
        };
        let d = generate_initial_data(lat, &cfg);
        let masses = MassParams::new(1.0, 1.5, false).unwrap();
        let s = split_state(&d, masses).unwrap();
        let r = reconstruct(&s);
        let d = d.to_fourier();
        assert!(r.psi.distance(&d.psi).unwrap() < 1e-12);
        assert!(r.phi.distance(&d.phi).unwrap() < 1e-12);
        assert!(r.dphi.distance(&d.dphi).unwrap() < 1e-12);
        assert!(s.projector_defect() < 1e-12);
        assert!(s.phi_imag() < 1e-12);
    }

    #[test]
    fn mismatched_lattices_are_rejected() {
        let a = lattice();
        let b = FrequencyLattice::new(4, 1.0).unwrap();
        let psi = SpinorField::zeros(a, Repr::Fourier);
        let f = ScalarField::zeros(b, Repr::Fourier);
        assert!(matches!(
            split_initial_data(&psi, &f, &f, MassParams::unit()),
            Err(Error::LatticeMismatch)
        ));
    }
}
