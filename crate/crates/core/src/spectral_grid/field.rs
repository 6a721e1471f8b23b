use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{fft_for, FrequencyLattice};
use crate::dirac_algebra::{self, Mat4, Sign, Spinor};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::vec3::{self, Vec3};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Repr {
    Physical,
    Fourier,
}

impl Repr {
    pub fn name(self) -> &'static str {
        match self {
            Repr::Physical => "physical",
            Repr::Fourier => "fourier",
        }
    }
}

fn expect(repr: Repr, want: Repr) -> Result<()> {
    if repr == want {
        Ok(())
    } else {
        Err(Error::Representation {
            expected: want.name(),
            found: repr.name(),
        })
    }
}

fn forward_scale(lat: &FrequencyLattice) -> f64 {
    lat.length().powf(1.5) / lat.num_points() as f64
}

fn inverse_scale(lat: &FrequencyLattice) -> f64 {
    lat.length().powf(-1.5)
}

fn transform(lat: &FrequencyLattice, data: &mut [Complex64], forward: bool) {
    transform_components(Exec::Sequential, lat, data, forward);
}

/// Normalized transform of consecutive `N^3` blocks (one per component),
/// blocks dispatched through `exec`.
pub fn transform_components(exec: Exec, lat: &FrequencyLattice, data: &mut [Complex64], forward: bool) {
    let fft = fft_for(lat.n());
    let np = lat.num_points();
    let s = if forward {
        forward_scale(lat)
    } else {
        inverse_scale(lat)
    };
    exec::for_each_chunk_mut(exec, data, np, |_, chunk| {
        if forward {
            fft.forward(chunk);
        } else {
            fft.inverse(chunk);
        }
        for z in chunk.iter_mut() {
            *z *= s;
        }
    });
}

/// Complex scalar field on the periodic lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    lattice: FrequencyLattice,
    repr: Repr,
    data: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(lattice: FrequencyLattice, repr: Repr) -> Self {
        Self {
            lattice,
            repr,
            data: vec![ZERO; lattice.num_points()],
        }
    }

    pub fn from_data(lattice: FrequencyLattice, repr: Repr, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != lattice.num_points() {
            return Err(Error::LatticeMismatch);
        }
        Ok(Self {
            lattice,
            repr,
            data,
        })
    }

    /// Physical field from a function of position.
    pub fn from_physical_fn(lattice: FrequencyLattice, f: impl Fn(Vec3) -> Complex64) -> Self {
        let data = (0..lattice.num_points()).map(|i| f(lattice.x(i))).collect();
        Self {
            lattice,
            repr: Repr::Physical,
            data,
        }
    }

    /// Fourier field from a function of the integer wavevector.
    pub fn from_fourier_fn(lattice: FrequencyLattice, f: impl Fn([i64; 3]) -> Complex64) -> Self {
        let data = (0..lattice.num_points())
            .map(|i| f(lattice.wavevector(i)))
            .collect();
        Self {
            lattice,
            repr: Repr::Fourier,
            data,
        }
    }

    /// `amp * e^{i xi_m . x}` in physical representation.
    pub fn plane_wave(lattice: FrequencyLattice, m: [i64; 3], amp: Complex64) -> Self {
        let dk = lattice.dk();
        let xi = [m[0] as f64 * dk, m[1] as f64 * dk, m[2] as f64 * dk];
        Self::from_physical_fn(lattice, |x| amp * Complex64::from_polar(1.0, vec3::dot(xi, x)))
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn fft_forward(mut self) -> Result<Self> {
        expect(self.repr, Repr::Physical)?;
        transform(&self.lattice, &mut self.data, true);
        self.repr = Repr::Fourier;
        Ok(self)
    }

    pub fn fft_inverse(mut self) -> Result<Self> {
        expect(self.repr, Repr::Fourier)?;
        transform(&self.lattice, &mut self.data, false);
        self.repr = Repr::Physical;
        Ok(self)
    }

    pub fn to_fourier(&self) -> Self {
        match self.repr {
            Repr::Fourier => self.clone(),
            Repr::Physical => self.clone().fft_forward().expect("physical"),
        }
    }

    pub fn to_physical(&self) -> Self {
        match self.repr {
            Repr::Physical => self.clone(),
            Repr::Fourier => self.clone().fft_inverse().expect("fourier"),
        }
    }

    /// L^2 norm, consistent across representations.
    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        match self.repr {
            Repr::Fourier => s.sqrt(),
            Repr::Physical => (s * self.lattice.cell_volume()).sqrt(),
        }
    }

    /// `sqrt(sum <xi>^{2s} |f_hat|^2)` (unit mass bracket).
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let f = self.to_fourier();
        let lat = self.lattice;
        f.data
            .iter()
            .enumerate()
            .map(|(i, z)| vec3::bracket(1.0, lat.xi(i)).powf(2.0 * s) * z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Multiply by a symbol `xi -> a(xi)` in Fourier representation.
    pub fn apply_scalar_multiplier(&self, symbol: impl Fn(Vec3) -> Complex64) -> Result<Self> {
        expect(self.repr, Repr::Fourier)?;
        let mut out = self.clone();
        for (i, z) in out.data.iter_mut().enumerate() {
            *z *= symbol(self.lattice.xi(i));
        }
        Ok(out)
    }

    /// Multiply by a precomputed real symbol table.
    pub fn apply_table(&mut self, table: &[f64]) {
        for (z, &t) in self.data.iter_mut().zip(table) {
            *z *= t;
        }
    }

    pub fn scale(&mut self, s: Complex64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: Complex64, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        for (z, w) in self.data.iter_mut().zip(&other.data) {
            *z += a * w;
        }
        Ok(())
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        let mut d = self.clone();
        d.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(d.norm_l2())
    }

    /// Largest imaginary part in physical space.
    pub fn max_imag(&self) -> f64 {
        self.to_physical()
            .data
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    /// Pointwise real part (physical representation).
    pub fn real_part(&self) -> Self {
        let mut p = self.to_physical();
        for z in &mut p.data {
            *z = Complex64::new(z.re, 0.0);
        }
        p
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch);
        }
        expect(other.repr, self.repr)
    }
}

/// C^4-valued field, stored component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    lattice: FrequencyLattice,
    repr: Repr,
    data: Vec<Complex64>,
}

impl SpinorField {
    pub fn zeros(lattice: FrequencyLattice, repr: Repr) -> Self {
        Self {
            lattice,
            repr,
            data: vec![ZERO; 4 * lattice.num_points()],
        }
    }

    pub fn from_data(lattice: FrequencyLattice, repr: Repr, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != 4 * lattice.num_points() {
            return Err(Error::LatticeMismatch);
        }
        Ok(Self {
            lattice,
            repr,
            data,
        })
    }

    pub fn from_physical_fn(lattice: FrequencyLattice, f: impl Fn(Vec3) -> Spinor) -> Self {
        let mut out = Self::zeros(lattice, Repr::Physical);
        for idx in 0..lattice.num_points() {
            out.set_point(idx, f(lattice.x(idx)));
        }
        out
    }

    /// `v e^{i xi_m . x}` in physical representation.
    pub fn plane_wave(lattice: FrequencyLattice, m: [i64; 3], v: Spinor) -> Self {
        let dk = lattice.dk();
        let xi = [m[0] as f64 * dk, m[1] as f64 * dk, m[2] as f64 * dk];
        Self::from_physical_fn(lattice, |x| {
            let e = Complex64::from_polar(1.0, vec3::dot(xi, x));
            [v[0] * e, v[1] * e, v[2] * e, v[3] * e]
        })
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let np = self.lattice.num_points();
        &self.data[c * np..(c + 1) * np]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let np = self.lattice.num_points();
        &mut self.data[c * np..(c + 1) * np]
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Spinor {
        let np = self.lattice.num_points();
        [
            self.data[idx],
            self.data[np + idx],
            self.data[2 * np + idx],
            self.data[3 * np + idx],
        ]
    }

    #[inline]
    pub fn set_point(&mut self, idx: usize, v: Spinor) {
        let np = self.lattice.num_points();
        self.data[idx] = v[0];
        self.data[np + idx] = v[1];
        self.data[2 * np + idx] = v[2];
        self.data[3 * np + idx] = v[3];
    }

    pub fn fft_forward(mut self) -> Result<Self> {
        expect(self.repr, Repr::Physical)?;
        transform(&self.lattice, &mut self.data, true);
        self.repr = Repr::Fourier;
        Ok(self)
    }

    pub fn fft_inverse(mut self) -> Result<Self> {
        expect(self.repr, Repr::Fourier)?;
        transform(&self.lattice, &mut self.data, false);
        self.repr = Repr::Physical;
        Ok(self)
    }

    pub fn to_fourier(&self) -> Self {
        match self.repr {
            Repr::Fourier => self.clone(),
            Repr::Physical => self.clone().fft_forward().expect("physical"),
        }
    }

    pub fn to_physical(&self) -> Self {
        match self.repr {
            Repr::Physical => self.clone(),
            Repr::Fourier => self.clone().fft_inverse().expect("fourier"),
        }
    }

    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        match self.repr {
            Repr::Fourier => s.sqrt(),
            Repr::Physical => (s * self.lattice.cell_volume()).sqrt(),
        }
    }

    /// `sqrt(sum <xi>^{2s} |f_hat|^2)` (unit mass bracket).
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let f = self.to_fourier();
        let lat = self.lattice;
        (0..lat.num_points())
            .map(|i| {
                let w = vec3::bracket(1.0, lat.xi(i)).powf(2.0 * s);
                w * f.point(i).iter().map(|z| z.norm_sqr()).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Per-mode matrix multiplier `xi -> A(xi)` in Fourier representation.
    pub fn apply_matrix_multiplier(&self, symbol: impl Fn(Vec3) -> Mat4) -> Result<Self> {
        expect(self.repr, Repr::Fourier)?;
        let mut out = self.clone();
        for idx in 0..self.lattice.num_points() {
            let a = symbol(self.lattice.xi(idx));
            let v = self.point(idx);
            let mut w = [ZERO; 4];
            for (r, wr) in w.iter_mut().enumerate() {
                for (c, vc) in v.iter().enumerate() {
                    *wr += a[(r, c)] * vc;
                }
            }
            out.set_point(idx, w);
        }
        Ok(out)
    }

    /// Scalar symbol applied to every component.
    pub fn apply_scalar_multiplier(&self, symbol: impl Fn(Vec3) -> Complex64) -> Result<Self> {
        expect(self.repr, Repr::Fourier)?;
        let mut out = self.clone();
        let np = self.lattice.num_points();
        for idx in 0..np {
            let a = symbol(self.lattice.xi(idx));
            for c in 0..4 {
                out.data[c * np + idx] *= a;
            }
        }
        Ok(out)
    }

    /// `Pi_s^M(D)` via the closed-form symbol.
    pub fn apply_projector(&self, sign: Sign, mass: f64) -> Result<Self> {
        expect(self.repr, Repr::Fourier)?;
        let mut out = self.clone();
        for idx in 0..self.lattice.num_points() {
            let v = self.point(idx);
            out.set_point(idx, dirac_algebra::apply_projector(sign, mass, self.lattice.xi(idx), &v));
        }
        Ok(out)
    }

    pub fn apply_table(&mut self, table: &[f64]) {
        let np = self.lattice.num_points();
        for c in 0..4 {
            for (z, &t) in self.data[c * np..(c + 1) * np].iter_mut().zip(table) {
                *z *= t;
            }
        }
    }

    pub fn scale(&mut self, s: Complex64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn axpy(&mut self, a: Complex64, other: &Self) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch);
        }
        expect(other.repr, self.repr)?;
        for (z, w) in self.data.iter_mut().zip(&other.data) {
            *z += a * w;
        }
        Ok(())
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        let mut d = self.clone();
        d.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(d.norm_l2())
    }

    /// Pointwise `psi^dagger beta psi` as a scalar field (physical).
    pub fn beta_density(&self) -> ScalarField {
        let p = self.to_physical();
        let np = self.lattice.num_points();
        let data = (0..np)
            .map(|i| {
                let v = p.point(i);
                Complex64::new(
                    v[0].norm_sqr() + v[1].norm_sqr() - v[2].norm_sqr() - v[3].norm_sqr(),
                    0.0,
                )
            })
            .collect();
        ScalarField {
            lattice: self.lattice,
            repr: Repr::Physical,
            data,
        }
    }
}
