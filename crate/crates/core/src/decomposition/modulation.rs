//! Space-time fields on a periodic time window and the modulation projectors
//! `Q_j^{+-,m}`, the Fourier multipliers `rho_j(tau +- <xi>_m)`.
//!
//! Spatial data is always held as Fourier coefficients. Along time the field
//! lives either on the samples `t_n = n T / N_t` or on the frequencies
//! `tau_q = 2 pi q / T`, normalized so that `sum_q |f_hat|^2 = dt sum_n |f|^2`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::cutoffs::{rho0, rho_j};
use crate::dirac_algebra::Sign;
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::spectral_grid::{FrequencyLattice, Repr, ScalarField, SpinorField};
use crate::vec3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Uniform periodic sampling of `[0, T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    nt: usize,
    window: f64,
}

impl TimeGrid {
    pub fn new(nt: usize, window: f64) -> Result<Self> {
        if nt < 2 {
            return Err(Error::Precondition(format!("need at least 2 time samples, got {nt}")));
        }
        if !(window > 0.0 && window.is_finite()) {
            return Err(Error::Precondition(format!("time window {window} must be positive")));
        }
        Ok(Self { nt, window })
    }

    pub fn len(&self) -> usize {
        self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.nt == 0
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn dt(&self) -> f64 {
        self.window / self.nt as f64
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    /// Spacing `2 pi / T` of the time frequencies.
    pub fn dtau(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.window
    }

    /// Signed frequency `tau_q` of FFT index `q`.
    pub fn tau(&self, q: usize) -> f64 {
        let n = self.nt as i64;
        let q = q as i64;
        let m = if q < (n + 1) / 2 { q } else { q - n };
        m as f64 * self.dtau()
    }

    /// Largest `|tau|` represented.
    pub fn tau_max(&self) -> f64 {
        std::f64::consts::PI / self.dt()
    }

    /// Inclusive range of `j` with `2pi/T <= 2^j` and `2^{j+1} <= pi/dt`.
    pub fn resolvable(&self) -> Result<(i32, i32)> {
        let lo = self.dtau().log2().ceil() as i32;
        let hi = self.tau_max().log2().floor() as i32 - 1;
        if lo > hi {
            return Err(Error::EmptyModulationRange);
        }
        Ok((lo, hi))
    }

    pub fn check_resolvable(&self, j: i32) -> Result<()> {
        let (lo, hi) = self.resolvable()?;
        if j < lo || j > hi {
            return Err(Error::Unresolved { j, lo, hi });
        }
        Ok(())
    }

    /// `sin^2(pi t / T)` at sample `n`.
    pub fn hann(&self, n: usize) -> f64 {
        (std::f64::consts::PI * n as f64 / self.nt as f64).sin().powi(2)
    }
}

/// Optional time window applied before the time transform.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taper {
    #[default]
    None,
    Hann,
}

/// Which modulation operator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModRange {
    /// `Q_j`
    Exact(i32),
    /// `Q_{<=j} = rho0(2^-j sigma)`
    AtMost(i32),
    /// `Q_{>j} = I - Q_{<=j}`
    Above(i32),
    /// `Q_{j in [a, b]}`
    Interval(i32, i32),
}

impl ModRange {
    pub fn symbol(self, sigma: f64) -> f64 {
        match self {
            ModRange::Exact(j) => rho_j(j, sigma),
            ModRange::AtMost(j) => rho0(sigma / (j as f64).exp2()),
            ModRange::Above(j) => 1.0 - rho0(sigma / (j as f64).exp2()),
            ModRange::Interval(a, b) => {
                if b < a {
                    0.0
                } else {
                    rho0(sigma / (b as f64).exp2()) - rho0(sigma / ((a - 1) as f64).exp2())
                }
            }
        }
    }

    fn check(self, time: &TimeGrid) -> Result<()> {
        match self {
            ModRange::Exact(j) => time.check_resolvable(j),
            ModRange::Interval(a, b) => {
                time.check_resolvable(a)?;
                time.check_resolvable(b)
            }
            ModRange::AtMost(_) | ModRange::Above(_) => Ok(()),
        }
    }
}

/// Time series of spatial Fourier coefficients, `components` per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    lattice: FrequencyLattice,
    time: TimeGrid,
    components: usize,
    time_repr: Repr,
    data: Vec<Complex64>,
}

impl SpaceTimeField {
    pub fn zeros(lattice: FrequencyLattice, time: TimeGrid, components: usize) -> Self {
        Self {
            lattice,
            time,
            components,
            time_repr: Repr::Physical,
            data: vec![ZERO; time.len() * components * lattice.num_points()],
        }
    }

    pub fn from_spinor_slices(time: TimeGrid, slices: &[SpinorField]) -> Result<Self> {
        Self::from_parts(time, 4, slices.iter().map(|s| (*s.lattice(), s.to_fourier().data().to_vec())))
    }

    pub fn from_scalar_slices(time: TimeGrid, slices: &[ScalarField]) -> Result<Self> {
        Self::from_parts(time, 1, slices.iter().map(|s| (*s.lattice(), s.to_fourier().data().to_vec())))
    }

    fn from_parts(
        time: TimeGrid,
        components: usize,
        parts: impl ExactSizeIterator<Item = (FrequencyLattice, Vec<Complex64>)>,
    ) -> Result<Self> {
        if parts.len() != time.len() {
            return Err(Error::Precondition(format!(
                "{} slices for {} time samples",
                parts.len(),
                time.len()
            )));
        }
        let mut lattice = None;
        let mut data = Vec::new();
        for (lat, d) in parts {
            if *lattice.get_or_insert(lat) != lat {
                return Err(Error::LatticeMismatch);
            }
            data.extend(d);
        }
        Ok(Self {
            lattice: lattice.expect("nonempty"),
            time,
            components,
            time_repr: Repr::Physical,
            data,
        })
    }

    /// Free evolution `e^{-i s t <D>_mass} u0` of a spinor datum.
    pub fn free_wave(time: TimeGrid, u0: &SpinorField, sign: Sign, mass: f64) -> Self {
        let u = u0.to_fourier();
        let lat = *u.lattice();
        let np = lat.num_points();
        let br = lat.brackets(mass);
        let mut out = Self::zeros(lat, time, 4);
        for n in 0..time.len() {
            let t = time.t(n);
            for idx in 0..np {
                let ph = Complex64::from_polar(1.0, -sign.value() * t * br[idx]);
                for c in 0..4 {
                    out.data[(n * 4 + c) * np + idx] = u.data()[c * np + idx] * ph;
                }
            }
        }
        out
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn time_repr(&self) -> Repr {
        self.time_repr
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    fn block(&self) -> usize {
        self.components * self.lattice.num_points()
    }

    /// Coefficient at time (or tau) index `n`, component `c`, spatial mode `idx`.
    pub fn at(&self, n: usize, c: usize, idx: usize) -> Complex64 {
        self.data[n * self.block() + c * self.lattice.num_points() + idx]
    }

    pub fn set(&mut self, n: usize, c: usize, idx: usize, v: Complex64) {
        let b = self.block();
        let np = self.lattice.num_points();
        self.data[n * b + c * np + idx] = v;
    }

    /// Spatial Fourier coefficients of slice `n`.
    pub fn slice(&self, n: usize) -> &[Complex64] {
        let b = self.block();
        &self.data[n * b..(n + 1) * b]
    }

    pub fn spinor_slice(&self, n: usize) -> Result<SpinorField> {
        if self.components != 4 {
            return Err(Error::Precondition("not a spinor field".into()));
        }
        SpinorField::from_data(self.lattice, Repr::Fourier, self.slice(n).to_vec())
    }

    pub fn scalar_slice(&self, n: usize) -> Result<ScalarField> {
        if self.components != 1 {
            return Err(Error::Precondition("not a scalar field".into()));
        }
        ScalarField::from_data(self.lattice, Repr::Fourier, self.slice(n).to_vec())
    }

    fn transform(&mut self, exec: Exec, forward: bool) {
        let nt = self.time.len();
        let b = self.block();
        let mut planner = FftPlanner::new();
        let fft = if forward {
            planner.plan_fft_forward(nt)
        } else {
            planner.plan_fft_inverse(nt)
        };
        let scale = if forward {
            self.time.window().sqrt() / nt as f64
        } else {
            1.0 / self.time.window().sqrt()
        };
        let data = &self.data;
        let cols: Vec<Vec<Complex64>> = exec::map_range(exec, b, |col| {
            let mut v: Vec<Complex64> = (0..nt).map(|n| data[n * b + col]).collect();
            fft.process(&mut v);
            v
        });
        for (col, v) in cols.into_iter().enumerate() {
            for (n, z) in v.into_iter().enumerate() {
                self.data[n * b + col] = z * scale;
            }
        }
    }

    pub fn to_time_fourier(&self, exec: Exec) -> Self {
        let mut out = self.clone();
        if out.time_repr == Repr::Physical {
            out.transform(exec, true);
            out.time_repr = Repr::Fourier;
        }
        out
    }

    pub fn to_time_physical(&self, exec: Exec) -> Self {
        let mut out = self.clone();
        if out.time_repr == Repr::Fourier {
            out.transform(exec, false);
            out.time_repr = Repr::Physical;
        }
        out
    }

    /// Space-time `L^2` norm (periodic rectangle rule in time).
    pub fn l2(&self) -> f64 {
        let s: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        match self.time_repr {
            Repr::Fourier => s.sqrt(),
            Repr::Physical => (s * self.time.dt()).sqrt(),
        }
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        for (z, w) in self.data.iter_mut().zip(&other.data) {
            *z += w;
        }
        Ok(())
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        let mut d = self.clone();
        for (z, w) in d.data.iter_mut().zip(&other.data) {
            *z -= w;
        }
        Ok(d.l2())
    }

    pub fn scale(&mut self, s: Complex64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.lattice != other.lattice || self.time != other.time || self.components != other.components {
            return Err(Error::LatticeMismatch);
        }
        if self.time_repr != other.time_repr {
            return Err(Error::Representation {
                expected: self.time_repr.name(),
                found: other.time_repr.name(),
            });
        }
        Ok(())
    }

    /// Multiply the space-time transform by `a(tau, xi)`; result in the input
    /// time representation.
    pub fn multiply(&self, exec: Exec, taper: Taper, a: impl Fn(f64, usize) -> f64 + Sync) -> Self {
        let mut src = self.to_time_physical(exec);
        if taper == Taper::Hann {
            let b = src.block();
            for n in 0..src.time.len() {
                let w = src.time.hann(n);
                for z in &mut src.data[n * b..(n + 1) * b] {
                    *z *= w;
                }
            }
        }
        let mut f = src.to_time_fourier(exec);
        let np = self.lattice.num_points();
        let b = f.block();
        let time = f.time;
        exec::for_each_chunk_mut(exec, &mut f.data, b, |q, chunk| {
            let tau = time.tau(q);
            for idx in 0..np {
                let w = a(tau, idx);
                for c in 0..chunk.len() / np {
                    chunk[c * np + idx] *= w;
                }
            }
        });
        match self.time_repr {
            Repr::Fourier => f,
            Repr::Physical => f.to_time_physical(exec),
        }
    }
}

/// `Q^{sign, mass}_range f`: multiplies by the range symbol of `tau + sign <xi>_mass`.
pub fn modulation_project(
    exec: Exec,
    field: &SpaceTimeField,
    sign: Sign,
    mass: f64,
    range: ModRange,
    taper: Taper,
) -> Result<SpaceTimeField> {
    range.check(&field.time)?;
    let lat = field.lattice;
    let br: Vec<f64> = (0..lat.num_points())
        .map(|i| vec3::bracket(mass, lat.xi(i)))
        .collect();
    let s = sign.value();
    Ok(field.multiply(exec, taper, |tau, idx| range.symbol(tau + s * br[idx])))
}

/// `[Q_{<lo}, Q_lo, ..., Q_hi, Q_{>hi}]`, which resums to the identity.
pub fn modulation_partition(
    exec: Exec,
    field: &SpaceTimeField,
    sign: Sign,
    mass: f64,
    lo: i32,
    hi: i32,
) -> Result<Vec<SpaceTimeField>> {
    let mut ranges = vec![ModRange::AtMost(lo - 1)];
    ranges.extend((lo..=hi).map(ModRange::Exact));
    ranges.push(ModRange::Above(hi));
    ranges
        .into_iter()
        .map(|r| modulation_project(exec, field, sign, mass, r, Taper::None))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lat() -> FrequencyLattice {
        FrequencyLattice::new(4, 2.0 * std::f64::consts::PI).unwrap()
    }

    fn random(time: TimeGrid, seed: u64) -> SpaceTimeField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpaceTimeField::zeros(lat(), time, 4);
        for z in f.data_mut() {
            *z = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        f
    }

    #[test]
    fn time_fft_round_trip_and_parseval() {
        let time = TimeGrid::new(32, 2.0 * std::f64::consts::PI).unwrap();
        let f = random(time, 1);
        let g = f.to_time_fourier(Exec::Parallel);
        assert!((g.l2() - f.l2()).abs() < 1e-12 * f.l2());
        let back = g.to_time_physical(Exec::Sequential);
        assert!(back.distance(&f).unwrap() < 1e-10 * f.l2());
    }

    #[test]
    fn resolvable_range() {
        let time = TimeGrid::new(64, 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(time.resolvable().unwrap(), (0, 4));
        assert!(matches!(time.check_resolvable(-1), Err(Error::Unresolved { .. })));
        let short = TimeGrid::new(2, 0.1).unwrap();
        assert!(short.resolvable().is_err());
    }

    #[test]
    fn free_wave_has_no_resolved_modulation() {
        let time = TimeGrid::new(64, 2.0 * std::f64::consts::PI).unwrap();
        // |m|^2 = 2 and mass sqrt(7) give <xi> = 3, a multiple of 2 pi / T
        let mass = 7f64.sqrt();
        let u0 = SpinorField::plane_wave(lat(), [1, 0, -1], [Complex64::new(1.0, 0.0); 4]);
        let f = SpaceTimeField::free_wave(time, &u0, Sign::Plus, mass);
        let (lo, hi) = time.resolvable().unwrap();
        for j in lo..=hi {
            let q = modulation_project(Exec::Parallel, &f, Sign::Plus, mass, ModRange::Exact(j), Taper::None).unwrap();
            assert!(q.l2() < 1e-10 * f.l2(), "j={j}: {}", q.l2());
        }
        let low = modulation_project(Exec::Parallel, &f, Sign::Plus, mass, ModRange::AtMost(lo), Taper::None).unwrap();
        assert!(low.distance(&f).unwrap() < 1e-10 * f.l2());
    }

    #[test]
    fn exact_modulation_passes_with_weight_one() {
        // tau0 + <xi0> = 2^j with xi0 = 0, mass 1: tau0 = 2^j - 1
        let time = TimeGrid::new(64, 2.0 * std::f64::consts::PI).unwrap();
        let j = 2;
        let tau0 = 4.0 - 1.0;
        let mut f = SpaceTimeField::zeros(lat(), time, 1);
        for n in 0..time.len() {
            f.set(n, 0, 0, Complex64::from_polar(1.0, tau0 * time.t(n)));
        }
        let q = modulation_project(Exec::Sequential, &f, Sign::Plus, 1.0, ModRange::Exact(j), Taper::None).unwrap();
        assert!(q.distance(&f).unwrap() < 1e-10 * f.l2());
        for jj in [1, 3] {
            let q = modulation_project(Exec::Sequential, &f, Sign::Plus, 1.0, ModRange::Exact(jj), Taper::None).unwrap();
            assert!(q.l2() < 1e-10 * f.l2());
        }
    }

    #[test]
    fn modulation_pieces_resum() {
        let time = TimeGrid::new(32, 2.0 * std::f64::consts::PI).unwrap();
        let f = random(time, 9);
        let (lo, hi) = time.resolvable().unwrap();
        for sign in Sign::BOTH {
            let parts = modulation_partition(Exec::Parallel, &f, sign, 1.0, lo, hi).unwrap();
            let mut sum = SpaceTimeField::zeros(lat(), time, 4);
            for p in &parts {
                sum.add_assign(p).unwrap();
            }
            assert!(sum.distance(&f).unwrap() < 1e-10 * f.l2());
        }
    }

    #[test]
    fn interval_matches_sum_of_pieces() {
        let time = TimeGrid::new(32, 2.0 * std::f64::consts::PI).unwrap();
        let f = random(time, 4);
        let iv = modulation_project(Exec::Parallel, &f, Sign::Minus, 2.0, ModRange::Interval(1, 2), Taper::None).unwrap();
        let mut sum = SpaceTimeField::zeros(lat(), time, 4);
        for j in 1..=2 {
            sum.add_assign(&modulation_project(Exec::Parallel, &f, Sign::Minus, 2.0, ModRange::Exact(j), Taper::None).unwrap())
                .unwrap();
        }
        assert!(sum.distance(&iv).unwrap() < 1e-12 * f.l2());
    }

    #[test]
    fn hann_taper_reduces_leakage() {
        // off-lattice frequency: rectangular window leaks into high modulation
        let time = TimeGrid::new(64, 2.0 * std::f64::consts::PI).unwrap();
        let u0 = SpinorField::plane_wave(lat(), [1, 1, 0], [Complex64::new(1.0, 0.0); 4]);
        let f = SpaceTimeField::free_wave(time, &u0, Sign::Minus, 1.0);
        let high = |taper| {
            modulation_project(Exec::Sequential, &f, Sign::Minus, 1.0, ModRange::Above(2), taper)
                .unwrap()
                .l2()
        };
        assert!(high(Taper::Hann) < 0.1 * high(Taper::None));
    }

    #[test]
    fn hann_taper_damps_endpoints() {
        let time = TimeGrid::new(16, 1.0).unwrap();
        assert_eq!(time.hann(0), 0.0);
        assert!((time.hann(8) - 1.0).abs() < 1e-15);
    }
}
