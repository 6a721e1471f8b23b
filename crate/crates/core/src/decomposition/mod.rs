//! Littlewood-Paley, cube, cap and modulation decompositions.
//!
//! All spatial pieces are real Fourier multipliers; `Localize` applies a
//! symbol to either field type and returns the result in the input
//! representation.

mod caps;
mod cubes;
pub mod cutoffs;
mod modulation;
mod report;

pub use caps::{build_cap_cover, cap_support_radius, CapFamily, CapIndex};
pub use cubes::{cube_centers, cube_project, cube_symbol, CubeIndex};
pub use cutoffs::{
    build_rho0, gamma1, low_symbol, rho0, rho_j, shell_symbol, smooth_step, tilde_shell_symbol,
    tilde_support, Rho0, TransitionProfile,
};
pub use modulation::{
    modulation_partition, modulation_project, ModRange, SpaceTimeField, Taper, TimeGrid,
};
pub use report::{decompose_check, DecomposeCheckConfig, DecomposeReport, PartitionResidual};

use std::collections::BTreeMap;

use crate::exec::{self, Exec};
use crate::spectral_grid::{FrequencyLattice, Repr, ScalarField, SpinorField};
use crate::vec3::{self, Vec3};

/// Fields that admit real Fourier multipliers.
pub trait Localize: Clone + Sized {
    fn lattice(&self) -> &FrequencyLattice;
    fn repr(&self) -> Repr;
    fn to_fourier(&self) -> Self;
    fn to_physical(&self) -> Self;
    fn l2(&self) -> f64;
    /// Multiply the Fourier coefficients by a per-mode table.
    fn times_table(&self, table: &[f64]) -> Self;
    fn add_assign(&mut self, other: &Self);
    fn zeros_like(&self) -> Self;

    /// Apply a real symbol `xi -> a(xi)`, preserving the representation.
    fn multiply(&self, exec: Exec, symbol: impl Fn(Vec3) -> f64 + Sync + Send) -> Self {
        let lat = *self.lattice();
        let table = exec::map_range(exec, lat.num_points(), |i| symbol(lat.xi(i)));
        let out = self.to_fourier().times_table(&table);
        match self.repr() {
            Repr::Fourier => out,
            Repr::Physical => out.to_physical(),
        }
    }
}

macro_rules! impl_localize {
    ($t:ty) => {
        impl Localize for $t {
            fn lattice(&self) -> &FrequencyLattice {
                <$t>::lattice(self)
            }
            fn repr(&self) -> Repr {
                <$t>::repr(self)
            }
            fn to_fourier(&self) -> Self {
                <$t>::to_fourier(self)
            }
            fn to_physical(&self) -> Self {
                <$t>::to_physical(self)
            }
            fn l2(&self) -> f64 {
                self.norm_l2()
            }
            fn times_table(&self, table: &[f64]) -> Self {
                let mut out = self.clone();
                out.apply_table(table);
                out
            }
            fn add_assign(&mut self, other: &Self) {
                self.axpy(num_complex::Complex64::new(1.0, 0.0), other)
                    .expect("compatible fields");
            }
            fn zeros_like(&self) -> Self {
                <$t>::zeros(*<$t>::lattice(self), <$t>::repr(self))
            }
        }
    };
}

impl_localize!(ScalarField);
impl_localize!(SpinorField);

/// Which Littlewood-Paley operator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shell {
    /// `P_k`
    Exact(u32),
    /// `P_{<=k}`
    AtMost(u32),
    /// `P~_k`
    Tilde(u32),
}

impl Shell {
    pub fn symbol(self, r: f64) -> f64 {
        match self {
            Shell::Exact(k) => shell_symbol(k, r),
            Shell::AtMost(k) => low_symbol(k, r),
            Shell::Tilde(k) => tilde_shell_symbol(k, r),
        }
    }
}

pub fn littlewood_paley<F: Localize>(field: &F, shell: Shell) -> F {
    field.multiply(Exec::Sequential, move |xi| shell.symbol(vec3::norm(xi)))
}

/// Largest shell index with a nonzero symbol somewhere on the lattice.
pub fn max_shell(lat: &FrequencyLattice) -> u32 {
    cutoffs::top_shell(lat.max_abs_xi())
}

/// All `P_k f` for `k = 0..=max_shell`, in order.
pub fn shell_pieces<F: Localize + Send + Sync>(exec: Exec, field: &F) -> Vec<F> {
    let f = field.to_fourier();
    let lat = *f.lattice();
    let kmax = max_shell(&lat);
    let radii: Vec<f64> = (0..lat.num_points()).map(|i| vec3::norm(lat.xi(i))).collect();
    exec::map_range(exec, kmax as usize + 1, |k| {
        let table: Vec<f64> = radii.iter().map(|&r| shell_symbol(k as u32, r)).collect();
        f.times_table(&table)
    })
}

/// Immutable bundle of the cutoffs and precomputed cap families.
#[derive(Clone, Debug)]
pub struct DyadicScheme {
    pub rho0: Rho0,
    caps: BTreeMap<u32, CapFamily>,
}

impl DyadicScheme {
    /// Build cap families for `l = 1..=max_cap_level`.
    pub fn new(profile: TransitionProfile, max_cap_level: u32) -> Self {
        let caps = (1..=max_cap_level).map(|l| (l, build_cap_cover(l))).collect();
        Self {
            rho0: build_rho0(profile),
            caps,
        }
    }

    /// Cap family at level `l`; `None` for `l = 0` (identity) or unbuilt levels.
    pub fn caps(&self, l: u32) -> Option<&CapFamily> {
        self.caps.get(&l)
    }

    pub fn max_cap_level(&self) -> u32 {
        self.caps.keys().next_back().copied().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(lat: FrequencyLattice, seed: u64) -> SpinorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpinorField::zeros(lat, Repr::Fourier);
        for z in f.data_mut() {
            *z = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        f
    }

    #[test]
    fn shells_resum_on_random_field() {
        let lat = FrequencyLattice::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let f = random_field(lat, 3);
        let pieces = shell_pieces(Exec::Parallel, &f);
        let mut sum = f.zeros_like();
        for p in &pieces {
            sum.add_assign(p);
        }
        assert!(sum.distance(&f).unwrap() <= 1e-12 * f.norm_l2());
    }

    #[test]
    fn low_frequency_field_is_fixed_by_p0() {
        let lat = FrequencyLattice::new(8, 8.0 * std::f64::consts::PI).unwrap();
        // |xi| = m / 4 <= 1 for |m| <= 2 along one axis
        let f = SpinorField::plane_wave(lat, [2, 0, 0], [Complex64::new(1.0, 0.0); 4]);
        let p0 = littlewood_paley(&f, Shell::Exact(0));
        assert!(p0.distance(&f).unwrap() <= 1e-12 * f.norm_l2());
        assert_eq!(p0.repr(), Repr::Physical);
    }

    #[test]
    fn support_stays_in_fattened_shell() {
        let lat = FrequencyLattice::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let f = random_field(lat, 5);
        for k in 0..=3 {
            let pk = littlewood_paley(&f, Shell::Exact(k));
            let (lo, hi) = tilde_support(k);
            let outside: f64 = (0..lat.num_points())
                .filter(|&i| {
                    let r = vec3::norm(lat.xi(i));
                    r < lo || r > hi
                })
                .map(|i| pk.point(i).iter().map(|z| z.norm_sqr()).sum::<f64>())
                .sum();
            assert!(outside <= 1e-12 * f.norm_l2().powi(2));
        }
    }

    #[test]
    fn scheme_holds_caps() {
        let s = DyadicScheme::new(TransitionProfile::ExpBridge, 2);
        assert!(s.caps(0).is_none());
        assert_eq!(s.caps(2).unwrap().level(), 2);
        assert_eq!(s.max_cap_level(), 2);
    }
}
