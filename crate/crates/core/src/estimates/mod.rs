//! Space-time norms, the kernel bound behind the localized Strichartz
//! estimate, multiplier checks, and the trilinear harness with its dyadic
//! summation weight.

mod dense;
mod kernel;
mod sparse;
mod summation;
mod symbols;
mod trilinear;

pub use dense::{lebesgue_norm, localized_strichartz_norm, localized_strichartz_norm_by_cube, sk_norm, xnorm, SkRange, XNorm};
pub use kernel::{kernel_decay_check, kernel_sweep, KernelConfig, KernelReport, KernelSample, KernelSweep};
pub use sparse::{disposability_check, random_packet, shell_points, DisposabilityConfig, DisposabilityReport, Mode, SparseField, PERIOD};
pub use summation::{g_constant, g_summation_check, g_summation_lhs, g_sweep, g_term, g_weight, GSweepReport, G_FORMULA, MAX_MED_GAP};
pub use symbols::{symbol_stability_check, SymbolReport};
pub use trilinear::{trilinear_integral, trilinear_ratio, trilinear_sweep, TriEntry, TrilinearConfig, TrilinearReport};

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::decomposition::{build_cap_cover, CapFamily};
use crate::error::{Error, Result};

/// Shared cap family at level `l` (level 0 is the identity family).
pub fn cap_family(l: u32) -> Arc<CapFamily> {
    static CACHE: OnceLock<Mutex<BTreeMap<u32, Arc<CapFamily>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut map = cache.lock().expect("cap cache poisoned");
    map.entry(l).or_insert_with(|| Arc::new(build_cap_cover(l))).clone()
}

/// Admissible space-time exponent pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExponentPair {
    /// `L^3_t L^6_x`
    L3L6,
    /// `L^6_t L^3_x`
    L6L3,
}

impl ExponentPair {
    pub fn from_pq(p: u32, q: u32) -> Result<Self> {
        match (p, q) {
            (3, 6) => Ok(Self::L3L6),
            (6, 3) => Ok(Self::L6L3),
            _ => Err(Error::ExponentPair(p, q)),
        }
    }

    pub fn pq(self) -> (f64, f64) {
        match self {
            Self::L3L6 => (3.0, 6.0),
            Self::L6L3 => (6.0, 3.0),
        }
    }
}

/// One `(k', l)` entry of the localized Strichartz part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrichartzEntry {
    pub kp: u32,
    pub l: u32,
    pub l3l6: f64,
    pub l6l3: f64,
}

impl StrichartzEntry {
    /// `2^{-(k'+k)/3} ||f||_{L^3 L^6[k;l,k']} + 2^{-(k'+k)/6} ||f||_{L^6 L^3[k;l,k']}`.
    pub fn weighted(&self, k: u32) -> f64 {
        let s = (self.kp + k) as f64;
        (-s / 3.0).exp2() * self.l3l6 + (-s / 6.0).exp2() * self.l6l3
    }
}

/// Components of `||f||_{S_k^+-}` and their aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub k: u32,
    pub linf_l2: f64,
    pub xnorm: f64,
    pub strichartz: Vec<StrichartzEntry>,
    pub total: f64,
}

impl NormReport {
    pub fn new(k: u32, linf_l2: f64, xnorm: f64, strichartz: Vec<StrichartzEntry>) -> Self {
        let mut r = Self {
            k,
            linf_l2,
            xnorm,
            strichartz,
            total: 0.0,
        };
        r.total = r.aggregate();
        r
    }

    pub fn sup_strichartz(&self) -> f64 {
        self.strichartz
            .iter()
            .map(|e| e.weighted(self.k))
            .fold(0.0, f64::max)
    }

    /// Recompute the aggregate from the stored components.
    pub fn aggregate(&self) -> f64 {
        self.linf_l2 + self.xnorm + self.sup_strichartz()
    }
}
