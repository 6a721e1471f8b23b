//! The resonance function `mu^{s1,s2}(xi1, xi2) = <xi1-xi2>_m + s1 <xi1>_M - s2 <xi2>_M`,
//! its lower bounds, and support-emptiness checks for trilinear interactions
//! under modulation constraints.
//!
//! Right-hand sides of the bounds use unit-mass brackets. "Much smaller"
//! is the fixed factor `2^-10` and `a ≺ b` means `a <= b - 10`.

mod certify;
mod suite;
pub mod nelder_mead;
mod vanishing;

pub use certify::{certify_bounds, nonres_constant_vs_small_mass, BoundConstant, CertifyConfig, CertifyReport};
pub use suite::{vanishing_grid, vanishing_suite, VanishingCase, VanishingSuiteConfig, VanishingSuiteReport};
pub use vanishing::{
    cap_vanishing_check, lemma_case, lemma_predicts_empty, vanishing_support_check, CapPair, LemmaCase,
    SupportVerdict, VanishingQuery, Witness,
};

use serde::{Deserialize, Serialize};

use crate::dirac_algebra::Sign;
use crate::spectral_grid::MassParams;
use crate::vec3::{self, Vec3};

/// Ratio `2^-10` standing in for "much smaller than".
pub const MUCH_SMALLER: f64 = 1.0 / 1024.0;
/// Dyadic gap standing in for `≺`.
pub const PREC_GAP: i32 = 10;

/// `a ≺ b`.
pub fn prec(a: i32, b: i32) -> bool {
    a <= b - PREC_GAP
}

pub fn mu(s1: Sign, s2: Sign, xi1: Vec3, xi2: Vec3, masses: &MassParams) -> f64 {
    vec3::bracket(masses.small, vec3::sub(xi1, xi2)) + s1.value() * vec3::bracket(masses.big, xi1)
        - s2.value() * vec3::bracket(masses.big, xi2)
}

/// Relative residual of
/// `<a>_M <b>_M - (|a||b| + M^2) = M^2 (|a|-|b|)^2 / (<a>_M <b>_M + |a||b| + M^2)`.
pub fn check_d_identity(xi1: Vec3, xi2: Vec3, big: f64) -> f64 {
    let (a, b) = (vec3::norm(xi1), vec3::norm(xi2));
    let (ba, bb) = (vec3::bracket_r(big, a), vec3::bracket_r(big, b));
    let m2 = big * big;
    let lhs = ba * bb - (a * b + m2);
    let rhs = m2 * (a - b).powi(2) / (ba * bb + a * b + m2);
    let scale = (ba * bb).max(f64::MIN_POSITIVE);
    (lhs - rhs).abs() / scale
}

/// Case split of the lower bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    #[serde(rename = "1a")]
    C1a,
    #[serde(rename = "1b")]
    C1b,
    #[serde(rename = "2a")]
    C2a,
    #[serde(rename = "2b")]
    C2b,
}

impl CaseLabel {
    pub fn name(self) -> &'static str {
        match self {
            CaseLabel::C1a => "1a",
            CaseLabel::C1b => "1b",
            CaseLabel::C2a => "2a",
            CaseLabel::C2b => "2b",
        }
    }

    pub fn is_case1(self) -> bool {
        matches!(self, CaseLabel::C1a | CaseLabel::C1b)
    }
}

pub fn case_label(s1: Sign, s2: Sign, xi1: Vec3, xi2: Vec3, masses: &MassParams) -> CaseLabel {
    match (s1, s2) {
        (Sign::Plus, Sign::Minus) => CaseLabel::C1a,
        (a, b) if a == b => CaseLabel::C2a,
        _ => {
            let d = vec3::bracket(masses.small, vec3::sub(xi1, xi2));
            let lo = vec3::bracket(masses.big, xi1).min(vec3::bracket(masses.big, xi2));
            if d <= MUCH_SMALLER * lo {
                CaseLabel::C1b
            } else {
                CaseLabel::C2b
            }
        }
    }
}

/// The four lower bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    /// `|mu| >~ max(<xi1-xi2>, <xi1>, <xi2>)` (Case 1)
    HighMod,
    /// `|mu| >~ <xi1><xi2>/<xi1-xi2> * angle^2` (Case 2)
    ModAngle,
    /// `|mu| >~ min(<xi1>, <xi2>) * angle^2`
    GenLb,
    /// `|mu| >~ max(<xi1-xi2>^-1, <xi1>^-1, <xi2>^-1)`
    NonRes,
}

impl Bound {
    pub const ALL: [Bound; 4] = [Bound::HighMod, Bound::ModAngle, Bound::GenLb, Bound::NonRes];

    pub fn name(self) -> &'static str {
        match self {
            Bound::HighMod => "high-mod",
            Bound::ModAngle => "mod-angle",
            Bound::GenLb => "gen-lb",
            Bound::NonRes => "non-res",
        }
    }
}

/// One evaluated frequency pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSample {
    pub s1: Sign,
    pub s2: Sign,
    pub xi1: Vec3,
    pub xi2: Vec3,
    pub mu: f64,
    /// `angle(s1 xi1, s2 xi2)`, absent if either vector vanishes.
    pub angle: Option<f64>,
    pub case: CaseLabel,
    pub high_mod: Option<f64>,
    pub mod_angle: Option<f64>,
    pub gen_lb: Option<f64>,
    pub non_res: f64,
}

impl ResonanceSample {
    pub fn evaluate(s1: Sign, s2: Sign, xi1: Vec3, xi2: Vec3, masses: &MassParams) -> Self {
        let m = mu(s1, s2, xi1, xi2, masses).abs();
        let case = case_label(s1, s2, xi1, xi2, masses);
        let b0 = vec3::bracket(1.0, vec3::sub(xi1, xi2));
        let b1 = vec3::bracket(1.0, xi1);
        let b2 = vec3::bracket(1.0, xi2);
        let angle = vec3::angle(vec3::scale(s1.value(), xi1), vec3::scale(s2.value(), xi2));
        let high_mod = case.is_case1().then(|| m / b0.max(b1).max(b2));
        let mod_angle = match (case.is_case1(), angle) {
            (false, Some(a)) => Some(m / (b1 * b2 / b0 * a * a)),
            _ => None,
        };
        let gen_lb = angle.map(|a| m / (b1.min(b2) * a * a));
        let non_res = m / (1.0 / b0).max(1.0 / b1).max(1.0 / b2);
        Self {
            s1,
            s2,
            xi1,
            xi2,
            mu: m * mu(s1, s2, xi1, xi2, masses).signum(),
            angle,
            case,
            high_mod,
            mod_angle,
            gen_lb,
            non_res,
        }
    }

    pub fn ratio(&self, b: Bound) -> Option<f64> {
        match b {
            Bound::HighMod => self.high_mod,
            Bound::ModAngle => self.mod_angle,
            Bound::GenLb => self.gen_lb,
            Bound::NonRes => Some(self.non_res),
        }
    }
}
