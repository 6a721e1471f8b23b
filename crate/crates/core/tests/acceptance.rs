//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::f64::consts::PI;
use std::time::Instant;

use dkg_core::decomposition::{decompose_check, DecomposeCheckConfig};
use dkg_core::dirac_algebra::{algebra_suite, null_constant_sweep, null_product_norm, sample_frequencies, Sign};
use dkg_core::estimates::{g_sweep, kernel_sweep, trilinear_sweep, KernelConfig, TrilinearConfig};
use dkg_core::exec::Exec;
use dkg_core::resonance::{
    certify_bounds, check_d_identity, mu, vanishing_suite, Bound, CertifyConfig, VanishingSuiteConfig,
};
use dkg_core::solver::{
    generate_initial_data, picard_iterate, reconstruct, relative_difference, scattering_profile,
    solve_second_order_reference, split_state, Dkgf, InitialDataConfig, PicardConfig, ReferenceOptions,
    SecondOrderState, SolveOptions,
};
use dkg_core::spectral_grid::{FrequencyLattice, MassParams};
use dkg_core::vec3;

const ALGEBRA_TOL: f64 = 1e-13;
const ALGEBRA_SAMPLES: usize = 10_000;
const ALGEBRA_SECONDS: f64 = 5.0;
const NULL_TOL: f64 = 1e-13;
const NULL_STABILITY: f64 = 0.2;
const NULL_SECONDS: f64 = 30.0;
const NONRES_MIN: f64 = 0.1;
const RESONANT_ZERO: f64 = 1e-12;
const D_IDENTITY_TOL: f64 = 1e-10;
const RESONANCE_SECONDS: f64 = 60.0;
const VANISHING_CASES: usize = 200;
const VANISHING_WITNESSES: usize = 10;
const VANISHING_SECONDS: f64 = 120.0;
const EQUIVALENCE_TOL: f64 = 1e-6;
const CHARGE_TOL: f64 = 1e-8;
const ORDER_RANGE: (f64, f64) = (12.0, 20.0);
const SOLVER_SECONDS: f64 = 600.0;
const PICARD_RATIO: f64 = 0.5;
const CONTROL_TOL: f64 = 1e-12;
const KERNEL_SPREAD: f64 = 3.0;
const KERNEL_STABILITY: f64 = 0.2;
const PARTITION_TOL: f64 = 1e-10;
const MAX_CAP_OVERLAP: usize = 8;
const TRILINEAR_BOUND: f64 = 1.0;

struct Line {
    pass: bool,
    text: String,
}

fn report(id: usize, name: &str, checks: &[(bool, String)], secs: f64) -> Line {
    let pass = checks.iter().all(|c| c.0);
    let body: Vec<&str> = checks.iter().map(|c| c.1.as_str()).collect();
    Line {
        pass,
        text: format!(
            "{} {id:>2} {name}: {} [{secs:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            body.join("; ")
        ),
    }
}

fn le(label: &str, v: f64, tol: f64) -> (bool, String) {
    (v <= tol, format!("{label} {v:.3e} <= {tol:.3e}"))
}

fn ge(label: &str, v: f64, tol: f64) -> (bool, String) {
    (v >= tol, format!("{label} {v:.3e} >= {tol:.3e}"))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed().as_secs_f64())
}

fn data(n: usize, delta: f64) -> (FrequencyLattice, SecondOrderState) {
    let lat = FrequencyLattice::new(n, 16.0 * PI).unwrap();
    let cfg = InitialDataConfig {
        delta,
        seed: 0,
        ..Default::default()
    };
    (lat, generate_initial_data(lat, &cfg))
}

fn algebra() -> Line {
    let (rep, secs) = timed(|| {
        let xis = sample_frequencies(1, ALGEBRA_SAMPLES, (-6.0, 12.0));
        algebra_suite(1.0, &xis)
    });
    report(
        1,
        "algebra suite",
        &[le("worst residual", rep.worst(), ALGEBRA_TOL), le("seconds", secs, ALGEBRA_SECONDS)],
        secs,
    )
}

fn null_structure() -> Line {
    let ((collinear, finite, change), secs) = timed(|| {
        let xis = sample_frequencies(2, 2000, (-6.0, 12.0));
        let collinear = xis
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                let lambda = 0.1 + 0.01 * (i % 1000) as f64;
                null_product_norm(Sign::Minus, Sign::Plus, 0.0, xi, vec3::scale(lambda, xi))
            })
            .fold(0.0, f64::max);
        let mut finite = true;
        let mut change = 0.0f64;
        for k in 0..=8 {
            let coarse = null_constant_sweep(1.0, k, 181);
            let fine = null_constant_sweep(1.0, k, 721);
            finite &= coarse.is_finite() && fine.is_finite();
            change = change.max((fine - coarse).abs() / coarse);
        }
        (collinear, finite, change)
    });
    report(
        2,
        "null structure",
        &[
            le("massless collinear", collinear, NULL_TOL),
            (finite, format!("constants finite {finite}")),
            le("angle-refinement change", change, NULL_STABILITY),
            le("seconds", secs, NULL_SECONDS),
        ],
        secs,
    )
}

fn resonance() -> Line {
    let ((nonres, zero, witness_mu, identity), secs) = timed(|| {
        let unit = MassParams::unit();
        let rep = certify_bounds(Exec::Parallel, &unit, &CertifyConfig::default()).unwrap();
        let nonres = rep.bounds.iter().find(|b| b.bound == Bound::NonRes).unwrap().infimum;
        let resonant = MassParams::new(1.0, 2.0, true).unwrap();
        let zero = mu(Sign::Minus, Sign::Plus, [0.0; 3], [0.0; 3], &resonant).abs();
        let cfg = CertifyConfig {
            samples: 10_000,
            ..Default::default()
        };
        let rep = certify_bounds(Exec::Parallel, &resonant, &cfg).unwrap();
        let b = rep.bounds.iter().find(|b| b.bound == Bound::NonRes).unwrap();
        let witness_mu = b.witness.as_ref().map(|w| w.mu.abs()).unwrap_or(f64::INFINITY);
        let pairs = sample_frequencies(3, 200_000, (-6.0, 12.0));
        let identity = pairs.chunks_exact(2).map(|p| check_d_identity(p[0], p[1], 1.0)).fold(0.0, f64::max);
        (nonres, zero, witness_mu, identity)
    });
    report(
        3,
        "resonance certification",
        &[
            ge("M=m=1 non-res constant", nonres, NONRES_MIN),
            (zero == 0.0, format!("m=2M mu(-,+)(0,0) = {zero:e}")),
            le("m=2M witness |mu|", witness_mu, RESONANT_ZERO),
            le("d identity", identity, D_IDENTITY_TOL),
            le("seconds", secs, RESONANCE_SECONDS),
        ],
        secs,
    )
}

fn vanishing() -> Line {
    let (rep, secs) = timed(|| vanishing_suite(Exec::Parallel, &VanishingSuiteConfig::default()));
    report(
        4,
        "vanishing support",
        &[
            (rep.cases.len() == VANISHING_CASES, format!("{} cases", rep.cases.len())),
            (
                rep.in_hypothesis == rep.in_hypothesis_empty,
                format!("{}/{} in-hypothesis empty", rep.in_hypothesis_empty, rep.in_hypothesis),
            ),
            ge("witnesses", rep.witnesses as f64, VANISHING_WITNESSES as f64),
            le("seconds", secs, VANISHING_SECONDS),
        ],
        secs,
    )
}

fn equivalence() -> Line {
    let ((diff, drift, ratio), secs) = timed(|| {
        let (lat, init) = data(32, 0.01);
        let masses = MassParams::unit();
        let solver = Dkgf::new(lat, masses, true, Exec::Parallel);
        let opts = SolveOptions {
            t_end: 1.0,
            dt: 1e-3,
            output_every: usize::MAX,
            ..Default::default()
        };
        let traj = solver.solve(&init, &opts).unwrap();
        let ropts = ReferenceOptions {
            t_end: 1.0,
            dt: 1e-3,
            output_every: usize::MAX,
            ..Default::default()
        };
        let reference = solve_second_order_reference(&init, masses, &ropts).unwrap();
        let diff = relative_difference(
            reference.states.last().unwrap(),
            &reconstruct(traj.final_state().unwrap()),
        )
        .unwrap();
        drop(traj);
        drop(reference);
        let long = SolveOptions {
            t_end: 10.0,
            dt: 1e-2,
            output_every: 100,
            keep_states: false,
            ..Default::default()
        };
        let drift = solver.solve(&init, &long).unwrap().max_charge_drift();
        let ratio = solver.order_ratio(&split_state(&init, masses).unwrap(), 1.0, 0.2).unwrap();
        (diff, drift, ratio)
    });
    report(
        5,
        "solver equivalence",
        &[
            le("relative L2 difference", diff, EQUIVALENCE_TOL),
            le("charge drift T=10", drift, CHARGE_TOL),
            (
                (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&ratio),
                format!("order ratio {ratio:.2} in [{}, {}]", ORDER_RANGE.0, ORDER_RANGE.1),
            ),
            le("seconds", secs, SOLVER_SECONDS),
        ],
        secs,
    )
}

fn contraction() -> Line {
    let ((ratio, zero_max), secs) = timed(|| {
        let cfg = PicardConfig::default();
        let masses = MassParams::unit();
        let (_, init) = data(16, 0.01);
        let rep = picard_iterate(&split_state(&init, masses).unwrap(), &cfg).unwrap();
        let (_, zero) = data(16, 0.0);
        let rep0 = picard_iterate(&split_state(&zero, masses).unwrap(), &cfg).unwrap();
        (rep.max_ratio_from(2), rep0.distances.iter().cloned().fold(0.0, f64::max))
    });
    report(
        6,
        "Picard contraction",
        &[
            le("max ratio from iterate 2", ratio, PICARD_RATIO),
            (zero_max == 0.0, format!("zero-data distances max {zero_max:e}")),
        ],
        secs,
    )
}

fn scattering() -> Line {
    let ((late, wrap, windows, control), secs) = timed(|| {
        let (lat, init) = data(32, 0.01);
        let masses = MassParams::unit();
        let opts = SolveOptions {
            t_end: 12.5,
            dt: 12.5 / 640.0,
            output_every: 10,
            ..Default::default()
        };
        let traj = Dkgf::new(lat, masses, true, Exec::Parallel).solve(&init, &opts).unwrap();
        let rep = scattering_profile(&traj).unwrap();
        drop(traj);
        let free = Dkgf::new(lat, masses, false, Exec::Parallel).solve(&init, &opts).unwrap();
        let control = scattering_profile(&free).unwrap().drift.iter().cloned().fold(0.0, f64::max);
        let windows: Vec<String> = rep.dyadic.iter().map(|d| format!("{:.2e}", d.dirac)).collect();
        (rep.late_decay, rep.wrap_warning, windows.join(","), control)
    });
    report(
        7,
        "scattering proxy",
        &[
            (late, format!("late dyadic decay {late} (latest first: {windows})")),
            (!wrap, format!("inside wrap window {}", !wrap)),
            le("coupling-off drift", control, CONTROL_TOL),
        ],
        secs,
    )
}

fn kernel() -> Line {
    let (sweep, secs) = timed(|| kernel_sweep(Exec::Parallel, 8, &KernelConfig::new(0, 0)).unwrap());
    report(
        8,
        "kernel bound",
        &[
            le("constant spread", sweep.spread, KERNEL_SPREAD),
            le("refinement change", sweep.max_disagreement, KERNEL_STABILITY),
        ],
        secs,
    )
}

fn partitions() -> Line {
    let (rep, secs) = timed(|| decompose_check(Exec::Parallel, &DecomposeCheckConfig::default()).unwrap());
    report(
        9,
        "partition suite",
        &[
            le("worst resummation residual", rep.worst_residual, PARTITION_TOL),
            le("cap overlap", rep.worst_overlap as f64, MAX_CAP_OVERLAP as f64),
        ],
        secs,
    )
}

fn trilinear() -> Line {
    let ((max_ratio, sampled, g_ratio, g_constant, same), secs) = timed(|| {
        let cfg = TrilinearConfig {
            bound: TRILINEAR_BOUND,
            ..Default::default()
        };
        let tri = trilinear_sweep(Exec::Parallel, 4, &cfg).unwrap();
        let g = g_sweep(0, 100, 64).unwrap();
        let again = trilinear_sweep(Exec::Sequential, 4, &cfg).unwrap();
        let g_again = g_sweep(0, 100, 64).unwrap();
        let same = serde_json::to_vec(&tri).unwrap() == serde_json::to_vec(&again).unwrap()
            && serde_json::to_vec(&g).unwrap() == serde_json::to_vec(&g_again).unwrap();
        let sampled = tri.entries.iter().filter(|e| e.sampled > 0).count();
        (tri.max_ratio, sampled, g.max_random, g.constant, same)
    });
    report(
        10,
        "trilinear and summation",
        &[
            le(&format!("max trilinear ratio over {sampled} triples"), max_ratio, TRILINEAR_BOUND),
            le("G-summation ratio", g_ratio, g_constant),
            (same, format!("seeded reruns byte-identical {same}")),
        ],
        secs,
    )
}

fn main() {
    let criteria: [fn() -> Line; 10] = [
        algebra,
        null_structure,
        resonance,
        vanishing,
        equivalence,
        contraction,
        scattering,
        kernel,
        partitions,
        trilinear,
    ];
    let mut failed = 0;
    for c in criteria {
        let line = c();
        println!("{}", line.text);
        failed += usize::from(!line.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
