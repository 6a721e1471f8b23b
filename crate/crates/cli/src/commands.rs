//! One function per subcommand. Each writes its artifacts into the output
//! directory and returns the invariant summary.

use dkg_core::decomposition::{decompose_check, DecomposeCheckConfig};
use dkg_core::dirac_algebra::{algebra_suite, null_constant_sweep, null_product_norm, sample_frequencies, Sign};
use dkg_core::estimates::{g_sweep, kernel_sweep, trilinear_sweep, KernelConfig, TrilinearConfig};
use dkg_core::exec::Exec;
use dkg_core::resonance::{certify_bounds, check_d_identity, mu, vanishing_suite, CertifyConfig, VanishingSuiteConfig};
use dkg_core::solver::{
    generate_initial_data, picard_iterate, reconstruct, relative_difference, scattering_profile,
    solve_second_order_reference, split_state, Dkgf, InitialDataConfig, PicardConfig, ReferenceOptions,
    SecondOrderState, SolveOptions, Trajectory,
};
use dkg_core::spectral_grid::io::{radial_spectrum, write_snapshot, write_spectrum_csv, FieldRef};
use dkg_core::spectral_grid::FrequencyLattice;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Invariant, Output, Summary};

type Outcome = Result<Summary, CliError>;

fn exec_of(cfg: &RunConfig) -> Exec {
    if cfg.bool("exec.parallel") {
        Exec::Parallel
    } else {
        Exec::Sequential
    }
}

fn lattice(cfg: &RunConfig) -> Result<FrequencyLattice, CliError> {
    Ok(FrequencyLattice::new(cfg.usize("grid.n"), cfg.f64("grid.L"))?)
}

fn initial_data(cfg: &RunConfig, lat: FrequencyLattice) -> SecondOrderState {
    let data = InitialDataConfig {
        delta: cfg.f64("data.delta"),
        seed: cfg.u64("data.seed"),
        eps: cfg.f64("data.eps"),
        width: cfg.f64("data.width"),
        ..Default::default()
    };
    generate_initial_data(lat, &data)
}

fn write_state(dir: &std::path::Path, tag: &str, s: &SecondOrderState) -> Result<(), CliError> {
    write_snapshot(&dir.join(format!("psi_{tag}")), "psi", s.t, FieldRef::Spinor(&s.psi))?;
    write_snapshot(&dir.join(format!("phi_{tag}")), "phi", s.t, FieldRef::Scalar(&s.phi))?;
    write_snapshot(&dir.join(format!("dphi_{tag}")), "dphi", s.t, FieldRef::Scalar(&s.dphi))?;
    Ok(())
}

fn write_trajectory(out: &Output, traj: &Trajectory, snapshots: bool) -> Result<(), CliError> {
    out.csv("diagnostics.csv", &traj.diagnostics)?;
    let Some(last) = traj.final_state() else {
        return Ok(());
    };
    let last = reconstruct(last);
    write_spectrum_csv(&out.path("spectrum_psi.csv"), &radial_spectrum(FieldRef::Spinor(&last.psi)))?;
    write_spectrum_csv(&out.path("spectrum_phi.csv"), &radial_spectrum(FieldRef::Scalar(&last.phi)))?;
    if snapshots {
        let dir = out.subdir("snapshots")?;
        for (i, s) in traj.states.iter().enumerate() {
            write_state(&dir, &format!("{i:04}"), &reconstruct(s))?;
        }
    }
    Ok(())
}

pub fn simulate(cfg: &RunConfig, out: &Output) -> Outcome {
    let mut sum = Summary::new("simulate");
    let exec = exec_of(cfg);
    let lat = lattice(cfg)?;
    let masses = cfg.masses()?;
    let init = initial_data(cfg, lat);
    let coupling = cfg.bool("coupling.enabled");
    let opts = SolveOptions {
        t_end: cfg.f64("time.T"),
        dt: cfg.f64("time.dt"),
        output_every: cfg.usize("output.every"),
        coupling,
        exec,
        eps: cfg.f64("data.eps"),
        keep_states: true,
        ..Default::default()
    };
    let solver = Dkgf::new(lat, masses, coupling, exec);
    let traj = match solver.solve(&init, &opts) {
        Ok(t) => t,
        Err(e @ (dkg_core::Error::BlowUp { .. } | dkg_core::Error::NonFinite(_))) => {
            sum.check(Invariant::holds("finite", false));
            sum.detail("error", &e.to_string())?;
            return Ok(sum);
        }
        Err(e) => return Err(e.into()),
    };
    sum.check(Invariant::holds("finite", true));
    write_trajectory(out, &traj, cfg.bool("output.snapshots"))?;
    sum.check(Invariant::at_most("charge_drift", traj.max_charge_drift(), cfg.f64("simulate.charge_tol")));
    let defect = traj.diagnostics.iter().map(|r| r.projector_defect).fold(0.0, f64::max);
    sum.check(Invariant::at_most("projector_defect", defect, cfg.f64("simulate.projector_tol")));
    sum.detail("steps", &traj.steps)?;
    sum.detail("dt", &traj.dt)?;
    sum.detail("wrap_warning", &traj.wrap_warning)?;

    if cfg.bool("reference.enabled") {
        let ropts = ReferenceOptions {
            t_end: opts.t_end,
            dt: cfg.f64("reference.dt"),
            output_every: usize::MAX,
            coupling,
            exec,
        };
        let reference = solve_second_order_reference(&init, masses, &ropts)?;
        let a = reference.states.last().expect("final reference state");
        let b = reconstruct(traj.final_state().expect("final state"));
        let diff = relative_difference(a, &b)?;
        sum.check(Invariant::at_most("reference_difference", diff, cfg.f64("reference.tol")));
    }

    if cfg.bool("picard.enabled") {
        let pcfg = PicardConfig {
            t_end: cfg.f64("picard.T"),
            nt: cfg.usize("picard.nt"),
            n_iter: cfg.usize("picard.iterations"),
            exec,
        };
        let rep = picard_iterate(&split_state(&init, masses)?, &pcfg)?;
        if cfg.f64("data.delta") == 0.0 {
            let worst = rep.distances.iter().cloned().fold(0.0, f64::max);
            sum.check(Invariant::at_most("picard_zero_distance", worst, 0.0));
        } else {
            sum.check(Invariant::at_most("picard_ratio", rep.max_ratio_from(2), cfg.f64("picard.ratio")));
        }
        sum.check(Invariant::holds("picard_bounded", !rep.diverged));
        out.json("picard.json", &rep)?;
    }
    Ok(sum)
}

#[derive(Serialize)]
struct BoundRow {
    bound: &'static str,
    infimum: f64,
    evaluated: usize,
    pass: bool,
    witness_s1: Option<Sign>,
    witness_s2: Option<Sign>,
    witness_xi1: Option<String>,
    witness_xi2: Option<String>,
    witness_mu: Option<f64>,
}

#[derive(Serialize)]
struct VanishingRow {
    k: u32,
    k1: u32,
    k2: u32,
    j: i32,
    j1: i32,
    j2: i32,
    s1: Sign,
    s2: Sign,
    cap_level: Option<u32>,
    predicted: String,
    verdict: &'static str,
    agrees: bool,
}

fn vec_text(v: [f64; 3]) -> String {
    format!("{:e} {:e} {:e}", v[0], v[1], v[2])
}

pub fn resonance_scan(cfg: &RunConfig, out: &Output) -> Outcome {
    let mut sum = Summary::new("resonance-scan");
    let exec = exec_of(cfg);
    let masses = cfg.masses()?;
    let positivity = cfg.f64("resonance.positivity");
    let ccfg = CertifyConfig {
        samples: cfg.usize("resonance.samples"),
        seed: cfg.u64("resonance.seed"),
        refine: cfg.usize("resonance.refine"),
        positivity,
        ..Default::default()
    };
    let rep = certify_bounds(exec, &masses, &ccfg)?;
    let rows: Vec<BoundRow> = rep
        .bounds
        .iter()
        .map(|b| BoundRow {
            bound: b.bound.name(),
            infimum: b.infimum,
            evaluated: b.evaluated,
            pass: b.pass,
            witness_s1: b.witness.as_ref().map(|w| w.s1),
            witness_s2: b.witness.as_ref().map(|w| w.s2),
            witness_xi1: b.witness.as_ref().map(|w| vec_text(w.xi1)),
            witness_xi2: b.witness.as_ref().map(|w| vec_text(w.xi2)),
            witness_mu: b.witness.as_ref().map(|w| w.mu),
        })
        .collect();
    out.csv("bounds.csv", &rows)?;
    for b in &rep.bounds {
        let tol = if b.bound == dkg_core::resonance::Bound::NonRes {
            cfg.f64("resonance.nonres_min")
        } else {
            positivity
        };
        sum.check(Invariant::at_least(&format!("bound_{}", b.bound.name()), b.infimum, tol));
    }
    let origin = mu(Sign::Minus, Sign::Plus, [0.0; 3], [0.0; 3], &masses).abs();
    sum.check(Invariant::at_least("mu_minus_plus_at_origin", origin, positivity));

    let pairs = sample_frequencies(ccfg.seed ^ 0x5eed, 2 * ccfg.samples.min(100_000), (-6.0, 12.0));
    let identity = pairs
        .chunks_exact(2)
        .map(|p| check_d_identity(p[0], p[1], masses.big))
        .fold(0.0, f64::max);
    sum.check(Invariant::at_most("d_identity", identity, cfg.f64("resonance.identity_tol")));
    sum.detail("certificate", &rep.bounds)?;

    if cfg.bool("resonance.vanishing") {
        let vcfg = VanishingSuiteConfig {
            seed: cfg.u64("resonance.seed"),
            masses,
            ..Default::default()
        };
        let v = vanishing_suite(exec, &vcfg);
        let rows: Vec<VanishingRow> = v
            .cases
            .iter()
            .map(|c| VanishingRow {
                k: c.query.k,
                k1: c.query.k1,
                k2: c.query.k2,
                j: c.query.j,
                j1: c.query.j1,
                j2: c.query.j2,
                s1: c.query.s1,
                s2: c.query.s2,
                cap_level: c.caps.as_ref().map(|p| p.l),
                predicted: c.predicted.map(|p| format!("{p:?}")).unwrap_or_else(|| "none".into()),
                verdict: match &c.verdict {
                    dkg_core::resonance::SupportVerdict::Empty { .. } => "empty",
                    dkg_core::resonance::SupportVerdict::Nonempty { .. } => "witness",
                    dkg_core::resonance::SupportVerdict::Inconclusive { .. } => "inconclusive",
                },
                agrees: c.agrees(),
            })
            .collect();
        out.csv("vanishing.csv", &rows)?;
        let misses = (v.in_hypothesis - v.in_hypothesis_empty) as f64;
        sum.check(Invariant::at_most("vanishing_in_hypothesis_nonempty", misses, 0.0));
        sum.check(Invariant::at_least("vanishing_witnesses", v.witnesses as f64, vcfg.min_witnesses as f64));
    }
    Ok(sum)
}

#[derive(Serialize)]
struct NullRow {
    k: i32,
    constant: f64,
    refined: f64,
    relative_change: f64,
}

pub fn verify_algebra(cfg: &RunConfig, out: &Output) -> Outcome {
    let mut sum = Summary::new("verify-algebra");
    let masses = cfg.masses()?;
    let tol = cfg.f64("algebra.tol");
    let xis = sample_frequencies(cfg.u64("algebra.seed"), cfg.usize("algebra.samples"), (-6.0, 12.0));
    let rep = algebra_suite(masses.big, &xis);
    for (name, v) in [
        ("clifford", rep.clifford),
        ("alpha_beta", rep.alpha_beta),
        ("completeness", rep.completeness),
        ("idempotence", rep.idempotence),
        ("orthogonality", rep.orthogonality),
        ("hermiticity", rep.hermiticity),
        ("commutation", rep.commutation),
    ] {
        sum.check(Invariant::at_most(name, v, tol));
    }
    let collinear = xis
        .iter()
        .zip(xis.iter().cycle().skip(1))
        .map(|(&xi, other)| {
            let lambda = 0.5 + dkg_core::vec3::norm(*other).fract();
            null_product_norm(Sign::Minus, Sign::Plus, 0.0, xi, dkg_core::vec3::scale(lambda, xi))
        })
        .fold(0.0, f64::max);
    sum.check(Invariant::at_most("null_collinear_massless", collinear, tol));

    let rows: Vec<NullRow> = (0..=cfg.u64("algebra.null_kmax") as i32)
        .map(|k| {
            let constant = null_constant_sweep(masses.big, k, 181);
            let refined = null_constant_sweep(masses.big, k, 721);
            NullRow {
                k,
                constant,
                refined,
                relative_change: (refined - constant).abs() / constant,
            }
        })
        .collect();
    let finite = rows.iter().all(|r| r.refined.is_finite());
    let change = rows.iter().map(|r| r.relative_change).fold(0.0, f64::max);
    sum.check(Invariant::holds("null_constant_finite", finite));
    sum.check(Invariant::at_most("null_constant_stability", change, cfg.f64("algebra.null_stability")));
    out.csv("null_constants.csv", &rows)?;
    sum.detail("algebra", &rep)?;
    Ok(sum)
}

#[derive(Serialize)]
struct KernelRow {
    k: u32,
    kp: u32,
    constant: f64,
    refined_constant: f64,
    disagreement: f64,
    decay_exponent: f64,
}

pub fn verify_kernel(cfg: &RunConfig, out: &Output) -> Outcome {
    let mut sum = Summary::new("verify-kernel");
    let masses = cfg.masses()?;
    let template = KernelConfig {
        mass: masses.big,
        points: cfg.usize("kernel.points"),
        refined_points: cfg.usize("kernel.refined_points"),
        max_points: cfg.usize("kernel.max_points"),
        tolerance: cfg.f64("kernel.quadrature_tol"),
        ..KernelConfig::new(0, 0)
    };
    let sweep = kernel_sweep(exec_of(cfg), cfg.u32("kernel.kmax"), &template)?;
    let rows: Vec<KernelRow> = sweep
        .reports
        .iter()
        .map(|r| KernelRow {
            k: r.config.k,
            kp: r.config.kp,
            constant: r.constant,
            refined_constant: r.refined_constant,
            disagreement: r.disagreement,
            decay_exponent: r.decay_exponent,
        })
        .collect();
    out.csv("kernel.csv", &rows)?;
    let samples: Vec<_> = sweep
        .reports
        .iter()
        .flat_map(|r| r.samples.iter().map(move |s| (r.config.k, r.config.kp, s.tau, s.t, s.sup, s.normalized)))
        .collect();
    out.csv("kernel_samples.csv", &samples)?;
    sum.check(Invariant::at_most("kernel_spread", sweep.spread, cfg.f64("kernel.spread")));
    sum.check(Invariant::at_most("kernel_refinement", sweep.max_disagreement, cfg.f64("kernel.stability")));
    sum.detail("min_constant", &sweep.min_constant)?;
    sum.detail("max_constant", &sweep.max_constant)?;
    Ok(sum)
}

pub fn trilinear(cfg: &RunConfig, out: &Output) -> Outcome {
    let mut sum = Summary::new("trilinear");
    let masses = cfg.masses()?;
    let tcfg = TrilinearConfig {
        grid: cfg.usize("trilinear.grid"),
        trials: cfg.usize("trilinear.trials"),
        seed: cfg.u64("trilinear.seed"),
        big: masses.big,
        small: masses.small,
        bound: cfg.f64("trilinear.bound"),
        ..Default::default()
    };
    let kmax = cfg.u32("trilinear.kmax");
    let (g_seed, g_trials, g_kmax) = (cfg.u64("g.seed"), cfg.usize("g.trials"), cfg.u32("g.kmax"));
    let tri = trilinear_sweep(exec_of(cfg), kmax, &tcfg)?;
    let g = g_sweep(g_seed, g_trials, g_kmax)?;
    out.csv("trilinear.csv", &tri.entries)?;
    let g_rows: Vec<(usize, f64)> = g.random_ratios.iter().cloned().enumerate().collect();
    out.csv("g_ratios.csv", &g_rows)?;
    sum.check(Invariant::at_most("trilinear_max_ratio", tri.max_ratio, tcfg.bound));
    sum.check(Invariant::at_most("g_max_ratio", g.max_random.max(g.geometric).max(g.spike), g.constant));
    if cfg.bool("trilinear.determinism") {
        let again = trilinear_sweep(Exec::Sequential, kmax, &tcfg)?;
        let g_again = g_sweep(g_seed, g_trials, g_kmax)?;
        let same = serde_json::to_vec(&tri)? == serde_json::to_vec(&again)?
            && serde_json::to_vec(&g)? == serde_json::to_vec(&g_again)?;
        sum.check(Invariant::holds("deterministic", same));
    }
    sum.detail("formula", &tri.formula)?;
    sum.detail("g_formula", &g.formula)?;
    sum.detail("g_constant", &g.constant)?;
    Ok(sum)
}

pub fn decompose(cfg: &RunConfig, out: &Output) -> Outcome {
    let mut sum = Summary::new("decompose-check");
    let masses = cfg.masses()?;
    let dcfg = DecomposeCheckConfig {
        n: cfg.usize("decompose.n"),
        seed: cfg.u64("decompose.seed"),
        time_samples: cfg.usize("decompose.time_samples"),
        tolerance: cfg.f64("decompose.tol"),
        mass: masses.big,
        ..Default::default()
    };
    let rep = decompose_check(exec_of(cfg), &dcfg)?;
    out.csv("partitions.csv", &rep.partitions)?;
    sum.check(Invariant::at_most("resummation_residual", rep.worst_residual, dcfg.tolerance));
    sum.check(Invariant::at_most(
        "cap_overlap",
        rep.worst_overlap as f64,
        cfg.f64("decompose.max_overlap"),
    ));
    sum.detail("shell_leakage", &rep.shell_leakage)?;
    sum.detail("cube_cap_commutator", &rep.cube_cap_commutator)?;
    Ok(sum)
}

pub fn scattering(cfg: &RunConfig, out: &Output) -> Outcome {
    let mut sum = Summary::new("scattering");
    let exec = exec_of(cfg);
    let lat = lattice(cfg)?;
    let masses = cfg.masses()?;
    let init = initial_data(cfg, lat);
    let t_end = cfg.f64("scattering.T");
    let steps = cfg.usize("scattering.steps");
    let samples = cfg.usize("scattering.samples").min(steps);
    let opts = SolveOptions {
        t_end,
        dt: t_end / steps as f64,
        output_every: steps / samples,
        exec,
        eps: cfg.f64("data.eps"),
        keep_states: true,
        ..Default::default()
    };
    let traj = Dkgf::new(lat, masses, true, exec).solve(&init, &opts)?;
    let rep = scattering_profile(&traj)?;
    out.csv("diagnostics.csv", &traj.diagnostics)?;
    out.csv("dyadic.csv", &rep.dyadic)?;
    let drift: Vec<(f64, f64)> = rep.times.iter().cloned().zip(rep.drift.iter().cloned()).collect();
    out.csv("drift.csv", &drift)?;
    sum.check(Invariant::holds("late_decay", rep.late_decay));
    sum.check(Invariant::holds("inside_wrap_window", !rep.wrap_warning));
    sum.detail("proxy", &rep.proxy)?;
    sum.detail("two_variation", &rep.two_variation)?;
    if cfg.bool("scattering.control") {
        let free = Dkgf::new(lat, masses, false, exec).solve(&init, &opts)?;
        let crep = scattering_profile(&free)?;
        let worst = crep.drift.iter().cloned().fold(0.0, f64::max);
        sum.check(Invariant::at_most("control_drift", worst, cfg.f64("scattering.control_tol")));
    }
    Ok(sum)
}
