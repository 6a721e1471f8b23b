//! Integrating-factor (Lawson) RK4 for the half-wave system.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::{axpy, norm2, Ops, Packed};
use super::scattering::wrap_around_limit;
use super::{DKGState, SecondOrderState};
use crate::dirac_algebra;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::spectral_grid::{transform_components, MassParams, ScalarField, SpinorField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Record diagnostics (and a state, if kept) every this many steps.
    pub output_every: usize,
    pub coupling: bool,
    pub exec: Exec,
    /// Regularity offset for the reported Sobolev norms.
    pub eps: f64,
    pub keep_states: bool,
    pub blowup_factor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            dt: 1e-2,
            output_every: 10,
            coupling: true,
            exec: Exec::Parallel,
            eps: 0.1,
            keep_states: true,
            blowup_factor: 1e6,
        }
    }
}

/// One diagnostics row; the CSV columns of a simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub t: f64,
    pub charge: f64,
    pub charge_drift: f64,
    pub energy: f64,
    pub psi_plus_h_eps: f64,
    pub psi_minus_h_eps: f64,
    pub phi_plus_h_half_eps: f64,
    pub projector_defect: f64,
    pub phi_imag: f64,
    pub pullback_drift: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dt: f64,
    pub steps: usize,
    pub states: Vec<DKGState>,
    pub diagnostics: Vec<DiagnosticsRow>,
    /// Final time exceeds the wrap-around window `L/4`.
    pub wrap_warning: bool,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&DKGState> {
        self.states.last()
    }

    pub fn max_charge_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.charge_drift.abs()).fold(0.0, f64::max)
    }
}

/// Solver bound to a lattice and mass pair.
pub struct Dkgf {
    ops: Ops,
}

impl Dkgf {
    pub fn new(lattice: crate::spectral_grid::FrequencyLattice, masses: MassParams, coupling: bool, exec: Exec) -> Self {
        Self {
            ops: Ops::new(lattice, masses, coupling, exec),
        }
    }

    pub fn for_state(state: &DKGState, coupling: bool, exec: Exec) -> Self {
        Self::new(*state.lattice(), state.masses, coupling, exec)
    }

    /// `(d_t psi_+, d_t psi_-, d_t phi_+)`.
    pub fn rhs(&self, state: &DKGState) -> Result<(SpinorField, SpinorField, ScalarField)> {
        self.ops.check(state)?;
        let u = self.ops.pack(state);
        let mut d = self.ops.linear(&u);
        axpy(&mut d, 1.0, &self.ops.nonlinear(&u));
        let s = self.ops.unpack(state.t, &d);
        Ok((s.psi_plus, s.psi_minus, s.phi_plus))
    }


    fn step_packed(&self, u: &[Complex64], h: f64) -> Packed {
        let ops = &self.ops;
        let half = ops.phases(h / 2.0);

        let k1 = ops.nonlinear(u);
        let mut ua = u.to_vec();
        axpy(&mut ua, h / 2.0, &k1);
        ops.apply_phases(&half, &mut ua);
        let k2 = ops.nonlinear(&ua);

        let mut eu = u.to_vec();
        ops.apply_phases(&half, &mut eu);
        let mut ub = eu.clone();
        axpy(&mut ub, h / 2.0, &k2);
        let k3 = ops.nonlinear(&ub);

        // E(h) u + h E(h/2) k3 = E(h/2) (E(h/2) u + h k3)
        let mut uc = eu;
        axpy(&mut uc, h, &k3);
        ops.apply_phases(&half, &mut uc);
        let k4 = ops.nonlinear(&uc);

        // E(h/2) (E(h/2) (u + h/6 k1) + h/3 (k2 + k3)) + h/6 k4
        let mut acc = u.to_vec();
        axpy(&mut acc, h / 6.0, &k1);
        ops.apply_phases(&half, &mut acc);
        axpy(&mut acc, h / 3.0, &k2);
        axpy(&mut acc, h / 3.0, &k3);
        ops.apply_phases(&half, &mut acc);
        axpy(&mut acc, h / 6.0, &k4);
        acc
    }

    /// One integrating-factor RK4 step; `h` may be negative.
    pub fn step(&self, state: &DKGState, h: f64) -> Result<DKGState> {
        self.ops.check(state)?;
        let u = self.step_packed(&self.ops.pack(state), h);
        let t = state.t + h;
        if !norm2(&u).is_finite() {
            return Err(Error::NonFinite(t));
        }
        Ok(self.ops.unpack(t, &u))
    }

    fn diagnostics(&self, step: usize, t: f64, u: &[Complex64], w0: &[Complex64], q0: f64, eps: f64) -> DiagnosticsRow {
        let ops = &self.ops;
        let np = ops.np;
        let state = ops.unpack(t, u);
        let charge = state.charge();

        let mut psi: Vec<Complex64> = u[..4 * np].iter().zip(&u[4 * np..8 * np]).map(|(a, b)| a + b).collect();
        let mut h0 = 0.0;
        for i in 0..np {
            let v = [psi[i], psi[np + i], psi[2 * np + i], psi[3 * np + i]];
            let h = dirac_algebra::apply_dirac_symbol(ops.masses.big, ops.xi[i], &v);
            h0 += (0..4).map(|c| (v[c].conj() * h[c]).re).sum::<f64>();
        }
        let mut phi = u[8 * np..].to_vec();
        let kg: f64 = phi
            .iter()
            .zip(&ops.om_small)
            .map(|(z, w)| 0.5 * w * w * z.norm_sqr())
            .sum();
        transform_components(ops.exec, &ops.lat, &mut psi, false);
        transform_components(ops.exec, &ops.lat, &mut phi, false);
        let coupling: f64 = if ops.coupling {
            (0..np)
                .map(|i| {
                    let rho = psi[i].norm_sqr() + psi[np + i].norm_sqr()
                        - psi[2 * np + i].norm_sqr()
                        - psi[3 * np + i].norm_sqr();
                    phi[i].re * rho
                })
                .sum::<f64>()
                * ops.lat.cell_volume()
        } else {
            0.0
        };

        let mut w = u.to_vec();
        ops.apply_phases(&ops.phases(-t), &mut w);
        axpy(&mut w, -1.0, w0);

        DiagnosticsRow {
            step,
            t,
            charge,
            charge_drift: charge - q0,
            energy: h0 - coupling + kg,
            psi_plus_h_eps: state.psi_plus.sobolev_norm(eps),
            psi_minus_h_eps: state.psi_minus.sobolev_norm(eps),
            phi_plus_h_half_eps: state.phi_plus.sobolev_norm(0.5 + eps),
            projector_defect: state.projector_defect(),
            phi_imag: state.phi_imag(),
            pullback_drift: norm2(&w).sqrt(),
        }
    }

    /// Integrate from `initial` (taken at its own `t`) over `opts.t_end`.
    pub fn solve_state(&self, initial: &DKGState, opts: &SolveOptions) -> Result<Trajectory> {
        self.ops.check(initial)?;
        if !(opts.dt > 0.0 && opts.t_end >= 0.0) {
            return Err(Error::Precondition(format!(
                "need dt > 0 and T >= 0 (dt = {}, T = {})",
                opts.dt, opts.t_end
            )));
        }
        let steps = (opts.t_end / opts.dt - 1e-9).ceil().max(0.0) as usize;
        let h = if steps == 0 { opts.dt } else { opts.t_end / steps as f64 };
        let every = opts.output_every.max(1);
        let t0 = initial.t;

        let u0 = self.ops.pack(initial);
        let mut w0 = u0.clone();
        self.ops.apply_phases(&self.ops.phases(-t0), &mut w0);
        let n0 = norm2(&u0).sqrt();
        let q0 = initial.charge();

        let mut traj = Trajectory {
            dt: h,
            steps,
            states: Vec::new(),
            diagnostics: Vec::new(),
            wrap_warning: opts.t_end > wrap_around_limit(initial.lattice()),
        };
        let record = |n: usize, u: &[Complex64], traj: &mut Trajectory| {
            let t = t0 + n as f64 * h;
            traj.diagnostics.push(self.diagnostics(n, t, u, &w0, q0, opts.eps));
            if opts.keep_states {
                traj.states.push(self.ops.unpack(t, u));
            }
        };
        record(0, &u0, &mut traj);
        let mut u = u0;
        for n in 1..=steps {
            u = self.step_packed(&u, h);
            let t = t0 + n as f64 * h;
            let nn = norm2(&u).sqrt();
            if !nn.is_finite() {
                return Err(Error::NonFinite(t));
            }
            if n0 > 0.0 && nn > opts.blowup_factor * n0 {
                return Err(Error::BlowUp { t, factor: nn / n0 });
            }
            if n % every == 0 || n == steps {
                record(n, &u, &mut traj);
            }
        }
        Ok(traj)
    }

    /// `|u_h - u_{h/2}| / |u_{h/2} - u_{h/4}|` at `t_end`; about 16 for a
    /// fourth-order method in its asymptotic range.
    pub fn order_ratio(&self, initial: &DKGState, t_end: f64, dt: f64) -> Result<f64> {
        let run = |h: f64| -> Result<Packed> {
            let opts = SolveOptions {
                t_end,
                dt: h,
                output_every: usize::MAX,
                exec: self.ops.exec,
                keep_states: true,
                ..Default::default()
            };
            let last = self.solve_state(initial, &opts)?.states.pop().expect("final state");
            Ok(self.ops.pack(&last))
        };
        let (a, b, c) = (run(dt)?, run(dt / 2.0)?, run(dt / 4.0)?);
        let dist = |x: &Packed, y: &Packed| x.iter().zip(y).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        Ok(dist(&a, &b) / dist(&b, &c))
    }

    /// Split second-order data and integrate.
    pub fn solve(&self, initial: &SecondOrderState, opts: &SolveOptions) -> Result<Trajectory> {
        let s = super::split_state(initial, self.ops.masses)?;
        self.solve_state(&s, opts)
    }
}

/// Right-hand side of the coupled system.
pub fn rhs_dkgf(state: &DKGState) -> Result<(SpinorField, SpinorField, ScalarField)> {
    Dkgf::for_state(state, true, Exec::Parallel).rhs(state)
}

/// One coupled integrating-factor RK4 step of size `dt`.
pub fn step_exponential_rk4(state: &DKGState, dt: f64) -> Result<DKGState> {
    Dkgf::for_state(state, true, Exec::Parallel).step(state, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac_algebra::Sign;
    use crate::solver::{generate_initial_data, split_state, InitialDataConfig};
    use crate::spectral_grid::FrequencyLattice;
    use crate::vec3;

    fn lat() -> FrequencyLattice {
        FrequencyLattice::new(8, 4.0 * std::f64::consts::PI).unwrap()
    }

    fn data(delta: f64) -> DKGState {
        let cfg = InitialDataConfig {
            delta,
            seed: 11,
            width: 1.5,
            ..Default::default()
        };
        split_state(&generate_initial_data(lat(), &cfg), MassParams::unit()).unwrap()
    }

    fn dist(solver: &Dkgf, a: &DKGState, b: &DKGState) -> f64 {
        let (x, y) = (solver.ops.pack(a), solver.ops.pack(b));
        x.iter().zip(&y).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt()
    }

    fn free_phase(h: f64) -> impl Fn(crate::vec3::Vec3) -> Complex64 {
        move |xi| Complex64::from_polar(1.0, -h * vec3::bracket(1.0, xi))
    }

    #[test]
    fn zero_state_has_zero_rhs() {
        let s = DKGState::zeros(lat(), MassParams::unit());
        let (a, b, c) = rhs_dkgf(&s).unwrap();
        assert_eq!(a.norm_l2() + b.norm_l2() + c.norm_l2(), 0.0);
    }

    #[test]
    fn single_mode_rhs_matches_hand_computation() {
        let l = lat();
        let m = [1, 0, -1];
        let idx = l.index_of(m).unwrap();
        let xi = l.xi(idx);
        let e = [
            Complex64::new(0.4, 0.0),
            Complex64::new(0.0, 0.2),
            Complex64::new(0.1, 0.0),
            Complex64::new(0.0, -0.3),
        ];
        let v = dirac_algebra::apply_projector(Sign::Plus, 1.0, xi, &e);
        let mut s = DKGState::zeros(l, MassParams::unit());
        s.psi_plus = SpinorField::plane_wave(l, m, v).to_fourier();

        let (dp, dm, dphi) = rhs_dkgf(&s).unwrap();
        let mut expect = s.psi_plus.clone();
        expect.scale(Complex64::new(0.0, -vec3::bracket(1.0, xi)));
        assert!(dp.distance(&expect).unwrap() < 1e-12);
        assert!(dm.norm_l2() < 1e-12);

        // constant density v^dagger beta v, whose zero mode is rho L^{3/2}
        let rho = v[0].norm_sqr() + v[1].norm_sqr() - v[2].norm_sqr() - v[3].norm_sqr();
        let zero = l.index_of([0, 0, 0]).unwrap();
        let want = Complex64::new(0.0, rho * l.length().powf(1.5));
        assert!((dphi.data()[zero] - want).norm() < 1e-12);
        let rest: f64 = dphi
            .data()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != zero)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        assert!(rest.sqrt() < 1e-12);
    }

    #[test]
    fn density_is_real() {
        let s = data(0.5);
        assert_eq!(s.psi().beta_density().max_imag(), 0.0);
    }

    #[test]
    fn free_step_is_exact() {
        let s = data(0.3);
        let solver = Dkgf::for_state(&s, false, Exec::Sequential);
        let h = 0.37;
        let next = solver.step(&s, h).unwrap();
        let want = s.psi_plus.apply_scalar_multiplier(free_phase(h)).unwrap();
        assert!(next.psi_plus.distance(&want).unwrap() < 1e-12);
        let want = s.psi_minus.apply_scalar_multiplier(free_phase(-h)).unwrap();
        assert!(next.psi_minus.distance(&want).unwrap() < 1e-12);
        let want = s.phi_plus.apply_scalar_multiplier(free_phase(h)).unwrap();
        assert!(next.phi_plus.distance(&want).unwrap() < 1e-12);
    }

    #[test]
    fn zero_data_stays_zero() {
        let s = DKGState::zeros(lat(), MassParams::unit());
        let opts = SolveOptions {
            t_end: 1.0,
            dt: 0.1,
            ..Default::default()
        };
        let tr = Dkgf::for_state(&s, true, Exec::Sequential).solve_state(&s, &opts).unwrap();
        assert!(tr.states.iter().all(|x| x.norm_l2() == 0.0));
    }

    #[test]
    fn fourth_order_convergence() {
        let s = data(0.4);
        let solver = Dkgf::for_state(&s, true, Exec::Sequential);
        let run = |dt: f64| {
            let opts = SolveOptions {
                t_end: 1.0,
                dt,
                output_every: usize::MAX,
                exec: Exec::Sequential,
                ..Default::default()
            };
            solver.solve_state(&s, &opts).unwrap().states.pop().unwrap()
        };
        let (a, b, c) = (run(0.2), run(0.1), run(0.05));
        let ratio = dist(&solver, &a, &b) / dist(&solver, &b, &c);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
        assert!((solver.order_ratio(&s, 1.0, 0.2).unwrap() - ratio).abs() < 1e-9 * ratio);
    }

    #[test]
    fn time_reversal_recovers_data() {
        let s = data(0.2);
        let solver = Dkgf::for_state(&s, true, Exec::Sequential);
        let mut x = s.clone();
        for _ in 0..20 {
            x = solver.step(&x, 0.05).unwrap();
        }
        for _ in 0..20 {
            x = solver.step(&x, -0.05).unwrap();
        }
        let d = dist(&solver, &x, &s);
        assert!(d < 1e-7, "{d}");
    }

    #[test]
    fn invariants_hold_along_trajectory() {
        let s = data(0.2);
        let solver = Dkgf::for_state(&s, true, Exec::Sequential);
        let opts = SolveOptions {
            t_end: 2.0,
            dt: 0.02,
            output_every: 25,
            ..Default::default()
        };
        let tr = solver.solve_state(&s, &opts).unwrap();
        for d in &tr.diagnostics {
            assert!(d.projector_defect < 1e-9);
            assert!(d.phi_imag < 1e-10);
        }
        let e0 = tr.diagnostics[0].energy;
        let e1 = tr.diagnostics.last().unwrap().energy;
        assert!((e1 - e0).abs() < 1e-6 * e0.abs(), "{e0} {e1}");
    }

    #[test]
    fn blow_up_is_detected() {
        let s = data(0.5);
        let solver = Dkgf::for_state(&s, true, Exec::Sequential);
        let opts = SolveOptions {
            t_end: 1.0,
            dt: 0.1,
            blowup_factor: 0.5,
            ..Default::default()
        };
        assert!(matches!(solver.solve_state(&s, &opts), Err(Error::BlowUp { .. })));
    }
}
