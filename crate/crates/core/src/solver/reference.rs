//! Independent discretization of the original system: RK4 on the Dirac
//! Hamiltonian form and a trigonometric (Gautschi) leapfrog for Klein-Gordon.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SecondOrderState;
use crate::dirac_algebra;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::spectral_grid::{transform_components, FrequencyLattice, MassParams, Repr, ScalarField, SpinorField};
use crate::vec3::Vec3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReferenceOptions {
    pub t_end: f64,
    pub dt: f64,
    pub output_every: usize,
    pub coupling: bool,
    pub exec: Exec,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            dt: 1e-3,
            output_every: 100,
            coupling: true,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReferenceTrajectory {
    pub dt: f64,
    pub steps: usize,
    pub states: Vec<SecondOrderState>,
}

struct Ctx {
    lat: FrequencyLattice,
    np: usize,
    big: f64,
    exec: Exec,
    coupling: bool,
    xi: Vec<Vec3>,
}

impl Ctx {
    fn physical_real(&self, f: &[Complex64]) -> Vec<f64> {
        let mut g = f.to_vec();
        transform_components(self.exec, &self.lat, &mut g, false);
        g.iter().map(|z| z.re).collect()
    }

    /// Fourier coefficients of `psi^dagger beta psi`.
    fn density(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let np = self.np;
        if !self.coupling {
            return vec![ZERO; np];
        }
        let mut p = psi.to_vec();
        transform_components(self.exec, &self.lat, &mut p, false);
        let mut rho: Vec<Complex64> = (0..np)
            .map(|i| {
                Complex64::new(
                    p[i].norm_sqr() + p[np + i].norm_sqr() - p[2 * np + i].norm_sqr() - p[3 * np + i].norm_sqr(),
                    0.0,
                )
            })
            .collect();
        transform_components(self.exec, &self.lat, &mut rho, true);
        rho
    }

    /// `-i (xi . alpha + M beta) psi + i F(phi beta psi)`.
    fn dirac_rhs(&self, psi: &[Complex64], phi: &[f64]) -> Vec<Complex64> {
        let np = self.np;
        let mut out = vec![ZERO; 4 * np];
        for i in 0..np {
            let v = [psi[i], psi[np + i], psi[2 * np + i], psi[3 * np + i]];
            let h = dirac_algebra::apply_dirac_symbol(self.big, self.xi[i], &v);
            for c in 0..4 {
                out[c * np + i] = -I * h[c];
            }
        }
        if self.coupling {
            let mut p = psi.to_vec();
            transform_components(self.exec, &self.lat, &mut p, false);
            for i in 0..np {
                let f = phi[i];
                p[i] *= f;
                p[np + i] *= f;
                p[2 * np + i] *= -f;
                p[3 * np + i] *= -f;
            }
            transform_components(self.exec, &self.lat, &mut p, true);
            for (o, q) in out.iter_mut().zip(&p) {
                *o += I * q;
            }
        }
        out
    }

    fn rk4(&self, psi: &[Complex64], phis: [&[f64]; 3], h: f64) -> Vec<Complex64> {
        let stage = |base: &[Complex64], k: &[Complex64], a: f64| -> Vec<Complex64> {
            base.iter().zip(k).map(|(x, y)| x + y * a).collect()
        };
        let k1 = self.dirac_rhs(psi, phis[0]);
        let k2 = self.dirac_rhs(&stage(psi, &k1, h / 2.0), phis[1]);
        let k3 = self.dirac_rhs(&stage(psi, &k2, h / 2.0), phis[1]);
        let k4 = self.dirac_rhs(&stage(psi, &k3, h), phis[2]);
        (0..psi.len())
            .map(|i| psi[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
            .collect()
    }
}

/// Integrate the original second-order system as a cross-check.
pub fn solve_second_order_reference(
    initial: &SecondOrderState,
    masses: MassParams,
    opts: &ReferenceOptions,
) -> Result<ReferenceTrajectory> {
    let lat = *initial.lattice();
    if *initial.phi.lattice() != lat || *initial.dphi.lattice() != lat {
        return Err(Error::LatticeMismatch);
    }
    if !(opts.dt > 0.0 && opts.t_end >= 0.0) {
        return Err(Error::Precondition(format!(
            "need dt > 0 and T >= 0 (dt = {}, T = {})",
            opts.dt, opts.t_end
        )));
    }
    let steps = (opts.t_end / opts.dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { opts.dt } else { opts.t_end / steps as f64 };
    let om = lat.brackets(masses.small);
    let cfl = h * om.iter().cloned().fold(0.0, f64::max);
    if cfl > 2.0 {
        return Err(Error::Cfl(cfl));
    }
    let dirac_cfl = h * lat.brackets(masses.big).iter().cloned().fold(0.0, f64::max);
    if dirac_cfl > 2.0 * std::f64::consts::SQRT_2 {
        return Err(Error::Precondition(format!(
            "RK4 stability: dt * max<xi>_M = {dirac_cfl:.3} > 2 sqrt 2"
        )));
    }

    let np = lat.num_points();
    let ctx = Ctx {
        lat,
        np,
        big: masses.big,
        exec: opts.exec,
        coupling: opts.coupling,
        xi: (0..np).map(|i| lat.xi(i)).collect(),
    };
    let cos: Vec<f64> = om.iter().map(|w| (w * h).cos()).collect();
    let sin: Vec<f64> = om.iter().map(|w| (w * h).sin()).collect();
    let gain: Vec<f64> = om.iter().zip(&cos).map(|(w, c)| (1.0 - c) / (w * w)).collect();

    let init = initial.to_fourier();
    let mut psi = init.psi.data().to_vec();
    let mut cur = init.phi.data().to_vec();
    let phi1 = init.dphi.data();
    let rho0 = ctx.density(&psi);
    let mut prev: Vec<Complex64> = (0..np)
        .map(|i| cur[i] * cos[i] - phi1[i] * (sin[i] / om[i]) + rho0[i] * gain[i])
        .collect();

    let every = opts.output_every.max(1);
    let mut states = Vec::new();
    let t0 = initial.t;
    let mut rho = rho0;
    for n in 0..=steps {
        let next: Vec<Complex64> = (0..np)
            .map(|i| cur[i] * (2.0 * cos[i]) - prev[i] + rho[i] * (2.0 * gain[i]))
            .collect();
        if n % every == 0 || n == steps {
            let dphi: Vec<Complex64> = (0..np)
                .map(|i| (next[i] - prev[i]) * (om[i] / (2.0 * sin[i])))
                .collect();
            states.push(SecondOrderState {
                t: t0 + n as f64 * h,
                psi: SpinorField::from_data(lat, Repr::Fourier, psi.clone())?,
                phi: ScalarField::from_data(lat, Repr::Fourier, cur.clone())?,
                dphi: ScalarField::from_data(lat, Repr::Fourier, dphi)?,
            });
        }
        if n == steps {
            break;
        }
        let half: Vec<Complex64> = (0..np)
            .map(|i| (prev[i] * -1.0 + cur[i] * 6.0 + next[i] * 3.0) / 8.0)
            .collect();
        let p0 = ctx.physical_real(&cur);
        let ph = ctx.physical_real(&half);
        let p1 = ctx.physical_real(&next);
        psi = ctx.rk4(&psi, [&p0, &ph, &p1], h);
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !norm.is_finite() {
            return Err(Error::NonFinite(t0 + (n + 1) as f64 * h));
        }
        prev = cur;
        cur = next;
        rho = ctx.density(&psi);
    }
    Ok(ReferenceTrajectory { dt: h, steps, states })
}

/// Largest relative `L^2` difference over `psi`, `phi`, `d_t phi`.
pub fn relative_difference(a: &SecondOrderState, b: &SecondOrderState) -> Result<f64> {
    let (a, b) = (a.to_fourier(), b.to_fourier());
    let rel = |d: f64, n: f64| if n > 0.0 { d / n } else { d };
    Ok(rel(a.psi.distance(&b.psi)?, b.psi.norm_l2())
        .max(rel(a.phi.distance(&b.phi)?, b.phi.norm_l2()))
        .max(rel(a.dphi.distance(&b.dphi)?, b.dphi.norm_l2())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{generate_initial_data, reconstruct, split_state, Dkgf, InitialDataConfig, SolveOptions};
    use crate::vec3;

    fn lat() -> FrequencyLattice {
        FrequencyLattice::new(8, 4.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let z = SecondOrderState::zeros(lat());
        let tr = solve_second_order_reference(&z, MassParams::unit(), &ReferenceOptions { t_end: 0.5, dt: 0.05, ..Default::default() }).unwrap();
        for s in &tr.states {
            assert_eq!(s.psi.norm_l2() + s.phi.norm_l2() + s.dphi.norm_l2(), 0.0);
        }
    }

    #[test]
    fn free_klein_gordon_mode_oscillates_exactly() {
        let l = lat();
        let m = [0, 2, 1];
        let w = vec3::bracket(1.0, l.xi(l.index_of(m).unwrap()));
        let mut s = SecondOrderState::zeros(l);
        s.phi = ScalarField::plane_wave(l, m, Complex64::new(1.0, 0.0))
            .real_part()
            .to_fourier();
        let opts = ReferenceOptions {
            t_end: 10.0,
            dt: 0.05,
            output_every: 200,
            coupling: false,
            exec: Exec::Sequential,
        };
        let tr = solve_second_order_reference(&s, MassParams::unit(), &opts).unwrap();
        let last = tr.states.last().unwrap();
        let mut want = s.phi.clone();
        want.scale(Complex64::new((w * last.t).cos(), 0.0));
        assert!(last.phi.distance(&want).unwrap() < 1e-8 * s.phi.norm_l2());
    }

    #[test]
    fn cfl_violation_is_an_error() {
        let z = SecondOrderState::zeros(lat());
        let r = solve_second_order_reference(&z, MassParams::unit(), &ReferenceOptions { t_end: 1.0, dt: 1.0, ..Default::default() });
        assert!(matches!(r, Err(Error::Cfl(_))));
    }

    #[test]
    fn agrees_with_first_order_solver() {
        let l = lat();
        let cfg = InitialDataConfig {
            delta: 0.1,
            seed: 5,
            width: 1.5,
            ..Default::default()
        };
        let masses = MassParams::unit();
        let d = generate_initial_data(l, &cfg);
        let opts = ReferenceOptions {
            t_end: 0.5,
            dt: 5e-3,
            output_every: 1000,
            coupling: true,
            exec: Exec::Sequential,
        };
        let a = solve_second_order_reference(&d, masses, &opts).unwrap();
        let s = split_state(&d, masses).unwrap();
        let sopts = SolveOptions {
            t_end: 0.5,
            dt: 5e-3,
            output_every: 1000,
            exec: Exec::Sequential,
            ..Default::default()
        };
        let b = Dkgf::for_state(&s, true, Exec::Sequential).solve_state(&s, &sopts).unwrap();
        let rb = reconstruct(b.final_state().unwrap());
        let diff = relative_difference(a.states.last().unwrap(), &rb).unwrap();
        assert!(diff < 1e-6, "{diff}");
    }
}
