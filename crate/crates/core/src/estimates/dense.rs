//! Norms of fields sampled on a lattice and a uniform time grid.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{cap_family, ExponentPair, NormReport, StrichartzEntry};
use crate::decomposition::{cube_symbol, gamma1, CubeIndex, ModRange, SpaceTimeField};
use crate::dirac_algebra::Sign;
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::spectral_grid::{transform_components, Repr};
use crate::vec3;

/// Physical-space values of every time slice, layout `[n][c][idx]`.
fn physical_samples(exec: Exec, f: &SpaceTimeField) -> Vec<Complex64> {
    let f = f.to_time_physical(exec);
    let lat = *f.lattice();
    let mut data = f.data().to_vec();
    transform_components(exec, &lat, &mut data, false);
    data
}

fn lebesgue_from_physical(exec: Exec, f: &SpaceTimeField, data: &[Complex64], p: f64, q: f64) -> f64 {
    let lat = f.lattice();
    let np = lat.num_points();
    let comps = f.components();
    let dv = lat.cell_volume();
    let slices = exec::map_range(exec, f.time().len(), |n| {
        let block = &data[n * comps * np..(n + 1) * comps * np];
        let mut s = 0.0;
        for idx in 0..np {
            let a2: f64 = (0..comps).map(|c| block[c * np + idx].norm_sqr()).sum();
            s += a2.powf(q / 2.0);
        }
        (s * dv).powf(1.0 / q)
    });
    if p.is_infinite() {
        return slices.into_iter().fold(0.0, f64::max);
    }
    let dt = f.time().dt();
    (slices.iter().map(|g| g.powf(p)).sum::<f64>() * dt).powf(1.0 / p)
}

/// `||f||_{L^p_t L^q_x}` with the periodic trapezoid rule in time and the
/// Euclidean norm over components; `p = inf` takes the max over samples.
pub fn lebesgue_norm(exec: Exec, f: &SpaceTimeField, p: f64, q: f64) -> f64 {
    let data = physical_samples(exec, f);
    lebesgue_from_physical(exec, f, &data, p, q)
}

/// Value and per-scale pieces of `||f||_{X^{+-,b,p}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XNorm {
    pub value: f64,
    /// Resolvable range `[lo, hi]`.
    pub lo: i32,
    pub hi: i32,
    /// `(j, 2^{bj} ||Q_j f||)`; the first entry is `Q_{<lo}` and the last `Q_{>hi}`.
    pub pieces: Vec<(i32, f64)>,
}

/// `l^p` over `j` of `2^{bj} ||Q_j^{sign} f||_{L^2}` on the resolvable range;
/// modulations below and above are lumped into `Q_{<lo}` (weight `2^{b lo}`)
/// and `Q_{>hi}` (weight `2^{b (hi+1)}`).
pub fn xnorm(exec: Exec, f: &SpaceTimeField, sign: Sign, mass: f64, b: f64, p: f64) -> Result<XNorm> {
    let (lo, hi) = f.time().resolvable()?;
    let mut ranges = vec![(lo, ModRange::AtMost(lo - 1))];
    ranges.extend((lo..=hi).map(|j| (j, ModRange::Exact(j))));
    ranges.push((hi + 1, ModRange::Above(hi)));

    let g = f.to_time_fourier(exec);
    let lat = *g.lattice();
    let np = lat.num_points();
    let comps = g.components();
    let time = *g.time();
    let br: Vec<f64> = (0..np).map(|i| vec3::bracket(mass, lat.xi(i))).collect();
    let s = sign.value();
    let per_q = exec::map_range(exec, time.len(), |q| {
        let tau = time.tau(q);
        let block = g.slice(q);
        let mut acc = vec![0.0; ranges.len()];
        for idx in 0..np {
            let e: f64 = (0..comps).map(|c| block[c * np + idx].norm_sqr()).sum();
            if e == 0.0 {
                continue;
            }
            let sigma = tau + s * br[idx];
            for (a, (_, r)) in acc.iter_mut().zip(&ranges) {
                let w = r.symbol(sigma);
                *a += w * w * e;
            }
        }
        acc
    });
    let mut sums = vec![0.0; ranges.len()];
    for acc in per_q {
        for (s, a) in sums.iter_mut().zip(acc) {
            *s += a;
        }
    }
    let pieces: Vec<(i32, f64)> = ranges
        .iter()
        .zip(&sums)
        .map(|(&(j, _), &e)| (j, (b * j as f64).exp2() * e.sqrt()))
        .collect();
    let value = if p.is_infinite() {
        pieces.iter().map(|x| x.1).fold(0.0, f64::max)
    } else {
        pieces.iter().map(|x| x.1.powf(p)).sum::<f64>().powf(1.0 / p)
    };
    Ok(XNorm { value, lo, hi, pieces })
}

/// Lattice indices carried by each `(cube, cap)` piece, with symbol weights.
pub(crate) type Pieces = BTreeMap<([i64; 3], usize), Vec<(usize, f64)>>;

/// Cube centers on `2^kp Z^3` whose symbol is nonzero at `xi`.
pub(crate) fn cubes_at(kp: u32, xi: vec3::Vec3) -> Vec<([i64; 3], f64)> {
    let h = (kp as f64).exp2();
    let mut axes: [Vec<(i64, f64)>; 3] = Default::default();
    for (i, axis) in axes.iter_mut().enumerate() {
        let r = xi[i] / h;
        for c in [r.floor(), r.ceil()] {
            let g = gamma1(r - c);
            let n = (c * h) as i64;
            if g > 0.0 && !axis.iter().any(|e| e.0 == n) {
                axis.push((n, g));
            }
        }
    }
    let mut out = Vec::new();
    for a in &axes[0] {
        for b in &axes[1] {
            for c in &axes[2] {
                out.push(([a.0, b.0, c.0], a.1 * b.1 * c.1));
            }
        }
    }
    out
}

fn pieces_of(f: &SpaceTimeField, kp: u32, l: u32) -> Pieces {
    let lat = f.lattice();
    let np = lat.num_points();
    let comps = f.components();
    let caps = cap_family(l);
    let mut active = vec![false; np];
    for n in 0..f.time().len() {
        let block = f.slice(n);
        for idx in 0..np {
            if (0..comps).any(|c| block[c * np + idx] != Complex64::new(0.0, 0.0)) {
                active[idx] = true;
            }
        }
    }
    let mut map = Pieces::new();
    for idx in (0..np).filter(|&i| active[i]) {
        let xi = lat.xi(idx);
        let caps_here = caps.weights(xi);
        for (n, g) in cubes_at(kp, xi) {
            for &(kappa, e) in &caps_here {
                map.entry((n, kappa)).or_default().push((idx, g * e));
            }
        }
    }
    map
}

fn piece_norm(f: &SpaceTimeField, support: &[(usize, f64)], p: f64, q: f64) -> f64 {
    let lat = *f.lattice();
    let np = lat.num_points();
    let comps = f.components();
    let nt = f.time().len();
    let mut data = vec![Complex64::new(0.0, 0.0); f.data().len()];
    for n in 0..nt {
        let src = f.slice(n);
        let dst = &mut data[n * comps * np..(n + 1) * comps * np];
        for &(idx, w) in support {
            for c in 0..comps {
                dst[c * np + idx] = src[c * np + idx] * w;
            }
        }
    }
    transform_components(Exec::Sequential, &lat, &mut data, false);
    lebesgue_from_physical(Exec::Sequential, f, &data, p, q)
}

/// `(sum_{kappa, n} ||Gamma_{k', n} P_{kappa, l} f||_{L^p L^q}^2)^{1/2}` over
/// the cubes of side `2^kp` and caps of level `l` meeting the support of `f`.
pub fn localized_strichartz_norm(
    exec: Exec,
    f: &SpaceTimeField,
    k: u32,
    l: u32,
    kp: u32,
    pq: (u32, u32),
) -> Result<f64> {
    let pair = ExponentPair::from_pq(pq.0, pq.1)?;
    if kp > k || l > k {
        return Err(Error::Precondition(format!("need k', l <= k (k = {k}, k' = {kp}, l = {l})")));
    }
    let (p, q) = pair.pq();
    let f = f.to_time_physical(exec);
    let pieces: Vec<Vec<(usize, f64)>> = pieces_of(&f, kp, l).into_values().collect();
    let norms = exec::map(exec, &pieces, |s| piece_norm(&f, s, p, q));
    Ok(norms.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Same quantity as [`localized_strichartz_norm`], built by projecting the
/// whole field onto each cube and cap in turn.
pub fn localized_strichartz_norm_by_cube(
    exec: Exec,
    f: &SpaceTimeField,
    k: u32,
    l: u32,
    kp: u32,
    pq: (u32, u32),
) -> Result<f64> {
    let pair = ExponentPair::from_pq(pq.0, pq.1)?;
    if kp > k || l > k {
        return Err(Error::Precondition(format!("need k', l <= k (k = {k}, k' = {kp}, l = {l})")));
    }
    let (p, q) = pair.pq();
    let f = f.to_time_physical(exec);
    let lat = *f.lattice();
    let caps = cap_family(l);
    let mut total = 0.0;
    for cube in crate::decomposition::cube_centers(&lat, kp) {
        let cube = CubeIndex::new(cube.kp, cube.n)?;
        for kappa in 0..caps.len() {
            let g = f.multiply(exec, crate::decomposition::Taper::None, |_, idx| {
                let xi = lat.xi(idx);
                cube_symbol(&cube, xi) * caps.eta(kappa, xi)
            });
            if g.l2() == 0.0 {
                continue;
            }
            total += lebesgue_norm(exec, &g, p, q).powi(2);
        }
    }
    Ok(total.sqrt())
}

/// Range of `(k', l)` entering the `S_k` supremum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkRange {
    pub kp_min: u32,
    pub l_max: u32,
}

impl SkRange {
    pub fn full(k: u32) -> Self {
        Self { kp_min: 0, l_max: k }
    }
}

/// `||f||_{S_k^{sign}}` for a field assumed localized at frequency `2^k`.
pub fn sk_norm(exec: Exec, f: &SpaceTimeField, sign: Sign, mass: f64, k: u32, range: SkRange) -> Result<NormReport> {
    let lat = *f.lattice();
    let max = lat.max_resolved_shell();
    if k > max {
        return Err(Error::UnresolvedShell { k, max });
    }
    let fp = f.to_time_physical(exec);
    let np = lat.num_points();
    let comps = fp.components();
    let linf_l2 = (0..fp.time().len())
        .map(|n| {
            let s = fp.slice(n);
            s[..comps * np].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    let x = xnorm(exec, &fp, sign, mass, 0.5, f64::INFINITY)?;
    let mut entries = Vec::new();
    for kp in range.kp_min.min(k)..=k {
        for l in 0..=range.l_max.min(k) {
            entries.push(StrichartzEntry {
                kp,
                l,
                l3l6: localized_strichartz_norm(exec, &fp, k, l, kp, (3, 6))?,
                l6l3: localized_strichartz_norm(exec, &fp, k, l, kp, (6, 3))?,
            });
        }
    }
    debug_assert_eq!(fp.time_repr(), Repr::Physical);
    Ok(NormReport::new(k, linf_l2, x.value, entries))
}
