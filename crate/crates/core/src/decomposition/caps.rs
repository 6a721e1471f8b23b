//! Spherical cap partitions of unity built on geodesic icosphere vertices.
//!
//! At level `l` the centers are the vertices of the icosahedron with every
//! face subdivided `f` times, `f` minimal such that the covering radius is at
//! most `2^-l`. Each cap carries the bump `b(theta) = rho0(2 theta / R)` with
//! support radius `R = 1.25 * 2^-l`, and `eta = b / sum b`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::cutoffs::rho0;
use super::Localize;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::vec3::{self, Vec3};

const SUPPORT_FACTOR: f64 = 1.25;

/// Cap `index` of the family at `level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CapIndex {
    pub level: u32,
    pub index: usize,
}

#[derive(Clone, Debug)]
pub struct CapFamily {
    level: u32,
    subdivision: usize,
    centers: Vec<Vec3>,
    radius: f64,
    support: f64,
    covering_radius: f64,
    grid: usize,
    cells: Vec<Vec<u32>>,
}

fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let v: Vec<Vec3> = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ]
    .iter()
    .map(|&a| vec3::normalize(a).unwrap())
    .collect();
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v, f)
}

/// Vertices of the `f`-fold subdivided icosphere and its exact covering radius
/// (largest circumradius over all small spherical triangles).
fn icosphere(f: usize) -> (Vec<Vec3>, f64) {
    let (v, faces) = icosahedron();
    let mut ids: HashMap<[i64; 3], usize> = HashMap::new();
    let mut pts: Vec<Vec3> = Vec::new();
    let mut cover = 0.0f64;
    let key = |p: Vec3| [(p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64, (p[2] * 1e9).round() as i64];
    for face in &faces {
        let (a, b, c) = (v[face[0]], v[face[1]], v[face[2]]);
        let node = |i: usize, j: usize| -> Vec3 {
            let w0 = (f - i - j) as f64;
            let p = [
                a[0] * w0 + b[0] * i as f64 + c[0] * j as f64,
                a[1] * w0 + b[1] * i as f64 + c[1] * j as f64,
                a[2] * w0 + b[2] * i as f64 + c[2] * j as f64,
            ];
            vec3::normalize(p).unwrap()
        };
        for i in 0..=f {
            for j in 0..=(f - i) {
                let p = node(i, j);
                ids.entry(key(p)).or_insert_with(|| {
                    pts.push(p);
                    pts.len() - 1
                });
                if i + j < f {
                    cover = cover.max(circumradius(p, node(i + 1, j), node(i, j + 1)));
                }
                if i + j + 2 <= f {
                    cover = cover.max(circumradius(node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)));
                }
            }
        }
    }
    (pts, cover)
}

fn circumradius(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let n = vec3::cross(vec3::sub(b, a), vec3::sub(c, a));
    let mut n = vec3::normalize(n).unwrap();
    if vec3::dot(n, a) < 0.0 {
        n = vec3::scale(-1.0, n);
    }
    vec3::angle(n, a).unwrap()
}

fn cell_of(grid: usize, w: Vec3) -> usize {
    let a = (0..3)
        .max_by(|&i, &j| w[i].abs().partial_cmp(&w[j].abs()).unwrap())
        .unwrap();
    let (b, c) = ((a + 1) % 3, (a + 2) % 3);
    let m = w[a].abs();
    let face = 2 * a + usize::from(w[a] < 0.0);
    let g = grid as f64;
    let iu = (((w[b] / m + 1.0) * 0.5 * g) as usize).min(grid - 1);
    let iv = (((w[c] / m + 1.0) * 0.5 * g) as usize).min(grid - 1);
    (face * grid + iu) * grid + iv
}

fn cell_center(grid: usize, cell: usize) -> Vec3 {
    let face = cell / (grid * grid);
    let (iu, iv) = ((cell / grid) % grid, cell % grid);
    let (a, neg) = (face / 2, face % 2 == 1);
    let (b, c) = ((a + 1) % 3, (a + 2) % 3);
    let g = grid as f64;
    let mut w = [0.0; 3];
    w[a] = if neg { -1.0 } else { 1.0 };
    w[b] = -1.0 + (iu as f64 + 0.5) * 2.0 / g;
    w[c] = -1.0 + (iv as f64 + 0.5) * 2.0 / g;
    vec3::normalize(w).unwrap()
}

/// Centers whose angle to some point of each cube-map cell may be below `reach`.
fn bucket(centers: &[Vec3], grid: usize, reach: f64, within: Option<(&[Vec<u32>], usize)>) -> Vec<Vec<u32>> {
    let ncell = 6 * grid * grid;
    let margin = std::f64::consts::SQRT_2 / grid as f64;
    let cosr = (reach + margin).min(std::f64::consts::PI).cos();
    (0..ncell)
        .map(|cell| {
            let cc = cell_center(grid, cell);
            let test = |&i: &u32| vec3::dot(centers[i as usize], cc) >= cosr;
            match within {
                Some((parent, pg)) => parent[cell_of(pg, cc)].iter().copied().filter(|i| test(i)).collect(),
                None => (0..centers.len() as u32).filter(|i| test(i)).collect(),
            }
        })
        .collect()
}

/// Angular support radius of `eta_kappa` at level `l`, without building the family.
pub fn cap_support_radius(l: u32) -> f64 {
    if l == 0 {
        std::f64::consts::PI
    } else {
        SUPPORT_FACTOR * (-(l as f64)).exp2()
    }
}

/// Cap family at level `l`; `l = 0` is the single cap `S^2` with `eta = 1`.
pub fn build_cap_cover(l: u32) -> CapFamily {
    if l == 0 {
        return CapFamily {
            level: 0,
            subdivision: 0,
            centers: vec![[0.0, 0.0, 1.0]],
            radius: std::f64::consts::PI,
            support: std::f64::consts::PI,
            covering_radius: std::f64::consts::PI,
            grid: 1,
            cells: vec![vec![0]; 6],
        };
    }
    let radius = (-(l as f64)).exp2();
    let mut f = 1;
    let (centers, covering_radius) = loop {
        let (c, cov) = icosphere(f);
        if cov <= radius {
            break (c, cov);
        }
        f += 1;
    };
    let support = SUPPORT_FACTOR * radius;
    let grid = ((1.0 / support).ceil() as usize).max(1);
    let coarse_grid = 4usize.min(grid);
    let fine_margin = std::f64::consts::SQRT_2 / grid as f64;
    let coarse = bucket(&centers, coarse_grid, support + fine_margin, None);
    let cells = bucket(&centers, grid, support, Some((&coarse, coarse_grid)));
    CapFamily {
        level: l,
        subdivision: f,
        centers,
        radius,
        support,
        covering_radius,
        grid,
        cells,
    }
}

impl CapFamily {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Nominal cap radius `2^-l`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Angular support radius of each `eta`.
    pub fn support_radius(&self) -> f64 {
        self.support
    }

    /// Angular support radius of the fattened symbol.
    pub fn tilde_support_radius(&self) -> f64 {
        2.0 * self.support
    }

    /// Largest angle from any direction to its nearest center.
    pub fn covering_radius(&self) -> f64 {
        self.covering_radius
    }

    pub fn subdivision(&self) -> usize {
        self.subdivision
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    pub fn center(&self, idx: CapIndex) -> Result<Vec3> {
        self.check(idx)?;
        Ok(self.centers[idx.index])
    }

    pub fn indices(&self) -> impl Iterator<Item = CapIndex> + '_ {
        (0..self.len()).map(|index| CapIndex {
            level: self.level,
            index,
        })
    }

    fn check(&self, idx: CapIndex) -> Result<()> {
        if idx.level != self.level || idx.index >= self.len() {
            return Err(Error::CapIndex {
                index: idx.index,
                level: idx.level,
                count: self.len(),
            });
        }
        Ok(())
    }

    #[inline]
    fn bump(&self, w: Vec3, i: usize) -> f64 {
        let c = vec3::dot(self.centers[i], w).clamp(-1.0, 1.0);
        let theta = c.acos();
        if theta >= self.support {
            0.0
        } else {
            rho0(2.0 * theta / self.support)
        }
    }

    /// Nonzero `(index, eta)` pairs at the direction of `xi`.
    pub fn weights(&self, xi: Vec3) -> Vec<(usize, f64)> {
        if self.level == 0 {
            return vec![(0, 1.0)];
        }
        let Some(w) = vec3::normalize(xi) else {
            let e = 1.0 / self.len() as f64;
            return (0..self.len()).map(|i| (i, e)).collect();
        };
        let mut out: Vec<(usize, f64)> = self.cells[cell_of(self.grid, w)]
            .iter()
            .map(|&i| (i as usize, self.bump(w, i as usize)))
            .filter(|&(_, b)| b > 0.0)
            .collect();
        let total: f64 = out.iter().map(|p| p.1).sum();
        for p in &mut out {
            p.1 /= total;
        }
        out
    }

    /// `eta_kappa(xi)`; on `xi = 0` every cap gets `1 / |K_l|`.
    pub fn eta(&self, idx: usize, xi: Vec3) -> f64 {
        if self.level == 0 {
            return 1.0;
        }
        let Some(w) = vec3::normalize(xi) else {
            return 1.0 / self.len() as f64;
        };
        let b = self.bump(w, idx);
        if b == 0.0 {
            return 0.0;
        }
        let total: f64 = self.cells[cell_of(self.grid, w)]
            .iter()
            .map(|&i| self.bump(w, i as usize))
            .sum();
        b / total
    }

    /// Fattened symbol: 1 on the support of `eta_kappa`, vanishing beyond twice
    /// the support radius.
    pub fn tilde_eta(&self, idx: usize, xi: Vec3) -> f64 {
        if self.level == 0 {
            return 1.0;
        }
        match vec3::normalize(xi) {
            None => 1.0,
            Some(w) => {
                let theta = vec3::dot(self.centers[idx], w).clamp(-1.0, 1.0).acos();
                rho0(theta / self.support)
            }
        }
    }

    /// Number of caps whose symbol is nonzero in direction `w`.
    pub fn overlap(&self, w: Vec3) -> usize {
        self.weights(w).len()
    }

    /// Fibonacci-lattice sample of `n` directions: `(min, max)` overlap.
    pub fn sample_overlap(&self, n: usize) -> (usize, usize) {
        let mut lo = usize::MAX;
        let mut hi = 0;
        for w in fibonacci_sphere(n) {
            let c = self.overlap(w);
            lo = lo.min(c);
            hi = hi.max(c);
        }
        (lo, hi)
    }

    pub fn project<F: Localize>(&self, field: &F, idx: CapIndex) -> Result<F> {
        self.check(idx)?;
        Ok(field.multiply(Exec::Sequential, |xi| self.eta(idx.index, xi)))
    }

    pub fn project_tilde<F: Localize>(&self, field: &F, idx: CapIndex) -> Result<F> {
        self.check(idx)?;
        Ok(field.multiply(Exec::Sequential, |xi| self.tilde_eta(idx.index, xi)))
    }
}

/// `n` nearly uniform directions on `S^2`.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn level_one_size_and_cover() {
        let k = build_cap_cover(1);
        assert!((6..=50).contains(&k.len()), "{}", k.len());
        assert!(k.covering_radius() <= k.radius());
        assert!(k.support_radius() <= 2.0 * k.radius());
        let (lo, hi) = k.sample_overlap(20_000);
        assert!(lo >= 1 && hi <= 8, "{lo} {hi}");
    }

    #[test]
    fn overlap_and_partition_across_levels() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for l in 1..=5 {
            let k = build_cap_cover(l);
            let (lo, hi) = k.sample_overlap(20_000);
            assert!(lo >= 1 && hi <= 8, "l={l}: {lo} {hi}");
            for _ in 0..500 {
                let xi = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
                let s: f64 = k.weights(xi).iter().map(|p| p.1).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bucketing_matches_brute_force() {
        let k = build_cap_cover(3);
        for w in fibonacci_sphere(3000) {
            let fast = k.overlap(w);
            let slow = (0..k.len()).filter(|&i| k.bump(w, i) > 0.0).count();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn mode_along_center_has_weight_one() {
        let k = build_cap_cover(2);
        for i in [0, 7, k.len() - 1] {
            let c = k.centers()[i];
            assert!((k.eta(i, vec3::scale(3.0, c)) - 1.0).abs() < 1e-12);
            assert_eq!(k.tilde_eta(i, c), 1.0);
        }
    }

    #[test]
    fn tilde_dominates() {
        let k = build_cap_cover(2);
        for w in fibonacci_sphere(2000) {
            for (i, e) in k.weights(w) {
                assert!(e > 0.0);
                assert_eq!(k.tilde_eta(i, w), 1.0);
            }
        }
    }

    #[test]
    fn zero_frequency_convention() {
        let k = build_cap_cover(1);
        let s: f64 = (0..k.len()).map(|i| k.eta(i, [0.0; 3])).sum();
        assert!((s - 1.0).abs() < 1e-12);
        let id = build_cap_cover(0);
        assert_eq!(id.len(), 1);
        assert_eq!(id.eta(0, [1.0, 2.0, 3.0]), 1.0);
        assert!(k.center(CapIndex { level: 2, index: 0 }).is_err());
    }
}
