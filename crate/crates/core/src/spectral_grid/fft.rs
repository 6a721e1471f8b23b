use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

/// Unnormalized 3D FFT on an `n^3` cube stored row-major `(i, j, k)`.
pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn plan(&self, dir: FftDirection) -> &Arc<dyn Fft<f64>> {
        match dir {
            FftDirection::Forward => &self.fwd,
            FftDirection::Inverse => &self.inv,
        }
    }

    /// In-place transform of one cube; `sign` selects `e^{-i}` (forward) or `e^{+i}`.
    pub fn process(&self, data: &mut [Complex64], dir: FftDirection) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n);
        let fft = self.plan(dir);
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        // innermost axis: contiguous rows
        fft.process_with_scratch(data, &mut scratch);
        // middle axis: transpose each plane, transform rows, transpose back
        for plane in data.chunks_mut(n * n) {
            transpose_square(plane, n);
            fft.process_with_scratch(plane, &mut scratch);
            transpose_square(plane, n);
        }
        // outer axis: gather (i, k) slabs per j
        let mut slab = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    slab[k * n + i] = data[(i * n + j) * n + k];
                }
            }
            fft.process_with_scratch(&mut slab, &mut scratch);
            for i in 0..n {
                for k in 0..n {
                    data[(i * n + j) * n + k] = slab[k * n + i];
                }
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.process(data, FftDirection::Forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.process(data, FftDirection::Inverse);
    }
}

fn transpose_square(a: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in (r + 1)..n {
            a.swap(r * n + c, c * n + r);
        }
    }
}

/// Shared, cached transform for cube side `n`.
pub fn fft_for(n: usize) -> Arc<Fft3> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft cache poisoned");
    guard.entry(n).or_insert_with(|| Arc::new(Fft3::new(n))).clone()
}
