use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// A point in the box. Components past the grid dimension are zero.
pub type Point = [f64; 3];

/// Periodic box `[-L/2, L/2)^d` sampled with `N` points per axis.
///
/// Cloning is cheap: FFT plans and mode tables live behind an `Arc`.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<Inner>,
}

struct Inner {
    dim: usize,
    n: usize,
    length: f64,
    /// Physical frequency per axis index; the Nyquist entry holds `+pi N / L`.
    freqs: Vec<f64>,
    /// `|xi|^2` per flat index.
    xi_sq: Vec<f64>,
    /// Flat index of `-k` for each flat index `k`.
    neg: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim())
            .field("n", &self.n())
            .field("length", &self.length())
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.dim() == other.dim()
                && self.n() == other.n()
                && self.length() == other.length())
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("N = {n} must be even and >= 8")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length {length} must be positive")));
        }
        let scale = 2.0 * PI / length;
        let freqs: Vec<f64> = (0..n)
            .map(|i| {
                let k = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
                k * scale
            })
            .collect();
        let total = n.pow(dim as u32);
        let mut xi_sq = vec![0.0; total];
        let mut neg = vec![0; total];
        for (flat, (x2, ng)) in xi_sq.iter_mut().zip(neg.iter_mut()).enumerate() {
            let idx = unflatten(flat, n, dim);
            let mut s = 0.0;
            let mut m = 0;
            for &i in idx.iter().take(dim) {
                s += freqs[i] * freqs[i];
                m = m * n + (n - i) % n;
            }
            *x2 = s;
            *ng = m;
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(Inner {
                dim,
                n,
                length,
                freqs,
                xi_sq,
                neg,
                forward,
                inverse,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Box edge length.
    pub fn length(&self) -> f64 {
        self.inner.length
    }

    /// Total number of samples, `N^d`.
    pub fn len(&self) -> usize {
        self.inner.xi_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    /// Quadrature weight `(L/N)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim() as i32)
    }

    pub fn volume(&self) -> f64 {
        self.inner.length.powi(self.dim() as i32)
    }

    /// Coordinate of sample `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.inner.length + i as f64 * self.spacing()
    }

    /// Physical position of the sample with flat index `flat`.
    pub fn point(&self, flat: usize) -> Point {
        let idx = unflatten(flat, self.n(), self.dim());
        let mut p = [0.0; 3];
        for a in 0..self.dim() {
            p[a] = self.coord(idx[a]);
        }
        p
    }

    /// Iterator over all sample positions in storage order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Multi-index of a flat index (axis 0 varies slowest).
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        unflatten(flat, self.n(), self.dim())
    }

    /// Physical frequency for index `i` along an axis (Nyquist reported as positive).
    pub fn freq(&self, i: usize) -> f64 {
        self.inner.freqs[i]
    }

    /// Frequency used by first-order derivatives: zero on the Nyquist index.
    pub fn deriv_freq(&self, i: usize) -> f64 {
        if i == self.n() / 2 {
            0.0
        } else {
            self.inner.freqs[i]
        }
    }

    /// `|xi|^2` for each flat spectral index.
    pub fn xi_sq(&self) -> &[f64] {
        &self.inner.xi_sq
    }

    /// Flat index of the mirrored mode `-k`.
    pub fn neg_index(&self, flat: usize) -> usize {
        self.inner.neg[flat]
    }

    /// Largest resolved per-axis frequency, `pi N / L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.n() as f64 / self.length()
    }

    /// Two-thirds rule truncation radius.
    pub fn dealias_radius(&self) -> f64 {
        2.0 / 3.0 * self.nyquist()
    }

    /// Largest `|xi|` present on the grid.
    pub fn max_abs_xi(&self) -> f64 {
        self.nyquist() * (self.dim() as f64).sqrt()
    }

    /// Wave vector of a flat spectral index, with the derivative convention
    /// (Nyquist components zeroed).
    pub fn deriv_wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut k = [0.0; 3];
        for a in 0..self.dim() {
            k[a] = self.deriv_freq(idx[a]);
        }
        k
    }

    /// In-place forward transform, normalized by `1/N^d`.
    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        self.transform(data, self.inner.forward.as_ref());
        let scale = 1.0 / self.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    /// In-place inverse transform (no normalization).
    pub fn inverse(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        self.transform(data, self.inner.inverse.as_ref());
    }

    /// Forward transforms of real sample arrays, two per complex FFT.
    pub fn forward_real_many(&self, fields: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            let mut z: Vec<Complex64> = match pair {
                [a, b] => a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect(),
                [a] => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                _ => unreachable!(),
            };
            self.forward(&mut z);
            if pair.len() == 1 {
                // Exact Hermitian symmetry for a single real input.
                let mut a = z;
                self.symmetrize(&mut a);
                out.push(a);
                continue;
            }
            let mut a = vec![Complex64::new(0.0, 0.0); z.len()];
            let mut b = vec![Complex64::new(0.0, 0.0); z.len()];
            for k in 0..z.len() {
                let zc = z[self.neg_index(k)].conj();
                a[k] = 0.5 * (z[k] + zc);
                b[k] = Complex64::new(0.0, -0.5) * (z[k] - zc);
            }
            out.push(a);
            out.push(b);
        }
        out
    }

    /// Inverse transforms of Hermitian spectra into real samples, two per complex FFT.
    pub fn inverse_real_many(&self, spectra: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let i = Complex64::new(0.0, 1.0);
        let mut out = Vec::with_capacity(spectra.len());
        for pair in spectra.chunks(2) {
            let mut z: Vec<Complex64> = match pair {
                [a, b] => a.iter().zip(b.iter()).map(|(&x, &y)| x + i * y).collect(),
                [a] => a.to_vec(),
                _ => unreachable!(),
            };
            self.inverse(&mut z);
            out.push(z.iter().map(|c| c.re).collect());
            if pair.len() == 2 {
                out.push(z.iter().map(|c| c.im).collect());
            }
        }
        out
    }

    /// Forces exact Hermitian symmetry `c(-k) = conj(c(k))`.
    pub fn symmetrize(&self, spec: &mut [Complex64]) {
        for k in 0..spec.len() {
            let m = self.neg_index(k);
            if m > k {
                let avg = 0.5 * (spec[k] + spec[m].conj());
                spec[k] = avg;
                spec[m] = avg.conj();
            } else if m == k {
                spec[k].im = 0.0;
            }
        }
    }

    fn transform(&self, data: &mut [Complex64], fft: &dyn Fft<f64>) {
        let n = self.n();
        let dim = self.dim();
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let mut buf: Vec<Complex64> = Vec::new();
        for axis in 0..dim {
            let stride = n.pow((dim - 1 - axis) as u32);
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            let outer_count = data.len() / (n * stride);
            buf.resize(data.len(), Complex64::new(0.0, 0.0));
            for outer in 0..outer_count {
                let base = outer * n * stride;
                for e in 0..n {
                    let row = &data[base + e * stride..base + (e + 1) * stride];
                    for (inner, &z) in row.iter().enumerate() {
                        buf[(outer * stride + inner) * n + e] = z;
                    }
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for outer in 0..outer_count {
                let base = outer * n * stride;
                for e in 0..n {
                    let row = &mut data[base + e * stride..base + (e + 1) * stride];
                    for (inner, z) in row.iter_mut().enumerate() {
                        *z = buf[(outer * stride + inner) * n + e];
                    }
                }
            }
        }
    }
}

fn unflatten(flat: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut idx = [0; 3];
    let mut rem = flat;
    for a in (0..dim).rev() {
        idx[a] = rem % n;
        rem /= n;
    }
    idx
}
