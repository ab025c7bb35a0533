//! Cholesky factorizations: dense, symmetric banded, and small complex Hermitian.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};

/// Dense lower Cholesky factor `A = L L^T`, row-major.
#[derive(Debug, Clone)]
pub struct DenseCholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Real> DenseCholesky<T> {
    /// Factors a symmetric matrix given row-major (only the lower triangle is read).
    pub fn factor(n: usize, mut a: Vec<T>) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix must be n x n");
        for i in 0..n {
            for j in 0..=i {
                let (ri, rj) = (i * n, j * n);
                let mut s = a[ri + j];
                for k in 0..j {
                    s -= a[ri + k] * a[rj + k];
                }
                if i == j {
                    if !(s > T::zero()) {
                        return Err(Error::NotPositiveDefinite {
                            pivot: i,
                            value: s.to_f64_lossy(),
                        });
                    }
                    a[ri + i] = s.sqrt();
                } else {
                    a[ri + j] = s / a[rj + j];
                }
            }
            for j in i + 1..n {
                a[i * n + j] = T::zero();
            }
        }
        Ok(DenseCholesky { n, l: a })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `log det A = 2 sum log L_ii`, pairwise summed.
    pub fn log_det(&self) -> T {
        let logs: Vec<T> = (0..self.n).map(|i| self.l[i * self.n + i].ln()).collect();
        T::of(2.0) * pairwise_sum(&logs)
    }

    /// Solves `L y = b` in place.
    pub fn forward(&self, b: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Solves `L^T x = z` in place.
    pub fn backward(&self, z: &mut [T]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * z[k];
            }
            z[i] = s / self.l[i * n + i];
        }
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [T]) {
        self.forward(b);
        self.backward(b);
    }

    /// `v^T A^{-1} v`.
    pub fn inverse_quadratic_form(&self, v: &[T]) -> T {
        let mut y = v.to_vec();
        self.forward(&mut y);
        y.iter().map(|&x| x * x).sum()
    }

    /// Full inverse, row-major.
    pub fn inverse(&self) -> Vec<T> {
        let n = self.n;
        let mut inv = vec![T::zero(); n * n];
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = T::zero());
            col[j] = T::one();
            self.solve(&mut col);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }
}

/// Symmetric banded matrix with half bandwidth `w`, lower band stored row-wise:
/// entry `(i, j)`, `i - w <= j <= i`, lives at `i * (w + 1) + (j + w - i)`.
#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    w: usize,
    data: Vec<T>,
}

impl<T: Real> BandMatrix<T> {
    pub fn zeros(n: usize, w: usize) -> Self {
        BandMatrix {
            n,
            w,
            data: vec![T::zero(); n * (w + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.w
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.w);
        i * (self.w + 1) + (j + self.w - i)
    }

    /// Adds `v` to the symmetric pair `(i, j), (j, i)`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.w, "entry ({i}, {j}) outside band {}", self.w);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.w {
            T::zero()
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn to_dense(&self) -> Vec<T> {
        let n = self.n;
        let mut a = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = self.get(i, j);
            }
        }
        a
    }

    /// In-place banded Cholesky. Fill-in stays inside the band, so the factor is exact.
    pub fn factor(mut self) -> Result<BandCholesky<T>> {
        let (n, w) = (self.n, self.w);
        let stride = w + 1;
        for i in 0..n {
            let lo_i = i.saturating_sub(w);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(w));
                let mut s = self.data[i * stride + (j + w - i)];
                let ri = i * stride + w - i;
                let rj = j * stride + w - j;
                for k in lo..j {
                    s -= self.data[ri + k] * self.data[rj + k];
                }
                if i == j {
                    if !(s > T::zero()) {
                        return Err(Error::NotPositiveDefinite {
                            pivot: i,
                            value: s.to_f64_lossy(),
                        });
                    }
                    self.data[ri + i] = s.sqrt();
                } else {
                    self.data[ri + j] = s / self.data[rj + j];
                }
            }
        }
        Ok(BandCholesky { band: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky<T> {
    band: BandMatrix<T>,
}

impl<T: Real> BandCholesky<T> {
    pub fn dim(&self) -> usize {
        self.band.n
    }

    #[inline]
    fn l(&self, i: usize, j: usize) -> T {
        self.band.data[self.band.idx(i, j)]
    }

    pub fn log_det(&self) -> T {
        let logs: Vec<T> = (0..self.dim()).map(|i| self.l(i, i).ln()).collect();
        T::of(2.0) * pairwise_sum(&logs)
    }

    /// Solves `L y = b` in place.
    pub fn forward(&self, b: &mut [T]) {
        let w = self.band.w;
        for i in 0..self.dim() {
            let mut s = b[i];
            for k in i.saturating_sub(w)..i {
                s -= self.l(i, k) * b[k];
            }
            b[i] = s / self.l(i, i);
        }
    }

    /// Solves `L^T x = z` in place.
    pub fn backward(&self, z: &mut [T]) {
        let (n, w) = (self.dim(), self.band.w);
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..(i + w + 1).min(n) {
                s -= self.l(k, i) * z[k];
            }
            z[i] = s / self.l(i, i);
        }
    }

    pub fn solve(&self, b: &mut [T]) {
        self.forward(b);
        self.backward(b);
    }

    pub fn inverse_quadratic_form(&self, v: &[T]) -> T {
        let mut y = v.to_vec();
        self.forward(&mut y);
        y.iter().map(|&x| x * x).sum()
    }
}

/// Log-determinant of a small Hermitian positive definite matrix (row-major)
/// via complex Cholesky: `log det = 2 sum log L_ii`.
pub fn hermitian_log_det<T: Real>(n: usize, a: &[Complex<T>]) -> Result<T> {
    assert_eq!(a.len(), n * n);
    let mut l = vec![Complex::new(T::zero(), T::zero()); n * n];
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                let d = s.re;
                if !(d > T::zero()) {
                    return Err(Error::NotPositiveDefinite {
                        pivot: i,
                        value: d.to_f64_lossy(),
                    });
                }
                l[i * n + i] = Complex::new(d.sqrt(), T::zero());
                acc += d.ln();
            } else {
                l[i * n + j] = s / l[j * n + j].re;
            }
        }
    }
    Ok(acc)
}

/// Determinant by Gaussian elimination with partial pivoting (small dense matrices).
pub fn det_lu<T: Real>(n: usize, mut a: Vec<T>) -> T {
    let mut det = T::one();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| a[i * n + c].abs().partial_cmp(&a[j * n + c].abs()).unwrap())
            .unwrap();
        if a[piv * n + c] == T::zero() {
            return T::zero();
        }
        if piv != c {
            for k in 0..n {
                a.swap(piv * n + k, c * n + k);
            }
            det = -det;
        }
        let d = a[c * n + c];
        det *= d;
        for i in c + 1..n {
            let f = a[i * n + c] / d;
            for k in c..n {
                let v = a[c * n + k];
                a[i * n + k] -= f * v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd_band(n: usize, w: usize, rng: &mut ChaCha8Rng) -> BandMatrix<f64> {
        let mut m = BandMatrix::zeros(n, w);
        for i in 0..n {
            for j in i.saturating_sub(w)..i {
                let v: f64 = rng.random_range(-1.0..1.0);
                m.add(i, j, v);
                m.add(i, i, v.abs());
                m.add(j, j, v.abs());
            }
            m.add(i, i, 0.1);
        }
        m
    }

    #[test]
    fn banded_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, w) in [(1, 0), (5, 1), (30, 7), (40, 39)] {
            let band = random_spd_band(n, w, &mut rng);
            let dense = DenseCholesky::factor(n, band.to_dense()).unwrap();
            let banded = band.clone().factor().unwrap();
            assert!((dense.log_det() - banded.log_det()).abs() < 1e-10);
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (mut x1, mut x2) = (b.clone(), b.clone());
            dense.solve(&mut x1);
            banded.solve(&mut x2);
            for (a, c) in x1.iter().zip(&x2) {
                assert!((a - c).abs() < 1e-9);
            }
            let q1 = dense.inverse_quadratic_form(&b);
            let q2 = banded.inverse_quadratic_form(&b);
            assert!((q1 - q2).abs() < 1e-9 * q1.abs().max(1.0));
        }
    }

    #[test]
    fn dense_inverse_and_det() {
        let a: Vec<f64> = vec![4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let ch = DenseCholesky::factor(3, a.clone()).unwrap();
        let det = det_lu(3, a.clone());
        assert!((ch.log_det() - det.ln()).abs() < 1e-12);
        let inv = ch.inverse();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(matches!(
            DenseCholesky::factor(2, a.clone()),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
        let mut b = BandMatrix::zeros(2, 1);
        b.add(0, 0, 1.0);
        b.add(1, 1, 1.0);
        b.add(1, 0, 2.0);
        assert!(b.factor().is_err());
    }

    #[test]
    fn hermitian_det_real_case() {
        let a: Vec<Complex<f64>> = [4.0, 2.0, 2.0, 3.0].iter().map(|&x| Complex::new(x, 0.0)).collect();
        assert!((hermitian_log_det(2, &a).unwrap() - 8f64.ln()).abs() < 1e-14);
        let h = vec![
            Complex::new(2.0, 0.0),
            Complex::new(0.0, 1.0),
            Complex::new(0.0, -1.0),
            Complex::new(2.0, 0.0),
        ];
        assert!((hermitian_log_det(2, &h).unwrap() - 3f64.ln()).abs() < 1e-14);
    }
}
