//! Symmetric banded matrices and their Cholesky factorization.

/// Lower-band storage of a symmetric matrix: `bands[m][i] = A[i + m][i]`.
#[derive(Debug, Clone)]
pub struct SymBand {
    n: usize,
    bands: Vec<Vec<f64>>,
}

impl SymBand {
    pub fn tridiagonal(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        Self {
            n: diag.len(),
            bands: vec![diag, off],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let m = hi - lo;
        if m > self.bandwidth() {
            0.0
        } else {
            self.bands[m][lo]
        }
    }

    /// Product of two symmetric banded matrices that commute (e.g. powers of
    /// the same matrix), so the product is symmetric again.
    pub fn mul_commuting(&self, other: &SymBand) -> SymBand {
        assert_eq!(self.n, other.n);
        let bw = self.bandwidth() + other.bandwidth();
        let n = self.n;
        let mut bands = Vec::with_capacity(bw + 1);
        for m in 0..=bw {
            let mut band = vec![0.0; n.saturating_sub(m)];
            for (j, slot) in band.iter_mut().enumerate() {
                let i = j + m;
                let lo = i.saturating_sub(self.bandwidth());
                let hi = (j + other.bandwidth()).min(n - 1);
                let mut acc = 0.0;
                for k in lo..=hi {
                    acc += self.get(i, k) * other.get(k, j);
                }
                *slot = acc;
            }
            bands.push(band);
        }
        SymBand { n, bands }
    }

    /// `self + scale * other`, widening the band as needed.
    pub fn add_scaled(&self, other: &SymBand, scale: f64) -> SymBand {
        let bw = self.bandwidth().max(other.bandwidth());
        let bands = (0..=bw)
            .map(|m| {
                (0..self.n.saturating_sub(m))
                    .map(|j| self.get(j + m, j) + scale * other.get(j + m, j))
                    .collect()
            })
            .collect();
        SymBand { n: self.n, bands }
    }

    pub fn scale(&mut self, s: f64) {
        for band in &mut self.bands {
            band.iter_mut().for_each(|x| *x *= s);
        }
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.n);
        for (a, b) in self.bands[0].iter_mut().zip(d) {
            *a += b;
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        y.iter_mut()
            .zip(&self.bands[0])
            .zip(x)
            .for_each(|((yi, d), xi)| *yi = d * xi);
        for (m, band) in self.bands.iter().enumerate().skip(1) {
            for j in 0..n - m {
                let a = band[j];
                y[j + m] += a * x[j];
                y[j] += a * x[j + m];
            }
        }
    }

    pub fn cholesky(&self) -> Option<BandCholesky> {
        let n = self.n;
        let bw = self.bandwidth();
        let mut l: Vec<Vec<f64>> = (0..=bw).map(|m| vec![0.0; n.saturating_sub(m)]).collect();
        for j in 0..n {
            let k0 = j.saturating_sub(bw);
            let mut d = self.bands[0][j];
            for k in k0..j {
                let ljk = l[j - k][k];
                d -= ljk * ljk;
            }
            if !(d > 0.0) {
                return None;
            }
            let d = d.sqrt();
            l[0][j] = d;
            for i in j + 1..(j + bw + 1).min(n) {
                let mut s = self.bands[i - j][j];
                for k in i.saturating_sub(bw)..j {
                    s -= l[i - k][k] * l[j - k][k];
                }
                l[i - j][j] = s / d;
            }
        }
        Some(BandCholesky { n, l })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    l: Vec<Vec<f64>>,
}

impl BandCholesky {
    /// Overwrites `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let bw = self.l.len() - 1;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i - k][k] * b[k];
            }
            b[i] = s / self.l[0][i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.l[k - i][i] * b[k];
            }
            b[i] = s / self.l[0][i];
        }
    }
}
