//! Dense and tridiagonal matrices on the truncated Fock space.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::Result;
use crate::protocol::{DriveFunctionals, DriveProtocol, ModeSpec};
use crate::scalar::{cis, Real};
use crate::special::{assoc_laguerre, LnFactorials};

/// Column-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for k in 0..dim {
            m.set(k, k, Complex::new(T::one(), T::zero()));
        }
        m
    }

    /// Columns `e_j` of the identity for the listed `j`.
    pub fn unit_columns(dim: usize, columns: &[usize]) -> Self {
        let mut m = Self::zeros(dim, columns.len());
        for (c, &j) in columns.iter().enumerate() {
            m.set(j, c, Complex::new(T::one(), T::zero()));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[c * self.rows + r] = v;
    }

    pub fn col(&self, c: usize) -> &[Complex<T>] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [Complex<T>] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for c in 0..self.cols {
            for r in 0..self.rows {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix dimensions do not match");
        let mut out = Self::zeros(self.rows, other.cols);
        for c in 0..other.cols {
            for k in 0..self.cols {
                let b = other.get(k, c);
                if b == Complex::zero() {
                    continue;
                }
                let a = self.col(k);
                let dst = out.col_mut(c);
                for r in 0..a.len() {
                    dst[r] += a[r] * b;
                }
            }
        }
        out
    }

    /// `A† B` without forming the adjoint.
    pub fn adjoint_mul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "matrix dimensions do not match");
        let mut out = Self::zeros(self.cols, other.cols);
        for i in 0..self.cols {
            let a = self.col(i);
            for j in 0..other.cols {
                let b = other.col(j);
                let mut acc = Complex::zero();
                for r in 0..a.len() {
                    acc += a[r].conj() * b[r];
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Leading `rows × cols` block.
    pub fn block(&self, rows: usize, cols: usize) -> Self {
        let mut out = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                out.set(r, c, self.get(r, c));
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    /// Frobenius norm of `A†A − I`, an upper bound on the operator-norm
    /// unitarity defect of the columns.
    pub fn unitarity_defect(&self) -> T {
        let mut g = self.adjoint_mul(self);
        for k in 0..g.rows {
            let v = g.get(k, k) - Complex::new(T::one(), T::zero());
            g.set(k, k, v);
        }
        g.frobenius_norm()
    }
}

/// Hermitian tridiagonal matrix: real diagonal, subdiagonal `lower[n] =
/// H[n+1][n]`, superdiagonal its conjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub diag: Vec<T>,
    pub lower: Vec<Complex<T>>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `y = (H − shift)/scale · x`.
    pub fn apply_scaled(&self, x: &[Complex<T>], shift: T, scale: T, y: &mut [Complex<T>]) {
        let n = self.diag.len();
        let inv = T::one() / scale;
        for k in 0..n {
            let mut acc = x[k] * (self.diag[k] - shift);
            if k > 0 {
                acc += self.lower[k - 1] * x[k - 1];
            }
            if k + 1 < n {
                acc += self.lower[k].conj() * x[k + 1];
            }
            y[k] = acc * inv;
        }
    }

    /// Gershgorin bounds on the (real) spectrum.
    pub fn spectral_bounds(&self) -> (T, T) {
        let n = self.diag.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for k in 0..n {
            let mut radius = T::zero();
            if k > 0 {
                radius += self.lower[k - 1].norm();
            }
            if k + 1 < n {
                radius += self.lower[k].norm();
            }
            lo = lo.min(self.diag[k] - radius);
            hi = hi.max(self.diag[k] + radius);
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> Matrix<T> {
        let n = self.diag.len();
        let mut m = Matrix::zeros(n, n);
        for k in 0..n {
            m.set(k, k, Complex::new(self.diag[k], T::zero()));
            if k + 1 < n {
                m.set(k + 1, k, self.lower[k]);
                m.set(k, k + 1, self.lower[k].conj());
            }
        }
        m
    }
}

/// `ω·(n + ½)` on the diagonal and `g·F·√(n+1)` below it.
pub(crate) fn hamiltonian_parts<T: Real>(omega: T, g: T, coupling: Complex<T>, dim: usize) -> Tridiagonal<T> {
    let diag = (0..dim).map(|n| omega * (T::lit(n as f64) + T::lit(0.5))).collect();
    let lower = (0..dim.saturating_sub(1))
        .map(|n| coupling * (g * T::lit((n + 1) as f64).sqrt()))
        .collect();
    Tridiagonal { diag, lower }
}

/// `ω(t)(N + ½) + G(t)(F* a + F a†)` on the lowest `dim` Fock states.
pub fn hamiltonian_tridiagonal<T: Real>(
    mode: &ModeSpec<T>,
    protocol: &DriveProtocol<T>,
    t: T,
    dim: usize,
) -> Result<Tridiagonal<T>> {
    Ok(hamiltonian_parts(mode.omega(t)?, protocol.evaluate_switching(t)?, mode.coupling, dim))
}

/// Dense form of [`hamiltonian_tridiagonal`].
pub fn build_hamiltonian<T: Real>(mode: &ModeSpec<T>, protocol: &DriveProtocol<T>, t: T, dim: usize) -> Result<Matrix<T>> {
    Ok(hamiltonian_tridiagonal(mode, protocol, t, dim)?.to_dense())
}

/// `⟨m|D(α)|n⟩` for `m, n < dim` from the associated-Laguerre closed form.
pub fn displacement_matrix<T: Real>(alpha: Complex<T>, dim: usize) -> Matrix<T> {
    let mut out = Matrix::zeros(dim, dim);
    let x = alpha.norm_sqr();
    if x == T::zero() {
        return Matrix::identity(dim);
    }
    let lf = LnFactorials::<T>::new(dim);
    let ln_abs = alpha.norm().ln();
    let phase = alpha.arg();
    for n in 0..dim {
        for m in 0..dim {
            let (lo, hi) = (m.min(n), m.max(n));
            let k = hi - lo;
            let lag = assoc_laguerre(lo as u32, k as u32, x);
            let ln_mag = (lf.get(lo) - lf.get(hi)) / T::lit(2.0) + T::lit(k as f64) * ln_abs - x / T::lit(2.0);
            // α^{m−n} above the diagonal, (−α*)^{n−m} below it.
            let angle = if m >= n {
                phase * T::lit(k as f64)
            } else {
                (T::PI() - phase) * T::lit(k as f64)
            };
            out.set(m, n, cis(angle) * (ln_mag.exp() * lag));
        }
    }
    out
}

/// Closed-form propagator `e^{iθ} e^{−iζ(N+½)} D(−ξ)` of the driven mode.
pub fn analytic_propagator<T: Real>(fun: &DriveFunctionals<T>, dim: usize) -> Matrix<T> {
    let mut d = displacement_matrix(-fun.xi, dim);
    for n in 0..dim {
        for m in 0..dim {
            let phase = fun.theta - fun.zeta * (T::lit(m as f64) + T::lit(0.5));
            let v = d.get(m, n) * cis(phase);
            d.set(m, n, v);
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Switching;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn hamiltonian_structure() {
        let mode = ModeSpec::fixed("k", 1.5, c(0.3, -0.4)).unwrap();
        let p = DriveProtocol::new(Switching::Constant { amplitude: 0.7 }, 1.0).unwrap();
        let h = build_hamiltonian(&mode, &p, 0.5, 6).unwrap();
        assert_eq!(h, h.adjoint());
        assert_eq!(h.get(3, 2), c(0.3, -0.4) * (0.7 * 3f64.sqrt()));
        assert_eq!(h.get(1, 3), c(0.0, 0.0));
        let off = build_hamiltonian(&mode, &p, 2.0, 6).unwrap();
        for n in 0..6 {
            assert_eq!(off.get(n, n), c(1.5 * (n as f64 + 0.5), 0.0));
            if n + 1 < 6 {
                assert_eq!(off.get(n + 1, n), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn displacement_columns_are_coherent_states() {
        let a = c(0.8, 0.5);
        let d = displacement_matrix(a, 40);
        let lf = LnFactorials::<f64>::new(40);
        for m in 0..40 {
            let expected = a.powu(m as u32) * ((-a.norm_sqr() / 2.0 - lf.get(m) / 2.0).exp());
            assert!((d.get(m, 0) - expected).norm() < 1e-14);
        }
        assert_eq!(displacement_matrix(c(0.0, 0.0), 5), Matrix::identity(5));
        assert!(d.block(40, 20).unitarity_defect() < 1e-10);
    }

    #[test]
    fn displacements_compose_up_to_phase() {
        let (a1, a2) = (c(0.4, -0.3), c(-0.2, 0.6));
        let dim = 60;
        let prod = displacement_matrix(a1, dim).mul(&displacement_matrix(a2, dim));
        let phase = cis((a1 * a2.conj()).im);
        let direct = displacement_matrix(a1 + a2, dim);
        let safe = 20;
        for n in 0..safe {
            for m in 0..safe {
                assert!((prod.get(m, n) - phase * direct.get(m, n)).norm() < 1e-9);
            }
        }
    }
}
