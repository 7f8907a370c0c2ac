//! Small dense linear algebra helpers shared by the analysis and solver
//! modules. Matrices here are at most 8x8.

use nalgebra::DMatrix;

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * out.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `A^T x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len());
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..self.cols {
                out[j] += self.get(i, j) * xi;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// Solves `a x = b` by LU with partial pivoting. Returns `None` when the
/// matrix is numerically singular.
pub fn lu_solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows;
    assert_eq!(a.cols, n);
    assert_eq!(b.len(), n);
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        let mut best = m[col * n + col].abs();
        for row in col + 1..n {
            let v = m[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                m.swap(col * n + j, pivot * n + j);
            }
            x.swap(col, pivot);
        }
        let d = m[col * n + col];
        for row in col + 1..n {
            let factor = m[row * n + col] / d;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                m[row * n + j] -= factor * m[col * n + j];
            }
            x[row] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for j in col + 1..n {
            acc -= m[col * n + j] * x[j];
        }
        x[col] = acc / m[col * n + col];
    }
    Some(x)
}

/// Inverts by repeated LU solves against unit vectors.
pub fn invert(a: &Mat) -> Option<Mat> {
    let n = a.rows;
    let mut out = Mat::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = lu_solve(a, &e)?;
        for i in 0..n {
            out.set(i, j, col[i]);
        }
    }
    Some(out)
}

/// Spectral radius of a nonnegative matrix by power iteration. Host-vector
/// next-generation matrices have period-2 cycle structure (eigenvalues in
/// +/- pairs), so the iteration runs on `K^2` and takes a square root.
pub fn spectral_radius(k: &Mat) -> f64 {
    let n = k.rows;
    if k.max_abs() == 0.0 {
        return 0.0;
    }
    let k2 = k.matmul(k);
    if k2.max_abs() == 0.0 {
        // nilpotent of index 2: eigenvalues all zero
        return 0.0;
    }
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * (i as f64 + 1.0)).collect();
    let mut rho2 = 0.0;
    for _ in 0..500 {
        let w = k2.matvec(&v);
        let norm = w.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if norm == 0.0 {
            return 0.0;
        }
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let prev = rho2;
        rho2 = norm;
        v = next;
        if (rho2 - prev).abs() <= 1e-14 * rho2.max(1.0) {
            break;
        }
    }
    rho2.sqrt()
}

/// Eigenvalues (real parts) of a small dense matrix via Schur
/// decomposition; returns the largest real part.
pub fn max_eigenvalue_real_part(a: &Mat) -> f64 {
    let m = DMatrix::from_row_slice(a.rows, a.cols, &a.data);
    let eig = m.complex_eigenvalues();
    eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Central finite-difference Jacobian of `f` at `x` with per-component
/// steps `h_i = rel * max(|x_i|, floor)`.
pub fn fd_jacobian<F>(f: &F, x: &[f64], rel: f64, floor: f64) -> Mat
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let m = f(x).len();
    let mut jac = Mat::zeros(m, n);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for j in 0..n {
        let h = rel * x[j].abs().max(floor);
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        let fp = f(&xp);
        let fm = f(&xm);
        for i in 0..m {
            jac.set(i, j, (fp[i] - fm[i]) / (2.0 * h));
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lu_solves_small_system() {
        let mut a = Mat::zeros(3, 3);
        let rows = [[2.0, 1.0, -1.0], [-3.0, -1.0, 2.0], [-2.0, 1.0, 2.0]];
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                a.set(i, j, *v);
            }
        }
        let x = lu_solve(&a, &[8.0, -11.0, -3.0]).unwrap();
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[2], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let mut a = Mat::zeros(2, 2);
        a.set(0, 0, 1.0);
        a.set(0, 1, 2.0);
        a.set(1, 0, 2.0);
        a.set(1, 1, 4.0);
        assert!(lu_solve(&a, &[1.0, 2.0]).is_none());
    }

    #[test]
    fn spectral_radius_of_antidiagonal_pair() {
        // eigenvalues +/- sqrt(ab)
        let mut k = Mat::zeros(2, 2);
        k.set(0, 1, 3.0);
        k.set(1, 0, 12.0);
        assert_abs_diff_eq!(spectral_radius(&k), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn spectral_radius_of_triangular_matrix() {
        let mut k = Mat::zeros(2, 2);
        k.set(0, 0, 2.5);
        k.set(0, 1, 1.0);
        assert_abs_diff_eq!(spectral_radius(&k), 2.5, epsilon = 1e-10);
    }

    #[test]
    fn eigenvalue_real_part_of_rotation_plus_decay() {
        // eigenvalues -0.5 +/- 2i
        let mut a = Mat::zeros(2, 2);
        a.set(0, 0, -0.5);
        a.set(0, 1, -2.0);
        a.set(1, 0, 2.0);
        a.set(1, 1, -0.5);
        assert_abs_diff_eq!(max_eigenvalue_real_part(&a), -0.5, epsilon = 1e-10);
    }

    #[test]
    fn fd_jacobian_of_quadratic_map() {
        let f = |x: &[f64]| vec![x[0] * x[0] + x[1], 3.0 * x[0] * x[1]];
        let j = fd_jacobian(&f, &[1.5, -2.0], 1e-6, 1.0);
        assert_abs_diff_eq!(j.get(0, 0), 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(j.get(0, 1), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(j.get(1, 0), -6.0, epsilon = 1e-8);
        assert_abs_diff_eq!(j.get(1, 1), 4.5, epsilon = 1e-8);
    }
}
