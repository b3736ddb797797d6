//! Small dense complex linear algebra on row-major square matrices.

use num_complex::Complex64;

pub type C64 = Complex64;

/// Hermitian norm of a complex vector.
pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `y = A x` for a row-major `n x n` matrix.
pub fn mat_vec(a: &[C64], x: &[C64], y: &mut [C64]) {
    let n = x.len();
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        y[i] = row.iter().zip(x).map(|(p, q)| p * q).sum();
    }
}

/// `y = A^* x` (conjugate transpose).
pub fn adj_vec(a: &[C64], x: &[C64], y: &mut [C64]) {
    let n = x.len();
    for (j, yj) in y.iter_mut().enumerate().take(n) {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            s += a[i * n + j].conj() * x[i];
        }
        *yj = s;
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &[C64], n: usize) -> C64 {
    let mut m = a.to_vec();
    let mut d = C64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].norm().total_cmp(&m[j * n + col].norm()))
            .unwrap();
        if m[piv * n + col].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            d = -d;
        }
        let p = m[col * n + col];
        d *= p;
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            for k in col..n {
                let v = m[col * n + k];
                m[r * n + k] -= f * v;
            }
        }
    }
    d
}

/// Solves `A x = b`; `None` when the pivot vanishes.
pub fn solve(a: &[C64], b: &[C64]) -> Option<Vec<C64>> {
    let n = b.len();
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].norm().total_cmp(&m[j * n + col].norm()))
            .unwrap();
        if m[piv * n + col].norm() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        let p = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = m[col * n + k];
                m[r * n + k] -= f * v;
            }
            let v = x[col];
            x[r] -= f * v;
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for k in col + 1..n {
            s -= m[col * n + k] * x[k];
        }
        x[col] = s / m[col * n + col];
    }
    Some(x)
}

/// Frobenius norm of `U^* U - I`.
pub fn unitarity_defect(u: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut g = C64::new(0.0, 0.0);
            for k in 0..n {
                g += u[k * n + i].conj() * u[k * n + j];
            }
            if i == j {
                g -= 1.0;
            }
            s += g.norm_sqr();
        }
    }
    s.sqrt()
}
