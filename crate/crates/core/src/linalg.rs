//! Dense symmetric matrices and a self-contained eigensolver.
//!
//! The solver is the classic Householder tridiagonalization followed by
//! implicit-shift QL iteration, which is deterministic and fast enough for
//! the moment-matrix sizes this crate works with (side < 100).

use crate::error::{Error, Result};

/// Dense symmetric matrix, row-major square storage.
#[derive(Debug, Clone)]
pub struct SymMatrix {
    side: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(side: usize) -> Self {
        SymMatrix { side, data: vec![0.0; side * side] }
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(side);
        for i in 0..side {
            for j in 0..=i {
                let v = f(i, j);
                m.data[i * side + j] = v;
                m.data[j * side + i] = v;
            }
        }
        m
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.side + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.side + j] = v;
        self.data[j * self.side + i] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Eigendecomposition of a symmetric matrix: ascending eigenvalues and the
/// matrix of column eigenvectors (`vectors[k * side + j]` is component `k`
/// of eigenvector `j`).
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub side: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymEigen {
    #[inline]
    pub fn vector_component(&self, vec_idx: usize, comp: usize) -> f64 {
        self.vectors[comp * self.side + vec_idx]
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Computes the full eigendecomposition of `a`.
pub fn sym_eigen(a: &SymMatrix) -> Result<SymEigen> {
    let n = a.side;
    if n == 0 {
        return Ok(SymEigen { side: 0, values: vec![], vectors: vec![] });
    }
    let mut v = a.data.clone();
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;
    Ok(SymEigen { side: n, values: d, vectors: v })
}

/// Householder reduction to tridiagonal form, accumulating transformations.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                for k in (j + 1)..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..(n - 1) {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + (n - 1)] = 1.0;
    e[0] = 0.0;
}

/// QL iteration with implicit shifts on the tridiagonal form.
fn tql2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::EigenFailure);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0f64;
                let mut s2 = 0.0f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[k * n + i + 1];
                        v[k * n + i + 1] = s * v[k * n + i] + c * h;
                        v[k * n + i] = c * v[k * n + i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Sort ascending, reordering eigenvectors.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for row in 0..n {
                v.swap(row * n + i, row * n + k);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reconstruct(eig: &SymEigen) -> SymMatrix {
        let n = eig.side;
        SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| eig.values[k] * eig.vectors[i * n + k] * eig.vectors[j * n + k])
                .sum()
        })
    }

    #[test]
    fn known_two_by_two() {
        // [[1, -1], [-1, 1]] has eigenvalues {0, 2}.
        let m = SymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { -1.0 });
        let eig = sym_eigen(&m).unwrap();
        assert!((eig.values[0] - 0.0).abs() < 1e-12);
        assert!((eig.values[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_spectrum() {
        let m = SymMatrix::from_fn(5, |i, j| if i == j { 1.0 } else { 0.0 });
        let eig = sym_eigen(&m).unwrap();
        for v in &eig.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_reconstruction_and_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[1usize, 2, 3, 8, 25, 60] {
            let m = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let eig = sym_eigen(&m).unwrap();
            let back = reconstruct(&eig);
            for i in 0..n {
                for j in 0..n {
                    assert!(
                        (back.get(i, j) - m.get(i, j)).abs() < 1e-9,
                        "n={n} entry ({i},{j})"
                    );
                }
            }
            // eigenvector orthonormality
            for a in 0..n {
                for b in 0..n {
                    let dot: f64 = (0..n)
                        .map(|k| eig.vectors[k * n + a] * eig.vectors[k * n + b])
                        .sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-9);
                }
            }
            // ascending order
            for w in eig.values.windows(2) {
                assert!(w[0] <= w[1] + 1e-12);
            }
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        // rank-1 plus identity: eigenvalues {1, 1, 1 + 3}.
        let m = SymMatrix::from_fn(3, |i, j| if i == j { 2.0 } else { 1.0 });
        let eig = sym_eigen(&m).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 1.0).abs() < 1e-12);
        assert!((eig.values[2] - 4.0).abs() < 1e-12);
    }
}
