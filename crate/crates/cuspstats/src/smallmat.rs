//! Dense complex linear algebra for the block-reduced dimension (K <= 16).
//!
//! Partial-pivoting LU in plain Vecs; fast enough that the finite-N kernel
//! can be evaluated millions of times without FFI overhead.

use crate::C64;

/// Column-major K x K complex matrix.
#[derive(Clone, Debug)]
pub struct CMat {
    pub n: usize,
    pub a: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat {
            n,
            a: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(n);
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut y = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            let xj = x[j];
            for i in 0..n {
                y[i] += self.a[i + j * n] * xj;
            }
        }
        y
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for j in 0..n {
            for k in 0..n {
                let b = other.a[k + j * n];
                for i in 0..n {
                    out.a[i + j * n] += self.a[i + k * n] * b;
                }
            }
        }
        out
    }

    /// Max row-sum norm.
    pub fn norm_inf(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.a[i + j * n].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Option<Lu> {
        let n = self.n;
        let mut a = self.a.clone();
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut best = a[k + k * n].norm();
            for i in k + 1..n {
                let v = a[i + k * n].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return None;
            }
            piv[k] = p;
            if p != k {
                for j in 0..n {
                    a.swap(k + j * n, p + j * n);
                }
            }
            let pivot = a[k + k * n];
            for i in k + 1..n {
                let l = a[i + k * n] / pivot;
                a[i + k * n] = l;
                for j in k + 1..n {
                    let u = a[k + j * n];
                    a[i + j * n] -= l * u;
                }
            }
        }
        Some(Lu { n, a, piv })
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.a[i + j * self.n]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.a[i + j * self.n]
    }
}

pub struct Lu {
    n: usize,
    a: Vec<C64>,
    piv: Vec<usize>,
}

impl Lu {
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            for i in k + 1..n {
                let l = self.a[i + k * n];
                let xk = x[k];
                x[i] -= l * xk;
            }
        }
        for k in (0..n).rev() {
            x[k] /= self.a[k + k * n];
            for i in 0..k {
                let u = self.a[i + k * n];
                let xk = x[k];
                x[i] -= u * xk;
            }
        }
        x
    }

    /// Crude 1-norm condition estimate via a few solve probes.
    pub fn condition_estimate(&self, norm_a: f64) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for probe in 0..2 {
            let b: Vec<C64> = (0..n)
                .map(|i| {
                    let s = if (i + probe) % 2 == 0 { 1.0 } else { -1.0 };
                    C64::new(s, 0.0)
                })
                .collect();
            let x = self.solve(&b);
            let nx = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
            worst = worst.max(nx);
        }
        norm_a * worst
    }
}

pub fn solve(a: &CMat, b: &[C64]) -> Option<Vec<C64>> {
    a.lu().map(|lu| lu.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solve_roundtrip() {
        let n = 5;
        let a = CMat::from_fn(n, |i, j| {
            C64::new(
                ((i * 7 + j * 3) % 11) as f64 + if i == j { 10.0 } else { 0.0 },
                ((i + 2 * j) % 5) as f64 * 0.3,
            )
        });
        let x0: Vec<C64> = (0..n).map(|i| C64::new(i as f64 + 0.5, -(i as f64))).collect();
        let b = a.matvec(&x0);
        let x = solve(&a, &b).unwrap();
        for i in 0..n {
            assert!((x[i] - x0[i]).norm() < 1e-11, "component {i}");
        }
    }
}
