//! Matrix exponentials.
//!
//! The evolution generators in this crate are real, antisymmetric and
//! tridiagonal on the truncated basis, so `exp(tA)` is orthogonal and its
//! spectrum lies on the imaginary axis inside `[-iR, iR]` with `R` the
//! Gershgorin bound. [`expm_multiply`] uses the Chebyshev expansion
//! `exp(tA) v = sum_k c_k J_k(tR) w_k` with `w_{k+1} = 2 (A/R) w_k + w_{k-1}`,
//! which needs about `tR` matrix-vector products.
//!
//! [`expm_multiply_taylor`] is the scaled Taylor action: `t` is split into
//! steps whose scaled generator has 1-norm at most [`STEP_NORM`] and each
//! step sums a Taylor series whose length comes from the a priori remainder
//! bound `theta^(m+1)/(m+1)! * e^theta`. It costs roughly ten times more and
//! is kept as an independent route. [`DenseMatrix::expm`] is plain scaling
//! and squaring for small complex matrices.

use num_complex::Complex64;

/// 1-norm of one scaled step.
pub const STEP_NORM: f64 = 4.0;

/// Real antisymmetric tridiagonal generator with `A[n+1][n] = lower[n]` and
/// `A[n][n+1] = -lower[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    lower: Vec<f64>,
}

impl Tridiagonal {
    pub fn antisymmetric(lower: Vec<f64>) -> Self {
        Tridiagonal { lower }
    }

    pub fn dim(&self) -> usize {
        self.lower.len() + 1
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Tridiagonal {
            lower: self.lower.iter().map(|x| x * factor).collect(),
        }
    }

    /// Bound on the 1-norm: each column holds at most two entries.
    pub fn norm_bound(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .map(|j| {
                let below = if j < d - 1 { self.lower[j].abs() } else { 0.0 };
                let above = if j > 0 { self.lower[j - 1].abs() } else { 0.0 };
                below + above
            })
            .fold(0.0, f64::max)
    }

    /// `out = A x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        debug_assert_eq!(x.len(), d);
        if d == 1 {
            out[0] = 0.0;
            return;
        }
        out[0] = -self.lower[0] * x[1];
        for n in 1..d - 1 {
            out[n] = self.lower[n - 1] * x[n - 1] - self.lower[n] * x[n + 1];
        }
        out[d - 1] = self.lower[d - 2] * x[d - 2];
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let d = self.dim();
        let mut m = DenseMatrix::zeros(d);
        for (n, &l) in self.lower.iter().enumerate() {
            m[(n + 1, n)] = Complex64::new(l, 0.0);
            m[(n, n + 1)] = Complex64::new(-l, 0.0);
        }
        m
    }
}

/// Taylor order needed for steps of norm `theta` so that `steps` of them
/// accumulate at most `tol` truncation error.
fn taylor_order(theta: f64, steps: usize, tol: f64) -> usize {
    let per_step = tol / steps.max(1) as f64;
    let mut term = 1.0f64;
    let e_theta = theta.exp();
    for m in 0..200 {
        term *= theta / (m + 1) as f64;
        if term * e_theta <= per_step {
            return m;
        }
    }
    200
}

/// Number of steps and Taylor order used by [`expm_multiply_taylor`].
pub fn expm_schedule(gen: &Tridiagonal, t: f64, tol: f64) -> (usize, usize) {
    let norm = gen.norm_bound() * t.abs();
    let steps = ((norm / STEP_NORM).ceil() as usize).max(1);
    let theta = norm / steps as f64;
    (steps, taylor_order(theta, steps, tol))
}

/// `exp(t A) v` by the scaled Taylor action.
pub fn expm_multiply_taylor(gen: &Tridiagonal, t: f64, v: &[f64], tol: f64) -> Vec<f64> {
    assert_eq!(v.len(), gen.dim(), "vector length must match the generator");
    if t == 0.0 {
        return v.to_vec();
    }
    let (steps, order) = expm_schedule(gen, t, tol);
    let h = t / steps as f64;
    let d = v.len();
    let mut x = v.to_vec();
    let mut term = vec![0.0; d];
    let mut next = vec![0.0; d];
    let lower = gen.lower();
    for _ in 0..steps {
        term.copy_from_slice(&x);
        for j in 1..=order {
            let scale = h / j as f64;
            if d == 1 {
                next[0] = 0.0;
            } else {
                next[0] = -lower[0] * term[1] * scale;
                for n in 1..d - 1 {
                    next[n] = (lower[n - 1] * term[n - 1] - lower[n] * term[n + 1]) * scale;
                }
                next[d - 1] = lower[d - 2] * term[d - 2] * scale;
            }
            for (xn, nn) in x.iter_mut().zip(&next) {
                *xn += nn;
            }
            std::mem::swap(&mut term, &mut next);
        }
    }
    x
}

/// `J_0(z) .. J_n(z)` for `z > 0` by Miller's backward recurrence,
/// normalized with `J_0 + 2 sum_k J_2k = 1`. Entries below `1e-300` relative
/// to the start are returned as zero.
pub fn bessel_j_sequence(z: f64, n: usize) -> Vec<f64> {
    assert!(z > 0.0, "bessel_j_sequence needs z > 0");
    let start = (n as f64).max(z + 30.0 * z.cbrt() + 60.0).ceil() as usize;
    let mut f = vec![0.0f64; start + 2];
    f[start] = 1e-300;
    for k in (1..=start).rev() {
        f[k - 1] = 2.0 * k as f64 / z * f[k] - f[k + 1];
        if f[k - 1].abs() > 1e250 {
            for x in f[k - 1..].iter_mut() {
                *x *= 1e-250;
            }
        }
    }
    let mut norm = f[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * f[k];
    }
    f.truncate(n + 1);
    f.resize(n + 1, 0.0);
    f.iter().map(|x| x / norm).collect()
}

/// Chebyshev coefficients `c_k J_k(z)` up to the point where they drop below
/// `tol * 1e-3` past the turning point `k ~ z`.
fn chebyshev_coefficients(z: f64, tol: f64) -> Vec<f64> {
    let len = (z + 30.0 * z.cbrt() + 60.0).ceil() as usize;
    let j = bessel_j_sequence(z, len);
    let cutoff = tol * 1e-3;
    let mut last = len;
    for k in (0..=len).rev() {
        if j[k].abs() > cutoff {
            last = (k + 2).min(len);
            break;
        }
    }
    j[..=last]
        .iter()
        .enumerate()
        .map(|(k, &jk)| if k == 0 { jk } else { 2.0 * jk })
        .collect()
}

/// `exp(t A) v` for a real vector by Chebyshev expansion.
pub fn expm_multiply(gen: &Tridiagonal, t: f64, v: &[f64], tol: f64) -> Vec<f64> {
    assert_eq!(v.len(), gen.dim(), "vector length must match the generator");
    let r = gen.norm_bound();
    if t == 0.0 || r == 0.0 {
        return v.to_vec();
    }
    // exp(tA) = exp(|t| sign(t) A); fold the sign into the generator.
    let sign = t.signum();
    let lower: Vec<f64> = gen.lower().iter().map(|l| l * sign / r).collect();
    let coeffs = chebyshev_coefficients(t.abs() * r, tol);
    let d = v.len();

    let apply = |x: &[f64], out: &mut [f64], prev: &[f64], two: f64| {
        // out = two * (A/R) x + prev
        if d == 1 {
            out[0] = prev[0];
            return;
        }
        out[0] = two * (-lower[0] * x[1]) + prev[0];
        for n in 1..d - 1 {
            out[n] = two * (lower[n - 1] * x[n - 1] - lower[n] * x[n + 1]) + prev[n];
        }
        out[d - 1] = two * (lower[d - 2] * x[d - 2]) + prev[d - 1];
    };

    let mut result: Vec<f64> = v.iter().map(|x| x * coeffs[0]).collect();
    if coeffs.len() == 1 {
        return result;
    }
    let zeros = vec![0.0; d];
    let mut w_prev = v.to_vec();
    let mut w = vec![0.0; d];
    apply(&w_prev, &mut w, &zeros, 1.0);
    let mut w_next = vec![0.0; d];
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        for (r, x) in result.iter_mut().zip(&w) {
            *r += c * x;
        }
        if k + 1 < coeffs.len() {
            apply(&w, &mut w_next, &w_prev, 2.0);
            std::mem::swap(&mut w_prev, &mut w);
            std::mem::swap(&mut w, &mut w_next);
        }
    }
    result
}

/// `exp(t A) v` for a complex vector, applied to real and imaginary parts.
pub fn expm_multiply_complex(gen: &Tridiagonal, t: f64, v: &[Complex64], tol: f64) -> Vec<Complex64> {
    let re: Vec<f64> = v.iter().map(|c| c.re).collect();
    let out_re = expm_multiply(gen, t, &re, tol);
    if v.iter().all(|c| c.im == 0.0) {
        return out_re.into_iter().map(|r| Complex64::new(r, 0.0)).collect();
    }
    let im: Vec<f64> = v.iter().map(|c| c.im).collect();
    let out_im = expm_multiply(gen, t, &im, tol);
    out_re
        .into_iter()
        .zip(out_im)
        .map(|(r, i)| Complex64::new(r, i))
        .collect()
}

/// Small dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    out.data[r * d + c] += a * other.data[k * d + c];
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Scaling and squaring: scale to norm <= 1/2, Taylor to 1e-17, square back.
    pub fn expm(&self) -> DenseMatrix {
        let norm = self.norm_one();
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale(0.5f64.powi(squarings as i32));
        let mut result = DenseMatrix::identity(self.dim);
        let mut term = DenseMatrix::identity(self.dim);
        for j in 1..=30 {
            term = term.matmul(&scaled).scale(1.0 / j as f64);
            result = DenseMatrix {
                dim: self.dim,
                data: result.data.iter().zip(&term.data).map(|(a, b)| a + b).collect(),
            };
            if term.norm_one() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_reference_values() {
        let j = bessel_j_sequence(1.0, 3);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        let j = bessel_j_sequence(10.0, 5);
        assert!((j[5] + 0.234_061_528_186_793_6).abs() < 1e-14);
        let j = bessel_j_sequence(100.0, 1);
        assert!((j[0] - 0.019_985_850_304_223_122).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_and_taylor_routes_agree() {
        let lower: Vec<f64> = (0..300).map(|n| (((n + 1) * (n + 1)) as f64).sqrt()).collect();
        let gen = Tridiagonal::antisymmetric(lower);
        let mut v = vec![0.0; gen.dim()];
        v[0] = 1.0;
        for t in [0.3, 1.0, -0.7] {
            let a = expm_multiply(&gen, t, &v, 1e-13);
            let b = expm_multiply_taylor(&gen, t, &v, 1e-13);
            let d: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            assert!(d < 1e-12, "t={t}: {d}");
        }
    }

    #[test]
    fn two_level_rotation() {
        // A = [[0, -w], [w, 0]] generates a rotation by w t.
        let gen = Tridiagonal::antisymmetric(vec![0.7]);
        let out = expm_multiply(&gen, 2.0, &[1.0, 0.0], 1e-14);
        assert!((out[0] - (1.4f64).cos()).abs() < 1e-14);
        assert!((out[1] - (1.4f64).sin()).abs() < 1e-14);
    }

    #[test]
    fn action_matches_dense_exponential() {
        let lower: Vec<f64> = (0..24).map(|n| ((n + 1) as f64).sqrt() * 0.9).collect();
        let gen = Tridiagonal::antisymmetric(lower);
        let mut v = vec![0.0; gen.dim()];
        v[3] = 1.0;
        let fast = expm_multiply(&gen, 1.3, &v, 1e-13);
        let taylor = expm_multiply_taylor(&gen, 1.3, &v, 1e-13);
        let dense = gen.to_dense().scale(1.3).expm();
        let cv: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let slow = dense.apply(&cv);
        for ((a, t), b) in fast.iter().zip(&taylor).zip(&slow) {
            assert!((a - b.re).abs() < 1e-12 && (t - b.re).abs() < 1e-12 && b.im.abs() < 1e-14);
        }
    }

    #[test]
    fn antisymmetric_generators_preserve_norm() {
        let lower: Vec<f64> = (0..200).map(|n| (n + 1) as f64).collect();
        let gen = Tridiagonal::antisymmetric(lower);
        let mut v = vec![0.0; gen.dim()];
        v[0] = 1.0;
        let out = expm_multiply(&gen, 0.8, &v, 1e-12);
        let norm: f64 = out.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_grows_with_norm() {
        let gen = Tridiagonal::antisymmetric(vec![1.0; 10]);
        let (s1, m1) = expm_schedule(&gen, 1.0, 1e-12);
        let (s2, m2) = expm_schedule(&gen, 100.0, 1e-12);
        assert_eq!(s1, 1);
        assert!(s2 == 50 && m2 >= m1);
    }

    #[test]
    fn dense_exponential_of_nilpotent() {
        // exp([[0,1],[0,0]]) = [[1,1],[0,1]]
        let mut m = DenseMatrix::zeros(2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let e = m.expm();
        assert!((e[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((e[(0, 1)].re - 1.0).abs() < 1e-15);
        assert!(e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn complex_action_splits_linearly() {
        let gen = Tridiagonal::antisymmetric(vec![0.5, 1.5]);
        let v = [Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0), Complex64::new(0.5, 0.0)];
        let out = expm_multiply_complex(&gen, 0.9, &v, 1e-14);
        let dense = gen.to_dense().scale(0.9).expm().apply(&v);
        for (a, b) in out.iter().zip(&dense) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
