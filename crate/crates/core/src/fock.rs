//! Truncated single-mode Fock space.
//!
//! A [`FockVector`] stores amplitudes for `|0>..|n_max>` plus a running upper
//! bound on the probability mass lost to truncation. Operators never mutate
//! their input; each application returns a new vector whose `tail_bound` is
//! at least that of the input.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::nb_probability;
use crate::states::NbsParams;

/// Controls how far the photon-number basis is extended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub tail_eps: f64,
    pub n_hard_cap: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            tail_eps: 1e-12,
            n_hard_cap: 4096,
        }
    }
}

impl TruncationPolicy {
    pub fn new(tail_eps: f64, n_hard_cap: usize) -> Result<Self> {
        if !(tail_eps > 0.0 && tail_eps < 1.0) {
            return Err(Error::invalid("tail_eps", tail_eps, "0 < tail_eps < 1"));
        }
        if n_hard_cap < 1 {
            return Err(Error::invalid(
                "n_hard_cap",
                n_hard_cap as f64,
                "n_hard_cap >= 1",
            ));
        }
        Ok(TruncationPolicy {
            tail_eps,
            n_hard_cap,
        })
    }

    pub fn with_cap(self, n_hard_cap: usize) -> Self {
        TruncationPolicy { n_hard_cap, ..self }
    }
}

/// Amplitudes over `|0>..|n_max>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<Complex64>,
    tail_bound: f64,
}

impl FockVector {
    pub fn new(amplitudes: Vec<Complex64>, tail_bound: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("n_max", -1.0, "at least one basis state"));
        }
        if !(tail_bound >= 0.0) {
            return Err(Error::invalid("tail_bound", tail_bound, "tail_bound >= 0"));
        }
        Ok(FockVector {
            amplitudes,
            tail_bound,
        })
    }

    pub fn from_real(amplitudes: &[f64], tail_bound: f64) -> Result<Self> {
        Self::new(
            amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
            tail_bound,
        )
    }

    pub fn zeros(n_max: usize) -> Self {
        FockVector {
            amplitudes: vec![Complex64::new(0.0, 0.0); n_max + 1],
            tail_bound: 0.0,
        }
    }

    /// `|n>` in a basis truncated at `n_max`.
    pub fn basis(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::invalid("m", n as f64, "m <= n_max"));
        }
        let mut v = Self::zeros(n_max);
        v.amplitudes[n] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn with_tail_bound(mut self, tail_bound: f64) -> Self {
        self.tail_bound = tail_bound.max(0.0);
        self
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Photon-number distribution `|c_n|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn mean_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum::<f64>()
            / self.norm_sqr()
    }

    /// Index of the first nonzero amplitude, if any.
    pub fn support_start(&self) -> Option<usize> {
        self.amplitudes.iter().position(|c| *c != Complex64::new(0.0, 0.0))
    }

    pub fn normalized(&self) -> Self {
        let norm = self.norm();
        if norm == 0.0 {
            return self.clone();
        }
        self.scaled(1.0 / norm)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        FockVector {
            amplitudes: self.amplitudes.iter().map(|c| c * factor).collect(),
            tail_bound: self.tail_bound * factor * factor,
        }
    }

    /// Pads with zeros or cuts to a new bound; cut mass goes into `tail_bound`.
    pub fn resized(&self, n_max: usize) -> Self {
        let mut amplitudes = self.amplitudes.clone();
        let dropped: f64 = amplitudes
            .iter()
            .skip(n_max + 1)
            .map(|c| c.norm_sqr())
            .sum();
        amplitudes.resize(n_max + 1, Complex64::new(0.0, 0.0));
        FockVector {
            amplitudes,
            tail_bound: self.tail_bound + dropped,
        }
    }

    /// `a - b` amplitude-wise; tail bounds add.
    pub fn difference(&self, other: &FockVector) -> Result<Self> {
        check_dims(self, other)?;
        Ok(FockVector {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a - b)
                .collect(),
            tail_bound: self.tail_bound + other.tail_bound,
        })
    }

    /// Linear combination `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &FockVector, beta: f64) -> Result<Self> {
        check_dims(self, other)?;
        Ok(FockVector {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a * alpha + b * beta)
                .collect(),
            tail_bound: self.tail_bound.max(other.tail_bound),
        })
    }
}

fn check_dims(a: &FockVector, b: &FockVector) -> Result<()> {
    if a.n_max() != b.n_max() {
        return Err(Error::DimensionMismatch {
            left: a.n_max(),
            right: b.n_max(),
        });
    }
    Ok(())
}

/// `<a|b>`.
pub fn inner_product(a: &FockVector, b: &FockVector) -> Result<Complex64> {
    check_dims(a, b)?;
    Ok(a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `a v`. The amplitude that `a` would pull down from above `n_max` is
/// unknown, so the top amplitude's weight is charged to the tail bound.
pub fn apply_annihilation(v: &FockVector) -> FockVector {
    let n_max = v.n_max();
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    for n in 0..n_max {
        out[n] = v.amplitudes[n + 1] * ((n + 1) as f64).sqrt();
    }
    let top = v.amplitudes[n_max].norm_sqr() * (n_max + 1) as f64;
    FockVector {
        amplitudes: out,
        tail_bound: v.tail_bound + top,
    }
}

/// `a† v`. The amplitude shifted past `n_max` is dropped and charged to the
/// tail bound.
pub fn apply_creation(v: &FockVector) -> FockVector {
    let n_max = v.n_max();
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    for n in 1..=n_max {
        out[n] = v.amplitudes[n - 1] * (n as f64).sqrt();
    }
    let dropped = v.amplitudes[n_max].norm_sqr() * (n_max + 1) as f64;
    FockVector {
        amplitudes: out,
        tail_bound: v.tail_bound + dropped,
    }
}

/// `f(N) v`. `f` only has to be finite where `v` is nonzero.
pub fn apply_diag(v: &FockVector, f: impl Fn(usize) -> f64) -> Result<FockVector> {
    let mut out = Vec::with_capacity(v.amplitudes.len());
    for (n, c) in v.amplitudes.iter().enumerate() {
        if *c == Complex64::new(0.0, 0.0) {
            out.push(*c);
            continue;
        }
        let fn_ = f(n);
        if !fn_.is_finite() {
            return Err(Error::NonFinite { n });
        }
        out.push(c * fn_);
    }
    Ok(FockVector {
        amplitudes: out,
        tail_bound: v.tail_bound,
    })
}

/// Probability mass of `|eta, M>` above `n_max`.
///
/// When most of the mass lies below the cut, the tail is summed forward with
/// the ratio recursion and closed by a geometric remainder bound (the term
/// ratio `(n+1)(1-eta)/(n+1-M)` decreases in `n`). Otherwise the complement of
/// the head sum is returned, which is accurate because the tail is large.
pub fn tail_mass_nbs(params: NbsParams, n_max: usize) -> f64 {
    let (eta, m) = (params.eta(), params.m());
    if n_max < m {
        return 1.0;
    }
    if eta == 1.0 {
        return 0.0;
    }
    let head: f64 = (m..=n_max).map(|n| nb_probability(n, m, eta)).sum();
    if head < 0.5 {
        return (1.0 - head).max(0.0);
    }

    let q = 1.0 - eta;
    let mut n = n_max + 1;
    let mut p = nb_probability(n, m, eta);
    let mut sum = 0.0;
    for _ in 0..(1usize << 24) {
        if p == 0.0 {
            return sum;
        }
        sum += p;
        let r = (n + 1) as f64 / (n + 1 - m) as f64 * q;
        let next = p * r;
        if r < 1.0 {
            let remainder = next / (1.0 - r);
            if remainder <= 1e-17 * sum || remainder < 1e-300 {
                return sum + remainder;
            }
        }
        p = next;
        n += 1;
    }
    (1.0 - head).max(sum)
}

/// Smallest bound in the doubling sequence `M+32, 2(M+32), ...` whose tail mass
/// is below `policy.tail_eps`. Returns the bound and its tail mass.
pub fn choose_n_max(params: NbsParams, policy: &TruncationPolicy) -> Result<(usize, f64)> {
    choose_from(params.m() + 32, policy, |n| tail_mass_nbs(params, n))
}

pub(crate) fn choose_from(
    start: usize,
    policy: &TruncationPolicy,
    tail: impl Fn(usize) -> f64,
) -> Result<(usize, f64)> {
    let mut n = start.min(policy.n_hard_cap);
    loop {
        let t = tail(n);
        if t < policy.tail_eps {
            return Ok((n, t));
        }
        if n >= policy.n_hard_cap {
            return Err(Error::TruncationExhausted {
                n_max: n,
                tail: t,
                target: policy.tail_eps,
            });
        }
        n = (n * 2).min(policy.n_hard_cap);
    }
}
