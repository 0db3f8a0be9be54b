//! State constructors: negative binomial, geometric, excited geometric,
//! number states, and their two-mode pair-basis counterparts.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{apply_creation, choose_from, choose_n_max, tail_mass_nbs, FockVector, TruncationPolicy};
use crate::math::ln_factorial;

/// Success probability `eta` in (0, 1] and detected count `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbsParams {
    eta: f64,
    m: usize,
}

impl NbsParams {
    pub fn new(eta: f64, m: usize) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid("eta", eta, "0 < eta <= 1"));
        }
        Ok(NbsParams { eta, m })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `<N> = (M+1)/eta - 1`.
    pub fn mean_number(&self) -> f64 {
        (self.m as f64 + 1.0) / self.eta - 1.0
    }
}

/// Coefficients `C_n(eta, M)` for `n = 0..=n_max`, built with the ratio
/// recursion `C_{n+1} / C_n = sqrt((n+1)/(n+1-M)) sqrt(1-eta)` from
/// `C_M = eta^((M+1)/2)`.
pub fn nbs_coefficients(params: NbsParams, n_max: usize) -> Vec<f64> {
    let (eta, m) = (params.eta, params.m);
    let mut c = vec![0.0; n_max + 1];
    if m > n_max {
        return c;
    }
    let q = (1.0 - eta).sqrt();
    let mut amp = eta.sqrt().powi(m as i32 + 1);
    c[m] = amp;
    for n in m..n_max {
        amp *= ((n + 1) as f64 / (n + 1 - m) as f64).sqrt() * q;
        c[n + 1] = amp;
    }
    c
}

/// `|eta, M>` at a fixed truncation; the tail mass is recorded, not renormalized.
pub fn nbs_truncated(params: NbsParams, n_max: usize) -> FockVector {
    let amps = nbs_coefficients(params, n_max);
    FockVector::from_real(&amps, tail_mass_nbs(params, n_max)).expect("n_max + 1 amplitudes")
}

/// `|eta, M>` with an adaptively chosen `n_max`.
pub fn nbs(params: NbsParams, policy: &TruncationPolicy) -> Result<FockVector> {
    let (n_max, _) = choose_n_max(params, policy)?;
    Ok(nbs_truncated(params, n_max))
}

/// Geometric amplitudes `eta^(1/2) (1-eta)^(n/2)` up to `n_max`.
pub fn geometric_truncated(eta: f64, n_max: usize) -> Result<FockVector> {
    let params = NbsParams::new(eta, 0)?;
    let q = (1.0 - eta).sqrt();
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut amp = eta.sqrt();
    for _ in 0..=n_max {
        amps.push(amp);
        amp *= q;
    }
    FockVector::from_real(&amps, tail_mass_nbs(params, n_max))
}

/// `|eta>_g`.
pub fn geometric_state(eta: f64, policy: &TruncationPolicy) -> Result<FockVector> {
    let params = NbsParams::new(eta, 0)?;
    let (n_max, _) = choose_n_max(params, policy)?;
    geometric_truncated(eta, n_max)
}

/// `a†^m |eta>_g`, unnormalized, at a fixed bound.
pub fn photon_added_geometric(eta: f64, m: usize, n_max: usize) -> Result<FockVector> {
    let mut v = geometric_truncated(eta, n_max)?;
    for _ in 0..m {
        v = apply_creation(&v);
    }
    Ok(v)
}

/// `a†^m |eta>_g` normalized numerically, on the bound that `nbs(eta, m)`
/// would use.
pub fn excited_geometric(eta: f64, m: usize, policy: &TruncationPolicy) -> Result<FockVector> {
    let params = NbsParams::new(eta, m)?;
    let (n_max, tail) = choose_n_max(params, policy)?;
    let v = photon_added_geometric(eta, m, n_max)?.normalized();
    Ok(v.with_tail_bound(tail))
}

/// Closed-form normalization `eta^(M/2) / sqrt(M!)` of the photon-added
/// geometric state.
pub fn excited_geometric_prefactor(eta: f64, m: usize) -> f64 {
    (0.5 * m as f64 * eta.ln() - 0.5 * ln_factorial(m)).exp()
}

/// `|m>` truncated at `n_max`.
pub fn number_state(m: usize, n_max: usize) -> Result<FockVector> {
    FockVector::basis(m, n_max)
}

/// Two-mode state `sum_n c_n |offset + n, n>` on the pair basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBasisVector {
    amplitudes: Vec<Complex64>,
    offset_m: usize,
    tail_bound: f64,
}

impl PairBasisVector {
    pub fn new(amplitudes: Vec<Complex64>, offset_m: usize, tail_bound: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("n_max", -1.0, "at least one pair state"));
        }
        if !(tail_bound >= 0.0) {
            return Err(Error::invalid("tail_bound", tail_bound, "tail_bound >= 0"));
        }
        Ok(PairBasisVector {
            amplitudes,
            offset_m,
            tail_bound,
        })
    }

    pub fn vacuum(n_max: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_max + 1];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        PairBasisVector {
            amplitudes,
            offset_m: 0,
            tail_bound: 0.0,
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn offset_m(&self) -> usize {
        self.offset_m
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Distribution over the pair index `n`.
    pub fn pair_distribution(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Signal-mode distribution as `(photons, probability)` pairs.
    pub fn signal_distribution(&self) -> Vec<(usize, f64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| (self.offset_m + n, c.norm_sqr()))
            .collect()
    }

    pub fn normalized(&self) -> Self {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return self.clone();
        }
        PairBasisVector {
            amplitudes: self.amplitudes.iter().map(|c| c / norm).collect(),
            offset_m: self.offset_m,
            tail_bound: self.tail_bound / (norm * norm),
        }
    }

    /// `a₁†` on the signal mode: `|M+n, n> -> sqrt(M+n+1) |M+1+n, n>`. The
    /// pair index is untouched, so nothing leaves the truncated range.
    pub fn apply_signal_creation(&self) -> Self {
        let m = self.offset_m;
        PairBasisVector {
            amplitudes: self
                .amplitudes
                .iter()
                .enumerate()
                .map(|(n, c)| c * ((m + n + 1) as f64).sqrt())
                .collect(),
            offset_m: m + 1,
            tail_bound: self.tail_bound,
        }
    }

    /// Same state on `other`'s pair-index bound.
    pub fn resized_like(&self, other: &PairBasisVector) -> PairBasisVector {
        let n = other.n_max();
        let mut amps = self.amplitudes.clone();
        let cut: f64 = amps.iter().skip(n + 1).map(|c| c.norm_sqr()).sum();
        amps.resize(n + 1, Complex64::new(0.0, 0.0));
        PairBasisVector {
            amplitudes: amps,
            offset_m: self.offset_m,
            tail_bound: self.tail_bound + cut,
        }
    }

    /// The pair-index amplitudes viewed as a single-mode vector.
    pub fn as_pair_index_fock(&self) -> FockVector {
        FockVector::new(self.amplitudes.clone(), self.tail_bound).expect("non-empty")
    }
}

pub fn pair_inner_product(a: &PairBasisVector, b: &PairBasisVector) -> Result<Complex64> {
    if a.offset_m != b.offset_m {
        return Err(Error::OffsetMismatch {
            left: a.offset_m,
            right: b.offset_m,
        });
    }
    if a.n_max() != b.n_max() {
        return Err(Error::DimensionMismatch {
            left: a.n_max(),
            right: b.n_max(),
        });
    }
    Ok(a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Pair-index bound for `|eta, M>_tm`: the pair index is the signal count
/// minus `M`, so the tail is that of the single-mode NBS shifted by `M`.
pub fn choose_pair_n_max(params: NbsParams, policy: &TruncationPolicy) -> Result<(usize, f64)> {
    choose_from(32, policy, |n| tail_mass_nbs(params, n + params.m()))
}

/// `|eta, M>_tm` at a fixed pair-index bound.
pub fn two_mode_nbs_truncated(params: NbsParams, n_max: usize) -> PairBasisVector {
    let (eta, m) = (params.eta(), params.m());
    let q = (1.0 - eta).sqrt();
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut amp = eta.sqrt().powi(m as i32 + 1);
    for n in 0..=n_max {
        amps.push(Complex64::new(amp, 0.0));
        amp *= ((m + n + 1) as f64 / (n + 1) as f64).sqrt() * q;
    }
    PairBasisVector {
        amplitudes: amps,
        offset_m: m,
        tail_bound: tail_mass_nbs(params, n_max + m),
    }
}

/// `eta^((M+1)/2) sum_n C(M+n, M)^(1/2) (1-eta)^(n/2) |M+n, n>`.
pub fn two_mode_nbs(eta: f64, m: usize, policy: &TruncationPolicy) -> Result<PairBasisVector> {
    let params = NbsParams::new(eta, m)?;
    let (n_max, _) = choose_pair_n_max(params, policy)?;
    Ok(two_mode_nbs_truncated(params, n_max))
}

/// `|eta>_tm = eta^(1/2) sum_n (1-eta)^(n/2) |n, n>`.
pub fn two_mode_geometric(eta: f64, policy: &TruncationPolicy) -> Result<PairBasisVector> {
    two_mode_nbs(eta, 0, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_diag, inner_product};
    use crate::math::nb_probability;

    fn policy() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    fn fidelity(a: &FockVector, b: &FockVector) -> f64 {
        inner_product(a, b).unwrap().norm_sqr() / (a.norm_sqr() * b.norm_sqr())
    }

    #[test]
    fn params_validation() {
        assert!(NbsParams::new(0.0, 1).is_err());
        assert!(NbsParams::new(1.0 + 1e-12, 1).is_err());
        assert!(NbsParams::new(f64::NAN, 1).is_err());
        assert!(NbsParams::new(1.0, 0).is_ok());
    }

    #[test]
    fn eta_one_is_a_number_state() {
        let v = nbs(NbsParams::new(1.0, 3).unwrap(), &policy()).unwrap();
        assert_eq!(v, number_state(3, v.n_max()).unwrap());
    }

    #[test]
    fn coefficient_examples() {
        // Term-by-term evaluation of the defining sum.
        let v = nbs_coefficients(NbsParams::new(0.5, 0).unwrap(), 4);
        assert!((v[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((v[1] - 0.5).abs() < 1e-15);
        assert!((v[2] - 0.125f64.sqrt()).abs() < 1e-15);

        let v = nbs_coefficients(NbsParams::new(0.5, 1).unwrap(), 4);
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 0.5).abs() < 1e-15);
        assert!((v[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ratio_recursion_matches_log_domain_probabilities() {
        for &(eta, m) in &[(0.05, 0usize), (0.3, 7), (0.9, 40), (0.02, 25)] {
            let p = NbsParams::new(eta, m).unwrap();
            let (n_max, _) = choose_n_max(p, &policy()).unwrap();
            let c = nbs_coefficients(p, n_max);
            // The log-domain oracle loses about eps * ln((n+M)!) in relative accuracy.
            for (n, cn) in c.iter().enumerate() {
                let direct = nb_probability(n, m, eta);
                let rel = (cn * cn - direct).abs() / direct.max(1e-300);
                let tol = 64.0 * f64::EPSILON * (1.0 + crate::math::ln_factorial(n + m));
                assert!(rel <= tol, "eta={eta} m={m} n={n} rel={rel:e}");
            }
        }
    }

    #[test]
    fn normalized_within_tail() {
        let v = nbs(NbsParams::new(0.5, 0).unwrap(), &policy()).unwrap();
        assert!((v.norm_sqr() - 1.0).abs() <= v.tail_bound() + 1e-12);
        assert!((inner_product(&v, &v).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_examples() {
        let v = geometric_state(1.0, &policy()).unwrap();
        assert_eq!(v.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(v.amplitudes()[1..].iter().all(|c| c.norm() == 0.0));

        let v = geometric_state(0.5, &policy()).unwrap();
        let p = v.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15);

        let w = nbs(NbsParams::new(0.5, 0).unwrap(), &policy()).unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn excited_geometric_examples() {
        let g = geometric_state(0.5, &policy()).unwrap();
        let e = excited_geometric(0.5, 0, &policy()).unwrap();
        assert!(e.difference(&g).unwrap().norm() < 1e-15);

        let e = excited_geometric(0.5, 3, &policy()).unwrap();
        let n = nbs(NbsParams::new(0.5, 3).unwrap(), &policy()).unwrap();
        assert!(fidelity(&e, &n) >= 1.0 - 1e-10);

        let e = excited_geometric(1.0, 2, &policy()).unwrap();
        assert!(e.difference(&number_state(2, e.n_max()).unwrap()).unwrap().norm() < 1e-15);
    }

    #[test]
    fn excited_geometric_prefactor_reproduces_coefficients() {
        for &(eta, m) in &[(0.3, 1usize), (0.5, 4), (0.8, 6)] {
            let p = NbsParams::new(eta, m).unwrap();
            let (n_max, _) = choose_n_max(p, &policy()).unwrap();
            let raw = photon_added_geometric(eta, m, n_max).unwrap();
            let scaled = raw.scaled(excited_geometric_prefactor(eta, m));
            let target = nbs_truncated(p, n_max);
            assert!(scaled.difference(&target).unwrap().norm() < 1e-12, "{eta} {m}");
        }
    }

    #[test]
    fn number_state_examples() {
        let vac = number_state(0, 10).unwrap();
        assert_eq!(vac.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert_eq!(number_state(5, 10).unwrap().mean_number(), 5.0);
        assert!(number_state(11, 10).is_err());

        // The overlap with |M> is C_M^2 = eta^(M+1); only M = 0 reaches 0.999.
        for m in [0usize, 1, 4] {
            let near = nbs(NbsParams::new(0.999, m).unwrap(), &policy()).unwrap();
            let target = number_state(m, near.n_max()).unwrap();
            let f = fidelity(&near, &target);
            assert!((f - 0.999f64.powi(m as i32 + 1)).abs() < 1e-12);
        }
        let near = nbs(NbsParams::new(0.999, 0).unwrap(), &policy()).unwrap();
        assert!(fidelity(&near, &number_state(0, near.n_max()).unwrap()) >= 0.999 - 1e-12);
    }

    #[test]
    fn raising_identities() {
        for &eta in &[0.3, 0.7] {
            for m in 0..=6usize {
                let p = NbsParams::new(eta, m).unwrap();
                let p1 = NbsParams::new(eta, m + 1).unwrap();
                let (n_max, _) = choose_n_max(p1, &policy()).unwrap();
                let v = nbs_truncated(p, n_max);
                let next = nbs_truncated(p1, n_max);

                // a† |eta,M> = sqrt((M+1)/eta) |eta,M+1>
                let lhs = apply_creation(&v);
                let rhs = next.scaled(((m as f64 + 1.0) / eta).sqrt());
                let d = lhs.difference(&rhs).unwrap().norm();
                assert!(d < 1e-10 + lhs.tail_bound().sqrt(), "a† eta={eta} m={m}: {d}");

                // sqrt(N-M) |eta,M> = sqrt((1-eta)/eta) sqrt(M+1) |eta,M+1>
                let lhs = apply_diag(&v, |n| (n as f64 - m as f64).sqrt()).unwrap();
                let rhs = next.scaled(((1.0 - eta) / eta).sqrt() * (m as f64 + 1.0).sqrt());
                let d = lhs.difference(&rhs).unwrap().norm();
                assert!(d < 1e-10, "sqrt(N-M) eta={eta} m={m}: {d}");

                // sqrt(N-M) |eta,M> = sqrt(1-eta) a† |eta,M>, away from the top amplitude.
                let via_creation = apply_creation(&v).scaled((1.0 - eta).sqrt());
                let d = lhs.difference(&via_creation).unwrap().norm();
                assert!(d < 1e-10, "eta={eta} m={m}: {d}");
            }
        }
    }

    #[test]
    fn repeated_creation_matches_factorial_ratio() {
        // <eta,M+n| a†^n |eta,M> = sqrt((M+n)! / (M! eta^n))
        let eta = 0.6;
        for m in 0..=5usize {
            for k in 0..=3usize {
                let target = NbsParams::new(eta, m + k).unwrap();
                let (n_max, _) = choose_n_max(target, &policy()).unwrap();
                let mut v = nbs_truncated(NbsParams::new(eta, m).unwrap(), n_max);
                for _ in 0..k {
                    v = apply_creation(&v);
                }
                let overlap = inner_product(&nbs_truncated(target, n_max), &v).unwrap().re;
                let expected =
                    (0.5 * (ln_factorial(m + k) - ln_factorial(m) - k as f64 * eta.ln())).exp();
                assert!((overlap - expected).abs() < 1e-9 * expected, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn two_mode_examples() {
        let v = two_mode_geometric(1.0, &policy()).unwrap();
        assert_eq!(v.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(v.amplitudes()[1..].iter().all(|c| c.norm() == 0.0));

        let v = two_mode_geometric(0.5, &policy()).unwrap();
        assert!((v.amplitudes()[1].re - 0.5).abs() < 1e-15);
        let g = geometric_state(0.5, &policy()).unwrap().probabilities();
        for (a, b) in v.pair_distribution().iter().zip(&g) {
            assert!((a - b).abs() < 1e-15);
        }

        assert_eq!(two_mode_nbs(0.4, 0, &policy()).unwrap(), two_mode_geometric(0.4, &policy()).unwrap());

        let v = two_mode_nbs(1.0, 2, &policy()).unwrap();
        assert_eq!(v.offset_m(), 2);
        assert_eq!(v.amplitudes()[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn two_mode_signal_marginal_is_single_mode_nbs() {
        let v = two_mode_nbs(0.5, 2, &policy()).unwrap();
        for (photons, p) in v.signal_distribution() {
            let direct = nb_probability(photons, 2, 0.5);
            assert!((p - direct).abs() < 1e-14, "n={photons}");
        }
        assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signal_creation_shifts_the_offset() {
        let g = two_mode_geometric(0.5, &policy()).unwrap();
        let v = g.apply_signal_creation().normalized();
        let target = two_mode_nbs_truncated(NbsParams::new(0.5, 1).unwrap(), g.n_max());
        assert_eq!(v.offset_m(), 1);
        let f = pair_inner_product(&v, &target).unwrap().norm_sqr() / target.norm_sqr();
        assert!(f > 1.0 - 1e-12);
        assert!(pair_inner_product(&g, &v).is_err());
    }
}
