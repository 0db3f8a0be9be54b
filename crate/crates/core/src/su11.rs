//! SU(1,1) generators `K0 = N - (M-1)/2`, `K+ = sqrt(N-M) a†`,
//! `K- = a sqrt(N-M)` acting on the subspace `n >= M`, and the ladder,
//! displacement and nonlinear-coherent characterizations of `|eta, M>`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expm::{expm_multiply_complex, Tridiagonal};
use crate::fock::{apply_annihilation, apply_creation, apply_diag, choose_n_max, FockVector, TruncationPolicy};
use crate::states::{nbs_truncated, NbsParams};

/// Tolerance handed to the exponential.
pub const EXPM_TOL: f64 = 1e-12;

/// Generators for the representation with Bargmann index `k = (M+1)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Su11Generators {
    m: usize,
}

impl Su11Generators {
    pub fn new(m: usize) -> Self {
        Su11Generators { m }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `k = (M+1)/2`.
    pub fn bargmann_index(&self) -> f64 {
        (self.m as f64 + 1.0) / 2.0
    }

    fn check_support(&self, v: &FockVector) -> Result<()> {
        match v.support_start() {
            Some(first) if first < self.m => Err(Error::SupportBelow { m: self.m, first }),
            _ => Ok(()),
        }
    }

    fn sqrt_shifted(&self) -> impl Fn(usize) -> f64 {
        let m = self.m as f64;
        move |n| (n as f64 - m).sqrt()
    }

    /// `K+ v = sqrt(N-M) a† v`.
    pub fn k_plus(&self, v: &FockVector) -> Result<FockVector> {
        self.check_support(v)?;
        apply_diag(&apply_creation(v), self.sqrt_shifted())
    }

    /// `K- v = a sqrt(N-M) v`.
    pub fn k_minus(&self, v: &FockVector) -> Result<FockVector> {
        self.check_support(v)?;
        Ok(apply_annihilation(&apply_diag(v, self.sqrt_shifted())?))
    }

    /// `K0 v = (N - (M-1)/2) v`.
    pub fn k_zero(&self, v: &FockVector) -> Result<FockVector> {
        self.check_support(v)?;
        let shift = (self.m as f64 - 1.0) / 2.0;
        apply_diag(v, |n| n as f64 - shift)
    }

    /// `<n+1|K+|n> = sqrt((n+1)(n+1-M))` for `n >= M`, zero below.
    pub fn raising_element(&self, n: usize) -> f64 {
        if n < self.m {
            0.0
        } else {
            (((n + 1) * (n + 1 - self.m)) as f64).sqrt()
        }
    }

    /// `xi (K+ - K-)` on `|0>..|n_max>`.
    pub fn displacement_generator(&self, xi: f64, n_max: usize) -> Tridiagonal {
        Tridiagonal::antisymmetric((0..n_max).map(|n| xi * self.raising_element(n)).collect())
    }
}

pub fn k_plus(v: &FockVector, m: usize) -> Result<FockVector> {
    Su11Generators::new(m).k_plus(v)
}

pub fn k_minus(v: &FockVector, m: usize) -> Result<FockVector> {
    Su11Generators::new(m).k_minus(v)
}

pub fn k_zero(v: &FockVector, m: usize) -> Result<FockVector> {
    Su11Generators::new(m).k_zero(v)
}

/// `‖(N - sqrt(1-eta) K+)|eta,M> - M|eta,M>‖`.
///
/// Every component of the left side up to `n_max` depends only on
/// amplitudes at or below `n_max`, so this is a pure rounding residual.
pub fn ladder_residual(params: NbsParams, policy: &TruncationPolicy) -> Result<f64> {
    let (n_max, _) = choose_n_max(params, policy)?;
    let v = nbs_truncated(params, n_max);
    let m = params.m();
    let gens = Su11Generators::new(m);
    let raised = gens.k_plus(&v)?;
    let number = apply_diag(&v, |n| n as f64)?;
    let lhs = number.combine(1.0, &raised, -(1.0 - params.eta()).sqrt())?;
    Ok(lhs.combine(1.0, &v, -(m as f64))?.norm())
}

/// The same identity written with the generators:
/// `‖(K0 - sqrt(1-eta) K+)|eta,M> - (M+1)/2 |eta,M>‖`.
pub fn ladder_residual_generators(params: NbsParams, policy: &TruncationPolicy) -> Result<f64> {
    let (n_max, _) = choose_n_max(params, policy)?;
    let v = nbs_truncated(params, n_max);
    let gens = Su11Generators::new(params.m());
    let lhs = gens
        .k_zero(&v)?
        .combine(1.0, &gens.k_plus(&v)?, -(1.0 - params.eta()).sqrt())?;
    Ok(lhs.combine(1.0, &v, -gens.bargmann_index())?.norm())
}

/// `‖f(N) a |eta,M> - sqrt(1-eta) |eta,M>‖` with `f(n) = sqrt(n+1-M)/(n+1)`.
///
/// The component at `n_max` would need the discarded amplitude `c_{n_max+1}`,
/// so the norm is taken over `n < n_max`.
pub fn nonlinear_eigen_residual(params: NbsParams, policy: &TruncationPolicy) -> Result<f64> {
    let (n_max, _) = choose_n_max(params, policy)?;
    let v = nbs_truncated(params, n_max);
    let m = params.m() as f64;
    let lowered = apply_annihilation(&v);
    // For n + 1 < M the lowered state vanishes, so f is never evaluated there.
    let lhs = apply_diag(&lowered, |n| (n as f64 + 1.0 - m).sqrt() / (n as f64 + 1.0))?;
    let q = (1.0 - params.eta()).sqrt();
    let residual: f64 = lhs.amplitudes()[..n_max]
        .iter()
        .zip(&v.amplitudes()[..n_max])
        .map(|(l, c)| (l - c * q).norm_sqr())
        .sum();
    Ok(residual.sqrt())
}

/// Relative residuals of `[K0,K+] = K+`, `[K0,K-] = -K-` and `[K-,K+] = 2K0`
/// on `v` with its top two components cleared, so that no product reaches
/// past the truncation.
pub fn commutator_residuals(v: &FockVector, m: usize) -> Result<[f64; 3]> {
    let g = Su11Generators::new(m);
    let n_max = v.n_max();
    if n_max < m + 2 {
        return Err(Error::invalid("n_max", n_max as f64, "n_max >= M + 2"));
    }
    let mut amps = v.amplitudes().to_vec();
    for a in amps.iter_mut().skip(n_max - 1) {
        *a = Complex64::new(0.0, 0.0);
    }
    let v = FockVector::new(amps, 0.0)?;
    let rel = |lhs: FockVector, rhs: &FockVector| -> Result<f64> {
        let scale = rhs.norm().max(f64::MIN_POSITIVE);
        Ok(lhs.difference(rhs)?.norm() / scale)
    };
    let kp = g.k_plus(&v)?;
    let km = g.k_minus(&v)?;
    let k0 = g.k_zero(&v)?;
    let c1 = g.k_zero(&kp)?.difference(&g.k_plus(&k0)?)?;
    let c2 = g.k_zero(&km)?.difference(&g.k_minus(&k0)?)?;
    let c3 = g.k_minus(&kp)?.difference(&g.k_plus(&km)?)?;
    Ok([
        rel(c1, &kp)?,
        rel(c2, &km.scaled(-1.0))?,
        rel(c3, &k0.scaled(2.0))?,
    ])
}

/// `eta = 1 - tanh^2(xi)`.
pub fn eta_from_xi(xi: f64) -> f64 {
    let c = xi.cosh();
    1.0 / (c * c)
}

/// `xi = arctanh(sqrt(1 - eta))`.
pub fn xi_from_eta(eta: f64) -> f64 {
    (1.0 - eta).sqrt().atanh()
}

/// Bound used for `exp(xi (K+ - K-))|M>`: the adaptive bound of the target
/// state `|1 - tanh^2 xi, M>`.
pub fn displacement_n_max(xi: f64, m: usize, policy: &TruncationPolicy) -> Result<usize> {
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::invalid("xi", xi, "finite xi >= 0"));
    }
    Ok(choose_n_max(NbsParams::new(eta_from_xi(xi), m)?, policy)?.0)
}

/// `exp(xi (K+ - K-)) v`, returned on `v`'s truncation.
///
/// The exponential is taken on a work space of twice the bound so that the
/// artificial reflection at the cut acts only on amplitudes of order
/// `tail^2`. Fails with [`Error::Leakage`] when the work-space edge carries
/// more than `leak_tol` weight.
pub fn su11_evolve(v: &FockVector, xi: f64, m: usize, leak_tol: f64) -> Result<FockVector> {
    if !(xi.is_finite()) {
        return Err(Error::invalid("xi", xi, "finite xi"));
    }
    let gens = Su11Generators::new(m);
    gens.check_support(v)?;
    let n_max = v.n_max();
    let n_work = 2 * n_max.max(m + 1);
    let gen = gens.displacement_generator(1.0, n_work);
    let out = expm_multiply_complex(&gen, xi, v.resized(n_work).amplitudes(), EXPM_TOL);
    let edge = out[n_work].norm_sqr();
    if edge > leak_tol {
        return Err(Error::Leakage { n_max: n_work, leak: edge });
    }
    let evolved = FockVector::new(out, v.tail_bound())?;
    Ok(evolved.resized(n_max))
}

/// `exp(xi (K+ - K-))|M>` by matrix exponential, truncated at the adaptive
/// bound of the target `|1 - tanh^2 xi, M>`.
pub fn su11_displace(xi: f64, m: usize, policy: &TruncationPolicy) -> Result<FockVector> {
    let n_max = displacement_n_max(xi, m, policy)?;
    let start = FockVector::basis(m, n_max)?;
    su11_evolve(&start, xi, m, policy.tail_eps)
}

/// Sums `exp(c B) v = sum_j c^j B^j v / j!` for a raising or lowering
/// operator `B`. Stops when a term vanishes (it left the truncated space or
/// hit the bottom of the ladder) or falls below `1e-18` of the running sum.
pub fn exp_series(
    v: &FockVector,
    c: f64,
    op: impl Fn(&FockVector) -> Result<FockVector>,
) -> Result<FockVector> {
    let mut sum = v.clone();
    let mut term = v.clone();
    for j in 1..=(4 * v.n_max() + 64) {
        term = op(&term)?.scaled(c / j as f64);
        let size = term.norm();
        if size == 0.0 {
            return Ok(sum);
        }
        sum = sum.combine(1.0, &term, 1.0)?.with_tail_bound(sum.tail_bound() + term.tail_bound());
        if size < 1e-18 * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        terms: 4 * v.n_max() + 64,
        bound: term.norm(),
    })
}

/// `eta^((M+1)/2) exp(sqrt(1-eta) K+)|M>` summed as a power series.
pub fn raising_series_state(params: NbsParams, n_max: usize) -> Result<FockVector> {
    let gens = Su11Generators::new(params.m());
    let start = FockVector::basis(params.m(), n_max)?;
    let series = exp_series(&start, (1.0 - params.eta()).sqrt(), |v| gens.k_plus(v))?;
    Ok(series.scaled(params.eta().sqrt().powi(params.m() as i32 + 1)))
}

/// `eta^(-(M+1)/2) <M| exp(xi (K+ - K-)) |M>` with `xi = arctanh sqrt(1-eta)`;
/// the vacuum-component weight of the displaced state must be
/// `eta^((M+1)/2)`, so this is 1.
pub fn displacement_prefactor_check(params: NbsParams, policy: &TruncationPolicy) -> Result<f64> {
    let m = params.m();
    let state = su11_displace(xi_from_eta(params.eta()), m, policy)?;
    let overlap: Complex64 = state.amplitudes()[m];
    Ok(overlap.re / params.eta().sqrt().powi(m as i32 + 1))
}

/// `‖exp(alpha K+ - alpha K-)|M> - exp(gamma K+) (1-gamma^2)^K0 exp(-gamma K-)|M>‖`
/// with `gamma = tanh alpha`. The left side uses the matrix exponential,
/// the right side power series and an exact diagonal.
pub fn disentangle_check(alpha: f64, m: usize, policy: &TruncationPolicy) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::invalid("alpha", alpha, "alpha >= 0"));
    }
    let lhs = su11_displace(alpha, m, policy)?;
    let n_max = lhs.n_max();
    let gens = Su11Generators::new(m);
    let gamma = alpha.tanh();
    let start = FockVector::basis(m, n_max)?;
    let lowered = exp_series(&start, -gamma, |v| gens.k_minus(v))?;
    let base = 1.0 - gamma * gamma;
    let shift = (m as f64 - 1.0) / 2.0;
    let weighted = apply_diag(&lowered, |n| base.powf(n as f64 - shift))?;
    let rhs = exp_series(&weighted, gamma, |v| gens.k_plus(v))?;
    Ok(lhs.difference(&rhs)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::inner_product;
    use crate::states::{excited_geometric, nbs};

    fn basis(n: usize, n_max: usize) -> FockVector {
        FockVector::basis(n, n_max).unwrap()
    }

    fn close(a: &FockVector, b: &FockVector, tol: f64) {
        let d = a.difference(b).unwrap().norm();
        assert!(d <= tol, "distance {d}");
    }

    fn fidelity(a: &FockVector, b: &FockVector) -> f64 {
        inner_product(a, b).unwrap().norm_sqr() / (a.norm_sqr() * b.norm_sqr())
    }

    #[test]
    fn k_plus_examples() {
        // M = 2: K+|2> = sqrt(1*3)|3>
        close(&k_plus(&basis(2, 10), 2).unwrap(), &basis(3, 10).scaled(3f64.sqrt()), 1e-15);
        // K- K+ |0;k> = 2k |0;k>
        let up = k_plus(&basis(2, 10), 2).unwrap();
        close(&k_minus(&up, 2).unwrap(), &basis(2, 10).scaled(3.0), 1e-14);
        close(&k_plus(&basis(0, 10), 0).unwrap(), &basis(1, 10), 1e-15);
    }

    #[test]
    fn k_minus_examples() {
        assert_eq!(k_minus(&basis(3, 10), 3).unwrap().norm(), 0.0);
        close(&k_minus(&basis(3, 10), 2).unwrap(), &basis(2, 10).scaled(3f64.sqrt()), 1e-15);
    }

    #[test]
    fn commutator_on_first_excited_level() {
        // [K-, K+] |1;k> = 2 K0 |1;k> = 2 (1 + k) |1;k>, M = 2, k = 3/2.
        let v = basis(3, 12);
        let a = k_minus(&k_plus(&v, 2).unwrap(), 2).unwrap();
        let b = k_plus(&k_minus(&v, 2).unwrap(), 2).unwrap();
        close(&a.difference(&b).unwrap(), &v.scaled(2.0 * 2.5), 1e-13);
    }

    #[test]
    fn commutators_hold_on_the_interior() {
        for m in 0..=6 {
            for eta in [0.2, 0.5, 0.8] {
                let v = crate::states::nbs(NbsParams::new(eta, m).unwrap(), &TruncationPolicy::default()).unwrap();
                for r in commutator_residuals(&v, m).unwrap() {
                    assert!(r < 1e-12, "{eta} {m}: {r}");
                }
            }
        }
    }

    #[test]
    fn k_zero_examples() {
        close(&k_zero(&basis(4, 10), 4).unwrap(), &basis(4, 10).scaled(2.5), 0.0);
        close(&k_zero(&basis(0, 10), 0).unwrap(), &basis(0, 10).scaled(0.5), 0.0);
        close(&k_zero(&basis(4, 10), 1).unwrap(), &basis(4, 10).scaled(4.0), 0.0);
    }

    #[test]
    fn support_below_m_is_rejected() {
        let err = k_plus(&basis(1, 10), 3).unwrap_err();
        assert_eq!(err, Error::SupportBelow { m: 3, first: 1 });
        assert!(k_minus(&basis(0, 10), 1).is_err());
    }

    #[test]
    fn matrix_elements_match_the_discrete_series() {
        // K+|n;k> = sqrt((n+1)(2k+n)) |n+1;k>
        for m in 0..5usize {
            let g = Su11Generators::new(m);
            let two_k = 2.0 * g.bargmann_index();
            for n in 0..20usize {
                let expected = (((n + 1) as f64) * (two_k + n as f64)).sqrt();
                assert!((g.raising_element(n + m) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ladder_residual_examples() {
        let p = TruncationPolicy::default();
        for m in 0..5 {
            let r = ladder_residual(NbsParams::new(1.0, m).unwrap(), &p).unwrap();
            assert!(r < 1e-14);
        }
        let params = NbsParams::new(0.5, 2).unwrap();
        let r1 = ladder_residual(params, &p).unwrap();
        let r2 = ladder_residual_generators(params, &p).unwrap();
        assert!(r1 < 1e-8 && r2 < 1e-8);
        assert!((r1 - r2).abs() < 1e-12);
    }

    #[test]
    fn nonlinear_residual_examples() {
        let p = TruncationPolicy::default();
        assert!(nonlinear_eigen_residual(NbsParams::new(1.0, 3).unwrap(), &p).unwrap() < 1e-15);
        assert!(nonlinear_eigen_residual(NbsParams::new(0.5, 0).unwrap(), &p).unwrap() < 1e-10);
        assert!(nonlinear_eigen_residual(NbsParams::new(0.3, 4).unwrap(), &p).unwrap() < 1e-8);
    }

    #[test]
    fn displacement_examples() {
        let p = TruncationPolicy::default();
        let v = su11_displace(0.0, 3, &p).unwrap();
        close(&v, &basis(3, v.n_max()), 0.0);

        let xi = 0.5f64.sqrt().atanh();
        let v = su11_displace(xi, 1, &p).unwrap();
        let target = nbs(NbsParams::new(0.5, 1).unwrap(), &p).unwrap();
        assert!(fidelity(&v, &target) >= 1.0 - 1e-10);

        for m in [0usize, 2, 5] {
            let c = displacement_prefactor_check(NbsParams::new(0.4, m).unwrap(), &p).unwrap();
            assert!((c - 1.0).abs() < 1e-10, "m={m}: {c}");
        }
    }

    #[test]
    fn raising_series_reproduces_coefficients() {
        for &(eta, m) in &[(0.2, 0usize), (0.5, 3), (0.8, 6)] {
            let params = NbsParams::new(eta, m).unwrap();
            let (n_max, _) = choose_n_max(params, &TruncationPolicy::default()).unwrap();
            let series = raising_series_state(params, n_max).unwrap();
            close(&series, &nbs_truncated(params, n_max), 1e-12);
        }
    }

    #[test]
    fn disentangle_examples() {
        let p = TruncationPolicy::default();
        assert!(disentangle_check(0.0, 2, &p).unwrap() < 1e-15);
        assert!(disentangle_check(0.5, 0, &p).unwrap() < 1e-10);
        assert!(disentangle_check(1.0, 3, &p).unwrap() < 1e-8);
    }

    #[test]
    fn eta_xi_round_trip() {
        for eta in [0.05, 0.3, 0.5, 0.99] {
            assert!((eta_from_xi(xi_from_eta(eta)) - eta).abs() < 1e-14);
        }
        assert_eq!(eta_from_xi(0.0), 1.0);
    }

    #[test]
    fn three_constructions_agree() {
        let p = TruncationPolicy::default();
        for &eta in &[0.2, 0.5, 0.8] {
            for m in 0..=6usize {
                let direct = nbs(NbsParams::new(eta, m).unwrap(), &p).unwrap();
                let excited = excited_geometric(eta, m, &p).unwrap();
                let displaced = su11_displace(xi_from_eta(eta), m, &p).unwrap();
                assert!(fidelity(&direct, &excited) >= 1.0 - 1e-10);
                assert!(fidelity(&direct, &displaced) >= 1.0 - 1e-10);
                assert!(fidelity(&excited, &displaced) >= 1.0 - 1e-10);
            }
        }
    }
}
