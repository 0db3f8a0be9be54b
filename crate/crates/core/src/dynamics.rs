//! Generation of `|eta, M>` by evolution, in the interaction picture.
//!
//! The single-mode scheme applies `exp(chi t (K+ - K-))` to `|M>`. The
//! two-mode scheme runs a non-degenerate parametric amplifier from `|0,0>`
//! and then adds `M` signal photons through a first-order atom passage. Two
//! mode states stay on the pair basis `|M+n, n>` throughout.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expm::{expm_multiply_complex, Tridiagonal};
use crate::fock::{inner_product, FockVector, TruncationPolicy};
use crate::par::{try_map_indexed, Exec};
use crate::states::{
    choose_pair_n_max, nbs, pair_inner_product, two_mode_geometric, two_mode_nbs, NbsParams,
    PairBasisVector,
};
use crate::su11::{eta_from_xi, su11_displace, EXPM_TOL};

/// Largest `g t` accepted by [`atom_passage`].
pub const MAX_GT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSpec {
    pub chi_t: f64,
    pub m: usize,
    pub policy: TruncationPolicy,
}

impl EvolutionSpec {
    pub fn new(chi_t: f64, m: usize, policy: TruncationPolicy) -> Result<Self> {
        check_chi_t(chi_t)?;
        Ok(EvolutionSpec { chi_t, m, policy })
    }

    /// `1 - tanh^2(chi t)`.
    pub fn eta(&self) -> f64 {
        eta_from_xi(self.chi_t)
    }
}

fn check_chi_t(chi_t: f64) -> Result<()> {
    if chi_t >= 0.0 && chi_t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("chi_t", chi_t, "finite chi_t >= 0"))
    }
}

/// `exp(chi t (sqrt(N-M) a† - a sqrt(N-M)))|M>`.
pub fn evolve_intensity_dependent(spec: &EvolutionSpec) -> Result<FockVector> {
    check_chi_t(spec.chi_t)?;
    su11_displace(spec.chi_t, spec.m, &spec.policy)
}

/// `xi (a₁†a₂† - a₁a₂)` on the pair basis with offset `m`:
/// `<M+n+1, n+1| a₁†a₂† |M+n, n> = sqrt((M+n+1)(n+1))`.
pub fn pair_generator(m: usize, n_max: usize) -> Tridiagonal {
    Tridiagonal::antisymmetric(
        (0..n_max)
            .map(|n| (((m + n + 1) * (n + 1)) as f64).sqrt())
            .collect(),
    )
}

/// `exp(chi t (a₁†a₂† - a₁a₂))` applied to a pair-basis state, on a work
/// space of twice its bound. Fails when the work-space edge holds more than
/// `leak_tol`.
pub fn evolve_pair(state: &PairBasisVector, chi_t: f64, leak_tol: f64) -> Result<PairBasisVector> {
    if !chi_t.is_finite() {
        return Err(Error::invalid("chi_t", chi_t, "finite chi_t"));
    }
    let n_max = state.n_max();
    let n_work = 2 * n_max.max(1);
    let mut start = state.amplitudes().to_vec();
    start.resize(n_work + 1, Complex64::new(0.0, 0.0));
    let out = expm_multiply_complex(&pair_generator(state.offset_m(), n_work), chi_t, &start, EXPM_TOL);
    let edge = out[n_work].norm_sqr();
    if edge > leak_tol {
        return Err(Error::Leakage { n_max: n_work, leak: edge });
    }
    let cut: f64 = out[n_max + 1..].iter().map(|c| c.norm_sqr()).sum();
    PairBasisVector::new(out[..=n_max].to_vec(), state.offset_m(), state.tail_bound() + cut)
}

/// `exp(chi t (a₁†a₂† - a₁a₂))|0,0>`, truncated at the adaptive bound of the
/// target two-mode geometric state.
pub fn evolve_parametric(chi_t: f64, policy: &TruncationPolicy) -> Result<PairBasisVector> {
    check_chi_t(chi_t)?;
    let params = NbsParams::new(eta_from_xi(chi_t), 0)?;
    let (n_max, _) = choose_pair_n_max(params, policy)?;
    evolve_pair(&PairBasisVector::vacuum(n_max), chi_t, policy.tail_eps)
}

/// Outcome of sending an excited atom through the cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomPassage {
    /// Field state given the atom is found in `|g>`: `(a₁†)^M psi`, normalized.
    pub ground_branch: PairBasisVector,
    /// Weight of the unchanged branch `psi (x) |e>` after normalizing the
    /// first-order state.
    pub excited_weight: f64,
}

/// First-order atom passage with `m_photon`-photon emission into the signal
/// mode.
pub fn atom_passage(state: &PairBasisVector, g_t: f64, m_photon: usize) -> Result<AtomPassage> {
    if !(g_t > 0.0 && g_t <= MAX_GT) {
        return Err(Error::invalid("g_t", g_t, "0 < g_t <= 0.1"));
    }
    if m_photon < 1 {
        return Err(Error::invalid("m_photon", m_photon as f64, "m_photon >= 1"));
    }
    let mut raised = state.clone();
    for _ in 0..m_photon {
        raised = raised.apply_signal_creation();
    }
    let kept = state.norm_sqr();
    let emitted = g_t * g_t * raised.norm_sqr();
    Ok(AtomPassage {
        ground_branch: raised.normalized(),
        excited_weight: kept / (kept + emitted),
    })
}

/// States with an inner product.
pub trait Overlap {
    fn overlap(&self, other: &Self) -> Result<Complex64>;
    fn norm_squared(&self) -> f64;
}

impl Overlap for FockVector {
    /// Vectors with different bounds are compared on the larger one.
    fn overlap(&self, other: &Self) -> Result<Complex64> {
        let n = self.n_max().max(other.n_max());
        inner_product(&self.resized(n), &other.resized(n))
    }

    fn norm_squared(&self) -> f64 {
        self.norm_sqr()
    }
}

impl Overlap for PairBasisVector {
    fn overlap(&self, other: &Self) -> Result<Complex64> {
        pair_inner_product(self, other)
    }

    fn norm_squared(&self) -> f64 {
        self.norm_sqr()
    }
}

/// `|<a|b>|^2 / (<a|a> <b|b>)`.
pub fn fidelity<S: Overlap>(a: &S, b: &S) -> Result<f64> {
    let denom = a.norm_squared() * b.norm_squared();
    if !(denom > 0.0) {
        return Err(Error::invalid("norm", denom, "nonzero states"));
    }
    Ok(a.overlap(b)?.norm_sqr() / denom)
}

/// One point of the fidelity-versus-time curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionSample {
    pub chi_t: f64,
    pub eta: f64,
    pub m: usize,
    /// Single-mode evolution against `|eta, M>`.
    pub intensity_fidelity: f64,
    pub intensity_norm: f64,
    /// Parametric amplifier against `|eta>_tm`.
    pub parametric_fidelity: f64,
    pub parametric_norm: f64,
    /// Conditional state after an `M`-photon passage against `|eta, M>_tm`;
    /// equals `parametric_fidelity` when `M = 0`.
    pub passage_fidelity: f64,
}

/// Fixed `g t` used when the passage is part of a series.
pub const SERIES_GT: f64 = 0.05;

pub fn evolution_sample(chi_t: f64, m: usize, policy: &TruncationPolicy) -> Result<EvolutionSample> {
    let spec = EvolutionSpec::new(chi_t, m, *policy)?;
    let eta = spec.eta();
    let single = evolve_intensity_dependent(&spec)?;
    let target = nbs(NbsParams::new(eta, m)?, policy)?;
    let pair = evolve_parametric(chi_t, policy)?;
    let geometric = two_mode_geometric(eta, policy)?;
    let parametric_fidelity = fidelity(&pair, &geometric.resized_like(&pair))?;
    let passage_fidelity = if m == 0 {
        parametric_fidelity
    } else {
        let branch = atom_passage(&pair, SERIES_GT, m)?.ground_branch;
        let target = two_mode_nbs(eta, m, policy)?;
        fidelity(&branch, &target.resized_like(&branch))?
    };
    Ok(EvolutionSample {
        chi_t,
        eta,
        m,
        intensity_fidelity: fidelity(&single, &target)?,
        intensity_norm: single.norm_sqr(),
        parametric_fidelity,
        parametric_norm: pair.norm_sqr(),
        passage_fidelity,
    })
}

/// [`evolution_sample`] at each `chi_t`.
pub fn evolution_series(
    chi_ts: &[f64],
    m: usize,
    policy: &TruncationPolicy,
    exec: Exec,
) -> Result<Vec<EvolutionSample>> {
    try_map_indexed(exec, chi_ts.len(), |i| evolution_sample(chi_ts[i], m, policy))
}
