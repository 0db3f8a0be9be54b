//! Photon statistics of `|eta, M>`: generating function, factorial moments,
//! Mandel Q and the sub-Poissonian threshold, plus brute-force counterparts
//! computed from a state vector.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockVector, TruncationPolicy};
use crate::states::{nbs, NbsParams};

/// `G(lambda) = lambda^M (eta / (1 + lambda eta - lambda))^(M+1)`.
pub fn generating_function(lambda: f64, params: NbsParams) -> Result<f64> {
    let eta = params.eta();
    let base = 1.0 + lambda * eta - lambda;
    if !(base > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("lambda", lambda, "lambda (1 - eta) < 1"));
    }
    let m = params.m() as i32;
    Ok(lambda.powi(m) * (eta / base).powi(m + 1))
}

/// `(F(1), F(2))`.
pub fn factorial_moments(params: NbsParams) -> (f64, f64) {
    let eta = params.eta();
    let m1 = params.m() as f64 + 1.0;
    let f1 = m1 / eta - 1.0;
    let f2 = (m1 + 1.0) * m1 / (eta * eta) - 4.0 * m1 / eta + 2.0;
    (f1, f2)
}

/// Mandel Q with a flag for the vacuum case `(eta, M) = (1, 0)`, where it is
/// reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MandelQ {
    pub value: f64,
    pub vacuum: bool,
}

/// Closed-form Mandel Q, `(eta^2 - 2(M+1) eta + M + 1) / (eta (M + 1 - eta))`,
/// evaluated as the partial fractions `(1 - eta)/eta - M/(M + 1 - eta)`.
pub fn mandel_q(params: NbsParams) -> MandelQ {
    let eta = params.eta();
    let m = params.m() as f64;
    if params.m() == 0 && eta == 1.0 {
        return MandelQ { value: 0.0, vacuum: true };
    }
    let value = (1.0 - eta) / eta - m / (m + 1.0 - eta);
    MandelQ { value, vacuum: false }
}

/// `(<N^2> - <N>^2 - <N>) / <N>` summed over `|c_n|^2`.
pub fn mandel_q_numeric(state: &FockVector) -> Result<f64> {
    let norm = state.norm_sqr();
    let (mut n1, mut n2) = (0.0, 0.0);
    for (n, p) in state.probabilities().into_iter().enumerate() {
        let n = n as f64;
        n1 += n * p;
        n2 += n * n * p;
    }
    n1 /= norm;
    n2 /= norm;
    if !(n1 > 0.0) {
        return Err(Error::Vacuum);
    }
    // <N^2> - <N>^2 - <N> = F(2) - F(1)^2, which keeps the subtraction small.
    let f2 = n2 - n1;
    Ok((f2 - n1 * n1) / n1)
}

/// `eta_- = M + 1 - sqrt(M (M+1))`, written as `(M+1) / (M + 1 + sqrt(M (M+1)))`.
pub fn eta_threshold(m: usize) -> f64 {
    let m = m as f64;
    (m + 1.0) / (m + 1.0 + (m * (m + 1.0)).sqrt())
}

/// Everything the `stats` command reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub eta: f64,
    pub m: usize,
    /// `(lambda, G(lambda))` pairs.
    pub g_values: Vec<(f64, f64)>,
    pub f1: f64,
    pub f2: f64,
    pub mandel_q_closed: f64,
    pub mandel_q_numeric: f64,
    pub vacuum: bool,
    pub eta_minus: f64,
    pub n_max: usize,
    pub tail_bound: f64,
}

/// Sample points for [`StatsReport::g_values`].
pub const G_LAMBDAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

pub fn stats_report(params: NbsParams, policy: &TruncationPolicy) -> Result<StatsReport> {
    let state = nbs(params, policy)?;
    let g_values = G_LAMBDAS
        .iter()
        .map(|&l| generating_function(l, params).map(|g| (l, g)))
        .collect::<Result<Vec<_>>>()?;
    let (f1, f2) = factorial_moments(params);
    let q = mandel_q(params);
    let numeric = if q.vacuum { 0.0 } else { mandel_q_numeric(&state)? };
    Ok(StatsReport {
        eta: params.eta(),
        m: params.m(),
        g_values,
        f1,
        f2,
        mandel_q_closed: q.value,
        mandel_q_numeric: numeric,
        vacuum: q.vacuum,
        eta_minus: eta_threshold(params.m()),
        n_max: state.n_max(),
        tail_bound: state.tail_bound(),
    })
}
