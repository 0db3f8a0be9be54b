//! Quadrature variances of `X = (a + a†)/2` and `Y = (a - a†)/2i` and scans
//! of the squeezing regions over `(M, eta)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{choose_n_max, FockVector, TruncationPolicy};
use crate::math::ln_binomial;
use crate::par::{try_map_indexed, Exec};
use crate::states::{nbs, NbsParams};

/// Vacuum variance of either quadrature.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// Imaginary parts of `<a>` and `<a^2>` above this are rejected.
pub const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceSample {
    pub eta: f64,
    pub m: usize,
    pub mean_a: f64,
    pub mean_a2: f64,
    pub var_x: f64,
    pub var_y: f64,
}

/// `(<a>, <a^2>)` from the amplitudes, normalized by the state norm.
pub fn field_moments(state: &FockVector) -> (Complex64, Complex64) {
    let c = state.amplitudes();
    let mut a1 = Complex64::new(0.0, 0.0);
    let mut a2 = Complex64::new(0.0, 0.0);
    for n in 0..c.len() {
        if n + 1 < c.len() {
            a1 += c[n].conj() * c[n + 1] * ((n + 1) as f64).sqrt();
        }
        if n + 2 < c.len() {
            a2 += c[n].conj() * c[n + 2] * (((n + 1) * (n + 2)) as f64).sqrt();
        }
    }
    let norm = state.norm_sqr();
    (a1 / norm, a2 / norm)
}

/// `(<a>, <a^2>)` of `|eta, M>` from the binomial series, summed in log
/// domain up to `n_max`.
pub fn field_moments_series(params: NbsParams, n_max: usize) -> (f64, f64) {
    let eta = params.eta();
    if eta == 1.0 {
        return (0.0, 0.0);
    }
    let m = params.m();
    let mf = m as f64;
    let (ln_eta, ln_q) = (eta.ln(), (1.0 - eta).ln());
    let mut a1 = 0.0;
    let mut a2 = 0.0;
    for n in m..=n_max {
        let nf = n as f64;
        let base = (mf + 1.0) * ln_eta - mf * ln_q + 0.5 * ln_binomial(n, m);
        if n < n_max {
            a1 += (base
                + 0.5 * ln_binomial(n + 1, m)
                + (nf + 0.5) * ln_q
                + 0.5 * (nf + 1.0).ln())
            .exp();
        }
        if n + 1 < n_max {
            a2 += (base
                + 0.5 * ln_binomial(n + 2, m)
                + (nf + 1.0) * ln_q
                + 0.5 * ((nf + 2.0) * (nf + 1.0)).ln())
            .exp();
        }
    }
    (a1, a2)
}

/// `(Var X, Var Y)` for a state whose `<a>` and `<a^2>` are real.
pub fn quadrature_variances(state: &FockVector) -> Result<(f64, f64)> {
    let (a1, a2) = field_moments(state);
    let imag = a1.im.abs().max(a2.im.abs());
    if imag > IMAG_TOL {
        return Err(Error::ComplexMoment { imag });
    }
    let n = state.mean_number();
    Ok(variances_from(n, a1.re, a2.re))
}

fn variances_from(n: f64, a1: f64, a2: f64) -> (f64, f64) {
    let var_x = 0.25 + 0.5 * (n + a2 - 2.0 * a1 * a1);
    let var_y = 0.25 + 0.5 * (n - a2);
    (var_x, var_y)
}

pub fn variance_sample(params: NbsParams, policy: &TruncationPolicy) -> Result<VarianceSample> {
    let state = nbs(params, policy)?;
    let (a1, a2) = field_moments(&state);
    let (var_x, var_y) = quadrature_variances(&state)?;
    Ok(VarianceSample {
        eta: params.eta(),
        m: params.m(),
        mean_a: a1.re,
        mean_a2: a2.re,
        var_x,
        var_y,
    })
}

/// The same sample with moments from [`field_moments_series`].
pub fn variance_sample_series(params: NbsParams, policy: &TruncationPolicy) -> Result<VarianceSample> {
    let (n_max, _) = choose_n_max(params, policy)?;
    let (a1, a2) = field_moments_series(params, n_max);
    let (var_x, var_y) = variances_from(params.mean_number(), a1, a2);
    Ok(VarianceSample {
        eta: params.eta(),
        m: params.m(),
        mean_a: a1,
        mean_a2: a2,
        var_x,
        var_y,
    })
}

/// Which quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quadrature {
    X,
    Y,
}

impl VarianceSample {
    pub fn variance(&self, q: Quadrature) -> f64 {
        match q {
            Quadrature::X => self.var_x,
            Quadrature::Y => self.var_y,
        }
    }
}

/// Per-`M` summary of a scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub m: usize,
    pub min_var_x: f64,
    pub eta_min_x: f64,
    pub min_var_y: f64,
    pub eta_min_y: f64,
    /// Intervals of `eta` with `Var X < 1/4`, endpoints refined by bisection.
    pub x_regions: Vec<(f64, f64)>,
    pub y_regions: Vec<(f64, f64)>,
}

impl ScanSummary {
    pub fn squeezed(&self, q: Quadrature) -> bool {
        match q {
            Quadrature::X => self.min_var_x < VACUUM_VARIANCE,
            Quadrature::Y => self.min_var_y < VACUUM_VARIANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    /// Row-major: all `eta` for the first `M`, then the next.
    pub samples: Vec<VarianceSample>,
    pub summaries: Vec<ScanSummary>,
}

impl ScanTable {
    /// Smallest scanned `M` with squeezing in `q`.
    pub fn first_squeezed(&self, q: Quadrature) -> Option<usize> {
        self.summaries.iter().find(|s| s.squeezed(q)).map(|s| s.m)
    }

    /// Largest scanned `M` with squeezing in `q`.
    pub fn last_squeezed(&self, q: Quadrature) -> Option<usize> {
        self.summaries.iter().rev().find(|s| s.squeezed(q)).map(|s| s.m)
    }
}

/// `eta` in `[lo, hi]` with spacing at most `step`, both ends included.
pub fn eta_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi <= 1.0 && lo < hi && step > 0.0) {
        return Err(Error::invalid("eta grid", step, "0 < lo < hi <= 1 and step > 0"));
    }
    let count = ((hi - lo) / step - 1e-9).ceil() as usize;
    Ok((0..=count).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect())
}

const BISECTION_STEPS: usize = 30;

/// Evaluates the variances on `m_values x etas` and summarizes each `M`.
pub fn squeezing_scan(
    m_values: &[usize],
    etas: &[f64],
    policy: &TruncationPolicy,
    exec: Exec,
) -> Result<ScanTable> {
    let params = m_values
        .iter()
        .flat_map(|&m| etas.iter().map(move |&eta| NbsParams::new(eta, m)))
        .collect::<Result<Vec<_>>>()?;
    let samples = try_map_indexed(exec, params.len(), |i| variance_sample(params[i], policy))?;
    let summaries = try_map_indexed(exec, m_values.len(), |j| {
        let row = &samples[j * etas.len()..(j + 1) * etas.len()];
        summarize(m_values[j], row, policy)
    })?;
    Ok(ScanTable { samples, summaries })
}

fn summarize(m: usize, row: &[VarianceSample], policy: &TruncationPolicy) -> Result<ScanSummary> {
    let argmin = |q: Quadrature| {
        row.iter()
            .min_by(|a, b| a.variance(q).total_cmp(&b.variance(q)))
            .copied()
    };
    let (mx, my) = match (argmin(Quadrature::X), argmin(Quadrature::Y)) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(Error::invalid("eta grid", 0.0, "at least one eta")),
    };
    Ok(ScanSummary {
        m,
        min_var_x: mx.var_x,
        eta_min_x: mx.eta,
        min_var_y: my.var_y,
        eta_min_y: my.eta,
        x_regions: regions(m, row, Quadrature::X, policy)?,
        y_regions: regions(m, row, Quadrature::Y, policy)?,
    })
}

fn regions(
    m: usize,
    row: &[VarianceSample],
    q: Quadrature,
    policy: &TruncationPolicy,
) -> Result<Vec<(f64, f64)>> {
    let below = |s: &VarianceSample| s.variance(q) < VACUUM_VARIANCE;
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    for (i, s) in row.iter().enumerate() {
        match (start, below(s)) {
            (None, true) => {
                start = Some(if i == 0 { s.eta } else { crossing(m, row[i - 1].eta, s.eta, q, policy)? });
            }
            (Some(a), false) => {
                out.push((a, crossing(m, row[i - 1].eta, s.eta, q, policy)?));
                start = None;
            }
            _ => {}
        }
    }
    if let (Some(a), Some(last)) = (start, row.last()) {
        out.push((a, last.eta));
    }
    Ok(out)
}

/// Root of `Var - 1/4` between two grid points that straddle it.
fn crossing(m: usize, lo: f64, hi: f64, q: Quadrature, policy: &TruncationPolicy) -> Result<f64> {
    let f = |eta: f64| -> Result<f64> {
        Ok(variance_sample(NbsParams::new(eta, m)?, policy)?.variance(q) - VACUUM_VARIANCE)
    };
    let (mut a, mut b) = (lo, hi);
    let fa = f(a)?;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (a + b);
        if (f(mid)? < 0.0) == (fa < 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{geometric_state, number_state};

    fn p(eta: f64, m: usize) -> NbsParams {
        NbsParams::new(eta, m).unwrap()
    }

    #[test]
    fn number_states_have_no_coherence() {
        for m in 0..6 {
            let v = number_state(m, m + 5).unwrap();
            let (a1, a2) = field_moments(&v);
            assert_eq!((a1.norm(), a2.norm()), (0.0, 0.0));
            let expected = (2 * m + 1) as f64 / 4.0;
            assert_eq!(quadrature_variances(&v).unwrap(), (expected, expected));
        }
        let s = variance_sample(p(1.0, 5), &TruncationPolicy::default()).unwrap();
        assert!((s.var_x - 2.75).abs() < 1e-12 && (s.var_y - 2.75).abs() < 1e-12);
    }

    #[test]
    fn near_vacuum_geometric_state() {
        let v = geometric_state(0.999_999, &TruncationPolicy::default()).unwrap();
        let (a1, a2) = field_moments(&v);
        assert!(a1.norm() < 2e-3 && a2.norm() < 2e-6);
        let (vx, vy) = quadrature_variances(&v).unwrap();
        assert!((vx - 0.25).abs() < 1e-5 && (vy - 0.25).abs() < 1e-5);
    }

    #[test]
    fn coefficient_and_series_moments_agree() {
        let policy = TruncationPolicy::default();
        for i in 1..=9 {
            let eta = i as f64 / 10.0;
            for m in 0..=10 {
                let a = variance_sample(p(eta, m), &policy).unwrap();
                let b = variance_sample_series(p(eta, m), &policy).unwrap();
                assert!((a.mean_a - b.mean_a).abs() < 1e-8, "{eta} {m}");
                assert!((a.mean_a2 - b.mean_a2).abs() < 1e-8, "{eta} {m}");
            }
        }
        // Geometric state: <a> = sqrt(eta) sum_n sqrt(n+1) (1-eta)^(n+1/2) sqrt(eta).
        let eta = 0.5f64;
        let direct: f64 = (0..200)
            .map(|n| eta * ((n + 1) as f64).sqrt() * (1.0 - eta).powf(n as f64 + 0.5))
            .sum();
        let (a1, _) = field_moments_series(p(eta, 0), 200);
        assert!((a1 - direct).abs() < 1e-13);
    }

    #[test]
    fn complex_moments_are_rejected() {
        let c = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), Complex64::new(0.0, 0.0)];
        let v = FockVector::new(c, 0.0).unwrap();
        assert!(matches!(quadrature_variances(&v), Err(Error::ComplexMoment { .. })));
    }

    #[test]
    fn eta_grid_spacing() {
        let g = eta_grid(0.01, 0.999, 1e-3).unwrap();
        assert_eq!(g.first(), Some(&0.01));
        assert!((g.last().unwrap() - 0.999).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] - w[0] <= 1e-3 + 1e-15));
        assert!(eta_grid(0.5, 0.2, 0.1).is_err());
    }

    #[test]
    fn scan_respects_heisenberg_and_number_state_column() {
        let etas: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
        let ms: Vec<usize> = (0..=12).collect();
        let t = squeezing_scan(&ms, &etas, &TruncationPolicy::default(), Exec::Parallel).unwrap();
        assert_eq!(t.samples.len(), ms.len() * etas.len());
        for s in &t.samples {
            assert!(s.var_x > 0.0 && s.var_y > 0.0);
            assert!(s.var_x * s.var_y >= 1.0 / 16.0 - 1e-12, "{s:?}");
            if s.eta == 1.0 {
                let expected = (2 * s.m + 1) as f64 / 4.0;
                assert!((s.var_x - expected).abs() < 1e-12 && (s.var_y - expected).abs() < 1e-12);
            }
        }
        let seq = squeezing_scan(&ms, &etas, &TruncationPolicy::default(), Exec::Sequential).unwrap();
        assert_eq!(seq, t);
    }

    #[test]
    fn x_squeezing_starts_at_seven() {
        let etas = eta_grid(0.01, 0.999, 1e-3).unwrap();
        let policy = TruncationPolicy::default().with_cap(1 << 16);
        let ms: Vec<usize> = (1..=10).collect();
        let t = squeezing_scan(&ms, &etas, &policy, Exec::Parallel).unwrap();
        assert_eq!(t.first_squeezed(Quadrature::X), Some(7));
        for s in &t.summaries {
            assert_eq!(s.squeezed(Quadrature::X), s.m >= 7, "M={}", s.m);
            for &(a, b) in &s.x_regions {
                assert!(a < b);
                let mid = variance_sample(p(0.5 * (a + b), s.m), &policy).unwrap();
                assert!(mid.var_x < 0.25);
            }
        }
    }
}
