//! The invariant suite behind the `verify` command and the acceptance tests.
//!
//! Each check recomputes its quantities from scratch and compares them at a
//! fixed tolerance. A check may pass and still carry a finding: a measured
//! result that differs from a claim it was asked to report on.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{atom_passage, evolution_series, fidelity};
use crate::error::Result;
use crate::expm::DenseMatrix;
use crate::fock::TruncationPolicy;
use crate::par::Exec;
use crate::phasespace::{
    displacement_matrix, grid_evaluate, hyp2f0_terminating, q_function, s_distribution, wigner,
    Distribution, GridSpec, PhaseSpacePoint, SeriesOptions,
};
use crate::squeeze::{eta_grid, squeezing_scan, variance_sample_series, Quadrature, VACUUM_VARIANCE};
use crate::states::{excited_geometric, nbs, number_state, two_mode_geometric, two_mode_nbs, NbsParams};
use crate::stats::{eta_threshold, factorial_moments, mandel_q, mandel_q_numeric};
use crate::su11::{
    commutator_residuals, ladder_residual, ladder_residual_generators, nonlinear_eigen_residual,
    su11_displace, xi_from_eta,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub finding: Option<String>,
}

impl CheckOutcome {
    /// `PASS`/`FAIL` line for terminal output.
    pub fn line(&self) -> String {
        let mut s = format!(
            "[{}] {:>2} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        );
        if let Some(f) = &self.finding {
            s.push_str(&format!(" | finding: {f}"));
        }
        s
    }
}

/// Names of checks 1 to 9.
pub const CHECK_NAMES: [&str; 9] = [
    "photon-number moments",
    "sub-Poissonian threshold",
    "SU(1,1) algebra and ladder relation",
    "three constructions agree",
    "nonlinear coherent relation",
    "squeezing critical values",
    "phase-space series",
    "Wigner negativity trend",
    "generation dynamics",
];

const ETAS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const ALGEBRA_ETAS: [f64; 3] = [0.2, 0.5, 0.8];

fn outcome(id: u8, result: Result<(bool, String, Option<String>)>) -> CheckOutcome {
    let name = CHECK_NAMES[id as usize - 1];
    match result {
        Ok((passed, detail, finding)) => CheckOutcome { id, name, passed, detail, finding },
        Err(e) => CheckOutcome { id, name, passed: false, detail: format!("error: {e}"), finding: None },
    }
}

/// Runs check `id` (1 to 9).
pub fn run_check(id: u8, exec: Exec) -> Option<CheckOutcome> {
    let result = match id {
        1 => moments(),
        2 => threshold(),
        3 => algebra(),
        4 => constructions(),
        5 => nonlinear(),
        6 => squeezing(exec),
        7 => phase_space(exec),
        8 => negativity(exec),
        9 => dynamics(exec),
        _ => return None,
    };
    Some(outcome(id, result))
}

pub fn run_all(exec: Exec) -> Vec<CheckOutcome> {
    (1..=9).filter_map(|id| run_check(id, exec)).collect()
}

fn moments() -> Result<(bool, String, Option<String>)> {
    let policy = TruncationPolicy::default();
    let mut worst: f64 = 0.0;
    for eta in ETAS {
        for m in 0..=10 {
            let params = NbsParams::new(eta, m)?;
            let v = nbs(params, &policy)?;
            let norm = v.norm_sqr();
            let (mut n1, mut n2) = (0.0, 0.0);
            for (n, p) in v.probabilities().into_iter().enumerate() {
                n1 += n as f64 * p;
                n2 += (n * n.saturating_sub(1)) as f64 * p;
            }
            let (f1, f2) = factorial_moments(params);
            let q = mandel_q_numeric(&v)?;
            worst = worst
                .max((n1 / norm - f1).abs())
                .max((n2 / norm - f2).abs() / f2.max(1.0))
                .max((q - mandel_q(params).value).abs());
        }
    }
    Ok((worst <= 1e-8, format!("max deviation {worst:.2e} over 99 states (tol 1e-8)"), None))
}

fn threshold() -> Result<(bool, String, Option<String>)> {
    let policy = TruncationPolicy::default();
    let step = 1e-4;
    let mut ok = (eta_threshold(1) - 0.585786).abs() < 1e-6;
    let mut parts = vec![format!("eta_-(1) = {:.6}", eta_threshold(1))];
    for m in [1usize, 2, 5, 10] {
        // First grid point where the closed form turns negative.
        let mut crossing = None;
        for i in 1..=10_000 {
            let eta = i as f64 * step;
            if mandel_q(NbsParams::new(eta, m)?).value < 0.0 {
                crossing = Some(eta);
                break;
            }
        }
        let Some(hi) = crossing else {
            ok = false;
            parts.push(format!("M={m}: no sign change"));
            continue;
        };
        let lo = hi - step;
        // Brute-force Q from the state on both sides of the crossing.
        let q_lo = mandel_q_numeric(&nbs(NbsParams::new(lo, m)?, &policy)?)?;
        let q_hi = mandel_q_numeric(&nbs(NbsParams::new(hi, m)?, &policy)?)?;
        let e = eta_threshold(m);
        let m_ok = q_lo > 0.0 && q_hi < 0.0 && lo <= e && e <= hi;
        ok &= m_ok;
        parts.push(format!("M={m}: sign change in [{lo:.4}, {hi:.4}], eta_- = {e:.6}"));
    }
    Ok((ok, parts.join("; "), None))
}

fn algebra() -> Result<(bool, String, Option<String>)> {
    let policy = TruncationPolicy::default();
    let mut comm: f64 = 0.0;
    let mut ladder: f64 = 0.0;
    for m in 0..=6 {
        for eta in ALGEBRA_ETAS {
            let params = NbsParams::new(eta, m)?;
            let v = nbs(params, &policy)?;
            for r in commutator_residuals(&v, m)? {
                comm = comm.max(r);
            }
            ladder = ladder
                .max(ladder_residual(params, &policy)?)
                .max(ladder_residual_generators(params, &policy)?);
        }
    }
    let ok = comm <= 1e-10 && ladder <= 1e-10;
    Ok((ok, format!("commutator residual {comm:.2e}, ladder residual {ladder:.2e} (tol 1e-10)"), None))
}

fn constructions() -> Result<(bool, String, Option<String>)> {
    let policy = TruncationPolicy::default();
    let mut worst: f64 = 0.0;
    for m in 0..=6 {
        for eta in ALGEBRA_ETAS {
            let direct = nbs(NbsParams::new(eta, m)?, &policy)?;
            let displaced = su11_displace(xi_from_eta(eta), m, &policy)?;
            let excited = excited_geometric(eta, m, &policy)?;
            for f in [
                fidelity(&direct, &displaced)?,
                fidelity(&direct, &excited)?,
                fidelity(&excited, &displaced)?,
            ] {
                worst = worst.max(1.0 - f);
            }
        }
    }
    Ok((worst <= 1e-10, format!("max infidelity {worst:.2e} (tol 1e-10)"), None))
}

fn nonlinear() -> Result<(bool, String, Option<String>)> {
    let policy = TruncationPolicy::default();
    let mut worst: f64 = 0.0;
    let mut geometric: f64 = 0.0;
    for m in 0..=6 {
        for eta in ALGEBRA_ETAS {
            let r = nonlinear_eigen_residual(NbsParams::new(eta, m)?, &policy)?;
            worst = worst.max(r);
            if m == 0 {
                geometric = geometric.max(r);
            }
        }
    }
    Ok((
        worst <= 1e-8,
        format!("max residual {worst:.2e} (tol 1e-8); phase-operator case M=0: {geometric:.2e}"),
        None,
    ))
}

/// Y squeezing is required up to this `M`; squeezing beyond it is reported as a finding.
const Y_CLAIM_CUTOFF: usize = 31;

fn squeezing(exec: Exec) -> Result<(bool, String, Option<String>)> {
    let etas = eta_grid(0.01, 0.999, 1e-3)?;
    let policy = TruncationPolicy::default().with_cap(1 << 17);
    let ms: Vec<usize> = (1..=40).collect();
    let table = squeezing_scan(&ms, &etas, &policy, exec)?;
    let x_onset = table.first_squeezed(Quadrature::X);
    let x_ok = table
        .summaries
        .iter()
        .all(|s| s.squeezed(Quadrature::X) == (s.m >= 7));
    let y_low_ok = table
        .summaries
        .iter()
        .filter(|s| s.m <= Y_CLAIM_CUTOFF)
        .all(|s| s.squeezed(Quadrature::Y));
    let y_high: Vec<_> = table
        .summaries
        .iter()
        .filter(|s| s.m > Y_CLAIM_CUTOFF && s.squeezed(Quadrature::Y))
        .collect();

    let mut detail = format!(
        "X onset at M={} (no X squeezing for M<=6, present for M=7..40); Y squeezed for every M<=31",
        x_onset.map_or("none".to_string(), |m| m.to_string())
    );
    let mut finding = None;
    let mut ok = x_ok && x_onset == Some(7) && y_low_ok;
    if y_high.is_empty() {
        detail.push_str("; no Y squeezing for M=32..40");
    } else {
        // Recompute each reported minimum through the binomial-series moments.
        let mut worst: f64 = 0.0;
        for s in &y_high {
            let other = variance_sample_series(NbsParams::new(s.eta_min_y, s.m)?, &policy)?;
            worst = worst.max((other.var_y - s.min_var_y).abs());
        }
        ok &= worst < 1e-8;
        let first = y_high[0];
        let last = y_high[y_high.len() - 1];
        finding = Some(format!(
            "Y squeezing persists for M={}..{}: e.g. M={} min Var(Y)={:.6} at eta={:.3}, \
             squeezed for eta in [{:.3}, {:.4}]; no Y cutoff at M=31 \
             (two moment routes agree to {:.1e})",
            first.m,
            last.m,
            last.m,
            last.min_var_y,
            last.eta_min_y,
            last.y_regions.first().map_or(f64::NAN, |r| r.0),
            last.y_regions.first().map_or(f64::NAN, |r| r.1),
            worst
        ));
        if last.min_var_y >= VACUUM_VARIANCE {
            ok = false;
        }
    }
    Ok((ok, detail, finding))
}

fn phase_space(exec: Exec) -> Result<(bool, String, Option<String>)> {
    let opts = SeriesOptions::default();
    let policy = TruncationPolicy::default();
    let mut parts = Vec::new();
    let mut ok = true;

    // chi_11 against exp(beta a† - beta* a) on a truncated space.
    let mut sign_err: f64 = 0.0;
    let mut printed_err: f64 = f64::INFINITY;
    for beta in [Complex64::new(0.3, 0.0), Complex64::new(0.7, -0.4), Complex64::new(1.1, 0.9)] {
        let oracle = dense_displacement(beta, 80)[(1, 1)];
        let x = beta.norm_sqr();
        let chi = |z: f64| -beta * beta.conj() * (-0.5 * x).exp() * hyp2f0_terminating(1, 1, z);
        let recurrence = displacement_matrix(beta, 1, 1)[3];
        sign_err = sign_err.max((chi(-1.0 / x) - oracle).norm()).max((recurrence - oracle).norm());
        printed_err = printed_err.min((chi(1.0 / x) - oracle).norm());
    }
    ok &= sign_err <= 1e-10 && printed_err > 1e-3;
    parts.push(format!("chi_11 with z=-1/|beta|^2 off by {sign_err:.1e}, z=+1/|beta|^2 off by >= {printed_err:.2}"));

    let origin = PhaseSpacePoint { x: 0.0, y: 0.0 };
    let w1 = wigner(&number_state(1, 8)?, origin, &opts)?;
    ok &= (w1 + 2.0 / PI).abs() <= 1e-8;
    parts.push(format!("W_|1>(0) = {w1:.8}"));

    let mut reduction: f64 = 0.0;
    for &(eta, m) in &[(0.3, 1), (0.5, 0), (0.2, 5)] {
        let v = nbs(NbsParams::new(eta, m)?, &policy)?;
        for &(x, y) in &[(0.0, 0.0), (0.7, -1.1), (-2.0, 0.5), (3.0, 2.5)] {
            let p = PhaseSpacePoint { x, y };
            reduction = reduction
                .max((s_distribution(&v, p, -1.0, &opts)? - q_function(&v, p)).abs())
                .max((s_distribution(&v, p, 0.0, &opts)? - wigner(&v, p, &opts)?).abs());
        }
    }
    ok &= reduction <= 1e-10;
    parts.push(format!("s=-1/s=0 reductions off by {reduction:.1e}"));

    let spec = GridSpec::default();
    let q = grid_evaluate(&nbs(NbsParams::new(0.5, 1)?, &policy)?, &spec, Distribution::Q, &opts, exec)?;
    let w = grid_evaluate(&nbs(NbsParams::new(0.9, 1)?, &policy)?, &spec, Distribution::Wigner, &opts, exec)?;
    let vac = grid_evaluate(&number_state(0, 4)?, &spec, Distribution::Q, &opts, exec)?;
    ok &= (q.integral - 1.0).abs() <= 1e-4 && (w.integral - 1.0).abs() <= 1e-4 && (vac.integral - 1.0).abs() <= 1e-6;
    ok &= w.values.iter().flatten().all(|v| v.abs() <= 2.0 / PI + 1e-12);
    ok &= q.values.iter().flatten().all(|v| *v >= 0.0);
    parts.push(format!(
        "grid integrals Q={:.8} W={:.8} vacuum Q={:.10}",
        q.integral, w.integral, vac.integral
    ));
    Ok((ok, parts.join("; "), None))
}

fn dense_displacement(beta: Complex64, dim: usize) -> DenseMatrix {
    DenseMatrix::from_fn(dim, |i, j| {
        if i == j + 1 {
            beta * (i as f64).sqrt()
        } else if j == i + 1 {
            -beta.conj() * (j as f64).sqrt()
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .expm()
}

/// `eta` values and window used for the negativity trend.
pub const NEGATIVITY_ETAS: [f64; 4] = [0.3, 0.5, 0.9, 1.0];

fn negativity(exec: Exec) -> Result<(bool, String, Option<String>)> {
    let policy = TruncationPolicy::default();
    let spec = GridSpec::square(4.0, 81);
    let mut minima = Vec::new();
    for eta in NEGATIVITY_ETAS {
        let v = nbs(NbsParams::new(eta, 1)?, &policy)?;
        let g = grid_evaluate(&v, &spec, Distribution::Wigner, &SeriesOptions::default(), exec)?;
        minima.push(g.min());
    }
    let ok = minima.windows(2).all(|w| w[1] <= w[0]) && minima[0] < 0.0;
    let listed: Vec<String> = NEGATIVITY_ETAS
        .iter()
        .zip(&minima)
        .map(|(e, m)| format!("eta={e}: {m:.6}"))
        .collect();
    Ok((ok, format!("min W for M=1: {}", listed.join(", ")), None))
}

fn dynamics(exec: Exec) -> Result<(bool, String, Option<String>)> {
    let policy = TruncationPolicy::default();
    let chi_ts: Vec<f64> = (0..=8).map(|i| 0.25 * i as f64).collect();
    let mut worst: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for m in [0usize, 1, 2, 4] {
        for s in evolution_series(&chi_ts, m, &policy, exec)? {
            worst = worst
                .max(1.0 - s.intensity_fidelity)
                .max(1.0 - s.parametric_fidelity)
                .max(1.0 - s.passage_fidelity);
            norm = norm.max((s.intensity_norm - 1.0).abs()).max((s.parametric_norm - 1.0).abs());
        }
    }
    let mut passage: f64 = 0.0;
    for eta in [0.2, 0.5, 0.8] {
        let geo = two_mode_geometric(eta, &policy)?;
        for m in 1..=5 {
            let branch = atom_passage(&geo, 0.05, m)?.ground_branch;
            let target = two_mode_nbs(eta, m, &policy)?.resized_like(&branch);
            passage = passage.max(1.0 - fidelity(&branch, &target)?);
        }
    }
    let ok = worst <= 1e-10 && norm <= 1e-10 && passage <= 1e-10;
    Ok((
        ok,
        format!(
            "chi t in [0, 2]: max infidelity {worst:.2e}, norm drift {norm:.2e}; atom passage infidelity {passage:.2e}"
        ),
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_checks_pass() {
        for id in [1, 2, 3, 4, 5, 9] {
            let o = run_check(id, Exec::Parallel).unwrap();
            assert!(o.passed, "{}", o.line());
        }
        assert!(run_check(10, Exec::Parallel).is_none());
    }

    #[test]
    fn line_format() {
        let o = CheckOutcome { id: 6, name: "x", passed: true, detail: "d".into(), finding: Some("f".into()) };
        assert_eq!(o.line(), "[PASS]  6 x: d | finding: f");
    }
}
