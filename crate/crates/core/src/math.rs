//! Log-domain combinatorics shared by the coefficient builders.

use std::sync::OnceLock;

const TABLE_LEN: usize = 1 << 16;

fn table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_LEN);
        let mut acc = 0.0f64;
        t.push(0.0);
        for i in 1..TABLE_LEN {
            acc += (i as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`, tabulated below 65536 and Stirling beyond.
pub fn ln_factorial(n: usize) -> f64 {
    if n < TABLE_LEN {
        return table()[n];
    }
    let x = n as f64 + 1.0;
    // Stirling series for ln Γ(x); the truncation error is far below 1e-16 here.
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
}

/// `ln C(n, k)`; callers guarantee `k <= n`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Negative binomial photon probability `C(n, m) eta^(m+1) (1-eta)^(n-m)`.
pub fn nb_probability(n: usize, m: usize, eta: f64) -> f64 {
    if n < m {
        return 0.0;
    }
    if eta == 1.0 {
        return if n == m { 1.0 } else { 0.0 };
    }
    let ln_p = ln_binomial(n, m) + (m as f64 + 1.0) * eta.ln() + (n - m) as f64 * (-eta).ln_1p();
    ln_p.exp()
}
