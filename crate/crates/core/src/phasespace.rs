//! Quasiprobability distributions on phase space.
//!
//! All three distributions come from the displaced-number-state series
//!
//! ```text
//! P(beta, s) = (2/pi) sum_k (-1)^k (1+s)^k / (1-s)^(k+1) |<beta,k|psi>|^2
//! ```
//!
//! with `s = -1` the Q function and `s = 0` the Wigner function. The overlaps
//! `<beta,k|psi> = sum_n conj(chi_nk(beta)) c_n` use displacement matrix
//! elements generated along each diagonal `n - k = d` by the three-term
//! Laguerre recurrence, which is stable for the index ranges used here.
//! [`chi_element`] evaluates single elements from the terminating `2F0` sum
//! and serves as a cross-check.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::math::ln_factorial;
use crate::par::{try_map_indexed, Exec};
use crate::states::NbsParams;

/// `beta = x + i y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub x: f64,
    pub y: f64,
}

impl PhaseSpacePoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::invalid("x", x, "finite coordinate"));
        }
        if !y.is_finite() {
            return Err(Error::invalid("y", y, "finite coordinate"));
        }
        Ok(PhaseSpacePoint { x, y })
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

impl From<Complex64> for PhaseSpacePoint {
    fn from(beta: Complex64) -> Self {
        PhaseSpacePoint { x: beta.re, y: beta.im }
    }
}

/// Terminating `2F0(-n, -k; ; z) = sum_j (-n)_j (-k)_j z^j / j!`.
pub fn hyp2f0_terminating(n: usize, k: usize, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..n.min(k) {
        let jf = j as f64;
        term *= (jf - n as f64) * (jf - k as f64) * z / (jf + 1.0);
        sum += term;
    }
    sum
}

/// `<n|D(beta)|k>` from
/// `beta^n (-beta*)^k e^(-|beta|^2/2) 2F0(-n, -k; ; -1/|beta|^2) / sqrt(n! k!)`,
/// summed term by term with log-factorials. `beta = 0` returns `delta_nk`.
pub fn chi_element(n: usize, k: usize, beta: Complex64) -> Complex64 {
    let x = beta.norm_sqr();
    if x == 0.0 {
        return if n == k { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let ln_r = 0.5 * x.ln();
    let half = 0.5 * (ln_factorial(n) + ln_factorial(k)) - 0.5 * x;
    let mut sum = 0.0;
    for j in 0..=n.min(k) {
        let ln_t = half - ln_factorial(n - j) - ln_factorial(k - j) - ln_factorial(j)
            + (n + k - 2 * j) as f64 * ln_r;
        let t = ln_t.exp();
        sum += if j % 2 == 0 { t } else { -t };
    }
    let theta = beta.arg();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::from_polar(sign * sum, theta * (n as f64 - k as f64))
}

/// `p_d = e^(-|beta|^2/2) beta^d / sqrt(d!)` for `d = 0..=d_max`.
fn diagonal_prefactors(beta: Complex64, d_max: usize) -> Vec<Complex64> {
    let mut p = Vec::with_capacity(d_max + 1);
    p.push(Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0));
    for d in 1..=d_max {
        let prev = p[d - 1];
        p.push(prev * beta / (d as f64).sqrt());
    }
    p
}

/// Normalized Laguerre values `m_j(d) = sqrt(j! d! / (j+d)!) L_j^(d)(x)` for
/// `j = 0..=j_max`.
fn laguerre_diagonal(d: usize, x: f64, j_max: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if j_max == 0 {
        return;
    }
    let df = d as f64;
    out.push((1.0 + df - x) / (1.0 + df).sqrt());
    for j in 1..j_max {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + df - x) * out[j] - (jf * (jf + df)).sqrt() * out[j - 1])
            / ((jf + 1.0) * (jf + 1.0 + df)).sqrt();
        out.push(next);
    }
}

/// `chi_nk(beta)` for `n <= n_max`, `k <= k_max`, stored column-major:
/// element `(n, k)` at `k * (n_max + 1) + n`.
pub fn displacement_matrix(beta: Complex64, n_max: usize, k_max: usize) -> Vec<Complex64> {
    let rows = n_max + 1;
    let mut out = vec![Complex64::new(0.0, 0.0); rows * (k_max + 1)];
    let x = beta.norm_sqr();
    let p = diagonal_prefactors(beta, n_max.max(k_max));
    let mut m = Vec::new();
    // Lower part n = j + d >= k = j.
    for d in 0..=n_max {
        let j_max = k_max.min(n_max - d);
        laguerre_diagonal(d, x, j_max, &mut m);
        for (j, mj) in m.iter().enumerate() {
            out[j * rows + j + d] = p[d] * *mj;
        }
    }
    // Upper part n = j < k = j + d, from chi_nk(beta) = conj(chi_kn(-beta)).
    for d in 1..=k_max {
        let j_max = n_max.min(k_max - d);
        laguerre_diagonal(d, x, j_max, &mut m);
        let pd = if d % 2 == 0 { p[d].conj() } else { -p[d].conj() };
        for (j, mj) in m.iter().enumerate() {
            out[(j + d) * rows + j] = pd * *mj;
        }
    }
    out
}

/// `D(beta)|k>` truncated at `n_max`. The tail bound is the missing norm.
pub fn displaced_number_state(beta: Complex64, k: usize, n_max: usize) -> Result<FockVector> {
    if k > n_max {
        return Err(Error::invalid("k", k as f64, "k <= n_max"));
    }
    let d = displacement_matrix(beta, n_max, k);
    let rows = n_max + 1;
    let col = d[k * rows..(k + 1) * rows].to_vec();
    let norm: f64 = col.iter().map(|c| c.norm_sqr()).sum();
    FockVector::new(col, (1.0 - norm).max(0.0))
}

/// [`displaced_number_state`] with `n_max` doubled until the missing norm is
/// below `tol`, up to `n_cap`.
pub fn displaced_number_state_adaptive(
    beta: Complex64,
    k: usize,
    tol: f64,
    n_cap: usize,
) -> Result<FockVector> {
    let r = beta.norm();
    let mut n_max = k.max(1) + (r * r + 10.0 * r) as usize + 16;
    loop {
        let v = displaced_number_state(beta, k, n_max.min(n_cap))?;
        if v.tail_bound() <= tol {
            return Ok(v);
        }
        if n_max >= n_cap {
            return Err(Error::Leakage { n_max: n_cap, leak: v.tail_bound() });
        }
        n_max *= 2;
    }
}

/// `(1/pi) |<beta|psi>|^2 / <psi|psi>`.
pub fn q_function(state: &FockVector, p: PhaseSpacePoint) -> f64 {
    let beta = p.beta();
    let coherent = diagonal_prefactors(beta, state.n_max());
    let overlap: Complex64 = coherent
        .iter()
        .zip(state.amplitudes())
        .map(|(a, c)| a.conj() * c)
        .sum();
    overlap.norm_sqr() / (PI * state.norm_sqr())
}

/// Q function of `|eta, M>` from the excited-geometric form
/// `(1/pi) eta^(M+1) e^(-|beta|^2) |beta|^(2M) |sum_n (beta sqrt(1-eta))^n / sqrt(n!)|^2 / M!`.
pub fn q_function_nbs_closed(params: NbsParams, p: PhaseSpacePoint) -> f64 {
    let beta = p.beta();
    let eta = params.eta();
    let m = params.m();
    let x = beta.norm_sqr();
    let z = beta * (1.0 - eta).sqrt();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut n = 0usize;
    loop {
        n += 1;
        term = term * z / (n as f64).sqrt();
        sum += term;
        if (n as f64) > z.norm_sqr() && term.norm() <= 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    let ln_pref = (m as f64 + 1.0) * eta.ln() - x - ln_factorial(m);
    let radial = if m == 0 { 1.0 } else { x.powi(m as i32) };
    ln_pref.exp() * radial * sum.norm_sqr() / PI
}

/// Controls for the displaced-number-state series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Stop once the bound on the remaining terms is below this.
    pub tol: f64,
    /// Largest `k` tried before giving up.
    pub k_cap: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { tol: 1e-12, k_cap: 8192 }
    }
}

/// Checks `-1 <= s <= 0`.
pub fn check_s(s: f64) -> Result<()> {
    if (-1.0..=0.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::invalid("s", s, "-1 <= s <= 0"))
    }
}

/// s-parametrized quasiprobability of the normalized `psi`.
pub fn s_distribution(state: &FockVector, p: PhaseSpacePoint, s: f64, opts: &SeriesOptions) -> Result<f64> {
    check_s(s)?;
    let r = (1.0 + s) / (1.0 - s);
    if r == 0.0 {
        return Ok(q_function(state, p));
    }
    let norm = state.norm_sqr();
    let mut sum = 0.0;
    let mut seen = 0.0;
    let mut weight = 2.0 / (PI * (1.0 - s));
    let mut bound = f64::INFINITY;
    let mut terms = 0;
    displaced_overlaps(state.amplitudes(), p.beta(), opts.k_cap, |k, overlap| {
        let pk = overlap.norm_sqr() / norm;
        sum += if k % 2 == 0 { weight * pk } else { -weight * pk };
        seen += pk;
        weight *= r;
        // Later terms have weight below `weight` and total mass `1 - seen`.
        bound = weight * (1.0 - seen).max(0.0);
        terms = k + 1;
        bound >= opts.tol
    });
    if bound < opts.tol {
        Ok(sum)
    } else {
        Err(Error::NonConvergence { terms, bound })
    }
}

/// Calls `visit(k, <beta,k|psi>)` for `k = 0, 1, ..` until it returns false
/// or `k_cap` is passed. Each diagonal recurrence of the displacement matrix
/// advances by one step per column, so a column costs `O(n_max)`.
pub fn displaced_overlaps(
    c: &[Complex64],
    beta: Complex64,
    k_cap: usize,
    mut visit: impl FnMut(usize, Complex64) -> bool,
) {
    let n_max = c.len() - 1;
    let x = beta.norm_sqr();
    let first = c.iter().position(|a| a.norm_sqr() > 0.0).unwrap_or(n_max);
    let mut p = diagonal_prefactors(beta, n_max);
    // Diagonal d below the main one (n = k + d) sits at position k.
    let mut lo_prev = vec![0.0f64; n_max + 1];
    let mut lo_cur = vec![1.0f64; n_max + 1];
    // Diagonal d above it (k = n + d) sits at position k - d; index 0 unused.
    let mut up_prev = vec![0.0f64];
    let mut up_cur = vec![0.0f64];
    let step = |j: usize, d: usize, cur: f64, prev: f64| {
        let (jf, df) = (j as f64, d as f64);
        ((2.0 * jf + 1.0 + df - x) * cur - (jf * (jf + df)).sqrt() * prev) / ((jf + 1.0) * (jf + 1.0 + df)).sqrt()
    };
    for k in 0..=k_cap {
        let mut overlap = Complex64::new(0.0, 0.0);
        if k <= n_max {
            for d in first.saturating_sub(k)..=n_max - k {
                overlap += (p[d] * lo_cur[d]).conj() * c[k + d];
            }
        }
        let lowest = (k.saturating_sub(n_max)).max(1);
        for d in lowest..=k {
            let n = k - d;
            if n < first || p[d] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let pd = if d % 2 == 0 { p[d].conj() } else { -p[d].conj() };
            overlap += (pd * up_cur[d]).conj() * c[n];
        }
        if !visit(k, overlap) {
            return;
        }
        if k < n_max {
            for d in 0..n_max - k {
                let next = step(k, d, lo_cur[d], lo_prev[d]);
                lo_prev[d] = lo_cur[d];
                lo_cur[d] = next;
            }
        }
        for d in lowest..=k {
            let j = k - d;
            let next = step(j, d, up_cur[d], up_prev[d]);
            up_prev[d] = up_cur[d];
            up_cur[d] = next;
        }
        up_prev.push(0.0);
        up_cur.push(1.0);
        if k + 1 >= p.len() {
            let last = p[p.len() - 1];
            p.push(last * beta / ((k + 1) as f64).sqrt());
        }
    }
}

/// Wigner function, `s = 0`.
pub fn wigner(state: &FockVector, p: PhaseSpacePoint, opts: &SeriesOptions) -> Result<f64> {
    s_distribution(state, p, 0.0, opts)
}

/// Which distribution to put on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Distribution {
    Q,
    Wigner,
    S(f64),
}

/// Evaluates the distribution at one point.
pub fn evaluate(state: &FockVector, p: PhaseSpacePoint, kind: Distribution, opts: &SeriesOptions) -> Result<f64> {
    match kind {
        Distribution::Q => Ok(q_function(state, p)),
        Distribution::Wigner => wigner(state, p, opts),
        Distribution::S(s) => s_distribution(state, p, s, opts),
    }
}

/// Rectangular window sampled at `nx x ny` points including the edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { x_min: -6.0, x_max: 6.0, y_min: -6.0, y_max: 6.0, nx: 201, ny: 201 }
    }
}

impl GridSpec {
    /// Square window `[-range, range]^2`.
    pub fn square(range: f64, n: usize) -> Self {
        GridSpec { x_min: -range, x_max: range, y_min: -range, y_max: range, nx: n, ny: n }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("x_min", self.x_min), ("x_max", self.x_max), ("y_min", self.y_min), ("y_max", self.y_max)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, v, "finite bound"));
            }
        }
        if self.nx < 2 {
            return Err(Error::invalid("nx", self.nx as f64, "nx >= 2"));
        }
        if self.ny < 2 {
            return Err(Error::invalid("ny", self.ny as f64, "ny >= 2"));
        }
        if self.x_min > self.x_max {
            return Err(Error::invalid("x_max", self.x_max, "x_max >= x_min"));
        }
        if self.y_min > self.y_max {
            return Err(Error::invalid("y_max", self.y_max, "y_max >= y_min"));
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * i as f64 / (self.nx - 1) as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + (self.y_max - self.y_min) * j as f64 / (self.ny - 1) as f64
    }

    pub fn point(&self, i: usize, j: usize) -> PhaseSpacePoint {
        PhaseSpacePoint { x: self.x(i), y: self.y(j) }
    }

    fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }
}

/// Distribution sampled on a [`GridSpec`]. `values[j][i]` sits at
/// `(x(i), y(j))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSpaceGrid {
    #[serde(flatten)]
    pub spec: GridSpec,
    pub values: Vec<Vec<f64>>,
    /// Trapezoidal integral over the window.
    pub integral: f64,
}

impl PhaseSpaceGrid {
    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(var_x, var_y)` of the distribution treated as a weight on the grid.
    pub fn spreads(&self) -> (f64, f64) {
        let (mut w, mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (j, row) in self.values.iter().enumerate() {
            let y = self.spec.y(j);
            for (i, v) in row.iter().enumerate() {
                let x = self.spec.x(i);
                w += v;
                sx += v * x;
                sy += v * y;
                sxx += v * x * x;
                syy += v * y * y;
            }
        }
        let (mx, my) = (sx / w, sy / w);
        (sxx / w - mx * mx, syy / w - my * my)
    }
}

/// Trapezoidal integral of row-major values.
pub fn trapezoid(spec: &GridSpec, values: &[Vec<f64>]) -> f64 {
    let edge = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let mut total = 0.0;
    for (j, row) in values.iter().enumerate() {
        let wy = edge(j, spec.ny);
        for (i, v) in row.iter().enumerate() {
            total += wy * edge(i, spec.nx) * v;
        }
    }
    total * spec.dx() * spec.dy()
}

/// Evaluates `kind` at every grid point.
pub fn grid_evaluate(
    state: &FockVector,
    spec: &GridSpec,
    kind: Distribution,
    opts: &SeriesOptions,
    exec: Exec,
) -> Result<PhaseSpaceGrid> {
    spec.validate()?;
    if let Distribution::S(s) = kind {
        check_s(s)?;
    }
    let flat = try_map_indexed(exec, spec.nx * spec.ny, |idx| {
        evaluate(state, spec.point(idx % spec.nx, idx / spec.nx), kind, opts)
    })?;
    let values: Vec<Vec<f64>> = flat.chunks(spec.nx).map(|r| r.to_vec()).collect();
    let integral = trapezoid(spec, &values);
    Ok(PhaseSpaceGrid { spec: *spec, values, integral })
}
