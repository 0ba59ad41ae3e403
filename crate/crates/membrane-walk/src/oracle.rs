//! Exact (non Monte Carlo) oracles: n-step return probabilities by iterated
//! convolution, first-return tails by the renewal recursion, the walk's
//! period, local-limit constants and the closed-form first term of the
//! heavy-tail counterexample bound.
//!
//! Truncation is rigorous, not heuristic: mass that leaves the convolution
//! window is accumulated per step and turned into two-sided brackets on
//! every in-window probability, which the renewal recursion propagates into
//! brackets on the return tail.

use crate::lattice::{CovarianceMatrix, LatticePoint};
use crate::law::JumpLaw;
use crate::numeric::{Bracket, KahanSum, REDUCE_CHUNK};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("grid of {cells} cells exceeds the memory guard")]
    MemoryGuard { cells: u128 },
    #[error("law has unbounded support; grids need a finite enumerable base")]
    UnboundedSupport,
    #[error("no return to the origin within the table horizon")]
    NoReturnWithinHorizon,
    #[error("nondegenerate covariance required")]
    DegenerateCovariance,
    #[error("horizon {n} is below the law's cutoff regime (needs log n > {required})")]
    BelowCutoffRegime { n: u64, required: f64 },
    #[error("empty probability table")]
    EmptyTable,
}

/// Largest number of cells in one convolution window table.
pub const MAX_TABLE_CELLS: u128 = 1 << 22;
/// Largest total number of cells when every per-step table is retained.
pub const MAX_RETAINED_CELLS: u128 = 1 << 24;

/// Truncated-window table of the n-step laws `P{S(k) = x}`.
pub struct ExactGrid {
    dim: usize,
    window: i64,
    side: usize,
    nmax: usize,
    /// `U_k = P{S(k) = 0}` with truncation brackets.
    u: Vec<Bracket>,
    /// Cumulative escaped mass through step k.
    escaped: Vec<f64>,
    /// Per-step tables when retained, otherwise only the final one.
    tables: Option<Vec<Vec<f64>>>,
    last: Vec<f64>,
}

impl ExactGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn u(&self) -> &[Bracket] {
        &self.u
    }

    pub fn escaped(&self) -> &[f64] {
        &self.escaped
    }

    fn flat_index(&self, x: &LatticePoint) -> Option<usize> {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for i in 0..self.dim {
            let c = x.coord(i);
            if c.abs() > self.window {
                return None;
            }
            idx += (c + self.window) as usize * stride;
            stride *= self.side;
        }
        Some(idx)
    }

    /// `P{S(k) = x}` bracketed by the escaped mass; requires retained
    /// tables for `k < nmax`.
    pub fn prob_at(&self, k: usize, x: &LatticePoint) -> Option<Bracket> {
        let idx = self.flat_index(x)?;
        let v = if k == self.nmax {
            self.last[idx]
        } else {
            self.tables.as_ref()?.get(k)?[idx]
        };
        Some(Bracket::new(v, (v + self.escaped[k]).min(1.0)))
    }

    pub fn table(&self, k: usize) -> Option<&[f64]> {
        if k == self.nmax {
            return Some(&self.last);
        }
        self.tables.as_ref().and_then(|t| t.get(k)).map(|v| &v[..])
    }
}

/// Iterated convolution of `base` out to `nmax` steps on the window
/// `sup_norm(x) <= window`. `window = None` picks the escape-free default
/// `nmax * max_step`, capped by the memory guard (the cap is what makes the
/// escaped mass nonzero and the brackets informative).
pub fn build_grid(
    base: &JumpLaw,
    nmax: usize,
    window: Option<i64>,
    retain_tables: bool,
) -> Result<ExactGrid, OracleError> {
    let atoms = base.finite_support().ok_or(OracleError::UnboundedSupport)?;
    let dim = base.dim();
    let max_step = base.max_step_sup_norm().unwrap_or(1).max(1) as i64;
    let cap = max_window(dim);
    let window = window
        .unwrap_or_else(|| (nmax as i64).saturating_mul(max_step).min(cap))
        .min(cap)
        .max(max_step);
    let side = (2 * window + 1) as usize;
    let cells = (side as u128).pow(dim as u32);
    if cells > MAX_TABLE_CELLS {
        return Err(OracleError::MemoryGuard { cells });
    }
    if retain_tables {
        let total = cells * (nmax as u128 + 1);
        if total > MAX_RETAINED_CELLS {
            return Err(OracleError::MemoryGuard { cells: total });
        }
    }

    let cells = cells as usize;
    let mut cur = vec![0.0f64; cells];
    let mut next = vec![0.0f64; cells];
    // P{S(0) = 0} = 1
    let origin = cells / 2;
    cur[origin] = 1.0;

    let mut u = Vec::with_capacity(nmax + 1);
    let mut escaped = Vec::with_capacity(nmax + 1);
    let mut tables = retain_tables.then(Vec::new);
    u.push(Bracket::exact(1.0));
    escaped.push(0.0);
    if let Some(t) = tables.as_mut() {
        t.push(cur.clone());
    }

    // flattened atom offsets for the 2-D fast path
    let atoms_2d: Vec<(i64, i64, f64)> = if dim == 2 {
        atoms
            .iter()
            .map(|(p, w)| (p.coord(0), p.coord(1), *w))
            .collect()
    } else {
        Vec::new()
    };

    for k in 1..=nmax {
        if dim == 2 {
            convolve_2d(&cur, &mut next, side, &atoms_2d);
        } else {
            convolve_nd(&cur, &mut next, side, dim, window, &atoms);
        }
        let mass = chunked_sum(&next);
        let esc = 1.0 - mass;
        debug_assert!(esc >= -1e-12);
        escaped.push(esc.max(0.0));
        let at_zero = next[origin];
        u.push(Bracket::new(at_zero, (at_zero + escaped[k]).min(1.0)));
        std::mem::swap(&mut cur, &mut next);
        if let Some(t) = tables.as_mut() {
            t.push(cur.clone());
        }
    }

    Ok(ExactGrid {
        dim,
        window,
        side,
        nmax,
        u,
        escaped,
        tables,
        last: cur,
    })
}

fn max_window(dim: usize) -> i64 {
    let side = (MAX_TABLE_CELLS as f64).powf(1.0 / dim as f64).floor() as i64;
    ((side - 1) / 2).max(1)
}

/// One gather convolution step, parallel over output rows; outputs are
/// disjoint so parallel and sequential runs are bit-identical.
fn convolve_2d(cur: &[f64], out: &mut [f64], side: usize, atoms: &[(i64, i64, f64)]) {
    let row_op = |(y0, row): (usize, &mut [f64])| {
        row.fill(0.0);
        for &(dx, dy, p) in atoms {
            let sx = y0 as i64 - dx;
            if sx < 0 || sx >= side as i64 {
                continue;
            }
            let src = &cur[sx as usize * side..(sx as usize + 1) * side];
            let lo = 0i64.max(dy) as usize;
            let hi = (side as i64).min(side as i64 + dy) as usize;
            for y1 in lo..hi {
                row[y1] += p * src[(y1 as i64 - dy) as usize];
            }
        }
    };
    #[cfg(feature = "parallel")]
    out.par_chunks_mut(side).enumerate().for_each(row_op);
    #[cfg(not(feature = "parallel"))]
    out.chunks_mut(side).enumerate().for_each(row_op);
}

fn convolve_nd(
    cur: &[f64],
    out: &mut [f64],
    side: usize,
    dim: usize,
    window: i64,
    atoms: &[(LatticePoint, f64)],
) {
    let coords_of = |mut idx: usize| -> Vec<i64> {
        let mut c = vec![0i64; dim];
        for item in c.iter_mut() {
            *item = (idx % side) as i64 - window;
            idx /= side;
        }
        c
    };
    let index_of = |c: &[i64]| -> Option<usize> {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for &v in c {
            if v.abs() > window {
                return None;
            }
            idx += (v + window) as usize * stride;
            stride *= side;
        }
        Some(idx)
    };
    let cell_op = |(i, o): (usize, &mut f64)| {
        let y = coords_of(i);
        let mut acc = 0.0;
        let mut src = vec![0i64; dim];
        for (a, p) in atoms {
            for j in 0..dim {
                src[j] = y[j] - a.coord(j);
            }
            if let Some(s) = index_of(&src) {
                acc += p * cur[s];
            }
        }
        *o = acc;
    };
    #[cfg(feature = "parallel")]
    out.par_iter_mut().enumerate().for_each(cell_op);
    #[cfg(not(feature = "parallel"))]
    out.iter_mut().enumerate().for_each(cell_op);
}

/// Order-stable compensated sum: per-chunk Kahan partials folded in chunk
/// order, identical for any worker count.
pub fn chunked_sum(values: &[f64]) -> f64 {
    let partials: Vec<f64> = {
        #[cfg(feature = "parallel")]
        {
            values.par_chunks(REDUCE_CHUNK).map(crate::numeric::kahan_sum).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            values.chunks(REDUCE_CHUNK).map(crate::numeric::kahan_sum).collect()
        }
    };
    crate::numeric::kahan_sum(&partials)
}

/// `U_k = P{S(k) = 0}` for the planar simple walk through the closed
/// product form `(binom(2m, m) 2^(-2m))^2`, which reaches horizons the
/// grids cannot.
pub fn simple_walk_2d_u_closed_form(nmax: usize) -> Vec<f64> {
    let mut u = vec![0.0; nmax + 1];
    let mut a = 1.0f64; // binom(2m, m) 2^(-2m)
    u[0] = 1.0;
    let mut m = 1usize;
    while 2 * m <= nmax {
        a *= (2.0 * m as f64 - 1.0) / (2.0 * m as f64);
        u[2 * m] = a * a;
        m += 1;
    }
    u
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period `c`: gcd of the return times with positive probability.
pub fn period_from_u(u: &[Bracket]) -> Result<u64, OracleError> {
    let mut c = 0u64;
    for (k, b) in u.iter().enumerate().skip(1) {
        if b.lo > 0.0 {
            c = gcd(c, k as u64);
            if c == 1 {
                return Ok(1);
            }
        }
    }
    if c == 0 {
        Err(OracleError::NoReturnWithinHorizon)
    } else {
        Ok(c)
    }
}

pub fn period(grid: &ExactGrid) -> Result<u64, OracleError> {
    period_from_u(grid.u())
}

/// First-return tails `R_n = P{tau_0 > n}` from the renewal recursion
/// `R_n = 1 - sum_{k=1}^n U_k R_{n-k}`, with interval propagation of the
/// truncation brackets on `U`.
pub struct ReturnTailTable {
    pub u: Vec<Bracket>,
    pub r: Vec<Bracket>,
    pub period: u64,
}

pub fn return_tail_exact(u: &[Bracket]) -> Result<ReturnTailTable, OracleError> {
    if u.is_empty() {
        return Err(OracleError::EmptyTable);
    }
    let period = period_from_u(u)?;
    let exact = u.iter().all(|b| b.is_exact());
    let r = if exact {
        let uv: Vec<f64> = u.iter().map(|b| b.lo).collect();
        renewal_recursion(&uv)
            .into_iter()
            .map(Bracket::exact)
            .collect()
    } else {
        renewal_recursion_bracketed(u)
    };
    Ok(ReturnTailTable {
        u: u.to_vec(),
        r,
        period,
    })
}

/// Convenience wrapper for exact `U` sequences (closed-form or escape-free
/// grids).
pub fn return_tail_from_exact_u(u: &[f64]) -> Result<ReturnTailTable, OracleError> {
    let brackets: Vec<Bracket> = u.iter().map(|&v| Bracket::exact(v)).collect();
    return_tail_exact(&brackets)
}

/// Sparse view of the nonzero `U` entries; periodic walks halve (or better)
/// the quadratic recursion cost through it.
fn nonzero<T: Copy>(u: &[T], is_zero: impl Fn(&T) -> bool) -> Vec<(usize, T)> {
    u.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, v)| !is_zero(v))
        .map(|(k, v)| (k, *v))
        .collect()
}

fn renewal_recursion(u: &[f64]) -> Vec<f64> {
    let n = u.len() - 1;
    let nz = nonzero(u, |&v| v == 0.0);
    let mut r = vec![0.0f64; n + 1];
    r[0] = 1.0;
    let mut terms: Vec<f64> = Vec::with_capacity(nz.len());
    for m in 1..=n {
        terms.clear();
        for &(k, uk) in &nz {
            if k > m {
                break;
            }
            terms.push(uk * r[m - k]);
        }
        r[m] = 1.0 - chunked_sum(&terms);
    }
    r
}

fn renewal_recursion_bracketed(u: &[Bracket]) -> Vec<Bracket> {
    let n = u.len() - 1;
    let nz = nonzero(u, |b| b.hi == 0.0);
    let mut r = vec![Bracket::exact(0.0); n + 1];
    r[0] = Bracket::exact(1.0);
    let mut lo_terms: Vec<f64> = Vec::with_capacity(nz.len());
    let mut hi_terms: Vec<f64> = Vec::with_capacity(nz.len());
    for m in 1..=n {
        lo_terms.clear();
        hi_terms.clear();
        for &(k, uk) in &nz {
            if k > m {
                break;
            }
            lo_terms.push(uk.lo * r[m - k].lo);
            hi_terms.push(uk.hi * r[m - k].hi);
        }
        let hi = (1.0 - chunked_sum(&lo_terms)).min(1.0);
        let lo = (1.0 - chunked_sum(&hi_terms)).max(0.0);
        r[m] = Bracket::new(lo.min(hi), hi);
    }
    r
}

/// Largest absolute residual of `sum_{k=0}^n U_k R_{n-k} = 1` over
/// `n <= nmax`: the renewal identity recomputed independently of the
/// recursion that built `R`.
pub fn renewal_identity_max_residual(u: &[f64], r: &[f64]) -> f64 {
    let n = u.len().min(r.len()) - 1;
    let nz = nonzero(u, |&v| v == 0.0);
    let residual_at = |m: usize| -> f64 {
        let mut acc = KahanSum::new();
        acc.add(r[m]); // k = 0 term, U_0 = 1
        for &(k, uk) in &nz {
            if k > m {
                break;
            }
            acc.add(uk * r[m - k]);
        }
        (acc.value() - 1.0).abs()
    };
    #[cfg(feature = "parallel")]
    {
        (0..=n)
            .into_par_iter()
            .map(residual_at)
            .reduce(|| 0.0, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..=n).map(residual_at).fold(0.0, f64::max)
    }
}

/// Which closed-form constant a measured sequence approaches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstantCandidate {
    /// The displayed statement constant `c / (2 pi sqrt(det Gamma))`.
    Statement,
    /// The reciprocal family `2 pi sqrt(det Gamma) / c` that the proof
    /// body's bracketing actually bounds.
    ProofBody,
    /// The covariance-of-one-step reading `1 / (2 pi sqrt(det Gamma))`.
    CovarianceReading,
}

impl std::fmt::Display for ConstantCandidate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstantCandidate::Statement => write!(f, "statement constant"),
            ConstantCandidate::ProofBody => write!(f, "proof-body constant"),
            ConstantCandidate::CovarianceReading => write!(f, "one-step covariance reading"),
        }
    }
}

/// Trend of `n * U_{cn}` against both candidate local-limit constants.
pub struct LltConstantReport {
    pub period: u64,
    pub det_gamma: f64,
    /// `(n, n * U_{cn})` sampled geometrically.
    pub samples: Vec<(u64, f64)>,
    pub statement_constant: f64,
    pub covariance_reading_constant: f64,
    pub supported: ConstantCandidate,
    pub final_value: f64,
}

pub fn llt_constant_report(
    u: &[Bracket],
    period: u64,
    gamma: &CovarianceMatrix,
) -> Result<LltConstantReport, OracleError> {
    if !gamma.is_nondegenerate() {
        return Err(OracleError::DegenerateCovariance);
    }
    let det = gamma.determinant();
    let root = det.sqrt();
    let statement = period as f64 / (2.0 * std::f64::consts::PI * root);
    let covariance_reading = 1.0 / (2.0 * std::f64::consts::PI * root);
    let blocks = (u.len() - 1) / period as usize;
    if blocks < 4 {
        return Err(OracleError::EmptyTable);
    }
    let samples = geometric_samples(blocks, 64)
        .into_iter()
        .map(|n| (n as u64, n as f64 * u[n * period as usize].mid()))
        .collect::<Vec<_>>();
    let final_value = samples.last().expect("blocks >= 4").1;
    let supported = if (final_value - statement).abs() <= (final_value - covariance_reading).abs()
    {
        ConstantCandidate::Statement
    } else {
        ConstantCandidate::CovarianceReading
    };
    Ok(LltConstantReport {
        period,
        det_gamma: det,
        samples,
        statement_constant: statement,
        covariance_reading_constant: covariance_reading,
        supported,
        final_value,
    })
}

/// Trend of `R_n log n` against the statement constant and the proof-body
/// constant of the return-tail asymptotic.
pub struct ReturnTailConstantReport {
    pub samples: Vec<(u64, f64)>,
    pub statement_constant: f64,
    pub proof_body_constant: f64,
    pub supported: ConstantCandidate,
    pub final_value: f64,
}

pub fn return_tail_constant_report(
    table: &ReturnTailTable,
    gamma: &CovarianceMatrix,
) -> Result<ReturnTailConstantReport, OracleError> {
    if !gamma.is_nondegenerate() {
        return Err(OracleError::DegenerateCovariance);
    }
    let root = gamma.determinant().sqrt();
    let two_pi = 2.0 * std::f64::consts::PI;
    let statement = table.period as f64 / (two_pi * root);
    let proof_body = two_pi * root / table.period as f64;
    let n = table.r.len() - 1;
    if n < 16 {
        return Err(OracleError::EmptyTable);
    }
    let samples: Vec<(u64, f64)> = geometric_samples(n, 64)
        .into_iter()
        .filter(|&m| m >= 2)
        .map(|m| (m as u64, table.r[m].mid() * (m as f64).ln()))
        .collect();
    let final_value = samples.last().expect("n >= 16").1;
    let supported = if (final_value - statement).abs() <= (final_value - proof_body).abs() {
        ConstantCandidate::Statement
    } else {
        ConstantCandidate::ProofBody
    };
    Ok(ReturnTailConstantReport {
        samples,
        statement_constant: statement,
        proof_body_constant: proof_body,
        supported,
        final_value,
    })
}

fn geometric_samples(max: usize, count: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    let mut prev = 0usize;
    for i in 0..count {
        let v = ((max as f64).powf((i + 1) as f64 / count as f64).round() as usize)
            .clamp(1, max);
        if v > prev {
            out.push(v);
            prev = v;
        }
    }
    if out.last() != Some(&max) {
        out.push(max);
    }
    out
}

/// Closed-form first summand of the counterexample's lower bound:
/// `(1 - P{|eta| <= e^sqrt(log n)}^floor(loglog n)) P{|eta| > 2n} / P{|eta| > e^sqrt(log n)}`,
/// evaluated with the exact tail of the kick law.
pub fn counterexample_first_term(
    scale: f64,
    tail: impl Fn(f64) -> f64,
    n: u64,
) -> Result<f64, OracleError> {
    // the inner threshold must sit above the tail cutoff exp(exp(a))
    let required = (2.0 * scale).exp();
    let l1 = (n as f64).ln();
    if l1 <= required {
        return Err(OracleError::BelowCutoffRegime { n, required });
    }
    let l2 = l1.ln();
    let threshold = l1.sqrt().exp();
    let q = tail(threshold);
    debug_assert!(q < 1.0);
    let survive = (1.0 - q).powi(l2.floor() as i32);
    Ok((1.0 - survive) * tail(2.0 * n as f64) / q)
}

/// Limit of the first summand as the horizon grows.
pub fn counterexample_first_term_limit(scale: f64) -> f64 {
    0.5 * (1.0 - (-2.0 * scale).exp())
}
