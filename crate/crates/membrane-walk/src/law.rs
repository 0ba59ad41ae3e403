//! Jump distributions on `Z^d`: constructors, exact samplers, tail functions
//! and moments.
//!
//! Every law is immutable after construction and samples from an externally
//! supplied stream, so concurrent replicates never share mutable state.
//!
//! Radial heavy-tail kinds can produce magnitudes beyond the coordinate
//! range. Such draws are reported as [`Draw::Saturated`] with the exact
//! `log log` of the real-valued radius retained; the walker clamps the
//! displacement to `SATURATED_MAG` on the sampled axis, which leaves every
//! desk-scale statistic unchanged (the true position would be further out).

use crate::lattice::{euclidean_norm, sup_norm, LatticePoint, Norm};
use crate::numeric::{Bracket, KahanSum};
use crate::rng::CounterRng;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

/// Magnitude used in place of an unrepresentable kick radius: large enough
/// to dominate every experiment threshold, small enough that a horizon of
/// `10^7` subsequent unit steps cannot overflow `i64`.
pub const SATURATED_MAG: i64 = 1 << 62;

#[derive(Debug, Error, PartialEq)]
pub enum LawError {
    #[error("probabilities must be positive, got {0}")]
    NonPositiveProbability(f64),
    #[error("probabilities sum to {0}, expected 1 within 1e-12")]
    ProbabilitySum(f64),
    #[error("support points must be distinct")]
    DuplicateSupportPoint,
    #[error("support points must share one dimension")]
    MixedDimensions,
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("moment is infinite or unavailable for this law kind")]
    MomentUnavailable,
    #[error("tail has no usable form for this law under the requested norm")]
    TailUnavailable,
}

/// One sampled increment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Draw {
    Step(LatticePoint),
    Saturated(SaturationDraw),
}

/// A kick whose sampled radius exceeded the representable range. The radius
/// is retained as `log log r` (finite in `f64` for every reachable draw).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaturationDraw {
    pub axis: usize,
    pub negative: bool,
    pub ln_ln_radius: f64,
}

impl SaturationDraw {
    /// Clamped lattice displacement the walker applies.
    pub fn clamped_step(&self, dim: usize) -> LatticePoint {
        LatticePoint::axis(dim, self.axis, SATURATED_MAG, self.negative)
    }
}

#[derive(Clone, Debug)]
pub struct CategoricalNd {
    dim: usize,
    atoms: Vec<LatticePoint>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Categorical1d {
    values: Vec<i64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

fn build_cumulative(probs: &[f64]) -> Result<Vec<f64>, LawError> {
    let mut acc = KahanSum::new();
    let mut cumulative = Vec::with_capacity(probs.len());
    for &p in probs {
        if p.is_nan() || p <= 0.0 {
            return Err(LawError::NonPositiveProbability(p));
        }
        acc.add(p);
        cumulative.push(acc.value());
    }
    let total = acc.value();
    if (total - 1.0).abs() > 1e-12 {
        return Err(LawError::ProbabilitySum(total));
    }
    Ok(cumulative)
}

#[inline]
fn pick_cumulative(cumulative: &[f64], u: f64) -> usize {
    let idx = cumulative.partition_point(|&c| c <= u);
    idx.min(cumulative.len() - 1)
}

/// Precomputed tables for the polynomial-tail law `P{xi = x} ~ c / (1 + |x|^(2+alpha))`
/// on `Z^2`: an alias table over the window `sup|x| <= W` plus an exact
/// envelope rejection sampler for the unbounded remainder, so the power tail
/// is preserved rather than truncated.
#[derive(Clone, Debug)]
pub struct PolynomialTail {
    alpha: f64,
    window: i64,
    atoms: Vec<LatticePoint>,
    alias_prob: Vec<f64>,
    alias: Vec<u32>,
    window_mass: f64,   // unnormalized
    envelope_mass: f64, // beta * (W+1)^-alpha, dominates the true tail mass
    beta: f64,
    tail_table: Arc<OnceLock<PolyTailTable>>,
}

/// Lazily computed normalizer brackets: exact shell sums out to `shell_limit`
/// plus closed-form power bounds beyond.
#[derive(Debug)]
pub struct PolyTailTable {
    shell_limit: i64,
    shell_mass: Vec<f64>, // index 0 <-> shell W+1
    normalizer: Bracket,
}

#[derive(Clone, Debug)]
pub struct RegVaryingRadial {
    alpha: f64,
    pos_weight: f64,
}

#[derive(Clone, Debug)]
pub struct LogLogRadial {
    scale: f64,
    /// `exp(exp(scale))`: below this the tail function is capped at 1.
    cutoff: f64,
    /// Smallest magnitude the rounded sampler can produce.
    min_magnitude: i64,
}

#[derive(Clone, Debug)]
pub struct DiagonalEmbedding {
    base: Categorical1d,
}

/// A sampleable (and where possible exactly evaluable) jump distribution.
#[derive(Clone, Debug)]
pub enum JumpLaw {
    Categorical(CategoricalNd),
    SimpleNeighbor { dim: usize },
    LazySimpleNeighbor { dim: usize, hold_prob: f64 },
    PolynomialTail(PolynomialTail),
    RegVaryingRadial(RegVaryingRadial),
    LogLogRadial(LogLogRadial),
    DiagonalEmbedding(DiagonalEmbedding),
}

impl JumpLaw {
    pub fn categorical(atoms: Vec<(LatticePoint, f64)>) -> Result<Self, LawError> {
        if atoms.is_empty() {
            return Err(LawError::Parameter("categorical law needs atoms".into()));
        }
        let dim = atoms[0].0.dim();
        let mut points = Vec::with_capacity(atoms.len());
        let mut probs = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            if p.dim() != dim {
                return Err(LawError::MixedDimensions);
            }
            if points.contains(&p) {
                return Err(LawError::DuplicateSupportPoint);
            }
            points.push(p);
            probs.push(w);
        }
        let cumulative = build_cumulative(&probs)?;
        Ok(JumpLaw::Categorical(CategoricalNd {
            dim,
            atoms: points,
            probs,
            cumulative,
        }))
    }

    /// Point mass at a single displacement.
    pub fn deterministic(step: LatticePoint) -> Self {
        JumpLaw::categorical(vec![(step, 1.0)]).expect("single atom is valid")
    }

    pub fn simple_neighbor(dim: usize) -> Result<Self, LawError> {
        if !(1..=crate::lattice::MAX_DIM).contains(&dim) {
            return Err(LawError::Parameter(format!("dimension {dim}")));
        }
        Ok(JumpLaw::SimpleNeighbor { dim })
    }

    pub fn lazy_simple_neighbor(dim: usize, hold_prob: f64) -> Result<Self, LawError> {
        if !(1..=crate::lattice::MAX_DIM).contains(&dim) {
            return Err(LawError::Parameter(format!("dimension {dim}")));
        }
        if !(hold_prob > 0.0 && hold_prob < 1.0) {
            return Err(LawError::Parameter(format!("hold_prob {hold_prob}")));
        }
        Ok(JumpLaw::LazySimpleNeighbor { dim, hold_prob })
    }

    pub fn polynomial_tail(alpha: f64, window: i64) -> Result<Self, LawError> {
        if !(alpha > 0.0 && alpha <= 8.0) {
            return Err(LawError::Parameter(format!("alpha {alpha}")));
        }
        if !(4..=512).contains(&window) {
            return Err(LawError::Parameter(format!(
                "window {window} outside 4..=512"
            )));
        }
        Ok(JumpLaw::PolynomialTail(PolynomialTail::build(
            alpha, window,
        )))
    }

    pub fn reg_varying_radial(alpha: f64, pos_weight: f64) -> Result<Self, LawError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(LawError::Parameter(format!("alpha {alpha} outside (0,1)")));
        }
        if !(0.0..=1.0).contains(&pos_weight) {
            return Err(LawError::Parameter(format!("pos_weight {pos_weight}")));
        }
        Ok(JumpLaw::RegVaryingRadial(RegVaryingRadial {
            alpha,
            pos_weight,
        }))
    }

    pub fn log_log_radial(scale: f64) -> Result<Self, LawError> {
        if !(scale > 0.0 && scale <= 6.0) {
            return Err(LawError::Parameter(format!("scale {scale} outside (0,6]")));
        }
        let cutoff = scale.exp().exp();
        let min_magnitude = (cutoff + 0.5).floor() as i64;
        Ok(JumpLaw::LogLogRadial(LogLogRadial {
            scale,
            cutoff,
            min_magnitude,
        }))
    }

    pub fn diagonal_embedding(atoms: Vec<(i64, f64)>) -> Result<Self, LawError> {
        if atoms.is_empty() {
            return Err(LawError::Parameter("diagonal law needs atoms".into()));
        }
        let mut values = Vec::with_capacity(atoms.len());
        let mut probs = Vec::with_capacity(atoms.len());
        for (v, w) in atoms {
            if values.contains(&v) {
                return Err(LawError::DuplicateSupportPoint);
            }
            values.push(v);
            probs.push(w);
        }
        let cumulative = build_cumulative(&probs)?;
        Ok(JumpLaw::DiagonalEmbedding(DiagonalEmbedding {
            base: Categorical1d {
                values,
                probs,
                cumulative,
            },
        }))
    }

    /// Tail cutoff `exp(exp(a))` of a log-log radial law.
    pub fn log_log_cutoff(&self) -> Option<f64> {
        match self {
            JumpLaw::LogLogRadial(l) => Some(l.cutoff),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            JumpLaw::Categorical(c) => c.dim,
            JumpLaw::SimpleNeighbor { dim } | JumpLaw::LazySimpleNeighbor { dim, .. } => *dim,
            JumpLaw::PolynomialTail(_) => 2,
            JumpLaw::RegVaryingRadial(_) => 1,
            JumpLaw::LogLogRadial(_) => 2,
            JumpLaw::DiagonalEmbedding(_) => 2,
        }
    }

    /// Largest sup-norm step size, `None` for unbounded kinds. Used to size
    /// escape-free convolution windows.
    pub fn max_step_sup_norm(&self) -> Option<u64> {
        match self {
            JumpLaw::Categorical(c) => c.atoms.iter().map(sup_norm).max(),
            JumpLaw::SimpleNeighbor { .. } | JumpLaw::LazySimpleNeighbor { .. } => Some(1),
            JumpLaw::DiagonalEmbedding(d) => {
                d.base.values.iter().map(|v| v.unsigned_abs()).max()
            }
            _ => None,
        }
    }

    /// Draw one increment. `rng` must be the stream dedicated to this
    /// increment family.
    #[inline]
    pub fn sample(&self, rng: &mut CounterRng) -> Draw {
        match self {
            JumpLaw::Categorical(c) => {
                let u = rng.next_f64();
                Draw::Step(c.atoms[pick_cumulative(&c.cumulative, u)])
            }
            JumpLaw::SimpleNeighbor { dim } => {
                let r = rng.uniform_below(2 * *dim as u64);
                Draw::Step(LatticePoint::unit(*dim, (r >> 1) as usize, r & 1 == 1))
            }
            JumpLaw::LazySimpleNeighbor { dim, hold_prob } => {
                if rng.next_f64() < *hold_prob {
                    Draw::Step(LatticePoint::origin(*dim))
                } else {
                    let r = rng.uniform_below(2 * *dim as u64);
                    Draw::Step(LatticePoint::unit(*dim, (r >> 1) as usize, r & 1 == 1))
                }
            }
            JumpLaw::PolynomialTail(p) => p.sample(rng),
            JumpLaw::RegVaryingRadial(r) => r.sample(rng),
            JumpLaw::LogLogRadial(l) => l.sample(rng),
            JumpLaw::DiagonalEmbedding(d) => {
                let u = rng.next_f64();
                let k = d.base.values[pick_cumulative(&d.base.cumulative, u)];
                Draw::Step(LatticePoint::new(&[k, -k]).expect("dim 2"))
            }
        }
    }

    /// `P{|xi| > t}` under the requested norm, as a rigorous bracket
    /// (exact kinds collapse to a point).
    pub fn tail(&self, t: f64, norm: Norm) -> Result<Bracket, LawError> {
        if t.is_nan() || t <= 0.0 {
            return Err(LawError::Parameter(format!("tail threshold {t}")));
        }
        match self {
            JumpLaw::Categorical(c) => {
                let mut acc = KahanSum::new();
                for (p, w) in c.atoms.iter().zip(&c.probs) {
                    if norm.of(p) > t {
                        acc.add(*w);
                    }
                }
                Ok(Bracket::exact(acc.value()))
            }
            JumpLaw::SimpleNeighbor { .. } => {
                Ok(Bracket::exact(if t < 1.0 { 1.0 } else { 0.0 }))
            }
            JumpLaw::LazySimpleNeighbor { hold_prob, .. } => Ok(Bracket::exact(if t < 1.0 {
                1.0 - hold_prob
            } else {
                0.0
            })),
            JumpLaw::PolynomialTail(p) => p.tail(t, norm),
            JumpLaw::RegVaryingRadial(r) => {
                // magnitude tail is exactly (floor(t)+1)^-alpha for t >= 1
                let v = if t < 1.0 {
                    1.0
                } else {
                    (t.floor() + 1.0).powf(-r.alpha)
                };
                Ok(Bracket::exact(v))
            }
            JumpLaw::LogLogRadial(l) => Ok(Bracket::exact(l.tail(t))),
            JumpLaw::DiagonalEmbedding(d) => {
                let mut acc = KahanSum::new();
                for (v, w) in d.base.values.iter().zip(&d.base.probs) {
                    let p = LatticePoint::new(&[*v, -*v]).expect("dim 2");
                    if norm.of(&p) > t {
                        acc.add(*w);
                    }
                }
                Ok(Bracket::exact(acc.value()))
            }
        }
    }

    /// Exact point mass at `x`, bracketed where the normalizer is only
    /// available as a bracket. `None` for off-support points.
    pub fn pmf(&self, x: &LatticePoint) -> Option<Bracket> {
        match self {
            JumpLaw::Categorical(c) => c
                .atoms
                .iter()
                .position(|a| a == x)
                .map(|i| Bracket::exact(c.probs[i])),
            JumpLaw::SimpleNeighbor { dim } => {
                if x.dim() == *dim && sup_norm(x) == 1 && x.coords().iter().map(|c| c.abs()).sum::<i64>() == 1 {
                    Some(Bracket::exact(1.0 / (2.0 * *dim as f64)))
                } else {
                    None
                }
            }
            JumpLaw::LazySimpleNeighbor { dim, hold_prob } => {
                if x.is_origin() {
                    Some(Bracket::exact(*hold_prob))
                } else if x.dim() == *dim
                    && sup_norm(x) == 1
                    && x.coords().iter().map(|c| c.abs()).sum::<i64>() == 1
                {
                    Some(Bracket::exact((1.0 - hold_prob) / (2.0 * *dim as f64)))
                } else {
                    None
                }
            }
            JumpLaw::PolynomialTail(p) => Some(p.pmf(x)),
            JumpLaw::RegVaryingRadial(r) => {
                let n = x.coord(0);
                if n == 0 {
                    return None;
                }
                let mag = n.unsigned_abs() as f64;
                let side = if n > 0 { r.pos_weight } else { 1.0 - r.pos_weight };
                if side == 0.0 {
                    return None;
                }
                Some(Bracket::exact(
                    side * (mag.powf(-r.alpha) - (mag + 1.0).powf(-r.alpha)),
                ))
            }
            JumpLaw::LogLogRadial(l) => l.pmf(x),
            JumpLaw::DiagonalEmbedding(d) => {
                if x.coord(0) != -x.coord(1) {
                    return None;
                }
                d.base
                    .values
                    .iter()
                    .position(|&v| v == x.coord(0))
                    .map(|i| Bracket::exact(d.base.probs[i]))
            }
        }
    }

    /// Exact mean vector and covariance matrix, or an error for kinds whose
    /// second moment is infinite or has no closed form.
    pub fn mean_and_covariance(
        &self,
    ) -> Result<(Vec<f64>, crate::lattice::CovarianceMatrix), LawError> {
        let atoms: Vec<(LatticePoint, f64)> = match self {
            JumpLaw::Categorical(c) => {
                c.atoms.iter().cloned().zip(c.probs.iter().cloned()).collect()
            }
            JumpLaw::SimpleNeighbor { dim } => {
                let p = 1.0 / (2.0 * *dim as f64);
                (0..*dim)
                    .flat_map(|a| {
                        [
                            (LatticePoint::unit(*dim, a, false), p),
                            (LatticePoint::unit(*dim, a, true), p),
                        ]
                    })
                    .collect()
            }
            JumpLaw::LazySimpleNeighbor { dim, hold_prob } => {
                let p = (1.0 - hold_prob) / (2.0 * *dim as f64);
                let mut v: Vec<_> = (0..*dim)
                    .flat_map(|a| {
                        [
                            (LatticePoint::unit(*dim, a, false), p),
                            (LatticePoint::unit(*dim, a, true), p),
                        ]
                    })
                    .collect();
                v.push((LatticePoint::origin(*dim), *hold_prob));
                v
            }
            JumpLaw::DiagonalEmbedding(d) => d
                .base
                .values
                .iter()
                .zip(&d.base.probs)
                .map(|(&v, &w)| (LatticePoint::new(&[v, -v]).expect("dim 2"), w))
                .collect(),
            _ => return Err(LawError::MomentUnavailable),
        };
        let dim = self.dim();
        let mut mean = vec![KahanSum::new(); dim];
        for (p, w) in &atoms {
            for (i, slot) in mean.iter_mut().enumerate() {
                slot.add(w * p.coord(i) as f64);
            }
        }
        let mean: Vec<f64> = mean.iter().map(|k| k.value()).collect();
        let mut cov = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = KahanSum::new();
                for (p, w) in &atoms {
                    acc.add(w * p.coord(i) as f64 * p.coord(j) as f64);
                }
                cov[i * dim + j] = acc.value() - mean[i] * mean[j];
            }
        }
        let cov = crate::lattice::CovarianceMatrix::new(dim, cov)
            .map_err(|e| LawError::Parameter(format!("covariance: {e}")))?;
        Ok((mean, cov))
    }

    /// Support points with sup-norm at most `radius`, and whether the true
    /// support extends beyond the enumeration.
    pub fn support_within(&self, radius: i64) -> (Vec<LatticePoint>, bool) {
        match self {
            JumpLaw::Categorical(c) => {
                let points: Vec<_> = c
                    .atoms
                    .iter()
                    .filter(|p| sup_norm(p) <= radius as u64)
                    .cloned()
                    .collect();
                let truncated = points.len() < c.atoms.len();
                (points, truncated)
            }
            JumpLaw::SimpleNeighbor { dim } => (
                (0..*dim)
                    .flat_map(|a| {
                        [
                            LatticePoint::unit(*dim, a, false),
                            LatticePoint::unit(*dim, a, true),
                        ]
                    })
                    .collect(),
                false,
            ),
            JumpLaw::LazySimpleNeighbor { dim, .. } => {
                let mut v: Vec<_> = (0..*dim)
                    .flat_map(|a| {
                        [
                            LatticePoint::unit(*dim, a, false),
                            LatticePoint::unit(*dim, a, true),
                        ]
                    })
                    .collect();
                v.push(LatticePoint::origin(*dim));
                (v, false)
            }
            JumpLaw::PolynomialTail(_) => {
                let mut v = Vec::new();
                for x in -radius..=radius {
                    for y in -radius..=radius {
                        v.push(LatticePoint::new(&[x, y]).expect("dim 2"));
                    }
                }
                (v, true)
            }
            JumpLaw::RegVaryingRadial(r) => {
                let mut v = Vec::new();
                for n in 1..=radius {
                    if r.pos_weight > 0.0 {
                        v.push(LatticePoint::new(&[n]).expect("dim 1"));
                    }
                    if r.pos_weight < 1.0 {
                        v.push(LatticePoint::new(&[-n]).expect("dim 1"));
                    }
                }
                (v, true)
            }
            JumpLaw::LogLogRadial(l) => {
                let mut v = Vec::new();
                for m in l.min_magnitude..=radius {
                    for axis in 0..2 {
                        v.push(LatticePoint::axis(2, axis, m, false));
                        v.push(LatticePoint::axis(2, axis, m, true));
                    }
                }
                (v, true)
            }
            JumpLaw::DiagonalEmbedding(d) => {
                let points: Vec<_> = d
                    .base
                    .values
                    .iter()
                    .filter(|v| v.unsigned_abs() <= radius as u64)
                    .map(|&v| LatticePoint::new(&[v, -v]).expect("dim 2"))
                    .collect();
                let truncated = points.len() < d.base.values.len();
                (points, truncated)
            }
        }
    }

    /// Support atoms with probabilities; only for finitely supported kinds.
    pub fn finite_support(&self) -> Option<Vec<(LatticePoint, f64)>> {
        match self {
            JumpLaw::Categorical(c) => Some(
                c.atoms
                    .iter()
                    .cloned()
                    .zip(c.probs.iter().cloned())
                    .collect(),
            ),
            JumpLaw::SimpleNeighbor { dim } => {
                let p = 1.0 / (2.0 * *dim as f64);
                Some(
                    self.support_within(1)
                        .0
                        .into_iter()
                        .map(|pt| (pt, p))
                        .collect(),
                )
            }
            JumpLaw::LazySimpleNeighbor { dim, hold_prob } => {
                let p = (1.0 - hold_prob) / (2.0 * *dim as f64);
                Some(
                    self.support_within(1)
                        .0
                        .into_iter()
                        .map(|pt| {
                            let w = if pt.is_origin() { *hold_prob } else { p };
                            (pt, w)
                        })
                        .collect(),
                )
            }
            JumpLaw::DiagonalEmbedding(d) => Some(
                d.base
                    .values
                    .iter()
                    .zip(&d.base.probs)
                    .map(|(&v, &w)| (LatticePoint::new(&[v, -v]).expect("dim 2"), w))
                    .collect(),
            ),
            _ => None,
        }
    }
}

impl PolynomialTail {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn weight(alpha: f64, x: f64, y: f64) -> f64 {
        1.0 / (1.0 + (x * x + y * y).powf(0.5 * (2.0 + alpha)))
    }

    fn build(alpha: f64, window: i64) -> Self {
        let side = (2 * window + 1) as usize;
        let mut atoms = Vec::with_capacity(side * side);
        let mut weights = Vec::with_capacity(side * side);
        let mut mass = KahanSum::new();
        for x in -window..=window {
            for y in -window..=window {
                let w = Self::weight(alpha, x as f64, y as f64);
                atoms.push(LatticePoint::new(&[x, y]).expect("dim 2"));
                weights.push(w);
                mass.add(w);
            }
        }
        let window_mass = mass.value();
        let (alias_prob, alias) = build_alias(&weights, window_mass);
        let beta = 8.0 * (1.0 + alpha).exp2() / alpha;
        let envelope_mass = beta * ((window + 1) as f64).powf(-alpha);
        Self {
            alpha,
            window,
            atoms,
            alias_prob,
            alias,
            window_mass,
            envelope_mass,
            beta,
            tail_table: Arc::new(OnceLock::new()),
        }
    }

    /// Telescoping envelope weight of sup-norm shell `s > W`:
    /// `g_s = beta (s^-a - (s+1)^-a) >= 8 s / (1 + s^(2+a))`, the total
    /// proposal weight of the shell's `8s` points.
    fn envelope_shell(&self, s: f64) -> f64 {
        // s^-a - (s+1)^-a without cancellation
        -self.beta * s.powf(-self.alpha) * (-self.alpha * (1.0 / s).ln_1p()).exp_m1()
    }

    fn sample(&self, rng: &mut CounterRng) -> Draw {
        let total = self.window_mass + self.envelope_mass;
        loop {
            if rng.next_f64() * total < self.window_mass {
                // window atom through the alias table
                let j = rng.uniform_below(self.atoms.len() as u64) as usize;
                let idx = if rng.next_f64() < self.alias_prob[j] {
                    j
                } else {
                    self.alias[j] as usize
                };
                return Draw::Step(self.atoms[idx]);
            }
            // shell from the telescoping envelope: P{S >= s} = ((W+1)/s)^alpha
            let u = rng.next_open_closed();
            let s_real = (self.window + 1) as f64 * u.powf(-1.0 / self.alpha);
            if s_real >= (1i64 << 61) as f64 {
                // direction is immaterial at this magnitude; reuse a draw
                let d = rng.uniform_below(4);
                return Draw::Saturated(SaturationDraw {
                    axis: (d >> 1) as usize,
                    negative: d & 1 == 1,
                    ln_ln_radius: s_real.ln().ln(),
                });
            }
            let s = s_real.floor() as i64;
            // uniform point on the shell perimeter (8s points)
            let t = rng.uniform_below(8 * s as u64) as i64;
            let (side, pos) = (t / (2 * s), t % (2 * s));
            let (x, y) = match side {
                0 => (s, -s + pos),
                1 => (s - pos, s),
                2 => (-s, s - pos),
                _ => (-s + pos, -s),
            };
            // thin to the true weight: accept with w(x) * 8s / g_s
            let w = Self::weight(self.alpha, x as f64, y as f64);
            let accept = w * (8 * s) as f64 / self.envelope_shell(s as f64);
            debug_assert!(accept <= 1.0 + 1e-12);
            if rng.next_f64() < accept {
                return Draw::Step(LatticePoint::new(&[x, y]).expect("dim 2"));
            }
        }
    }

    /// Exact shell sums out to `shell_limit`, power brackets beyond.
    fn tail_table(&self) -> &PolyTailTable {
        self.tail_table.get_or_init(|| {
            let shell_limit = (4 * self.window).max(2048);
            let mut shell_mass = Vec::with_capacity((shell_limit - self.window) as usize);
            let mut beyond = KahanSum::new();
            for s in (self.window + 1)..=shell_limit {
                let mut acc = KahanSum::new();
                for pos in 0..(2 * s) {
                    for (x, y) in [
                        (s, -s + pos),
                        (s - pos, s),
                        (-s, s - pos),
                        (-s + pos, -s),
                    ] {
                        acc.add(Self::weight(self.alpha, x as f64, y as f64));
                    }
                }
                shell_mass.push(acc.value());
                beyond.add(acc.value());
            }
            let exact_part = self.window_mass + beyond.value();
            // sum_{s>S} 8s/(1+s^(2+a)) <= 8 S^-a / a   (integral bound)
            let s1 = shell_limit as f64;
            let hi = 8.0 * s1.powf(-self.alpha) / self.alpha;
            // each term >= 8s/(2 (sqrt2 s)^(2+a)); integral lower bound
            let lo = 4.0 * (0.5 * (2.0 + self.alpha)).exp2().recip()
                * (s1 + 1.0).powf(-self.alpha)
                / self.alpha;
            PolyTailTable {
                shell_limit,
                shell_mass,
                normalizer: Bracket::new(exact_part + lo, exact_part + hi),
            }
        })
    }

    fn pmf(&self, x: &LatticePoint) -> Bracket {
        let w = Self::weight(self.alpha, x.coord(0) as f64, x.coord(1) as f64);
        let z = self.tail_table().normalizer;
        Bracket::new(w / z.hi, w / z.lo)
    }

    /// Partial-sum bracket for `P{|xi| > t}`.
    fn tail(&self, t: f64, norm: Norm) -> Result<Bracket, LawError> {
        let table = self.tail_table();
        let z = table.normalizer;
        // unnormalized mass of {norm <= t}, exact while t stays inside the
        // exactly summed region
        let reach = match norm {
            Norm::Sup => t.floor() as i64,
            Norm::Euclidean => t.floor() as i64, // enumerate sup-window of same size
        };
        if reach > table.shell_limit {
            // fall back to sup-shell bracketing: {sup>t} <= {euclid>t} <= {sup>t/sqrt2}
            return Err(LawError::TailUnavailable);
        }
        let mut inside = KahanSum::new();
        let r = reach.min(self.window);
        for x in -r..=r {
            for y in -r..=r {
                let p = LatticePoint::new(&[x, y]).expect("dim 2");
                let within = match norm {
                    Norm::Sup => sup_norm(&p) as f64 <= t,
                    Norm::Euclidean => euclidean_norm(&p) <= t,
                };
                if within {
                    inside.add(Self::weight(self.alpha, x as f64, y as f64));
                }
            }
        }
        if reach > self.window {
            for s in (self.window + 1)..=reach {
                match norm {
                    Norm::Sup => {
                        if (s as f64) <= t {
                            inside.add(table.shell_mass[(s - self.window - 1) as usize]);
                        }
                    }
                    Norm::Euclidean => {
                        for pos in 0..(2 * s) {
                            for (x, y) in [
                                (s, -s + pos),
                                (s - pos, s),
                                (-s, s - pos),
                                (-s + pos, -s),
                            ] {
                                let p = LatticePoint::new(&[x, y]).expect("dim 2");
                                if euclidean_norm(&p) <= t {
                                    inside.add(Self::weight(self.alpha, x as f64, y as f64));
                                }
                            }
                        }
                    }
                }
            }
        }
        let inside = inside.value();
        // P{>t} = 1 - inside/Z; bracket over the normalizer bracket
        Ok(Bracket::new(
            (1.0 - inside / z.lo).max(0.0),
            (1.0 - inside / z.hi).min(1.0),
        ))
    }
}

/// Walker/Vose alias table over unnormalized weights.
fn build_alias(weights: &[f64], total: f64) -> (Vec<f64>, Vec<u32>) {
    let n = weights.len();
    let mut prob = vec![0.0f64; n];
    let mut alias = vec![0u32; n];
    let scale = n as f64 / total;
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut scaled: Vec<f64> = weights.iter().map(|w| w * scale).collect();
    for (i, &q) in scaled.iter().enumerate() {
        if q < 1.0 {
            small.push(i);
        } else {
            large.push(i);
        }
    }
    while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
        small.pop();
        prob[s] = scaled[s];
        alias[s] = l as u32;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if scaled[l] < 1.0 {
            large.pop();
            small.push(l);
        }
    }
    for &i in small.iter().chain(large.iter()) {
        prob[i] = 1.0;
        alias[i] = i as u32;
    }
    (prob, alias)
}

impl RegVaryingRadial {
    /// `|xi|` has the exact tail `P{|xi| >= n} = n^-alpha`, so the point
    /// masses are `n^-a - (n+1)^-a ~ a n^-(1+a)`: regularly varying of
    /// index `-alpha` with an exactly evaluable tail.
    fn sample(&self, rng: &mut CounterRng) -> Draw {
        let u = rng.next_open_closed();
        let negative = rng.next_f64() >= self.pos_weight;
        let r_real = u.powf(-1.0 / self.alpha);
        if r_real >= SATURATED_MAG as f64 {
            return Draw::Saturated(SaturationDraw {
                axis: 0,
                negative,
                ln_ln_radius: (-u.ln() / self.alpha).ln(),
            });
        }
        let m = r_real.floor() as i64;
        Draw::Step(LatticePoint::axis(1, 0, m, negative))
    }
}

impl LogLogRadial {
    /// Defining tail function `min(1, a / log log t)`; for the rounded
    /// sampler this is exact at half-integer thresholds `t >= exp(exp(a))`.
    fn tail(&self, t: f64) -> f64 {
        if t <= std::f64::consts::E {
            return 1.0;
        }
        let ll = t.ln().ln();
        if ll <= self.scale {
            1.0
        } else {
            self.scale / ll
        }
    }

    /// Inverse transform `R = exp(exp(a/U))`, rounded to the nearest integer
    /// magnitude, uniform over the 4 axis directions.
    fn sample(&self, rng: &mut CounterRng) -> Draw {
        let u = rng.next_open_closed();
        let d = rng.uniform_below(4);
        let (axis, negative) = ((d >> 1) as usize, d & 1 == 1);
        let ln_ln_r = self.scale / u;
        // saturation: round(R) >= 2^62  <=>  R >= 2^62 - 1/2
        if ln_ln_r >= ((SATURATED_MAG as f64 - 0.5).ln()).ln() {
            return Draw::Saturated(SaturationDraw {
                axis,
                negative,
                ln_ln_radius: ln_ln_r,
            });
        }
        let r = ln_ln_r.exp().exp();
        let m = (r + 0.5).floor() as i64;
        Draw::Step(LatticePoint::axis(2, axis, m, negative))
    }

    fn pmf(&self, x: &LatticePoint) -> Option<Bracket> {
        let (mags, zeros): (Vec<i64>, usize) = {
            let c = [x.coord(0), x.coord(1)];
            (c.iter().map(|v| v.abs()).collect(), c.iter().filter(|v| **v == 0).count())
        };
        if zeros != 1 {
            return None;
        }
        let m = mags.iter().copied().max().unwrap();
        if m < self.min_magnitude {
            return None;
        }
        // magnitude mass from the exact half-integer tail, split over 4 axes
        let upper = if m == self.min_magnitude {
            1.0
        } else {
            self.tail(m as f64 - 0.5)
        };
        let mass = upper - self.tail(m as f64 + 0.5);
        Some(Bracket::exact(0.25 * mass))
    }
}
