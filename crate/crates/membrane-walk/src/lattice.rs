//! Lattice points, covariance matrices and the membrane map.
//!
//! Coordinates are 64-bit signed integers. A step that would overflow a
//! coordinate aborts the run with a distinct error rather than wrapping;
//! astronomically large sampled kick radii are clamped separately as
//! "saturated" events (see [`crate::law`]).

use crate::law::JumpLaw;
use thiserror::Error;

/// Dimension guard: the artifact targets desk-scale experiments.
pub const MAX_DIM: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("dimension {0} outside supported range 1..={MAX_DIM}")]
    BadDimension(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("coordinate overflow while adding lattice points")]
    Overflow,
    #[error("covariance matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("covariance matrix is not symmetric at ({0},{1})")]
    NotSymmetric(usize, usize),
    #[error("covariance matrix is not positive semidefinite")]
    NotPositiveSemidefinite,
    #[error("membrane points must be distinct")]
    DuplicateMembranePoint,
}

/// A point of `Z^d`, `d <= 8`. Copyable so the walk engine never allocates
/// in the step loop.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    coords: [i64; MAX_DIM],
    dim: u8,
}

impl LatticePoint {
    pub fn new(coords: &[i64]) -> Result<Self, LatticeError> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(LatticeError::BadDimension(coords.len()));
        }
        let mut buf = [0i64; MAX_DIM];
        buf[..coords.len()].copy_from_slice(coords);
        Ok(Self {
            coords: buf,
            dim: coords.len() as u8,
        })
    }

    pub fn origin(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        Self {
            coords: [0; MAX_DIM],
            dim: dim as u8,
        }
    }

    /// Unit step `sign * e_axis`.
    pub fn unit(dim: usize, axis: usize, negative: bool) -> Self {
        let mut p = Self::origin(dim);
        p.coords[axis] = if negative { -1 } else { 1 };
        p
    }

    /// Axis vector `sign * magnitude * e_axis`.
    pub fn axis(dim: usize, axis: usize, magnitude: i64, negative: bool) -> Self {
        let mut p = Self::origin(dim);
        p.coords[axis] = if negative { -magnitude } else { magnitude };
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn coord(&self, i: usize) -> i64 {
        self.coords[i]
    }

    pub fn is_origin(&self) -> bool {
        self.coords().iter().all(|&c| c == 0)
    }

    /// Checked translation; `Err` on coordinate overflow.
    #[inline]
    pub fn checked_add(&self, step: &LatticePoint) -> Result<LatticePoint, LatticeError> {
        debug_assert_eq!(self.dim, step.dim);
        let mut out = *self;
        for i in 0..self.dim as usize {
            out.coords[i] = self.coords[i]
                .checked_add(step.coords[i])
                .ok_or(LatticeError::Overflow)?;
        }
        Ok(out)
    }

    pub fn checked_sub(&self, step: &LatticePoint) -> Result<LatticePoint, LatticeError> {
        debug_assert_eq!(self.dim, step.dim);
        let mut out = *self;
        for i in 0..self.dim as usize {
            out.coords[i] = self.coords[i]
                .checked_sub(step.coords[i])
                .ok_or(LatticeError::Overflow)?;
        }
        Ok(out)
    }

    pub fn negated(&self) -> LatticePoint {
        let mut out = *self;
        for i in 0..self.dim as usize {
            out.coords[i] = -self.coords[i];
        }
        out
    }
}

impl std::fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// `max_i |x_i|`.
#[inline]
pub fn sup_norm(p: &LatticePoint) -> u64 {
    let mut m = 0u64;
    for &c in p.coords() {
        m = m.max(c.unsigned_abs());
    }
    m
}

/// `sqrt(sum x_i^2)`.
#[inline]
pub fn euclidean_norm(p: &LatticePoint) -> f64 {
    let mut s = 0.0;
    for &c in p.coords() {
        let x = c as f64;
        s += x * x;
    }
    s.sqrt()
}

/// Norm choice recorded by every experiment that states a tail condition.
/// The two are equivalent up to constants for every asymptotic statement the
/// experiments test; the heavy-tail counterexample fixes `Sup`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    Sup,
    Euclidean,
}

impl Norm {
    pub fn of(&self, p: &LatticePoint) -> f64 {
        match self {
            Norm::Sup => sup_norm(p) as f64,
            Norm::Euclidean => euclidean_norm(p),
        }
    }
}

/// Symmetric positive semidefinite `d x d` matrix (lattice units squared).
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    entries: Vec<f64>, // row major
}

const SYM_TOL: f64 = 1e-9;

impl CovarianceMatrix {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self, LatticeError> {
        if entries.len() != dim * dim {
            return Err(LatticeError::NotSquare {
                rows: entries.len() / dim.max(1),
                cols: dim,
            });
        }
        let m = Self { dim, entries };
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (m.get(i, j) - m.get(j, i)).abs() > SYM_TOL {
                    return Err(LatticeError::NotSymmetric(i, j));
                }
            }
        }
        if !m.is_positive_semidefinite() {
            return Err(LatticeError::NotPositiveSemidefinite);
        }
        Ok(m)
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self, LatticeError> {
        let dim = diag.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, &v) in diag.iter().enumerate() {
            entries[i * dim + i] = v;
        }
        Self::new(dim, entries)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Determinant by LU with partial pivoting; `d <= 8` keeps this cheap.
    pub fn determinant(&self) -> f64 {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut pivot = col;
            for r in (col + 1)..n {
                if a[r * n + col].abs() > a[pivot * n + col].abs() {
                    pivot = r;
                }
            }
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for c in 0..n {
                    a.swap(col * n + c, pivot * n + c);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for r in (col + 1)..n {
                let f = a[r * n + col] / d;
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
        det
    }

    /// `det > 0` flags the nondegenerate case the Donsker experiment needs.
    pub fn is_nondegenerate(&self) -> bool {
        self.determinant() > 0.0
    }

    /// All principal minors nonnegative (within tolerance). For `d <= 8`
    /// there are at most 255 of them, so brute force is fine and avoids an
    /// eigenvalue routine.
    fn is_positive_semidefinite(&self) -> bool {
        let n = self.dim;
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let k = idx.len();
            let mut sub = Vec::with_capacity(k * k);
            for &r in &idx {
                for &c in &idx {
                    sub.push(self.get(r, c));
                }
            }
            let minor = Self {
                dim: k,
                entries: sub,
            }
            .determinant();
            if minor < -1e-9 {
                return false;
            }
        }
        true
    }
}

/// The finite perturbation set: membrane points together with their kick
/// laws. Lookup is a linear scan; membranes are small by construction and
/// the scan beats hashing in the step loop.
#[derive(Clone, Debug)]
pub struct Membrane {
    points: Vec<LatticePoint>,
    laws: Vec<JumpLaw>,
}

impl Membrane {
    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            laws: Vec::new(),
        }
    }

    pub fn new(entries: Vec<(LatticePoint, JumpLaw)>) -> Result<Self, LatticeError> {
        let mut points = Vec::with_capacity(entries.len());
        let mut laws = Vec::with_capacity(entries.len());
        for (p, law) in entries {
            if let Some(first) = points.first() {
                let f: &LatticePoint = first;
                if f.dim() != p.dim() {
                    return Err(LatticeError::DimensionMismatch(f.dim(), p.dim()));
                }
            }
            if points.contains(&p) {
                return Err(LatticeError::DuplicateMembranePoint);
            }
            points.push(p);
            laws.push(law);
        }
        Ok(Self { points, laws })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }

    /// Kick law of a stored point; `None` marks an absent point.
    pub fn law_of(&self, p: &LatticePoint) -> Option<&JumpLaw> {
        self.index_of(p).map(|i| &self.laws[i])
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn laws(&self) -> &[JumpLaw] {
        &self.laws
    }

    pub fn law(&self, idx: usize) -> &JumpLaw {
        &self.laws[idx]
    }
}
