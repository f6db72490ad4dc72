use crate::error::{Error, Result};
use crate::scalar::{l1_norm, linf_norm, Scalar};

/// Ordered valuation directions `x_1, ..., x_N` in the nonnegative orthant.
///
/// `points` never contains the zero sentinel. `origin` records whether the
/// source carried an explicit leading `x_0 = 0`, which is how SupGap inputs
/// are usually written; the sentinel is implicit everywhere else.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSequence<T> {
    k: usize,
    points: Vec<Vec<T>>,
    origin: bool,
}

impl<T: Scalar> PointSequence<T> {
    pub fn new(k: usize, points: Vec<Vec<T>>) -> Result<Self> {
        Self::with_origin(k, points, false)
    }

    /// Builds from rows that may start with the zero sentinel.
    pub fn from_rows(k: usize, mut rows: Vec<Vec<T>>) -> Result<Self> {
        let origin = rows
            .first()
            .is_some_and(|r| r.len() == k && r.iter().all(Scalar::is_zero));
        if origin {
            rows.remove(0);
        }
        Self::with_origin(k, rows, origin)
    }

    pub fn with_origin(k: usize, points: Vec<Vec<T>>, origin: bool) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k", "dimension must be positive"));
        }
        for (idx, p) in points.iter().enumerate() {
            if p.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: p.len(),
                });
            }
            for v in p {
                if !v.is_finite() || v.is_negative() {
                    return Err(Error::invalid(
                        format!("points[{}]", idx + 1),
                        format!(
                            "coordinate {} is not a finite nonnegative number",
                            v.to_text()
                        ),
                    ));
                }
            }
            if p.iter().all(Scalar::is_zero) {
                return Err(Error::ZeroPoint { index: idx + 1 });
            }
        }
        Ok(Self { k, points, origin })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_origin(&self) -> bool {
        self.origin
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    /// `x_i` with 1-based indexing; `x_0` is the zero vector.
    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i - 1]
    }

    pub fn into_points(self) -> Vec<Vec<T>> {
        self.points
    }

    pub fn l1_norms(&self) -> Vec<T> {
        self.points.iter().map(|p| l1_norm(p)).collect()
    }

    pub fn linf_norms(&self) -> Vec<T> {
        self.points.iter().map(|p| linf_norm(p)).collect()
    }

    /// Rows as serialized, including the sentinel when flagged.
    pub fn rows(&self) -> Vec<Vec<T>> {
        let mut out = Vec::with_capacity(self.len() + 1);
        if self.origin {
            out.push(vec![T::zero(); self.k]);
        }
        out.extend(self.points.iter().cloned());
        out
    }

    pub fn prefix(&self, n: usize) -> Self {
        Self {
            k: self.k,
            points: self.points[..n.min(self.len())].to_vec(),
            origin: self.origin,
        }
    }

    /// Multiplies every point by `s > 0`.
    pub fn scaled(&self, s: &T) -> Result<Self> {
        if !s.is_positive() {
            return Err(Error::invalid("scale", "must be positive"));
        }
        let points = self
            .points
            .iter()
            .map(|p| p.iter().map(|v| v.mul_ref(s)).collect())
            .collect();
        Ok(Self {
            k: self.k,
            points,
            origin: self.origin,
        })
    }

    pub fn cast<U: Scalar>(&self) -> PointSequence<U> {
        PointSequence {
            k: self.k,
            points: cast_rows(&self.points),
            origin: self.origin,
        }
    }

    pub fn in_unit_cube(&self) -> bool {
        self.points.iter().flatten().all(|v| *v <= T::one())
    }
}

/// Allocations `q_0 = 0, q_1, ..., q_N` in `[0,1]^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationSequence<T> {
    k: usize,
    allocations: Vec<Vec<T>>,
}

impl<T: Scalar> AllocationSequence<T> {
    /// `allocations[0]` must be the zero vector.
    pub fn new(k: usize, allocations: Vec<Vec<T>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k", "dimension must be positive"));
        }
        let first = allocations
            .first()
            .ok_or_else(|| Error::invalid("allocations", "missing q_0"))?;
        if first.len() != k || !first.iter().all(Scalar::is_zero) {
            return Err(Error::invalid(
                "allocations[0]",
                "q_0 must be the zero vector",
            ));
        }
        for (idx, q) in allocations.iter().enumerate() {
            if q.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: q.len(),
                });
            }
            for v in q {
                if !v.is_finite() || v.is_negative() || *v > T::one() {
                    return Err(Error::invalid(
                        format!("allocations[{idx}]"),
                        format!("coordinate {} outside [0,1]", v.to_text()),
                    ));
                }
            }
        }
        Ok(Self { k, allocations })
    }

    /// Prepends `q_0 = 0` to the given rows.
    pub fn from_menu_rows(k: usize, rows: Vec<Vec<T>>) -> Result<Self> {
        let mut all = Vec::with_capacity(rows.len() + 1);
        all.push(vec![T::zero(); k]);
        all.extend(rows);
        Self::new(k, all)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of allocations excluding `q_0`.
    pub fn len(&self) -> usize {
        self.allocations.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `q_i`, `i = 0..=N`.
    pub fn get(&self, i: usize) -> &[T] {
        &self.allocations[i]
    }

    pub fn allocations(&self) -> &[Vec<T>] {
        &self.allocations
    }

    pub fn prefix(&self, n: usize) -> Self {
        Self {
            k: self.k,
            allocations: self.allocations[..=n.min(self.len())].to_vec(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> AllocationSequence<U> {
        AllocationSequence {
            k: self.k,
            allocations: cast_rows(&self.allocations),
        }
    }
}

/// Alignment scalars `c_0 = 0, c_1, ..., c_N` for a paired point sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSequence<T> {
    scalars: Vec<T>,
}

/// Slack allowed on `c_i * ||x_i||_inf <= 1` for the float backend.
const FLOAT_SCALAR_SLACK: f64 = 1e-12;

impl<T: Scalar> ScalarSequence<T> {
    /// Validates `c_0 = 0` and `0 <= c_i <= 1/||x_i||_inf` against `x`.
    pub fn new(scalars: Vec<T>, x: &PointSequence<T>) -> Result<Self> {
        if scalars.len() != x.len() + 1 {
            return Err(Error::length(format!(
                "{} scalars for {} points; expected N + 1 including c_0",
                scalars.len(),
                x.len()
            )));
        }
        if !scalars[0].is_zero() {
            return Err(Error::invalid("scalars[0]", "c_0 must be 0"));
        }
        for (i, (c, p)) in scalars[1..].iter().zip(x.points()).enumerate() {
            if !c.is_finite() || c.is_negative() {
                return Err(Error::invalid(
                    format!("scalars[{}]", i + 1),
                    "must be a finite nonnegative number",
                ));
            }
            let reach = c.mul_ref(&linf_norm(p));
            let ok = if T::EXACT {
                reach <= T::one()
            } else {
                reach.to_f64() <= 1.0 + FLOAT_SCALAR_SLACK
            };
            if !ok {
                return Err(Error::invalid(
                    format!("scalars[{}]", i + 1),
                    format!("c_i * ||x_i||_inf = {} exceeds 1", reach.to_text()),
                ));
            }
        }
        Ok(Self { scalars })
    }

    /// `c_i`, `i = 0..=N`.
    pub fn get(&self, i: usize) -> &T {
        &self.scalars[i]
    }

    pub fn scalars(&self) -> &[T] {
        &self.scalars
    }

    pub fn len(&self) -> usize {
        self.scalars.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cast<U: Scalar>(&self) -> ScalarSequence<U> {
        ScalarSequence {
            scalars: self.scalars.iter().map(crate::scalar::cast).collect(),
        }
    }
}

pub(crate) fn cast_rows<T: Scalar, U: Scalar>(rows: &[Vec<T>]) -> Vec<Vec<U>> {
    rows.iter()
        .map(|r| r.iter().map(crate::scalar::cast).collect())
        .collect()
}
