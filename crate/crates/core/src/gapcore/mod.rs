//! The gap functionals MenuGap, SupGap and AlignGap.
//!
//! Indices follow the 1-based convention of the definitions: index `i`
//! refers to `x_i`, and witnesses range over `0..i` with `0` the zero
//! sentinel. Report vectors are stored 0-based, so `terms[i - 1]` is the
//! gap at index `i`.

mod sequence;

pub use sequence::{AllocationSequence, PointSequence, ScalarSequence};

use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::{diff_dot, dot, l1_norm, Scalar};

/// Per-index breakdown of a gap functional.
#[derive(Clone, Debug, PartialEq)]
pub struct GapReport<T> {
    /// Raw minimum, possibly negative.
    pub terms: Vec<T>,
    /// Value entering the objective: `terms` for MenuGap, `max(0, terms)` for AlignGap.
    pub clipped_terms: Vec<T>,
    pub normalized_terms: Vec<T>,
    pub cumulative: Vec<T>,
    /// Smallest `j < i` attaining the minimum.
    pub argmin_witness: Vec<usize>,
    pub total: T,
}

impl<T: Scalar> GapReport<T> {
    fn assemble(raw: Vec<(T, usize)>, norms: &[T], clip: bool) -> Self {
        let n = raw.len();
        let mut terms = Vec::with_capacity(n);
        let mut clipped_terms = Vec::with_capacity(n);
        let mut normalized_terms = Vec::with_capacity(n);
        let mut cumulative = Vec::with_capacity(n);
        let mut argmin_witness = Vec::with_capacity(n);
        let mut total = T::zero();
        for ((term, w), norm) in raw.into_iter().zip(norms) {
            let c = if clip && term.is_negative() {
                T::zero()
            } else {
                term.clone()
            };
            let nt = c.div_ref(norm);
            total = total.add_ref(&nt);
            terms.push(term);
            clipped_terms.push(c);
            normalized_terms.push(nt);
            cumulative.push(total.clone());
            argmin_witness.push(w);
        }
        GapReport {
            terms,
            clipped_terms,
            normalized_terms,
            cumulative,
            argmin_witness,
            total,
        }
    }

    /// Rebuilds a report from precomputed raw terms and witnesses.
    pub fn from_raw(terms: Vec<T>, witnesses: Vec<usize>, norms: &[T], clip: bool) -> Self {
        Self::assemble(terms.into_iter().zip(witnesses).collect(), norms, clip)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// CSV with columns `index,raw,clipped,normalized,cumulative,witness`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "index",
            "raw",
            "clipped",
            "normalized",
            "cumulative",
            "witness",
        ])?;
        for i in 0..self.len() {
            w.write_record([
                (i + 1).to_string(),
                self.terms[i].to_text(),
                self.clipped_terms[i].to_text(),
                self.normalized_terms[i].to_text(),
                self.cumulative[i].to_text(),
                self.argmin_witness[i].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<csv>".into(),
            source: e,
        })?;
        Ok(())
    }
}

fn check_dims<T: Scalar>(x: &PointSequence<T>, k: usize) -> Result<()> {
    if x.k() != k {
        return Err(Error::DimensionMismatch {
            expected: x.k(),
            found: k,
        });
    }
    Ok(())
}

/// `min_{0 <= j < i} (q_i - q_j) . x_i` for every `i`, with the smallest witness.
pub fn menu_gap_raw<T: Scalar>(points: &[Vec<T>], allocs: &[Vec<T>]) -> Vec<(T, usize)> {
    let mut out = Vec::with_capacity(points.len());
    for (idx, x) in points.iter().enumerate() {
        let i = idx + 1;
        let qi = &allocs[i];
        let mut best = dot(qi, x);
        let mut witness = 0;
        for (j, qj) in allocs.iter().enumerate().take(i).skip(1) {
            let g = diff_dot(qi, qj, x);
            if g < best {
                best = g;
                witness = j;
            }
        }
        out.push((best, witness));
    }
    out
}

/// MenuGap(X, Q) with per-index detail; negative terms count unclipped.
pub fn menu_gap_terms<T: Scalar>(
    x: &PointSequence<T>,
    q: &AllocationSequence<T>,
) -> Result<GapReport<T>> {
    check_dims(x, q.k())?;
    if q.len() != x.len() {
        return Err(Error::length(format!(
            "{} points but {} allocations after q_0",
            x.len(),
            q.len()
        )));
    }
    let raw = menu_gap_raw(x.points(), q.allocations());
    Ok(GapReport::assemble(raw, &x.l1_norms(), false))
}

/// SupGap(X) = MenuGap(X, X) with the zero sentinel as `q_0`.
pub fn sup_gap<T: Scalar>(x: &PointSequence<T>) -> Result<GapReport<T>> {
    if !x.in_unit_cube() {
        return Err(Error::invalid(
            "points",
            "SupGap requires every point in [0,1]^k",
        ));
    }
    let q = AllocationSequence::from_menu_rows(x.k(), x.points().to_vec())?;
    menu_gap_terms(x, &q)
}

/// `min_{j < i} x_i . (c_i x_i - c_j x_j)` for every `i`, with the smallest witness.
pub fn align_gap_raw<T: Scalar>(points: &[Vec<T>], scalars: &[T]) -> Vec<(T, usize)> {
    let n = points.len();
    let mut out = Vec::with_capacity(n);
    for idx in 0..n {
        let x = &points[idx];
        let ci = &scalars[idx + 1];
        let self_term = ci.mul_ref(&dot(x, x));
        let mut best = self_term.clone();
        let mut witness = 0;
        for j in 1..=idx {
            let cj = &scalars[j];
            let g = self_term.sub_ref(&cj.mul_ref(&dot(x, &points[j - 1])));
            if g < best {
                best = g;
                witness = j;
            }
        }
        out.push((best, witness));
    }
    out
}

/// AlignGap(X, C) with per-index detail; terms are clipped at zero.
pub fn align_gap_terms<T: Scalar>(
    x: &PointSequence<T>,
    c: &ScalarSequence<T>,
) -> Result<GapReport<T>> {
    if c.len() != x.len() {
        return Err(Error::length(format!(
            "{} points but {} scalars after c_0",
            x.len(),
            c.len()
        )));
    }
    let raw = align_gap_raw(x.points(), c.scalars());
    Ok(GapReport::assemble(raw, &x.l1_norms(), true))
}

/// Embeds an aligned sequence into a menu whose MenuGap dominates its AlignGap.
///
/// Indices with positive scalar gap receive `c_i x_i`. The rest reuse the
/// earlier allocation with the largest dot product against `x_i` (smallest
/// index on ties), which pins their gap at exactly zero.
pub fn align_to_menu<T: Scalar>(
    x: &PointSequence<T>,
    c: &ScalarSequence<T>,
) -> Result<AllocationSequence<T>> {
    if c.len() != x.len() {
        return Err(Error::length(format!(
            "{} points but {} scalars after c_0",
            x.len(),
            c.len()
        )));
    }
    let raw = align_gap_raw(x.points(), c.scalars());
    let k = x.k();
    let mut allocs: Vec<Vec<T>> = Vec::with_capacity(x.len() + 1);
    allocs.push(vec![T::zero(); k]);
    for (idx, (sgap, _)) in raw.iter().enumerate() {
        let xi = &x.points()[idx];
        let q = if sgap.is_positive() {
            let ci = c.get(idx + 1);
            xi.iter().map(|v| clamp_unit(ci.mul_ref(v))).collect()
        } else {
            let mut best = 0;
            let mut best_val = dot(&allocs[0], xi);
            for (j, qj) in allocs.iter().enumerate().skip(1) {
                let v = dot(qj, xi);
                if v > best_val {
                    best_val = v;
                    best = j;
                }
            }
            allocs[best].clone()
        };
        allocs.push(q);
    }
    AllocationSequence::new(k, allocs)
}

fn clamp_unit<T: Scalar>(v: T) -> T {
    if v > T::one() {
        T::one()
    } else if v.is_negative() {
        T::zero()
    } else {
        v
    }
}

/// Normalizing weights `1/||x_i||_1`.
pub fn inverse_l1<T: Scalar>(points: &[Vec<T>]) -> Vec<T> {
    points
        .iter()
        .map(|p| T::one().div_ref(&l1_norm(p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn ri(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn pts(rows: &[&[i64]]) -> PointSequence<Rational> {
        let k = rows[0].len();
        PointSequence::new(
            k,
            rows.iter()
                .map(|r| r.iter().map(|&v| ri(v)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn allocs(rows: &[&[i64]]) -> AllocationSequence<Rational> {
        let k = rows[0].len();
        AllocationSequence::new(
            k,
            rows.iter()
                .map(|r| r.iter().map(|&v| ri(v)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_point_k1() {
        let x = pts(&[&[2]]);
        let q = allocs(&[&[0], &[1]]);
        let rep = menu_gap_terms(&x, &q).unwrap();
        assert_eq!(rep.terms, vec![ri(2)]);
        assert_eq!(rep.total, ri(1));
    }

    #[test]
    fn two_axis_points() {
        let x = pts(&[&[1, 0], &[0, 1]]);
        let q = allocs(&[&[0, 0], &[1, 0], &[1, 1]]);
        let rep = menu_gap_terms(&x, &q).unwrap();
        assert_eq!(rep.terms, vec![ri(1), ri(1)]);
        assert_eq!(rep.total, ri(2));
        assert_eq!(rep.argmin_witness, vec![0, 0]);
    }

    #[test]
    fn negative_menu_gap_is_kept() {
        let x = pts(&[&[1, 0], &[1, 0]]);
        let q = allocs(&[&[0, 0], &[1, 0], &[0, 1]]);
        let rep = menu_gap_terms(&x, &q).unwrap();
        assert_eq!(rep.terms[1], ri(-1));
        assert_eq!(rep.clipped_terms[1], ri(-1));
        assert_eq!(rep.total, ri(0));
        assert_eq!(rep.cumulative, vec![ri(1), ri(0)]);
    }

    #[test]
    fn length_and_dimension_errors() {
        let x = pts(&[&[1, 0]]);
        let q = allocs(&[&[0, 0]]);
        assert!(matches!(
            menu_gap_terms(&x, &q),
            Err(Error::LengthMismatch { .. })
        ));
        let q3 = allocs(&[&[0, 0, 0], &[1, 0, 0]]);
        assert!(matches!(
            menu_gap_terms(&x, &q3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sup_gap_examples() {
        let x = PointSequence::from_rows(1, vec![vec![ri(0)], vec![ri(1)]]).unwrap();
        assert_eq!(sup_gap(&x).unwrap().total, ri(1));
        let x = pts(&[&[1, 0], &[0, 1]]);
        let rep = sup_gap(&x).unwrap();
        assert_eq!(rep.terms, vec![ri(1), ri(1)]);
        assert_eq!(rep.total, ri(2));
        let half = x.scaled(&r(1, 2)).unwrap();
        assert_eq!(sup_gap(&half).unwrap().total, ri(1));
        assert!(sup_gap(&pts(&[&[2, 0]])).is_err());
    }

    #[test]
    fn align_gap_examples() {
        let x = pts(&[&[1, 0]]);
        let c = ScalarSequence::new(vec![ri(0), ri(1)], &x).unwrap();
        assert_eq!(align_gap_terms(&x, &c).unwrap().total, ri(1));

        let x = pts(&[&[1, 0], &[1, 0]]);
        let c = ScalarSequence::new(vec![ri(0), ri(1), ri(1)], &x).unwrap();
        let rep = align_gap_terms(&x, &c).unwrap();
        assert_eq!(rep.terms[1], ri(0));
        assert_eq!(rep.argmin_witness[1], 1);
        assert_eq!(rep.total, ri(1));

        let c = ScalarSequence::new(vec![ri(0), ri(1), r(1, 2)], &x).unwrap();
        let rep = align_gap_terms(&x, &c).unwrap();
        assert_eq!(rep.terms[1], r(-1, 2));
        assert_eq!(rep.clipped_terms[1], ri(0));
        assert_eq!(rep.total, ri(1));
    }

    #[test]
    fn align_to_menu_examples() {
        let x = pts(&[&[1, 0]]);
        let c = ScalarSequence::new(vec![ri(0), ri(1)], &x).unwrap();
        let q = align_to_menu(&x, &c).unwrap();
        assert_eq!(q.get(1), &[ri(1), ri(0)]);

        let x = pts(&[&[1, 0], &[1, 0]]);
        let c = ScalarSequence::new(vec![ri(0), ri(1), r(1, 2)], &x).unwrap();
        let q = align_to_menu(&x, &c).unwrap();
        assert_eq!(q.get(2), &[ri(1), ri(0)]);
        let mg = menu_gap_terms(&x, &q).unwrap().total;
        let ag = align_gap_terms(&x, &c).unwrap().total;
        assert_eq!(mg, ri(1));
        assert!(mg >= ag);
    }

    #[test]
    fn csv_has_expected_columns() {
        let x = pts(&[&[1, 0], &[0, 1]]);
        let q = allocs(&[&[0, 0], &[1, 0], &[1, 1]]);
        let rep = menu_gap_terms(&x, &q).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("index,raw,clipped,normalized,cumulative,witness")
        );
        assert_eq!(lines.next(), Some("1,1,1,1,1,0"));
        assert_eq!(lines.next(), Some("2,1,1,1,2,0"));
    }
}
