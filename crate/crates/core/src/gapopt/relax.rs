//! The Lagrangian relaxation chain for the aligned gap of unit-norm sequences.
//!
//! For unit vectors, `||x||_1 >= 1` and `||x||_inf >= 1/sqrt(2)`, so
//! dropping the normalization and widening the scalar box to `[0, sqrt 2]`
//! only increases the aligned gap (the primed program). Dualizing the
//! consecutive-pair constraints with multiplier 1 and grouping by `c_i`
//! gives `max sum_i c_i x_i.(x_i - x_{i+1})` over the same box, solved by
//! `c_i = sqrt 2` on positive coefficients.
//!
//! The clipped objective `max(0, sgap_i)` keeps this from being a true
//! Lagrangian bound on the primed program: on `(1,0), (1,1)/sqrt 2, (0,1)`
//! the scalars `(sqrt 2, 0, sqrt 2)` give `2 sqrt 2` against a relaxation
//! value of `sqrt 2 (3 - sqrt 2)`. The report therefore carries both the
//! primed search value and a search on the aligned gap itself, and only the
//! latter is compared with the relaxation.

use serde::Serialize;

use crate::constructions::check_unit_norm;
use crate::error::Result;
use crate::gapcore::PointSequence;
use crate::scalar::{dot, Scalar, Sqrt2Scaled};

use super::search::{AlignProblem, DEFAULT_SWEEPS};

/// Rational just below `sqrt 2`, the scalar cap used when searching the primed program.
pub const SQRT2_CAP: (i64, i64) = (141_421_356, 100_000_000);

#[derive(Clone, Debug)]
pub struct RelaxationReport<T> {
    /// Search lower bound on the aligned gap.
    pub aligngap_search: T,
    /// Search lower bound on the primed program.
    pub aligngap_prime: T,
    /// Dualized program evaluated at the maximizing scalars with all scalar gaps set to 0.
    pub lagrel1: Sqrt2Scaled<T>,
    /// Ungrouped sum `sum_i x_i.(c_i x_i - c_{i-1} x_{i-1})` at the maximizing scalars.
    pub lagrel2: Sqrt2Scaled<T>,
    /// Grouped optimum `sqrt 2 * sum_i max(0, x_i.(x_i - x_{i+1}))`.
    pub lagrel: Sqrt2Scaled<T>,
    /// Maximizer indicator: `c_i = sqrt 2` when set.
    pub active: Vec<bool>,
    /// The primed search value exceeds the relaxation.
    pub prime_exceeds_lagrel: bool,
    /// Equalities of the three relaxation forms and `aligngap_search <= lagrel`.
    pub chain_valid: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelaxationSummary {
    pub aligngap_search: f64,
    pub aligngap_prime: f64,
    pub lagrel1: f64,
    pub lagrel2: f64,
    pub lagrel: f64,
    pub prime_exceeds_lagrel: bool,
    pub chain_valid: bool,
}

impl<T: Scalar> RelaxationReport<T> {
    pub fn summary(&self) -> RelaxationSummary {
        RelaxationSummary {
            aligngap_search: self.aligngap_search.to_f64(),
            aligngap_prime: self.aligngap_prime.to_f64(),
            lagrel1: self.lagrel1.to_f64(),
            lagrel2: self.lagrel2.to_f64(),
            lagrel: self.lagrel.to_f64(),
            prime_exceeds_lagrel: self.prime_exceeds_lagrel,
            chain_valid: self.chain_valid,
        }
    }
}

/// Coefficients `a_i = x_i.(x_i - x_{i+1})` with `x_{N+1} = 0`.
pub fn lagrel_coefficients<T: Scalar>(x: &PointSequence<T>) -> Vec<T> {
    let pts = x.points();
    (0..pts.len())
        .map(|i| {
            let own = dot(&pts[i], &pts[i]);
            match pts.get(i + 1) {
                Some(next) => own.sub_ref(&dot(&pts[i], next)),
                None => own,
            }
        })
        .collect()
}

/// Grouped relaxation value; requires unit-norm points.
pub fn lagrel_value<T: Scalar>(x: &PointSequence<T>) -> Result<Sqrt2Scaled<T>> {
    check_unit_norm(x)?;
    let mut coeff = T::zero();
    for a in lagrel_coefficients(x) {
        if a.is_positive() {
            coeff = coeff.add_ref(&a);
        }
    }
    Ok(Sqrt2Scaled::new(coeff))
}

pub fn lagrel_chain<T: Scalar>(
    x: &PointSequence<T>,
    restarts: usize,
    seed: u64,
    tolerance: f64,
) -> Result<RelaxationReport<T>> {
    check_unit_norm(x)?;
    let pts = x.points();
    let n = pts.len();
    let coeffs = lagrel_coefficients(x);
    let active: Vec<bool> = coeffs.iter().map(Scalar::is_positive).collect();

    let mut grouped = T::zero();
    for (a, on) in coeffs.iter().zip(&active) {
        if *on {
            grouped = grouped.add_ref(a);
        }
    }

    // Ungrouped: sum_i x_i.(s_i x_i - s_{i-1} x_{i-1}) in units of sqrt 2.
    let mut ungrouped = T::zero();
    for i in 0..n {
        if active[i] {
            ungrouped = ungrouped.add_ref(&dot(&pts[i], &pts[i]));
        }
        if i > 0 && active[i - 1] {
            ungrouped = ungrouped.sub_ref(&dot(&pts[i], &pts[i - 1]));
        }
    }

    // First dual form at sgap_i = 0: max(0, 0) - 0 vanishes termwise.
    let lagrel1 = ungrouped.clone();

    let cap = T::ratio(SQRT2_CAP.0, SQRT2_CAP.1);
    let problem = AlignProblem::new(pts, vec![T::one(); n], vec![cap; n])?;
    let aligngap_prime = problem.search(restarts, DEFAULT_SWEEPS, seed).value;
    let aligngap_search = AlignProblem::align_gap(x)?
        .search(restarts, DEFAULT_SWEEPS, seed)
        .value;

    let lagrel = Sqrt2Scaled::new(grouped);
    let lagrel1 = Sqrt2Scaled::new(lagrel1);
    let lagrel2 = Sqrt2Scaled::new(ungrouped);
    let equal = |a: &Sqrt2Scaled<T>, b: &Sqrt2Scaled<T>| a.coeff.approx_eq(&b.coeff, tolerance);
    let prime_exceeds_lagrel = !lagrel.bounds(&aligngap_prime, tolerance);
    let chain_valid = lagrel.bounds(&aligngap_search, tolerance)
        && equal(&lagrel1, &lagrel2)
        && equal(&lagrel2, &lagrel);
    Ok(RelaxationReport {
        aligngap_search,
        aligngap_prime,
        lagrel1,
        lagrel2,
        lagrel,
        active,
        prime_exceeds_lagrel,
        chain_valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_x_sequence, lagrel_closed_form};
    use crate::scalar::Rational;

    #[test]
    fn chain_on_construction_prefix() {
        let (x, _) = build_x_sequence::<Rational>(3).unwrap();
        let rep = lagrel_chain(&x, 4, 0, 0.0).unwrap();
        assert!(rep.chain_valid);
        assert_eq!(rep.lagrel1, rep.lagrel2);
        assert_eq!(rep.lagrel2, rep.lagrel);
        let closed = lagrel_closed_form(&x, true).unwrap();
        assert!((closed.to_f64() - rep.lagrel.to_f64()).abs() < 1e-12);
    }

    #[test]
    fn primed_program_escapes_relaxation() {
        let (x, _) = build_x_sequence::<f64>(2).unwrap();
        assert_eq!(x.len(), 3);
        let rep = lagrel_chain(&x, 4, 0, 1e-9).unwrap();
        assert!(rep.prime_exceeds_lagrel);
        assert!(rep.chain_valid);
        assert!((rep.aligngap_prime - 2.0 * 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_unit() {
        let x = PointSequence::new(2, vec![vec![0.5, 0.5]]).unwrap();
        assert!(lagrel_chain(&x, 0, 0, 1e-9).is_err());
    }
}
