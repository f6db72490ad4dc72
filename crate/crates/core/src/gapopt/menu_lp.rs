//! MenuGap(X) as a linear program over the allocations.
//!
//! The objective `sum_i min_j (q_i - q_j).x_i / ||x_i||_1` is concave in Q,
//! so the epigraph form is exact: one variable per gap, bounded above by
//! every candidate difference. Gaps are shifted by `||x_i||_1` so all
//! variables are nonnegative and the origin is feasible.

use crate::error::{Error, Result};
use crate::gapcore::{menu_gap_terms, AllocationSequence, PointSequence};
use crate::scalar::{l1_norm, Scalar};

use super::simplex::{LinearProgram, LpStatus};

pub const DEFAULT_MENU_LP_CAP: usize = 60;

#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub objective: T,
    pub q_star: AllocationSequence<T>,
    pub status: LpStatus,
    /// Multipliers of the gap rows `(i, j)` in row-major order of `i`, then of the box rows.
    pub certificate: Vec<T>,
}

/// Optimal MenuGap(X) with default size cap.
pub fn menu_gap_lp<T: Scalar>(x: &PointSequence<T>) -> Result<LpSolution<T>> {
    menu_gap_lp_capped(x, DEFAULT_MENU_LP_CAP)
}

pub fn menu_gap_lp_capped<T: Scalar>(x: &PointSequence<T>, cap: usize) -> Result<LpSolution<T>> {
    let n = x.len();
    if n > cap {
        return Err(Error::cap("sequence length", n, cap));
    }
    let k = x.k();
    if n == 0 {
        return Ok(LpSolution {
            objective: T::zero(),
            q_star: AllocationSequence::new(k, vec![vec![T::zero(); k]])?,
            status: LpStatus::Optimal,
            certificate: Vec::new(),
        });
    }
    let qvar = |i: usize, d: usize| (i - 1) * k + d;
    let hvar = |i: usize| n * k + (i - 1);
    let nvars = n * k + n;
    let norms: Vec<T> = x.points().iter().map(|p| l1_norm(p)).collect();

    let mut objective = vec![T::zero(); nvars];
    for i in 1..=n {
        objective[hvar(i)] = T::one().div_ref(&norms[i - 1]);
    }
    let mut rows = Vec::with_capacity(n * (n + 1) / 2 + n * k);
    let mut rhs = Vec::with_capacity(rows.capacity());
    for i in 1..=n {
        let xi = x.point(i);
        for j in 0..i {
            // h_i - (q_i - q_j).x_i <= ||x_i||_1
            let mut row = vec![T::zero(); nvars];
            row[hvar(i)] = T::one();
            for d in 0..k {
                row[qvar(i, d)] = -xi[d].clone();
                if j > 0 {
                    row[qvar(j, d)] = xi[d].clone();
                }
            }
            rows.push(row);
            rhs.push(norms[i - 1].clone());
        }
    }
    for i in 1..=n {
        for d in 0..k {
            let mut row = vec![T::zero(); nvars];
            row[qvar(i, d)] = T::one();
            rows.push(row);
            rhs.push(T::one());
        }
    }
    let sol = LinearProgram::new(objective, rows, rhs)?.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!(
            "MenuGap program reported {:?}; it is feasible and bounded by construction{}",
            sol.status,
            if T::EXACT {
                ""
            } else {
                " (retry with the rational backend)"
            }
        )));
    }
    let mut allocs = vec![vec![T::zero(); k]];
    for i in 1..=n {
        allocs.push((0..k).map(|d| clamp01(sol.x[qvar(i, d)].clone())).collect());
    }
    let q_star = AllocationSequence::new(k, allocs)?;
    // Report the value realised by the witness allocations.
    let objective = menu_gap_terms(x, &q_star)?.total;
    if !T::EXACT {
        let lp_value = sol.objective.to_f64() - n as f64;
        let got = objective.to_f64();
        if (lp_value - got).abs() > 1e-7 * lp_value.abs().max(1.0) {
            return Err(Error::Solver(format!(
                "float LP value {lp_value} disagrees with its witness {got}; retry with the rational backend"
            )));
        }
    } else {
        debug_assert_eq!(objective, sol.objective.sub_ref(&T::from_i64(n as i64)));
    }
    Ok(LpSolution {
        objective,
        q_star,
        status: LpStatus::Optimal,
        certificate: sol.duals,
    })
}

fn clamp01<T: Scalar>(v: T) -> T {
    if v.is_negative() {
        T::zero()
    } else if v > T::one() {
        T::one()
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn ri(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn k1_is_one() {
        let x = PointSequence::new(1, vec![vec![ri(3)], vec![ri(1)], vec![ri(7)], vec![ri(2)]])
            .unwrap();
        let sol = menu_gap_lp(&x).unwrap();
        assert_eq!(sol.objective, ri(1));
    }

    #[test]
    fn two_axis_points() {
        let x = PointSequence::new(2, vec![vec![ri(1), ri(0)], vec![ri(0), ri(1)]]).unwrap();
        let sol = menu_gap_lp(&x).unwrap();
        assert_eq!(sol.objective, ri(2));
        let gap = menu_gap_terms(&x, &sol.q_star).unwrap();
        assert_eq!(gap.total, ri(2));
    }

    #[test]
    fn float_backend_agrees() {
        let x =
            PointSequence::new(2, vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        let f = menu_gap_lp(&x).unwrap().objective;
        let r = menu_gap_lp(&x.cast::<Rational>()).unwrap().objective;
        assert!((f - r.to_f64()).abs() < 1e-9);
    }

    #[test]
    fn cap_enforced() {
        let x = PointSequence::new(1, vec![vec![1.0]; 5]).unwrap();
        assert!(matches!(
            menu_gap_lp_capped(&x, 4),
            Err(Error::CapExceeded { .. })
        ));
    }
}
