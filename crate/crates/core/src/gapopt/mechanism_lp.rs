//! Revenue-optimal single-buyer mechanism for a finite-support distribution.
//!
//! Written in utility form: for each support point `v`, variables `q(v)` and
//! `u(v) = v.q(v) - p(v) >= 0`. Incentive compatibility for the ordered pair
//! `(v, w)` reads `u(w) - u(v) + (v - w).q(w) <= 0`, so every right-hand side
//! is zero or one and the origin is feasible.

use crate::auctions::{DiscreteDistribution, Mechanism, MenuEntry};
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

use super::simplex::{LinearProgram, LpStatus};

pub const DEFAULT_MECHANISM_LP_CAP: usize = 100;

#[derive(Clone, Debug)]
pub struct OptimalMechanism<T> {
    pub mechanism: Mechanism<T>,
    /// Menu entry meant for each support point of the (merged) distribution.
    pub assignment: Vec<usize>,
    pub revenue: T,
}

pub fn optimal_mechanism_lp<T: Scalar>(d: &DiscreteDistribution<T>) -> Result<OptimalMechanism<T>> {
    optimal_mechanism_lp_capped(d, DEFAULT_MECHANISM_LP_CAP)
}

pub fn optimal_mechanism_lp_capped<T: Scalar>(
    d: &DiscreteDistribution<T>,
    cap: usize,
) -> Result<OptimalMechanism<T>> {
    let d = DiscreteDistribution::merged(d.k(), d.support().to_vec())?;
    let m = d.len();
    if m > cap {
        return Err(Error::cap("support size", m, cap));
    }
    let k = d.k();
    let support = d.support();
    let qvar = |s: usize, t: usize| s * k + t;
    let uvar = |s: usize| m * k + s;
    let nvars = m * k + m;

    let mut objective = vec![T::zero(); nvars];
    for (s, (v, f)) in support.iter().enumerate() {
        for t in 0..k {
            objective[qvar(s, t)] = f.mul_ref(&v[t]);
        }
        objective[uvar(s)] = -f.clone();
    }
    let mut rows = Vec::with_capacity(m * (m - 1) + m * k);
    let mut rhs = Vec::with_capacity(rows.capacity());
    for (a, (v, _)) in support.iter().enumerate() {
        for (b, (w, _)) in support.iter().enumerate() {
            if a == b {
                continue;
            }
            let mut row = vec![T::zero(); nvars];
            row[uvar(b)] = T::one();
            row[uvar(a)] = -T::one();
            for t in 0..k {
                row[qvar(b, t)] = v[t].sub_ref(&w[t]);
            }
            rows.push(row);
            rhs.push(T::zero());
        }
    }
    for s in 0..m {
        for t in 0..k {
            let mut row = vec![T::zero(); nvars];
            row[qvar(s, t)] = T::one();
            rows.push(row);
            rhs.push(T::one());
        }
    }
    let sol = LinearProgram::new(objective, rows, rhs)?.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!(
            "revenue program reported {:?}; it is feasible and bounded by construction{}",
            sol.status,
            if T::EXACT {
                ""
            } else {
                " (retry with the rational backend)"
            }
        )));
    }
    let mut entries = Vec::with_capacity(m);
    let mut revenue = T::zero();
    for (s, (v, f)) in support.iter().enumerate() {
        let q: Vec<T> = (0..k).map(|t| clamp01(sol.x[qvar(s, t)].clone())).collect();
        let u = if sol.x[uvar(s)].is_negative() {
            T::zero()
        } else {
            sol.x[uvar(s)].clone()
        };
        let price = dot(v, &q).sub_ref(&u);
        revenue = revenue.add_ref(&f.mul_ref(&price));
        entries.push(MenuEntry { q, price });
    }
    let (mechanism, assignment) = Mechanism::dedup(k, entries)?;
    Ok(OptimalMechanism {
        mechanism,
        assignment,
        revenue,
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
    use crate::auctions::{brev, verify_ic_ir};
    use crate::scalar::Rational;

    fn ri(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn full_surplus_single_point() {
        let d = DiscreteDistribution::new(2, vec![(vec![ri(1), ri(1)], ri(1))]).unwrap();
        let opt = optimal_mechanism_lp(&d).unwrap();
        assert_eq!(opt.revenue, ri(2));
    }

    #[test]
    fn single_item_posted_price() {
        let half = Rational::ratio(1, 2);
        let d =
            DiscreteDistribution::new(1, vec![(vec![ri(1)], half.clone()), (vec![ri(2)], half)])
                .unwrap();
        let opt = optimal_mechanism_lp(&d).unwrap();
        assert_eq!(opt.revenue, ri(1));
    }

    #[test]
    fn two_point_exceeds_bundle() {
        let half = Rational::ratio(1, 2);
        let d = DiscreteDistribution::new(
            2,
            vec![
                (vec![ri(4), ri(0)], half.clone()),
                (vec![ri(0), ri(16)], half),
            ],
        )
        .unwrap();
        let opt = optimal_mechanism_lp(&d).unwrap();
        assert_eq!(opt.revenue, ri(10));
        assert!(opt.revenue >= brev(&d).1);
        let rep = verify_ic_ir(&d, &opt.mechanism, Some(&opt.assignment), 0.0).unwrap();
        assert!(rep.ok);
    }

    #[test]
    fn cap_enforced() {
        let d = DiscreteDistribution::new(1, vec![(vec![1.0], 0.5), (vec![2.0], 0.5)]).unwrap();
        assert!(matches!(
            optimal_mechanism_lp_capped(&d, 1),
            Err(Error::CapExceeded { .. })
        ));
    }
}
