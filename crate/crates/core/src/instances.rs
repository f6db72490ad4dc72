//! Random instance generators shared by the property suites and `reproduce`.
//!
//! Every coordinate is a small dyadic rational, so float and rational
//! instances drawn from the same stream are numerically identical.

use rand::Rng;

use crate::auctions::{DiscreteDistribution, Mechanism, MenuEntry};
use crate::error::Result;
use crate::gapcore::PointSequence;
use crate::scalar::{dot, linf_norm, Scalar};

/// Nonzero points with coordinates in `{0, 1/8, ..., 1}`.
pub fn random_sequence<T: Scalar, R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
) -> Result<PointSequence<T>> {
    let points = (0..n)
        .map(|_| loop {
            let p: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=8)).collect();
            if p.iter().any(|&c| c != 0) {
                break p.into_iter().map(|c| T::ratio(c, 8)).collect();
            }
        })
        .collect();
    PointSequence::new(k, points)
}

/// Support of at most `max_support` points in `{0, ..., 8}^k`, integer weights 1..=8.
pub fn random_distribution<T: Scalar, R: Rng>(
    rng: &mut R,
    max_support: usize,
    max_k: usize,
) -> Result<DiscreteDistribution<T>> {
    let k = rng.gen_range(1..=max_k);
    let m = rng.gen_range(1..=max_support);
    let mut raw: Vec<(Vec<i64>, i64)> = Vec::with_capacity(m);
    for _ in 0..m {
        let v: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=8)).collect();
        let w = rng.gen_range(1..=8);
        match raw.iter_mut().find(|(u, _)| *u == v) {
            Some(slot) => slot.1 += w,
            None => raw.push((v, w)),
        }
    }
    let total: i64 = raw.iter().map(|(_, w)| w).sum();
    let support = raw
        .into_iter()
        .map(|(v, w)| (v.into_iter().map(T::from_i64).collect(), T::ratio(w, total)))
        .collect();
    DiscreteDistribution::new(k, support)
}

/// Up to `entries` options with allocations in `{0, 1/4, ..., 1}^k` and prices in `{0, 1/4, ..., max_price}`.
pub fn random_mechanism<T: Scalar, R: Rng>(
    rng: &mut R,
    k: usize,
    entries: usize,
    max_price: i64,
) -> Result<Mechanism<T>> {
    let menu = (0..entries)
        .map(|_| MenuEntry {
            q: (0..k).map(|_| T::ratio(rng.gen_range(0..=4), 4)).collect(),
            price: T::ratio(rng.gen_range(0..=4 * max_price), 4),
        })
        .collect();
    Ok(Mechanism::dedup(k, menu)?.0)
}

/// One aligned option per nonzero support point: `q = t v / ||v||_inf`, price a fraction of `v.q`.
pub fn random_aligned_mechanism<T: Scalar, R: Rng>(
    rng: &mut R,
    d: &DiscreteDistribution<T>,
) -> Result<Mechanism<T>> {
    let mut menu = Vec::new();
    for (v, _) in d.support() {
        if v.iter().all(Scalar::is_zero) {
            continue;
        }
        let t = T::ratio(rng.gen_range(1..=4), 4);
        let s = t.div_ref(&linf_norm(v));
        let q: Vec<T> = v.iter().map(|c| c.mul_ref(&s)).collect();
        let price = dot(v, &q).mul_ref(&T::ratio(rng.gen_range(1..=4), 4));
        menu.push(MenuEntry { q, price });
    }
    Ok(Mechanism::dedup(d.k(), menu)?.0)
}

/// Menu whose prices sit at random fractions of the support's bundle values,
/// so every entry is within reach of some buyer whatever the value scale.
pub fn random_menu_for<T: Scalar, R: Rng>(
    rng: &mut R,
    d: &DiscreteDistribution<T>,
    entries: usize,
) -> Result<Mechanism<T>> {
    let k = d.k();
    let menu = (0..entries)
        .map(|_| {
            let (v, _) = &d.support()[rng.gen_range(0..d.len())];
            MenuEntry {
                q: (0..k).map(|_| T::ratio(rng.gen_range(0..=4), 4)).collect(),
                price: crate::scalar::l1_norm(v).mul_ref(&T::ratio(rng.gen_range(1..=8), 8)),
            }
        })
        .collect();
    Ok(Mechanism::dedup(k, menu)?.0)
}

/// Menus posting a single grand-bundle price at each distinct positive support sum.
pub fn bundle_price_menus<T: Scalar>(d: &DiscreteDistribution<T>) -> Result<Vec<Mechanism<T>>> {
    let mut sums: Vec<T> = Vec::new();
    for (v, _) in d.support() {
        let s = crate::scalar::l1_norm(v);
        if s.is_positive() && !sums.contains(&s) {
            sums.push(s);
        }
    }
    sums.into_iter()
        .map(|s| {
            Mechanism::new(
                d.k(),
                vec![MenuEntry {
                    q: vec![T::one(); d.k()],
                    price: s,
                }],
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::scalar::Rational;

    #[test]
    fn float_and_rational_draws_agree() {
        let a: DiscreteDistribution<f64> = random_distribution(&mut stream(3, "d"), 8, 3).unwrap();
        let b: DiscreteDistribution<Rational> =
            random_distribution(&mut stream(3, "d"), 8, 3).unwrap();
        assert_eq!(a, b.cast::<f64>());
    }

    #[test]
    fn aligned_mechanism_is_aligned() {
        let d: DiscreteDistribution<Rational> =
            random_distribution(&mut stream(5, "d"), 8, 3).unwrap();
        let m = random_aligned_mechanism(&mut stream(5, "m"), &d).unwrap();
        for e in m.menu() {
            assert!(e.q.iter().all(|c| *c <= Rational::one()));
        }
    }
}
