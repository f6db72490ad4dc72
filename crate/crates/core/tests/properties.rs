use std::path::Path;

use menugap::auctions::{
    brev, buyer_choice, c_expensive, dyadic_band, parity_split, revenue, verify_ic_ir,
    DiscreteDistribution, Mechanism,
};
use menugap::gapcore::{align_gap_terms, menu_gap_terms, sup_gap, ScalarSequence};
use menugap::gapopt::{align_gap_search, menu_gap_lp, optimal_mechanism_lp};
use menugap::instances::{random_distribution, random_menu_for, random_sequence};
use menugap::io;
use menugap::rng::indexed_stream;
use menugap::scalar::{linf_norm, Rational, Scalar};
use menugap::transforms::{hn_construct, theorem_main_pipeline, HnParams};
use proptest::prelude::*;
use rand::Rng;

type Q = Rational;

fn dist(seed: u64, support: usize, k: usize) -> DiscreteDistribution<Q> {
    random_distribution(&mut indexed_stream(seed, "dist", 0), support, k).unwrap()
}

fn menu_for(seed: u64, d: &DiscreteDistribution<Q>) -> Mechanism<Q> {
    let mut rng = indexed_stream(seed, "menu", 0);
    let n = rng.gen_range(1..=6);
    random_menu_for(&mut rng, d, n).unwrap()
}

fn priced(m: &Mechanism<Q>) -> i64 {
    m.menu().iter().filter(|e| e.price.is_positive()).count() as i64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_witness_attains_objective(seed: u64, n in 1usize..6, k in 1usize..3) {
        let x = random_sequence::<Q, _>(&mut indexed_stream(seed, "x", 0), n, k).unwrap();
        let sol = menu_gap_lp(&x).unwrap();
        prop_assert_eq!(menu_gap_terms(&x, &sol.q_star).unwrap().total, sol.objective);
    }

    #[test]
    fn menugap_is_scale_invariant(seed: u64, n in 1usize..6, k in 1usize..4, s in 1i64..50) {
        let x = random_sequence::<Q, _>(&mut indexed_stream(seed, "x", 0), n, k).unwrap();
        let sol = menu_gap_lp(&x).unwrap();
        let scaled = x.scaled(&Q::ratio(s, 7)).unwrap();
        prop_assert_eq!(menu_gap_terms(&scaled, &sol.q_star).unwrap().total, sol.objective);
    }

    #[test]
    fn lower_bounds_sit_below_lp(seed: u64, n in 1usize..6, k in 1usize..4) {
        let x = random_sequence::<Q, _>(&mut indexed_stream(seed, "x", 0), n, k).unwrap();
        let lp = menu_gap_lp(&x).unwrap().objective;
        prop_assert!(sup_gap(&x).unwrap().total <= lp);
        let (align, _) = align_gap_search(&x, 2, seed).unwrap();
        prop_assert!(align <= lp);
    }

    #[test]
    fn align_terms_are_clipped(seed: u64, n in 1usize..8, k in 1usize..4) {
        let mut rng = indexed_stream(seed, "x", 0);
        let x = random_sequence::<Q, _>(&mut rng, n, k).unwrap();
        let mut c = vec![Q::zero()];
        for p in x.points() {
            c.push(Q::ratio(rng.gen_range(0..=4), 4).div_ref(&linf_norm(p)));
        }
        let rep = align_gap_terms(&x, &ScalarSequence::new(c, &x).unwrap()).unwrap();
        prop_assert!(rep.clipped_terms.iter().all(|t| !t.is_negative()));
        prop_assert!(!rep.total.is_negative());
    }

    #[test]
    fn revenue_accounting(seed: u64, support in 1usize..7, k in 1usize..4) {
        let d = dist(seed, support, k);
        let m = menu_for(seed, &d);
        let rep = revenue(&d, &m, 0.0).unwrap();
        prop_assert!(rep.arev <= rep.rev);
        prop_assert!(rep.utilities.iter().all(|u| !u.is_negative()));
        let (_, b) = brev(&d);
        prop_assert!(rep.rev <= Q::from_i64(priced(&m)).mul_ref(&b));
        prop_assert!(verify_ic_ir(&d, &m, None, 0.0).unwrap().ok);
    }

    #[test]
    fn optimal_mechanism_dominates(seed: u64, support in 1usize..5, k in 1usize..3) {
        let d = dist(seed, support, k);
        let opt = optimal_mechanism_lp(&d).unwrap();
        prop_assert!(brev(&d).1 <= opt.revenue);
        prop_assert!(verify_ic_ir(&d, &opt.mechanism, Some(&opt.assignment), 0.0).unwrap().ok);
        let m = menu_for(seed, &d);
        prop_assert!(revenue(&d, &m, 0.0).unwrap().rev <= opt.revenue);
    }

    #[test]
    fn choice_is_utility_maximal(seed: u64, support in 1usize..6, k in 1usize..4) {
        let d = dist(seed, support, k);
        let m = menu_for(seed, &d);
        for (v, _) in d.support() {
            let ch = buyer_choice(&m, v, 0.0).unwrap();
            for e in m.menu() {
                prop_assert!(e.utility(v) <= ch.utility);
            }
        }
    }

    #[test]
    fn structuring_partitions_menu(seed: u64, support in 1usize..6, k in 1usize..4, cn in 1i64..16) {
        let d = dist(seed, support, k);
        let m = menu_for(seed, &d);
        let c = Q::ratio(cn, 8);
        let ce = c_expensive(&m, &c).unwrap();
        prop_assert!(ce.is_c_expensive(&c));
        let (odd, even) = parity_split(&ce, &c).unwrap();
        prop_assert_eq!(odd.len() + even.len(), ce.len() + 1);
        let two = Q::from_i64(2);
        for (part, parity) in [(&odd, 1), (&even, 0)] {
            for e in part.menu().iter().filter(|e| !e.is_zero_option()) {
                let i = dyadic_band(&e.price, &c).unwrap();
                prop_assert_eq!(i.rem_euclid(2), parity);
                let lo = (0..i).fold(c.clone(), |acc, _| acc.mul_ref(&two));
                prop_assert!(lo <= e.price && e.price < lo.mul_ref(&two));
            }
        }
    }

    #[test]
    fn io_round_trips(seed: u64, support in 1usize..6, k in 1usize..4) {
        let d = dist(seed, support, k);
        let p = Path::new("mem");
        prop_assert_eq!(&io::distribution_from_json::<Q>(&io::distribution_to_json(&d), p).unwrap(), &d);
        let df = d.cast::<f64>();
        prop_assert_eq!(&io::distribution_from_json::<f64>(&io::distribution_to_json(&df), p).unwrap(), &df);
        let m = menu_for(seed, &d);
        prop_assert_eq!(&io::mechanism_from_json::<Q>(&io::mechanism_to_json(&m, None), p).unwrap().mechanism, &m);
    }

    #[test]
    fn float_to_rational_is_exact(x in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
        let r = Q::from_f64(x).unwrap();
        prop_assert_eq!(r.to_f64(), x);
        prop_assert_eq!(f64::from_rational(&r), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn main_pipeline_certifies(seed: u64, support in 1usize..6, k in 1usize..4) {
        let d = dist(seed, support, k);
        let cert = theorem_main_pipeline(&d, 0.0).unwrap();
        prop_assert!(cert.all_checks_pass(), "{}", cert.to_json());
    }

    #[test]
    fn float_lp_matches_rational(seed: u64, n in 1usize..6, k in 1usize..4) {
        let x = random_sequence::<Q, _>(&mut indexed_stream(seed, "x", 0), n, k).unwrap();
        let exact = menu_gap_lp(&x).unwrap().objective.to_f64();
        let float = menu_gap_lp(&x.cast::<f64>()).unwrap().objective;
        prop_assert!((exact - float).abs() <= 1e-9 * exact.abs().max(1.0));
    }

    #[test]
    fn hn_menu_is_incentive_compatible(seed: u64, n in 1usize..4, k in 1usize..3) {
        let x = random_sequence::<Q, _>(&mut indexed_stream(seed, "x", 0), n, k).unwrap();
        let q = menu_gap_lp(&x).unwrap().q_star;
        let params = HnParams::new(Q::from_i64(10), n).unwrap();
        let hn = hn_construct(&x, &q, &params, 0.0).unwrap();
        prop_assert!(hn.ic.ok);
        let rep = revenue(&hn.distribution, &hn.mechanism, 0.0).unwrap();
        prop_assert!(rep.rev <= optimal_mechanism_lp(&hn.distribution).unwrap().revenue);
    }
}
