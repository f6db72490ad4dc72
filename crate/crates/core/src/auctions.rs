//! Single-buyer auction semantics over finite-support value distributions.
//!
//! A buyer with values `v` picks the menu entry maximizing `v.q - p`. Ties
//! go to the higher price, then the lower menu index. On the float backend
//! utilities within a relative tolerance of the maximum count as tied.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{dot, is_parallel, l1_norm, Scalar};

/// Default relative tolerance for float comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution<T> {
    k: usize,
    support: Vec<(Vec<T>, T)>,
}

impl<T: Scalar> DiscreteDistribution<T> {
    /// Probabilities must be positive and sum to 1 (exactly, or within 1e-12 on floats).
    pub fn new(k: usize, support: Vec<(Vec<T>, T)>) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k", "dimension must be positive"));
        }
        if support.is_empty() {
            return Err(Error::invalid("support", "must not be empty"));
        }
        let mut total = T::zero();
        for (idx, (v, p)) in support.iter().enumerate() {
            if v.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite() || x.is_negative()) {
                return Err(Error::invalid(
                    format!("support[{idx}].v"),
                    "coordinates must be finite and nonnegative",
                ));
            }
            if !p.is_finite() || !p.is_positive() {
                return Err(Error::invalid(
                    format!("support[{idx}].p"),
                    "must be positive",
                ));
            }
            total = total.add_ref(p);
        }
        let sums_to_one = if T::EXACT {
            total == T::one()
        } else {
            (total.to_f64() - 1.0).abs() <= 1e-12
        };
        if !sums_to_one {
            return Err(Error::invalid(
                "support",
                format!("probabilities sum to {}, not 1", total.to_text()),
            ));
        }
        for i in 0..support.len() {
            for j in 0..i {
                if support[i].0 == support[j].0 {
                    return Err(Error::invalid(
                        format!("support[{i}].v"),
                        format!("duplicates support[{j}].v"),
                    ));
                }
            }
        }
        Ok(Self { k, support })
    }

    /// Sums the probability of repeated support points instead of rejecting them.
    pub fn merged(k: usize, support: Vec<(Vec<T>, T)>) -> Result<Self> {
        let mut out: Vec<(Vec<T>, T)> = Vec::with_capacity(support.len());
        for (v, p) in support {
            match out.iter_mut().find(|(w, _)| *w == v) {
                Some(slot) => slot.1 = slot.1.add_ref(&p),
                None => out.push((v, p)),
            }
        }
        Self::new(k, out)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn support(&self) -> &[(Vec<T>, T)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn cast<U: Scalar>(&self) -> DiscreteDistribution<U> {
        DiscreteDistribution {
            k: self.k,
            support: self
                .support
                .iter()
                .map(|(v, p)| {
                    (
                        v.iter().map(crate::scalar::cast).collect(),
                        crate::scalar::cast(p),
                    )
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MenuEntry<T> {
    pub q: Vec<T>,
    pub price: T,
}

impl<T: Scalar> MenuEntry<T> {
    pub fn zero(k: usize) -> Self {
        MenuEntry {
            q: vec![T::zero(); k],
            price: T::zero(),
        }
    }

    pub fn is_zero_option(&self) -> bool {
        self.price.is_zero() && self.q.iter().all(Scalar::is_zero)
    }

    pub fn utility(&self, v: &[T]) -> T {
        dot(v, &self.q).sub_ref(&self.price)
    }
}

/// A finite menu that always contains the zero option.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism<T> {
    k: usize,
    menu: Vec<MenuEntry<T>>,
}

impl<T: Scalar> Mechanism<T> {
    /// Validates entries; the zero option is prepended when absent.
    pub fn new(k: usize, menu: Vec<MenuEntry<T>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k", "dimension must be positive"));
        }
        for (idx, e) in menu.iter().enumerate() {
            if e.q.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: e.q.len(),
                });
            }
            if e.q
                .iter()
                .any(|x| !x.is_finite() || x.is_negative() || *x > T::one())
            {
                return Err(Error::invalid(
                    format!("menu[{idx}].q"),
                    "allocations must lie in [0,1]^k",
                ));
            }
            if !e.price.is_finite() {
                return Err(Error::invalid(
                    format!("menu[{idx}].price"),
                    "must be finite",
                ));
            }
        }
        for i in 0..menu.len() {
            for j in 0..i {
                if menu[i] == menu[j] {
                    return Err(Error::invalid(
                        format!("menu[{i}]"),
                        format!("duplicates menu[{j}]"),
                    ));
                }
            }
        }
        let mut menu = menu;
        if !menu.iter().any(MenuEntry::is_zero_option) {
            menu.insert(0, MenuEntry::zero(k));
        }
        Ok(Self { k, menu })
    }

    /// Merges identical entries; returns the mechanism and, for each input
    /// entry, its index in the result.
    pub fn dedup(k: usize, entries: Vec<MenuEntry<T>>) -> Result<(Self, Vec<usize>)> {
        let mut menu: Vec<MenuEntry<T>> = Vec::with_capacity(entries.len() + 1);
        let has_zero = entries.iter().any(MenuEntry::is_zero_option);
        if !has_zero {
            menu.push(MenuEntry::zero(k));
        }
        let mut map = Vec::with_capacity(entries.len());
        for e in entries {
            match menu.iter().position(|m| *m == e) {
                Some(p) => map.push(p),
                None => {
                    map.push(menu.len());
                    menu.push(e);
                }
            }
        }
        Ok((Self::new(k, menu)?, map))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn menu(&self) -> &[MenuEntry<T>] {
        &self.menu
    }

    pub fn len(&self) -> usize {
        self.menu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.menu.is_empty()
    }

    pub fn zero_index(&self) -> usize {
        self.menu
            .iter()
            .position(MenuEntry::is_zero_option)
            .expect("zero option present by construction")
    }

    pub fn cast<U: Scalar>(&self) -> Mechanism<U> {
        Mechanism {
            k: self.k,
            menu: self
                .menu
                .iter()
                .map(|e| MenuEntry {
                    q: e.q.iter().map(crate::scalar::cast).collect(),
                    price: crate::scalar::cast(&e.price),
                })
                .collect(),
        }
    }

    /// Every non-zero entry is priced at least `c`.
    pub fn is_c_expensive(&self, c: &T) -> bool {
        self.menu
            .iter()
            .all(|e| e.is_zero_option() || e.price >= *c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Choice<T> {
    pub entry: usize,
    pub utility: T,
    pub tie: bool,
}

fn tie_scale<T: Scalar>(v: &[T]) -> f64 {
    l1_norm(v).to_f64().max(1.0)
}

/// The entry a buyer with values `v` purchases.
pub fn buyer_choice<T: Scalar>(m: &Mechanism<T>, v: &[T], tol: f64) -> Result<Choice<T>> {
    if v.len() != m.k() {
        return Err(Error::DimensionMismatch {
            expected: m.k(),
            found: v.len(),
        });
    }
    let utils: Vec<T> = m.menu().iter().map(|e| e.utility(v)).collect();
    let mut best = utils[0].clone();
    for u in &utils[1..] {
        if *u > best {
            best = u.clone();
        }
    }
    let slack = tol * tie_scale(v);
    let tied = |u: &T| {
        if T::EXACT {
            *u == best
        } else {
            best.to_f64() - u.to_f64() <= slack
        }
    };
    let mut entry: Option<usize> = None;
    let mut count = 0;
    for (i, u) in utils.iter().enumerate() {
        if !tied(u) {
            continue;
        }
        count += 1;
        entry = match entry {
            Some(e) if m.menu()[e].price >= m.menu()[i].price => Some(e),
            _ => Some(i),
        };
    }
    let entry = entry.expect("the maximum is attained");
    Ok(Choice {
        utility: utils[entry].clone(),
        entry,
        tie: count > 1,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PurchaseRecord {
    pub support_index: usize,
    pub entry: usize,
    pub utility: String,
    pub payment: String,
    pub aligned: bool,
    pub tie: bool,
}

#[derive(Clone, Debug)]
pub struct RevenueReport<T> {
    pub entries: Vec<usize>,
    pub utilities: Vec<T>,
    pub payments: Vec<T>,
    pub aligned: Vec<bool>,
    pub ties: Vec<bool>,
    pub rev: T,
    pub arev: T,
    pub brev_price: T,
    pub brev: T,
}

impl<T: Scalar> RevenueReport<T> {
    pub fn records(&self) -> Vec<PurchaseRecord> {
        (0..self.entries.len())
            .map(|i| PurchaseRecord {
                support_index: i,
                entry: self.entries[i],
                utility: self.utilities[i].to_text(),
                payment: self.payments[i].to_text(),
                aligned: self.aligned[i],
                tie: self.ties[i],
            })
            .collect()
    }
}

fn check_k<T: Scalar>(d: &DiscreteDistribution<T>, m: &Mechanism<T>) -> Result<()> {
    if d.k() != m.k() {
        return Err(Error::DimensionMismatch {
            expected: d.k(),
            found: m.k(),
        });
    }
    Ok(())
}

/// Expected payment, aligned payment and best bundle price in one pass.
pub fn revenue<T: Scalar>(
    d: &DiscreteDistribution<T>,
    m: &Mechanism<T>,
    tol: f64,
) -> Result<RevenueReport<T>> {
    check_k(d, m)?;
    let n = d.len();
    let mut rep = RevenueReport {
        entries: Vec::with_capacity(n),
        utilities: Vec::with_capacity(n),
        payments: Vec::with_capacity(n),
        aligned: Vec::with_capacity(n),
        ties: Vec::with_capacity(n),
        rev: T::zero(),
        arev: T::zero(),
        brev_price: T::zero(),
        brev: T::zero(),
    };
    for (v, f) in d.support() {
        let ch = buyer_choice(m, v, tol)?;
        let e = &m.menu()[ch.entry];
        let pay = e.price.clone();
        let aligned = is_parallel(&e.q, v, tol);
        let weighted = f.mul_ref(&pay);
        rep.rev = rep.rev.add_ref(&weighted);
        if aligned {
            rep.arev = rep.arev.add_ref(&weighted);
        }
        rep.entries.push(ch.entry);
        rep.utilities.push(ch.utility);
        rep.payments.push(pay);
        rep.aligned.push(aligned);
        rep.ties.push(ch.tie);
    }
    let (p, b) = brev(d);
    rep.brev_price = p;
    rep.brev = b;
    Ok(rep)
}

pub fn rev<T: Scalar>(d: &DiscreteDistribution<T>, m: &Mechanism<T>, tol: f64) -> Result<T> {
    Ok(revenue(d, m, tol)?.rev)
}

pub fn arev<T: Scalar>(d: &DiscreteDistribution<T>, m: &Mechanism<T>, tol: f64) -> Result<T> {
    Ok(revenue(d, m, tol)?.arev)
}

/// Best single price on the grand bundle: `max_p p * Pr[||v||_1 >= p]`.
///
/// The objective only jumps down right after a support value, so the
/// distinct bundle values are the only candidates. Ties go to the lower price.
pub fn brev<T: Scalar>(d: &DiscreteDistribution<T>) -> (T, T) {
    let mut vals: Vec<(T, T)> = d
        .support()
        .iter()
        .map(|(v, f)| (l1_norm(v), f.clone()))
        .collect();
    vals.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut best = (T::zero(), T::zero());
    let mut mass = T::zero();
    let mut i = 0;
    while i < vals.len() {
        let price = vals[i].0.clone();
        while i < vals.len() && vals[i].0 == price {
            mass = mass.add_ref(&vals[i].1);
            i += 1;
        }
        if !price.is_positive() {
            break;
        }
        let value = price.mul_ref(&mass);
        if value >= best.1 {
            best = (price, value);
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct IcViolation<T> {
    pub support_index: usize,
    pub chosen: usize,
    pub preferred: usize,
    pub margin: T,
}

#[derive(Clone, Debug)]
pub struct IcReport<T> {
    pub violations: Vec<IcViolation<T>>,
    /// Largest `u(other) - u(chosen)` over all support points and entries.
    pub worst_margin: T,
    pub ok: bool,
}

/// Checks that each support point weakly prefers its entry to every other and to nothing.
///
/// `assignment[i]` names the entry support point `i` is meant to buy;
/// without it, the buyer's own choice is checked, which can only fail on
/// the float backend.
pub fn verify_ic_ir<T: Scalar>(
    d: &DiscreteDistribution<T>,
    m: &Mechanism<T>,
    assignment: Option<&[usize]>,
    tol: f64,
) -> Result<IcReport<T>> {
    check_k(d, m)?;
    if let Some(a) = assignment {
        if a.len() != d.len() {
            return Err(Error::length(
                "assignment must name one entry per support point",
            ));
        }
        if let Some(bad) = a.iter().find(|&&e| e >= m.len()) {
            return Err(Error::invalid(
                "assignment",
                format!("entry {bad} is out of range"),
            ));
        }
    }
    let mut violations = Vec::new();
    let mut worst: Option<T> = None;
    for (i, (v, _)) in d.support().iter().enumerate() {
        let chosen = match assignment {
            Some(a) => a[i],
            None => buyer_choice(m, v, tol)?.entry,
        };
        let u = m.menu()[chosen].utility(v);
        let slack = tol * tie_scale(v);
        for (e, entry) in m.menu().iter().enumerate() {
            if e == chosen {
                continue;
            }
            let margin = entry.utility(v).sub_ref(&u);
            let bad = if T::EXACT {
                margin.is_positive()
            } else {
                margin.to_f64() > slack
            };
            if bad {
                violations.push(IcViolation {
                    support_index: i,
                    chosen,
                    preferred: e,
                    margin: margin.clone(),
                });
            }
            if worst.as_ref().is_none_or(|w| margin > *w) {
                worst = Some(margin);
            }
        }
    }
    Ok(IcReport {
        ok: violations.is_empty(),
        worst_margin: worst.unwrap_or_else(T::zero),
        violations,
    })
}

/// Drops every entry priced below `c`, keeping the zero option.
pub fn c_expensive<T: Scalar>(m: &Mechanism<T>, c: &T) -> Result<Mechanism<T>> {
    if c.is_negative() {
        return Err(Error::invalid("c", "must be nonnegative"));
    }
    let kept = m
        .menu()
        .iter()
        .filter(|e| !e.is_zero_option() && e.price >= *c)
        .cloned()
        .collect();
    Mechanism::new(m.k(), kept)
}

/// `floor(log2(p / c))` for `p >= c > 0`, by exact doubling.
pub fn dyadic_band<T: Scalar>(p: &T, c: &T) -> Result<i64> {
    if !c.is_positive() || p < c {
        return Err(Error::precondition(format!(
            "price {} below threshold {}",
            p.to_text(),
            c.to_text()
        )));
    }
    let two = T::from_i64(2);
    let mut lo = c.clone();
    let mut i = 0i64;
    loop {
        let next = lo.mul_ref(&two);
        if next > *p {
            return Ok(i);
        }
        lo = next;
        i += 1;
        if i > 100_000 {
            return Err(Error::Solver("price band search did not terminate".into()));
        }
    }
}

/// Splits a `c`-expensive menu by the parity of each price's dyadic band.
pub fn parity_split<T: Scalar>(m: &Mechanism<T>, c: &T) -> Result<(Mechanism<T>, Mechanism<T>)> {
    if !c.is_positive() {
        return Err(Error::invalid("c", "must be positive"));
    }
    if !m.is_c_expensive(c) {
        return Err(Error::precondition("mechanism is not c-expensive"));
    }
    let mut odd = Vec::new();
    let mut even = Vec::new();
    for e in m.menu().iter().filter(|e| !e.is_zero_option()) {
        if dyadic_band(&e.price, c)? % 2 == 1 {
            odd.push(e.clone());
        } else {
            even.push(e.clone());
        }
    }
    Ok((Mechanism::new(m.k(), odd)?, Mechanism::new(m.k(), even)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn ri(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn half() -> Rational {
        Rational::ratio(1, 2)
    }

    fn entry(q: &[i64], p: i64) -> MenuEntry<Rational> {
        MenuEntry {
            q: q.iter().map(|&x| ri(x)).collect(),
            price: ri(p),
        }
    }

    fn two_point() -> (DiscreteDistribution<Rational>, Mechanism<Rational>) {
        let d = DiscreteDistribution::new(
            2,
            vec![(vec![ri(4), ri(0)], half()), (vec![ri(0), ri(16)], half())],
        )
        .unwrap();
        let m = Mechanism::new(2, vec![entry(&[1, 0], 4), entry(&[0, 1], 16)]).unwrap();
        (d, m)
    }

    #[test]
    fn choice_examples() {
        let m = Mechanism::new(2, vec![entry(&[1, 1], 1)]).unwrap();
        let c = buyer_choice(&m, &[ri(1), ri(1)], 0.0).unwrap();
        assert_eq!(m.menu()[c.entry].price, ri(1));
        assert_eq!(c.utility, ri(1));
        let m = Mechanism::new(2, vec![entry(&[1, 0], 1)]).unwrap();
        let c = buyer_choice(&m, &[ri(1), ri(0)], 0.0).unwrap();
        assert_eq!(m.menu()[c.entry].price, ri(1));
        assert!(c.tie);
        assert_eq!(c.utility, ri(0));
    }

    #[test]
    fn revenue_and_brev_examples() {
        let (d, m) = two_point();
        let rep = revenue(&d, &m, 0.0).unwrap();
        assert_eq!(rep.rev, ri(10));
        assert_eq!(rep.arev, ri(10));
        assert_eq!((rep.brev_price.clone(), rep.brev.clone()), (ri(16), ri(8)));
        let single = DiscreteDistribution::new(2, vec![(vec![ri(1), ri(1)], ri(1))]).unwrap();
        assert_eq!(brev(&single), (ri(2), ri(2)));
        let two = DiscreteDistribution::new(1, vec![(vec![ri(1)], half()), (vec![ri(4)], half())])
            .unwrap();
        assert_eq!(brev(&two), (ri(4), ri(2)));
        let zero = DiscreteDistribution::new(1, vec![(vec![ri(0)], ri(1))]).unwrap();
        assert_eq!(brev(&zero), (ri(0), ri(0)));
    }

    #[test]
    fn misaligned_purchase_not_counted() {
        let d = DiscreteDistribution::new(2, vec![(vec![ri(4), ri(4)], ri(1))]).unwrap();
        let m = Mechanism::new(2, vec![entry(&[1, 0], 3)]).unwrap();
        let rep = revenue(&d, &m, 0.0).unwrap();
        assert_eq!(rep.rev, ri(3));
        assert_eq!(rep.arev, ri(0));
    }

    #[test]
    fn perturbed_price_violation_is_exact() {
        let d = DiscreteDistribution::new(2, vec![(vec![ri(1), ri(1)], ri(1))]).unwrap();
        let eps = Rational::ratio(1, 1000);
        let m = Mechanism::new(
            2,
            vec![MenuEntry {
                q: vec![ri(1), ri(1)],
                price: ri(2) + eps.clone(),
            }],
        )
        .unwrap();
        let rep = verify_ic_ir(&d, &m, Some(&[1]), 0.0).unwrap();
        assert!(!rep.ok);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.worst_margin, eps);
        let fine = verify_ic_ir(&d, &m, None, 0.0).unwrap();
        assert!(fine.ok);
    }

    #[test]
    fn c_expensive_and_split() {
        let m = Mechanism::new(
            1,
            vec![
                MenuEntry {
                    q: vec![half()],
                    price: half(),
                },
                entry(&[1], 4),
            ],
        )
        .unwrap();
        let m1 = c_expensive(&m, &ri(1)).unwrap();
        assert_eq!(m1.len(), 2);
        assert!(m1.menu().iter().any(|e| e.price == ri(4)));
        assert_eq!(c_expensive(&m, &ri(0)).unwrap(), m);

        let (_, m) = two_point();
        let (odd, even) = parity_split(&m, &ri(4)).unwrap();
        assert_eq!(odd.len(), 1);
        assert_eq!(even.len(), 3);
        let m2 = Mechanism::new(2, vec![entry(&[1, 0], 4), entry(&[0, 1], 8)]).unwrap();
        let (odd, even) = parity_split(&m2, &ri(4)).unwrap();
        assert_eq!((odd.len(), even.len()), (2, 2));
        assert!(parity_split(&m2, &ri(5)).is_err());
    }

    #[test]
    fn dyadic_bands() {
        assert_eq!(dyadic_band(&ri(4), &ri(4)).unwrap(), 0);
        assert_eq!(dyadic_band(&ri(7), &ri(4)).unwrap(), 0);
        assert_eq!(dyadic_band(&ri(8), &ri(4)).unwrap(), 1);
        assert_eq!(dyadic_band(&ri(16), &ri(4)).unwrap(), 2);
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscreteDistribution::new(1, vec![(vec![ri(1)], half())]).is_err());
        assert!(
            DiscreteDistribution::new(1, vec![(vec![ri(1)], half()), (vec![ri(1)], half())])
                .is_err()
        );
        let merged =
            DiscreteDistribution::merged(1, vec![(vec![ri(1)], half()), (vec![ri(1)], half())])
                .unwrap();
        assert_eq!(merged.len(), 1);
    }
}
