//! Conversions between sequences and auctions.
//!
//! * [`hn_construct`] turns a point/allocation pair into a distribution and a
//!   menu whose revenue-to-bundle ratio approaches the menu gap.
//! * [`representative_sequence`] and [`aligned_sequence`] go the other way,
//!   extracting one point per dyadic payment band of a structured menu.
//! * The two pipelines chain the menu surgeries with the extraction and
//!   certify the factor-9 bounds on concrete instances.

use serde::Serialize;
use serde_json::{json, Value};

use crate::auctions::{
    arev, brev, buyer_choice, c_expensive, dyadic_band, parity_split, revenue, verify_ic_ir,
    DiscreteDistribution, IcReport, Mechanism, MenuEntry,
};
use crate::error::{Error, Result};
use crate::gapcore::{
    align_gap_terms, menu_gap_terms, AllocationSequence, PointSequence, ScalarSequence,
};
use crate::gapopt::{lagrel_value, optimal_mechanism_lp};
use crate::scalar::{dot, is_parallel, l1_norm, Scalar};

/// Largest scale the float backend accepts.
pub const FLOAT_SCALE_LIMIT: f64 = 1e300;

#[derive(Clone, Debug, PartialEq)]
pub struct HnParams<T> {
    pub base: T,
    pub max_index: usize,
}

impl<T: Scalar> HnParams<T> {
    pub fn new(base: T, max_index: usize) -> Result<Self> {
        let p = Self { base, max_index };
        p.validate()?;
        Ok(p)
    }

    /// `B^(2^i)` for `i = 1..=max_index`.
    pub fn scales(&self) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(self.max_index);
        let mut s = self.base.clone();
        for i in 1..=self.max_index {
            s = s.mul_ref(&s);
            let scale = s.to_f64();
            if !T::EXACT && (scale.is_nan() || scale > FLOAT_SCALE_LIMIT) {
                return Err(Error::invalid(
                    "max_index",
                    format!("B^(2^{i}) exceeds {FLOAT_SCALE_LIMIT:e} on the float backend; use the rational backend"),
                ));
            }
            out.push(s.clone());
        }
        Ok(out)
    }

    /// Probability left on the zero vector.
    pub fn zero_mass(&self) -> Result<T> {
        let mut mass = T::one();
        for s in self.scales()? {
            mass = mass.sub_ref(&T::one().div_ref(&s));
        }
        Ok(mass)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.base.is_finite() || self.base <= T::one() {
            return Err(Error::invalid("base", "must exceed 1"));
        }
        if self.max_index == 0 {
            return Err(Error::invalid("max_index", "must be positive"));
        }
        if !self.zero_mass()?.is_positive() {
            return Err(Error::invalid(
                "base",
                "sampling probabilities 1/B^(2^i) sum to at least 1",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct HnConstruction<T> {
    pub distribution: DiscreteDistribution<T>,
    pub mechanism: Mechanism<T>,
    /// Intended entry per support point; support point 0 is the zero vector.
    pub assignment: Vec<usize>,
    pub ic: IcReport<T>,
    /// Whether the buyer at `v_i` actually selects allocation `q_i`.
    pub buys_intended: Vec<bool>,
}

impl<T: Scalar> HnConstruction<T> {
    pub fn all_buy_intended(&self) -> bool {
        self.buys_intended.iter().all(|&b| b)
    }
}

/// Scales `x_i` to `B^(2^i) x_i / ||x_i||_1` with probability `B^(-2^i)` and prices each
/// allocation to leave `v_i` indifferent to its best earlier option.
pub fn hn_construct<T: Scalar>(
    x: &PointSequence<T>,
    q: &AllocationSequence<T>,
    params: &HnParams<T>,
    tol: f64,
) -> Result<HnConstruction<T>> {
    params.validate()?;
    let n = x.len();
    if q.len() != n {
        return Err(Error::length(format!(
            "{} allocations after q_0 for {n} points",
            q.len()
        )));
    }
    if q.k() != x.k() {
        return Err(Error::DimensionMismatch {
            expected: x.k(),
            found: q.k(),
        });
    }
    if n > params.max_index {
        return Err(Error::precondition(format!(
            "sequence has {n} points but max_index is {}",
            params.max_index
        )));
    }
    let k = x.k();
    let scales = params.scales()?;
    let mut support = vec![(vec![T::zero(); k], params.zero_mass()?)];
    let mut values = Vec::with_capacity(n);
    for i in 1..=n {
        let s = scales[i - 1].div_ref(&l1_norm(x.point(i)));
        let v: Vec<T> = x.point(i).iter().map(|c| c.mul_ref(&s)).collect();
        support.push((v.clone(), T::one().div_ref(&scales[i - 1])));
        values.push(v);
    }
    let distribution = DiscreteDistribution::new(k, support)?;

    let mut prices = vec![T::zero()];
    for i in 1..=n {
        let v = &values[i - 1];
        let mut best = T::zero();
        for (j, pj) in prices.iter().enumerate().take(i).skip(1) {
            let u = dot(v, q.get(j)).sub_ref(pj);
            if u > best {
                best = u;
            }
        }
        prices.push(dot(v, q.get(i)).sub_ref(&best));
    }
    let entries: Vec<MenuEntry<T>> = (1..=n)
        .map(|i| MenuEntry {
            q: q.get(i).to_vec(),
            price: prices[i].clone(),
        })
        .collect();
    let (mechanism, map) = Mechanism::dedup(k, entries)?;
    let mut assignment = vec![mechanism.zero_index()];
    assignment.extend(map.iter().copied());
    let ic = verify_ic_ir(&distribution, &mechanism, Some(&assignment), tol)?;
    let mut buys_intended = Vec::with_capacity(n);
    for (i, v) in values.iter().enumerate() {
        let chosen = buyer_choice(&mechanism, v, tol)?.entry;
        let got = &mechanism.menu()[chosen].q;
        let want = q.get(i + 1);
        buys_intended.push(if T::EXACT {
            got.as_slice() == want
        } else {
            got.iter().zip(want).all(|(a, b)| a.approx_eq(b, tol))
        });
    }
    Ok(HnConstruction {
        distribution,
        mechanism,
        assignment,
        ic,
        buys_intended,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
    Auto,
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odd" => Ok(Parity::Odd),
            "even" => Ok(Parity::Even),
            "auto" => Ok(Parity::Auto),
            _ => Err(Error::invalid(
                "parity",
                format!("expected odd, even or auto, got {s:?}"),
            )),
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
            Parity::Auto => "auto",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionConfig<T> {
    pub c: T,
    /// Slack on l1-minimality; the exact minimum is always chosen, which satisfies any slack.
    pub epsilon: T,
    pub parity: Parity,
}

impl<T: Scalar> ExtractionConfig<T> {
    pub fn new(c: T, epsilon: T, parity: Parity) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::invalid("c", "must be positive"));
        }
        if epsilon.is_negative() {
            return Err(Error::invalid("epsilon", "must be nonnegative"));
        }
        Ok(Self { c, epsilon, parity })
    }
}

/// One extracted index.
#[derive(Clone, Debug)]
pub struct Bucket<T> {
    /// 1-based band index `j`.
    pub band: i64,
    pub support_index: usize,
    pub payment: T,
    /// Total probability of support points paying in this band.
    pub mass: T,
}

#[derive(Clone, Debug)]
pub struct Extraction<T> {
    pub parity: Parity,
    pub x: PointSequence<T>,
    pub q: AllocationSequence<T>,
    pub buckets: Vec<Bucket<T>>,
}

#[derive(Clone, Debug)]
pub struct AlignedExtraction<T> {
    pub parity: Parity,
    pub x: PointSequence<T>,
    pub c: ScalarSequence<T>,
    pub buckets: Vec<Bucket<T>>,
}

/// Parity shared by every priced entry, or `None` for a menu with only the zero option.
fn menu_parity<T: Scalar>(m: &Mechanism<T>, c: &T) -> Result<Option<Parity>> {
    if !m.is_c_expensive(c) {
        return Err(Error::precondition("mechanism is not c-expensive"));
    }
    let mut seen = None;
    for e in m.menu().iter().filter(|e| !e.is_zero_option()) {
        let p = if dyadic_band(&e.price, c)? % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        };
        match seen {
            None => seen = Some(p),
            Some(s) if s != p => {
                return Err(Error::precondition(
                    "mechanism is neither oddly- nor evenly-priced",
                ))
            }
            _ => {}
        }
    }
    Ok(seen)
}

fn resolve_parity<T: Scalar>(m: &Mechanism<T>, cfg: &ExtractionConfig<T>) -> Result<Parity> {
    let found = menu_parity(m, &cfg.c)?;
    match (cfg.parity, found) {
        (Parity::Auto, Some(p)) => Ok(p),
        (Parity::Auto, None) => Ok(Parity::Even),
        (want, Some(p)) if want != p => Err(Error::precondition(format!(
            "mechanism is {p}ly-priced, not {want}ly-priced"
        ))),
        (want, _) => Ok(want),
    }
}

/// Buckets the support by payment band and keeps the l1-minimal member of each.
fn bucket_support<T: Scalar>(
    d: &DiscreteDistribution<T>,
    m: &Mechanism<T>,
    cfg: &ExtractionConfig<T>,
    parity: Parity,
    aligned_only: bool,
    tol: f64,
) -> Result<Vec<(Bucket<T>, usize)>> {
    if d.k() != m.k() {
        return Err(Error::DimensionMismatch {
            expected: d.k(),
            found: m.k(),
        });
    }
    let offset = i64::from(parity == Parity::Odd);
    // (band, support index, payment, entry, norm, mass)
    let mut best: Vec<(i64, usize, T, usize, T, T)> = Vec::new();
    for (s, (v, f)) in d.support().iter().enumerate() {
        let choice = buyer_choice(m, v, tol)?;
        let entry = &m.menu()[choice.entry];
        if !entry.price.is_positive() {
            continue;
        }
        if aligned_only && !is_parallel(&entry.q, v, tol) {
            continue;
        }
        let band = dyadic_band(&entry.price, &cfg.c)?;
        if (band - offset) % 2 != 0 {
            return Err(Error::precondition(format!(
                "payment {} lies in a band of the wrong parity",
                entry.price.to_text()
            )));
        }
        let j = (band - offset) / 2 + 1;
        let norm = l1_norm(v);
        match best.iter_mut().find(|b| b.0 == j) {
            Some(b) => {
                b.5 = b.5.add_ref(f);
                if norm < b.4 {
                    b.1 = s;
                    b.2 = entry.price.clone();
                    b.3 = choice.entry;
                    b.4 = norm;
                }
            }
            None => best.push((j, s, entry.price.clone(), choice.entry, norm, f.clone())),
        }
    }
    best.sort_by_key(|b| b.0);
    Ok(best
        .into_iter()
        .map(|(band, support_index, payment, entry, _, mass)| {
            (
                Bucket {
                    band,
                    support_index,
                    payment,
                    mass,
                },
                entry,
            )
        })
        .collect())
}

/// One point per nonempty payment band, with the allocation it buys.
pub fn representative_sequence<T: Scalar>(
    d: &DiscreteDistribution<T>,
    m: &Mechanism<T>,
    cfg: &ExtractionConfig<T>,
    tol: f64,
) -> Result<Extraction<T>> {
    let parity = resolve_parity(m, cfg)?;
    let picked = bucket_support(d, m, cfg, parity, false, tol)?;
    let k = d.k();
    let mut points = Vec::with_capacity(picked.len());
    let mut allocs = vec![vec![T::zero(); k]];
    for (b, entry) in &picked {
        points.push(d.support()[b.support_index].0.clone());
        allocs.push(m.menu()[*entry].q.clone());
    }
    Ok(Extraction {
        parity,
        x: PointSequence::new(k, points)?,
        q: AllocationSequence::new(k, allocs)?,
        buckets: picked.into_iter().map(|(b, _)| b).collect(),
    })
}

/// As [`representative_sequence`], restricted to buyers whose allocation is parallel to their values.
pub fn aligned_sequence<T: Scalar>(
    d: &DiscreteDistribution<T>,
    m: &Mechanism<T>,
    cfg: &ExtractionConfig<T>,
    tol: f64,
) -> Result<AlignedExtraction<T>> {
    let parity = resolve_parity(m, cfg)?;
    let picked = bucket_support(d, m, cfg, parity, true, tol)?;
    let k = d.k();
    let mut points = Vec::with_capacity(picked.len());
    let mut scalars = vec![T::zero()];
    for (b, entry) in &picked {
        let v = &d.support()[b.support_index].0;
        scalars.push(l1_norm(&m.menu()[*entry].q).div_ref(&l1_norm(v)));
        points.push(v.clone());
    }
    let x = PointSequence::new(k, points)?;
    let c = ScalarSequence::new(scalars, &x)?;
    Ok(AlignedExtraction {
        parity,
        x,
        c,
        buckets: picked.into_iter().map(|(b, _)| b).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Main,
    Aligned,
}

/// Outcome of a pipeline run on one distribution.
#[derive(Clone, Debug)]
pub struct Certificate<T> {
    pub pipeline: Pipeline,
    /// MenuGap or AlignGap of the extracted sequence.
    pub gap_total: T,
    /// Optimal revenue (main) or `rev(D, M)` of the supplied menu (aligned).
    pub rev: T,
    pub brev: T,
    pub arev: Option<T>,
    /// `rev / brev`, or `arev / brev` for the aligned pipeline.
    pub ratio: Option<T>,
    /// `rev / (9 brev)`, or `arev / (9 brev)`.
    pub claimed_bound: T,
    pub pass: bool,
    pub vacuous: bool,
    pub c: T,
    pub epsilon: T,
    pub parity: Option<Parity>,
    pub structured_odd: T,
    pub structured_even: T,
    pub points: usize,
    /// Per index: gap (or aligned gap) at least half the payment.
    pub half_payment_ok: bool,
    /// Per bucket: `(1 + eps) brev >= ||x_i||_1 Pr[B_i]`.
    pub bundle_ok: bool,
    /// Gap at least the structured revenue over `4 (1 + eps) brev`.
    pub structured_ok: bool,
}

impl<T: Scalar> Certificate<T> {
    fn vacuous(pipeline: Pipeline, rev: T, brev: T, arev: Option<T>) -> Self {
        Certificate {
            pipeline,
            gap_total: T::zero(),
            rev,
            brev,
            arev,
            ratio: None,
            claimed_bound: T::zero(),
            pass: true,
            vacuous: true,
            c: T::zero(),
            epsilon: T::zero(),
            parity: None,
            structured_odd: T::zero(),
            structured_even: T::zero(),
            points: 0,
            half_payment_ok: true,
            bundle_ok: true,
            structured_ok: true,
        }
    }

    /// Every check holds, not just the headline inequality.
    pub fn all_checks_pass(&self) -> bool {
        self.pass && self.half_payment_ok && self.bundle_ok && self.structured_ok
    }

    pub fn to_json(&self) -> Value {
        json!({
            "pipeline": self.pipeline,
            "gap_total": self.gap_total.to_json(),
            "rev": self.rev.to_json(),
            "brev": self.brev.to_json(),
            "arev": self.arev.as_ref().map(Scalar::to_json),
            "ratio": self.ratio.as_ref().map(Scalar::to_json),
            "claimed_bound": self.claimed_bound.to_json(),
            "pass": self.pass,
            "vacuous": self.vacuous,
            "c": self.c.to_json(),
            "epsilon": self.epsilon.to_json(),
            "parity": self.parity,
            "structured_revenue": {
                "odd": self.structured_odd.to_json(),
                "even": self.structured_even.to_json(),
            },
            "points": self.points,
            "checks": {
                "half_payment": self.half_payment_ok,
                "bundle": self.bundle_ok,
                "structured": self.structured_ok,
            },
        })
    }
}

/// `a >= b`, exactly or within a relative tolerance.
fn at_least<T: Scalar>(a: &T, b: &T, tol: f64) -> bool {
    if T::EXACT {
        a >= b
    } else {
        a.to_f64() >= b.to_f64() - tol * b.to_f64().abs().max(1.0)
    }
}

/// The extraction epsilon used by both pipelines.
pub fn pipeline_epsilon<T: Scalar>() -> T {
    T::ratio(1, 100)
}

struct Structured<T> {
    mechanism: Mechanism<T>,
    parity: Parity,
    odd: T,
    even: T,
    value: T,
}

/// Drops cheap entries, splits by band parity and keeps the better half under `score`.
fn structure<T: Scalar>(
    m: &Mechanism<T>,
    c: &T,
    score: impl Fn(&Mechanism<T>) -> Result<T>,
) -> Result<Structured<T>> {
    let expensive = c_expensive(m, c)?;
    let (odd, even) = parity_split(&expensive, c)?;
    let s_odd = score(&odd)?;
    let s_even = score(&even)?;
    Ok(if s_odd > s_even {
        Structured {
            mechanism: odd,
            parity: Parity::Odd,
            value: s_odd.clone(),
            odd: s_odd,
            even: s_even,
        }
    } else {
        Structured {
            mechanism: even,
            parity: Parity::Even,
            value: s_even.clone(),
            odd: s_odd,
            even: s_even,
        }
    })
}

fn bucket_checks<T: Scalar>(
    buckets: &[Bucket<T>],
    points: &PointSequence<T>,
    gaps: &[T],
    brev_value: &T,
    eps: &T,
    tol: f64,
) -> (bool, bool) {
    let two = T::from_i64(2);
    let half = buckets
        .iter()
        .zip(gaps)
        .all(|(b, g)| at_least(g, &b.payment.div_ref(&two), tol));
    let scaled = brev_value.mul_ref(&T::one().add_ref(eps));
    let bundle = buckets
        .iter()
        .zip(points.points())
        .all(|(b, x)| at_least(&scaled, &l1_norm(x).mul_ref(&b.mass), tol));
    (half, bundle)
}

/// Extracts `(X, Q)` from a revenue-optimal menu and checks `MenuGap(X, Q) >= Rev / (9 BRev)`.
pub fn theorem_main_pipeline<T: Scalar>(
    d: &DiscreteDistribution<T>,
    tol: f64,
) -> Result<Certificate<T>> {
    let opt = optimal_mechanism_lp(d)?;
    let rev_opt = opt.revenue.clone();
    let (_, brev_value) = brev(d);
    if !rev_opt.is_positive() {
        return Ok(Certificate::vacuous(
            Pipeline::Main,
            rev_opt,
            brev_value,
            None,
        ));
    }
    let c = rev_opt.div_ref(&T::from_i64(100));
    let eps = pipeline_epsilon::<T>();
    let st = structure(&opt.mechanism, &c, |m| Ok(revenue(d, m, tol)?.rev))?;
    let cfg = ExtractionConfig::new(c.clone(), eps.clone(), st.parity)?;
    let ext = representative_sequence(d, &st.mechanism, &cfg, tol)?;
    let report = menu_gap_terms(&ext.x, &ext.q)?;
    let (half, bundle) = bucket_checks(&ext.buckets, &ext.x, &report.terms, &brev_value, &eps, tol);
    let four = T::from_i64(4)
        .mul_ref(&T::one().add_ref(&eps))
        .mul_ref(&brev_value);
    let structured_ok = at_least(&report.total, &st.value.div_ref(&four), tol);
    let claimed = rev_opt.div_ref(&T::from_i64(9).mul_ref(&brev_value));
    Ok(Certificate {
        pipeline: Pipeline::Main,
        pass: at_least(&report.total, &claimed, tol),
        gap_total: report.total,
        ratio: Some(rev_opt.div_ref(&brev_value)),
        rev: rev_opt,
        brev: brev_value,
        arev: None,
        claimed_bound: claimed,
        vacuous: false,
        c,
        epsilon: eps,
        parity: Some(st.parity),
        structured_odd: st.odd,
        structured_even: st.even,
        points: ext.x.len(),
        half_payment_ok: half,
        bundle_ok: bundle,
        structured_ok,
    })
}

/// Aligned analogue for a supplied menu: checks `AlignGap(X, C) >= ARev(D, M) / (9 BRev)`.
pub fn theorem_ext_pipeline<T: Scalar>(
    d: &DiscreteDistribution<T>,
    m: &Mechanism<T>,
    tol: f64,
) -> Result<Certificate<T>> {
    let rep = revenue(d, m, tol)?;
    let aligned = rep.arev.clone();
    let brev_value = rep.brev.clone();
    if !aligned.is_positive() {
        return Ok(Certificate::vacuous(
            Pipeline::Aligned,
            rep.rev,
            brev_value,
            Some(aligned),
        ));
    }
    let c = aligned.div_ref(&T::from_i64(100));
    let eps = pipeline_epsilon::<T>();
    let st = structure(m, &c, |mm| arev(d, mm, tol))?;
    let cfg = ExtractionConfig::new(c.clone(), eps.clone(), st.parity)?;
    let ext = aligned_sequence(d, &st.mechanism, &cfg, tol)?;
    let report = align_gap_terms(&ext.x, &ext.c)?;
    let (half, bundle) = bucket_checks(&ext.buckets, &ext.x, &report.terms, &brev_value, &eps, tol);
    let four = T::from_i64(4)
        .mul_ref(&T::one().add_ref(&eps))
        .mul_ref(&brev_value);
    let structured_ok = at_least(&report.total, &st.value.div_ref(&four), tol);
    let claimed = aligned.div_ref(&T::from_i64(9).mul_ref(&brev_value));
    Ok(Certificate {
        pipeline: Pipeline::Aligned,
        pass: at_least(&report.total, &claimed, tol),
        gap_total: report.total,
        ratio: Some(aligned.div_ref(&brev_value)),
        rev: rep.rev,
        brev: brev_value,
        arev: Some(aligned),
        claimed_bound: claimed,
        vacuous: false,
        c,
        epsilon: eps,
        parity: Some(st.parity),
        structured_odd: st.odd,
        structured_even: st.even,
        points: ext.x.len(),
        half_payment_ok: half,
        bundle_ok: bundle,
        structured_ok,
    })
}

#[derive(Clone, Debug)]
pub struct CandidateOutcome<T> {
    pub label: String,
    pub arev: T,
    /// `arev - bound` as a float; nonpositive means the bound holds.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct PropHnReport<T> {
    pub construction: HnConstruction<T>,
    /// Relaxation upper bound on the aligned gap of `X`, in units of `sqrt 2`.
    pub lagrel_coeff: T,
    pub base: T,
    pub outcomes: Vec<CandidateOutcome<T>>,
    pub worst_margin: f64,
    pub all_hold: bool,
}

/// Falsification check of `ARev(D) <= AlignGap(X) + 1/B` on the constructed distribution.
///
/// `AlignGap(X)` is replaced by its relaxation upper bound, so `X` must be
/// unit-norm. The constructed menu is always checked first, labeled `constructed`.
pub fn prop_hn_check<T: Scalar>(
    x: &PointSequence<T>,
    q: &AllocationSequence<T>,
    base: T,
    candidates: &[(String, Mechanism<T>)],
    tol: f64,
) -> Result<PropHnReport<T>> {
    let lag = lagrel_value(x)?;
    let params = HnParams::new(base.clone(), x.len().max(1))?;
    let construction = hn_construct(x, q, &params, tol)?;
    let slack = T::one().div_ref(&base);
    let mut outcomes = Vec::with_capacity(candidates.len() + 1);
    let mut check = |label: &str, m: &Mechanism<T>| -> Result<()> {
        let a = arev(&construction.distribution, m, tol)?;
        let excess = a.sub_ref(&slack);
        let holds = lag.bounds(&excess, tol);
        outcomes.push(CandidateOutcome {
            label: label.to_string(),
            margin: excess.to_f64() - lag.to_f64(),
            arev: a,
            holds,
        });
        Ok(())
    };
    check("constructed", &construction.mechanism)?;
    for (label, m) in candidates {
        check(label, m)?;
    }
    let worst_margin = outcomes
        .iter()
        .map(|o| o.margin)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(PropHnReport {
        all_hold: outcomes.iter().all(|o| o.holds),
        construction,
        lagrel_coeff: lag.coeff,
        base,
        outcomes,
        worst_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn ri(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn two_point() -> (DiscreteDistribution<Rational>, Mechanism<Rational>) {
        let half = Rational::ratio(1, 2);
        let d = DiscreteDistribution::new(
            2,
            vec![
                (vec![ri(4), ri(0)], half.clone()),
                (vec![ri(0), ri(16)], half),
            ],
        )
        .unwrap();
        let m = Mechanism::new(
            2,
            vec![
                MenuEntry {
                    q: vec![ri(1), ri(0)],
                    price: ri(4),
                },
                MenuEntry {
                    q: vec![ri(0), ri(1)],
                    price: ri(16),
                },
            ],
        )
        .unwrap();
        (d, m)
    }

    #[test]
    fn hn_single_point() {
        let x = PointSequence::new(2, vec![vec![ri(1), ri(0)]]).unwrap();
        let q = AllocationSequence::new(2, vec![vec![ri(0), ri(0)], vec![ri(1), ri(0)]]).unwrap();
        let hn = hn_construct(&x, &q, &HnParams::new(ri(100), 1).unwrap(), 0.0).unwrap();
        let (v, p) = &hn.distribution.support()[1];
        assert_eq!(v, &vec![ri(10000), ri(0)]);
        assert_eq!(*p, Rational::ratio(1, 10000));
        let rep = revenue(&hn.distribution, &hn.mechanism, 0.0).unwrap();
        assert_eq!(rep.rev, ri(1));
        assert_eq!(rep.brev, ri(1));
        assert!(hn.ic.ok);
        assert!(hn.all_buy_intended());
    }

    #[test]
    fn hn_zero_mass() {
        let p = HnParams::new(ri(2), 4).unwrap();
        let expect = ri(1)
            - (Rational::ratio(1, 4)
                + Rational::ratio(1, 16)
                + Rational::ratio(1, 256)
                + Rational::ratio(1, 65536));
        assert_eq!(p.zero_mass().unwrap(), expect);
        assert!(HnParams::new(2.0, 10).is_err());
        assert!(HnParams::new(ri(1), 3).is_err());
    }

    #[test]
    fn extraction_two_point() {
        let (d, m) = two_point();
        let cfg = ExtractionConfig::new(ri(4), ri(0), Parity::Auto).unwrap();
        let ext = representative_sequence(&d, &m, &cfg, 0.0).unwrap();
        assert_eq!(ext.parity, Parity::Even);
        assert_eq!(ext.x.points(), &[vec![ri(4), ri(0)], vec![ri(0), ri(16)]]);
        assert_eq!(
            ext.buckets.iter().map(|b| b.band).collect::<Vec<_>>(),
            vec![1, 2]
        );
        assert_eq!(menu_gap_terms(&ext.x, &ext.q).unwrap().total, ri(2));
        let bad = ExtractionConfig::new(ri(4), ri(0), Parity::Odd).unwrap();
        assert!(representative_sequence(&d, &m, &bad, 0.0).is_err());
    }

    #[test]
    fn aligned_extraction_filters() {
        let (d, m) = two_point();
        let cfg = ExtractionConfig::new(ri(4), ri(0), Parity::Auto).unwrap();
        let ext = aligned_sequence(&d, &m, &cfg, 0.0).unwrap();
        assert_eq!(*ext.c.get(1), Rational::ratio(1, 4));
        let d2 = DiscreteDistribution::new(2, vec![(vec![ri(4), ri(4)], ri(1))]).unwrap();
        let ext = aligned_sequence(&d2, &m, &cfg, 0.0).unwrap();
        assert!(ext.x.is_empty());
    }

    #[test]
    fn main_pipeline_examples() {
        let (d, m) = two_point();
        let cert = theorem_main_pipeline(&d, 0.0).unwrap();
        assert!(cert.all_checks_pass());
        assert_eq!(cert.rev, ri(10));
        assert_eq!(cert.brev, ri(8));
        assert_eq!(cert.gap_total, ri(2));
        let ext = theorem_ext_pipeline(&d, &m, 0.0).unwrap();
        assert!(ext.all_checks_pass());
        assert_eq!(ext.arev, Some(ri(10)));
        let single = DiscreteDistribution::new(2, vec![(vec![ri(1), ri(2)], ri(1))]).unwrap();
        assert!(theorem_main_pipeline(&single, 0.0)
            .unwrap()
            .all_checks_pass());
        let zero = DiscreteDistribution::new(1, vec![(vec![ri(0)], ri(1))]).unwrap();
        assert!(theorem_main_pipeline(&zero, 0.0).unwrap().vacuous);
    }

    #[test]
    fn misaligned_menu_is_vacuous() {
        let d = DiscreteDistribution::new(2, vec![(vec![ri(4), ri(4)], ri(1))]).unwrap();
        let m = Mechanism::new(
            2,
            vec![MenuEntry {
                q: vec![ri(1), ri(0)],
                price: ri(3),
            }],
        )
        .unwrap();
        let cert = theorem_ext_pipeline(&d, &m, 0.0).unwrap();
        assert!(cert.vacuous && cert.pass);
    }

    #[test]
    fn prop_hn_zero_menu() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = PointSequence::new(2, vec![vec![1.0, 0.0], vec![s, s]]).unwrap();
        let q = AllocationSequence::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]])
            .unwrap();
        let zero = Mechanism::new(2, vec![]).unwrap();
        let rep = prop_hn_check(&x, &q, 10.0, &[("zero".into(), zero)], 1e-9).unwrap();
        assert!(rep.all_hold);
        assert_eq!(rep.outcomes[1].arev, 0.0);
    }
}
