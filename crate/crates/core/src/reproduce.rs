//! The acceptance checklist as library code, shared by `menugap reproduce`
//! and the acceptance test.
//!
//! Each criterion returns a [`CriterionOutcome`]; thresholds are constants
//! in this module so the CLI and the tests agree on them.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::auctions::{revenue, DiscreteDistribution, Mechanism};
use crate::constructions::{
    divergence_partial, gap_lower_formula, lagrel_closed_form, lagrel_tail_bound,
    layer_gap_lower_bound, Construction,
};
use crate::error::Result;
use crate::gapcore::{sup_gap, PointSequence};
use crate::gapopt::{
    align_gap_bruteforce, align_gap_search, lagrel_value, menu_gap_lp, search::DEFAULT_RESTARTS,
};
use crate::instances::{
    bundle_price_menus, random_aligned_mechanism, random_distribution, random_mechanism,
    random_menu_for, random_sequence,
};
use crate::rng::{indexed_stream, stream};
use crate::scalar::{Rational, Scalar};
use crate::transforms::{
    hn_construct, prop_hn_check, theorem_ext_pipeline, theorem_main_pipeline, HnParams,
};

use rand::Rng;

/// Upper bound certified for the aligned gap of the construction.
pub const ALIGN_BOUND: f64 = 6.0;
/// Layers of the construction examined by criteria 1 to 3.
pub const LAYERS: usize = 40;
/// Prefix lengths searched in criterion 1.
pub const SEARCH_PREFIXES: [usize; 5] = [3, 10, 19, 40, 60];
/// Per-point absolute agreement of the two relaxation evaluations.
pub const FORMS_ATOL: f64 = 1e-12;
/// Relative slack on the per-index gap bound, covering rounding of the points.
pub const GAP_BOUND_RTOL: f64 = 1e-9;
pub const K1_INSTANCES: usize = 100;
pub const K1_MAX_POINTS: usize = 20;
pub const SANDWICH_INSTANCES: usize = 1000;
pub const SANDWICH_MAX_POINTS: usize = 8;
pub const MAX_K: usize = 3;
pub const MAIN_INSTANCES: usize = 200;
pub const MAX_SUPPORT: usize = 8;
pub const HN_PREFIX: usize = 6;
pub const HN_BASES: [i64; 2] = [10, 100];
/// Criterion 7 requires `eps_B <= HN_EPS_FACTOR / B`.
pub const HN_EPS_FACTOR: i64 = 2;
pub const HN_RANDOM_CANDIDATES: usize = 20;
pub const ALIGNED_INSTANCES: usize = 100;
pub const MENU_INSTANCES: usize = 1000;

/// Bruteforce resolution per sequence length; longer sequences are not brute-forced.
pub fn bruteforce_resolution(n: usize) -> Option<usize> {
    match n {
        1 => Some(64),
        2 => Some(32),
        3 => Some(16),
        4 => Some(8),
        5 => Some(4),
        6 => Some(3),
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub checked: usize,
    pub violations: usize,
    pub detail: String,
    #[serde(serialize_with = "secs")]
    pub elapsed: Duration,
    pub budget_secs: u64,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        let mut line = format!(
            "criterion {:>2} {} {}: {} checked, {} violations, {:.1}s (budget {}s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.checked,
            self.violations,
            self.elapsed.as_secs_f64(),
            self.budget_secs,
        );
        if !self.detail.is_empty() {
            line.push_str("; ");
            line.push_str(&self.detail);
        }
        line
    }
}

struct Tally {
    checked: usize,
    violations: usize,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checked: 0,
            violations: 0,
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, note: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.notes.len() < 8 {
                self.notes.push(note());
            }
        }
    }

    fn finish(
        self,
        id: u8,
        name: &'static str,
        budget_secs: u64,
        start: Instant,
        extra: String,
    ) -> CriterionOutcome {
        let mut detail = extra;
        if !self.notes.is_empty() {
            if !detail.is_empty() {
                detail.push_str("; ");
            }
            detail.push_str(&self.notes.join("; "));
        }
        CriterionOutcome {
            id,
            name,
            pass: self.violations == 0,
            checked: self.checked,
            violations: self.violations,
            detail,
            elapsed: start.elapsed(),
            budget_secs,
        }
    }
}

/// One row of the layer table: relaxation mass, tail and gap bounds through layer `ell`.
#[derive(Clone, Debug, Serialize)]
pub struct LayerTableRow {
    pub ell: usize,
    pub n_ell: usize,
    pub lagrel_term: f64,
    pub lagrel_cumulative: f64,
    pub tail_bound: f64,
    pub lagrel_total: f64,
    pub gap_sum: f64,
    pub gap_lower: Option<f64>,
    pub menugap_cumulative: f64,
    pub divergence_partial: Option<f64>,
}

/// Builds the table with exact relaxation sums on the rational backend.
pub fn layer_table(layers: usize) -> Result<Vec<LayerTableRow>> {
    let c = Construction::<f64>::with_layers(layers)?;
    let xr: PointSequence<Rational> = c.x.cast();
    let report = c.fast_gap_terms();
    let alpha = &c.params.alpha;
    let mut rows = Vec::with_capacity(c.layers.len());
    let mut prev_cum = 0.0;
    for spec in &c.layers {
        let end = spec.range().end;
        let cum = lagrel_closed_form(&xr.prefix(end), false)?;
        let cum_f = cum.to_f64();
        let tail = lagrel_tail_bound(spec.ell + 1)?;
        rows.push(LayerTableRow {
            ell: spec.ell,
            n_ell: spec.n_ell,
            lagrel_term: cum_f - prev_cum,
            lagrel_cumulative: cum_f,
            tail_bound: tail,
            lagrel_total: cum_f + tail,
            gap_sum: c.layer_gap_sum(&report, spec.ell),
            gap_lower: if spec.ell > 2 && spec.ell % 2 == 0 {
                Some(layer_gap_lower_bound(spec.ell, alpha)?)
            } else {
                None
            },
            menugap_cumulative: report.cumulative[end - 1],
            divergence_partial: if spec.ell >= 4 {
                Some(divergence_partial(spec.ell, alpha)?)
            } else {
                None
            },
        });
        prev_cum = cum_f;
    }
    Ok(rows)
}

/// Exact test of `sqrt 2 * coeff + tail <= bound`, with `coeff` rational.
fn relaxation_within(coeff: &Rational, tail: f64, bound: f64) -> bool {
    let room = bound - tail;
    if room < 0.0 {
        return false;
    }
    // Round room down so the comparison stays conservative.
    let room = Rational::from_f64(room.next_down()).expect("finite");
    let lhs = coeff.mul_ref(coeff).mul_ref(&Rational::from_i64(2));
    !coeff.is_negative() && lhs <= room.mul_ref(&room)
}

pub fn criterion_1(seed: u64) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut t = Tally::new();
    let c = Construction::<f64>::with_layers(LAYERS)?;
    let xr: PointSequence<Rational> = c.x.cast();
    let mut worst = f64::NEG_INFINITY;
    for spec in &c.layers {
        let cum = lagrel_closed_form(&xr.prefix(spec.range().end), false)?;
        let tail = lagrel_tail_bound(spec.ell + 1)?;
        let ok = relaxation_within(&cum.coeff, tail, ALIGN_BOUND);
        worst = worst.max(cum.to_f64() + tail);
        t.check(ok, || {
            format!("layer {} total {}", spec.ell, cum.to_f64() + tail)
        });
    }
    let mut gaps = Vec::new();
    for &n in &SEARCH_PREFIXES {
        let x = xr.prefix(n);
        let lag = lagrel_value(&x)?;
        let closed = lagrel_closed_form(&x, true)?;
        // The points are rounded, so ||x_i||_2^2 = 1 only up to an ulp.
        let diff = (lag.to_f64() - closed.to_f64()).abs();
        t.check(diff <= FORMS_ATOL * n as f64, || {
            format!("prefix {n}: relaxation forms differ by {diff:e}")
        });
        let (value, _) = align_gap_search(&x, DEFAULT_RESTARTS, seed)?;
        t.check(lag.bounds(&value, 0.0), || {
            format!(
                "prefix {n}: search {} above relaxation {}",
                value.to_f64(),
                lag.to_f64()
            )
        });
        gaps.push(format!(
            "N={n}: {:.4} <= {:.4}",
            value.to_f64(),
            lag.to_f64()
        ));
    }
    Ok(t.finish(
        1,
        "aligned gap bound",
        120,
        start,
        format!(
            "max relaxation + tail {worst:.4} <= {ALIGN_BOUND}; {}",
            gaps.join(", ")
        ),
    ))
}

/// Per-index violations of criterion 2, split by whether they sit at the last index of their layer.
#[derive(Clone, Debug, Default, Serialize)]
pub struct GapBoundViolations {
    pub final_index: Vec<(usize, usize, f64, f64)>,
    pub interior: Vec<(usize, usize, f64, f64)>,
    pub layer_sums: Vec<(usize, f64, f64)>,
}

pub fn gap_bound_violations() -> Result<(usize, GapBoundViolations)> {
    let c = Construction::<f64>::with_layers(LAYERS)?;
    let report = c.fast_gap_terms();
    let alpha = &c.params.alpha;
    let mut v = GapBoundViolations::default();
    let mut checked = 0;
    for spec in c.layers.iter().filter(|s| s.ell >= 4 && s.ell % 2 == 0) {
        for j in 0..spec.n_ell {
            let got = report.terms[spec.offset + j];
            let bound = gap_lower_formula(spec.ell, j, alpha)?;
            checked += 1;
            if got < bound * (1.0 - GAP_BOUND_RTOL) {
                let rec = (spec.ell, j, got, bound);
                if j + 1 == spec.n_ell {
                    v.final_index.push(rec);
                } else {
                    v.interior.push(rec);
                }
            }
        }
        let sum = c.layer_gap_sum(&report, spec.ell);
        let lower = layer_gap_lower_bound(spec.ell, alpha)?;
        checked += 1;
        if sum < lower {
            v.layer_sums.push((spec.ell, sum, lower));
        }
    }
    Ok((checked, v))
}

pub fn criterion_2() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let (checked, v) = gap_bound_violations()?;
    let violations = v.final_index.len() + v.interior.len() + v.layer_sums.len();
    let mut detail = format!(
        "{} at the last index of a layer, {} at interior indices, {} layer sums",
        v.final_index.len(),
        v.interior.len(),
        v.layer_sums.len()
    );
    if let Some((ell, j, got, bound)) = v.final_index.first() {
        detail.push_str(&format!(
            "; e.g. layer {ell} j={j}: gap {got:.3e} < bound {bound:.3e}"
        ));
    }
    Ok(CriterionOutcome {
        id: 2,
        name: "per-index and per-layer gap lower bounds",
        pass: violations == 0,
        checked,
        violations,
        detail,
        elapsed: start.elapsed(),
        budget_secs: 60,
    })
}

pub fn criterion_3() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut t = Tally::new();
    let c = Construction::<f64>::with_layers(LAYERS)?;
    let report = c.fast_gap_terms();
    let mut prev = f64::NEG_INFINITY;
    for spec in &c.layers {
        let cum = report.cumulative[spec.range().end - 1];
        t.check(cum >= prev, || {
            format!("cumulative drops at layer {}", spec.ell)
        });
        prev = cum;
    }
    let partial = divergence_partial(LAYERS, &c.params.alpha)?;
    t.check(prev > partial, || {
        format!("cumulative {prev} <= series {partial}")
    });
    Ok(t.finish(
        3,
        "divergence monitoring",
        60,
        start,
        format!("cumulative gap {prev:.4} vs series {partial:.4}"),
    ))
}

pub fn criterion_4(seed: u64) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut t = Tally::new();
    for i in 0..K1_INSTANCES {
        let mut rng = indexed_stream(seed, "k1-collapse", i as u64);
        let n = rng.gen_range(1..=K1_MAX_POINTS);
        let x: PointSequence<Rational> = random_sequence(&mut rng, n, 1)?;
        let got = menu_gap_lp(&x)?.objective;
        t.check(got == Rational::one(), || {
            format!("instance {i}: {}", got.to_text())
        });
    }
    Ok(t.finish(4, "one-dimensional collapse", 120, start, String::new()))
}

pub fn criterion_5(seed: u64) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut brute = 0;
    for i in 0..SANDWICH_INSTANCES {
        let mut rng = indexed_stream(seed, "sandwich", i as u64);
        let n = rng.gen_range(1..=SANDWICH_MAX_POINTS);
        let k = rng.gen_range(1..=MAX_K);
        let x: PointSequence<Rational> = random_sequence(&mut rng, n, k)?;
        let lp = menu_gap_lp(&x)?.objective;
        let (search, _) = align_gap_search(&x, DEFAULT_RESTARTS, seed.wrapping_add(i as u64))?;
        if let Some(res) = bruteforce_resolution(n) {
            brute += 1;
            let (b, _) = align_gap_bruteforce(&x, res)?;
            let mut norms = Rational::zero();
            for p in x.points() {
                norms = norms.add_ref(&crate::scalar::l1_norm(p));
            }
            let slack = norms.mul_ref(&Rational::ratio(2, res as i64));
            t.check(b <= search.add_ref(&slack), || {
                format!(
                    "instance {i}: bruteforce {} > search {}",
                    b.to_f64(),
                    search.to_f64()
                )
            });
        }
        t.check(search <= lp, || {
            format!(
                "instance {i}: search {} > MenuGap {}",
                search.to_f64(),
                lp.to_f64()
            )
        });
        let sg = sup_gap(&x)?.total;
        t.check(sg <= lp, || {
            format!(
                "instance {i}: SupGap {} > MenuGap {}",
                sg.to_f64(),
                lp.to_f64()
            )
        });
    }
    Ok(t.finish(
        5,
        "duality and embedding sandwiches",
        300,
        start,
        format!("{brute} instances brute-forced"),
    ))
}

pub fn criterion_6(seed: u64) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut vacuous = 0;
    for i in 0..MAIN_INSTANCES {
        let d: DiscreteDistribution<Rational> = random_distribution(
            &mut indexed_stream(seed, "main-pipeline", i as u64),
            MAX_SUPPORT,
            MAX_K,
        )?;
        let cert = theorem_main_pipeline(&d, 0.0)?;
        vacuous += usize::from(cert.vacuous);
        t.check(cert.all_checks_pass(), || {
            format!("instance {i}: {}", cert.to_json())
        });
    }
    Ok(t.finish(
        6,
        "factor-9 extraction",
        600,
        start,
        format!("{vacuous} vacuous"),
    ))
}

fn hn_prefix() -> Result<(
    PointSequence<Rational>,
    crate::gapcore::AllocationSequence<Rational>,
)> {
    let layers = 3;
    let c = Construction::<f64>::with_layers(layers)?;
    let (x, q) = c.prefix(HN_PREFIX);
    Ok((x.cast(), q.cast()))
}

pub fn criterion_7() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut t = Tally::new();
    let (x, q) = hn_prefix()?;
    let gap = crate::gapcore::menu_gap_terms(&x, &q)?.total;
    let mut notes = Vec::new();
    for &b in &HN_BASES {
        let params = HnParams::new(Rational::from_i64(b), HN_PREFIX)?;
        let hn = hn_construct(&x, &q, &params, 0.0)?;
        t.check(hn.ic.ok, || {
            format!("B={b}: {} IC violations", hn.ic.violations.len())
        });
        t.check(hn.all_buy_intended(), || {
            format!("B={b}: a buyer skips its allocation")
        });
        let rep = revenue(&hn.distribution, &hn.mechanism, 0.0)?;
        let ratio = rep.rev.div_ref(&rep.brev);
        // eps_B = 1 - ratio / gap <= 2 / B
        let target = gap.mul_ref(&Rational::one().sub_ref(&Rational::ratio(HN_EPS_FACTOR, b)));
        let eps = 1.0 - ratio.to_f64() / gap.to_f64();
        t.check(ratio >= target, || format!("B={b}: eps {eps:.3e}"));
        notes.push(format!("B={b}: eps {eps:.2e}"));
    }
    Ok(t.finish(
        7,
        "sequence-to-auction round trip",
        60,
        start,
        notes.join(", "),
    ))
}

pub fn criterion_8(seed: u64) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut t = Tally::new();
    let (x, q) = hn_prefix()?;
    let mut notes = Vec::new();
    for &b in &HN_BASES {
        let base = Rational::from_i64(b);
        let params = HnParams::new(base.clone(), HN_PREFIX)?;
        let d = hn_construct(&x, &q, &params, 0.0)?.distribution;
        let mut rng = stream(seed, &format!("prop-hn-{b}"));
        let mut candidates: Vec<(String, Mechanism<Rational>)> = Vec::new();
        for r in 0..HN_RANDOM_CANDIDATES {
            let entries = rng.gen_range(1..=2 * HN_PREFIX);
            candidates.push((
                format!("random-{r}"),
                random_menu_for(&mut rng, &d, entries)?,
            ));
        }
        for (s, m) in bundle_price_menus(&d)?.into_iter().enumerate() {
            candidates.push((format!("bundle-{s}"), m));
        }
        let rep = prop_hn_check(&x, &q, base, &candidates, 0.0)?;
        for o in &rep.outcomes {
            t.check(o.holds, || {
                format!("B={b} {}: margin {:.3e}", o.label, o.margin)
            });
        }
        notes.push(format!("B={b}: worst margin {:.3}", rep.worst_margin));
    }
    Ok(t.finish(
        8,
        "aligned revenue falsification",
        120,
        start,
        notes.join(", "),
    ))
}

pub fn criterion_9(seed: u64) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut vacuous = 0;
    for i in 0..ALIGNED_INSTANCES {
        let mut rng = indexed_stream(seed, "aligned-pipeline", i as u64);
        let d: DiscreteDistribution<Rational> = random_distribution(&mut rng, MAX_SUPPORT, MAX_K)?;
        let m = random_aligned_mechanism(&mut rng, &d)?;
        let cert = theorem_ext_pipeline(&d, &m, 0.0)?;
        vacuous += usize::from(cert.vacuous);
        t.check(cert.all_checks_pass(), || {
            format!("instance {i}: {}", cert.to_json())
        });
    }
    Ok(t.finish(
        9,
        "aligned factor-9 extraction",
        300,
        start,
        format!("{vacuous} vacuous"),
    ))
}

pub fn criterion_10(seed: u64) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut t = Tally::new();
    for i in 0..MENU_INSTANCES {
        let mut rng = indexed_stream(seed, "menu-complexity", i as u64);
        let d: DiscreteDistribution<Rational> = random_distribution(&mut rng, MAX_SUPPORT, MAX_K)?;
        let entries = rng.gen_range(1..=6);
        let m = random_mechanism(&mut rng, d.k(), entries, 16)?;
        let rep = revenue(&d, &m, 0.0)?;
        let priced = m.menu().iter().filter(|e| !e.is_zero_option()).count();
        let cap = rep.brev.mul_ref(&Rational::from_i64(priced as i64));
        t.check(rep.rev <= cap, || {
            format!(
                "instance {i}: rev {} > {priced} * brev {}",
                rep.rev.to_f64(),
                rep.brev.to_f64()
            )
        });
        t.check(rep.arev <= rep.rev, || {
            format!("instance {i}: arev above rev")
        });
    }
    Ok(t.finish(10, "menu-size revenue bound", 60, start, String::new()))
}

pub fn run_criterion(id: u8, seed: u64) -> Result<CriterionOutcome> {
    match id {
        1 => criterion_1(seed),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(seed),
        5 => criterion_5(seed),
        6 => criterion_6(seed),
        7 => criterion_7(),
        8 => criterion_8(seed),
        9 => criterion_9(seed),
        10 => criterion_10(seed),
        _ => Err(crate::error::Error::invalid(
            "criterion",
            format!("{id} is not in 1..=10"),
        )),
    }
}

/// Criteria driven by random instances; the rest check fixed constructions.
pub const PROPERTY_CRITERIA: [u8; 5] = [4, 6, 9, 10, 7];

pub fn run_all(seed: u64, quick: bool) -> Result<Vec<CriterionOutcome>> {
    let ids: Vec<u8> = if quick {
        PROPERTY_CRITERIA.to_vec()
    } else {
        (1..=10).collect()
    };
    ids.into_iter().map(|id| run_criterion(id, seed)).collect()
}
