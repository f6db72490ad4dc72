//! The layered two-dimensional construction and its closed-form bounds.
//!
//! Layer `l >= 2` holds `n_l = l * ceil(ln^2 l) + 1` unit vectors evenly
//! spaced in angle between the axes: counterclockwise from `(1,0)` on even
//! layers, clockwise from `(0,1)` on odd ones. The paired allocations give
//! every even layer a fixed first coordinate `z_l` and a second coordinate
//! rising towards 1; odd layers repeat the best earlier allocation.
//!
//! Points and allocations are generated in `f64` and converted exactly into
//! the requested backend, so both backends see the same numbers.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::gapcore::{AllocationSequence, GapReport, PointSequence};
use crate::interval::Interval;
use crate::scalar::{diff_dot, dot, Scalar, Sqrt2Scaled};

/// Largest partial-sum length tried by [`alpha_enclosure`].
pub const ALPHA_MAX_TERMS: u64 = 1 << 24;
/// Default enclosure width used when building allocations.
pub const DEFAULT_ALPHA_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_LAYER: usize = 40;
/// Unit-norm tolerance on `||x||_2^2 - 1` for the Lagrangian bounds.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct LayerSpec {
    pub ell: usize,
    pub n_ell: usize,
    pub theta: f64,
    /// Even layers run counterclockwise from `(1,0)`.
    pub counterclockwise: bool,
    /// 0-based position of the layer's first point in the flattened sequence.
    pub offset: usize,
}

impl LayerSpec {
    pub fn new(ell: usize, offset: usize) -> Result<Self> {
        if ell < 2 {
            return Err(Error::invalid("ell", "layers start at 2"));
        }
        let n_ell = ell * ceil_ln_sq(ell)? + 1;
        Ok(LayerSpec {
            ell,
            n_ell,
            theta: PI / (2.0 * (n_ell - 1) as f64),
            counterclockwise: ell.is_multiple_of(2),
            offset,
        })
    }

    /// `x_{l,j}`; the endpoints are exact axis vectors.
    pub fn point(&self, j: usize) -> [f64; 2] {
        let (a, b) = if j == 0 {
            (1.0, 0.0)
        } else if j + 1 == self.n_ell {
            (0.0, 1.0)
        } else {
            let t = j as f64 * self.theta;
            (t.cos(), t.sin())
        };
        if self.counterclockwise {
            [a, b]
        } else {
            [b, a]
        }
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.n_ell
    }
}

/// `ceil(ln^2 l)`, certified by interval evaluation.
pub fn ceil_ln_sq(ell: usize) -> Result<usize> {
    let v = Interval::from_i64(ell as i64).ln().sqr();
    v.certain_ceil()
        .map(|c| c as usize)
        .ok_or_else(|| Error::Solver(format!("ceil(ln^2 {ell}) is not certifiable in f64")))
}

pub fn layer_specs(max_layer: usize) -> Result<Vec<LayerSpec>> {
    if max_layer < 2 {
        return Err(Error::invalid("max_layer", "must be at least 2"));
    }
    let mut out = Vec::with_capacity(max_layer - 1);
    let mut offset = 0;
    for ell in 2..=max_layer {
        let spec = LayerSpec::new(ell, offset)?;
        offset += spec.n_ell;
        out.push(spec);
    }
    Ok(out)
}

/// Certified enclosure of `sum_{l >= 2} 1/(l ln^2 l)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct AlphaEnclosure {
    pub interval: Interval,
    pub terms: u64,
}

impl AlphaEnclosure {
    pub fn lo(&self) -> f64 {
        self.interval.lo
    }

    pub fn hi(&self) -> f64 {
        self.interval.hi
    }

    pub fn width(&self) -> f64 {
        self.interval.width()
    }
}

fn alpha_term(ell: u64) -> Interval {
    let l = Interval::from_i64(ell as i64);
    (l * l.ln().sqr()).recip()
}

/// Encloses the series constant to within `tolerance`.
///
/// The summand `f(x) = 1/(x ln^2 x)` is positive, decreasing and convex, so
/// the tail past `L` lies between `1/ln(L+1) + f(L+1)/2` (trapezoid) and
/// `1/ln(L+1/2)` (midpoint), both integrals of `f` in closed form. `L`
/// doubles until the width target is met; enclosures are intersected so
/// they stay nested.
pub fn alpha_enclosure(tolerance: f64) -> Result<AlphaEnclosure> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::invalid("tolerance", "must be positive"));
    }
    let mut sum = Interval::point(0.0);
    let mut next = 2u64;
    let mut limit = 16u64;
    let mut best = Interval::new(0.0, f64::INFINITY);
    loop {
        while next <= limit {
            sum = sum + alpha_term(next);
            next += 1;
        }
        let l = limit as f64;
        let upper_tail = Interval::point(l + 0.5).ln().recip();
        let lower_tail =
            Interval::point(l + 1.0).ln().recip() + alpha_term(limit + 1) * Interval::point(0.5);
        let enc = Interval::new((sum + lower_tail).lo, (sum + upper_tail).hi);
        best = best
            .intersect(enc)
            .expect("enclosures of one constant intersect");
        if best.width() <= tolerance {
            return Ok(AlphaEnclosure {
                interval: best,
                terms: limit,
            });
        }
        if limit >= ALPHA_MAX_TERMS {
            return Err(Error::ToleranceUnreachable {
                achieved: best.width(),
                requested: tolerance,
            });
        }
        limit *= 2;
    }
}

/// Per-layer allocation parameters derived from a working value of alpha.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct QLayerParams {
    pub alpha: AlphaEnclosure,
    /// The endpoint used in every formula: the upper end of the enclosure.
    pub alpha_used: f64,
    /// `z[l - 2] = z_l`.
    pub z: Vec<f64>,
    /// `delta[l - 2] = delta_l = 1/(alpha l ln^2 l)`.
    pub delta: Vec<f64>,
}

impl QLayerParams {
    pub fn new(max_layer: usize, alpha: AlphaEnclosure) -> Result<Self> {
        if alpha.lo() <= 1.9 || alpha.hi() > 3.0 {
            return Err(Error::precondition(format!(
                "alpha enclosure {} must lie within (1.9, 3]",
                alpha.interval
            )));
        }
        let alpha_used = alpha.hi();
        let mut z = Vec::with_capacity(max_layer);
        let mut delta = Vec::with_capacity(max_layer);
        let mut acc = 0.0;
        for ell in 2..=max_layer {
            let d = delta_for(ell, alpha_used);
            acc += d;
            delta.push(d);
            z.push(acc);
        }
        if acc > 1.0 {
            return Err(Error::precondition(
                "alpha enclosure too wide: z exceeds 1 within the requested layers",
            ));
        }
        Ok(QLayerParams {
            alpha,
            alpha_used,
            z,
            delta,
        })
    }

    pub fn z(&self, ell: usize) -> f64 {
        if ell < 2 {
            0.0
        } else {
            self.z[ell - 2]
        }
    }

    pub fn delta(&self, ell: usize) -> f64 {
        self.delta[ell - 2]
    }

    /// `z_{l,j} = 1 - delta_l cot((j+1) theta_l)`, and 1 at the last index.
    pub fn z_lj(&self, spec: &LayerSpec, j: usize) -> f64 {
        if j + 1 == spec.n_ell {
            1.0
        } else {
            let cot = 1.0 / ((j + 1) as f64 * spec.theta).tan();
            1.0 - self.delta(spec.ell) * cot
        }
    }
}

fn delta_for(ell: usize, alpha: f64) -> f64 {
    let l = ell as f64;
    let ln = l.ln();
    1.0 / (alpha * l * ln * ln)
}

/// The layered point and allocation sequences up to `max_layer`.
#[derive(Clone, Debug)]
pub struct Construction<T> {
    pub layers: Vec<LayerSpec>,
    pub params: QLayerParams,
    pub x: PointSequence<T>,
    pub q: AllocationSequence<T>,
}

/// Points of layers `2..=max_layer`, flattened in layer order.
pub fn build_x_sequence<T: Scalar>(max_layer: usize) -> Result<(PointSequence<T>, Vec<LayerSpec>)> {
    let layers = layer_specs(max_layer)?;
    let mut points = Vec::with_capacity(layers.last().map_or(0, |s| s.offset + s.n_ell));
    for spec in &layers {
        for j in 0..spec.n_ell {
            let [a, b] = spec.point(j);
            points.push(vec![T::from_f64(a)?, T::from_f64(b)?]);
        }
    }
    Ok((PointSequence::new(2, points)?, layers))
}

/// Allocations paired with [`build_x_sequence`], prefixed by `q_0 = 0`.
pub fn build_q_sequence<T: Scalar>(
    max_layer: usize,
    alpha: AlphaEnclosure,
) -> Result<AllocationSequence<T>> {
    let (x, layers) = build_x_sequence::<T>(max_layer)?;
    let params = QLayerParams::new(max_layer, alpha)?;
    assemble_q(&x, &layers, &params)
}

fn assemble_q<T: Scalar>(
    x: &PointSequence<T>,
    layers: &[LayerSpec],
    params: &QLayerParams,
) -> Result<AllocationSequence<T>> {
    let mut allocs: Vec<Vec<T>> = Vec::with_capacity(x.len() + 1);
    allocs.push(vec![T::zero(), T::zero()]);
    // Allocations not weakly dominated by a later one; the argmax of any
    // nonnegative functional over earlier allocations lives here, and
    // pruning only in favour of later entries keeps ties on the latest.
    let mut frontier: Vec<usize> = vec![0];
    for spec in layers {
        if spec.counterclockwise {
            let zl = T::from_f64(params.z(spec.ell))?;
            for j in 0..spec.n_ell {
                let zlj = params.z_lj(spec, j);
                if !(0.0..=1.0).contains(&zlj) {
                    return Err(Error::precondition(format!(
                        "z_({},{j}) = {zlj} outside [0,1]; alpha enclosure too wide",
                        spec.ell
                    )));
                }
                let q = vec![zl.clone(), T::from_f64(zlj)?];
                frontier.retain(|&f| !weakly_dominates(&q, &allocs[f]));
                frontier.push(allocs.len());
                allocs.push(q);
            }
        } else {
            // Odd layers introduce no new allocations.
            let layer_start = allocs.len();
            for j in 0..spec.n_ell {
                let xi = x.point(spec.offset + j + 1);
                let mut best = frontier[0];
                let mut best_val = dot(&allocs[best], xi);
                for &f in &frontier[1..] {
                    let v = dot(&allocs[f], xi);
                    if v > best_val || (v == best_val && f > best) {
                        best = f;
                        best_val = v;
                    }
                }
                allocs.push(allocs[best].clone());
            }
            debug_assert_eq!(allocs.len(), layer_start + spec.n_ell);
        }
    }
    AllocationSequence::new(2, allocs)
}

fn weakly_dominates<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.iter().zip(b).all(|(u, v)| u >= v)
}

impl<T: Scalar> Construction<T> {
    pub fn build(max_layer: usize, alpha: AlphaEnclosure) -> Result<Self> {
        let (x, layers) = build_x_sequence::<T>(max_layer)?;
        let params = QLayerParams::new(max_layer, alpha)?;
        let q = assemble_q(&x, &layers, &params)?;
        Ok(Construction {
            layers,
            params,
            x,
            q,
        })
    }

    /// Builds with an enclosure of [`DEFAULT_ALPHA_TOLERANCE`].
    pub fn with_layers(max_layer: usize) -> Result<Self> {
        Self::build(max_layer, alpha_enclosure(DEFAULT_ALPHA_TOLERANCE)?)
    }

    pub fn max_layer(&self) -> usize {
        self.layers.last().map_or(1, |s| s.ell)
    }

    pub fn layer(&self, ell: usize) -> &LayerSpec {
        &self.layers[ell - 2]
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// First `n` points with their allocations.
    pub fn prefix(&self, n: usize) -> (PointSequence<T>, AllocationSequence<T>) {
        (self.x.prefix(n), self.q.prefix(n))
    }

    /// MenuGap(X, Q) in O(N) using the two-candidate structure.
    ///
    /// On an even layer the gap is set either by the previous point of the
    /// same layer or by the last point of the previous even layer (the zero
    /// allocation for layer 2). Odd layers reuse a dominating allocation, so
    /// their gap is exactly zero.
    pub fn fast_gap_terms(&self) -> GapReport<T> {
        let n = self.len();
        let mut terms = Vec::with_capacity(n);
        let mut witnesses = Vec::with_capacity(n);
        let mut last_even_end = 0usize;
        for spec in &self.layers {
            let base = spec.offset + 1;
            if spec.counterclockwise {
                for j in 0..spec.n_ell {
                    let i = base + j;
                    let xi = self.x.point(i);
                    let qi = self.q.get(i);
                    let mut best = diff_dot(qi, self.q.get(last_even_end), xi);
                    let mut witness = last_even_end;
                    if j > 0 {
                        let g = diff_dot(qi, self.q.get(i - 1), xi);
                        if g < best {
                            best = g;
                            witness = i - 1;
                        }
                    }
                    terms.push(best);
                    witnesses.push(witness);
                }
                last_even_end = base + spec.n_ell - 1;
            } else {
                for _ in 0..spec.n_ell {
                    terms.push(T::zero());
                    witnesses.push(last_even_end);
                }
            }
        }
        GapReport::from_raw(terms, witnesses, &self.x.l1_norms(), false)
    }

    /// Same as [`Self::fast_gap_terms`] but only for `(x, q)` equal to this construction.
    pub fn fast_gap_terms_for(
        &self,
        x: &PointSequence<T>,
        q: &AllocationSequence<T>,
    ) -> Result<GapReport<T>> {
        if x != &self.x || q != &self.q {
            return Err(Error::precondition(
                "the O(N) gap evaluation only applies to the layered construction",
            ));
        }
        Ok(self.fast_gap_terms())
    }

    /// Sum of raw gap terms over one layer.
    pub fn layer_gap_sum(&self, report: &GapReport<T>, ell: usize) -> T {
        let spec = self.layer(ell);
        let mut acc = T::zero();
        for t in &report.terms[spec.range()] {
            acc = acc.add_ref(t);
        }
        acc
    }
}

/// Recognizes `(x, q)` as a construction prefix and evaluates it in O(N).
pub fn fast_gap_terms_of<T: Scalar>(
    x: &PointSequence<T>,
    q: &AllocationSequence<T>,
    alpha: AlphaEnclosure,
) -> Result<GapReport<T>> {
    let mut ell = 2;
    let mut total = 0;
    while total < x.len() {
        total += LayerSpec::new(ell, 0)?.n_ell;
        ell += 1;
    }
    if total != x.len() || x.is_empty() {
        return Err(Error::precondition(
            "sequence length does not match a whole number of layers",
        ));
    }
    Construction::<T>::build(ell - 1, alpha)?.fast_gap_terms_for(x, q)
}

/// `delta_l sin(theta_l) / sin((j+1) theta_l)` for even `l > 2`.
pub fn gap_lower_formula(ell: usize, j: usize, alpha: &AlphaEnclosure) -> Result<f64> {
    check_even_layer(ell)?;
    let spec = LayerSpec::new(ell, 0)?;
    if j >= spec.n_ell {
        return Err(Error::invalid(
            "j",
            format!("layer {ell} has {} points", spec.n_ell),
        ));
    }
    let delta = delta_for(ell, alpha.hi());
    if j == 0 {
        return Ok(delta);
    }
    Ok(delta * spec.theta.sin() / ((j + 1) as f64 * spec.theta).sin())
}

/// `delta_l ln(n_l) / 2` for even `l > 2`.
pub fn layer_gap_lower_bound(ell: usize, alpha: &AlphaEnclosure) -> Result<f64> {
    check_even_layer(ell)?;
    let spec = LayerSpec::new(ell, 0)?;
    Ok(delta_for(ell, alpha.hi()) * (spec.n_ell as f64).ln() / 2.0)
}

fn check_even_layer(ell: usize) -> Result<()> {
    if ell <= 2 || ell % 2 == 1 {
        return Err(Error::invalid(
            "ell",
            "the bound covers even layers above 2",
        ));
    }
    Ok(())
}

/// `sqrt(2) * sum_i (1 - x_i . x_{i+1})` for unit-norm points.
///
/// With `include_terminal`, the convention `x_{N+1} = 0` adds one more
/// unit to the coefficient.
pub fn lagrel_closed_form<T: Scalar>(
    x: &PointSequence<T>,
    include_terminal: bool,
) -> Result<Sqrt2Scaled<T>> {
    check_unit_norm(x)?;
    let pts = x.points();
    let mut coeff = T::zero();
    for w in pts.windows(2) {
        coeff = coeff.add_ref(&T::one().sub_ref(&dot(&w[0], &w[1])));
    }
    if include_terminal && !pts.is_empty() {
        coeff = coeff.add_ref(&T::one());
    }
    Ok(Sqrt2Scaled::new(coeff))
}

pub fn check_unit_norm<T: Scalar>(x: &PointSequence<T>) -> Result<()> {
    for (i, p) in x.points().iter().enumerate() {
        let n2 = dot(p, p).to_f64();
        if (n2 - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::precondition(format!(
                "point {} has squared l2 norm {n2}; the sqrt(2) relaxation constants need unit vectors",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Exact per-layer terms summed explicitly before switching to the integral tail.
pub const TAIL_EXPLICIT_LAYERS: usize = 1000;

/// Upper bound on the relaxation mass of layers `>= from_layer`.
///
/// Each layer contributes at most `sqrt(2) pi^2 / (8 l ceil(ln^2 l))`; the
/// first [`TAIL_EXPLICIT_LAYERS`] are summed and the rest bounded by
/// `int_{M-1}^inf dx/(x ln^2 x) = 1/ln(M-1)`.
pub fn lagrel_tail_bound(from_layer: usize) -> Result<f64> {
    if from_layer < 2 {
        return Err(Error::invalid("from_layer", "must be at least 2"));
    }
    let mut sum = Interval::point(0.0);
    let end = from_layer + TAIL_EXPLICIT_LAYERS;
    for ell in from_layer..end {
        let c = ceil_ln_sq(ell)? as i64;
        sum = sum + Interval::from_i64(ell as i64 * c).recip();
    }
    sum = sum + Interval::from_i64(end as i64 - 1).ln().recip();
    let factor = Interval::sqrt2() * Interval::pi().sqr() / Interval::point(8.0);
    Ok((factor * sum).hi)
}

/// `sum over even l in [4, max_layer] of 1/(2 alpha l ln l)` with alpha's upper end.
pub fn divergence_partial(max_layer: usize, alpha: &AlphaEnclosure) -> Result<f64> {
    if max_layer < 4 {
        return Err(Error::invalid("max_layer", "must be at least 4"));
    }
    let a = alpha.hi();
    Ok((4..=max_layer)
        .step_by(2)
        .map(|ell| {
            let l = ell as f64;
            1.0 / (2.0 * a * l * l.ln())
        })
        .sum())
}

/// One row of the per-layer bounds table.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LayerBoundsRow {
    pub ell: usize,
    pub n_ell: usize,
    pub theta_ell: f64,
    pub delta_ell: f64,
    /// `sqrt(2) sum_j (1 - x_{l,j} . x_{l,j+1})` within the layer.
    pub lagrel_term: f64,
    /// Raw gap sum over the layer.
    pub gap_sum: f64,
    /// Layer-sum bound `delta ln(n)/2`; empty for layers it does not cover.
    pub gap_lower: Option<f64>,
    /// Divergence series through this layer; empty below 4.
    pub divergence_cum: Option<f64>,
}

pub fn layer_bounds<T: Scalar>(c: &Construction<T>) -> Result<Vec<LayerBoundsRow>> {
    let report = c.fast_gap_terms();
    let alpha = &c.params.alpha;
    let mut rows = Vec::with_capacity(c.layers.len());
    for spec in &c.layers {
        let pts = &c.x.points()[spec.range()];
        let lagrel: f64 = pts
            .windows(2)
            .map(|w| 1.0 - dot(&w[0], &w[1]).to_f64())
            .sum::<f64>()
            * SQRT_2;
        let even_big = spec.ell > 2 && spec.ell % 2 == 0;
        rows.push(LayerBoundsRow {
            ell: spec.ell,
            n_ell: spec.n_ell,
            theta_ell: spec.theta,
            delta_ell: c.params.delta(spec.ell),
            lagrel_term: lagrel,
            gap_sum: c.layer_gap_sum(&report, spec.ell).to_f64(),
            gap_lower: if even_big {
                Some(layer_gap_lower_bound(spec.ell, alpha)?)
            } else {
                None
            },
            divergence_cum: if spec.ell >= 4 {
                Some(divergence_partial(spec.ell, alpha)?)
            } else {
                None
            },
        });
    }
    Ok(rows)
}

/// Per-layer relaxation bound `pi^2 / (8 (n_l - 1))`, the value `(n-1)(1 - cos theta)` never exceeds.
pub fn layer_lagrel_cap(spec: &LayerSpec) -> f64 {
    PI * PI / (8.0 * (spec.n_ell - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gapcore::menu_gap_terms;
    use crate::scalar::Rational;

    fn alpha() -> AlphaEnclosure {
        alpha_enclosure(1e-9).unwrap()
    }

    #[test]
    fn layer_counts() {
        let s2 = LayerSpec::new(2, 0).unwrap();
        assert_eq!(s2.n_ell, 3);
        assert_eq!(s2.theta, PI / 4.0);
        let s3 = LayerSpec::new(3, 3).unwrap();
        assert_eq!(s3.n_ell, 7);
        assert_eq!(s3.point(0), [0.0, 1.0]);
        assert_eq!(s3.point(6), [1.0, 0.0]);
        assert_eq!(LayerSpec::new(4, 0).unwrap().n_ell, 9);
    }

    #[test]
    fn layer_two_points() {
        let (x, _) = build_x_sequence::<f64>(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(x.point(1), &[1.0, 0.0]);
        assert!((x.point(2)[0] - h).abs() < 1e-15 && (x.point(2)[1] - h).abs() < 1e-15);
        assert_eq!(x.point(3), &[0.0, 1.0]);
    }

    #[test]
    fn alpha_enclosure_is_nested_and_sane() {
        let coarse = alpha_enclosure(1.0).unwrap();
        assert!(coarse.lo() > 1.9 && coarse.hi() <= 3.0);
        let mid = alpha_enclosure(1e-4).unwrap();
        let fine = alpha_enclosure(1e-9).unwrap();
        assert!(coarse.lo() <= mid.lo() && mid.lo() <= fine.lo());
        assert!(fine.hi() <= mid.hi() && mid.hi() <= coarse.hi());
        assert!(fine.width() <= 1e-9);
        assert!(matches!(
            alpha_enclosure(1e-16),
            Err(Error::ToleranceUnreachable { .. })
        ));
    }

    #[test]
    fn q_first_point_and_layer_ends() {
        let c = Construction::<f64>::build(6, alpha()).unwrap();
        let d2 = c.params.delta(2);
        let q1 = c.q.get(1);
        assert_eq!(q1[0], c.params.z(2));
        assert!((q1[1] - (1.0 - d2)).abs() < 1e-15);
        for spec in c.layers.iter().filter(|s| s.counterclockwise) {
            assert_eq!(c.q.get(spec.offset + spec.n_ell)[1], 1.0);
        }
    }

    #[test]
    fn odd_layers_copy_last_even_allocation() {
        let c = Construction::<f64>::build(5, alpha()).unwrap();
        let last2 = c.q.get(c.layer(2).offset + c.layer(2).n_ell).to_vec();
        for i in c.layer(3).range() {
            assert_eq!(c.q.get(i + 1), last2.as_slice());
        }
    }

    #[test]
    fn fast_terms_match_quadratic_scan_exactly() {
        let c = Construction::<Rational>::build(6, alpha()).unwrap();
        let slow = menu_gap_terms(&c.x, &c.q).unwrap();
        let fast = c.fast_gap_terms();
        assert_eq!(slow.terms, fast.terms);
        assert_eq!(slow.total, fast.total);
        for (i, w) in fast.argmin_witness.iter().enumerate() {
            let t = diff_dot(c.q.get(i + 1), c.q.get(*w), c.x.point(i + 1));
            assert_eq!(t, fast.terms[i]);
        }
    }

    #[test]
    fn fast_terms_refuse_foreign_sequences() {
        let c = Construction::<f64>::build(4, alpha()).unwrap();
        let (x, q) = c.prefix(5);
        assert!(c.fast_gap_terms_for(&x, &q).is_err());
        assert!(fast_gap_terms_of(&x, &q, alpha()).is_err());
        assert!(fast_gap_terms_of(&c.x, &c.q, alpha()).is_ok());
    }

    #[test]
    fn lower_formula_examples() {
        let a = alpha();
        assert_eq!(gap_lower_formula(4, 0, &a).unwrap(), delta_for(4, a.hi()));
        assert!(gap_lower_formula(3, 0, &a).is_err());
        assert!(gap_lower_formula(2, 0, &a).is_err());
        let want = 9f64.ln() / (2.0 * a.hi() * 4.0 * 4f64.ln().powi(2));
        assert!((layer_gap_lower_bound(4, &a).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn lagrel_layer_two() {
        let (x, _) = build_x_sequence::<f64>(2).unwrap();
        let v = lagrel_closed_form(&x, false).unwrap().to_f64();
        let want = SQRT_2 * 2.0 * (1.0 - (PI / 4.0).cos());
        assert!((v - want).abs() < 1e-12);
        assert!((want - 0.8284).abs() < 1e-4);
        let with_end = lagrel_closed_form(&x, true).unwrap().to_f64();
        assert!((with_end - v - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn lagrel_rejects_non_unit_points() {
        let x = PointSequence::new(2, vec![vec![1.0, 1.0]]).unwrap();
        assert!(lagrel_closed_form(&x, false).is_err());
    }

    #[test]
    fn tail_bound_is_decreasing_and_total_below_six() {
        let full = lagrel_tail_bound(2).unwrap();
        assert!(full <= 6.0, "{full}");
        let mut prev = full;
        for l in [3, 5, 10, 41, 100] {
            let t = lagrel_tail_bound(l).unwrap();
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn divergence_partial_grows() {
        let a = alpha();
        let v40 = divergence_partial(40, &a).unwrap();
        let v42 = divergence_partial(42, &a).unwrap();
        assert!(v42 > v40);
        assert!(divergence_partial(3, &a).is_err());
    }
}
