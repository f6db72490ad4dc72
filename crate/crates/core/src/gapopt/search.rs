//! Lower bounds on the aligned gap by coordinate ascent and grid search.
//!
//! Fixing every scalar but `c_m`, the objective
//! `sum_i w_i max(0, c_i G_ii - max(0, max_{j<i} c_j G_ij))` with Gram
//! matrix `G` is piecewise linear in `c_m`. Its maximum over `[0, ub_m]`
//! therefore sits on one of O(N) breakpoints, which are enumerated and
//! evaluated exactly; no line search tolerance is involved.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gapcore::{align_gap_terms, PointSequence, ScalarSequence};
use crate::rng;
use crate::scalar::{dot, l1_norm, linf_norm, Scalar};

pub const DEFAULT_RESTARTS: usize = 16;
pub const DEFAULT_SWEEPS: usize = 3;
pub const BRUTEFORCE_MAX_POINTS: usize = 6;
pub const BRUTEFORCE_MAX_RESOLUTION: usize = 256;
/// Upper limit on grid points visited by the brute-force oracle.
pub const BRUTEFORCE_MAX_GRID: f64 = 5e8;
/// Denominator of random starting fractions.
const RANDOM_GRID: i64 = 65_536;

/// The weighted aligned-gap objective over scalars `c_1..c_N`.
#[derive(Clone, Debug)]
pub struct AlignProblem<T> {
    gram: Vec<Vec<T>>,
    weights: Vec<T>,
    upper: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct SearchResult<T> {
    pub value: T,
    /// `c_0 = 0` followed by `c_1..c_N`.
    pub scalars: Vec<T>,
}

impl<T: Scalar> AlignProblem<T> {
    pub fn new(points: &[Vec<T>], weights: Vec<T>, upper: Vec<T>) -> Result<Self> {
        let n = points.len();
        if weights.len() != n || upper.len() != n {
            return Err(Error::length(
                "weights and bounds must match the point count",
            ));
        }
        let gram = (0..n)
            .map(|i| (0..n).map(|j| dot(&points[i], &points[j])).collect())
            .collect();
        Ok(AlignProblem {
            gram,
            weights,
            upper,
        })
    }

    /// AlignGap weights `1/||x_i||_1` and caps `1/||x_i||_inf`.
    pub fn align_gap(x: &PointSequence<T>) -> Result<Self> {
        let pts = x.points();
        let w = pts.iter().map(|p| T::one().div_ref(&l1_norm(p))).collect();
        let ub = pts
            .iter()
            .map(|p| T::one().div_ref(&linf_norm(p)))
            .collect();
        Self::new(pts, w, ub)
    }

    pub fn len(&self) -> usize {
        self.gram.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gram.is_empty()
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    /// `max(0, max_{j<i, j != skip} c_j G_ij)`, 0-based.
    fn shadow(&self, c: &[T], i: usize, skip: Option<usize>) -> T {
        let mut m = T::zero();
        for (j, (cj, g)) in c.iter().zip(&self.gram[i]).take(i).enumerate() {
            if Some(j) == skip {
                continue;
            }
            let v = cj.mul_ref(g);
            if v > m {
                m = v;
            }
        }
        m
    }

    /// Objective at `c` (0-based, without `c_0`).
    pub fn value(&self, c: &[T]) -> T {
        let mut total = T::zero();
        for i in 0..self.len() {
            let s = c[i]
                .mul_ref(&self.gram[i][i])
                .sub_ref(&self.shadow(c, i, None));
            if s.is_positive() {
                total = total.add_ref(&self.weights[i].mul_ref(&s));
            }
        }
        total
    }

    /// Maximizes over `c_m` with the rest fixed; returns whether `c` changed.
    fn improve_coordinate(&self, c: &mut [T], m: usize) -> bool {
        let n = self.len();
        let ub = &self.upper[m];
        let own_shadow = self.shadow(c, m, None);
        let later: Vec<(usize, T, T)> = (m + 1..n)
            .filter(|&i| self.gram[i][m].is_positive())
            .map(|i| {
                let level = c[i].mul_ref(&self.gram[i][i]);
                (i, self.shadow(c, i, Some(m)), level)
            })
            .filter(|(_, sh, level)| level > sh)
            .collect();
        let local = |t: &T| -> T {
            let mut acc = T::zero();
            let s = t.mul_ref(&self.gram[m][m]).sub_ref(&own_shadow);
            if s.is_positive() {
                acc = acc.add_ref(&self.weights[m].mul_ref(&s));
            }
            for (i, sh, level) in &later {
                let v = t.mul_ref(&self.gram[*i][m]);
                let top = if v > *sh { v } else { sh.clone() };
                let s = level.sub_ref(&top);
                if s.is_positive() {
                    acc = acc.add_ref(&self.weights[*i].mul_ref(&s));
                }
            }
            acc
        };
        let mut candidates = vec![T::zero(), ub.clone()];
        candidates.push(own_shadow.div_ref(&self.gram[m][m]));
        for (i, sh, level) in &later {
            let g = &self.gram[*i][m];
            candidates.push(sh.div_ref(g));
            candidates.push(level.div_ref(g));
        }
        let current = c[m].clone();
        let mut best_val = local(&current);
        let mut best_t: Option<T> = None;
        for t in candidates {
            if t.is_negative() || t > *ub {
                continue;
            }
            let v = local(&t);
            let better = v > best_val || (v == best_val && best_t.as_ref().is_some_and(|b| t < *b));
            if better {
                best_val = v;
                best_t = Some(t);
            }
        }
        match best_t {
            Some(t) if t != current => {
                c[m] = t;
                true
            }
            _ => false,
        }
    }

    /// Coordinate ascent from `start`; each sweep visits every coordinate once.
    pub fn ascend(&self, mut c: Vec<T>, sweeps: usize) -> SearchResult<T> {
        for _ in 0..sweeps {
            let mut changed = false;
            for m in 0..self.len() {
                changed |= self.improve_coordinate(&mut c, m);
            }
            if !changed {
                break;
            }
        }
        let value = self.value(&c);
        let mut scalars = Vec::with_capacity(c.len() + 1);
        scalars.push(T::zero());
        scalars.extend(c);
        SearchResult { value, scalars }
    }

    /// Canonical starts, then `restarts` seeded random starts; best result wins.
    pub fn search(&self, restarts: usize, sweeps: usize, seed: u64) -> SearchResult<T> {
        let n = self.len();
        let mut starts: Vec<Vec<T>> = vec![self.upper.clone()];
        starts.push(
            self.upper
                .iter()
                .map(|u| if *u > T::one() { T::one() } else { u.clone() })
                .collect(),
        );
        let mut r = rng::stream(seed, "align-search");
        for _ in 0..restarts {
            starts.push(
                (0..n)
                    .map(|i| {
                        let u = r.gen_range(0..=RANDOM_GRID);
                        self.upper[i].mul_ref(&T::ratio(u, RANDOM_GRID))
                    })
                    .collect(),
            );
        }
        let mut best: Option<SearchResult<T>> = None;
        for s in starts {
            let res = self.ascend(s, sweeps);
            best = Some(match best {
                None => res,
                Some(b) => {
                    if res.value > b.value
                        || (res.value == b.value && lex_less(&res.scalars, &b.scalars))
                    {
                        res
                    } else {
                        b
                    }
                }
            });
        }
        best.unwrap_or(SearchResult {
            value: T::zero(),
            scalars: vec![T::zero()],
        })
    }
}

fn lex_less<T: Scalar>(a: &[T], b: &[T]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Best AlignGap(X, C) found by coordinate ascent; a certified lower bound on AlignGap(X).
pub fn align_gap_search<T: Scalar>(
    x: &PointSequence<T>,
    restarts: usize,
    seed: u64,
) -> Result<(T, ScalarSequence<T>)> {
    align_gap_search_with(x, restarts, DEFAULT_SWEEPS, seed)
}

pub fn align_gap_search_with<T: Scalar>(
    x: &PointSequence<T>,
    restarts: usize,
    sweeps: usize,
    seed: u64,
) -> Result<(T, ScalarSequence<T>)> {
    let problem = AlignProblem::align_gap(x)?;
    let res = problem.search(restarts, sweeps, seed);
    let c = ScalarSequence::new(res.scalars, x)?;
    let value = align_gap_terms(x, &c)?.total;
    Ok((value, c))
}

/// Exhaustive search over `c_i in {t * ub_i / resolution}`.
pub fn align_gap_bruteforce<T: Scalar>(
    x: &PointSequence<T>,
    resolution: usize,
) -> Result<(T, ScalarSequence<T>)> {
    let n = x.len();
    if n > BRUTEFORCE_MAX_POINTS {
        return Err(Error::cap("points", n, BRUTEFORCE_MAX_POINTS));
    }
    if resolution == 0 || resolution > BRUTEFORCE_MAX_RESOLUTION {
        return Err(Error::invalid(
            "resolution",
            format!("must be in 1..={BRUTEFORCE_MAX_RESOLUTION}"),
        ));
    }
    let grid = ((resolution + 1) as f64).powi(n as i32);
    if grid > BRUTEFORCE_MAX_GRID {
        return Err(Error::cap(
            "grid points",
            grid as usize,
            BRUTEFORCE_MAX_GRID as usize,
        ));
    }
    let problem = AlignProblem::align_gap(x)?;
    let levels: Vec<Vec<T>> = problem
        .upper
        .iter()
        .map(|u| {
            (0..=resolution)
                .map(|t| u.mul_ref(&T::ratio(t as i64, resolution as i64)))
                .collect()
        })
        .collect();
    let mut c = vec![T::zero(); n];
    let mut best = (T::zero(), c.clone());
    if n > 0 {
        dfs(&problem, &levels, 0, T::zero(), &mut c, &mut best);
    }
    let mut scalars = vec![T::zero()];
    scalars.extend(best.1);
    let c = ScalarSequence::new(scalars, x)?;
    let value = align_gap_terms(x, &c)?.total;
    Ok((value, c))
}

fn dfs<T: Scalar>(
    p: &AlignProblem<T>,
    levels: &[Vec<T>],
    i: usize,
    acc: T,
    c: &mut Vec<T>,
    best: &mut (T, Vec<T>),
) {
    let shadow = p.shadow(c, i, None);
    for level in &levels[i] {
        let s = level.mul_ref(&p.gram[i][i]).sub_ref(&shadow);
        let next = if s.is_positive() {
            acc.add_ref(&p.weights[i].mul_ref(&s))
        } else {
            acc.clone()
        };
        c[i] = level.clone();
        if i + 1 == p.len() {
            if next > best.0 {
                *best = (next, c.clone());
            }
        } else {
            dfs(p, levels, i + 1, next, c, best);
        }
    }
    c[i] = T::zero();
}
