//! Dense dictionary simplex for `max c.x  s.t.  A x <= b, x >= 0`.
//!
//! The dictionary stores only nonbasic columns (`m x n` rather than
//! `m x (n + m)`). Dantzig's rule picks the entering column until a run of
//! degenerate pivots suggests cycling, after which Bland's rule takes over.
//! A negative right-hand side triggers a phase one with a single auxiliary
//! column.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub rows: Vec<Vec<T>>,
    pub rhs: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct LpResult<T> {
    pub status: LpStatus,
    pub objective: T,
    pub x: Vec<T>,
    /// One multiplier per constraint row, nonnegative at optimality.
    pub duals: Vec<T>,
    pub pivots: usize,
}

/// Pivot threshold for the float backend.
const FLOAT_EPS: f64 = 1e-11;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;
pub const DEFAULT_PIVOT_LIMIT: usize = 200_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Var {
    Original(usize),
    Slack(usize),
    Aux,
}

impl Var {
    /// Total order used by Bland's rule and tie-breaks.
    fn rank(self) -> usize {
        match self {
            Var::Aux => 0,
            Var::Original(j) => 1 + j,
            Var::Slack(i) => 1 << 40 | i,
        }
    }
}

struct Dictionary<T> {
    /// `d[i][j]` for basic row `i`, nonbasic column `j`; the last column is the constant.
    d: Vec<Vec<T>>,
    /// Objective row, same layout.
    z: Vec<T>,
    basic: Vec<Var>,
    nonbasic: Vec<Var>,
    pivots: usize,
}

fn positive<T: Scalar>(v: &T) -> bool {
    if T::EXACT {
        v.is_positive()
    } else {
        v.to_f64() > FLOAT_EPS
    }
}

fn negative<T: Scalar>(v: &T) -> bool {
    if T::EXACT {
        v.is_negative()
    } else {
        v.to_f64() < -FLOAT_EPS
    }
}

impl<T: Scalar> Dictionary<T> {
    fn n(&self) -> usize {
        self.nonbasic.len()
    }

    fn constant(&self, i: usize) -> &T {
        &self.d[i][self.n()]
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let n = self.n();
        let piv = self.d[r][s].clone();
        let inv = T::one().div_ref(&piv);
        // Solve row r for the entering variable.
        let mut row = std::mem::take(&mut self.d[r]);
        for (j, v) in row.iter_mut().enumerate() {
            if j == s {
                *v = inv.clone();
            } else if !v.is_zero() {
                *v = -(v.div_ref(&piv));
            }
        }
        let nz: Vec<usize> = (0..=n).filter(|&j| j != s && !row[j].is_zero()).collect();
        for (i, other) in self.d.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            substitute(other, &row, &nz, s);
        }
        substitute(&mut self.z, &row, &nz, s);
        self.d[r] = row;
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[s]);
        self.pivots += 1;
    }

    /// Runs simplex on the current objective row. Returns `false` when unbounded.
    fn optimize(&mut self, limit: usize) -> Result<bool> {
        let mut degenerate = 0usize;
        loop {
            if self.pivots >= limit {
                return Err(Error::Solver(format!("pivot limit {limit} reached")));
            }
            let n = self.n();
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering: Option<usize> = None;
            for j in 0..n {
                if !positive(&self.z[j]) {
                    continue;
                }
                entering = match entering {
                    None => Some(j),
                    Some(e) => {
                        let better = if bland {
                            self.nonbasic[j].rank() < self.nonbasic[e].rank()
                        } else {
                            self.z[j] > self.z[e]
                        };
                        Some(if better { j } else { e })
                    }
                };
            }
            let Some(s) = entering else {
                return Ok(true);
            };
            let mut leaving: Option<(usize, T)> = None;
            for i in 0..self.d.len() {
                let a = &self.d[i][s];
                if !negative(a) {
                    continue;
                }
                let ratio = self.constant(i).div_ref(&(-a.clone()));
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best
                            || (ratio == best && self.basic[i].rank() < self.basic[r].rank())
                        {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leaving else {
                return Ok(false);
            };
            if ratio.is_zero() {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, s);
        }
    }
}

fn substitute<T: Scalar>(target: &mut [T], row: &[T], nz: &[usize], s: usize) {
    let coef = target[s].clone();
    if coef.is_zero() {
        return;
    }
    for &j in nz {
        let delta = coef.mul_ref(&row[j]);
        target[j] = target[j].add_ref(&delta);
    }
    target[s] = coef.mul_ref(&row[s]);
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(objective: Vec<T>, rows: Vec<Vec<T>>, rhs: Vec<T>) -> Result<Self> {
        let n = objective.len();
        if rows.len() != rhs.len() {
            return Err(Error::length("constraint rows and right-hand sides differ"));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.len(),
            });
        }
        Ok(LinearProgram {
            objective,
            rows,
            rhs,
        })
    }

    pub fn solve(&self) -> Result<LpResult<T>> {
        self.solve_with_limit(DEFAULT_PIVOT_LIMIT)
    }

    pub fn solve_with_limit(&self, limit: usize) -> Result<LpResult<T>> {
        let n = self.objective.len();
        let m = self.rows.len();
        let needs_phase_one = self.rhs.iter().any(|b| b.is_negative());
        let mut nonbasic: Vec<Var> = (0..n).map(Var::Original).collect();
        if needs_phase_one {
            nonbasic.push(Var::Aux);
        }
        let width = nonbasic.len();
        let d: Vec<Vec<T>> = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| {
                let mut out: Vec<T> = row.iter().map(|a| -a.clone()).collect();
                if needs_phase_one {
                    out.push(T::one());
                }
                out.push(b.clone());
                out
            })
            .collect();
        let mut dict = Dictionary {
            d,
            z: vec![T::zero(); width + 1],
            basic: (0..m).map(Var::Slack).collect(),
            nonbasic,
            pivots: 0,
        };

        if needs_phase_one {
            let aux_col = n;
            dict.z[aux_col] = -T::one();
            let mut r = 0;
            for i in 1..m {
                if dict.constant(i) < dict.constant(r) {
                    r = i;
                }
            }
            dict.pivot(r, aux_col);
            dict.optimize(limit)?;
            let w = dict.z[dict.n()].clone();
            if negative(&w) {
                return Ok(LpResult {
                    status: LpStatus::Infeasible,
                    objective: T::zero(),
                    x: vec![T::zero(); n],
                    duals: vec![T::zero(); m],
                    pivots: dict.pivots,
                });
            }
            if let Some(r) = dict.basic.iter().position(|v| *v == Var::Aux) {
                let s = (0..dict.n())
                    .filter(|&j| !dict.d[r][j].is_zero())
                    .max_by(|&a, &b| {
                        let (x, y) = (dict.d[r][a].abs(), dict.d[r][b].abs());
                        x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal)
                    });
                if let Some(s) = s {
                    dict.pivot(r, s);
                }
            }
            if let Some(col) = dict.nonbasic.iter().position(|v| *v == Var::Aux) {
                dict.nonbasic.remove(col);
                for row in &mut dict.d {
                    row.remove(col);
                }
            } else {
                return Err(Error::Solver("auxiliary variable stuck in basis".into()));
            }
            // Rebuild the true objective over the current nonbasic set.
            let width = dict.n();
            let mut z = vec![T::zero(); width + 1];
            for (j, c) in self.objective.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if let Some(col) = dict.nonbasic.iter().position(|v| *v == Var::Original(j)) {
                    z[col] = z[col].add_ref(c);
                } else if let Some(r) = dict.basic.iter().position(|v| *v == Var::Original(j)) {
                    for (zc, dv) in z.iter_mut().zip(&dict.d[r]) {
                        *zc = zc.add_ref(&c.mul_ref(dv));
                    }
                }
            }
            dict.z = z;
        } else {
            for (j, c) in self.objective.iter().enumerate() {
                dict.z[j] = c.clone();
            }
        }

        let bounded = dict.optimize(limit)?;
        let mut x = vec![T::zero(); n];
        for (i, v) in dict.basic.iter().enumerate() {
            if let Var::Original(j) = v {
                x[*j] = dict.constant(i).clone();
            }
        }
        let mut duals = vec![T::zero(); m];
        for (j, v) in dict.nonbasic.iter().enumerate() {
            if let Var::Slack(i) = v {
                duals[*i] = -dict.z[j].clone();
            }
        }
        let objective = dict.z[dict.n()].clone();
        Ok(LpResult {
            status: if bounded {
                LpStatus::Optimal
            } else {
                LpStatus::Unbounded
            },
            objective,
            x,
            duals,
            pivots: dict.pivots,
        })
    }
}
