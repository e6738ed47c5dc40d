//! Dense two-phase simplex over exact rationals.
//!
//! Sized for desk-scale relaxations (hundreds of columns, tens of rows).
//! Dantzig pricing is used until a run of degenerate pivots is seen, after
//! which Bland's rule takes over so the method always terminates.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `minimize objective . x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub values: Vec<Rational>,
    pub objective: Rational,
    pub pivots: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpError {
    Infeasible,
    Unbounded,
    PivotLimit(usize),
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Infeasible => f.write_str("linear program is infeasible"),
            LpError::Unbounded => f.write_str("linear program is unbounded"),
            LpError::PivotLimit(n) => write!(f, "simplex stopped after {n} pivots"),
        }
    }
}

impl std::error::Error for LpError {}

const DEGENERATE_SWITCH: usize = 50;
const PIVOT_LIMIT: usize = 200_000;

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn minimize(&self) -> Result<LpSolution, LpError> {
        Tableau::build(self).solve(self)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs; the last entry is minus the objective value.
    obj: Vec<Rational>,
    basis: Vec<usize>,
    num_cols: usize,
    first_artificial: usize,
    pivots: usize,
    degenerate_run: usize,
    bland: bool,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let mut slack = 0;
        let mut artificial = 0;
        let normalized: Vec<(Relation, bool)> = lp
            .constraints
            .iter()
            .map(|c| {
                let flip = c.rhs.is_negative();
                let rel = match (c.relation, flip) {
                    (Relation::Le, true) => Relation::Ge,
                    (Relation::Ge, true) => Relation::Le,
                    (r, _) => r,
                };
                match rel {
                    Relation::Le => slack += 1,
                    Relation::Ge => {
                        slack += 1;
                        artificial += 1
                    }
                    Relation::Eq => artificial += 1,
                }
                (rel, flip)
            })
            .collect();
        let n = lp.num_vars;
        let first_slack = n;
        let first_artificial = n + slack;
        let num_cols = first_artificial + artificial;
        let mut rows = vec![vec![Rational::zero(); num_cols + 1]; m];
        let mut basis = vec![0; m];
        let (mut s, mut a) = (first_slack, first_artificial);
        for (r, (c, &(rel, flip))) in lp.constraints.iter().zip(&normalized).enumerate() {
            let row = &mut rows[r];
            for (v, coef) in &c.coeffs {
                row[*v] += coef;
            }
            row[num_cols] = c.rhs.clone();
            if flip {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
            }
            match rel {
                Relation::Le => {
                    row[s] = Rational::from_integer(1.into());
                    basis[r] = s;
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = Rational::from_integer((-1).into());
                    row[a] = Rational::from_integer(1.into());
                    basis[r] = a;
                    s += 1;
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = Rational::from_integer(1.into());
                    basis[r] = a;
                    a += 1;
                }
            }
        }
        Self {
            rows,
            obj: vec![Rational::zero(); num_cols + 1],
            basis,
            num_cols,
            first_artificial,
            pivots: 0,
            degenerate_run: 0,
            bland: false,
        }
    }

    fn set_objective(&mut self, costs: &[Rational]) {
        let mut obj = vec![Rational::zero(); self.num_cols + 1];
        obj[..costs.len()].clone_from_slice(costs);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = obj[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (o, x) in obj.iter_mut().zip(&self.rows[r]) {
                if !x.is_zero() {
                    *o -= &cb * x;
                }
            }
        }
        self.obj = obj;
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        if self.first_artificial < self.num_cols {
            let mut phase1 = vec![Rational::zero(); self.num_cols];
            for c in phase1.iter_mut().skip(self.first_artificial) {
                *c = Rational::from_integer(1.into());
            }
            self.set_objective(&phase1);
            self.run(self.num_cols)?;
            if !self.obj[self.num_cols].is_zero() {
                return Err(LpError::Infeasible);
            }
            self.evict_artificials();
        }
        self.set_objective(&lp.objective);
        self.bland = false;
        self.degenerate_run = 0;
        self.run(self.first_artificial)?;
        let mut values = vec![Rational::zero(); lp.num_vars];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < lp.num_vars {
                values[b] = self.rows[r][self.num_cols].clone();
            }
        }
        Ok(LpSolution {
            objective: -self.obj[self.num_cols].clone(),
            values,
            pivots: self.pivots,
        })
    }

    /// Pivots artificial variables out of the basis after phase one; rows
    /// that cannot be pivoted are redundant and dropped.
    fn evict_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < self.first_artificial {
                r += 1;
                continue;
            }
            match (0..self.first_artificial).find(|&c| !self.rows[r][c].is_zero()) {
                Some(c) => {
                    self.pivot(r, c);
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.basis.remove(r);
                }
            }
        }
    }

    fn run(&mut self, allowed_cols: usize) -> Result<(), LpError> {
        loop {
            let Some(col) = self.entering(allowed_cols) else {
                return Ok(());
            };
            let Some(row) = self.leaving(col) else {
                return Err(LpError::Unbounded);
            };
            if self.rows[row][self.num_cols].is_zero() {
                self.degenerate_run += 1;
                if self.degenerate_run > DEGENERATE_SWITCH {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(row, col);
            if self.pivots > PIVOT_LIMIT {
                return Err(LpError::PivotLimit(self.pivots));
            }
        }
    }

    fn entering(&self, allowed_cols: usize) -> Option<usize> {
        let candidates = (0..allowed_cols).filter(|&c| self.obj[c].is_negative());
        if self.bland {
            candidates.min()
        } else {
            candidates.min_by(|&a, &b| self.obj[a].cmp(&self.obj[b]).then(a.cmp(&b)))
        }
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            if !row[col].is_positive() {
                continue;
            }
            let ratio = &row[self.num_cols] / &row[col];
            let better = match &best {
                None => true,
                Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
            };
            if better {
                best = Some((r, ratio));
            }
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        self.pivots += 1;
        let p = self.rows[row][col].clone();
        for x in self.rows[row].iter_mut() {
            if !x.is_zero() {
                *x /= &p;
            }
        }
        let pivot_row = self.rows[row].clone();
        let nz: Vec<usize> = (0..=self.num_cols)
            .filter(|&c| !pivot_row[c].is_zero())
            .collect();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let f = other[col].clone();
            for &c in &nz {
                other[c] -= &f * &pivot_row[c];
            }
        }
        if !self.obj[col].is_zero() {
            let f = self.obj[col].clone();
            for &c in &nz {
                self.obj[c] -= &f * &pivot_row[c];
            }
        }
        self.basis[row] = col;
    }
}
