//! Fractional relaxation of the allocation problem and its threshold rounding.
//!
//! The relaxation picks a convex combination `x_{j,k}` of each task's
//! alternatives and minimizes `L` subject to every path's fractional length
//! and the total fractional cost both staying below `L`. Because any
//! integral decision is feasible, the optimum `L_bar` never exceeds `L_min`.
//!
//! Rounding takes, per job, the fastest alternative whose cumulative weight
//! (alternatives ordered by time) reaches `1 - rho`. The weight on times at
//! or above the chosen time then exceeds `rho`, so `tau_j >= rho * t_bar_j`;
//! the weight on times at or below it is at least `1 - rho` and those
//! alternatives all cost at least `c_bar_j`, so the fractional cost is at
//! least `(1 - rho) * c_bar_j`. Both inequalities are re-checked per job.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{AllocationDecision, Instance};
use crate::rational::Rational;

use super::dtct::{build_dtct, DtctProject};
use super::lp::{LinearProgram, Relation};

#[derive(Clone, Debug)]
pub struct FractionalSolution {
    pub project: DtctProject,
    /// `weights[j][k]` is the weight of alternative `k` of task `j`.
    pub weights: Vec<Vec<Rational>>,
    /// Fractional completion times from the relaxation.
    pub completion: Vec<Rational>,
    /// Optimal objective `L_bar`.
    pub lower_bound: Rational,
    pub pivots: usize,
}

impl FractionalSolution {
    /// Fractional duration `tau_j`.
    pub fn fractional_time(&self, j: usize) -> Rational {
        self.weights[j]
            .iter()
            .zip(&self.project.tasks[j].alternatives)
            .fold(Rational::zero(), |acc, (x, a)| acc + x * &a.time)
    }

    /// Fractional cost `sum_k x_{j,k} c_{j,k}`.
    pub fn fractional_cost(&self, j: usize) -> Rational {
        self.weights[j]
            .iter()
            .zip(&self.project.tasks[j].alternatives)
            .fold(Rational::zero(), |acc, (x, a)| acc + x * &a.cost)
    }
}

/// Solves the relaxation exactly with the rational simplex.
pub fn solve_fractional(instance: &Instance) -> Result<FractionalSolution> {
    let project = build_dtct(instance)?;
    solve_project(instance, project)
}

pub fn solve_project(instance: &Instance, project: DtctProject) -> Result<FractionalSolution> {
    let n = project.tasks.len();
    let mut offsets = Vec::with_capacity(n);
    let mut total = 0;
    for t in &project.tasks {
        offsets.push(total);
        total += t.alternatives.len();
    }
    let c_var = |j: usize| total + j;
    let l_var = total + n;
    let mut lp = LinearProgram::new(total + n + 1);
    lp.objective[l_var] = Rational::one();

    let tau_terms = |j: usize, sign: Rational| -> Vec<(usize, Rational)> {
        project.tasks[j]
            .alternatives
            .iter()
            .enumerate()
            .map(|(k, a)| (offsets[j] + k, &sign * &a.time))
            .collect()
    };
    let minus = -Rational::one();

    for (j, t) in project.tasks.iter().enumerate() {
        let coeffs = (0..t.alternatives.len())
            .map(|k| (offsets[j] + k, Rational::one()))
            .collect();
        lp.add(coeffs, Relation::Eq, Rational::one());
    }
    for &(a, b) in &project.edges {
        let mut coeffs = tau_terms(b, minus.clone());
        coeffs.push((c_var(b), Rational::one()));
        coeffs.push((c_var(a), minus.clone()));
        lp.add(coeffs, Relation::Ge, Rational::zero());
    }
    for j in 0..n {
        if instance.preds(j).is_empty() {
            let mut coeffs = tau_terms(j, minus.clone());
            coeffs.push((c_var(j), Rational::one()));
            lp.add(coeffs, Relation::Ge, Rational::zero());
        }
        if instance.succs(j).is_empty() {
            lp.add(
                vec![(l_var, Rational::one()), (c_var(j), minus.clone())],
                Relation::Ge,
                Rational::zero(),
            );
        }
    }
    let mut cost_row: Vec<(usize, Rational)> = Vec::with_capacity(total + 1);
    for (j, t) in project.tasks.iter().enumerate() {
        for (k, a) in t.alternatives.iter().enumerate() {
            cost_row.push((offsets[j] + k, -a.cost.clone()));
        }
    }
    cost_row.push((l_var, Rational::one()));
    lp.add(cost_row, Relation::Ge, Rational::zero());

    let sol = lp
        .minimize()
        .map_err(|e| Error::Numeric(format!("fractional relaxation: {e}")))?;
    let weights = project
        .tasks
        .iter()
        .enumerate()
        .map(|(j, t)| sol.values[offsets[j]..offsets[j] + t.alternatives.len()].to_vec())
        .collect();
    let completion = (0..n).map(|j| sol.values[c_var(j)].clone()).collect();
    Ok(FractionalSolution {
        project,
        weights,
        completion,
        lower_bound: sol.objective,
        pivots: sol.pivots,
    })
}

#[derive(Clone, Debug)]
pub struct RoundedAllocation {
    pub decision: AllocationDecision,
    /// Chosen alternative index per task.
    pub choice: Vec<usize>,
    pub rho: Rational,
}

/// Per-job `(1 - rho)`-quantile rounding. Fails with an invariant error if
/// either per-job guarantee does not hold.
pub fn round_allocation(frac: &FractionalSolution, rho: &Rational) -> Result<RoundedAllocation> {
    if *rho <= Rational::zero() || *rho >= Rational::one() {
        return Err(Error::Config("rho must lie in (0, 1)".into()));
    }
    let threshold = Rational::one() - rho;
    let mut choice = Vec::with_capacity(frac.project.tasks.len());
    let mut allocs = Vec::with_capacity(frac.project.tasks.len());
    for (j, task) in frac.project.tasks.iter().enumerate() {
        let mut cumulative = Rational::zero();
        let mut pick = task.alternatives.len() - 1;
        for (k, x) in frac.weights[j].iter().enumerate() {
            cumulative += x;
            if cumulative >= threshold {
                pick = k;
                break;
            }
        }
        let alt = &task.alternatives[pick];
        let tau = frac.fractional_time(j);
        let cost = frac.fractional_cost(j);
        if &alt.time * rho > tau {
            return Err(Error::Invariant(format!(
                "rounding time bound failed for task {j}"
            )));
        }
        if &alt.cost * &threshold > cost {
            return Err(Error::Invariant(format!(
                "rounding cost bound failed for task {j}"
            )));
        }
        choice.push(pick);
        allocs.push(alt.alloc.clone());
    }
    Ok(RoundedAllocation {
        decision: AllocationDecision(allocs),
        choice,
        rho: rho.clone(),
    })
}
