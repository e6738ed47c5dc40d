//! Near-optimal allocation for series-parallel orders.
//!
//! For a target `X`, a dynamic program over the decomposition keeps, for
//! every subtree, the Pareto frontier of `(C, A)` pairs (critical path and
//! average total area), with areas rounded up to multiples of `delta = eps X / n`.
//! Series composition adds both coordinates, parallel composition takes the
//! larger `C` and adds `A`. Rounding adds at most `n delta = eps X` to any
//! total area, so a decision with `L <= X` is never missed, and every
//! accepted decision has `C <= X` and `A <= (1 + eps) X`. A bisection on `X`
//! then brackets `L_min`.

use std::rc::Rc;

use num_traits::{One, Zero};

use crate::alloc_general::{prune_dominated, Alternative};
use crate::error::{Error, Result};
use crate::metrics::aggregate_metrics;
use crate::model::{AllocationDecision, Instance};
use crate::rational::{int, Rational};

use super::sp::{SpDecomposition, SpNode};

#[derive(Debug)]
enum Choice {
    Leaf { job: usize, alt: usize },
    Pair(Rc<Choice>, Rc<Choice>),
}

impl Choice {
    fn fill(&self, out: &mut [usize]) {
        match self {
            Choice::Leaf { job, alt } => out[*job] = *alt,
            Choice::Pair(a, b) => {
                a.fill(out);
                b.fill(out);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct FrontierPoint {
    pub c: Rational,
    /// Area rounded up to the grid (exact when the grid is disabled).
    pub a: Rational,
    choice: Rc<Choice>,
}

/// Mutually non-dominated `(C, A)` points, sorted by increasing `C`
/// (hence strictly decreasing `A`).
#[derive(Clone, Debug)]
pub struct ParetoFrontier {
    pub points: Vec<FrontierPoint>,
    /// Grid step on the area axis; `None` when areas are exact.
    pub delta: Option<Rational>,
}

impl ParetoFrontier {
    /// No point is `<=` another on both axes.
    pub fn is_antichain(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[0].c < w[1].c && w[0].a > w[1].a)
    }
}

fn prune(mut pts: Vec<FrontierPoint>) -> Vec<FrontierPoint> {
    pts.sort_by(|x, y| x.c.cmp(&y.c).then_with(|| x.a.cmp(&y.a)));
    let mut out: Vec<FrontierPoint> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().is_none_or(|l| p.a < l.a) {
            out.push(p);
        }
    }
    out
}

fn snap(a: &Rational, delta: &Option<Rational>) -> Rational {
    match delta {
        Some(d) => (a / d).ceil() * d,
        None => a.clone(),
    }
}

struct Dp<'a> {
    alts: &'a [Vec<Alternative>],
    delta: Option<Rational>,
    /// Points with `C` or `A` above these caps can never be accepted.
    c_cap: Option<Rational>,
    a_cap: Option<Rational>,
}

impl Dp<'_> {
    fn keep(&self, p: &FrontierPoint) -> bool {
        self.c_cap.as_ref().is_none_or(|c| p.c <= *c)
            && self.a_cap.as_ref().is_none_or(|a| p.a <= *a)
    }

    fn frontier(&self, node: &SpNode) -> Vec<FrontierPoint> {
        let pts = match node {
            SpNode::Leaf(j) => self.alts[*j]
                .iter()
                .enumerate()
                .map(|(k, alt)| FrontierPoint {
                    c: alt.time.clone(),
                    a: snap(&alt.area, &self.delta),
                    choice: Rc::new(Choice::Leaf { job: *j, alt: k }),
                })
                .collect(),
            SpNode::Series(l, r) | SpNode::Parallel(l, r) => {
                let left = self.frontier(l);
                let right = self.frontier(r);
                let series = matches!(node, SpNode::Series(..));
                let mut pts = Vec::with_capacity(left.len() * right.len());
                for x in &left {
                    for y in &right {
                        let c = if series {
                            &x.c + &y.c
                        } else {
                            x.c.clone().max(y.c.clone())
                        };
                        pts.push(FrontierPoint {
                            c,
                            a: &x.a + &y.a,
                            choice: Rc::new(Choice::Pair(x.choice.clone(), y.choice.clone())),
                        });
                    }
                }
                pts
            }
        };
        prune(pts.into_iter().filter(|p| self.keep(p)).collect())
    }
}

/// Exact Pareto frontier of `(C(p), A(p))` over non-dominated allocations.
pub fn exact_frontier(instance: &Instance, dec: &SpDecomposition) -> ParetoFrontier {
    let alts = alternatives(instance);
    let dp = Dp {
        alts: &alts,
        delta: None,
        c_cap: None,
        a_cap: None,
    };
    ParetoFrontier {
        points: dec
            .root
            .as_ref()
            .map(|r| dp.frontier(r))
            .unwrap_or_default(),
        delta: None,
    }
}

fn alternatives(instance: &Instance) -> Vec<Vec<Alternative>> {
    instance
        .jobs()
        .iter()
        .map(|j| prune_dominated(&j.exec, instance.resources()))
        .collect()
}

fn to_decision(alts: &[Vec<Alternative>], choice: &Choice) -> AllocationDecision {
    let mut idx = vec![0; alts.len()];
    choice.fill(&mut idx);
    AllocationDecision(
        idx.iter()
            .enumerate()
            .map(|(j, &k)| alts[j][k].alloc.clone())
            .collect(),
    )
}

/// Accepting decision for target `x`, or `None` when no decision has `L <= x`.
fn decide(
    alts: &[Vec<Alternative>],
    root: &SpNode,
    n: usize,
    x: &Rational,
    eps: &Rational,
) -> Option<AllocationDecision> {
    let a_cap = (Rational::one() + eps) * x;
    let dp = Dp {
        alts,
        delta: Some(eps * x / int(n as i64)),
        c_cap: Some(x.clone()),
        a_cap: Some(a_cap),
    };
    dp.frontier(root)
        .first()
        .map(|p| to_decision(alts, &p.choice))
}

#[derive(Clone, Debug)]
pub struct FptasResult {
    pub decision: AllocationDecision,
    /// `L(p')` of the returned decision.
    pub lower_bound: Rational,
    /// Largest target proven infeasible (a lower bound on `L_min`).
    pub bracket_low: Rational,
    pub bracket_high: Rational,
    pub decisions_evaluated: usize,
}

/// Decision with `L(p') <= (1 + eps) L_min`; `eps = 0` gives an exact optimum.
pub fn fptas_allocate(
    instance: &Instance,
    dec: &SpDecomposition,
    eps: &Rational,
) -> Result<FptasResult> {
    if *eps < Rational::zero() {
        return Err(Error::Config("epsilon must be non-negative".into()));
    }
    let Some(root) = dec.root.as_ref() else {
        return Err(Error::Config("empty instance".into()));
    };
    let n = instance.n();
    let alts = alternatives(instance);

    if eps.is_zero() {
        let front = exact_frontier(instance, dec);
        let best = front
            .points
            .iter()
            .min_by(|x, y| {
                x.c.clone()
                    .max(x.a.clone())
                    .cmp(&y.c.clone().max(y.a.clone()))
            })
            .expect("non-empty frontier");
        let decision = to_decision(&alts, &best.choice);
        let l = aggregate_metrics(instance, &decision)?.lower_bound;
        return Ok(FptasResult {
            bracket_low: l.clone(),
            bracket_high: l.clone(),
            lower_bound: l,
            decision,
            decisions_evaluated: 1,
        });
    }

    // Two factors of (1 + e1) separate the result from L_min: the bisection
    // bracket and the area rounding. (1 + e1)^2 <= 1 + eps for this e1.
    let e1 = (eps / int(3)).min(Rational::one());
    let mut lo = Rational::zero();
    let mut area_sum = Rational::zero();
    for a in &alts {
        lo = lo.max(a.iter().map(|x| x.time.clone()).min().expect("non-empty"));
        area_sum += a.iter().map(|x| x.area.clone()).min().expect("non-empty");
    }
    lo = lo.max(area_sum);
    let fastest = AllocationDecision(alts.iter().map(|a| a[0].alloc.clone()).collect());
    let mut hi = aggregate_metrics(instance, &fastest)?.lower_bound;
    let mut evaluated = 0;

    evaluated += 1;
    let mut best = match decide(&alts, root, n, &lo, &e1) {
        Some(d) => {
            hi = lo.clone();
            d
        }
        None => {
            evaluated += 1;
            decide(&alts, root, n, &hi, &e1)
                .ok_or_else(|| Error::Invariant("target above a feasible L was rejected".into()))?
        }
    };
    let factor = Rational::one() + &e1;
    while hi > &factor * &lo {
        let mid = (&lo + &hi) / int(2);
        evaluated += 1;
        match decide(&alts, root, n, &mid, &e1) {
            Some(d) => {
                best = d;
                hi = mid;
            }
            None => lo = mid,
        }
    }
    let l = aggregate_metrics(instance, &best)?.lower_bound;
    if l > &factor * &hi {
        return Err(Error::Invariant(
            "accepted decision exceeds (1 + eps) X".into(),
        ));
    }
    Ok(FptasResult {
        decision: best,
        lower_bound: l,
        bracket_low: lo,
        bracket_high: hi,
        decisions_evaluated: evaluated,
    })
}
