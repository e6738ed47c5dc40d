//! Recognition of series-parallel precedence orders.
//!
//! Recognition works on the transitive closure: a set of jobs splits in
//! parallel when its comparability graph is disconnected, and in series when
//! its incomparability graph is disconnected (the pieces are then totally
//! ordered). A set of two or more jobs with neither split contains an
//! "N" (`a < c`, `a < d`, `b < d`, with `a, b` and `c, d` and `b, c`
//! incomparable), which is reported as the witness.

use crate::error::{Error, Result};
use crate::model::Instance;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpNode {
    Leaf(usize),
    /// Every job of the left part precedes every job of the right part.
    Series(Box<SpNode>, Box<SpNode>),
    Parallel(Box<SpNode>, Box<SpNode>),
}

impl SpNode {
    pub fn jobs(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<usize>) {
        match self {
            SpNode::Leaf(j) => out.push(*j),
            SpNode::Series(a, b) | SpNode::Parallel(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            SpNode::Leaf(_) => 1,
            SpNode::Series(a, b) | SpNode::Parallel(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpDecomposition {
    pub n: usize,
    /// `None` for an empty instance.
    pub root: Option<SpNode>,
}

impl SpDecomposition {
    /// The precedence relation generated by the composition, as a dense
    /// matrix (`rel[a][b]` iff `a` precedes `b`).
    pub fn relation(&self) -> Vec<Vec<bool>> {
        let mut rel = vec![vec![false; self.n]; self.n];
        fn walk(node: &SpNode, rel: &mut Vec<Vec<bool>>) {
            match node {
                SpNode::Leaf(_) => {}
                SpNode::Series(a, b) => {
                    walk(a, rel);
                    walk(b, rel);
                    for x in a.jobs() {
                        for y in b.jobs() {
                            rel[x][y] = true;
                        }
                    }
                }
                SpNode::Parallel(a, b) => {
                    walk(a, rel);
                    walk(b, rel);
                }
            }
        }
        if let Some(r) = &self.root {
            walk(r, &mut rel);
        }
        rel
    }

    /// Leaves are exactly the jobs and the generated order equals the
    /// instance's transitive closure.
    pub fn check(&self, instance: &Instance) -> Result<()> {
        let mut leaves = self.root.as_ref().map(SpNode::jobs).unwrap_or_default();
        leaves.sort_unstable();
        if leaves != (0..instance.n()).collect::<Vec<_>>() {
            return Err(Error::Invariant(
                "decomposition leaves differ from the job set".into(),
            ));
        }
        if self.relation() != transitive_closure(instance) {
            return Err(Error::Invariant(
                "decomposition does not reproduce the precedence order".into(),
            ));
        }
        Ok(())
    }
}

/// `reach[a][b]` iff there is a non-empty path from `a` to `b`.
pub fn transitive_closure(instance: &Instance) -> Vec<Vec<bool>> {
    let n = instance.n();
    let mut reach = vec![vec![false; n]; n];
    for &j in instance.topo_order().iter().rev() {
        for &s in instance.succs(j) {
            reach[j][s] = true;
            for k in 0..n {
                if reach[s][k] {
                    reach[j][k] = true;
                }
            }
        }
    }
    reach
}

/// Connected components of the graph on `set` whose edges are the pairs for
/// which `linked` holds. Components are listed by smallest member.
fn components(set: &[usize], linked: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut comp = vec![usize::MAX; set.len()];
    let mut out = Vec::new();
    for s in 0..set.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        comp[s] = id;
        let mut stack = vec![s];
        let mut members = Vec::new();
        while let Some(u) = stack.pop() {
            members.push(set[u]);
            for v in 0..set.len() {
                if comp[v] == usize::MAX && linked(set[u], set[v]) {
                    comp[v] = id;
                    stack.push(v);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn fold(parts: Vec<SpNode>, make: fn(Box<SpNode>, Box<SpNode>) -> SpNode) -> SpNode {
    let mut it = parts.into_iter();
    let first = it.next().expect("at least one part");
    it.fold(first, |acc, p| make(Box::new(acc), Box::new(p)))
}

fn find_n(set: &[usize], rel: &[Vec<bool>], instance: &Instance) -> String {
    let inc = |x: usize, y: usize| x != y && !rel[x][y] && !rel[y][x];
    for &a in set {
        for &c in set {
            if !rel[a][c] {
                continue;
            }
            for &d in set {
                if d == c || !rel[a][d] {
                    continue;
                }
                for &b in set {
                    if b != a && rel[b][d] && inc(b, c) && inc(a, b) && inc(c, d) {
                        let id = |j: usize| instance.job(j).id.as_str();
                        return format!(
                            "{} -> {}, {} -> {}, {} -> {} with {} and {} unordered",
                            id(a),
                            id(c),
                            id(a),
                            id(d),
                            id(b),
                            id(d),
                            id(b),
                            id(c)
                        );
                    }
                }
            }
        }
    }
    let ids: Vec<&str> = set.iter().map(|&j| instance.job(j).id.as_str()).collect();
    format!(
        "jobs {{{}}} admit neither a series nor a parallel split",
        ids.join(", ")
    )
}

fn decompose(set: &[usize], rel: &[Vec<bool>], instance: &Instance) -> Result<SpNode> {
    if set.len() == 1 {
        return Ok(SpNode::Leaf(set[0]));
    }
    let comparable = |x: usize, y: usize| rel[x][y] || rel[y][x];
    let par = components(set, comparable);
    if par.len() > 1 {
        let parts = par
            .iter()
            .map(|c| decompose(c, rel, instance))
            .collect::<Result<Vec<_>>>()?;
        return Ok(fold(parts, SpNode::Parallel));
    }
    let mut ser = components(set, |x, y| x != y && !comparable(x, y));
    if ser.len() > 1 {
        ser.sort_by(|a, b| {
            if rel[a[0]][b[0]] {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        for w in ser.windows(2) {
            for &x in &w[0] {
                for &y in &w[1] {
                    if !rel[x][y] {
                        return Err(Error::NotSeriesParallel(find_n(set, rel, instance)));
                    }
                }
            }
        }
        let parts = ser
            .iter()
            .map(|c| decompose(c, rel, instance))
            .collect::<Result<Vec<_>>>()?;
        return Ok(fold(parts, SpNode::Series));
    }
    Err(Error::NotSeriesParallel(find_n(set, rel, instance)))
}

/// Decomposes the instance's precedence order, or rejects it with a witness.
pub fn recognize_sp(instance: &Instance) -> Result<SpDecomposition> {
    let rel = transitive_closure(instance);
    let all: Vec<usize> = (0..instance.n()).collect();
    let root = if all.is_empty() {
        None
    } else {
        Some(decompose(&all, &rel, instance)?)
    };
    let dec = SpDecomposition {
        n: instance.n(),
        root,
    };
    dec.check(instance)?;
    Ok(dec)
}
