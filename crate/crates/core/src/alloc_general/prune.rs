use crate::metrics::average_area_of;
use crate::model::{AllocationVector, ExecProfile, ResourceProfile};
use crate::rational::Rational;

/// One table entry with its time and average area.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alternative {
    pub alloc: AllocationVector,
    pub time: Rational,
    pub area: Rational,
}

/// Every alternative in the table, ordered by (time, area, allocation).
pub fn all_alternatives(exec: &ExecProfile, resources: &ResourceProfile) -> Vec<Alternative> {
    let mut alts: Vec<Alternative> = exec
        .iter()
        .map(|(a, t)| Alternative {
            alloc: a.clone(),
            time: t.clone(),
            area: average_area_of(resources, a, t),
        })
        .collect();
    sort(&mut alts);
    alts
}

fn sort(alts: &mut [Alternative]) {
    alts.sort_by(|a, b| {
        a.time
            .cmp(&b.time)
            .then_with(|| a.area.cmp(&b.area))
            .then_with(|| a.alloc.cmp(&b.alloc))
    });
}

/// Drops every allocation for which another one is strictly faster and has
/// strictly smaller average area. The fastest allocation always survives.
pub fn prune_dominated(exec: &ExecProfile, resources: &ResourceProfile) -> Vec<Alternative> {
    prune_alternatives(&all_alternatives(exec, resources))
}

/// [`prune_dominated`] on an explicit alternative list.
pub fn prune_alternatives(alts: &[Alternative]) -> Vec<Alternative> {
    let mut sorted = alts.to_vec();
    sort(&mut sorted);
    let mut out = Vec::with_capacity(sorted.len());
    // Minimum area among alternatives with strictly smaller time.
    let mut best_before: Option<Rational> = None;
    let mut i = 0;
    while i < sorted.len() {
        let mut k = i;
        while k < sorted.len() && sorted[k].time == sorted[i].time {
            k += 1;
        }
        let group_min = sorted[i].area.clone();
        for alt in &sorted[i..k] {
            if best_before.as_ref().is_none_or(|b| alt.area <= *b) {
                out.push(alt.clone());
            }
        }
        best_before = Some(match best_before {
            Some(b) if b < group_min => b,
            _ => group_min,
        });
        i = k;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn rp(c: &[u32]) -> ResourceProfile {
        ResourceProfile::new(c.to_vec()).unwrap()
    }

    fn exec(p: &ResourceProfile, alts: &[(&[u32], Rational)]) -> ExecProfile {
        ExecProfile::new(
            alts.iter()
                .map(|(a, t)| (AllocationVector::new(a.to_vec(), p).unwrap(), t.clone())),
            p,
        )
        .unwrap()
    }

    #[test]
    fn dominated_allocation_is_dropped() {
        let p = rp(&[2, 2]);
        let e = exec(&p, &[(&[1, 1], int(4)), (&[2, 1], int(2))]);
        let n = prune_dominated(&e, &p);
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].alloc.amounts(), &[2, 1]);
        assert_eq!(n[0].time, int(2));
        assert_eq!(n[0].area, ratio(3, 2));
    }

    #[test]
    fn single_alternative_unchanged() {
        let p = rp(&[3]);
        let e = exec(&p, &[(&[2], int(5))]);
        assert_eq!(prune_dominated(&e, &p), all_alternatives(&e, &p));
    }

    #[test]
    fn equal_area_both_kept() {
        let p = rp(&[4]);
        // Linear speedup: same area, different times.
        let e = exec(&p, &[(&[1], int(4)), (&[2], int(2))]);
        assert_eq!(prune_dominated(&e, &p).len(), 2);
    }

    #[test]
    fn equal_time_not_strictly_faster() {
        let p = rp(&[4, 4]);
        let e = exec(&p, &[(&[1, 0], int(3)), (&[1, 1], int(3))]);
        // Neither is strictly faster, so neither dominates.
        assert_eq!(prune_dominated(&e, &p).len(), 2);
    }

    fn brute(alts: &[Alternative]) -> Vec<Alternative> {
        let mut out: Vec<Alternative> = alts
            .iter()
            .filter(|a| !alts.iter().any(|q| q.time < a.time && q.area < a.area))
            .cloned()
            .collect();
        sort(&mut out);
        out
    }

    proptest! {
        #[test]
        fn matches_definition_and_is_idempotent(
            pts in proptest::collection::vec((1i64..20, 1i64..20, 1u32..=8), 1..12)
        ) {
            let alts: Vec<Alternative> = pts
                .iter()
                .enumerate()
                .map(|(k, &(t, a, _))| Alternative {
                    alloc: AllocationVector::unchecked(vec![k as u32 + 1]),
                    time: int(t),
                    area: ratio(a, 3),
                })
                .collect();
            let pruned = prune_alternatives(&alts);
            prop_assert_eq!(&pruned, &brute(&alts));
            prop_assert_eq!(prune_alternatives(&pruned), pruned.clone());
            let min_time = alts.iter().map(|a| a.time.clone()).min().unwrap();
            prop_assert!(pruned.iter().any(|a| a.time == min_time));
        }
    }
}
