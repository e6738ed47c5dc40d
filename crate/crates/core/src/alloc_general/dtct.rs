use crate::error::{Error, Result};
use crate::model::{AllocationVector, Instance};
use crate::rational::Rational;

use super::prune::prune_dominated;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DtctAlternative {
    pub time: Rational,
    /// Average area of the originating allocation.
    pub cost: Rational,
    pub alloc: AllocationVector,
}

/// Alternatives of one task, strictly increasing in time and non-increasing
/// in cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DtctTask {
    pub alternatives: Vec<DtctAlternative>,
}

/// Time-cost tradeoff project with one task per job and the instance's edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DtctProject {
    pub tasks: Vec<DtctTask>,
    pub edges: Vec<(usize, usize)>,
}

impl DtctProject {
    pub fn num_alternatives(&self) -> usize {
        self.tasks.iter().map(|t| t.alternatives.len()).sum()
    }

    /// Faster alternatives never cost less.
    pub fn check_time_cost_order(&self) -> Result<()> {
        for (j, task) in self.tasks.iter().enumerate() {
            for w in task.alternatives.windows(2) {
                if w[0].time >= w[1].time || w[0].cost < w[1].cost {
                    return Err(Error::Invariant(format!(
                        "task {j}: alternatives break the time-cost ordering"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One task per job built from the non-dominated allocations; among
/// alternatives with equal time only the cheapest is kept.
pub fn build_dtct(instance: &Instance) -> Result<DtctProject> {
    let tasks = instance
        .jobs()
        .iter()
        .map(|job| {
            let pruned = prune_dominated(&job.exec, instance.resources());
            let mut alternatives: Vec<DtctAlternative> = Vec::with_capacity(pruned.len());
            // `pruned` is sorted by (time, area), so the first of each time
            // group is the cheapest.
            for alt in pruned {
                if alternatives.last().is_some_and(|l| l.time == alt.time) {
                    continue;
                }
                alternatives.push(DtctAlternative {
                    time: alt.time,
                    cost: alt.area,
                    alloc: alt.alloc,
                });
            }
            DtctTask { alternatives }
        })
        .collect();
    let project = DtctProject {
        tasks,
        edges: instance.edges().to_vec(),
    };
    project.check_time_cost_order()?;
    Ok(project)
}
