use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::HyperParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Every configuration is its own group.
    OnePerGroup,
    /// Group `i` holds configurations `i, i + G, i + 2G, ...`.
    #[default]
    Striped,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::OnePerGroup => "one-per-group",
            Strategy::Striped => "striped",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "striped" => Ok(Strategy::Striped),
            "one-per-group" => Ok(Strategy::OnePerGroup),
            other => Err(Error::Config(format!(
                "unknown strategy `{other}` (expected striped or one-per-group)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub config_id: usize,
    pub params: HyperParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskPlan {
    groups: Vec<Vec<TaskSpec>>,
    strategy: Strategy,
}

impl TaskPlan {
    pub fn groups(&self) -> &[Vec<TaskSpec>] {
        &self.groups
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn n_tasks(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Tasks in execution order: group by group.
    pub fn tasks(&self) -> impl Iterator<Item = &TaskSpec> {
        self.groups.iter().flatten()
    }

    pub fn config_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.tasks().map(|t| t.config_id).collect();
        ids.sort_unstable();
        ids
    }

    pub fn params(&self, config_id: usize) -> Option<&HyperParams> {
        self.tasks()
            .find(|t| t.config_id == config_id)
            .map(|t| &t.params)
    }
}

/// Assigns `config_id = position in grid` and groups the tasks.
///
/// Striping uses `min(n_groups, grid.len())` groups so none is empty.
pub fn plan_tasks(grid: &[HyperParams], n_groups: usize, strategy: Strategy) -> Result<TaskPlan> {
    if grid.is_empty() {
        return Err(Error::Config("hyperparameter grid is empty".into()));
    }
    if n_groups == 0 {
        return Err(Error::Config("need at least one task group".into()));
    }
    let tasks = grid.iter().enumerate().map(|(config_id, p)| TaskSpec {
        config_id,
        params: p.clone(),
    });
    let groups = match strategy {
        Strategy::OnePerGroup => tasks.map(|t| vec![t]).collect(),
        Strategy::Striped => {
            let g = n_groups.min(grid.len());
            let mut groups = vec![Vec::new(); g];
            for t in tasks {
                groups[t.config_id % g].push(t);
            }
            groups
        }
    };
    Ok(TaskPlan { groups, strategy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::KnnParams;

    fn knn_grid(n: usize) -> Vec<HyperParams> {
        (1..=n)
            .map(|k| HyperParams::Knn(KnnParams::new(k)))
            .collect()
    }

    fn ks(group: &[TaskSpec]) -> Vec<usize> {
        group
            .iter()
            .map(|t| match &t.params {
                HyperParams::Knn(p) => p.k,
                _ => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn knn_twenty_in_five_stripes() {
        let plan = plan_tasks(&knn_grid(20), 5, Strategy::Striped).unwrap();
        assert_eq!(plan.groups().len(), 5);
        assert_eq!(ks(&plan.groups()[0]), vec![1, 6, 11, 16]);
        assert_eq!(ks(&plan.groups()[4]), vec![5, 10, 15, 20]);
    }

    #[test]
    fn single_group_keeps_grid_order() {
        let plan = plan_tasks(&knn_grid(6), 1, Strategy::Striped).unwrap();
        assert_eq!(plan.groups().len(), 1);
        assert_eq!(ks(&plan.groups()[0]), vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn seven_in_three_partition() {
        let plan = plan_tasks(&knn_grid(7), 3, Strategy::Striped).unwrap();
        let sizes: Vec<usize> = plan.groups().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 2, 2]);
        // enumeration oracle: each id exactly once, in group id % 3
        for id in 0..7 {
            let holders: Vec<usize> = (0..3)
                .filter(|&g| plan.groups()[g].iter().any(|t| t.config_id == id))
                .collect();
            assert_eq!(holders, vec![id % 3]);
        }
    }

    #[test]
    fn one_per_group_ignores_group_count() {
        let plan = plan_tasks(&knn_grid(4), 2, Strategy::OnePerGroup).unwrap();
        assert_eq!(plan.groups().len(), 4);
        assert!(plan.groups().iter().all(|g| g.len() == 1));
    }

    #[test]
    fn more_groups_than_tasks() {
        let plan = plan_tasks(&knn_grid(3), 8, Strategy::Striped).unwrap();
        assert_eq!(plan.groups().len(), 3);
        assert_eq!(plan.config_ids(), vec![0, 1, 2]);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(plan_tasks(&[], 2, Strategy::Striped).is_err());
        assert!(plan_tasks(&knn_grid(2), 0, Strategy::Striped).is_err());
    }

    #[test]
    fn strategy_parses() {
        assert_eq!("striped".parse::<Strategy>().unwrap(), Strategy::Striped);
        assert_eq!(
            "one-per-group".parse::<Strategy>().unwrap(),
            Strategy::OnePerGroup
        );
        assert!("blocks".parse::<Strategy>().is_err());
    }
}
