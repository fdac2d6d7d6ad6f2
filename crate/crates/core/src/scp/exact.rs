use fixedbitset::FixedBitSet;

use crate::error::{PlanError, Result};
use crate::model::{ScpInstance, SolverKind};

use super::{bitset_of, require_feasible, solve_greedy, undominated, CoverSolution};

/// Largest number of undominated sets the branch-and-bound accepts.
pub const EXACT_MAX_SETS: usize = 24;

/// Provably minimum cover by branch-and-bound: branch on the uncovered element
/// with the fewest covering sets, seed the incumbent with greedy, and prune with
/// `⌈uncovered / best possible gain⌉`. Dominated sets are removed first, which
/// keeps the optimum.
pub fn solve_exact(inst: &ScpInstance) -> Result<CoverSolution> {
    require_feasible(inst)?;
    let cols = undominated(inst);
    if cols.len() > EXACT_MAX_SETS {
        return Err(PlanError::TooLarge {
            what: "undominated sets",
            size: cols.len(),
            budget: EXACT_MAX_SETS,
        });
    }
    let reduced = ScpInstance::new(inst.n, cols.iter().map(|&j| inst.sets[j].clone()).collect())?;
    let bits: Vec<FixedBitSet> = reduced.sets.iter().map(|s| bitset_of(inst.n, s)).collect();
    let mut covering: Vec<Vec<usize>> = vec![Vec::new(); inst.n];
    for (j, s) in reduced.sets.iter().enumerate() {
        for &i in s {
            covering[i].push(j);
        }
    }
    let mut search = Search {
        bits: &bits,
        covering: &covering,
        best: solve_greedy(&reduced)?.chosen,
        path: Vec::new(),
    };
    let all = bitset_of(inst.n, &(0..inst.n).collect::<Vec<_>>());
    search.run(&all);
    let mut chosen: Vec<usize> = search.best.iter().map(|&k| cols[k]).collect();
    chosen.sort_unstable();
    CoverSolution::from_chosen(inst, SolverKind::Exact, chosen)
}

struct Search<'a> {
    bits: &'a [FixedBitSet],
    covering: &'a [Vec<usize>],
    best: Vec<usize>,
    path: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, uncovered: &FixedBitSet) {
        let left = uncovered.count_ones(..);
        if left == 0 {
            if self.path.len() < self.best.len() {
                self.best = self.path.clone();
            }
            return;
        }
        let gains: Vec<usize> = self.bits.iter().map(|b| b.intersection_count(uncovered)).collect();
        let max_gain = gains.iter().copied().max().unwrap_or(0);
        if max_gain == 0 {
            return;
        }
        if self.path.len() + left.div_ceil(max_gain) >= self.best.len() {
            return;
        }
        let pivot = uncovered
            .ones()
            .min_by_key(|&i| (self.covering[i].len(), i))
            .expect("non-empty");
        let mut branches = self.covering[pivot].clone();
        branches.sort_by_key(|&j| (std::cmp::Reverse(gains[j]), j));
        for j in branches {
            let mut rest = uncovered.clone();
            rest.difference_with(&self.bits[j]);
            self.path.push(j);
            self.run(&rest);
            self.path.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_size() {
        let inst = ScpInstance::new(6, vec![vec![0, 1], vec![2, 3, 4], vec![5]]).unwrap();
        assert_eq!(solve_exact(&inst).unwrap().size(), 3);
    }

    #[test]
    fn five_element_example() {
        let inst = ScpInstance::new(5, vec![vec![0, 1, 2], vec![2, 3], vec![3, 4], vec![0, 4]]).unwrap();
        assert_eq!(solve_exact(&inst).unwrap().size(), 2);
    }

    #[test]
    fn beats_greedy_on_adversarial_family() {
        // two rows {0..3} and {4..7}; column blocks of width 2, 1, 1 listed first
        let inst = ScpInstance::new(
            8,
            vec![
                vec![2, 3, 6, 7],
                vec![1, 5],
                vec![0, 4],
                vec![0, 1, 2, 3],
                vec![4, 5, 6, 7],
            ],
        )
        .unwrap();
        let greedy = solve_greedy(&inst).unwrap();
        let exact = solve_exact(&inst).unwrap();
        assert_eq!(greedy.size(), 3);
        assert_eq!(exact.size(), 2);
        assert_eq!(exact.chosen, vec![3, 4]);
    }

    #[test]
    fn refuses_large_instances() {
        let m = EXACT_MAX_SETS + 1;
        let inst = ScpInstance::new(m + 1, (0..m).map(|i| vec![i, i + 1]).collect()).unwrap();
        assert!(matches!(solve_exact(&inst), Err(PlanError::TooLarge { .. })));
        let copies = ScpInstance::new(1, vec![vec![0]; m]).unwrap();
        assert_eq!(solve_exact(&copies).unwrap().chosen, vec![0]);
    }
}
