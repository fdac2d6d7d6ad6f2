use crate::error::Result;
use crate::model::{ScpInstance, SolverKind};

use super::{bitset_of, require_feasible, CoverSolution};

/// Repeatedly takes the set covering the most uncovered elements; ties go to
/// the lowest set index.
pub fn solve_greedy(inst: &ScpInstance) -> Result<CoverSolution> {
    require_feasible(inst)?;
    let chosen = greedy_by(inst, |_, gain| gain as f64);
    CoverSolution::from_chosen(inst, SolverKind::Greedy, chosen)
}

/// Greedy cover driven by `score(set, uncovered_gain)`. Sets with zero gain are
/// never taken. The instance must be feasible.
pub(crate) fn greedy_by(inst: &ScpInstance, mut score: impl FnMut(usize, usize) -> f64) -> Vec<usize> {
    let mut uncovered = bitset_of(inst.n, &(0..inst.n).collect::<Vec<_>>());
    let mut left = inst.n;
    let mut chosen = Vec::new();
    while left > 0 {
        let mut best: Option<(usize, f64)> = None;
        for (j, s) in inst.sets.iter().enumerate() {
            let gain = s.iter().filter(|&&i| uncovered.contains(i)).count();
            if gain == 0 {
                continue;
            }
            let sc = score(j, gain);
            if best.is_none_or(|(_, b)| sc > b) {
                best = Some((j, sc));
            }
        }
        let (j, _) = best.expect("feasible instance always has a set with positive gain");
        for &i in &inst.sets[j] {
            if uncovered.contains(i) {
                uncovered.set(i, false);
                left -= 1;
            }
        }
        chosen.push(j);
    }
    chosen
}
