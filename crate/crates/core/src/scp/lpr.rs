use crate::error::{PlanError, Result};
use crate::model::{ScpInstance, SolverKind};

use super::simplex::{maximize, SimplexError};
use super::{bitset_of, prune_redundant, require_feasible, undominated, CoverSolution};

/// LP-rounding result with the relaxation data needed to audit it.
#[derive(Debug, Clone, PartialEq)]
pub struct LprOutcome {
    pub solution: CoverSolution,
    pub lp_objective: f64,
    /// Fractional value of every set of the instance (0 for sets dropped by
    /// the dominance reduction).
    pub fractional: Vec<f64>,
    /// Rounding frequency: max number of (reduced) sets containing an element.
    pub f: usize,
}

/// Solves the covering LP `min Σx  s.t.  Σ_{j∋i} x_j ≥ 1, 0 ≤ x ≤ 1` through its
/// dual packing LP with the built-in simplex, keeps every set with
/// `x_j ≥ 1/f`, then drops redundant picks (smallest `x_j` first).
pub fn solve_lpr(inst: &ScpInstance, simplex_cap: Option<usize>) -> Result<LprOutcome> {
    require_feasible(inst)?;
    let cols = undominated(inst);
    let cap = simplex_cap.unwrap_or(50 * (inst.n + inst.m()));

    // dual: max Σy_i  s.t.  Σ_{i∈s_j} y_i ≤ 1 for every kept set j, y ≥ 0
    let a: Vec<Vec<f64>> = cols
        .iter()
        .map(|&j| {
            let mut row = vec![0.0; inst.n];
            for &i in &inst.sets[j] {
                row[i] = 1.0;
            }
            row
        })
        .collect();
    let lp = maximize(&vec![1.0; inst.n], &a, &vec![1.0; cols.len()], cap).map_err(|e| match e {
        SimplexError::IterationCap(cap) => PlanError::IterationCap { cap },
        other => PlanError::Contract(other.to_string()),
    })?;

    let mut fractional = vec![0.0; inst.m()];
    for (row, &j) in cols.iter().enumerate() {
        fractional[j] = lp.duals[row].clamp(0.0, 1.0);
    }
    let mut freq = vec![0usize; inst.n];
    for &j in &cols {
        for &i in &inst.sets[j] {
            freq[i] += 1;
        }
    }
    let f = freq.into_iter().max().unwrap_or(1).max(1);
    let threshold = 1.0 / f as f64 - 1e-9;
    let mut chosen: Vec<usize> = cols.iter().copied().filter(|&j| fractional[j] >= threshold).collect();

    // every element has some x_j ≥ 1/f; guard against round-off anyway
    let mut covered = bitset_of(inst.n, &[]);
    for &j in &chosen {
        for &i in &inst.sets[j] {
            covered.insert(i);
        }
    }
    for i in covered.zeroes().collect::<Vec<_>>() {
        if let Some(&j) = cols
            .iter()
            .filter(|&&j| inst.sets[j].contains(&i))
            .max_by(|&&p, &&q| fractional[p].total_cmp(&fractional[q]).then(q.cmp(&p)))
        {
            if !chosen.contains(&j) {
                chosen.push(j);
            }
        }
    }

    let mut order: Vec<usize> = (0..chosen.len()).collect();
    order.sort_by(|&p, &q| {
        fractional[chosen[p]]
            .total_cmp(&fractional[chosen[q]])
            .then(chosen[p].cmp(&chosen[q]))
    });
    prune_redundant(inst, &mut chosen, &order);

    let mut solution = CoverSolution::from_chosen(inst, SolverKind::Lpr, chosen)?;
    solution.lp_objective = Some(lp.objective);
    Ok(LprOutcome {
        solution,
        lp_objective: lp.objective,
        fractional,
        f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_is_integral() {
        let inst = ScpInstance::new(6, vec![vec![0, 1], vec![2, 3, 4], vec![5]]).unwrap();
        let out = solve_lpr(&inst, None).unwrap();
        assert!((out.lp_objective - 3.0).abs() < 1e-9);
        assert_eq!(out.solution.chosen.len(), 3);
        for j in 0..3 {
            assert!((out.fractional[j] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dominating_set_wins() {
        let inst = ScpInstance::new(2, vec![vec![0], vec![1], vec![0, 1]]).unwrap();
        let out = solve_lpr(&inst, None).unwrap();
        assert_eq!(out.fractional, vec![0.0, 0.0, 1.0]);
        assert_eq!(out.solution.chosen, vec![2]);
        assert!((out.lp_objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fractional_triangle() {
        // every pair of three elements: LP optimum 1.5, any integral cover needs 2
        let inst = ScpInstance::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let out = solve_lpr(&inst, None).unwrap();
        assert!((out.lp_objective - 1.5).abs() < 1e-9);
        assert_eq!(out.f, 2);
        assert_eq!(out.solution.size(), 2);
        assert!(out.solution.size() as f64 <= out.f as f64 * out.lp_objective + 1e-9);
    }

    #[test]
    fn iteration_cap_surfaces() {
        let inst = ScpInstance::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert!(matches!(
            solve_lpr(&inst, Some(0)),
            Err(PlanError::IterationCap { cap: 0 })
        ));
    }

    #[test]
    fn duplicates_and_subsets_are_reduced() {
        let inst = ScpInstance::new(3, vec![vec![0, 1], vec![0, 1], vec![0], vec![], vec![1, 2]]).unwrap();
        assert_eq!(undominated(&inst), vec![0, 4]);
    }
}
