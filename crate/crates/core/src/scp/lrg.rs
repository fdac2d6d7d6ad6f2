//! Lagrangian relaxation combined with greedy construction, in the spirit of
//! SetCoverPy: multipliers price the elements, a priced greedy builds a cover
//! every iteration, and a subgradient step moves the multipliers towards the
//! Lagrangian dual optimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{ScpInstance, SolverKind};

use super::{bitset_of, prune_redundant, require_feasible, solve_greedy, CoverSolution};

const SCORE_TIE: f64 = 1e-12;

pub fn solve_lrg(inst: &ScpInstance, iters: usize, seed: u64) -> Result<CoverSolution> {
    require_feasible(inst)?;
    let iters = iters.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best = solve_greedy(inst)?.chosen;
    prune_in_order(inst, &mut best);

    let mut u: Vec<f64> = vec![f64::INFINITY; inst.n];
    for s in inst.sets.iter().filter(|s| !s.is_empty()) {
        let w = 1.0 / s.len() as f64;
        for &i in s {
            u[i] = u[i].min(w);
        }
    }

    for k in 0..iters {
        let mut cand = priced_greedy(inst, &u, &mut rng);
        prune_in_order(inst, &mut cand);
        if cand.len() < best.len() {
            best = cand;
        }

        // Lagrangian lower bound with unit costs
        let reduced: Vec<f64> = inst
            .sets
            .iter()
            .map(|s| 1.0 - s.iter().map(|&i| u[i]).sum::<f64>())
            .collect();
        let lower = u.iter().sum::<f64>() + reduced.iter().map(|&c| c.min(0.0)).sum::<f64>();
        if lower > best.len() as f64 - 1.0 + 1e-9 {
            // integral optimum cannot beat the incumbent
            break;
        }
        let mut grad = vec![1.0; inst.n];
        for (j, s) in inst.sets.iter().enumerate() {
            if reduced[j] < 0.0 {
                for &i in s {
                    grad[i] -= 1.0;
                }
            }
        }
        let norm2: f64 = grad.iter().map(|g| g * g).sum();
        if norm2 == 0.0 {
            break;
        }
        let step = (best.len() as f64 - lower) / norm2 / (1.0 + k as f64);
        for (ui, gi) in u.iter_mut().zip(&grad) {
            *ui = (*ui + step * gi).max(0.0);
        }
    }

    CoverSolution::from_chosen(inst, SolverKind::Lrg, best)
}

fn prune_in_order(inst: &ScpInstance, chosen: &mut Vec<usize>) {
    // latest picks are the least valuable; try them first
    let order: Vec<usize> = (0..chosen.len()).rev().collect();
    prune_redundant(inst, chosen, &order);
}

/// Greedy where a set scores the total multiplier of the elements it would
/// newly cover, then the plain gain. Exact ties are broken uniformly at random.
fn priced_greedy(inst: &ScpInstance, u: &[f64], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut uncovered = bitset_of(inst.n, &(0..inst.n).collect::<Vec<_>>());
    let mut left = inst.n;
    let mut chosen = Vec::new();
    let mut ties = Vec::new();
    while left > 0 {
        let mut best_score = f64::NEG_INFINITY;
        let mut best_gain = 0usize;
        ties.clear();
        for (j, s) in inst.sets.iter().enumerate() {
            let mut gain = 0usize;
            let mut score = 0.0;
            for &i in s {
                if uncovered.contains(i) {
                    gain += 1;
                    score += u[i];
                }
            }
            if gain == 0 {
                continue;
            }
            let same_score = (score - best_score).abs() <= SCORE_TIE;
            if score > best_score + SCORE_TIE || (same_score && gain > best_gain) {
                best_score = score;
                best_gain = gain;
                ties.clear();
                ties.push(j);
            } else if same_score && gain == best_gain {
                ties.push(j);
            }
        }
        let j = ties[rng.random_range(0..ties.len())];
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
