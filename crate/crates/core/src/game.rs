//! Exact value of a finite zero-sum game, `min_h max_j sum_i h_i M[i][j]`
//! over the probability simplex, via the classic reduction to
//! `max 1'x s.t. M'^T x <= 1, x >= 0` with a strictly positive shifted
//! payoff `M'`. The origin is feasible, so a single simplex phase with
//! Bland's rule suffices.

const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    pub value: f64,
    /// Minimizer's mixed strategy over rows.
    pub strategy: Vec<f64>,
}

/// `payoff[i][j]`: loss of row `i` against column `j`. Rows and columns must
/// be nonempty and every entry finite.
pub fn solve_min_max(payoff: &[Vec<f64>]) -> GameSolution {
    let rows = payoff.len();
    let cols = payoff[0].len();
    assert!(rows > 0 && cols > 0);
    debug_assert!(payoff
        .iter()
        .all(|r| r.len() == cols && r.iter().all(|v| v.is_finite())));

    let scale = payoff
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let min = payoff.iter().flatten().fold(f64::INFINITY, |m, v| m.min(*v)) / scale;
    let shift = 1.0 - min;

    // Tableau: one constraint per column of the game; variables are the
    // row weights followed by one slack per constraint, then the rhs.
    let width = rows + cols + 1;
    let rhs = width - 1;
    let mut tab = vec![vec![0.0; width]; cols];
    for (j, row) in tab.iter_mut().enumerate() {
        for i in 0..rows {
            row[i] = payoff[i][j] / scale + shift;
        }
        row[rows + j] = 1.0;
        row[rhs] = 1.0;
    }
    let mut reduced = vec![0.0; width];
    reduced[..rows].iter_mut().for_each(|c| *c = 1.0);
    let mut basis: Vec<usize> = (rows..rows + cols).collect();

    while let Some(enter) = (0..rhs).find(|&j| reduced[j] > PIVOT_EPS) {
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for (r, row) in tab.iter().enumerate() {
            if row[enter] > PIVOT_EPS {
                let ratio = row[rhs] / row[enter];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best_ratio - PIVOT_EPS || (ratio <= best_ratio + PIVOT_EPS && basis[r] < basis[l])
                    }
                };
                if better {
                    leave = Some(r);
                    best_ratio = ratio;
                }
            }
        }
        // every column of a strictly positive payoff bounds x, so this exists
        let leave = leave.expect("game LP is bounded");
        pivot(&mut tab, &mut reduced, leave, enter);
        basis[leave] = enter;
    }

    let mut x = vec![0.0; rows];
    for (r, &b) in basis.iter().enumerate() {
        if b < rows {
            x[b] = tab[r][rhs].max(0.0);
        }
    }
    let total: f64 = x.iter().sum();
    let strategy: Vec<f64> = x.iter().map(|v| v / total).collect();
    GameSolution {
        value: (1.0 / total - shift) * scale,
        strategy,
    }
}

fn pivot(tab: &mut [Vec<f64>], reduced: &mut [f64], leave: usize, enter: usize) {
    let p = tab[leave][enter];
    tab[leave].iter_mut().for_each(|v| *v /= p);
    let pivot_row = tab[leave].clone();
    for (r, row) in tab.iter_mut().enumerate() {
        if r != leave {
            let f = row[enter];
            if f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
            }
        }
    }
    let f = reduced[enter];
    reduced.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
}

/// `max_j sum_i h_i M[i][j]`.
pub fn worst_column(payoff: &[Vec<f64>], h: &[f64]) -> f64 {
    let cols = payoff[0].len();
    (0..cols)
        .map(|j| h.iter().zip(payoff).map(|(w, row)| w * row[j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}
