//! Exact least-structure solver for overdetermined rational systems.

use crate::invariants::{q, Q};
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactFit {
    pub solution: Vec<Q>,
    pub rank: usize,
    /// Columns not determined by the equations; they take their pinned value.
    pub free: Vec<usize>,
    /// A x - b for every input row.
    pub residuals: Vec<Q>,
}

impl ExactFit {
    pub fn is_exact(&self) -> bool {
        self.residuals.iter().all(Zero::is_zero)
    }
}

/// Solves A x = b exactly. Undetermined columns are set from `pins` (default 0).
pub fn solve_exact(rows: &[Vec<Q>], rhs: &[Q], pins: &[(usize, Q)]) -> ExactFit {
    assert_eq!(rows.len(), rhs.len(), "row/rhs length mismatch");
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Q>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            assert_eq!(r.len(), ncols, "ragged matrix");
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();

    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        let inv = q(1) / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in c..=ncols {
                    let delta = &factor * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }

    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut solution = vec![q(0); ncols];
    for &c in &free {
        if let Some((_, v)) = pins.iter().find(|(i, _)| *i == c) {
            solution[c] = v.clone();
        }
    }
    for (i, &c) in pivots.iter().enumerate() {
        let mut v = m[i][ncols].clone();
        for &f in &free {
            v -= &m[i][f] * &solution[f];
        }
        solution[c] = v;
    }
    let residuals = rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| row.iter().zip(&solution).fold(q(0), |acc, (a, x)| acc + a * x) - b)
        .collect();
    ExactFit { solution, rank: pivots.len(), free, residuals }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::q_frac;

    #[test]
    fn solves_overdetermined_consistent_system() {
        let rows = vec![vec![q(1), q(1)], vec![q(1), q(-1)], vec![q(2), q(3)]];
        let rhs = vec![q(3), q(1), q(7)];
        let fit = solve_exact(&rows, &rhs, &[]);
        assert_eq!(fit.solution, vec![q(2), q(1)]);
        assert_eq!(fit.rank, 2);
        assert!(fit.is_exact());
    }

    #[test]
    fn reports_inconsistency() {
        let rows = vec![vec![q(1)], vec![q(1)]];
        let fit = solve_exact(&rows, &[q(1), q(2)], &[]);
        assert!(!fit.is_exact());
    }

    #[test]
    fn pins_free_columns() {
        let rows = vec![vec![q(1), q(0), q(1)], vec![q(2), q(0), q(2)]];
        let fit = solve_exact(&rows, &[q(1), q(2)], &[(1, q_frac(1, 2)), (2, q(5))]);
        assert_eq!(fit.free, vec![1, 2]);
        assert_eq!(fit.solution, vec![q(-4), q_frac(1, 2), q(5)]);
        assert!(fit.is_exact());
    }
}
