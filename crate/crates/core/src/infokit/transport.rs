//! Exact discrete optimal transport by the transportation simplex.

use std::collections::VecDeque;

use super::{Coupling, DiscreteDistribution, Matrix};
use crate::error::{Error, Result};

/// Largest `|A| * |B|` accepted by [`ot_min_cost`].
pub const OT_CELL_LIMIT: usize = 1_000_000;

/// Degenerate pivots in a row before pricing switches to Bland's rule.
const DEGENERATE_STREAK: usize = 32;

struct Basis {
    m: usize,
    n: usize,
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
    /// basis slot of each cell, `usize::MAX` when non-basic
    slot: Vec<usize>,
}

impl Basis {
    /// North-west corner rule, always producing `m + n - 1` cells (zero
    /// flows fill degenerate steps).
    fn north_west(a: &[f64], b: &[f64]) -> Self {
        let (m, n) = (a.len(), b.len());
        let mut ra = a.to_vec();
        let mut rb = b.to_vec();
        let mut cells = Vec::with_capacity(m + n - 1);
        let mut flow = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = ra[i].min(rb[j]).max(0.0);
            cells.push((i, j));
            flow.push(x);
            ra[i] -= x;
            rb[j] -= x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            // advance exactly one index so the cell count stays m + n - 1
            if j == n - 1 || (i < m - 1 && ra[i] <= rb[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        let mut slot = vec![usize::MAX; m * n];
        for (k, &(i, j)) in cells.iter().enumerate() {
            slot[i * n + j] = k;
        }
        Self { m, n, cells, flow, slot }
    }

    /// Tree adjacency over nodes `0..m` (rows) and `m..m+n` (columns).
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push(k);
            adj[self.m + j].push(k);
        }
        adj
    }

    fn other_end(&self, k: usize, node: usize) -> usize {
        let (i, j) = self.cells[k];
        if node == i {
            self.m + j
        } else {
            i
        }
    }

    fn potentials(&self, adj: &[Vec<usize>], cost: &Matrix) -> (Vec<f64>, Vec<f64>) {
        let mut pot = vec![f64::NAN; self.m + self.n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &k in &adj[node] {
                let next = self.other_end(k, node);
                if pot[next].is_nan() {
                    let (i, j) = self.cells[k];
                    // u_i + v_j = c_ij
                    pot[next] = cost.get(i, j) - pot[node];
                    queue.push_back(next);
                }
            }
        }
        let v = pot.split_off(self.m);
        (pot, v)
    }

    /// Basis slots on the tree path from column node `m + j` to row node `i`.
    fn path(&self, adj: &[Vec<usize>], i: usize, j: usize) -> Vec<usize> {
        let total = self.m + self.n;
        let mut via = vec![usize::MAX; total];
        let mut seen = vec![false; total];
        seen[i] = true;
        let mut queue = VecDeque::from([i]);
        let target = self.m + j;
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &k in &adj[node] {
                let next = self.other_end(k, node);
                if !seen[next] {
                    seen[next] = true;
                    via[next] = k;
                    queue.push_back(next);
                }
            }
        }
        let mut out = Vec::new();
        let mut node = target;
        while node != i {
            let k = via[node];
            out.push(k);
            node = self.other_end(k, node);
        }
        out
    }
}

/// Minimum of `sum pi_ij cost_ij` over couplings of `row` and `col`, with an
/// optimal plan.
pub fn ot_min_cost(row: &DiscreteDistribution, col: &DiscreteDistribution, cost: &Matrix) -> Result<(f64, Coupling)> {
    let (m, n) = (row.len(), col.len());
    if cost.shape() != (m, n) {
        return Err(Error::Dimension(format!("cost matrix {:?} does not match marginals ({m}, {n})", cost.shape())));
    }
    if m * n > OT_CELL_LIMIT {
        return Err(Error::SizeLimit { cells: m * n, limit: OT_CELL_LIMIT });
    }
    if cost.data().iter().any(|c| !c.is_finite()) {
        return Err(Error::Invalid("cost matrix has non-finite entries".into()));
    }

    let mut basis = Basis::north_west(row.probs(), col.probs());
    let eps = 1e-12 * (1.0 + cost.max_abs());
    let mut bland = false;
    let mut streak = 0;
    // generous cap; Bland's rule guarantees termination well before it
    let max_pivots = 50 * (m + n) * (m + n) + 1000;
    for _ in 0..max_pivots {
        let adj = basis.adjacency();
        let (u, v) = basis.potentials(&adj, cost);
        let mut entering = None;
        let mut best = -eps;
        'scan: for i in 0..m {
            for j in 0..n {
                if basis.slot[i * n + j] != usize::MAX {
                    continue;
                }
                let reduced = cost.get(i, j) - u[i] - v[j];
                if reduced < best {
                    entering = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = reduced;
                }
            }
        }
        let Some((ei, ej)) = entering else {
            return finish(row, col, cost, &basis);
        };

        let path = basis.path(&adj, ei, ej);
        // odd positions along the path from the column lose flow
        let mut leave = usize::MAX;
        let mut theta = f64::INFINITY;
        for &k in path.iter().step_by(2) {
            let (i, j) = basis.cells[k];
            let f = basis.flow[k];
            let better = f < theta || (f == theta && i * n + j < basis.cells[leave].0 * n + basis.cells[leave].1);
            if better {
                theta = f;
                leave = k;
            }
        }
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                basis.flow[k] -= theta;
            } else {
                basis.flow[k] += theta;
            }
        }
        let (li, lj) = basis.cells[leave];
        basis.slot[li * n + lj] = usize::MAX;
        basis.cells[leave] = (ei, ej);
        basis.flow[leave] = theta;
        basis.slot[ei * n + ej] = leave;

        if theta <= 0.0 {
            streak += 1;
            if streak >= DEGENERATE_STREAK {
                bland = true;
            }
        } else {
            streak = 0;
        }
    }
    Err(Error::MaxIter { method: "transportation simplex", iterations: max_pivots })
}

fn finish(row: &DiscreteDistribution, col: &DiscreteDistribution, cost: &Matrix, basis: &Basis) -> Result<(f64, Coupling)> {
    let mut table = Matrix::zeros(basis.m, basis.n);
    for (&(i, j), &f) in basis.cells.iter().zip(&basis.flow) {
        table.set(i, j, f.max(0.0));
    }
    let plan = Coupling::new(row.clone(), col.clone(), table, cost.clone())?;
    Ok((plan.expected_cost(), plan))
}
