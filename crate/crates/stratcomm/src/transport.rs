//! Integer transportation programmes solved as min-cost flows.
//!
//! Rows are reconstruction symbols, columns are true symbols, and `weights[i * q + j]` is
//! the profit of one unit in cell `(i, j)`. Marginals are integers, so optimal vertices are
//! integral and successive shortest paths return an optimal integer plan.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: i128,
    cost: i128,
    rev: usize,
}

struct Network {
    adj: Vec<Vec<Edge>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Self { adj: vec![Vec::new(); nodes] }
    }

    fn add(&mut self, from: usize, to: usize, cap: i128, cost: i128) {
        let rf = self.adj[to].len();
        let rt = self.adj[from].len();
        self.adj[from].push(Edge { to, cap, cost, rev: rf });
        self.adj[to].push(Edge { to: from, cap: 0, cost: -cost, rev: rt });
    }

    /// Sends `demand` units from `s` to `t` at minimum cost.
    fn min_cost_flow(&mut self, s: usize, t: usize, demand: i128) -> Result<()> {
        let nodes = self.adj.len();
        let mut sent = 0i128;
        while sent < demand {
            let mut dist: Vec<Option<i128>> = vec![None; nodes];
            let mut via: Vec<Option<(usize, usize)>> = vec![None; nodes];
            dist[s] = Some(0);
            for _ in 0..nodes {
                let mut changed = false;
                for u in 0..nodes {
                    let Some(du) = dist[u] else { continue };
                    for (k, e) in self.adj[u].iter().enumerate() {
                        if e.cap <= 0 {
                            continue;
                        }
                        let cand = du.checked_add(e.cost).ok_or(Error::Overflow("transport costs"))?;
                        if dist[e.to].map_or(true, |d| cand < d) {
                            dist[e.to] = Some(cand);
                            via[e.to] = Some((u, k));
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if dist[t].is_none() {
                return Err(Error::Infeasible("marginals cannot be matched".into()));
            }
            let mut push = demand - sent;
            let mut v = t;
            while let Some((u, k)) = via[v] {
                push = push.min(self.adj[u][k].cap);
                v = u;
            }
            let mut v = t;
            while let Some((u, k)) = via[v] {
                self.adj[u][k].cap -= push;
                let (to, rev) = (self.adj[u][k].to, self.adj[u][k].rev);
                self.adj[to][rev].cap += push;
                v = u;
            }
            sent += push;
        }
        Ok(())
    }
}

fn check_shape(rows: &[u64], cols: &[u64], weights: &[i128]) -> Result<usize> {
    let q = rows.len();
    if cols.len() != q || weights.len() != q * q {
        return Err(Error::Mismatch(format!(
            "{} rows, {} columns and {} weights",
            q,
            cols.len(),
            weights.len()
        )));
    }
    if rows.iter().sum::<u64>() != cols.iter().sum::<u64>() {
        return Err(Error::Infeasible("row and column totals differ".into()));
    }
    Ok(q)
}

/// A plan `W` maximising `sum W(i, j) * weights(i, j)` under the given marginals.
pub fn solve_max(rows: &[u64], cols: &[u64], weights: &[i128]) -> Result<Vec<u64>> {
    let q = check_shape(rows, cols, weights)?;
    let total: u64 = rows.iter().sum();
    let (s, t) = (2 * q, 2 * q + 1);
    let mut net = Network::new(2 * q + 2);
    for i in 0..q {
        if rows[i] > 0 {
            net.add(s, i, rows[i] as i128, 0);
        }
        if cols[i] > 0 {
            net.add(q + i, t, cols[i] as i128, 0);
        }
    }
    for i in 0..q {
        for j in 0..q {
            if rows[i] > 0 && cols[j] > 0 {
                net.add(i, q + j, total as i128, -weights[i * q + j]);
            }
        }
    }
    net.min_cost_flow(s, t, total as i128)?;
    let mut plan = vec![0u64; q * q];
    for i in 0..q {
        for e in &net.adj[i] {
            if e.to >= q && e.to < 2 * q {
                let reverse = &net.adj[e.to][e.rev];
                plan[i * q + (e.to - q)] = reverse.cap as u64;
            }
        }
    }
    Ok(plan)
}

pub fn objective(plan: &[u64], weights: &[i128]) -> i128 {
    plan.iter().zip(weights).map(|(&c, &w)| c as i128 * w).sum()
}

/// Direction of the tie-breaking objective on the optimal face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mismatch {
    Maximize,
    Minimize,
}

/// Weights whose optimum is optimal for `weights` and, among those, extremal in off-diagonal mass.
pub fn lexicographic_weights(weights: &[i128], q: usize, total: u64, dir: Mismatch) -> Result<Vec<i128>> {
    let factor = total as i128 + 1;
    weights
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let off = i128::from(k / q != k % q);
            let tie = if dir == Mismatch::Maximize { off } else { -off };
            w.checked_mul(factor).and_then(|v| v.checked_add(tie)).ok_or(Error::Overflow("lexicographic weights"))
        })
        .collect()
}

/// Whether `plan`, assumed optimal for `weights`, is the only optimal plan.
///
/// A second optimum exists exactly when the residual graph of `plan` carries a
/// zero-cost cycle, which shows up as a cycle of tight arcs under shortest-path potentials.
pub fn is_unique_optimum(plan: &[u64], weights: &[i128], q: usize) -> bool {
    let mut arcs: Vec<(usize, usize, i128)> = Vec::new();
    let live_row: Vec<bool> = (0..q).map(|i| (0..q).any(|j| plan[i * q + j] > 0)).collect();
    let live_col: Vec<bool> = (0..q).map(|j| (0..q).any(|i| plan[i * q + j] > 0)).collect();
    for i in 0..q {
        for j in 0..q {
            if !live_row[i] || !live_col[j] {
                continue;
            }
            arcs.push((i, q + j, -weights[i * q + j]));
            if plan[i * q + j] > 0 {
                arcs.push((q + j, i, weights[i * q + j]));
            }
        }
    }
    let nodes = 2 * q;
    let mut dist = vec![0i128; nodes];
    for _ in 0..nodes {
        let mut changed = false;
        for &(u, v, c) in &arcs {
            if dist[u] + c < dist[v] {
                dist[v] = dist[u] + c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut tight = vec![Vec::new(); nodes];
    for &(u, v, c) in &arcs {
        if dist[u] + c == dist[v] {
            tight[u].push(v);
        }
    }
    // A cycle through forward arc row i -> col j must return to row i without
    // simply undoing that same cell, which would be a trivial two-arc loop.
    for i in 0..q {
        for &col in &tight[i] {
            if reaches(&tight, col, i, (col, i)) {
                return false;
            }
        }
    }
    true
}

fn reaches(adj: &[Vec<usize>], from: usize, to: usize, banned: (usize, usize)) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if (u, v) == banned || seen[v] {
                continue;
            }
            if v == to {
                return true;
            }
            seen[v] = true;
            stack.push(v);
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{joint_types_with_marginals, DEFAULT_CAP};
    use proptest::prelude::*;

    fn brute(rows: &[u64], cols: &[u64], w: &[i128]) -> (i128, usize, usize, usize) {
        let r: Vec<usize> = rows.iter().map(|&v| v as usize).collect();
        let c: Vec<usize> = cols.iter().map(|&v| v as usize).collect();
        let all = joint_types_with_marginals(&r, &c, DEFAULT_CAP).unwrap();
        let val = |jt: &crate::model::JointType| -> i128 {
            jt.cells().iter().zip(w).map(|(&a, &b)| a as i128 * b).sum()
        };
        let best = all.iter().map(val).max().unwrap();
        let opt: Vec<_> = all.iter().filter(|jt| val(jt) == best).collect();
        let hi = opt.iter().map(|jt| jt.mismatches()).max().unwrap();
        let lo = opt.iter().map(|jt| jt.mismatches()).min().unwrap();
        (best, hi, lo, opt.len())
    }

    fn mismatch(plan: &[u64], q: usize) -> usize {
        plan.iter().enumerate().filter(|(k, _)| k / q != k % q).map(|(_, &c)| c as usize).sum()
    }

    #[test]
    fn one_parameter_family() {
        // Rows (2,3), columns (1,4); profit U(0,1) = 1, U(1,0) = -2.
        let w = [0, 1, -2, 0];
        let plan = solve_max(&[2, 3], &[1, 4], &w).unwrap();
        assert_eq!(plan, vec![1, 1, 0, 3]);
        assert_eq!(objective(&plan, &w), 1);
        assert!(is_unique_optimum(&plan, &w, 2));
    }

    #[test]
    fn detects_alternative_optima() {
        let w = [0, 0, 0, 0];
        let plan = solve_max(&[1, 1], &[1, 1], &w).unwrap();
        assert!(!is_unique_optimum(&plan, &w, 2));
        let w = [0, -1, -1, 0];
        let plan = solve_max(&[1, 1], &[1, 1], &w).unwrap();
        assert_eq!(plan, vec![1, 0, 0, 1]);
        assert!(is_unique_optimum(&plan, &w, 2));
    }

    #[test]
    fn rejects_mismatched_totals() {
        assert!(solve_max(&[1, 1], &[1, 2], &[0; 4]).is_err());
        assert!(solve_max(&[1, 1], &[1, 1], &[0; 3]).is_err());
    }

    fn instance() -> impl Strategy<Value = (usize, Vec<u64>, Vec<u64>, Vec<i128>)> {
        (2usize..=4, 1u64..=7).prop_flat_map(|(q, n)| {
            (
                Just(q),
                prop::collection::vec(0u64..=n, q - 1),
                prop::collection::vec(0u64..=n, q - 1),
                prop::collection::vec(-6i128..=6, q * q),
            )
                .prop_map(move |(q, a, b, w)| (q, composition(n, &a), composition(n, &b), w))
        })
    }

    /// Splits `n` at sorted cut points into a composition of length `cuts.len() + 1`.
    fn composition(n: u64, cuts: &[u64]) -> Vec<u64> {
        let mut c = cuts.to_vec();
        c.sort();
        let mut out = Vec::new();
        let mut prev = 0;
        for &x in &c {
            out.push(x - prev);
            prev = x;
        }
        out.push(n - prev);
        out
    }

    proptest! {
        #[test]
        fn matches_exhaustive_enumeration((q, rows, cols, w) in instance()) {
            let total: u64 = rows.iter().sum();
            let (best, hi, lo, count) = brute(&rows, &cols, &w);
            let plan = solve_max(&rows, &cols, &w).unwrap();
            prop_assert_eq!(objective(&plan, &w), best);
            prop_assert_eq!(is_unique_optimum(&plan, &w, q), count == 1);

            let wmax = lexicographic_weights(&w, q, total, Mismatch::Maximize).unwrap();
            let p = solve_max(&rows, &cols, &wmax).unwrap();
            prop_assert_eq!(objective(&p, &w), best);
            prop_assert_eq!(mismatch(&p, q), hi);

            let wmin = lexicographic_weights(&w, q, total, Mismatch::Minimize).unwrap();
            let p = solve_max(&rows, &cols, &wmin).unwrap();
            prop_assert_eq!(objective(&p, &w), best);
            prop_assert_eq!(mismatch(&p, q), lo);
        }
    }
}
