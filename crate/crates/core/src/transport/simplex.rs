//! Primal network simplex for the dense transportation problem.
//!
//! Supplies sit on the left, demands on the right, and every left node is
//! joined to every right node. The starting basis is the artificial star
//! through an extra root node; the big-M artificial cost only has to beat a
//! single direct arc because the bipartite graph is complete. Pivots use
//! block-search pricing and the leaving-arc rule that keeps the spanning tree
//! strongly feasible, which rules out cycling under degeneracy.

use crate::error::{Error, Result};

/// Optimal flow on the `m × k` cost matrix, row-major.
pub(crate) struct Solution {
    pub flow: Vec<f64>,
    pub artificial_flow: f64,
}

const UP: i8 = 1;
const DOWN: i8 = -1;

/// Solves `min Σ c_ij f_ij` subject to row sums `supply` and column sums
/// `demand`. Both must be positive with (nearly) equal totals.
pub(crate) fn solve(cost: &[f64], supply: &[f64], demand: &[f64]) -> Result<Solution> {
    let m = supply.len();
    let k = demand.len();
    debug_assert_eq!(cost.len(), m * k);
    let real = m * k;
    let nodes = m + k + 1;
    let root = m + k;
    let max_c = cost.iter().copied().fold(0.0f64, f64::max);
    let art = max_c + 1.0;
    let eps = 64.0 * f64::EPSILON * (art + max_c);

    // Node u < m has supply, m <= u < m+k has demand. Artificial arc for u
    // is `real + u`: u -> root for supplies, root -> u for demands.
    let arc_ends = |a: usize| -> (usize, usize) {
        if a < real {
            (a / k, m + a % k)
        } else {
            let u = a - real;
            if u < m {
                (u, root)
            } else {
                (root, u)
            }
        }
    };
    let arc_cost = |a: usize| if a < real { cost[a] } else { art };

    let total_arcs = real + m + k;
    let mut flow = vec![0.0f64; total_arcs];
    let mut in_tree = vec![false; total_arcs];
    let mut tree_adj: Vec<Vec<u32>> = vec![Vec::new(); nodes];
    for u in 0..m + k {
        let a = real + u;
        flow[a] = if u < m { supply[u] } else { demand[u - m] };
        in_tree[a] = true;
        tree_adj[u].push(a as u32);
        tree_adj[root].push(a as u32);
    }

    let mut parent = vec![usize::MAX; nodes];
    let mut pred = vec![usize::MAX; nodes];
    let mut dir = vec![0i8; nodes];
    let mut depth = vec![0u32; nodes];
    let mut pi = vec![0.0f64; nodes];
    let mut stack = Vec::with_capacity(nodes);

    let mut rebuild = |parent: &mut [usize],
                       pred: &mut [usize],
                       dir: &mut [i8],
                       depth: &mut [u32],
                       pi: &mut [f64],
                       tree_adj: &[Vec<u32>]| {
        parent[root] = usize::MAX;
        pred[root] = usize::MAX;
        depth[root] = 0;
        pi[root] = 0.0;
        stack.clear();
        stack.push(root);
        while let Some(u) = stack.pop() {
            for &a in &tree_adj[u] {
                let a = a as usize;
                if a == pred[u] {
                    continue;
                }
                let (s, t) = arc_ends(a);
                let (v, d) = if s == u { (t, DOWN) } else { (s, UP) };
                parent[v] = u;
                pred[v] = a;
                dir[v] = d;
                depth[v] = depth[u] + 1;
                // reduced cost c + pi_s - pi_t vanishes on tree arcs
                pi[v] = if d == UP { pi[u] - arc_cost(a) } else { pi[u] + arc_cost(a) };
                stack.push(v);
            }
        }
    };
    rebuild(&mut parent, &mut pred, &mut dir, &mut depth, &mut pi, &tree_adj);

    let block = ((total_arcs as f64).sqrt().ceil() as usize).max(10);
    let mut next_arc = 0usize;
    let max_pivots = 50 * total_arcs + 10_000;
    let mut pivots = 0usize;

    loop {
        // Block-search pricing.
        let mut best = -eps;
        let mut entering = usize::MAX;
        let mut cnt = block;
        for step in 0..total_arcs {
            let a = (next_arc + step) % total_arcs;
            if !in_tree[a] {
                let (s, t) = arc_ends(a);
                let rc = arc_cost(a) + pi[s] - pi[t];
                if rc < best {
                    best = rc;
                    entering = a;
                }
            }
            cnt -= 1;
            if cnt == 0 {
                if entering != usize::MAX {
                    next_arc = (a + 1) % total_arcs;
                    break;
                }
                cnt = block;
            }
        }
        if entering == usize::MAX {
            break;
        }
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Internal("network simplex pivot limit reached".into()));
        }

        let (first, second) = arc_ends(entering);
        // Join node.
        let (mut u, mut v) = (first, second);
        while u != v {
            if depth[u] >= depth[v] {
                u = parent[u];
            } else {
                v = parent[v];
            }
        }
        let join = u;

        // Leaving arc: strict on the source side, non-strict on the target side.
        let mut delta = f64::INFINITY;
        let mut u_out = usize::MAX;
        let mut x = first;
        while x != join {
            if dir[x] == UP && flow[pred[x]] < delta {
                delta = flow[pred[x]];
                u_out = x;
            }
            x = parent[x];
        }
        let mut x = second;
        while x != join {
            if dir[x] == DOWN && flow[pred[x]] <= delta {
                delta = flow[pred[x]];
                u_out = x;
            }
            x = parent[x];
        }
        if u_out == usize::MAX {
            return Err(Error::Internal("unbounded transportation cycle".into()));
        }

        // Augment.
        if delta > 0.0 {
            flow[entering] += delta;
            let mut x = first;
            while x != join {
                let a = pred[x];
                flow[a] -= dir[x] as f64 * delta;
                x = parent[x];
            }
            let mut x = second;
            while x != join {
                let a = pred[x];
                flow[a] += dir[x] as f64 * delta;
                x = parent[x];
            }
        }
        let leaving = pred[u_out];
        flow[leaving] = 0.0;

        // Exchange arcs in the tree and rebuild the tree structure.
        in_tree[leaving] = false;
        let (ls, lt) = arc_ends(leaving);
        for end in [ls, lt] {
            let list = &mut tree_adj[end];
            let pos = list.iter().position(|&b| b as usize == leaving).expect("tree arc listed");
            list.swap_remove(pos);
        }
        in_tree[entering] = true;
        tree_adj[first].push(entering as u32);
        tree_adj[second].push(entering as u32);
        rebuild(&mut parent, &mut pred, &mut dir, &mut depth, &mut pi, &tree_adj);
    }

    let artificial_flow = flow[real..].iter().sum();
    flow.truncate(real);
    Ok(Solution { flow, artificial_flow })
}
