//! Exact min-cost transportation by successive shortest paths.
//!
//! The bipartite network has one node per supply point, one per demand
//! point and a shared sink. Forward arcs are uncapacitated with the ground
//! cost; reverse arcs carry the current flow. Node potentials keep the
//! reduced costs nonnegative so each shortest-path search is a dense
//! Dijkstra. Every augmentation saturates a supply, a demand or a reverse
//! arc, so the number of rounds is bounded by a small multiple of the
//! number of points in practice.

/// Masses below this are treated as exhausted.
const EPS: f64 = 1e-14;

#[derive(Debug, Clone)]
pub(crate) struct Transport {
    pub cost: f64,
    /// `(supply index, demand index, mass)` in the caller's indexing.
    pub flows: Vec<(usize, usize, f64)>,
}

/// Solves `min sum c(i,j) x(i,j)` subject to row sums `supply` and column
/// sums `demand`. Both vectors must be nonnegative with equal total mass up
/// to rounding; zero entries are pruned before solving.
pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: impl Fn(usize, usize) -> f64) -> Transport {
    let src: Vec<usize> = (0..supply.len()).filter(|&i| supply[i] > 0.0).collect();
    let snk: Vec<usize> = (0..demand.len()).filter(|&j| demand[j] > 0.0).collect();
    let m = src.len();
    let n = snk.len();
    if m == 0 || n == 0 {
        return Transport {
            cost: 0.0,
            flows: Vec::new(),
        };
    }

    let c: Vec<f64> = src
        .iter()
        .flat_map(|&i| snk.iter().map(move |&j| (i, j)))
        .map(|(i, j)| cost(i, j))
        .collect();

    // Single-point marginals admit exactly one coupling.
    if m == 1 || n == 1 {
        let mut flows = Vec::with_capacity(m.max(n));
        let mut total = 0.0;
        if m == 1 {
            for (jj, &j) in snk.iter().enumerate() {
                flows.push((src[0], j, demand[j]));
                total += demand[j] * c[jj];
            }
        } else {
            for (ii, &i) in src.iter().enumerate() {
                flows.push((i, snk[0], supply[i]));
                total += supply[i] * c[ii];
            }
        }
        return Transport { cost: total, flows };
    }

    let mut rem_a: Vec<f64> = src.iter().map(|&i| supply[i]).collect();
    let mut rem_b: Vec<f64> = snk.iter().map(|&j| demand[j]).collect();
    let mut flow = vec![0.0; m * n];
    let t = m + n;
    let mut h = vec![0.0; m + n + 1];
    let mut dist = vec![f64::INFINITY; m + n + 1];
    let mut done = vec![false; m + n + 1];
    // Predecessor of a demand node (a supply node), and of a supply node
    // reached through a reverse arc (a demand node).
    let mut pred_sink = vec![usize::MAX; n];
    let mut pred_src = vec![usize::MAX; m];
    let mut pred_t;

    loop {
        if !rem_a.iter().any(|&r| r > EPS) || !rem_b.iter().any(|&r| r > EPS) {
            break;
        }
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        done.iter_mut().for_each(|d| *d = false);
        pred_sink.iter_mut().for_each(|p| *p = usize::MAX);
        pred_src.iter_mut().for_each(|p| *p = usize::MAX);
        pred_t = usize::MAX;
        for i in 0..m {
            if rem_a[i] > EPS {
                dist[i] = 0.0;
            }
        }

        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (k, (&d, &fin)) in dist.iter().zip(&done).enumerate() {
                if !fin && d < best {
                    best = d;
                    u = k;
                }
            }
            if u == usize::MAX || u == t {
                break;
            }
            done[u] = true;
            if u < m {
                let i = u;
                for j in 0..n {
                    let rc = (c[i * n + j] + h[i] - h[m + j]).max(0.0);
                    let nd = best + rc;
                    if nd < dist[m + j] {
                        dist[m + j] = nd;
                        pred_sink[j] = i;
                    }
                }
            } else {
                let j = u - m;
                for i in 0..m {
                    if flow[i * n + j] > EPS {
                        let rc = (h[m + j] - h[i] - c[i * n + j]).max(0.0);
                        let nd = best + rc;
                        if nd < dist[i] {
                            dist[i] = nd;
                            pred_src[i] = j;
                        }
                    }
                }
                if rem_b[j] > EPS {
                    let nd = best + (h[m + j] - h[t]).max(0.0);
                    if nd < dist[t] {
                        dist[t] = nd;
                        pred_t = j;
                    }
                }
            }
        }

        if pred_t == usize::MAX {
            break;
        }
        let dt = dist[t];
        for (hk, &dk) in h.iter_mut().zip(&dist) {
            *hk += dk.min(dt);
        }

        // Walk back from the sink to an active supply node.
        let end = pred_t;
        let mut path: Vec<(usize, usize, bool)> = Vec::new();
        let mut j = end;
        let start = loop {
            let i = pred_sink[j];
            path.push((i, j, true));
            if pred_src[i] == usize::MAX {
                break i;
            }
            let j2 = pred_src[i];
            path.push((i, j2, false));
            j = j2;
        };

        let mut delta = rem_a[start].min(rem_b[end]);
        for &(i, j, forward) in &path {
            if !forward {
                delta = delta.min(flow[i * n + j]);
            }
        }
        for &(i, j, forward) in &path {
            let f = &mut flow[i * n + j];
            if forward {
                *f += delta;
            } else {
                *f -= delta;
                if *f < EPS {
                    *f = 0.0;
                }
            }
        }
        rem_a[start] -= delta;
        if rem_a[start] < EPS {
            rem_a[start] = 0.0;
        }
        rem_b[end] -= delta;
        if rem_b[end] < EPS {
            rem_b[end] = 0.0;
        }
    }

    let mut flows = Vec::new();
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..n {
            let f = flow[i * n + j];
            if f > 0.0 {
                flows.push((src[i], snk[j], f));
                total += f * c[i * n + j];
            }
        }
    }
    Transport { cost: total, flows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_prefers_diagonal() {
        let c = [[0.0, 1.0], [1.0, 0.0]];
        let sol = solve(&[0.5, 0.5], &[0.5, 0.5], |i, j| c[i][j]);
        assert_eq!(sol.cost, 0.0);
    }

    #[test]
    fn needs_reverse_arc() {
        // Greedy nearest assignment from the first source is suboptimal
        // here; the second round must reroute along a reverse arc.
        let c = [[1.0, 2.0], [1.0, 10.0]];
        let sol = solve(&[0.5, 0.5], &[0.5, 0.5], |i, j| c[i][j]);
        assert!((sol.cost - 1.5).abs() < 1e-15, "{}", sol.cost);
    }

    #[test]
    fn rectangular_marginals() {
        let sol = solve(&[0.3, 0.0, 0.7], &[1.0, 0.0, 0.0], |i, j| (i as f64 - j as f64).abs());
        assert!((sol.cost - 1.4).abs() < 1e-15);
        assert_eq!(sol.flows.len(), 2);
    }
}
