//! Deterministic Leiden community detection: seeded local moving, a
//! refinement phase that keeps communities connected, and aggregation,
//! iterated until the partition stops improving. Quality is weighted
//! modularity with a resolution parameter.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::AssetGraph;

/// Community labels over the nodes of an [`AssetGraph`].
#[derive(Debug, Clone)]
pub struct Clustering {
    /// node index -> community id, ids dense from 0.
    pub membership: Vec<usize>,
    /// Modularity of the final partition at the given resolution.
    pub quality: f64,
    pub seed: u64,
    pub resolution: f64,
    /// Modularity after each outer iteration; nondecreasing.
    pub quality_history: Vec<f64>,
}

struct WorkGraph {
    /// Neighbor lists without self entries, weights aggregated.
    adj: Vec<Vec<(usize, f64)>>,
    /// Self-loop weight (internal weight of an aggregated node).
    loop_w: Vec<f64>,
    /// Weighted degree: adjacent weight plus twice the loop weight.
    degree: Vec<f64>,
    /// Sum of all degrees (2W).
    total: f64,
    /// Original nodes folded into each work node.
    members: Vec<Vec<usize>>,
}

impl WorkGraph {
    fn from_graph(graph: &AssetGraph) -> Self {
        let n = graph.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in &graph.edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for list in adj.iter_mut() {
            list.sort_by_key(|e| e.0);
        }
        let loop_w = vec![0.0; n];
        let degree: Vec<f64> = adj
            .iter()
            .map(|list| list.iter().map(|(_, w)| w).sum::<f64>())
            .collect();
        let total = degree.iter().sum();
        let members = (0..n).map(|i| vec![i]).collect();
        Self {
            adj,
            loop_w,
            degree,
            total,
            members,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }
}

/// Modularity of a partition of the work graph.
fn modularity(g: &WorkGraph, comm: &[usize], resolution: f64) -> f64 {
    if g.total <= 0.0 {
        return 0.0;
    }
    let n_comm = comm.iter().max().map_or(0, |m| m + 1);
    let mut tot = vec![0.0; n_comm];
    let mut internal = vec![0.0; n_comm];
    for i in 0..g.len() {
        tot[comm[i]] += g.degree[i];
        internal[comm[i]] += 2.0 * g.loop_w[i];
        for &(j, w) in &g.adj[i] {
            if comm[j] == comm[i] {
                internal[comm[i]] += w; // each internal edge counted from both ends
            }
        }
    }
    let two_w = g.total;
    (0..n_comm)
        .map(|c| internal[c] / two_w - resolution * (tot[c] / two_w) * (tot[c] / two_w))
        .sum()
}

/// Queue-based local moving. Moves each node to the adjacent community
/// with the largest modularity gain (ties to the lowest community id).
/// Returns whether any node moved.
fn local_move(
    g: &WorkGraph,
    comm: &mut [usize],
    comm_tot: &mut [f64],
    rng: &mut ChaCha8Rng,
    resolution: f64,
) -> bool {
    let n = g.len();
    if g.total <= 0.0 {
        return false;
    }
    let two_w = g.total;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut queue: std::collections::VecDeque<usize> = order.into_iter().collect();
    let mut queued = vec![true; n];
    let mut moved_any = false;
    let mut weight_to: Vec<f64> = vec![0.0; comm_tot.len()];

    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let old = comm[v];
        comm_tot[old] -= g.degree[v];

        // alternatives: old community and every neighbor community
        let mut candidates: Vec<usize> = vec![old];
        for &(u, w) in &g.adj[v] {
            let c = comm[u];
            if weight_to[c] == 0.0 && c != old {
                candidates.push(c);
            }
            weight_to[c] += w;
        }
        // highest gain wins, ties broken by lowest community id
        let mut best = old;
        let mut best_gain = weight_to[old] - resolution * g.degree[v] * comm_tot[old] / two_w;
        for &c in &candidates {
            let gain = weight_to[c] - resolution * g.degree[v] * comm_tot[c] / two_w;
            if gain > best_gain || (gain == best_gain && c < best) {
                best = c;
                best_gain = gain;
            }
        }
        for &c in &candidates {
            weight_to[c] = 0.0;
        }

        comm[v] = best;
        comm_tot[best] += g.degree[v];
        if best != old {
            moved_any = true;
            for &(u, _) in &g.adj[v] {
                if comm[u] != best && !queued[u] {
                    queued[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    moved_any
}

/// Refinement: within each local-move community, greedily merge singleton
/// refined communities along edges when the merge gain is positive. Every
/// refined community stays connected.
fn refine(
    g: &WorkGraph,
    comm: &[usize],
    rng: &mut ChaCha8Rng,
    resolution: f64,
) -> Vec<usize> {
    let n = g.len();
    let mut refined: Vec<usize> = (0..n).collect();
    if g.total <= 0.0 {
        return refined;
    }
    let two_w = g.total;
    let mut ref_tot: Vec<f64> = g.degree.clone();
    let mut ref_size: Vec<usize> = vec![1; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for v in order {
        if ref_size[refined[v]] > 1 {
            continue; // only isolated nodes are merged
        }
        let own = refined[v];
        ref_tot[own] -= g.degree[v];
        let mut best = own;
        let mut best_gain = 0.0;
        let mut weight_to: Vec<(usize, f64)> = Vec::new();
        for &(u, w) in &g.adj[v] {
            if comm[u] != comm[v] {
                continue;
            }
            let r = refined[u];
            match weight_to.iter_mut().find(|(rr, _)| *rr == r) {
                Some((_, acc)) => *acc += w,
                None => weight_to.push((r, w)),
            }
        }
        // ascending id order, so equal gains keep the lowest community
        weight_to.sort_by_key(|e| e.0);
        for (r, w) in weight_to {
            let gain = w - resolution * g.degree[v] * ref_tot[r] / two_w;
            if gain > best_gain {
                best = r;
                best_gain = gain;
            }
        }
        refined[v] = best;
        ref_tot[best] += g.degree[v];
        if best != own {
            ref_size[own] -= 1;
            ref_size[best] += 1;
        }
    }
    refined
}

/// Collapses refined communities into supernodes; the carried community
/// assignment of each supernode is the local-move community of its
/// members.
fn aggregate(g: &WorkGraph, refined: &[usize], comm: &[usize]) -> (WorkGraph, Vec<usize>) {
    let n = g.len();
    let mut ids: Vec<usize> = refined.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mut dense = vec![usize::MAX; n];
    for (k, &r) in ids.iter().enumerate() {
        dense[r] = k;
    }
    let m = ids.len();
    let mut loop_w = vec![0.0; m];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut edge_acc: Vec<std::collections::BTreeMap<usize, f64>> =
        vec![std::collections::BTreeMap::new(); m];
    let mut super_comm = vec![usize::MAX; m];
    for v in 0..n {
        let sv = dense[refined[v]];
        members[sv].extend(g.members[v].iter().copied());
        loop_w[sv] += g.loop_w[v];
        super_comm[sv] = comm[v];
        for &(u, w) in &g.adj[v] {
            let su = dense[refined[u]];
            if su == sv {
                if u > v {
                    loop_w[sv] += w;
                }
            } else if su > sv {
                *edge_acc[sv].entry(su).or_insert(0.0) += w;
            }
        }
    }
    let mut adj = vec![Vec::new(); m];
    for (sv, acc) in edge_acc.into_iter().enumerate() {
        for (su, w) in acc {
            adj[sv].push((su, w));
            adj[su].push((sv, w));
        }
    }
    for list in adj.iter_mut() {
        list.sort_by_key(|e| e.0);
    }
    let degree: Vec<f64> = (0..m)
        .map(|i| adj[i].iter().map(|(_, w)| w).sum::<f64>() + 2.0 * loop_w[i])
        .collect();
    let total = degree.iter().sum();
    for sv in members.iter_mut() {
        sv.sort_unstable();
    }

    // densify the carried community ids
    let mut cids: Vec<usize> = super_comm.clone();
    cids.sort_unstable();
    cids.dedup();
    let mut cmap = std::collections::BTreeMap::new();
    for (k, &c) in cids.iter().enumerate() {
        cmap.insert(c, k);
    }
    let carried: Vec<usize> = super_comm.iter().map(|c| cmap[c]).collect();

    (
        WorkGraph {
            adj,
            loop_w,
            degree,
            total,
            members,
        },
        carried,
    )
}

/// Runs Leiden on the graph. Deterministic for a fixed seed.
pub fn leiden(graph: &AssetGraph, resolution: f64, seed: u64) -> Clustering {
    let n = graph.nodes.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = WorkGraph::from_graph(graph);
    let mut comm: Vec<usize> = (0..g.len()).collect();
    let mut quality_history = Vec::new();

    loop {
        let mut comm_tot = vec![0.0; g.len()];
        for v in 0..g.len() {
            comm_tot[comm[v]] += g.degree[v];
        }
        let moved = local_move(&g, &mut comm, &mut comm_tot, &mut rng, resolution);
        quality_history.push(modularity(&g, &comm, resolution));
        if !moved && quality_history.len() > 1 {
            break;
        }
        let refined = refine(&g, &comm, &mut rng, resolution);
        let distinct = {
            let mut ids = refined.clone();
            ids.sort_unstable();
            ids.dedup();
            ids.len()
        };
        if distinct == g.len() {
            break;
        }
        let (next, carried) = aggregate(&g, &refined, &comm);
        g = next;
        comm = carried;
    }

    // project supernode communities back to original nodes
    let mut membership = vec![usize::MAX; n];
    for v in 0..g.len() {
        for &orig in &g.members[v] {
            membership[orig] = comm[v];
        }
    }

    // split any disconnected community into its connected components
    let membership = split_disconnected(graph, &membership);
    // renumber densely by first appearance over node index order
    let membership = renumber(&membership);

    let flat = WorkGraph::from_graph(graph);
    let quality = modularity(&flat, &membership, resolution);
    Clustering {
        membership,
        quality,
        seed,
        resolution,
        quality_history,
    }
}

fn split_disconnected(graph: &AssetGraph, membership: &[usize]) -> Vec<usize> {
    let n = graph.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for &(u, v, _) in &graph.edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut out = vec![usize::MAX; n];
    let mut next_id = 0;
    let mut visited = vec![false; n];
    for start in 0..n {
        if visited[start] {
            continue;
        }
        // BFS within the node's community
        let target = membership[start];
        let mut stack = vec![start];
        visited[start] = true;
        while let Some(v) = stack.pop() {
            out[v] = next_id;
            for &u in &adj[v] {
                if !visited[u] && membership[u] == target {
                    visited[u] = true;
                    stack.push(u);
                }
            }
        }
        next_id += 1;
    }
    out
}

fn renumber(membership: &[usize]) -> Vec<usize> {
    let mut map = std::collections::BTreeMap::new();
    let mut out = Vec::with_capacity(membership.len());
    for &c in membership {
        let next = map.len();
        let id = *map.entry(c).or_insert(next);
        out.push(id);
    }
    out
}
