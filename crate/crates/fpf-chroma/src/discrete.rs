//! Set-theoretic colorers on finite structures.
//!
//! `discrete_color_multi` colors a fixed-point-free multimap with bounded
//! image sizes: the symmetrized conflict graph is 2k-degenerate (charge
//! each edge to the vertex whose image produced it), so a greedy pass in
//! smallest-last order needs at most 2k+1 colors. `discrete_color_single`
//! handles functional graphs with the classical 3-color bound.
//! `doubling_min_colors` computes the exact chromatic number of the
//! doubling map n -> {n+1, ..., 2n} on {1..N}, whose unbounded growth is
//! the reason the bounded-image hypothesis exists.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::DiscreteError;

/// Finite multimap v -> image set with |image| <= k, no loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMultiMap {
    images: BTreeMap<u64, BTreeSet<u64>>,
}

impl FiniteMultiMap {
    /// Build and validate. Image vertices without a declared line of their
    /// own are treated as sinks (they conflict only through the images that
    /// mention them).
    pub fn new(images: BTreeMap<u64, BTreeSet<u64>>) -> Result<Self, DiscreteError> {
        for (&v, img) in &images {
            if img.is_empty() {
                return Err(DiscreteError::EmptyImage(v));
            }
            if img.contains(&v) {
                return Err(DiscreteError::Loop(v));
            }
        }
        Ok(FiniteMultiMap { images })
    }

    pub fn vertices(&self) -> impl Iterator<Item = u64> + '_ {
        self.images.keys().copied()
    }

    pub fn image(&self, v: u64) -> Option<&BTreeSet<u64>> {
        self.images.get(&v)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Largest image size k.
    pub fn max_out_degree(&self) -> usize {
        self.images.values().map(|s| s.len()).max().unwrap_or(0)
    }

    /// Vertex universe: sources plus every image element.
    fn universe(&self) -> BTreeSet<u64> {
        let mut all: BTreeSet<u64> = self.images.keys().copied().collect();
        for img in self.images.values() {
            all.extend(img.iter().copied());
        }
        all
    }
}

/// Parse the `v: a b c` line format. Blank lines and `#` comments are
/// skipped.
pub fn parse_multimap(text: &str) -> Result<FiniteMultiMap, DiscreteError> {
    let mut images: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, tail) = line.split_once(':').ok_or_else(|| DiscreteError::Parse {
            line: lineno + 1,
            message: "expected `v: a b c`".into(),
        })?;
        let v: u64 = head.trim().parse().map_err(|_| DiscreteError::Parse {
            line: lineno + 1,
            message: format!("invalid vertex `{}`", head.trim()),
        })?;
        let mut img = BTreeSet::new();
        for word in tail.split_whitespace() {
            let w: u64 = word.parse().map_err(|_| DiscreteError::Parse {
                line: lineno + 1,
                message: format!("invalid image vertex `{word}`"),
            })?;
            img.insert(w);
        }
        if images.insert(v, img).is_some() {
            return Err(DiscreteError::Parse {
                line: lineno + 1,
                message: format!("vertex {v} declared twice"),
            });
        }
    }
    FiniteMultiMap::new(images)
}

/// Adjacency of the symmetrized conflict graph on the vertex universe.
fn conflict_graph(g: &FiniteMultiMap) -> (Vec<u64>, Vec<Vec<usize>>) {
    let universe: Vec<u64> = g.universe().into_iter().collect();
    let index: BTreeMap<u64, usize> = universe
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); universe.len()];
    for (&v, img) in &g.images {
        let vi = index[&v];
        for &w in img {
            let wi = index[&w];
            adj[vi].insert(wi);
            adj[wi].insert(vi);
        }
    }
    (universe, adj.into_iter().map(|s| s.into_iter().collect()).collect())
}

/// Greedy coloring along a smallest-last (degeneracy) order, built with a
/// lazy-deletion bucket queue in O(V + E).
fn greedy_degeneracy_coloring(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
    for (v, &d) in degree.iter().enumerate() {
        buckets[d].push(v);
    }
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut min_d = 0usize;
    for _ in 0..n {
        let v = loop {
            while buckets[min_d].is_empty() {
                min_d += 1;
            }
            let v = *buckets[min_d].last().unwrap();
            // Stale entries: already removed, or degree has since dropped.
            if removed[v] || degree[v] != min_d {
                buckets[min_d].pop();
                continue;
            }
            buckets[min_d].pop();
            break v;
        };
        removed[v] = true;
        order.push(v);
        for &w in &adj[v] {
            if !removed[w] {
                degree[w] -= 1;
                buckets[degree[w]].push(w);
                min_d = min_d.min(degree[w]);
            }
        }
    }
    order.reverse();

    let mut color = vec![usize::MAX; n];
    let mut used = vec![usize::MAX; n + 1]; // used[c] == v marks c taken at v
    for &v in &order {
        for &w in &adj[v] {
            if color[w] != usize::MAX && color[w] <= n {
                used[color[w]] = v;
            }
        }
        let mut c = 0;
        while used[c] == v {
            c += 1;
        }
        color[v] = c;
    }
    color
}

/// Color a fixed-point-free k-bounded multimap with at most 2k+1 colors:
/// no vertex shares a color with any element of its image or any vertex
/// whose image contains it.
pub fn discrete_color_multi(
    g: &FiniteMultiMap,
) -> Result<BTreeMap<u64, usize>, DiscreteError> {
    let (universe, adj) = conflict_graph(g);
    let colors = greedy_degeneracy_coloring(&adj);
    debug_assert!(is_proper(&adj, &colors));
    Ok(universe
        .into_iter()
        .zip(colors)
        .collect())
}

pub fn is_proper(adj: &[Vec<usize>], colors: &[usize]) -> bool {
    adj.iter()
        .enumerate()
        .all(|(v, nbrs)| nbrs.iter().all(|&w| colors[v] != colors[w]))
}

/// Validate a multimap coloring against the conflict condition.
pub fn validate_multi_coloring(
    g: &FiniteMultiMap,
    coloring: &BTreeMap<u64, usize>,
) -> bool {
    for (&v, img) in &g.images {
        let Some(&cv) = coloring.get(&v) else { return false };
        for &w in img {
            match coloring.get(&w) {
                Some(&cw) if cw != cv => {}
                _ => return false,
            }
        }
    }
    true
}

/// Color a fixed-point-free functional graph with at most 3 colors.
///
/// Every weakly connected component contains exactly one cycle with trees
/// hanging off it: cycles take 2 colors (3 when odd), tree vertices take
/// any color different from their successor's.
pub fn discrete_color_single(
    f: &BTreeMap<u64, u64>,
) -> Result<BTreeMap<u64, usize>, DiscreteError> {
    for (&v, &w) in f {
        if v == w {
            return Err(DiscreteError::Loop(v));
        }
    }
    let vertices: Vec<u64> = {
        let mut all: BTreeSet<u64> = f.keys().copied().collect();
        all.extend(f.values().copied());
        all.into_iter().collect()
    };
    let index: BTreeMap<u64, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let succ: Vec<Option<usize>> = vertices
        .iter()
        .map(|v| f.get(v).map(|w| index[w]))
        .collect();
    let n = vertices.len();
    let mut color: Vec<Option<usize>> = vec![None; n];

    // Locate cycles: walk successors until revisiting the current path or
    // hitting an already-resolved vertex.
    let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut v = start;
        loop {
            if state[v] == 1 {
                // Found a new cycle beginning at v.
                let pos = path.iter().position(|&u| u == v).unwrap();
                let cycle = &path[pos..];
                for (i, &u) in cycle.iter().enumerate() {
                    color[u] = Some(if i == cycle.len() - 1 && cycle.len() % 2 == 1 {
                        2
                    } else {
                        i % 2
                    });
                }
                break;
            }
            if state[v] == 2 {
                break;
            }
            state[v] = 1;
            path.push(v);
            match succ[v] {
                Some(w) => v = w,
                // Terminal vertex (no outgoing edge declared).
                None => break,
            }
        }
        for &u in &path {
            state[u] = 2;
        }
    }

    // Color remaining tree vertices against their successors, deepest
    // first: repeatedly sweep until stable (each sweep resolves vertices
    // whose successor is colored).
    let mut remaining: Vec<usize> = (0..n).filter(|&v| color[v].is_none()).collect();
    while !remaining.is_empty() {
        let mut next = Vec::new();
        for &v in &remaining {
            match succ[v] {
                Some(w) => {
                    if let Some(cw) = color[w] {
                        color[v] = Some(if cw == 0 { 1 } else { 0 });
                    } else {
                        next.push(v);
                    }
                }
                None => color[v] = Some(0),
            }
        }
        if next.len() == remaining.len() {
            unreachable!("functional graph sweep made no progress");
        }
        remaining = next;
    }

    Ok(vertices
        .into_iter()
        .zip(color.into_iter().map(|c| c.unwrap()))
        .collect())
}

pub fn validate_single_coloring(
    f: &BTreeMap<u64, u64>,
    coloring: &BTreeMap<u64, usize>,
) -> bool {
    f.iter().all(|(v, w)| {
        matches!((coloring.get(v), coloring.get(w)), (Some(a), Some(b)) if a != b)
    })
}

pub const DOUBLING_CAP: u32 = 20;

/// Exact minimum color count for the doubling map restricted to {1..N}.
///
/// Branch and bound with a greedy clique lower bound; N is capped because
/// the search is exponential in the worst case.
pub fn doubling_min_colors(n: u32) -> Result<u32, DiscreteError> {
    doubling_min_colors_capped(n, DOUBLING_CAP)
}

pub fn doubling_min_colors_capped(n: u32, cap: u32) -> Result<u32, DiscreteError> {
    if n < 2 {
        return Err(DiscreteError::TooSmall(n));
    }
    if n > cap {
        return Err(DiscreteError::CapExceeded { cap, got: n });
    }
    let count = n as usize;
    // Vertices 1..=N at indices 0..count; u conflicts v (u < v) iff v <= 2u.
    let mut adj = vec![vec![false; count]; count];
    for u in 1..=n as u64 {
        for v in (u + 1)..=(2 * u).min(n as u64) {
            adj[(u - 1) as usize][(v - 1) as usize] = true;
            adj[(v - 1) as usize][(u - 1) as usize] = true;
        }
    }

    // Greedy clique for the lower bound: the block {m..min(2m, N)} is a
    // clique for every m, so scan greedily from the densest end.
    let mut best_clique = 1usize;
    for m in 1..=n {
        let hi = (2 * m).min(n);
        best_clique = best_clique.max((hi - m + 1) as usize);
    }

    // Greedy coloring for the upper bound.
    let order: Vec<usize> = {
        let mut idx: Vec<usize> = (0..count).collect();
        idx.sort_by_key(|&v| std::cmp::Reverse(adj[v].iter().filter(|&&b| b).count()));
        idx
    };
    let mut greedy_colors = vec![usize::MAX; count];
    let mut greedy_max = 0;
    for &v in &order {
        let mut used = vec![false; count + 1];
        for w in 0..count {
            if adj[v][w] && greedy_colors[w] != usize::MAX {
                used[greedy_colors[w]] = true;
            }
        }
        let c = (0..).find(|&c| !used[c]).unwrap();
        greedy_colors[v] = c;
        greedy_max = greedy_max.max(c + 1);
    }

    let mut best = greedy_max;
    let lower = best_clique;
    if lower < best {
        // Branch and bound on the vertex order, pruning at the clique bound.
        let mut colors = vec![usize::MAX; count];
        fn bnb(
            order: &[usize],
            adj: &[Vec<bool>],
            colors: &mut Vec<usize>,
            pos: usize,
            used_count: usize,
            best: &mut usize,
            lower: usize,
        ) {
            if *best == lower {
                return;
            }
            if pos == order.len() {
                *best = (*best).min(used_count);
                return;
            }
            let v = order[pos];
            let mut used = vec![false; used_count + 1];
            for (w, &a) in adj[v].iter().enumerate() {
                if a && colors[w] != usize::MAX {
                    if colors[w] < used.len() {
                        used[colors[w]] = true;
                    }
                }
            }
            let limit = (used_count + 1).min(*best - 1);
            for c in 0..limit {
                if c < used.len() && used[c] {
                    continue;
                }
                colors[v] = c;
                let next_used = used_count.max(c + 1);
                if next_used < *best {
                    bnb(order, adj, colors, pos + 1, next_used, best, lower);
                }
                colors[v] = usize::MAX;
            }
        }
        bnb(&order, &adj, &mut colors, 0, 0, &mut best, lower);
    }
    Ok(best as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_map(len: u64) -> FiniteMultiMap {
        let images = (0..len - 1)
            .map(|i| (i, BTreeSet::from([i + 1])))
            .collect();
        FiniteMultiMap::new(images).unwrap()
    }

    /// Exhaustive chromatic number of a small symmetric conflict graph.
    fn brute_chromatic(adj: &[Vec<usize>]) -> usize {
        fn colorable(adj: &[Vec<usize>], k: usize) -> bool {
            let n = adj.len();
            let mut assignment = vec![0usize; n];
            loop {
                if adj
                    .iter()
                    .enumerate()
                    .all(|(v, ns)| ns.iter().all(|&w| assignment[v] != assignment[w]))
                {
                    return true;
                }
                // Next assignment in base k.
                let mut i = 0;
                while i < n {
                    assignment[i] += 1;
                    if assignment[i] < k {
                        break;
                    }
                    assignment[i] = 0;
                    i += 1;
                }
                if i == n {
                    return false;
                }
            }
        }
        (1..=adj.len())
            .find(|&k| colorable(adj, k))
            .unwrap_or(adj.len())
    }

    #[test]
    fn path_two_colors() {
        let g = path_map(10);
        let coloring = discrete_color_multi(&g).unwrap();
        assert!(validate_multi_coloring(&g, &coloring));
        let used: BTreeSet<usize> = coloring.values().copied().collect();
        assert_eq!(used.len(), 2);
    }

    #[test]
    fn z5_double_step_needs_five() {
        // f(i) = {i+1, i+2} mod 5: the symmetrized graph is K5.
        let images = (0u64..5)
            .map(|i| (i, BTreeSet::from([(i + 1) % 5, (i + 2) % 5])))
            .collect();
        let g = FiniteMultiMap::new(images).unwrap();
        let coloring = discrete_color_multi(&g).unwrap();
        assert!(validate_multi_coloring(&g, &coloring));
        let used: BTreeSet<usize> = coloring.values().copied().collect();
        assert!(used.len() <= 5);
        let (_, adj) = conflict_graph(&g);
        assert_eq!(brute_chromatic(&adj), 5);
        assert_eq!(used.len(), 5);
    }

    #[test]
    fn loop_rejected() {
        let images = BTreeMap::from([(0u64, BTreeSet::from([0u64]))]);
        assert!(matches!(
            FiniteMultiMap::new(images),
            Err(DiscreteError::Loop(0))
        ));
        let empty = BTreeMap::from([(0u64, BTreeSet::new())]);
        assert!(matches!(
            FiniteMultiMap::new(empty),
            Err(DiscreteError::EmptyImage(0))
        ));
    }

    #[test]
    fn single_even_cycle() {
        let f: BTreeMap<u64, u64> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        let coloring = discrete_color_single(&f).unwrap();
        assert!(validate_single_coloring(&f, &coloring));
        let used: BTreeSet<usize> = coloring.values().copied().collect();
        assert_eq!(used.len(), 2);
    }

    #[test]
    fn single_odd_cycle() {
        let f: BTreeMap<u64, u64> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let coloring = discrete_color_single(&f).unwrap();
        assert!(validate_single_coloring(&f, &coloring));
        let used: BTreeSet<usize> = coloring.values().copied().collect();
        assert_eq!(used.len(), 3);
        // Brute force: an odd cycle is not 2-colorable.
        let adj: Vec<Vec<usize>> = (0..5)
            .map(|i: usize| vec![(i + 1) % 5, (i + 4) % 5])
            .collect();
        assert_eq!(brute_chromatic(&adj), 3);
    }

    #[test]
    fn identity_rejected() {
        let f = BTreeMap::from([(3u64, 3u64)]);
        assert!(matches!(
            discrete_color_single(&f),
            Err(DiscreteError::Loop(3))
        ));
    }

    #[test]
    fn doubling_small_values() {
        assert_eq!(doubling_min_colors(2).unwrap(), 2);
        // {2,3,4} is a triangle with the pendant edge 1-2.
        assert_eq!(doubling_min_colors(4).unwrap(), 3);
        assert!(doubling_min_colors(1).is_err());
        assert!(doubling_min_colors(21).is_err());
    }

    #[test]
    fn doubling_monotone() {
        let mut prev = 0;
        for n in [2u32, 3, 4, 6, 8] {
            let v = doubling_min_colors(n).unwrap();
            assert!(v >= prev, "doubling_min_colors({n}) = {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn doubling_unbounded_growth() {
        let at4 = doubling_min_colors(4).unwrap();
        let at20 = doubling_min_colors(20).unwrap();
        assert!(at20 > at4, "{at20} <= {at4}");
        // Clique {10..20} pins the lower bound at 11.
        assert!(at20 >= 11);
    }

    #[test]
    fn parse_round_trip() {
        let g = parse_multimap("0: 1 2\n1: 2\n# comment\n\n2: 0\n").unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.image(0).unwrap(), &BTreeSet::from([1, 2]));
        assert!(parse_multimap("0 1 2").is_err());
        assert!(parse_multimap("0: 0").is_err());
    }
}
