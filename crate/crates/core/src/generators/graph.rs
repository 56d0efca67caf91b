use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng::SeededRng;

/// A simple undirected graph on vertices `0..n` with a canonical edge list:
/// each edge stored as `(min, max)`, the list sorted, no loops or repeats.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInstance(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::InvalidInstance(format!("self-loop at {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidInstance(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Self {
            n,
            edges: set.into_iter().collect(),
        })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|v| (0..v).map(move |u| (u, v)));
        Self::new(n, edges).expect("complete graph is simple")
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list; an edge's 1-based position here is its index in
    /// the independent-set reduction.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// The common degree, if every vertex has the same degree.
    pub fn regular_degree(&self) -> Option<usize> {
        let deg = self.degrees();
        match deg.first() {
            Some(&d) if deg.iter().all(|&x| x == d) => Some(d),
            _ => None,
        }
    }

    /// Number of edges with both endpoints in `set`.
    pub fn internal_edges(&self, set: &[usize]) -> usize {
        let mut member = vec![false; self.n];
        for &v in set {
            member[v] = true;
        }
        self.edges.iter().filter(|&&(u, v)| member[u] && member[v]).count()
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        self.internal_edges(set) == 0
    }

    /// Erdos-Renyi `G(n, p)`.
    pub fn random_gnp(n: usize, p: f64, rng: &mut SeededRng) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return param(format!("edge probability must be in [0, 1], got {p}"));
        }
        let mut edges = Vec::new();
        for v in 0..n {
            for u in 0..v {
                if rng.bernoulli(p) {
                    edges.push((u, v));
                }
            }
        }
        Self::new(n, edges)
    }

    /// Uniform-ish random `d`-regular graph by the pairing model, rejecting
    /// pairings with loops or repeated edges.
    pub fn random_regular(n: usize, d: usize, rng: &mut SeededRng) -> Result<Self> {
        if d >= n.max(1) || (n * d) % 2 == 1 {
            return param(format!("no simple {d}-regular graph on {n} vertices"));
        }
        const ATTEMPTS: usize = 10_000;
        let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        'attempt: for _ in 0..ATTEMPTS {
            // Fisher-Yates shuffle, then pair consecutive points.
            for i in (1..points.len()).rev() {
                let j = rng.int_in(0, i as u64) as usize;
                points.swap(i, j);
            }
            let mut seen = BTreeSet::new();
            for pair in points.chunks(2) {
                let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                if u == v || !seen.insert((u, v)) {
                    continue 'attempt;
                }
            }
            return Self::new(n, seen);
        }
        Err(Error::TooLarge(format!(
            "no simple pairing found for n={n}, d={d} in {ATTEMPTS} attempts"
        )))
    }

    /// Every labelled graph on `n` vertices (`2^(n(n-1)/2)` of them).
    pub fn all_labelled(n: usize) -> Result<impl Iterator<Item = Graph>> {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|v| (0..v).map(move |u| (u, v))).collect();
        if pairs.len() > 24 {
            return Err(Error::TooLarge(format!("{} labelled graphs on {n} vertices", 1u128 << pairs.len())));
        }
        Ok((0u64..1 << pairs.len()).map(move |mask| Graph {
            n,
            edges: {
                let mut e: Vec<_> = (0..pairs.len()).filter(|b| mask >> b & 1 == 1).map(|b| pairs[b]).collect();
                e.sort_unstable();
                e
            },
        }))
    }

    /// Every labelled regular graph with no isolated vertex and exactly `m`
    /// edges.
    pub fn regular_with_edges(m: usize) -> Vec<Graph> {
        let mut out = Vec::new();
        if m == 0 {
            return out;
        }
        for d in 1..=2 * m {
            if !(2 * m).is_multiple_of(d) {
                continue;
            }
            let n = 2 * m / d;
            if d >= n {
                continue;
            }
            let mut deg = vec![0; n];
            let mut edges = Vec::with_capacity(m);
            extend_regular(n, d, 0, &mut deg, &mut edges, &mut out);
        }
        out
    }
}

// Fills the lowest vertex whose degree is short, always pairing it with a
// larger vertex in increasing order, so each edge set is produced once.
fn extend_regular(
    n: usize,
    d: usize,
    from: usize,
    deg: &mut [usize],
    edges: &mut Vec<(usize, usize)>,
    out: &mut Vec<Graph>,
) {
    let Some(u) = (from..n).find(|&v| deg[v] < d) else {
        let mut e = edges.clone();
        e.sort_unstable();
        out.push(Graph { n, edges: e });
        return;
    };
    let lo = edges.iter().rev().find(|&&(a, _)| a == u).map_or(u + 1, |&(_, b)| b + 1);
    for v in lo..n {
        if deg[v] < d {
            deg[u] += 1;
            deg[v] += 1;
            edges.push((u, v));
            extend_regular(n, d, u, deg, edges, out);
            edges.pop();
            deg[u] -= 1;
            deg[v] -= 1;
        }
    }
}
