use std::collections::HashSet;

use crate::error::{Error, Result};

/// A loan of `weight` currency units from `lender` to `borrower`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub lender: usize,
    pub borrower: usize,
    pub weight: f64,
}

/// Weighted directed loan graph.
///
/// Undirected networks are stored as reciprocal pairs of equal weight, so
/// every bank lends to and borrows from each of its neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    node_count: usize,
    edges: Vec<Edge>,
    directed: bool,
}

impl NetworkGraph {
    /// Builds a graph after checking all structural invariants.
    pub fn from_edges(node_count: usize, mut edges: Vec<Edge>, directed: bool) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::domain("graph must have at least one node"));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.lender >= node_count || e.borrower >= node_count {
                return Err(Error::domain(format!(
                    "edge {} -> {} references a node outside 0..{node_count}",
                    e.lender, e.borrower
                )));
            }
            if e.lender == e.borrower {
                return Err(Error::domain(format!("self-loop at node {}", e.lender)));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::domain(format!(
                    "edge {} -> {} has non-positive weight {}",
                    e.lender, e.borrower, e.weight
                )));
            }
            if !seen.insert((e.lender, e.borrower)) {
                return Err(Error::domain(format!(
                    "duplicate loan {} -> {}",
                    e.lender, e.borrower
                )));
            }
        }
        edges.sort_by_key(|e| (e.lender, e.borrower));
        if !directed {
            for e in &edges {
                let back = edges
                    .binary_search_by_key(&(e.borrower, e.lender), |x| (x.lender, x.borrower))
                    .ok()
                    .map(|i| edges[i].weight);
                if back != Some(e.weight) {
                    return Err(Error::domain(format!(
                        "undirected graph lacks reciprocal loan {} -> {} of weight {}",
                        e.borrower, e.lender, e.weight
                    )));
                }
            }
        }
        Ok(Self {
            node_count,
            edges,
            directed,
        })
    }

    /// Unit-weight undirected graph from a list of unordered pairs.
    pub fn undirected_unit(node_count: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let edges = pairs
            .iter()
            .flat_map(|&(a, b)| {
                [
                    Edge { lender: a, borrower: b, weight: 1.0 },
                    Edge { lender: b, borrower: a, weight: 1.0 },
                ]
            })
            .collect();
        Self::from_edges(node_count, edges, false)
    }

    /// Trusted constructor for generators that produce valid, sorted edges.
    pub(crate) fn from_sorted_unchecked(node_count: usize, mut edges: Vec<Edge>, directed: bool) -> Self {
        edges.sort_by_key(|e| (e.lender, e.borrower));
        debug_assert!(edges.windows(2).all(|w| (w[0].lender, w[0].borrower) != (w[1].lender, w[1].borrower)));
        Self {
            node_count,
            edges,
            directed,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Loans sorted by `(lender, borrower)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Number of loans, counting each reciprocal pair twice.
    pub fn loan_count(&self) -> usize {
        self.edges.len()
    }

    /// Total interbank borrowing `b_i` of every bank.
    pub fn borrowed(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.node_count];
        for e in &self.edges {
            b[e.borrower] += e.weight;
        }
        b
    }

    /// Total interbank lending `l_i` of every bank.
    pub fn lent(&self) -> Vec<f64> {
        let mut l = vec![0.0; self.node_count];
        for e in &self.edges {
            l[e.lender] += e.weight;
        }
        l
    }

    /// Number of distinct counterparties of every bank. For undirected graphs
    /// this is the ordinary degree.
    pub fn degrees(&self) -> Vec<usize> {
        if !self.directed {
            let mut k = vec![0; self.node_count];
            for e in &self.edges {
                k[e.lender] += 1;
            }
            return k;
        }
        let mut neigh: Vec<HashSet<usize>> = vec![HashSet::new(); self.node_count];
        for e in &self.edges {
            neigh[e.lender].insert(e.borrower);
            neigh[e.borrower].insert(e.lender);
        }
        neigh.iter().map(HashSet::len).collect()
    }

    /// Distinct counterparties of each bank, sorted.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut neigh = vec![Vec::new(); self.node_count];
        for e in &self.edges {
            neigh[e.lender].push(e.borrower);
            neigh[e.borrower].push(e.lender);
        }
        for n in &mut neigh {
            n.sort_unstable();
            n.dedup();
        }
        neigh
    }

    /// Whether the lending relation is symmetric with equal weights.
    pub fn is_reciprocal(&self) -> bool {
        self.edges.iter().all(|e| {
            self.edges
                .binary_search_by_key(&(e.borrower, e.lender), |x| (x.lender, x.borrower))
                .map(|i| self.edges[i].weight == e.weight)
                .unwrap_or(false)
        })
    }

    /// Hop distance from `source` to every node, `None` when unreachable.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let neigh = self.neighbors();
        let mut dist = vec![None; self.node_count];
        let mut queue = std::collections::VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &neigh[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}
