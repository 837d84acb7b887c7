use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::graph::{Edge, NetworkGraph};
use crate::error::{Error, Result};

/// Network families supported by the generators and the ensemble harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFamily {
    Er,
    Ba,
    Cayley,
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphFamily::Er => "er",
            GraphFamily::Ba => "ba",
            GraphFamily::Cayley => "cayley",
        })
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "er" => Ok(GraphFamily::Er),
            "ba" => Ok(GraphFamily::Ba),
            "cayley" => Ok(GraphFamily::Cayley),
            other => Err(Error::domain(format!("unknown network family `{other}`"))),
        }
    }
}

fn unit(lender: usize, borrower: usize) -> Edge {
    Edge {
        lender,
        borrower,
        weight: 1.0,
    }
}

/// Rooted Cayley tree truncated at `depth`: node 0 is the root, every node
/// closer than `depth` to the root has degree `k` and the outermost shell
/// consists of leaves. Nodes are numbered shell by shell.
pub fn gen_cayley_tree(k: usize, depth: usize) -> Result<NetworkGraph> {
    if k < 2 {
        return Err(Error::domain(format!("Cayley tree degree must be >= 2, got {k}")));
    }
    if depth < 1 {
        return Err(Error::domain("Cayley tree depth must be >= 1"));
    }
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut next_id = 1usize;
    for d in 0..depth {
        let children_per_node = if d == 0 { k } else { k - 1 };
        let mut next = Vec::with_capacity(frontier.len() * children_per_node);
        for &parent in &frontier {
            for _ in 0..children_per_node {
                edges.push(unit(parent, next_id));
                edges.push(unit(next_id, parent));
                next.push(next_id);
                next_id += 1;
            }
        }
        frontier = next;
    }
    Ok(NetworkGraph::from_sorted_unchecked(next_id, edges, false))
}

/// Erdős–Rényi graph with edge probability `z / (n - 1)`.
///
/// Undirected mode draws each unordered pair once and stores it as a
/// reciprocal loan pair; directed mode draws every ordered pair independently.
/// Pairs are visited with geometric skips, so the cost is linear in the
/// number of edges.
pub fn gen_er(n: usize, z: f64, seed: u64, directed: bool) -> Result<NetworkGraph> {
    if n < 2 {
        return Err(Error::domain(format!("ER graph needs n >= 2, got {n}")));
    }
    let max_z = (n - 1) as f64;
    if !(z.is_finite() && (0.0..=max_z).contains(&z)) {
        return Err(Error::domain(format!("ER mean degree must lie in [0, {max_z}], got {z}")));
    }
    let phi = z / max_z;
    let slots = if directed { n * (n - 1) } else { n * (n - 1) / 2 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut push_slot = |slot: usize| {
        let (a, b) = if directed {
            let i = slot / (n - 1);
            let j = slot % (n - 1);
            (i, if j >= i { j + 1 } else { j })
        } else {
            triangle_pair(slot)
        };
        edges.push(unit(a, b));
        if !directed {
            edges.push(unit(b, a));
        }
    };
    if phi >= 1.0 {
        (0..slots).for_each(&mut push_slot);
    } else if phi > 0.0 {
        let log_q = (1.0 - phi).ln();
        let mut slot: usize = 0;
        loop {
            let u: f64 = rng.random();
            let skip = ((1.0 - u).ln() / log_q).floor();
            if !skip.is_finite() || skip >= (slots - slot) as f64 {
                break;
            }
            slot += skip as usize;
            push_slot(slot);
            slot += 1;
            if slot >= slots {
                break;
            }
        }
    }
    Ok(NetworkGraph::from_sorted_unchecked(n, edges, directed))
}

/// Maps a linear index over unordered pairs `(a, b)`, `b < a`, to the pair.
fn triangle_pair(slot: usize) -> (usize, usize) {
    // row a holds pairs (a, 0..a); rows start at a(a-1)/2
    let mut a = ((1.0 + (1.0 + 8.0 * slot as f64).sqrt()) / 2.0).floor() as usize;
    while a * (a - 1) / 2 > slot {
        a -= 1;
    }
    while (a + 1) * a / 2 <= slot {
        a += 1;
    }
    (a, slot - a * (a - 1) / 2)
}

/// Undirected Barabási–Albert graph grown from a complete graph on `m` nodes.
pub fn gen_ba(n: usize, m: usize, seed: u64) -> Result<NetworkGraph> {
    gen_ba_directed(n, m, seed, 1.0)
}

/// Barabási–Albert growth with directed loans.
///
/// Each new node borrows from the `m` distinct targets it attaches to; the
/// reverse loan is added with probability `reciprocity`. With
/// `reciprocity == 1` the result is the ordinary undirected graph.
/// Attachment is proportional to the number of counterparties.
pub fn gen_ba_directed(n: usize, m: usize, seed: u64, reciprocity: f64) -> Result<NetworkGraph> {
    if m < 1 {
        return Err(Error::domain("BA attachment count m must be >= 1"));
    }
    if n <= m {
        return Err(Error::domain(format!("BA graph needs n > m, got n={n}, m={m}")));
    }
    if !(0.0..=1.0).contains(&reciprocity) {
        return Err(Error::domain(format!("reciprocity must lie in [0, 1], got {reciprocity}")));
    }
    let directed = reciprocity < 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(2 * m * n);
    // every node appears in `stubs` once per incident link
    let mut stubs: Vec<usize> = Vec::with_capacity(2 * m * n);
    for a in 0..m {
        for b in 0..a {
            edges.push(unit(a, b));
            edges.push(unit(b, a));
            stubs.push(a);
            stubs.push(b);
        }
    }
    let mut targets: Vec<usize> = Vec::with_capacity(m);
    for new in m..n {
        targets.clear();
        while targets.len() < m {
            let t = if stubs.is_empty() {
                rng.random_range(0..new)
            } else {
                stubs[rng.random_range(0..stubs.len())]
            };
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push(unit(t, new));
            if !directed || rng.random::<f64>() < reciprocity {
                edges.push(unit(new, t));
            }
            stubs.push(t);
            stubs.push(new);
        }
    }
    Ok(NetworkGraph::from_sorted_unchecked(n, edges, directed))
}
