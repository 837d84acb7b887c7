//! Plain-text edge lists: a header `#nodes N directed {0,1}` followed by one
//! `lender borrower weight` triple per line. Blank lines and further `#`
//! comment lines are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::graph::{Edge, NetworkGraph};
use crate::error::{Error, Result};

/// Serialises a graph; the output is byte-identical for equal graphs.
pub fn write_edge_list(graph: &NetworkGraph) -> String {
    let mut out = String::with_capacity(16 * graph.loan_count() + 32);
    let _ = writeln!(
        out,
        "#nodes {} directed {}",
        graph.node_count(),
        u8::from(graph.is_directed())
    );
    for e in graph.edges() {
        let _ = writeln!(out, "{} {} {}", e.lender, e.borrower, e.weight);
    }
    out
}

pub fn read_edge_list(path: &Path) -> Result<NetworkGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}

pub(crate) fn parse_edge_list(text: &str, path: &Path) -> Result<NetworkGraph> {
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut header: Option<(usize, bool)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if header.is_none() && fields.first() == Some(&"nodes") {
                if fields.len() != 4 || fields[2] != "directed" {
                    return Err(perr(lineno, "expected `#nodes N directed {0,1}`".into()));
                }
                let n = fields[1]
                    .parse::<usize>()
                    .map_err(|e| perr(lineno, format!("bad node count: {e}")))?;
                let directed = match fields[3] {
                    "0" => false,
                    "1" => true,
                    other => return Err(perr(lineno, format!("directed flag must be 0 or 1, got `{other}`"))),
                };
                header = Some((n, directed));
            }
            continue;
        }
        if header.is_none() {
            return Err(perr(lineno, "edge before `#nodes` header".into()));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(perr(lineno, format!("expected `lender borrower weight`, got {} fields", fields.len())));
        }
        let lender = fields[0]
            .parse::<usize>()
            .map_err(|e| perr(lineno, format!("bad lender id: {e}")))?;
        let borrower = fields[1]
            .parse::<usize>()
            .map_err(|e| perr(lineno, format!("bad borrower id: {e}")))?;
        let weight = fields[2]
            .parse::<f64>()
            .map_err(|e| perr(lineno, format!("bad weight: {e}")))?;
        edges.push(Edge {
            lender,
            borrower,
            weight,
        });
    }
    let (n, directed) = header.ok_or_else(|| perr(0, "missing `#nodes` header".into()))?;
    NetworkGraph::from_edges(n, edges, directed).map_err(|e| match e {
        Error::Domain(msg) => perr(0, msg),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{gen_ba_directed, gen_er};
    use proptest::prelude::*;

    #[test]
    fn header_and_lines() {
        let g = NetworkGraph::undirected_unit(3, &[(0, 1), (1, 2)]).unwrap();
        let text = write_edge_list(&g);
        assert_eq!(text, "#nodes 3 directed 0\n0 1 1\n1 0 1\n1 2 1\n2 1 1\n");
    }

    #[test]
    fn rejects_malformed_input() {
        let p = Path::new("x");
        assert!(parse_edge_list("0 1 1\n", p).is_err());
        assert!(parse_edge_list("#nodes 2 directed 0\n0 1 1\n", p).is_err());
        assert!(parse_edge_list("#nodes 2 directed 1\n0 1\n", p).is_err());
        assert!(parse_edge_list("#nodes 2 directed 2\n", p).is_err());
        assert!(parse_edge_list("#nodes 2 directed 1\n0 5 1\n", p).is_err());
        let ok = parse_edge_list("#nodes 2 directed 1\n# comment\n\n0 1 2.5\n", p).unwrap();
        assert_eq!(ok.edges()[0].weight, 2.5);
    }

    proptest! {
        #[test]
        fn round_trip(n in 2usize..60, z in 0.0f64..5.0, seed in any::<u64>(), directed in any::<bool>()) {
            let z = z.min((n - 1) as f64);
            let g = gen_er(n, z, seed, directed).unwrap();
            let text = write_edge_list(&g);
            let back = parse_edge_list(&text, Path::new("mem")).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(write_edge_list(&back), text);
        }

        #[test]
        fn directed_ba_round_trip(seed in any::<u64>(), rho in 0.0f64..1.0) {
            let g = gen_ba_directed(40, 2, seed, rho).unwrap();
            let back = parse_edge_list(&write_edge_list(&g), Path::new("mem")).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
