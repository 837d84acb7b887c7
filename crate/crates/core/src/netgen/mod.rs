//! Loan network generation and degree statistics.

pub(crate) mod degree;
mod edgelist;
mod generators;
mod graph;

pub use degree::{DegreeDistribution, DegreeKind};
pub use edgelist::{read_edge_list, write_edge_list};
pub use generators::{gen_ba, gen_ba_directed, gen_cayley_tree, gen_er, GraphFamily};
pub use graph::{Edge, NetworkGraph};
