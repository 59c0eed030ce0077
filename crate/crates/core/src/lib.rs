//! Exact solvers for stack and queue layouts of graphs.
//!
//! * [`oracle`]: exhaustive reference search.
//! * [`cutset`]: dynamic program over oriented cut-sets for bounded page width.
//! * [`queue1`]: one-page queue layouts via labelings and level planarity.
//! * [`kernel`]: vertex-integrity kernelization with layout lifting.

pub mod graph;
pub mod layout;
pub mod oracle;
pub mod io;
pub mod generate;
pub mod cutset;
pub mod queue1;
pub mod kernel;
pub mod svg;
pub mod run;

pub use graph::{Cut, EdgeId, Graph, GraphError, VertexId};
pub use layout::{
    edge_count_bound, page_upper_bound, page_width, spanning_edges, validate_layout, BoundVerdict,
    IndexedLayout, LayoutError, LayoutKind, LinearLayout, ValidationReport,
};
