//! Graph files, CSV artifacts and initial-data grammar.

mod graph_file;
mod init;
mod tables;

pub use graph_file::{emit_graph_spec, load_graph_spec, parse_graph_spec, GraphSpec};
pub use init::parse_init;
pub use tables::{
    format_offset, format_value, parse_grid_function, read_grid_function, to_csv_string, write_csv,
    CsvData,
};
