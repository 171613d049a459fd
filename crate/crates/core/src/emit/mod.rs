//! Lowering of reduced graphs to relational, XML DTD, property-graph and
//! hybrid schemas.

pub mod dtd;
pub mod hybrid;
pub mod pg;
pub mod relational;

pub use dtd::{emit_dtd, DtdSchema, Factor};
pub use hybrid::{decompose_hybrid, parse_assignment, partitions_to_json, Assignment, Partition, Placement};
pub use pg::{emit_property_graph, PropertyGraphSchema};
pub use relational::{emit_relational, ColumnType, ForeignKey, RelationDecl, RelationalSchema};

/// Wraps an identifier in double quotes unless it is a plain word.
pub(crate) fn ident(name: &str) -> String {
    let plain = name
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}
