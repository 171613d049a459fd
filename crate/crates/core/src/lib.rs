//! Schema normalization on graph representations of thin schema categories.
//!
//! The pipeline reads a schema category (objects, arrows, declared FDs and
//! MVDs), computes its relevant closure, reduces it to the first or second
//! reduced representation, and lowers the result to relational, XML DTD,
//! property-graph or hybrid schemas. The [`verify`] module checks the
//! emitted schemas against BCNF, improved BCNF, 4NF and XML normal form.

pub mod chase;
pub mod emit;
pub mod error;
pub mod fd;
pub mod mvd;
pub mod pipeline;
pub mod reduce;
pub mod schema;
pub mod verify;

mod index;

pub use error::{Error, Result};
pub use schema::{
    graph_to_fds, names, parse_schema, serialize_schema, validate, Arrow, CategoryGraph,
    DependencySet, Fd, Mvd, NameSet, ObjectDecl, ObjectKind, SchemaDocument, ValidationReport,
};
