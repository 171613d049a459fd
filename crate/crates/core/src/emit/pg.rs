//! Category graph to property-graph schema `(V, E, T, P)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::schema::{CategoryGraph, NameSet, ObjectKind};

pub const SK: &str = "SK";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertyGraphSchema {
    /// Vertex labels in object order.
    pub vertices: Vec<String>,
    /// Undirected edges, each stored once in the orientation first met.
    pub edges: Vec<(String, String)>,
    pub attributes: NameSet,
    pub properties: BTreeMap<String, NameSet>,
}

#[derive(Serialize)]
struct VertexJson<'a> {
    label: &'a str,
    properties: Vec<&'a str>,
}

#[derive(Serialize)]
struct GraphJson<'a> {
    vertices: Vec<VertexJson<'a>>,
    edges: Vec<[&'a str; 2]>,
}

impl PropertyGraphSchema {
    pub fn vertex_set(&self) -> NameSet {
        self.vertices.iter().cloned().collect()
    }

    /// Edges with endpoints in lexicographic order.
    pub fn edge_set(&self) -> std::collections::BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|(a, b)| if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = GraphJson {
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexJson {
                    label: v,
                    properties: self
                        .properties
                        .get(v)
                        .map(|p| p.iter().map(String::as_str).collect())
                        .unwrap_or_default(),
                })
                .collect(),
            edges: self.edges.iter().map(|(a, b)| [a.as_str(), b.as_str()]).collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }

    fn add_vertex(&mut self, label: &str) {
        if !self.vertices.iter().any(|v| v == label) {
            self.vertices.push(label.to_string());
            self.properties.entry(label.to_string()).or_default();
        }
    }

    fn add_property(&mut self, label: &str, prop: &str) {
        self.attributes.insert(prop.to_string());
        self.properties
            .entry(label.to_string())
            .or_default()
            .insert(prop.to_string());
    }
}

/// Objects with outgoing arrows become vertices with a surrogate key;
/// attribute neighbours without outgoing arrows become properties and every
/// other neighbour is joined by an edge.
pub fn emit_property_graph(g: &CategoryGraph) -> PropertyGraphSchema {
    let mut pg = PropertyGraphSchema::default();
    for o in &g.objects {
        if !g.has_outgoing(&o.name) {
            continue;
        }
        pg.add_vertex(&o.name);
        pg.add_property(&o.name, SK);
        for n in g.out_neighbors(&o.name) {
            let kind = g.kind(n).expect("validated graph");
            if kind == ObjectKind::Attribute && !g.has_outgoing(n) {
                pg.add_property(&o.name, n);
                continue;
            }
            if !g.has_outgoing(n) {
                // An entity or relationship without arrows still needs a
                // vertex for the edge to land on.
                pg.add_vertex(n);
                pg.add_property(n, SK);
            }
            let known = pg
                .edges
                .iter()
                .any(|(a, b)| (a == &o.name && b == n) || (a == n && b == &o.name));
            if !known {
                pg.edges.push((o.name.clone(), n.to_string()));
            }
        }
    }
    pg
}
