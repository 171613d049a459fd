//! Category graph to relational schema.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::ident;
use crate::fd::arrow_is_redundant_fast;
use crate::schema::{CategoryGraph, NameSet, ObjectKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ColumnType {
    Integer,
    Boolean,
    Text,
}

impl ColumnType {
    fn sql(self) -> &'static str {
        match self {
            ColumnType::Integer => "INTEGER",
            ColumnType::Boolean => "BOOLEAN",
            ColumnType::Text => "TEXT",
        }
    }

    fn for_domain(tag: Option<&str>) -> Self {
        match tag.map(|t| t.to_ascii_lowercase()).as_deref() {
            Some("integer" | "int" | "bigint" | "smallint") => ColumnType::Integer,
            Some("boolean" | "bool") => ColumnType::Boolean,
            _ => ColumnType::Text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForeignKey {
    pub column: String,
    /// Name of the referenced relation.
    pub references: String,
    /// Object whose surrogate key the column holds.
    #[serde(skip)]
    pub object: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationDecl {
    pub name: String,
    /// Object the relation was created for.
    pub source: String,
    pub sort: Vec<String>,
    pub has_surrogate: bool,
    pub candidate_keys: Vec<NameSet>,
    pub foreign_keys: Vec<ForeignKey>,
    /// Bidirectional neighbours folded into this relation.
    pub merged: Vec<String>,
    pub column_types: BTreeMap<String, ColumnType>,
}

impl RelationDecl {
    pub fn sort_set(&self) -> NameSet {
        self.sort.iter().cloned().collect()
    }

    pub fn primary_key(&self) -> Option<&NameSet> {
        self.candidate_keys.first()
    }

    fn push_column(&mut self, column: &str, ty: ColumnType) {
        if !self.sort.iter().any(|c| c == column) {
            self.sort.push(column.to_string());
            self.column_types.insert(column.to_string(), ty);
        }
    }

    fn push_key(&mut self, key: NameSet) {
        if !key.is_empty() && !self.candidate_keys.contains(&key) {
            self.candidate_keys.push(key);
        }
    }

    fn owns(&self, object: &str) -> bool {
        self.source == object || self.merged.iter().any(|m| m == object)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RelationalSchema {
    pub relations: Vec<RelationDecl>,
    pub warnings: Vec<String>,
}

impl RelationalSchema {
    pub fn relation(&self, name: &str) -> Option<&RelationDecl> {
        self.relations.iter().find(|r| r.name == name)
    }

    /// (sort, candidate keys) pairs, for comparisons that ignore naming and
    /// column order.
    pub fn shape(&self) -> BTreeSet<(NameSet, BTreeSet<NameSet>)> {
        self.relations
            .iter()
            .map(|r| (r.sort_set(), r.candidate_keys.iter().cloned().collect()))
            .collect()
    }

    pub fn to_sql(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.relations.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let mut lines: Vec<String> = r
                .sort
                .iter()
                .map(|c| format!("    {} {} NOT NULL", ident(c), r.column_types[c].sql()))
                .collect();
            let ordered = |key: &NameSet| -> String {
                r.sort
                    .iter()
                    .filter(|c| key.contains(*c))
                    .map(|c| ident(c))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            if let Some(pk) = r.primary_key() {
                lines.push(format!("    PRIMARY KEY ({})", ordered(pk)));
            }
            for key in r.candidate_keys.iter().skip(1) {
                lines.push(format!("    UNIQUE ({})", ordered(key)));
            }
            for fk in &r.foreign_keys {
                lines.push(format!(
                    "    FOREIGN KEY ({}) REFERENCES {} ({})",
                    ident(&fk.column),
                    ident(&fk.references),
                    ident(&fk.object)
                ));
            }
            let _ = writeln!(out, "CREATE TABLE {} (\n{}\n);", ident(&r.name), lines.join(",\n"));
        }
        out
    }
}

struct Builder<'a> {
    g: &'a CategoryGraph,
    processed: HashSet<String>,
}

impl Builder<'_> {
    fn column_type(&self, object: &str) -> ColumnType {
        match self.g.object(object) {
            Some(o) if o.kind.has_surrogate() => ColumnType::Integer,
            Some(o) => ColumnType::for_domain(o.domain_tag.as_deref()),
            None => ColumnType::Text,
        }
    }

    fn add_neighbours(&mut self, r: &mut RelationDecl, o: &str) {
        for n in self.g.out_neighbors(o) {
            if r.owns(n) {
                continue;
            }
            r.push_column(n, self.column_type(n));
            let bidirectional = self.g.has_arrow(n, o);
            if bidirectional && !self.processed.contains(n) {
                self.processed.insert(n.to_string());
                r.merged.push(n.to_string());
                r.push_key(std::iter::once(n.to_string()).collect());
                self.add_neighbours(r, n);
            } else if self.g.kind(n).is_some_and(ObjectKind::has_surrogate) {
                r.foreign_keys.push(ForeignKey {
                    column: n.to_string(),
                    references: n.to_string(),
                    object: n.to_string(),
                });
            }
        }
    }
}

/// Maps a reduced graph to relations: one per unprocessed object with
/// outgoing arrows, followed by the clean-up of unreferenced surrogate keys
/// and subsumed relations.
pub fn emit_relational(g: &CategoryGraph) -> RelationalSchema {
    let mut b = Builder {
        g,
        processed: HashSet::new(),
    };
    let mut relations = Vec::new();
    for o in &g.objects {
        if b.processed.contains(&o.name) || !g.has_outgoing(&o.name) {
            continue;
        }
        b.processed.insert(o.name.clone());
        let mut r = RelationDecl {
            name: o.name.clone(),
            source: o.name.clone(),
            sort: vec![],
            has_surrogate: o.kind.has_surrogate(),
            candidate_keys: vec![],
            foreign_keys: vec![],
            merged: vec![],
            column_types: BTreeMap::new(),
        };
        // For entity and relationship objects this column is the surrogate key.
        r.push_column(&o.name, b.column_type(&o.name));
        r.push_key(std::iter::once(o.name.clone()).collect());
        b.add_neighbours(&mut r, &o.name);
        relations.push(r);
    }

    let mut schema = RelationalSchema {
        relations,
        warnings: vec![],
    };
    clean(g, &mut schema.relations);
    resolve_references(&mut schema.relations);

    let redundant: Vec<String> = g
        .arrows
        .iter()
        .filter(|a| arrow_is_redundant_fast(g, &a.source, &a.target))
        .map(|a| a.to_string())
        .collect();
    if !redundant.is_empty() {
        schema.warnings.push(format!(
            "input graph is not reduced: redundant arrows {}",
            redundant.join(", ")
        ));
    }
    schema
}

fn referenced(relations: &[RelationDecl], me: usize, object: &str) -> bool {
    relations
        .iter()
        .enumerate()
        .any(|(i, r)| i != me && r.foreign_keys.iter().any(|fk| fk.object == object))
}

fn clean(g: &CategoryGraph, relations: &mut Vec<RelationDecl>) {
    loop {
        let mut changed = false;

        for i in 0..relations.len() {
            let owned: Vec<String> = std::iter::once(relations[i].source.clone())
                .chain(relations[i].merged.iter().cloned())
                .filter(|o| g.kind(o).is_some_and(ObjectKind::has_surrogate))
                .filter(|o| relations[i].sort.contains(o))
                .collect();
            for o in owned {
                if referenced(relations, i, &o) {
                    continue;
                }
                let r = &mut relations[i];
                r.sort.retain(|c| c != &o);
                r.column_types.remove(&o);
                r.candidate_keys.retain(|k| !k.contains(&o));
                r.foreign_keys.retain(|fk| fk.column != o);
                if o == r.source {
                    r.has_surrogate = false;
                }
                if g.kind(&o) == Some(ObjectKind::Relationship) {
                    let pi: NameSet = g
                        .projection_targets(&o)
                        .into_iter()
                        .filter(|c| r.sort.contains(c))
                        .collect();
                    if !r.candidate_keys.iter().any(|k| k.is_subset(&pi)) {
                        r.push_key(pi);
                    }
                }
                if r.candidate_keys.is_empty() {
                    let all = r.sort_set();
                    r.push_key(all);
                }
                changed = true;
            }
        }

        let mut drop = None;
        'outer: for i in 0..relations.len() {
            let si = relations[i].sort_set();
            for j in 0..relations.len() {
                if i == j {
                    continue;
                }
                let sj = relations[j].sort_set();
                if si.is_subset(&sj) && (si != sj || j < i) {
                    drop = Some((i, j));
                    break 'outer;
                }
            }
        }
        if let Some((i, j)) = drop {
            let gone = relations.remove(i);
            let j = if j > i { j - 1 } else { j };
            let target = &mut relations[j];
            target.merged.push(gone.source.clone());
            target.merged.extend(gone.merged);
            changed = true;
        }

        if !changed {
            return;
        }
    }
}

fn resolve_references(relations: &mut [RelationDecl]) {
    let owner: BTreeMap<String, String> = relations
        .iter()
        .flat_map(|r| {
            std::iter::once(r.source.clone())
                .chain(r.merged.iter().cloned())
                .map(move |o| (o, r.name.clone()))
        })
        .collect();
    for r in relations.iter_mut() {
        for fk in r.foreign_keys.iter_mut() {
            if let Some(name) = owner.get(&fk.object) {
                fk.references = name.clone();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{names, ObjectDecl};

    fn fd_samplec() -> CategoryGraph {
        let mut g = CategoryGraph::new();
        g.add_object(ObjectDecl::relationship("D"));
        for n in ["E", "A", "B", "C"] {
            g.add_object(ObjectDecl::attribute(n));
        }
        g.add_arrow("D", "E", true);
        g.add_arrow("D", "A", true);
        g.add_arrow("A", "B", false);
        g.add_arrow("B", "C", false);
        g
    }

    fn shape(items: &[(&[&str], &[&[&str]])]) -> BTreeSet<(NameSet, BTreeSet<NameSet>)> {
        items
            .iter()
            .map(|(s, ks)| {
                (
                    names(s.iter().copied()),
                    ks.iter().map(|k| names(k.iter().copied())).collect(),
                )
            })
            .collect()
    }

    #[test]
    fn fd_sample_relations() {
        let s = emit_relational(&fd_samplec());
        assert_eq!(
            s.shape(),
            shape(&[
                (&["A", "E"], &[&["A", "E"]]),
                (&["A", "B"], &[&["A"]]),
                (&["B", "C"], &[&["B"]]),
            ])
        );
        assert!(s.warnings.is_empty());
        assert!(!s.relation("D").unwrap().has_surrogate);
    }

    #[test]
    fn empty_schema_for_lonely_entity() {
        let mut g = CategoryGraph::new();
        g.add_object(ObjectDecl::entity("E"));
        assert!(emit_relational(&g).relations.is_empty());
    }

    #[test]
    fn referenced_surrogate_survives() {
        let mut g = CategoryGraph::new();
        g.add_object(ObjectDecl::entity("Customer"));
        g.add_object(ObjectDecl::attribute("Name"));
        g.add_object(ObjectDecl::entity("Order"));
        g.add_object(ObjectDecl::attribute("Total").clone());
        g.add_arrow("Customer", "Name", false);
        g.add_arrow("Order", "Total", false);
        g.add_arrow("Order", "Customer", false);
        let s = emit_relational(&g);
        let c = s.relation("Customer").unwrap();
        assert!(c.has_surrogate);
        assert_eq!(c.sort, vec!["Customer", "Name"]);
        let o = s.relation("Order").unwrap();
        assert!(!o.has_surrogate);
        assert_eq!(o.foreign_keys[0].references, "Customer");
        let sql = s.to_sql();
        assert!(sql.contains("FOREIGN KEY (Customer) REFERENCES Customer (Customer)"), "{sql}");
        assert!(sql.contains("Customer INTEGER NOT NULL"));
    }

    #[test]
    fn bidirectional_neighbour_is_merged() {
        let mut g = CategoryGraph::new();
        for n in ["A", "B", "C"] {
            g.add_object(ObjectDecl::attribute(n));
        }
        g.add_arrow("A", "B", false);
        g.add_arrow("B", "A", false);
        g.add_arrow("B", "C", false);
        let s = emit_relational(&g);
        assert_eq!(s.relations.len(), 1);
        let r = &s.relations[0];
        assert_eq!(r.sort, vec!["A", "B", "C"]);
        assert_eq!(r.candidate_keys, vec![names(["A"]), names(["B"])]);
    }

    #[test]
    fn unreduced_input_is_flagged() {
        let mut g = fd_samplec();
        g.add_arrow("A", "C", false);
        let s = emit_relational(&g);
        assert_eq!(s.warnings.len(), 1);
    }
}
