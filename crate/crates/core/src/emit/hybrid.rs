//! Splitting a graph into overlapping partitions, one per target model.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{Arrow, CategoryGraph, ObjectDecl};

/// Partition ids for one object: a single id or a list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Placement {
    One(String),
    Many(Vec<String>),
}

impl Placement {
    pub fn ids(&self) -> Vec<&str> {
        match self {
            Placement::One(id) => vec![id.as_str()],
            Placement::Many(ids) => ids.iter().map(String::as_str).collect(),
        }
    }
}

/// Object name to partition placement.
pub type Assignment = BTreeMap<String, Placement>;

pub fn parse_assignment(input: &str) -> Result<Assignment> {
    serde_json::from_str(input).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub id: String,
    pub objects: Vec<ObjectDecl>,
    pub arrows: Vec<Arrow>,
}

impl Partition {
    pub fn graph(&self, parent: &CategoryGraph) -> CategoryGraph {
        CategoryGraph {
            objects: self.objects.clone(),
            arrows: self.arrows.clone(),
            mvd_objects: parent
                .mvd_objects
                .iter()
                .filter(|o| self.objects.iter().any(|d| &d.name == *o))
                .cloned()
                .collect(),
        }
    }
}

pub fn partitions_to_json(parts: &[Partition]) -> String {
    let mut s = serde_json::to_string_pretty(&serde_json::json!({ "partitions": parts }))
        .expect("serializable");
    s.push('\n');
    s
}

/// Each arrow goes to every partition of its source, which then also
/// receives the arrow's target.
pub fn decompose_hybrid(g: &CategoryGraph, assignment: &Assignment) -> Result<Vec<Partition>> {
    for name in assignment.keys() {
        if !g.contains(name) {
            return Err(Error::UnknownObject(name.clone()));
        }
    }
    let mut members: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for o in &g.objects {
        let ids = assignment
            .get(&o.name)
            .map(Placement::ids)
            .unwrap_or_default();
        if ids.is_empty() {
            return Err(Error::Precondition(format!(
                "object {} is not assigned to any partition",
                o.name
            )));
        }
        for id in ids {
            members.entry(id.to_string()).or_default().insert(o.name.clone());
        }
    }
    let mut arrows: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, a) in g.arrows.iter().enumerate() {
        for id in assignment[&a.source].ids() {
            arrows.entry(id.to_string()).or_default().push(i);
            members.get_mut(id).unwrap().insert(a.target.clone());
        }
    }

    let parts: Vec<Partition> = members
        .iter()
        .map(|(id, objs)| Partition {
            id: id.clone(),
            objects: g
                .objects
                .iter()
                .filter(|o| objs.contains(&o.name))
                .cloned()
                .collect(),
            arrows: arrows
                .get(id)
                .map(|ix| ix.iter().map(|&i| g.arrows[i].clone()).collect())
                .unwrap_or_default(),
        })
        .collect();

    for a in &g.arrows {
        let placed = parts.iter().any(|p| {
            p.arrows.iter().any(|b| b.source == a.source && b.target == a.target)
                && p.objects.iter().any(|o| o.name == a.source)
                && p.objects.iter().any(|o| o.name == a.target)
        });
        if !placed {
            return Err(Error::Lossy { arrow: a.to_string() });
        }
    }
    Ok(parts)
}
