//! The category-graph data model: typed objects, named arrows and the
//! declared functional / multivalued dependencies that accompany them.
//!
//! A schema is stored as a thin directed graph. Identity and composed arrows
//! are never materialized here; they are recovered by the closure routines in
//! [`crate::fd`] and [`crate::mvd`].

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of object names, always iterated in lexicographic order.
pub type NameSet = BTreeSet<String>;

/// Builds a [`NameSet`] from anything yielding string-likes.
pub fn names<I, S>(items: I) -> NameSet
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    items.into_iter().map(Into::into).collect()
}

pub(crate) fn fmt_set(set: &NameSet) -> String {
    set.iter().cloned().collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Entity,
    Relationship,
    Attribute,
}

impl ObjectKind {
    /// Entity and relationship objects carry a surrogate key.
    pub fn has_surrogate(self) -> bool {
        matches!(self, ObjectKind::Entity | ObjectKind::Relationship)
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDecl {
    pub name: String,
    pub kind: ObjectKind,
    #[serde(rename = "limit", default, skip_serializing_if = "is_false")]
    pub is_limit: bool,
    #[serde(rename = "domain", default, skip_serializing_if = "Option::is_none")]
    pub domain_tag: Option<String>,
    /// Set on objects materialized by the closure for a composite left-hand side.
    #[serde(skip)]
    pub composite: bool,
}

impl ObjectDecl {
    pub fn new(name: impl Into<String>, kind: ObjectKind) -> Self {
        ObjectDecl {
            name: name.into(),
            kind,
            is_limit: false,
            domain_tag: None,
            composite: false,
        }
    }

    pub fn entity(name: impl Into<String>) -> Self {
        Self::new(name, ObjectKind::Entity)
    }

    pub fn relationship(name: impl Into<String>) -> Self {
        Self::new(name, ObjectKind::Relationship)
    }

    pub fn attribute(name: impl Into<String>) -> Self {
        Self::new(name, ObjectKind::Attribute)
    }

    pub fn limit(mut self) -> Self {
        self.is_limit = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arrow {
    pub name: String,
    pub source: String,
    pub target: String,
    #[serde(rename = "projection", default)]
    pub is_projection: bool,
}

impl Arrow {
    pub fn new(name: impl Into<String>, source: impl Into<String>, target: impl Into<String>) -> Self {
        Arrow {
            name: name.into(),
            source: source.into(),
            target: target.into(),
            is_projection: false,
        }
    }

    pub fn projection(name: impl Into<String>, source: impl Into<String>, target: impl Into<String>) -> Self {
        Arrow {
            is_projection: true,
            ..Arrow::new(name, source, target)
        }
    }
}

impl fmt::Display for Arrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.source, self.target)
    }
}

/// Functional dependency `lhs -> rhs` over object names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fd {
    pub lhs: NameSet,
    pub rhs: NameSet,
}

impl Fd {
    pub fn new<L, R, S1, S2>(lhs: L, rhs: R) -> Self
    where
        L: IntoIterator<Item = S1>,
        R: IntoIterator<Item = S2>,
        S1: Into<String>,
        S2: Into<String>,
    {
        Fd {
            lhs: names(lhs),
            rhs: names(rhs),
        }
    }

    /// Splits the right-hand side into singletons.
    pub fn canonical(&self) -> Vec<Fd> {
        self.rhs
            .iter()
            .map(|a| Fd {
                lhs: self.lhs.clone(),
                rhs: std::iter::once(a.clone()).collect(),
            })
            .collect()
    }
}

impl fmt::Display for Fd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", fmt_set(&self.lhs), fmt_set(&self.rhs))
    }
}

/// Multivalued dependency `lhs ->>_context rhs`; the context names the
/// relationship object whose projection set acts as the universe.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mvd {
    pub lhs: NameSet,
    pub rhs: NameSet,
    pub context: String,
}

impl Mvd {
    pub fn new<L, R, S1, S2>(lhs: L, rhs: R, context: impl Into<String>) -> Self
    where
        L: IntoIterator<Item = S1>,
        R: IntoIterator<Item = S2>,
        S1: Into<String>,
        S2: Into<String>,
    {
        Mvd {
            lhs: names(lhs),
            rhs: names(rhs),
            context: context.into(),
        }
    }
}

impl fmt::Display for Mvd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}->>_{} {}",
            fmt_set(&self.lhs),
            self.context,
            fmt_set(&self.rhs)
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DependencySet {
    pub fds: Vec<Fd>,
    pub mvds: Vec<Mvd>,
}

impl DependencySet {
    pub fn new(fds: Vec<Fd>, mvds: Vec<Mvd>) -> Self {
        DependencySet { fds, mvds }
    }

    pub fn from_fds(fds: Vec<Fd>) -> Self {
        DependencySet { fds, mvds: vec![] }
    }

    pub fn is_empty(&self) -> bool {
        self.fds.is_empty() && self.mvds.is_empty()
    }
}

/// Graph representation of a schema category.
///
/// Object order is declaration order; emitters walk objects in this order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryGraph {
    pub objects: Vec<ObjectDecl>,
    pub arrows: Vec<Arrow>,
    pub mvd_objects: NameSet,
}

impl CategoryGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn object(&self, name: &str) -> Option<&ObjectDecl> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.object(name).is_some()
    }

    pub fn kind(&self, name: &str) -> Option<ObjectKind> {
        self.object(name).map(|o| o.kind)
    }

    pub fn object_names(&self) -> impl Iterator<Item = &str> {
        self.objects.iter().map(|o| o.name.as_str())
    }

    pub fn arrow(&self, source: &str, target: &str) -> Option<&Arrow> {
        self.arrows
            .iter()
            .find(|a| a.source == source && a.target == target)
    }

    pub fn has_arrow(&self, source: &str, target: &str) -> bool {
        self.arrow(source, target).is_some()
    }

    pub fn outgoing<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Arrow> + 'a {
        self.arrows.iter().filter(move |a| a.source == name)
    }

    pub fn incoming<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Arrow> + 'a {
        self.arrows.iter().filter(move |a| a.target == name)
    }

    pub fn has_outgoing(&self, name: &str) -> bool {
        self.arrows.iter().any(|a| a.source == name)
    }

    /// Targets of `name`'s outgoing arrows, in object declaration order.
    pub fn out_neighbors(&self, name: &str) -> Vec<&str> {
        let targets: HashSet<&str> = self.outgoing(name).map(|a| a.target.as_str()).collect();
        self.objects
            .iter()
            .map(|o| o.name.as_str())
            .filter(|n| targets.contains(n))
            .collect()
    }

    /// The projection set pi(O) of a relationship object.
    pub fn projection_targets(&self, name: &str) -> NameSet {
        self.outgoing(name)
            .filter(|a| a.is_projection)
            .map(|a| a.target.clone())
            .collect()
    }

    pub fn relationship_objects(&self) -> impl Iterator<Item = &ObjectDecl> {
        self.objects
            .iter()
            .filter(|o| o.kind == ObjectKind::Relationship)
    }

    pub fn add_object(&mut self, object: ObjectDecl) {
        self.objects.push(object);
    }

    /// Adds an arrow with a generated unique name and returns that name.
    pub fn add_arrow(&mut self, source: &str, target: &str, is_projection: bool) -> String {
        let name = self.fresh_arrow_name(source, target);
        self.arrows.push(Arrow {
            name: name.clone(),
            source: source.to_string(),
            target: target.to_string(),
            is_projection,
        });
        name
    }

    fn fresh_arrow_name(&self, source: &str, target: &str) -> String {
        let base = format!("{source}->{target}");
        if !self.arrows.iter().any(|a| a.name == base) {
            return base;
        }
        (2..)
            .map(|i| format!("{base}#{i}"))
            .find(|n| !self.arrows.iter().any(|a| &a.name == n))
            .expect("unbounded")
    }

    /// Returns an object name derived from `base` that is not yet taken.
    pub fn fresh_object_name(&self, base: &str) -> String {
        if !self.contains(base) {
            return base.to_string();
        }
        (2..)
            .map(|i| format!("{base}_{i}"))
            .find(|n| !self.contains(n))
            .expect("unbounded")
    }

    pub fn remove_arrow(&mut self, source: &str, target: &str) -> Option<Arrow> {
        let idx = self
            .arrows
            .iter()
            .position(|a| a.source == source && a.target == target)?;
        Some(self.arrows.remove(idx))
    }

    /// Removes an object together with every arrow touching it.
    pub fn remove_object(&mut self, name: &str) -> Option<ObjectDecl> {
        let idx = self.objects.iter().position(|o| o.name == name)?;
        self.arrows.retain(|a| a.source != name && a.target != name);
        self.mvd_objects.remove(name);
        Some(self.objects.remove(idx))
    }

    /// Arrow set as (source, target, projection) triples, for comparisons
    /// that should ignore arrow names and insertion order.
    pub fn arrow_set(&self) -> BTreeSet<(String, String, bool)> {
        self.arrows
            .iter()
            .map(|a| (a.source.clone(), a.target.clone(), a.is_projection))
            .collect()
    }

    /// Arrow set as (source, target) pairs.
    pub fn arrow_pairs(&self) -> BTreeSet<(String, String)> {
        self.arrows
            .iter()
            .map(|a| (a.source.clone(), a.target.clone()))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

/// On-disk JSON document. `mvd_objects` and `provenance` are only written by
/// the closure and reduction stages.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaDocument {
    #[serde(default)]
    pub objects: Vec<ObjectDecl>,
    #[serde(default)]
    pub arrows: Vec<Arrow>,
    #[serde(default)]
    pub fds: Vec<Fd>,
    #[serde(default)]
    pub mvds: Vec<Mvd>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub mvd_objects: NameSet,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub provenance: Vec<serde_json::Value>,
}

impl SchemaDocument {
    pub fn from_parts(graph: &CategoryGraph, deps: &DependencySet) -> Self {
        SchemaDocument {
            objects: graph.objects.clone(),
            arrows: graph.arrows.clone(),
            fds: deps.fds.clone(),
            mvds: deps.mvds.clone(),
            mvd_objects: graph.mvd_objects.clone(),
            provenance: vec![],
        }
    }

    pub fn into_parts(self) -> (CategoryGraph, DependencySet) {
        (
            CategoryGraph {
                objects: self.objects,
                arrows: self.arrows,
                mvd_objects: self.mvd_objects,
            },
            DependencySet {
                fds: self.fds,
                mvds: self.mvds,
            },
        )
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schema document serializes");
        s.push('\n');
        s
    }
}

/// Parses a schema document, checking syntax, object-name uniqueness and
/// that every reference names a declared object.
pub fn parse_schema(input: &str) -> Result<(CategoryGraph, DependencySet)> {
    let doc: SchemaDocument = serde_json::from_str(input).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let mut seen = HashSet::new();
    for o in &doc.objects {
        if !seen.insert(o.name.as_str()) {
            return Err(Error::DuplicateObject(o.name.clone()));
        }
    }
    let undeclared = |name: &str, referrer: String| -> Result<()> {
        if seen.contains(name) {
            Ok(())
        } else {
            Err(Error::UndeclaredObject {
                name: name.to_string(),
                referrer,
            })
        }
    };
    for a in &doc.arrows {
        undeclared(&a.source, format!("arrow {}", a.name))?;
        undeclared(&a.target, format!("arrow {}", a.name))?;
    }
    for fd in &doc.fds {
        for n in fd.lhs.iter().chain(&fd.rhs) {
            undeclared(n, format!("fd {fd}"))?;
        }
    }
    for m in &doc.mvds {
        for n in m.lhs.iter().chain(&m.rhs).chain(std::iter::once(&m.context)) {
            undeclared(n, format!("mvd {m}"))?;
        }
    }
    for n in &doc.mvd_objects {
        undeclared(n, "mvd_objects".to_string())?;
    }
    Ok(doc.into_parts())
}

pub fn serialize_schema(graph: &CategoryGraph, deps: &DependencySet) -> String {
    SchemaDocument::from_parts(graph, deps).to_json()
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    DuplicateObject,
    DuplicateArrowName,
    UnknownReference,
    Thinness,
    SelfLoop,
    ProjectionSource,
    LimitKind,
    MvdObjectKind,
    RelationshipWithoutProjections,
    EmptyDependency,
    MvdContext,
    EntityWithoutAttributes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub subject: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn violation(&mut self, rule: Rule, subject: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            rule,
            subject: subject.into(),
            message: message.into(),
        });
    }

    fn warning(&mut self, rule: Rule, subject: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(Violation {
            rule,
            subject: subject.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<&str> = self.violations.iter().map(|v| v.message.as_str()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Checks the structural invariants of a parsed graph and its dependencies.
/// Violations are collected, never raised.
pub fn validate(graph: &CategoryGraph, deps: &DependencySet) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut kinds: HashMap<&str, ObjectKind> = HashMap::new();
    for o in &graph.objects {
        if kinds.insert(o.name.as_str(), o.kind).is_some() {
            report.violation(
                Rule::DuplicateObject,
                &o.name,
                format!("duplicate object name {}", o.name),
            );
        }
        if o.is_limit && o.kind != ObjectKind::Relationship {
            report.violation(
                Rule::LimitKind,
                &o.name,
                format!("limit object {} must be a relationship object", o.name),
            );
        }
    }

    let mut arrow_names = HashSet::new();
    let mut pairs: HashMap<(&str, &str), usize> = HashMap::new();
    for a in &graph.arrows {
        if !arrow_names.insert(a.name.as_str()) {
            report.violation(
                Rule::DuplicateArrowName,
                &a.name,
                format!("duplicate arrow name {}", a.name),
            );
        }
        for end in [&a.source, &a.target] {
            if !kinds.contains_key(end.as_str()) {
                report.violation(
                    Rule::UnknownReference,
                    &a.name,
                    format!("arrow {} references undeclared object {end}", a.name),
                );
            }
        }
        if a.source == a.target {
            report.violation(
                Rule::SelfLoop,
                &a.name,
                format!("arrow {} is an explicit identity on {}", a.name, a.source),
            );
        }
        *pairs.entry((&a.source, &a.target)).or_default() += 1;
        if a.is_projection && kinds.get(a.source.as_str()) != Some(&ObjectKind::Relationship) {
            report.violation(
                Rule::ProjectionSource,
                &a.name,
                format!(
                    "projection arrow {} must leave a relationship object, not {}",
                    a.name, a.source
                ),
            );
        }
    }
    let mut dup: Vec<_> = pairs.into_iter().filter(|(_, n)| *n > 1).collect();
    dup.sort();
    for ((s, t), n) in dup {
        report.violation(
            Rule::Thinness,
            format!("{s}->{t}"),
            format!("thinness violated: {n} arrows from {s} to {t}"),
        );
    }

    for o in graph.relationship_objects() {
        if !graph.outgoing(&o.name).any(|a| a.is_projection) {
            report.violation(
                Rule::RelationshipWithoutProjections,
                &o.name,
                format!("relationship object {} has no projection arrows", o.name),
            );
        }
    }
    for o in graph.objects.iter().filter(|o| o.kind == ObjectKind::Entity) {
        let has_attr = graph
            .outgoing(&o.name)
            .any(|a| kinds.get(a.target.as_str()) == Some(&ObjectKind::Attribute));
        if !has_attr {
            report.warning(
                Rule::EntityWithoutAttributes,
                &o.name,
                format!("entity object {} has no attribute objects", o.name),
            );
        }
    }
    for n in &graph.mvd_objects {
        if kinds.get(n.as_str()) != Some(&ObjectKind::Relationship) {
            report.violation(
                Rule::MvdObjectKind,
                n,
                format!("MVD object {n} is not a relationship object"),
            );
        }
    }

    for fd in &deps.fds {
        if fd.lhs.is_empty() || fd.rhs.is_empty() {
            report.violation(Rule::EmptyDependency, fd.to_string(), format!("fd {fd} has an empty side"));
        }
        for n in fd.lhs.iter().chain(&fd.rhs) {
            if !kinds.contains_key(n.as_str()) {
                report.violation(
                    Rule::UnknownReference,
                    fd.to_string(),
                    format!("fd {fd} references undeclared object {n}"),
                );
            }
        }
    }
    for m in &deps.mvds {
        if m.lhs.is_empty() || m.rhs.is_empty() {
            report.violation(Rule::EmptyDependency, m.to_string(), format!("mvd {m} has an empty side"));
        }
        if kinds.get(m.context.as_str()) != Some(&ObjectKind::Relationship) {
            report.violation(
                Rule::MvdContext,
                m.to_string(),
                format!("context violation: mvd {m} has context {} which is not a relationship object", m.context),
            );
            continue;
        }
        let pi = graph.projection_targets(&m.context);
        let outside: Vec<&String> = m.lhs.iter().chain(&m.rhs).filter(|n| !pi.contains(*n)).collect();
        if !outside.is_empty() {
            report.violation(
                Rule::MvdContext,
                m.to_string(),
                format!(
                    "context violation: {} not projection targets of {} in mvd {m}",
                    outside.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(","),
                    m.context
                ),
            );
        }
    }
    report
}

/// Reads the functional dependencies off a graph: one per arrow, plus the
/// key pair `X -> pi(X)` and `pi(X) -> X` for every relationship object.
pub fn graph_to_fds(graph: &CategoryGraph) -> Vec<Fd> {
    let mut fds: Vec<Fd> = graph
        .arrows
        .iter()
        .map(|a| Fd::new([a.source.as_str()], [a.target.as_str()]))
        .collect();
    for o in graph.relationship_objects() {
        let pi = graph.projection_targets(&o.name);
        if pi.is_empty() {
            continue;
        }
        let me: NameSet = std::iter::once(o.name.clone()).collect();
        fds.push(Fd {
            lhs: me.clone(),
            rhs: pi.clone(),
        });
        fds.push(Fd { lhs: pi, rhs: me });
    }
    fds
}
