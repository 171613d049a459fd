//! Category graph to XML DTD `(L, T, P, R, r)`.
//!
//! Every object with outgoing arrows becomes a repeated child of the root
//! and carries `@ID`; neighbours with outgoing arrows are referenced through
//! `@N_ID` attributes, the others become leaf sub-elements.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::schema::{CategoryGraph, NameSet};

pub const ROOT: &str = "ε";
pub const ID: &str = "@ID";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Factor {
    pub tag: String,
    pub repeated: bool,
}

impl Factor {
    pub fn one(tag: &str) -> Self {
        Factor {
            tag: tag.into(),
            repeated: false,
        }
    }

    pub fn plus(tag: &str) -> Self {
        Factor {
            tag: tag.into(),
            repeated: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DtdSchema {
    /// Element types. The root is not listed.
    pub elements: NameSet,
    /// Attribute names, each starting with `@`.
    pub attributes: NameSet,
    /// Content models; leaves have no entry and hold `#PCDATA`.
    pub content: BTreeMap<String, Vec<Factor>>,
    pub attlists: BTreeMap<String, NameSet>,
    pub root: String,
}

pub fn ref_attribute(tag: &str) -> String {
    format!("@{tag}_ID")
}

impl DtdSchema {
    /// Tags with `@ID`, i.e. those created for objects with outgoing arrows.
    pub fn is_identified(&self, tag: &str) -> bool {
        self.attlists.get(tag).is_some_and(|r| r.contains(ID))
    }

    pub fn is_leaf(&self, tag: &str) -> bool {
        self.elements.contains(tag) && !self.attlists.contains_key(tag) && !self.content.contains_key(tag)
    }

    fn model(&self, tag: &str) -> String {
        match self.content.get(tag) {
            Some(factors) if !factors.is_empty() => {
                let parts: Vec<String> = factors
                    .iter()
                    .map(|f| if f.repeated { format!("{}+", f.tag) } else { f.tag.clone() })
                    .collect();
                format!("({})", parts.join(", "))
            }
            _ if self.is_leaf(tag) => "(#PCDATA)".to_string(),
            _ => "EMPTY".to_string(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "<!ELEMENT {} {}>", self.root, self.model(&self.root));
        for tag in &self.elements {
            let _ = writeln!(out, "<!ELEMENT {tag} {}>", self.model(tag));
            if let Some(attrs) = self.attlists.get(tag) {
                let mut decls: Vec<String> = Vec::new();
                if attrs.contains(ID) {
                    decls.push("ID ID #REQUIRED".to_string());
                }
                for a in attrs.iter().filter(|a| *a != ID) {
                    decls.push(format!("{} IDREF #REQUIRED", a.trim_start_matches('@')));
                }
                let _ = writeln!(out, "<!ATTLIST {tag} {}>", decls.join(" "));
            }
        }
        out
    }
}

pub fn emit_dtd(g: &CategoryGraph) -> DtdSchema {
    let mut d = DtdSchema {
        root: ROOT.to_string(),
        ..DtdSchema::default()
    };
    d.attributes.insert(ID.to_string());
    let mut top = Vec::new();
    for o in &g.objects {
        if !g.has_outgoing(&o.name) {
            continue;
        }
        d.elements.insert(o.name.clone());
        top.push(Factor::plus(&o.name));
        d.attlists
            .entry(o.name.clone())
            .or_default()
            .insert(ID.to_string());
        for n in g.out_neighbors(&o.name) {
            if g.has_outgoing(n) {
                let attr = ref_attribute(n);
                d.attributes.insert(attr.clone());
                d.attlists.entry(o.name.clone()).or_default().insert(attr);
            } else {
                d.content
                    .entry(o.name.clone())
                    .or_default()
                    .push(Factor::one(n));
                d.elements.insert(n.to_string());
            }
        }
    }
    d.content.insert(ROOT.to_string(), top);
    d
}

/// Tag names referenced by content models that are not declared elements.
pub fn undeclared_tags(d: &DtdSchema) -> BTreeSet<String> {
    d.content
        .values()
        .flatten()
        .filter(|f| !d.elements.contains(&f.tag))
        .map(|f| f.tag.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{names, ObjectDecl};

    #[test]
    fn fd_sample_dtd() {
        let mut g = CategoryGraph::new();
        g.add_object(ObjectDecl::relationship("D"));
        for n in ["E", "A", "B", "C"] {
            g.add_object(ObjectDecl::attribute(n));
        }
        g.add_arrow("D", "E", true);
        g.add_arrow("D", "A", true);
        g.add_arrow("A", "B", false);
        g.add_arrow("B", "C", false);
        let d = emit_dtd(&g);
        assert_eq!(d.elements, names(["A", "B", "C", "D", "E"]));
        assert_eq!(d.attributes, names(["@ID", "@A_ID", "@B_ID"]));
        assert_eq!(
            d.content[ROOT],
            vec![Factor::plus("D"), Factor::plus("A"), Factor::plus("B")]
        );
        assert_eq!(d.content["D"], vec![Factor::one("E")]);
        assert_eq!(d.content["B"], vec![Factor::one("C")]);
        assert!(!d.content.contains_key("A"));
        assert_eq!(d.attlists["A"], names(["@ID", "@B_ID"]));
        assert_eq!(d.attlists["D"], names(["@ID", "@A_ID"]));
        assert_eq!(d.attlists["B"], names(["@ID"]));
        assert!(undeclared_tags(&d).is_empty());
        let text = d.render();
        assert!(text.starts_with("<!ELEMENT ε (D+, A+, B+)>\n"), "{text}");
        assert!(text.contains("<!ELEMENT A EMPTY>\n<!ATTLIST A ID ID #REQUIRED B_ID IDREF #REQUIRED>"));
        assert!(text.contains("<!ELEMENT C (#PCDATA)>"));
    }

    #[test]
    fn empty_graph() {
        let d = emit_dtd(&CategoryGraph::new());
        assert!(d.elements.is_empty());
        assert!(d.content[ROOT].is_empty());
        assert_eq!(d.root, ROOT);
        assert_eq!(d.render(), "<!ELEMENT ε EMPTY>\n");
    }
}
