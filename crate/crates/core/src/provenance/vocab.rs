//! The update provenance vocabulary and its alignment with W3C PROV.

use crate::model::Atom;

pub const NS: &str = "urn:upd:vocab#";
pub const PROV_NS: &str = "http://www.w3.org/ns/prov#";
pub const RDFS_SEE_ALSO: &str = "http://www.w3.org/2000/01/rdf-schema#seeAlso";
pub const XSD_DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";

/// Name of the graph holding every provenance record.
pub const PROV_GRAPH: &str = "urn:upd:prov";
/// Stand-in IRI for the default graph wherever a record must name it.
pub const DEFAULT_GRAPH: &str = "urn:upd:default";

pub const INPUT: &str = "urn:upd:vocab#input";
pub const OUTPUT: &str = "urn:upd:vocab#output";
pub const DATA: &str = "urn:upd:vocab#data";
pub const VERSION: &str = "urn:upd:vocab#version";
pub const PREV_VERSION: &str = "urn:upd:vocab#prevVersion";
pub const TYPE: &str = "urn:upd:vocab#type";
pub const CURRENT: &str = "urn:upd:vocab#current";
pub const SOURCE: &str = "urn:upd:vocab#source";
pub const META: &str = "urn:upd:vocab#meta";
pub const USER: &str = "urn:upd:vocab#user";
pub const TEXT: &str = "urn:upd:vocab#text";
pub const TIME: &str = "urn:upd:vocab#time";

/// Properties paired with the PROV (or RDFS) property each one specializes.
pub const PROPERTIES: [(&str, &str); 12] = [
    (INPUT, "http://www.w3.org/ns/prov#wasUsedBy"),
    (OUTPUT, "http://www.w3.org/ns/prov#generated"),
    (DATA, "http://www.w3.org/ns/prov#wasUsedBy"),
    (VERSION, "http://www.w3.org/ns/prov#hadRevision"),
    (PREV_VERSION, "http://www.w3.org/ns/prov#wasRevisionOf"),
    (TYPE, "http://www.w3.org/ns/prov#type"),
    (CURRENT, "http://www.w3.org/ns/prov#hadRevision"),
    (SOURCE, "http://www.w3.org/ns/prov#wasUsedBy"),
    (META, RDFS_SEE_ALSO),
    (USER, "http://www.w3.org/ns/prov#wasAttributedTo"),
    (TEXT, "http://www.w3.org/ns/prov#value"),
    (TIME, "http://www.w3.org/ns/prov#atTime"),
];

/// Kinds of update a record can describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UpdateType {
    Insert,
    Delete,
    Load,
    Clear,
    Create,
    Drop,
    Copy,
    Move,
    Add,
}

impl UpdateType {
    pub const ALL: [UpdateType; 9] = [
        UpdateType::Insert,
        UpdateType::Delete,
        UpdateType::Load,
        UpdateType::Clear,
        UpdateType::Create,
        UpdateType::Drop,
        UpdateType::Copy,
        UpdateType::Move,
        UpdateType::Add,
    ];

    pub fn label(self) -> &'static str {
        match self {
            UpdateType::Insert => "insert",
            UpdateType::Delete => "delete",
            UpdateType::Load => "load",
            UpdateType::Clear => "clear",
            UpdateType::Create => "create",
            UpdateType::Drop => "drop",
            UpdateType::Copy => "copy",
            UpdateType::Move => "move",
            UpdateType::Add => "add",
        }
    }

    pub fn iri(self) -> String {
        format!("{NS}{}", self.label())
    }

    pub fn atom(self) -> Atom {
        Atom::iri(self.iri())
    }

    pub fn from_iri(iri: &str) -> Option<UpdateType> {
        let label = iri.strip_prefix(NS)?;
        UpdateType::ALL.into_iter().find(|t| t.label() == label)
    }
}

/// The PROV property that `property` specializes, if it is a vocabulary term.
pub fn super_property(property: &str) -> Option<&'static str> {
    PROPERTIES.iter().find(|(p, _)| *p == property).map(|(_, s)| *s)
}

pub(crate) fn iri(s: &str) -> Atom {
    Atom::iri(s)
}
