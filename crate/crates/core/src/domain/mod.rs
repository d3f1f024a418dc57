//! Combinatorial domains over categorical attributes.
//!
//! A [`Domain`] is an ordered list of attributes, each with an ordered list of
//! value names. Alternatives are full assignments and are stored as value
//! indices in attribute declaration order.

mod examples;
mod feedback;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use examples::{parse_examples, write_examples, ComparisonExample, ExampleSource, RowError};
pub use feedback::{Condition, FeedbackConstraint, ResolvedConstraint};

/// Default cap on the number of values per attribute.
pub const DEFAULT_MAX_VALUES: usize = 16;
/// Default cap on domain size for full enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1 << 20;
/// Separator used by [`canonical_key`].
pub const KEY_SEPARATOR: char = '|';

/// Value index within an attribute.
pub type ValueId = u8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("invalid identifier {0:?} (allowed: letters, digits, '_', '.', '-')")]
    InvalidIdentifier(String),
    #[error("domain has no attributes")]
    NoAttributes,
    #[error("attribute {0:?} declared more than once")]
    DuplicateAttribute(String),
    #[error("value {value:?} declared more than once in attribute {attribute:?}")]
    DuplicateValue { attribute: String, value: String },
    #[error("attribute {attribute:?} has {count} value(s), at least 2 required")]
    TooFewValues { attribute: String, count: usize },
    #[error("attribute {attribute:?} has {count} values, limit is {limit}")]
    TooManyValues {
        attribute: String,
        count: usize,
        limit: usize,
    },
    #[error("domain size overflows 64 bits")]
    SizeOverflow,
    #[error("missing attribute {0:?}")]
    MissingAttribute(String),
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("unknown value {value:?} for attribute {attribute:?}")]
    UnknownValue { attribute: String, value: String },
    #[error("domain has {size} alternatives, enumeration limit is {limit}")]
    TooLarge { size: u64, limit: u64 },
    #[error("example compares an alternative with itself")]
    IdenticalSides,
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("{} invalid row(s): {}", .0.len(), RowError::summary(.0))]
    Rows(Vec<RowError>),
}

/// Identifiers are restricted so that [`KEY_SEPARATOR`] and the example-file
/// delimiters never occur inside a name.
pub fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub values: Vec<String>,
}

impl AttributeSpec {
    pub fn new<S: Into<String>>(name: S, values: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            name: name.into(),
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_index(&self, value: &str) -> Option<ValueId> {
        self.values.iter().position(|v| v == value).map(|i| i as ValueId)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainLimits {
    pub max_values: usize,
}

impl Default for DomainLimits {
    fn default() -> Self {
        Self {
            max_values: DEFAULT_MAX_VALUES,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DomainDocument {
    attributes: Vec<AttributeSpec>,
}

/// An ordered set of attributes defining the space of alternatives.
#[derive(Debug, Clone)]
pub struct Domain {
    attributes: Vec<AttributeSpec>,
    size: u64,
    index: HashMap<String, usize>,
    // canonical_ranks[a][v]: position of value v under the alphabetical key order
    canonical_ranks: Vec<Vec<usize>>,
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.attributes == other.attributes
    }
}

impl Eq for Domain {}

impl Domain {
    pub fn new(attributes: Vec<AttributeSpec>) -> Result<Self, DomainError> {
        Self::with_limits(attributes, DomainLimits::default())
    }

    pub fn with_limits(attributes: Vec<AttributeSpec>, limits: DomainLimits) -> Result<Self, DomainError> {
        if attributes.is_empty() {
            return Err(DomainError::NoAttributes);
        }
        let max_values = limits.max_values.min(ValueId::MAX as usize + 1);
        let mut index = HashMap::with_capacity(attributes.len());
        let mut size: u64 = 1;
        for (i, attr) in attributes.iter().enumerate() {
            if !is_identifier(&attr.name) {
                return Err(DomainError::InvalidIdentifier(attr.name.clone()));
            }
            if index.insert(attr.name.clone(), i).is_some() {
                return Err(DomainError::DuplicateAttribute(attr.name.clone()));
            }
            if attr.values.len() < 2 {
                return Err(DomainError::TooFewValues {
                    attribute: attr.name.clone(),
                    count: attr.values.len(),
                });
            }
            if attr.values.len() > max_values {
                return Err(DomainError::TooManyValues {
                    attribute: attr.name.clone(),
                    count: attr.values.len(),
                    limit: max_values,
                });
            }
            for (j, v) in attr.values.iter().enumerate() {
                if !is_identifier(v) {
                    return Err(DomainError::InvalidIdentifier(v.clone()));
                }
                if attr.values[..j].contains(v) {
                    return Err(DomainError::DuplicateValue {
                        attribute: attr.name.clone(),
                        value: v.clone(),
                    });
                }
            }
            size = size
                .checked_mul(attr.values.len() as u64)
                .ok_or(DomainError::SizeOverflow)?;
        }
        let canonical_ranks = canonical_ranks(&attributes);
        Ok(Self {
            attributes,
            size,
            index,
            canonical_ranks,
        })
    }

    pub fn attributes(&self) -> &[AttributeSpec] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> &AttributeSpec {
        &self.attributes[index]
    }

    /// Number of attributes.
    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    /// Number of alternatives, the product of all value-list lengths.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn value_count(&self, attribute: usize) -> usize {
        self.attributes[attribute].values.len()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn attribute_name(&self, attribute: usize) -> &str {
        &self.attributes[attribute].name
    }

    pub fn value_name(&self, attribute: usize, value: ValueId) -> &str {
        &self.attributes[attribute].values[value as usize]
    }

    /// Resolves an attribute name and value name to indices.
    pub fn resolve_value(&self, attribute: &str, value: &str) -> Result<(usize, ValueId), DomainError> {
        let a = self
            .attribute_index(attribute)
            .ok_or_else(|| DomainError::UnknownAttribute(attribute.to_string()))?;
        let v = self.attributes[a]
            .value_index(value)
            .ok_or_else(|| DomainError::UnknownValue {
                attribute: attribute.to_string(),
                value: value.to_string(),
            })?;
        Ok((a, v))
    }

    /// Position of each value under the order induced by [`canonical_key`].
    pub fn canonical_rank(&self, attribute: usize, value: ValueId) -> usize {
        self.canonical_ranks[attribute][value as usize]
    }

    /// Mixed-radix index of an alternative in canonical enumeration order.
    pub fn ordinal(&self, alternative: &Alternative) -> u64 {
        alternative
            .values()
            .iter()
            .zip(&self.attributes)
            .fold(0u64, |acc, (&v, attr)| acc * attr.values.len() as u64 + v as u64)
    }

    /// Inverse of [`Domain::ordinal`].
    pub fn alternative_at(&self, mut ordinal: u64) -> Alternative {
        let mut values = vec![0; self.attributes.len()];
        for (slot, attr) in values.iter_mut().zip(&self.attributes).rev() {
            let n = attr.values.len() as u64;
            *slot = (ordinal % n) as ValueId;
            ordinal /= n;
        }
        Alternative(values)
    }

    /// Iterates every alternative in canonical order without a size check.
    pub fn iter_alternatives(&self) -> impl Iterator<Item = Alternative> + '_ {
        (0..self.size).map(move |i| self.alternative_at(i))
    }

    pub fn to_document(&self) -> String {
        let doc = DomainDocument {
            attributes: self.attributes.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("domain serializes")
    }
}

fn canonical_ranks(attributes: &[AttributeSpec]) -> Vec<Vec<usize>> {
    let last = attributes.len() - 1;
    attributes
        .iter()
        .enumerate()
        .map(|(a, attr)| {
            // A value followed by the separator compares against the other
            // value's continuation, so non-last attributes sort on name + '|'.
            let key = |v: &String| {
                if a == last {
                    v.clone()
                } else {
                    format!("{v}{KEY_SEPARATOR}")
                }
            };
            let mut order: Vec<usize> = (0..attr.values.len()).collect();
            order.sort_by_key(|&v| key(&attr.values[v]));
            let mut ranks = vec![0; attr.values.len()];
            for (rank, v) in order.into_iter().enumerate() {
                ranks[v] = rank;
            }
            ranks
        })
        .collect()
}

/// Parses a domain document with default limits.
pub fn parse_domain(text: &str) -> Result<Domain, DomainError> {
    parse_domain_with(text, DomainLimits::default())
}

pub fn parse_domain_with(text: &str, limits: DomainLimits) -> Result<Domain, DomainError> {
    let doc: DomainDocument = serde_json::from_str(text).map_err(|e| DomainError::Malformed(e.to_string()))?;
    Domain::with_limits(doc.attributes, limits)
}

/// A full assignment, one value index per attribute in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alternative(Vec<ValueId>);

impl Alternative {
    /// Builds an alternative from raw indices, checking them against the domain.
    pub fn from_indices(domain: &Domain, values: Vec<ValueId>) -> Result<Self, DomainError> {
        if values.len() != domain.len() {
            let missing = domain.attribute_name(values.len().min(domain.len() - 1));
            return Err(DomainError::MissingAttribute(missing.to_string()));
        }
        for (a, &v) in values.iter().enumerate() {
            if v as usize >= domain.value_count(a) {
                return Err(DomainError::UnknownValue {
                    attribute: domain.attribute_name(a).to_string(),
                    value: format!("#{v}"),
                });
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[ValueId] {
        &self.0
    }

    pub fn value(&self, attribute: usize) -> ValueId {
        self.0[attribute]
    }

    /// Value names in declaration order.
    pub fn names<'d>(&self, domain: &'d Domain) -> Vec<&'d str> {
        self.0
            .iter()
            .enumerate()
            .map(|(a, &v)| domain.value_name(a, v))
            .collect()
    }

    /// The alternative as an attribute-name to value-name map.
    pub fn to_map(&self, domain: &Domain) -> std::collections::BTreeMap<String, String> {
        self.0
            .iter()
            .enumerate()
            .map(|(a, &v)| {
                (
                    domain.attribute_name(a).to_string(),
                    domain.value_name(a, v).to_string(),
                )
            })
            .collect()
    }

    pub(crate) fn from_raw(values: Vec<ValueId>) -> Self {
        Self(values)
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Validates a name-to-value mapping as a full alternative of `domain`.
pub fn validate_alternative<'a, I>(domain: &Domain, raw: I) -> Result<Alternative, DomainError>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut values: Vec<Option<ValueId>> = vec![None; domain.len()];
    for (name, value) in raw {
        let (a, v) = domain.resolve_value(name, value)?;
        values[a] = Some(v);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(a, v)| v.ok_or_else(|| DomainError::MissingAttribute(domain.attribute_name(a).to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Alternative(values))
}

/// All alternatives in canonical order: mixed radix over value indices with
/// the first declared attribute most significant.
pub fn enumerate_alternatives(domain: &Domain, limit: u64) -> Result<Vec<Alternative>, DomainError> {
    if domain.size() > limit {
        return Err(DomainError::TooLarge {
            size: domain.size(),
            limit,
        });
    }
    Ok(domain.iter_alternatives().collect())
}

/// Value names joined by [`KEY_SEPARATOR`] in declaration order. Ties inside a
/// leaf are broken by comparing these keys as strings.
pub fn canonical_key(alternative: &Alternative, domain: &Domain) -> String {
    let sep = KEY_SEPARATOR.to_string();
    alternative.names(domain).join(&sep)
}

/// Tuple of canonical ranks; sorts exactly like [`canonical_key`].
pub fn canonical_ranks_of(alternative: &Alternative, domain: &Domain) -> Vec<usize> {
    alternative
        .values()
        .iter()
        .enumerate()
        .map(|(a, &v)| domain.canonical_rank(a, v))
        .collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub const CAR_DOMAIN: &str = r#"{
      "attributes": [
        {"name": "B", "values": ["v", "s", "r"]},
        {"name": "M", "values": ["h", "f"]},
        {"name": "P", "values": ["l", "d", "g"]},
        {"name": "T", "values": ["a", "m"]}
      ]
    }"#;

    pub fn car() -> Domain {
        parse_domain(CAR_DOMAIN).unwrap()
    }

    pub fn two_by_two() -> Domain {
        Domain::new(vec![
            AttributeSpec::new("A", ["a1", "a2"]),
            AttributeSpec::new("B", ["b1", "b2"]),
        ])
        .unwrap()
    }

    pub fn alt(domain: &Domain, pairs: &[(&str, &str)]) -> Alternative {
        validate_alternative(domain, pairs.iter().copied()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn car_domain_has_36_alternatives() {
        let d = car();
        assert_eq!(d.len(), 4);
        assert_eq!(d.size(), 36);
        assert_eq!(d.attribute(2).values, vec!["l", "d", "g"]);
    }

    #[test]
    fn minimal_domain() {
        let d = parse_domain(r#"{"attributes":[{"name":"A","values":["a1","a2"]}]}"#).unwrap();
        assert_eq!((d.len(), d.size()), (1, 2));
    }

    #[test]
    fn rejects_bad_documents() {
        let dup = r#"{"attributes":[{"name":"B","values":["x","y"]},{"name":"B","values":["x","y"]}]}"#;
        assert_eq!(parse_domain(dup), Err(DomainError::DuplicateAttribute("B".into())));
        let one = r#"{"attributes":[{"name":"B","values":["x"]}]}"#;
        assert!(matches!(parse_domain(one), Err(DomainError::TooFewValues { .. })));
        let dupv = r#"{"attributes":[{"name":"B","values":["x","x"]}]}"#;
        assert!(matches!(parse_domain(dupv), Err(DomainError::DuplicateValue { .. })));
        assert!(matches!(parse_domain("{"), Err(DomainError::Malformed(_))));
        assert_eq!(parse_domain(r#"{"attributes":[]}"#), Err(DomainError::NoAttributes));
        let sep = r#"{"attributes":[{"name":"B","values":["x|y","z"]}]}"#;
        assert!(matches!(parse_domain(sep), Err(DomainError::InvalidIdentifier(_))));
    }

    #[test]
    fn value_cap_is_configurable() {
        let values: Vec<String> = (0..17).map(|i| format!("v{i}")).collect();
        let attrs = vec![AttributeSpec::new("X", values)];
        assert!(matches!(
            Domain::new(attrs.clone()),
            Err(DomainError::TooManyValues { limit: 16, .. })
        ));
        assert!(Domain::with_limits(attrs, DomainLimits { max_values: 32 }).is_ok());
    }

    #[test]
    fn validates_alternatives() {
        let d = car();
        let a = alt(&d, &[("B", "s"), ("M", "h"), ("P", "l"), ("T", "a")]);
        assert_eq!(a.values(), &[1, 0, 0, 0]);
        let missing = validate_alternative(&d, [("B", "s"), ("M", "h"), ("P", "l")]);
        assert_eq!(missing, Err(DomainError::MissingAttribute("T".into())));
        let unknown = validate_alternative(&d, [("B", "s"), ("M", "toyota"), ("P", "l"), ("T", "a")]);
        assert!(matches!(unknown, Err(DomainError::UnknownValue { .. })));
        let extra = validate_alternative(&d, [("B", "s"), ("X", "h")]);
        assert_eq!(extra, Err(DomainError::UnknownAttribute("X".into())));
    }

    #[test]
    fn enumeration_order_and_limits() {
        let d = two_by_two();
        let all = enumerate_alternatives(&d, 100).unwrap();
        let keys: Vec<String> = all.iter().map(|a| canonical_key(a, &d)).collect();
        assert_eq!(keys, ["a1|b1", "a1|b2", "a2|b1", "a2|b2"]);
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(sorted, keys);

        assert_eq!(enumerate_alternatives(&car(), 100).unwrap().len(), 3 * 2 * 3 * 2);
        assert!(matches!(
            enumerate_alternatives(&car(), 10),
            Err(DomainError::TooLarge { size: 36, limit: 10 })
        ));
    }

    #[test]
    fn canonical_key_of_honda_sedan() {
        let d = car();
        let a = alt(&d, &[("B", "s"), ("M", "h"), ("P", "l"), ("T", "a")]);
        assert_eq!(canonical_key(&a, &d), "s|h|l|a");
    }

    #[test]
    fn document_round_trip() {
        let d = car();
        assert_eq!(parse_domain(&d.to_document()).unwrap(), d);
    }

    fn arb_domain() -> impl Strategy<Value = Domain> {
        let ident = "[a-c]{1,3}";
        prop::collection::vec(prop::collection::btree_set(ident, 2..4), 1..4).prop_map(|attrs| {
            let specs = attrs
                .into_iter()
                .enumerate()
                .map(|(i, vals)| AttributeSpec::new(format!("X{i}"), vals))
                .collect();
            Domain::new(specs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn enumeration_is_complete_and_keys_injective(d in arb_domain()) {
            let all = enumerate_alternatives(&d, 1 << 12).unwrap();
            prop_assert_eq!(all.len() as u64, d.size());
            let keys: std::collections::HashSet<String> =
                all.iter().map(|a| canonical_key(a, &d)).collect();
            prop_assert_eq!(keys.len(), all.len());
            for (i, a) in all.iter().enumerate() {
                prop_assert_eq!(d.ordinal(a), i as u64);
            }
        }

        // Values share prefixes ("a", "ab"), which is where string order of
        // the joined key departs from naive per-value comparison.
        #[test]
        fn rank_tuples_sort_like_keys(d in arb_domain()) {
            let all = enumerate_alternatives(&d, 1 << 12).unwrap();
            let mut by_key = all.clone();
            by_key.sort_by_key(|a| canonical_key(a, &d));
            let mut by_rank = all;
            by_rank.sort_by_key(|a| canonical_ranks_of(a, &d));
            prop_assert_eq!(by_key, by_rank);
        }

        #[test]
        fn document_round_trips(d in arb_domain()) {
            prop_assert_eq!(parse_domain(&d.to_document()).unwrap(), d);
        }
    }
}
