use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Domain, DomainError, ValueId};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub attribute: String,
    pub value: String,
}

/// A hard requirement issued by the user about a learned model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeedbackConstraint {
    /// `more_important` must be decided before `less_important`.
    Importance {
        more_important: String,
        less_important: String,
    },
    /// On `attribute`, `preferred` ranks above `dispreferred`, optionally only
    /// where `condition` holds.
    LocalOrder {
        attribute: String,
        preferred: String,
        dispreferred: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        condition: Option<Condition>,
    },
}

impl FeedbackConstraint {
    pub fn importance(more: &str, less: &str) -> Self {
        Self::Importance {
            more_important: more.to_string(),
            less_important: less.to_string(),
        }
    }

    pub fn local_order(attribute: &str, preferred: &str, dispreferred: &str) -> Self {
        Self::LocalOrder {
            attribute: attribute.to_string(),
            preferred: preferred.to_string(),
            dispreferred: dispreferred.to_string(),
            condition: None,
        }
    }

    pub fn conditional_order(attribute: &str, preferred: &str, dispreferred: &str, when: (&str, &str)) -> Self {
        Self::LocalOrder {
            attribute: attribute.to_string(),
            preferred: preferred.to_string(),
            dispreferred: dispreferred.to_string(),
            condition: Some(Condition {
                attribute: when.0.to_string(),
                value: when.1.to_string(),
            }),
        }
    }

    /// Validates names against `domain` and converts them to indices.
    pub fn resolve(&self, domain: &Domain) -> Result<ResolvedConstraint, DomainError> {
        match self {
            Self::Importance {
                more_important,
                less_important,
            } => {
                let lookup = |name: &str| {
                    domain
                        .attribute_index(name)
                        .ok_or_else(|| DomainError::UnknownAttribute(name.to_string()))
                };
                let more = lookup(more_important)?;
                let less = lookup(less_important)?;
                if more == less {
                    return Err(DomainError::InvalidConstraint(format!(
                        "attribute {more_important:?} cannot be more important than itself"
                    )));
                }
                Ok(ResolvedConstraint::Importance { more, less })
            }
            Self::LocalOrder {
                attribute,
                preferred,
                dispreferred,
                condition,
            } => {
                let (a, p) = domain.resolve_value(attribute, preferred)?;
                let (_, d) = domain.resolve_value(attribute, dispreferred)?;
                if p == d {
                    return Err(DomainError::InvalidConstraint(format!(
                        "value {preferred:?} cannot be preferred to itself"
                    )));
                }
                let condition = match condition {
                    None => None,
                    Some(c) => {
                        let (ca, cv) = domain.resolve_value(&c.attribute, &c.value)?;
                        if ca == a {
                            return Err(DomainError::InvalidConstraint(format!(
                                "condition on {attribute:?} cannot constrain {attribute:?} itself"
                            )));
                        }
                        Some((ca, cv))
                    }
                };
                Ok(ResolvedConstraint::LocalOrder {
                    attribute: a,
                    preferred: p,
                    dispreferred: d,
                    condition,
                })
            }
        }
    }
}

impl fmt::Display for FeedbackConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Importance {
                more_important,
                less_important,
            } => write!(f, "{more_important} more important than {less_important}"),
            Self::LocalOrder {
                attribute,
                preferred,
                dispreferred,
                condition,
            } => {
                write!(f, "on {attribute}: {preferred} > {dispreferred}")?;
                if let Some(c) = condition {
                    write!(f, " when {} = {}", c.attribute, c.value)?;
                }
                Ok(())
            }
        }
    }
}

/// Index form of a [`FeedbackConstraint`] for a specific domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResolvedConstraint {
    Importance {
        more: usize,
        less: usize,
    },
    LocalOrder {
        attribute: usize,
        preferred: ValueId,
        dispreferred: ValueId,
        condition: Option<(usize, ValueId)>,
    },
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::car;
    use super::*;

    #[test]
    fn document_shape() {
        let c = FeedbackConstraint::conditional_order("M", "h", "f", ("B", "s"));
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"local_order","attribute":"M","preferred":"h","dispreferred":"f","condition":{"attribute":"B","value":"s"}}"#
        );
        let back: FeedbackConstraint = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        let imp: FeedbackConstraint =
            serde_json::from_str(r#"{"kind":"importance","more_important":"B","less_important":"M"}"#).unwrap();
        assert_eq!(imp, FeedbackConstraint::importance("B", "M"));
    }

    #[test]
    fn resolution_checks_names() {
        let d = car();
        assert_eq!(
            FeedbackConstraint::importance("B", "M").resolve(&d),
            Ok(ResolvedConstraint::Importance { more: 0, less: 1 })
        );
        assert!(FeedbackConstraint::importance("B", "B").resolve(&d).is_err());
        assert!(FeedbackConstraint::importance("B", "Z").resolve(&d).is_err());
        assert!(FeedbackConstraint::local_order("P", "d", "d").resolve(&d).is_err());
        assert!(FeedbackConstraint::local_order("P", "d", "x").resolve(&d).is_err());
        assert!(FeedbackConstraint::conditional_order("P", "d", "l", ("P", "g"))
            .resolve(&d)
            .is_err());
        assert_eq!(
            FeedbackConstraint::conditional_order("M", "f", "h", ("B", "v")).resolve(&d),
            Ok(ResolvedConstraint::LocalOrder {
                attribute: 1,
                preferred: 1,
                dispreferred: 0,
                condition: Some((0, 0)),
            })
        );
    }
}
