//! JSON model documents.
//!
//! ```text
//! {"format":"lexloop-tree/1","kind":"UIUP","sequence":[{"attribute":"B","order":["s","v","r"]}]}
//! {"format":"lexloop-tree/1","kind":"UICP","tables":[{"attribute":"M","rows":[{"when":[{"attribute":"B","value":"s"}],"order":["h","f"]}],"default":["h","f"]}]}
//! {"format":"lexloop-tree/1","kind":"CICP","root":{"attribute":"B","order":["v","s","r"],"children":[null,null,null]}}
//! {"format":"lexloop-forest/1","trees":[...]}
//! ```
//!
//! In CICP documents a `null` child (or root) is a leaf.

use serde::{Deserialize, Serialize};

use super::{
    validate_tree, Branch, CpTable, CptRow, LocalOrder, LpForest, LpTree, Model, ModelError, Ranking, TreeNode,
};
use crate::domain::{Condition, Domain, DomainError};

pub const TREE_FORMAT: &str = "lexloop-tree/1";
pub const FOREST_FORMAT: &str = "lexloop-forest/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct OrderDoc {
    attribute: String,
    order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct RowDoc {
    when: Vec<Condition>,
    order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct TableDoc {
    attribute: String,
    #[serde(default)]
    rows: Vec<RowDoc>,
    default: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct NodeDoc {
    attribute: String,
    order: Vec<String>,
    children: Vec<Option<NodeDoc>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub(crate) enum TreeBody {
    #[serde(rename = "UIUP")]
    Uiup { sequence: Vec<OrderDoc> },
    #[serde(rename = "UICP")]
    Uicp { tables: Vec<TableDoc> },
    #[serde(rename = "CICP")]
    Cicp { root: Option<NodeDoc> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct TreeDocument {
    format: String,
    #[serde(flatten)]
    body: TreeBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct ForestDocument {
    format: String,
    trees: Vec<TreeDocument>,
}

fn names(domain: &Domain, attribute: usize, ranking: &Ranking) -> Vec<String> {
    ranking
        .values()
        .iter()
        .map(|&v| domain.value_name(attribute, v).to_string())
        .collect()
}

fn node_doc(domain: &Domain, branch: &Branch) -> Option<NodeDoc> {
    match branch {
        Branch::Leaf => None,
        Branch::Node(n) => Some(NodeDoc {
            attribute: domain.attribute_name(n.attribute()).to_string(),
            order: names(domain, n.attribute(), n.ranking()),
            children: n.children().iter().map(|c| node_doc(domain, c)).collect(),
        }),
    }
}

pub(crate) fn tree_document(tree: &LpTree, domain: &Domain) -> TreeDocument {
    let body = match tree {
        LpTree::Uiup(body) => TreeBody::Uiup {
            sequence: body
                .iter()
                .map(|o| OrderDoc {
                    attribute: domain.attribute_name(o.attribute).to_string(),
                    order: names(domain, o.attribute, &o.ranking),
                })
                .collect(),
        },
        LpTree::Uicp(body) => TreeBody::Uicp {
            tables: body
                .iter()
                .map(|t| TableDoc {
                    attribute: domain.attribute_name(t.attribute).to_string(),
                    rows: t
                        .rows
                        .iter()
                        .map(|r| RowDoc {
                            when: r
                                .condition
                                .iter()
                                .map(|&(a, v)| Condition {
                                    attribute: domain.attribute_name(a).to_string(),
                                    value: domain.value_name(a, v).to_string(),
                                })
                                .collect(),
                            order: names(domain, t.attribute, &r.ranking),
                        })
                        .collect(),
                    default: names(domain, t.attribute, &t.default),
                })
                .collect(),
        },
        LpTree::Cicp(root) => TreeBody::Cicp {
            root: node_doc(domain, root),
        },
    };
    TreeDocument {
        format: TREE_FORMAT.to_string(),
        body,
    }
}

fn attribute(domain: &Domain, name: &str) -> Result<usize, DomainError> {
    domain
        .attribute_index(name)
        .ok_or_else(|| DomainError::UnknownAttribute(name.to_string()))
}

fn ranking(domain: &Domain, attribute: usize, order: &[String]) -> Result<Ranking, DomainError> {
    let spec = domain.attribute(attribute);
    order
        .iter()
        .map(|v| {
            spec.value_index(v).ok_or_else(|| DomainError::UnknownValue {
                attribute: spec.name.clone(),
                value: v.clone(),
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Ranking::new)
}

fn branch(domain: &Domain, doc: &Option<NodeDoc>) -> Result<Branch, DomainError> {
    let Some(doc) = doc else { return Ok(Branch::Leaf) };
    let a = attribute(domain, &doc.attribute)?;
    let children = doc
        .children
        .iter()
        .map(|c| branch(domain, c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Branch::node(TreeNode::new(
        a,
        ranking(domain, a, &doc.order)?,
        children,
    )))
}

pub(crate) fn tree_from_document(doc: &TreeDocument, domain: &Domain) -> Result<LpTree, ModelError> {
    if doc.format != TREE_FORMAT {
        return Err(ModelError::Malformed(format!("unsupported format {:?}", doc.format)));
    }
    let tree = match &doc.body {
        TreeBody::Uiup { sequence } => LpTree::Uiup(
            sequence
                .iter()
                .map(|o| {
                    let a = attribute(domain, &o.attribute)?;
                    Ok(LocalOrder {
                        attribute: a,
                        ranking: ranking(domain, a, &o.order)?,
                    })
                })
                .collect::<Result<Vec<_>, DomainError>>()?,
        ),
        TreeBody::Uicp { tables } => LpTree::Uicp(
            tables
                .iter()
                .map(|t| {
                    let a = attribute(domain, &t.attribute)?;
                    let rows = t
                        .rows
                        .iter()
                        .map(|r| {
                            let mut condition = r
                                .when
                                .iter()
                                .map(|c| domain.resolve_value(&c.attribute, &c.value))
                                .collect::<Result<Vec<_>, _>>()?;
                            condition.sort_unstable();
                            Ok(CptRow {
                                condition,
                                ranking: ranking(domain, a, &r.order)?,
                            })
                        })
                        .collect::<Result<Vec<_>, DomainError>>()?;
                    Ok(CpTable {
                        attribute: a,
                        rows,
                        default: ranking(domain, a, &t.default)?,
                    })
                })
                .collect::<Result<Vec<_>, DomainError>>()?,
        ),
        TreeBody::Cicp { root } => LpTree::Cicp(branch(domain, root)?),
    };
    let report = validate_tree(&tree, domain);
    if !report.is_valid() {
        return Err(ModelError::Invalid(report));
    }
    Ok(tree)
}

pub fn serialize_tree(tree: &LpTree, domain: &Domain) -> String {
    serde_json::to_string_pretty(&tree_document(tree, domain)).expect("tree serializes")
}

/// Parses and validates a tree document against `domain`.
pub fn deserialize_tree(text: &str, domain: &Domain) -> Result<LpTree, ModelError> {
    let doc: TreeDocument = serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
    tree_from_document(&doc, domain)
}

pub fn serialize_forest(forest: &LpForest, domain: &Domain) -> String {
    let doc = ForestDocument {
        format: FOREST_FORMAT.to_string(),
        trees: forest.trees().iter().map(|t| tree_document(t, domain)).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("forest serializes")
}

pub fn deserialize_forest(text: &str, domain: &Domain) -> Result<LpForest, ModelError> {
    let doc: ForestDocument = serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
    if doc.format != FOREST_FORMAT {
        return Err(ModelError::Malformed(format!("unsupported format {:?}", doc.format)));
    }
    let trees = doc
        .trees
        .iter()
        .map(|t| tree_from_document(t, domain))
        .collect::<Result<Vec<_>, _>>()?;
    LpForest::new(trees)
}

pub fn serialize_model(model: &Model, domain: &Domain) -> String {
    match model {
        Model::Tree(t) => serialize_tree(t, domain),
        Model::Forest(f) => serialize_forest(f, domain),
    }
}

/// Reads either a tree or a forest document, dispatching on `format`.
pub fn deserialize_model(text: &str, domain: &Domain) -> Result<Model, ModelError> {
    #[derive(Deserialize)]
    struct Probe {
        format: String,
    }
    let probe: Probe = serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
    match probe.format.as_str() {
        TREE_FORMAT => deserialize_tree(text, domain).map(Model::Tree),
        FOREST_FORMAT => deserialize_forest(text, domain).map(Model::Forest),
        other => Err(ModelError::Malformed(format!("unsupported format {other:?}"))),
    }
}
