use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use super::{Edge, ExistSpec, GraphError, NodeId, Operator, OperatorKind, SelectSpec, Slot, TaskGraph};
use crate::value::Value;

/// Portable JSON form of a task graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<NodeDocument>,
    pub edges: Vec<EdgeDocument>,
    pub root: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDocument {
    pub id: NodeId,
    pub kind: String,
    #[serde(default)]
    pub payload: Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDocument {
    pub parent: NodeId,
    pub child: NodeId,
    pub slot: Slot,
}

#[derive(Serialize, Deserialize)]
struct ConstPayload {
    value: Option<Value>,
}

pub fn serialize_graph(graph: &TaskGraph) -> GraphDocument {
    let nodes = graph
        .nodes()
        .map(|(id, op)| NodeDocument {
            id,
            kind: op.kind().name().to_string(),
            payload: match op {
                Operator::Select(s) => serde_json::to_value(s).expect("select payload"),
                Operator::Exist(e) => serde_json::to_value(e).expect("exist payload"),
                Operator::Const(v) => json!({ "value": v }),
                _ => json!({}),
            },
        })
        .collect();
    let edges = graph
        .edges()
        .iter()
        .map(|e| EdgeDocument {
            parent: e.parent,
            child: e.child,
            slot: e.slot,
        })
        .collect();
    GraphDocument {
        nodes,
        edges,
        root: graph.root(),
    }
}

pub fn deserialize_graph(doc: &GraphDocument) -> Result<TaskGraph, GraphError> {
    let mut nodes = BTreeMap::new();
    for node in &doc.nodes {
        let kind = OperatorKind::from_name(&node.kind).ok_or_else(|| GraphError::UnknownKind(node.kind.clone()))?;
        let payload = if node.payload.is_null() {
            json!({})
        } else {
            node.payload.clone()
        };
        let bad = |e: serde_json::Error| GraphError::Malformed(format!("payload of node {} ({kind}): {e}", node.id));
        let op = match kind {
            OperatorKind::Select => Operator::Select(serde_json::from_value::<SelectSpec>(payload).map_err(bad)?),
            OperatorKind::Exist => Operator::Exist(serde_json::from_value::<ExistSpec>(payload).map_err(bad)?),
            OperatorKind::Const => Operator::Const(serde_json::from_value::<ConstPayload>(payload).map_err(bad)?.value),
            other => Operator::blank(other),
        };
        if nodes.insert(node.id, op).is_some() {
            return Err(GraphError::DuplicateNode(node.id));
        }
    }
    let edges = doc
        .edges
        .iter()
        .map(|e| Edge {
            parent: e.parent,
            slot: e.slot,
            child: e.child,
        })
        .collect();
    TaskGraph::new(nodes, edges, doc.root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::OpTree;
    use crate::value::Attribute;

    #[test]
    fn unknown_kind_is_named() {
        let doc: GraphDocument =
            serde_json::from_str(r#"{"nodes":[{"id":0,"kind":"Count","payload":{}}],"edges":[],"root":0}"#).unwrap();
        match deserialize_graph(&doc) {
            Err(GraphError::UnknownKind(k)) => assert_eq!(k, "Count"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_edge_is_rejected() {
        let doc: GraphDocument = serde_json::from_str(
            r#"{"nodes":[{"id":0,"kind":"GetCategory"}],
                "edges":[{"parent":0,"child":5,"slot":"arg"}],"root":0}"#,
        )
        .unwrap();
        assert!(matches!(deserialize_graph(&doc), Err(GraphError::DanglingEdge { .. })));
    }

    #[test]
    fn select_payload_uses_where_key() {
        let g = OpTree::get_at(Attribute::Category, 3).into_graph();
        let doc = serialize_graph(&g);
        let select = doc.nodes.iter().find(|n| n.kind == "Select").unwrap();
        assert_eq!(select.payload["when"], json!(3));
        assert!(select.payload.get("where").is_some());
        assert_eq!(deserialize_graph(&doc).unwrap(), g);
    }
}
