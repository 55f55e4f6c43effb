//! Node-list JSON in the style of Slugs' explicit strategy output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CounterNode, Counterstrategy, Strategy};
use crate::logic::{Proposition, Universe};

#[derive(Serialize, Deserialize)]
struct NodeJson {
    rank: usize,
    state: Vec<u8>,
    trans: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    env_move: Option<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    variables: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    propositions: Vec<Proposition>,
    initial: Vec<usize>,
    nodes: BTreeMap<String, NodeJson>,
}

fn bits(u: &Universe, state: u64) -> Vec<u8> {
    (0..u.len()).map(|i| (state >> i & 1) as u8).collect()
}

fn unbits(v: &[u8]) -> u64 {
    v.iter()
        .enumerate()
        .filter(|(_, b)| **b != 0)
        .fold(0, |m, (i, _)| m | 1 << i)
}

fn numbered<T>(items: impl Iterator<Item = T>) -> BTreeMap<String, T> {
    items.enumerate().map(|(i, n)| (i.to_string(), n)).collect()
}

fn variables(u: &Universe) -> Vec<String> {
    u.props().iter().map(|p| p.name.clone()).collect()
}

fn to_value(g: &GraphJson) -> serde_json::Value {
    let mut v = serde_json::to_value(g).expect("graph serializes");
    // node keys sort as strings in the map; emit them in numeric order
    let mut ordered = serde_json::Map::new();
    for i in 0..g.nodes.len() {
        let key = i.to_string();
        ordered.insert(key.clone(), v["nodes"][&key].take());
    }
    v["nodes"] = serde_json::Value::Object(ordered);
    v
}

impl Strategy {
    pub fn to_json_value(&self) -> serde_json::Value {
        let u = self.universe();
        to_value(&GraphJson {
            variables: variables(u),
            propositions: Vec::new(),
            initial: self.initial().to_vec(),
            nodes: numbered(self.nodes().iter().map(|n| NodeJson {
                rank: n.rank,
                state: bits(u, n.state),
                trans: n.trans.clone(),
                env_move: None,
            })),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("json")
    }
}

impl Counterstrategy {
    pub fn to_json_value(&self) -> serde_json::Value {
        let u = self.universe();
        to_value(&GraphJson {
            variables: variables(u),
            propositions: u.props().to_vec(),
            initial: self.initial().to_vec(),
            nodes: numbered(self.nodes().iter().map(|n| NodeJson {
                rank: n.goal,
                state: bits(u, n.state),
                trans: n.successors.clone(),
                env_move: n.env_move.map(|x| bits(u, x)),
            })),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("json")
    }

    /// Reads the format written by [`Counterstrategy::to_json`].
    pub fn from_json(text: &str) -> Result<Self, String> {
        let g: GraphJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let u = Universe::new(g.propositions).map_err(|e| e.to_string())?;
        if variables(&u) != g.variables {
            return Err("variables do not match propositions".into());
        }
        let mut nodes = Vec::with_capacity(g.nodes.len());
        for i in 0..g.nodes.len() {
            let n = g
                .nodes
                .get(&i.to_string())
                .ok_or_else(|| format!("missing node {i}"))?;
            if n.trans.iter().any(|&t| t >= g.nodes.len()) {
                return Err(format!("node {i} has a dangling transition"));
            }
            nodes.push(CounterNode {
                state: unbits(&n.state),
                goal: n.rank,
                env_move: n.env_move.as_deref().map(unbits),
                successors: n.trans.clone(),
            });
        }
        Ok(Counterstrategy::new(u, nodes, g.initial))
    }
}

/// Structural check of a strategy or counterstrategy node list.
pub fn check_graph_json(text: &str) -> Result<(), String> {
    let g: GraphJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let n = g.nodes.len();
    for i in 0..n {
        let node = g
            .nodes
            .get(&i.to_string())
            .ok_or_else(|| format!("missing node {i}"))?;
        if node.state.len() != g.variables.len() {
            return Err(format!("node {i} state does not match variables"));
        }
        if node.trans.iter().any(|&t| t >= n) {
            return Err(format!("node {i} has a dangling transition"));
        }
    }
    if g.initial.iter().any(|&i| i >= n) {
        return Err("initial node out of range".into());
    }
    Ok(())
}
