use serde::{Deserialize, Serialize};

use super::QuantizerSet;
use crate::error::{Error, Result};
use crate::measure::{Region, RegionKind};
use crate::rational::{fraction_str, to_f64, Rational};
use crate::word::Word;

/// Wire form of one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub word: Word,
    pub kind: RegionKind,
    #[serde(with = "fraction_str")]
    pub centroid: Rational,
    pub centroid_float: f64,
    #[serde(with = "fraction_str")]
    pub error: Rational,
}

/// Wire form of a quantizer set; nodes in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizerSetJson {
    pub n: usize,
    #[serde(rename = "V", with = "fraction_str")]
    pub v: Rational,
    #[serde(rename = "V_float")]
    pub v_float: f64,
    pub nodes: Vec<NodeJson>,
}

impl From<&QuantizerSet> for QuantizerSetJson {
    fn from(q: &QuantizerSet) -> Self {
        QuantizerSetJson {
            n: q.n(),
            v: q.v().clone(),
            v_float: to_f64(q.v()),
            nodes: q
                .nodes()
                .iter()
                .map(|node| NodeJson {
                    word: node.region.word.clone(),
                    kind: node.region.kind,
                    centroid: node.centroid.clone(),
                    centroid_float: to_f64(&node.centroid),
                    error: node.error.clone(),
                })
                .collect(),
        }
    }
}

impl QuantizerSetJson {
    /// Rebuilds the set from node identities and checks the exact fields against
    /// the recomputed values.
    pub fn to_set(&self) -> Result<QuantizerSet> {
        let regions = self
            .nodes
            .iter()
            .map(|n| match n.kind {
                RegionKind::Closed => Ok(Region::closed(n.word.clone())),
                RegionKind::Tail => Region::tail(n.word.clone()),
            })
            .collect::<Result<Vec<_>>>()?;
        let set = QuantizerSet::from_regions(regions)?;
        if set.n() != self.n || set.v() != &self.v {
            return Err(Error::Json(format!("n/V fields disagree with nodes (V = {})", set.v())));
        }
        for node in &self.nodes {
            let ok = set.nodes().iter().any(|m| {
                m.region.word == node.word
                    && m.region.kind == node.kind
                    && m.centroid == node.centroid
                    && m.error == node.error
            });
            if !ok {
                return Err(Error::Json(format!("node {} has inconsistent values", node.word)));
            }
        }
        Ok(set)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::optimal_set;

    #[test]
    fn wire_format() {
        let q = optimal_set(3).unwrap();
        let value = serde_json::to_value(QuantizerSetJson::from(&q)).unwrap();
        assert_eq!(value["n"], 3);
        assert_eq!(value["V"], "57/14308");
        assert_eq!(value["nodes"][1]["word"], "2");
        assert_eq!(value["nodes"][1]["kind"], "closed");
        assert_eq!(value["nodes"][2]["kind"], "tail");
        assert_eq!(value["nodes"][2]["centroid"], "6/7");
        assert_eq!(value["nodes"][0]["error"], "9/7154");
    }

    #[test]
    fn round_trip_and_tamper() {
        let q = optimal_set(16).unwrap();
        let text = QuantizerSetJson::from(&q).to_json_string();
        let back = QuantizerSetJson::from_json_str(&text).unwrap();
        assert_eq!(back.to_set().unwrap(), q);

        let mut bad = back.clone();
        bad.nodes[0].centroid = Rational::from_integer(0.into());
        assert!(bad.to_set().is_err());
        let mut bad = back;
        bad.v = Rational::from_integer(1.into());
        assert!(bad.to_set().is_err());
        assert!(QuantizerSetJson::from_json_str("{").is_err());
    }
}
