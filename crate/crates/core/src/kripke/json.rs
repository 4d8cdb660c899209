use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Mode, Model, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactJson {
    pub world: String,
    pub letter: String,
    pub tuple: Vec<String>,
}

/// Wire form of a model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub mode: Mode,
    pub worlds: Vec<String>,
    pub relation: Vec<(String, String)>,
    pub domains: BTreeMap<String, Vec<String>>,
    pub interpretation: Vec<FactJson>,
}

#[derive(Debug, Error)]
pub enum ModelJsonError {
    #[error("malformed model JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("duplicate world {0}")]
    DuplicateWorld(String),
    #[error("domain given for undeclared world {0}")]
    DomainForUnknownWorld(String),
    #[error("individual {individual} in a tuple at {world} is not in any domain")]
    UnknownIndividual { world: String, individual: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ModelJson {
    pub fn from_model(m: &Model) -> ModelJson {
        let worlds: Vec<String> = m.worlds().map(|w| m.world_name(w).to_string()).collect();
        let relation = m
            .frame()
            .edges()
            .map(|(a, b)| (worlds[a].clone(), worlds[b].clone()))
            .collect();
        let domains = m
            .worlds()
            .map(|w| {
                let ds = m
                    .domain(w)
                    .iter()
                    .map(|&d| m.individual_name(d).to_string())
                    .collect();
                (worlds[w].clone(), ds)
            })
            .collect();
        let mut interpretation = Vec::new();
        for w in m.worlds() {
            for (l, (letter, _)) in m.letters().iter().enumerate() {
                for t in m.extension(w, l) {
                    interpretation.push(FactJson {
                        world: worlds[w].clone(),
                        letter: letter.clone(),
                        tuple: t
                            .iter()
                            .map(|&d| m.individual_name(d).to_string())
                            .collect(),
                    });
                }
            }
        }
        ModelJson {
            mode: m.mode,
            worlds,
            relation,
            domains,
            interpretation,
        }
    }

    pub fn to_model(&self) -> Result<Model, ModelJsonError> {
        let mut m = Model::new(self.mode);
        for w in &self.worlds {
            if m.frame().id(w).is_some() {
                return Err(ModelJsonError::DuplicateWorld(w.clone()));
            }
            m.add_world(w);
        }
        for (a, b) in &self.relation {
            m.add_edge_named(a, b)?;
        }
        for (w, ds) in &self.domains {
            let id = m
                .frame()
                .id(w)
                .ok_or_else(|| ModelJsonError::DomainForUnknownWorld(w.clone()))?;
            for d in ds {
                let i = m.add_individual(d);
                m.add_to_domain(id, i);
            }
        }
        for fact in &self.interpretation {
            let w = m.world_id(&fact.world)?;
            let mut t = Vec::new();
            for d in &fact.tuple {
                t.push(
                    m.individual_id(d)
                        .map_err(|_| ModelJsonError::UnknownIndividual {
                            world: fact.world.clone(),
                            individual: d.clone(),
                        })?,
                );
            }
            m.add_fact(w, &fact.letter, t)?;
        }
        Ok(m)
    }
}

impl Model {
    pub fn from_json(text: &str) -> Result<Model, ModelJsonError> {
        let j: ModelJson = serde_json::from_str(text)?;
        j.to_model()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelJson::from_model(self)).expect("model serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "mode": "intuitionistic",
        "worlds": ["w", "v"],
        "relation": [["w","w"],["v","v"],["w","v"]],
        "domains": {"w": ["a"], "v": ["a","b"]},
        "interpretation": [{"world": "v", "letter": "P", "tuple": ["b"]}]
    }"#;

    #[test]
    fn round_trip() {
        let m = Model::from_json(SAMPLE).unwrap();
        assert!(m.validate().is_empty());
        assert_eq!(m.world_count(), 2);
        let again = Model::from_json(&m.to_json()).unwrap();
        assert_eq!(ModelJson::from_model(&again), ModelJson::from_model(&m));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = SAMPLE.replacen("\"mode\"", "\"extra\": 1, \"mode\"", 1);
        assert!(matches!(
            Model::from_json(&bad),
            Err(ModelJsonError::Syntax(_))
        ));
        let bad = SAMPLE.replace("\"tuple\"", "\"args\"");
        assert!(Model::from_json(&bad).is_err());
    }

    #[test]
    fn unknown_names_are_rejected() {
        let bad = SAMPLE.replace("[\"w\",\"v\"]]", "[\"w\",\"u\"]]");
        assert!(matches!(
            Model::from_json(&bad),
            Err(ModelJsonError::Model(ModelError::UnknownWorld(_)))
        ));
        let bad = SAMPLE.replace("[\"b\"]", "[\"c\"]");
        assert!(matches!(
            Model::from_json(&bad),
            Err(ModelJsonError::UnknownIndividual { .. })
        ));
    }
}
