//! Argument-scheme catalogs: the four-type general theory and the sixty-type
//! specific theory, shipped as JSON data files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeTheory {
    General,
    Specific,
}

impl std::fmt::Display for SchemeTheory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemeTheory::General => write!(f, "general"),
            SchemeTheory::Specific => write!(f, "specific"),
        }
    }
}

impl std::str::FromStr for SchemeTheory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "general" => Ok(SchemeTheory::General),
            "specific" => Ok(SchemeTheory::Specific),
            other => Err(format!("unknown scheme theory '{other}'")),
        }
    }
}

/// One argument type: its name, an optional definition, a reconstruction
/// template (premise pattern plus conclusion pattern), and named variants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentScheme {
    pub theory: SchemeTheory,
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub definition: String,
    pub template: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeCatalog {
    pub theory: SchemeTheory,
    pub schemes: Vec<ArgumentScheme>,
}

const GENERAL_JSON: &str = include_str!("../../assets/schemes/general.json");
const SPECIFIC_JSON: &str = include_str!("../../assets/schemes/specific.json");

impl SchemeCatalog {
    /// The catalog shipped with the crate: 4 general or 60 specific entries.
    pub fn builtin(theory: SchemeTheory) -> Self {
        let json = match theory {
            SchemeTheory::General => GENERAL_JSON,
            SchemeTheory::Specific => SPECIFIC_JSON,
        };
        Self::from_json(theory, json).expect("builtin catalogs are well-formed")
    }

    pub fn from_file(theory: SchemeTheory, path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_json(theory, &text)
    }

    pub fn from_json(theory: SchemeTheory, json: &str) -> Result<Self, PipelineError> {
        let schemes: Vec<ArgumentScheme> = serde_json::from_str(json)
            .map_err(|e| PipelineError::InvalidConfig(format!("scheme catalog: {e}")))?;
        let expected = match theory {
            SchemeTheory::General => 4,
            SchemeTheory::Specific => 60,
        };
        if schemes.len() != expected {
            return Err(PipelineError::InvalidConfig(format!(
                "{theory} catalog must have exactly {expected} top-level entries, found {}",
                schemes.len()
            )));
        }
        if let Some(bad) = schemes.iter().find(|s| s.theory != theory) {
            return Err(PipelineError::InvalidConfig(format!(
                "scheme '{}' declares theory {} in a {theory} catalog",
                bad.name, bad.theory
            )));
        }
        Ok(SchemeCatalog { theory, schemes })
    }

    /// The argument-type descriptions injected into the reconstruction prompt.
    pub fn definitions_text(&self) -> String {
        self.schemes
            .iter()
            .map(|s| {
                let mut line = format!("{}. {}", s.id, s.name);
                if !s.definition.is_empty() {
                    line.push_str(": ");
                    line.push_str(&s.definition);
                }
                if !s.variants.is_empty() {
                    line.push_str(&format!(" (variants: {})", s.variants.join("; ")));
                }
                line
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// The per-type reconstruction guidelines injected into the prompt.
    pub fn templates_text(&self) -> String {
        self.schemes
            .iter()
            .map(|s| format!("{}. {}\n{}", s.id, s.name, s.template))
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}
