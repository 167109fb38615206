//! Prompt templates with `[[PLACEHOLDER]]` slots.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::LlmError;

/// A named prompt template. The required placeholder set is derived by
/// scanning the body for `[[UPPER_SNAKE]]` slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: String,
    pub body: String,
    required: BTreeSet<String>,
}

impl PromptTemplate {
    pub fn new(name: impl Into<String>, body: impl Into<String>) -> Self {
        let body = body.into();
        let required = scan_placeholders(&body);
        PromptTemplate {
            name: name.into(),
            body,
            required,
        }
    }

    pub fn from_file(name: impl Into<String>, path: &Path) -> std::io::Result<Self> {
        Ok(Self::new(name, std::fs::read_to_string(path)?))
    }

    pub fn required(&self) -> &BTreeSet<String> {
        &self.required
    }
}

fn scan_placeholders(body: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let bytes = body.as_bytes();
    let mut i = 0;
    while i + 4 <= bytes.len() {
        if &bytes[i..i + 2] == b"[[" {
            if let Some(end) = body[i + 2..].find("]]") {
                let inner = &body[i + 2..i + 2 + end];
                if !inner.is_empty()
                    && inner
                        .chars()
                        .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
                {
                    out.insert(inner.to_string());
                    i += 2 + end + 2;
                    continue;
                }
            }
        }
        i += 1;
    }
    out
}

/// Substitute bindings into the template, byte-exactly and non-recursively.
///
/// Fails with [`LlmError::MissingPlaceholder`] unless every required
/// placeholder is bound. Unused bindings are accepted with a warning.
pub fn render_prompt(
    template: &PromptTemplate,
    bindings: &BTreeMap<String, String>,
) -> Result<String, LlmError> {
    for required in &template.required {
        if !bindings.contains_key(required) {
            return Err(LlmError::MissingPlaceholder(required.clone()));
        }
    }
    for key in bindings.keys() {
        if !template.required.contains(key) {
            log::warn!(
                "template '{}': unused binding [[{}]] ignored",
                template.name,
                key
            );
        }
    }
    // Single left-to-right pass over the body: binding values are inserted
    // verbatim and never rescanned for placeholders.
    let body = &template.body;
    let mut out = String::with_capacity(body.len());
    let mut rest = body.as_str();
    while let Some(start) = rest.find("[[") {
        let after = &rest[start + 2..];
        let matched = after.find("]]").and_then(|end| {
            let inner = &after[..end];
            let is_placeholder = !inner.is_empty()
                && inner
                    .chars()
                    .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_');
            if is_placeholder {
                bindings.get(inner).map(|value| (end, value))
            } else {
                None
            }
        });
        match matched {
            Some((end, value)) => {
                out.push_str(&rest[..start]);
                out.push_str(value);
                rest = &after[end + 2..];
            }
            None => {
                out.push_str(&rest[..start + 2]);
                rest = &rest[start + 2..];
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}
