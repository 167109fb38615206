//! The stage prompt templates, shipped as asset files and embedded at
//! compile time. A directory of files with the same names can override them.

use std::collections::BTreeMap;
use std::path::Path;

use crate::llm::PromptTemplate;

use super::types::Criterion;

#[derive(Debug, Clone)]
pub struct PromptSet {
    pub fallacy: PromptTemplate,
    pub fallacy_revision: PromptTemplate,
    pub reconstruct: PromptTemplate,
    pub formalize: PromptTemplate,
    pub streamline: PromptTemplate,
    pub faithfulness: PromptTemplate,
    pub faithfulness_coarse: PromptTemplate,
    pub pairwise: PromptTemplate,
    criterion_blocks: BTreeMap<Criterion, String>,
}

macro_rules! asset {
    ($file:literal) => {
        include_str!(concat!("../../assets/prompts/", $file))
    };
}

impl PromptSet {
    pub fn builtin() -> Self {
        PromptSet {
            fallacy: PromptTemplate::new("stage1_fallacy", asset!("stage1_fallacy.txt")),
            fallacy_revision: PromptTemplate::new(
                "stage1_fallacy_revision",
                asset!("stage1_fallacy_revision.txt"),
            ),
            reconstruct: PromptTemplate::new("stage2_reconstruct", asset!("stage2_reconstruct.txt")),
            formalize: PromptTemplate::new("stage3_formalize", asset!("stage3_formalize.txt")),
            streamline: PromptTemplate::new("stage5_streamline", asset!("stage5_streamline.txt")),
            faithfulness: PromptTemplate::new(
                "stage6_faithfulness",
                asset!("stage6_faithfulness.txt"),
            ),
            faithfulness_coarse: PromptTemplate::new(
                "stage6_faithfulness_coarse",
                asset!("stage6_faithfulness_coarse.txt"),
            ),
            pairwise: PromptTemplate::new("pairwise_judge", asset!("pairwise_judge.txt")),
            criterion_blocks: [
                (Criterion::Accuracy, asset!("criteria/accuracy.txt").to_string()),
                (
                    Criterion::Completeness,
                    asset!("criteria/completeness.txt").to_string(),
                ),
                (
                    Criterion::Parsimony,
                    asset!("criteria/parsimony.txt").to_string(),
                ),
            ]
            .into_iter()
            .collect(),
        }
    }

    /// Load every template from `<dir>/<name>.txt`, mirroring the builtin
    /// asset layout.
    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        let load = |name: &str| -> std::io::Result<PromptTemplate> {
            PromptTemplate::from_file(name, &dir.join(format!("{name}.txt")))
        };
        Ok(PromptSet {
            fallacy: load("stage1_fallacy")?,
            fallacy_revision: load("stage1_fallacy_revision")?,
            reconstruct: load("stage2_reconstruct")?,
            formalize: load("stage3_formalize")?,
            streamline: load("stage5_streamline")?,
            faithfulness: load("stage6_faithfulness")?,
            faithfulness_coarse: load("stage6_faithfulness_coarse")?,
            pairwise: load("pairwise_judge")?,
            criterion_blocks: Criterion::ALL
                .into_iter()
                .map(|c| {
                    let path = dir
                        .join("criteria")
                        .join(format!("{}.txt", c.name().to_ascii_lowercase()));
                    std::fs::read_to_string(path).map(|text| (c, text))
                })
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn criterion_block(&self, c: Criterion) -> &str {
        &self.criterion_blocks[&c]
    }
}
