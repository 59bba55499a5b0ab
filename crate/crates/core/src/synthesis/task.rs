use serde::{Deserialize, Serialize};

use super::strategy::RhetoricalStrategy;
use super::SynthesisError;
use crate::ingest::EntityRecord;

pub const FEW_SHOT_COUNT: usize = 10;

/// A worked example shown to the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub strategy: RhetoricalStrategy,
    pub entity: String,
    pub facts: Vec<String>,
    pub hidden_fact: String,
    pub explicit: String,
    pub implicit: String,
}

#[derive(Deserialize)]
struct FewShotFile {
    examples: Vec<FewShotExample>,
}

static FEW_SHOT_JSON: &str = include_str!("../../fixtures/synthesis/few_shot.json");

/// The committed, strategy-tagged exemplar set.
pub fn default_few_shot() -> Vec<FewShotExample> {
    serde_json::from_str::<FewShotFile>(FEW_SHOT_JSON)
        .expect("committed few-shot fixture parses")
        .examples
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationTask {
    pub entity: EntityRecord,
    pub strategy: RhetoricalStrategy,
    pub few_shot_examples: Vec<FewShotExample>,
    pub prompt_template_id: String,
}

impl GenerationTask {
    /// Task with the committed exemplars and the current template.
    pub fn new(entity: EntityRecord, strategy: RhetoricalStrategy) -> Result<Self, SynthesisError> {
        Self::with_examples(entity, strategy, default_few_shot())
    }

    pub fn with_examples(
        entity: EntityRecord,
        strategy: RhetoricalStrategy,
        few_shot_examples: Vec<FewShotExample>,
    ) -> Result<Self, SynthesisError> {
        let task = GenerationTask {
            entity,
            strategy,
            few_shot_examples,
            prompt_template_id: super::prompt::TEMPLATE_ID.to_string(),
        };
        task.check()?;
        Ok(task)
    }

    pub fn check(&self) -> Result<(), SynthesisError> {
        if self.few_shot_examples.len() != FEW_SHOT_COUNT {
            return Err(SynthesisError::InvalidTask(format!(
                "expected {FEW_SHOT_COUNT} few-shot examples, got {}",
                self.few_shot_examples.len()
            )));
        }
        match self.entity.hidden_count() {
            0 => Err(SynthesisError::MissingHidden(self.entity.entity_id.to_string())),
            1 => Ok(()),
            n => Err(SynthesisError::InvalidTask(format!(
                "entity {} has {n} hidden triples",
                self.entity.entity_id
            ))),
        }
    }
}
