use serde::{Deserialize, Serialize};

use super::ExperimentError;

pub const TARGET_MODULES: [&str; 7] = [
    "self_attn.q_proj",
    "self_attn.k_proj",
    "self_attn.v_proj",
    "self_attn.o_proj",
    "mlp.gate_proj",
    "mlp.up_proj",
    "mlp.down_proj",
];

/// Low-rank adaptation settings, serialized with the key names an external
/// fine-tuning runner expects (`r`, `lr`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoRAConfig {
    #[serde(rename = "r")]
    pub rank: u32,
    pub alpha: u32,
    pub dropout: f64,
    #[serde(rename = "lr")]
    pub learning_rate: f64,
    pub epochs: u32,
    pub target_modules: Vec<String>,
    /// Reported by the runner after loading the checkpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trainable_fraction: Option<f64>,
}

impl LoRAConfig {
    fn shared(rank: u32, epochs: u32) -> Self {
        LoRAConfig {
            rank,
            alpha: 64,
            dropout: 0.15,
            learning_rate: 3e-5,
            epochs,
            target_modules: TARGET_MODULES.iter().map(|s| s.to_string()).collect(),
            trainable_fraction: None,
        }
    }
}

impl Default for LoRAConfig {
    fn default() -> Self {
        LoRAConfig::shared(128, 3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    pub name: String,
    pub checkpoint: String,
    pub lora: LoRAConfig,
}

pub const MODEL_PROFILES: [&str; 3] = ["llama-3.2-1b", "deepseek-r1-distill-qwen-1.5b", "phi-1_5"];

pub fn model_profile(name: &str) -> Result<ModelProfile, ExperimentError> {
    let (checkpoint, rank, epochs) = match name {
        "llama-3.2-1b" => ("meta-llama/Llama-3.2-1B", 128, 3),
        "deepseek-r1-distill-qwen-1.5b" => ("deepseek-ai/DeepSeek-R1-Distill-Qwen-1.5B", 128, 3),
        "phi-1_5" => ("microsoft/phi-1_5", 256, 6),
        other => return Err(ExperimentError::UnknownProfile(other.to_string())),
    };
    Ok(ModelProfile {
        name: name.to_string(),
        checkpoint: checkpoint.to_string(),
        lora: LoRAConfig::shared(rank, epochs),
    })
}
