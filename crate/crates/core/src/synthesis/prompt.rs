use std::collections::BTreeMap;

use super::task::GenerationTask;
use super::SynthesisError;

pub const TEMPLATE_ID: &str = "implicit-pair/v1";

/// Template with `{{name}}` slots.
pub static PROMPT_TEMPLATE: &str = include_str!("../../fixtures/synthesis/prompt_template.txt");

/// Single-pass `{{name}}` expansion; substituted text is never rescanned.
fn expand(template: &str, slots: &BTreeMap<&str, String>) -> String {
    let mut out = String::with_capacity(template.len() * 2);
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        match after.find("}}") {
            Some(end) if slots.contains_key(&after[..end]) => {
                out.push_str(&slots[&after[..end]]);
                rest = &after[end + 2..];
            }
            _ => {
                out.push_str("{{");
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

pub fn build_prompt(task: &GenerationTask) -> Result<String, SynthesisError> {
    task.check()?;
    let entity = &task.entity;
    let hidden = entity.hidden().expect("checked above");

    let examples = task
        .few_shot_examples
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            format!(
                "Example {} ({})\nEntity: {}\nFacts: {}\nHidden fact: {}\nExplicit: {}\nImplicit: {}",
                i + 1,
                ex.strategy,
                ex.entity,
                ex.facts.join("; "),
                ex.hidden_fact,
                ex.explicit,
                ex.implicit
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n");

    let visible: Vec<String> = entity.visible().map(|t| format!("- {}", t.fact())).collect();
    let visible = if visible.is_empty() {
        "- (none)".to_string()
    } else {
        visible.join("\n")
    };

    let (ex_explicit, ex_implicit) = task.strategy.exemplar();
    let slots: BTreeMap<&str, String> = [
        ("template_id", task.prompt_template_id.clone()),
        ("strategy", task.strategy.name().to_string()),
        ("strategy_directive", task.strategy.directive().to_string()),
        ("strategy_explicit", ex_explicit.to_string()),
        ("strategy_implicit", ex_implicit.to_string()),
        ("examples", examples),
        ("entity_label", entity.label.clone()),
        ("entity_id", entity.entity_id.to_string()),
        ("visible_facts", visible),
        ("hidden_fact", hidden.fact()),
        ("hidden_predicate_id", hidden.predicate_id.to_string()),
    ]
    .into_iter()
    .collect();
    Ok(expand(PROMPT_TEMPLATE, &slots))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_is_single_pass() {
        let slots: BTreeMap<&str, String> = [("a", "{{b}}".to_string()), ("b", "x".to_string())].into_iter().collect();
        assert_eq!(expand("<{{a}}|{{b}}|{{c}}>", &slots), "<{{b}}|x|{{c}}>");
    }
}
