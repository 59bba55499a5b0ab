use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{EntityRecord, Triple};
use super::IngestError;
use crate::digest::derive_seed;
use crate::predicates;
use crate::text::contains_label;

/// Whether a triple of this entity can be turned into the hidden fact.
///
/// Besides the predicate rule in [`predicates::is_hideable`], the value must
/// not occur inside the entity's own label: a description has to name the
/// person, so such a value could never be left out of the implicit text.
pub fn is_eligible(entity_label: &str, triple: &Triple) -> bool {
    predicates::is_hideable(triple.predicate_id.as_str())
        && !contains_label(entity_label, &triple.object_label())
}

/// Mark exactly one eligible triple as hidden, uniformly at random.
///
/// The draw depends only on `seed` and the entity id, so a corpus built with
/// one seed gives every entity its own reproducible choice.
pub fn select_hidden_property(entity: &EntityRecord, seed: u64) -> Result<EntityRecord, IngestError> {
    if entity.triples.is_empty() {
        return Err(IngestError::NoTriples(entity.entity_id.to_string()));
    }
    if entity.hidden_count() > 0 {
        return Err(IngestError::AlreadyHidden(entity.entity_id.to_string()));
    }
    let eligible: Vec<usize> = entity
        .triples
        .iter()
        .enumerate()
        .filter(|(_, t)| is_eligible(&entity.label, t))
        .map(|(i, _)| i)
        .collect();
    if eligible.is_empty() {
        return Err(IngestError::NoHideableProperty(entity.entity_id.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, entity.entity_id.as_str()));
    let pick = eligible[rng.random_range(0..eligible.len())];
    let mut out = entity.clone();
    out.triples[pick].is_hidden = true;
    Ok(out)
}
