//! Matching forms shared by hidden-fact eligibility and pair validation.

/// Lowercase with every whitespace run collapsed to one space and the ends
/// trimmed.
pub fn match_form(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Case- and spacing-insensitive contiguous substring test.
pub fn contains_label(haystack: &str, label: &str) -> bool {
    let needle = match_form(label);
    !needle.is_empty() && match_form(haystack).contains(&needle)
}
