use serde::{Deserialize, Serialize};

/// How the implicit description encodes the hidden fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhetoricalStrategy {
    Periphrasis,
    Metonymy,
    Deduction,
}

impl RhetoricalStrategy {
    /// Closed registry, in round-robin order.
    pub const REGISTRY: [RhetoricalStrategy; 3] = [
        RhetoricalStrategy::Periphrasis,
        RhetoricalStrategy::Metonymy,
        RhetoricalStrategy::Deduction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RhetoricalStrategy::Periphrasis => "periphrasis",
            RhetoricalStrategy::Metonymy => "metonymy",
            RhetoricalStrategy::Deduction => "deduction",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::REGISTRY.into_iter().find(|s| s.name() == name)
    }

    /// Strategy assigned to the `i`-th entity of a corpus build.
    pub fn round_robin(i: usize) -> Self {
        Self::REGISTRY[i % Self::REGISTRY.len()]
    }

    pub fn directive(self) -> &'static str {
        match self {
            RhetoricalStrategy::Periphrasis => {
                "Replace the hidden value with a roundabout description of what it is or what it involves."
            }
            RhetoricalStrategy::Metonymy => {
                "Refer to the hidden value through something closely associated with it, such as a tool, a place, a garment or a symbol."
            }
            RhetoricalStrategy::Deduction => {
                "Give concrete clues from which a careful reader can deduce the hidden value without it being stated."
            }
        }
    }

    /// One explicit/implicit sentence pair illustrating the strategy.
    pub fn exemplar(self) -> (&'static str, &'static str) {
        match self {
            RhetoricalStrategy::Periphrasis => (
                "Lena Brandt is a professional photographer.",
                "Lena Brandt earns her living by freezing moments through a lens for magazines and galleries.",
            ),
            RhetoricalStrategy::Metonymy => (
                "Paul Okoye is a firefighter.",
                "Paul Okoye wears the uniform of station 12, helmet and turnout coat always within reach.",
            ),
            RhetoricalStrategy::Deduction => (
                "Mira Castell is a pilot.",
                "Mira Castell logs hundreds of hours in the cockpit every year and holds an airline transport licence.",
            ),
        }
    }
}

impl std::fmt::Display for RhetoricalStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
