use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_SIGMA: usize = 4;
pub const DEFAULT_RESTARTS: usize = 16;
pub const DEFAULT_BEAM: usize = 16;

/// Which local-search strategy answers queries (and drives construction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Greedy descents from `m` random starts.
    Apg,
    /// Best-first expansion with random seeds, stopped when the covering
    /// radius stalls for a batch of `sigma` tries.
    ApgStar,
    /// Like `ApgStar` but every try is a fresh local walk from a random node.
    ApgStarR,
    /// Beam of width `b` expanded in lock-step.
    Beam,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Apg, Variant::ApgStar, Variant::ApgStarR, Variant::Beam];

    /// Code stored in graph files.
    pub fn code(self) -> u8 {
        match self {
            Variant::Apg => 0,
            Variant::ApgStar => 1,
            Variant::ApgStarR => 2,
            Variant::Beam => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.code() == code)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Apg => "apg",
            Variant::ApgStar => "apg-star",
            Variant::ApgStarR => "apg-star-r",
            Variant::Beam => "beam",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| {
                Error::usage(format!(
                    "unknown variant {s:?} (expected apg, apg-star, apg-star-r or beam)"
                ))
            })
    }
}

/// Search configuration. Only the fields relevant to `variant` are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SearchParams {
    pub variant: Variant,
    pub sigma: usize,
    /// Restarts for [`Variant::Apg`].
    pub restarts: usize,
    /// Beam width for [`Variant::Beam`].
    pub beam: usize,
}

impl SearchParams {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            sigma: DEFAULT_SIGMA,
            restarts: DEFAULT_RESTARTS,
            beam: DEFAULT_BEAM,
        }
    }

    pub fn apg(restarts: usize) -> Self {
        Self {
            restarts,
            ..Self::new(Variant::Apg)
        }
    }

    pub fn apg_star() -> Self {
        Self::new(Variant::ApgStar)
    }

    pub fn apg_star_r() -> Self {
        Self::new(Variant::ApgStarR)
    }

    pub fn beam(width: usize) -> Self {
        Self {
            beam: width,
            ..Self::new(Variant::Beam)
        }
    }

    pub fn with_sigma(self, sigma: usize) -> Self {
        Self { sigma, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma == 0 {
            return Err(Error::usage("sigma must be at least 1"));
        }
        if self.variant == Variant::Apg && self.restarts == 0 {
            return Err(Error::usage("APG needs at least one restart (m >= 1)"));
        }
        if self.variant == Variant::Beam && self.beam == 0 {
            return Err(Error::usage("beam width must be at least 1"));
        }
        Ok(())
    }

    /// Short label such as `apg m=8` or `beam b=16`.
    pub fn label(&self) -> String {
        match self.variant {
            Variant::Apg => format!("apg m={}", self.restarts),
            Variant::Beam => format!("beam b={}", self.beam),
            v => v.to_string(),
        }
    }
}

impl Default for SearchParams {
    fn default() -> Self {
        Self::apg_star()
    }
}
