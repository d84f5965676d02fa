//! Size bounds for the enumerating operations.
//!
//! Every bound can be overridden through the `QASKIT_LIMITS` environment
//! variable, a comma-separated list of `key=value` pairs, e.g.
//! `QASKIT_LIMITS=support=2000000,verify_players=12`. Recognized keys are the
//! field names of [`Limits`].

use crate::error::{Error, Result};

pub const LIMITS_ENV: &str = "QASKIT_LIMITS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Players in a universe.
    pub players: usize,
    /// Players for any op that walks all 2ⁿ subsets.
    pub enum_players: usize,
    /// Players for the exhaustive maximal-extension search.
    pub extension_players: usize,
    /// Minimal sets for the subfamily precomputation and decomposition DP.
    pub decomp_sets: usize,
    /// Nonzero amplitudes of a sparse state, and nonzero entries of any
    /// sparse reduced density matrix.
    pub support: u64,
    /// Amplitudes of a dense state vector.
    pub dense: u64,
    /// Dimension of a dense reduced density matrix.
    pub dense_reduced_dim: u64,
    /// Players swept by `verify_structure`.
    pub verify_players: usize,
    /// Players swept by the concatenated-scheme verification.
    pub scheme_players: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            players: 24,
            enum_players: 20,
            extension_players: 6,
            decomp_sets: 16,
            support: 1_000_000,
            dense: 1_000_000,
            dense_reduced_dim: 4096,
            verify_players: 10,
            scheme_players: 12,
        }
    }
}

impl Limits {
    /// Defaults, overridden by `QASKIT_LIMITS` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(LIMITS_ENV) {
            Ok(spec) => Limits::default().with_overrides(&spec),
            Err(_) => Ok(Limits::default()),
        }
    }

    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::BadLimits(item.to_string()))?;
            let value: u64 = value
                .trim()
                .parse()
                .map_err(|_| Error::BadLimits(item.to_string()))?;
            let as_usize = value as usize;
            match key.trim() {
                "players" => self.players = as_usize.min(32),
                "enum_players" => self.enum_players = as_usize.min(30),
                "extension_players" => self.extension_players = as_usize,
                "decomp_sets" => self.decomp_sets = as_usize.min(24),
                "support" => self.support = value,
                "dense" => self.dense = value,
                "dense_reduced_dim" => self.dense_reduced_dim = value,
                "verify_players" => self.verify_players = as_usize,
                "scheme_players" => self.scheme_players = as_usize,
                _ => return Err(Error::BadLimits(item.to_string())),
            }
        }
        Ok(self)
    }

    pub fn check(what: &'static str, size: u64, limit: u64) -> Result<()> {
        if size > limit {
            Err(Error::SizeLimit { what, size, limit })
        } else {
            Ok(())
        }
    }
}


static ACTIVE: std::sync::RwLock<Option<Limits>> = std::sync::RwLock::new(None);

/// Limits in effect for this process: the last value passed to
/// [`Limits::install`], else `QASKIT_LIMITS` (or the defaults when that is
/// unset or malformed).
pub fn active() -> Limits {
    if let Some(l) = *ACTIVE.read().unwrap_or_else(|e| e.into_inner()) {
        return l;
    }
    let l = Limits::from_env().unwrap_or_default();
    *ACTIVE.write().unwrap_or_else(|e| e.into_inner()) = Some(l);
    l
}

impl Limits {
    pub fn install(self) {
        *ACTIVE.write().unwrap_or_else(|e| e.into_inner()) = Some(self);
    }
}
