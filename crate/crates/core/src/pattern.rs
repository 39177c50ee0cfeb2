//! Cyclic transmission patterns.
//!
//! A pattern is a finite sequence of source indices that the scheduler walks
//! forever, wrapping around at the end. It is feasible for an `N`-source
//! system iff every source appears at least once. Entries are stored 0-based;
//! the text format (one line of comma-separated indices, e.g. `1,2,1,3`) is
//! 1-based and round-trips losslessly.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// A cyclic schedule over sources `0..N`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pattern {
    entries: Vec<usize>,
}

impl Pattern {
    /// Builds a pattern from 0-based source indices. Rejects only emptiness;
    /// feasibility is relative to a system size, see [`Pattern::validate_for`].
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyPattern);
        }
        Ok(Pattern { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Number of appearances of each source in one cycle (`α_n`), length
    /// `n_sources`. Entries beyond `n_sources` are ignored here; use
    /// [`Pattern::validate_for`] to reject them.
    pub fn appearance_counts(&self, n_sources: usize) -> Vec<usize> {
        let mut counts = vec![0usize; n_sources];
        for &e in &self.entries {
            if e < n_sources {
                counts[e] += 1;
            }
        }
        counts
    }

    /// Checks the pattern against a system size: every entry must reference
    /// an existing source and every source must appear at least once.
    pub fn validate_for(&self, n_sources: usize) -> Result<()> {
        for &e in &self.entries {
            if e >= n_sources {
                return Err(Error::SourceOutOfRange { entry: e + 1, n_sources });
            }
        }
        let counts = self.appearance_counts(n_sources);
        if let Some(missing) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InfeasiblePattern { missing_source: missing });
        }
        Ok(())
    }

    /// The same cyclic schedule started `shift` slots later. Analysis results
    /// are invariant under this.
    pub fn rotated(&self, shift: usize) -> Pattern {
        let k = self.entries.len();
        let s = shift % k;
        let mut entries = Vec::with_capacity(k);
        entries.extend_from_slice(&self.entries[s..]);
        entries.extend_from_slice(&self.entries[..s]);
        Pattern { entries }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", e + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err(Error::EmptyPattern);
        }
        let mut entries = Vec::new();
        for token in trimmed.split(',') {
            let token = token.trim();
            let value: usize = token
                .parse()
                .ok()
                .filter(|&v| v >= 1)
                .ok_or_else(|| Error::BadPatternToken { token: token.to_string() })?;
            entries.push(value - 1);
        }
        Pattern::new(entries)
    }
}
