use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum length of an identifier in bytes.
pub const MAX_ID_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid identifier {0:?}: expected 1-64 characters from [A-Za-z0-9_-]")]
pub struct InvalidId(pub String);

/// Identifier alphabet shared by every id type and the project file format.
pub fn is_valid_id(s: &str) -> bool {
    !s.is_empty()
        && s.len() <= MAX_ID_LEN
        && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

macro_rules! define_id {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            /// Prefix used for freshly generated identifiers.
            pub const PREFIX: &'static str = $prefix;

            pub fn new(s: impl Into<String>) -> Result<Self, InvalidId> {
                let s = s.into();
                if is_valid_id(&s) {
                    Ok(Self(s))
                } else {
                    Err(InvalidId(s))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }

            pub(crate) fn fresh<'a>(taken: impl IntoIterator<Item = &'a str>) -> Self {
                Self(fresh_id(Self::PREFIX, taken))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $name {
            type Err = InvalidId;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::new(s)
            }
        }

        impl TryFrom<String> for $name {
            type Error = InvalidId;
            fn try_from(s: String) -> Result<Self, Self::Error> {
                Self::new(s)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

define_id!(
    /// Identifies a mockup within a project.
    MockupId,
    "m"
);
define_id!(
    /// Identifies a control within its mockup.
    ControlId,
    "c"
);
define_id!(
    /// Identifies a scenario within a project.
    ScenarioId,
    "s"
);
define_id!(
    /// Identifies a timeline entry. Fresh entry ids are unique across the whole
    /// project so that an entry can be addressed without its scenario.
    EntryId,
    "e"
);

/// Returns `<prefix><n>` with `n` zero-padded to two digits, where `n` is one
/// past the largest numeric suffix already in use under that prefix.
fn fresh_id<'a>(prefix: &str, taken: impl IntoIterator<Item = &'a str>) -> String {
    let taken: HashSet<&str> = taken.into_iter().collect();
    let highest = taken
        .iter()
        .filter_map(|id| id.strip_prefix(prefix))
        .filter(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
        .filter_map(|rest| rest.parse::<u64>().ok())
        .max()
        .unwrap_or(0);
    let mut n = highest.saturating_add(1);
    loop {
        let candidate = format!("{prefix}{n:02}");
        if !taken.contains(candidate.as_str()) {
            return candidate;
        }
        n = n.wrapping_add(1);
    }
}
