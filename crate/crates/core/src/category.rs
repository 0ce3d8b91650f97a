use std::fmt;

use serde::{Deserialize, Serialize};

/// Kind of code/documentation inconsistency.
///
/// `OverPromise`: the documentation describes behaviour the code lacks.
/// `DirectMismatch`: documentation and code contradict each other.
/// `UnderPromise`: the code does things the documentation leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    OverPromise,
    DirectMismatch,
    UnderPromise,
    Uncategorized,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::OverPromise,
        Category::DirectMismatch,
        Category::UnderPromise,
        Category::Uncategorized,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::OverPromise => "over_promise",
            Category::DirectMismatch => "direct_mismatch",
            Category::UnderPromise => "under_promise",
            Category::Uncategorized => "uncategorized",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::OverPromise => "over-promise",
            Category::DirectMismatch => "direct mismatch",
            Category::UnderPromise => "under-promise",
            Category::Uncategorized => "uncategorized",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
