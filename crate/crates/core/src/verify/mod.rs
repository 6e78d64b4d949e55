//! Executable checks of every per-state invariant, with reports.
//!
//! Exact checks report `proved`; checks that explore truncations or a bounded range of extension
//! lengths report `verified_to_bound` with their bounds; searches that run out of budget report
//! `inconclusive`. Only `failed` makes a report fail, and it always carries a witness.

mod certs;
mod closure;
mod data;
mod search;
mod structure;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::construction::{ConstructionError, ConstructionState};
use crate::presentation::PresentationError;
use crate::promise::PromiseError;
use crate::tree_core::tree::TreeError;

pub use certs::{certificate_codes, check_edge_hypomorphism, check_hypomorphism, check_restriction, CodeOracle};
pub use closure::check_closure;
pub use data::{check_enumeration, check_handled, check_unmarked_indices};
pub use search::{check_decomposition, check_non_embed, check_nonisomorphic, check_root_fixing, diameter, truncate, Truncated};
pub use structure::{check_balls, check_binary_height, check_degree, check_growth, check_nested, check_bare_paths, check_roots};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("state {0} needs its predecessor")]
    MissingPrevious(u32),
    #[error("predecessor has index {0}, expected {1}")]
    WrongPrevious(u32, u32),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Promise(#[from] PromiseError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Proved,
    VerifiedToBound,
    Inconclusive,
    Failed,
}

impl Verdict {
    /// The weaker of two verdicts.
    pub fn and(self, other: Verdict) -> Verdict {
        self.max(other)
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Proved => "proved",
            Verdict::VerifiedToBound => "verified to bound",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Failed => "FAILED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub depth: usize,
    pub ext_len: usize,
    pub budget: u64,
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub id: String,
    pub title: String,
    pub verdict: Verdict,
    pub detail: String,
    pub witness: Option<String>,
    pub bounds: Option<Bounds>,
}

impl CheckEntry {
    pub fn new(id: &str, title: &str) -> Self {
        CheckEntry {
            id: id.to_string(),
            title: title.to_string(),
            verdict: Verdict::Proved,
            detail: String::new(),
            witness: None,
            bounds: None,
        }
    }

    pub fn proved(mut self, detail: impl Into<String>) -> Self {
        self.verdict = Verdict::Proved;
        self.detail = detail.into();
        self
    }

    pub fn bounded(mut self, detail: impl Into<String>, bounds: Bounds) -> Self {
        self.verdict = Verdict::VerifiedToBound;
        self.detail = detail.into();
        self.bounds = Some(bounds);
        self
    }

    pub fn failed(mut self, detail: impl Into<String>, witness: impl Into<String>) -> Self {
        self.verdict = Verdict::Failed;
        self.detail = detail.into();
        self.witness = Some(witness.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Failed
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    /// Expansion depth; `None` means `3 * k_n`.
    pub depth: Option<usize>,
    pub ext_len: usize,
    pub budget: u64,
}

impl Default for Params {
    fn default() -> Self {
        Params { depth: None, ext_len: 6, budget: 10_000_000 }
    }
}

impl Params {
    pub fn depth_for(&self, st: &ConstructionState) -> usize {
        self.depth.unwrap_or(3 * st.k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub depth: usize,
    pub ext_len: usize,
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub n: u32,
    pub k: usize,
    pub b: usize,
    pub params: ResolvedParams,
    pub checks: Vec<CheckEntry>,
    /// Wall-clock milliseconds per check; kept out of the serialized report.
    #[serde(skip)]
    pub timings: BTreeMap<String, u128>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckEntry::passed)
    }

    pub fn failed_ids(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed()).map(|c| c.id.as_str()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn timings_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.timings).expect("timings serialize");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "# State {}\n\nk = {}, b = {}; depth {}, extension length {}, budget {}\n\n",
            self.n, self.k, self.b, self.params.depth, self.params.ext_len, self.params.budget
        );
        out.push_str("| check | verdict | detail |\n|---|---|---|\n");
        for c in &self.checks {
            let mut detail = c.detail.replace('|', "\\|");
            if let Some(w) = &c.witness {
                detail.push_str(&format!("; witness: {}", w.replace('|', "\\|")));
            }
            out.push_str(&format!("| {} ({}) | {} | {} |\n", c.id, c.title, c.verdict.label(), detail));
        }
        let failed = self.failed_ids();
        if failed.is_empty() {
            out.push_str("\nNo check failed.\n");
        } else {
            out.push_str(&format!("\nFailed: {}\n", failed.join(", ")));
        }
        out
    }
}

/// Everything a check may look at.
pub struct Ctx<'s> {
    pub st: &'s ConstructionState,
    pub prev: Option<&'s ConstructionState>,
    pub depth: usize,
    pub ext_len: usize,
    pub budget: u64,
}

impl<'s> Ctx<'s> {
    pub fn new(st: &'s ConstructionState, prev: Option<&'s ConstructionState>, params: &Params) -> Result<Self, VerifyError> {
        if let Some(p) = prev {
            if p.n + 1 != st.n {
                return Err(VerifyError::WrongPrevious(p.n, st.n.wrapping_sub(1)));
            }
        } else if st.n > 0 {
            return Err(VerifyError::MissingPrevious(st.n));
        }
        Ok(Ctx { st, prev, depth: params.depth_for(st), ext_len: params.ext_len, budget: params.budget })
    }

    pub fn bounds(&self, nodes: u64) -> Bounds {
        Bounds { depth: self.depth, ext_len: self.ext_len, budget: self.budget, nodes }
    }
}

type CheckFn = fn(&Ctx<'_>) -> Result<CheckEntry, VerifyError>;

/// Every check, in report order.
pub const CHECKS: [(&str, CheckFn); 19] = [
    ("dagger1", check_nested),
    ("dagger2", check_degree),
    ("dagger3", check_roots),
    ("dagger4", check_binary_height),
    ("dagger5", check_bare_paths),
    ("dagger6", |c| check_balls(c, crate::construction::Side::T)),
    ("dagger7", |c| check_balls(c, crate::construction::Side::S)),
    ("dagger8", check_non_embed),
    ("dagger9", |c| check_root_fixing(c, crate::construction::Side::T)),
    ("dagger10", |c| check_root_fixing(c, crate::construction::Side::S)),
    ("dagger11", check_enumeration),
    ("dagger12", check_unmarked_indices),
    ("dagger13", check_handled),
    ("dagger14", check_restriction),
    ("growth_law", check_growth),
    ("closure", check_closure),
    ("hypomorphism", check_hypomorphism),
    ("edge_hypomorphism", check_edge_hypomorphism),
    ("nonisomorphic", check_nonisomorphic),
];

/// Runs every check. Errors inside a check become failed entries.
pub fn check_all(st: &ConstructionState, prev: Option<&ConstructionState>, params: &Params) -> Result<CheckReport, VerifyError> {
    check_selected(st, prev, params, |_| true)
}

pub fn check_selected(
    st: &ConstructionState,
    prev: Option<&ConstructionState>,
    params: &Params,
    keep: impl Fn(&str) -> bool,
) -> Result<CheckReport, VerifyError> {
    let ctx = Ctx::new(st, prev, params)?;
    let mut checks = Vec::new();
    let mut timings = BTreeMap::new();
    for (id, f) in CHECKS {
        if !keep(id) {
            continue;
        }
        let t0 = Instant::now();
        let entry = match f(&ctx) {
            Ok(e) => e,
            Err(e) => CheckEntry::new(id, "error").failed("the check could not run", e.to_string()),
        };
        timings.insert(id.to_string(), t0.elapsed().as_millis());
        checks.push(entry);
    }
    Ok(CheckReport {
        n: st.n,
        k: st.k,
        b: st.b,
        params: ResolvedParams { depth: ctx.depth, ext_len: ctx.ext_len, budget: ctx.budget },
        checks,
        timings,
    })
}

#[cfg(test)]
mod tests;
