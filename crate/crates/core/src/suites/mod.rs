//! Named verification suites. Each suite runs one construction over a fixed
//! or seeded corpus and checks the biconditionals it is supposed to satisfy.

mod corpus;
mod godel;
mod int_suites;
mod modal_suites;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::kripke::{Assignment, Model, WorldId};

pub use corpus::{modal_corpus_formulas, positive_binary_formulas, positive_monadic_formulas};

/// Every suite name accepted by [`run_suite`].
pub const SUITES: &[&str] = &[
    "lemma-2.2",
    "lemma-2.2-reflexive",
    "lemma-2.6",
    "vp-b",
    "vp-ast-k",
    "vp-ast-gl",
    "vp-ast-grz",
    "vp-ast-ktb",
    "oracle-cross",
    "lemma-3.2",
    "frame-f",
    "frame-f-qfl",
    "qint-main",
    "qkc-main",
    "qfl-main",
    "godel",
    "tiling-torus",
    "syntactic",
];

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite {0}")]
    Unknown(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("bad parameter: {0}")]
    Param(String),
}

#[derive(Debug, Clone)]
pub struct SuiteParams {
    /// Number of source letters where the suite has one.
    pub n: Option<usize>,
    /// Largest formula size for the enumerating suites.
    pub size_cap: usize,
    pub seed: u64,
    /// Work limit for searches and corpus generation.
    pub budget: u64,
}

impl Default for SuiteParams {
    fn default() -> SuiteParams {
        SuiteParams {
            n: None,
            size_cap: 8,
            seed: 0,
            budget: 1_000_000,
        }
    }
}

/// One failed check.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Failure {
    pub case: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub world: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub assignment: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    pub message: String,
}

impl Failure {
    pub fn new(case: impl Into<String>, message: impl Into<String>) -> Failure {
        Failure {
            case: case.into(),
            world: None,
            assignment: BTreeMap::new(),
            formula: None,
            message: message.into(),
        }
    }

    pub fn at(mut self, m: &Model, w: WorldId) -> Failure {
        self.world = Some(m.world_name(w).to_string());
        self
    }

    pub fn with(mut self, m: &Model, g: &Assignment) -> Failure {
        for (v, &d) in g {
            self.assignment
                .insert(v.name().to_string(), m.individual_name(d).to_string());
        }
        self
    }

    pub fn formula(mut self, f: impl ToString) -> Failure {
        self.formula = Some(f.to_string());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: u64,
    /// Individual biconditionals or equalities evaluated.
    pub checks: u64,
    pub failures: Vec<Failure>,
    pub wall_ms: u64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Result of one corpus case.
#[derive(Debug, Default)]
pub(crate) struct CaseResult {
    pub checks: u64,
    pub failures: Vec<Failure>,
}

impl CaseResult {
    pub fn check(&mut self, ok: bool, fail: impl FnOnce() -> Failure) {
        self.checks += 1;
        if !ok {
            self.failures.push(fail());
        }
    }

    pub fn fail(&mut self, f: Failure) {
        self.checks += 1;
        self.failures.push(f);
    }
}

pub(crate) struct Tally {
    cases: u64,
    checks: u64,
    failures: Vec<Failure>,
}

impl Tally {
    pub fn new() -> Tally {
        Tally {
            cases: 0,
            checks: 0,
            failures: Vec::new(),
        }
    }

    pub fn add(&mut self, r: CaseResult) {
        self.cases += 1;
        self.checks += r.checks;
        self.failures.extend(r.failures);
    }

    fn finish(mut self, suite: &str, start: Instant) -> SuiteReport {
        self.failures.sort_by(|a, b| a.case.cmp(&b.case));
        SuiteReport {
            suite: suite.to_string(),
            cases: self.cases,
            checks: self.checks,
            failures: self.failures,
            wall_ms: start.elapsed().as_millis() as u64,
        }
    }
}

/// Runs a named suite.
pub fn run_suite(name: &str, params: &SuiteParams) -> Result<SuiteReport, SuiteError> {
    use crate::int::{FVariant, MstarVariant};
    use crate::kripke::Mode;
    use crate::modal::Track;
    let start = Instant::now();
    let n = |default: usize| params.n.unwrap_or(default);
    let tally = match name {
        "lemma-2.2" => modal_suites::gadgets(Track::GL, false, n(3))?,
        "lemma-2.2-reflexive" => modal_suites::gadgets(Track::GL, true, n(3))?,
        "lemma-2.6" => modal_suites::gadgets(Track::KTB, false, n(3))?,
        "vp-b" => modal_suites::vp_b(params)?,
        "vp-ast-k" => modal_suites::vp_ast(Track::K, params)?,
        "vp-ast-gl" => modal_suites::vp_ast(Track::GL, params)?,
        "vp-ast-grz" => modal_suites::vp_ast(Track::Grz, params)?,
        "vp-ast-ktb" => modal_suites::vp_ast(Track::KTB, params)?,
        "oracle-cross" => modal_suites::oracle_cross(params)?,
        "lemma-3.2" => int_suites::binary(params)?,
        "frame-f" => int_suites::frame_f(FVariant::Int, params.n)?,
        "frame-f-qfl" => int_suites::frame_f(FVariant::Qfl, params.n)?,
        "qint-main" => int_suites::main_lemma(MstarVariant::Int, params)?,
        "qkc-main" => int_suites::main_lemma(MstarVariant::Qkc, params)?,
        "qfl-main" => int_suites::main_lemma(MstarVariant::Qfl, params)?,
        "godel" => {
            let mut t = godel::suite(Mode::Intuitionistic, params)?;
            let v = godel::suite(Mode::Visser, params)?;
            t.cases += v.cases;
            t.checks += v.checks;
            t.failures.extend(v.failures);
            t
        }
        "tiling-torus" => int_suites::tiling(params)?,
        "syntactic" => int_suites::syntactic()?,
        _ => return Err(SuiteError::Unknown(name.to_string())),
    };
    Ok(tally.finish(name, start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(matches!(
            run_suite("lemma-9", &SuiteParams::default()),
            Err(SuiteError::Unknown(_))
        ));
    }

    #[test]
    fn gadget_suite_counts() {
        let r = run_suite("lemma-2.2", &SuiteParams::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.cases, 16);
        // gadget k has 2k + 2 worlds, each checked against four alphas
        assert_eq!(r.checks, 4 * (4 + 6 + 8 + 10));
    }
}
