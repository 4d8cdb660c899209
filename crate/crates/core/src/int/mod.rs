//! Reductions for the intuitionistic two-variable fragments.

mod frame;
mod tiling;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{profile, substitute_atoms, Formula, FormulaKind, SubstError, Template, Var};
use crate::kripke::{EvalError, Mode};

pub use frame::{
    a_suitable_f, alpha_int, build_frame_f, build_mstar_int, depth_for, level_formula, level_width,
    pair_of, star_subst_int, FKind, FVariant, FWorld, FrameF, Levels, MstarVariant,
    MAX_FRAME_WIDTH,
};
pub use tiling::{
    eliminate_binary, encode_tiling, witness_eliminate_binary, BinaryFresh, TilingEncoding,
    TilingLetters, TilingVariant,
};

#[derive(Debug, Error)]
pub enum IntError {
    #[error("formula is not positive")]
    NotPositive,
    #[error("letter {0} is not monadic")]
    NotMonadic(String),
    #[error("letter {0} is not binary")]
    NotBinary(String),
    #[error("letter {0} does not occur")]
    UnknownLetter(String),
    #[error("letter {0} is already in use")]
    LetterClash(String),
    #[error("{0} is out of range")]
    OutOfRange(String),
    #[error("domain of size {0} is too small; at least three individuals are needed")]
    DomainTooSmall(usize),
    #[error("bad pivot pair {0}")]
    BadPivot(String),
    #[error("no frame world {0}")]
    BadWorld(String),
    #[error("model has mode {}", .0.name())]
    WrongMode(Mode),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("formula holds at {0}")]
    NotRefuted(String),
    #[error("`dia` has no translation")]
    Diamond,
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("bad tile set: {0}")]
    Tiles(String),
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// How the translation treats atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomClause {
    /// `box A`, faithful on reflexive frames.
    Box,
    /// `A & box A`, faithful on all transitive frames.
    BoxPlus,
}

impl AtomClause {
    pub fn for_mode(mode: Mode) -> AtomClause {
        match mode {
            Mode::Visser => AtomClause::BoxPlus,
            _ => AtomClause::Box,
        }
    }
}

/// The modal translation: atoms are boxed, implication and negation become
/// boxed implications, and a maximal universal block is boxed once.
pub fn godel_translate(f: &Formula, clause: AtomClause) -> Result<Formula, IntError> {
    let mut memo = BTreeMap::new();
    godel(f, clause, &mut memo)
}

fn godel(
    f: &Formula,
    clause: AtomClause,
    memo: &mut BTreeMap<usize, Formula>,
) -> Result<Formula, IntError> {
    if let Some(g) = memo.get(&f.node_ptr()) {
        return Ok(g.clone());
    }
    let out = match f.kind() {
        FormulaKind::Atom(_) => match clause {
            AtomClause::Box => Formula::boxed(f.clone()),
            AtomClause::BoxPlus => Formula::box_plus(f.clone()),
        },
        FormulaKind::Bot => Formula::bot(),
        FormulaKind::Top => Formula::top(),
        FormulaKind::And(a, b) => Formula::and(godel(a, clause, memo)?, godel(b, clause, memo)?),
        FormulaKind::Or(a, b) => Formula::or(godel(a, clause, memo)?, godel(b, clause, memo)?),
        FormulaKind::Imp(a, b) => Formula::boxed(Formula::imp(
            godel(a, clause, memo)?,
            godel(b, clause, memo)?,
        )),
        FormulaKind::Neg(a) => {
            Formula::boxed(Formula::imp(godel(a, clause, memo)?, Formula::bot()))
        }
        FormulaKind::Box(a) => {
            Formula::boxed(Formula::imp(Formula::top(), godel(a, clause, memo)?))
        }
        FormulaKind::Dia(_) => return Err(IntError::Diamond),
        FormulaKind::Exists(v, a) => Formula::exists(v.clone(), godel(a, clause, memo)?),
        FormulaKind::Forall(..) => {
            let mut vars = Vec::new();
            let mut body = f;
            while let FormulaKind::Forall(v, g) = body.kind() {
                vars.push(v.clone());
                body = g;
            }
            let mut inner = godel(body, clause, memo)?;
            for v in vars.into_iter().rev() {
                inner = Formula::forall(v, inner);
            }
            Formula::boxed(inner)
        }
    };
    memo.insert(f.node_ptr(), out.clone());
    Ok(out)
}

/// Replaces the only letter, binary `S`, by `box (~P(u) | ~P(v))`.
pub fn sib_simulate(f: &Formula, s: &str, p: &str) -> Result<Formula, IntError> {
    let prof = profile(f);
    match prof.letters.get(s) {
        Some(info) if info.arity == 2 && !prof.arity_conflicts.contains(s) => {}
        Some(_) => return Err(IntError::NotBinary(s.into())),
        None => return Err(IntError::UnknownLetter(s.into())),
    }
    if let Some(other) = prof.letters.keys().find(|l| *l != s) {
        return Err(IntError::LetterClash(other.clone()));
    }
    if p == s {
        return Err(IntError::LetterClash(p.into()));
    }
    let (u, v) = (Var::new("u"), Var::new("v"));
    let body = Formula::boxed(Formula::or(
        Formula::neg(Formula::unary(p, &u)),
        Formula::neg(Formula::unary(p, &v)),
    ));
    let map = BTreeMap::from([(s.to_string(), Template::new(vec![u, v], body))]);
    Ok(substitute_atoms(f, &map)?)
}

/// Replaces every 0-ary letter `p` by `exists v E(v)` for a fresh monadic
/// `E`, where `v` is the least variable of the formula (or `x`). Returns the
/// formula and the letter pairs.
pub fn expand_propositional(f: &Formula) -> Result<(Formula, Vec<(String, String)>), IntError> {
    let prof = profile(f);
    let v = prof
        .variables
        .iter()
        .next()
        .cloned()
        .unwrap_or_else(|| Var::new("x"));
    let mut used = prof.letter_names();
    let mut map = BTreeMap::new();
    let mut pairs = Vec::new();
    for (name, info) in &prof.letters {
        if info.arity != 0 {
            continue;
        }
        let mut fresh = format!("E_{name}");
        while used.contains(&fresh) {
            fresh.push('_');
        }
        used.insert(fresh.clone());
        map.insert(
            name.clone(),
            Template::new(
                vec![],
                Formula::exists(v.clone(), Formula::unary(&fresh, &v)),
            ),
        );
        pairs.push((name.clone(), fresh));
    }
    Ok((substitute_atoms(f, &map)?, pairs))
}

/// Monadic letters of a formula in sorted order, the source order used by
/// the single-letter substitution.
pub fn monadic_sources(f: &Formula) -> Result<Vec<String>, IntError> {
    let prof = profile(f);
    let mut out = Vec::new();
    for (l, info) in &prof.letters {
        if info.arity != 1 || prof.arity_conflicts.contains(l) {
            return Err(IntError::NotMonadic(l.clone()));
        }
        out.push(l.clone());
    }
    Ok(out)
}
