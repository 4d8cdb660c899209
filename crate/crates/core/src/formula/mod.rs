//! Formula syntax shared by the modal and intuitionistic dialects.
//!
//! Formulas are immutable trees whose children sit behind [`Arc`], so large
//! constructions (the level formulas of the intuitionistic gadget frame in
//! particular) are shared DAGs rather than copied trees. Traversals that may
//! meet heavily shared inputs memoize on node addresses; see
//! [`Formula::node_ptr`].

mod parse;
mod print;
mod profile;
mod subst;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use parse::{parse, ParseError};
pub use profile::{profile, LetterInfo, SyntaxProfile};
pub use subst::{rename_free, substitute_atoms, SubstError, Template};

/// An individual variable. Equality is by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Var {
        assert!(!name.is_empty(), "variable names are nonempty");
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// `x` -> `x'`; used for capture-avoiding renaming.
    pub fn primed(&self) -> Var {
        Var(Arc::from(format!("{}'", self.0)))
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Var {
        Var::new(s)
    }
}

/// An atomic formula `NAME(v1, ..., vk)`; the arity is the argument count.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub letter: Arc<str>,
    pub args: Vec<Var>,
}

impl Atom {
    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaKind {
    Atom(Atom),
    Bot,
    Top,
    Neg(Formula),
    And(Formula, Formula),
    Or(Formula, Formula),
    Imp(Formula, Formula),
    Box(Formula),
    Dia(Formula),
    Forall(Var, Formula),
    Exists(Var, Formula),
}

/// A formula: a cheaply clonable handle on an immutable syntax node.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Formula(Arc<FormulaKind>);

impl Formula {
    pub fn from_kind(kind: FormulaKind) -> Formula {
        Formula(Arc::new(kind))
    }

    pub fn kind(&self) -> &FormulaKind {
        &self.0
    }

    /// Address of the shared node, stable while any handle is alive.
    pub fn node_ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn atom<V: Into<Var> + Clone>(letter: &str, args: &[V]) -> Formula {
        Formula::from_kind(FormulaKind::Atom(Atom {
            letter: Arc::from(letter),
            args: args.iter().cloned().map(Into::into).collect(),
        }))
    }

    /// A 0-ary letter (propositional variable).
    pub fn prop(letter: &str) -> Formula {
        Formula::atom::<Var>(letter, &[])
    }

    /// `letter(v)` for a single variable.
    pub fn unary(letter: &str, v: &Var) -> Formula {
        Formula::atom(letter, std::slice::from_ref(v))
    }

    pub fn bot() -> Formula {
        Formula::from_kind(FormulaKind::Bot)
    }

    pub fn top() -> Formula {
        Formula::from_kind(FormulaKind::Top)
    }

    pub fn neg(f: Formula) -> Formula {
        Formula::from_kind(FormulaKind::Neg(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::from_kind(FormulaKind::And(a, b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::from_kind(FormulaKind::Or(a, b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::from_kind(FormulaKind::Imp(a, b))
    }

    pub fn boxed(f: Formula) -> Formula {
        Formula::from_kind(FormulaKind::Box(f))
    }

    pub fn dia(f: Formula) -> Formula {
        Formula::from_kind(FormulaKind::Dia(f))
    }

    pub fn forall(v: impl Into<Var>, f: Formula) -> Formula {
        Formula::from_kind(FormulaKind::Forall(v.into(), f))
    }

    pub fn exists(v: impl Into<Var>, f: Formula) -> Formula {
        Formula::from_kind(FormulaKind::Exists(v.into(), f))
    }

    /// `f & box f`
    pub fn box_plus(f: Formula) -> Formula {
        Formula::and(f.clone(), Formula::boxed(f))
    }

    /// `f | dia f`
    pub fn dia_plus(f: Formula) -> Formula {
        Formula::or(f.clone(), Formula::dia(f))
    }

    /// Left-associated conjunction; `None` for an empty input.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Option<Formula> {
        items.into_iter().reduce(Formula::and)
    }

    /// Left-associated disjunction; `None` for an empty input.
    pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Option<Formula> {
        items.into_iter().reduce(Formula::or)
    }

    /// Number of syntax nodes counted as a tree (shared subterms count once
    /// per occurrence). Saturates at `u64::MAX`.
    pub fn size(&self) -> u64 {
        let mut memo = std::collections::HashMap::new();
        size_memo(self, &mut memo)
    }

    pub fn is_atom(&self) -> bool {
        matches!(self.kind(), FormulaKind::Atom(_))
    }

    /// Immediate subformulas, in order.
    pub fn children(&self) -> Vec<&Formula> {
        match self.kind() {
            FormulaKind::Atom(_) | FormulaKind::Bot | FormulaKind::Top => vec![],
            FormulaKind::Neg(a)
            | FormulaKind::Box(a)
            | FormulaKind::Dia(a)
            | FormulaKind::Forall(_, a)
            | FormulaKind::Exists(_, a) => vec![a],
            FormulaKind::And(a, b) | FormulaKind::Or(a, b) | FormulaKind::Imp(a, b) => vec![a, b],
        }
    }
}

fn size_memo(f: &Formula, memo: &mut std::collections::HashMap<usize, u64>) -> u64 {
    if let Some(&s) = memo.get(&f.node_ptr()) {
        return s;
    }
    let s = f
        .children()
        .into_iter()
        .fold(1u64, |acc, c| acc.saturating_add(size_memo(c, memo)));
    memo.insert(f.node_ptr(), s);
    s
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_formula(f, self)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_formula(f, self)
    }
}

/// Which iterated modality [`box_power`] builds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerKind {
    /// `box^n f`
    Exact,
    /// `box^{<=n} f`, the conjunction of `box^0 f .. box^n f`
    UpTo,
    /// `~ box^n ~ f`
    DiamondExact,
    /// `~ box^{<=n} ~ f`
    DiamondUpTo,
}

/// Iterated boxes, unfolded literally:
/// `box^0 f = f`, `box^{n+1} f = box box^n f`,
/// `box^{<=0} f = f`, `box^{<=n+1} f = box^{<=n} f & box^{n+1} f`,
/// and the diamond forms as negation duals.
pub fn box_power(f: &Formula, n: usize, kind: PowerKind) -> Formula {
    match kind {
        PowerKind::Exact => (0..n).fold(f.clone(), |acc, _| Formula::boxed(acc)),
        PowerKind::UpTo => {
            let mut acc = f.clone();
            for i in 1..=n {
                acc = Formula::and(acc, box_power(f, i, PowerKind::Exact));
            }
            acc
        }
        PowerKind::DiamondExact => {
            Formula::neg(box_power(&Formula::neg(f.clone()), n, PowerKind::Exact))
        }
        PowerKind::DiamondUpTo => {
            Formula::neg(box_power(&Formula::neg(f.clone()), n, PowerKind::UpTo))
        }
    }
}

/// Like [`box_power`] but with a signed count, for callers that take user
/// input.
pub fn box_power_checked(f: &Formula, n: i64, kind: PowerKind) -> Result<Formula, SubstError> {
    if n < 0 {
        return Err(SubstError::NegativePower(n));
    }
    Ok(box_power(f, n as usize, kind))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px() -> Formula {
        Formula::unary("P", &Var::new("x"))
    }

    #[test]
    fn box_power_base_cases() {
        assert_eq!(box_power(&px(), 0, PowerKind::Exact), px());
        assert_eq!(
            box_power(&px(), 2, PowerKind::Exact),
            Formula::boxed(Formula::boxed(px()))
        );
        assert_eq!(
            box_power(&px(), 1, PowerKind::UpTo),
            Formula::and(px(), Formula::boxed(px()))
        );
        assert_eq!(
            box_power(&px(), 1, PowerKind::DiamondExact),
            Formula::neg(Formula::boxed(Formula::neg(px())))
        );
        assert!(box_power_checked(&px(), -1, PowerKind::Exact).is_err());
    }

    // Direct recursive counts, independent of the builder.
    fn count_exact(n: u64, base: u64) -> u64 {
        n + base
    }

    fn count_up_to(n: u64, base: u64) -> u64 {
        if n == 0 {
            base
        } else {
            count_up_to(n - 1, base) + 1 + count_exact(n, base)
        }
    }

    #[test]
    fn box_power_sizes_match_recursive_count() {
        let f = Formula::and(px(), Formula::neg(px()));
        let base = f.size();
        assert_eq!(base, 4);
        for n in 0..=5u64 {
            assert_eq!(
                box_power(&f, n as usize, PowerKind::Exact).size(),
                count_exact(n, base)
            );
            assert_eq!(
                box_power(&f, n as usize, PowerKind::UpTo).size(),
                count_up_to(n, base)
            );
            assert_eq!(
                box_power(&f, n as usize, PowerKind::DiamondUpTo).size(),
                count_up_to(n, base + 1) + 1
            );
        }
        // closed forms for the up-to expansion: base*(n+1) + n + n(n+1)/2
        assert_eq!(count_up_to(5, 4), 4 * 6 + 5 + 15);
    }

    #[test]
    fn shared_subterms_are_counted_per_occurrence() {
        let mut f = px();
        for _ in 0..40 {
            f = Formula::and(f.clone(), f);
        }
        // 2^41 - 1 tree nodes, computed without walking the tree
        assert_eq!(f.size(), (1u64 << 41) - 1);
    }
}
