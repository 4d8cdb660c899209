use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::{Formula, FormulaKind, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LetterInfo {
    pub arity: usize,
    pub occurrences: u64,
}

/// Syntactic facts used to check fragment membership claims.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyntaxProfile {
    pub free_variables: BTreeSet<Var>,
    /// Every variable occurring in the formula, bound or free.
    pub variables: BTreeSet<Var>,
    pub letters: BTreeMap<String, LetterInfo>,
    /// Letters used with more than one arity.
    pub arity_conflicts: BTreeSet<String>,
    /// No `~` and no `bot` anywhere.
    pub positive: bool,
    pub closed: bool,
    pub size: u64,
}

impl SyntaxProfile {
    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn letter_names(&self) -> BTreeSet<String> {
        self.letters.keys().cloned().collect()
    }

    /// All letters have arity at most one.
    pub fn monadic(&self) -> bool {
        self.letters.values().all(|l| l.arity <= 1)
    }
}

#[derive(Clone, Default)]
struct Facts {
    free: BTreeSet<Var>,
    vars: BTreeSet<Var>,
    letters: BTreeMap<String, (BTreeSet<usize>, u64)>,
    positive: bool,
}

pub fn profile(f: &Formula) -> SyntaxProfile {
    let mut memo = HashMap::new();
    let facts = facts(f, &mut memo);
    let mut letters = BTreeMap::new();
    let mut arity_conflicts = BTreeSet::new();
    for (name, (arities, occurrences)) in &facts.letters {
        if arities.len() > 1 {
            arity_conflicts.insert(name.clone());
        }
        letters.insert(
            name.clone(),
            LetterInfo {
                arity: *arities.iter().next().unwrap(),
                occurrences: *occurrences,
            },
        );
    }
    SyntaxProfile {
        closed: facts.free.is_empty(),
        free_variables: facts.free.clone(),
        variables: facts.vars.clone(),
        letters,
        arity_conflicts,
        positive: facts.positive,
        size: f.size(),
    }
}

fn facts(f: &Formula, memo: &mut HashMap<usize, Facts>) -> Facts {
    if let Some(done) = memo.get(&f.node_ptr()) {
        return done.clone();
    }
    let mut out = Facts {
        positive: true,
        ..Facts::default()
    };
    match f.kind() {
        FormulaKind::Atom(a) => {
            out.free.extend(a.args.iter().cloned());
            out.vars.extend(a.args.iter().cloned());
            out.letters
                .insert(a.letter.to_string(), (BTreeSet::from([a.arity()]), 1));
        }
        FormulaKind::Bot => out.positive = false,
        FormulaKind::Top => {}
        _ => {
            for c in f.children() {
                let sub = facts(c, memo);
                out.free.extend(sub.free);
                out.vars.extend(sub.vars);
                out.positive &= sub.positive;
                for (name, (arities, n)) in sub.letters {
                    let slot = out.letters.entry(name).or_default();
                    slot.0.extend(arities);
                    slot.1 = slot.1.saturating_add(n);
                }
            }
            match f.kind() {
                FormulaKind::Neg(_) => out.positive = false,
                FormulaKind::Forall(v, _) | FormulaKind::Exists(v, _) => {
                    out.free.remove(v);
                    out.vars.insert(v.clone());
                }
                _ => {}
            }
        }
    }
    memo.insert(f.node_ptr(), out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn atom_profile() {
        let p = profile(&parse("P(x)").unwrap());
        assert_eq!(
            p.letters.get("P"),
            Some(&LetterInfo {
                arity: 1,
                occurrences: 1
            })
        );
        assert!(p.positive);
        assert!(!p.closed);
        assert_eq!(p.free_variables, BTreeSet::from([Var::new("x")]));
    }

    #[test]
    fn negation_and_bot_are_not_positive() {
        assert!(!profile(&parse("~P(x)").unwrap()).positive);
        assert!(!profile(&parse("P(x) -> bot").unwrap()).positive);
        assert!(profile(&parse("top -> P(x)").unwrap()).positive);
    }

    #[test]
    fn counts_bound_and_free() {
        let p = profile(&parse("forall x. (P(x) -> exists y. Q(x,y)) & R(z)").unwrap());
        assert_eq!(p.variable_count(), 3);
        assert_eq!(p.free_variables, BTreeSet::from([Var::new("z")]));
        assert!(!p.monadic());
    }

    #[test]
    fn conflicting_arities_are_reported() {
        let f = Formula::and(Formula::prop("P"), Formula::unary("P", &Var::new("x")));
        assert!(profile(&f).arity_conflicts.contains("P"));
    }
}
