use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use super::{Formula, FormulaKind, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("template for {letter} has free variables {extra:?} beyond its parameters")]
    ExtraFreeVariables { letter: String, extra: Vec<String> },
    #[error("letter {letter} occurs with arity {found}, template expects {expected}")]
    ArityMismatch {
        letter: String,
        expected: usize,
        found: usize,
    },
    #[error("negative modal power {0}")]
    NegativePower(i64),
}

/// A formula with designated parameter variables that replaces an atom
/// `L(u1, .., uk)` by `body[params := u]`.
#[derive(Debug, Clone)]
pub struct Template {
    pub params: Vec<Var>,
    pub body: Formula,
}

impl Template {
    pub fn new(params: Vec<Var>, body: Formula) -> Template {
        Template { params, body }
    }

    pub fn monadic(param: Var, body: Formula) -> Template {
        Template {
            params: vec![param],
            body,
        }
    }
}

struct Renamer {
    free: HashMap<usize, BTreeSet<Var>>,
    memo: HashMap<(usize, Vec<(Var, Var)>), Formula>,
}

impl Renamer {
    fn new() -> Renamer {
        Renamer {
            free: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    fn free(&mut self, f: &Formula) -> BTreeSet<Var> {
        if let Some(s) = self.free.get(&f.node_ptr()) {
            return s.clone();
        }
        let s = match f.kind() {
            FormulaKind::Atom(a) => a.args.iter().cloned().collect(),
            FormulaKind::Forall(v, b) | FormulaKind::Exists(v, b) => {
                let mut s = self.free(b);
                s.remove(v);
                s
            }
            _ => {
                let mut s = BTreeSet::new();
                for c in f.children() {
                    let sub = self.free(c);
                    s.extend(sub);
                }
                s
            }
        };
        self.free.insert(f.node_ptr(), s.clone());
        s
    }

    fn rename(&mut self, f: &Formula, map: &BTreeMap<Var, Var>) -> Formula {
        let free = self.free(f);
        let relevant: Vec<(Var, Var)> = map
            .iter()
            .filter(|(from, to)| from != to && free.contains(*from))
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        if relevant.is_empty() {
            return f.clone();
        }
        let key = (f.node_ptr(), relevant.clone());
        if let Some(done) = self.memo.get(&key) {
            return done.clone();
        }
        let map: BTreeMap<Var, Var> = relevant.into_iter().collect();
        let out = match f.kind() {
            FormulaKind::Atom(a) => {
                let args: Vec<Var> = a
                    .args
                    .iter()
                    .map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone()))
                    .collect();
                Formula::atom(&a.letter, &args)
            }
            FormulaKind::Bot | FormulaKind::Top => f.clone(),
            FormulaKind::Neg(a) => Formula::neg(self.rename(a, &map)),
            FormulaKind::Box(a) => Formula::boxed(self.rename(a, &map)),
            FormulaKind::Dia(a) => Formula::dia(self.rename(a, &map)),
            FormulaKind::And(a, b) => Formula::and(self.rename(a, &map), self.rename(b, &map)),
            FormulaKind::Or(a, b) => Formula::or(self.rename(a, &map), self.rename(b, &map)),
            FormulaKind::Imp(a, b) => Formula::imp(self.rename(a, &map), self.rename(b, &map)),
            FormulaKind::Forall(v, body) | FormulaKind::Exists(v, body) => {
                let mut inner = map.clone();
                inner.remove(v);
                let body_free = self.free(body);
                let captures = inner
                    .iter()
                    .any(|(from, to)| to == v && body_free.contains(from));
                let (bound, inner) = if captures {
                    let mut avoid: BTreeSet<Var> = body_free.clone();
                    avoid.extend(inner.keys().cloned());
                    avoid.extend(inner.values().cloned());
                    let mut fresh = v.primed();
                    while avoid.contains(&fresh) {
                        fresh = fresh.primed();
                    }
                    let mut with_bound = inner;
                    with_bound.insert(v.clone(), fresh.clone());
                    (fresh, with_bound)
                } else {
                    (v.clone(), inner)
                };
                let body = self.rename(body, &inner);
                if matches!(f.kind(), FormulaKind::Forall(..)) {
                    Formula::forall(bound, body)
                } else {
                    Formula::exists(bound, body)
                }
            }
        };
        self.memo.insert(key, out.clone());
        out
    }
}

/// Simultaneous capture-avoiding renaming of free variables. Bound
/// variables that would capture a renamed occurrence are primed.
pub fn rename_free(f: &Formula, map: &BTreeMap<Var, Var>) -> Formula {
    Renamer::new().rename(f, map)
}

/// Uniform substitution of templates for letters. Letters absent from the
/// map are left alone.
pub fn substitute_atoms(
    f: &Formula,
    map: &BTreeMap<String, Template>,
) -> Result<Formula, SubstError> {
    let mut renamer = Renamer::new();
    for (letter, t) in map {
        let free = renamer.free(&t.body);
        let params: BTreeSet<Var> = t.params.iter().cloned().collect();
        let extra: Vec<String> = free
            .difference(&params)
            .map(|v| v.name().to_string())
            .collect();
        if !extra.is_empty() {
            return Err(SubstError::ExtraFreeVariables {
                letter: letter.clone(),
                extra,
            });
        }
    }
    let mut memo = HashMap::new();
    subst(f, map, &mut renamer, &mut memo)
}

fn subst(
    f: &Formula,
    map: &BTreeMap<String, Template>,
    renamer: &mut Renamer,
    memo: &mut HashMap<usize, Formula>,
) -> Result<Formula, SubstError> {
    if let Some(done) = memo.get(&f.node_ptr()) {
        return Ok(done.clone());
    }
    let out = match f.kind() {
        FormulaKind::Atom(a) => match map.get(&*a.letter) {
            None => f.clone(),
            Some(t) => {
                if t.params.len() != a.arity() {
                    return Err(SubstError::ArityMismatch {
                        letter: a.letter.to_string(),
                        expected: t.params.len(),
                        found: a.arity(),
                    });
                }
                let ren: BTreeMap<Var, Var> = t
                    .params
                    .iter()
                    .cloned()
                    .zip(a.args.iter().cloned())
                    .collect();
                renamer.rename(&t.body, &ren)
            }
        },
        FormulaKind::Bot | FormulaKind::Top => f.clone(),
        FormulaKind::Neg(a) => Formula::neg(subst(a, map, renamer, memo)?),
        FormulaKind::Box(a) => Formula::boxed(subst(a, map, renamer, memo)?),
        FormulaKind::Dia(a) => Formula::dia(subst(a, map, renamer, memo)?),
        FormulaKind::And(a, b) => {
            Formula::and(subst(a, map, renamer, memo)?, subst(b, map, renamer, memo)?)
        }
        FormulaKind::Or(a, b) => {
            Formula::or(subst(a, map, renamer, memo)?, subst(b, map, renamer, memo)?)
        }
        FormulaKind::Imp(a, b) => {
            Formula::imp(subst(a, map, renamer, memo)?, subst(b, map, renamer, memo)?)
        }
        FormulaKind::Forall(v, b) => Formula::forall(v.clone(), subst(b, map, renamer, memo)?),
        FormulaKind::Exists(v, b) => Formula::exists(v.clone(), subst(b, map, renamer, memo)?),
    };
    memo.insert(f.node_ptr(), out.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{parse, profile};
    use super::*;

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    fn one(letter: &str, t: Template) -> BTreeMap<String, Template> {
        BTreeMap::from([(letter.to_string(), t)])
    }

    #[test]
    fn renames_parameter_to_atom_argument() {
        let t = Template::monadic(v("x"), parse("dia R(x)").unwrap());
        let out = substitute_atoms(&parse("P(y)").unwrap(), &one("P", t)).unwrap();
        assert_eq!(out, parse("dia R(y)").unwrap());
    }

    #[test]
    fn untouched_letters_are_identity() {
        let t = Template::monadic(v("x"), parse("R(x)").unwrap());
        let f = parse("forall x. Q(x) -> S").unwrap();
        assert_eq!(substitute_atoms(&f, &one("P", t)).unwrap(), f);
    }

    #[test]
    fn closed_inner_quantifiers_do_not_capture() {
        // P(x) -> forall x. P(x), instantiated at y, stays two-variable
        let t = Template::monadic(v("x"), parse("P(x) -> forall x. P(x)").unwrap());
        let out = substitute_atoms(&parse("Q(y)").unwrap(), &one("Q", t)).unwrap();
        assert_eq!(out, parse("P(y) -> forall x. P(x)").unwrap());
    }

    #[test]
    fn binders_that_would_capture_are_primed() {
        let t = Template::monadic(v("x"), parse("exists y. R(x,y)").unwrap());
        let out = substitute_atoms(&parse("P(y)").unwrap(), &one("P", t)).unwrap();
        assert_eq!(out, parse("exists y'. R(y,y')").unwrap());
    }

    #[test]
    fn simultaneous_binary_template() {
        let t = Template::new(
            vec![v("x"), v("y")],
            parse("(A(x) & B(y) -> r) | s").unwrap(),
        );
        let out = substitute_atoms(&parse("Q(y,x)").unwrap(), &one("Q", t)).unwrap();
        assert_eq!(out, parse("(A(y) & B(x) -> r) | s").unwrap());
    }

    #[test]
    fn errors() {
        let t = Template::monadic(v("x"), parse("R(x,z)").unwrap());
        assert!(matches!(
            substitute_atoms(&parse("P(x)").unwrap(), &one("P", t)),
            Err(SubstError::ExtraFreeVariables { .. })
        ));
        let t = Template::monadic(v("x"), parse("R(x)").unwrap());
        assert!(matches!(
            substitute_atoms(&parse("P(x,y)").unwrap(), &one("P", t)),
            Err(SubstError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn positive_templates_preserve_positivity_and_variables() {
        let t = Template::monadic(v("x"), parse("top -> R(x) | exists x. R(x)").unwrap());
        let f = parse("forall x. exists y. (P(x) -> P(y))").unwrap();
        let out = substitute_atoms(&f, &one("P", t)).unwrap();
        let p = profile(&out);
        assert!(p.positive);
        assert_eq!(p.variables, profile(&f).variables);
    }
}
