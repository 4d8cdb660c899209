//! Exhaustive check of the translation on small models.
//!
//! Formulas over one monadic letter and the variables `x`, `y` are
//! enumerated up to semantic state: per model, a state is the truth table
//! of the formula on (world, value of x, value of y), the table of its
//! translation, and for a universal block the bound variables and the
//! tables of its body. Every connective acts on states, so the states of
//! all formulas up to the size cap are reached from the leaves by a closure
//! over sizes. Each state keeps the first formula that reached it, and that
//! formula is re-evaluated with the real evaluators on both sides.

use std::collections::HashMap;
use std::ops::ControlFlow;

use rayon::prelude::*;

use super::{CaseResult, Failure, SuiteError, SuiteParams, Tally};
use crate::formula::{Formula, Var};
use crate::int::{godel_translate, AtomClause};
use crate::kripke::{Assignment, Checker, Mode, Model, Program};
use crate::search::{enumerate_models, SearchBounds};

const MAX_WORLDS: usize = 3;
const MAX_DOMAIN: usize = 2;

type Table = u16;

fn entry(w: usize, dx: usize, dy: usize) -> usize {
    w * 4 + dx * 2 + dy
}

/// Masks that turn the connectives into bit operations on one model.
struct Ops {
    valid: Table,
    /// Per entry: the same assignment at every successor.
    succ: Vec<Table>,
    /// Per entry: the same world with x (resp. y) ranging over its domain.
    ex: [Vec<Table>; 2],
    /// Per entry and nonempty variable set (bit 0 = x, bit 1 = y): every
    /// successor with the set's variables ranging over its domain.
    fa: [Vec<Table>; 4],
    atom: [Table; 2],
    vars: [Var; 2],
}

impl Ops {
    fn new(m: &Model) -> Ops {
        let n = m.world_count();
        let mut valid = 0;
        let mut succ = vec![0; 16];
        let mut ex = [vec![0; 16], vec![0; 16]];
        let mut fa = [vec![0; 16], vec![0; 16], vec![0; 16], vec![0; 16]];
        let mut atom = [0; 2];
        let p = m.letter_id("P");
        for w in 0..n {
            let dom = m.domain(w);
            for &dx in dom {
                for &dy in dom {
                    let e = entry(w, dx, dy);
                    valid |= 1 << e;
                    let holds = |d| p.is_some_and(|l| m.extension(w, l).contains(&vec![d]));
                    if holds(dx) {
                        atom[0] |= 1 << e;
                    }
                    if holds(dy) {
                        atom[1] |= 1 << e;
                    }
                    for &d in dom {
                        ex[0][e] |= 1 << entry(w, d, dy);
                        ex[1][e] |= 1 << entry(w, dx, d);
                    }
                    for &u in m.successors(w) {
                        succ[e] |= 1 << entry(u, dx, dy);
                        for &d in m.domain(u) {
                            fa[1][e] |= 1 << entry(u, d, dy);
                            fa[2][e] |= 1 << entry(u, dx, d);
                            for &d2 in m.domain(u) {
                                fa[3][e] |= 1 << entry(u, d, d2);
                            }
                        }
                    }
                }
            }
        }
        Ops {
            valid,
            succ,
            ex,
            fa,
            atom,
            vars: [Var::new("x"), Var::new("y")],
        }
    }

    fn each(&self, keep: impl Fn(usize) -> bool) -> Table {
        let mut out = 0;
        for e in 0..16 {
            if self.valid & (1 << e) != 0 && keep(e) {
                out |= 1 << e;
            }
        }
        out
    }

    fn box_imp(&self, a: Table, b: Table) -> Table {
        self.each(|e| a & !b & self.succ[e] == 0)
    }

    fn exists(&self, v: usize, a: Table) -> Table {
        self.each(|e| a & self.ex[v][e] != 0)
    }

    fn forall(&self, vs: usize, a: Table) -> Table {
        self.each(|e| !a & self.fa[vs][e] == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct State {
    int: Table,
    modal: Table,
    /// For a universal block: bound variables and the body's two tables.
    block: Option<(u8, Table, Table)>,
}

fn leaves(ops: &Ops, mode: Mode) -> Vec<(State, Formula)> {
    let mut out = Vec::new();
    for v in 0..2 {
        let a = ops.atom[v];
        let boxed = ops.box_imp(ops.valid, a);
        let modal = match AtomClause::for_mode(mode) {
            AtomClause::Box => boxed,
            AtomClause::BoxPlus => a & boxed,
        };
        let st = State {
            int: a,
            modal,
            block: None,
        };
        out.push((st, Formula::unary("P", &ops.vars[v])));
    }
    let plain = |t| State {
        int: t,
        modal: t,
        block: None,
    };
    out.push((plain(0), Formula::bot()));
    out.push((plain(ops.valid), Formula::top()));
    out
}

fn unary(ops: &Ops, s: &State, f: &Formula) -> Vec<(State, Formula)> {
    let mut out = vec![(
        State {
            int: ops.box_imp(s.int, 0),
            modal: ops.box_imp(s.modal, 0),
            block: None,
        },
        Formula::neg(f.clone()),
    )];
    for v in 0..2 {
        out.push((
            State {
                int: ops.exists(v, s.int),
                modal: ops.exists(v, s.modal),
                block: None,
            },
            Formula::exists(ops.vars[v].clone(), f.clone()),
        ));
        let (vs, bi, bm) = match s.block {
            Some((vs, bi, bm)) => (vs | (1 << v), bi, bm),
            None => (1 << v, s.int, s.modal),
        };
        out.push((
            State {
                int: ops.forall(vs as usize, bi),
                modal: ops.forall(vs as usize, bm),
                block: Some((vs, bi, bm)),
            },
            Formula::forall(ops.vars[v].clone(), f.clone()),
        ));
    }
    out
}

fn binary(
    ops: &Ops,
    a: &State,
    fa: &Formula,
    b: &State,
    fb: &Formula,
    commuted: bool,
) -> Vec<(State, Formula)> {
    let mut out = vec![(
        State {
            int: ops.box_imp(a.int, b.int),
            modal: ops.box_imp(a.modal, b.modal),
            block: None,
        },
        Formula::imp(fa.clone(), fb.clone()),
    )];
    if !commuted {
        out.push((
            State {
                int: a.int & b.int,
                modal: a.modal & b.modal,
                block: None,
            },
            Formula::and(fa.clone(), fb.clone()),
        ));
        out.push((
            State {
                int: a.int | b.int,
                modal: a.modal | b.modal,
                block: None,
            },
            Formula::or(fa.clone(), fb.clone()),
        ));
    }
    out
}

/// All states of formulas with at most `cap` nodes, each with the first
/// formula found for it.
fn closure(ops: &Ops, mode: Mode, cap: usize) -> Vec<(State, Formula)> {
    let mut states: Vec<(State, Formula)> = Vec::new();
    let mut seen: HashMap<State, usize> = HashMap::new();
    let mut by_size: Vec<Vec<usize>> = vec![Vec::new(); cap + 1];
    let mut admit = |size: usize,
                     items: Vec<(State, Formula)>,
                     states: &mut Vec<(State, Formula)>,
                     by_size: &mut Vec<Vec<usize>>| {
        for (s, f) in items {
            if let std::collections::hash_map::Entry::Vacant(v) = seen.entry(s) {
                v.insert(states.len());
                by_size[size].push(states.len());
                states.push((s, f));
            }
        }
    };
    if cap >= 1 {
        admit(1, leaves(ops, mode), &mut states, &mut by_size);
    }
    for size in 2..=cap {
        let mut fresh = Vec::new();
        for &i in &by_size[size - 1] {
            let (s, f) = &states[i];
            fresh.extend(unary(ops, s, f));
        }
        for left in 1..size - 1 {
            let right = size - 1 - left;
            for &i in &by_size[left] {
                for &j in &by_size[right] {
                    let (a, fa) = &states[i];
                    let (b, fb) = &states[j];
                    let commuted = left > right || (left == right && i > j);
                    fresh.extend(binary(ops, a, fa, b, fb, commuted));
                }
            }
        }
        admit(size, fresh, &mut states, &mut by_size);
    }
    states
}

fn check_model(idx: usize, m: &Model, mode: Mode, cap: usize) -> CaseResult {
    let case = format!("{}-model{idx:05}", mode.name());
    let mut r = CaseResult::default();
    let ops = Ops::new(m);
    let mut modal_m = m.clone();
    modal_m.mode = Mode::Modal;
    let clause = AtomClause::for_mode(mode);
    for (s, f) in closure(&ops, mode, cap) {
        let t = match godel_translate(&f, clause) {
            Ok(t) => t,
            Err(e) => {
                r.fail(Failure::new(&case, format!("translation: {e}")).formula(&f));
                continue;
            }
        };
        let (pi, pm) = match (
            Program::compile(&f, mode),
            Program::compile(&t, Mode::Modal),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => {
                r.fail(
                    Failure::new(&case, format!("compile: {:?} / {:?}", a.err(), b.err()))
                        .formula(&f),
                );
                continue;
            }
        };
        let (mut ci, mut cm) = match (Checker::new(&pi, m), Checker::new(&pm, &modal_m)) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => {
                r.fail(
                    Failure::new(&case, format!("checker: {:?} / {:?}", a.err(), b.err()))
                        .formula(&f),
                );
                continue;
            }
        };
        for w in m.worlds() {
            for &dx in m.domain(w) {
                for &dy in m.domain(w) {
                    let bit = 1 << entry(w, dx, dy);
                    let g =
                        Assignment::from([(ops.vars[0].clone(), dx), (ops.vars[1].clone(), dy)]);
                    let (ti, tm) = (s.int & bit != 0, s.modal & bit != 0);
                    let (ei, em) = (ci.eval(w, &g), cm.eval(w, &g));
                    r.check(ti == tm && ei == Ok(ti) && em == Ok(tm), || {
                        Failure::new(
                            &case,
                            format!("int {ei:?} (table {ti}), translation {em:?} (table {tm})"),
                        )
                        .at(m, w)
                        .with(m, &g)
                        .formula(&f)
                    });
                }
            }
        }
    }
    r
}

/// Runs the check over every model of the mode with up to three worlds and
/// two individuals.
pub(super) fn suite(mode: Mode, params: &SuiteParams) -> Result<Tally, SuiteError> {
    let mut bounds = SearchBounds::new(mode, MAX_WORLDS, MAX_DOMAIN);
    bounds.budget = params.budget.max(1);
    let mut models = Vec::new();
    let (_, exhausted) = enumerate_models(&bounds, &[("P".to_string(), 1)], &mut |m| {
        models.push(m.clone());
        ControlFlow::Continue(())
    })
    .map_err(|e| SuiteError::Param(e.to_string()))?;
    if exhausted {
        return Err(SuiteError::Budget(format!(
            "more than {} models",
            bounds.budget
        )));
    }
    let results: Vec<CaseResult> = models
        .par_iter()
        .enumerate()
        .map(|(i, m)| check_model(i, m, mode, params.size_cap))
        .collect();
    let mut t = Tally::new();
    for r in results {
        t.add(r);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_counts_distinct_states_on_a_point() {
        let mut m = Model::new(Mode::Intuitionistic);
        let w = m.add_world("w");
        m.add_edge(w, w);
        let a = m.add_individual("a");
        m.set_domain(w, [a]);
        m.declare_letter("P", 1).unwrap();
        let ops = Ops::new(&m);
        // with P empty on a single reflexive point the int side has two
        // tables; blocks add their bodies
        let states = closure(&ops, Mode::Intuitionistic, 3);
        assert!(states.iter().all(|(s, _)| s.int == s.modal));
        assert!(states.len() >= 2);
        let r = check_model(0, &m, Mode::Intuitionistic, 5);
        assert!(r.failures.is_empty(), "{:?}", r.failures);
    }

    #[test]
    fn small_cap_passes_both_modes() {
        let p = SuiteParams {
            size_cap: 4,
            ..SuiteParams::default()
        };
        for mode in [Mode::Intuitionistic, Mode::Visser] {
            let t = suite(mode, &p).unwrap();
            assert!(t.failures.is_empty(), "{:?}", &t.failures[..1]);
            assert!(t.cases > 10);
        }
    }
}
