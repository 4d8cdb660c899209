use std::ops::ControlFlow;

use serde::Serialize;

use super::SearchError;
use crate::formula::{profile, Formula};
use crate::kripke::{Checker, FrameProperty, Mode, Model, Program, WorldId};

/// Limits for exhaustive finite model search.
#[derive(Debug, Clone)]
pub struct SearchBounds {
    pub max_worlds: usize,
    pub max_domain: usize,
    pub mode: Mode,
    /// Required on top of what the mode itself demands.
    pub frame_class: Vec<FrameProperty>,
    pub constant_domains: bool,
    /// Complete models examined before giving up.
    pub budget: u64,
    /// Skip frames that are not least among their world permutations.
    pub symmetry: bool,
}

impl SearchBounds {
    pub fn new(mode: Mode, max_worlds: usize, max_domain: usize) -> SearchBounds {
        SearchBounds {
            max_worlds,
            max_domain,
            mode,
            frame_class: Vec::new(),
            constant_domains: false,
            budget: 1_000_000,
            symmetry: true,
        }
    }

    /// Properties every candidate frame must have.
    pub fn required(&self) -> Vec<FrameProperty> {
        let mut out = match self.mode {
            Mode::Modal => vec![],
            Mode::Intuitionistic => vec![
                FrameProperty::Reflexive,
                FrameProperty::Transitive,
                FrameProperty::Antisymmetric,
            ],
            Mode::Visser => vec![FrameProperty::Transitive, FrameProperty::Antisymmetric],
        };
        for &p in &self.frame_class {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    /// Some world satisfies the closed formula.
    Satisfy,
    /// Some world falsifies it.
    Refute,
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Found {
        model: Model,
        world: WorldId,
        examined: u64,
    },
    None {
        examined: u64,
    },
    Budget {
        examined: u64,
    },
}

impl SearchOutcome {
    pub fn found(&self) -> Option<(&Model, WorldId)> {
        match self {
            SearchOutcome::Found { model, world, .. } => Some((model, *world)),
            _ => None,
        }
    }

    pub fn verdict(&self) -> &'static str {
        match self {
            SearchOutcome::Found { .. } => "found",
            SearchOutcome::None { .. } => "none",
            SearchOutcome::Budget { .. } => "budget",
        }
    }
}

struct RawFrame {
    n: usize,
    edges: Vec<Vec<bool>>,
}

fn frame_has(f: &RawFrame, p: FrameProperty) -> bool {
    let mut frame = crate::kripke::Frame::new();
    for i in 0..f.n {
        frame.add_world(&i.to_string());
    }
    for i in 0..f.n {
        for j in 0..f.n {
            if f.edges[i][j] {
                frame.add_edge(i, j);
            }
        }
    }
    p.holds(&frame)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn frames(n: usize, required: &[FrameProperty], symmetry: bool) -> Vec<RawFrame> {
    let bits = n * n;
    let perms = if symmetry { permutations(n) } else { vec![] };
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << bits) {
        let edges: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| mask >> (i * n + j) & 1 == 1).collect())
            .collect();
        if symmetry {
            let least = perms.iter().all(|p| {
                let mut m2 = 0u64;
                for i in 0..n {
                    for j in 0..n {
                        if edges[i][j] {
                            m2 |= 1 << (p[i] * n + p[j]);
                        }
                    }
                }
                m2 >= mask
            });
            if !least {
                continue;
            }
        }
        let f = RawFrame { n, edges };
        if required.iter().all(|&p| frame_has(&f, p)) {
            out.push(f);
        }
    }
    out
}

/// Visits every model within the bounds over the given letters, each up to
/// the symmetry reduction if enabled. Letter extensions are restricted to
/// tuples over the local domain and, in the intuitionistic modes, are
/// hereditary. Stops when the visitor breaks or the budget runs out; the
/// result is the number of models visited and whether the budget ran out.
pub fn enumerate_models(
    bounds: &SearchBounds,
    letters: &[(String, usize)],
    visit: &mut dyn FnMut(&Model) -> ControlFlow<()>,
) -> Result<(u64, bool), SearchError> {
    let required = bounds.required();
    let hereditary = bounds.mode != Mode::Modal;
    let mut examined = 0u64;
    for n in 1..=bounds.max_worlds {
        if n * n > 20 {
            return Err(SearchError::TooLarge(format!("{n} worlds")));
        }
        let fs = frames(n, &required, bounds.symmetry);
        for p in 1..=bounds.max_domain {
            for &(ref l, arity) in letters {
                if p.pow(arity as u32) > 64 {
                    return Err(SearchError::TooLarge(format!(
                        "letter {l} over {p} individuals"
                    )));
                }
            }
            let full = (1u32 << p) - 1;
            for f in &fs {
                let mut doms = vec![0u32; n];
                let r = enum_domains(f, bounds, full, 0, &mut doms, &mut |doms| {
                    let mut st = InterpState {
                        f,
                        doms,
                        p,
                        letters,
                        hereditary,
                        ext: vec![vec![0u64; letters.len()]; n],
                        mode: bounds.mode,
                    };
                    st.go(0, &mut |m| {
                        examined += 1;
                        if examined > bounds.budget {
                            return ControlFlow::Break(true);
                        }
                        match visit(m) {
                            ControlFlow::Break(()) => ControlFlow::Break(false),
                            ControlFlow::Continue(()) => ControlFlow::Continue(()),
                        }
                    })
                });
                if let ControlFlow::Break(exhausted) = r {
                    return Ok((examined.min(bounds.budget), exhausted));
                }
            }
        }
    }
    Ok((examined, false))
}

fn enum_domains(
    f: &RawFrame,
    b: &SearchBounds,
    full: u32,
    w: usize,
    doms: &mut Vec<u32>,
    k: &mut dyn FnMut(&[u32]) -> ControlFlow<bool>,
) -> ControlFlow<bool> {
    if w == f.n {
        let union = doms.iter().fold(0, |a, &d| a | d);
        if union == full {
            return k(doms);
        }
        return ControlFlow::Continue(());
    }
    let choices: Vec<u32> = if b.constant_domains {
        vec![full]
    } else {
        (1..=full).collect()
    };
    for d in choices {
        let ok = (0..w).all(|u| {
            (!f.edges[u][w] || doms[u] & !d == 0) && (!f.edges[w][u] || d & !doms[u] == 0)
        });
        if ok {
            doms[w] = d;
            enum_domains(f, b, full, w + 1, doms, k)?;
        }
    }
    ControlFlow::Continue(())
}

struct InterpState<'a> {
    f: &'a RawFrame,
    doms: &'a [u32],
    p: usize,
    letters: &'a [(String, usize)],
    hereditary: bool,
    ext: Vec<Vec<u64>>,
    mode: Mode,
}

fn tuple_of(mut code: usize, arity: usize, p: usize) -> Vec<usize> {
    let mut t = Vec::with_capacity(arity);
    for _ in 0..arity {
        t.push(code % p);
        code /= p;
    }
    t
}

impl InterpState<'_> {
    fn allowed(&self, w: usize, arity: usize) -> u64 {
        let count = self.p.pow(arity as u32);
        let mut mask = 0u64;
        for code in 0..count {
            if tuple_of(code, arity, self.p)
                .iter()
                .all(|&d| self.doms[w] >> d & 1 == 1)
            {
                mask |= 1 << code;
            }
        }
        mask
    }

    fn go(
        &mut self,
        slot: usize,
        k: &mut dyn FnMut(&Model) -> ControlFlow<bool>,
    ) -> ControlFlow<bool> {
        let nl = self.letters.len();
        if slot == self.f.n * nl {
            return k(&self.build());
        }
        let (w, l) = (slot / nl, slot % nl);
        let allowed = self.allowed(w, self.letters[l].1);
        let mut sub = allowed;
        loop {
            let ok = !self.hereditary
                || (0..w).all(|u| {
                    let eu = self.ext[u][l];
                    (!self.f.edges[u][w] || eu & !sub == 0)
                        && (!self.f.edges[w][u] || sub & !eu == 0)
                });
            if ok {
                self.ext[w][l] = sub;
                self.go(slot + 1, k)?;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & allowed;
        }
        ControlFlow::Continue(())
    }

    fn build(&self) -> Model {
        let mut m = Model::new(self.mode);
        for d in 0..self.p {
            m.add_individual(&format!("d{d}"));
        }
        for w in 0..self.f.n {
            m.add_world(&format!("w{w}"));
            m.set_domain(w, (0..self.p).filter(|&d| self.doms[w] >> d & 1 == 1));
        }
        for i in 0..self.f.n {
            for j in 0..self.f.n {
                if self.f.edges[i][j] {
                    m.add_edge(i, j);
                }
            }
        }
        for (l, (name, arity)) in self.letters.iter().enumerate() {
            m.declare_letter(name, *arity)
                .expect("letters are distinct");
            for w in 0..self.f.n {
                let e = self.ext[w][l];
                for code in 0..self.p.pow(*arity as u32) {
                    if e >> code & 1 == 1 {
                        m.add_fact(w, name, tuple_of(code, *arity, self.p))
                            .expect("declared");
                    }
                }
            }
        }
        m
    }
}

/// Exhaustive search for a model in which some world satisfies (or
/// falsifies) the closed formula. Worlds, then domain size, then frames in
/// bitmask order, then domains and interpretations; the first hit wins.
pub fn bounded_sat(
    f: &Formula,
    goal: Goal,
    bounds: &SearchBounds,
) -> Result<SearchOutcome, SearchError> {
    let prof = profile(f);
    if !prof.closed {
        return Err(SearchError::NotClosed);
    }
    if let Some(l) = prof.arity_conflicts.iter().next() {
        return Err(SearchError::ArityConflict(l.clone()));
    }
    let letters: Vec<(String, usize)> = prof
        .letters
        .iter()
        .map(|(n, i)| (n.clone(), i.arity))
        .collect();
    let prog = Program::compile(f, bounds.mode)?;
    let mut hit = None;
    let mut err = None;
    let (examined, exhausted) = enumerate_models(bounds, &letters, &mut |m| {
        let mut c = match Checker::new(&prog, m) {
            Ok(c) => c,
            Err(e) => {
                err = Some(e);
                return ControlFlow::Break(());
            }
        };
        for w in m.worlds() {
            match c.sat_at(w) {
                Ok(v) if v == (goal == Goal::Satisfy) => {
                    hit = Some((m.clone(), w));
                    return ControlFlow::Break(());
                }
                Ok(_) => {}
                Err(e) => {
                    err = Some(e);
                    return ControlFlow::Break(());
                }
            }
        }
        ControlFlow::Continue(())
    })?;
    if let Some(e) = err {
        return Err(e.into());
    }
    Ok(match hit {
        Some((model, world)) => SearchOutcome::Found {
            model,
            world,
            examined,
        },
        None if exhausted => SearchOutcome::Budget { examined },
        None => SearchOutcome::None { examined },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::kripke::sat_at;

    fn b(mode: Mode, w: usize, d: usize) -> SearchBounds {
        SearchBounds::new(mode, w, d)
    }

    #[test]
    fn excluded_middle_has_a_two_world_countermodel() {
        let f = parse("forall x. P(x) | ~P(x)").unwrap();
        let out = bounded_sat(&f, Goal::Refute, &b(Mode::Intuitionistic, 2, 1)).unwrap();
        let (m, w) = out.found().unwrap();
        assert_eq!(m.world_count(), 2);
        assert!(m.validate().is_empty());
        assert!(!sat_at(m, w, &f).unwrap());
        let out = bounded_sat(&f, Goal::Refute, &b(Mode::Intuitionistic, 1, 2)).unwrap();
        assert!(matches!(out, SearchOutcome::None { .. }));
    }

    #[test]
    fn contradictions_are_unsatisfiable() {
        let f = parse("exists x. P(x) & ~P(x)").unwrap();
        let out = bounded_sat(&f, Goal::Satisfy, &b(Mode::Modal, 2, 2)).unwrap();
        assert!(matches!(out, SearchOutcome::None { .. }));
    }

    #[test]
    fn budget_is_reported() {
        let f = parse("exists x. P(x) & ~P(x)").unwrap();
        let mut bounds = b(Mode::Modal, 2, 2);
        bounds.budget = 10;
        let out = bounded_sat(&f, Goal::Satisfy, &bounds).unwrap();
        assert!(matches!(out, SearchOutcome::Budget { examined: 10 }));
    }

    #[test]
    fn frame_class_is_respected() {
        // fails on some reflexive frame only if reflexivity is dropped
        let f = parse("box p -> p").unwrap();
        let mut bounds = b(Mode::Modal, 2, 1);
        assert!(bounded_sat(&f, Goal::Refute, &bounds)
            .unwrap()
            .found()
            .is_some());
        bounds.frame_class = vec![FrameProperty::Reflexive];
        assert!(matches!(
            bounded_sat(&f, Goal::Refute, &bounds).unwrap(),
            SearchOutcome::None { .. }
        ));
    }

    #[test]
    fn symmetry_reduction_keeps_verdicts() {
        let fs = [
            "box p -> box box p",
            "dia p & dia ~p & box (p -> box p)",
            "(forall x. dia P(x)) -> dia forall x. P(x)",
            "(p -> q) | (q -> p)",
            "exists x. P(x) -> forall x. P(x)",
            "~~p -> p",
            "(forall x. ~~P(x)) -> ~~forall x. P(x)",
        ];
        for mode in [Mode::Modal, Mode::Intuitionistic, Mode::Visser] {
            for s in fs {
                let f = parse(s).unwrap();
                if Program::compile(&f, mode).is_err() {
                    continue;
                }
                for goal in [Goal::Satisfy, Goal::Refute] {
                    let mut bounds = b(mode, 3, 2);
                    let with = bounded_sat(&f, goal, &bounds).unwrap();
                    bounds.symmetry = false;
                    let without = bounded_sat(&f, goal, &bounds).unwrap();
                    assert_eq!(with.verdict(), without.verdict(), "{s} {mode:?} {goal:?}");
                    if let Some((m, w)) = with.found() {
                        assert!(m.validate().is_empty());
                        assert_eq!(sat_at(m, w, &f).unwrap(), goal == Goal::Satisfy);
                    }
                }
            }
        }
    }

    #[test]
    fn linearity_fails_intuitionistically() {
        let f = parse("(p -> q) | (q -> p)").unwrap();
        let out = bounded_sat(&f, Goal::Refute, &b(Mode::Intuitionistic, 3, 1)).unwrap();
        assert_eq!(out.found().unwrap().0.world_count(), 3);
    }
}
