use std::collections::{BTreeMap, BTreeSet, HashMap};

use varisat::{ExtendFormula, Lit, Solver};

use super::SearchError;
use crate::formula::{profile, Formula, FormulaKind, Var};
use crate::kripke::{Checker, FrameProperty, Mode, Model, Program};

/// Bounds for the propositional encoding of modal satisfiability.
#[derive(Debug, Clone)]
pub struct GroundBounds {
    pub worlds: usize,
    pub domain: usize,
    pub frame_class: Vec<FrameProperty>,
    pub constant_domains: bool,
}

struct Enc {
    s: Solver<'static>,
    n: usize,
    p: usize,
    truth: Lit,
    r: Vec<Vec<Lit>>,
    e: Vec<Vec<Lit>>,
    atoms: BTreeMap<(usize, String, Vec<usize>), Lit>,
    free: HashMap<usize, Vec<Var>>,
    memo: HashMap<(usize, usize, Vec<usize>), Lit>,
}

impl Enc {
    fn and_gate(&mut self, xs: &[Lit]) -> Lit {
        match xs {
            [] => return self.truth,
            [x] => return *x,
            _ => {}
        }
        let g = self.s.new_lit();
        let mut long = vec![g];
        for &x in xs {
            self.s.add_clause(&[!g, x]);
            long.push(!x);
        }
        self.s.add_clause(&long);
        g
    }

    fn or_gate(&mut self, xs: &[Lit]) -> Lit {
        let neg: Vec<Lit> = xs.iter().map(|&x| !x).collect();
        !self.and_gate(&neg)
    }

    fn free(&mut self, f: &Formula) -> Vec<Var> {
        if let Some(v) = self.free.get(&f.node_ptr()) {
            return v.clone();
        }
        let set: BTreeSet<Var> = match f.kind() {
            FormulaKind::Atom(a) => a.args.iter().cloned().collect(),
            FormulaKind::Forall(v, g) | FormulaKind::Exists(v, g) => {
                let mut s: BTreeSet<Var> = self.free(g).into_iter().collect();
                s.remove(v);
                s
            }
            _ => f
                .children()
                .into_iter()
                .flat_map(|c| self.free(c))
                .collect(),
        };
        let v: Vec<Var> = set.into_iter().collect();
        self.free.insert(f.node_ptr(), v.clone());
        v
    }

    fn lit(&mut self, f: &Formula, w: usize, env: &BTreeMap<Var, usize>) -> Lit {
        let fv = self.free(f);
        let key = (
            f.node_ptr(),
            w,
            fv.iter().map(|v| env[v]).collect::<Vec<_>>(),
        );
        if let Some(&l) = self.memo.get(&key) {
            return l;
        }
        let l = match f.kind() {
            FormulaKind::Atom(a) => {
                let t: Vec<usize> = a.args.iter().map(|v| env[v]).collect();
                let k = (w, a.letter.to_string(), t.clone());
                if let Some(&l) = self.atoms.get(&k) {
                    l
                } else {
                    let l = self.s.new_lit();
                    for &d in &t {
                        self.s.add_clause(&[!l, self.e[w][d]]);
                    }
                    self.atoms.insert(k, l);
                    l
                }
            }
            FormulaKind::Bot => !self.truth,
            FormulaKind::Top => self.truth,
            FormulaKind::Neg(g) => !self.lit(g, w, env),
            FormulaKind::And(a, b) => {
                let xs = [self.lit(a, w, env), self.lit(b, w, env)];
                self.and_gate(&xs)
            }
            FormulaKind::Or(a, b) => {
                let xs = [self.lit(a, w, env), self.lit(b, w, env)];
                self.or_gate(&xs)
            }
            FormulaKind::Imp(a, b) => {
                let xs = [!self.lit(a, w, env), self.lit(b, w, env)];
                self.or_gate(&xs)
            }
            FormulaKind::Box(g) => {
                let mut parts = Vec::new();
                for v in 0..self.n {
                    let inner = self.lit(g, v, env);
                    let rv = self.r[w][v];
                    parts.push(self.or_gate(&[!rv, inner]));
                }
                self.and_gate(&parts)
            }
            FormulaKind::Dia(g) => {
                let mut parts = Vec::new();
                for v in 0..self.n {
                    let inner = self.lit(g, v, env);
                    let rv = self.r[w][v];
                    parts.push(self.and_gate(&[rv, inner]));
                }
                self.or_gate(&parts)
            }
            FormulaKind::Forall(x, g) | FormulaKind::Exists(x, g) => {
                let univ = matches!(f.kind(), FormulaKind::Forall(..));
                let mut parts = Vec::new();
                let mut env2 = env.clone();
                for d in 0..self.p {
                    env2.insert(x.clone(), d);
                    let inner = self.lit(g, w, &env2);
                    let ed = self.e[w][d];
                    parts.push(if univ {
                        self.or_gate(&[!ed, inner])
                    } else {
                        self.and_gate(&[ed, inner])
                    });
                }
                if univ {
                    self.and_gate(&parts)
                } else {
                    self.or_gate(&parts)
                }
            }
        };
        self.memo.insert(key, l);
        l
    }

    fn frame_clauses(&mut self, p: FrameProperty) -> Result<(), SearchError> {
        let n = self.n;
        let r = self.r.clone();
        match p {
            FrameProperty::Reflexive => (0..n).for_each(|i| self.s.add_clause(&[r[i][i]])),
            FrameProperty::Irreflexive => (0..n).for_each(|i| self.s.add_clause(&[!r[i][i]])),
            FrameProperty::Symmetric => {
                for i in 0..n {
                    for j in 0..n {
                        self.s.add_clause(&[!r[i][j], r[j][i]]);
                    }
                }
            }
            FrameProperty::Antisymmetric => {
                for i in 0..n {
                    for j in i + 1..n {
                        self.s.add_clause(&[!r[i][j], !r[j][i]]);
                    }
                }
            }
            FrameProperty::Transitive => {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            self.s.add_clause(&[!r[i][j], !r[j][k], r[i][k]]);
                        }
                    }
                }
            }
            // Worlds can be listed so that the root comes first and every
            // strict edge points forward.
            FrameProperty::Acyclic => {
                for i in 0..n {
                    for j in 0..i {
                        self.s.add_clause(&[!r[i][j]]);
                    }
                }
            }
            FrameProperty::Convergent => {
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            let mut cl = vec![!r[a][b], !r[a][c]];
                            for d in 0..n {
                                let z = self.and_gate(&[r[b][d], r[c][d]]);
                                cl.push(z);
                            }
                            self.s.add_clause(&cl);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Modal satisfiability within the bounds, decided by a SAT solver over the
/// ground encoding. A model is returned with the formula true at its first
/// world; it is re-checked by the evaluator before being returned.
pub fn ground_sat(f: &Formula, bounds: &GroundBounds) -> Result<Option<Model>, SearchError> {
    let prof = profile(f);
    if !prof.closed {
        return Err(SearchError::NotClosed);
    }
    if let Some(l) = prof.arity_conflicts.iter().next() {
        return Err(SearchError::ArityConflict(l.clone()));
    }
    if bounds.worlds == 0 || bounds.domain == 0 {
        return Err(SearchError::TooLarge("empty bounds".into()));
    }
    let (n, p) = (bounds.worlds, bounds.domain);
    let mut s = Solver::new();
    let truth = s.new_lit();
    s.add_clause(&[truth]);
    let r: Vec<Vec<Lit>> = (0..n)
        .map(|_| (0..n).map(|_| s.new_lit()).collect())
        .collect();
    let e: Vec<Vec<Lit>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| {
                    if bounds.constant_domains {
                        truth
                    } else {
                        s.new_lit()
                    }
                })
                .collect()
        })
        .collect();
    let mut enc = Enc {
        s,
        n,
        p,
        truth,
        r,
        e,
        atoms: BTreeMap::new(),
        free: HashMap::new(),
        memo: HashMap::new(),
    };
    for w in 0..n {
        let row = enc.e[w].clone();
        enc.s.add_clause(&row);
        for v in 0..n {
            for d in 0..p {
                let (rv, ew, ev) = (enc.r[w][v], enc.e[w][d], enc.e[v][d]);
                enc.s.add_clause(&[!rv, !ew, ev]);
            }
        }
    }
    for &fp in &bounds.frame_class {
        enc.frame_clauses(fp)?;
    }
    let root = enc.lit(f, 0, &BTreeMap::new());
    enc.s.add_clause(&[root]);
    if !enc
        .s
        .solve()
        .map_err(|e| SearchError::Solver(e.to_string()))?
    {
        return Ok(None);
    }
    let assignment = enc.s.model().expect("satisfiable");
    let mut val = vec![
        false;
        assignment
            .iter()
            .map(|l| l.var().index() + 1)
            .max()
            .unwrap_or(0)
    ];
    for l in &assignment {
        val[l.var().index()] = l.is_positive();
    }
    let get = |l: Lit| val[l.var().index()] == l.is_positive();
    let mut m = Model::new(Mode::Modal);
    for d in 0..p {
        m.add_individual(&format!("d{d}"));
    }
    for w in 0..n {
        m.add_world(&format!("w{w}"));
        m.set_domain(w, (0..p).filter(|&d| get(enc.e[w][d])));
    }
    for i in 0..n {
        for j in 0..n {
            if get(enc.r[i][j]) {
                m.add_edge(i, j);
            }
        }
    }
    for (name, info) in &prof.letters {
        m.declare_letter(name, info.arity).expect("no conflicts");
    }
    for ((w, letter, t), &l) in &enc.atoms {
        if get(l) {
            m.add_fact(*w, letter, t.clone()).expect("declared");
        }
    }
    let prog = Program::compile(f, Mode::Modal)?;
    let mut c = Checker::new(&prog, &m)?;
    if !c.eval(0, &BTreeMap::new())? || !m.validate().is_empty() {
        return Err(SearchError::Solver(
            "decoded model does not satisfy the formula".into(),
        ));
    }
    for &fp in &bounds.frame_class {
        if !fp.holds(m.frame()) {
            return Err(SearchError::Solver(format!("decoded frame is not {fp:?}")));
        }
    }
    Ok(Some(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::search::{bounded_sat, Goal, SearchBounds, SearchOutcome};

    fn gb(worlds: usize, domain: usize, class: &[FrameProperty]) -> GroundBounds {
        GroundBounds {
            worlds,
            domain,
            frame_class: class.to_vec(),
            constant_domains: false,
        }
    }

    #[test]
    fn agrees_with_enumeration_on_small_bounds() {
        let fs = [
            "dia p & box ~p",
            "dia p & dia ~p",
            "(exists x. dia P(x)) & box forall x. ~P(x)",
            "(forall x. box P(x)) & exists x. dia ~P(x)",
            "dia (exists x. P(x)) & ~exists x. dia P(x)",
            "box (forall x. P(x)) & dia exists x. ~P(x)",
            "~((forall x. box P(x)) -> box forall x. P(x))",
            "dia dia p & box ~p",
            "(exists x. P(x) & dia ~P(x)) & box p",
        ];
        let classes: [&[FrameProperty]; 4] = [
            &[],
            &[FrameProperty::Transitive],
            &[FrameProperty::Reflexive, FrameProperty::Symmetric],
            &[
                FrameProperty::Transitive,
                FrameProperty::Irreflexive,
                FrameProperty::Acyclic,
            ],
        ];
        for s in fs {
            let f = parse(s).unwrap();
            for class in classes {
                let mut sb = SearchBounds::new(Mode::Modal, 3, 2);
                sb.frame_class = class.to_vec();
                let enumerated = bounded_sat(&f, Goal::Satisfy, &sb).unwrap();
                assert!(!matches!(enumerated, SearchOutcome::Budget { .. }));
                let ground = ground_sat(&f, &gb(3, 2, class)).unwrap();
                assert_eq!(
                    ground.is_some(),
                    enumerated.found().is_some(),
                    "{s} {class:?}"
                );
            }
        }
    }

    #[test]
    fn convergence_is_encoded() {
        let f = parse("dia box p & dia box ~p").unwrap();
        assert!(ground_sat(&f, &gb(3, 1, &[])).unwrap().is_some());
        assert!(ground_sat(&f, &gb(4, 1, &[FrameProperty::Convergent]))
            .unwrap()
            .is_none());
    }

    #[test]
    fn constant_domains_validate_the_barcan_formula() {
        let f = parse("~((forall x. box P(x)) -> box forall x. P(x))").unwrap();
        assert!(ground_sat(&f, &gb(2, 2, &[])).unwrap().is_some());
        let mut b = gb(3, 2, &[]);
        b.constant_domains = true;
        assert!(ground_sat(&f, &b).unwrap().is_none());
    }
}
