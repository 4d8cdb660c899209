use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use super::{Ind, Mode, Model, WorldId};
use crate::formula::{Formula, FormulaKind, Var};

/// Values of individual variables.
pub type Assignment = BTreeMap<Var, Ind>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("free variable {0} is unassigned")]
    Unassigned(String),
    #[error("{var} is assigned {individual}, which is not in the domain of {world}")]
    OutsideDomain {
        var: String,
        individual: String,
        world: String,
    },
    #[error("`dia` has no {} reading", .0.name())]
    Unsupported(Mode),
    #[error("letter {letter} has arity {model} in the model but {formula} in the formula")]
    Arity {
        letter: String,
        model: usize,
        formula: usize,
    },
    #[error("no world {0}")]
    UnknownWorld(WorldId),
}

const UNSET: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Op {
    Atom {
        letter: String,
        args: Vec<u32>,
    },
    Bot,
    Top,
    Neg(u32),
    And(u32, u32),
    Or(u32, u32),
    Imp(u32, u32),
    Box(u32),
    Dia(u32),
    /// A single quantifier, or in visser mode a maximal block.
    Forall(Vec<u32>, u32),
    Exists(u32, u32),
}

/// A formula compiled for one semantics: structurally equal subterms are
/// merged and each node knows its free variables.
#[derive(Debug, Clone)]
pub struct Program {
    mode: Mode,
    ops: Vec<Op>,
    free: Vec<Vec<u32>>,
    vars: Vec<Var>,
    root: u32,
}

struct Compiler {
    mode: Mode,
    ops: Vec<Op>,
    free: Vec<Vec<u32>>,
    vars: Vec<Var>,
    var_ids: HashMap<Var, u32>,
    interned: HashMap<Op, u32>,
    by_ptr: HashMap<usize, u32>,
}

impl Compiler {
    fn var(&mut self, v: &Var) -> u32 {
        if let Some(&i) = self.var_ids.get(v) {
            return i;
        }
        let i = self.vars.len() as u32;
        self.vars.push(v.clone());
        self.var_ids.insert(v.clone(), i);
        i
    }

    fn push(&mut self, op: Op) -> u32 {
        if let Some(&i) = self.interned.get(&op) {
            return i;
        }
        let free: BTreeSet<u32> = match &op {
            Op::Atom { args, .. } => args.iter().copied().collect(),
            Op::Bot | Op::Top => BTreeSet::new(),
            Op::Neg(a) | Op::Box(a) | Op::Dia(a) => {
                self.free[*a as usize].iter().copied().collect()
            }
            Op::And(a, b) | Op::Or(a, b) | Op::Imp(a, b) => self.free[*a as usize]
                .iter()
                .chain(&self.free[*b as usize])
                .copied()
                .collect(),
            Op::Forall(vs, b) => self.free[*b as usize]
                .iter()
                .copied()
                .filter(|v| !vs.contains(v))
                .collect(),
            Op::Exists(v, b) => self.free[*b as usize]
                .iter()
                .copied()
                .filter(|u| u != v)
                .collect(),
        };
        let i = self.ops.len() as u32;
        self.ops.push(op.clone());
        self.free.push(free.into_iter().collect());
        self.interned.insert(op, i);
        i
    }

    fn compile(&mut self, f: &Formula) -> Result<u32, EvalError> {
        if let Some(&i) = self.by_ptr.get(&f.node_ptr()) {
            return Ok(i);
        }
        let op = match f.kind() {
            FormulaKind::Atom(a) => Op::Atom {
                letter: a.letter.to_string(),
                args: a.args.iter().map(|v| self.var(v)).collect(),
            },
            FormulaKind::Bot => Op::Bot,
            FormulaKind::Top => Op::Top,
            FormulaKind::Neg(a) => Op::Neg(self.compile(a)?),
            FormulaKind::Box(a) => Op::Box(self.compile(a)?),
            FormulaKind::Dia(a) => {
                if self.mode != Mode::Modal {
                    return Err(EvalError::Unsupported(self.mode));
                }
                Op::Dia(self.compile(a)?)
            }
            FormulaKind::And(a, b) => Op::And(self.compile(a)?, self.compile(b)?),
            FormulaKind::Or(a, b) => Op::Or(self.compile(a)?, self.compile(b)?),
            FormulaKind::Imp(a, b) => Op::Imp(self.compile(a)?, self.compile(b)?),
            FormulaKind::Forall(v, body) => {
                let mut vars = vec![self.var(v)];
                let mut body = body;
                if self.mode == Mode::Visser {
                    while let FormulaKind::Forall(u, inner) = body.kind() {
                        vars.push(self.var(u));
                        body = inner;
                    }
                }
                Op::Forall(vars, self.compile(body)?)
            }
            FormulaKind::Exists(v, body) => {
                let v = self.var(v);
                Op::Exists(v, self.compile(body)?)
            }
        };
        let i = self.push(op);
        self.by_ptr.insert(f.node_ptr(), i);
        Ok(i)
    }
}

impl Program {
    pub fn compile(f: &Formula, mode: Mode) -> Result<Program, EvalError> {
        let mut c = Compiler {
            mode,
            ops: Vec::new(),
            free: Vec::new(),
            vars: Vec::new(),
            var_ids: HashMap::new(),
            interned: HashMap::new(),
            by_ptr: HashMap::new(),
        };
        let root = c.compile(f)?;
        Ok(Program {
            mode,
            ops: c.ops,
            free: c.free,
            vars: c.vars,
            root,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of distinct subformulas.
    pub fn node_count(&self) -> usize {
        self.ops.len()
    }

    pub fn free_variables(&self) -> Vec<Var> {
        self.free[self.root as usize]
            .iter()
            .map(|&v| self.vars[v as usize].clone())
            .collect()
    }

    pub fn checker<'a>(&'a self, model: &'a Model) -> Result<Checker<'a>, EvalError> {
        Checker::new(self, model)
    }
}

/// Memoized evaluation of one compiled formula on one model.
pub struct Checker<'a> {
    prog: &'a Program,
    model: &'a Model,
    letters: Vec<Option<usize>>,
    env: Vec<u32>,
    memo: HashMap<(u32, u32, u64), bool>,
    wide_memo: HashMap<(u32, u32, Vec<u32>), bool>,
    radix: u64,
    packable: Vec<bool>,
    buf: Vec<Ind>,
}

impl<'a> Checker<'a> {
    pub fn new(prog: &'a Program, model: &'a Model) -> Result<Checker<'a>, EvalError> {
        let mut letters = vec![None; prog.ops.len()];
        for (i, op) in prog.ops.iter().enumerate() {
            if let Op::Atom { letter, args } = op {
                if let Some(l) = model.letter_id(letter) {
                    let arity = model.letters()[l].1;
                    if arity != args.len() {
                        return Err(EvalError::Arity {
                            letter: letter.clone(),
                            model: arity,
                            formula: args.len(),
                        });
                    }
                    letters[i] = Some(l);
                }
            }
        }
        let radix = model.individuals().len() as u64 + 1;
        let packable = prog
            .free
            .iter()
            .map(|fv| (radix as f64).powi(fv.len() as i32) < u64::MAX as f64 / 2.0)
            .collect();
        Ok(Checker {
            prog,
            model,
            letters,
            env: vec![UNSET; prog.vars.len()],
            memo: HashMap::new(),
            wide_memo: HashMap::new(),
            radix,
            packable,
            buf: Vec::new(),
        })
    }

    /// Truth at `w` under `g`, which must cover the free variables.
    pub fn eval(&mut self, w: WorldId, g: &Assignment) -> Result<bool, EvalError> {
        if w >= self.model.world_count() {
            return Err(EvalError::UnknownWorld(w));
        }
        let prog = self.prog;
        let root = prog.root;
        for &v in &prog.free[root as usize] {
            let var = &prog.vars[v as usize];
            let d = *g
                .get(var)
                .ok_or_else(|| EvalError::Unassigned(var.name().to_string()))?;
            if !self.model.domain(w).contains(&d) {
                return Err(EvalError::OutsideDomain {
                    var: var.name().to_string(),
                    individual: self
                        .model
                        .individuals()
                        .get(d)
                        .cloned()
                        .unwrap_or_else(|| format!("#{d}")),
                    world: self.model.world_name(w).to_string(),
                });
            }
            self.env[v as usize] = d as u32;
        }
        Ok(self.ev(root, w))
    }

    /// Truth at `w` under every assignment of the free variables into D(w).
    pub fn sat_at(&mut self, w: WorldId) -> Result<bool, EvalError> {
        if w >= self.model.world_count() {
            return Err(EvalError::UnknownWorld(w));
        }
        let prog = self.prog;
        let root = prog.root;
        let dom: Vec<Ind> = self.model.domain(w).iter().copied().collect();
        Ok(self.all_tuples(&prog.free[root as usize], 0, &dom, &mut |c| c.ev(root, w)))
    }

    /// Worlds where the formula is satisfied under every assignment.
    pub fn true_worlds(&mut self) -> Result<BTreeSet<WorldId>, EvalError> {
        let mut out = BTreeSet::new();
        for w in self.model.worlds() {
            if self.sat_at(w)? {
                out.insert(w);
            }
        }
        Ok(out)
    }

    pub fn valid_in_model(&mut self) -> Result<bool, EvalError> {
        for w in self.model.worlds() {
            if !self.sat_at(w)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn all_tuples(
        &mut self,
        vars: &[u32],
        at: usize,
        dom: &[Ind],
        body: &mut dyn FnMut(&mut Self) -> bool,
    ) -> bool {
        if at == vars.len() {
            return body(self);
        }
        let v = vars[at] as usize;
        let saved = self.env[v];
        let mut ok = true;
        for &d in dom {
            self.env[v] = d as u32;
            if !self.all_tuples(vars, at + 1, dom, body) {
                ok = false;
                break;
            }
        }
        self.env[v] = saved;
        ok
    }

    fn key(&self, node: u32) -> Result<u64, Vec<u32>> {
        let fv = &self.prog.free[node as usize];
        if self.packable[node as usize] {
            let mut k = 0u64;
            for &v in fv {
                k = k * self.radix + self.env[v as usize] as u64;
            }
            Ok(k)
        } else {
            Err(fv.iter().map(|&v| self.env[v as usize]).collect())
        }
    }

    fn ev(&mut self, node: u32, w: WorldId) -> bool {
        let prog = self.prog;
        match &prog.ops[node as usize] {
            Op::Bot => return false,
            Op::Top => return true,
            Op::Atom { args, .. } => {
                let Some(l) = self.letters[node as usize] else {
                    return false;
                };
                self.buf.clear();
                for &a in args {
                    self.buf.push(self.env[a as usize] as Ind);
                }
                return self.model.extension(w, l).contains(self.buf.as_slice());
            }
            _ => {}
        }
        let key = self.key(node);
        let cached = match &key {
            Ok(k) => self.memo.get(&(node, w as u32, *k)).copied(),
            Err(vals) => self.wide_memo.get(&(node, w as u32, vals.clone())).copied(),
        };
        if let Some(b) = cached {
            return b;
        }
        let b = self.compute(node, w);
        match key {
            Ok(k) => {
                self.memo.insert((node, w as u32, k), b);
            }
            Err(vals) => {
                self.wide_memo.insert((node, w as u32, vals), b);
            }
        }
        b
    }

    fn succ(&self, w: WorldId) -> Vec<WorldId> {
        self.model.successors(w).iter().copied().collect()
    }

    fn compute(&mut self, node: u32, w: WorldId) -> bool {
        let prog = self.prog;
        let mode = prog.mode;
        match &prog.ops[node as usize] {
            Op::Atom { .. } | Op::Bot | Op::Top => unreachable!("leaves are evaluated directly"),
            Op::And(a, b) => self.ev(*a, w) && self.ev(*b, w),
            Op::Or(a, b) => self.ev(*a, w) || self.ev(*b, w),
            Op::Neg(a) => match mode {
                Mode::Modal => !self.ev(*a, w),
                _ => self.succ(w).into_iter().all(|v| !self.ev(*a, v)),
            },
            Op::Imp(a, b) => match mode {
                Mode::Modal => !self.ev(*a, w) || self.ev(*b, w),
                _ => self
                    .succ(w)
                    .into_iter()
                    .all(|v| !self.ev(*a, v) || self.ev(*b, v)),
            },
            Op::Box(a) => self.succ(w).into_iter().all(|v| self.ev(*a, v)),
            Op::Dia(a) => self.succ(w).into_iter().any(|v| self.ev(*a, v)),
            &Op::Exists(x, body) => {
                let saved = self.env[x as usize];
                let dom: Vec<Ind> = self.model.domain(w).iter().copied().collect();
                let mut found = false;
                for d in dom {
                    self.env[x as usize] = d as u32;
                    if self.ev(body, w) {
                        found = true;
                        break;
                    }
                }
                self.env[x as usize] = saved;
                found
            }
            Op::Forall(vars, body) => match mode {
                Mode::Modal => {
                    let dom: Vec<Ind> = self.model.domain(w).iter().copied().collect();
                    self.all_tuples(vars, 0, &dom, &mut |c| c.ev(*body, w))
                }
                _ => self.succ(w).into_iter().all(|v| {
                    let dom: Vec<Ind> = self.model.domain(v).iter().copied().collect();
                    self.all_tuples(vars, 0, &dom, &mut |c| c.ev(*body, v))
                }),
            },
        }
    }
}

/// `eval(m, w, g, f)`.
pub fn eval(m: &Model, w: WorldId, g: &Assignment, f: &Formula) -> Result<bool, EvalError> {
    let prog = Program::compile(f, m.mode)?;
    let mut c = Checker::new(&prog, m)?;
    c.eval(w, g)
}

/// `satAt(m, w, f)`.
pub fn sat_at(m: &Model, w: WorldId, f: &Formula) -> Result<bool, EvalError> {
    let prog = Program::compile(f, m.mode)?;
    let mut c = Checker::new(&prog, m)?;
    c.sat_at(w)
}

/// Direct transcription of the truth clauses with no sharing or caching.
/// Exponential on shared inputs; meant for differential tests.
pub fn eval_reference(
    m: &Model,
    w: WorldId,
    g: &Assignment,
    f: &Formula,
) -> Result<bool, EvalError> {
    let mut g = g.clone();
    reference(m, w, &mut g, f)
}

fn lookup(m: &Model, w: WorldId, g: &Assignment, v: &Var) -> Result<Ind, EvalError> {
    let d = *g
        .get(v)
        .ok_or_else(|| EvalError::Unassigned(v.name().to_string()))?;
    if !m.domain(w).contains(&d) {
        return Err(EvalError::OutsideDomain {
            var: v.name().to_string(),
            individual: m.individual_name(d).to_string(),
            world: m.world_name(w).to_string(),
        });
    }
    Ok(d)
}

fn every_successor(
    m: &Model,
    w: WorldId,
    g: &mut Assignment,
    mut test: impl FnMut(WorldId, &mut Assignment) -> Result<bool, EvalError>,
) -> Result<bool, EvalError> {
    for &v in m.successors(w) {
        if !test(v, g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn every_tuple(
    m: &Model,
    w: WorldId,
    vars: &[Var],
    g: &mut Assignment,
    body: &Formula,
) -> Result<bool, EvalError> {
    let Some((x, rest)) = vars.split_first() else {
        return reference(m, w, g, body);
    };
    let saved = g.get(x).copied();
    let mut ok = true;
    for &d in m.domain(w) {
        g.insert(x.clone(), d);
        if !every_tuple(m, w, rest, g, body)? {
            ok = false;
            break;
        }
    }
    match saved {
        Some(d) => g.insert(x.clone(), d),
        None => g.remove(x),
    };
    Ok(ok)
}

fn reference(m: &Model, w: WorldId, g: &mut Assignment, f: &Formula) -> Result<bool, EvalError> {
    let classical = m.mode == Mode::Modal;
    Ok(match f.kind() {
        FormulaKind::Atom(a) => {
            let mut t = Vec::with_capacity(a.arity());
            for v in &a.args {
                t.push(lookup(m, w, g, v)?);
            }
            m.holds(w, &a.letter, &t)
        }
        FormulaKind::Bot => false,
        FormulaKind::Top => true,
        FormulaKind::And(a, b) => reference(m, w, g, a)? && reference(m, w, g, b)?,
        FormulaKind::Or(a, b) => reference(m, w, g, a)? || reference(m, w, g, b)?,
        FormulaKind::Neg(a) if classical => !reference(m, w, g, a)?,
        FormulaKind::Neg(a) => every_successor(m, w, g, |v, g| Ok(!reference(m, v, g, a)?))?,
        FormulaKind::Imp(a, b) if classical => !reference(m, w, g, a)? || reference(m, w, g, b)?,
        FormulaKind::Imp(a, b) => every_successor(m, w, g, |v, g| {
            Ok(!reference(m, v, g, a)? || reference(m, v, g, b)?)
        })?,
        FormulaKind::Box(a) => every_successor(m, w, g, |v, g| reference(m, v, g, a))?,
        FormulaKind::Dia(a) => {
            if !classical {
                return Err(EvalError::Unsupported(m.mode));
            }
            let mut any = false;
            for &v in m.successors(w) {
                if reference(m, v, g, a)? {
                    any = true;
                    break;
                }
            }
            any
        }
        FormulaKind::Exists(x, body) => {
            let saved = g.get(x).copied();
            let mut any = false;
            for &d in m.domain(w) {
                g.insert(x.clone(), d);
                if reference(m, w, g, body)? {
                    any = true;
                    break;
                }
            }
            match saved {
                Some(d) => g.insert(x.clone(), d),
                None => g.remove(x),
            };
            any
        }
        FormulaKind::Forall(x, body) => match m.mode {
            Mode::Modal => every_tuple(m, w, std::slice::from_ref(x), g, body)?,
            Mode::Intuitionistic => every_successor(m, w, g, |v, g| {
                every_tuple(m, v, std::slice::from_ref(x), g, body)
            })?,
            Mode::Visser => {
                let mut vars = vec![x.clone()];
                let mut body = body;
                while let FormulaKind::Forall(y, inner) = body.kind() {
                    vars.push(y.clone());
                    body = inner;
                }
                every_successor(m, w, g, |v, g| every_tuple(m, v, &vars, g, body))?
            }
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn g(pairs: &[(&str, Ind)]) -> Assignment {
        pairs.iter().map(|(v, d)| (Var::new(v), *d)).collect()
    }

    fn both(m: &Model, w: WorldId, asg: &Assignment, f: &Formula) -> bool {
        let fast = eval(m, w, asg, f).unwrap();
        assert_eq!(fast, eval_reference(m, w, asg, f).unwrap(), "{f}");
        fast
    }

    #[test]
    fn box_is_vacuous_without_successors() {
        let mut m = Model::new(Mode::Modal);
        let w = m.add_world("w");
        let a = m.add_individual("a");
        m.add_to_domain(w, a);
        assert!(both(&m, w, &Assignment::new(), &parse("box bot").unwrap()));
        assert!(!both(&m, w, &Assignment::new(), &parse("dia top").unwrap()));
    }

    #[test]
    fn intuitionistic_implication_on_a_chain() {
        let mut m = Model::new(Mode::Intuitionistic);
        let w = m.add_world("w");
        let v = m.add_world("v");
        m.add_edge(w, w);
        m.add_edge(v, v);
        m.add_edge(w, v);
        let a = m.add_individual("a");
        m.set_domain(w, [a]);
        m.set_domain(v, [a]);
        m.add_fact(v, "P", vec![a]).unwrap();
        assert!(m.validate().is_empty());
        let f = parse("top -> P(x)").unwrap();
        assert!(!both(&m, w, &g(&[("x", a)]), &f));
        assert!(both(&m, v, &g(&[("x", a)]), &f));
    }

    #[test]
    fn visser_universal_without_successors() {
        let f = parse("forall x. bot").unwrap();
        let mut m = Model::new(Mode::Visser);
        let w = m.add_world("w");
        let a = m.add_individual("a");
        m.add_to_domain(w, a);
        assert!(both(&m, w, &Assignment::new(), &f));
        m.mode = Mode::Intuitionistic;
        m.add_edge(w, w);
        assert!(!both(&m, w, &Assignment::new(), &f));
    }

    #[test]
    fn sat_at_quantifies_free_variables() {
        let mut m = Model::new(Mode::Modal);
        let w = m.add_world("w");
        let a = m.add_individual("a");
        let b = m.add_individual("b");
        m.set_domain(w, [a, b]);
        m.add_fact(w, "P", vec![a]).unwrap();
        assert!(!sat_at(&m, w, &parse("P(x)").unwrap()).unwrap());
        m.add_fact(w, "P", vec![b]).unwrap();
        assert!(sat_at(&m, w, &parse("P(x)").unwrap()).unwrap());
    }

    #[test]
    fn errors() {
        let mut m = Model::new(Mode::Modal);
        let w = m.add_world("w");
        let a = m.add_individual("a");
        let b = m.add_individual("b");
        m.add_to_domain(w, a);
        let f = parse("P(x)").unwrap();
        assert!(matches!(
            eval(&m, w, &Assignment::new(), &f),
            Err(EvalError::Unassigned(_))
        ));
        assert!(matches!(
            eval(&m, w, &g(&[("x", b)]), &f),
            Err(EvalError::OutsideDomain { .. })
        ));
        m.mode = Mode::Intuitionistic;
        assert!(matches!(
            eval(&m, w, &Assignment::new(), &parse("dia top").unwrap()),
            Err(EvalError::Unsupported(Mode::Intuitionistic))
        ));
    }

    #[test]
    fn shared_dag_evaluates_quickly() {
        let mut m = Model::new(Mode::Modal);
        let w = m.add_world("w");
        m.add_edge(w, w);
        let a = m.add_individual("a");
        m.add_to_domain(w, a);
        m.add_fact(w, "P", vec![a]).unwrap();
        let mut f = parse("P(x)").unwrap();
        for _ in 0..60 {
            f = Formula::and(Formula::boxed(f.clone()), f);
        }
        assert!(eval(&m, w, &g(&[("x", a)]), &f).unwrap());
    }
}
