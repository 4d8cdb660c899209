//! Finite predicate Kripke frames and models.
//!
//! Worlds, individuals and letters are interned to dense indices; names are
//! kept for display and serialization. Frame-class properties are computed
//! on demand, never assumed.

mod eval;
mod json;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{eval, eval_reference, sat_at, Assignment, Checker, EvalError, Program};
pub use json::{ModelJson, ModelJsonError};

pub type WorldId = usize;
pub type Ind = usize;

/// Which truth clauses the evaluator uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Modal,
    Intuitionistic,
    Visser,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Modal => "modal",
            Mode::Intuitionistic => "intuitionistic",
            Mode::Visser => "visser",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "modal" => Some(Mode::Modal),
            "intuitionistic" | "int" => Some(Mode::Intuitionistic),
            "visser" => Some(Mode::Visser),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureKind {
    Reflexive,
    Transitive,
    ReflexiveTransitive,
    ReflexiveSymmetric,
}

/// A finite Kripke frame with named worlds.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Frame {
    names: Vec<String>,
    index: HashMap<String, WorldId>,
    succ: Vec<BTreeSet<WorldId>>,
}

impl Frame {
    pub fn new() -> Frame {
        Frame::default()
    }

    /// Adds a world, or returns the existing id for that name.
    pub fn add_world(&mut self, name: &str) -> WorldId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.succ.push(BTreeSet::new());
        id
    }

    pub fn add_edge(&mut self, from: WorldId, to: WorldId) {
        self.succ[from].insert(to);
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn worlds(&self) -> std::ops::Range<WorldId> {
        0..self.names.len()
    }

    pub fn name(&self, w: WorldId) -> &str {
        &self.names[w]
    }

    pub fn id(&self, name: &str) -> Option<WorldId> {
        self.index.get(name).copied()
    }

    pub fn successors(&self, w: WorldId) -> &BTreeSet<WorldId> {
        &self.succ[w]
    }

    pub fn has_edge(&self, from: WorldId, to: WorldId) -> bool {
        self.succ[from].contains(&to)
    }

    pub fn edges(&self) -> impl Iterator<Item = (WorldId, WorldId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, s)| s.iter().map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(BTreeSet::len).sum()
    }

    pub fn is_reflexive(&self) -> bool {
        self.worlds().all(|w| self.has_edge(w, w))
    }

    pub fn is_irreflexive(&self) -> bool {
        self.worlds().all(|w| !self.has_edge(w, w))
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges().all(|(a, b)| self.has_edge(b, a))
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.edges().all(|(a, b)| a == b || !self.has_edge(b, a))
    }

    pub fn is_transitive(&self) -> bool {
        self.first_transitivity_gap().is_none()
    }

    fn first_transitivity_gap(&self) -> Option<(WorldId, WorldId, WorldId)> {
        for (a, b) in self.edges() {
            for &c in self.successors(b) {
                if !self.has_edge(a, c) {
                    return Some((a, b, c));
                }
            }
        }
        None
    }

    /// Every two successors of a world have a common successor.
    pub fn is_convergent(&self) -> bool {
        self.worlds().all(|w| {
            let s: Vec<_> = self.successors(w).iter().copied().collect();
            s.iter().all(|&v1| {
                s.iter().all(|&v2| {
                    self.successors(v1)
                        .iter()
                        .any(|u| self.successors(v2).contains(u))
                })
            })
        })
    }

    /// No cycle through the strict part (reflexive loops ignored). On a
    /// finite transitive frame this is converse well-foundedness of the
    /// strict relation.
    pub fn is_acyclic(&self) -> bool {
        let n = self.len();
        let mut indegree = vec![0usize; n];
        for (a, b) in self.edges() {
            if a != b {
                indegree[b] += 1;
            }
        }
        let mut queue: VecDeque<WorldId> = (0..n).filter(|&w| indegree[w] == 0).collect();
        let mut seen = 0;
        while let Some(w) = queue.pop_front() {
            seen += 1;
            for &v in self.successors(w) {
                if v != w {
                    indegree[v] -= 1;
                    if indegree[v] == 0 {
                        queue.push_back(v);
                    }
                }
            }
        }
        seen == n
    }

    /// Worlds reachable from `w` in one or more steps.
    pub fn reachable(&self, w: WorldId) -> BTreeSet<WorldId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<WorldId> = self.successors(w).iter().copied().collect();
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend(self.successors(v).iter().copied());
            }
        }
        seen
    }

    /// Least superset of the relation with the named property.
    pub fn closure(&self, kind: ClosureKind) -> Frame {
        let mut out = self.clone();
        let reflexive = matches!(
            kind,
            ClosureKind::Reflexive
                | ClosureKind::ReflexiveTransitive
                | ClosureKind::ReflexiveSymmetric
        );
        if matches!(
            kind,
            ClosureKind::Transitive | ClosureKind::ReflexiveTransitive
        ) {
            for w in self.worlds() {
                out.succ[w] = self.reachable(w);
            }
        }
        if kind == ClosureKind::ReflexiveSymmetric {
            for (a, b) in self.edges() {
                out.succ[b].insert(a);
            }
        }
        if reflexive {
            for w in self.worlds() {
                out.succ[w].insert(w);
            }
        }
        out
    }

    /// The frame restricted to the given worlds, renumbered in id order.
    pub fn restrict(&self, keep: &BTreeSet<WorldId>) -> (Frame, Vec<Option<WorldId>>) {
        let mut out = Frame::new();
        let mut map = vec![None; self.len()];
        for &w in keep {
            map[w] = Some(out.add_world(self.name(w)));
        }
        for (a, b) in self.edges() {
            if let (Some(a2), Some(b2)) = (map[a], map[b]) {
                out.add_edge(a2, b2);
            }
        }
        (out, map)
    }
}

/// A frame-class requirement, as used by bounded search and the checks on
/// constructed models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameProperty {
    Reflexive,
    Irreflexive,
    Transitive,
    Symmetric,
    Antisymmetric,
    Convergent,
    Acyclic,
}

impl FrameProperty {
    pub fn holds(self, frame: &Frame) -> bool {
        match self {
            FrameProperty::Reflexive => frame.is_reflexive(),
            FrameProperty::Irreflexive => frame.is_irreflexive(),
            FrameProperty::Transitive => frame.is_transitive(),
            FrameProperty::Symmetric => frame.is_symmetric(),
            FrameProperty::Antisymmetric => frame.is_antisymmetric(),
            FrameProperty::Convergent => frame.is_convergent(),
            FrameProperty::Acyclic => frame.is_acyclic(),
        }
    }

    pub fn parse(s: &str) -> Option<FrameProperty> {
        Some(match s {
            "reflexive" => FrameProperty::Reflexive,
            "irreflexive" => FrameProperty::Irreflexive,
            "transitive" => FrameProperty::Transitive,
            "symmetric" => FrameProperty::Symmetric,
            "antisymmetric" => FrameProperty::Antisymmetric,
            "convergent" => FrameProperty::Convergent,
            "acyclic" => FrameProperty::Acyclic,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown world {0}")]
    UnknownWorld(String),
    #[error("unknown individual {0}")]
    UnknownIndividual(String),
    #[error("letter {letter} has arity {expected}, got a tuple of width {found}")]
    Arity {
        letter: String,
        expected: usize,
        found: usize,
    },
}

/// A finite predicate Kripke model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub mode: Mode,
    frame: Frame,
    individuals: Vec<String>,
    ind_index: HashMap<String, Ind>,
    domains: Vec<BTreeSet<Ind>>,
    letters: Vec<(String, usize)>,
    letter_index: HashMap<String, usize>,
    // [world][letter]
    interp: Vec<Vec<BTreeSet<Vec<Ind>>>>,
}

impl Model {
    pub fn new(mode: Mode) -> Model {
        Model {
            mode,
            frame: Frame::new(),
            individuals: Vec::new(),
            ind_index: HashMap::new(),
            domains: Vec::new(),
            letters: Vec::new(),
            letter_index: HashMap::new(),
            interp: Vec::new(),
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn add_world(&mut self, name: &str) -> WorldId {
        let before = self.frame.len();
        let id = self.frame.add_world(name);
        if self.frame.len() > before {
            self.domains.push(BTreeSet::new());
            self.interp.push(vec![BTreeSet::new(); self.letters.len()]);
        }
        id
    }

    pub fn add_edge(&mut self, from: WorldId, to: WorldId) {
        self.frame.add_edge(from, to);
    }

    pub fn add_edge_named(&mut self, from: &str, to: &str) -> Result<(), ModelError> {
        let a = self.world_id(from)?;
        let b = self.world_id(to)?;
        self.add_edge(a, b);
        Ok(())
    }

    /// Replaces the accessibility relation; the world list must match.
    pub fn set_frame(&mut self, frame: Frame) {
        assert_eq!(
            frame.names, self.frame.names,
            "frame must keep the same worlds"
        );
        self.frame = frame;
    }

    pub fn apply_closure(&mut self, kind: ClosureKind) {
        self.frame = self.frame.closure(kind);
    }

    pub fn add_individual(&mut self, name: &str) -> Ind {
        if let Some(&i) = self.ind_index.get(name) {
            return i;
        }
        let i = self.individuals.len();
        self.individuals.push(name.to_string());
        self.ind_index.insert(name.to_string(), i);
        i
    }

    pub fn add_to_domain(&mut self, w: WorldId, d: Ind) {
        self.domains[w].insert(d);
    }

    pub fn set_domain(&mut self, w: WorldId, ds: impl IntoIterator<Item = Ind>) {
        self.domains[w] = ds.into_iter().collect();
    }

    pub fn declare_letter(&mut self, name: &str, arity: usize) -> Result<usize, ModelError> {
        if let Some(&l) = self.letter_index.get(name) {
            if self.letters[l].1 != arity {
                return Err(ModelError::Arity {
                    letter: name.to_string(),
                    expected: self.letters[l].1,
                    found: arity,
                });
            }
            return Ok(l);
        }
        let l = self.letters.len();
        self.letters.push((name.to_string(), arity));
        self.letter_index.insert(name.to_string(), l);
        for row in &mut self.interp {
            row.push(BTreeSet::new());
        }
        Ok(l)
    }

    pub fn add_fact(
        &mut self,
        w: WorldId,
        letter: &str,
        tuple: Vec<Ind>,
    ) -> Result<(), ModelError> {
        let l = self.declare_letter(letter, tuple.len())?;
        self.interp[w][l].insert(tuple);
        Ok(())
    }

    pub fn add_fact_named(
        &mut self,
        world: &str,
        letter: &str,
        tuple: &[&str],
    ) -> Result<(), ModelError> {
        let w = self.world_id(world)?;
        let t = tuple
            .iter()
            .map(|n| self.individual_id(n))
            .collect::<Result<Vec<_>, _>>()?;
        self.add_fact(w, letter, t)
    }

    /// Removes a letter's extension everywhere (the letter stays declared).
    pub fn clear_letter(&mut self, letter: &str) {
        if let Some(&l) = self.letter_index.get(letter) {
            for row in &mut self.interp {
                row[l].clear();
            }
        }
    }

    pub fn world_id(&self, name: &str) -> Result<WorldId, ModelError> {
        self.frame
            .id(name)
            .ok_or_else(|| ModelError::UnknownWorld(name.to_string()))
    }

    pub fn individual_id(&self, name: &str) -> Result<Ind, ModelError> {
        self.ind_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownIndividual(name.to_string()))
    }

    pub fn world_name(&self, w: WorldId) -> &str {
        self.frame.name(w)
    }

    pub fn individual_name(&self, d: Ind) -> &str {
        &self.individuals[d]
    }

    pub fn individuals(&self) -> &[String] {
        &self.individuals
    }

    pub fn worlds(&self) -> std::ops::Range<WorldId> {
        self.frame.worlds()
    }

    pub fn world_count(&self) -> usize {
        self.frame.len()
    }

    pub fn domain(&self, w: WorldId) -> &BTreeSet<Ind> {
        &self.domains[w]
    }

    pub fn successors(&self, w: WorldId) -> &BTreeSet<WorldId> {
        self.frame.successors(w)
    }

    pub fn letters(&self) -> &[(String, usize)] {
        &self.letters
    }

    pub fn letter_id(&self, name: &str) -> Option<usize> {
        self.letter_index.get(name).copied()
    }

    pub fn extension(&self, w: WorldId, letter: usize) -> &BTreeSet<Vec<Ind>> {
        &self.interp[w][letter]
    }

    pub fn holds(&self, w: WorldId, letter: &str, tuple: &[Ind]) -> bool {
        match self.letter_index.get(letter) {
            Some(&l) => self.interp[w][l].contains(tuple),
            None => false,
        }
    }

    pub fn has_constant_domains(&self) -> bool {
        self.domains.windows(2).all(|p| p[0] == p[1])
    }

    /// Union of all world domains.
    pub fn all_individuals_in_use(&self) -> BTreeSet<Ind> {
        self.domains.iter().flatten().copied().collect()
    }

    /// The submodel on `keep`. Mode, individuals and letters are preserved.
    pub fn restrict(&self, keep: &BTreeSet<WorldId>) -> Model {
        let (frame, map) = self.frame.restrict(keep);
        let mut out = Model {
            mode: self.mode,
            frame,
            individuals: self.individuals.clone(),
            ind_index: self.ind_index.clone(),
            domains: Vec::new(),
            letters: self.letters.clone(),
            letter_index: self.letter_index.clone(),
            interp: Vec::new(),
        };
        for w in self.worlds() {
            if map[w].is_some() {
                out.domains.push(self.domains[w].clone());
                out.interp.push(self.interp[w].clone());
            }
        }
        out
    }

    /// `validate(m)`: every violated side condition for the model's mode.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let name = |w: WorldId| self.world_name(w).to_string();
        for w in self.worlds() {
            if self.domains[w].is_empty() {
                out.push(Violation::EmptyDomain { world: name(w) });
            }
            for (l, (letter, arity)) in self.letters.iter().enumerate() {
                for t in &self.interp[w][l] {
                    if t.len() != *arity {
                        out.push(Violation::TupleWidth {
                            world: name(w),
                            letter: letter.clone(),
                        });
                    } else if t.iter().any(|d| !self.domains[w].contains(d)) {
                        out.push(Violation::TupleOutsideDomain {
                            world: name(w),
                            letter: letter.clone(),
                            tuple: self.tuple_names(t),
                        });
                    }
                }
            }
        }
        for (a, b) in self.frame.edges() {
            for d in self.domains[a].difference(&self.domains[b]) {
                out.push(Violation::DomainNotExpanding {
                    from: name(a),
                    to: name(b),
                    individual: self.individuals[*d].clone(),
                });
            }
            if self.mode != Mode::Modal {
                for (l, (letter, _)) in self.letters.iter().enumerate() {
                    for t in self.interp[a][l].difference(&self.interp[b][l]) {
                        out.push(Violation::Heredity {
                            from: name(a),
                            to: name(b),
                            letter: letter.clone(),
                            tuple: self.tuple_names(t),
                        });
                    }
                }
            }
        }
        if self.mode == Mode::Intuitionistic {
            for w in self.worlds() {
                if !self.frame.has_edge(w, w) {
                    out.push(Violation::NotReflexive { world: name(w) });
                }
            }
        }
        if self.mode != Mode::Modal {
            for (a, b) in self.frame.edges() {
                if a < b && self.frame.has_edge(b, a) {
                    out.push(Violation::NotAntisymmetric {
                        a: name(a),
                        b: name(b),
                    });
                }
            }
            if let Some((a, b, c)) = self.frame.first_transitivity_gap() {
                out.push(Violation::NotTransitive {
                    a: name(a),
                    b: name(b),
                    c: name(c),
                });
            }
        }
        out
    }

    fn tuple_names(&self, t: &[Ind]) -> Vec<String> {
        t.iter().map(|&d| self.individuals[d].clone()).collect()
    }

    /// Letters' extensions at a world, by name; handy in test failure output.
    pub fn describe_world(&self, w: WorldId) -> BTreeMap<String, Vec<Vec<String>>> {
        self.letters
            .iter()
            .enumerate()
            .map(|(l, (name, _))| {
                (
                    name.clone(),
                    self.interp[w][l]
                        .iter()
                        .map(|t| self.tuple_names(t))
                        .collect(),
                )
            })
            .collect()
    }
}

/// A violated structural side condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyDomain {
        world: String,
    },
    TupleWidth {
        world: String,
        letter: String,
    },
    TupleOutsideDomain {
        world: String,
        letter: String,
        tuple: Vec<String>,
    },
    DomainNotExpanding {
        from: String,
        to: String,
        individual: String,
    },
    Heredity {
        from: String,
        to: String,
        letter: String,
        tuple: Vec<String>,
    },
    NotReflexive {
        world: String,
    },
    NotAntisymmetric {
        a: String,
        b: String,
    },
    NotTransitive {
        a: String,
        b: String,
        c: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyDomain { world } => write!(f, "domain of {world} is empty"),
            Violation::TupleWidth { world, letter } => {
                write!(f, "tuple of wrong width for {letter} at {world}")
            }
            Violation::TupleOutsideDomain {
                world,
                letter,
                tuple,
            } => {
                write!(
                    f,
                    "{letter}{tuple:?} at {world} uses individuals outside D({world})"
                )
            }
            Violation::DomainNotExpanding {
                from,
                to,
                individual,
            } => {
                write!(
                    f,
                    "{individual} in D({from}) but not in D({to}) although {from} R {to}"
                )
            }
            Violation::Heredity {
                from,
                to,
                letter,
                tuple,
            } => {
                write!(
                    f,
                    "heredity fails for {letter}{tuple:?} along {from} R {to}"
                )
            }
            Violation::NotReflexive { world } => write!(f, "{world} does not see itself"),
            Violation::NotAntisymmetric { a, b } => write!(f, "{a} and {b} see each other"),
            Violation::NotTransitive { a, b, c } => {
                write!(f, "{a} R {b} R {c} but not {a} R {c}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Frame {
        let mut fr = Frame::new();
        for i in 0..n {
            fr.add_world(&format!("w{i}"));
        }
        for i in 0..n.saturating_sub(1) {
            fr.add_edge(i, i + 1);
        }
        fr
    }

    #[test]
    fn transitive_closure_of_chain() {
        let c = chain(3).closure(ClosureKind::Transitive);
        assert!(c.has_edge(0, 2));
        assert!(!c.has_edge(0, 0));
        assert!(c.is_transitive());
    }

    #[test]
    fn reflexive_closure_adds_loops() {
        let c = chain(3).closure(ClosureKind::Reflexive);
        assert!(c.is_reflexive());
        assert_eq!(c.edge_count(), 5);
        let s = chain(3).closure(ClosureKind::ReflexiveSymmetric);
        assert!(s.is_reflexive() && s.is_symmetric() && !s.is_transitive());
    }

    #[test]
    fn closures_are_idempotent_and_monotone() {
        let kinds = [
            ClosureKind::Reflexive,
            ClosureKind::Transitive,
            ClosureKind::ReflexiveTransitive,
            ClosureKind::ReflexiveSymmetric,
        ];
        // every relation on three worlds
        for bits in 0u32..512 {
            let mut fr = chain(0);
            for i in 0..3 {
                fr.add_world(&format!("w{i}"));
            }
            for i in 0..9 {
                if bits >> i & 1 == 1 {
                    fr.add_edge(i / 3, i % 3);
                }
            }
            for k in kinds {
                let once = fr.closure(k);
                assert_eq!(once.closure(k), once);
                assert!(fr.edges().all(|(a, b)| once.has_edge(a, b)));
            }
        }
    }

    #[test]
    fn acyclicity_ignores_loops() {
        let mut fr = chain(3).closure(ClosureKind::ReflexiveTransitive);
        assert!(fr.is_acyclic());
        fr.add_edge(2, 0);
        assert!(!fr.is_acyclic());
    }

    fn single(mode: Mode) -> Model {
        let mut m = Model::new(mode);
        let w = m.add_world("w");
        m.add_edge(w, w);
        let a = m.add_individual("a");
        m.add_to_domain(w, a);
        m
    }

    #[test]
    fn validate_single_reflexive_world() {
        let mut m = single(Mode::Intuitionistic);
        m.add_fact(0, "P", vec![0]).unwrap();
        assert!(m.validate().is_empty());
    }

    #[test]
    fn validate_reports_heredity_failure() {
        let mut m = single(Mode::Intuitionistic);
        let v = m.add_world("v");
        m.add_edge(v, v);
        m.add_edge(0, v);
        m.add_to_domain(v, 0);
        m.add_fact(0, "P", vec![0]).unwrap();
        let vs = m.validate();
        assert_eq!(
            vs,
            vec![Violation::Heredity {
                from: "w".into(),
                to: "v".into(),
                letter: "P".into(),
                tuple: vec!["a".into()]
            }]
        );
    }

    #[test]
    fn validate_expanding_domains_in_modal_mode() {
        let mut m = Model::new(Mode::Modal);
        let w = m.add_world("w");
        let v = m.add_world("v");
        m.add_edge(w, v);
        let a = m.add_individual("a");
        let b = m.add_individual("b");
        m.set_domain(w, [a]);
        m.set_domain(v, [a, b]);
        assert!(m.validate().is_empty());
        m.add_edge(v, w);
        assert!(matches!(
            m.validate()[..],
            [Violation::DomainNotExpanding { .. }]
        ));
    }

    #[test]
    fn validate_frame_conditions_per_mode() {
        let mut m = Model::new(Mode::Intuitionistic);
        let w = m.add_world("w");
        let a = m.add_individual("a");
        m.add_to_domain(w, a);
        assert!(matches!(m.validate()[..], [Violation::NotReflexive { .. }]));
        m.mode = Mode::Visser;
        assert!(m.validate().is_empty());
        let v = m.add_world("v");
        m.add_to_domain(v, a);
        m.add_edge(w, v);
        m.add_edge(v, w);
        let vs = m.validate();
        assert!(vs
            .iter()
            .any(|x| matches!(x, Violation::NotAntisymmetric { .. })));
        assert!(vs
            .iter()
            .any(|x| matches!(x, Violation::NotTransitive { .. })));
    }

    #[test]
    fn tuples_outside_domain_are_flagged() {
        let mut m = single(Mode::Modal);
        let b = m.add_individual("b");
        m.add_fact(0, "P", vec![b]).unwrap();
        assert!(matches!(
            m.validate()[..],
            [Violation::TupleOutsideDomain { .. }]
        ));
        assert!(m.add_fact(0, "P", vec![0, 0]).is_err());
    }

    #[test]
    fn convergence() {
        // w sees v1 and v2 with no common successor
        let mut fr = Frame::new();
        for n in ["w", "v1", "v2"] {
            fr.add_world(n);
        }
        fr.add_edge(0, 1);
        fr.add_edge(0, 2);
        let r = fr.closure(ClosureKind::Reflexive);
        assert!(!r.is_convergent());
        let mut c = fr.clone();
        c.add_world("u");
        c.add_edge(1, 3);
        c.add_edge(2, 3);
        c.add_edge(0, 3);
        assert!(c.closure(ClosureKind::Reflexive).is_convergent());
    }
}
