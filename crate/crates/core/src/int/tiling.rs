use std::collections::BTreeMap;

use serde::Serialize;

use super::IntError;
use crate::formula::{profile, substitute_atoms, Formula, Template, Var};
use crate::kripke::{eval, Assignment, ClosureKind, Mode, Model, WorldId};
use crate::search::TileSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TilingVariant {
    /// Read on reflexive frames.
    Int,
    /// Read on irreflexive frames; adds the horizontal stability conjunct.
    Visser,
}

/// Letter names used by the tiling formula.
#[derive(Debug, Clone, Serialize)]
pub struct TilingLetters {
    pub h: String,
    pub v: String,
    pub d: String,
    pub p: String,
    pub q: String,
    /// One monadic letter per tile, in tile order.
    pub tiles: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TilingEncoding {
    pub letters: TilingLetters,
    /// Labelled conjuncts of the premise, in order.
    pub conjuncts: Vec<(String, Formula)>,
    pub psi: Formula,
    pub phi: Formula,
}

/// The tiling formula over `x`, `y`: the premise says that every element
/// carries exactly one tile up to `q`, that neighbours match, that `H` and
/// `V` are total and (for `V`, and in the irreflexive reading also `H`)
/// stable, and that the grid closes into squares at `D`-elements.
pub fn encode_tiling(t: &TileSet, variant: TilingVariant) -> Result<TilingEncoding, IntError> {
    t.check().map_err(|e| IntError::Tiles(e.to_string()))?;
    let letters = TilingLetters {
        h: "H".into(),
        v: "V".into(),
        d: "D".into(),
        p: "p".into(),
        q: "q".into(),
        tiles: t.tiles.iter().map(|x| format!("P_{}", x.name)).collect(),
    };
    let (x, y) = (Var::new("x"), Var::new("y"));
    let q = Formula::prop(&letters.q);
    let p = Formula::prop(&letters.p);
    let pt = |i: usize, v: &Var| Formula::unary(&letters.tiles[i], v);
    let bin = |l: &str, a: &Var, b: &Var| Formula::atom(l, &[a.clone(), b.clone()]);
    let all2 = |f: Formula| Formula::forall(x.clone(), Formula::forall(y.clone(), f));
    let mut conjuncts = Vec::new();

    let one = (0..t.len()).map(|i| {
        let others = (0..t.len())
            .filter(|&j| j != i)
            .map(|j| Formula::imp(pt(j, &x), q.clone()));
        match Formula::conj(others) {
            Some(rest) => Formula::and(pt(i, &x), rest),
            None => pt(i, &x),
        }
    });
    conjuncts.push((
        "tile".to_string(),
        Formula::forall(x.clone(), Formula::disj(one).expect("tiles")),
    ));

    for (label, rel, clash) in [
        (
            "horizontal",
            &letters.h,
            (|a: &crate::search::Tile, b: &crate::search::Tile| a.right != b.left)
                as fn(&_, &_) -> bool,
        ),
        ("vertical", &letters.v, |a, b| a.up != b.down),
    ] {
        let parts = (0..t.len())
            .flat_map(|i| (0..t.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| clash(&t.tiles[i], &t.tiles[j]))
            .map(|(i, j)| {
                all2(Formula::imp(
                    Formula::and(Formula::and(bin(rel, &x, &y), pt(i, &x)), pt(j, &y)),
                    q.clone(),
                ))
            });
        if let Some(c) = Formula::conj(parts) {
            conjuncts.push((label.to_string(), c));
        }
    }

    let total = |l: &str| Formula::forall(x.clone(), Formula::exists(y.clone(), bin(l, &x, &y)));
    conjuncts.push((
        "total".into(),
        Formula::and(total(&letters.h), total(&letters.v)),
    ));
    let stable = |l: &str| {
        all2(Formula::or(
            bin(l, &x, &y),
            Formula::imp(bin(l, &x, &y), q.clone()),
        ))
    };
    conjuncts.push(("stable".into(), stable(&letters.v)));
    let d = |v: &Var| Formula::unary(&letters.d, v);
    let square = all2(Formula::imp(
        Formula::and(
            bin(&letters.v, &x, &y),
            Formula::exists(x.clone(), Formula::and(d(&x), bin(&letters.h, &y, &x))),
        ),
        Formula::forall(
            y.clone(),
            Formula::imp(
                bin(&letters.h, &x, &y),
                Formula::forall(x.clone(), Formula::imp(d(&x), bin(&letters.v, &y, &x))),
            ),
        ),
    ));
    conjuncts.push(("square".into(), square));
    if variant == TilingVariant::Visser {
        conjuncts.push(("stable_h".into(), stable(&letters.h)));
    }
    let psi = Formula::conj(conjuncts.iter().map(|(_, f)| f.clone())).expect("nonempty");
    let phi = match variant {
        TilingVariant::Int => {
            let inner = Formula::imp(
                Formula::exists(x.clone(), Formula::imp(d(&x), q.clone())),
                p.clone(),
            );
            Formula::imp(psi.clone(), Formula::imp(inner, p))
        }
        TilingVariant::Visser => {
            let mut q5 = q.clone();
            for _ in 0..5 {
                q5 = Formula::boxed(q5);
            }
            let inner = Formula::imp(
                Formula::exists(x.clone(), Formula::imp(d(&x), q5)),
                p.clone(),
            );
            Formula::imp(psi.clone(), Formula::imp(inner, Formula::boxed(p)))
        }
    };
    Ok(TilingEncoding {
        letters,
        conjuncts,
        psi,
        phi,
    })
}

/// Fresh letters replacing one binary letter.
#[derive(Debug, Clone)]
pub struct BinaryFresh {
    pub first: String,
    pub second: String,
    pub r: String,
    pub s: String,
}

impl BinaryFresh {
    /// `Q1`, `Q2`, `r_Q`, `s_Q`, primed until they avoid the formula.
    pub fn for_letter(f: &Formula, q: &str) -> BinaryFresh {
        let used = profile(f).letter_names();
        let pick = |base: String| {
            let mut s = base;
            while used.contains(&s) {
                s.push('_');
            }
            s
        };
        BinaryFresh {
            first: pick(format!("{q}1")),
            second: pick(format!("{q}2")),
            r: pick(format!("r_{q}")),
            s: pick(format!("s_{q}")),
        }
    }

    fn names(&self) -> [&str; 4] {
        [&self.first, &self.second, &self.r, &self.s]
    }
}

/// Replaces `Q(u, v)` by `(Q1(u) & Q2(v) -> r) | s` in a positive formula.
pub fn eliminate_binary(chi: &Formula, q: &str, fresh: &BinaryFresh) -> Result<Formula, IntError> {
    let prof = profile(chi);
    if !prof.positive {
        return Err(IntError::NotPositive);
    }
    match prof.letters.get(q) {
        Some(info) if info.arity == 2 && !prof.arity_conflicts.contains(q) => {}
        Some(_) => return Err(IntError::NotBinary(q.into())),
        None => return Err(IntError::UnknownLetter(q.into())),
    }
    let names = fresh.names();
    if let Some(clash) = names.iter().find(|n| prof.letters.contains_key(**n)) {
        return Err(IntError::LetterClash(clash.to_string()));
    }
    for (i, a) in names.iter().enumerate() {
        if names[..i].contains(a) || *a == q {
            return Err(IntError::LetterClash(a.to_string()));
        }
    }
    let (u, v) = (Var::new("u"), Var::new("v"));
    let body = Formula::or(
        Formula::imp(
            Formula::and(
                Formula::unary(&fresh.first, &u),
                Formula::unary(&fresh.second, &v),
            ),
            Formula::prop(&fresh.r),
        ),
        Formula::prop(&fresh.s),
    );
    let map = BTreeMap::from([(q.to_string(), Template::new(vec![u, v], body))]);
    Ok(substitute_atoms(chi, &map)?)
}

/// A finite countermodel for the eliminated formula, built from one for
/// the original: for every world `w` and pair `a, b` with `Q(a, b)` false at
/// `w`, a new final world `w|a|b` where `Q1 = {a}`, `Q2 = {b}`, `r` is
/// false, `s` is true and everything else is universally true. `Q1`, `Q2`,
/// `r`, `s` are empty at the old worlds and `Q` is dropped.
pub fn witness_eliminate_binary(
    m: &Model,
    w0: WorldId,
    chi: &Formula,
    q: &str,
    fresh: &BinaryFresh,
) -> Result<Model, IntError> {
    if m.mode != Mode::Intuitionistic {
        return Err(IntError::WrongMode(m.mode));
    }
    if let Some(v) = m.validate().into_iter().next() {
        return Err(IntError::InvalidModel(v.to_string()));
    }
    if w0 >= m.world_count() {
        return Err(IntError::InvalidModel(format!("no world {w0}")));
    }
    if eval(m, w0, &Assignment::new(), chi)? {
        return Err(IntError::NotRefuted(m.world_name(w0).to_string()));
    }
    let eliminated = eliminate_binary(chi, q, fresh)?;
    let mut out = Model::new(Mode::Intuitionistic);
    for d in m.individuals() {
        out.add_individual(d);
    }
    for w in m.worlds() {
        out.add_world(m.world_name(w));
        out.set_domain(w, m.domain(w).iter().copied());
    }
    for (a, b) in m.frame().edges() {
        out.add_edge(a, b);
    }
    let mut letters: Vec<(String, usize)> = Vec::new();
    for (l, (name, arity)) in m.letters().iter().enumerate() {
        if name == q {
            continue;
        }
        out.declare_letter(name, *arity)
            .map_err(|e| IntError::InvalidModel(e.to_string()))?;
        letters.push((name.clone(), *arity));
        for w in m.worlds() {
            for t in m.extension(w, l) {
                out.add_fact(w, name, t.clone()).expect("declared");
            }
        }
    }
    for (name, info) in &profile(&eliminated).letters {
        if !letters.iter().any(|(n, _)| n == name) {
            out.declare_letter(name, info.arity)
                .map_err(|e| IntError::InvalidModel(e.to_string()))?;
            letters.push((name.clone(), info.arity));
        }
    }
    for w in m.worlds() {
        let dom: Vec<usize> = m.domain(w).iter().copied().collect();
        for &a in &dom {
            for &b in &dom {
                if m.holds(w, q, &[a, b]) {
                    continue;
                }
                let name = format!(
                    "{}|{}|{}",
                    m.world_name(w),
                    m.individual_name(a),
                    m.individual_name(b)
                );
                let n = out.add_world(&name);
                out.set_domain(n, dom.iter().copied());
                out.add_edge(w, n);
                out.add_fact(n, &fresh.first, vec![a]).expect("monadic");
                out.add_fact(n, &fresh.second, vec![b]).expect("monadic");
                out.add_fact(n, &fresh.s, vec![]).expect("0-ary");
                for (l, arity) in &letters {
                    if fresh.names().contains(&l.as_str()) {
                        continue;
                    }
                    for t in tuples(&dom, *arity) {
                        out.add_fact(n, l, t).expect("declared");
                    }
                }
            }
        }
    }
    out.apply_closure(ClosureKind::ReflexiveTransitive);
    if let Some(v) = out.validate().into_iter().next() {
        return Err(IntError::InvalidModel(format!("constructed model: {v}")));
    }
    if eval(&out, w0, &Assignment::new(), &eliminated)? {
        return Err(IntError::InvalidModel(
            "constructed model satisfies the eliminated formula".into(),
        ));
    }
    Ok(out)
}

fn tuples(dom: &[usize], arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                dom.iter().map(move |&d| {
                    let mut t2 = t.clone();
                    t2.push(d);
                    t2
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::search::Tile;

    fn uniform() -> TileSet {
        TileSet::new(vec![Tile::new("t0", "a", "a", "a", "a")]).unwrap()
    }

    #[test]
    fn encoding_is_positive_and_two_variable() {
        let t = TileSet::new(vec![
            Tile::new("t0", "a", "b", "c", "d"),
            Tile::new("t1", "b", "a", "d", "c"),
        ])
        .unwrap();
        for variant in [TilingVariant::Int, TilingVariant::Visser] {
            let e = encode_tiling(&t, variant).unwrap();
            let p = profile(&e.phi);
            assert!(p.positive && p.closed);
            assert_eq!(p.variable_count(), 2);
            assert_eq!(p.letters["H"].arity, 2);
            assert_eq!(p.letters["p"].arity, 0);
        }
        let e = encode_tiling(&uniform(), TilingVariant::Int).unwrap();
        let labels: Vec<_> = e.conjuncts.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ["tile", "total", "stable", "square"]);
    }

    #[test]
    fn eliminating_h_stays_positive_and_two_variable() {
        let e = encode_tiling(&uniform(), TilingVariant::Int).unwrap();
        let fresh = BinaryFresh::for_letter(&e.phi, "H");
        let out = eliminate_binary(&e.phi, "H", &fresh).unwrap();
        let p = profile(&out);
        assert!(p.positive);
        assert!(!p.letters.contains_key("H"));
        assert_eq!(p.variables, profile(&e.phi).variables);
    }

    #[test]
    fn witness_model_refutes_the_eliminated_formula() {
        let chi = parse("forall x. forall y. Q(x,y) | (Q(x,y) -> r0)").unwrap();
        let mut m = Model::new(Mode::Intuitionistic);
        let w = m.add_world("w");
        let v = m.add_world("v");
        m.add_edge(w, w);
        m.add_edge(v, v);
        m.add_edge(w, v);
        let a = m.add_individual("a");
        m.set_domain(w, [a]);
        m.set_domain(v, [a]);
        m.declare_letter("r0", 0).unwrap();
        m.add_fact(v, "Q", vec![a, a]).unwrap();
        assert!(!eval(&m, w, &Assignment::new(), &chi).unwrap());
        let fresh = BinaryFresh::for_letter(&chi, "Q");
        let out = witness_eliminate_binary(&m, w, &chi, "Q", &fresh).unwrap();
        assert!(out.frame().id("w|a|a").is_some());
    }

    #[test]
    fn clashes_and_negations_are_rejected() {
        let chi = parse("(forall x. forall y. Q(x,y)) & Q1(x)").unwrap();
        let fresh = BinaryFresh {
            first: "Q1".into(),
            second: "Q2".into(),
            r: "r".into(),
            s: "s".into(),
        };
        assert!(matches!(
            eliminate_binary(&chi, "Q", &fresh),
            Err(IntError::LetterClash(_))
        ));
        let neg = parse("~Q(x,y)").unwrap();
        assert!(matches!(
            eliminate_binary(&neg, "Q", &fresh),
            Err(IntError::NotPositive)
        ));
    }
}
