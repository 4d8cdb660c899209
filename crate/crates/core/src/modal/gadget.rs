use std::collections::BTreeSet;

use super::{ModalError, ReductionContext, Track};
use crate::kripke::{eval, Assignment, ClosureKind, Frame, Mode, Model, WorldId};

/// A gadget model together with its root and its `a`-worlds.
#[derive(Debug, Clone)]
pub struct Gadget {
    pub model: Model,
    pub root: WorldId,
    pub a_worlds: BTreeSet<WorldId>,
}

struct Shape {
    names: Vec<String>,
    frame: Frame,
    a_world: Vec<bool>,
    root: usize,
}

// Chain gadget: w^0 .. w^{2k} plus w^*, transitive closure of the covering
// chain and (w^0, w^*). P holds at the even chain worlds.
fn chain_shape(k: usize) -> Shape {
    let mut names: Vec<String> = (0..=2 * k).map(|i| i.to_string()).collect();
    names.push("*".into());
    let mut covering = Frame::new();
    for n in &names {
        covering.add_world(n);
    }
    for i in 0..2 * k {
        covering.add_edge(i, i + 1);
    }
    covering.add_edge(0, 2 * k + 1);
    let frame = covering.closure(ClosureKind::Transitive);
    let a_world = (0..names.len()).map(|i| i <= 2 * k && i % 2 == 0).collect();
    Shape {
        names,
        frame,
        a_world,
        root: 0,
    }
}

// KTB gadget: root, then for i = 1..k a block of 2i+1 non-a worlds followed
// by an a-world, where the last block's a-world opens three final a-worlds.
fn ktb_shape(k: usize) -> Shape {
    let mut a_world = vec![true];
    for i in 1..=k {
        a_world.extend(std::iter::repeat_n(false, 2 * i + 1));
        if i < k {
            a_world.push(true);
        }
    }
    a_world.extend([true, true, true]);
    let names: Vec<String> = (0..a_world.len()).map(|i| i.to_string()).collect();
    let mut covering = Frame::new();
    for n in &names {
        covering.add_world(n);
    }
    for i in 0..names.len() - 1 {
        covering.add_edge(i, i + 1);
    }
    Shape {
        names,
        frame: covering.closure(ClosureKind::ReflexiveSymmetric),
        a_world,
        root: 0,
    }
}

fn shape(k: usize, track: Track) -> Shape {
    if track.uses_ktb_gadgets() {
        ktb_shape(k)
    } else {
        chain_shape(k)
    }
}

/// The `a`-suitable gadget `M_k` for the track: constant domain, `P` true
/// of the pivot exactly at the `a`-worlds and false of everyone else.
pub fn build_gadget(
    k: usize,
    track: Track,
    pivot: &str,
    domain: &[&str],
) -> Result<Gadget, ModalError> {
    if k < 1 {
        return Err(ModalError::OutOfRange {
            what: "k",
            value: k,
            lo: 1,
            hi: usize::MAX,
        });
    }
    if !domain.contains(&pivot) {
        return Err(ModalError::PivotOutsideDomain(pivot.to_string()));
    }
    let s = shape(k, track);
    let mut m = Model::new(Mode::Modal);
    let inds: Vec<_> = domain.iter().map(|d| m.add_individual(d)).collect();
    let a = m.individual_id(pivot).expect("pivot was added");
    m.declare_letter("P", 1).expect("fresh model");
    for n in &s.names {
        let w = m.add_world(n);
        m.set_domain(w, inds.iter().copied());
    }
    let mut a_worlds = BTreeSet::new();
    for (w, &is_a) in s.a_world.iter().enumerate() {
        if is_a {
            m.add_fact(w, "P", vec![a]).expect("declared monadic");
            a_worlds.insert(w);
        }
    }
    m.set_frame(s.frame);
    Ok(Gadget {
        model: m,
        root: s.root,
        a_worlds,
    })
}

/// Root of the gadget, the only world where its `alpha` should hold.
pub fn distinguished_world(g: &Gadget) -> WorldId {
    g.root
}

fn check_frame(m: &Model, track: Track) -> Result<(), ModalError> {
    for &p in track.frame_properties() {
        if !p.holds(m.frame()) {
            return Err(ModalError::FrameClass {
                track: track.name(),
                property: p,
            });
        }
    }
    Ok(())
}

fn holds_unary(m: &Model, w: WorldId, letter: &str, d: usize) -> bool {
    m.holds(w, letter, &[d])
}

/// `M*`: one copy of each gadget `F_1 .. F_{n+1}` below every world, wired
/// from that world to the copy's root, with `P` at a copy's `a`-worlds true
/// of exactly those individuals that satisfy the corresponding source
/// letter at the host world. The track's closure is applied to the union.
pub fn attach_gadgets(m: &Model, ctx: &ReductionContext) -> Result<Model, ModalError> {
    check_frame(m, ctx.track)?;
    for w in m.worlds() {
        if m.domain(w)
            .iter()
            .any(|&d| !holds_unary(m, w, &ctx.fresh, d))
        {
            return Err(ModalError::GuardFails(m.world_name(w).to_string()));
        }
    }
    let mut out = Model::new(Mode::Modal);
    for name in m.individuals() {
        out.add_individual(name);
    }
    out.declare_letter(&ctx.target, 1).expect("fresh model");
    for w in m.worlds() {
        let id = out.add_world(m.world_name(w));
        out.set_domain(id, m.domain(w).iter().copied());
    }
    for (a, b) in m.frame().edges() {
        out.add_edge(a, b);
    }
    let shapes: Vec<Shape> = (1..=ctx.n() + 1).map(|k| shape(k, ctx.track)).collect();
    for w in m.worlds() {
        for (idx, s) in shapes.iter().enumerate() {
            let k = idx + 1;
            let letter = ctx.letter(k);
            let base = out.world_count();
            for n in &s.names {
                let name = format!("{}:{}:{}", m.world_name(w), k, n);
                debug_assert!(out.frame().id(&name).is_none(), "copy name collides");
                let u = out.add_world(&name);
                out.set_domain(u, m.domain(w).iter().copied());
            }
            for (i, j) in s.frame.edges() {
                out.add_edge(base + i, base + j);
            }
            out.add_edge(w, base + s.root);
            for &d in m.domain(w) {
                if holds_unary(m, w, letter, d) {
                    for (i, &is_a) in s.a_world.iter().enumerate() {
                        if is_a {
                            out.add_fact(base + i, &ctx.target, vec![d])
                                .expect("declared monadic");
                        }
                    }
                }
            }
        }
    }
    if let Some(kind) = ctx.track.closure() {
        out.apply_closure(kind);
    }
    Ok(out)
}

/// `M'` of the guard lemma: `P_{n+1}` made true of everything everywhere.
pub fn extend_with_fresh(m: &Model, ctx: &ReductionContext) -> Model {
    let mut out = m.clone();
    out.declare_letter(&ctx.fresh, 1)
        .expect("fresh letter is monadic");
    for w in m.worlds() {
        for &d in m.domain(w) {
            out.add_fact(w, &ctx.fresh, vec![d]).expect("monadic");
        }
    }
    out
}

/// The submodel on the worlds where `B` holds.
pub fn restrict_to_guard(m: &Model, ctx: &ReductionContext) -> Model {
    let b = super::build_b(ctx);
    let keep: BTreeSet<WorldId> = m
        .worlds()
        .filter(|&w| eval(m, w, &Assignment::new(), &b).unwrap_or(false))
        .collect();
    m.restrict(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Var;
    use crate::kripke::sat_at;
    use crate::modal::{alpha, ReductionContext};

    #[test]
    fn chain_gadget_k1() {
        let g = build_gadget(1, Track::GL, "a", &["a"]).unwrap();
        let m = &g.model;
        assert_eq!(m.world_count(), 4);
        let names: BTreeSet<&str> = g.a_worlds.iter().map(|&w| m.world_name(w)).collect();
        assert_eq!(names, BTreeSet::from(["0", "2"]));
        assert!(m.frame().is_transitive() && m.frame().is_acyclic() && m.frame().is_irreflexive());
        assert!(m.validate().is_empty());
    }

    #[test]
    fn ktb_gadget_sizes() {
        for k in 1..=4 {
            let g = build_gadget(k, Track::KTB, "a", &["a", "b"]).unwrap();
            assert_eq!(g.model.world_count(), k * k + 3 * k + 3);
            assert!(g.model.frame().is_reflexive() && g.model.frame().is_symmetric());
        }
        let g = build_gadget(1, Track::KTB, "a", &["a"]).unwrap();
        assert_eq!(g.a_worlds, BTreeSet::from([0, 4, 5, 6]));
    }

    #[test]
    fn pivot_must_be_in_domain() {
        assert!(matches!(
            build_gadget(1, Track::GL, "c", &["a"]),
            Err(ModalError::PivotOutsideDomain(_))
        ));
    }

    #[test]
    fn alpha_holds_only_at_its_own_root() {
        let c = ReductionContext::new(1, Track::GL);
        let x = Var::new("x");
        for k in 1..=2 {
            let g = build_gadget(k, Track::GL, "a", &["a"]).unwrap();
            for m in 1..=2 {
                let a = alpha(m, &x, &c).unwrap();
                for w in g.model.worlds() {
                    assert_eq!(sat_at(&g.model, w, &a).unwrap(), k == m && w == g.root);
                }
            }
        }
    }

    #[test]
    fn attach_rejects_guard_failures_and_bad_frames() {
        let c = ReductionContext::new(1, Track::K);
        let mut m = Model::new(Mode::Modal);
        let w = m.add_world("w");
        let a = m.add_individual("a");
        m.add_to_domain(w, a);
        assert!(matches!(
            attach_gadgets(&m, &c),
            Err(ModalError::GuardFails(_))
        ));
        let m = extend_with_fresh(&m, &c);
        assert!(attach_gadgets(&m, &c).is_ok());
        let c = ReductionContext::new(1, Track::KTB);
        assert!(matches!(
            attach_gadgets(&m, &c),
            Err(ModalError::FrameClass { .. })
        ));
    }
}
