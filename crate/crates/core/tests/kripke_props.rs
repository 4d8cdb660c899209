use proptest::prelude::*;

use twovar_core::formula::{profile, Formula, Var};
use twovar_core::int::{godel_translate, AtomClause};
use twovar_core::kripke::{eval, eval_reference, sat_at, Assignment, ClosureKind, Mode, Model};

const LETTERS: [(&str, usize); 3] = [("P1", 1), ("P2", 1), ("Q", 2)];

fn var(i: bool) -> Var {
    Var::new(if i { "y" } else { "x" })
}

/// Formulas over `P1`, `P2`, `Q` and variables `x`, `y`.
fn formula(modal: bool) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        (0usize..2, any::<bool>()).prop_map(|(l, v)| Formula::unary(LETTERS[l].0, &var(v))),
        (any::<bool>(), any::<bool>()).prop_map(|(a, b)| Formula::atom("Q", &[var(a), var(b)])),
        Just(Formula::bot()),
        Just(Formula::top()),
    ];
    leaf.prop_recursive(5, 24, 2, move |inner| {
        let mut options = vec![
            inner.clone().prop_map(Formula::neg).boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::and(a, b))
                .boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::or(a, b))
                .boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::imp(a, b))
                .boxed(),
            (any::<bool>(), inner.clone())
                .prop_map(|(v, a)| Formula::forall(var(v), a))
                .boxed(),
            (any::<bool>(), inner.clone())
                .prop_map(|(v, a)| Formula::exists(var(v), a))
                .boxed(),
            inner.clone().prop_map(Formula::boxed).boxed(),
        ];
        if modal {
            options.push(inner.prop_map(Formula::dia).boxed());
        }
        proptest::strategy::Union::new(options)
    })
}

fn closed(f: Formula) -> Formula {
    let free = profile(&f).free_variables;
    free.into_iter().fold(f, |acc, v| Formula::forall(v, acc))
}

#[derive(Debug, Clone)]
struct Raw {
    worlds: usize,
    pool: usize,
    bits: Vec<bool>,
}

fn raw() -> impl Strategy<Value = Raw> {
    (
        1usize..=4,
        1usize..=3,
        proptest::collection::vec(any::<bool>(), 256),
    )
        .prop_map(|(worlds, pool, bits)| Raw { worlds, pool, bits })
}

/// A model on a forward relation, closed as the mode needs, with expanding
/// domains and, outside the modal mode, hereditary extensions.
fn build(r: &Raw, mode: Mode) -> Model {
    let mut bits = r.bits.iter().copied().cycle();
    let mut m = Model::new(mode);
    for d in 0..r.pool {
        m.add_individual(&format!("d{d}"));
    }
    for w in 0..r.worlds {
        m.add_world(&format!("w{w}"));
    }
    for a in 0..r.worlds {
        for b in a + 1..r.worlds {
            if bits.next().unwrap() {
                m.add_edge(a, b);
            }
        }
    }
    match mode {
        Mode::Modal => {
            for w in 0..r.worlds {
                if bits.next().unwrap() {
                    m.add_edge(w, w);
                }
            }
        }
        Mode::Intuitionistic => m.apply_closure(ClosureKind::ReflexiveTransitive),
        Mode::Visser => m.apply_closure(ClosureKind::Transitive),
    }
    for (l, a) in LETTERS {
        m.declare_letter(l, a).unwrap();
    }
    let mut doms: Vec<Vec<usize>> = Vec::new();
    for w in 0..r.worlds {
        let mut d: Vec<usize> = (0..r.pool)
            .filter(|&i| i == 0 || bits.next().unwrap())
            .collect();
        for u in 0..w {
            if m.frame().has_edge(u, w) {
                d.extend(doms[u].iter().copied());
            }
        }
        d.sort();
        d.dedup();
        doms.push(d);
    }
    for (w, d) in doms.iter().enumerate() {
        m.set_domain(w, d.iter().copied());
    }
    for w in 0..r.worlds {
        for (l, arity) in LETTERS {
            let dom = &doms[w];
            let tuples: Vec<Vec<usize>> = if arity == 1 {
                dom.iter().map(|&d| vec![d]).collect()
            } else {
                dom.iter()
                    .flat_map(|&a| dom.iter().map(move |&b| vec![a, b]))
                    .collect()
            };
            for t in tuples {
                let inherited = mode != Mode::Modal
                    && (0..w).any(|u| m.frame().has_edge(u, w) && m.holds(u, l, &t));
                if inherited || bits.next().unwrap() {
                    m.add_fact(w, l, t).unwrap();
                }
            }
        }
    }
    assert!(m.validate().is_empty(), "{:?}", m.validate());
    m
}

fn with_mode(m: &Model, mode: Mode) -> Model {
    let mut out = m.clone();
    out.mode = mode;
    out
}

fn truth(m: &Model, f: &Formula) -> Vec<bool> {
    m.worlds().map(|w| sat_at(m, w, f).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn memoized_evaluator_matches_reference(f in formula(true), r in raw(), a in 0usize..3, b in 0usize..3) {
        for mode in [Mode::Modal, Mode::Intuitionistic, Mode::Visser] {
            let f = if mode == Mode::Modal { f.clone() } else { strip_dia(&f) };
            let m = build(&r, mode);
            for w in m.worlds() {
                let dom: Vec<usize> = m.domain(w).iter().copied().collect();
                let g: Assignment = [(Var::new("x"), dom[a % dom.len()]), (Var::new("y"), dom[b % dom.len()])].into();
                prop_assert_eq!(eval(&m, w, &g, &f), eval_reference(&m, w, &g, &f), "{} in {:?}", f, mode);
            }
        }
    }

    #[test]
    fn closed_formulas_are_persistent(f in formula(false), r in raw()) {
        let f = closed(f);
        for mode in [Mode::Intuitionistic, Mode::Visser] {
            let m = build(&r, mode);
            let t = truth(&m, &f);
            for (u, v) in m.frame().edges() {
                prop_assert!(!t[u] || t[v], "{} true at {} but not at {} ({:?})", f, u, v, mode);
            }
        }
    }

    #[test]
    fn visser_agrees_with_intuitionistic_on_reflexive_frames(f in formula(false), r in raw()) {
        let f = closed(f);
        let m = build(&r, Mode::Intuitionistic);
        prop_assert_eq!(truth(&m, &f), truth(&with_mode(&m, Mode::Visser), &f));
    }

    #[test]
    fn endpoints_are_classical(f in formula(false), r in raw()) {
        let f = closed(strip_box(&f));
        let m = build(&r, Mode::Intuitionistic);
        let classical = with_mode(&m, Mode::Modal);
        for w in m.worlds() {
            if m.successors(w).len() == 1 {
                prop_assert_eq!(sat_at(&m, w, &f), sat_at(&classical, w, &f), "{} at {}", f, w);
            }
        }
    }

    #[test]
    fn godel_translation_is_faithful(f in formula(false), r in raw()) {
        let f = closed(strip_box(&f));
        for (mode, clause) in [(Mode::Intuitionistic, AtomClause::Box), (Mode::Visser, AtomClause::BoxPlus)] {
            let m = build(&r, mode);
            let t = godel_translate(&f, clause).unwrap();
            prop_assert_eq!(truth(&m, &f), truth(&with_mode(&m, Mode::Modal), &t), "{} in {:?}", f, mode);
        }
    }

    #[test]
    fn visser_blocks_commute(body in formula(false), r in raw()) {
        let body = strip_box(&body);
        let (x, y) = (Var::new("x"), Var::new("y"));
        let xy = Formula::forall(x.clone(), Formula::forall(y.clone(), body.clone()));
        let yx = Formula::forall(y, Formula::forall(x, body));
        let m = build(&r, Mode::Visser);
        prop_assert_eq!(truth(&m, &closed(xy)), truth(&m, &closed(yx)));
    }
}

fn rebuild(f: &Formula, leaf: &dyn Fn(&Formula) -> Option<Formula>) -> Formula {
    use twovar_core::formula::FormulaKind as K;
    if let Some(g) = leaf(f) {
        return g;
    }
    let r = |g: &Formula| rebuild(g, leaf);
    match f.kind() {
        K::Neg(a) => Formula::neg(r(a)),
        K::And(a, b) => Formula::and(r(a), r(b)),
        K::Or(a, b) => Formula::or(r(a), r(b)),
        K::Imp(a, b) => Formula::imp(r(a), r(b)),
        K::Box(a) => Formula::boxed(r(a)),
        K::Dia(a) => Formula::dia(r(a)),
        K::Forall(v, a) => Formula::forall(v.clone(), r(a)),
        K::Exists(v, a) => Formula::exists(v.clone(), r(a)),
        _ => f.clone(),
    }
}

/// `dia A` becomes `~box ~A`.
fn strip_dia(f: &Formula) -> Formula {
    use twovar_core::formula::FormulaKind as K;
    rebuild(f, &|g| match g.kind() {
        K::Dia(a) => Some(Formula::neg(Formula::boxed(Formula::neg(strip_dia(a))))),
        _ => None,
    })
}

/// Modalities dropped, for the non-modal languages.
fn strip_box(f: &Formula) -> Formula {
    use twovar_core::formula::FormulaKind as K;
    rebuild(f, &|g| match g.kind() {
        K::Box(a) | K::Dia(a) => Some(strip_box(a)),
        _ => None,
    })
}

#[test]
fn visser_block_differs_from_nesting() {
    // w0 -> w1 -> w2 with Q(d,d) only at w2: the joint block at w0 needs Q
    // at w1, the nested reading only asks for it beyond w1.
    let mut m = Model::new(Mode::Visser);
    let d = m.add_individual("d");
    for w in 0..3 {
        m.add_world(&format!("w{w}"));
        m.set_domain(w, [d]);
    }
    m.add_edge(0, 1);
    m.add_edge(1, 2);
    m.apply_closure(ClosureKind::Transitive);
    m.declare_letter("Q", 2).unwrap();
    m.add_fact(2, "Q", vec![d, d]).unwrap();
    let block = twovar_core::formula::parse("forall x. forall y. Q(x,y)").unwrap();
    let nested = twovar_core::formula::parse("forall x. (top & forall y. Q(x,y))").unwrap();
    assert_eq!(truth(&m, &block), vec![false, true, true]);
    assert_eq!(truth(&m, &nested), vec![true, true, true]);
}
