//! Formula lists and seeded random models used by the suites.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{parse, Formula};
use crate::kripke::{ClosureKind, Mode, Model};

const MODAL: &[&str] = &[
    "(forall x. ~P1(x)) & dia exists x. P1(x)",
    "(forall x. box P1(x)) -> box forall x. P1(x)",
    "dia forall x. (P1(x) -> P2(x))",
    "box exists x. P2(x) | ~dia top",
    "exists x. (P1(x) & dia ~P1(x))",
    "forall x. (P1(x) | box P2(x))",
    "dia dia exists x. P1(x)",
    "box ((exists x. P1(x)) -> dia exists x. P2(x))",
    "exists x. box (P1(x) | P2(x))",
    "forall x. dia exists y. (P1(x) & ~P2(y))",
];

const POSITIVE_MONADIC: &[&str] = &[
    "forall x. (P1(x) | (P1(x) -> P2(x)))",
    "((exists x. P1(x)) -> exists x. P2(x)) | ((exists x. P2(x)) -> exists x. P1(x))",
    "(forall x. ((P1(x) -> P2(x)) -> P1(x))) -> forall x. P1(x)",
    "exists x. (P1(x) -> forall y. P1(y))",
    "(forall x. (P2(x) -> P1(x))) | forall x. (P1(x) -> P2(x))",
    "(exists x. P1(x)) | ((exists x. P1(x)) -> exists x. P2(x))",
    "(forall x. forall y. (P1(x) -> P1(y))) | exists x. P2(x)",
    "forall x. ((P1(x) -> P2(x)) | (P2(x) -> P1(x)))",
    "exists x. forall y. (P1(y) -> P1(x))",
    "(forall x. P1(x)) | exists x. (P1(x) -> P2(x))",
    "forall x. (P1(x) | exists y. (P2(y) -> P1(x)))",
    "(forall x. (P1(x) | P2(x))) -> ((forall x. P1(x)) | exists x. P2(x))",
];

const POSITIVE_BINARY: &[&str] = &[
    "forall x. exists y. Q(x,y)",
    "forall x. forall y. (Q(x,y) | (Q(x,y) -> r0))",
    "exists x. forall y. Q(y,x)",
    "forall x. (R(x) -> exists y. (Q(x,y) & R(y)))",
    "forall x. forall y. (Q(x,y) -> Q(y,x))",
    "((forall x. exists y. Q(x,y)) -> r0) -> r0",
    "forall x. (Q(x,x) | R(x))",
    "forall x. forall y. (Q(x,y) | Q(y,x))",
    "forall x. ((forall y. Q(x,y)) -> R(x))",
    "forall x. (R(x) | exists y. Q(y,x))",
    "exists x. (R(x) & forall y. (Q(x,y) -> R(y)))",
    "(forall x. forall y. Q(x,y)) | r0",
];

fn parse_all(src: &[&str]) -> Vec<Formula> {
    src.iter()
        .map(|s| parse(s).expect("corpus formula parses"))
        .collect()
}

/// Closed monadic modal formulas over `P1`, `P2`.
pub fn modal_corpus_formulas() -> Vec<Formula> {
    parse_all(MODAL)
}

/// Closed positive two-variable formulas over monadic `P1`, `P2`.
pub fn positive_monadic_formulas() -> Vec<Formula> {
    parse_all(POSITIVE_MONADIC)
}

/// Closed positive two-variable formulas over binary `Q`, monadic `R` and
/// 0-ary `r0`.
pub fn positive_binary_formulas() -> Vec<Formula> {
    parse_all(POSITIVE_BINARY)
}

pub(crate) fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Shape of a random model.
pub(crate) struct ModelSpec<'a> {
    pub mode: Mode,
    pub worlds: RangeInclusive<usize>,
    pub pool: usize,
    pub min_domain: usize,
    pub constant: bool,
    pub letters: &'a [(&'a str, usize)],
    pub density: f64,
    pub closure: Option<ClosureKind>,
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

/// Worlds `w0, w1, ...` over a random forward relation, closed as asked.
/// Domains expand and, outside the modal mode, extensions are hereditary.
pub(crate) fn random_model(rng: &mut ChaCha8Rng, spec: &ModelSpec) -> Model {
    const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];
    let n = rng.gen_range(spec.worlds.clone());
    let mut m = Model::new(spec.mode);
    let inds: Vec<usize> = NAMES[..spec.pool]
        .iter()
        .map(|d| m.add_individual(d))
        .collect();
    for i in 0..n {
        m.add_world(&format!("w{i}"));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.5) {
                m.add_edge(i, j);
            }
        }
    }
    if let Some(kind) = spec.closure {
        m.apply_closure(kind);
    }
    for &(l, arity) in spec.letters {
        m.declare_letter(l, arity).expect("distinct letters");
    }
    let mut doms: Vec<BTreeSet<usize>> = Vec::new();
    for w in 0..n {
        let mut d: BTreeSet<usize> = if spec.constant {
            inds.iter().copied().collect()
        } else {
            let mut d: BTreeSet<usize> =
                inds.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            while d.len() < spec.min_domain.max(1) {
                d.insert(inds[rng.gen_range(0..inds.len())]);
            }
            d
        };
        for (u, du) in doms.iter().enumerate() {
            if m.frame().has_edge(u, w) {
                d.extend(du.iter().copied());
            }
        }
        doms.push(d);
    }
    for (w, d) in doms.iter().enumerate() {
        m.set_domain(w, d.iter().copied());
    }
    let hereditary = spec.mode != Mode::Modal;
    for &(l, arity) in spec.letters {
        for w in 0..n {
            let dom: Vec<usize> = doms[w].iter().copied().collect();
            for t in tuples(&dom, arity) {
                let inherited =
                    hereditary && (0..w).any(|u| m.frame().has_edge(u, w) && m.holds(u, l, &t));
                if inherited || rng.gen_bool(spec.density) {
                    m.add_fact(w, l, t).expect("declared");
                }
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpora_parse_and_have_the_claimed_shape() {
        use crate::formula::profile;
        for f in modal_corpus_formulas() {
            let p = profile(&f);
            assert!(p.closed && p.monadic());
        }
        for f in positive_monadic_formulas()
            .into_iter()
            .chain(positive_binary_formulas())
        {
            let p = profile(&f);
            assert!(p.closed && p.positive && p.variable_count() <= 2, "{f}");
        }
    }

    #[test]
    fn random_models_are_valid_and_seeded() {
        let letters = [("P1", 1), ("Q", 2), ("r", 0)];
        for (mode, closure) in [
            (Mode::Intuitionistic, Some(ClosureKind::ReflexiveTransitive)),
            (Mode::Visser, Some(ClosureKind::Transitive)),
        ] {
            let spec = ModelSpec {
                mode,
                worlds: 1..=4,
                pool: 3,
                min_domain: 2,
                constant: false,
                letters: &letters,
                density: 0.3,
                closure,
            };
            for seed in 0..20 {
                let a = random_model(&mut rng(seed, 1), &spec);
                let b = random_model(&mut rng(seed, 1), &spec);
                assert_eq!(a, b);
                assert!(a.validate().is_empty(), "{:?}", a.validate());
                assert!(a.worlds().all(|w| a.domain(w).len() >= 2));
            }
        }
    }
}
