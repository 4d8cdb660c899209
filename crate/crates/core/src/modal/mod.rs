//! Reduction of monadic modal formulas to formulas over a single monadic
//! letter: the guard `B`, the guarded embedding, the gadget formulas
//! `delta`/`alpha`/`beta` for the chain and KTB tracks, and the composite
//! embedding `e`.

mod gadget;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::formula::{
    box_power, profile, substitute_atoms, Formula, FormulaKind, PowerKind, SubstError, Template,
    Var,
};
use crate::kripke::{ClosureKind, FrameProperty};

pub use gadget::{
    attach_gadgets, build_gadget, distinguished_world, extend_with_fresh, restrict_to_guard, Gadget,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModalError {
    #[error("{what} = {value} is outside {lo}..={hi}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        lo: usize,
        hi: usize,
    },
    #[error("letter {0} is reserved by the reduction and may not occur in the input")]
    ReservedLetter(String),
    #[error("letter {0} is not one of the source letters")]
    UnknownLetter(String),
    #[error("letter {0} is not monadic")]
    NotMonadic(String),
    #[error("input formula has free variables {0:?}")]
    NotClosed(Vec<String>),
    #[error("the guard fails at world {0}")]
    GuardFails(String),
    #[error("frame is not {property:?}, as the {track} track requires")]
    FrameClass {
        track: &'static str,
        property: FrameProperty,
    },
    #[error("pivot {0} is not in the gadget domain")]
    PivotOutsideDomain(String),
    #[error("at least one source letter is required")]
    NoLetters,
    #[error(transparent)]
    Subst(#[from] SubstError),
}

/// Target logic family; decides which gadgets are used and how the attached
/// model is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Track {
    K,
    GL,
    Grz,
    KTB,
}

impl Track {
    pub const ALL: [Track; 4] = [Track::K, Track::GL, Track::Grz, Track::KTB];

    pub fn name(self) -> &'static str {
        match self {
            Track::K => "k",
            Track::GL => "gl",
            Track::Grz => "grz",
            Track::KTB => "ktb",
        }
    }

    pub fn parse(s: &str) -> Option<Track> {
        match s.to_ascii_lowercase().as_str() {
            "k" => Some(Track::K),
            "gl" => Some(Track::GL),
            "grz" => Some(Track::Grz),
            "ktb" => Some(Track::KTB),
            _ => None,
        }
    }

    /// Closure applied to the whole model after gadgets are wired in.
    pub fn closure(self) -> Option<ClosureKind> {
        match self {
            Track::K => None,
            Track::GL => Some(ClosureKind::Transitive),
            Track::Grz => Some(ClosureKind::ReflexiveTransitive),
            Track::KTB => Some(ClosureKind::ReflexiveSymmetric),
        }
    }

    /// Finite frame conditions for the track's logic.
    pub fn frame_properties(self) -> &'static [FrameProperty] {
        use FrameProperty::*;
        match self {
            Track::K => &[],
            Track::GL => &[Transitive, Irreflexive, Acyclic],
            Track::Grz => &[Reflexive, Transitive, Antisymmetric],
            Track::KTB => &[Reflexive, Symmetric],
        }
    }

    pub fn uses_ktb_gadgets(self) -> bool {
        self == Track::KTB
    }
}

/// Letters and variable used by one run of the reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionContext {
    /// `P_1 .. P_n`, in order.
    pub sources: Vec<String>,
    /// `P_{n+1}`.
    pub fresh: String,
    /// The single target letter `P`.
    pub target: String,
    pub track: Track,
    /// Variable bound by the guard `B`.
    pub guard_var: Var,
}

impl ReductionContext {
    /// Sources `P1..Pn`, fresh `P{n+1}`, target `P`, guard variable `x`.
    pub fn new(n: usize, track: Track) -> ReductionContext {
        assert!(n >= 1, "at least one source letter");
        ReductionContext {
            sources: (1..=n).map(|i| format!("P{i}")).collect(),
            fresh: format!("P{}", n + 1),
            target: "P".into(),
            track,
            guard_var: Var::new("x"),
        }
    }

    /// A context whose sources are the formula's letters in name order and
    /// whose guard reuses the formula's least variable.
    pub fn for_formula(f: &Formula, track: Track) -> Result<ReductionContext, ModalError> {
        let p = profile(f);
        if let Some((name, _)) = p.letters.iter().find(|(_, l)| l.arity != 1) {
            return Err(ModalError::NotMonadic(name.clone()));
        }
        let sources: Vec<String> = p.letters.keys().cloned().collect();
        if sources.is_empty() {
            return Err(ModalError::NoLetters);
        }
        let target = "P".to_string();
        if sources.contains(&target) {
            return Err(ModalError::ReservedLetter(target));
        }
        let mut i = sources.len() + 1;
        let fresh = loop {
            let name = format!("P{i}");
            if !sources.contains(&name) {
                break name;
            }
            i += 1;
        };
        Ok(ReductionContext {
            sources,
            fresh,
            target,
            track,
            guard_var: p
                .variables
                .iter()
                .next()
                .cloned()
                .unwrap_or_else(|| Var::new("x")),
        })
    }

    pub fn n(&self) -> usize {
        self.sources.len()
    }

    /// Name of `P_k` for `k` in `1..=n+1`.
    pub fn letter(&self, k: usize) -> &str {
        if k == self.n() + 1 {
            &self.fresh
        } else {
            &self.sources[k - 1]
        }
    }

    fn check_k(&self, what: &'static str, k: usize) -> Result<(), ModalError> {
        if k < 1 || k > self.n() + 1 {
            return Err(ModalError::OutOfRange {
                what,
                value: k,
                lo: 1,
                hi: self.n() + 1,
            });
        }
        Ok(())
    }

    fn p(&self, v: &Var) -> Formula {
        Formula::unary(&self.target, v)
    }
}

/// `B = forall x. P_{n+1}(x)`.
pub fn build_b(ctx: &ReductionContext) -> Formula {
    let x = &ctx.guard_var;
    Formula::forall(x.clone(), Formula::unary(&ctx.fresh, x))
}

/// Rewrites `|`, `->`, `exists` and `dia` into the `&`, `~`, `box`,
/// `forall` basis. `bot` and `top` are kept.
pub fn to_basis(f: &Formula) -> Formula {
    fn go(f: &Formula, memo: &mut BTreeMap<usize, Formula>) -> Formula {
        if let Some(done) = memo.get(&f.node_ptr()) {
            return done.clone();
        }
        let out = match f.kind() {
            FormulaKind::Atom(_) | FormulaKind::Bot | FormulaKind::Top => f.clone(),
            FormulaKind::Neg(a) => Formula::neg(go(a, memo)),
            FormulaKind::And(a, b) => Formula::and(go(a, memo), go(b, memo)),
            FormulaKind::Or(a, b) => Formula::neg(Formula::and(
                Formula::neg(go(a, memo)),
                Formula::neg(go(b, memo)),
            )),
            FormulaKind::Imp(a, b) => {
                Formula::neg(Formula::and(go(a, memo), Formula::neg(go(b, memo))))
            }
            FormulaKind::Box(a) => Formula::boxed(go(a, memo)),
            FormulaKind::Dia(a) => Formula::neg(Formula::boxed(Formula::neg(go(a, memo)))),
            FormulaKind::Forall(v, a) => Formula::forall(v.clone(), go(a, memo)),
            FormulaKind::Exists(v, a) => {
                Formula::neg(Formula::forall(v.clone(), Formula::neg(go(a, memo))))
            }
        };
        memo.insert(f.node_ptr(), out.clone());
        out
    }
    go(f, &mut BTreeMap::new())
}

/// The guarded embedding `f'`: boxes become `box (B -> ...)`, everything
/// else is homomorphic. The input is first rewritten into the basis.
pub fn prime_embed(f: &Formula, ctx: &ReductionContext) -> Result<Formula, ModalError> {
    let p = profile(f);
    for (name, info) in &p.letters {
        if *name == ctx.fresh || *name == ctx.target {
            return Err(ModalError::ReservedLetter(name.clone()));
        }
        if !ctx.sources.contains(name) {
            return Err(ModalError::UnknownLetter(name.clone()));
        }
        if info.arity != 1 {
            return Err(ModalError::NotMonadic(name.clone()));
        }
    }
    let b = build_b(ctx);
    fn go(f: &Formula, b: &Formula, memo: &mut BTreeMap<usize, Formula>) -> Formula {
        if let Some(done) = memo.get(&f.node_ptr()) {
            return done.clone();
        }
        let out = match f.kind() {
            FormulaKind::Atom(_) | FormulaKind::Bot | FormulaKind::Top => f.clone(),
            FormulaKind::Neg(a) => Formula::neg(go(a, b, memo)),
            FormulaKind::And(x, y) => Formula::and(go(x, b, memo), go(y, b, memo)),
            FormulaKind::Forall(v, a) => Formula::forall(v.clone(), go(a, b, memo)),
            FormulaKind::Box(a) => Formula::boxed(Formula::imp(b.clone(), go(a, b, memo))),
            FormulaKind::Or(..)
            | FormulaKind::Imp(..)
            | FormulaKind::Exists(..)
            | FormulaKind::Dia(..) => {
                unreachable!("input was rewritten into the basis")
            }
        };
        memo.insert(f.node_ptr(), out.clone());
        out
    }
    Ok(go(&to_basis(f), &b, &mut BTreeMap::new()))
}

/// `delta_m(x)` of the chain gadgets.
pub fn delta_gl(m: usize, v: &Var, ctx: &ReductionContext) -> Result<Formula, ModalError> {
    if m < 1 {
        return Err(ModalError::OutOfRange {
            what: "m",
            value: m,
            lo: 1,
            hi: usize::MAX,
        });
    }
    let p = ctx.p(v);
    let step = |inner: Formula| {
        Formula::and(
            p.clone(),
            Formula::dia(Formula::and(Formula::neg(p.clone()), Formula::dia(inner))),
        )
    };
    let mut acc = step(Formula::box_plus(p.clone()));
    for _ in 1..m {
        acc = step(acc);
    }
    Ok(acc)
}

/// `alpha_k(x) = delta_k & ~delta_{k+1} & dia box+ ~P(x)`.
pub fn alpha_gl(k: usize, v: &Var, ctx: &ReductionContext) -> Result<Formula, ModalError> {
    ctx.check_k("k", k)?;
    let not_p = Formula::neg(ctx.p(v));
    Ok(Formula::and(
        Formula::and(delta_gl(k, v, ctx)?, Formula::neg(delta_gl(k + 1, v, ctx)?)),
        Formula::dia(Formula::box_plus(not_p)),
    ))
}

/// `delta^k_i(x)` of the KTB gadgets, for `1 <= i <= k`.
pub fn delta_ktb(
    i: usize,
    k: usize,
    v: &Var,
    ctx: &ReductionContext,
) -> Result<Formula, ModalError> {
    ctx.check_k("k", k)?;
    if i < 1 || i > k {
        return Err(ModalError::OutOfRange {
            what: "i",
            value: i,
            lo: 1,
            hi: k,
        });
    }
    let p = ctx.p(v);
    let not_p = Formula::neg(p.clone());
    let head = |j: usize| {
        Formula::and(
            box_power(&not_p, j, PowerKind::UpTo),
            box_power(&p, j + 1, PowerKind::DiamondExact),
        )
    };
    // delta^k_k, then fold down to delta^k_i
    let mut acc = Formula::and(
        head(k),
        box_power(
            &Formula::box_plus(p.clone()),
            k + 2,
            PowerKind::DiamondExact,
        ),
    );
    for j in (i..k).rev() {
        acc = Formula::and(head(j), box_power(&acc, 2 * j + 3, PowerKind::DiamondExact));
    }
    Ok(acc)
}

/// `alpha_k(x) = P(x) & dia^2 delta^k_1(x)` of the KTB gadgets.
pub fn alpha_ktb(k: usize, v: &Var, ctx: &ReductionContext) -> Result<Formula, ModalError> {
    ctx.check_k("k", k)?;
    Ok(Formula::and(
        ctx.p(v),
        box_power(&delta_ktb(1, k, v, ctx)?, 2, PowerKind::DiamondExact),
    ))
}

/// The track's `alpha_k`.
pub fn alpha(k: usize, v: &Var, ctx: &ReductionContext) -> Result<Formula, ModalError> {
    if ctx.track.uses_ktb_gadgets() {
        alpha_ktb(k, v, ctx)
    } else {
        alpha_gl(k, v, ctx)
    }
}

/// `beta_k(x) = ~P(x) & dia alpha_k(x)`.
pub fn beta_k(k: usize, v: &Var, ctx: &ReductionContext) -> Result<Formula, ModalError> {
    Ok(Formula::and(
        Formula::neg(ctx.p(v)),
        Formula::dia(alpha(k, v, ctx)?),
    ))
}

/// `phi*`: `f'` with every `P_k` replaced by `beta_k`.
pub fn star(f_prime: &Formula, ctx: &ReductionContext) -> Result<Formula, ModalError> {
    let x = Var::new("x");
    let mut map = BTreeMap::new();
    for k in 1..=ctx.n() + 1 {
        map.insert(
            ctx.letter(k).to_string(),
            Template::monadic(x.clone(), beta_k(k, &x, ctx)?),
        );
    }
    Ok(substitute_atoms(f_prime, &map)?)
}

/// `e(f) = forall x. beta_{n+1}(x) & f*`.
pub fn embed_e(f: &Formula, ctx: &ReductionContext) -> Result<Formula, ModalError> {
    let p = profile(f);
    if !p.closed {
        return Err(ModalError::NotClosed(
            p.free_variables
                .iter()
                .map(|v| v.name().to_string())
                .collect(),
        ));
    }
    let body = star(&prime_embed(f, ctx)?, ctx)?;
    let g = &ctx.guard_var;
    Ok(Formula::and(
        Formula::forall(g.clone(), beta_k(ctx.n() + 1, g, ctx)?),
        body,
    ))
}

/// `bf = forall x. box P(x) -> box forall x. P(x)`.
pub fn bf_formula(letter: &str) -> Formula {
    let x = Var::new("x");
    let px = Formula::unary(letter, &x);
    Formula::imp(
        Formula::forall(x.clone(), Formula::boxed(px.clone())),
        Formula::boxed(Formula::forall(x, px)),
    )
}

/// Letters of `f`, for callers that check the single-letter claim.
pub fn letters_of(f: &Formula) -> BTreeSet<String> {
    profile(f).letter_names()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn ctx1() -> ReductionContext {
        ReductionContext::new(1, Track::GL)
    }

    fn x() -> Var {
        Var::new("x")
    }

    #[test]
    fn guard() {
        assert_eq!(build_b(&ctx1()), parse("forall x. P2(x)").unwrap());
        let c = ReductionContext::new(3, Track::K);
        let b = build_b(&c);
        assert_eq!(b, parse("forall x. P4(x)").unwrap());
        let p = profile(&b);
        assert!(p.closed && p.positive);
    }

    #[test]
    fn prime_table_rows() {
        let c = ctx1();
        assert_eq!(
            prime_embed(&parse("box P1(x)").unwrap(), &c).unwrap(),
            parse("box ((forall x. P2(x)) -> P1(x))").unwrap()
        );
        assert_eq!(
            prime_embed(&parse("P1(x)").unwrap(), &c).unwrap(),
            parse("P1(x)").unwrap()
        );
        assert_eq!(
            prime_embed(&parse("forall x. ~box P1(x)").unwrap(), &c).unwrap(),
            parse("forall x. ~box ((forall x. P2(x)) -> P1(x))").unwrap()
        );
        assert_eq!(
            prime_embed(&parse("dia P1(x)").unwrap(), &c).unwrap(),
            parse("~box ((forall x. P2(x)) -> ~P1(x))").unwrap()
        );
    }

    #[test]
    fn prime_rejects_reserved_letters() {
        let c = ctx1();
        assert!(matches!(
            prime_embed(&parse("P2(x)").unwrap(), &c),
            Err(ModalError::ReservedLetter(_))
        ));
        assert!(matches!(
            prime_embed(&parse("P(x)").unwrap(), &c),
            Err(ModalError::ReservedLetter(_))
        ));
        assert!(matches!(
            prime_embed(&parse("Q(x)").unwrap(), &c),
            Err(ModalError::UnknownLetter(_))
        ));
    }

    #[test]
    fn delta_gl_shapes() {
        let c = ctx1();
        assert_eq!(
            delta_gl(1, &x(), &c).unwrap(),
            parse("P(x) & dia (~P(x) & dia (P(x) & box P(x)))").unwrap()
        );
        let d1 = delta_gl(1, &x(), &c).unwrap();
        let d2 = delta_gl(2, &x(), &c).unwrap();
        assert_eq!(
            d2,
            Formula::and(
                parse("P(x)").unwrap(),
                Formula::dia(Formula::and(parse("~P(x)").unwrap(), Formula::dia(d1)))
            )
        );
        assert!(delta_gl(0, &x(), &c).is_err());
    }

    #[test]
    fn delta_gl_sizes_are_linear() {
        // P & dia(~P & dia inner) adds seven nodes; the base has eleven
        let c = ctx1();
        for m in 1..=5 {
            assert_eq!(
                delta_gl(m, &x(), &c).unwrap().size(),
                11 + 7 * (m as u64 - 1)
            );
        }
    }

    #[test]
    fn alpha_gl_shape() {
        let c = ctx1();
        let a1 = alpha_gl(1, &x(), &c).unwrap();
        let expect = Formula::and(
            Formula::and(
                delta_gl(1, &x(), &c).unwrap(),
                Formula::neg(delta_gl(2, &x(), &c).unwrap()),
            ),
            parse("dia (~P(x) & box ~P(x))").unwrap(),
        );
        assert_eq!(a1, expect);
        assert!(alpha_gl(3, &x(), &c).is_err());
    }

    #[test]
    fn ktb_shapes() {
        let c = ReductionContext::new(1, Track::KTB);
        let dia = |f: &str, n: usize| box_power(&parse(f).unwrap(), n, PowerKind::DiamondExact);
        let d11 = Formula::and(
            Formula::and(parse("~P(x) & box ~P(x)").unwrap(), dia("P(x)", 2)),
            dia("P(x) & box P(x)", 3),
        );
        assert_eq!(delta_ktb(1, 1, &x(), &c).unwrap(), d11);
        let d22 = delta_ktb(2, 2, &x(), &c).unwrap();
        let d21 = Formula::and(
            Formula::and(parse("~P(x) & box ~P(x)").unwrap(), dia("P(x)", 2)),
            box_power(&d22, 5, PowerKind::DiamondExact),
        );
        assert_eq!(delta_ktb(1, 2, &x(), &c).unwrap(), d21);
        assert_eq!(
            alpha_ktb(2, &x(), &c).unwrap(),
            Formula::and(
                parse("P(x)").unwrap(),
                box_power(&d21, 2, PowerKind::DiamondExact)
            )
        );
        assert!(delta_ktb(3, 2, &x(), &c).is_err());
    }

    #[test]
    fn beta_shape_and_variables() {
        for track in [Track::GL, Track::KTB] {
            let c = ReductionContext::new(1, track);
            let b = beta_k(1, &x(), &c).unwrap();
            assert_eq!(
                b,
                Formula::and(
                    parse("~P(x)").unwrap(),
                    Formula::dia(alpha(1, &x(), &c).unwrap())
                )
            );
            assert_eq!(profile(&b).free_variables, BTreeSet::from([x()]));
        }
    }

    #[test]
    fn embed_e_shape() {
        let c = ctx1();
        let f = parse("forall x. box P1(x)").unwrap();
        let e = embed_e(&f, &c).unwrap();
        let b2 = beta_k(2, &x(), &c).unwrap();
        let b1 = beta_k(1, &x(), &c).unwrap();
        let guard = Formula::forall(x(), b2);
        let expect = Formula::and(
            guard.clone(),
            Formula::forall(x(), Formula::boxed(Formula::imp(guard, b1))),
        );
        assert_eq!(e, expect);
        assert_eq!(letters_of(&e), BTreeSet::from(["P".to_string()]));
        assert!(matches!(
            embed_e(&parse("P1(x)").unwrap(), &c),
            Err(ModalError::NotClosed(_))
        ));
    }

    #[test]
    fn guard_variable_comes_from_input() {
        let f = parse("forall y. box P1(y)").unwrap();
        let c = ReductionContext::for_formula(&f, Track::K).unwrap();
        assert_eq!(c.sources, vec!["P1".to_string()]);
        let e = embed_e(&f, &c).unwrap();
        assert_eq!(profile(&e).variables, BTreeSet::from([Var::new("y")]));
    }

    #[test]
    fn bf_shape() {
        assert_eq!(
            bf_formula("P"),
            parse("(forall x. box P(x)) -> box forall x. P(x)").unwrap()
        );
    }
}
