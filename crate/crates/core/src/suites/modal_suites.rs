use rand::Rng;

use super::corpus::{modal_corpus_formulas, random_model, rng, ModelSpec};
use super::{CaseResult, Failure, SuiteError, SuiteParams, Tally};
use crate::formula::{parse, Formula, Var};
use crate::kripke::{sat_at, Assignment, Checker, ClosureKind, Mode, Model, Program};
use crate::modal::{
    alpha, attach_gadgets, beta_k, build_b, build_gadget, distinguished_world, embed_e,
    extend_with_fresh, prime_embed, restrict_to_guard, ReductionContext, Track,
};
use crate::search::{ground_sat, GroundBounds};

fn setup(e: impl ToString) -> SuiteError {
    SuiteError::Param(e.to_string())
}

/// The gadget lemma: `alpha_m[a]` holds in gadget `k` exactly at its
/// distinguished world when `k = m`.
pub(super) fn gadgets(track: Track, reflexive: bool, n: usize) -> Result<Tally, SuiteError> {
    if n == 0 {
        return Err(SuiteError::Param("n must be at least 1".into()));
    }
    let ctx = ReductionContext::new(n, track);
    let x = Var::new("x");
    let mut alphas = Vec::new();
    for m in 1..=n + 1 {
        let f = alpha(m, &x, &ctx).map_err(setup)?;
        alphas.push(Program::compile(&f, Mode::Modal).map_err(setup)?);
    }
    let mut t = Tally::new();
    for k in 1..=n + 1 {
        let mut g = build_gadget(k, track, "a", &["a", "b"]).map_err(setup)?;
        if reflexive {
            g.model.apply_closure(ClosureKind::Reflexive);
        }
        let model = &g.model;
        let root = distinguished_world(&g);
        let g_a = Assignment::from([(x.clone(), model.individual_id("a").expect("pivot"))]);
        for (mi, prog) in alphas.iter().enumerate() {
            let m = mi + 1;
            let case = format!("k{k}-m{m}");
            let mut r = CaseResult::default();
            let mut c = Checker::new(prog, model).map_err(setup)?;
            for w in model.worlds() {
                let want = k == m && w == root;
                let got = c.eval(w, &g_a);
                r.check(got == Ok(want), || {
                    Failure::new(
                        &case,
                        format!("alpha_{m}[a] evaluates to {got:?}, expected {want}"),
                    )
                    .at(model, w)
                    .with(model, &g_a)
                    .formula(format!("alpha_{m}(x)"))
                });
            }
            t.add(r);
        }
    }
    Ok(t)
}

/// Ten (model, formula) pairs: seeded random constant-domain models over
/// `P1`, `P2`, closed as the track demands, each paired with a corpus
/// formula or its negation, whichever holds at `w0`.
fn modal_cases(seed: u64, track: Track) -> Vec<(Model, Formula)> {
    let letters = [("P1", 1), ("P2", 1)];
    let mut r = rng(seed, 2);
    let mut out = Vec::new();
    for psi in modal_corpus_formulas() {
        let pool = r.gen_range(1..=2);
        let spec = ModelSpec {
            mode: Mode::Modal,
            worlds: 1..=3,
            pool,
            min_domain: pool,
            constant: true,
            letters: &letters,
            density: 0.5,
            closure: track.closure(),
        };
        let m = random_model(&mut r, &spec);
        let phi = if sat_at(&m, 0, &psi).expect("corpus formula evaluates") {
            psi
        } else {
            Formula::neg(psi)
        };
        out.push((m, phi));
    }
    out
}

/// Worlds where the guard fails, hung below and above the extension.
fn add_junk(m: &Model, ctx: &ReductionContext, r: &mut impl Rng) -> Model {
    let mut out = m.clone();
    let host = m.world_count();
    let all: Vec<usize> = (0..m.individuals().len()).collect();
    for j in 0..2 {
        let u = out.add_world(&format!("junk{j}"));
        out.set_domain(u, all.iter().copied());
        for &d in &all {
            for l in &ctx.sources {
                if r.gen_bool(0.5) {
                    out.add_fact(u, l, vec![d]).expect("monadic");
                }
            }
            if d != 0 && r.gen_bool(0.5) {
                out.add_fact(u, &ctx.fresh, vec![d]).expect("monadic");
            }
        }
    }
    for a in 0..host + 2 {
        for b in host..host + 2 {
            if r.gen_bool(0.5) {
                out.add_edge(a, b);
            }
            if r.gen_bool(0.3) {
                out.add_edge(b, a % host);
            }
        }
    }
    out
}

/// The guard lemma, constructively: the `P_{n+1}` extension satisfies
/// `B & phi'` where the model satisfied `phi`, and restricting a model of
/// `B & phi'` (padded with worlds where the guard fails) to the guard
/// worlds gives back a model of `phi`.
pub(super) fn vp_b(params: &SuiteParams) -> Result<Tally, SuiteError> {
    let ctx = ReductionContext::new(2, Track::K);
    let b = build_b(&ctx);
    let mut junk_rng = rng(params.seed, 5);
    let mut t = Tally::new();
    for (i, (m, phi)) in modal_cases(params.seed, Track::K).into_iter().enumerate() {
        let case = format!("case{i:02}");
        let mut r = CaseResult::default();
        let host = Formula::and(b.clone(), prime_embed(&phi, &ctx).map_err(setup)?);
        let ext = extend_with_fresh(&m, &ctx);
        let ok = sat_at(&ext, 0, &host);
        r.check(ok == Ok(true), || {
            Failure::new(&case, format!("extension gives {ok:?} for B & phi'"))
                .at(&ext, 0)
                .formula(&phi)
        });
        let padded = add_junk(&ext, &ctx, &mut junk_rng);
        let ok = sat_at(&padded, 0, &host);
        r.check(ok == Ok(true), || {
            Failure::new(&case, format!("padded model gives {ok:?} for B & phi'"))
                .at(&padded, 0)
                .formula(&phi)
        });
        let back = restrict_to_guard(&padded, &ctx);
        let same = back.world_count() == m.world_count();
        r.check(same, || {
            Failure::new(&case, "restriction kept a junk world or lost a host world")
        });
        let w0 = back.world_id("w0").map_err(setup)?;
        let ok = sat_at(&back, w0, &phi);
        r.check(ok == Ok(true), || {
            Failure::new(&case, format!("restriction gives {ok:?} for phi"))
                .at(&back, w0)
                .formula(&phi)
        });
        t.add(r);
    }
    Ok(t)
}

/// The gadget lemma for one track: `M*` satisfies the embedding at `w0`,
/// has the track's frame properties, and `beta_k` bridges `P_k` at every
/// host world.
pub(super) fn vp_ast(track: Track, params: &SuiteParams) -> Result<Tally, SuiteError> {
    let ctx = ReductionContext::new(2, track);
    let x = Var::new("x");
    let mut betas = Vec::new();
    for k in 1..=ctx.n() + 1 {
        let f = beta_k(k, &x, &ctx).map_err(setup)?;
        betas.push(Program::compile(&f, Mode::Modal).map_err(setup)?);
    }
    let mut t = Tally::new();
    for (i, (m, phi)) in modal_cases(params.seed, track).into_iter().enumerate() {
        let case = format!("case{i:02}");
        let mut r = CaseResult::default();
        let ext = extend_with_fresh(&m, &ctx);
        let star = match attach_gadgets(&ext, &ctx) {
            Ok(s) => s,
            Err(e) => {
                r.fail(Failure::new(&case, format!("attach_gadgets: {e}")).formula(&phi));
                t.add(r);
                continue;
            }
        };
        let e = embed_e(&phi, &ctx).map_err(setup)?;
        let ok = sat_at(&star, 0, &e);
        r.check(ok == Ok(true), || {
            Failure::new(&case, format!("embedding evaluates to {ok:?} at w0"))
                .at(&star, 0)
                .formula(&phi)
        });
        for &p in track.frame_properties() {
            r.check(p.holds(star.frame()), || {
                Failure::new(&case, format!("output frame is not {p:?}"))
            });
        }
        for (ki, prog) in betas.iter().enumerate() {
            let k = ki + 1;
            let mut c = Checker::new(prog, &star).map_err(setup)?;
            for w in ext.worlds() {
                for &a in ext.domain(w) {
                    let want = ext.holds(w, ctx.letter(k), &[a]);
                    let g = Assignment::from([(x.clone(), a)]);
                    let got = c.eval(w, &g);
                    r.check(got == Ok(want), || {
                        Failure::new(
                            &case,
                            format!("beta_{k}[a] is {got:?} but {}[a] is {want}", ctx.letter(k)),
                        )
                        .at(&ext, w)
                        .with(&ext, &g)
                        .formula(&phi)
                    });
                }
            }
        }
        t.add(r);
    }
    Ok(t)
}

/// Formulas over one letter for the satisfiability cross-check.
pub(crate) const ORACLE_FORMULAS: &[&str] = &[
    "exists x. P1(x)",
    "exists x. (P1(x) & ~P1(x))",
    "(forall x. box P1(x)) & exists x. dia ~P1(x)",
    "(box exists x. P1(x)) & dia top",
    "(dia exists x. P1(x)) & box forall x. ~P1(x)",
];

/// Bounded satisfiability of `B & phi'` on three worlds agrees with that of
/// the embedding on three host worlds plus one copy of each gadget below
/// each of them.
pub(super) fn oracle_cross(_params: &SuiteParams) -> Result<Tally, SuiteError> {
    let ctx = ReductionContext::new(1, Track::K);
    let gadget_worlds: usize = (1..=ctx.n() + 1).map(|k| 2 * k + 2).sum();
    let host_bounds = GroundBounds {
        worlds: 3,
        domain: 2,
        frame_class: vec![],
        constant_domains: false,
    };
    let star_bounds = GroundBounds {
        worlds: 3 * (1 + gadget_worlds),
        ..host_bounds.clone()
    };
    let mut t = Tally::new();
    for (i, src) in ORACLE_FORMULAS.iter().enumerate() {
        let case = format!("case{i:02}");
        let mut r = CaseResult::default();
        let phi = parse(src).map_err(setup)?;
        r.check(phi.size() <= 8, || {
            Failure::new(&case, "formula exceeds 8 nodes").formula(&phi)
        });
        let host = Formula::and(build_b(&ctx), prime_embed(&phi, &ctx).map_err(setup)?);
        let e = embed_e(&phi, &ctx).map_err(setup)?;
        match (
            ground_sat(&host, &host_bounds),
            ground_sat(&e, &star_bounds),
        ) {
            (Ok(a), Ok(b)) => r.check(a.is_some() == b.is_some(), || {
                Failure::new(
                    &case,
                    format!(
                        "B & phi' found: {}, embedding found: {}",
                        a.is_some(),
                        b.is_some()
                    ),
                )
                .formula(&phi)
            }),
            (a, b) => r.fail(
                Failure::new(
                    &case,
                    format!("search failed: {:?} / {:?}", a.err(), b.err()),
                )
                .formula(&phi),
            ),
        }
        t.add(r);
    }
    Ok(t)
}
