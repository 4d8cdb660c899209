use std::collections::BTreeSet;

use super::corpus::{
    modal_corpus_formulas, positive_binary_formulas, positive_monadic_formulas, random_model, rng,
    ModelSpec,
};
use super::{CaseResult, Failure, SuiteError, SuiteParams, Tally};
use crate::formula::{profile, Formula, Var};
use crate::int::{
    a_suitable_f, alpha_int, build_frame_f, build_mstar_int, depth_for, eliminate_binary,
    encode_tiling, expand_propositional, monadic_sources, star_subst_int, witness_eliminate_binary,
    BinaryFresh, FKind, FVariant, Levels, MstarVariant, TilingVariant,
};
use crate::kripke::{
    sat_at, Assignment, Checker, ClosureKind, FrameProperty, Mode, Model, Program, WorldId,
};
use crate::modal::{embed_e, ReductionContext, Track};
use crate::search::{check_tiling, find_periodic_tiling, torus_countermodel, Tile, TileSet};

fn setup(e: impl ToString) -> SuiteError {
    SuiteError::Param(e.to_string())
}

/// Draws models until ten of them refute some formula of the list. Case
/// `i` prefers formula `i`, so the cases spread over the list.
fn countermodels(
    spec: &ModelSpec,
    formulas: &[Formula],
    seed: u64,
    salt: u64,
    budget: u64,
) -> Result<Vec<(Model, WorldId, Formula)>, SuiteError> {
    let mut r = rng(seed, salt);
    let mut out = Vec::new();
    let mut draws = 0u64;
    while out.len() < 10 {
        draws += 1;
        if draws > budget {
            return Err(SuiteError::Budget(format!(
                "{draws} models drawn for {} countermodels",
                out.len()
            )));
        }
        let m = random_model(&mut r, spec);
        let start = out.len();
        'pick: for j in 0..formulas.len() {
            let f = &formulas[(start + j) % formulas.len()];
            for w in m.worlds() {
                if !sat_at(&m, w, f).map_err(setup)? {
                    out.push((m.clone(), w, f.clone()));
                    break 'pick;
                }
            }
        }
    }
    Ok(out)
}

fn binary_spec<'a>(letters: &'a [(&'a str, usize)]) -> ModelSpec<'a> {
    ModelSpec {
        mode: Mode::Intuitionistic,
        worlds: 1..=3,
        pool: 2,
        min_domain: 1,
        constant: false,
        letters,
        density: 0.35,
        closure: Some(ClosureKind::ReflexiveTransitive),
    }
}

/// Binary elimination: the witness model is valid and refutes the
/// eliminated formula at the same world, and at every old world the
/// replacement of `Q(u, v)` holds exactly where `Q` held.
pub(super) fn binary(params: &SuiteParams) -> Result<Tally, SuiteError> {
    let letters = [("Q", 2), ("R", 1), ("r0", 0)];
    let spec = binary_spec(&letters);
    let cases = countermodels(
        &spec,
        &positive_binary_formulas(),
        params.seed,
        3,
        params.budget,
    )?;
    let (x, y) = (Var::new("x"), Var::new("y"));
    let mut t = Tally::new();
    for (i, (m, w0, chi)) in cases.into_iter().enumerate() {
        let case = format!("case{i:02}");
        let mut r = CaseResult::default();
        let fresh = BinaryFresh::for_letter(&chi, "Q");
        let elim = eliminate_binary(&chi, "Q", &fresh).map_err(setup)?;
        let wm = match witness_eliminate_binary(&m, w0, &chi, "Q", &fresh) {
            Ok(wm) => wm,
            Err(e) => {
                r.fail(
                    Failure::new(&case, format!("witness construction: {e}"))
                        .at(&m, w0)
                        .formula(&chi),
                );
                t.add(r);
                continue;
            }
        };
        let violations = wm.validate();
        r.check(violations.is_empty(), || {
            Failure::new(
                &case,
                format!("witness model is invalid: {}", violations[0]),
            )
            .formula(&chi)
        });
        let ok = sat_at(&wm, w0, &elim);
        r.check(ok == Ok(false), || {
            Failure::new(&case, format!("eliminated formula evaluates to {ok:?}"))
                .at(&wm, w0)
                .formula(&chi)
        });
        let replacement = Formula::or(
            Formula::imp(
                Formula::and(
                    Formula::unary(&fresh.first, &x),
                    Formula::unary(&fresh.second, &y),
                ),
                Formula::prop(&fresh.r),
            ),
            Formula::prop(&fresh.s),
        );
        let prog = Program::compile(&replacement, Mode::Intuitionistic).map_err(setup)?;
        let mut c = Checker::new(&prog, &wm).map_err(setup)?;
        for w in m.worlds() {
            for &a in m.domain(w) {
                for &b in m.domain(w) {
                    let want = m.holds(w, "Q", &[a, b]);
                    let g = Assignment::from([(x.clone(), a), (y.clone(), b)]);
                    let got = c.eval(w, &g);
                    r.check(got == Ok(want), || {
                        Failure::new(&case, format!("replacement is {got:?} but Q is {want}"))
                            .at(&m, w)
                            .with(&m, &g)
                            .formula(&chi)
                    });
                }
            }
        }
        t.add(r);
    }
    Ok(t)
}

/// The level formulas on the truncated frame: the formula of an `a`/`b`
/// world fails exactly where that world is seen (reflexively); the
/// `a`-suitable interpretation is hereditary. The irreflexive variant is
/// checked at the undoubled worlds.
pub(super) fn frame_f(variant: FVariant, n: Option<usize>) -> Result<Tally, SuiteError> {
    let depths = match n {
        Some(n) => vec![n],
        None => vec![2, 3],
    };
    let x = Var::new("x");
    let mut t = Tally::new();
    for depth in depths {
        let fr = build_frame_f(depth, variant).map_err(setup)?;
        let model = a_suitable_f(&fr, &["a", "b", "c"], "a", "b").map_err(setup)?;
        let mut r = CaseResult::default();
        let violations = model.validate();
        r.check(violations.is_empty(), || {
            Failure::new(
                format!("depth{depth}-heredity"),
                format!("{}", violations[0]),
            )
        });
        t.add(r);
        let g = Assignment::from([(x.clone(), model.individual_id("a").expect("pivot"))]);
        let mut lv = Levels::new("P", &x);
        for target in fr.worlds.iter().filter(|w| w.kind != FKind::D && !w.double) {
            let case = format!("depth{depth}-{}", target.name());
            let mut r = CaseResult::default();
            let f = lv.get(*target).map_err(setup)?;
            let prog = Program::compile(&f, model.mode).map_err(setup)?;
            let mut c = Checker::new(&prog, &model).map_err(setup)?;
            for w in model.worlds() {
                if fr.worlds[w].double {
                    continue;
                }
                let want = !fr.sees(w, *target);
                let got = c.eval(w, &g);
                r.check(got == Ok(want), || {
                    Failure::new(&case, format!("level formula is {got:?}, expected {want}"))
                        .at(&model, w)
                        .with(&model, &g)
                        .formula(target.name())
                });
            }
            t.add(r);
        }
    }
    Ok(t)
}

/// The single-letter reduction: `M*` refutes the substituted formula at
/// `w0`, `alpha_i` bridges `P_i` at every host world, and the frame is of
/// the variant's class.
pub(super) fn main_lemma(variant: MstarVariant, params: &SuiteParams) -> Result<Tally, SuiteError> {
    let (mode, closure, salt) = match variant {
        MstarVariant::Int => (Mode::Intuitionistic, ClosureKind::ReflexiveTransitive, 10),
        MstarVariant::Qkc => (Mode::Intuitionistic, ClosureKind::ReflexiveTransitive, 11),
        MstarVariant::Qfl => (Mode::Visser, ClosureKind::Transitive, 12),
    };
    let letters = [("P1", 1), ("P2", 1)];
    let spec = ModelSpec {
        mode,
        worlds: 1..=3,
        pool: 4,
        min_domain: 3,
        constant: false,
        letters: &letters,
        density: 0.4,
        closure: Some(closure),
    };
    let sources: Vec<String> = vec!["P1".into(), "P2".into()];
    let depth = params.n.unwrap_or(depth_for(sources.len()));
    let cases = countermodels(
        &spec,
        &positive_monadic_formulas(),
        params.seed,
        salt,
        params.budget,
    )?;
    let x = Var::new("x");
    let mut alphas = Vec::new();
    for i in 1..=sources.len() {
        let f = alpha_int(i, depth, &x).map_err(setup)?;
        alphas.push(Program::compile(&f, mode).map_err(setup)?);
    }
    let properties: &[FrameProperty] = match variant {
        MstarVariant::Int => &[
            FrameProperty::Reflexive,
            FrameProperty::Transitive,
            FrameProperty::Antisymmetric,
        ],
        MstarVariant::Qkc => &[
            FrameProperty::Reflexive,
            FrameProperty::Transitive,
            FrameProperty::Antisymmetric,
            FrameProperty::Convergent,
        ],
        MstarVariant::Qfl => &[
            FrameProperty::Transitive,
            FrameProperty::Irreflexive,
            FrameProperty::Acyclic,
        ],
    };
    let mut t = Tally::new();
    for (i, (m, w0, phi)) in cases.into_iter().enumerate() {
        let case = format!("case{i:02}");
        let mut r = CaseResult::default();
        let star = match build_mstar_int(&m, &sources, depth, variant) {
            Ok(s) => s,
            Err(e) => {
                r.fail(
                    Failure::new(&case, format!("build_mstar_int: {e}"))
                        .at(&m, w0)
                        .formula(&phi),
                );
                t.add(r);
                continue;
            }
        };
        let sub = star_subst_int(&phi, &sources, depth).map_err(setup)?;
        let ok = sat_at(&star, w0, &sub);
        r.check(ok == Ok(false), || {
            Failure::new(&case, format!("substituted formula evaluates to {ok:?}"))
                .at(&m, w0)
                .formula(&phi)
        });
        for &p in properties {
            r.check(p.holds(star.frame()), || {
                Failure::new(&case, format!("output frame is not {p:?}"))
            });
        }
        let violations = star.validate();
        r.check(violations.is_empty(), || {
            Failure::new(&case, format!("{}", violations[0]))
        });
        for (ii, prog) in alphas.iter().enumerate() {
            let mut c = Checker::new(prog, &star).map_err(setup)?;
            for w in m.worlds() {
                for &a in m.domain(w) {
                    let want = m.holds(w, &sources[ii], &[a]);
                    let g = Assignment::from([(x.clone(), a)]);
                    let got = c.eval(w, &g);
                    r.check(got == Ok(want), || {
                        Failure::new(
                            &case,
                            format!(
                                "alpha_{}[a] is {got:?} but P{}[a] is {want}",
                                ii + 1,
                                ii + 1
                            ),
                        )
                        .at(&m, w)
                        .with(&m, &g)
                        .formula(&phi)
                    });
                }
            }
        }
        t.add(r);
    }
    Ok(t)
}

pub(crate) fn tileable_sets() -> Vec<(&'static str, TileSet, (usize, usize))> {
    let set = |tiles: &[(&str, &str, &str, &str, &str)]| {
        TileSet::new(
            tiles
                .iter()
                .map(|&(n, l, r, u, d)| Tile::new(n, l, r, u, d))
                .collect(),
        )
        .expect("valid set")
    };
    vec![
        ("uniform", set(&[("u", "c", "c", "c", "c")]), (1, 1)),
        (
            "checkerboard",
            set(&[("black", "x", "y", "p", "q"), ("white", "y", "x", "q", "p")]),
            (2, 2),
        ),
        (
            "stripes",
            set(&[
                ("s0", "a", "b", "c", "c"),
                ("s1", "b", "a", "c", "c"),
                ("s2", "a", "a", "d", "e"),
            ]),
            (2, 1),
        ),
    ]
}

pub(crate) fn untileable_sets() -> Vec<(&'static str, TileSet)> {
    let set = |tiles: &[(&str, &str, &str, &str, &str)]| {
        TileSet::new(
            tiles
                .iter()
                .map(|&(n, l, r, u, d)| Tile::new(n, l, r, u, d))
                .collect(),
        )
        .expect("valid set")
    };
    vec![
        ("side-mismatch", set(&[("t", "a", "b", "c", "c")])),
        (
            "no-vertical-match",
            set(&[("t0", "a", "a", "u", "d"), ("t1", "b", "b", "u", "d")]),
        ),
    ]
}

/// Periodic tilings give verified countermodels to the tiling formula;
/// untileable sets have no torus tiling up to 3 x 3.
pub(super) fn tiling(params: &SuiteParams) -> Result<Tally, SuiteError> {
    let mut t = Tally::new();
    for (name, set, (w, h)) in tileable_sets() {
        let case = name.to_string();
        let mut r = CaseResult::default();
        let tau = match find_periodic_tiling(&set, w, h, params.budget) {
            Ok(Some(tau)) => tau,
            other => {
                r.fail(Failure::new(
                    &case,
                    format!("no {w}x{h} tiling found: {other:?}"),
                ));
                t.add(r);
                continue;
            }
        };
        r.check(matches!(check_tiling(&set, &tau), Ok(true)), || {
            Failure::new(&case, "tiling does not check")
        });
        let model = match torus_countermodel(&set, &tau) {
            Ok(m) => m,
            Err(e) => {
                r.fail(Failure::new(&case, format!("countermodel: {e}")));
                t.add(r);
                continue;
            }
        };
        let enc = encode_tiling(&set, TilingVariant::Int).map_err(setup)?;
        let root = model.world_id("root").map_err(setup)?;
        for (label, c) in &enc.conjuncts {
            for u in model.worlds() {
                let ok = sat_at(&model, u, c);
                r.check(ok == Ok(true), || {
                    Failure::new(&case, format!("conjunct {label} evaluates to {ok:?}"))
                        .at(&model, u)
                });
            }
        }
        let ok = sat_at(&model, root, &enc.phi);
        r.check(ok == Ok(false), || {
            Failure::new(&case, format!("tiling formula evaluates to {ok:?}")).at(&model, root)
        });
        t.add(r);
    }
    for (name, set) in untileable_sets() {
        let mut r = CaseResult::default();
        for w in 1..=3 {
            for h in 1..=3 {
                let got = find_periodic_tiling(&set, w, h, params.budget);
                r.check(matches!(got, Ok(None)), || {
                    Failure::new(name, format!("{w}x{h} search gave {got:?}"))
                });
            }
        }
        t.add(r);
    }
    Ok(t)
}

fn shape_check(
    r: &mut CaseResult,
    case: &str,
    f: &Formula,
    input_vars: &BTreeSet<Var>,
    positive: bool,
) {
    let p = profile(f);
    if positive {
        r.check(p.positive, || Failure::new(case, "output is not positive"));
    }
    r.check(p.variable_count() <= 2, || {
        Failure::new(
            case,
            format!("output uses {} variables", p.variable_count()),
        )
    });
    r.check(p.variables.is_subset(input_vars), || {
        Failure::new(case, "output introduces a variable")
    });
}

/// Syntactic claims: the modal embedding has one letter and no new
/// variables; the tiling encoding and every transform downstream of it
/// stay positive and two-variable, ending with a single letter.
pub(super) fn syntactic() -> Result<Tally, SuiteError> {
    let mut t = Tally::new();
    for (i, f) in modal_corpus_formulas().into_iter().enumerate() {
        let vars = profile(&f).variables;
        for track in Track::ALL {
            let case = format!("embed-{}-{i:02}", track.name());
            let mut r = CaseResult::default();
            let ctx = ReductionContext::for_formula(&f, track).map_err(setup)?;
            let e = embed_e(&f, &ctx).map_err(setup)?;
            let p = profile(&e);
            r.check(
                p.letter_names() == BTreeSet::from(["P".to_string()]),
                || Failure::new(&case, format!("letters {:?}", p.letter_names())).formula(&f),
            );
            r.check(p.variables.is_subset(&vars), || {
                Failure::new(&case, "new variable").formula(&f)
            });
            t.add(r);
        }
    }
    let sets = tileable_sets()
        .into_iter()
        .map(|(n, s, _)| (n, s))
        .chain(untileable_sets());
    for (name, set) in sets {
        for variant in [TilingVariant::Int, TilingVariant::Visser] {
            let case = format!("pipeline-{name}-{variant:?}").to_lowercase();
            let mut r = CaseResult::default();
            let enc = encode_tiling(&set, variant).map_err(setup)?;
            let vars = profile(&enc.phi).variables;
            shape_check(&mut r, &case, &enc.phi, &vars, true);
            let mut f = enc.phi.clone();
            for q in [&enc.letters.h, &enc.letters.v] {
                let fresh = BinaryFresh::for_letter(&f, q);
                f = eliminate_binary(&f, q, &fresh).map_err(setup)?;
                shape_check(&mut r, &case, &f, &vars, true);
            }
            let (g, _) = expand_propositional(&f).map_err(setup)?;
            shape_check(&mut r, &case, &g, &vars, true);
            let sources = monadic_sources(&g).map_err(setup)?;
            let h = star_subst_int(&g, &sources, depth_for(sources.len())).map_err(setup)?;
            shape_check(&mut r, &case, &h, &vars, true);
            let letters = profile(&h).letter_names();
            r.check(letters == BTreeSet::from(["P".to_string()]), || {
                Failure::new(&case, format!("final letters {letters:?}"))
            });
            t.add(r);
        }
    }
    for (i, chi) in positive_binary_formulas().into_iter().enumerate() {
        let case = format!("eliminate-{i:02}");
        let mut r = CaseResult::default();
        let vars = profile(&chi).variables;
        let fresh = BinaryFresh::for_letter(&chi, "Q");
        let f = eliminate_binary(&chi, "Q", &fresh).map_err(setup)?;
        shape_check(&mut r, &case, &f, &vars, true);
        t.add(r);
    }
    for (i, phi) in positive_monadic_formulas().into_iter().enumerate() {
        let case = format!("star-int-{i:02}");
        let mut r = CaseResult::default();
        let vars = profile(&phi).variables;
        let sources = monadic_sources(&phi).map_err(setup)?;
        let f = star_subst_int(&phi, &sources, depth_for(sources.len())).map_err(setup)?;
        shape_check(&mut r, &case, &f, &vars, true);
        t.add(r);
    }
    Ok(t)
}
