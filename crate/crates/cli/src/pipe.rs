//! Typed composition of transformation passes.

use anyhow::{anyhow, bail, Context, Result};

use twovar_core::formula::{parse, profile, Formula, Var};
use twovar_core::int::{
    build_mstar_int, depth_for, eliminate_binary, encode_tiling, expand_propositional,
    godel_translate, monadic_sources, sib_simulate, star_subst_int, AtomClause, BinaryFresh,
    MstarVariant, TilingVariant,
};
use twovar_core::kripke::{ClosureKind, Model};
use twovar_core::modal::{
    attach_gadgets, beta_k, embed_e, extend_with_fresh, prime_embed, restrict_to_guard, star,
    ReductionContext, Track,
};
use twovar_core::search::TileSet;

/// What flows between passes.
pub enum Artifact {
    Formula(Formula),
    Model(Model),
    Tiles(TileSet),
}

impl Artifact {
    pub fn kind(&self) -> &'static str {
        match self {
            Artifact::Formula(_) => "formula",
            Artifact::Model(_) => "model",
            Artifact::Tiles(_) => "tile set",
        }
    }

    /// A JSON object is a tile set or a model; anything else is a formula.
    pub fn read(text: &str) -> Result<Artifact> {
        let t = text.trim();
        if t.starts_with('{') {
            let value: serde_json::Value =
                serde_json::from_str(t).context("input is not valid JSON")?;
            if value.get("tiles").is_some() {
                return Ok(Artifact::Tiles(TileSet::from_json(t)?));
            }
            return Ok(Artifact::Model(Model::from_json(t)?));
        }
        Ok(Artifact::Formula(parse(t)?))
    }
}

pub const PASSES: &[&str] = &[
    "prime",
    "star",
    "embed-e",
    "encode-tiling[:visser]",
    "eliminate-binary[:LETTER]",
    "expand-prop",
    "star-int",
    "godel[:visser]",
    "sib[:LETTER]",
    "extend-fresh",
    "attach-gadgets",
    "restrict-guard",
    "mstar-int[:qkc|qfl]",
    "closure:r|t|rt|rs",
];

pub struct Pipeline {
    pub track: Track,
    pub depth: Option<usize>,
    pub trace: bool,
    ctx: Option<ReductionContext>,
}

/// Splits `a, b | c` into pass names.
pub fn split_passes(spec: &str) -> Vec<String> {
    spec.split([',', '|'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn model_context(m: &Model, track: Track) -> Result<ReductionContext> {
    let mut sources: Vec<String> = m
        .letters()
        .iter()
        .filter(|(l, a)| *a == 1 && *l != "P")
        .map(|(l, _)| l.clone())
        .collect();
    sources.sort();
    if sources.is_empty() {
        bail!("model has no monadic letters");
    }
    let mut ctx = ReductionContext::new(sources.len(), track);
    let mut i = sources.len() + 1;
    while sources.contains(&ctx.fresh) {
        i += 1;
        ctx.fresh = format!("P{i}");
    }
    ctx.sources = sources;
    Ok(ctx)
}

impl Pipeline {
    pub fn new(track: Track, depth: Option<usize>, trace: bool) -> Pipeline {
        Pipeline {
            track,
            depth,
            trace,
            ctx: None,
        }
    }

    fn context_for(&mut self, f: &Formula) -> Result<ReductionContext> {
        if self.ctx.is_none() {
            self.ctx = Some(ReductionContext::for_formula(f, self.track)?);
        }
        Ok(self.ctx.clone().expect("just set"))
    }

    pub fn run(&mut self, passes: &[String], mut a: Artifact) -> Result<Artifact> {
        for (i, p) in passes.iter().enumerate() {
            a = self
                .step(p, a)
                .with_context(|| format!("pass {} ({p})", i + 1))?;
            if self.trace {
                eprintln!("-- after {p}: {}", describe(&a));
            }
        }
        Ok(a)
    }

    fn step(&mut self, pass: &str, a: Artifact) -> Result<Artifact> {
        let (name, arg) = match pass.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (pass, None),
        };
        let wrong = |a: &Artifact, want: &str| anyhow!("{name} takes a {want}, got a {}", a.kind());
        match (name, a) {
            ("prime", Artifact::Formula(f)) => {
                let ctx = self.context_for(&f)?;
                Ok(Artifact::Formula(prime_embed(&f, &ctx)?))
            }
            ("star", Artifact::Formula(f)) => {
                let ctx = self.context_for(&f)?;
                Ok(Artifact::Formula(star(&f, &ctx)?))
            }
            ("embed-e", Artifact::Formula(f)) => {
                // after `star` only the guard conjunct is missing
                if let Some(ctx) = &self.ctx {
                    if profile(&f).letter_names().iter().all(|l| *l == ctx.target) {
                        let g: &Var = &ctx.guard_var;
                        let guard = Formula::forall(g.clone(), beta_k(ctx.n() + 1, g, ctx)?);
                        return Ok(Artifact::Formula(Formula::and(guard, f)));
                    }
                }
                let ctx = self.context_for(&f)?;
                Ok(Artifact::Formula(embed_e(&f, &ctx)?))
            }
            ("encode-tiling", Artifact::Tiles(t)) => {
                let variant = match arg {
                    None | Some("int") => TilingVariant::Int,
                    Some("visser") => TilingVariant::Visser,
                    Some(o) => bail!("unknown tiling variant {o}"),
                };
                Ok(Artifact::Formula(encode_tiling(&t, variant)?.phi))
            }
            ("eliminate-binary", Artifact::Formula(f)) => {
                let q = match arg {
                    Some(q) => q.to_string(),
                    None => profile(&f)
                        .letters
                        .iter()
                        .find(|(_, i)| i.arity == 2)
                        .map(|(l, _)| l.clone())
                        .ok_or_else(|| anyhow!("no binary letter left"))?,
                };
                let fresh = BinaryFresh::for_letter(&f, &q);
                Ok(Artifact::Formula(eliminate_binary(&f, &q, &fresh)?))
            }
            ("expand-prop", Artifact::Formula(f)) => {
                Ok(Artifact::Formula(expand_propositional(&f)?.0))
            }
            ("star-int", Artifact::Formula(f)) => {
                let sources = monadic_sources(&f)?;
                let n = self.depth.unwrap_or(depth_for(sources.len()));
                Ok(Artifact::Formula(star_subst_int(&f, &sources, n)?))
            }
            ("godel", Artifact::Formula(f)) => {
                let clause = match arg {
                    None | Some("int") => AtomClause::Box,
                    Some("visser") => AtomClause::BoxPlus,
                    Some(o) => bail!("unknown translation variant {o}"),
                };
                Ok(Artifact::Formula(godel_translate(&f, clause)?))
            }
            ("sib", Artifact::Formula(f)) => {
                let s = match arg {
                    Some(s) => s.to_string(),
                    None => profile(&f)
                        .letters
                        .keys()
                        .next()
                        .cloned()
                        .ok_or_else(|| anyhow!("formula has no letters"))?,
                };
                Ok(Artifact::Formula(sib_simulate(&f, &s, "P")?))
            }
            ("extend-fresh", Artifact::Model(m)) => {
                let ctx = model_context(&m, self.track)?;
                Ok(Artifact::Model(extend_with_fresh(&m, &ctx)))
            }
            ("attach-gadgets", Artifact::Model(m)) => {
                let mut ctx = model_context(&m, self.track)?;
                // the last monadic letter of an extended model is the guard letter
                if let Some(last) = ctx.sources.pop() {
                    if ctx.sources.is_empty() {
                        bail!("attach-gadgets needs the source letters and the guard letter");
                    }
                    ctx.fresh = last;
                }
                Ok(Artifact::Model(attach_gadgets(&m, &ctx)?))
            }
            ("restrict-guard", Artifact::Model(m)) => {
                let mut ctx = model_context(&m, self.track)?;
                if let Some(last) = ctx.sources.pop() {
                    ctx.fresh = last;
                }
                Ok(Artifact::Model(restrict_to_guard(&m, &ctx)))
            }
            ("mstar-int", Artifact::Model(m)) => {
                let variant = match arg {
                    None | Some("int") => MstarVariant::Int,
                    Some("qkc") => MstarVariant::Qkc,
                    Some("qfl") => MstarVariant::Qfl,
                    Some(o) => bail!("unknown variant {o}"),
                };
                let ctx = model_context(&m, self.track)?;
                let n = self.depth.unwrap_or(depth_for(ctx.sources.len()));
                Ok(Artifact::Model(build_mstar_int(
                    &m,
                    &ctx.sources,
                    n,
                    variant,
                )?))
            }
            ("closure", Artifact::Model(mut m)) => {
                let kind = match arg {
                    Some("r") => ClosureKind::Reflexive,
                    Some("t") => ClosureKind::Transitive,
                    Some("rt") => ClosureKind::ReflexiveTransitive,
                    Some("rs") => ClosureKind::ReflexiveSymmetric,
                    _ => bail!("closure needs one of r, t, rt, rs"),
                };
                m.apply_closure(kind);
                Ok(Artifact::Model(m))
            }
            (
                "prime" | "star" | "embed-e" | "eliminate-binary" | "expand-prop" | "star-int"
                | "godel" | "sib",
                a,
            ) => Err(wrong(&a, "formula")),
            ("encode-tiling", a) => Err(wrong(&a, "tile set")),
            ("extend-fresh" | "attach-gadgets" | "restrict-guard" | "mstar-int" | "closure", a) => {
                Err(wrong(&a, "model"))
            }
            _ => bail!("unknown pass {pass}; passes are {}", PASSES.join(", ")),
        }
    }
}

/// One-line description for traces.
pub fn describe(a: &Artifact) -> String {
    match a {
        Artifact::Formula(f) => {
            let p = profile(f);
            format!(
                "formula, {} nodes, letters {:?}, variables {}, positive {}",
                p.size,
                p.letter_names(),
                p.variable_count(),
                p.positive
            )
        }
        Artifact::Model(m) => format!(
            "model, {} worlds, {} edges",
            m.world_count(),
            m.frame().edge_count()
        ),
        Artifact::Tiles(t) => format!("tile set, {} tiles", t.len()),
    }
}
