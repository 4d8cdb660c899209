mod pipe;

use std::io::Read;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pipe::{split_passes, Artifact, Pipeline};
use twovar_core::formula::{profile, Formula, Var};
use twovar_core::int::{a_suitable_f, build_frame_f, encode_tiling, FVariant, TilingVariant};
use twovar_core::kripke::{eval, Assignment, FrameProperty, Mode, Model};
use twovar_core::modal::{build_gadget, Track};
use twovar_core::search::{
    bounded_sat, check_tiling, find_periodic_tiling, ground_sat, Goal, GroundBounds, SearchBounds,
    SearchOutcome, TileSet, Tiling,
};
use twovar_core::suites::{run_suite, SuiteParams, SUITES};

/// `println!` that exits quietly when stdout is closed.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout().lock(), $($t)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            return Err(e.into());
        }
    }};
}

/// Formulas larger than this are summarised instead of printed.
const PRINT_LIMIT: u64 = 2_000_000;

#[derive(Parser)]
#[command(
    name = "twovar",
    version,
    about = "Two-variable single-letter reductions and their model checkers"
)]
struct Cli {
    /// Seed for every randomized corpus.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Work limit for searches.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget: u64,
    /// Dump intermediate artifacts to stderr.
    #[arg(long, global = true)]
    trace: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Enumerate,
    Ground,
}

/// Inputs are literal text, `-` for stdin, or `@path`.
#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print it back in canonical form.
    Parse { input: String },
    /// Print a formula, model or tile set.
    Print { input: String },
    /// Syntactic profile of a formula as JSON.
    Profile { input: String },
    /// Evaluate a formula at a world of a model.
    Eval {
        #[arg(long)]
        model: String,
        formula: String,
        #[arg(long, default_value = "0")]
        world: String,
        /// Free variable assignment, `x=a`.
        #[arg(long = "assign")]
        assign: Vec<String>,
    },
    /// Apply one pass.
    Transform {
        pass: String,
        input: String,
        #[arg(long, default_value = "K")]
        track: String,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Emit gadget `F_k` of a track as a model.
    Gadget {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "GL")]
        track: String,
        #[arg(long, default_value = "a")]
        pivot: String,
        /// Comma-separated individuals.
        #[arg(long, default_value = "a,b")]
        domain: String,
    },
    /// Emit the a-suitable truncated frame model.
    FrameF {
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value = "int")]
        variant: String,
        #[arg(long, default_value = "c,a,b")]
        domain: String,
        #[arg(long, default_value = "a")]
        a: String,
        #[arg(long, default_value = "b")]
        b: String,
    },
    /// Encode a tile set as a positive two-variable formula.
    EncodeTiling {
        tiles: String,
        #[arg(long, default_value = "int")]
        variant: String,
    },
    /// Check a tiling against a tile set; exits 1 if invalid.
    TileCheck { tiles: String, tiling: String },
    /// Search for a periodic torus tiling.
    TileFind {
        tiles: String,
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long, default_value_t = 3)]
        height: usize,
    },
    /// Bounded model search.
    Sat {
        formula: String,
        #[arg(long, default_value = "modal")]
        mode: String,
        #[arg(long, default_value_t = 2)]
        worlds: usize,
        #[arg(long, default_value_t = 2)]
        domain: usize,
        /// Comma-separated frame properties.
        #[arg(long = "frame-class", default_value = "")]
        frame_class: String,
        #[arg(long)]
        constant: bool,
        /// Look for a falsifying world instead.
        #[arg(long)]
        refute: bool,
        #[arg(long, value_enum, default_value_t = Engine::Enumerate)]
        engine: Engine,
    },
    /// Run verification suites; `all` runs every suite.
    Verify {
        #[arg(required = true)]
        suites: Vec<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "size-cap", default_value_t = 8)]
        size_cap: usize,
    },
    /// Compose passes left to right, e.g. `prime,star,embed-e`.
    Pipe {
        #[arg(default_value = "")]
        passes: String,
        #[arg(long)]
        input: String,
        #[arg(long, default_value = "K")]
        track: String,
        #[arg(long)]
        depth: Option<usize>,
    },
}

fn read_input(s: &str) -> Result<String> {
    if s == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else if let Some(path) = s.strip_prefix('@') {
        std::fs::read_to_string(path).with_context(|| format!("reading {path}"))
    } else {
        Ok(s.to_string())
    }
}

fn read_formula(s: &str) -> Result<Formula> {
    match Artifact::read(&read_input(s)?)? {
        Artifact::Formula(f) => Ok(f),
        a => bail!("expected a formula, got a {}", a.kind()),
    }
}

fn read_model(s: &str) -> Result<Model> {
    Ok(Model::from_json(&read_input(s)?)?)
}

fn read_tiles(s: &str) -> Result<TileSet> {
    Ok(TileSet::from_json(&read_input(s)?)?)
}

fn parse_track(s: &str) -> Result<Track> {
    Track::parse(s).ok_or_else(|| anyhow!("unknown track {s}; expected K, GL, Grz or KTB"))
}

fn list(s: &str) -> Vec<&str> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .collect()
}

fn model_json(m: &Model) -> String {
    m.to_json()
}

fn formula_text(f: &Formula) -> String {
    if f.size() > PRINT_LIMIT {
        format!(
            "formula too large to print ({} nodes); profile:\n{}",
            f.size(),
            serde_json::to_string_pretty(&profile(f)).expect("profile serializes")
        )
    } else {
        f.to_string()
    }
}

fn model_text(m: &Model) -> String {
    let mut out = format!("mode {}\n", m.mode.name());
    for w in m.worlds() {
        let dom: Vec<&str> = m.domain(w).iter().map(|&d| m.individual_name(d)).collect();
        let succ: Vec<&str> = m.successors(w).iter().map(|&u| m.world_name(u)).collect();
        out += &format!(
            "{}: domain {{{}}} sees {{{}}}\n",
            m.world_name(w),
            dom.join(", "),
            succ.join(", ")
        );
        for (letter, tuples) in m.describe_world(w) {
            if !tuples.is_empty() {
                let ts: Vec<String> = tuples
                    .iter()
                    .map(|t| format!("({})", t.join(",")))
                    .collect();
                out += &format!("  {letter}: {}\n", ts.join(" "));
            }
        }
    }
    out
}

fn print_artifact(a: &Artifact, format: Format) -> Result<()> {
    match (a, format) {
        (Artifact::Formula(f), Format::Text) => out!("{}", formula_text(f)),
        (Artifact::Formula(f), Format::Json) => {
            let text = (f.size() <= PRINT_LIMIT).then(|| f.to_string());
            out!("{}", json!({ "formula": text, "profile": profile(f) }));
        }
        (Artifact::Model(m), Format::Text) => out!("{}", model_text(m).trim_end()),
        (Artifact::Model(m), Format::Json) => out!("{}", model_json(m)),
        (Artifact::Tiles(t), _) => out!("{}", serde_json::to_string_pretty(t)?),
    }
    Ok(())
}

fn world_of(m: &Model, s: &str) -> Result<usize> {
    if let Ok(w) = m.world_id(s) {
        return Ok(w);
    }
    match s.parse::<usize>() {
        Ok(w) if w < m.world_count() => Ok(w),
        _ => bail!("no world {s}"),
    }
}

fn outcome_json(o: &SearchOutcome) -> serde_json::Value {
    match o {
        SearchOutcome::Found {
            model,
            world,
            examined,
        } => json!({
            "verdict": "found",
            "world": model.world_name(*world),
            "examined": examined,
            "model": serde_json::from_str::<serde_json::Value>(&model_json(model)).expect("model JSON"),
        }),
        SearchOutcome::None { examined } => json!({ "verdict": "none", "examined": examined }),
        SearchOutcome::Budget { examined } => json!({ "verdict": "budget", "examined": examined }),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let fmt = cli.format;
    match cli.command {
        Command::Parse { input } => {
            let f = read_formula(&input)?;
            print_artifact(&Artifact::Formula(f), fmt)?;
        }
        Command::Print { input } => print_artifact(&Artifact::read(&read_input(&input)?)?, fmt)?,
        Command::Profile { input } => {
            let f = read_formula(&input)?;
            out!("{}", serde_json::to_string_pretty(&profile(&f))?);
        }
        Command::Eval {
            model,
            formula,
            world,
            assign,
        } => {
            let m = read_model(&model)?;
            let f = read_formula(&formula)?;
            let w = world_of(&m, &world)?;
            let mut g = Assignment::new();
            for a in &assign {
                let (x, d) = a
                    .split_once('=')
                    .ok_or_else(|| anyhow!("assignment {a} is not x=a"))?;
                g.insert(Var::new(x.trim()), m.individual_id(d.trim())?);
            }
            let v = eval(&m, w, &g, &f)?;
            match fmt {
                Format::Text => out!("{v}"),
                Format::Json => out!("{}", json!({ "world": m.world_name(w), "value": v })),
            }
        }
        Command::Transform {
            pass,
            input,
            track,
            depth,
        } => {
            let mut p = Pipeline::new(parse_track(&track)?, depth, cli.trace);
            if pass.contains(',') || pass.contains('|') {
                bail!("transform applies one pass; use pipe for several");
            }
            let out = p.run(&[pass], Artifact::read(&read_input(&input)?)?)?;
            print_artifact(&out, fmt)?;
        }
        Command::Gadget {
            k,
            track,
            pivot,
            domain,
        } => {
            let g = build_gadget(k, parse_track(&track)?, &pivot, &list(&domain))?;
            match fmt {
                Format::Text => {
                    out!("{}", model_text(&g.model).trim_end());
                    out!("root {}", g.model.world_name(g.root));
                }
                Format::Json => out!("{}", model_json(&g.model)),
            }
        }
        Command::FrameF {
            depth,
            variant,
            domain,
            a,
            b,
        } => {
            let v = match variant.as_str() {
                "int" => FVariant::Int,
                "qfl" => FVariant::Qfl,
                o => bail!("unknown variant {o}; expected int or qfl"),
            };
            let fr = build_frame_f(depth, v)?;
            let m = a_suitable_f(&fr, &list(&domain), &a, &b)?;
            print_artifact(&Artifact::Model(m), fmt)?;
        }
        Command::EncodeTiling { tiles, variant } => {
            let v = match variant.as_str() {
                "int" => TilingVariant::Int,
                "visser" => TilingVariant::Visser,
                o => bail!("unknown variant {o}; expected int or visser"),
            };
            let enc = encode_tiling(&read_tiles(&tiles)?, v)?;
            match fmt {
                Format::Text => out!("{}", formula_text(&enc.phi)),
                Format::Json => {
                    let conjuncts: Vec<_> = enc
                        .conjuncts
                        .iter()
                        .map(|(l, f)| json!({ "label": l, "formula": f.to_string() }))
                        .collect();
                    out!(
                        "{}",
                        json!({
                            "letters": enc.letters,
                            "conjuncts": conjuncts,
                            "psi": enc.psi.to_string(),
                            "phi": enc.phi.to_string(),
                        })
                    );
                }
            }
        }
        Command::TileCheck { tiles, tiling } => {
            let t = read_tiles(&tiles)?;
            let tau: Tiling = serde_json::from_str(&read_input(&tiling)?).context("tiling JSON")?;
            let ok = check_tiling(&t, &tau)?;
            out!("{}", if ok { "valid" } else { "invalid" });
            if !ok {
                return Ok(ExitCode::from(1));
            }
        }
        Command::TileFind {
            tiles,
            width,
            height,
        } => {
            let t = read_tiles(&tiles)?;
            match find_periodic_tiling(&t, width, height, cli.budget) {
                Ok(Some(tau)) => out!("{}", serde_json::to_string(&tau)?),
                Ok(None) => out!("NONE"),
                Err(twovar_core::search::TilingError::Budget(_)) => out!("BUDGET"),
                Err(e) => return Err(e.into()),
            }
        }
        Command::Sat {
            formula,
            mode,
            worlds,
            domain,
            frame_class,
            constant,
            refute,
            engine,
        } => {
            let f = read_formula(&formula)?;
            let mode = Mode::parse(&mode).ok_or_else(|| anyhow!("unknown mode {mode}"))?;
            let frame_class = list(&frame_class)
                .into_iter()
                .map(|p| {
                    FrameProperty::parse(p).ok_or_else(|| anyhow!("unknown frame property {p}"))
                })
                .collect::<Result<Vec<_>>>()?;
            let outcome = match engine {
                Engine::Enumerate => {
                    let mut b = SearchBounds::new(mode, worlds, domain);
                    b.frame_class = frame_class;
                    b.constant_domains = constant;
                    b.budget = cli.budget;
                    let goal = if refute { Goal::Refute } else { Goal::Satisfy };
                    bounded_sat(&f, goal, &b)?
                }
                Engine::Ground => {
                    if mode != Mode::Modal {
                        bail!("the ground engine handles the modal mode only");
                    }
                    let target = if refute { Formula::neg(f) } else { f };
                    let b = GroundBounds {
                        worlds,
                        domain,
                        frame_class,
                        constant_domains: constant,
                    };
                    match ground_sat(&target, &b)? {
                        Some(model) => SearchOutcome::Found {
                            model,
                            world: 0,
                            examined: 1,
                        },
                        None => SearchOutcome::None { examined: 1 },
                    }
                }
            };
            match (fmt, &outcome) {
                (Format::Json, _) => out!("{}", outcome_json(&outcome)),
                (Format::Text, SearchOutcome::Found { model, world, .. }) => {
                    out!("found at {}", model.world_name(*world));
                    out!("{}", model_json(model));
                }
                (Format::Text, SearchOutcome::None { .. }) => out!("NONE"),
                (Format::Text, SearchOutcome::Budget { .. }) => out!("BUDGET"),
            }
        }
        Command::Verify {
            suites,
            n,
            size_cap,
        } => {
            let names: Vec<String> = if suites.iter().any(|s| s == "all") {
                SUITES.iter().map(|s| s.to_string()).collect()
            } else {
                suites
            };
            let params = SuiteParams {
                n,
                size_cap,
                seed: cli.seed,
                budget: cli.budget,
            };
            let mut failed = false;
            let mut reports = Vec::new();
            for name in &names {
                let r = run_suite(name, &params)?;
                eprintln!(
                    "{} {}: {} cases, {} checks, {} failures, {} ms",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.suite,
                    r.cases,
                    r.checks,
                    r.failures.len(),
                    r.wall_ms
                );
                failed |= !r.passed();
                reports.push(r);
            }
            out!("{}", serde_json::to_string_pretty(&reports)?);
            if failed {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Pipe {
            passes,
            input,
            track,
            depth,
        } => {
            let mut p = Pipeline::new(parse_track(&track)?, depth, cli.trace);
            let input = Artifact::read(&read_input(&input)?)?;
            let out = p.run(&split_passes(&passes), input)?;
            print_artifact(&out, fmt)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
