use std::process::{Command, Output};

use serde_json::Value;

fn twovar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twovar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8")
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("JSON output")
}

const UNIFORM: &str = r#"{"tiles":[{"name":"u","left":"c","right":"c","up":"c","down":"c"}]}"#;

#[test]
fn parse_prints_canonical_form() {
    let o = twovar(&["parse", "forall x.(P1(x)->dia P2(x))"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "forall x. (P1(x) -> dia P2(x))");
}

#[test]
fn parse_error_exits_nonzero() {
    let o = twovar(&["parse", "forall x P(x)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn profile_reports_letters_and_variables() {
    let o = twovar(&["profile", "forall x. exists y. Q(x,y)"]);
    let v = json(&o);
    assert_eq!(v["letters"]["Q"]["arity"], 2);
    assert_eq!(v["closed"], true);
    assert_eq!(v["positive"], true);
}

#[test]
fn modal_pipe_yields_single_letter_formula() {
    let o = twovar(&[
        "--format",
        "json",
        "pipe",
        "prime,star,embed-e",
        "--input",
        "(forall x. ~P1(x)) & dia exists x. P2(x)",
    ]);
    assert!(o.status.success());
    let v = json(&o);
    let letters: Vec<&String> = v["profile"]["letters"]
        .as_object()
        .unwrap()
        .keys()
        .collect();
    assert_eq!(letters, ["P"]);
    assert_eq!(v["profile"]["variables"].as_array().unwrap().len(), 1);
}

#[test]
fn pipe_agrees_with_direct_embedding() {
    let src = "exists x. (P1(x) & dia ~P2(x))";
    let piped = twovar(&["pipe", "prime|star|embed-e", "--input", src]);
    let f = twovar_core::formula::parse(src).unwrap();
    let ctx = twovar_core::modal::ReductionContext::for_formula(&f, twovar_core::modal::Track::K)
        .unwrap();
    let direct = twovar_core::modal::embed_e(&f, &ctx).unwrap();
    assert_eq!(stdout(&piped).trim(), direct.to_string());
}

#[test]
fn empty_pipe_is_identity() {
    let o = twovar(&["pipe", "--input", "exists x. P1(x)"]);
    assert_eq!(stdout(&o).trim(), "exists x. P1(x)");
}

#[test]
fn pipe_rejects_type_mismatch() {
    let o = twovar(&["pipe", "star", "--input", UNIFORM]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("takes a formula"));
}

#[test]
fn tiling_pipeline_is_positive_two_variable_and_single_letter() {
    let o = twovar(&[
        "--format",
        "json",
        "pipe",
        "encode-tiling,eliminate-binary,eliminate-binary,expand-prop,star-int",
        "--input",
        UNIFORM,
    ]);
    assert!(o.status.success());
    let v = json(&o);
    let p = &v["profile"];
    assert_eq!(p["positive"], true);
    assert_eq!(p["closed"], true);
    assert!(p["variables"].as_array().unwrap().len() <= 2);
    let letters: Vec<&String> = p["letters"].as_object().unwrap().keys().collect();
    assert_eq!(letters, ["P"]);
}

#[test]
fn eval_respects_intuitionistic_negation() {
    let dir = std::env::temp_dir().join(format!("twovar-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.json");
    std::fs::write(
        &path,
        r#"{"mode":"intuitionistic","worlds":["w0","w1"],
            "relation":[["w0","w0"],["w0","w1"],["w1","w1"]],
            "domains":{"w0":["a"],"w1":["a"]},
            "interpretation":[{"world":"w1","letter":"P1","tuple":["a"]}]}"#,
    )
    .unwrap();
    let model = format!("@{}", path.display());
    let lem = twovar(&[
        "eval",
        "--model",
        &model,
        "forall x. (P1(x) | ~P1(x))",
        "--world",
        "w0",
    ]);
    assert_eq!(stdout(&lem).trim(), "false");
    let open = twovar(&[
        "eval", "--model", &model, "P1(x)", "--world", "w1", "--assign", "x=a",
    ]);
    assert_eq!(stdout(&open).trim(), "true");
}

#[test]
fn gadget_emits_a_valid_model() {
    let o = twovar(&["--format", "json", "gadget", "--k", "2", "--track", "GL"]);
    assert!(o.status.success());
    let m = twovar_core::kripke::Model::from_json(&stdout(&o)).unwrap();
    assert!(m.validate().is_empty());
    assert!(m.frame().is_transitive() && m.frame().is_irreflexive());
}

#[test]
fn frame_f_emits_a_hereditary_model() {
    let o = twovar(&["--format", "json", "frame-f", "--depth", "2"]);
    let m = twovar_core::kripke::Model::from_json(&stdout(&o)).unwrap();
    assert!(m.validate().is_empty());
}

#[test]
fn tile_find_and_check_round_trip() {
    let found = twovar(&["tile-find", UNIFORM, "--width", "1", "--height", "1"]);
    let tiling = stdout(&found);
    let ok = twovar(&["tile-check", UNIFORM, tiling.trim()]);
    assert!(ok.status.success());
    assert_eq!(stdout(&ok).trim(), "valid");
}

#[test]
fn tile_check_fails_on_mismatch() {
    let set = r#"{"tiles":[{"name":"u","left":"c","right":"d","up":"c","down":"c"}]}"#;
    let tiling = r#"{"width":1,"height":1,"torus":true,"cells":[["u"]]}"#;
    let o = twovar(&["tile-check", set, tiling]);
    assert_eq!(o.status.code(), Some(1));
    let none = twovar(&["tile-find", set, "--width", "2", "--height", "2"]);
    assert_eq!(stdout(&none).trim(), "NONE");
}

#[test]
fn encode_tiling_json_lists_conjuncts() {
    let o = twovar(&["--format", "json", "encode-tiling", UNIFORM]);
    let v = json(&o);
    let labels: Vec<&str> = v["conjuncts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["label"].as_str().unwrap())
        .collect();
    assert!(
        labels.contains(&"tile") && labels.contains(&"square"),
        "{labels:?}"
    );
    assert!(v["phi"].as_str().unwrap().contains("P_u"));
}

#[test]
fn sat_engines_agree_on_small_formulas() {
    for f in [
        "exists x. P1(x) & dia top",
        "(dia exists x. P1(x)) & box forall x. ~P1(x)",
    ] {
        let a = twovar(&[
            "--format", "json", "sat", f, "--worlds", "2", "--domain", "2",
        ]);
        let b = twovar(&[
            "--format", "json", "sat", f, "--worlds", "2", "--domain", "2", "--engine", "ground",
        ]);
        assert_eq!(json(&a)["verdict"], json(&b)["verdict"], "{f}");
    }
}

#[test]
fn sat_refutes_excluded_middle_intuitionistically() {
    let o = twovar(&[
        "sat",
        "forall x. (P1(x) | ~P1(x))",
        "--mode",
        "int",
        "--refute",
        "--worlds",
        "2",
    ]);
    assert!(stdout(&o).starts_with("found"));
}

#[test]
fn verify_reports_json_and_exit_code() {
    let o = twovar(&["verify", "lemma-2.2", "--n", "3"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v[0]["suite"], "lemma-2.2");
    assert_eq!(v[0]["failures"].as_array().unwrap().len(), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS lemma-2.2"));
}

#[test]
fn verify_unknown_suite_is_an_error() {
    let o = twovar(&["verify", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
}
