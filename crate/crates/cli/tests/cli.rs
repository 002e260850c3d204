// SPDX-License-Identifier: Apache-2.0

//! Golden-file tests for the command line. Each case runs the binary in
//! `tests/fixtures` and compares exit status, stdout and stderr with
//! `tests/golden/<name>.txt`. Set `RINGCIRC_BLESS=1` to rewrite the files.

use std::path::PathBuf;
use std::process::Command;

fn dir(sub: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join(sub)
}

fn scratch(name: &str) -> String {
    let d = std::env::temp_dir().join("ringcirc-cli-tests");
    std::fs::create_dir_all(&d).unwrap();
    d.join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ringcirc"));
    cmd.current_dir(dir("fixtures")).args(args).env_remove("RINGCIRC_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn golden(name: &str, args: &[&str]) {
    let (code, stdout, stderr) = run(args, &[]);
    let got = format!("exit: {code}\n--- stdout\n{stdout}--- stderr\n{stderr}");
    let path = dir("golden").join(format!("{name}.txt"));
    if std::env::var_os("RINGCIRC_BLESS").is_some() {
        std::fs::write(&path, &got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(got, want, "golden mismatch for {name}");
}

macro_rules! golden {
    ($($name:ident: [$($arg:expr),* $(,)?];)*) => {
        $(
            #[test]
            fn $name() {
                golden(stringify!($name), &[$($arg),*]);
            }
        )*
    };
}

golden! {
    // Tables and plain results.
    seq_d_8_1_2: ["seq-d", "--n", "8", "--c", "1", "--i", "2"];
    countdown_5_444: ["countdown", "--base", "5", "--start", "444"];
    eval_circuit_less: ["eval-circuit", "--circuit", "less.json", "1", "2"];
    eval_circuit_adjoined: ["eval-circuit", "--circuit", "mul_j2.json", "(1,2)", "(3,-4)"];
    eval_formula_file: ["eval-formula", "--formula", "heavy_edge.sexp", "--structure", "graph.json"];
    eval_formula_inline: ["eval-formula", "--formula", "(forall x (= x x))", "--structure", "graph.json"];

    // Command line errors.
    err_missing_argument: ["eval-circuit", "1", "2"];
    err_unknown_subcommand: ["evaluate"];
    err_bad_sizes: ["roundtrip", "--formula", "true", "--sizes", "3..x"];
    err_zero_size: ["roundtrip", "--formula", "true", "--sizes", "0,2"];
    err_bad_digits: ["countdown", "--base", "5", "--start", "4a4"];
    err_compile_without_size: ["compile", "--formula", "(forall x (= x x))"];
    err_compile_size_mismatch: ["compile", "--formula", "true", "--structure", "graph.json", "--size", "4"];
    err_lower_wrong_source: ["lower", "--circuit", "less.json", "--from", "Q", "--to", "Z"];

    // File errors.
    err_missing_file: ["eval-circuit", "--circuit", "absent.json"];
    err_missing_formula_file: ["eval-formula", "--formula", "absent.sexp", "--structure", "graph.json"];
    err_truncated_circuit: ["export-dot", "--circuit", "truncated.json"];
    err_truncated_structure: ["eval-formula", "--formula", "true", "--structure", "truncated.json"];
    err_unwritable_output: ["balance", "--circuit", "less.json", "--out", "no/such/dir/out.json"];

    // Module errors.
    err_cyclic_circuit: ["balance", "--circuit", "cyclic.json"];
    err_bad_input_value: ["eval-circuit", "--circuit", "less.json", "1", "x"];
    err_input_count: ["eval-circuit", "--circuit", "less.json", "1"];
    err_syntax: ["eval-formula", "--formula", "(forall x (= x x)", "--structure", "graph.json"];
    err_syntax_position: ["eval-formula", "--formula", "(and true\n  (sum (x) 1))", "--structure", "graph.json"];
    err_unknown_symbol: ["eval-formula", "--formula", "(exists x (< 0 (v x)))", "--structure", "graph.json"];
    err_non_well_founded: ["eval-formula", "--formula", "self_loop.sexp", "--structure", "graph.json"];
    err_depth_cap: ["eval-formula", "--formula", "(gfr f () (y) () (sum (z) (or (and (half<= (z) (y)) (<lex (z) (y)))) (+ 1 (f z))) (forall x (= (f x) 0)))", "--structure", "graph.json", "--depth-cap", "0"];
    err_unknown_domain: ["compile", "--formula", "true", "--size", "2", "--domain", "W"];
    err_skeleton_needs_structure: ["compile", "--formula", "(forall x (= (@ s x) x))", "--size", "2"];
    err_open_formula: ["compile", "--formula", "(= x x)", "--size", "2"];
    err_unguarded_recursion: ["compile", "--formula", "unguarded.sexp", "--size", "2"];
    err_not_normal_form: ["to-gfr", "--circuit", "less.json", "--cfac", "2", "--exp", "1"];
    err_normalize_parameters: ["normalize", "--circuit", "less.json", "--cfac", "1", "--exp", "1"];
    err_unsupported_lowering: ["lower", "--circuit", "less.json", "--from", "Z", "--to", "Q"];
    err_bad_map: ["check-sim", "--map", "z_to_q_map.json", "--src", "less.json", "--dst", "less.json"];
    err_map_domain_mismatch: ["check-sim", "--map", "j3_map.json", "--src", "mul_j2.json", "--dst", "less.json"];
    err_map_width_mismatch: ["check-sim", "--map", "j2_map.json", "--src", "mul_j2.json", "--dst", "less.json"];
    err_seq_d_range: ["seq-d", "--n", "2", "--c", "1", "--i", "1"];
    err_countdown_digit: ["countdown", "--base", "5", "--start", "454"];
}

const SEQ_812_TABLE: &str = "\
l\\i | 1 | 2
1 | 11 | 11
2 | 11 | 01
3 | 11 | 00
4 | 01 | 11
5 | 01 | 01
6 | 01 | 00
7 | 00 | 11
8 | 00 | 01
9 | 00 | 00
";

const COUNTDOWN_TABLE: &str = "\
444 244 144 044
442 242 142 042
441 241 141 041
440 240 140 040
424 224 124 024
422 222 122 022
421 221 121 021
420 220 120 020
414 214 114 014
412 212 112 012
411 211 111 011
410 210 110 010
404 204 104 004
402 202 102 002
401 201 101 001
400 200 100 000
";

#[test]
fn tables_are_byte_exact() {
    let (code, out, _) = run(&["seq-d", "--n", "8", "--c", "1", "--i", "2"], &[]);
    assert_eq!((code, out.as_str()), (0, SEQ_812_TABLE));
    let (code, out, err) = run(&["countdown", "--base", "5", "--start", "444"], &[]);
    assert_eq!((code, out.as_str(), err.as_str()), (0, COUNTDOWN_TABLE, "63 steps\n"));
}

#[test]
fn seq_d_8_2_2_rows() {
    let (_, out, _) = run(&["seq-d", "--n", "8", "--c", "2", "--i", "2"], &[]);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 36);
    assert_eq!(rows[0], "1 | 11111 | 11111");
    assert_eq!(rows[6], "7 | 01111 | 11111");
    assert_eq!(rows[35], "36 | 00000 | 00000");
}

#[test]
fn seeded_reports_are_reproducible() {
    let args = ["roundtrip", "--formula", "heavy_edge.sexp", "--sizes", "2..3", "--samples", "15"];
    let with_flag: Vec<&str> = args.iter().copied().chain(["--seed", "11"]).collect();
    let a = run(&with_flag, &[]);
    let b = run(&with_flag, &[]);
    let c = run(&args, &[("RINGCIRC_SEED", "11")]);
    assert_eq!(a.0, 0, "{}", a.2);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert!(a.1.contains("\"all_agree\": true"));
    assert!(a.1.contains("\"seed\": 11"));
}

#[test]
fn lowering_then_checking() {
    let lowered = scratch("mul_j2_lowered.json");
    let map = scratch("mul_j2_map.json");
    let (code, _, err) = run(
        &["lower", "--circuit", "mul_j2.json", "--from", "Z[j2]", "--to", "Z", "--out", &lowered, "--map-out", &map],
        &[],
    );
    assert_eq!(code, 0, "{err}");
    let report = scratch("mul_j2_report.json");
    let args = ["check-sim", "--map", &map, "--src", "mul_j2.json", "--dst", &lowered, "--samples", "50", "--report", &report];
    assert_eq!(run(&args, &[]).0, 0);
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"passes\": true"), "{text}");
    assert_eq!(run(&args, &[]).0, 0);
    assert_eq!(std::fs::read_to_string(&report).unwrap(), text);
}

#[test]
fn to_gfr_agrees_with_the_circuit() {
    let formula = scratch("less.sexp");
    let structure = scratch("less.structure.json");
    let (code, _, err) = run(
        &["to-gfr", "--circuit", "less.json", "--cfac", "2", "--exp", "1", "--normalize", "--formula-out", &formula,
          "--structure-out", &structure],
        &[],
    );
    assert_eq!(code, 0, "{err}");
    // f_element is zero everywhere: 0 < 0 is false.
    let (code, out, err) = run(&["eval-formula", "--formula", &formula, "--structure", &structure], &[]);
    assert_eq!((code, out.as_str()), (0, "false\n"), "{err}");
}

#[test]
fn compile_and_export() {
    let circuit = scratch("heavy_edge.json");
    let (code, out, err) = run(
        &["compile", "--formula", "heavy_edge.sexp", "--structure", "graph.json", "--out", &circuit],
        &[],
    );
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("\"universe\": 3"));
    let (code, dot, _) = run(&["export-dot", "--circuit", &circuit], &[]);
    assert_eq!(code, 0);
    assert!(dot.starts_with("digraph"));
    let balanced = scratch("heavy_edge_balanced.json");
    assert_eq!(run(&["balance", "--circuit", &circuit, "--out", &balanced], &[]).0, 0);
}
