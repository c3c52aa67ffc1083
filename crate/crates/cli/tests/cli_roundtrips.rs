//! End-to-end runs of the `bitext` binary against temporary files: output
//! formats, defaults, and the exit-code contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bitext_core::embed_io::{self, EmbeddingMatrix};
use tempfile::TempDir;

fn bitext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bitext"))
        .args(args)
        .env_remove("BITEXT_THREADS")
        .output()
        .expect("binary launches")
}

fn run_ok(args: &[&str]) -> Output {
    let out = bitext(args);
    assert!(
        out.status.success(),
        "bitext {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).expect("readable output")
}

fn write_matrix(path: &Path, data: Vec<f32>, dim: usize) {
    let m = EmbeddingMatrix::from_vec(data, dim).expect("well-shaped fixture");
    embed_io::write_embeddings(&m, path).expect("writable fixture");
}

/// Four orthonormal rows on each side, so the diagonal is the unique
/// perfect alignment.
fn identity_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let eye = vec![
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    ];
    let src = dir.join("src.emb");
    let tgt = dir.join("tgt.emb");
    write_matrix(&src, eye.clone(), 4);
    write_matrix(&tgt, eye, 4);
    (src, tgt)
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn mine_on_an_identity_fixture_recovers_the_diagonal() {
    let dir = TempDir::new().unwrap();
    let (src, tgt) = identity_fixture(dir.path());
    let out_path = dir.path().join("cand.tsv");
    let out = run_ok(&[
        "mine",
        "--src-emb", path_str(&src),
        "--tgt-emb", path_str(&tgt),
        "--dim", "4",
        "--margin", "absolute",
        "--retrieval", "fwd",
        "--output", path_str(&out_path),
    ]);
    assert_eq!(
        read(&out_path),
        "1.000000\t0\t0\n1.000000\t1\t1\n1.000000\t2\t2\n1.000000\t3\t3\n"
    );
    assert!(stderr(&out).contains("kept 4 pairs"), "summary: {}", stderr(&out));
}

#[test]
fn mine_top_n_caps_the_output_in_descending_score_order() {
    let dir = TempDir::new().unwrap();
    let fx = dir.path().join("fx");
    run_ok(&[
        "synth",
        "--pairs", "40",
        "--distractors", "6",
        "--dim", "8",
        "--noise", "0.5",
        "--hubs", "3",
        "--hub-strength", "0.8",
        "--seed", "21",
        "--out-dir", path_str(&fx),
    ]);
    let out_path = dir.path().join("cand.tsv");
    run_ok(&[
        "mine",
        "--src-emb", path_str(&fx.join("src.emb")),
        "--tgt-emb", path_str(&fx.join("tgt.emb")),
        "--dim", "8",
        "--retrieval", "max",
        "--top-n", "10",
        "--output", path_str(&out_path),
    ]);
    let body = read(&out_path);
    let scores: Vec<f64> = body
        .lines()
        .map(|l| l.split('\t').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(scores.len(), 10);
    assert!(scores.windows(2).all(|w| w[0] >= w[1]), "descending: {scores:?}");
}

#[test]
fn mine_with_an_impossible_threshold_writes_an_empty_file() {
    let dir = TempDir::new().unwrap();
    let (src, tgt) = identity_fixture(dir.path());
    let out_path = dir.path().join("cand.tsv");
    let out = run_ok(&[
        "mine",
        "--src-emb", path_str(&src),
        "--tgt-emb", path_str(&tgt),
        "--dim", "4",
        "--threshold", "1e9",
        "--output", path_str(&out_path),
    ]);
    assert_eq!(read(&out_path), "");
    assert!(stderr(&out).contains("kept 0 pairs"));
}

#[test]
fn eval_reports_the_hand_counted_rates() {
    let dir = TempDir::new().unwrap();
    let cand = dir.path().join("cand.tsv");
    let gold = dir.path().join("gold.tsv");
    fs::write(&cand, "0.900000\t0\t0\n0.800000\t1\t1\n0.700000\t2\t5\n").unwrap();
    fs::write(&gold, "0\t0\n1\t1\n2\t2\n3\t3\n").unwrap();
    let out = run_ok(&["eval", "--candidates", path_str(&cand), "--gold", path_str(&gold)]);
    let text = stdout(&out);
    for line in [
        "precision       0.666667",
        "recall          0.500000",
        "f1              0.571429",
        "threshold       -",
        "true positives  2",
        "predicted       3",
        "gold            4",
    ] {
        assert!(text.contains(line), "missing {line:?} in:\n{text}");
    }
}

#[test]
fn eval_machine_line_is_a_single_tab_separated_record() {
    let dir = TempDir::new().unwrap();
    let cand = dir.path().join("cand.tsv");
    let gold = dir.path().join("gold.tsv");
    fs::write(&cand, "0.900000\t0\t0\n0.800000\t1\t1\n0.700000\t2\t5\n").unwrap();
    fs::write(&gold, "0\t0\n1\t1\n2\t2\n3\t3\n").unwrap();
    let out = run_ok(&[
        "eval",
        "--candidates", path_str(&cand),
        "--gold", path_str(&gold),
        "--machine",
    ]);
    assert_eq!(stdout(&out), "0.666667\t0.500000\t0.571429\t-\t2\t3\t4\n");
}

#[test]
fn eval_optimize_threshold_finds_the_best_cut() {
    let dir = TempDir::new().unwrap();
    let cand = dir.path().join("cand.tsv");
    let gold = dir.path().join("gold.tsv");
    // Keeping the first two candidates is the best cut: P=1, R=2/3, F1=0.8.
    fs::write(&cand, "0.900000\t0\t0\n0.700000\t1\t1\n0.500000\t2\t9\n").unwrap();
    fs::write(&gold, "0\t0\n1\t1\n2\t2\n").unwrap();
    let out = run_ok(&[
        "eval",
        "--candidates", path_str(&cand),
        "--gold", path_str(&gold),
        "--optimize-threshold",
    ]);
    let text = stdout(&out);
    assert!(text.contains("threshold       0.700000"), "{text}");
    assert!(text.contains("f1              0.800000"), "{text}");
}

#[test]
fn eval_rejects_a_malformed_candidate_line_naming_its_number() {
    let dir = TempDir::new().unwrap();
    let cand = dir.path().join("cand.tsv");
    let gold = dir.path().join("gold.tsv");
    fs::write(&cand, "0.900000\t0\t0\nnot-a-score\t1\t1\n").unwrap();
    fs::write(&gold, "0\t0\n").unwrap();
    let out = bitext(&["eval", "--candidates", path_str(&cand), "--gold", path_str(&gold)]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains(":2:"), "line number missing: {}", stderr(&out));
}

#[test]
fn reconstruct_is_perfect_on_the_identity_fixture() {
    let dir = TempDir::new().unwrap();
    let (src, tgt) = identity_fixture(dir.path());
    let out = run_ok(&[
        "reconstruct",
        "--src-emb", path_str(&src),
        "--tgt-emb", path_str(&tgt),
        "--dim", "4",
    ]);
    assert_eq!(stdout(&out), "P@1\t1.000000\n");
}

#[test]
fn reconstruct_scores_zero_against_a_shifted_gold() {
    let dir = TempDir::new().unwrap();
    let (src, tgt) = identity_fixture(dir.path());
    let gold = dir.path().join("gold.tsv");
    fs::write(&gold, "0\t1\n1\t2\n2\t3\n3\t0\n").unwrap();
    let out = run_ok(&[
        "reconstruct",
        "--src-emb", path_str(&src),
        "--tgt-emb", path_str(&tgt),
        "--dim", "4",
        "--gold", path_str(&gold),
    ]);
    assert_eq!(stdout(&out), "P@1\t0.000000\n");
}

#[test]
fn score_gives_the_mutual_perfect_pair_a_ratio_of_one() {
    let dir = TempDir::new().unwrap();
    let src = dir.path().join("src.emb");
    let tgt = dir.path().join("tgt.emb");
    write_matrix(&src, vec![1.0, 0.0, 0.0, 0.0], 4);
    write_matrix(&tgt, vec![1.0, 0.0, 0.0, 0.0], 4);
    let out_path = dir.path().join("scores.tsv");
    run_ok(&[
        "score",
        "--src-emb", path_str(&src),
        "--tgt-emb", path_str(&tgt),
        "--dim", "4",
        "--k", "1",
        "--output", path_str(&out_path),
    ]);
    assert_eq!(read(&out_path), "1.000000\t0\t0\n");
}

#[test]
fn score_preserves_the_order_of_an_explicit_pair_list() {
    let dir = TempDir::new().unwrap();
    let (src, tgt) = identity_fixture(dir.path());
    let pairs = dir.path().join("pairs.tsv");
    // Deliberately unsorted, with a repeat.
    fs::write(&pairs, "3\t3\n0\t1\n0\t0\n3\t3\n").unwrap();
    let out_path = dir.path().join("scores.tsv");
    run_ok(&[
        "score",
        "--src-emb", path_str(&src),
        "--tgt-emb", path_str(&tgt),
        "--dim", "4",
        "--pairs", path_str(&pairs),
        "--margin", "absolute",
        "--output", path_str(&out_path),
    ]);
    assert_eq!(read(&out_path), "1.000000\t3\t3\n0.000000\t0\t1\n1.000000\t0\t0\n1.000000\t3\t3\n");
}

#[test]
fn filter_sorts_and_applies_threshold_and_top_n() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("scored.tsv");
    fs::write(&input, "0.500000\t0\t0\n0.900000\t1\t1\n0.700000\t2\t2\n").unwrap();
    let cut = dir.path().join("cut.tsv");
    run_ok(&[
        "filter",
        "--input", path_str(&input),
        "--threshold", "0.6",
        "--output", path_str(&cut),
    ]);
    assert_eq!(read(&cut), "0.900000\t1\t1\n0.700000\t2\t2\n");

    let top = dir.path().join("top.tsv");
    run_ok(&[
        "filter",
        "--input", path_str(&input),
        "--top-n", "1",
        "--output", path_str(&top),
    ]);
    assert_eq!(read(&top), "0.900000\t1\t1\n");
}

#[test]
fn filter_without_any_cut_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("scored.tsv");
    fs::write(&input, "0.500000\t0\t0\n").unwrap();
    let out = bitext(&[
        "filter",
        "--input", path_str(&input),
        "--output", path_str(&dir.path().join("out.tsv")),
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("threshold"), "{}", stderr(&out));
}

#[test]
fn synth_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let args = |out: &str| {
        [
            "synth",
            "--pairs", "25",
            "--distractors", "4",
            "--dim", "6",
            "--noise", "0.3",
            "--hubs", "2",
            "--hub-strength", "0.7",
            "--seed", "5",
            "--out-dir",
        ]
        .iter()
        .map(|s| s.to_string())
        .chain([out.to_string()])
        .collect::<Vec<_>>()
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out_dir in [&a, &b] {
        let argv = args(path_str(out_dir));
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        run_ok(&argv);
    }
    for name in ["src.emb", "tgt.emb", "src.txt", "tgt.txt", "gold.tsv"] {
        let lhs = fs::read(a.join(name)).unwrap();
        let rhs = fs::read(b.join(name)).unwrap();
        assert_eq!(lhs, rhs, "{name} differs between runs");
    }
}

#[test]
fn synth_gold_covers_exactly_the_planted_pairs() {
    let dir = TempDir::new().unwrap();
    let fx = dir.path().join("fx");
    run_ok(&[
        "synth",
        "--pairs", "7",
        "--distractors", "3",
        "--dim", "5",
        "--seed", "1",
        "--out-dir", path_str(&fx),
    ]);
    let gold: Vec<String> = read(&fx.join("gold.tsv")).lines().map(str::to_owned).collect();
    let want: Vec<String> = (0..7).map(|i| format!("{i}\t{i}")).collect();
    assert_eq!(gold, want);
    assert_eq!(read(&fx.join("src.txt")).lines().count(), 10);
}

#[test]
fn prefilter_stats_match_the_hand_enumerated_fixture() {
    let dir = TempDir::new().unwrap();
    let long_src: String = (0..81).map(|i| format!("w{i} ")).collect();
    let rows = [
        ("the cat sat on the mat", "die katze sass auf der matte", "de"),
        ("a quick brown fox jumps", "ein schneller brauner fuchs springt", "de"),
        ("rain falls in the north", "regen faellt im norden heute", "de"),
        ("we signed the agreement yesterday", "wir haben den vertrag gestern unterzeichnet", "de"),
        ("the cat sat on the mat", "die katze sass auf der matte", "de"),
        ("the cat sat here", "le chat est assis", "fr"),
        ("no", "nein gut ja", "de"),
        (long_src.trim_end(), "drei worte hier", "de"),
        ("alpha beta gamma delta", "alpha beta gamma epsilon", "de"),
        ("one two three", "eins zwei drei vier fuenf sechs sieben", "de"),
    ];
    let tsv: String = rows.iter().map(|(s, t, _)| format!("{s}\t{t}\n")).collect();
    let tags: String = rows.iter().map(|(_, _, lang)| format!("en\t{lang}\n")).collect();
    let input = dir.path().join("raw.tsv");
    let tag_file = dir.path().join("tags.tsv");
    fs::write(&input, &tsv).unwrap();
    fs::write(&tag_file, &tags).unwrap();

    let kept = dir.path().join("kept.tsv");
    let stats = dir.path().join("stats.tsv");
    run_ok(&[
        "prefilter",
        "--tsv", path_str(&input),
        "--langs", "en,de",
        "--tags", path_str(&tag_file),
        "--output", path_str(&kept),
        "--stats", path_str(&stats),
    ]);
    assert_eq!(read(&kept).lines().count(), 4);
    assert_eq!(
        read(&stats),
        "kept\t4\nduplicate\t1\nlang_mismatch\t1\ntoo_short\t1\ntoo_long\t1\noverlap\t1\nlength_ratio\t1\n"
    );
}

#[test]
fn prefilter_splits_parallel_files_in_lockstep() {
    let dir = TempDir::new().unwrap();
    let src_in = dir.path().join("raw.src");
    let tgt_in = dir.path().join("raw.tgt");
    fs::write(&src_in, "keep this line here\nno\nalso keep this one\n").unwrap();
    fs::write(&tgt_in, "garde cette ligne ici\nnon\ngarde aussi celle ci\n").unwrap();
    let src_out = dir.path().join("clean.src");
    let tgt_out = dir.path().join("clean.tgt");
    run_ok(&[
        "prefilter",
        "--src", path_str(&src_in),
        "--tgt", path_str(&tgt_in),
        "--out-src", path_str(&src_out),
        "--out-tgt", path_str(&tgt_out),
    ]);
    assert_eq!(read(&src_out), "keep this line here\nalso keep this one\n");
    assert_eq!(read(&tgt_out), "garde cette ligne ici\ngarde aussi celle ci\n");
}

#[test]
fn ids_flow_from_text_files_into_candidates_and_eval() {
    let dir = TempDir::new().unwrap();
    let (src, tgt) = identity_fixture(dir.path());
    let src_text = dir.path().join("src.txt");
    let tgt_text = dir.path().join("tgt.txt");
    fs::write(&src_text, "a0\tfirst\na1\tsecond\na2\tthird\na3\tfourth\n").unwrap();
    fs::write(&tgt_text, "b0\terste\nb1\tzweite\nb2\tdritte\nb3\tvierte\n").unwrap();

    let cand = dir.path().join("cand.tsv");
    run_ok(&[
        "mine",
        "--src-emb", path_str(&src),
        "--tgt-emb", path_str(&tgt),
        "--dim", "4",
        "--margin", "absolute",
        "--retrieval", "fwd",
        "--src-text", path_str(&src_text),
        "--tgt-text", path_str(&tgt_text),
        "--ids",
        "--output", path_str(&cand),
    ]);
    assert_eq!(
        read(&cand),
        "1.000000\ta0\tb0\n1.000000\ta1\tb1\n1.000000\ta2\tb2\n1.000000\ta3\tb3\n"
    );

    let gold = dir.path().join("gold.tsv");
    fs::write(&gold, "a0\tb0\na1\tb1\na2\tb2\na3\tb3\n").unwrap();
    let out = run_ok(&[
        "eval",
        "--candidates", path_str(&cand),
        "--gold", path_str(&gold),
        "--src-text", path_str(&src_text),
        "--tgt-text", path_str(&tgt_text),
        "--ids",
        "--machine",
    ]);
    assert_eq!(stdout(&out), "1.000000\t1.000000\t1.000000\t-\t4\t4\t4\n");
}

#[test]
fn usage_errors_exit_one_and_data_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let (src, tgt) = identity_fixture(dir.path());
    let out_arg = dir.path().join("out.tsv");

    // Unknown flag: usage.
    let out = bitext(&["mine", "--bogus"]);
    assert_eq!(exit_code(&out), 1);

    // Invalid k: usage.
    let out = bitext(&[
        "mine",
        "--src-emb", path_str(&src),
        "--tgt-emb", path_str(&tgt),
        "--dim", "4",
        "--k", "0",
        "--output", path_str(&out_arg),
    ]);
    assert_eq!(exit_code(&out), 1);

    // Missing input file: data.
    let out = bitext(&[
        "mine",
        "--src-emb", path_str(&dir.path().join("absent.emb")),
        "--tgt-emb", path_str(&tgt),
        "--dim", "4",
        "--output", path_str(&out_arg),
    ]);
    assert_eq!(exit_code(&out), 2);

    // Embedding file not divisible by the row size: data.
    let bad = dir.path().join("bad.emb");
    fs::write(&bad, [0u8; 10]).unwrap();
    let out = bitext(&[
        "mine",
        "--src-emb", path_str(&bad),
        "--tgt-emb", path_str(&tgt),
        "--dim", "4",
        "--output", path_str(&out_arg),
    ]);
    assert_eq!(exit_code(&out), 2);

    // Bad thread count from the environment: usage.
    let out = Command::new(env!("CARGO_BIN_EXE_bitext"))
        .args(["synth", "--pairs", "2", "--dim", "2", "--seed", "1", "--out-dir", path_str(&dir.path().join("fx"))])
        .env("BITEXT_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);

    // Help is not an error.
    let out = bitext(&["--help"]);
    assert_eq!(exit_code(&out), 0);
}
