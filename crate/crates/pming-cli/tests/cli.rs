//! End-to-end runs of the `pming` binary: golden outputs, exit codes,
//! the freeze/replay workflow, indexing and caching.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BINARY: &str = env!("CARGO_BIN_EXE_pming");

const GOLDEN_TABLE: &str = r#"{"M": 1000,
 "occurrence": {"a": 100, "b": 100, "c": 10},
 "cooccurrence": [
   {"a": "a", "b": "b", "count": 50},
   {"a": "a", "b": "c", "count": 10},
   {"a": "b", "b": "c", "count": 1}
 ]}"#;

// Every real below is hand-derived from the golden counts:
//   pmi(a,b) = ln 5, mu1 = ln 10, mu2 = 0.5,
//   pming(a,b) = 0.3 * (1 - ln5/ln10) = 0.090308998699194359.
const GOLDEN_SCORE_LINE: &str = concat!(
    r#"{"x":"a","y":"b","f_x":100,"f_y":100,"f_xy":50,"M":1000,"#,
    r#""pmi":1.60943791,"spread":0.0,"component_pmi":0.301029996,"component_spread":0.0,"#,
    r#""mu1":2.30258509,"mu2":0.5,"rho":0.3,"variant":"paper","#,
    r#""pming":0.0903089987,"flags":[]}"#,
);

fn write_golden_table(dir: &Path) -> PathBuf {
    let path = dir.join("golden.json");
    fs::write(&path, GOLDEN_TABLE).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    run_in(Path::new("."), args)
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BINARY)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn score_emits_the_golden_json_line() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let output = run(&[
        "score",
        "a",
        "b",
        "--terms",
        "a,b,c",
        "--table",
        table.to_str().unwrap(),
        "--rho",
        "0.3",
    ]);
    assert!(output.status.success());
    assert_eq!(stdout(&output), format!("{GOLDEN_SCORE_LINE}\n"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let args = [
        "score",
        "b",
        "c",
        "--terms",
        "a,b,c",
        "--table",
        table.to_str().unwrap(),
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn json_output_reparses_to_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    for args in [
        vec![
            "score",
            "b",
            "c",
            "--terms",
            "a,b,c",
            "--table",
            table.to_str().unwrap(),
        ],
        vec![
            "matrix",
            "--terms",
            "a,b,c",
            "--table",
            table.to_str().unwrap(),
        ],
        vec![
            "topk",
            "c",
            "--terms",
            "a,b,c",
            "--table",
            table.to_str().unwrap(),
        ],
    ] {
        let output = run(&args);
        assert!(output.status.success());
        let text = stdout(&output);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&value).unwrap(), text.trim_end());
    }
}

#[test]
fn matrix_tsv_is_the_golden_grid() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let output = run(&[
        "matrix",
        "--terms",
        "a,b,c",
        "--table",
        table.to_str().unwrap(),
        "--format",
        "tsv",
    ]);
    assert!(output.status.success());
    assert_eq!(
        stdout(&output),
        "a\tb\tc\n\
         0\t0.0903089987\t0.7\n\
         0.0903089987\t0\t1\n\
         0.7\t1\t0\n"
    );
}

#[test]
// The literal is mu1 = ln 10 rounded to the 9 significant digits the CLI emits.
#[allow(clippy::approx_constant)]
fn matrix_json_carries_the_normalization_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let output = run(&[
        "matrix",
        "--terms",
        "a,b,c",
        "--table",
        table.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(value["terms"], serde_json::json!(["a", "b", "c"]));
    assert_eq!(value["mu1"], serde_json::json!(2.30258509));
    assert_eq!(value["mu2"], serde_json::json!(0.5));
    assert_eq!(value["variant"], serde_json::json!("paper"));
    assert_eq!(value["values"][1][2], serde_json::json!(1.0));
}

#[test]
fn topk_ranks_ascending() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let output = run(&[
        "topk",
        "a",
        "-k",
        "10",
        "--terms",
        "a,b,c",
        "--table",
        table.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert_eq!(
        stdout(&output),
        "[{\"term\":\"b\",\"pming\":0.0903089987,\"flags\":[]},\
          {\"term\":\"c\",\"pming\":0.7,\"flags\":[]}]\n"
            .replace("  ", "")
    );
}

#[test]
fn counts_reports_pair_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let pair = run(&["counts", "a", "b", "--table", table.to_str().unwrap()]);
    assert!(pair.status.success());
    assert_eq!(
        stdout(&pair),
        "{\"x\":\"a\",\"y\":\"b\",\"f_x\":100,\"f_y\":100,\"f_xy\":50,\"M\":1000}\n"
    );
    let single = run(&["counts", "c", "--table", table.to_str().unwrap()]);
    assert_eq!(stdout(&single), "{\"x\":\"c\",\"f_x\":10,\"M\":1000}\n");
}

#[test]
fn missing_context_source_is_a_usage_error() {
    let output = run(&["score", "a", "b"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(!output.stderr.is_empty());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let output = run(&["score", "a", "b", "--bogus"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn terms_without_a_source_is_a_usage_error() {
    let output = run(&["score", "a", "b", "--terms", "a,b,c"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn conflicting_context_sources_are_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let output = run(&[
        "score",
        "a",
        "b",
        "--terms",
        "a,b,c",
        "--context",
        "whatever.json",
        "--table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn missing_table_file_is_a_data_error() {
    let output = run(&["counts", "a", "--table", "/nonexistent/golden.json"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn invalid_table_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"M": 1000, "occurrence": {"a": 2000}}"#).unwrap();
    let output = run(&["counts", "a", "--table", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("invalid count table"));
}

#[test]
fn degenerate_context_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.json");
    fs::write(
        &path,
        r#"{"M": 1000, "occurrence": {"a": 100, "b": 100}, "cooccurrence": []}"#,
    )
    .unwrap();
    let output = run(&[
        "score",
        "a",
        "b",
        "--terms",
        "a,b",
        "--table",
        path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn freeze_then_replay_is_byte_identical_and_offline() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let frozen = dir.path().join("ctx.json");
    let live = run(&[
        "score",
        "a",
        "b",
        "--terms",
        "a,b,c",
        "--table",
        table.to_str().unwrap(),
        "--freeze-context",
        frozen.to_str().unwrap(),
    ]);
    assert!(live.status.success());
    assert!(frozen.exists());

    // No provider flags at all: the frozen context must be enough.
    let replay = run(&["score", "a", "b", "--context", frozen.to_str().unwrap()]);
    assert!(replay.status.success());
    assert_eq!(live.stdout, replay.stdout);

    let matrix = run(&[
        "matrix",
        "--context",
        frozen.to_str().unwrap(),
        "--format",
        "tsv",
    ]);
    assert!(matrix.status.success());
    assert!(stdout(&matrix).starts_with("a\tb\tc\n"));
}

#[test]
fn frozen_context_rejects_out_of_context_pairs_without_provider() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let frozen = dir.path().join("ctx.json");
    run(&[
        "matrix",
        "--terms",
        "a,b,c",
        "--table",
        table.to_str().unwrap(),
        "--freeze-context",
        frozen.to_str().unwrap(),
    ]);
    let output = run(&["score", "a", "zebra", "--context", frozen.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn rho_override_on_a_frozen_context() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let frozen = dir.path().join("ctx.json");
    run(&[
        "score",
        "a",
        "b",
        "--terms",
        "a,b,c",
        "--table",
        table.to_str().unwrap(),
        "--freeze-context",
        frozen.to_str().unwrap(),
    ]);
    let output = run(&[
        "score",
        "a",
        "c",
        "--context",
        frozen.to_str().unwrap(),
        "--rho",
        "1.0",
    ]);
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(value["pming"], value["component_pmi"]);
    assert_eq!(value["rho"], serde_json::json!(1.0));
}

#[test]
fn variant_mismatch_on_a_frozen_context_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let frozen = dir.path().join("ctx.json");
    run(&[
        "score",
        "a",
        "b",
        "--terms",
        "a,b,c",
        "--table",
        table.to_str().unwrap(),
        "--freeze-context",
        frozen.to_str().unwrap(),
    ]);
    let output = run(&[
        "score",
        "a",
        "b",
        "--context",
        frozen.to_str().unwrap(),
        "--variant",
        "legacy",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn index_then_query_a_directory_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    fs::write(corpus.join("one.txt"), "cat dog").unwrap();
    fs::write(corpus.join("two.txt"), "cat").unwrap();
    fs::write(corpus.join("three.txt"), "dog bird").unwrap();
    let index_file = dir.path().join("corpus.idx");

    let built = run(&[
        "index",
        corpus.to_str().unwrap(),
        "-o",
        index_file.to_str().unwrap(),
    ]);
    assert!(built.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout(&built)).unwrap();
    assert_eq!(summary["documents"], serde_json::json!(3));

    let counts = run(&[
        "counts",
        "cat",
        "dog",
        "--index",
        index_file.to_str().unwrap(),
    ]);
    assert_eq!(
        stdout(&counts),
        "{\"x\":\"cat\",\"y\":\"dog\",\"f_x\":2,\"f_y\":2,\"f_xy\":1,\"M\":3}\n"
    );
}

#[test]
fn index_then_query_a_jsonl_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let jsonl = dir.path().join("docs.jsonl");
    fs::write(
        &jsonl,
        "{\"id\": \"1\", \"text\": \"cat dog\"}\n\
         {\"id\": \"2\", \"text\": \"cat\"}\n\
         {\"id\": \"3\", \"text\": \"dog bird\"}\n",
    )
    .unwrap();
    let index_file = dir.path().join("docs.idx");
    let built = run(&[
        "index",
        jsonl.to_str().unwrap(),
        "-o",
        index_file.to_str().unwrap(),
    ]);
    assert!(built.status.success());

    let counts = run(&["counts", "bird", "--index", index_file.to_str().unwrap()]);
    assert_eq!(stdout(&counts), "{\"x\":\"bird\",\"f_x\":1,\"M\":3}\n");
}

#[test]
fn cache_file_lands_at_pming_cache_and_answers_repeat_runs() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let cache_path = dir.path().join("counts-cache.json");

    let mut first = Command::new(BINARY);
    first
        .args([
            "counts",
            "a",
            "b",
            "--table",
            table.to_str().unwrap(),
            "--cache",
        ])
        .env("PMING_CACHE", &cache_path);
    let first = first.output().unwrap();
    assert!(first.status.success());
    assert!(cache_path.exists());

    let mut second = Command::new(BINARY);
    second
        .args([
            "counts",
            "a",
            "b",
            "--table",
            table.to_str().unwrap(),
            "--cache",
        ])
        .env("PMING_CACHE", &cache_path);
    let second = second.output().unwrap();
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn score_tsv_has_the_full_field_row() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let output = run(&[
        "score",
        "b",
        "c",
        "--terms",
        "a,b,c",
        "--table",
        table.to_str().unwrap(),
        "--format",
        "tsv",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x\ty\tf_x\tf_y\tf_xy\tM\tpmi\tspread\tcomponent_pmi\tcomponent_spread\t\
         mu1\tmu2\trho\tvariant\tpming\tflags"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("b\tc\t100\t10\t1\t1000\t"));
    assert!(row.ends_with("\tpaper\t1\t"));
}

#[test]
fn duplicate_terms_warn_but_proceed() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_golden_table(dir.path());
    let output = run(&[
        "score",
        "a",
        "b",
        "--terms",
        "a,a,b,c",
        "--table",
        table.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("duplicate term"));
}

#[test]
fn zero_cooccurrence_scores_with_sentinel_pmi() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sparse.json");
    fs::write(
        &path,
        r#"{"M": 1000,
            "occurrence": {"a": 100, "b": 100, "c": 10},
            "cooccurrence": [{"a": "a", "b": "b", "count": 50}]}"#,
    )
    .unwrap();
    let output = run(&[
        "score",
        "a",
        "c",
        "--terms",
        "a,b,c",
        "--table",
        path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(value["pmi"], serde_json::json!("-inf"));
    assert!(value["flags"]
        .as_array()
        .unwrap()
        .contains(&serde_json::json!("zero_cooccurrence")));
}
