use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_geoproof"));
    c.env_remove("GEO_CONFIG");
    c
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn with_stdin(mut c: Command, input: &str) -> Output {
    let mut child = c.stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn request(session: &str, action: &str) -> String {
    serde_json::json!({"session": session, "action": action}).to_string() + "\n"
}

const KITE: &str = "<build>a b c = triangle; d = reflect b a c; g = midpoint a c ? cong b g d g</build>";

#[test]
fn solve_writes_proof() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("proof.json");
    let o = bin().arg("solve").arg(root().join("fixtures/midsegment.geo")).arg("--proof-out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(doc["proof_length"].as_u64().unwrap() >= 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("proof length"));
}

#[test]
fn solve_exit_codes() {
    let o = bin().arg("solve").arg(fixture("false_goal.geo")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().arg("solve").arg(fixture("malformed.geo")).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed.geo"));
    let o = bin().arg("solve").arg(fixture("missing.geo")).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn golden_transcript_is_reproduced() {
    let input = std::fs::read_to_string(fixture("golden_session.in.jsonl")).unwrap();
    let want = std::fs::read_to_string(fixture("golden_session.out.jsonl")).unwrap();
    let mut c = bin();
    c.args(["session", "--seed", "7"]);
    let o = with_stdin(c, &input);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), want);
}

#[test]
fn session_survives_bad_lines() {
    let mut input = String::from("{not json\n");
    input += "{\"action\": \"<propose>coll a b c</propose>\"}\n";
    input += &request("s", "<propose>coll a b c</propose>");
    input += &request("s", KITE);
    input += &request("s", "<add>e = foot a b q</add>");
    input += &request("s", "<propose>cong b g d g</propose>");
    let mut c = bin();
    c.arg("session");
    let r = lines(&with_stdin(c, &input));
    assert_eq!(r.len(), 6);
    for i in [0, 1, 2, 4] {
        assert_eq!(r[i]["status"], "error", "{}", r[i]);
    }
    assert!(r[0]["session"].is_null());
    assert!(r[2]["detail"]["error"].as_str().unwrap().contains("<build>"));
    assert_eq!((r[3]["status"].as_str(), r[3]["turn"].as_u64()), (Some("ok"), Some(1)));
    assert_eq!(r[4]["turn"], 2);
    assert_eq!((r[5]["status"].as_str(), r[5]["turn"].as_u64()), (Some("not_proven"), Some(3)));
}

#[test]
fn turn_limit_ends_session() {
    let mut input = request("t", KITE);
    for _ in 0..4 {
        input += &request("t", "<propose>coll a g c</propose>");
    }
    let mut c = bin();
    c.args(["session", "--max-turns", "3"]);
    let r = lines(&with_stdin(c, &input));
    assert_eq!(r.len(), 4, "server stops after the refusal");
    assert_eq!(r[3]["status"], "error");
    assert!(r[3]["detail"]["error"].as_str().unwrap().contains("turn limit of 3"));
}

#[test]
fn sessions_are_independent() {
    let mut input = request("1", KITE);
    input += &request("2", "<build>a = free; b = free; c = on_circle a b ? eqangle b a b c c b c a</build>");
    input += &request("1", "<add>e = foot a b d</add>");
    input += &request("1", "<propose>cong b g d g</propose>");
    let mut c = bin();
    c.args(["session", "--keep-open"]);
    let r = lines(&with_stdin(c, &input));
    let by = |s: &str| r.iter().filter(|v| v["session"] == s).collect::<Vec<_>>();
    assert_eq!(by("2")[0]["status"], "session_solved");
    let one = by("1");
    assert_eq!(one.iter().map(|v| v["turn"].as_u64().unwrap()).collect::<Vec<_>>(), [1, 2, 3]);
    assert_eq!(one[2]["status"], "session_solved");
}

#[test]
fn passcheck_and_history() {
    let mut input = request("p", KITE);
    input += &request("p", "<propose>coll a g c</propose>");
    input += &request("p", "<propose>coll c g a</propose>");
    input += "{\"session\": \"p\", \"history\": true}\n";
    let mut c = bin();
    c.args(["session", "--passcheck"]);
    let r = lines(&with_stdin(c, &input));
    assert_eq!(r[2]["status"], "error");
    assert!(r[2]["detail"]["error"].as_str().unwrap().contains("repeated_action"));
    assert_eq!(r[2]["turn"], 2, "rejected turns never reach the engine");
    let h = &r[3]["history"];
    assert_eq!(h["summary_rows"].as_array().unwrap().len(), 1);
    assert_eq!(h["last_turn"]["action"], "<propose>coll a g c</propose>");
}

#[test]
fn checkpoints_resume_across_restarts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |input: &str| {
        let mut c = bin();
        c.args(["session", "--keep-open", "--checkpoint-dir"]).arg(dir.path());
        lines(&with_stdin(c, input))
    };
    let first = run(&(request("k", KITE) + &request("k", "<add>e = foot a b d</add>")));
    assert_eq!(first[1]["turn"], 2);
    assert!(dir.path().join("k.json").exists());
    let second = run(&request("k", "<propose>cong b g d g</propose>"));
    assert_eq!((second[0]["status"].as_str(), second[0]["turn"].as_u64()), (Some("session_solved"), Some(3)));
}

fn synth(args: &[&str], dir: &Path) -> Output {
    bin().arg("synth").args(args).current_dir(dir).output().unwrap()
}

fn counter(stderr: &[u8], name: &str) -> usize {
    let s = String::from_utf8_lossy(stderr);
    let tail = &s[s.find(name).unwrap_or_else(|| panic!("no {name} in {s}")) + name.len()..];
    tail.trim_start().split(|c: char| !c.is_ascii_digit()).next().unwrap().parse().unwrap()
}

#[test]
fn synth_writes_items_and_uses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--kappa", "6", "--count", "4", "--cache", "cache.jsonl", "--out", "items.jsonl"];
    let o = synth(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let items = std::fs::read_to_string(dir.path().join("items.jsonl")).unwrap();
    assert_eq!(items.lines().count(), 4);
    for l in items.lines() {
        let v: Value = serde_json::from_str(l).unwrap();
        let n = v["proof_len"].as_u64().unwrap();
        assert!((4..=8).contains(&n), "{l}");
    }
    let cold = counter(&o.stderr, "generated");
    assert!(cold > 0);
    let o = synth(&args, dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(counter(&o.stderr, "generated") < cold);
    assert_eq!(counter(&o.stderr, "cache hits"), 4);
    assert_eq!(std::fs::read_to_string(dir.path().join("items.jsonl")).unwrap(), items);
}

#[test]
fn synth_output_ignores_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let one = synth(&["--kappa", "6", "--count", "2", "--seed", "3"], dir.path());
    let two = synth(&["--kappa", "6", "--count", "2", "--seed", "3", "--jobs", "2"], dir.path());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn synth_shortfall_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = synth(&["--kappa", "40", "--count", "2", "--max-sample", "16"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("shortfall 2"));
    let o = synth(&["--kappa", "6", "--count", "2", "--tolerance", "0"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn curriculum_trace_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let o = bin()
        .args(["curriculum", "--policy", "logistic", "--rounds", "3", "--batch", "4", "--alpha", "0", "--trace"])
        .arg(&trace)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<Value> = std::fs::read_to_string(&trace).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 3);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r["round"], i);
        assert_eq!(r["kappa"], 6.0);
        assert_eq!(r["items"], 4);
        assert!(r["mean_reward"].is_f64() && r["mean_abs_adv"].is_f64());
    }
    let o = bin().args(["curriculum", "--policy", "greedy", "--rounds", "1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown policy"));
}

#[test]
fn config_file_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("geo.toml");
    std::fs::write(&cfg, "passcheck.max_thinking = 10\n").unwrap();
    let o = bin().env("GEO_CONFIG", &cfg).arg("solve").arg(root().join("fixtures/midsegment.geo")).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("passcheck.max_thinking"));

    std::fs::write(&cfg, "passcheck.max_same_kind = 1\nsession.max_turns = 2\n").unwrap();
    let input = request("c", KITE) + &request("c", "<add>e = foot a b d</add>") + &request("c", "<add>f = midpoint a b</add>");
    let mut c = bin();
    c.env("GEO_CONFIG", &cfg).args(["session", "--passcheck", "--keep-open"]);
    let r = lines(&with_stdin(c, &input));
    assert_eq!(r[1]["status"], "ok");
    assert!(r[2]["detail"]["error"].as_str().unwrap().contains("kind_streak"), "{}", r[2]);
    // Flags override the file.
    let mut c = bin();
    c.env("GEO_CONFIG", &cfg).args(["session", "--max-turns", "5", "--keep-open"]);
    let r = lines(&with_stdin(c, &input));
    assert_eq!(r[2]["turn"], 3);
}
