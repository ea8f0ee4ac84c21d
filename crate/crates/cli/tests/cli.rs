use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::time::Duration;

use serde_json::Value;

use qmoves_core::control::{encode_play, PlayRecord};
use qmoves_core::level::{
    builtin_level, reference_path, serialize_level, write_path_csv, PreparedLevel,
};

fn qmoves(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmoves"))
        .args(args)
        .env_remove("QM_DATA_DIR")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_reference(dir: &Path, id: &str) -> String {
    let p = dir.join(format!("{id}.csv"));
    std::fs::write(&p, write_path_csv(&reference_path(id).unwrap())).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn scores_a_reference_from_a_level_file() {
    let dir = tempfile::tempdir().unwrap();
    let level = dir.path().join("t1.qmlevel");
    std::fs::write(
        &level,
        serialize_level(&builtin_level("tutorial_1").unwrap()),
    )
    .unwrap();
    let play = write_reference(dir.path(), "tutorial_1");
    let report = json(&qmoves(&["score", level.to_str().unwrap(), &play]));
    assert!(report["stars"].as_u64().unwrap() >= 1);
    let direct = PreparedLevel::new(builtin_level("tutorial_1").unwrap())
        .unwrap()
        .score(&reference_path("tutorial_1").unwrap())
        .unwrap();
    assert_eq!(report["total_score"], direct.total_score);
}

#[test]
fn scores_a_binary_play_record() {
    let dir = tempfile::tempdir().unwrap();
    let path = reference_path("tutorial_2").unwrap();
    let score = PreparedLevel::new(builtin_level("tutorial_2").unwrap())
        .unwrap()
        .score(&path)
        .unwrap();
    let record = PlayRecord {
        level_id: "tutorial_2".into(),
        user_id: "u1".into(),
        timestamp_ms: 0,
        client_version: "x".into(),
        path,
        score: score.clone(),
    };
    let file = dir.path().join("p.qmplay");
    std::fs::write(&file, encode_play(&record)).unwrap();
    let report = json(&qmoves(&["score", "tutorial_2", file.to_str().unwrap()]));
    assert_eq!(report["total_score"], score.total_score);
}

#[test]
fn density_trace_has_one_row_per_sample_and_point() {
    let dir = tempfile::tempdir().unwrap();
    let play = write_reference(dir.path(), "tutorial_1");
    let trace = dir.path().join("density.csv");
    let report = json(&qmoves(&[
        "score",
        "tutorial_1",
        &play,
        "--density-trace",
        trace.to_str().unwrap(),
    ]));
    let samples = report["feedback_trace"].as_array().unwrap().len();
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,density"));
    assert_eq!(lines.count(), samples * 256);
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,x0,depth\n0,0.1,160\n0,0.2,160\n").unwrap();
    let out = qmoves(&["score", "tutorial_1", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert!(out.stdout.is_empty());

    let out = qmoves(&["score", "no_such_level", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = qmoves(&["score", "tutorial_1", "/nonexistent/play.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qmoves(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimize_is_deterministic_and_respects_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |tag: &str, budget: &str| {
        let trace = d.join(format!("{tag}.csv"));
        let best = d.join(format!("{tag}-best.csv"));
        let summary = json(&qmoves(&[
            "optimize",
            "two_basin",
            "--family",
            "stochastic",
            "--budget",
            budget,
            "--rng",
            "4",
            "--knots",
            "1",
            "--trace",
            trace.to_str().unwrap(),
            "--best",
            best.to_str().unwrap(),
        ]));
        (
            summary,
            std::fs::read_to_string(trace).unwrap(),
            std::fs::read_to_string(best).unwrap(),
        )
    };
    let a = run("a", "40");
    let b = run("b", "40");
    assert_eq!(a.1, b.1);
    assert_eq!(a.2, b.2);
    assert_eq!(a.1.lines().count(), 41);
    assert!(a.1.starts_with("eval_index,candidate_score,best_score\n"));
    assert_eq!(a.0["evaluations_used"], 40);

    // the best path file scores to the reported best
    let best = d.join("a-best.csv");
    let report = json(&qmoves(&["score", "two_basin", best.to_str().unwrap()]));
    assert_eq!(report["total_score"], a.0["best_score"]);

    let one = run("one", "1");
    assert_eq!(one.1.lines().count(), 2);
}

#[test]
fn hybrid_needs_seed_plays() {
    let out = qmoves(&[
        "optimize",
        "tutorial_1",
        "--family",
        "hybrid",
        "--budget",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed-play"));
    let out = qmoves(&[
        "optimize",
        "tutorial_1",
        "--family",
        "annealing",
        "--budget",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = qmoves(&[
        "optimize",
        "tutorial_1",
        "--family",
        "stochastic",
        "--budget",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hybrid_refines_a_seed_play() {
    let dir = tempfile::tempdir().unwrap();
    let seed = write_reference(dir.path(), "tutorial_1");
    let trace = dir.path().join("h.csv");
    let best = dir.path().join("h-best.csv");
    let summary = json(&qmoves(&[
        "optimize",
        "tutorial_1",
        "--family",
        "hybrid",
        "--budget",
        "6",
        "--knots",
        "4",
        "--seed-play",
        &seed,
        "--trace",
        trace.to_str().unwrap(),
        "--best",
        best.to_str().unwrap(),
    ]));
    assert_eq!(summary["seed"]["index"], 0);
    assert!(summary["best_stars"].as_u64().unwrap() >= 1);
}

#[test]
fn compare_reports_crossovers_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut ga = String::from("eval_index,candidate_score,best_score\n");
    for n in 1..=150 {
        let s = (10 * n).min(1000);
        ga.push_str(&format!("{n},{s},{s}\n"));
    }
    std::fs::write(d.join("ga.csv"), ga).unwrap();
    std::fs::write(
        d.join("flat.csv"),
        "eval_index,candidate_score,best_score\n1,100,100\n2,50,100\n",
    )
    .unwrap();
    let mut players = String::from("user_id,level_id,score\n");
    let mut plays = vec![300, 600, 800, 880, 900, 870];
    plays.extend(std::iter::repeat_n(895, 194));
    for s in plays {
        players.push_str(&format!("p1,tutorial_1,{s}\n"));
    }
    std::fs::write(d.join("players.csv"), players).unwrap();
    let table = d.join("table.csv");
    let report = json(&qmoves(&[
        "compare",
        "--runs",
        d.join("ga.csv").to_str().unwrap(),
        d.join("flat.csv").to_str().unwrap(),
        "--players",
        d.join("players.csv").to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
    ]));
    assert_eq!(report["run_labels"], serde_json::json!(["ga", "flat"]));
    assert_eq!(report["crossovers"][0]["index"], 90);
    assert_eq!(report["crossovers"][1]["index"], Value::Null);
    assert_eq!(report["evaluations"], 200);
    let text = std::fs::read_to_string(table).unwrap();
    assert_eq!(text.lines().next(), Some("n,ga,flat,p1"));
    assert_eq!(text.lines().count(), 201);

    std::fs::write(
        d.join("gap.csv"),
        "eval_index,candidate_score,best_score\n1,1,1\n3,1,1\n",
    )
    .unwrap();
    let out = qmoves(&[
        "compare",
        "--runs",
        d.join("gap.csv").to_str().unwrap(),
        "--players",
        d.join("players.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn metrics_of_an_empty_dir_are_zero() {
    let dir = tempfile::tempdir().unwrap();
    let m = json(&qmoves(&[
        "metrics",
        "--data-dir",
        dir.path().to_str().unwrap(),
    ]));
    assert_eq!(m["registrants"], 0);
    assert_eq!(m["tutorial_completion_rate"], 0.0);
    let out = Command::new(env!("CARGO_BIN_EXE_qmoves"))
        .arg("metrics")
        .env("QM_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(json(&out), m);
}

#[test]
fn metrics_output_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let svc = qmoves_service::GameService::open(dir.path(), 3).unwrap();
    for i in 0..5 {
        let u = svc
            .register_user(&format!("p{i}"), qmoves_service::Origin::ALL[i % 4])
            .unwrap();
        svc.submit_play(
            &u.user_id,
            "tutorial_1",
            reference_path("tutorial_1").unwrap(),
            "t",
        )
        .unwrap();
    }
    svc.sync().unwrap();
    let a = qmoves(&["metrics", "--data-dir", dir.path().to_str().unwrap()]);
    let b = qmoves(&["metrics", "--data-dir", dir.path().to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    let m = json(&a);
    assert_eq!(m["levels"][0]["completed"], 5);
}

#[cfg(unix)]
#[test]
fn serve_answers_and_flushes_on_sigterm() {
    use std::io::{Read, Write};

    let dir = tempfile::tempdir().unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_qmoves"))
        .args(["serve", "--addr", "127.0.0.1:0"])
        .env("QM_DATA_DIR", dir.path())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stderr = BufReader::new(child.stderr.take().unwrap());
    let mut line = String::new();
    stderr.read_line(&mut line).unwrap();
    let addr = line
        .split("http://")
        .nth(1)
        .and_then(|s| s.split('/').next())
        .unwrap()
        .to_string();

    let request = |method: &str, path: &str, body: &str| {
        let mut s = std::net::TcpStream::connect(&addr).unwrap();
        s.set_read_timeout(Some(Duration::from_secs(10))).unwrap();
        write!(
            s,
            "{method} {path} HTTP/1.1\r\nHost: x\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        let mut out = String::new();
        s.read_to_string(&mut out).unwrap();
        out
    };
    assert!(request("GET", "/v1/health", "").starts_with("HTTP/1.1 200"));
    assert!(request("POST", "/v1/users", r#"{"name":"kept"}"#).starts_with("HTTP/1.1 201"));

    let status = Command::new("kill")
        .args(["-TERM", &child.id().to_string()])
        .status()
        .unwrap();
    assert!(status.success());
    let code = child.wait().unwrap();
    assert_eq!(code.code(), Some(0));

    let svc = qmoves_service::GameService::open(dir.path(), 0).unwrap();
    assert_eq!(svc.users()[0].name, "kept");
}
