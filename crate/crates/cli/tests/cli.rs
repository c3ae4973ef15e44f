use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::mpsc;
use std::thread;

use bioforge::adapter::{call_remote_generator, AdapterConfig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bioforge"));
    c.env_remove("BIOFORGE_ENDPOINT");
    c
}

fn base(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/bases").join(format!("{name}.bgs"))
}

fn run(c: &mut Command) -> Output {
    c.output().expect("binary runs")
}

/// Serves `replies` one per connection and forwards each request body.
fn echo_server(replies: Vec<String>) -> (String, mpsc::Receiver<serde_json::Value>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/generate", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for reply in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            tx.send(serde_json::from_slice(&body).unwrap()).ok();
            let payload = serde_json::json!({ "text": reply }).to_string();
            let mut out = stream;
            write!(
                out,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            )
            .unwrap();
        }
    });
    (url, rx)
}

#[test]
fn compile_writes_scene_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().arg("--out").arg(dir.path()).arg("compile").arg(base("cellular_foam")));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("cellular_foam");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["executed"], true);
    let stl = std::fs::read(out.join("scene.stl")).unwrap();
    let tris = u32::from_le_bytes(stl[80..84].try_into().unwrap()) as usize;
    assert_eq!(stl.len(), 84 + 50 * tris);
}

#[test]
fn render_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().arg("--out").arg(dir.path()).args(["render", "--view", "front"]).arg(base("helical_bouligand")));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ppm = std::fs::read(dir.path().join("helical_bouligand/render_front.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n1280 720\n255\n"));
    let o = run(bin().arg("--out").arg(dir.path()).arg("validate").arg(base("tubular_hoof")));
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["executed"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bgs");
    std::fs::write(&bad, "design x { helicle { } }\n").unwrap();
    let o = run(bin().arg("--out").arg(dir.path()).arg("compile").arg(&bad));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("helicle"));

    let o = run(bin().args(["compile", "--bogus"]));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    let o = run(bin().args(["agent", "--prompt", "x", "--max-iters", "0"]));
    assert_eq!(o.status.code(), Some(2));
    let o = run(bin().args(["agent", "--prompt", "x", "--runner", "remote"]));
    assert_eq!(o.status.code(), Some(2));

    let missing = dir.path().join("missing.bgs");
    let o = run(bin().arg("--out").arg(dir.path()).arg("validate").arg(&missing));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn agent_run_directory_is_capped() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().arg("--out").arg(dir.path()).args([
        "agent",
        "--prompt",
        "Write a BGS script to make a helicoidal structure with 12 plies",
        "--k",
        "2",
        "--max-iters",
        "4",
        "--threshold",
        "1.01",
    ]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let runs: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(runs.len(), 1);
    let iters = std::fs::read_dir(&runs[0])
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("iter_"))
        .count();
    assert_eq!(iters, 5);
    assert!(runs[0].join("final.json").exists());
}

#[test]
fn config_file_sections() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"agent": {"max_iterations": 1, "accept_threshold": 1.01}}"#).unwrap();
    let o = run(bin().arg("--out").arg(dir.path().join("o")).arg("--config").arg(&cfg).args(["agent", "--prompt", "a tubule array"]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("2 iteration(s)"));

    std::fs::write(&cfg, r#"{"agent": {"nonsense": 1}}"#).unwrap();
    let o = run(bin().arg("--config").arg(&cfg).args(["agent", "--prompt", "x"]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dataset_subcommand_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pipeline.json");
    std::fs::write(&cfg, r#"{"variants_per_query": 1, "queries_per_base": 1, "seed": 3}"#).unwrap();
    let out = dir.path().join("ds");
    let o = run(bin().arg("--out").arg(&out).arg("--config").arg(&cfg).arg("dataset"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = std::fs::read_to_string(out.join("dataset.jsonl")).unwrap();
    assert!(lines.lines().count() >= 12);
    assert!(out.join("stats.json").exists());
}

#[test]
fn bench_subcommand_on_a_small_suite() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.json");
    std::fs::write(
        &suite,
        r#"{"name": "mini", "prompts": [
            {"id": "a", "text": "Write a BGS script to make a voronoi foam", "difficulty": "easy", "classes": ["cellular"]},
            {"id": "b", "text": "Write a BGS script to make a tubule array with 9 tubules", "difficulty": "hard", "classes": ["tubular"]}
        ]}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = run(bin().arg("--out").arg(&out).args(["bench", "--runner", "agent", "--suite"]).arg(&suite));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("overall"));
    assert!(out.join("bench_mini/a/run_0/iter_0/program.bgs").exists());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("bench_mini_agent.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn echo_server_text_is_returned_verbatim() {
    let (url, rx) = echo_server(vec!["fixed reply".into()]);
    let cfg = AdapterConfig {
        endpoint: Some(url),
        ..AdapterConfig::default()
    };
    let context = vec!["one".to_string(), "two".to_string()];
    assert_eq!(call_remote_generator("make a foam", &context, &cfg).unwrap(), "fixed reply");
    let body = rx.recv().unwrap();
    assert_eq!(body["prompt"], "make a foam");
    assert_eq!(body["temperature"], 0.1);
    assert_eq!(body["context"].as_array().unwrap().len(), 2);
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    drop(listener);
    let cfg = AdapterConfig {
        endpoint: Some(url),
        max_retries: 1,
        backoff_ms: 1,
        ..AdapterConfig::default()
    };
    let err = call_remote_generator("p", &[], &cfg).unwrap_err();
    assert!(err.to_string().contains("2 attempt"), "{err}");
}

#[test]
fn remote_runner_uses_the_endpoint_from_the_environment() {
    let program = std::fs::read_to_string(base("cellular_foam")).unwrap();
    let (url, rx) = echo_server(vec![format!("Sure.\n```bgs\n{program}```\n")]);
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin()
        .env("BIOFORGE_ENDPOINT", &url)
        .arg("--out")
        .arg(dir.path())
        .args(["agent", "--runner", "remote", "--k", "2", "--prompt", "Write a BGS script to make a voronoi foam"]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let body = rx.recv().unwrap();
    assert_eq!(body["context"].as_array().unwrap().len(), 2);
    let run_dir = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    let got = std::fs::read_to_string(run_dir.join("iter_0/program.bgs")).unwrap();
    assert_eq!(got, program);
}

#[test]
fn remote_failure_falls_back_to_builtin() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    drop(listener);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"adapter": {"max_retries": 0, "timeout_secs": 2}}"#).unwrap();
    let o = run(bin()
        .env("BIOFORGE_ENDPOINT", &url)
        .arg("--out")
        .arg(dir.path().join("o"))
        .arg("--config")
        .arg(&cfg)
        .args(["agent", "--runner", "remote", "--prompt", "Write a BGS script to make a voronoi foam"]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run_dir = std::fs::read_dir(dir.path().join("o")).unwrap().next().unwrap().unwrap().path();
    let state: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run_dir.join("final.json")).unwrap()).unwrap();
    let warnings = state["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("builtin")), "{warnings:?}");
}
