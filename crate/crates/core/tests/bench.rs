use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use bioforge::adapter::AdapterConfig;
use bioforge::agent::{AgentConfig, EvaluationMode, RetrievalStore};
use bioforge::bench::{
    aggregate, generate_suite, run_benchmark, run_benchmark_with, summarize, BenchOptions, BenchmarkSuite, Difficulty,
    Runner,
};
use bioforge::par::Execution;

/// Every eighth prompt of the shipped suite; all difficulties appear.
fn sample() -> BenchmarkSuite {
    let s = BenchmarkSuite::shipped();
    BenchmarkSuite {
        name: "sample".into(),
        prompts: s.prompts.into_iter().step_by(8).collect(),
    }
}

/// Answers every request with the same reply text.
fn constant_server(reply: &'static str) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let payload = serde_json::json!({ "text": reply }).to_string();
            let mut out = stream;
            let _ = write!(
                out,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
        }
    });
    url
}

#[test]
fn shipped_suite_shape() {
    let s = BenchmarkSuite::shipped();
    assert_eq!(s.prompts.len(), 320);
    assert_eq!((s.count(Difficulty::Easy), s.count(Difficulty::Medium), s.count(Difficulty::Hard)), (56, 88, 176));
    assert!(s.prompts.iter().all(|p| p.text.starts_with("Write a BGS script to make a ")));
    assert_eq!(BenchmarkSuite::from_json(&s.to_json()).unwrap(), s);
}

#[test]
fn invalid_suites_are_rejected() {
    assert!(BenchmarkSuite::from_json(r#"{"name": "x", "prompts": []}"#).is_err());
    let dup = r#"{"name": "x", "prompts": [
        {"id": "a", "text": "t", "difficulty": "easy", "classes": []},
        {"id": "a", "text": "u", "difficulty": "hard", "classes": []}]}"#;
    assert!(BenchmarkSuite::from_json(dup).is_err());
    let bad = r#"{"name": "x", "prompts": [{"id": "a", "text": "t", "difficulty": "extreme", "classes": []}]}"#;
    assert!(BenchmarkSuite::from_json(bad).is_err());
}

#[test]
fn generator_is_seeded() {
    assert_eq!(generate_suite(3), generate_suite(3));
    assert_ne!(generate_suite(3), generate_suite(4));
}

#[test]
fn builtin_and_agent_runs_are_byte_identical_across_reruns() {
    let suite = sample();
    let store = RetrievalStore::base();
    let cfg = AgentConfig::default();
    for runner in [Runner::Builtin, Runner::Agent] {
        let a = run_benchmark(&suite, runner, &cfg, &store);
        let b = run_benchmark(&suite, runner, &cfg, &store);
        assert_eq!(summarize(&a).1, summarize(&b).1);
    }
}

#[test]
fn serial_matches_parallel() {
    let suite = sample();
    let store = RetrievalStore::base();
    let cfg = AgentConfig::default();
    let opts = |exec| BenchOptions {
        exec,
        ..BenchOptions::default()
    };
    let s = run_benchmark_with(&suite, Runner::Agent, &cfg, &store, &opts(Execution::Serial));
    let p = run_benchmark_with(&suite, Runner::Agent, &cfg, &store, &opts(Execution::Parallel));
    assert_eq!(s, p);
}

#[test]
fn removing_a_prompt_changes_only_its_row() {
    let suite = sample();
    let store = RetrievalStore::base();
    let cfg = AgentConfig::default();
    let full = run_benchmark(&suite, Runner::Agent, &cfg, &store);
    let mut fewer = suite.clone();
    let removed = fewer.prompts.remove(3);
    let part = run_benchmark(&fewer, Runner::Agent, &cfg, &store);
    let kept: Vec<_> = full.rows.iter().filter(|r| r.id != removed.id).cloned().collect();
    assert_eq!(kept, part.rows);
    assert_eq!(part.aggregates, aggregate(&part.rows));
}

#[test]
fn agent_dominates_single_pass_and_any_step_dominates_final() {
    let suite = sample();
    let store = RetrievalStore::base();
    let cfg = AgentConfig::default();
    let single = run_benchmark(&suite, Runner::Builtin, &cfg, &store);
    let any = run_benchmark(&suite, Runner::Agent, &cfg, &store);
    let fin_cfg = AgentConfig {
        evaluation_mode: EvaluationMode::FinalRender,
        ..cfg.clone()
    };
    let fin = run_benchmark(&suite, Runner::Agent, &fin_cfg, &store);
    for ((s, a), f) in single.rows.iter().zip(&any.rows).zip(&fin.rows) {
        assert!(a.score >= s.score, "{}: agent {} < single {}", a.id, a.score, s.score);
        assert!(a.score >= f.score, "{}: any {} < final {}", a.id, a.score, f.score);
        assert_eq!(a.iterations, f.iterations);
    }
    assert_eq!(single.aggregates.execution_rate, 1.0);
    assert!(any.aggregates.mean_score >= single.aggregates.mean_score);
}

#[test]
fn unparsable_remote_output_scores_zero() {
    let url = constant_server("I cannot help with that.");
    let suite = BenchmarkSuite {
        name: "bad".into(),
        prompts: sample().prompts.into_iter().take(5).collect(),
    };
    let opts = BenchOptions {
        adapter: AdapterConfig {
            endpoint: Some(url),
            ..AdapterConfig::default()
        },
        ..BenchOptions::default()
    };
    let r = run_benchmark_with(&suite, Runner::Remote, &AgentConfig::default(), &RetrievalStore::base(), &opts);
    assert_eq!(r.aggregates.execution_rate, 0.0);
    assert_eq!(r.aggregates.mean_score, 0.0);
    assert!(summarize(&r).0.contains("0.000"));
}

#[test]
fn summary_rows_reaggregate_to_the_table() {
    let r = run_benchmark(&sample(), Runner::Builtin, &AgentConfig::default(), &RetrievalStore::base());
    let (table, json) = summarize(&r);
    let back: serde_json::Value = serde_json::from_str(&json).unwrap();
    let rows = back["rows"].as_array().unwrap();
    let mean = rows.iter().map(|r| r["score"].as_f64().unwrap()).sum::<f64>() / rows.len() as f64;
    let line = table.lines().find(|l| l.starts_with("overall")).unwrap();
    let printed: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
    assert_eq!(format!("{mean:.3}"), format!("{printed:.3}"));
    let mut weighted = 0.0;
    for s in r.aggregates.by_difficulty.values() {
        weighted += s.mean_score * s.count as f64;
    }
    assert!((weighted / r.aggregates.count as f64 - r.aggregates.mean_score).abs() <= 1e-12);
}

#[test]
fn artifacts_use_prompt_directories() {
    let dir = tempfile::tempdir().unwrap();
    let suite = BenchmarkSuite {
        name: "art".into(),
        prompts: sample().prompts.into_iter().take(2).collect(),
    };
    let opts = BenchOptions {
        out_dir: Some(dir.path().to_path_buf()),
        ..BenchOptions::default()
    };
    run_benchmark_with(&suite, Runner::Agent, &AgentConfig::default(), &RetrievalStore::base(), &opts);
    for p in &suite.prompts {
        let run = dir.path().join("bench_art").join(&p.id).join("run_0");
        assert!(run.join("final.json").exists());
        assert!(run.join("iter_0/program.bgs").exists());
        assert!(run.join("iter_0/render_iso.ppm").exists());
    }
}
