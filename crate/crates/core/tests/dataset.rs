use bioforge::dataset::{
    base_library, build_dataset, build_dataset_with, embed_reasoning, general_library, strip_reasoning, Composition,
    DatasetRecord, PipelineConfig, RecordKind,
};
use bioforge::dsl::{parse, parse_intent, WordBanks};
use bioforge::par::Execution;

fn small(seed: u64) -> PipelineConfig {
    PipelineConfig {
        seed,
        variants_per_query: 2,
        queries_per_base: 1,
        ..PipelineConfig::default()
    }
}

#[test]
fn seed_changes_output_and_reruns_do_not() {
    let lib = base_library();
    let a = build_dataset(&small(1), &lib).unwrap();
    let b = build_dataset(&small(1), &lib).unwrap();
    let c = build_dataset(&small(2), &lib).unwrap();
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    assert_ne!(a.to_jsonl(), c.to_jsonl());
}

#[test]
fn serial_and_parallel_builds_agree() {
    let lib = base_library();
    let g = general_library();
    let s = build_dataset_with(&small(4), &lib, &g, Execution::Serial, None).unwrap();
    let p = build_dataset_with(&small(4), &lib, &g, Execution::Parallel, None).unwrap();
    assert_eq!(s.to_jsonl(), p.to_jsonl());
    assert_eq!(s.stats, p.stats);
}

#[test]
fn records_round_trip_through_jsonl() {
    let d = build_dataset(&small(5), &base_library()).unwrap();
    let text = d.to_jsonl();
    let back: Vec<DatasetRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(back, d.records);
    assert_eq!(text.lines().count(), d.stats.emitted);
    assert_eq!(d.stats.planned, d.stats.emitted + d.stats.failure_count());
}

#[test]
fn reasoning_responses_strip_to_their_program() {
    let d = build_dataset(&small(6), &base_library()).unwrap();
    let mut seen = 0;
    for r in d.records.iter().filter(|r| r.kind.is_reasoning()) {
        let program = parse(&strip_reasoning(&r.response)).unwrap();
        // Re-embedding the recovered program gives back the same response.
        assert_eq!(embed_reasoning(&program), r.response);
        seen += 1;
    }
    assert!(seen > 0);
}

#[test]
fn bio_instructions_name_their_class() {
    let banks = WordBanks::builtin();
    let d = build_dataset(&small(8), &base_library()).unwrap();
    for r in d.records.iter().filter(|r| r.kind.is_bio()) {
        let intent = parse_intent(&r.instruction, &banks);
        assert_eq!(intent.target_class.class(), Some(r.class), "{}", r.instruction);
    }
}

#[test]
fn composition_without_general_records() {
    let cfg = PipelineConfig {
        composition: Composition {
            bio: 0.5,
            bio_reasoning: 0.5,
            general: 0.0,
            general_reasoning: Some(0.0),
        },
        ..small(9)
    };
    let d = build_dataset(&cfg, &base_library()).unwrap();
    assert!(!d.records.is_empty());
    assert!(d.records.iter().all(|r| r.kind.is_bio()));
    let reasoning = d.records.iter().filter(|r| r.kind == RecordKind::BioReasoning).count() as f64;
    assert!((reasoning / d.records.len() as f64 - 0.5).abs() <= 0.05);
}

#[test]
fn bad_configs_are_rejected() {
    let lib = base_library();
    let cfg = PipelineConfig {
        variants_per_query: 0,
        ..PipelineConfig::default()
    };
    assert!(build_dataset(&cfg, &lib).is_err());
    let cfg = PipelineConfig {
        composition: Composition {
            bio: 0.9,
            bio_reasoning: 0.9,
            general: 0.0,
            general_reasoning: None,
        },
        ..PipelineConfig::default()
    };
    assert!(build_dataset(&cfg, &lib).is_err());
    assert!(build_dataset(&PipelineConfig::default(), &[]).is_err());
}

#[test]
fn write_and_save_renders() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        save_renders: true,
        variants_per_query: 1,
        ..small(10)
    };
    let lib: Vec<_> = base_library().into_iter().take(2).collect();
    let d = build_dataset_with(&cfg, &lib, &general_library(), Execution::default(), Some(dir.path())).unwrap();
    d.write(dir.path()).unwrap();
    for f in ["dataset.jsonl", "stats.json", "stats.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    for r in &d.records {
        let p = r.render_path.as_ref().expect("render path recorded");
        let bytes = std::fs::read(dir.path().join(p)).or_else(|_| std::fs::read(p)).unwrap();
        assert!(bytes.starts_with(b"P6\n1280 720\n255\n"));
    }
}
