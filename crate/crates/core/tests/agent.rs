use bioforge::agent::{
    evaluate, refine, repair, retrieve, run_graph, run_graph_with, select_best, Action, AgentConfig, DesignState,
    EvaluationMode, Failure, Issue, RetrievalStore, RunOptions, Terminal,
};
use bioforge::dataset::base_library;
use bioforge::dsl::{format, parse};

fn store() -> RetrievalStore {
    RetrievalStore::base()
}

fn evaluated(prompt: &str, text: &str, store: &RetrievalStore) -> (DesignState, bioforge::agent::CritiqueReport) {
    let mut s = DesignState::new(prompt);
    s.execute(text.to_string());
    let c = evaluate(&s, store);
    (s, c)
}

#[test]
fn bases_score_high_against_their_own_captions() {
    let store = store();
    for b in base_library() {
        let (_, c) = evaluated(&b.caption, &b.text, &store);
        assert!(c.score >= 0.9, "{}: {:?}", b.id, c);
    }
}

#[test]
fn exec_fail_scores_zero() {
    let store = store();
    let (_, c) = evaluated("a helical structure", "design x { helical { plies 4 ", &store);
    assert_eq!(c.score, 0.0);
    assert!(c.has("EXEC_FAIL"));
    let (_, c) = evaluated(
        "a tubular structure",
        "design x {\n  tubular {\n    tubule_count 9\n    tubule_radius 1\n    spacing 1\n  }\n}\n",
        &store,
    );
    assert_eq!(c.score, 0.0);
}

#[test]
fn disjoint_parts_are_floating() {
    // Two stacked slabs touch; lifting the upper one leaves a gap.
    let mut s = DesignState::new("two slabs");
    let text = "design x {\n  slab {\n  }\n  slab {\n  }\n}\n";
    s.execute(text.into());
    let mut scene = s.scene.clone().unwrap();
    let shifted = scene.meshes[1].clone().translated(bioforge::geom::Vec3::new(0.0, 0.0, 5.0));
    scene.meshes[1] = shifted;
    s.report = Some(bioforge::validate::validate_scene(&scene));
    s.scene = Some(scene);
    let c = evaluate(&s, &store());
    assert!(c.has("FLOATING"), "{c:?}");
    assert!(c.score < 1.0);
}

#[test]
fn easy_prompt_is_accepted_immediately() {
    let s = run_graph("make a helical ply structure", &AgentConfig::default(), &store()).unwrap();
    assert_eq!(s.terminal, Terminal::Accepted);
    assert_eq!(s.history.len(), 1);
    assert_eq!(s.program.unwrap().blocks[0].kind, bioforge::dsl::BlockKind::Helical);
}

#[test]
fn unreachable_threshold_runs_to_the_cap() {
    let cfg = AgentConfig {
        accept_threshold: 1.01,
        ..AgentConfig::default()
    };
    let s = run_graph("a voronoi foam", &cfg, &store()).unwrap();
    assert_eq!(s.terminal, Terminal::MaxIters);
    assert_eq!(s.history.len(), 5);
    assert_eq!(s.iteration, 4);
    let iters: Vec<usize> = s.history.iter().map(|h| h.iteration).collect();
    assert_eq!(iters, vec![0, 1, 2, 3, 4]);
}

#[test]
fn injected_fault_takes_the_repair_edge() {
    let good = format(&parse(&base_library()[0].text).unwrap());
    let broken = good.replacen("  helical {", "  helicle {", 1);
    assert_ne!(broken, good);
    let opts = RunOptions {
        initial_program: Some(broken),
        ..RunOptions::default()
    };
    let s = run_graph_with("a helical twisted ply structure", &AgentConfig::default(), &store(), &opts).unwrap();
    assert!(s.history[0].critique.has("EXEC_FAIL"));
    assert_eq!(s.history[1].action, Action::Repair);
    assert_eq!(s.terminal, Terminal::Accepted);
}

#[test]
fn budget_exhausted_while_broken_is_unrecoverable() {
    let opts = RunOptions {
        initial_program: Some("design x { slab { } } }".into()),
        ..RunOptions::default()
    };
    let s = run_graph_with("a flat slab", &AgentConfig::default(), &store(), &opts).unwrap();
    assert_eq!(s.terminal, Terminal::Accepted, "stray brace is deleted");

    let opts = RunOptions {
        initial_program: Some("\"".into()),
        ..RunOptions::default()
    };
    let cfg = AgentConfig {
        max_iterations: 1,
        ..AgentConfig::default()
    };
    let s = run_graph_with("a flat slab", &cfg, &store(), &opts).unwrap();
    assert_eq!(s.history.len(), 2);
    assert_eq!(s.terminal, Terminal::Unrecoverable);
}

#[test]
fn thin_shell_prompt_shrinks_the_shell_each_iteration() {
    let s = run_graph(
        "a cellular sandwich structure with thin shell layers",
        &AgentConfig::default(),
        &store(),
    )
    .unwrap();
    let thickness: Vec<f64> = s
        .history
        .iter()
        .map(|h| {
            let p = parse(&h.program_text).unwrap();
            match p.blocks[0].modifier("sandwich") {
                Some(bioforge::dsl::Modifier::Sandwich { thickness }) => *thickness,
                _ => panic!("sandwich modifier missing"),
            }
        })
        .collect();
    assert!(thickness.len() > 1, "{thickness:?}");
    assert!(thickness.windows(2).all(|w| w[1] < w[0]), "{thickness:?}");
    assert!(matches!(s.terminal, Terminal::Accepted | Terminal::MaxIters));
    println!("shell thickness per iteration: {thickness:?}");
}

#[test]
fn builtin_runs_are_reproducible() {
    let cfg = AgentConfig::default();
    for p in ["a tubular slab with 8 tubules", "thin shell cellular sandwich", "a chair"] {
        let a = run_graph(p, &cfg, &store()).unwrap();
        let b = run_graph(p, &cfg, &store()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}

#[test]
fn k_zero_generates_from_defaults() {
    let cfg = AgentConfig {
        k: 0,
        ..AgentConfig::default()
    };
    let s = run_graph("a helical structure", &cfg, &store()).unwrap();
    let p = parse(&s.history[0].program_text).unwrap();
    assert!(p.blocks[0].params.is_empty());
}

#[test]
fn artifacts_follow_the_run_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = AgentConfig {
        accept_threshold: 1.01,
        max_iterations: 1,
        ..AgentConfig::default()
    };
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        run_id: Some("t".into()),
        ..RunOptions::default()
    };
    let s = run_graph_with("a flat slab", &cfg, &store(), &opts).unwrap();
    let run = dir.path().join("run_t");
    for i in 0..2 {
        for f in ["program.bgs", "render_iso.ppm", "report.json", "critique.json"] {
            assert!(run.join(format!("iter_{i}")).join(f).is_file(), "iter_{i}/{f}");
        }
    }
    let fin: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("final.json")).unwrap()).unwrap();
    assert_eq!(fin["terminal"], "max_iters");
    assert_eq!(s.history[0].renders.len(), 1);
}

#[test]
fn helicle_is_repaired_to_helical() {
    let t = "design x {\n  helicle {\n  }\n}\n";
    let e = parse(t).unwrap_err();
    let r = repair(t, &Failure::Parse(e)).unwrap();
    assert_eq!(parse(&r).unwrap().blocks[0].kind, bioforge::dsl::BlockKind::Helical);
}

#[test]
fn refine_applies_param_mismatch() {
    let store = store();
    let (s, c) = evaluated(
        "a helical structure with 12 plies",
        "design x {\n  helical {\n    plies 8\n  }\n}\n",
        &store,
    );
    assert!(c
        .issues
        .iter()
        .any(|i| matches!(i, Issue::ParamMismatch { name, .. } if name == "plies")));
    let p = refine(s.program.as_ref().unwrap(), &c);
    assert_eq!(p.blocks[0].params["plies"].as_f64(), Some(12.0));
}

#[test]
fn mode_dominance_on_real_runs() {
    let store = store();
    let cfg = AgentConfig {
        accept_threshold: 0.95,
        ..AgentConfig::default()
    };
    for p in ["thin shell cellular sandwich", "a bookshelf", "a thick plate with 3 cubes", "tubules"] {
        let s = run_graph(p, &cfg, &store).unwrap();
        let any = select_best(&s, EvaluationMode::AnyStep).unwrap().critique.score;
        let fin = select_best(&s, EvaluationMode::FinalRender).unwrap().critique.score;
        assert!(any >= fin);
    }
    assert_eq!(retrieve(&store, "x", 2).hits.len(), 2);
}
