//! Acceptance run: every criterion is checked against an oracle computed
//! here, and one PASS/FAIL line is printed per criterion.
//!
//! `cargo test --test acceptance -- --nocapture` shows the lines.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use bioforge::agent::{
    repair, retrieve, run_graph_with, select_best, AgentConfig, EvaluationMode, Failure, RetrievalStore, RunOptions,
    Terminal,
};
use bioforge::bench::{run_benchmark, BenchmarkSuite, Difficulty, Runner};
use bioforge::dataset::{
    base_library, build_dataset, generate_instruction, strip_reasoning, PipelineConfig, RecordKind,
};
use bioforge::dsl::lexer::tokenize;
use bioforge::dsl::{format, parse, parse_intent, DesignClass, WordBanks};
use bioforge::geom::helical::{ply_angles, HelicalParams};
use bioforge::geom::subdiv::catmull_clark;
use bioforge::geom::tubular::{build_tubular, TubularParams};
use bioforge::geom::voronoi::voronoi_partition;
use bioforge::geom::{compile_program, Aabb, Mesh, Vec3};
use bioforge::rng::Rng;
use bioforge::validate::{export_stl, import_stl, render_scene, stl_bytes, validate_scene, Camera, View};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---- mesh oracles ----

fn edge_set(m: &Mesh) -> HashSet<(usize, usize)> {
    let mut edges = HashSet::new();
    for f in &m.faces {
        for i in 0..f.len() {
            let (a, b) = (f[i], f[(i + 1) % f.len()]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    edges
}

/// Divergence-theorem volume over a fan triangulation of every face.
fn volume(m: &Mesh) -> f64 {
    let mut v = 0.0;
    for f in &m.faces {
        let p0 = m.vertices[f[0]];
        for i in 1..f.len() - 1 {
            let (p1, p2) = (m.vertices[f[i]], m.vertices[f[i + 1]]);
            v += p0.dot(p1.cross(p2)) / 6.0;
        }
    }
    v
}

/// Point-in-convex-polyhedron test from the face planes.
fn inside_convex(m: &Mesh, p: Vec3) -> bool {
    m.faces.iter().all(|f| {
        let mut n = Vec3::ZERO;
        for i in 0..f.len() {
            let (a, b) = (m.vertices[f[i]], m.vertices[f[(i + 1) % f.len()]]);
            n += a.cross(b);
        }
        n.dot(p - m.vertices[f[0]]) <= 1e-12 * n.length()
    })
}

fn regular_polygon_area(r: f64, n: usize) -> f64 {
    0.5 * n as f64 * r * r * (2.0 * std::f64::consts::PI / n as f64).sin()
}

// ---- criteria ----

fn c1_subdivision() -> Outcome {
    let cube = Mesh::unit_cube();
    let mut expect = (cube.vertices.len(), edge_set(&cube).len(), cube.faces.len());
    let mut sum_n: usize = cube.faces.iter().map(Vec::len).sum();
    for level in 1..=2u32 {
        let (v, e, f) = expect;
        expect = (v + e + f, 2 * e + sum_n, sum_n);
        sum_n = 4 * expect.2;
        let m = catmull_clark(&cube, level).map_err(|e| e.to_string())?;
        let got = (m.vertices.len(), edge_set(&m).len(), m.faces.len());
        check(got == expect, || format!("level {level}: got {got:?}, want {expect:?}"))?;
        check(m.faces.iter().all(|f| f.len() == 4), || format!("level {level}: non-quad face"))?;
        let euler = got.0 as i64 - got.1 as i64 + got.2 as i64;
        check(euler == 2, || format!("level {level}: Euler {euler}"))?;
        if level == 1 {
            check(got == (26, 48, 24), || format!("level 1 counts {got:?}"))?;
        }
    }
    Ok(format!("level 2 counts {expect:?}"))
}

fn c2_voronoi() -> Outcome {
    let domain = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(10.0, 8.0, 6.0));
    let domain_volume = 10.0 * 8.0 * 6.0;
    let (mut agree, mut total, mut worst_vol) = (0usize, 0usize, 0f64);
    for run in 0..20u64 {
        let mut rng = Rng::new(1000 + run);
        let n = 5 + rng.below(36) as usize;
        let seeds: Vec<Vec3> = (0..n)
            .map(|_| Vec3::new(rng.uniform(0.0, 10.0), rng.uniform(0.0, 8.0), rng.uniform(0.0, 6.0)))
            .collect();
        let cells = voronoi_partition(&seeds, &domain).map_err(|e| e.to_string())?;
        let vol: f64 = cells.iter().map(volume).sum();
        worst_vol = worst_vol.max((vol - domain_volume).abs() / domain_volume);
        for _ in 0..10_000 {
            let p = Vec3::new(rng.uniform(0.0, 10.0), rng.uniform(0.0, 8.0), rng.uniform(0.0, 6.0));
            let mut d: Vec<(f64, usize)> = seeds.iter().enumerate().map(|(i, s)| (s.distance(p), i)).collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0));
            if d[1].0 - d[0].0 < 1e-9 {
                continue;
            }
            total += 1;
            let containing = cells.iter().position(|c| inside_convex(c, p));
            if containing == Some(d[0].1) {
                agree += 1;
            }
        }
    }
    let rate = agree as f64 / total as f64;
    check(rate >= 0.999, || format!("nearest-seed agreement {rate:.5}"))?;
    check(worst_vol <= 1e-6, || format!("volume relative error {worst_vol:e}"))?;
    Ok(format!("agreement {rate:.5} over {total} samples, worst volume error {worst_vol:.1e}"))
}

fn c3_tubular() -> Outcome {
    let p = TubularParams {
        tubule_count: 4,
        tubule_radius: 1.0,
        spacing: 3.0,
        segments: 64,
        size_x: 10.0,
        size_y: 10.0,
        height: 4.0,
        ..TubularParams::default()
    };
    let g = build_tubular(&p).map_err(|e| e.to_string())?;
    let measured: f64 = g.meshes.iter().map(volume).sum();
    let hole = regular_polygon_area(1.0, 64);
    let analytic = 400.0 - 4.0 * 4.0 * hole;
    let rel = (measured - analytic).abs() / analytic;
    check(rel <= 0.005, || format!("volume {measured} vs {analytic}"))?;
    check((analytic - 349.82).abs() < 0.01, || format!("analytic value {analytic}"))?;
    let porosity = g.measured.get("porosity").copied().ok_or("porosity not measured")?;
    let expect = 4.0 * hole / 100.0;
    check((porosity - expect).abs() < 1e-9, || format!("porosity {porosity} vs {expect}"))?;
    let from_volume = 1.0 - measured / 400.0;
    check((porosity - from_volume).abs() < 1e-6, || format!("porosity {porosity} vs volume {from_volume}"))?;
    Ok(format!("volume {measured:.4} mm^3 (analytic {analytic:.4}, rel {rel:.1e}), porosity {porosity:.5}"))
}

fn c4_helical() -> Outcome {
    let p = HelicalParams {
        plies: 24,
        rotation_deg: 17.3,
        noise_deg: 0.0,
        ..HelicalParams::default()
    };
    let angles = ply_angles(&p, &mut Rng::new(5));
    for (i, a) in angles.iter().enumerate() {
        let want = i as f64 * 17.3;
        check(a.to_bits() == want.to_bits(), || format!("ply {i}: {a} != {want}"))?;
    }
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/bases/helical_noisy.bgs"))
        .map_err(|e| e.to_string())?;
    let series = || -> Result<Vec<u64>, String> {
        let scene = compile_program(&parse(&text).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        Ok(scene.blocks[0].series["ply_angles_deg"].iter().map(|x| x.to_bits()).collect())
    };
    let (a, b) = (series()?, series()?);
    check(a == b, || "noisy angle sequences differ".into())?;
    check(a.len() == 12, || format!("{} angles", a.len()))?;
    let noisy = a.iter().enumerate().any(|(i, x)| f64::from_bits(*x) != i as f64 * 15.0);
    check(noisy, || "noise had no effect".into())?;
    for (i, x) in a.iter().enumerate() {
        let d = (f64::from_bits(*x) - i as f64 * 15.0).abs();
        check(d <= 5.0, || format!("ply {i} off by {d}"))?;
    }
    Ok("exact angles without noise, bitwise-identical noisy sequence".into())
}

fn c5_validation() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bases = base_library();
    check(bases.len() == 12, || format!("{} bases", bases.len()))?;
    for b in &bases {
        let scene = compile_program(&b.program).map_err(|e| format!("{}: {e}", b.id))?;
        let report = validate_scene(&scene);
        check(report.executed && report.mesh_count >= 1, || format!("{}: no mesh", b.id))?;
        let img = render_scene(&scene, &Camera::new(View::Iso)).map_err(|e| e.to_string())?;
        check(img.width == 1280 && img.height == 720 && img.covered() > 0, || format!("{}: render", b.id))?;
        let tris = scene.triangle_count();
        check(stl_bytes(&scene).len() == 84 + 50 * tris, || format!("{}: STL size", b.id))?;
        let path = dir.path().join(format!("{}.stl", b.id));
        export_stl(&scene, &path).map_err(|e| e.to_string())?;
        let size = std::fs::metadata(&path).map_err(|e| e.to_string())?.len() as usize;
        check(size == 84 + 50 * tris, || format!("{}: file size {size}", b.id))?;
        let back = import_stl(&path).map_err(|e| e.to_string())?;
        check(back.len() == tris, || format!("{}: round trip {} != {tris}", b.id, back.len()))?;
    }
    Ok("12 bases compile, render at 1280x720 and round-trip through STL".into())
}

fn c6a_iteration_cap() -> Outcome {
    let cfg = AgentConfig {
        accept_threshold: 1.01,
        ..AgentConfig::default()
    };
    let store = RetrievalStore::base();
    let s = run_graph_with("Write a BGS script to make a helicoidal structure", &cfg, &store, &RunOptions::default())
        .map_err(|e| e.to_string())?;
    let iters: Vec<usize> = s.history.iter().map(|h| h.iteration).collect();
    check(iters == vec![0, 1, 2, 3, 4], || format!("iterations {iters:?}"))?;
    check(s.terminal == Terminal::MaxIters, || format!("terminal {:?}", s.terminal))?;
    Ok("1 initial + 4 refinement entries".into())
}

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789{}._\"-";

/// One random token-level corruption.
fn mutate(text: &str, rng: &mut Rng) -> Option<String> {
    let toks = tokenize(text).ok()?;
    let t = rng.pick(&toks);
    let tok = &text[t.offset..t.end()];
    let chars: Vec<char> = tok.chars().collect();
    let new: String = match rng.below(5) {
        0 => String::new(),
        1 => {
            let other = rng.pick(&toks);
            text[other.offset..other.end()].to_string()
        }
        2 => {
            let i = rng.below(chars.len() as u64) as usize;
            chars.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| *c).collect()
        }
        3 => {
            let i = rng.below(chars.len() as u64 + 1) as usize;
            let c = *rng.pick(ALPHABET) as char;
            let mut s: Vec<char> = chars.clone();
            s.insert(i, c);
            s.into_iter().collect()
        }
        _ => {
            if chars.len() < 2 {
                return None;
            }
            let i = rng.below(chars.len() as u64 - 1) as usize;
            let mut s = chars.clone();
            s.swap(i, i + 1);
            s.into_iter().collect()
        }
    };
    Some(format!("{}{}{}", &text[..t.offset], new, &text[t.end()..]))
}

fn failure_of(text: &str) -> Option<Failure> {
    match parse(text) {
        Err(e) => Some(Failure::Parse(e)),
        Ok(p) => compile_program(&p).err().map(Failure::Compile),
    }
}

fn c6b_mutation_repair() -> Outcome {
    let budget = AgentConfig::default().max_iterations;
    let (mut trials, mut repaired) = (0usize, 0usize);
    for (bi, b) in base_library().iter().enumerate() {
        let mut rng = Rng::derive(77, bi as u64);
        let mut done = 0;
        while done < 50 {
            let Some(bad) = mutate(&b.text, &mut rng) else { continue };
            // Only corruptions that actually break the program count.
            let Some(mut failure) = failure_of(&bad) else { continue };
            done += 1;
            trials += 1;
            let mut text = bad;
            for _ in 0..budget {
                let Ok(next) = repair(&text, &failure) else { break };
                text = next;
                match failure_of(&text) {
                    None => {
                        repaired += 1;
                        break;
                    }
                    Some(f) => failure = f,
                }
            }
        }
    }
    let rate = repaired as f64 / trials as f64;
    check(rate >= 0.9, || format!("repaired {repaired}/{trials}"))?;
    Ok(format!("repaired {repaired}/{trials} ({:.1}%)", 100.0 * rate))
}

fn c6c_mode_dominance() -> Outcome {
    let banks = WordBanks::builtin();
    let store = RetrievalStore::base();
    let mut rng = Rng::new(606);
    let mut changed = 0;
    for run in 0..200 {
        let class = *rng.pick(&DesignClass::ALL);
        let prompt = generate_instruction(class, &banks, &mut rng).text;
        let cfg = AgentConfig {
            k: rng.below(4) as usize,
            max_iterations: 1 + rng.below(4) as usize,
            accept_threshold: rng.uniform(0.8, 1.01),
            ..AgentConfig::default()
        };
        let s = run_graph_with(&prompt, &cfg, &store, &RunOptions::default()).map_err(|e| e.to_string())?;
        let any = select_best(&s, EvaluationMode::AnyStep).map_or(0.0, |e| e.critique.score);
        let fin = select_best(&s, EvaluationMode::FinalRender).map_or(0.0, |e| e.critique.score);
        let best = s.history.iter().map(|e| e.critique.score).fold(0.0, f64::max);
        check(any >= fin && any == best, || format!("run {run}: any_step {any} final {fin} best {best}"))?;
        if any > fin {
            changed += 1;
        }
    }
    Ok(format!("200/200 runs, any_step strictly better in {changed}"))
}

fn oracle_words(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase).collect()
}

fn oracle_cosine(a: &str, b: &str) -> f64 {
    let count = |s: &str| {
        let mut m: BTreeMap<String, f64> = BTreeMap::new();
        for w in oracle_words(s) {
            *m.entry(w).or_default() += 1.0;
        }
        m
    };
    let (x, y) = (count(a), count(b));
    let dot: f64 = x.iter().map(|(k, v)| v * y.get(k).unwrap_or(&0.0)).sum();
    let nx = x.values().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.values().map(|v| v * v).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        0.0
    } else {
        dot / (nx * ny)
    }
}

fn c7_retrieval() -> Outcome {
    check(AgentConfig::default().k == 2, || "default k is not 2".into())?;
    let store = RetrievalStore::base();
    check(store.len() == 12, || format!("store has {} entries", store.len()))?;
    let banks = WordBanks::builtin();
    let mut queries: Vec<String> = store.entries.iter().map(|e| e.caption.clone()).collect();
    for class in DesignClass::ALL {
        queries.extend(banks.phrases(class).iter().cloned());
    }
    queries.extend(["a tubular helical foam", "cells and plies", "nothing related at all"].map(String::from));
    let mut checked = 0;
    for q in &queries {
        let mut scored: Vec<(f64, usize)> =
            store.entries.iter().enumerate().map(|(i, e)| (oracle_cosine(q, &e.caption), i)).collect();
        scored.sort_by(|a, b| {
            if (a.0 - b.0).abs() < 1e-12 {
                a.1.cmp(&b.1)
            } else {
                b.0.total_cmp(&a.0)
            }
        });
        for k in 1..=3 {
            let got: Vec<usize> = retrieve(&store, q, k).hits.iter().map(|h| h.index).collect();
            let want: Vec<usize> = scored[..k].iter().map(|s| s.1).collect();
            check(got == want, || format!("{q:?} k={k}: {got:?} != {want:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} rankings match, default k=2"))
}

fn c8_dataset() -> Outcome {
    let cfg = PipelineConfig::default();
    check(cfg.variants_per_query == 5, || "variants_per_query is not 5".into())?;
    let a = build_dataset(&cfg, &base_library()).map_err(|e| e.to_string())?;
    let b = build_dataset(&cfg, &base_library()).map_err(|e| e.to_string())?;
    check(a.to_jsonl() == b.to_jsonl(), || "two builds differ".into())?;
    check(!a.records.is_empty(), || "empty dataset".into())?;
    let n = a.records.len() as f64;
    for kind in RecordKind::ALL {
        let frac = a.records.iter().filter(|r| r.kind == kind).count() as f64 / n;
        let target = cfg.composition.target(kind);
        check((frac - target).abs() <= 0.02, || format!("{}: {frac:.3} vs {target:.3}", kind.name()))?;
    }
    for (i, r) in a.records.iter().enumerate() {
        check(r.validated, || format!("record {i} not validated"))?;
        let text = if r.kind.is_reasoning() {
            strip_reasoning(&r.response)
        } else {
            r.response.clone()
        };
        let program = parse(&text).map_err(|e| format!("record {i}: {e}"))?;
        check(parse(&format(&program)).as_ref() == Ok(&program), || format!("record {i}: format round trip"))?;
        let scene = compile_program(&program).map_err(|e| format!("record {i}: {e}"))?;
        let report = validate_scene(&scene);
        check(report.validity() == 1.0, || format!("record {i}: validity {}", report.validity()))?;
    }
    Ok(format!("{} records, byte-identical rebuild, all replay", a.records.len()))
}

fn c9_bench() -> Outcome {
    let suite = BenchmarkSuite::shipped();
    check(suite.prompts.len() == 320, || format!("{} prompts", suite.prompts.len()))?;
    let store = RetrievalStore::base();
    let cfg = AgentConfig::default();
    let builtin = run_benchmark(&suite, Runner::Builtin, &cfg, &store);
    check(builtin.aggregates.execution_rate == 1.0, || {
        format!("builtin execution rate {}", builtin.aggregates.execution_rate)
    })?;
    let mut weighted = 0.0;
    for d in Difficulty::ALL {
        let rows: Vec<f64> = builtin.rows.iter().filter(|r| r.difficulty == d).map(|r| r.score).collect();
        let mean = rows.iter().sum::<f64>() / rows.len() as f64;
        weighted += mean * rows.len() as f64;
    }
    weighted /= builtin.rows.len() as f64;
    let direct = builtin.rows.iter().map(|r| r.score).sum::<f64>() / builtin.rows.len() as f64;
    let gap = (weighted - builtin.aggregates.mean_score).abs().max((direct - builtin.aggregates.mean_score).abs());
    check(gap <= 1e-12, || format!("weighted mean differs by {gap:e}"))?;
    let agent = run_benchmark(&suite, Runner::Agent, &cfg, &store);
    let (a, b) = (agent.aggregates.mean_score, builtin.aggregates.mean_score);
    check(a >= b, || format!("agent {a} < builtin {b}"))?;
    Ok(format!("builtin exec 1.0, mean {b:.3}; agent mean {a:.3}"))
}

fn c10_round_trip_nlu() -> Outcome {
    let banks = WordBanks::builtin();
    let mut rng = Rng::new(10);
    let mut stated = 0;
    for class in DesignClass::ALL {
        for _ in 0..1000 {
            let ins = generate_instruction(class, &banks, &mut rng);
            let intent = parse_intent(&ins.text, &banks);
            check(intent.target_class.class() == Some(class), || format!("class lost: {}", ins.text))?;
            for (k, v) in &ins.params {
                let got = intent.numeric_params.get(k);
                check(got == Some(v), || format!("{k}: {got:?} != {v} in {:?}", ins.text))?;
                stated += 1;
            }
        }
    }
    Ok(format!("4000 instructions, {stated} stated values recovered"))
}

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        ("1 subdivision combinatorics", c1_subdivision),
        ("2 voronoi correctness", c2_voronoi),
        ("3 tubular volume", c3_tubular),
        ("4 helical law", c4_helical),
        ("5 validation protocol", c5_validation),
        ("6a iteration cap", c6a_iteration_cap),
        ("6b mutation repair", c6b_mutation_repair),
        ("6c any_step dominance", c6c_mode_dominance),
        ("7 retrieval ranking", c7_retrieval),
        ("8 dataset pipeline", c8_dataset),
        ("9 benchmark harness", c9_bench),
        ("10 round-trip NLU", c10_round_trip_nlu),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        // Straight to the handle so the lines show even when output is captured.
        let line = match outcome {
            Ok(detail) => format!("PASS criterion {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed.push(name);
                format!("FAIL criterion {name} ({secs:.1}s): {why}")
            }
        };
        let _ = writeln!(std::io::stdout().lock(), "{line}");
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
