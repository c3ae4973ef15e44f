use std::collections::{BTreeSet, HashMap, VecDeque};
use std::f64::consts::TAU;

use bioforge::geom::{Mesh, Scene, Vec3};
use bioforge::par::Execution;
use bioforge::rng::Rng;
use bioforge::validate::{
    connected_components, parse_stl, self_intersections, stl_bytes, validate_scene_with,
};
use proptest::prelude::*;

fn rotate(p: Vec3, a: f64, b: f64) -> Vec3 {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let q = Vec3::new(ca * p.x - sa * p.y, sa * p.x + ca * p.y, p.z);
    Vec3::new(q.x, cb * q.y - sb * q.z, sb * q.y + cb * q.z)
}

/// A randomly sized, rotated and placed box.
fn random_box(rng: &mut Rng, spread: f64) -> Mesh {
    let half = Vec3::new(rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.5));
    let mut m = Mesh::cuboid(half * -1.0, half);
    let (a, b) = (rng.uniform(0.0, TAU), rng.uniform(0.0, TAU));
    let at = Vec3::new(rng.uniform(0.0, spread), rng.uniform(0.0, spread), rng.uniform(0.0, spread));
    for v in &mut m.vertices {
        *v = rotate(*v, a, b) + at;
    }
    m
}

/// Meshes holding one to three boxes each.
fn random_scene(seed: u64, spread: f64) -> Scene {
    let mut rng = Rng::new(seed);
    let meshes = (0..1 + rng.below(4))
        .map(|_| {
            let mut m = random_box(&mut rng, spread);
            for _ in 0..rng.below(3) {
                m.append(&random_box(&mut rng, spread));
            }
            m
        })
        .collect();
    Scene::new(meshes)
}

/// Components by breadth-first search over the face-vertex incidence graph.
fn bfs_components(scene: &Scene) -> BTreeSet<Vec<usize>> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut base = 0;
    for m in &scene.meshes {
        for f in &m.faces {
            for &a in f {
                for &b in f {
                    adj.entry(base + a).or_default().push(base + b);
                }
            }
        }
        base += m.vertices.len();
    }
    let mut seen = BTreeSet::new();
    let mut out = BTreeSet::new();
    let mut starts: Vec<usize> = adj.keys().copied().collect();
    starts.sort_unstable();
    for s in starts {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[&v] {
                if seen.insert(w) {
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.insert(comp);
    }
    out
}

/// Moller-Trumbore segment against triangle, strict interior hits.
fn segment_hits(p: Vec3, q: Vec3, t: &[Vec3; 3]) -> bool {
    let d = q - p;
    let (e1, e2) = (t[1] - t[0], t[2] - t[0]);
    let h = d.cross(e2);
    let a = e1.dot(h);
    if a.abs() < 1e-14 {
        return false;
    }
    let s = p - t[0];
    let u = s.dot(h) / a;
    let qv = s.cross(e1);
    let v = d.dot(qv) / a;
    let w = e2.dot(qv) / a;
    u > 0.0 && v > 0.0 && u + v < 1.0 && w > 0.0 && w < 1.0
}

fn tris_cross(a: &[Vec3; 3], b: &[Vec3; 3]) -> bool {
    (0..3).any(|i| segment_hits(a[i], a[(i + 1) % 3], b) || segment_hits(b[i], b[(i + 1) % 3], a))
}

fn brute_force_crossings(scene: &Scene) -> u64 {
    let mut tris = Vec::new();
    let mut base = 0;
    for m in &scene.meshes {
        for t in m.triangles() {
            tris.push((m.triangle_positions(t), t.map(|v| v + base)));
        }
        base += m.vertices.len();
    }
    let mut n = 0;
    for i in 0..tris.len() {
        for j in i + 1..tris.len() {
            let shared = tris[i].1.iter().any(|v| tris[j].1.contains(v));
            if !shared && tris_cross(&tris[i].0, &tris[j].0) {
                n += 1;
            }
        }
    }
    n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn components_match_breadth_first_search(seed in any::<u64>()) {
        let scene = random_scene(seed, 8.0);
        let got: BTreeSet<Vec<usize>> = connected_components(&scene).into_iter().collect();
        prop_assert_eq!(got, bfs_components(&scene));
    }

    #[test]
    fn crossings_match_brute_force(seed in any::<u64>()) {
        let scene = random_scene(seed, 2.5);
        let want = brute_force_crossings(&scene);
        prop_assert_eq!(self_intersections(&scene, Execution::Serial), want);
        prop_assert_eq!(self_intersections(&scene, Execution::Parallel), want);
    }

    #[test]
    fn stl_round_trip_is_exact(seed in any::<u64>()) {
        let scene = random_scene(seed, 5.0);
        let bytes = stl_bytes(&scene);
        prop_assert_eq!(bytes.len(), 84 + 50 * scene.triangle_count());
        let tris = parse_stl(&bytes).unwrap();
        let mut it = tris.iter();
        for m in &scene.meshes {
            for t in m.triangles() {
                let got = it.next().unwrap();
                let pos = m.triangle_positions(t);
                for (v, p) in got.vertices.iter().zip(&pos) {
                    prop_assert_eq!(*v, [p.x as f32, p.y as f32, p.z as f32]);
                }
                let n = (pos[1] - pos[0]).cross(pos[2] - pos[0]).normalized();
                prop_assert!((got.normal[0] as f64 - n.x).abs() < 1e-6);
                prop_assert!((got.normal[2] as f64 - n.z).abs() < 1e-6);
            }
        }
        prop_assert!(it.next().is_none());
    }

    #[test]
    fn serial_and_parallel_reports_agree(seed in any::<u64>()) {
        let scene = random_scene(seed, 3.0);
        prop_assert_eq!(
            validate_scene_with(&scene, Execution::Serial),
            validate_scene_with(&scene, Execution::Parallel)
        );
    }
}

#[test]
fn separated_boxes_do_not_cross() {
    let a = Mesh::unit_cube();
    let b = Mesh::unit_cube().translated(Vec3::new(3.0, 0.0, 0.0));
    let scene = Scene::new(vec![a, b]);
    assert_eq!(self_intersections(&scene, Execution::Serial), 0);
    let report = validate_scene_with(&scene, Execution::Serial);
    assert_eq!(report.component_count, 2);
    assert_eq!(report.floating_components.len(), 2);
}

#[test]
fn open_mesh_is_not_watertight() {
    let mut m = Mesh::unit_cube();
    m.faces.pop();
    let report = validate_scene_with(&Scene::new(vec![m, Mesh::unit_cube()]), Execution::Serial);
    assert_eq!(report.watertight_per_mesh, vec![false, true]);
    assert!(report.validity() < 1.0);
}

#[test]
fn truncated_stl_is_rejected() {
    let bytes = stl_bytes(&Scene::new(vec![Mesh::unit_cube()]));
    assert!(parse_stl(&bytes[..bytes.len() - 1]).is_err());
    assert!(parse_stl(&bytes[..40]).is_err());
}

#[test]
fn overlapping_boxes_cross_and_match_brute_force() {
    let mut rng = Rng::new(5);
    let a = random_box(&mut rng, 0.0);
    let b = random_box(&mut rng, 0.5);
    let scene = Scene::new(vec![a, b]);
    let want = brute_force_crossings(&scene);
    assert!(want > 0);
    assert_eq!(self_intersections(&scene, Execution::Serial), want);
}
