use std::collections::HashMap;

use super::mesh::Mesh;
use super::vec3::Vec3;
use super::GeomError;

/// Upper bound on subdivision levels accepted by [`catmull_clark`].
pub const MAX_LEVELS: u32 = 3;

/// Catmull-Clark subdivision of a closed 2-manifold polygon mesh.
///
/// Each level replaces every n-gon by n quads. Boundary rules are not
/// supported: an edge not shared by exactly two faces is an error.
pub fn catmull_clark(mesh: &Mesh, levels: u32) -> Result<Mesh, GeomError> {
    if levels > MAX_LEVELS {
        return Err(GeomError::ValueOutOfRange {
            param: "smooth".into(),
            detail: format!("{levels} levels requested, at most {MAX_LEVELS} supported"),
        });
    }
    let mut out = mesh.clone();
    for _ in 0..levels {
        out = subdivide_once(&out)?;
    }
    Ok(out)
}

struct Edge {
    a: usize,
    b: usize,
    faces: [usize; 2],
    count: usize,
}

fn subdivide_once(mesh: &Mesh) -> Result<Mesh, GeomError> {
    let nv = mesh.vertices.len();
    let nf = mesh.faces.len();

    let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    for (fi, f) in mesh.faces.iter().enumerate() {
        for k in 0..f.len() {
            let (a, b) = (f[k], f[(k + 1) % f.len()]);
            let key = (a.min(b), a.max(b));
            let ei = *edge_index.entry(key).or_insert_with(|| {
                edges.push(Edge {
                    a: key.0,
                    b: key.1,
                    faces: [usize::MAX; 2],
                    count: 0,
                });
                edges.len() - 1
            });
            let e = &mut edges[ei];
            if e.count < 2 {
                e.faces[e.count] = fi;
            }
            e.count += 1;
        }
    }
    if let Some(e) = edges.iter().find(|e| e.count != 2) {
        return Err(GeomError::NotManifold {
            edge: (e.a, e.b),
            faces: e.count,
        });
    }

    let face_points: Vec<Vec3> = mesh
        .faces
        .iter()
        .map(|f| f.iter().fold(Vec3::ZERO, |s, &i| s + mesh.vertices[i]) / f.len() as f64)
        .collect();

    let edge_points: Vec<Vec3> = edges
        .iter()
        .map(|e| {
            (mesh.vertices[e.a]
                + mesh.vertices[e.b]
                + face_points[e.faces[0]]
                + face_points[e.faces[1]])
                * 0.25
        })
        .collect();

    // Per-vertex sums of adjacent face points and incident edge midpoints.
    let mut face_sum = vec![Vec3::ZERO; nv];
    let mut face_n = vec![0usize; nv];
    for (fi, f) in mesh.faces.iter().enumerate() {
        for &v in f {
            face_sum[v] += face_points[fi];
            face_n[v] += 1;
        }
    }
    let mut mid_sum = vec![Vec3::ZERO; nv];
    let mut valence = vec![0usize; nv];
    for e in &edges {
        let mid = (mesh.vertices[e.a] + mesh.vertices[e.b]) * 0.5;
        for v in [e.a, e.b] {
            mid_sum[v] += mid;
            valence[v] += 1;
        }
    }

    let mut vertices = Vec::with_capacity(nv + nf + edges.len());
    for v in 0..nv {
        let p = mesh.vertices[v];
        let n = valence[v];
        if n == 0 {
            vertices.push(p);
            continue;
        }
        let q = face_sum[v] / face_n[v] as f64;
        let r = mid_sum[v] / n as f64;
        let nf = n as f64;
        vertices.push((q + r * 2.0 + p * (nf - 3.0)) / nf);
    }
    let face_base = vertices.len();
    vertices.extend_from_slice(&face_points);
    let edge_base = vertices.len();
    vertices.extend_from_slice(&edge_points);

    let mut faces = Vec::with_capacity(mesh.faces.iter().map(Vec::len).sum());
    for (fi, f) in mesh.faces.iter().enumerate() {
        let n = f.len();
        let edge_of = |a: usize, b: usize| edge_base + edge_index[&(a.min(b), a.max(b))];
        for k in 0..n {
            let prev = f[(k + n - 1) % n];
            let cur = f[k];
            let next = f[(k + 1) % n];
            faces.push(vec![
                cur,
                edge_of(cur, next),
                face_base + fi,
                edge_of(prev, cur),
            ]);
        }
    }

    let mut out = Mesh::new(vertices, faces);
    out.label = mesh.label.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::metrics::signed_volume;

    fn counts(m: &Mesh) -> (usize, usize, usize) {
        (m.vertices.len(), m.edge_counts().len(), m.faces.len())
    }

    #[test]
    fn zero_levels_is_identity() {
        let cube = Mesh::unit_cube();
        assert_eq!(catmull_clark(&cube, 0).unwrap(), cube);
    }

    #[test]
    fn cube_one_level_counts() {
        let m = catmull_clark(&Mesh::unit_cube(), 1).unwrap();
        assert_eq!(counts(&m), (26, 48, 24));
        assert!(m.faces.iter().all(|f| f.len() == 4));
        assert!(m.edge_counts().values().all(|&c| c == 2));
        m.check().unwrap();
    }

    #[test]
    fn cube_vertex_rule_matches_hand_computation() {
        // Corner (0,0,0): Q = mean of three face centers, R = mean of three edge
        // midpoints, n = 3, so V' = (Q + 2R) / 3 = 2/9 per axis.
        let m = catmull_clark(&Mesh::unit_cube(), 1).unwrap();
        let v = m.vertices[0];
        let expect = 2.0 / 9.0;
        assert!((v - Vec3::splat(expect)).length() < 1e-15);
    }

    #[test]
    fn smoothing_shrinks_but_keeps_orientation() {
        let m = catmull_clark(&Mesh::unit_cube(), 2).unwrap();
        let v = signed_volume(&m);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn open_mesh_rejected() {
        let mut cube = Mesh::unit_cube();
        cube.faces.pop();
        assert!(matches!(
            catmull_clark(&cube, 1),
            Err(GeomError::NotManifold { faces: 1, .. })
        ));
    }

    #[test]
    fn too_many_levels_rejected() {
        assert!(catmull_clark(&Mesh::unit_cube(), 4).is_err());
    }
}
