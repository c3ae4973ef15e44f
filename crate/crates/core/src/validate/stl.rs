//! Binary STL: 80-byte header, little-endian u32 triangle count, then
//! 50 bytes per triangle (normal, three vertices, u16 attribute).

use std::path::Path;

use super::ValidateError;
use crate::geom::Scene;

const HEADER: &[u8] = b"bioforge binary STL";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StlTriangle {
    pub normal: [f32; 3],
    pub vertices: [[f32; 3]; 3],
}

pub fn stl_bytes(scene: &Scene) -> Vec<u8> {
    let count = scene.triangle_count();
    let mut out = Vec::with_capacity(84 + 50 * count);
    let mut header = [0u8; 80];
    header[..HEADER.len()].copy_from_slice(HEADER);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(count as u32).to_le_bytes());
    for m in &scene.meshes {
        for t in m.triangles() {
            let [a, b, c] = m.triangle_positions(t);
            let n = (b - a).cross(c - a).normalized();
            for v in [n, a, b, c] {
                for x in v.to_array() {
                    out.extend_from_slice(&(x as f32).to_le_bytes());
                }
            }
            out.extend_from_slice(&0u16.to_le_bytes());
        }
    }
    out
}

/// Writes the scene and returns the number of bytes written.
pub fn export_stl(scene: &Scene, path: &Path) -> Result<u64, ValidateError> {
    let bytes = stl_bytes(scene);
    std::fs::write(path, &bytes)?;
    Ok(bytes.len() as u64)
}

pub fn parse_stl(bytes: &[u8]) -> Result<Vec<StlTriangle>, ValidateError> {
    if bytes.len() < 84 {
        return Err(ValidateError::BadStl(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    if bytes.len() != 84 + 50 * count {
        return Err(ValidateError::BadStl(format!(
            "count field says {count} triangles but file has {} bytes",
            bytes.len()
        )));
    }
    let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let v = |o: usize| [f(o), f(o + 4), f(o + 8)];
    Ok((0..count)
        .map(|i| {
            let o = 84 + 50 * i;
            StlTriangle {
                normal: v(o),
                vertices: [v(o + 12), v(o + 24), v(o + 36)],
            }
        })
        .collect())
}

pub fn import_stl(path: &Path) -> Result<Vec<StlTriangle>, ValidateError> {
    parse_stl(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Mesh;

    #[test]
    fn cube_is_684_bytes() {
        let s = Scene::new(vec![Mesh::unit_cube()]);
        let b = stl_bytes(&s);
        assert_eq!(b.len(), 684);
        assert_eq!(u32::from_le_bytes(b[80..84].try_into().unwrap()), 12);
    }

    #[test]
    fn normals_follow_winding() {
        let s = Scene::new(vec![Mesh::unit_cube()]);
        for t in parse_stl(&stl_bytes(&s)).unwrap() {
            let c: Vec<f32> = (0..3).map(|k| t.vertices.iter().map(|v| v[k]).sum::<f32>() / 3.0 - 0.5).collect();
            let d: f32 = (0..3).map(|k| c[k] * t.normal[k]).sum();
            assert!(d > 0.0);
        }
    }

    #[test]
    fn truncated_file_is_rejected() {
        let s = Scene::new(vec![Mesh::unit_cube()]);
        let b = stl_bytes(&s);
        assert!(parse_stl(&b[..b.len() - 1]).is_err());
        assert!(parse_stl(&b[..40]).is_err());
    }
}
