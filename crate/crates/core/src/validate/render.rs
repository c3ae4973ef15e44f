//! Orthographic z-buffer renderer with flat Lambert shading.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ValidateError;
use crate::geom::{Scene, Vec3};
use crate::par::{self, Execution};

pub const WIDTH: usize = 1280;
pub const HEIGHT: usize = 720;
pub const BACKGROUND: [u8; 3] = [30, 30, 30];
const MARGIN: f64 = 0.1;
const AMBIENT: f64 = 0.2;
const BAND: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Iso,
    Front,
    Top,
}

impl View {
    pub const ALL: [View; 3] = [View::Iso, View::Front, View::Top];

    pub fn name(self) -> &'static str {
        match self {
            View::Iso => "iso",
            View::Front => "front",
            View::Top => "top",
        }
    }

    pub fn from_name(s: &str) -> Option<View> {
        View::ALL.into_iter().find(|v| v.name() == s)
    }

    /// Unit vector from the scene toward the camera, and the screen-up hint.
    fn frame(self) -> (Vec3, Vec3) {
        match self {
            View::Iso => (Vec3::new(1.0, -1.0, 1.0).normalized(), Vec3::Z),
            View::Front => (Vec3::new(0.0, -1.0, 0.0), Vec3::Z),
            View::Top => (Vec3::Z, Vec3::Y),
        }
    }

    /// Direction toward the light, offset from the camera so that faces
    /// seen head-on are not all equally lit.
    fn light(self) -> Vec3 {
        match self {
            View::Iso => Vec3::new(0.6, -1.0, 1.4).normalized(),
            View::Front => Vec3::new(0.4, -1.0, 0.6).normalized(),
            View::Top => Vec3::new(0.3, -0.5, 1.0).normalized(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub view: View,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    pub fn new(view: View) -> Camera {
        Camera {
            view,
            width: WIDTH,
            height: HEIGHT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderImage {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB, top row first.
    pub pixels: Vec<u8>,
    pub view: View,
}

impl RenderImage {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Number of pixels that differ from the background.
    pub fn covered(&self) -> usize {
        self.pixels.chunks(3).filter(|p| *p != BACKGROUND).count()
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<(), ValidateError> {
        std::fs::write(path, self.to_ppm())?;
        Ok(())
    }
}

/// Gray level for mesh `i`, spread by the golden ratio.
fn mesh_gray(i: usize) -> f64 {
    0.55 + 0.4 * ((i as f64 * 0.618_033_988_75) % 1.0)
}

struct Projected {
    /// Screen x, screen y, depth (smaller is nearer).
    p: [[f64; 3]; 3],
    color: [u8; 3],
    ymin: usize,
    ymax: usize,
}

pub fn render_scene(scene: &Scene, camera: &Camera) -> Result<RenderImage, ValidateError> {
    render_scene_with(scene, camera, Execution::default())
}

pub fn render_scene_with(scene: &Scene, camera: &Camera, exec: Execution) -> Result<RenderImage, ValidateError> {
    if scene.triangle_count() == 0 {
        return Err(ValidateError::EmptyScene);
    }
    let (w, h) = (camera.width, camera.height);
    let (back, up_hint) = camera.view.frame();
    let right = up_hint.cross(back).normalized();
    let up = back.cross(right);
    let light = camera.view.light();

    let bbox = scene.bbox();
    let corners = bbox.corners();
    let span = |axis: Vec3| {
        let vals = corners.map(|c| c.dot(axis));
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (x0, x1) = span(right);
    let (y0, y1) = span(up);
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let scale = ((x1 - x0) / w as f64)
        .max((y1 - y0) / h as f64)
        .max(1e-12)
        * (1.0 + 2.0 * MARGIN);

    let mut tris = Vec::with_capacity(scene.triangle_count());
    for (mi, m) in scene.meshes.iter().enumerate() {
        let gray = mesh_gray(mi);
        for t in m.triangles() {
            let pos = m.triangle_positions(t);
            let n = (pos[1] - pos[0]).cross(pos[2] - pos[0]);
            if n.length_squared() == 0.0 {
                continue;
            }
            let lambert = n.normalized().dot(light).max(0.0);
            let level = (255.0 * gray * (AMBIENT + (1.0 - AMBIENT) * lambert)).round().clamp(0.0, 255.0) as u8;
            let p = pos.map(|q| {
                [
                    (q.dot(right) - cx) / scale + w as f64 / 2.0,
                    h as f64 / 2.0 - (q.dot(up) - cy) / scale,
                    -q.dot(back),
                ]
            });
            let ylo = p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min);
            let yhi = p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max);
            if yhi < 0.0 || ylo > h as f64 {
                continue;
            }
            tris.push(Projected {
                p,
                color: [level; 3],
                ymin: ylo.max(0.0).floor() as usize,
                ymax: (yhi.ceil() as usize).min(h - 1),
            });
        }
    }

    let mut buf = vec![(f64::INFINITY, BACKGROUND); w * h];
    par::for_each_chunk(exec, &mut buf, w * BAND, |band, rows| {
        let row0 = band * BAND;
        let row1 = row0 + rows.len() / w;
        for t in tris.iter().filter(|t| t.ymax >= row0 && t.ymin < row1) {
            raster(t, rows, w, row0, row1);
        }
    });
    let pixels = buf.into_iter().flat_map(|(_, c)| c).collect();
    Ok(RenderImage {
        width: w,
        height: h,
        pixels,
        view: camera.view,
    })
}

fn raster(t: &Projected, rows: &mut [(f64, [u8; 3])], w: usize, row0: usize, row1: usize) {
    let [a, b, c] = t.p;
    let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    if area.abs() < 1e-12 {
        return;
    }
    let xlo = a[0].min(b[0]).min(c[0]).max(0.0).floor() as usize;
    let xhi = (a[0].max(b[0]).max(c[0]).ceil().max(0.0) as usize).min(w - 1);
    let ylo = t.ymin.max(row0);
    let yhi = t.ymax.min(row1 - 1);
    for y in ylo..=yhi {
        let py = y as f64 + 0.5;
        // Row span from the edge crossings, padded by a pixel; the
        // barycentric test below stays the coverage authority.
        let (mut sx0, mut sx1) = (f64::INFINITY, f64::NEG_INFINITY);
        for (p, q) in [(a, b), (b, c), (c, a)] {
            if (p[1] - py) * (q[1] - py) > 0.0 {
                continue;
            }
            let xs = if p[1] == q[1] {
                [p[0], q[0]]
            } else {
                let x = p[0] + (py - p[1]) * (q[0] - p[0]) / (q[1] - p[1]);
                [x, x]
            };
            sx0 = sx0.min(xs[0]).min(xs[1]);
            sx1 = sx1.max(xs[0]).max(xs[1]);
        }
        if sx0 > sx1 {
            continue;
        }
        let x0 = ((sx0 - 1.0).floor().max(0.0) as usize).max(xlo);
        let x1 = ((sx1 + 1.0).ceil().max(0.0) as usize).min(xhi);
        for x in x0..=x1 {
            let px = x as f64 + 0.5;
            let w0 = ((b[0] - px) * (c[1] - py) - (b[1] - py) * (c[0] - px)) / area;
            let w1 = ((c[0] - px) * (a[1] - py) - (c[1] - py) * (a[0] - px)) / area;
            let w2 = 1.0 - w0 - w1;
            if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                continue;
            }
            let z = w0 * a[2] + w1 * b[2] + w2 * c[2];
            let cell = &mut rows[(y - row0) * w + x];
            if z < cell.0 {
                *cell = (z, t.color);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Mesh;

    #[test]
    fn empty_scene_is_an_error() {
        let r = render_scene(&Scene::new(vec![]), &Camera::new(View::Iso));
        assert!(matches!(r, Err(ValidateError::EmptyScene)));
    }

    #[test]
    fn cube_is_visible_in_every_view() {
        let s = Scene::new(vec![Mesh::unit_cube()]);
        for v in View::ALL {
            let img = render_scene(&s, &Camera::new(v)).unwrap();
            assert_eq!(img.pixels.len(), WIDTH * HEIGHT * 3);
            assert!(img.covered() > 1000, "{v:?}");
            // Margin keeps the border clear.
            assert_eq!(img.pixel(0, 0), BACKGROUND);
            assert_eq!(img.pixel(WIDTH - 1, HEIGHT - 1), BACKGROUND);
        }
    }

    #[test]
    fn iso_view_shows_three_shades() {
        let s = Scene::new(vec![Mesh::unit_cube()]);
        let img = render_scene(&s, &Camera::new(View::Iso)).unwrap();
        let shades: std::collections::BTreeSet<[u8; 3]> =
            img.pixels.chunks(3).map(|p| [p[0], p[1], p[2]]).filter(|p| *p != BACKGROUND).collect();
        assert_eq!(shades.len(), 3);
    }

    #[test]
    fn serial_matches_parallel_and_reruns() {
        let s = Scene::new(vec![Mesh::unit_cube(), Mesh::unit_cube().translated(Vec3::new(0.5, 0.3, 0.2))]);
        let cam = Camera::new(View::Iso);
        let a = render_scene_with(&s, &cam, Execution::Serial).unwrap();
        let b = render_scene_with(&s, &cam, Execution::Parallel).unwrap();
        let c = render_scene_with(&s, &cam, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn ppm_header() {
        let img = render_scene(&Scene::new(vec![Mesh::unit_cube()]), &Camera::new(View::Top)).unwrap();
        let ppm = img.to_ppm();
        assert!(ppm.starts_with(b"P6\n1280 720\n255\n"));
        assert_eq!(ppm.len(), 16 + WIDTH * HEIGHT * 3);
    }
}
