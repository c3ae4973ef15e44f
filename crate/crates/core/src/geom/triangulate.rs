//! Ear-clipping triangulation of simple polygons with holes.
//!
//! Holes are first spliced into the outer ring through mutually visible
//! bridge vertices (processed right to left), then the merged ring is
//! clipped ear by ear.

use super::vec3::Vec2;

pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| poly[i].cross(poly[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

/// Closed-segment intersection, including touching and collinear overlap.
pub fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Vec2, b: Vec2, p: Vec2| {
        p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
    };
    (d1 == 0.0 && on(q1, q2, p1))
        || (d2 == 0.0 && on(q1, q2, p2))
        || (d3 == 0.0 && on(p1, p2, q1))
        || (d4 == 0.0 && on(p1, p2, q2))
}

/// Even-odd point-in-polygon test. Points on the boundary may go either way.
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the polygon boundary.
pub fn boundary_distance(p: Vec2, poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let ab = b - a;
            let l2 = ab.x * ab.x + ab.y * ab.y;
            let t = if l2 > 0.0 {
                ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / l2
            } else {
                0.0
            }
            .clamp(0.0, 1.0);
            let d = Vec2::new(a.x + ab.x * t - p.x, a.y + ab.y * t - p.y);
            (d.x * d.x + d.y * d.y).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Whether any two non-adjacent edges of the ring intersect.
pub fn is_self_intersecting(poly: &[Vec2]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(a, b, poly[j], poly[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

/// Triangulates `outer` (any orientation) minus `holes`. Vertex indices
/// refer to the concatenation `outer ++ holes[0] ++ holes[1] ++ ...`, and
/// every triangle is counter-clockwise.
pub fn triangulate(outer: &[Vec2], holes: &[Vec<Vec2>]) -> Vec<[usize; 3]> {
    let mut pts: Vec<Vec2> = outer.to_vec();
    let mut ring: Vec<usize> = (0..outer.len()).collect();
    if signed_area(outer) < 0.0 {
        ring.reverse();
    }

    // Hole rings, wound clockwise.
    let mut hole_rings: Vec<Vec<usize>> = Vec::with_capacity(holes.len());
    for h in holes {
        let base = pts.len();
        pts.extend_from_slice(h);
        let mut r: Vec<usize> = (base..base + h.len()).collect();
        if signed_area(h) > 0.0 {
            r.reverse();
        }
        hole_rings.push(r);
    }

    // Rightmost holes first.
    let max_x = |r: &Vec<usize>| r.iter().map(|&i| pts[i].x).fold(f64::NEG_INFINITY, f64::max);
    let mut order: Vec<usize> = (0..hole_rings.len()).collect();
    order.sort_by(|&a, &b| max_x(&hole_rings[b]).total_cmp(&max_x(&hole_rings[a])));
    for hi in order {
        ring = splice_hole(&pts, ring, &hole_rings[hi]);
    }

    ear_clip(&pts, ring)
}

fn splice_hole(pts: &[Vec2], ring: Vec<usize>, hole: &[usize]) -> Vec<usize> {
    // Rightmost hole vertex (lowest y on ties).
    let (mpos, &m) = hole
        .iter()
        .enumerate()
        .max_by(|(_, &a), (_, &b)| {
            pts[a]
                .x
                .total_cmp(&pts[b].x)
                .then(pts[b].y.total_cmp(&pts[a].y))
        })
        .unwrap();
    let bridge = find_bridge(pts, &ring, pts[m]);

    let mut out = Vec::with_capacity(ring.len() + hole.len() + 2);
    out.extend_from_slice(&ring[..=bridge]);
    for k in 0..=hole.len() {
        out.push(hole[(mpos + k) % hole.len()]);
    }
    out.push(ring[bridge]);
    out.extend_from_slice(&ring[bridge + 1..]);
    out
}

/// Position in `ring` of a vertex visible from `m` along which a bridge can
/// be cut.
fn find_bridge(pts: &[Vec2], ring: &[usize], m: Vec2) -> usize {
    let n = ring.len();
    let mut best_x = f64::INFINITY;
    let mut hit: Option<usize> = None;
    for k in 0..n {
        let (a, b) = (pts[ring[k]], pts[ring[(k + 1) % n]]);
        if (a.y <= m.y && b.y >= m.y || b.y <= m.y && a.y >= m.y) && a.y != b.y {
            let x = a.x + (m.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x >= m.x && x < best_x {
                best_x = x;
                // Endpoint with the larger x is the provisional target.
                hit = Some(if a.x > b.x { k } else { (k + 1) % n });
            }
        }
    }
    let mut target = hit.unwrap_or(0);
    let i = Vec2::new(best_x, m.y);
    let p = pts[ring[target]];

    // Any ring vertex strictly inside triangle (m, i, p) blocks the view;
    // take the one with the smallest angle to the ray.
    if p.y != m.y {
        let mut best_angle = f64::INFINITY;
        let mut best_dist = f64::INFINITY;
        for (k, &idx) in ring.iter().enumerate() {
            let q = pts[idx];
            if q == p || q.x < m.x {
                continue;
            }
            if strictly_in_triangle(q, m, i, p) || strictly_in_triangle(q, m, p, i) {
                let d = q - m;
                let ang = (d.y.abs()).atan2(d.x);
                let dist = d.x * d.x + d.y * d.y;
                if ang < best_angle || (ang == best_angle && dist < best_dist) {
                    best_angle = ang;
                    best_dist = dist;
                    target = k;
                }
            }
        }
    }

    // The chosen point may appear more than once after earlier splices; use
    // the occurrence whose interior wedge contains m.
    let idx = ring[target];
    let candidates: Vec<usize> = (0..n).filter(|&k| pts[ring[k]] == pts[idx]).collect();
    if candidates.len() > 1 {
        for &k in &candidates {
            let prev = pts[ring[(k + n - 1) % n]];
            let cur = pts[ring[k]];
            let next = pts[ring[(k + 1) % n]];
            if wedge_contains(prev, cur, next, m) {
                return k;
            }
        }
    }
    target
}

fn wedge_contains(prev: Vec2, cur: Vec2, next: Vec2, p: Vec2) -> bool {
    let convex = orient(prev, cur, next) >= 0.0;
    let left_in = orient(prev, cur, p) > 0.0;
    let left_out = orient(cur, next, p) > 0.0;
    if convex {
        left_in && left_out
    } else {
        left_in || left_out
    }
}

fn strictly_in_triangle(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> bool {
    orient(a, b, p) > 0.0 && orient(b, c, p) > 0.0 && orient(c, a, p) > 0.0
}

fn in_triangle_closed(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> bool {
    orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0
}

fn ear_clip(pts: &[Vec2], ring: Vec<usize>) -> Vec<[usize; 3]> {
    let mut tris = Vec::with_capacity(ring.len().saturating_sub(2));
    if ring.len() < 3 {
        return tris;
    }
    let n0 = ring.len();
    // Doubly linked list over ring positions.
    let mut next: Vec<usize> = (0..n0).map(|i| (i + 1) % n0).collect();
    let mut prev: Vec<usize> = (0..n0).map(|i| (i + n0 - 1) % n0).collect();
    let mut alive = n0;
    let mut cur = 0usize;
    let mut stalled = 0usize;

    let reflex_or_flat =
        |p: usize, c: usize, nx: usize| orient(pts[ring[p]], pts[ring[c]], pts[ring[nx]]) <= 0.0;

    while alive > 3 {
        let p = prev[cur];
        let nx = next[cur];
        let (a, b, c) = (pts[ring[p]], pts[ring[cur]], pts[ring[nx]]);
        let mut is_ear = orient(a, b, c) > 0.0;
        if is_ear {
            let (minx, maxx) = (a.x.min(b.x).min(c.x), a.x.max(b.x).max(c.x));
            let (miny, maxy) = (a.y.min(b.y).min(c.y), a.y.max(b.y).max(c.y));
            let mut k = next[nx];
            while k != p {
                let q = pts[ring[k]];
                if q.x >= minx
                    && q.x <= maxx
                    && q.y >= miny
                    && q.y <= maxy
                    && q != a
                    && q != b
                    && q != c
                    && reflex_or_flat(prev[k], k, next[k])
                    && in_triangle_closed(q, a, b, c)
                {
                    is_ear = false;
                    break;
                }
                k = next[k];
            }
        }
        if is_ear || stalled > alive {
            if is_ear || orient(a, b, c).abs() > 0.0 {
                tris.push([ring[p], ring[cur], ring[nx]]);
            }
            next[p] = nx;
            prev[nx] = p;
            alive -= 1;
            cur = nx;
            stalled = 0;
        } else {
            cur = nx;
            stalled += 1;
        }
    }
    let p = prev[cur];
    let nx = next[cur];
    if orient(pts[ring[p]], pts[ring[cur]], pts[ring[nx]]) > 0.0 {
        tris.push([ring[p], ring[cur], ring[nx]]);
    }
    tris
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(c: Vec2, half: f64) -> Vec<Vec2> {
        vec![
            Vec2::new(c.x - half, c.y - half),
            Vec2::new(c.x + half, c.y - half),
            Vec2::new(c.x + half, c.y + half),
            Vec2::new(c.x - half, c.y + half),
        ]
    }

    fn area_of(pts: &[Vec2], tris: &[[usize; 3]]) -> f64 {
        tris.iter()
            .map(|t| 0.5 * orient(pts[t[0]], pts[t[1]], pts[t[2]]))
            .sum()
    }

    #[test]
    fn convex_polygon() {
        let sq = square(Vec2::new(0.0, 0.0), 1.0);
        let t = triangulate(&sq, &[]);
        assert_eq!(t.len(), 2);
        assert!((area_of(&sq, &t) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn clockwise_input_is_normalized() {
        let mut sq = square(Vec2::new(0.0, 0.0), 1.0);
        sq.reverse();
        let t = triangulate(&sq, &[]);
        assert!((area_of(&sq, &t) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn concave_polygon() {
        let l = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 2.0),
            Vec2::new(0.0, 2.0),
        ];
        let t = triangulate(&l, &[]);
        assert_eq!(t.len(), 4);
        assert!((area_of(&l, &t) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn square_with_holes() {
        let outer = square(Vec2::new(0.0, 0.0), 5.0);
        let holes = vec![
            square(Vec2::new(-2.0, -2.0), 1.0),
            square(Vec2::new(2.0, 2.0), 1.0),
            square(Vec2::new(2.0, -2.0), 0.5),
        ];
        let t = triangulate(&outer, &holes);
        let mut pts = outer.clone();
        for h in &holes {
            pts.extend_from_slice(h);
        }
        // n + 2h - 2 triangles for n total vertices and h holes.
        assert_eq!(t.len(), pts.len() + 2 * holes.len() - 2);
        assert!((area_of(&pts, &t) - (100.0 - 4.0 - 4.0 - 1.0)).abs() < 1e-9);
        assert!(t.iter().all(|t| orient(pts[t[0]], pts[t[1]], pts[t[2]]) > 0.0));
    }

    #[test]
    fn holes_aligned_on_bridge_ray() {
        let outer = square(Vec2::new(0.0, 0.0), 10.0);
        let holes: Vec<Vec<Vec2>> = (0..4)
            .map(|i| square(Vec2::new(-6.0 + 4.0 * i as f64, 0.0), 1.0))
            .collect();
        let t = triangulate(&outer, &holes);
        let mut pts = outer.clone();
        for h in &holes {
            pts.extend_from_slice(h);
        }
        assert!((area_of(&pts, &t) - (400.0 - 16.0)).abs() < 1e-9);
    }

    #[test]
    fn self_intersection_detected() {
        let bowtie = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(is_self_intersecting(&bowtie));
        assert!(!is_self_intersecting(&square(Vec2::new(0.0, 0.0), 1.0)));
    }
}
