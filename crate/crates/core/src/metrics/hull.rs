//! Volume of the 3-D convex hull of a point cloud (quickhull).
//!
//! Degenerate clouds (fewer than four points, or all points within a
//! tolerance of one plane) have volume zero rather than being an error.

use std::collections::HashSet;

pub type Point = [f64; 3];

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

struct Face {
    v: [usize; 3],
    normal: Point,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(points: &[Point], v: [usize; 3]) -> Face {
        let n = cross(sub(points[v[1]], points[v[0]]), sub(points[v[2]], points[v[0]]));
        let len = norm(n);
        let normal = if len > 0.0 { n.map(|c| c / len) } else { [0.0; 3] };
        Face {
            v,
            normal,
            offset: dot(normal, points[v[0]]),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn distance(&self, p: Point) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

/// Convex hull of `points`, returned as outward-oriented triangles.
///
/// Returns `None` for degenerate input.
pub fn convex_hull(points: &[Point]) -> Option<Vec<[usize; 3]>> {
    if points.len() < 4 {
        return None;
    }
    let scale = points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, c| m.max(c.abs()))
        .max(1.0);
    let eps = 1e-10 * scale;

    let simplex = initial_simplex(points, eps)?;
    let centroid = {
        let s = simplex.iter().fold([0.0; 3], |acc, &i| {
            [acc[0] + points[i][0], acc[1] + points[i][1], acc[2] + points[i][2]]
        });
        s.map(|c| c / 4.0)
    };

    let mut faces: Vec<Face> = Vec::new();
    let [a, b, c, d] = simplex;
    for tri in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        let mut f = Face::new(points, tri);
        if f.distance(centroid) > 0.0 {
            f = Face::new(points, [tri[0], tri[2], tri[1]]);
        }
        faces.push(f);
    }

    for (i, &p) in points.iter().enumerate() {
        if simplex.contains(&i) {
            continue;
        }
        assign(&mut faces, 0..4, i, p, eps);
    }

    let mut pending: Vec<usize> = (0..faces.len()).collect();
    while let Some(fi) = pending.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        let eye = *faces[fi]
            .outside
            .iter()
            .max_by(|&&x, &&y| {
                faces[fi]
                    .distance(points[x])
                    .total_cmp(&faces[fi].distance(points[y]))
            })
            .unwrap();
        let eye_p = points[eye];

        let visible: Vec<usize> = (0..faces.len())
            .filter(|&j| faces[j].alive && faces[j].distance(eye_p) > eps)
            .collect();

        let mut edges = HashSet::new();
        for &j in &visible {
            let v = faces[j].v;
            for k in 0..3 {
                edges.insert((v[k], v[(k + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> = {
            let mut h: Vec<_> = edges
                .iter()
                .copied()
                .filter(|&(x, y)| !edges.contains(&(y, x)))
                .collect();
            h.sort_unstable();
            h
        };

        let mut orphans = Vec::new();
        for &j in &visible {
            faces[j].alive = false;
            orphans.append(&mut faces[j].outside);
        }

        let first_new = faces.len();
        for (x, y) in horizon {
            faces.push(Face::new(points, [x, y, eye]));
        }
        let new_range = first_new..faces.len();
        for o in orphans {
            if o != eye {
                assign(&mut faces, new_range.clone(), o, points[o], eps);
            }
        }
        pending.extend(new_range);
    }

    Some(faces.into_iter().filter(|f| f.alive).map(|f| f.v).collect())
}

fn assign(faces: &mut [Face], range: std::ops::Range<usize>, i: usize, p: Point, eps: f64) {
    let mut best: Option<(usize, f64)> = None;
    for j in range {
        let d = faces[j].distance(p);
        if d > eps && best.is_none_or(|(_, bd)| d > bd) {
            best = Some((j, d));
        }
    }
    if let Some((j, _)) = best {
        faces[j].outside.push(i);
    }
}

fn initial_simplex(points: &[Point], eps: f64) -> Option<[usize; 4]> {
    // Extreme points along x, y, z give a well-spread first edge.
    let mut extremes = Vec::with_capacity(6);
    for axis in 0..3 {
        let lo = (0..points.len()).min_by(|&a, &b| points[a][axis].total_cmp(&points[b][axis]))?;
        let hi = (0..points.len()).max_by(|&a, &b| points[a][axis].total_cmp(&points[b][axis]))?;
        extremes.push(lo);
        extremes.push(hi);
    }
    let mut best = (0, 0, 0.0);
    for &a in &extremes {
        for &b in &extremes {
            let d = norm(sub(points[a], points[b]));
            if d > best.2 {
                best = (a, b, d);
            }
        }
    }
    let (a, b, span) = best;
    if span <= eps {
        return None;
    }
    let ab = sub(points[b], points[a]);
    let c = (0..points.len()).max_by(|&x, &y| {
        norm(cross(ab, sub(points[x], points[a])))
            .total_cmp(&norm(cross(ab, sub(points[y], points[a]))))
    })?;
    if norm(cross(ab, sub(points[c], points[a]))) / span <= eps {
        return None;
    }
    let n = cross(ab, sub(points[c], points[a]));
    let n_len = norm(n);
    let d = (0..points.len()).max_by(|&x, &y| {
        dot(n, sub(points[x], points[a]))
            .abs()
            .total_cmp(&dot(n, sub(points[y], points[a])).abs())
    })?;
    if dot(n, sub(points[d], points[a])).abs() / n_len <= eps {
        return None;
    }
    Some([a, b, c, d])
}

/// Volume enclosed by outward-oriented triangles.
pub fn mesh_volume(points: &[Point], faces: &[[usize; 3]]) -> f64 {
    let Some(&[first, ..]) = faces.first() else {
        return 0.0;
    };
    let origin = points[first];
    let mut six_v = 0.0;
    for f in faces {
        let (a, b, c) = (
            sub(points[f[0]], origin),
            sub(points[f[1]], origin),
            sub(points[f[2]], origin),
        );
        six_v += dot(a, cross(b, c));
    }
    (six_v / 6.0).abs()
}

/// Hull volume of `points`; zero for degenerate clouds.
pub fn hull_volume(points: &[Point]) -> f64 {
    match convex_hull(points) {
        Some(faces) => mesh_volume(points, &faces),
        None => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force oracle: a triangle is a hull facet iff every point lies on
    /// one side of its plane. Volume by summing tetrahedra from the centroid
    /// of the facet's coplanar points fanned around their average.
    fn brute_volume(points: &[Point]) -> f64 {
        let n = points.len();
        let c = points.iter().fold([0.0; 3], |a, p| [a[0] + p[0], a[1] + p[1], a[2] + p[2]]);
        let centre = c.map(|v| v / n as f64);
        // Collect distinct supporting planes with all points on their boundary.
        let mut planes: Vec<(Point, f64, Vec<usize>)> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let nrm = cross(sub(points[j], points[i]), sub(points[k], points[i]));
                    let len = norm(nrm);
                    if len < 1e-9 {
                        continue;
                    }
                    let mut nrm = nrm.map(|v| v / len);
                    let mut off = dot(nrm, points[i]);
                    if dot(nrm, centre) - off > 0.0 {
                        nrm = nrm.map(|v| -v);
                        off = -off;
                    }
                    if points.iter().all(|&p| dot(nrm, p) - off <= 1e-9) {
                        if planes.iter().any(|(q, o, _)| norm(sub(*q, nrm)) < 1e-9 && (o - off).abs() < 1e-9) {
                            continue;
                        }
                        let on: Vec<usize> = (0..n).filter(|&m| (dot(nrm, points[m]) - off).abs() <= 1e-9).collect();
                        planes.push((nrm, off, on));
                    }
                }
            }
        }
        // Each facet polygon: area via projected convex polygon; volume = sum area*dist/3.
        let mut vol = 0.0;
        for (nrm, off, on) in &planes {
            let pc = on.iter().fold([0.0; 3], |a, &m| [a[0] + points[m][0], a[1] + points[m][1], a[2] + points[m][2]]).map(|v| v / on.len() as f64);
            let u = {
                let t = sub(points[on[0]], pc);
                let l = norm(t);
                if l < 1e-12 { sub(points[on[1]], pc).map(|v| v / norm(sub(points[on[1]], pc))) } else { t.map(|v| v / l) }
            };
            let w = cross(*nrm, u);
            let mut ang: Vec<(f64, usize)> = on.iter().map(|&m| {
                let d = sub(points[m], pc);
                (dot(d, w).atan2(dot(d, u)), m)
            }).collect();
            ang.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut area = 0.0;
            for t in 0..ang.len() {
                let p = sub(points[ang[t].1], pc);
                let q = sub(points[ang[(t + 1) % ang.len()].1], pc);
                area += dot(cross(p, q), *nrm) / 2.0;
            }
            vol += area.abs() * (off - dot(*nrm, centre)) / 3.0;
        }
        vol
    }

    #[test]
    fn box_corners() {
        let mut pts = Vec::new();
        for l in [0.0, 100.0] {
            for a in [-50.0, 50.0] {
                for b in [-50.0, 50.0] {
                    pts.push([l, a, b]);
                }
            }
        }
        assert!((hull_volume(&pts) - 1_000_000.0).abs() < 1e-6);
        // Interior points do not change it.
        pts.push([50.0, 0.0, 0.0]);
        pts.push([10.0, 10.0, -10.0]);
        assert!((hull_volume(&pts) - 1_000_000.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_clouds() {
        assert_eq!(hull_volume(&[]), 0.0);
        assert_eq!(hull_volume(&[[1.0, 2.0, 3.0]; 10]), 0.0);
        let line: Vec<Point> = (0..10).map(|i| [i as f64, 0.0, 0.0]).collect();
        assert_eq!(hull_volume(&line), 0.0);
        let plane: Vec<Point> = (0..25).map(|i| [(i % 5) as f64, (i / 5) as f64, 7.0]).collect();
        assert_eq!(hull_volume(&plane), 0.0);
    }

    #[test]
    fn tetrahedron() {
        let pts = [[0.0, 0.0, 0.0], [6.0, 0.0, 0.0], [0.0, 6.0, 0.0], [0.0, 0.0, 6.0]];
        assert!((hull_volume(&pts) - 36.0).abs() < 1e-9);
    }

    #[test]
    fn sphere_samples_approach_sphere_volume() {
        let mut pts = Vec::new();
        let n = 40;
        for i in 0..n {
            for j in 0..2 * n {
                let th = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
                let ph = std::f64::consts::PI * j as f64 / n as f64;
                pts.push([th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
            }
        }
        let v = hull_volume(&pts);
        let sphere = 4.0 / 3.0 * std::f64::consts::PI;
        assert!(v < sphere && v > 0.97 * sphere, "{v}");
    }

    fn arb_cloud() -> impl Strategy<Value = Vec<Point>> {
        proptest::collection::vec(
            (-50i32..50, -50i32..50, -50i32..50).prop_map(|(a, b, c)| [a as f64, b as f64, c as f64]),
            4..18,
        )
    }

    proptest! {
        #[test]
        fn matches_brute_force(pts in arb_cloud()) {
            let fast = hull_volume(&pts);
            let slow = brute_volume(&pts);
            prop_assert!((fast - slow).abs() <= 1e-6 * slow.max(1.0), "{} vs {}", fast, slow);
        }

        #[test]
        fn invariant_to_order_and_duplicates(pts in arb_cloud(), rot in 0usize..17) {
            let base = hull_volume(&pts);
            let mut shuffled = pts.clone();
            let r = rot % shuffled.len();
            shuffled.rotate_left(r);
            shuffled.extend_from_slice(&pts[..pts.len() / 2]);
            prop_assert!((hull_volume(&shuffled) - base).abs() <= 1e-6 * base.max(1.0));
        }
    }
}
