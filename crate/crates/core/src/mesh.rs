//! Grid meshing of parametrized surfaces and OBJ output.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::geom::Vec3;
use crate::reconstruct::ParamSurface;
use crate::scalar::{lit, to64, Real};

/// `nu × nv` vertices over `[u0, u1] × [v0, v1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub nu: usize,
    pub nv: usize,
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Grid {
    pub fn square(n: usize, half: f64) -> Self {
        Grid { nu: n, nv: n, u0: -half, u1: half, v0: -half, v1: half }
    }

    pub fn u(&self, i: usize) -> f64 {
        if self.nu < 2 {
            return self.u0;
        }
        self.u0 + (self.u1 - self.u0) * i as f64 / (self.nu - 1) as f64
    }

    pub fn v(&self, j: usize) -> f64 {
        if self.nv < 2 {
            return self.v0;
        }
        self.v0 + (self.v1 - self.v0) * j as f64 / (self.nv - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameter points in row-major order (`v` fastest).
    pub fn points(&self) -> Vec<(f64, f64)> {
        (0..self.nu).flat_map(|i| (0..self.nv).map(move |j| (self.u(i), self.v(j)))).collect()
    }
}

/// Vertices with a validity mask and quad faces over valid cells.
#[derive(Clone, Debug)]
pub struct Mesh<T> {
    pub grid: Grid,
    pub vertices: Vec<Option<Vec3<T>>>,
    /// 0-based vertex indices, counterclockwise in parameter space.
    pub faces: Vec<[usize; 4]>,
    pub polylines: Vec<Vec<Vec3<T>>>,
}

/// Cell crosses the branch cut of the polar angle (negative `u`-axis).
fn crosses_cut(u: [f64; 2], v: [f64; 2]) -> bool {
    u[0].min(u[1]) < 0.0 && v[0].min(v[1]) < 0.0 && v[0].max(v[1]) >= 0.0
}

fn touches_guard(u: [f64; 2], v: [f64; 2], pts: &[(f64, f64)], guard: f64) -> bool {
    pts.iter().any(|&(a, b)| {
        let dx = (a.clamp(u[0], u[1]) - a).abs();
        let dy = (b.clamp(v[0], v[1]) - b).abs();
        (dx * dx + dy * dy).sqrt() <= guard
    })
}

/// Evaluates `s` on the grid; cells touching a guard, a failed vertex, or
/// (for multi-valued surfaces) the angle cut are left out.
pub fn build_mesh<T: Real>(s: &ParamSurface<T>, grid: Grid) -> Mesh<T> {
    let sing: Vec<(f64, f64)> = s.singular_points().iter().map(|&(a, b)| (to64(a), to64(b))).collect();
    build_mesh_with(grid, &sing, to64(s.guard), s.has_angle(), |u, v| s.point(lit(u), lit(v)).ok())
}

/// Meshes an arbitrary point map with the same cell rules as [`build_mesh`].
pub fn build_mesh_with<T: Real, F>(grid: Grid, singular: &[(f64, f64)], guard: f64, cut: bool, eval: F) -> Mesh<T>
where
    F: Fn(f64, f64) -> Option<Vec3<T>> + Sync,
{
    let vertices: Vec<Option<Vec3<T>>> = grid
        .points()
        .par_iter()
        .map(|&(u, v)| eval(u, v).filter(|p| p.is_finite()))
        .collect();
    let mut faces = Vec::new();
    for i in 0..grid.nu.saturating_sub(1) {
        for j in 0..grid.nv.saturating_sub(1) {
            let idx = [i * grid.nv + j, (i + 1) * grid.nv + j, (i + 1) * grid.nv + j + 1, i * grid.nv + j + 1];
            if idx.iter().any(|&k| vertices[k].is_none()) {
                continue;
            }
            let u = [grid.u(i), grid.u(i + 1)];
            let v = [grid.v(j), grid.v(j + 1)];
            if touches_guard(u, v, singular, guard) || (cut && crosses_cut(u, v)) {
                continue;
            }
            faces.push(idx);
        }
    }
    Mesh { grid, vertices, faces, polylines: Vec::new() }
}

/// Several meshes in one OBJ file, each under its own `o` name.
pub fn objects_to_obj<T: Real>(objects: &[(String, Mesh<T>)]) -> String {
    let mut out = String::new();
    let mut offset = 0;
    for (name, m) in objects {
        let _ = writeln!(out, "o {name}");
        let (text, used) = m.obj_body(offset);
        out.push_str(&text);
        offset += used;
    }
    out
}

impl<T: Real> Mesh<T> {
    pub fn valid_vertices(&self) -> impl Iterator<Item = &Vec3<T>> {
        self.vertices.iter().flatten()
    }

    /// ASCII OBJ: only vertices used by faces or polylines are written.
    pub fn to_obj(&self) -> String {
        self.obj_body(0).0
    }

    /// OBJ text with vertex numbering starting after `offset`, and the
    /// number of vertices written.
    fn obj_body(&self, offset: usize) -> (String, usize) {
        let mut out = String::new();
        let mut index = vec![0usize; self.vertices.len()];
        for f in &self.faces {
            for &k in f {
                index[k] = 1;
            }
        }
        let mut next = offset + 1;
        for (k, v) in self.vertices.iter().enumerate() {
            if index[k] == 0 {
                continue;
            }
            let p = v.expect("faces reference valid vertices");
            let _ = writeln!(out, "v {} {} {}", to64(p.x), to64(p.y), to64(p.z));
            index[k] = next;
            next += 1;
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {} {}", index[f[0]], index[f[1]], index[f[2]], index[f[3]]);
        }
        for line in &self.polylines {
            let pts: Vec<&Vec3<T>> = line.iter().filter(|p| p.is_finite()).collect();
            if pts.len() < 2 {
                continue;
            }
            let first = next;
            for p in &pts {
                let _ = writeln!(out, "v {} {} {}", to64(p.x), to64(p.y), to64(p.z));
                next += 1;
            }
            let ids: Vec<String> = (first..next).map(|k| k.to_string()).collect();
            let _ = writeln!(out, "l {}", ids.join(" "));
        }
        (out, next - offset - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::building_block;

    #[test]
    fn guard_and_cut_cells_are_dropped() {
        let s = building_block::<f64>("r1", 0.0).unwrap();
        let m = build_mesh(&s, Grid::square(11, 1.0));
        assert!(m.faces.len() < 100);
        let obj = m.to_obj();
        assert!(!obj.contains("NaN") && !obj.contains("inf"));
        // no face straddles the negative u-axis
        for f in &m.faces {
            let (i0, j0) = (f[0] / 11, f[0] % 11);
            assert!(!crosses_cut([m.grid.u(i0), m.grid.u(i0 + 1)], [m.grid.v(j0), m.grid.v(j0 + 1)]));
        }
    }

    #[test]
    fn entire_surface_keeps_all_cells() {
        let s = building_block::<f64>("r8", 0.0).unwrap();
        let m = build_mesh(&s, Grid::square(5, 1.0));
        assert_eq!(m.faces.len(), 16);
        assert_eq!(m.to_obj().lines().filter(|l| l.starts_with("v ")).count(), 25);
    }

    #[test]
    fn objects_share_numbering() {
        let s = building_block::<f64>("r8", 0.0).unwrap();
        let mut a = build_mesh(&s, Grid::square(3, 1.0));
        a.polylines.push(vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)]);
        let b = build_mesh(&s, Grid::square(2, 1.0));
        let obj = objects_to_obj(&[("a".to_string(), a), ("b".to_string(), b)]);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 9 + 2 + 4);
        assert!(obj.contains("l 10 11"));
        assert!(obj.lines().any(|l| l == "f 12 14 15 13"), "{obj}");
    }
}
