//! Normalized volume of the fan polytope `conv(b_1, ..., b_m)`.
//!
//! Facets are found by brute force over affinely independent `n`-subsets;
//! the polytope is then triangulated by pulling from the lowest-index point
//! of each face, recursing through faces obtained as intersections with
//! facets.

use std::collections::BTreeSet;

use crate::linalg::{self, IntMatrix};
use crate::toric_geom::Fan;

pub fn fan_polytope_volume(f: &Fan) -> u64 {
    normalized_volume(f.rays())
}

/// `n!` times the Euclidean volume of the convex hull of full-dimensional
/// integer points.
pub fn normalized_volume(points: &[Vec<i64>]) -> u64 {
    let n = points[0].len();
    let facets = facets(points, n);
    let all: BTreeSet<usize> = (0..points.len()).collect();
    triangulate(points, &all, n, &facets)
        .iter()
        .map(|s| simplex_volume(points, s))
        .sum()
}

fn simplex_volume(points: &[Vec<i64>], simplex: &[usize]) -> u64 {
    let base = &points[simplex[0]];
    let rows: IntMatrix = simplex[1..]
        .iter()
        .map(|&i| points[i].iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    linalg::det_int(&rows).unsigned_abs()
}

fn affine_dim(points: &[Vec<i64>], set: &BTreeSet<usize>) -> usize {
    let mut it = set.iter();
    let Some(&first) = it.next() else { return 0 };
    let rows: IntMatrix = it
        .map(|&i| points[i].iter().zip(&points[first]).map(|(a, b)| a - b).collect())
        .collect();
    if rows.is_empty() {
        0
    } else {
        linalg::rank_int(&rows)
    }
}

fn facets(points: &[Vec<i64>], n: usize) -> Vec<BTreeSet<usize>> {
    let mut out: Vec<BTreeSet<usize>> = Vec::new();
    for subset in linalg::subsets_of_size(points.len(), n) {
        let base = &points[subset[0]];
        let diffs: IntMatrix = subset[1..]
            .iter()
            .map(|&i| points[i].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let normal = linalg::orthogonal_complement_vector(&diffs, n);
        if normal.iter().all(|&x| x == 0) {
            continue;
        }
        let level = |p: &Vec<i64>| p.iter().zip(&normal).map(|(a, b)| a * b).sum::<i64>();
        let c = level(base);
        let (mut above, mut below) = (false, false);
        let mut on = BTreeSet::new();
        for (i, p) in points.iter().enumerate() {
            let v = level(p) - c;
            match v.signum() {
                1 => above = true,
                -1 => below = true,
                _ => {
                    on.insert(i);
                }
            }
        }
        if !(above && below) && !out.contains(&on) {
            out.push(on);
        }
    }
    out
}

fn triangulate(
    points: &[Vec<i64>],
    face: &BTreeSet<usize>,
    dim: usize,
    facets: &[BTreeSet<usize>],
) -> Vec<Vec<usize>> {
    let apex = *face.iter().next().unwrap();
    if dim == 0 {
        return vec![vec![apex]];
    }
    let mut sub_faces: Vec<BTreeSet<usize>> = Vec::new();
    for g in facets {
        let inter: BTreeSet<usize> = face.intersection(g).copied().collect();
        if inter.is_empty() || inter == *face || sub_faces.contains(&inter) {
            continue;
        }
        if affine_dim(points, &inter) == dim - 1 {
            sub_faces.push(inter);
        }
    }
    let mut out = Vec::new();
    for g in sub_faces.iter().filter(|g| !g.contains(&apex)) {
        for mut s in triangulate(points, g, dim - 1, facets) {
            s.insert(0, apex);
            out.push(s);
        }
    }
    out
}
