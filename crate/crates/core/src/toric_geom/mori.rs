use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, rat, IntMatrix};
use crate::toric_geom::{CurveClass, ToricVariety};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeakFanoReport {
    pub weak_fano: bool,
    pub fano: bool,
}

/// One curve class per wall, in the order of [`crate::toric_geom::Fan::walls`].
pub fn wall_curve_classes(tv: &ToricVariety) -> Vec<CurveClass> {
    tv.wall_classes().to_vec()
}

pub fn is_weak_fano(tv: &ToricVariety) -> WeakFanoReport {
    let degrees: Vec<i64> = tv.wall_classes().iter().map(|d| tv.git().c1_degree(d)).collect();
    WeakFanoReport {
        weak_fano: degrees.iter().all(|&x| x >= 0),
        fano: degrees.iter().all(|&x| x > 0),
    }
}

/// Primitive generators of the extremal rays of the cone spanned by
/// `vectors`, deduplicated and sorted.
pub(crate) fn extremal_generators(vectors: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let mut prim: Vec<Vec<i64>> = vectors
        .iter()
        .filter(|v| v.iter().any(|&x| x != 0))
        .map(|v| linalg::primitive(v))
        .collect();
    prim.sort();
    prim.dedup();
    let rational: Vec<Vec<BigRational>> = linalg::to_rational_matrix(&prim);
    let mut out = Vec::new();
    for (i, v) in prim.iter().enumerate() {
        let others: Vec<Vec<BigRational>> = rational
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, w)| w.clone())
            .collect();
        // v is extremal iff it is not a positive combination of the others
        if linalg::positive_span_witness(&others, &rational[i], 1..=dim).is_none() {
            out.push(v.clone());
        }
    }
    out
}

/// Primitive extreme rays of the dual cone `{x : x · g >= 0 for all g}`.
pub(crate) fn dual_extreme_rays(generators: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let gens: Vec<Vec<i64>> = generators.iter().filter(|g| g.iter().any(|&x| x != 0)).cloned().collect();
    let mut out: Vec<Vec<i64>> = Vec::new();
    let candidates: Vec<Vec<i64>> = if dim == 1 {
        vec![vec![1], vec![-1]]
    } else {
        linalg::subsets_of_size(gens.len(), dim - 1)
            .into_iter()
            .filter_map(|s| {
                let rows: IntMatrix = s.iter().map(|&i| gens[i].clone()).collect();
                let v = linalg::orthogonal_complement_vector(&rows, dim);
                v.iter().any(|&x| x != 0).then_some(v)
            })
            .flat_map(|v| [v.clone(), v.iter().map(|x| -x).collect()])
            .collect()
    };
    for cand in candidates {
        let nonneg = gens.iter().all(|g| g.iter().zip(&cand).map(|(a, b)| a * b).sum::<i64>() >= 0);
        if nonneg && !out.contains(&cand) {
            out.push(cand);
        }
    }
    out.sort();
    out
}

/// Lattice points `d` of the Mori cone with `0 <= omega · d <= bound`,
/// sorted by `omega`-degree and then lexicographically.
pub fn mori_points(tv: &ToricVariety, omega: &[BigRational], bound: i64) -> Result<Vec<CurveClass>> {
    let gens = tv.mori_generators();
    let k = tv.git().k();
    if omega.len() != k {
        return Err(Error::Dimension(format!("omega has length {}, expected {k}", omega.len())));
    }
    for g in gens {
        if !linalg::dot_rat_int(omega, g).is_positive() {
            return Err(Error::UnboundedEnumeration(format!("omega · {g:?} is not positive")));
        }
    }
    if bound < 0 {
        return Ok(Vec::new());
    }
    let bound_q = rat(bound);
    let degree = |d: &[i64]| linalg::dot_rat_int(omega, d);
    let mut out: Vec<Vec<i64>> = Vec::new();
    let basis_det = (gens.len() == k).then(|| linalg::det_int(&linalg::transpose(gens, k)));
    if basis_det.is_some_and(|d| d.abs() == 1) {
        // simplicial and unimodular: nonnegative integer combinations
        let steps: Vec<BigRational> = gens.iter().map(|g| degree(g)).collect();
        let mut coeffs = vec![0i64; k];
        enumerate_combinations(0, &steps, &bound_q, &mut coeffs, BigRational::zero(), &mut |c| {
            let mut d = vec![0i64; k];
            for (g, &ci) in gens.iter().zip(c) {
                for (x, y) in d.iter_mut().zip(g) {
                    *x += ci * y;
                }
            }
            out.push(d);
        });
    } else {
        // bounded box: any d = sum mu_g g with mu_g <= bound / (omega · g)
        let limits: Vec<i64> = (0..k)
            .map(|a| {
                gens.iter()
                    .map(|g| (rat(g[a].abs()) * &bound_q / degree(g)).floor().to_integer().to_i64().unwrap())
                    .sum()
            })
            .collect();
        let mut d = vec![0i64; k];
        box_points(0, &limits, &mut d, &mut |p| {
            if tv.mori_contains(p) && degree(p) <= bound_q {
                out.push(p.to_vec());
            }
        });
    }
    out.sort_by(|a, b| degree(a).cmp(&degree(b)).then_with(|| a.cmp(b)));
    out.dedup();
    Ok(out.into_iter().map(CurveClass).collect())
}

fn enumerate_combinations(
    idx: usize,
    steps: &[BigRational],
    bound: &BigRational,
    coeffs: &mut Vec<i64>,
    used: BigRational,
    emit: &mut dyn FnMut(&[i64]),
) {
    if idx == steps.len() {
        emit(coeffs);
        return;
    }
    let mut c = 0i64;
    let mut acc = used;
    while &acc <= bound {
        coeffs[idx] = c;
        enumerate_combinations(idx + 1, steps, bound, coeffs, acc.clone(), emit);
        c += 1;
        acc += &steps[idx];
    }
    coeffs[idx] = 0;
}

fn box_points(idx: usize, limits: &[i64], d: &mut Vec<i64>, emit: &mut dyn FnMut(&[i64])) {
    if idx == limits.len() {
        emit(d);
        return;
    }
    for x in -limits[idx]..=limits[idx] {
        d[idx] = x;
        box_points(idx + 1, limits, d, emit);
    }
    d[idx] = 0;
}
