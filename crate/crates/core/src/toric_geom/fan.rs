use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, rat, IntMatrix};
use crate::toric_geom::git::{self, check_stability, GitPresentation};

/// A complete smooth simplicial fan: primitive rays `b_i` and maximal cones
/// given as sorted index sets (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fan {
    rays: IntMatrix,
    max_cones: Vec<Vec<usize>>,
}

/// Codimension-one face shared by two maximal cones `face ∪ {left}` and
/// `face ∪ {right}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wall {
    pub face: Vec<usize>,
    pub left: usize,
    pub right: usize,
}

impl Fan {
    /// Validates smoothness and completeness: every maximal cone unimodular,
    /// every wall shared by exactly two cones lying on opposite sides, the
    /// adjacency graph connected, every ray used, and a generic point covered
    /// exactly once.
    pub fn new(rays: IntMatrix, max_cones: Vec<Vec<usize>>) -> Result<Self> {
        let m = rays.len();
        if m == 0 {
            return Err(Error::InvalidFan("no rays".into()));
        }
        let n = rays[0].len();
        if n == 0 {
            return Err(Error::InvalidFan("rays are zero-dimensional".into()));
        }
        for (i, r) in rays.iter().enumerate() {
            if r.len() != n {
                return Err(Error::InvalidFan(format!("ray {i} has dimension {}, expected {n}", r.len())));
            }
            if linalg::gcd_vec(r) != 1 {
                return Err(Error::InvalidFan(format!("ray {i} is zero or not primitive")));
            }
        }
        let mut cones: Vec<Vec<usize>> = Vec::with_capacity(max_cones.len());
        for (c, cone) in max_cones.into_iter().enumerate() {
            let mut sorted = cone.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != n || cone.len() != n {
                return Err(Error::InvalidFan(format!("cone {c} must list {n} distinct rays")));
            }
            if let Some(&bad) = sorted.iter().find(|&&i| i >= m) {
                return Err(Error::InvalidFan(format!("cone {c} references missing ray {bad}")));
            }
            cones.push(sorted);
        }
        cones.sort();
        if cones.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidFan("duplicate maximal cone".into()));
        }
        if cones.is_empty() {
            return Err(Error::InvalidFan("no maximal cones".into()));
        }
        let fan = Fan { rays, max_cones: cones };
        fan.validate()?;
        Ok(fan)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        for cone in &self.max_cones {
            let d = linalg::det_int(&self.cone_matrix(cone));
            if d.abs() != 1 {
                return Err(Error::NotSmooth(format!("cone {cone:?} has |det| = {}", d.abs())));
            }
        }
        for i in 0..self.m() {
            if !self.max_cones.iter().any(|c| c.contains(&i)) {
                return Err(Error::EmptyDivisor(i));
            }
        }
        let mut faces: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (ci, cone) in self.max_cones.iter().enumerate() {
            for skip in 0..n {
                let face: Vec<usize> = cone.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &x)| x).collect();
                faces.entry(face).or_default().push(ci);
            }
        }
        for (face, owners) in &faces {
            if owners.len() != 2 {
                return Err(Error::InvalidFan(format!(
                    "face {face:?} lies in {} maximal cones (fan incomplete or overlapping)",
                    owners.len()
                )));
            }
            let (a, b) = (&self.max_cones[owners[0]], &self.max_cones[owners[1]]);
            let extra_a = *a.iter().find(|i| !face.contains(i)).unwrap();
            let extra_b = *b.iter().find(|i| !face.contains(i)).unwrap();
            let coords = self.coordinates_in_cone(a, &self.rays[extra_b]);
            let pos = a.iter().position(|&i| i == extra_a).unwrap();
            if coords[pos] >= 0 {
                return Err(Error::InvalidFan(format!("cones {a:?} and {b:?} overlap across face {face:?}")));
            }
        }
        // connectivity of the adjacency graph
        let mut seen = vec![false; self.max_cones.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(c) = stack.pop() {
            for owners in faces.values() {
                if owners.contains(&c) {
                    for &o in owners {
                        if !seen[o] {
                            seen[o] = true;
                            stack.push(o);
                        }
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidFan("maximal cones are not connected through walls".into()));
        }
        // a generic interior point of the first cone must lie in no other cone
        let first = &self.max_cones[0];
        let probe: Vec<BigRational> = (0..n)
            .map(|r| {
                first.iter().enumerate().fold(BigRational::zero(), |acc, (j, &i)| {
                    acc + rat(self.rays[i][r]) * linalg::rat_frac(1000 + 7 * j as i64 + (j * j) as i64, 1000)
                })
            })
            .collect();
        let covering = self
            .max_cones
            .iter()
            .filter(|cone| {
                let a = linalg::to_rational_matrix(&self.cone_matrix(cone));
                linalg::solve_square(&a, &probe).is_some_and(|x| x.iter().all(|v| v.is_positive()))
            })
            .count();
        if covering != 1 {
            return Err(Error::InvalidFan(format!("generic point covered by {covering} cones")));
        }
        Ok(())
    }

    pub fn rays(&self) -> &IntMatrix {
        &self.rays
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    pub fn m(&self) -> usize {
        self.rays.len()
    }

    pub fn n(&self) -> usize {
        self.rays[0].len()
    }

    /// `n × n` matrix whose columns are the rays of `cone`.
    pub fn cone_matrix(&self, cone: &[usize]) -> IntMatrix {
        (0..self.n()).map(|r| cone.iter().map(|&i| self.rays[i][r]).collect()).collect()
    }

    /// Integer coordinates of `v` in the ray basis of a maximal cone.
    pub fn coordinates_in_cone(&self, cone: &[usize], v: &[i64]) -> Vec<i64> {
        let inv = linalg::inverse_unimodular(&self.cone_matrix(cone)).expect("maximal cones are unimodular");
        linalg::mat_vec_int(&inv, v)
    }

    /// Whether the index set spans a cone of the fan.
    pub fn is_cone(&self, set: &[usize]) -> bool {
        self.max_cones.iter().any(|c| set.iter().all(|i| c.contains(i)))
    }

    pub fn walls(&self) -> Vec<Wall> {
        let n = self.n();
        let mut faces: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for cone in &self.max_cones {
            for skip in 0..n {
                let face: Vec<usize> = cone.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &x)| x).collect();
                faces.entry(face).or_default().push(cone[skip]);
            }
        }
        faces
            .into_iter()
            .map(|(face, extra)| Wall { face, left: extra[0], right: extra[1] })
            .collect()
    }

    /// Rows of the `n × m` ray matrix (the map `Z^m -> N`).
    pub fn ray_matrix(&self) -> IntMatrix {
        linalg::transpose(&self.rays, self.n())
    }

    /// True when both fans have the same cones and some `GL(n, Z)` element
    /// maps every ray of `self` to the corresponding ray of `other`.
    pub fn is_isomorphic_to(&self, other: &Fan) -> bool {
        if self.m() != other.m() || self.n() != other.n() || self.max_cones != other.max_cones {
            return false;
        }
        let cone = &self.max_cones[0];
        let Some(inv) = linalg::inverse_unimodular(&self.cone_matrix(cone)) else { return false };
        let a = linalg::mat_mul_int(&other.cone_matrix(cone), &inv);
        self.rays.iter().zip(&other.rays).all(|(b, b2)| &linalg::mat_vec_int(&a, b) == b2)
    }

    /// Same fan with rays rewritten in the basis dual to `cone`'s rays, so
    /// that those rays become the standard basis vectors.
    pub fn adapted_to(&self, cone: &[usize]) -> Fan {
        let inv = linalg::inverse_unimodular(&self.cone_matrix(cone)).expect("maximal cones are unimodular");
        Fan {
            rays: self.rays.iter().map(|b| linalg::mat_vec_int(&inv, b)).collect(),
            max_cones: self.max_cones.clone(),
        }
    }

    /// Minimal index sets that do not span a cone.
    pub fn primitive_collections(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for size in 2..=self.n() + 1 {
            for s in linalg::subsets_of_size(self.m(), size) {
                if self.is_cone(&s) {
                    continue;
                }
                let minimal = (0..s.len()).all(|skip| {
                    let sub: Vec<usize> = s.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &x)| x).collect();
                    self.is_cone(&sub)
                });
                if minimal {
                    out.push(s);
                }
            }
        }
        out
    }
}

/// Integer matrices `(b, l)` completing `0 -> Z^k --charges--> Z^m --b--> Z^n -> 0`
/// with `l` a left inverse of the charge matrix. Fails when the cokernel has
/// torsion.
pub(crate) fn exact_sequence(charges: &IntMatrix, k: usize) -> Result<(IntMatrix, IntMatrix)> {
    let (u, h, rank) = linalg::hermite_rows(charges, k);
    if rank < k {
        return Err(Error::RankDeficient { rank, expected: k });
    }
    let top: IntMatrix = h[..k].to_vec();
    let det = linalg::det_int(&top);
    if det.abs() != 1 {
        return Err(Error::NotSmooth(format!("Z^m / image(charges) has torsion of order {}", det.abs())));
    }
    let hinv = linalg::inverse_unimodular(&top).expect("unimodular");
    let left = linalg::mat_mul_int(&hinv, &u[..k].to_vec());
    let b = u[k..].to_vec();
    Ok((b, left))
}

/// Builds the fan of the GIT quotient: rays from a Hermite section of the
/// charge matrix, expressed in the basis dual to the first maximal cone;
/// maximal cones are the complements of index sets whose open positive span
/// contains `omega`.
pub fn fan_from_git(g: &GitPresentation) -> Result<Fan> {
    let report = check_stability(g)?;
    if let Some(cond) = report.first_failure() {
        return Err(Error::Unstable { condition: cond, detail: stability_detail(cond).into() });
    }
    let cones = git::chamber_cones(g);
    if let Some((cone, det)) = cones.iter().find(|(_, d)| *d != 1) {
        return Err(Error::NotSmooth(format!("chamber cone {cone:?} has index {det}")));
    }
    let cones: Vec<Vec<usize>> = cones.into_iter().map(|(c, _)| c).collect();
    if cones.is_empty() {
        return Err(Error::InvalidFan("chamber has no maximal cones".into()));
    }
    for i in 0..g.m() {
        if !cones.iter().any(|c| c.contains(&i)) {
            return Err(Error::EmptyDivisor(i));
        }
    }
    let (b, _) = exact_sequence(g.charges(), g.k())?;
    let rays: IntMatrix = linalg::transpose(&b, g.m());
    let raw = Fan { rays, max_cones: cones };
    let adapted = raw.adapted_to(&raw.max_cones[0].clone());
    Fan::new(adapted.rays, adapted.max_cones)
}

pub(crate) fn stability_detail(cond: char) -> &'static str {
    match cond {
        'a' => "omega is not in the cone spanned by the charge vectors",
        'b' => "omega lies in the positive span of a non-spanning set of charge vectors",
        _ => "the charge cone is not strictly convex",
    }
}

/// Relation vector in `Z^m` attached to a wall: `b_left + b_right` written in
/// the face rays.
pub(crate) fn wall_relation(f: &Fan, wall: &Wall) -> Vec<i64> {
    let mut cone = wall.face.clone();
    cone.push(wall.left);
    cone.sort_unstable();
    let coords = f.coordinates_in_cone(&cone, &f.rays[wall.right]);
    let mut r = vec![0i64; f.m()];
    for (pos, &i) in cone.iter().enumerate() {
        r[i] -= coords[pos];
    }
    r[wall.right] += 1;
    r
}

/// Inverse construction: the charge matrix is a basis of the relation
/// lattice of the rays (the Mori generators when they form a lattice basis)
/// and `omega` is `omega_hint` or an interior point of the nef chamber.
pub fn git_from_fan(f: &Fan, omega_hint: Option<&[BigRational]>) -> Result<GitPresentation> {
    let m = f.m();
    let n = f.n();
    let k = m - n;
    if k == 0 {
        return Err(Error::Dimension("fan has no relations (k = 0)".into()));
    }
    let kernel = linalg::integer_left_kernel(&f.rays, n);
    debug_assert_eq!(kernel.len(), k);
    let mut charges: IntMatrix = linalg::transpose(&kernel, m);
    let (_, left) = exact_sequence(&charges, k)?;
    let relations: Vec<Vec<i64>> = f.walls().iter().map(|w| wall_relation(f, w)).collect();
    let coords: Vec<Vec<i64>> = relations.iter().map(|r| linalg::mat_vec_int(&left, r)).collect();
    let gens = super::mori::extremal_generators(&coords, k);
    if gens.len() == k {
        let g_cols: IntMatrix = linalg::transpose(&gens, k);
        if linalg::det_int(&g_cols).abs() == 1 {
            let mut images: Vec<Vec<i64>> = gens.iter().map(|g| linalg::mat_vec_int(&charges, g)).collect();
            images.sort_by(|a, b| b.cmp(a));
            charges = linalg::transpose(&images, m);
        }
    }
    let (_, left) = exact_sequence(&charges, k)?;
    let walls: Vec<Vec<i64>> = relations.iter().map(|r| linalg::mat_vec_int(&left, r)).collect();
    let omega: Vec<BigRational> = match omega_hint {
        Some(h) => {
            if h.len() != k {
                return Err(Error::Dimension(format!("omega hint has length {}, expected {k}", h.len())));
            }
            h.to_vec()
        }
        None => {
            let rays = super::mori::dual_extreme_rays(&walls, k);
            let mut sum = vec![0i64; k];
            for r in &rays {
                for (s, x) in sum.iter_mut().zip(r) {
                    *s += x;
                }
            }
            linalg::primitive(&sum).into_iter().map(rat).collect()
        }
    };
    if walls.iter().any(|w| !linalg::dot_rat_int(&omega, w).is_positive()) {
        return Err(Error::NoAmpleClass("no class is positive on every wall curve".into()));
    }
    let git = GitPresentation::new(charges, omega)?;
    let rebuilt = fan_from_git(&git).map_err(|e| Error::NoAmpleClass(format!("fan is not a chamber fan: {e}")))?;
    if !rebuilt.is_isomorphic_to(f) {
        return Err(Error::NoAmpleClass("the chamber of omega does not reproduce the fan".into()));
    }
    Ok(git)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn git(charges: IntMatrix, omega: &[i64]) -> GitPresentation {
        GitPresentation::from_integer_omega(charges, omega).unwrap()
    }

    #[test]
    fn plane_from_charges() {
        let f = fan_from_git(&git(vec![vec![1], vec![1], vec![1]], &[1])).unwrap();
        assert_eq!(f.rays(), &vec![vec![1, 0], vec![0, 1], vec![-1, -1]]);
        assert_eq!(f.max_cones(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn product_of_lines_from_charges() {
        let f = fan_from_git(&git(vec![vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]], &[1, 1])).unwrap();
        let rays: BTreeSet<Vec<i64>> = f.rays().iter().cloned().collect();
        let expected: BTreeSet<Vec<i64>> = [vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]].into_iter().collect();
        assert_eq!(rays, expected);
        assert_eq!(f.max_cones().len(), 4);
    }

    #[test]
    fn incomplete_fan_is_rejected() {
        let err = Fan::new(vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0, 1], vec![1, 2]]).unwrap_err();
        assert_eq!(err.kind(), "InvalidFan");
    }

    #[test]
    fn singular_cone_is_rejected() {
        let err = Fan::new(
            vec![vec![1, 0], vec![1, 2], vec![-1, -1]],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap_err();
        assert_eq!(err.kind(), "NotSmooth");
    }

    #[test]
    fn double_cover_is_rejected() {
        // six rays going twice around the origin with each wall shared twice
        let rays = vec![vec![1, 0], vec![0, 1], vec![-1, -1], vec![1, 0], vec![0, 1], vec![-1, -1]];
        let cones = vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 4], vec![4, 5], vec![0, 5]];
        assert!(Fan::new(rays, cones).is_err());
    }

    #[test]
    fn hirzebruch_two_round_trip() {
        let f = Fan::new(
            vec![vec![1, 0], vec![0, 1], vec![-1, 2], vec![0, -1]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        )
        .unwrap();
        let g = git_from_fan(&f, None).unwrap();
        assert_eq!(g.charges(), &vec![vec![1, 0], vec![-2, 1], vec![1, 0], vec![0, 1]]);
        assert!(fan_from_git(&g).unwrap().is_isomorphic_to(&f));
    }

    #[test]
    fn plane_fan_to_charges() {
        let f = Fan::new(vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let g = git_from_fan(&f, None).unwrap();
        assert_eq!(g.charges(), &vec![vec![1], vec![1], vec![1]]);
        assert_eq!(g.omega(), &[rat(1)]);
    }

    #[test]
    fn omega_hint_outside_chamber_fails() {
        let f = Fan::new(vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let err = git_from_fan(&f, Some(&[rat(-1)])).unwrap_err();
        assert_eq!(err.kind(), "NoAmpleClass");
    }
}
