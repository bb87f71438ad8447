//! Smooth projective toric varieties from charge data or from a fan.

pub mod fan;
pub mod git;
pub mod mori;
pub mod polytope;

use num_rational::BigRational;

use crate::error::Result;
use crate::linalg::{self, IntMatrix};

pub use fan::{fan_from_git, git_from_fan, Fan, Wall};
pub use git::{check_stability, GitPresentation, StabilityReport, MAX_DIVISORS};
pub use mori::{is_weak_fano, mori_points, wall_curve_classes, WeakFanoReport};
pub use polytope::{fan_polytope_volume, normalized_volume};

/// A curve class in the `p`-dual basis of `H_2(X; Z) = Z^k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveClass(pub Vec<i64>);

impl CurveClass {
    pub fn zero(k: usize) -> Self {
        CurveClass(vec![0; k])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &CurveClass) -> CurveClass {
        CurveClass(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &CurveClass) -> CurveClass {
        CurveClass(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

/// Both presentations of one variety together with the data derived from
/// them: the left inverse of the charge matrix, curve classes of walls, Mori
/// cone generators and nef cone rays (all in the `p` basis).
#[derive(Debug, Clone)]
pub struct ToricVariety {
    git: GitPresentation,
    fan: Fan,
    left_inverse: IntMatrix,
    walls: Vec<Wall>,
    wall_classes: Vec<CurveClass>,
    mori_generators: Vec<Vec<i64>>,
    nef_rays: Vec<Vec<i64>>,
}

impl ToricVariety {
    pub fn from_git(git: GitPresentation) -> Result<Self> {
        let fan = fan_from_git(&git)?;
        Self::assemble(git, fan)
    }

    pub fn from_fan(fan: Fan, omega_hint: Option<&[BigRational]>) -> Result<Self> {
        let git = git_from_fan(&fan, omega_hint)?;
        Self::assemble(git, fan)
    }

    fn assemble(git: GitPresentation, fan: Fan) -> Result<Self> {
        let k = git.k();
        let (_, left_inverse) = fan::exact_sequence(git.charges(), k)?;
        let walls = fan.walls();
        let wall_classes: Vec<CurveClass> = walls
            .iter()
            .map(|w| CurveClass(linalg::mat_vec_int(&left_inverse, &fan::wall_relation(&fan, w))))
            .collect();
        let raw: Vec<Vec<i64>> = wall_classes.iter().map(|d| d.0.clone()).collect();
        let mut mori_generators = mori::extremal_generators(&raw, k);
        mori_generators.sort_by(|a, b| b.cmp(a));
        let nef_rays = mori::dual_extreme_rays(&mori_generators, k);
        Ok(Self { git, fan, left_inverse, walls, wall_classes, mori_generators, nef_rays })
    }

    pub fn git(&self) -> &GitPresentation {
        &self.git
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn k(&self) -> usize {
        self.git.k()
    }

    pub fn n(&self) -> usize {
        self.fan.n()
    }

    pub fn m(&self) -> usize {
        self.fan.m()
    }

    /// `k × m` integer matrix `L` with `L · charges = id`.
    pub fn left_inverse(&self) -> &IntMatrix {
        &self.left_inverse
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn wall_classes(&self) -> &[CurveClass] {
        &self.wall_classes
    }

    pub fn mori_generators(&self) -> &[Vec<i64>] {
        &self.mori_generators
    }

    pub fn nef_rays(&self) -> &[Vec<i64>] {
        &self.nef_rays
    }

    /// Whether `d` is a nonnegative combination of the Mori generators.
    pub fn mori_contains(&self, d: &[i64]) -> bool {
        let gens = linalg::to_rational_matrix(&self.mori_generators);
        let target: Vec<BigRational> = d.iter().map(|&x| linalg::rat(x)).collect();
        linalg::positive_span_witness(&gens, &target, 0..=self.k()).is_some()
    }

    /// Curve class of the relation `sum_{i in P} b_i = sum c_j b_j` of a
    /// primitive collection `P`, with the right side taken in the cone
    /// containing `sum_{i in P} b_i`.
    pub fn primitive_relation(&self, collection: &[usize]) -> CurveClass {
        let n = self.n();
        let v: Vec<i64> = (0..n).map(|r| collection.iter().map(|&i| self.fan.rays()[i][r]).sum()).collect();
        let (cone, coords) = self.cone_coordinates(&v);
        let mut rel = vec![0i64; self.m()];
        for &i in collection {
            rel[i] += 1;
        }
        for (pos, &j) in cone.iter().enumerate() {
            rel[j] -= coords[pos];
        }
        CurveClass(linalg::mat_vec_int(&self.left_inverse, &rel))
    }

    /// Smallest cone of the fan containing `v`, as a sorted index set, and
    /// the (positive integer) coordinates of `v` on its rays.
    pub fn cone_coordinates(&self, v: &[i64]) -> (Vec<usize>, Vec<i64>) {
        for cone in self.fan.max_cones() {
            let c = self.fan.coordinates_in_cone(cone, v);
            if c.iter().all(|&x| x >= 0) {
                let support: Vec<usize> = cone.iter().zip(&c).filter(|(_, &x)| x > 0).map(|(&i, _)| i).collect();
                let coords: Vec<i64> = c.into_iter().filter(|&x| x > 0).collect();
                return (support, coords);
            }
        }
        unreachable!("a complete fan covers every vector")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    fn hirzebruch(a: i64) -> ToricVariety {
        let fan = Fan::new(
            vec![vec![1, 0], vec![0, 1], vec![-1, a], vec![0, -1]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        )
        .unwrap();
        ToricVariety::from_fan(fan, None).unwrap()
    }

    #[test]
    fn wall_classes_pair_to_one_with_the_wall_divisors() {
        let tv = hirzebruch(1);
        for (w, d) in tv.walls().iter().zip(tv.wall_classes()) {
            assert_eq!(tv.git().pairing(w.left, d), 1);
            assert_eq!(tv.git().pairing(w.right, d), 1);
        }
    }

    #[test]
    fn left_inverse_is_a_left_inverse() {
        let tv = hirzebruch(2);
        let prod = linalg::mat_mul_int(tv.left_inverse(), tv.git().charges());
        assert_eq!(prod, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn primitive_relations_of_hirzebruch_one() {
        let tv = hirzebruch(1);
        let pcs = tv.fan().primitive_collections();
        assert_eq!(pcs, vec![vec![0, 2], vec![1, 3]]);
        let images: Vec<Vec<i64>> = pcs.iter().map(|p| tv.git().image(&tv.primitive_relation(p))).collect();
        assert_eq!(images, vec![vec![1, -1, 1, 0], vec![0, 1, 0, 1]]);
    }

    #[test]
    fn nef_rays_are_dual_to_mori() {
        let tv = hirzebruch(2);
        for r in tv.nef_rays() {
            for g in tv.mori_generators() {
                assert!(r.iter().zip(g).map(|(a, b)| a * b).sum::<i64>() >= 0);
            }
        }
        assert!(tv.mori_contains(&[1, 1]));
        assert!(!tv.mori_contains(&[-1, 0]));
        let _ = rat(0);
    }

    #[test]
    fn cone_coordinates_support() {
        let tv = hirzebruch(2);
        // b_0 + b_2 = (0, 2) = 2 b_1
        let (cone, coords) = tv.cone_coordinates(&[0, 2]);
        assert_eq!(cone, vec![1]);
        assert_eq!(coords, vec![2]);
    }
}
