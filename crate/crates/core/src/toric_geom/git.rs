use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, rat, IntMatrix};
use crate::toric_geom::CurveClass;

/// Largest number of toric divisors accepted; stability checks enumerate
/// subsets of the charge vectors.
pub const MAX_DIVISORS: usize = 16;

/// Charge matrix of the torus action (row `i` is `D_i` in the basis
/// `p_1..p_k`) together with a stability condition `omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct GitPresentation {
    charges: IntMatrix,
    omega: Vec<BigRational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabilityReport {
    /// `omega` lies in the cone spanned by the `D_i`.
    pub a: bool,
    /// Every positive-span representation of `omega` uses a spanning set.
    pub b: bool,
    /// The cone spanned by the `D_i` is strictly convex.
    pub c: bool,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.a && self.b && self.c
    }

    pub fn first_failure(&self) -> Option<char> {
        [('a', self.a), ('b', self.b), ('c', self.c)]
            .into_iter()
            .find(|(_, ok)| !ok)
            .map(|(c, _)| c)
    }
}

impl GitPresentation {
    pub fn new(charges: IntMatrix, omega: Vec<BigRational>) -> Result<Self> {
        let m = charges.len();
        let k = omega.len();
        if k == 0 {
            return Err(Error::Dimension("stability vector is empty (k = 0)".into()));
        }
        if m > MAX_DIVISORS {
            return Err(Error::Dimension(format!("{m} divisors exceeds the limit of {MAX_DIVISORS}")));
        }
        if m <= k {
            return Err(Error::Dimension(format!("need m > k, got m = {m}, k = {k}")));
        }
        if let Some(i) = charges.iter().position(|r| r.len() != k) {
            return Err(Error::Dimension(format!("charge row {i} has length {}, expected {k}", charges[i].len())));
        }
        Ok(Self { charges, omega })
    }

    pub fn from_integer_omega(charges: IntMatrix, omega: &[i64]) -> Result<Self> {
        Self::new(charges, omega.iter().map(|&x| rat(x)).collect())
    }

    pub fn charges(&self) -> &IntMatrix {
        &self.charges
    }

    pub fn omega(&self) -> &[BigRational] {
        &self.omega
    }

    pub fn m(&self) -> usize {
        self.charges.len()
    }

    pub fn k(&self) -> usize {
        self.omega.len()
    }

    pub fn n(&self) -> usize {
        self.m() - self.k()
    }

    /// `D_i` as a vector in the `p`-basis.
    pub fn divisor(&self, i: usize) -> &[i64] {
        &self.charges[i]
    }

    /// Image of a curve class in `Z^m`: the intersection numbers `D_i · d`.
    pub fn image(&self, d: &CurveClass) -> Vec<i64> {
        linalg::mat_vec_int(&self.charges, &d.0)
    }

    pub fn pairing(&self, i: usize, d: &CurveClass) -> i64 {
        self.charges[i].iter().zip(&d.0).map(|(a, b)| a * b).sum()
    }

    /// `c_1 · d = sum_i D_i · d`.
    pub fn c1_degree(&self, d: &CurveClass) -> i64 {
        self.image(d).iter().sum()
    }

    pub fn omega_degree(&self, d: &CurveClass) -> BigRational {
        linalg::dot_rat_int(&self.omega, &d.0)
    }

    pub(crate) fn divisor_vectors(&self) -> Vec<Vec<BigRational>> {
        linalg::to_rational_matrix(&self.charges)
    }
}

/// Exact test of the three chamber conditions on `omega`.
pub fn check_stability(g: &GitPresentation) -> Result<StabilityReport> {
    let k = g.k();
    let rank = linalg::rank_int(g.charges());
    if rank < k {
        return Err(Error::RankDeficient { rank, expected: k });
    }
    let gens = g.divisor_vectors();
    let omega = g.omega();
    let a = linalg::positive_span_witness(&gens, omega, 0..=k).is_some();
    let b = k == 0 || linalg::positive_span_witness(&gens, omega, 0..=k - 1).is_none();
    let c = strictly_convex(g);
    Ok(StabilityReport { a, b, c })
}

/// A cone generated by the nonzero `D_i` contains a line iff some circuit of
/// the `D_i` carries a kernel vector of constant sign.
fn strictly_convex(g: &GitPresentation) -> bool {
    let nonzero: Vec<usize> = (0..g.m()).filter(|&i| g.divisor(i).iter().any(|&x| x != 0)).collect();
    let k = g.k();
    for size in 2..=(k + 1).min(nonzero.len()) {
        for subset in linalg::subsets_of_size(nonzero.len(), size) {
            let rows: IntMatrix = subset.iter().map(|&s| g.divisor(nonzero[s]).to_vec()).collect();
            if linalg::rank_int(&rows) != size - 1 {
                continue;
            }
            // left kernel of the rows is one-dimensional for a circuit
            let ker = linalg::integer_left_kernel(&rows, k);
            if ker.len() != 1 {
                continue;
            }
            let v = &ker[0];
            if v.iter().all(|x| x.is_positive()) || v.iter().all(|x| x.is_negative()) {
                return false;
            }
        }
    }
    true
}

/// The index sets `J` of size `k` with `omega` in the open cone of `D_J`;
/// their complements are the maximal cones of the GIT fan. Returns the
/// complements together with `|det D_J|`.
pub(crate) fn chamber_cones(g: &GitPresentation) -> Vec<(Vec<usize>, i64)> {
    let m = g.m();
    let k = g.k();
    let mut out = Vec::new();
    for subset in linalg::subsets_of_size(m, k) {
        let rows: IntMatrix = subset.iter().map(|&j| g.divisor(j).to_vec()).collect();
        let det = linalg::det_int(&rows);
        if det == 0 {
            continue;
        }
        // omega = sum_j lambda_j D_j  <=>  rows^T lambda = omega
        let at = linalg::transpose(&linalg::to_rational_matrix(&rows), k);
        let Some(lambda) = linalg::solve_square(&at, g.omega()) else { continue };
        if lambda.iter().all(|x| x.is_positive() && !x.is_zero()) {
            let cone: Vec<usize> = (0..m).filter(|i| !subset.contains(i)).collect();
            out.push((cone, det.abs()));
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn git(charges: IntMatrix, omega: &[i64]) -> GitPresentation {
        GitPresentation::from_integer_omega(charges, omega).unwrap()
    }

    #[test]
    fn projective_plane_is_stable() {
        let g = git(vec![vec![1], vec![1], vec![1]], &[1]);
        let r = check_stability(&g).unwrap();
        assert_eq!(r, StabilityReport { a: true, b: true, c: true });
    }

    #[test]
    fn zero_omega_fails_condition_b() {
        let g = git(vec![vec![1], vec![1], vec![1]], &[0]);
        let r = check_stability(&g).unwrap();
        assert!(r.a);
        assert!(!r.b);
        assert!(!r.is_stable());
        assert_eq!(r.first_failure(), Some('b'));
    }

    #[test]
    fn opposite_charges_are_not_strictly_convex() {
        let g = git(vec![vec![1], vec![-1]], &[1]);
        let r = check_stability(&g).unwrap();
        assert!(!r.c);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let g = git(vec![vec![1, 2], vec![2, 4], vec![1, 2]], &[1, 2]);
        assert!(matches!(check_stability(&g), Err(Error::RankDeficient { rank: 1, expected: 2 })));
    }

    #[test]
    fn omega_on_a_wall_fails_b() {
        // P^1 x P^1 with omega on the boundary ray of the nef cone
        let g = git(vec![vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]], &[1, 0]);
        let r = check_stability(&g).unwrap();
        assert!(r.a && !r.b && r.c);
    }

    #[test]
    fn chamber_cones_of_the_plane() {
        let g = git(vec![vec![1], vec![1], vec![1]], &[1]);
        let cones: Vec<Vec<usize>> = chamber_cones(&g).into_iter().map(|(c, _)| c).collect();
        assert_eq!(cones, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }
}
