//! Quantum Stanley-Reisner ring and the small quantum product via the
//! Batyrev presentation, truncated at a bound on the `omega`-degree of `q^d`.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cohomology::{divisor_product, poly_mul, CohomClass, Monomial, Polynomial, RingPresentation};
use crate::error::{Error, Result};
use crate::linalg;
use crate::toric_geom::{is_weak_fano, mori_points, CurveClass, ToricVariety};

/// Map from curve class to the coefficient of `q^d`.
pub type QuantumClassSeries = BTreeMap<CurveClass, CohomClass<BigRational>>;
/// Truncated element of the Mori semigroup ring.
pub type QSeries = BTreeMap<CurveClass, BigRational>;

/// A maximal cone containing `v` and the coordinates of `v` on all `m` rays
/// (zero off the cone).
pub fn cone_coords(tv: &ToricVariety, v: &[i64]) -> (Vec<usize>, Vec<i64>) {
    let fan = tv.fan();
    for cone in fan.max_cones() {
        let c = fan.coordinates_in_cone(cone, v);
        if c.iter().all(|&x| x >= 0) {
            let mut full = vec![0i64; fan.m()];
            for (&i, &x) in cone.iter().zip(&c) {
                full[i] = x;
            }
            return (cone.clone(), full);
        }
    }
    unreachable!("a complete fan covers every vector")
}

/// The curve class whose image in `Z^m` is `c(v) + c(v') - c(v + v')`.
pub fn ell(tv: &ToricVariety, v: &[i64], w: &[i64]) -> Result<CurveClass> {
    let sum: Vec<i64> = v.iter().zip(w).map(|(a, b)| a + b).collect();
    let (_, cv) = cone_coords(tv, v);
    let (_, cw) = cone_coords(tv, w);
    let (_, cs) = cone_coords(tv, &sum);
    let rel: Vec<i64> = (0..tv.m()).map(|i| cv[i] + cw[i] - cs[i]).collect();
    let d = CurveClass(linalg::mat_vec_int(tv.left_inverse(), &rel));
    if tv.git().omega_degree(&d).is_negative() {
        return Err(Error::NotInMori(d.0));
    }
    Ok(d)
}

/// Element `sum_v c_v(q) w_v` of the quantum Stanley-Reisner ring.
#[derive(Debug, Clone, PartialEq)]
pub struct QsrElement {
    bound: i64,
    terms: BTreeMap<Vec<i64>, QSeries>,
}

impl QsrElement {
    pub fn zero(bound: i64) -> Self {
        QsrElement { bound, terms: BTreeMap::new() }
    }

    /// The basis element `w_v`.
    pub fn w(v: Vec<i64>, k: usize, bound: i64) -> Self {
        let coeff: QSeries = [(CurveClass::zero(k), BigRational::one())].into_iter().collect();
        QsrElement { bound, terms: [(v, coeff)].into_iter().collect() }
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, QSeries> {
        &self.terms
    }

    pub fn scale_q(&self, d: &CurveClass, c: BigRational, tv: &ToricVariety) -> Self {
        let mut out = QsrElement::zero(self.bound);
        for (v, series) in &self.terms {
            for (e, x) in series {
                out.add_term(v.clone(), e.add(d), x * &c, tv);
            }
        }
        out
    }

    pub fn add(&self, other: &QsrElement) -> QsrElement {
        let mut out = self.clone();
        for (v, series) in &other.terms {
            let entry = out.terms.entry(v.clone()).or_default();
            for (d, c) in series {
                *entry.entry(d.clone()).or_insert_with(BigRational::zero) += c;
            }
        }
        out.prune();
        out
    }

    fn add_term(&mut self, v: Vec<i64>, d: CurveClass, c: BigRational, tv: &ToricVariety) {
        if tv.git().omega_degree(&d) > linalg::rat(self.bound) {
            return;
        }
        *self.terms.entry(v).or_default().entry(d).or_insert_with(BigRational::zero) += c;
    }

    fn prune(&mut self) {
        for series in self.terms.values_mut() {
            series.retain(|_, c| !c.is_zero());
        }
        self.terms.retain(|_, s| !s.is_empty());
    }
}

/// Bilinear extension of `w_v w_v' = q^{ell(v, v')} w_{v + v'}`.
pub fn qsr_multiply(tv: &ToricVariety, x: &QsrElement, y: &QsrElement) -> Result<QsrElement> {
    let bound = x.bound.min(y.bound);
    let mut out = QsrElement::zero(bound);
    for (v, a) in &x.terms {
        for (w, b) in &y.terms {
            let l = ell(tv, v, w)?;
            let sum: Vec<i64> = v.iter().zip(w).map(|(s, t)| s + t).collect();
            for (da, ca) in a {
                for (db, cb) in b {
                    out.add_term(sum.clone(), da.add(db).add(&l), ca * cb, tv);
                }
            }
        }
    }
    out.prune();
    Ok(out)
}

/// Drops every coefficient carrying a nonzero power of `q`.
pub fn classical_limit(x: &QsrElement) -> QsrElement {
    let mut out = x.clone();
    for series in out.terms.values_mut() {
        series.retain(|d, _| d.is_zero());
    }
    out.prune();
    out
}

/// `prod u_i^{lhs_i} = q^d prod u_i^{rhs_i}` for a curve class `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicativeRelation {
    pub lhs: Vec<u32>,
    pub rhs: Vec<u32>,
    pub class: CurveClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatyrevRelations {
    pub multiplicative: Vec<MultiplicativeRelation>,
    /// Row `r` encodes `sum_i (b_i)_r u_i = 0`.
    pub linear: Vec<Vec<i64>>,
}

fn relation_for(tv: &ToricVariety, d: &CurveClass) -> MultiplicativeRelation {
    let image = tv.git().image(d);
    MultiplicativeRelation {
        lhs: image.iter().map(|&e| e.max(0) as u32).collect(),
        rhs: image.iter().map(|&e| (-e).max(0) as u32).collect(),
        class: d.clone(),
    }
}

pub fn batyrev_relations(tv: &ToricVariety) -> BatyrevRelations {
    let multiplicative = tv.mori_generators().iter().map(|g| relation_for(tv, &CurveClass(g.clone()))).collect();
    let linear = tv.fan().ray_matrix();
    BatyrevRelations { multiplicative, linear }
}

#[derive(Debug, Clone)]
struct Echelon {
    /// Fully reduced rows keyed by pivot column.
    rows: BTreeMap<usize, Vec<BigRational>>,
}

impl Echelon {
    fn reduce(&self, v: &mut [BigRational]) {
        for (&p, row) in &self.rows {
            if v[p].is_zero() {
                continue;
            }
            let f = v[p].clone();
            for (x, y) in v.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
    }

    fn insert(&mut self, mut v: Vec<BigRational>) {
        self.reduce(&mut v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else { return };
        let inv = v[p].recip();
        for x in v.iter_mut() {
            *x *= &inv;
        }
        for row in self.rows.values_mut() {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (x, y) in row.iter_mut().zip(&v) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.rows.insert(p, v);
    }
}

#[derive(Debug, Clone)]
struct GradedPiece {
    /// Columns `(index into points, monomial)`; basis columns come last.
    columns: Vec<(usize, Monomial)>,
    index: BTreeMap<(usize, Monomial), usize>,
    first_basis: usize,
    echelon: Echelon,
}

/// `H^*(X)[[q]]` truncated at `omega · d <= bound`, presented as the
/// polynomial ring in `p` and `q` modulo the Batyrev relations, one total
/// degree (`deg p_a = 1`, `deg q^d = c_1 · d`) at a time.
#[derive(Debug, Clone)]
pub struct QuantumRing<'a> {
    tv: &'a ToricVariety,
    pres: &'a RingPresentation,
    bound: i64,
    points: Vec<CurveClass>,
    point_index: BTreeMap<CurveClass, usize>,
    pieces: Vec<GradedPiece>,
    fano: bool,
}

fn monomials_up_to(k: usize, d: u32) -> Vec<Monomial> {
    fn rec(k: usize, left: u32, exact: bool, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if cur.len() == k {
            if !exact || left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(k, left - e, exact, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, d, true, &mut Vec::new(), &mut out);
    out
}

impl<'a> QuantumRing<'a> {
    /// Builds graded pieces up to total degree `max(2n, 3)`, enough for
    /// products of two arbitrary classes and of three divisors.
    pub fn new(tv: &'a ToricVariety, pres: &'a RingPresentation, bound: i64) -> Result<Self> {
        let max_degree = (2 * tv.n()).max(3);
        Self::with_max_degree(tv, pres, bound, max_degree)
    }

    pub fn with_max_degree(
        tv: &'a ToricVariety,
        pres: &'a RingPresentation,
        bound: i64,
        max_degree: usize,
    ) -> Result<Self> {
        let git = tv.git();
        let points = mori_points(tv, git.omega(), bound)?;
        let point_index: BTreeMap<CurveClass, usize> =
            points.iter().enumerate().map(|(i, d)| (d.clone(), i)).collect();
        let k = tv.k();
        let n = tv.n();

        let mut relation_classes: BTreeSet<CurveClass> = points.iter().filter(|d| !d.is_zero()).cloned().collect();
        for pc in tv.fan().primitive_collections() {
            relation_classes.insert(tv.primitive_relation(&pc));
        }
        let relations: Vec<(MultiplicativeRelation, Polynomial, Polynomial, u32)> = relation_classes
            .iter()
            .map(|d| {
                let r = relation_for(tv, d);
                let lhs = divisor_product(git.charges(), &exps(&r.lhs));
                let rhs = divisor_product(git.charges(), &exps(&r.rhs));
                let deg: u32 = r.lhs.iter().sum();
                (r, lhs, rhs, deg)
            })
            .collect();

        let mut pieces = Vec::with_capacity(max_degree + 1);
        for total in 0..=max_degree as i64 {
            let mut non_basis = Vec::new();
            let mut basis_cols = Vec::new();
            for (di, d) in points.iter().enumerate() {
                let rest = total - git.c1_degree(d);
                if rest < 0 {
                    continue;
                }
                let basis_here: &[Monomial] =
                    if (rest as usize) <= n { pres.basis_of_degree(rest as usize) } else { &[] };
                for m in monomials_up_to(k, rest as u32) {
                    if basis_here.contains(&m) {
                        basis_cols.push((di, m));
                    } else {
                        non_basis.push((di, m));
                    }
                }
            }
            let first_basis = non_basis.len();
            let columns: Vec<(usize, Monomial)> = non_basis.into_iter().chain(basis_cols).collect();
            let index: BTreeMap<(usize, Monomial), usize> =
                columns.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
            let mut echelon = Echelon { rows: BTreeMap::new() };
            for (r, lhs, rhs, deg) in &relations {
                for (ei, e) in points.iter().enumerate() {
                    let rest = total - git.c1_degree(e) - *deg as i64;
                    if rest < 0 {
                        continue;
                    }
                    let shifted = e.add(&r.class);
                    let target = point_index.get(&shifted).copied();
                    for m in monomials_up_to(k, rest as u32) {
                        let shift: Polynomial = [(m, BigRational::one())].into_iter().collect();
                        let mut row = vec![BigRational::zero(); columns.len()];
                        for (mono, c) in poly_mul(lhs, &shift) {
                            row[index[&(ei, mono)]] += c;
                        }
                        if let Some(ti) = target {
                            for (mono, c) in poly_mul(rhs, &shift) {
                                row[index[&(ti, mono)]] -= c;
                            }
                        }
                        echelon.insert(row);
                    }
                }
            }
            let pivots: BTreeSet<usize> = echelon.rows.keys().copied().collect();
            let expected: BTreeSet<usize> = (0..first_basis).collect();
            if pivots != expected {
                return Err(Error::PresentationInconsistent(format!(
                    "quantum relations in degree {total} do not leave the cohomology basis free"
                )));
            }
            pieces.push(GradedPiece { columns, index, first_basis, echelon });
        }
        Ok(QuantumRing { tv, pres, bound, points, point_index, pieces, fano: is_weak_fano(tv).fano })
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    /// False for weak-Fano models whose mirror map is nontrivial; products
    /// are then expressed in the B-model coordinates `q`.
    pub fn is_fano(&self) -> bool {
        self.fano
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.len() - 1
    }

    /// The class `alpha` viewed as a `q`-constant series.
    pub fn classical(&self, alpha: &CohomClass<BigRational>) -> QuantumClassSeries {
        let mut s = QuantumClassSeries::new();
        if !alpha.is_zero() {
            s.insert(CurveClass::zero(self.tv.k()), alpha.clone());
        }
        s
    }

    /// Product of two truncated series, reduced to normal form.
    pub fn multiply(&self, a: &QuantumClassSeries, b: &QuantumClassSeries) -> Result<QuantumClassSeries> {
        let git = self.tv.git();
        let mut by_degree: BTreeMap<usize, Vec<BigRational>> = BTreeMap::new();
        for (da, ca) in a {
            let pa = self.pres.to_polynomial(ca);
            for (db, cb) in b {
                let d = da.add(db);
                let Some(&di) = self.point_index.get(&d) else { continue };
                let pb = self.pres.to_polynomial(cb);
                for (m, c) in poly_mul(&pa, &pb) {
                    let total = (git.c1_degree(&d) + m.iter().sum::<u32>() as i64) as usize;
                    let piece = self.pieces.get(total).ok_or_else(|| {
                        Error::BoundExceeded(format!("product has degree {total} beyond {}", self.max_degree()))
                    })?;
                    let col = piece.index[&(di, m)];
                    let v = by_degree.entry(total).or_insert_with(|| vec![BigRational::zero(); piece.columns.len()]);
                    v[col] += c;
                }
            }
        }
        let mut out = QuantumClassSeries::new();
        for (total, mut v) in by_degree {
            let piece = &self.pieces[total];
            piece.echelon.reduce(&mut v);
            for col in piece.first_basis..piece.columns.len() {
                if v[col].is_zero() {
                    continue;
                }
                let (di, m) = &piece.columns[col];
                let entry = out.entry(self.points[*di].clone()).or_insert_with(|| self.pres.zero());
                *entry = entry.add(&self.pres.monomial_class::<BigRational>(m).scale(&v[col]));
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// `a ⋆ b` for a divisor class `a`.
    pub fn small_quantum_product(
        &self,
        a: &CohomClass<BigRational>,
        b: &CohomClass<BigRational>,
    ) -> Result<QuantumClassSeries> {
        if a.coeffs().iter().enumerate().any(|(i, c)| !c.is_zero() && self.pres.degree_of(i) != 1) {
            return Err(Error::Dimension("first factor must be a divisor class".into()));
        }
        self.multiply(&self.classical(a), &self.classical(b))
    }
}

fn exps(e: &[u32]) -> Vec<(usize, u32)> {
    e.iter().enumerate().filter(|(_, &x)| x > 0).map(|(i, &x)| (i, x)).collect()
}

pub fn series_sub(a: &QuantumClassSeries, b: &QuantumClassSeries, pres: &RingPresentation) -> QuantumClassSeries {
    let mut out = a.clone();
    for (d, c) in b {
        let entry = out.entry(d.clone()).or_insert_with(|| pres.zero());
        *entry = entry.sub(c);
    }
    out.retain(|_, c| !c.is_zero());
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DubrovinReport {
    pub bound: i64,
    pub commutativity_checks: usize,
    pub associativity_checks: usize,
    /// Largest absolute coefficient of any residual; exactly zero when flat.
    pub max_residual: BigRational,
}

/// Commutativity `p_a ⋆ p_b = p_b ⋆ p_a` and associativity
/// `(p_a ⋆ p_b) ⋆ p_c = p_a ⋆ (p_b ⋆ p_c)` over all divisor directions.
pub fn dubrovin_consistency(ring: &QuantumRing) -> Result<DubrovinReport> {
    let k = ring.tv.k();
    let p: Vec<QuantumClassSeries> = (0..k).map(|a| ring.classical(&ring.pres.p(a))).collect();
    let mut max_residual = BigRational::zero();
    let mut note = |s: &QuantumClassSeries| {
        for c in s.values() {
            for x in c.coeffs() {
                if x.abs() > max_residual {
                    max_residual = x.abs();
                }
            }
        }
    };
    let mut comm = 0;
    let mut assoc = 0;
    let mut products = vec![vec![QuantumClassSeries::new(); k]; k];
    for a in 0..k {
        for b in 0..k {
            products[a][b] = ring.multiply(&p[a], &p[b])?;
        }
    }
    for a in 0..k {
        for b in 0..k {
            note(&series_sub(&products[a][b], &products[b][a], ring.pres));
            comm += 1;
            for c in 0..k {
                let left = ring.multiply(&products[a][b], &p[c])?;
                let right = ring.multiply(&p[a], &products[b][c])?;
                note(&series_sub(&left, &right, ring.pres));
                assoc += 1;
            }
        }
    }
    Ok(DubrovinReport { bound: ring.bound, commutativity_checks: comm, associativity_checks: assoc, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use crate::toric_geom::{Fan, GitPresentation};

    fn from_git(charges: Vec<Vec<i64>>, omega: &[i64]) -> ToricVariety {
        ToricVariety::from_git(GitPresentation::from_integer_omega(charges, omega).unwrap()).unwrap()
    }

    fn hirzebruch(a: i64) -> ToricVariety {
        let fan = Fan::new(
            vec![vec![1, 0], vec![0, 1], vec![-1, a], vec![0, -1]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        )
        .unwrap();
        ToricVariety::from_fan(fan, None).unwrap()
    }

    #[test]
    fn cone_coords_on_the_plane() {
        let tv = from_git(vec![vec![1]; 3], &[1]);
        let (cone, c) = cone_coords(&tv, &[2, 1]);
        assert_eq!(cone, vec![0, 1]);
        assert_eq!(c, vec![2, 1, 0]);
        let (_, c) = cone_coords(&tv, &[-1, -1]);
        assert_eq!(c, vec![0, 0, 1]);
        let (_, c) = cone_coords(&tv, &[0, 0]);
        assert_eq!(c, vec![0, 0, 0]);
    }

    #[test]
    fn ell_of_opposite_points_on_the_line() {
        let tv = from_git(vec![vec![1]; 2], &[1]);
        let (b0, b1) = (tv.fan().rays()[0].clone(), tv.fan().rays()[1].clone());
        let d = ell(&tv, &b0, &b1).unwrap();
        assert_eq!(tv.git().image(&d), vec![1, 1]);
        assert!(ell(&tv, &b0, &b0).unwrap().is_zero());
    }

    #[test]
    fn qsr_products() {
        let tv = from_git(vec![vec![1]; 3], &[1]);
        let rays = tv.fan().rays().clone();
        let w = |v: &Vec<i64>| QsrElement::w(v.clone(), 1, 3);
        let prod = qsr_multiply(&tv, &qsr_multiply(&tv, &w(&rays[0]), &w(&rays[1])).unwrap(), &w(&rays[2])).unwrap();
        let expected = QsrElement::w(vec![0, 0], 1, 3).scale_q(&CurveClass(vec![1]), rat(1), &tv);
        assert_eq!(prod, expected);
        assert!(classical_limit(&prod).terms().is_empty());
        // truncation at bound 0 kills the product
        let w0 = |v: &Vec<i64>| QsrElement::w(v.clone(), 1, 0);
        let p0 = qsr_multiply(&tv, &qsr_multiply(&tv, &w0(&rays[0]), &w0(&rays[1])).unwrap(), &w0(&rays[2])).unwrap();
        assert!(p0.terms().is_empty());
    }

    #[test]
    fn batyrev_relations_of_hirzebruch_two() {
        let tv = hirzebruch(2);
        let rel = batyrev_relations(&tv);
        let lhs: Vec<Vec<u32>> = rel.multiplicative.iter().map(|r| r.lhs.clone()).collect();
        let rhs: Vec<Vec<u32>> = rel.multiplicative.iter().map(|r| r.rhs.clone()).collect();
        assert_eq!(lhs, vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1]]);
        assert_eq!(rhs, vec![vec![0, 2, 0, 0], vec![0, 0, 0, 0]]);
        assert_eq!(rel.linear, vec![vec![1, 0, -1, 0], vec![0, 1, 2, -1]]);
    }

    #[test]
    fn plane_cube_is_q() {
        let tv = from_git(vec![vec![1]; 3], &[1]);
        let pres = RingPresentation::build(&tv).unwrap();
        let ring = QuantumRing::new(&tv, &pres, 3).unwrap();
        let p = pres.p::<BigRational>(0);
        let pp = ring.small_quantum_product(&p, &p).unwrap();
        let ppp = ring.multiply(&pp, &ring.classical(&p)).unwrap();
        let expected: QuantumClassSeries = [(CurveClass(vec![1]), pres.one())].into_iter().collect();
        assert_eq!(ppp, expected);
        let report = dubrovin_consistency(&ring).unwrap();
        assert!(report.max_residual.is_zero());
    }

    #[test]
    fn bound_zero_is_the_cup_product() {
        let tv = hirzebruch(2);
        let pres = RingPresentation::build(&tv).unwrap();
        let ring = QuantumRing::new(&tv, &pres, 0).unwrap();
        for a in 0..2 {
            for i in 0..pres.dim() {
                let b = pres.basis_element::<BigRational>(i);
                let prod = ring.small_quantum_product(&pres.p(a), &b).unwrap();
                assert_eq!(prod, ring.classical(&pres.mul(&pres.p(a), &b)));
            }
        }
    }

    #[test]
    fn hirzebruch_two_is_associative() {
        let tv = hirzebruch(2);
        let pres = RingPresentation::build(&tv).unwrap();
        let ring = QuantumRing::new(&tv, &pres, 3).unwrap();
        assert!(!ring.is_fano());
        assert!(dubrovin_consistency(&ring).unwrap().max_residual.is_zero());
    }
}
