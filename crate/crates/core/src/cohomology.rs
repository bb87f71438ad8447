//! `H^*(X; F)` as polynomials in `p_1..p_k` modulo the Stanley-Reisner
//! ideal, with one additive basis per degree chosen by row reduction.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{self, rat};
use crate::toric_geom::ToricVariety;

/// Exponent vector of a monomial in `p_1..p_k`.
pub type Monomial = Vec<u32>;
/// Sparse polynomial in `p_1..p_k` with rational coefficients.
pub type Polynomial = BTreeMap<Monomial, BigRational>;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone)]
struct DegreeData {
    /// All monomials of this degree, lexicographically descending.
    monomials: Vec<Monomial>,
    /// Normal form of each monomial as sparse global basis coordinates.
    normal_forms: Vec<Vec<(usize, BigRational)>>,
}

#[derive(Debug, Clone)]
pub struct RingPresentation {
    id: u64,
    n: usize,
    k: usize,
    charges: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
    basis: Vec<Monomial>,
    /// `offsets[d]..offsets[d + 1]` are the basis indices of degree `d`.
    offsets: Vec<usize>,
    degrees: Vec<DegreeData>,
    /// `table[i][j]` is the product of basis elements `i` and `j`.
    table: Vec<Vec<Vec<(usize, BigRational)>>>,
    top_integral: BigRational,
}

/// An element of `H^*(X; F)` in normal form, tagged with its presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct CohomClass<F> {
    pres_id: u64,
    coeffs: Vec<F>,
}

impl<F: Field> CohomClass<F> {
    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.pres_id, other.pres_id);
        CohomClass {
            pres_id: self.pres_id,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.pres_id, other.pres_id);
        CohomClass {
            pres_id: self.pres_id,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &F) -> Self {
        CohomClass { pres_id: self.pres_id, coeffs: self.coeffs.iter().map(|a| a.clone() * s.clone()).collect() }
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> CohomClass<G> {
        CohomClass { pres_id: self.pres_id, coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Largest coefficient magnitude.
    pub fn max_magnitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }
}

impl CohomClass<BigRational> {
    pub fn to_f64(&self) -> CohomClass<f64> {
        self.map(f64::from_rational)
    }

    pub fn to_complex(&self) -> CohomClass<num_complex::Complex64> {
        self.map(num_complex::Complex64::from_rational)
    }
}

fn monomials_of_degree(k: usize, d: u32) -> Vec<Monomial> {
    fn rec(k: usize, left: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if cur.len() == k - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(k, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, d, &mut Vec::with_capacity(k), &mut out);
    out
}

pub(crate) fn poly_mul(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let mut out = Polynomial::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m: Monomial = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
            let e = out.entry(m).or_insert_with(BigRational::zero);
            *e += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `D_i = sum_a m_{ia} p_a` as a polynomial.
pub(crate) fn divisor_polynomial(charges: &[Vec<i64>], i: usize) -> Polynomial {
    let k = charges[i].len();
    let mut out = Polynomial::new();
    for a in 0..k {
        if charges[i][a] != 0 {
            let mut m = vec![0u32; k];
            m[a] = 1;
            out.insert(m, rat(charges[i][a]));
        }
    }
    out
}

pub(crate) fn divisor_product(charges: &[Vec<i64>], exps: &[(usize, u32)]) -> Polynomial {
    let k = charges[0].len();
    let mut acc: Polynomial = [(vec![0u32; k], BigRational::one())].into_iter().collect();
    for &(i, e) in exps {
        let d = divisor_polynomial(charges, i);
        for _ in 0..e {
            acc = poly_mul(&acc, &d);
        }
    }
    acc
}

impl RingPresentation {
    /// Builds the presentation and checks the dimension and normalization
    /// invariants.
    pub fn build(tv: &ToricVariety) -> Result<Self> {
        let n = tv.n();
        let k = tv.k();
        let charges = tv.git().charges().clone();
        let sr_generators: Vec<Polynomial> = tv
            .fan()
            .primitive_collections()
            .iter()
            .map(|pc| divisor_product(&charges, &pc.iter().map(|&i| (i, 1)).collect::<Vec<_>>()))
            .collect();

        let mut basis: Vec<Monomial> = Vec::new();
        let mut offsets = vec![0usize];
        // per degree: local reduction data before global indices are known
        let mut local: Vec<(Vec<Monomial>, Vec<Vec<BigRational>>, Vec<usize>)> = Vec::new();
        for d in 0..=n as u32 {
            let monomials = monomials_of_degree(k, d);
            let index: BTreeMap<&Monomial, usize> = monomials.iter().enumerate().map(|(i, m)| (m, i)).collect();
            let mut rows: Vec<Vec<BigRational>> = Vec::new();
            for g in &sr_generators {
                let gdeg: u32 = g.keys().next().map(|m| m.iter().sum()).unwrap_or(0);
                if gdeg > d {
                    continue;
                }
                for shift in monomials_of_degree(k, d - gdeg) {
                    let mut row = vec![BigRational::zero(); monomials.len()];
                    for (m, c) in g {
                        let mm: Monomial = m.iter().zip(&shift).map(|(x, y)| x + y).collect();
                        row[index[&mm]] += c;
                    }
                    rows.push(row);
                }
            }
            let pivots = linalg::rref(&mut rows, monomials.len());
            let free: Vec<usize> = (0..monomials.len()).filter(|c| !pivots.contains(c)).collect();
            for &c in &free {
                basis.push(monomials[c].clone());
            }
            offsets.push(basis.len());
            local.push((monomials, rows, pivots));
        }

        let betti: Vec<usize> = offsets.windows(2).map(|w| w[1] - w[0]).collect();
        let total: usize = betti.iter().sum();
        let cones = tv.fan().max_cones().len();
        if total != cones {
            return Err(Error::PresentationInconsistent(format!(
                "sum of Betti numbers {total} differs from the {cones} maximal cones"
            )));
        }
        if betti[0] != 1 || betti[n] != 1 || betti.iter().ne(betti.iter().rev()) {
            return Err(Error::PresentationInconsistent(format!("Betti numbers {betti:?} violate Poincaré duality")));
        }

        let mut degrees = Vec::new();
        for (d, (monomials, rows, pivots)) in local.into_iter().enumerate() {
            let base = offsets[d];
            let basis_here = &basis[base..offsets[d + 1]];
            let global = |m: &Monomial| base + basis_here.iter().position(|b| b == m).unwrap();
            let mut normal_forms = Vec::with_capacity(monomials.len());
            for (c, m) in monomials.iter().enumerate() {
                if let Some(r) = pivots.iter().position(|&p| p == c) {
                    // m = -sum of the free entries of its pivot row
                    let nf: Vec<(usize, BigRational)> = rows[r]
                        .iter()
                        .enumerate()
                        .filter(|(j, v)| !pivots.contains(j) && !v.is_zero())
                        .map(|(j, v)| (global(&monomials[j]), -v.clone()))
                        .collect();
                    normal_forms.push(nf);
                } else {
                    normal_forms.push(vec![(global(m), BigRational::one())]);
                }
            }
            degrees.push(DegreeData { monomials, normal_forms });
        }

        let mut pres = RingPresentation {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            n,
            k,
            charges,
            max_cones: tv.fan().max_cones().to_vec(),
            basis,
            offsets,
            degrees,
            table: Vec::new(),
            top_integral: BigRational::one(),
        };
        let dim = pres.basis.len();
        let mut table = vec![vec![Vec::new(); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                let m: Monomial = pres.basis[i].iter().zip(&pres.basis[j]).map(|(a, b)| a + b).collect();
                table[i][j] = pres.monomial_normal_form(&m);
            }
        }
        pres.table = table;
        pres.top_integral = pres.normalization()?;
        if !pres.pairing_is_nondegenerate() {
            return Err(Error::PresentationInconsistent("Poincaré pairing is degenerate".into()));
        }
        Ok(pres)
    }

    fn normalization(&self) -> Result<BigRational> {
        let top = self.offsets[self.n];
        let mut value: Option<BigRational> = None;
        for cone in &self.max_cones {
            let poly = divisor_product(&self.charges, &cone.iter().map(|&i| (i, 1)).collect::<Vec<_>>());
            let nf = self.normal_form(&poly);
            let a = nf.coeffs[top].clone();
            if a.is_zero() {
                return Err(Error::NormalizationConflict(format!("cone {cone:?} has vanishing product")));
            }
            let v = a.recip();
            match &value {
                None => value = Some(v),
                Some(prev) if *prev != v => {
                    return Err(Error::NormalizationConflict(format!(
                        "cone {cone:?} forces {v}, an earlier cone forced {prev}"
                    )))
                }
                _ => {}
            }
        }
        Ok(value.expect("at least one maximal cone"))
    }

    fn pairing_is_nondegenerate(&self) -> bool {
        let m = self.pairing_matrix();
        linalg::rank_rational(&m, self.dim()) == self.dim()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn charges(&self) -> &[Vec<i64>] {
        &self.charges
    }

    pub fn betti(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    /// Basis monomials of degree `d` (i.e. of `H^{2d}`).
    pub fn basis_of_degree(&self, d: usize) -> &[Monomial] {
        &self.basis[self.offsets[d]..self.offsets[d + 1]]
    }

    pub fn degree_range(&self, d: usize) -> std::ops::Range<usize> {
        self.offsets[d]..self.offsets[d + 1]
    }

    pub fn degree_of(&self, index: usize) -> usize {
        self.offsets.iter().rposition(|&o| o <= index).unwrap()
    }

    /// `∫` of the top basis monomial.
    pub fn top_integral(&self) -> &BigRational {
        &self.top_integral
    }

    pub fn zero<F: Field>(&self) -> CohomClass<F> {
        CohomClass { pres_id: self.id, coeffs: vec![F::zero(); self.dim()] }
    }

    pub fn one<F: Field>(&self) -> CohomClass<F> {
        self.basis_element(0)
    }

    pub fn basis_element<F: Field>(&self, index: usize) -> CohomClass<F> {
        let mut c = self.zero();
        c.coeffs[index] = F::one();
        c
    }

    pub fn from_coeffs<F: Field>(&self, coeffs: Vec<F>) -> Result<CohomClass<F>> {
        if coeffs.len() != self.dim() {
            return Err(Error::Dimension(format!("expected {} coefficients, got {}", self.dim(), coeffs.len())));
        }
        Ok(CohomClass { pres_id: self.id, coeffs })
    }

    /// The class `p_a`.
    pub fn p<F: Field>(&self, a: usize) -> CohomClass<F> {
        let mut m = vec![0u32; self.k];
        m[a] = 1;
        self.monomial_class(&m)
    }

    /// The divisor class `D_i`.
    pub fn divisor<F: Field>(&self, i: usize) -> CohomClass<F> {
        self.normal_form(&divisor_polynomial(&self.charges, i)).map(F::from_rational)
    }

    /// The class `sum_a v_a p_a`.
    pub fn linear_class<F: Field>(&self, v: &[i64]) -> CohomClass<F> {
        let mut c = self.zero::<F>();
        for (a, &x) in v.iter().enumerate() {
            if x != 0 {
                c = c.add(&self.p::<F>(a).scale(&F::from_rational(&rat(x))));
            }
        }
        c
    }

    /// `c_1 = sum_i D_i`.
    pub fn c1<F: Field>(&self) -> CohomClass<F> {
        let sums: Vec<i64> = (0..self.k).map(|a| self.charges.iter().map(|r| r[a]).sum()).collect();
        self.linear_class(&sums)
    }

    pub fn monomial_class<F: Field>(&self, m: &[u32]) -> CohomClass<F> {
        let mut c = self.zero::<F>();
        for (i, v) in self.monomial_normal_form(m) {
            c.coeffs[i] = c.coeffs[i].clone() + F::from_rational(&v);
        }
        c
    }

    fn monomial_normal_form(&self, m: &[u32]) -> Vec<(usize, BigRational)> {
        let d: u32 = m.iter().sum();
        if d as usize > self.n {
            return Vec::new();
        }
        let data = &self.degrees[d as usize];
        let pos = data.monomials.iter().position(|x| x == m).expect("monomial of matching length");
        data.normal_forms[pos].clone()
    }

    pub fn normal_form(&self, poly: &Polynomial) -> CohomClass<BigRational> {
        let mut c = self.zero::<BigRational>();
        for (m, v) in poly {
            for (i, w) in self.monomial_normal_form(m) {
                c.coeffs[i] += v * w;
            }
        }
        c
    }

    /// The class read back as a polynomial in the basis monomials.
    pub fn to_polynomial(&self, c: &CohomClass<BigRational>) -> Polynomial {
        self.basis
            .iter()
            .zip(&c.coeffs)
            .filter(|(_, v)| !v.is_zero())
            .map(|(m, v)| (m.clone(), v.clone()))
            .collect()
    }

    fn check<F>(&self, c: &CohomClass<F>) -> Result<()> {
        if c.pres_id == self.id {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn multiply<F: Field>(&self, a: &CohomClass<F>, b: &CohomClass<F>) -> Result<CohomClass<F>> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub(crate) fn mul<F: Field>(&self, a: &CohomClass<F>, b: &CohomClass<F>) -> CohomClass<F> {
        let mut out = self.zero::<F>();
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let xy = x.clone() * y.clone();
                for (r, v) in &self.table[i][j] {
                    out.coeffs[*r] = out.coeffs[*r].clone() + xy.clone() * F::from_rational(v);
                }
            }
        }
        out
    }

    pub fn integrate<F: Field>(&self, a: &CohomClass<F>) -> Result<F> {
        self.check(a)?;
        Ok(a.coeffs[self.offsets[self.n]].clone() * F::from_rational(&self.top_integral))
    }

    /// Degree-`d` component of a class.
    pub fn component<F: Field>(&self, a: &CohomClass<F>, d: usize) -> CohomClass<F> {
        let mut c = self.zero();
        for i in self.degree_range(d) {
            c.coeffs[i] = a.coeffs[i].clone();
        }
        c
    }

    /// Multiplies the `H^{2d}` component by `f(d)`.
    pub fn scale_by_degree<F: Field>(&self, a: &CohomClass<F>, f: impl Fn(usize) -> F) -> CohomClass<F> {
        let mut c = a.clone();
        for d in 0..=self.n {
            let s = f(d);
            for i in self.degree_range(d) {
                c.coeffs[i] = c.coeffs[i].clone() * s.clone();
            }
        }
        c
    }

    /// `mu(alpha) = (d - n/2) alpha` on `H^{2d}`.
    pub fn grading_mu<F: Field>(&self, a: &CohomClass<F>) -> CohomClass<F> {
        let n = self.n as i64;
        self.scale_by_degree(a, |d| F::from_rational(&linalg::rat_frac(2 * d as i64 - n, 2)))
    }

    /// `sum_j coeffs[j] x^j`, which is finite since `x` is nilpotent when it
    /// has no degree-0 part.
    pub fn power_series<F: Field>(&self, x: &CohomClass<F>, coeffs: &[F]) -> CohomClass<F> {
        let mut out = self.zero::<F>();
        let mut power = self.one::<F>();
        for (j, c) in coeffs.iter().enumerate() {
            if j > 0 {
                power = self.mul(&power, x);
            }
            if power.is_zero() {
                break;
            }
            out = out.add(&power.scale(c));
        }
        out
    }

    /// `exp(x)` for `x` of positive degree.
    pub fn exp_nilpotent<F: Field>(&self, x: &CohomClass<F>) -> CohomClass<F> {
        let mut coeffs = Vec::with_capacity(self.n + 1);
        let mut fact = BigRational::one();
        for j in 0..=self.n {
            if j > 0 {
                fact *= rat(j as i64);
            }
            coeffs.push(F::from_rational(&fact.recip()));
        }
        self.power_series(x, &coeffs)
    }

    /// `prod_i (1 + D_i)`.
    pub fn chern_total(&self) -> CohomClass<BigRational> {
        let mut c = self.one::<BigRational>();
        for i in 0..self.charges.len() {
            c = self.mul(&c, &self.one().add(&self.divisor(i)));
        }
        c
    }

    /// `(alpha, beta) -> ∫ alpha beta` on the basis.
    pub fn pairing_matrix(&self) -> Vec<Vec<BigRational>> {
        (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| {
                        let prod = self.mul::<BigRational>(&self.basis_element(i), &self.basis_element(j));
                        self.integrate(&prod).unwrap()
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toric_geom::{Fan, GitPresentation};

    pub(crate) fn variety_from_git(charges: Vec<Vec<i64>>, omega: &[i64]) -> ToricVariety {
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
    fn plane_betti_and_relation() {
        let pres = RingPresentation::build(&variety_from_git(vec![vec![1]; 3], &[1])).unwrap();
        assert_eq!(pres.betti(), vec![1, 1, 1]);
        let p = pres.p::<BigRational>(0);
        let p2 = pres.mul(&p, &p);
        assert!(pres.mul(&p, &p2).is_zero());
        assert_eq!(pres.integrate(&p2).unwrap(), rat(1));
        assert_eq!(pres.integrate(&pres.one::<BigRational>()).unwrap(), rat(0));
        let c = pres.chern_total();
        assert_eq!(c.coeffs(), &[rat(1), rat(3), rat(3)]);
        assert_eq!(pres.integrate(&c).unwrap(), rat(3));
    }

    #[test]
    fn product_of_lines() {
        let pres =
            RingPresentation::build(&variety_from_git(vec![vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]], &[1, 1]))
                .unwrap();
        assert_eq!(pres.betti(), vec![1, 2, 1]);
        let p1 = pres.p::<BigRational>(0);
        let p2 = pres.p::<BigRational>(1);
        assert!(pres.mul(&p1, &p1).is_zero());
        assert!(!pres.mul(&p1, &p2).is_zero());
        assert_eq!(pres.integrate(&pres.mul(&p1, &p2)).unwrap(), rat(1));
    }

    #[test]
    fn hirzebruch_two_intersections() {
        let pres = RingPresentation::build(&hirzebruch(2)).unwrap();
        assert_eq!(pres.betti(), vec![1, 2, 1]);
        // D_2 is the (-2)-curve
        let d2 = pres.divisor::<BigRational>(1);
        assert_eq!(pres.integrate(&pres.mul(&d2, &d2)).unwrap(), rat(-2));
        let d4 = pres.divisor::<BigRational>(3);
        assert_eq!(pres.integrate(&pres.mul(&d4, &d4)).unwrap(), rat(2));
        assert_eq!(pres.integrate(&pres.chern_total()).unwrap(), rat(4));
    }

    #[test]
    fn line_chern_class() {
        let pres = RingPresentation::build(&variety_from_git(vec![vec![1], vec![1]], &[1])).unwrap();
        assert_eq!(pres.chern_total().coeffs(), &[rat(1), rat(2)]);
    }

    #[test]
    fn mu_is_antisymmetric() {
        let pres = RingPresentation::build(&hirzebruch(1)).unwrap();
        let one = pres.one::<BigRational>();
        assert_eq!(pres.grading_mu(&one), one.scale(&rat(-1)));
        for i in 0..pres.dim() {
            for j in 0..pres.dim() {
                let a = pres.basis_element::<BigRational>(i);
                let b = pres.basis_element::<BigRational>(j);
                let lhs = pres.integrate(&pres.mul(&pres.grading_mu(&a), &b)).unwrap();
                let rhs = pres.integrate(&pres.mul(&a, &pres.grading_mu(&b))).unwrap();
                assert_eq!(lhs, -rhs);
            }
        }
    }

    #[test]
    fn classes_from_other_presentations_are_rejected() {
        let a = RingPresentation::build(&variety_from_git(vec![vec![1]; 3], &[1])).unwrap();
        let b = RingPresentation::build(&variety_from_git(vec![vec![1]; 3], &[1])).unwrap();
        let err = a.multiply(&a.one::<BigRational>(), &b.one::<BigRational>()).unwrap_err();
        assert_eq!(err, Error::FieldMismatch);
    }

    #[test]
    fn monomials_are_listed_descending() {
        assert_eq!(monomials_of_degree(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(monomials_of_degree(1, 3), vec![vec![3]]);
    }
}
