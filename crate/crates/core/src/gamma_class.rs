//! Gamma and Todd classes, Chern characters of sums of line bundles, and
//! the numeric pairings built from them.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cohomology::{CohomClass, RingPresentation};
use crate::error::{Error, Result};
use crate::field::{rational_to_f64, Field};
use crate::gkz::IFunction;
use crate::linalg::rat;
use crate::toric_geom::{CurveClass, ToricVariety};

/// Largest `k` for which the shared table stores `zeta(k)`.
pub const ZETA_MAX: usize = 40;

/// Relative size of the last included `q`-degree above which a central
/// charge is flagged as possibly truncated.
pub const TRUNCATION_THRESHOLD: f64 = 1e-3;

/// Euler's constant and `zeta(2..=max)`.
#[derive(Debug, Clone)]
pub struct ZetaTable {
    pub euler_gamma: f64,
    zeta: Vec<f64>,
}

/// `B_0..=B_max` with `B_1 = -1/2`.
pub fn bernoulli_numbers(max: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    for m in 1..=max {
        // sum_{j=0}^{m} C(m+1, j) B_j = 0
        let mut binom = BigRational::one();
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += &binom * bj;
            binom = binom * rat((m + 1 - j) as i64) / rat(j as i64 + 1);
        }
        b.push(-acc / rat(m as i64 + 1));
    }
    b
}

/// `zeta(s)` for real `s > 1` from the alternating eta series with
/// Borwein's acceleration (error below `3 (3 + sqrt 8)^{-n}`).
pub fn zeta(s: f64) -> f64 {
    const N: usize = 36;
    let n = N as f64;
    // d_k = n sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!)
    let mut d = Vec::with_capacity(N + 1);
    let mut term = 1.0;
    let mut acc = 0.0;
    for i in 0..=N {
        acc += term;
        d.push(acc);
        let fi = i as f64;
        term *= 4.0 * (n + fi) * (n - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
    }
    let dn = d[N];
    let mut sum = 0.0;
    for k in (0..N).rev() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (d[k] - dn) / ((k + 1) as f64).powf(s);
    }
    let eta = -sum / dn;
    eta / (1.0 - 2f64.powf(1.0 - s))
}

/// Euler's constant by Euler-Maclaurin summation of the harmonic series,
/// written as `1/(2N) + sum_{j<N} (1/j - log(1 + 1/j))` plus Bernoulli
/// corrections and summed smallest terms first.
pub fn euler_gamma() -> f64 {
    const N: usize = 12;
    let b = bernoulli_numbers(16);
    let nf = N as f64;
    let mut g = 0.0;
    for k in (1..=8).rev() {
        g += rational_to_f64(&b[2 * k]) / (2 * k) as f64 / nf.powi(2 * k as i32);
    }
    g += 1.0 / (2.0 * nf);
    for j in (1..N).rev() {
        let x = 1.0 / j as f64;
        g += x - x.ln_1p();
    }
    g
}

impl ZetaTable {
    pub fn new(max: usize) -> Self {
        let zeta = (0..=max).map(|k| if k >= 2 { zeta(k as f64) } else { f64::NAN }).collect();
        ZetaTable { euler_gamma: euler_gamma(), zeta }
    }

    /// Table shared by the whole crate, computed once.
    pub fn shared() -> &'static ZetaTable {
        static TABLE: OnceLock<ZetaTable> = OnceLock::new();
        TABLE.get_or_init(|| ZetaTable::new(ZETA_MAX))
    }

    pub fn max(&self) -> usize {
        self.zeta.len() - 1
    }

    /// `zeta(k)` for `2 <= k <= max`.
    pub fn zeta(&self, k: usize) -> f64 {
        assert!((2..=self.max()).contains(&k), "zeta({k}) outside the table");
        self.zeta[k]
    }

    /// Coefficients of `log Gamma(1 + x) = -gamma x + sum_{k>=2} (-1)^k zeta(k)/k x^k`
    /// through `x^order`.
    pub fn log_gamma_series(&self, order: usize) -> Vec<f64> {
        let mut c = vec![0.0; order + 1];
        if order >= 1 {
            c[1] = -self.euler_gamma;
        }
        for (k, ck) in c.iter_mut().enumerate().skip(2) {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *ck = sign * self.zeta(k) / k as f64;
        }
        c
    }
}

/// `exp` of a power series with zero constant term.
pub fn series_exp(a: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; a.len()];
    if b.is_empty() {
        return b;
    }
    b[0] = 1.0;
    for m in 1..a.len() {
        let s: f64 = (1..=m).map(|j| j as f64 * a[j] * b[m - j]).sum();
        b[m] = s / m as f64;
    }
    b
}

pub fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len().min(b.len());
    (0..len).map(|m| (0..=m).map(|j| a[j] * b[m - j]).sum()).collect()
}

/// `sum_j f(D_j)` for a one-variable series `f`.
fn sum_over_divisors<F: Field>(pres: &RingPresentation, coeffs: &[F]) -> CohomClass<F> {
    let mut acc = pres.zero::<F>();
    for i in 0..pres.charges().len() {
        acc = acc.add(&pres.power_series(&pres.divisor::<F>(i), coeffs));
    }
    acc
}

/// `exp(sum_j [-gamma D_j + sum_{k=2}^n (-1)^k zeta(k)/k D_j^k])`.
pub fn gamma_class(pres: &RingPresentation, table: &ZetaTable) -> CohomClass<f64> {
    let log = table.log_gamma_series(pres.n());
    let total = sum_over_divisors(pres, &log);
    pres.exp_nilpotent(&total)
}

/// `prod_j D_j / (1 - e^{-D_j})`, exactly.
pub fn todd_class(pres: &RingPresentation) -> CohomClass<BigRational> {
    let b = bernoulli_numbers(pres.n());
    let mut fact = BigRational::one();
    let mut coeffs = Vec::with_capacity(b.len());
    for (k, bk) in b.iter().enumerate() {
        if k > 0 {
            fact *= rat(k as i64);
        }
        let sign = if k % 2 == 0 { BigRational::one() } else { -BigRational::one() };
        coeffs.push(sign * bk / &fact);
    }
    let mut acc = pres.one::<BigRational>();
    for i in 0..pres.charges().len() {
        acc = pres.mul(&acc, &pres.power_series(&pres.divisor::<BigRational>(i), &coeffs));
    }
    acc
}

/// Largest coefficient of `Gamma(1+x) Gamma(1-x) sin(pi x)/(pi x) - 1`
/// through `x^order`, computed from the log-Gamma series.
pub fn reflection_check(order: usize, table: &ZetaTable) -> f64 {
    if order == 0 {
        return 0.0;
    }
    let mut log = vec![0.0; order + 1];
    for k in (2..=order).step_by(2) {
        log[k] = 2.0 * table.zeta(k) / k as f64;
    }
    let gammas = series_exp(&log);
    let mut sinc = vec![0.0; order + 1];
    let mut term = 1.0;
    for j in 0..=order / 2 {
        if j > 0 {
            term *= -PI * PI / ((2 * j) as f64 * (2 * j + 1) as f64);
        }
        sinc[2 * j] = term;
    }
    let prod = series_mul(&gammas, &sinc);
    prod.iter().enumerate().map(|(i, c)| if i == 0 { (c - 1.0).abs() } else { c.abs() }).fold(0.0, f64::max)
}

fn check_positive(q: &[f64], z: f64) -> Result<()> {
    if z <= 0.0 || !z.is_finite() {
        return Err(Error::DomainError(format!("z = {z} must be positive")));
    }
    if let Some(bad) = q.iter().find(|&&x| x <= 0.0 || !x.is_finite()) {
        return Err(Error::DomainError(format!("q = {bad} must be positive")));
    }
    Ok(())
}

/// `exp(-sum_a p_a log q_a) exp(c_1 log z)`.
fn q_z_prefactor<F: Field>(pres: &RingPresentation, q: &[f64], z: f64, to_f: impl Fn(f64) -> F) -> CohomClass<F> {
    let mut x = pres.c1::<F>().scale(&to_f(z.ln()));
    for (a, &qa) in q.iter().enumerate() {
        x = x.sub(&pres.p::<F>(a).scale(&to_f(qa.ln())));
    }
    pres.exp_nilpotent(&x)
}

/// `∫ q^{-p} z^{c_1} Gamma-hat`.
pub fn gamma_asymptotic_value(pres: &RingPresentation, table: &ZetaTable, q: &[f64], z: f64) -> Result<f64> {
    check_positive(q, z)?;
    if q.len() != pres.k() {
        return Err(Error::Dimension(format!("q has length {}, expected {}", q.len(), pres.k())));
    }
    let pre = q_z_prefactor(pres, q, z, |x| x);
    pres.integrate(&pres.mul(&pre, &gamma_class(pres, table)))
}

/// Integer combination of line bundles `sum m O(L)`, with `L` given in the
/// `p` basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KClass {
    pub summands: Vec<(i64, Vec<i64>)>,
}

impl KClass {
    pub fn structure_sheaf(k: usize) -> Self {
        KClass { summands: vec![(1, vec![0; k])] }
    }

    /// Parses `"[m*]a_1,...,a_k;..."`, e.g. `"0,0"` or `"2*1;-1"`.
    pub fn parse(text: &str, k: usize) -> Result<Self> {
        let bad = |msg: String| Error::InvalidArgument(format!("bundle {text:?}: {msg}"));
        let mut summands = Vec::new();
        for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (mult, vec) = match part.split_once('*') {
                Some((m, v)) => (m.trim().parse::<i64>().map_err(|e| bad(e.to_string()))?, v),
                None => (1, part),
            };
            let l: Vec<i64> =
                vec.split(',').map(|x| x.trim().parse::<i64>()).collect::<std::result::Result<_, _>>().map_err(|e| bad(e.to_string()))?;
            if l.len() != k {
                return Err(bad(format!("line bundle has {} entries, expected {k}", l.len())));
            }
            summands.push((mult, l));
        }
        if summands.is_empty() {
            return Err(bad("no summands".into()));
        }
        Ok(KClass { summands })
    }

    pub fn rank(&self) -> i64 {
        self.summands.iter().map(|(m, _)| m).sum()
    }

    /// `ch(E) = sum m exp(L)`.
    pub fn chern_character<F: Field>(&self, pres: &RingPresentation) -> CohomClass<F> {
        let mut acc = pres.zero::<F>();
        for (m, l) in &self.summands {
            let e = pres.exp_nilpotent(&pres.linear_class::<F>(l));
            acc = acc.add(&e.scale(&F::from_rational(&rat(*m))));
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralCharge {
    pub value: Complex64,
    /// `|contribution of the largest included omega-degree| / |value|`.
    pub last_contribution: f64,
    /// Set when `last_contribution` exceeds [`TRUNCATION_THRESHOLD`].
    pub truncation_warning: bool,
}

fn q_power(q: &[f64], d: &CurveClass) -> f64 {
    q.iter().zip(&d.0).map(|(qa, &da)| qa.ln() * da as f64).sum::<f64>().exp()
}

/// `∫ z^{c_1} z^{deg/2} I(q, -z) ∪ Gamma-hat (2 pi i)^{deg/2} ch(E)`.
pub fn central_charge(
    tv: &ToricVariety,
    pres: &RingPresentation,
    table: &ZetaTable,
    e: &KClass,
    i: &IFunction,
    q: &[f64],
    z: f64,
) -> Result<CentralCharge> {
    check_positive(q, z)?;
    if q.len() != pres.k() {
        return Err(Error::Dimension(format!("q has length {}, expected {}", q.len(), pres.k())));
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let ch = pres.scale_by_degree(&e.chern_character::<Complex64>(pres), |d| two_pi_i.powi(d as i32));
    let gamma = gamma_class(pres, table).map(|x| c(*x));
    let fixed = pres.mul(&pres.mul(&q_z_prefactor(pres, q, z, c), &gamma), &ch);

    let git = tv.git();
    let mut total = Complex64::zero();
    let mut last_degree: Option<BigRational> = None;
    let mut last = Complex64::zero();
    for d in i.classes() {
        let Some(lau) = i.term(d) else { continue };
        let mut series = pres.zero::<Complex64>();
        for (&s, coeff) in lau {
            // z^{deg/2} acting on coeff (-z)^s
            let scaled = pres.scale_by_degree(&coeff.to_complex(), |h| c(z.powi(h as i32)));
            series = series.add(&scaled.scale(&c((-z).powi(s))));
        }
        let contribution = pres.integrate(&pres.mul(&fixed, &series))? * q_power(q, d);
        total += contribution;
        let deg = git.omega_degree(d);
        if last_degree.as_ref() != Some(&deg) {
            last_degree = Some(deg);
            last = Complex64::zero();
        }
        last += contribution;
    }
    let last_contribution = if total.norm() > 0.0 { last.norm() / total.norm() } else { last.norm() };
    Ok(CentralCharge {
        value: total,
        last_contribution,
        truncation_warning: last_contribution > TRUNCATION_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gkz::i_function;
    use crate::toric_geom::GitPresentation;

    const GAMMA: f64 = 0.577_215_664_901_532_9;

    fn projective(n: usize) -> (ToricVariety, RingPresentation) {
        let tv = ToricVariety::from_git(GitPresentation::from_integer_omega(vec![vec![1]; n + 1], &[1]).unwrap())
            .unwrap();
        let pres = RingPresentation::build(&tv).unwrap();
        (tv, pres)
    }

    #[test]
    fn constants() {
        let t = ZetaTable::shared();
        assert!((t.euler_gamma - GAMMA).abs() < 1e-16);
        assert!((t.zeta(2) - PI * PI / 6.0).abs() < 1e-15);
        assert!((t.zeta(4) - PI.powi(4) / 90.0).abs() < 1e-15);
        // Apery's constant
        assert!((t.zeta(3) - 1.202_056_903_159_594_2).abs() < 1e-15);
        assert!((t.zeta(40) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn bernoulli() {
        let b = bernoulli_numbers(6);
        assert_eq!(b[1], crate::linalg::rat_frac(-1, 2));
        assert_eq!(b[2], crate::linalg::rat_frac(1, 6));
        assert_eq!(b[3], rat(0));
        assert_eq!(b[4], crate::linalg::rat_frac(-1, 30));
        assert_eq!(b[6], crate::linalg::rat_frac(1, 42));
    }

    #[test]
    fn gamma_class_of_line_and_plane() {
        let t = ZetaTable::shared();
        let (_, p1) = projective(1);
        let g = gamma_class(&p1, t);
        assert_eq!(g.coeffs()[0], 1.0);
        assert!((g.coeffs()[1] + 2.0 * GAMMA).abs() < 1e-15);
        let (_, p2) = projective(2);
        let g = gamma_class(&p2, t);
        let expected = 4.5 * GAMMA * GAMMA + 1.5 * PI * PI / 6.0;
        assert!((g.coeffs()[2] - expected).abs() < 1e-14);
    }

    #[test]
    fn todd_of_line() {
        let (_, p1) = projective(1);
        assert_eq!(todd_class(&p1).coeffs(), &[rat(1), rat(1)]);
        let (_, p2) = projective(2);
        assert_eq!(p2.integrate(&todd_class(&p2)).unwrap(), rat(1));
    }

    #[test]
    fn reflection() {
        let t = ZetaTable::shared();
        assert_eq!(reflection_check(0, t), 0.0);
        assert!(reflection_check(2, t) < 1e-14);
        assert!(reflection_check(12, t) < 1e-12);
    }

    #[test]
    fn asymptotic_values() {
        let t = ZetaTable::shared();
        let (_, p1) = projective(1);
        let q: f64 = 0.01;
        let v = gamma_asymptotic_value(&p1, t, &[q], 1.0).unwrap();
        assert!((v - (-q.ln() - 2.0 * GAMMA)).abs() < 1e-14);
        let v = gamma_asymptotic_value(&p1, t, &[q], 0.5).unwrap();
        assert!((v - (-q.ln() + 2.0 * 0.5f64.ln() - 2.0 * GAMMA)).abs() < 1e-14);
        let (_, p2) = projective(2);
        let v = gamma_asymptotic_value(&p2, t, &[q], 1.0).unwrap();
        let l = q.ln();
        let expected = 0.5 * l * l + 3.0 * GAMMA * l + 4.5 * GAMMA * GAMMA + 1.5 * PI * PI / 6.0;
        assert!((v - expected).abs() < 1e-13);
        assert_eq!(gamma_asymptotic_value(&p1, t, &[0.0], 1.0).unwrap_err().kind(), "DomainError");
    }

    #[test]
    fn central_charge_leading_term() {
        let t = ZetaTable::shared();
        let (tv, p1) = projective(1);
        let i0 = i_function(&tv, &p1, 0).unwrap();
        let cc = central_charge(&tv, &p1, t, &KClass::structure_sheaf(1), &i0, &[1e-3], 1.0).unwrap();
        let g = gamma_asymptotic_value(&p1, t, &[1e-3], 1.0).unwrap();
        assert!((cc.value.re - g).abs() < 1e-12);
        assert!(cc.value.im.abs() < 1e-12);
    }

    #[test]
    fn bundle_parsing() {
        assert_eq!(KClass::parse("2*1,0; -1,1", 2).unwrap().summands, vec![(2, vec![1, 0]), (1, vec![-1, 1])]);
        assert_eq!(KClass::parse("1,0", 1).unwrap_err().kind(), "InvalidArgument");
        let (_, p1) = projective(1);
        let ch = KClass::parse("3*1", 1).unwrap().chern_character::<BigRational>(&p1);
        assert_eq!(ch.coeffs(), &[rat(3), rat(3)]);
    }
}
