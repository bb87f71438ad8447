//! Truncated I-function, GKZ operators and the mirror map, in exact
//! arithmetic. The `q^{p/z}` prefactor is never stored: operators act on the
//! stripped series through `z q_a d/dq_a -> p_a + z q_a d/dq_a`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cohomology::{CohomClass, RingPresentation};
use crate::error::{Error, Result};
use crate::linalg::rat;
use crate::quantum_ring::QSeries;
use crate::toric_geom::{fan_polytope_volume, mori_points, CurveClass, ToricVariety};

/// Finite Laurent polynomial in `z` with cohomology coefficients.
pub type ZLaurent = BTreeMap<i32, CohomClass<BigRational>>;

fn z_mul(pres: &RingPresentation, a: &ZLaurent, b: &ZLaurent) -> ZLaurent {
    let mut out = ZLaurent::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let prod = pres.mul(ca, cb);
            if prod.is_zero() {
                continue;
            }
            let entry = out.entry(ea + eb).or_insert_with(|| pres.zero());
            *entry = entry.add(&prod);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn z_sub(pres: &RingPresentation, a: &ZLaurent, b: &ZLaurent) -> ZLaurent {
    let mut out = a.clone();
    for (e, c) in b {
        let entry = out.entry(*e).or_insert_with(|| pres.zero());
        *entry = entry.sub(c);
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `D + s z`.
fn linear_factor(pres: &RingPresentation, i: usize, s: i64) -> ZLaurent {
    let mut f = ZLaurent::new();
    let d = pres.divisor::<BigRational>(i);
    if !d.is_zero() {
        f.insert(0, d);
    }
    if s != 0 {
        f.insert(1, pres.one::<BigRational>().scale(&rat(s)));
    }
    f
}

/// `1 / (D + j z) = sum_r (-1)^r D^r / (j z)^{r + 1}` for `j != 0`.
fn inverse_linear_factor(pres: &RingPresentation, i: usize, j: i64) -> ZLaurent {
    let d = pres.divisor::<BigRational>(i);
    let mut out = ZLaurent::new();
    let mut power = pres.one::<BigRational>();
    let jr = rat(j);
    let mut scale = jr.recip();
    for r in 0..=pres.n() as i32 {
        if r > 0 {
            power = pres.mul(&power, &d);
            scale = -scale / &jr;
        }
        if power.is_zero() {
            break;
        }
        out.insert(-(r + 1), power.scale(&scale));
    }
    out
}

/// Coefficient of `q^d` in the I-function (prefactor stripped).
pub fn i_coefficient(tv: &ToricVariety, pres: &RingPresentation, d: &CurveClass) -> ZLaurent {
    let mut acc: ZLaurent = [(0, pres.one::<BigRational>())].into_iter().collect();
    for (i, &e) in tv.git().image(d).iter().enumerate() {
        if e > 0 {
            for j in 1..=e {
                acc = z_mul(pres, &acc, &inverse_linear_factor(pres, i, j));
            }
        } else {
            for j in 0..-e {
                acc = z_mul(pres, &acc, &linear_factor(pres, i, -j));
            }
        }
        if acc.is_empty() {
            break;
        }
    }
    acc
}

#[derive(Debug, Clone)]
pub struct IFunction {
    bound: i64,
    terms: BTreeMap<CurveClass, ZLaurent>,
    /// Classes in increasing `omega`-degree, including those with zero
    /// coefficient.
    order: Vec<CurveClass>,
}

impl IFunction {
    pub fn bound(&self) -> i64 {
        self.bound
    }

    /// Nonzero coefficients.
    pub fn terms(&self) -> &BTreeMap<CurveClass, ZLaurent> {
        &self.terms
    }

    /// Every Mori-cone class within the bound, ordered by `omega`-degree.
    pub fn classes(&self) -> &[CurveClass] {
        &self.order
    }

    pub fn term(&self, d: &CurveClass) -> Option<&ZLaurent> {
        self.terms.get(d)
    }
}

pub fn i_function(tv: &ToricVariety, pres: &RingPresentation, bound: i64) -> Result<IFunction> {
    let order = mori_points(tv, tv.git().omega(), bound)?;
    let mut terms = BTreeMap::new();
    for d in &order {
        let c = i_coefficient(tv, pres, d);
        if !c.is_empty() {
            terms.insert(d.clone(), c);
        }
    }
    Ok(IFunction { bound, terms, order })
}

/// Checks that every coefficient at `z^s` of the `q^d` term lies in
/// `H^{2(-c_1·d - s)}`.
pub fn is_homogeneous(tv: &ToricVariety, pres: &RingPresentation, i: &IFunction) -> bool {
    i.terms.iter().all(|(d, lau)| {
        let c1d = tv.git().c1_degree(d);
        lau.iter().all(|(&s, c)| {
            let deg = -c1d - s as i64;
            c.coeffs().iter().enumerate().all(|(idx, x)| x.is_zero() || pres.degree_of(idx) as i64 == deg)
        })
    })
}

/// The GKZ operator attached to `d`: each factor `(i, j)` stands for
/// `D_i(z q d/dq) - j z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GkzOperator {
    pub class: CurveClass,
    pub positive: Vec<(usize, i64)>,
    pub negative: Vec<(usize, i64)>,
}

impl GkzOperator {
    pub fn is_zero(&self) -> bool {
        self.class.is_zero()
    }

    /// Human-readable form, e.g. `D1D3 - q^(1,0) D2(D2-z)`, with
    /// `D_i` standing for `sum_a m_{ia} z q_a d/dq_a`.
    pub fn describe(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let side = |fs: &[(usize, i64)]| -> String {
            if fs.is_empty() {
                return "1".into();
            }
            fs.iter()
                .map(|&(i, j)| match j {
                    0 => format!("D{}", i + 1),
                    1 => format!("(D{}-z)", i + 1),
                    _ => format!("(D{}-{}z)", i + 1, j),
                })
                .collect::<Vec<_>>()
                .join("")
        };
        let q: Vec<String> = self.class.0.iter().map(|x| x.to_string()).collect();
        format!("{} - q^({}) {}", side(&self.positive), q.join(","), side(&self.negative))
    }
}

pub fn gkz_operator(tv: &ToricVariety, d: &CurveClass) -> GkzOperator {
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    if !d.is_zero() {
        for (i, &e) in tv.git().image(d).iter().enumerate() {
            for j in 0..e.abs() {
                if e > 0 {
                    positive.push((i, j));
                } else {
                    negative.push((i, j));
                }
            }
        }
    }
    GkzOperator { class: d.clone(), positive, negative }
}

/// Result of applying an operator to the truncated I-function.
#[derive(Debug, Clone)]
pub struct GkzResidual {
    pub class: CurveClass,
    /// Coefficients are exact through this `omega`-degree.
    pub window: BigRational,
    pub checked_terms: usize,
    /// Nonzero coefficients of the result, empty when annihilated.
    pub nonzero: BTreeMap<CurveClass, ZLaurent>,
}

impl GkzResidual {
    pub fn is_zero(&self) -> bool {
        self.nonzero.is_empty()
    }
}

fn factors_at(pres: &RingPresentation, tv: &ToricVariety, fs: &[(usize, i64)], e: &CurveClass) -> ZLaurent {
    let mut acc: ZLaurent = [(0, pres.one::<BigRational>())].into_iter().collect();
    for &(i, j) in fs {
        acc = z_mul(pres, &acc, &linear_factor(pres, i, tv.git().pairing(i, e) - j));
    }
    acc
}

pub fn apply_gkz(
    tv: &ToricVariety,
    pres: &RingPresentation,
    op: &GkzOperator,
    i: &IFunction,
) -> Result<GkzResidual> {
    let git = tv.git();
    let shift = git.omega_degree(&op.class);
    let window = rat(i.bound) - &shift;
    if window < BigRational::zero() {
        return Err(Error::BoundExceeded(format!(
            "operator shift {:?} has omega-degree {shift}, bound is {}",
            op.class.0, i.bound
        )));
    }
    let mut nonzero = BTreeMap::new();
    let mut checked = 0;
    if op.is_zero() {
        return Ok(GkzResidual { class: op.class.clone(), window, checked_terms: 0, nonzero });
    }
    let empty = ZLaurent::new();
    for f in i.classes().iter().filter(|f| git.omega_degree(f) <= window) {
        checked += 1;
        let here = i.term(f).unwrap_or(&empty);
        let lhs = z_mul(pres, &factors_at(pres, tv, &op.positive, f), here);
        let e = f.sub(&op.class);
        let rhs = match i.term(&e) {
            Some(prev) => z_mul(pres, &factors_at(pres, tv, &op.negative, &e), prev),
            None => ZLaurent::new(),
        };
        let diff = z_sub(pres, &lhs, &rhs);
        if !diff.is_empty() {
            nonzero.insert(f.clone(), diff);
        }
    }
    Ok(GkzResidual { class: op.class.clone(), window, checked_terms: checked, nonzero })
}

/// Mori generators followed by their pairwise sums.
pub fn verification_classes(tv: &ToricVariety) -> Vec<CurveClass> {
    let gens: Vec<CurveClass> = tv.mori_generators().iter().map(|g| CurveClass(g.clone())).collect();
    let mut out = gens.clone();
    for a in 0..gens.len() {
        for b in a..gens.len() {
            out.push(gens[a].add(&gens[b]));
        }
    }
    out
}

fn series_mul(a: &QSeries, b: &QSeries, keep: &dyn Fn(&CurveClass) -> bool) -> QSeries {
    let mut out = QSeries::new();
    for (da, ca) in a {
        for (db, cb) in b {
            let d = da.add(db);
            if keep(&d) {
                *out.entry(d).or_insert_with(BigRational::zero) += ca * cb;
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

#[derive(Debug, Clone)]
pub struct MirrorMap {
    pub bound: i64,
    /// `g_a(q)`: coefficient of `p_a` in the `z^{-1}` part.
    pub g: Vec<QSeries>,
    /// `psi_a(q) = q_a exp(g_a(q))`.
    pub psi: Vec<QSeries>,
}

impl MirrorMap {
    pub fn is_trivial(&self) -> bool {
        self.g.iter().all(|s| s.is_empty())
    }
}

pub fn mirror_map(tv: &ToricVariety, pres: &RingPresentation, i: &IFunction) -> Result<MirrorMap> {
    let k = tv.k();
    let git = tv.git();
    let bound = rat(i.bound);
    let mut g = vec![QSeries::new(); k];
    let h2 = pres.degree_range(1);
    for (d, lau) in i.terms() {
        let Some(c) = lau.get(&-1) else { continue };
        if !c.coeffs()[0].is_zero() {
            return Err(Error::NonUnipotent(format!("q^{:?} term has constant z^-1 coefficient {}", d.0, c.coeffs()[0])));
        }
        if d.is_zero() {
            continue;
        }
        for (a, idx) in h2.clone().enumerate() {
            if !c.coeffs()[idx].is_zero() {
                g[a].insert(d.clone(), c.coeffs()[idx].clone());
            }
        }
    }
    let keep = |d: &CurveClass| git.omega_degree(d) <= bound;
    let mut psi = Vec::with_capacity(k);
    for (a, ga) in g.iter().enumerate() {
        let mut unit = vec![0i64; k];
        unit[a] = 1;
        let qa = CurveClass(unit);
        // exp(g_a) as a truncated series; each power raises the omega-degree
        let mut exp: QSeries = [(CurveClass::zero(k), BigRational::one())].into_iter().collect();
        let mut power = exp.clone();
        let mut j = 0i64;
        loop {
            j += 1;
            power = series_mul(&power, ga, &keep);
            if power.is_empty() {
                break;
            }
            let inv = rat(j).recip();
            for c in power.values_mut() {
                *c *= &inv;
            }
            for (d, c) in &power {
                *exp.entry(d.clone()).or_insert_with(BigRational::zero) += c;
            }
        }
        let shifted: QSeries = exp
            .into_iter()
            .map(|(d, c)| (d.add(&qa), c))
            .filter(|(d, c)| keep(d) && !c.is_zero())
            .collect();
        psi.push(shifted);
    }
    Ok(MirrorMap { bound: i.bound, g, psi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankCheck {
    pub volume: u64,
    pub betti_sum: u64,
    pub equal: bool,
}

pub fn rank_check(tv: &ToricVariety, pres: &RingPresentation) -> RankCheck {
    let volume = fan_polytope_volume(tv.fan());
    let betti_sum = pres.betti().iter().sum::<usize>() as u64;
    RankCheck { volume, betti_sum, equal: volume == betti_sum }
}

/// `sum_a v_a p_a` read off a degree-1 class.
pub fn h2_coordinates(pres: &RingPresentation, c: &CohomClass<BigRational>) -> Vec<BigRational> {
    pres.degree_range(1).map(|i| c.coeffs()[i].clone()).collect()
}
