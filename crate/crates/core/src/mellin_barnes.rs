//! The Mellin-dual solution `∏ (-z)^{D_i} Γ(D_i)`, its difference
//! equations, and the residue expansion of the rank-one period.
//!
//! Branch: `(-z)^D = exp(D (log z - iπ))`. The residue sum evaluates the dual
//! at `-z`, where every factor `z^{D_i} Γ(D_i)` is real for real `p`, and so
//! matches the integral of `exp(-W/z)` computed by the oscillatory module.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gamma_class::ZetaTable;
use crate::toric_geom::{CurveClass, GitPresentation};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex Gamma by the Lanczos approximation, reflected for `Re z < 1/2`.
pub fn gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return Complex64::new(PI, 0.0) / (s * gamma_complex(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

fn divisor_values(g: &GitPresentation, p: &[Complex64]) -> Result<Vec<Complex64>> {
    if p.len() != g.k() {
        return Err(Error::Dimension(format!("p has length {}, expected {}", p.len(), g.k())));
    }
    Ok((0..g.m())
        .map(|i| g.divisor(i).iter().zip(p).map(|(&m, &pa)| pa * m as f64).sum())
        .collect())
}

fn check_regular(values: &[Complex64]) -> Result<()> {
    for (i, d) in values.iter().enumerate() {
        let r = d.re.round();
        if r <= 0.0 && (d - r).norm() < 1e-14 {
            return Err(Error::PoleHit(format!("D_{i}(p) = {r} is a pole of Gamma")));
        }
    }
    Ok(())
}

fn log_minus_z(z: f64) -> Complex64 {
    Complex64::new(z.ln(), -PI)
}

/// `∏_i (-z)^{D_i(p)} Γ(D_i(p))`.
pub fn mellin_dual(p: &[Complex64], z: f64, g: &GitPresentation) -> Result<Complex64> {
    if !(z > 0.0) {
        return Err(Error::DomainError(format!("z = {z} must be positive")));
    }
    let values = divisor_values(g, p)?;
    check_regular(&values)?;
    let lz = log_minus_z(z);
    Ok(values.iter().map(|&d| (d * lz).exp() * gamma_complex(d)).product())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceResidual {
    pub residual: f64,
    /// Larger magnitude of the two sides.
    pub scale: f64,
}

/// `∏_{e_i>0} ∏_{j<e_i} (-z)(D_i(p)+j) Î(p) - ∏_{e_i<0} ∏_{j<-e_i} (-z)(D_i(p+d)+j) Î(p+d)`
/// with `e_i = D_i·d`.
pub fn difference_check(p: &[Complex64], z: f64, d: &CurveClass, g: &GitPresentation) -> Result<DifferenceResidual> {
    if d.0.len() != g.k() {
        return Err(Error::Dimension(format!("d has length {}, expected {}", d.0.len(), g.k())));
    }
    let shifted: Vec<Complex64> = p.iter().zip(&d.0).map(|(&pa, &da)| pa + da as f64).collect();
    let at_p = mellin_dual(p, z, g)?;
    let at_shift = mellin_dual(&shifted, z, g)?;
    let dp = divisor_values(g, p)?;
    let ds = divisor_values(g, &shifted)?;
    let mz = Complex64::new(-z, 0.0);
    let mut left = at_p;
    let mut right = at_shift;
    for i in 0..g.m() {
        let e = g.pairing(i, d);
        for j in 0..e.unsigned_abs() {
            if e > 0 {
                left *= mz * (dp[i] + j as f64);
            } else {
                right *= mz * (ds[i] + j as f64);
            }
        }
    }
    Ok(DifferenceResidual { residual: (left - right).norm(), scale: left.norm().max(right.norm()) })
}

/// `ε^{valuation} Σ_k coeffs[k] ε^k` in the local variable `ε = p - center`,
/// truncated to `coeffs.len()` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalLaurent {
    pub center: i64,
    pub valuation: i32,
    pub coeffs: Vec<Complex64>,
}

impl LocalLaurent {
    pub fn one(center: i64, len: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        coeffs[0] = Complex64::new(1.0, 0.0);
        LocalLaurent { center, valuation: 0, coeffs }
    }

    /// `exp(c ε)`.
    pub fn exponential(center: i64, c: f64, len: usize) -> Self {
        let mut coeffs = Vec::with_capacity(len);
        let mut term = 1.0;
        for k in 0..len {
            if k > 0 {
                term *= c / k as f64;
            }
            coeffs.push(Complex64::new(term, 0.0));
        }
        LocalLaurent { center, valuation: 0, coeffs }
    }

    /// `Γ(m p)` at `p = -d + ε`, divided by its leading constant
    /// `(-1)^{md} / (m (md)!)`: equals `ε^{-1} Γ(1+mε) ∏_{j=1}^{md} (1 - mε/j)^{-1}`.
    pub fn normalized_gamma(m: i64, d: i64, len: usize, table: &ZetaTable) -> Self {
        let mut log = table.log_gamma_series(len.saturating_sub(1));
        let md = (m * d) as usize;
        for (k, c) in log.iter_mut().enumerate().skip(1) {
            let harmonic: f64 = (1..=md).map(|j| (j as f64).powi(-(k as i32))).sum();
            *c += harmonic / k as f64;
        }
        let mut scaled = 1.0;
        for c in log.iter_mut() {
            *c *= scaled;
            scaled *= m as f64;
        }
        let series = crate::gamma_class::series_exp(&log);
        LocalLaurent { center: -d, valuation: -1, coeffs: series.into_iter().map(|c| Complex64::new(c, 0.0)).collect() }
    }

    pub fn mul(&self, other: &LocalLaurent) -> LocalLaurent {
        assert_eq!(self.center, other.center, "Laurent expansions at different points");
        let len = self.coeffs.len().min(other.coeffs.len());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        for (i, a) in self.coeffs.iter().take(len).enumerate() {
            for (j, b) in other.coeffs.iter().take(len - i).enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        LocalLaurent { center: self.center, valuation: self.valuation + other.valuation, coeffs }
    }

    pub fn scale(&self, c: Complex64) -> LocalLaurent {
        LocalLaurent { coeffs: self.coeffs.iter().map(|x| x * c).collect(), ..self.clone() }
    }

    /// Coefficient of `ε^{-1}`; `None` if it lies beyond the truncation.
    pub fn residue(&self) -> Option<Complex64> {
        let idx = -1 - self.valuation;
        if idx < 0 {
            return Some(Complex64::new(0.0, 0.0));
        }
        self.coeffs.get(idx as usize).copied()
    }
}

/// `Res_{p=-d} q^{-p} ∏_i z^{m_i p} Γ(m_i p)` for a rank-one model.
pub fn residue_at(g: &GitPresentation, q: f64, z: f64, d: i64, table: &ZetaTable) -> Result<f64> {
    if g.k() != 1 {
        return Err(Error::NotRankOne(g.k()));
    }
    if !(q > 0.0 && z > 0.0) {
        return Err(Error::DomainError("q and z must be positive".into()));
    }
    let charges: Vec<i64> = (0..g.m()).map(|i| g.divisor(i)[0]).collect();
    if charges.iter().any(|&m| m <= 0) {
        return Err(Error::DomainError("residue expansion needs positive charges".into()));
    }
    let len = charges.len() + 1;
    let total: i64 = charges.iter().sum();
    // q^{-p} z^{Σm p} = q^d z^{-Σm d} exp(ε (Σm log z - log q))
    let mut series = LocalLaurent::exponential(-d, total as f64 * z.ln() - q.ln(), len);
    let mut log_scale = d as f64 * q.ln() - (total * d) as f64 * z.ln();
    let mut negative = false;
    for &m in &charges {
        series = series.mul(&LocalLaurent::normalized_gamma(m, d, len, table));
        log_scale -= (m as f64).ln() + ln_factorial(m * d);
        negative ^= (m * d) % 2 == 1;
    }
    let res = series.residue().expect("truncation covers the pole order").re;
    let value = log_scale.exp() * res;
    Ok(if negative { -value } else { value })
}

fn ln_factorial(n: i64) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueSum {
    pub value: f64,
    /// Magnitude of the last residue included.
    pub tail_estimate: f64,
    pub residues: Vec<f64>,
}

/// `Σ_{d<terms} Res_{p=-d} [q^{-p} Î(p,-z)]`, summed in index order.
pub fn residue_sum(g: &GitPresentation, q: f64, z: f64, terms: usize, table: &ZetaTable) -> Result<ResidueSum> {
    if g.k() != 1 {
        return Err(Error::NotRankOne(g.k()));
    }
    if terms == 0 {
        return Err(Error::InvalidArgument("at least one residue term is required".into()));
    }
    let residues = (0..terms as i64).map(|d| residue_at(g, q, z, d, table)).collect::<Result<Vec<_>>>()?;
    if let [.., a, b, c] = residues.as_slice() {
        if a.abs() < b.abs() && b.abs() < c.abs() {
            return Err(Error::DivergenceSuspected(format!(
                "residue magnitudes grow: {:.3e}, {:.3e}, {:.3e}",
                a.abs(),
                b.abs(),
                c.abs()
            )));
        }
    }
    let value = residues.iter().fold(0.0, |acc, r| acc + r);
    let tail_estimate = residues.last().map_or(0.0, |r| r.abs());
    Ok(ResidueSum { value, tail_estimate, residues })
}
