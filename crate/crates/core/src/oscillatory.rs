//! The mirror Laurent potential and its exponential period over the
//! positive real cycle.
//!
//! After `x_j = e^{t_j}` the integrand `exp(-W/z)` on `R^n` is log-concave
//! and decays doubly exponentially, so the trapezoid rule converges
//! geometrically in `1/h`. Each axis is summed outward from the conditional
//! maximum of the integrand until the terms fall below a threshold tied to
//! `tol`; the step is halved until two successive sums agree.

use crate::cohomology::RingPresentation;
use crate::error::{Error, Result};
use crate::gamma_class::{gamma_asymptotic_value, ZetaTable};
use crate::linalg::{self, IntMatrix};
use crate::toric_geom::ToricVariety;

/// Largest dimension handled by the nested quadrature.
pub const MAX_DIM: usize = 3;

const INITIAL_STEP: f64 = 0.5;
const MAX_HALVINGS: usize = 8;
const MAX_POINTS_PER_AXIS: usize = 200_000;

/// `W_q = sum_i q^{l_i} x^{b_i}` in coordinates dual to the rays of
/// `cone`, so those rays are the standard basis and their `l_i` vanish.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MirrorPotential {
    pub exponents: IntMatrix,
    pub q_weights: IntMatrix,
    pub cone: Vec<usize>,
}

pub fn build_potential(tv: &ToricVariety) -> Result<MirrorPotential> {
    let fan = tv.fan();
    let git = tv.git();
    let cone = fan.max_cones()[0].clone();
    let adapted = fan.adapted_to(&cone);
    let k = git.k();
    let others: Vec<usize> = (0..fan.m()).filter(|i| !cone.contains(i)).collect();
    let block: IntMatrix = others.iter().map(|&i| git.divisor(i).to_vec()).collect();
    let inv = linalg::inverse_unimodular(&block)
        .ok_or_else(|| Error::SplittingFailure(format!("charges of {others:?} are not unimodular")))?;
    let mut q_weights = vec![vec![0i64; k]; fan.m()];
    for (col, &i) in others.iter().enumerate() {
        q_weights[i] = (0..k).map(|a| inv[a][col]).collect();
    }
    // sum_i l_i (D_i · d) = d for every d
    let check = linalg::mat_mul_int(&linalg::transpose(&q_weights, k), git.charges());
    let identity: IntMatrix = (0..k).map(|a| (0..k).map(|b| i64::from(a == b)).collect()).collect();
    if check != identity {
        return Err(Error::SplittingFailure("q-weights do not invert the charge matrix".into()));
    }
    for &i in &others {
        if linalg::dot_rat_int(git.omega(), &q_weights[i]) <= num_traits::Zero::zero() {
            return Err(Error::SplittingFailure(format!(
                "weight {:?} of divisor {i} is not positive on the stability vector",
                q_weights[i]
            )));
        }
    }
    Ok(MirrorPotential { exponents: adapted.rays().clone(), q_weights, cone })
}

impl MirrorPotential {
    pub fn n(&self) -> usize {
        self.exponents[0].len()
    }

    /// `log q^{l_i}` for each monomial.
    fn log_coefficients(&self, q: &[f64]) -> Vec<f64> {
        self.q_weights.iter().map(|l| l.iter().zip(q).map(|(&a, qa)| a as f64 * qa.ln()).sum()).collect()
    }

    /// `W_q(x)` at a point of the positive orthant.
    pub fn evaluate(&self, q: &[f64], x: &[f64]) -> f64 {
        let t: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        Terms::new(self, q).value(&t)
    }

    /// Text such as `x1 + x2 + q1 x1^-1 x2^-1`.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (b, l) in self.exponents.iter().zip(&self.q_weights) {
            let mut factors = Vec::new();
            for (a, &e) in l.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("q{}", a + 1)),
                    _ => factors.push(format!("q{}^{}", a + 1, e)),
                }
            }
            for (j, &e) in b.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("x{}", j + 1)),
                    _ => factors.push(format!("x{}^{}", j + 1, e)),
                }
            }
            parts.push(if factors.is_empty() { "1".into() } else { factors.join(" ") });
        }
        parts.join(" + ")
    }
}

struct Terms {
    log_c: Vec<f64>,
    b: Vec<Vec<f64>>,
}

impl Terms {
    fn new(w: &MirrorPotential, q: &[f64]) -> Self {
        Terms {
            log_c: w.log_coefficients(q),
            b: w.exponents.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect(),
        }
    }

    fn value(&self, t: &[f64]) -> f64 {
        self.log_c
            .iter()
            .zip(&self.b)
            .map(|(c, b)| (c + b.iter().zip(t).map(|(x, y)| x * y).sum::<f64>()).exp())
            .sum()
    }

    /// Minimizes `W` over `t[from..]` with `t[..from]` held fixed (Newton
    /// with backtracking; `W` is convex in `t`).
    fn minimize_tail(&self, t: &mut [f64], from: usize) -> Result<()> {
        let n = t.len();
        let dim = n - from;
        if dim == 0 {
            return Ok(());
        }
        for _ in 0..200 {
            let mut grad = vec![0.0; dim];
            let mut hess = vec![vec![0.0; dim]; dim];
            let mut value = 0.0;
            for (c, b) in self.log_c.iter().zip(&self.b) {
                let e = (c + b.iter().zip(t.iter()).map(|(x, y)| x * y).sum::<f64>()).exp();
                value += e;
                for r in 0..dim {
                    grad[r] += e * b[from + r];
                    for s in 0..dim {
                        hess[r][s] += e * b[from + r] * b[from + s];
                    }
                }
            }
            let gnorm = grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
            if gnorm <= 1e-13 * value.max(1e-300) {
                return Ok(());
            }
            let step = solve_small(&hess, &grad)
                .ok_or_else(|| Error::NoDecay("singular Hessian: rays do not span".into()))?;
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> =
                    t.iter().enumerate().map(|(j, &x)| if j < from { x } else { x - alpha * step[j - from] }).collect();
                if self.value(&trial) <= value {
                    t.copy_from_slice(&trial);
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Ok(());
            }
            if step.iter().map(|s| (alpha * s).abs()).fold(0.0, f64::max) < 1e-12 {
                return Ok(());
            }
        }
        Err(Error::NoDecay("potential has no minimum on the real slice".into()))
    }
}

fn solve_small(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &x)| r.iter().copied().chain([x]).collect()).collect();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[p][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// `|S(h) - S(2h)|` for the final step `h`.
    pub error_estimate: f64,
    pub step: f64,
    pub evaluations: usize,
}

struct Nested<'a> {
    terms: &'a Terms,
    inv_z: f64,
    h: f64,
    threshold: f64,
    evaluations: usize,
}

impl Nested<'_> {
    /// Trapezoid sum over axes `level..` with `t[..level]` fixed.
    fn integrate(&mut self, t: &mut Vec<f64>, level: usize) -> Result<f64> {
        let n = t.len();
        if level == n {
            self.evaluations += 1;
            return Ok((-self.terms.value(t) * self.inv_z).exp());
        }
        let mut start = t.clone();
        self.terms.minimize_tail(&mut start, level)?;
        let center = start[level];
        t[level] = center;
        let g0 = self.integrate(t, level + 1)?;
        let mut sum = g0;
        for dir in [1.0, -1.0] {
            let mut prev = g0;
            let mut j = 1usize;
            loop {
                if j > MAX_POINTS_PER_AXIS {
                    return Err(Error::TolNotMet("integrand does not decay along an axis".into()));
                }
                t[level] = center + dir * j as f64 * self.h;
                let g = self.integrate(t, level + 1)?;
                sum += g;
                if g < self.threshold && g <= prev {
                    break;
                }
                prev = g;
                j += 1;
            }
        }
        t[level] = center;
        Ok(sum * self.h)
    }
}

/// `∫_{(R_{>0})^n} exp(-W_q(x)/z) dx_1/x_1 ... dx_n/x_n`.
pub fn positive_cycle_integral(w: &MirrorPotential, q: &[f64], z: f64, tol: f64) -> Result<QuadratureResult> {
    let n = w.n();
    if n > MAX_DIM {
        return Err(Error::Dimension(format!("quadrature supports n <= {MAX_DIM}, got {n}")));
    }
    if !(z > 0.0 && z.is_finite()) || q.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::DomainError("q and z must be positive".into()));
    }
    if q.len() != w.q_weights[0].len() {
        return Err(Error::Dimension(format!("q has length {}, expected {}", q.len(), w.q_weights[0].len())));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let terms = Terms::new(w, q);
    let mut quad = Nested { terms: &terms, inv_z: 1.0 / z, h: INITIAL_STEP, threshold: tol * 1e-2, evaluations: 0 };
    let mut t = vec![0.0; n];
    let mut previous = quad.integrate(&mut t, 0)?;
    for _ in 0..MAX_HALVINGS {
        quad.h *= 0.5;
        let current = quad.integrate(&mut t, 0)?;
        let err = (current - previous).abs();
        if err <= tol {
            return Ok(QuadratureResult { value: current, error_estimate: err, step: quad.h, evaluations: quad.evaluations });
        }
        previous = current;
    }
    Err(Error::TolNotMet(format!("no convergence to {tol} down to step {}", quad.h)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRow {
    pub q: f64,
    pub numeric: f64,
    pub gamma_value: f64,
    pub abs_err: f64,
}

/// Pairs the period with its Gamma-class asymptotic value along the ray
/// `q_a = q` for every `a`.
pub fn asymptotic_compare(
    w: &MirrorPotential,
    pres: &RingPresentation,
    table: &ZetaTable,
    q_sequence: &[f64],
    z: f64,
    tol: f64,
) -> Result<Vec<AsymptoticRow>> {
    let k = pres.k();
    q_sequence
        .iter()
        .map(|&q| {
            let qv = vec![q; k];
            let numeric = positive_cycle_integral(w, &qv, z, tol)?.value;
            let gamma_value = gamma_asymptotic_value(pres, table, &qv, z)?;
            Ok(AsymptoticRow { q, numeric, gamma_value, abs_err: (numeric - gamma_value).abs() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toric_geom::GitPresentation;

    fn from_git(charges: Vec<Vec<i64>>, omega: &[i64]) -> ToricVariety {
        ToricVariety::from_git(GitPresentation::from_integer_omega(charges, omega).unwrap()).unwrap()
    }

    /// `2 K_0(x)` from the ascending series
    /// `K_0(x) = -(log(x/2) + gamma) I_0(x) + sum_k (x/2)^{2k} H_k / (k!)^2`.
    fn two_k0(x: f64) -> f64 {
        let gamma = 0.577_215_664_901_532_9;
        let y = x * x / 4.0;
        let (mut i0, mut rest) = (0.0, 0.0);
        let (mut term, mut harmonic) = (1.0, 0.0);
        for k in 0..200 {
            if k > 0 {
                term *= y / (k * k) as f64;
                harmonic += 1.0 / k as f64;
            }
            i0 += term;
            rest += term * harmonic;
        }
        2.0 * (-((x / 2.0).ln() + gamma) * i0 + rest)
    }

    #[test]
    fn potentials_of_projective_spaces() {
        let w = build_potential(&from_git(vec![vec![1]; 3], &[1])).unwrap();
        assert_eq!(w.describe(), "x1 + x2 + q1 x1^-1 x2^-1");
        let w = build_potential(&from_git(vec![vec![1]; 2], &[1])).unwrap();
        assert_eq!(w.describe(), "x1 + q1 x1^-1");
        assert!((w.evaluate(&[0.25], &[0.5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn potential_of_the_product() {
        let w = build_potential(&from_git(vec![vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]], &[1, 1])).unwrap();
        let mut parts: Vec<String> = w.describe().split(" + ").map(String::from).collect();
        parts.sort();
        assert_eq!(parts, vec!["q1 x1^-1", "q2 x2^-1", "x1", "x2"]);
    }

    #[test]
    fn bessel_oracle_on_the_line() {
        let w = build_potential(&from_git(vec![vec![1]; 2], &[1])).unwrap();
        for (q, z) in [(0.25, 1.0), (0.25, 0.5), (1.0, 2.0), (1e-4, 1.0)] {
            let r = positive_cycle_integral(&w, &[q], z, 1e-10).unwrap();
            let exact = two_k0(2.0 * f64::sqrt(q) / z);
            assert!((r.value - exact).abs() < 1e-9, "q={q} z={z}: {} vs {exact}", r.value);
        }
        assert!((two_k0(1.0) - 0.842_048_876_481_416_7).abs() < 1e-13);
    }

    #[test]
    fn plane_is_symmetric_in_the_coordinates() {
        let w = build_potential(&from_git(vec![vec![1]; 3], &[1])).unwrap();
        let mut swapped = w.clone();
        for b in swapped.exponents.iter_mut() {
            b.swap(0, 1);
        }
        let a = positive_cycle_integral(&w, &[0.05], 1.0, 1e-10).unwrap().value;
        let b = positive_cycle_integral(&swapped, &[0.05], 1.0, 1e-10).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        let w = build_potential(&from_git(vec![vec![1]; 2], &[1])).unwrap();
        assert_eq!(positive_cycle_integral(&w, &[-1.0], 1.0, 1e-8).unwrap_err().kind(), "DomainError");
        let mut big = w.clone();
        big.exponents = vec![vec![1, 0, 0, 0], vec![-1, 0, 0, 0]];
        assert_eq!(positive_cycle_integral(&big, &[1.0], 1.0, 1e-8).unwrap_err().kind(), "Dimension");
    }
}
