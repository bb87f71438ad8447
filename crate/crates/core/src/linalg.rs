//! Exact integer and rational linear algebra on small dense matrices.
//!
//! Everything here works on `Vec<Vec<_>>` row-major matrices. Sizes are
//! desk scale (at most 16 rows), so clarity wins over cache behaviour.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<i64>>;
pub type RatMatrix = Vec<Vec<BigRational>>;

pub fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn rat_frac(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_rational_matrix(m: &[Vec<i64>]) -> RatMatrix {
    m.iter().map(|row| row.iter().map(|&x| rat(x)).collect()).collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>], cols: usize) -> Vec<Vec<T>> {
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_mul_int(a: &[Vec<i64>], b: &[Vec<i64>]) -> IntMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|l| row[l] * b[l][j]).sum())
                .collect()
        })
        .collect()
}

pub fn mat_vec_int(a: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn dot_rat_int(a: &[BigRational], v: &[i64]) -> BigRational {
    a.iter()
        .zip(v)
        .fold(BigRational::zero(), |acc, (x, &y)| acc + x * rat(y))
}

/// Reduced row echelon form in place. Returns the pivot columns.
pub fn rref(m: &mut RatMatrix, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = m[row].clone();
        for (i, r) in m.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (x, y) in r.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x = &*x - &f * y;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    m.truncate(row);
    pivots
}

pub fn rank_rational(m: &[Vec<BigRational>], cols: usize) -> usize {
    let mut work = m.to_vec();
    rref(&mut work, cols).len()
}

pub fn rank_int(m: &[Vec<i64>]) -> usize {
    let cols = m.first().map_or(0, |r| r.len());
    rank_rational(&to_rational_matrix(m), cols)
}

/// Solves the square system `a x = b`; `None` when `a` is singular.
pub fn solve_square(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.len();
    let mut aug: RatMatrix = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, n);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}

/// Solves `a x = b` for possibly non-square `a`, returning one solution if the
/// system is consistent and `a` has full column rank.
pub fn solve_full_column_rank(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut aug: RatMatrix = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, cols + 1);
    if pivots.contains(&cols) || pivots.len() != cols {
        return None;
    }
    Some(aug.iter().take(cols).map(|r| r[cols].clone()).collect())
}

pub fn inverse_rational(a: &[Vec<BigRational>]) -> Option<RatMatrix> {
    let n = a.len();
    let mut aug: RatMatrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug, n);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Inverse of an integer matrix with determinant ±1.
pub fn inverse_unimodular(a: &[Vec<i64>]) -> Option<IntMatrix> {
    let inv = inverse_rational(&to_rational_matrix(a))?;
    inv.into_iter()
        .map(|row| row.into_iter().map(|x| rational_to_i64(&x)).collect())
        .collect()
}

pub fn rational_to_i64(x: &BigRational) -> Option<i64> {
    if !x.is_integer() {
        return None;
    }
    i64::try_from(x.to_integer()).ok()
}

/// Determinant by fraction-free elimination (Bareiss).
pub fn det_int(a: &[Vec<i64>]) -> i64 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return 0;
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    (sign * m[n - 1][n - 1]) as i64
}

/// Unimodular row reduction: returns `(u, h, rank)` with `u * a = h`, `u`
/// unimodular and `h` in row Hermite normal form (positive pivots, entries
/// above each pivot reduced into `[0, pivot)`, zero rows at the bottom).
pub fn hermite_rows(a: &[Vec<i64>], cols: usize) -> (IntMatrix, IntMatrix, usize) {
    let rows = a.len();
    let mut h: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..rows)
        .map(|i| (0..rows).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row >= rows {
            break;
        }
        loop {
            let nonzero: Vec<usize> = (pivot_row..rows).filter(|&i| h[i][col] != 0).collect();
            if nonzero.is_empty() {
                break;
            }
            let best = *nonzero.iter().min_by_key(|&&i| h[i][col].abs()).unwrap();
            h.swap(pivot_row, best);
            u.swap(pivot_row, best);
            let mut done = true;
            for i in pivot_row + 1..rows {
                if h[i][col] != 0 {
                    let q = Integer::div_floor(&h[i][col], &h[pivot_row][col]);
                    sub_row(&mut h, i, pivot_row, q);
                    sub_row(&mut u, i, pivot_row, q);
                    if h[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if h[pivot_row][col] == 0 {
            continue;
        }
        if h[pivot_row][col] < 0 {
            h[pivot_row].iter_mut().for_each(|x| *x = -*x);
            u[pivot_row].iter_mut().for_each(|x| *x = -*x);
        }
        for i in 0..pivot_row {
            let q = Integer::div_floor(&h[i][col], &h[pivot_row][col]);
            if q != 0 {
                sub_row(&mut h, i, pivot_row, q);
                sub_row(&mut u, i, pivot_row, q);
            }
        }
        pivot_row += 1;
    }
    let narrow = |m: Vec<Vec<i128>>| -> IntMatrix {
        m.into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|x| i64::try_from(x).expect("lattice reduction overflowed i64"))
                    .collect()
            })
            .collect()
    };
    (narrow(u), narrow(h), pivot_row)
}

fn sub_row(m: &mut [Vec<i128>], target: usize, src: usize, q: i128) {
    let (a, b) = if target < src {
        let (lo, hi) = m.split_at_mut(src);
        (&mut lo[target], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(target);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x -= q * y;
    }
}

/// A Z-basis of the integer left kernel `{x : x a = 0}` of an `r × c` matrix.
pub fn integer_left_kernel(a: &[Vec<i64>], cols: usize) -> IntMatrix {
    let (u, _, rank) = hermite_rows(a, cols);
    u[rank..].to_vec()
}

pub fn gcd_vec(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

pub fn primitive(v: &[i64]) -> Vec<i64> {
    let g = gcd_vec(v);
    if g == 0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / g).collect()
    }
}

/// Integer vector orthogonal to the given `dim - 1` independent vectors
/// (generalised cross product by cofactors). Zero if they are dependent.
pub fn orthogonal_complement_vector(vectors: &[Vec<i64>], dim: usize) -> Vec<i64> {
    debug_assert_eq!(vectors.len() + 1, dim);
    let v: Vec<i64> = (0..dim)
        .map(|j| {
            let minor: IntMatrix = vectors
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let d = det_int(&minor);
            if j % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect();
    primitive(&v)
}

/// All subsets of `0..n` of the given size, in lexicographic order.
pub fn subsets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < size - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut current, &mut out);
    out
}

/// Looks for a linearly independent subset, with size in `sizes`, whose
/// open positive span contains `target`. By Carathéodory, `target` is in the
/// closed cone iff such a subset exists for sizes `0..=dim`.
pub fn positive_span_witness(
    generators: &[Vec<BigRational>],
    target: &[BigRational],
    sizes: std::ops::RangeInclusive<usize>,
) -> Option<Vec<usize>> {
    let dim = target.len();
    for size in sizes {
        if size > generators.len() {
            break;
        }
        for subset in subsets_of_size(generators.len(), size) {
            if size == 0 {
                if target.iter().all(|x| x.is_zero()) {
                    return Some(subset);
                }
                continue;
            }
            // columns = chosen generators
            let a: RatMatrix = (0..dim)
                .map(|r| subset.iter().map(|&g| generators[g][r].clone()).collect())
                .collect();
            if rank_rational(&a, size) < size {
                continue;
            }
            if let Some(lambda) = solve_full_column_rank(&a, target) {
                if lambda.iter().all(|x| x.is_positive()) {
                    return Some(subset);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_gives_left_kernel() {
        let m = vec![vec![1, 0], vec![-2, 1], vec![1, 0], vec![0, 1]];
        let ker = integer_left_kernel(&m, 2);
        assert_eq!(ker.len(), 2);
        for row in &ker {
            for c in 0..2 {
                assert_eq!((0..4).map(|i| row[i] * m[i][c]).sum::<i64>(), 0);
            }
        }
    }

    #[test]
    fn bareiss_determinant() {
        assert_eq!(det_int(&[vec![2, 1], vec![1, 1]]), 1);
        assert_eq!(det_int(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(det_int(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]), -3);
    }

    #[test]
    fn orthogonal_vector_in_3d() {
        let v = orthogonal_complement_vector(&[vec![1, 0, 0], vec![0, 1, 0]], 3);
        assert_eq!(v, vec![0, 0, 1]);
    }

    #[test]
    fn positive_span_detects_membership() {
        let gens = vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)]];
        assert!(positive_span_witness(&gens, &[rat(1), rat(2)], 0..=2).is_some());
        assert!(positive_span_witness(&gens, &[rat(-1), rat(2)], 0..=2).is_none());
    }
}
