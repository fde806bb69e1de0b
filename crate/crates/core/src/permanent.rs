//! Matrix permanents.
//!
//! [`permanent_ryser`] is the production kernel: Ryser's inclusion–exclusion
//! formula with Gray-code updates of the row sums, `O(2ⁿ·n)` operations.
//! [`permanent_naive`] sums all `n!` permutations and exists as an oracle.
//! [`permanent_minor_gradient`] differentiates the permanent along a
//! direction matrix inside the same Gray-code sweep.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Largest dimension accepted by the Ryser kernels.
pub const RYSER_MAX_DIM: usize = 24;
/// Largest dimension accepted by the permutation-sum oracle.
pub const NAIVE_MAX_DIM: usize = 9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn square_dim(matrix: &ComplexMatrix, limit: usize) -> Result<usize> {
    if !matrix.is_square() {
        return Err(Error::Shape(format!(
            "permanent needs a square matrix, got {}x{}",
            matrix.rows(),
            matrix.cols()
        )));
    }
    let n = matrix.rows();
    if n > limit {
        return Err(Error::SizeGuard { size: n, limit });
    }
    Ok(n)
}

/// Permanent by Ryser's formula, `perm A = (−1)ⁿ Σ_S (−1)^{|S|} Π_i Σ_{j∈S} a_ij`.
///
/// The empty (0×0) permanent is 1.
pub fn permanent_ryser(matrix: &ComplexMatrix) -> Result<Complex64> {
    let n = square_dim(matrix, RYSER_MAX_DIM)?;
    if n == 0 {
        return Ok(ONE);
    }
    let mut row_sums = vec![ZERO; n];
    let mut in_subset = vec![false; n];
    let mut total = ZERO;
    let mut subset_size = 0usize;
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        let sign = if in_subset[col] { -1.0 } else { 1.0 };
        in_subset[col] = !in_subset[col];
        if in_subset[col] {
            subset_size += 1;
        } else {
            subset_size -= 1;
        }
        for (r, sum) in row_sums.iter_mut().enumerate() {
            *sum += matrix[(r, col)] * sign;
        }
        let product = row_sums.iter().fold(ONE, |acc, s| acc * s);
        if (n - subset_size) % 2 == 0 {
            total += product;
        } else {
            total -= product;
        }
    }
    Ok(total)
}

/// Permanent as the explicit sum over all `n!` permutations.
pub fn permanent_naive(matrix: &ComplexMatrix) -> Result<Complex64> {
    square_dim(matrix, NAIVE_MAX_DIM)?;
    // Depth-first over rows; `used` marks the columns already taken.
    fn walk(matrix: &ComplexMatrix, row: usize, used: u32, acc: Complex64) -> Complex64 {
        let n = matrix.rows();
        if row == n {
            return acc;
        }
        (0..n)
            .filter(|col| used & (1 << col) == 0)
            .map(|col| walk(matrix, row + 1, used | (1 << col), acc * matrix[(row, col)]))
            .sum()
    }
    Ok(walk(matrix, 0, 0, ONE))
}

/// `d/dε perm(W + ε·Ẇ)` at `ε = 0`.
///
/// Equal to `Σ_{r,c} Ẇ[r,c] · perm(W without row r and column c)`, but computed
/// in one Gray-code sweep by carrying the directional derivative of every
/// row sum alongside the row sum itself.
pub fn permanent_minor_gradient(w: &ComplexMatrix, w_dot: &ComplexMatrix) -> Result<Complex64> {
    let n = square_dim(w, RYSER_MAX_DIM)?;
    if w_dot.rows() != w.rows() || w_dot.cols() != w.cols() {
        return Err(Error::Shape(format!(
            "direction is {}x{} but matrix is {n}x{n}",
            w_dot.rows(),
            w_dot.cols()
        )));
    }
    Ok(permanent_with_derivative(w, w_dot).1)
}

/// Permanent and its directional derivative from one sweep; shapes already checked.
pub(crate) fn permanent_with_derivative(
    w: &ComplexMatrix,
    w_dot: &ComplexMatrix,
) -> (Complex64, Complex64) {
    let n = w.rows();
    if n == 0 {
        return (ONE, ZERO);
    }
    let mut sums = vec![ZERO; n];
    let mut dot_sums = vec![ZERO; n];
    let mut prefix = vec![ONE; n + 1];
    let mut in_subset = vec![false; n];
    let mut subset_size = 0usize;
    let mut value = ZERO;
    let mut derivative = ZERO;
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        let sign = if in_subset[col] { -1.0 } else { 1.0 };
        in_subset[col] = !in_subset[col];
        if in_subset[col] {
            subset_size += 1;
        } else {
            subset_size -= 1;
        }
        for r in 0..n {
            sums[r] += w[(r, col)] * sign;
            dot_sums[r] += w_dot[(r, col)] * sign;
        }
        for r in 0..n {
            prefix[r + 1] = prefix[r] * sums[r];
        }
        // Σ_i ṡ_i Π_{k≠i} s_k via prefix and running suffix products, exact when some s_k = 0.
        let mut suffix = ONE;
        let mut term = ZERO;
        for r in (0..n).rev() {
            term += dot_sums[r] * prefix[r] * suffix;
            suffix *= sums[r];
        }
        if (n - subset_size) % 2 == 0 {
            value += prefix[n];
            derivative += term;
        } else {
            value -= prefix[n];
            derivative -= term;
        }
    }
    (value, derivative)
}

/// Permanent of `W` together with `d/dε perm(W + ε·a_k b_kᵀ)` for each rank-one
/// direction `k`, from a single Gray-code sweep.
///
/// `left[k]` and `right[k]` hold the `n` entries of `a_k` and `b_k`. Each
/// direction only needs the scalar `Σ_{j∈S} b_k[j]` per subset, so the
/// marginal cost of a direction is `O(n)` per subset.
pub(crate) fn permanent_with_rank_one_derivatives(
    w: &ComplexMatrix,
    left: &[Vec<Complex64>],
    right: &[Vec<Complex64>],
) -> (Complex64, Vec<Complex64>) {
    let n = w.rows();
    let d = left.len();
    debug_assert_eq!(right.len(), d);
    if n == 0 {
        return (ONE, vec![ZERO; d]);
    }
    let mut sums = vec![ZERO; n];
    let mut col_sums = vec![ZERO; d];
    let mut prefix = vec![ONE; n + 1];
    let mut others = vec![ZERO; n];
    let mut in_subset = vec![false; n];
    let mut subset_size = 0usize;
    let mut value = ZERO;
    let mut derivatives = vec![ZERO; d];
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        let sign = if in_subset[col] { -1.0 } else { 1.0 };
        in_subset[col] = !in_subset[col];
        if in_subset[col] {
            subset_size += 1;
        } else {
            subset_size -= 1;
        }
        for (r, s) in sums.iter_mut().enumerate() {
            *s += w[(r, col)] * sign;
        }
        for (beta, b) in col_sums.iter_mut().zip(right) {
            *beta += b[col] * sign;
        }
        for r in 0..n {
            prefix[r + 1] = prefix[r] * sums[r];
        }
        let mut suffix = ONE;
        for r in (0..n).rev() {
            others[r] = prefix[r] * suffix;
            suffix *= sums[r];
        }
        let even = (n - subset_size) % 2 == 0;
        if even {
            value += prefix[n];
        } else {
            value -= prefix[n];
        }
        for ((acc, a), beta) in derivatives.iter_mut().zip(left).zip(&col_sums) {
            let weighted: Complex64 = a.iter().zip(&others).map(|(x, y)| x * y).sum();
            let term = beta * weighted;
            if even {
                *acc += term;
            } else {
                *acc -= term;
            }
        }
    }
    (value, derivatives)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn real(n: usize, vals: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |r, c| Complex64::new(vals[r * n + c], 0.0))
    }

    fn delete(m: &ComplexMatrix, row: usize, col: usize) -> ComplexMatrix {
        let n = m.rows();
        ComplexMatrix::from_fn(n - 1, n - 1, |r, c| {
            m[(
                if r < row { r } else { r + 1 },
                if c < col { c } else { c + 1 },
            )]
        })
    }

    /// Laplace-style oracle: Σ Ẇ[r,c]·perm(minor(r,c)) with naive permanents.
    fn minor_expansion(w: &ComplexMatrix, w_dot: &ComplexMatrix) -> Complex64 {
        let n = w.rows();
        let mut acc = ZERO;
        for r in 0..n {
            for c in 0..n {
                acc += w_dot[(r, c)] * permanent_naive(&delete(w, r, c)).unwrap();
            }
        }
        acc
    }

    #[test]
    fn small_known_values() {
        assert_eq!(permanent_ryser(&ComplexMatrix::identity(3)).unwrap(), ONE);
        assert!((permanent_ryser(&real(2, &[1.0; 4])).unwrap() - 2.0).norm() < 1e-15);
        assert_eq!(permanent_ryser(&ComplexMatrix::zeros(0, 0)).unwrap(), ONE);

        let a = Complex64::new(0.3, -1.7);
        assert_eq!(
            permanent_naive(&ComplexMatrix::from_fn(1, 1, |_, _| a)).unwrap(),
            a
        );
        assert_eq!(permanent_naive(&ComplexMatrix::identity(4)).unwrap(), ONE);
        assert!((permanent_naive(&real(3, &[1.0; 9])).unwrap() - 6.0).norm() < 1e-15);
        assert_eq!(permanent_naive(&ComplexMatrix::zeros(0, 0)).unwrap(), ONE);
    }

    #[test]
    fn ryser_matches_naive_on_six_by_six() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 6);
            let fast = permanent_ryser(&m).unwrap();
            let slow = permanent_naive(&m).unwrap();
            assert!((fast - slow).norm() <= 1e-10 * slow.norm().max(1e-300));
        }
    }

    #[test]
    fn guards_and_shapes() {
        assert!(matches!(
            permanent_ryser(&ComplexMatrix::zeros(2, 3)),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            permanent_ryser(&ComplexMatrix::zeros(25, 25)),
            Err(Error::SizeGuard {
                size: 25,
                limit: 24
            })
        ));
        assert!(matches!(
            permanent_naive(&ComplexMatrix::zeros(10, 10)),
            Err(Error::SizeGuard { size: 10, limit: 9 })
        ));
        assert!(matches!(
            permanent_minor_gradient(&ComplexMatrix::zeros(2, 2), &ComplexMatrix::zeros(3, 3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn gradient_small_cases() {
        let w = ComplexMatrix::from_fn(1, 1, |_, _| Complex64::new(2.0, 1.0));
        let wd = ComplexMatrix::from_fn(1, 1, |_, _| Complex64::new(-0.5, 3.0));
        assert!((permanent_minor_gradient(&w, &wd).unwrap() - wd[(0, 0)]).norm() < 1e-15);

        let (a, d) = (Complex64::new(1.5, 0.2), Complex64::new(-0.7, 0.4));
        let (ad, dd) = (Complex64::new(0.3, 0.9), Complex64::new(2.0, -1.0));
        let w = ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
            (0, 0) => a,
            (1, 1) => d,
            _ => ZERO,
        });
        let wd = ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
            (0, 0) => ad,
            (1, 1) => dd,
            _ => ZERO,
        });
        let want = ad * d + a * dd;
        assert!((permanent_minor_gradient(&w, &wd).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn gradient_matches_minor_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=6 {
            let w = random_matrix(&mut rng, n);
            let wd = random_matrix(&mut rng, n);
            let fast = permanent_minor_gradient(&w, &wd).unwrap();
            let oracle = minor_expansion(&w, &wd);
            assert!(
                (fast - oracle).norm() <= 1e-11 * oracle.norm().max(1.0),
                "n = {n}"
            );
        }
    }

    #[test]
    fn gradient_with_zero_row_sums() {
        // Rows summing to zero exercise the prefix/suffix product path.
        let w = real(3, &[1.0, -1.0, 0.0, 0.0, 1.0, -1.0, 1.0, 0.0, -1.0]);
        let wd = real(3, &[0.5, 0.1, -0.2, 0.3, 0.0, 0.7, -0.4, 0.6, 0.2]);
        let fast = permanent_minor_gradient(&w, &wd).unwrap();
        assert!((fast - minor_expansion(&w, &wd)).norm() < 1e-14);
    }

    #[test]
    fn gradient_matches_central_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = random_matrix(&mut rng, 5);
        let wd = random_matrix(&mut rng, 5);
        let h = 1e-6;
        let shifted = |eps: f64| ComplexMatrix::from_fn(5, 5, |r, c| w[(r, c)] + wd[(r, c)] * eps);
        let fd = (permanent_ryser(&shifted(h)).unwrap() - permanent_ryser(&shifted(-h)).unwrap())
            / (2.0 * h);
        let exact = permanent_minor_gradient(&w, &wd).unwrap();
        assert!((exact - fd).norm() / exact.norm() < 1e-6);
    }

    #[test]
    fn rank_one_directions_match_general_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 5;
        let w = random_matrix(&mut rng, n);
        let vec_of = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
            (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        };
        let left: Vec<_> = (0..3).map(|_| vec_of(&mut rng)).collect();
        let right: Vec<_> = (0..3).map(|_| vec_of(&mut rng)).collect();
        let (value, derivs) = permanent_with_rank_one_derivatives(&w, &left, &right);
        assert!((value - permanent_ryser(&w).unwrap()).norm() < 1e-12 * value.norm());
        for k in 0..3 {
            let dir = ComplexMatrix::from_fn(n, n, |r, c| left[k][r] * right[k][c]);
            let want = permanent_minor_gradient(&w, &dir).unwrap();
            assert!((derivs[k] - want).norm() < 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn fused_value_equals_ryser() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let w = random_matrix(&mut rng, 7);
        let wd = random_matrix(&mut rng, 7);
        let (value, _) = permanent_with_derivative(&w, &wd);
        let reference = permanent_ryser(&w).unwrap();
        assert!((value - reference).norm() <= 1e-12 * reference.norm());
    }
}
