//! Dense complex matrices and the unitaries of the Fourier interferometer.
//!
//! The device is `U = V Φ V†`, where `V` is the discrete Fourier matrix on `m`
//! modes and `Φ` applies `d < m` independent phases to the first `d` modes.
//! Indices are zero-based in this crate; the command-line front end exposes
//! one-based mode numbers.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockConfig;

/// Maximum absolute entry of `M†M − I` tolerated for a [`UnitaryMatrix`].
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Dense complex matrix stored in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::Shape(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Arity {
                expected: self.cols,
                actual: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Largest absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖M†M − I‖_max`; only meaningful for square matrices.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.cols;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.rows {
                    acc += self[(k, i)].conj() * self[(k, j)];
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(r) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Square matrix whose unitarity defect is below [`UNITARITY_TOLERANCE`].
#[derive(Clone, PartialEq, Debug)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    /// Checks squareness and unitarity before wrapping.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!(
                "unitary must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.unitarity_defect();
        if !(defect < UNITARITY_TOLERANCE) {
            return Err(Error::InvalidParameter(format!(
                "matrix is not unitary (defect {defect:e})"
            )));
        }
        Ok(Self(matrix))
    }

    pub fn identity(m: usize) -> Self {
        Self(ComplexMatrix::identity(m))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }
}

impl Index<(usize, usize)> for UnitaryMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

/// The `m`-mode quantum Fourier transform, `V[i][j] = ω^{ij} / √m` with `ω = e^{2πi/m}`.
pub fn build_qft(m: usize) -> Result<UnitaryMatrix> {
    if m == 0 {
        return Err(Error::InvalidDimension(
            "QFT needs at least one mode".into(),
        ));
    }
    let norm = 1.0 / (m as f64).sqrt();
    // Reduce the exponent mod m so large i*j does not lose phase accuracy.
    let matrix = ComplexMatrix::from_fn(m, m, |i, j| {
        let power = (i * j) % m;
        Complex64::from_polar(norm, 2.0 * PI * power as f64 / m as f64)
    });
    UnitaryMatrix::new(matrix)
}

/// Diagonal phase layer: `e^{iφ_k}` on the first `d` modes and `1` on the rest.
pub fn build_phase_layer(m: usize, d: usize, phases: &[f64]) -> Result<UnitaryMatrix> {
    check_reference_mode(m, d)?;
    if phases.len() != d {
        return Err(Error::Arity {
            expected: d,
            actual: phases.len(),
        });
    }
    if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite phase {bad}")));
    }
    let mut matrix = ComplexMatrix::identity(m);
    for (k, &phi) in phases.iter().enumerate() {
        matrix[(k, k)] = Complex64::from_polar(1.0, phi);
    }
    Ok(UnitaryMatrix(matrix))
}

/// `V Φ V†`.
pub fn compose_interferometer(
    frame: &UnitaryMatrix,
    phase: &UnitaryMatrix,
) -> Result<UnitaryMatrix> {
    if frame.dim() != phase.dim() {
        return Err(Error::Arity {
            expected: frame.dim(),
            actual: phase.dim(),
        });
    }
    let product = frame.0.matmul(&phase.0)?.matmul(&frame.0.adjoint())?;
    UnitaryMatrix::new(product)
}

/// Submatrix whose permanent gives the transition amplitude `in_cfg → out_cfg`.
///
/// Row `j` of `U` is repeated `out_cfg[j]` times and column `l` is repeated
/// `in_cfg[l]` times, both in ascending mode order.
pub fn expand_submatrix(
    unitary: &UnitaryMatrix,
    in_cfg: &FockConfig,
    out_cfg: &FockConfig,
) -> Result<ComplexMatrix> {
    let m = unitary.dim();
    if in_cfg.modes() != m || out_cfg.modes() != m {
        return Err(Error::Configuration(format!(
            "configurations over {} and {} modes do not fit a {m}-mode unitary",
            in_cfg.modes(),
            out_cfg.modes()
        )));
    }
    if in_cfg.total() != out_cfg.total() {
        return Err(Error::Configuration(format!(
            "photon totals differ: input {} vs output {}",
            in_cfg.total(),
            out_cfg.total()
        )));
    }
    let rows = out_cfg.mode_list();
    let cols = in_cfg.mode_list();
    Ok(ComplexMatrix::from_fn(rows.len(), cols.len(), |r, c| {
        unitary[(rows[r], cols[c])]
    }))
}

pub(crate) fn check_reference_mode(m: usize, d: usize) -> Result<()> {
    if d >= m {
        return Err(Error::ReferenceMode {
            modes: m,
            phases: d,
        });
    }
    if d == 0 {
        return Err(Error::InvalidDimension("need at least one phase".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn qft_small_cases() {
        let one = build_qft(1).unwrap();
        assert!((one[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);

        let two = build_qft(2).unwrap();
        let expected = ComplexMatrix::from_fn(2, 2, |i, j| {
            c(
                if i == 1 && j == 1 {
                    -FRAC_1_SQRT_2
                } else {
                    FRAC_1_SQRT_2
                },
                0.0,
            )
        });
        assert!(two.matrix().max_abs_diff(&expected) < 1e-15);

        // one-based (2,2) is zero-based (1,1): ω = i for m = 4
        let four = build_qft(4).unwrap();
        assert!((four[(1, 1)] - c(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn qft_rejects_zero_modes() {
        assert!(matches!(build_qft(0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn qft_unitary_up_to_sixteen_modes() {
        for m in 1..=16 {
            assert!(build_qft(m).unwrap().matrix().unitarity_defect() < UNITARITY_TOLERANCE);
        }
    }

    #[test]
    fn phase_layer_examples() {
        let layer = build_phase_layer(3, 2, &[PI, FRAC_PI_2]).unwrap();
        let expected = [c(-1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)];
        for (k, want) in expected.iter().enumerate() {
            assert!((layer[(k, k)] - want).norm() < 1e-15);
        }
        assert_eq!(layer[(0, 1)], c(0.0, 0.0));

        let id = build_phase_layer(2, 1, &[0.0]).unwrap();
        assert_eq!(id, UnitaryMatrix::identity(2));
        let id5 = build_phase_layer(5, 4, &[0.0; 4]).unwrap();
        assert_eq!(id5, UnitaryMatrix::identity(5));
    }

    #[test]
    fn phase_layer_errors() {
        assert!(matches!(
            build_phase_layer(3, 3, &[0.0; 3]),
            Err(Error::ReferenceMode {
                modes: 3,
                phases: 3
            })
        ));
        assert!(matches!(
            build_phase_layer(3, 2, &[0.0]),
            Err(Error::Arity {
                expected: 2,
                actual: 1
            })
        ));
    }

    #[test]
    fn compose_with_identity_phase_is_identity() {
        for m in 2..6 {
            let v = build_qft(m).unwrap();
            let u = compose_interferometer(&v, &UnitaryMatrix::identity(m)).unwrap();
            assert!(u.matrix().max_abs_diff(&ComplexMatrix::identity(m)) < 1e-14);
        }
    }

    #[test]
    fn two_mode_pi_phase_swaps_modes() {
        let v = build_qft(2).unwrap();
        let phi = build_phase_layer(2, 1, &[PI]).unwrap();
        let u = compose_interferometer(&v, &phi).unwrap();
        let expected = ComplexMatrix::from_fn(2, 2, |i, j| c(if i == j { 0.0 } else { -1.0 }, 0.0));
        assert!(u.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn compose_dimension_mismatch() {
        let v = build_qft(3).unwrap();
        let phi = build_phase_layer(2, 1, &[0.3]).unwrap();
        assert!(matches!(
            compose_interferometer(&v, &phi),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn expand_all_ones_is_whole_unitary() {
        let v = build_qft(3).unwrap();
        let ones = FockConfig::new(vec![1, 1, 1]);
        let w = expand_submatrix(&v, &ones, &ones).unwrap();
        assert_eq!(&w, v.matrix());
    }

    #[test]
    fn expand_repeats_rows() {
        let v = build_qft(2).unwrap();
        let w = expand_submatrix(
            &v,
            &FockConfig::new(vec![1, 1]),
            &FockConfig::new(vec![2, 0]),
        )
        .unwrap();
        assert_eq!(w.row(0), v.matrix().row(0));
        assert_eq!(w.row(1), v.matrix().row(0));
    }

    #[test]
    fn expand_rejects_total_mismatch() {
        let v = build_qft(2).unwrap();
        let err = expand_submatrix(
            &v,
            &FockConfig::new(vec![1, 1]),
            &FockConfig::new(vec![1, 0]),
        );
        assert!(matches!(err, Err(Error::Configuration(_))));
    }

    #[test]
    fn from_row_major_validates() {
        assert!(ComplexMatrix::from_row_major(2, 2, vec![c(0.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::from_row_major(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::from_row_major(1, 2, vec![c(1.0, 0.0); 2]).is_ok());
    }
}
