use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    build_phase_layer, build_qft, check_reference_mode, compose_interferometer, ComplexMatrix,
    UnitaryMatrix,
};

/// A phased interferometer `U(φ) = V Φ(φ) V†` with `d` unknown phases on the first `d` modes.
#[derive(Clone, Debug)]
pub struct Interferometer {
    frame: UnitaryMatrix,
    phases: usize,
    circulant: bool,
}

impl Interferometer {
    pub fn new(frame: UnitaryMatrix, phases: usize) -> Result<Self> {
        check_reference_mode(frame.dim(), phases)?;
        let circulant = build_qft(frame.dim())?
            .matrix()
            .max_abs_diff(frame.matrix())
            == 0.0;
        Ok(Self {
            frame,
            phases,
            circulant,
        })
    }

    /// The parallel Fourier interferometer on `m` modes.
    pub fn fourier(m: usize, d: usize) -> Result<Self> {
        check_reference_mode(m, d)?;
        Self::new(build_qft(m)?, d)
    }

    pub fn modes(&self) -> usize {
        self.frame.dim()
    }

    pub fn num_phases(&self) -> usize {
        self.phases
    }

    pub fn frame(&self) -> &UnitaryMatrix {
        &self.frame
    }

    /// True when `U(φ)` is circulant for every `φ`, which holds for the Fourier frame.
    pub fn is_circulant(&self) -> bool {
        self.circulant
    }

    pub fn unitary(&self, phases: &[f64]) -> Result<UnitaryMatrix> {
        let layer = build_phase_layer(self.modes(), self.phases, phases)?;
        compose_interferometer(&self.frame, &layer)
    }

    /// `∂U/∂φ_k`, with entries `i·V[a][k]·e^{iφ_k}·conj(V[b][k])`.
    pub fn unitary_derivative(&self, phases: &[f64], k: usize) -> Result<ComplexMatrix> {
        if phases.len() != self.phases {
            return Err(Error::Arity {
                expected: self.phases,
                actual: phases.len(),
            });
        }
        if k >= self.phases {
            return Err(Error::ModeIndex {
                index: k,
                modes: self.phases,
            });
        }
        let m = self.modes();
        let factor = Complex64::i() * Complex64::from_polar(1.0, phases[k]);
        Ok(ComplexMatrix::from_fn(m, m, |a, b| {
            factor * self.frame[(a, k)] * self.frame[(b, k)].conj()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_matches_finite_difference() {
        let dev = Interferometer::fourier(4, 3).unwrap();
        let phases = [0.4, 1.9, -2.2];
        let h = 1e-6;
        for k in 0..3 {
            let mut up = phases;
            let mut down = phases;
            up[k] += h;
            down[k] -= h;
            let uu = dev.unitary(&up).unwrap();
            let ud = dev.unitary(&down).unwrap();
            let exact = dev.unitary_derivative(&phases, k).unwrap();
            let fd = ComplexMatrix::from_fn(4, 4, |a, b| (uu[(a, b)] - ud[(a, b)]) / (2.0 * h));
            assert!(exact.max_abs_diff(&fd) < 1e-9);
        }
    }

    #[test]
    fn rejects_missing_reference_mode() {
        assert!(matches!(
            Interferometer::fourier(3, 3),
            Err(Error::ReferenceMode { .. })
        ));
    }
}
