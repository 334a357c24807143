use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{ComplexVector, PureState};

/// Control qubit `(|0⟩ − δ|1⟩)/√(1+δ²)`, exactly normalized. Negative `δ` is
/// allowed for signed resource weights.
pub fn control_state(delta: f64) -> Result<PureState> {
    if !delta.is_finite() || delta.abs() >= 1.0 {
        return Err(Error::DeltaOutOfRange { delta });
    }
    let amplitudes = ComplexVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(-delta, 0.0)]);
    PureState::normalized(amplitudes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idle_control_is_zero() {
        let s = control_state(0.0).unwrap();
        assert_eq!(s.amplitudes()[0].re, 1.0);
        assert_eq!(s.amplitudes()[1].re, 0.0);
    }

    #[test]
    fn amplitudes_keep_the_sign_of_delta() {
        // 1/√1.01 = 0.995037..., 0.1/√1.01 = 0.099503...
        let s = control_state(0.1).unwrap();
        assert!((s.amplitudes()[0].re - 0.99504).abs() < 1e-5);
        assert!((s.amplitudes()[1].re + 0.09950).abs() < 1e-5);
        assert!(s.is_normalized());

        let s = control_state(-0.1).unwrap();
        assert!((s.amplitudes()[0].re - 0.99504).abs() < 1e-5);
        assert!((s.amplitudes()[1].re - 0.09950).abs() < 1e-5);
    }

    #[test]
    fn rejects_large_delta() {
        assert!(matches!(control_state(1.0), Err(Error::DeltaOutOfRange { .. })));
        assert!(matches!(control_state(-1.5), Err(Error::DeltaOutOfRange { .. })));
        assert!(control_state(f64::NAN).is_err());
    }
}
