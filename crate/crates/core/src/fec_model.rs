//! Abstract per-lane FEC: a code rate and the detect/correct thresholds that
//! follow from its minimum Hamming distance, plus the residual bit and symbol
//! error rates left after correction. No concrete codec is implemented.

use crate::error::ModelError;
use crate::scalar::Scalar;

/// FEC parameters for one generation of `k` symbols of `s` bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FecSpec<T> {
    /// R_F in (0, 1].
    pub code_rate: T,
    /// Minimum Hamming distance, rounded to the nearest integer.
    pub hamming_distance: u64,
    /// Bit errors the code can detect (t_e).
    pub detectable_bits: u64,
    /// Bit errors the code can correct (t_k).
    pub correctable_bits: u64,
}

/// Residual error probabilities on a main lane after FEC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualError<T> {
    pub ber: T,
    pub ser: T,
}

pub(crate) fn check_code_rate<T: Scalar>(code_rate: T) -> Result<(), ModelError> {
    if code_rate > T::zero() && code_rate <= T::one() {
        Ok(())
    } else {
        Err(ModelError::InvalidRate(code_rate.as_f64()))
    }
}

pub(crate) fn check_probability<T: Scalar>(what: &'static str, p: T) -> Result<(), ModelError> {
    if p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(ModelError::InvalidProbability {
            what,
            value: p.as_f64(),
        })
    }
}

/// Number of parity bits `k·s/R_F − k·s`, rounded to the nearest integer.
pub fn hamming_distance<T: Scalar>(payload_bits: u64, code_rate: T) -> Result<u64, ModelError> {
    check_code_rate(code_rate)?;
    let bits = T::of_u64(payload_bits);
    let raw = (bits / code_rate - bits).round();
    Ok(raw.max(T::zero()).to_u64().unwrap_or(u64::MAX))
}

/// t_e = Δ − 1, floored at 0.
pub fn detectable_bits(hamming_distance: u64) -> u64 {
    hamming_distance.saturating_sub(1)
}

/// t_k = (Δ − 2)/2 for even Δ, (Δ − 1)/2 for odd Δ, floored at 0.
pub fn correctable_bits(hamming_distance: u64) -> u64 {
    if hamming_distance.is_multiple_of(2) {
        hamming_distance.saturating_sub(2) / 2
    } else {
        (hamming_distance - 1) / 2
    }
}

pub fn derive_fec<T: Scalar>(k: u64, s: u32, code_rate: T) -> Result<FecSpec<T>, ModelError> {
    check_code_rate(code_rate)?;
    if k == 0 || s == 0 {
        return Err(ModelError::EmptyGeneration);
    }
    let delta = hamming_distance(k * u64::from(s), code_rate)?;
    Ok(FecSpec {
        code_rate,
        hamming_distance: delta,
        detectable_bits: detectable_bits(delta),
        correctable_bits: correctable_bits(delta),
    })
}

/// Residual BER `(k·s·p_e − R_F·t_k) / (k·s)`, clamped into [0, 1].
///
/// Non-positive values mean every bit error was corrected.
pub fn residual_ber<T: Scalar>(fec: &FecSpec<T>, k: u64, s: u32, expected_ber: T) -> T {
    let bits = T::of_u64(k * u64::from(s));
    if bits == T::zero() {
        return T::zero();
    }
    let corrected = fec.code_rate * T::of_u64(fec.correctable_bits);
    let p = (bits * expected_ber - corrected) / bits;
    p.max(T::zero()).min(T::one())
}

/// Residual SER `1 − (1 − P_b)^s`.
pub fn residual_ser<T: Scalar>(residual_ber: T, s: u32) -> T {
    let p = residual_ber.max(T::zero()).min(T::one());
    T::one() - (T::one() - p).powi(s as i32)
}

pub fn residual_error<T: Scalar>(
    fec: &FecSpec<T>,
    k: u64,
    s: u32,
    expected_ber: T,
) -> Result<ResidualError<T>, ModelError> {
    check_probability("expected BER", expected_ber)?;
    let ber = residual_ber(fec, k, s, expected_ber);
    Ok(ResidualError {
        ber,
        ser: residual_ser(ber, s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thresholds_two_channel_setup() {
        let fec = derive_fec(100, 8, 0.73f64).unwrap();
        assert_eq!(fec.hamming_distance, 296);
        assert_eq!(fec.correctable_bits, 147);
        assert_eq!(fec.detectable_bits, 295);
    }

    #[test]
    fn thresholds_four_channel_setup() {
        let fec = derive_fec(50, 8, 0.73f64).unwrap();
        assert_eq!(fec.hamming_distance, 148);
        assert_eq!(fec.correctable_bits, 73);
    }

    #[test]
    fn thresholds_single_precision() {
        let fec = derive_fec(100, 8, 0.73f32).unwrap();
        assert_eq!((fec.hamming_distance, fec.correctable_bits), (296, 147));
    }

    #[test]
    fn uncoded_lane_corrects_nothing() {
        let fec = derive_fec(100, 8, 1.0f64).unwrap();
        assert_eq!(
            (
                fec.hamming_distance,
                fec.detectable_bits,
                fec.correctable_bits
            ),
            (0, 0, 0)
        );
    }

    #[test]
    fn invalid_rates() {
        assert_eq!(derive_fec(10, 8, 0.0f64), Err(ModelError::InvalidRate(0.0)));
        assert_eq!(derive_fec(10, 8, 1.5f64), Err(ModelError::InvalidRate(1.5)));
        assert!(derive_fec(10, 8, f64::NAN).is_err());
    }

    #[test]
    fn tiny_distances_floor_at_zero() {
        assert_eq!((detectable_bits(1), correctable_bits(1)), (0, 0));
        assert_eq!((detectable_bits(0), correctable_bits(0)), (0, 0));
        assert_eq!(correctable_bits(2), 0);
        assert_eq!(correctable_bits(3), 1);
    }

    #[test]
    fn parity_rule_over_range() {
        for delta in 2..=10_000u64 {
            let expected = if delta % 2 == 0 {
                (delta - 2) / 2
            } else {
                (delta - 1) / 2
            };
            assert_eq!(correctable_bits(delta), expected);
            assert!(correctable_bits(delta) <= detectable_bits(delta));
        }
    }

    #[test]
    fn residual_ber_examples() {
        let fec = FecSpec {
            code_rate: 0.73f64,
            hamming_distance: 296,
            detectable_bits: 295,
            correctable_bits: 147,
        };
        assert_eq!(residual_ber(&fec, 100, 8, 0.01), 0.0);
        assert_eq!(residual_ber(&fec, 100, 8, 0.0), 0.0);
        // (160 - 107.31) / 800
        assert_relative_eq!(
            residual_ber(&fec, 100, 8, 0.2),
            0.0658625,
            max_relative = 1e-12
        );
        assert_eq!(residual_ber(&fec, 100, 8, 1.0), (800.0 - 107.31) / 800.0);
    }

    #[test]
    fn residual_ser_examples() {
        assert_eq!(residual_ser(0.0f64, 8), 0.0);
        assert_eq!(residual_ser(1.0f64, 8), 1.0);
        // 1 - 0.9341375^8
        assert_relative_eq!(
            residual_ser(0.0658625f64, 8),
            0.420_188_995_303_783_7,
            max_relative = 1e-12
        );
    }

    #[test]
    fn probability_checked() {
        let fec = derive_fec(50, 8, 0.73f64).unwrap();
        assert!(matches!(
            residual_error(&fec, 50, 8, 1.2),
            Err(ModelError::InvalidProbability { .. })
        ));
    }

    #[test]
    fn doubling_k_keeps_residual_ber_up_to_rounding() {
        for &rate in &[0.5f64, 0.73, 0.9] {
            for i in 0..=100 {
                let p = i as f64 / 100.0;
                let a = residual_ber(&derive_fec(50, 8, rate).unwrap(), 50, 8, p);
                let b = residual_ber(&derive_fec(100, 8, rate).unwrap(), 100, 8, p);
                // One unit of Δ moves t_k by at most 1, i.e. R_F / (k·s).
                assert!((a - b).abs() <= 1.0 / 400.0 + 1e-12, "{rate} {p} {a} {b}");
            }
        }
    }
}
