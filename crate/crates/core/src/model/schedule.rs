use nalgebra::DMatrix;
use rand::Rng;

use super::C64;
use crate::error::{domain, Result};
use crate::seed;

/// Per-sample 1-bit reflection pattern.
///
/// `bits[(p, i)]` is the control bit of element `i` during sample `p`; the
/// matching reflection code is `+1` for bit 0 and `-1` for bit 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSchedule {
    bits: DMatrix<u8>,
    codes: DMatrix<f64>,
}

impl CodeSchedule {
    pub fn from_bits(bits: DMatrix<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(domain("control bits must be 0 or 1"));
        }
        let codes = bits.map(|b| if b == 0 { 1.0 } else { -1.0 });
        Ok(Self { bits, codes })
    }

    pub fn samples(&self) -> usize {
        self.bits.nrows()
    }

    pub fn elements(&self) -> usize {
        self.bits.ncols()
    }

    pub fn bits(&self) -> &DMatrix<u8> {
        &self.bits
    }

    /// The `P x MN` matrix `G` of ±1 codes.
    pub fn codes(&self) -> &DMatrix<f64> {
        &self.codes
    }

    pub fn codes_complex(&self) -> DMatrix<C64> {
        self.codes.map(|g| C64::new(g, 0.0))
    }
}

/// Draws i.i.d. uniform control bits for `samples` intervals.
pub fn build_code_schedule(samples: usize, elements: usize, seed: u64) -> Result<CodeSchedule> {
    if samples == 0 || elements == 0 {
        return Err(domain("code schedule needs at least one sample and one element"));
    }
    let mut rng = seed::child_rng(seed, seed::stream::CODES, 0);
    let bits = DMatrix::from_fn(samples, elements, |_, _| rng.random_range(0..=1u8));
    CodeSchedule::from_bits(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_bit_map() {
        let s = CodeSchedule::from_bits(DMatrix::from_row_slice(1, 2, &[0, 1])).unwrap();
        assert_eq!(s.codes()[(0, 0)], 1.0);
        assert_eq!(s.codes()[(0, 1)], -1.0);
    }

    #[test]
    fn table_sized_schedule_is_deterministic() {
        let a = build_code_schedule(128, 256, 11).unwrap();
        let b = build_code_schedule(128, 256, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.codes().shape(), (128, 256));
        assert!(a.codes().iter().all(|&g| g == 1.0 || g == -1.0));
        for (b, g) in a.bits().iter().zip(a.codes().iter()) {
            assert_eq!(*g, if *b == 0 { 1.0 } else { -1.0 });
        }
        // roughly balanced
        let ones = a.bits().iter().filter(|&&b| b == 1).count() as f64;
        assert!((ones / (128.0 * 256.0) - 0.5).abs() < 0.02);
        assert_ne!(a, build_code_schedule(128, 256, 12).unwrap());
    }

    #[test]
    fn rejects_empty() {
        assert!(build_code_schedule(0, 4, 1).is_err());
        assert!(CodeSchedule::from_bits(DMatrix::from_element(1, 1, 2)).is_err());
    }
}
