use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Fixed-point encoding of a qubit register: `n_total` bits of which the
/// lowest `n_frac` are fractional. Signed registers use two's complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointSpec {
    pub n_total: usize,
    pub n_frac: usize,
    pub signed: bool,
}

impl FixedPointSpec {
    pub fn new(n_total: usize, n_frac: usize, signed: bool) -> Result<Self> {
        if n_total == 0 || n_total > 62 {
            return Err(Error::param("n_total", format!("{n_total} must be in 1..=62")));
        }
        if n_frac >= n_total {
            return Err(Error::param("n_frac", format!("{n_frac} must be below n_total {n_total}")));
        }
        Ok(FixedPointSpec {
            n_total,
            n_frac,
            signed,
        })
    }

    pub fn integer(n_total: usize) -> Self {
        FixedPointSpec {
            n_total,
            n_frac: 0,
            signed: false,
        }
    }

    pub fn resolution(&self) -> f64 {
        (-(self.n_frac as f64)).exp2()
    }

    pub fn modulus(&self) -> u64 {
        1u64 << self.n_total
    }

    /// Half-open representable interval `[lo, hi)`.
    pub fn range(&self) -> (f64, f64) {
        if self.signed {
            let h = ((self.n_total - 1 - self.n_frac) as f64).exp2();
            (-h, h)
        } else {
            (0.0, ((self.n_total - self.n_frac) as f64).exp2())
        }
    }

    /// Nearest grid integer, ties to even.
    pub fn to_grid(&self, value: f64) -> i64 {
        (value * (self.n_frac as f64).exp2()).round_ties_even() as i64
    }

    /// Value rounded onto the grid.
    pub fn quantize(&self, value: f64) -> f64 {
        self.to_grid(value) as f64 * self.resolution()
    }

    /// Basis index holding `value`, after rounding.
    pub fn encode(&self, value: f64) -> Result<usize> {
        let (lo, hi) = self.range();
        let q = self.quantize(value);
        if !value.is_finite() || q < lo || q >= hi {
            return Err(Error::Overflow {
                value,
                reason: format!("outside [{lo}, {hi})"),
            });
        }
        Ok(self.to_grid(value).rem_euclid(self.modulus() as i64) as usize)
    }

    /// Value stored in basis index `index` (only the low `n_total` bits count).
    pub fn decode(&self, index: usize) -> f64 {
        let m = self.modulus() as i64;
        let mut k = (index as i64) & (m - 1);
        if self.signed && k >= m / 2 {
            k -= m;
        }
        k as f64 * self.resolution()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let s = FixedPointSpec::new(4, 1, true).unwrap();
        assert_eq!(s.range(), (-4.0, 4.0));
        let u = FixedPointSpec::new(4, 1, false).unwrap();
        assert_eq!(u.range(), (0.0, 8.0));
        assert!(FixedPointSpec::new(3, 3, false).is_err());
    }

    #[test]
    fn encode_decode() {
        let s = FixedPointSpec::new(4, 0, true).unwrap();
        assert_eq!(s.encode(-1.0).unwrap(), 15);
        assert_eq!(s.decode(15), -1.0);
        assert!(s.encode(8.0).is_err());
        let f = FixedPointSpec::new(5, 2, false).unwrap();
        assert_eq!(f.encode(1.25).unwrap(), 5);
        // 0.125 · 4 = 0.5 rounds to even
        assert_eq!(f.to_grid(0.125), 0);
        assert_eq!(f.to_grid(0.375), 2);
    }
}
