use crate::error::{Error, Result};
use crate::sim::{Circuit, Control, Gate};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Normalised payoff f̂(x) = offset + slope·x on an integer input register,
/// read out through sin²(y + π/4) with y = c·(π/2)·(f̂ − ½).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearAmplitudeSpec {
    pub slope: f64,
    pub offset: f64,
    /// Inclusive integer domain of the input register.
    pub domain: (u64, u64),
    pub rescale_c: f64,
}

impl LinearAmplitudeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rescale_c > 0.0 && self.rescale_c <= 1.0) {
            return Err(Error::param("rescale_c", format!("{} not in (0, 1]", self.rescale_c)));
        }
        if !self.slope.is_finite() || !self.offset.is_finite() {
            return Err(Error::param("slope", "slope and offset must be finite"));
        }
        if self.domain.0 > self.domain.1 {
            return Err(Error::param("domain", "empty domain"));
        }
        Ok(())
    }

    pub fn f_hat(&self, x: u64) -> f64 {
        self.offset + self.slope * x as f64
    }

    /// Rotation argument y for input `x`; the inactive branch has f̂ = 0.
    pub fn y(&self, x: u64, active: bool) -> f64 {
        let f = if active { self.f_hat(x) } else { 0.0 };
        self.rescale_c * FRAC_PI_2 * (f - 0.5)
    }

    /// Exact |1⟩ probability of the objective for input `x`.
    pub fn objective_probability(&self, x: u64, active: bool) -> f64 {
        (self.y(x, active) + FRAC_PI_4).sin().powi(2)
    }
}

/// Rotates `objective` so that P(1) = sin²(y + π/4) with f̂ switched on by
/// the comparator `ancilla`.
pub fn linear_payoff_rotation(
    c: &mut Circuit,
    spec: &LinearAmplitudeSpec,
    input: &[usize],
    ancilla: usize,
    objective: usize,
) -> Result<()> {
    spec.validate()?;
    let k = spec.rescale_c;
    c.ry(objective, 2.0 * (FRAC_PI_4 - k * FRAC_PI_4))?;
    if spec.offset != 0.0 {
        c.apply_controlled(Gate::Ry(k * PI * spec.offset), objective, &[Control::one(ancilla)])?;
    }
    for (j, &q) in input.iter().enumerate() {
        let theta = k * PI * spec.slope * (1u64 << j) as f64;
        if theta != 0.0 {
            c.apply_controlled(Gate::Ry(theta), objective, &[Control::one(ancilla), Control::one(q)])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::statevector;

    fn spec() -> LinearAmplitudeSpec {
        // f̂ = (x − 5)/10 on x ∈ [0, 15]
        LinearAmplitudeSpec {
            slope: 0.1,
            offset: -0.5,
            domain: (0, 15),
            rescale_c: 0.2,
        }
    }

    fn objective_prob(x: u64, active: bool) -> f64 {
        let mut c = Circuit::new(6);
        for b in 0..4 {
            if x >> b & 1 == 1 {
                c.x(b).unwrap();
            }
        }
        if active {
            c.x(4).unwrap();
        }
        linear_payoff_rotation(&mut c, &spec(), &[0, 1, 2, 3], 4, 5).unwrap();
        statevector(&c).unwrap().prob_one(5)
    }

    #[test]
    fn inactive_branch_is_zero_payoff() {
        let s = spec();
        let want = (FRAC_PI_4 - s.rescale_c * FRAC_PI_4).sin().powi(2);
        for x in [0, 3, 5] {
            assert!((objective_prob(x, false) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn every_input_matches_closed_form() {
        let s = spec();
        for x in 0..16 {
            let got = objective_prob(x, true);
            assert!((got - s.objective_probability(x, true)).abs() < 1e-12);
        }
        // f̂(15) = 1: y = +cπ/4
        assert!((s.y(15, true) - s.rescale_c * FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_c() {
        let mut s = spec();
        s.rescale_c = 1.5;
        assert!(s.validate().is_err());
        s.rescale_c = 0.0;
        assert!(s.validate().is_err());
    }
}
