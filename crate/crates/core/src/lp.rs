//! Smooth dyadic Littlewood–Paley cutoffs `β_k(ζ) = β₀(2^{-k}ζ)` with
//! `Σ_k β_k ≡ 1` on `(0, ∞)`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

/// Left end of the mother bump's support.
pub const SUPPORT_LO: f64 = 1.01 / SQRT_2;
/// Right end of the mother bump's support.
pub const SUPPORT_HI: f64 = 0.99 * 2.0 * SQRT_2;
const RAMP_UP_END: f64 = 1.0;
const RAMP_DOWN_START: f64 = 2.0;

fn chi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step from 0 (x ≤ 0) to 1 (x ≥ 1).
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = chi(x);
        a / (a + chi(1.0 - x))
    }
}

fn eta(z: f64) -> f64 {
    smooth_step((z - SUPPORT_LO) / (RAMP_UP_END - SUPPORT_LO))
        * smooth_step((SUPPORT_HI - z) / (SUPPORT_HI - RAMP_DOWN_START))
}

/// Mother cutoff `β₀ = η / Σ_k η(2^{-k}·)`, supported in
/// `(1.01/√2, 0.99·2√2)`.
pub fn beta0(z: f64) -> f64 {
    let e = eta(z);
    if e == 0.0 {
        return 0.0;
    }
    // Dilates 2^{-k} z land in the support of η only for |k| ≤ 2.
    let den: f64 = (-2..=2).map(|k| eta(z * 2f64.powi(-k))).sum();
    e / den
}

/// Dyadic cutoff `β_k(ζ) = β₀(2^{-k} ζ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpCutoff {
    pub k: i32,
}

impl LpCutoff {
    pub fn new(k: i32) -> Self {
        Self { k }
    }

    pub fn eval(&self, z: f64) -> f64 {
        beta0(z * 2f64.powi(-self.k))
    }

    /// Open interval outside which the cutoff vanishes.
    pub fn support(&self) -> (f64, f64) {
        let s = 2f64.powi(self.k);
        (SUPPORT_LO * s, SUPPORT_HI * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_on_log_grid() {
        for i in 0..4000 {
            let z = 10f64.powf(-3.0 + 6.0 * i as f64 / 3999.0);
            let s: f64 = (-20..=20).map(|k| LpCutoff::new(k).eval(z)).sum();
            assert!((s - 1.0).abs() <= 1e-10, "z={z}: {s}");
        }
    }

    #[test]
    fn support_is_inside_dyadic_band() {
        for i in 0..2000 {
            let z = 4.0 * i as f64 / 1999.0;
            let b = beta0(z);
            if z <= 1.0 / SQRT_2 || z >= 2.0 * SQRT_2 {
                assert_eq!(b, 0.0);
            }
            assert!((0.0..=1.0).contains(&b));
        }
        assert!(beta0(1.5) > 0.5);
    }
}
