//! Geometry of the flat cone `C(S¹_ρ)`: angular normalization, the cone
//! distance, light-cone region classification, Laplacian eigen-data and
//! polar sampling grids.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Flat cone over a circle of radius `ρ`; the cross-section has
/// circumference `2πρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    rho: f64,
}

impl Cone {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(invalid("rho", format!("must be finite and positive, got {rho}")));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Circumference `2πρ` of the cross-section.
    pub fn period(&self) -> f64 {
        2.0 * PI * self.rho
    }

    /// Reduces an angle to the fundamental domain `(-πρ, πρ]`.
    pub fn normalize_angle(&self, theta: f64) -> f64 {
        let p = self.period();
        let half = PI * self.rho;
        let mut t = theta - p * (theta / p).round();
        if t <= -half {
            t += p;
        } else if t > half {
            t -= p;
        }
        t
    }

    /// Shortest angular separation, in `[0, πρ]`.
    pub fn angular_separation(&self, theta1: f64, theta2: f64) -> f64 {
        self.normalize_angle(theta1 - theta2).abs()
    }

    /// Geodesic distance between two points of the cone.
    pub fn distance(&self, p1: ConePoint, p2: ConePoint) -> f64 {
        let sep = self.angular_separation(p1.theta, p2.theta);
        distance_from_separation(p1.r, p2.r, sep)
    }

    /// Validated point with its angle reduced to `(-πρ, πρ]`.
    pub fn point(&self, r: f64, theta: f64) -> Result<ConePoint> {
        ConePoint::new(self, r, theta)
    }

    /// Eigenvalue index `ν_j = |j| / ρ` of the angular mode `j`.
    pub fn mode_order(&self, j: i64) -> f64 {
        j.unsigned_abs() as f64 / self.rho
    }

    /// Normalized angular eigenfunction `φ_j(θ) = (2πρ)^{-1/2} e^{ijθ/ρ}`.
    pub fn eigenfunction(&self, j: i64, theta: f64) -> Complex64 {
        let amp = 1.0 / self.period().sqrt();
        Complex64::from_polar(amp, j as f64 * theta / self.rho)
    }

    /// Uniform angular samples over one period together with the
    /// trapezoid weight `2πρ / n`.
    pub fn angular_grid(&self, n: usize) -> (Vec<f64>, f64) {
        let h = self.period() / n as f64;
        let start = -PI * self.rho;
        ((0..n).map(|k| start + (k as f64 + 0.5) * h).collect(), h)
    }
}

pub(crate) fn check_radius(name: &'static str, r: f64) -> Result<()> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(invalid(name, format!("radius must be finite and non-negative, got {r}")));
    }
    Ok(())
}

/// Law of cosines when the separation is at most `π`, otherwise the path
/// through the tip. The result never exceeds `r1 + r2`.
pub(crate) fn distance_from_separation(r1: f64, r2: f64, sep: f64) -> f64 {
    if sep >= PI {
        return r1 + r2;
    }
    let half = (0.5 * sep).sin();
    let d2 = (r1 - r2) * (r1 - r2) + 4.0 * r1 * r2 * half * half;
    d2.sqrt().min(r1 + r2)
}

/// Position of `t` relative to the light-cone boundaries `d` and `r1 + r2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionTag {
    /// `t < d`: before any wave arrives.
    I,
    /// `d < t < r1 + r2`: only geometric waves have arrived.
    II,
    /// `t > r1 + r2`: waves diffracted by the tip have arrived too.
    III,
    /// `t` within tolerance of `d`.
    BoundaryOneTwo,
    /// `t` within tolerance of `r1 + r2`.
    BoundaryTwoThree,
}

impl RegionTag {
    pub fn label(&self) -> &'static str {
        match self {
            RegionTag::I => "I",
            RegionTag::II => "II",
            RegionTag::III => "III",
            RegionTag::BoundaryOneTwo => "I|II",
            RegionTag::BoundaryTwoThree => "II|III",
        }
    }
}

/// Region tag together with the tolerance used to decide it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub tag: RegionTag,
    pub tol: f64,
}

/// Default boundary tolerance `1e-9 · max(1, t)`.
pub fn default_region_tolerance(t: f64) -> f64 {
    1e-9 * t.max(1.0)
}

/// Classifies `t` against the geometric front `d` and the diffractive front
/// `r1 + r2`. `tol` defaults to [`default_region_tolerance`].
pub fn classify_region(
    cone: &Cone,
    t: f64,
    p1: ConePoint,
    p2: ConePoint,
    tol: Option<f64>,
) -> Result<Region> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid("t", format!("must be finite and positive, got {t}")));
    }
    let tol = tol.unwrap_or_else(|| default_region_tolerance(t));
    if !(tol >= 0.0) {
        return Err(invalid("tol", "must be non-negative"));
    }
    let d = cone.distance(p1, p2);
    Ok(Region {
        tag: classify_with_distance(t, d, p1.r + p2.r, tol),
        tol,
    })
}

pub(crate) fn classify_with_distance(t: f64, d: f64, sum: f64, tol: f64) -> RegionTag {
    if (t - d).abs() <= tol {
        RegionTag::BoundaryOneTwo
    } else if (t - sum).abs() <= tol {
        RegionTag::BoundaryTwoThree
    } else if t < d {
        RegionTag::I
    } else if t < sum {
        RegionTag::II
    } else {
        RegionTag::III
    }
}

/// Point of the cone in polar coordinates, angle in `(-πρ, πρ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub r: f64,
    pub theta: f64,
}

impl ConePoint {
    pub fn new(cone: &Cone, r: f64, theta: f64) -> Result<Self> {
        check_radius("r", r)?;
        if !theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
        Ok(Self {
            r,
            theta: cone.normalize_angle(theta),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_rho() {
        assert!(Cone::new(0.0).is_err());
        assert!(Cone::new(-1.0).is_err());
        assert!(Cone::new(f64::NAN).is_err());
        assert!(Cone::new(f64::INFINITY).is_err());
    }

    fn pt(c: &Cone, r: f64, th: f64) -> ConePoint {
        c.point(r, th).unwrap()
    }

    /// Brute-force oracle: minimum planar distance over unwrapped images,
    /// capped at r1 + r2.
    fn brute_distance(rho: f64, r1: f64, t1: f64, r2: f64, t2: f64) -> f64 {
        let p = 2.0 * PI * rho;
        let jmax = (1.0 / rho).ceil() as i64 + 1;
        let mut best = r1 + r2;
        let shift = ((t1 - t2) / p).round() as i64;
        for j in (-jmax - shift.abs())..=(jmax + shift.abs()) {
            let a = t1 - t2 + p * j as f64;
            if a.abs() <= PI {
                let d = (r1 - r2 * a.cos()).hypot(r2 * a.sin());
                best = best.min(d);
            }
        }
        best
    }

    #[test]
    fn angular_separation_examples() {
        let c = Cone::new(1.0).unwrap();
        assert_eq!(c.angular_separation(0.0, 0.0), 0.0);
        assert!((c.angular_separation(0.0, 1.5 * PI) - 0.5 * PI).abs() < 1e-15);
        let c = Cone::new(0.5).unwrap();
        assert!((c.angular_separation(0.0, 0.5 * PI) - 0.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn distance_examples() {
        let c = Cone::new(1.0).unwrap();
        assert!((c.distance(pt(&c, 1.0, 0.0), pt(&c, 1.0, PI)) - 2.0).abs() < 1e-15);
        let c = Cone::new(2.0).unwrap();
        assert_eq!(c.distance(pt(&c, 1.0, 0.0), pt(&c, 1.0, 0.0)), 0.0);
        assert!((c.distance(pt(&c, 1.0, 0.0), pt(&c, 2.0, 3.5)) - 3.0).abs() < 1e-15);
        let c = Cone::new(0.5).unwrap();
        let d = c.distance(pt(&c, 1.0, 0.0), pt(&c, 1.0, 0.5 * PI));
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert!(c.point(-1.0, 0.0).is_err());
        assert!(c.point(1.0, f64::NAN).is_err());
    }

    #[test]
    fn distance_matches_brute_force_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let rho = rng.gen_range(0.15..3.0);
            let c = Cone::new(rho).unwrap();
            let (r1, r2) = (rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0));
            let (t1, t2) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            let d = c.distance(pt(&c, r1, t1), pt(&c, r2, t2));
            let b = brute_distance(rho, r1, t1, r2, t2);
            assert!((d - b).abs() <= 1e-12 * b.max(1e-3), "rho={rho}: {d} vs {b}");
        }
    }

    #[test]
    fn plane_distance_matches_cartesian() {
        let c = Cone::new(1.0).unwrap();
        let (r1, t1, r2, t2) = (1.3_f64, 0.4_f64, 2.2_f64, -1.9_f64);
        let dx = r1 * t1.cos() - r2 * t2.cos();
        let dy = r1 * t1.sin() - r2 * t2.sin();
        let d = c.distance(pt(&c, r1, t1), pt(&c, r2, t2));
        assert!((d - dx.hypot(dy)).abs() < 1e-14);
    }

    #[test]
    fn normalize_angle_is_half_open() {
        let c = Cone::new(0.5).unwrap();
        assert_eq!(c.normalize_angle(PI * 0.5), PI * 0.5);
        assert!((c.normalize_angle(-PI * 0.5) - PI * 0.5).abs() < 1e-15);
        assert!((c.normalize_angle(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn region_classification_examples() {
        let c = Cone::new(1.0).unwrap();
        let tag = |t: f64, a: (f64, f64), b: (f64, f64)| {
            classify_region(&c, t, pt(&c, a.0, a.1), pt(&c, b.0, b.1), None)
                .unwrap()
                .tag
        };
        assert_eq!(tag(1.0, (1.0, 0.0), (1.0, 0.5 * PI)), RegionTag::I);
        assert_eq!(tag(1.7, (1.0, 0.0), (1.0, 0.5 * PI)), RegionTag::II);
        assert_eq!(tag(3.0, (1.0, 0.0), (1.0, 0.5 * PI)), RegionTag::III);
        assert_eq!(tag(2.0, (1.0, 0.0), (1.0, 0.0)), RegionTag::BoundaryTwoThree);
        assert_eq!(tag(1.0, (1.0, 0.0), (2.0, 0.0)), RegionTag::BoundaryOneTwo);
        let p = pt(&c, 1.0, 0.0);
        assert!(classify_region(&c, 0.0, p, p, None).is_err());
    }

    #[test]
    fn regions_partition_off_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5_000 {
            let c = Cone::new(rng.gen_range(0.2..3.0)).unwrap();
            let p1 = pt(&c, rng.gen_range(0.0..4.0), rng.gen_range(-4.0..4.0));
            let p2 = pt(&c, rng.gen_range(0.0..4.0), rng.gen_range(-4.0..4.0));
            let t = rng.gen_range(0.01..10.0);
            let d = c.distance(p1, p2);
            if (t - d).abs() < 1e-9 || (t - p1.r - p2.r).abs() < 1e-9 {
                continue;
            }
            let tag = classify_region(&c, t, p1, p2, Some(0.0)).unwrap().tag;
            let hits = [t < d, d < t && t < p1.r + p2.r, t > p1.r + p2.r];
            assert_eq!(hits.iter().filter(|h| **h).count(), 1);
            let expect = if hits[0] {
                RegionTag::I
            } else if hits[1] {
                RegionTag::II
            } else {
                RegionTag::III
            };
            assert_eq!(tag, expect);
        }
    }

    #[test]
    fn eigenfunctions_are_orthonormal_on_grid() {
        let c = Cone::new(2.0 / 3.0).unwrap();
        let (th, h) = c.angular_grid(64);
        for j in -4..=4 {
            for k in -4..=4 {
                let ip: Complex64 = th
                    .iter()
                    .map(|&t| c.eigenfunction(j, t) * c.eigenfunction(k, t).conj() * h)
                    .sum();
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((ip - expect).norm() < 1e-13, "j={j} k={k} ip={ip}");
            }
        }
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(
            rho in 0.2f64..3.0,
            r1 in 0.0f64..5.0, t1 in -10.0f64..10.0,
            r2 in 0.0f64..5.0, t2 in -10.0f64..10.0,
            r3 in 0.0f64..5.0, t3 in -10.0f64..10.0,
        ) {
            let c = Cone::new(rho).unwrap();
            let (a, b, m) = (pt(&c, r1, t1), pt(&c, r2, t2), pt(&c, r3, t3));
            let d12 = c.distance(a, b);
            prop_assert!(d12 >= 0.0);
            prop_assert_eq!(d12, c.distance(b, a));
            prop_assert!(d12 <= c.distance(a, m) + c.distance(m, b) + 1e-10);
            prop_assert!(d12 <= r1 + r2);
            prop_assert!(c.distance(a, a) <= 1e-12 * (1.0 + r1));
        }

        #[test]
        fn distance_is_periodic(rho in 0.2f64..3.0, r1 in 0.0f64..5.0, r2 in 0.0f64..5.0,
                                t1 in -3.0f64..3.0, t2 in -3.0f64..3.0, k in -3i32..3) {
            let c = Cone::new(rho).unwrap();
            let d = c.distance(pt(&c, r1, t1), pt(&c, r2, t2));
            let ds = c.distance(pt(&c, r1, t1 + k as f64 * c.period()), pt(&c, r2, t2));
            prop_assert!((d - ds).abs() <= 1e-10 * (1.0 + d));
        }
    }
}
