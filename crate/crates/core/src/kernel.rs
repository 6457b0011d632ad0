//! Schwartz kernel of the sine propagator `U(t) = sin(t√Δ)/√Δ` on the cone,
//! split as `K = K^geom + K^diff`, and its application to initial data by
//! quadrature.
//!
//! The geometric part is a finite sum of unwrapped free-plane kernels,
//! `(1/2π) Ψ(t, r₁, r₂, Δθ)`. The diffractive part is the integral
//!
//! ```text
//! K^diff = −1{t > r₁+r₂} / (4π²ρ √(2r₁r₂))
//!          ∫₀^β (α − cosh s)^{-1/2} [ sin φ₁/(cosh(s/ρ) − cos φ₁)
//!                                    + sin φ₂/(cosh(s/ρ) − cos φ₂) ] ds
//! ```
//!
//! with `α = (t² − r₁² − r₂²)/(2r₁r₂)`, `β = arccosh α`,
//! `φ₁,₂ = (π ± Δθ)/ρ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cone::{classify_with_distance, default_region_tolerance, Cone, ConePoint, Region};
use crate::error::{invalid, ConeError, Result};
use crate::quadrature::{integrate_adaptive, AdaptiveConfig};

/// Relative error estimate above which kernel values carry a warning.
pub const KERNEL_WARNING: f64 = 1e-6;
/// Denominator magnitude below which the diffractive integrand is flagged.
pub const SINGULAR_DENOMINATOR: f64 = 1e-14;

/// Value of `Ψ` with the number of contributing unwrapped images.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiEval {
    /// `+∞` when a bracket vanishes within tolerance.
    pub value: f64,
    pub n_terms: usize,
    pub on_light_cone: bool,
}

/// Unwrapped image angles `Δθ + 2πρj ∈ [−π, π]`. When both `−π` and `+π`
/// occur (exact antipode) only the smaller `j`, i.e. `−π`, is kept.
pub fn image_angles(cone: &Cone, dtheta: f64) -> Vec<f64> {
    let p = cone.period();
    let th = cone.normalize_angle(dtheta);
    let eps = 4.0 * f64::EPSILON * PI;
    let lo = ((-PI - th) / p).ceil() as i64 - 1;
    let hi = ((PI - th) / p).floor() as i64 + 1;
    let mut out: Vec<f64> = (lo..=hi)
        .map(|j| th + p * j as f64)
        .filter(|a| a.abs() <= PI + eps)
        .map(|a| a.clamp(-PI, PI))
        .collect();
    if out.len() >= 2 {
        let first = out[0];
        let last = *out.last().unwrap();
        if (first + PI).abs() <= eps && (last - PI).abs() <= eps {
            out.pop();
        }
    }
    out
}

/// `Ψ(t, r₁, r₂, Δθ) = Σ [t² − r₁² − r₂² + 2r₁r₂ cos(Δθ + 2πρj)]_+^{-1/2}`
/// over the images with `|Δθ + 2πρj| ≤ π`.
pub fn psi(cone: &Cone, t: f64, r1: f64, r2: f64, dtheta: f64) -> Result<PsiEval> {
    check_kernel_args(t, r1, r2, dtheta)?;
    Ok(psi_unchecked(cone, t, r1, r2, dtheta))
}

fn psi_unchecked(cone: &Cone, t: f64, r1: f64, r2: f64, dtheta: f64) -> PsiEval {
    let tol = default_region_tolerance(t);
    let mut value = 0.0;
    let mut n_terms = 0;
    let mut on_light_cone = false;
    for a in image_angles(cone, dtheta) {
        let h = (0.5 * a).sin();
        let d = ((r1 - r2) * (r1 - r2) + 4.0 * r1 * r2 * h * h).sqrt();
        if (t - d).abs() <= tol {
            on_light_cone = true;
            n_terms += 1;
        } else if t > d {
            value += 1.0 / ((t - d) * (t + d)).sqrt();
            n_terms += 1;
        }
    }
    if on_light_cone {
        value = f64::INFINITY;
    }
    PsiEval {
        value,
        n_terms,
        on_light_cone,
    }
}

fn check_kernel_args(t: f64, r1: f64, r2: f64, dtheta: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid("t", format!("must be finite and positive, got {t}")));
    }
    for (name, r) in [("r1", r1), ("r2", r2)] {
        if !(r.is_finite() && r >= 0.0) {
            return Err(invalid(name, format!("must be finite and non-negative, got {r}")));
        }
    }
    if !dtheta.is_finite() {
        return Err(invalid("dtheta", "must be finite"));
    }
    Ok(())
}

/// Abbreviations entering the diffractive integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffractiveParams {
    pub alpha: f64,
    /// `arccosh α`, `NaN` when `α < 1`.
    pub beta: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl DiffractiveParams {
    pub fn new(cone: &Cone, t: f64, r1: f64, r2: f64, dtheta: f64) -> Self {
        let rho = cone.rho();
        let dth = cone.normalize_angle(dtheta);
        let am1 = alpha_minus_one(t, r1, r2);
        Self {
            alpha: 1.0 + am1,
            beta: if am1 >= 0.0 { beta_of(am1) } else { f64::NAN },
            phi1: (PI + dth) / rho,
            phi2: (PI - dth) / rho,
        }
    }
}

/// `α − 1 = (t − r₁ − r₂)(t + r₁ + r₂) / (2r₁r₂)` without cancellation.
fn alpha_minus_one(t: f64, r1: f64, r2: f64) -> f64 {
    (t - r1 - r2) * (t + r1 + r2) / (2.0 * r1 * r2)
}

/// `arccosh(1 + a)` accurate for small `a`.
fn beta_of(a: f64) -> f64 {
    (a + (a * (a + 2.0)).sqrt()).ln_1p()
}

/// `sin(πx)`, exactly zero at integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    if r == r.round() {
        return 0.0;
    }
    (PI * r).sin()
}

/// Result of a diffractive kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffractiveEval {
    pub value: f64,
    pub error_estimate: f64,
    pub warning: bool,
    pub singular_denominator: bool,
}

/// Diffractive integral for fixed `(t, r₁, r₂)`, evaluated for any `Δθ`.
///
/// The integrand is written in the cancellation-free form
///
/// ```text
/// sin φ₁/(c − cos φ₁) + sin φ₂/(c − cos φ₂)
///     = 2 sin(π/ρ) [2 sh² cos(Δθ/ρ) + 2 sin(φ₁/2) sin(φ₂/2)] / (D₁ D₂),
/// D_i = 2 sh² + 2 sin²(φ_i/2),  sh = sinh(s/2ρ),  c = cosh(s/ρ),
/// ```
///
/// and the endpoint singularity at `s = β` is removed by `s = β − u²`, under
/// which `(α − cosh s)^{-1/2} ds = 2 du / √(sinh(β − u²/2) · sinhc(u²/2))`.
#[derive(Debug, Clone, Copy)]
pub struct DiffractiveIntegral {
    rho: f64,
    beta: f64,
    prefactor: f64,
    sin_pi_over_rho: f64,
    active: bool,
}

impl DiffractiveIntegral {
    pub fn new(cone: &Cone, t: f64, r1: f64, r2: f64) -> Self {
        let rho = cone.rho();
        let active = r1 > 0.0 && r2 > 0.0 && t > r1 + r2;
        let (beta, prefactor) = if active {
            (
                beta_of(alpha_minus_one(t, r1, r2)),
                -1.0 / (4.0 * PI * PI * rho * (2.0 * r1 * r2).sqrt()),
            )
        } else {
            (0.0, 0.0)
        };
        Self {
            rho,
            beta,
            prefactor,
            sin_pi_over_rho: sin_pi(1.0 / rho),
            active,
        }
    }

    pub fn eval(&self, dtheta: f64, cfg: &AdaptiveConfig) -> DiffractiveEval {
        let zero = DiffractiveEval {
            value: 0.0,
            error_estimate: 0.0,
            warning: false,
            singular_denominator: false,
        };
        if !self.active || self.sin_pi_over_rho == 0.0 {
            return zero;
        }
        let rho = self.rho;
        let beta = self.beta;
        let cos_a = (dtheta / rho).cos();
        let h1 = (0.5 * (PI + dtheta) / rho).sin();
        let h2 = (0.5 * (PI - dtheta) / rho).sin();
        let p1 = 2.0 * h1 * h1;
        let p2 = 2.0 * h2 * h2;
        let cross = 2.0 * h1 * h2;
        let amp = 2.0 * self.sin_pi_over_rho;
        let mut min_den = f64::INFINITY;
        let integrand = |u: f64| {
            let v = u * u;
            let s = beta - v;
            let half_v = 0.5 * v;
            let shc = if half_v < 1e-4 {
                1.0 + half_v * half_v / 6.0
            } else {
                half_v.sinh() / half_v
            };
            let weight = 2.0 / ((beta - half_v).sinh() * shc).sqrt();
            let sh = (0.5 * s / rho).sinh();
            let sh2 = 2.0 * sh * sh;
            let d1 = sh2 + p1;
            let d2 = sh2 + p2;
            min_den = min_den.min(d1).min(d2);
            weight * amp * (sh2 * cos_a + cross) / (d1 * d2)
        };
        // Concentration near s = 0 when some φ_i is close to a multiple of 2π.
        let phi_mod = [(PI + dtheta) / rho, (PI - dtheta) / rho]
            .iter()
            .map(|p| (p - 2.0 * PI * (p / (2.0 * PI)).round()).abs())
            .fold(f64::INFINITY, f64::min);
        let ub = beta.sqrt();
        let mut breaks = Vec::new();
        let mut sc = (10.0 * rho * phi_mod).min(beta);
        for _ in 0..4 {
            if sc > 0.0 && sc < beta {
                breaks.push((beta - sc).sqrt());
            }
            sc *= 0.1;
        }
        let r = integrate_adaptive(integrand, 0.0, ub, &breaks, cfg);
        let value = self.prefactor * r.value;
        let error_estimate = (self.prefactor * r.error).abs();
        DiffractiveEval {
            value,
            error_estimate,
            warning: !r.converged || error_estimate > KERNEL_WARNING * value.abs().max(1e-300),
            singular_denominator: min_den < SINGULAR_DENOMINATOR,
        }
    }
}

/// Default tolerances for diffractive kernel point evaluations.
pub fn diffractive_config() -> AdaptiveConfig {
    AdaptiveConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_evals: 50_000,
        order: 10,
    }
}

/// `K^diff(t; r₁, r₂, Δθ)`; zero unless `t > r₁ + r₂`.
pub fn diffractive_kernel(cone: &Cone, t: f64, r1: f64, r2: f64, dtheta: f64) -> Result<DiffractiveEval> {
    check_kernel_args(t, r1, r2, dtheta)?;
    Ok(DiffractiveIntegral::new(cone, t, r1, r2).eval(cone.normalize_angle(dtheta), &diffractive_config()))
}

/// Flags raised while evaluating the kernel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelFlags {
    pub on_light_cone: bool,
    pub accuracy_warning: bool,
    pub singular_denominator: bool,
}

impl KernelFlags {
    /// Compact text form used in CSV output.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.on_light_cone {
            parts.push("light_cone");
        }
        if self.accuracy_warning {
            parts.push("accuracy");
        }
        if self.singular_denominator {
            parts.push("singular_denominator");
        }
        if parts.is_empty() {
            "ok".to_string()
        } else {
            parts.join("|")
        }
    }
}

/// Sine-propagator kernel value at one spacetime point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    /// `Ψ / 2π`.
    pub geometric: f64,
    pub diffractive: f64,
    pub total: f64,
    pub region: Region,
    pub n_geom_terms: usize,
    pub flags: KernelFlags,
}

/// `K_U(t)(p₁, p₂) = K^geom + K^diff`.
pub fn sine_kernel(cone: &Cone, t: f64, p1: ConePoint, p2: ConePoint) -> Result<KernelEval> {
    let dtheta = cone.normalize_angle(p1.theta - p2.theta);
    check_kernel_args(t, p1.r, p2.r, dtheta)?;
    let tol = default_region_tolerance(t);
    let d = cone.distance(p1, p2);
    let tag = classify_with_distance(t, d, p1.r + p2.r, tol);
    let region = Region { tag, tol };
    if tag == crate::cone::RegionTag::I {
        return Ok(KernelEval {
            geometric: 0.0,
            diffractive: 0.0,
            total: 0.0,
            region,
            n_geom_terms: 0,
            flags: KernelFlags::default(),
        });
    }
    let ps = psi_unchecked(cone, t, p1.r, p2.r, dtheta);
    let geometric = ps.value / (2.0 * PI);
    let diff = DiffractiveIntegral::new(cone, t, p1.r, p2.r).eval(dtheta, &diffractive_config());
    Ok(KernelEval {
        geometric,
        diffractive: diff.value,
        total: geometric + diff.value,
        region,
        n_geom_terms: ps.n_terms,
        flags: KernelFlags {
            on_light_cone: ps.on_light_cone,
            accuracy_warning: diff.warning,
            singular_denominator: diff.singular_denominator,
        },
    })
}

/// Real-valued data on the cone, evaluated at `(r, θ)`. Callers pass any
/// real `θ`, so implementations must be `2πρ`-periodic in it.
pub trait ConeFunction: Sync {
    fn value(&self, r: f64, theta: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64 + Sync> ConeFunction for F {
    fn value(&self, r: f64, theta: f64) -> f64 {
        self(r, theta)
    }
}

/// Tolerances for [`apply_sine_propagator`].
#[derive(Debug, Clone, Copy)]
pub struct PropagatorConfig {
    /// The data vanish for `r > support_radius`.
    pub support_radius: f64,
    pub rel_tol: f64,
    /// Absolute tolerance, in units of the data's magnitude.
    pub abs_tol: f64,
    /// Cap on integrand evaluations (data samples plus kernel nodes).
    pub max_evals: usize,
}

impl PropagatorConfig {
    pub fn new(support_radius: f64) -> Self {
        Self {
            support_radius,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_evals: 200_000_000,
        }
    }
}

/// Result of [`apply_sine_propagator`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorValue {
    pub value: f64,
    pub geometric: f64,
    pub diffractive: f64,
    pub error_estimate: f64,
    pub evals: usize,
    pub warning: bool,
}

/// `(U(t)g)(target) = ∫ K_U(t)(target; y) g(y) dy` by quadrature.
///
/// The geometric part is integrated in the unfolded plane around the
/// target: with `y = x + σe^{iω}` and `σ = t sin φ`,
///
/// ```text
/// ∫ K^geom g = (t/2π) ∫₀^{π/2} sin φ ∫_{−π}^{π} G(x + σ e^{iω}) dω dφ,
/// ```
///
/// which absorbs the inverse-square-root light-cone singularity into the
/// Jacobian; `G` is `g` lifted to the plane slit along the ray opposite the
/// target, whose jump lands on `ω = ±π`. The diffractive part is integrated
/// over `r₂ = (t − r₁) − v²`, removing the `[t² − (r₁+r₂)²]^{-1/2}` edge
/// singularity, with angular breaks where `K^diff` jumps.
pub fn apply_sine_propagator<G: ConeFunction + ?Sized>(
    cone: &Cone,
    t: f64,
    g: &G,
    target: ConePoint,
    cfg: &PropagatorConfig,
) -> Result<PropagatorValue> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid("t", format!("must be finite and positive, got {t}")));
    }
    if !(cfg.support_radius > 0.0 && cfg.support_radius.is_finite()) {
        return Err(invalid("support_radius", "must be finite and positive"));
    }
    let geo = geometric_part(t, g, target, cfg);
    let dif = diffractive_part(cone, t, g, target, cfg);
    let evals = geo.evals + dif.evals;
    let error_estimate = geo.error + dif.error;
    let value = geo.value + dif.value;
    if evals > cfg.max_evals || !(geo.converged && dif.converged) {
        return Err(ConeError::RefinementBudget {
            evaluations: evals,
            estimate: error_estimate,
        });
    }
    Ok(PropagatorValue {
        value,
        geometric: geo.value,
        diffractive: dif.value,
        error_estimate,
        evals,
        warning: error_estimate > KERNEL_WARNING * value.abs().max(cfg.abs_tol),
    })
}

struct Part {
    value: f64,
    error: f64,
    evals: usize,
    converged: bool,
}

fn inner_cfg(cfg: &PropagatorConfig, order: usize) -> AdaptiveConfig {
    AdaptiveConfig {
        abs_tol: cfg.abs_tol * 1e-2,
        rel_tol: cfg.rel_tol * 1e-2,
        max_evals: 200_000,
        order,
    }
}

fn geometric_part<G: ConeFunction + ?Sized>(t: f64, g: &G, x: ConePoint, cfg: &PropagatorConfig) -> Part {
    let r1 = x.r;
    let big_r = cfg.support_radius;
    // Only circles σ ∈ [r1 − R, r1 + R] meet the support.
    let s_lo = (r1 - big_r).max(0.0);
    let s_hi = (r1 + big_r).min(t);
    if s_lo >= s_hi {
        return Part {
            value: 0.0,
            error: 0.0,
            evals: 0,
            converged: true,
        };
    }
    let phi_lo = (s_lo / t).min(1.0).asin();
    let phi_hi = (s_hi / t).min(1.0).asin();
    let mut breaks = Vec::new();
    if r1 > s_lo && r1 < s_hi {
        breaks.push((r1 / t).asin());
    }
    let mut evals = 0usize;
    let mut inner_ok = true;
    let mut inner_err = 0.0;
    let icfg = inner_cfg(cfg, 10);
    let outer = integrate_adaptive(
        |phi| {
            let sigma = t * phi.sin();
            // Angular range of the circle inside the support disk.
            let w0 = if r1 == 0.0 || sigma == 0.0 {
                0.0
            } else {
                let c = (big_r * big_r - r1 * r1 - sigma * sigma) / (2.0 * r1 * sigma);
                if c >= 1.0 {
                    0.0
                } else if c <= -1.0 {
                    return 0.0;
                } else {
                    c.acos()
                }
            };
            let lifted = |w: f64| {
                let px = r1 + sigma * w.cos();
                let py = sigma * w.sin();
                let r = px.hypot(py);
                if r > big_r {
                    0.0
                } else {
                    g.value(r, x.theta + py.atan2(px))
                }
            };
            let upper = integrate_adaptive(lifted, w0, PI, &[], &icfg);
            let lower = integrate_adaptive(lifted, -PI, -w0, &[], &icfg);
            evals += upper.evals + lower.evals;
            inner_ok &= upper.converged && lower.converged;
            inner_err += upper.error + lower.error;
            phi.sin() * (upper.value + lower.value)
        },
        phi_lo,
        phi_hi,
        &breaks,
        &inner_cfg(cfg, 10).with_rel(cfg.rel_tol, cfg.abs_tol),
    );
    let scale = t / (2.0 * PI);
    Part {
        value: scale * outer.value,
        error: scale * outer.error,
        evals: evals + outer.evals,
        converged: outer.converged && inner_ok,
    }
}

fn diffractive_part<G: ConeFunction + ?Sized>(
    cone: &Cone,
    t: f64,
    g: &G,
    x: ConePoint,
    cfg: &PropagatorConfig,
) -> Part {
    let r1 = x.r;
    let none = Part {
        value: 0.0,
        error: 0.0,
        evals: 0,
        converged: true,
    };
    if r1 <= 0.0 || t <= r1 || sin_pi(1.0 / cone.rho()) == 0.0 {
        return none;
    }
    let span = t - r1;
    let big_r = cfg.support_radius;
    let v_lo = if span > big_r { (span - big_r).sqrt() } else { 0.0 };
    let v_hi = span.sqrt();
    let rho = cone.rho();
    let half = PI * rho;
    // Jumps of K^diff in Δθ sit at Δθ ≡ ±π (mod 2πρ).
    let p = cone.period();
    let mut jumps = Vec::new();
    for base in [-PI, PI] {
        let k_lo = ((-half - base) / p).ceil() as i64;
        let k_hi = ((half - base) / p).floor() as i64;
        for k in k_lo..=k_hi {
            let d = base + p * k as f64;
            if d > -half && d < half {
                jumps.push(d);
            }
        }
    }
    let kcfg = AdaptiveConfig {
        abs_tol: 1e-16,
        rel_tol: cfg.rel_tol * 1e-2,
        max_evals: 50_000,
        order: 10,
    };
    let icfg = inner_cfg(cfg, 10);
    let mut evals = 0usize;
    let mut ok = true;
    let outer = integrate_adaptive(
        |v| {
            let r2 = span - v * v;
            if r2 <= 0.0 {
                return 0.0;
            }
            let kern = DiffractiveIntegral::new(cone, t, r1, r2);
            let inner = integrate_adaptive(
                |dth| {
                    let gv = g.value(r2, x.theta + dth);
                    if gv == 0.0 {
                        return 0.0;
                    }
                    let k = kern.eval(dth, &kcfg);
                    ok &= !k.warning;
                    gv * k.value
                },
                -half,
                half,
                &jumps,
                &icfg,
            );
            evals += inner.evals;
            ok &= inner.converged;
            2.0 * v * r2 * inner.value
        },
        v_lo,
        v_hi,
        &[],
        &inner_cfg(cfg, 10).with_rel(cfg.rel_tol, cfg.abs_tol),
    );
    Part {
        value: outer.value,
        error: outer.error,
        evals: evals + outer.evals,
        converged: outer.converged && ok,
    }
}

impl AdaptiveConfig {
    fn with_rel(mut self, rel: f64, abs: f64) -> Self {
        self.rel_tol = rel;
        self.abs_tol = abs;
        self
    }
}
