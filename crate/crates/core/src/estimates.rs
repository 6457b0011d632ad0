//! Numerical checks of the dispersive, Strichartz, Hilbert-transform and
//! Morawetz estimates for the wave equation on a cone.
//!
//! Every check works on [`SpectralField`] data and the Fourier–Bessel
//! solver; physical-space norms come from tensor quadrature or dense
//! sampling of the synthesized solution.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::bessel::BesselBank;
use crate::cone::Cone;
use crate::error::{invalid, ConeError, Result};
use crate::hankel::RadialGrid;
use crate::lp::{beta0, SUPPORT_HI, SUPPORT_LO};
use crate::quadrature::composite_gauss;
use crate::spectral::{sinc_t, synthesize, BesselTable, SpectralField};

/// Exponents `(p, q, γ)` of a Strichartz estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleTriple {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
}

impl AdmissibleTriple {
    /// Validates scaling `1/p + 2/q = 1 − γ`, admissibility
    /// `1/p + 1/(2q) ≤ 1/4` and excludes the endpoint `(4, ∞, 3/4)`.
    pub fn new(p: f64, q: f64, gamma: f64) -> Result<Self> {
        let t = Self::unchecked(p, q, gamma)?;
        if t.admissibility_excess() > 1e-12 {
            return Err(invalid(
                "triple",
                format!("1/p + 1/(2q) = {} exceeds 1/4", 1.0 / p + 0.5 / q),
            ));
        }
        if p == 4.0 && q.is_infinite() {
            return Err(invalid("triple", "the endpoint (4, ∞, 3/4) is excluded"));
        }
        Ok(t)
    }

    /// Only the scaling relation is enforced; used for contrast checks with
    /// non-admissible exponents.
    pub fn unchecked(p: f64, q: f64, gamma: f64) -> Result<Self> {
        if !(p >= 2.0 && q >= 2.0 && gamma >= 0.0) {
            return Err(invalid("triple", format!("need p, q ≥ 2 and γ ≥ 0, got ({p}, {q}, {gamma})")));
        }
        if (1.0 / p + 2.0 / q - (1.0 - gamma)).abs() > 1e-12 {
            return Err(invalid("triple", format!("1/p + 2/q ≠ 1 − γ for ({p}, {q}, {gamma})")));
        }
        Ok(Self { p, q, gamma })
    }

    /// The `γ` forced by scaling for given `p, q`.
    pub fn scaling_gamma(p: f64, q: f64) -> f64 {
        1.0 - 1.0 / p - 2.0 / q
    }

    /// `1/p + 1/(2q) − 1/4`, positive for non-admissible triples.
    pub fn admissibility_excess(&self) -> f64 {
        1.0 / self.p + 0.5 / self.q - 0.25
    }
}

/// Least-squares fit of `log y = c + slope · log t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
    pub slope: f64,
    /// 95% confidence band for the slope.
    pub slope_ci: (f64, f64),
}

impl DecayFit {
    pub fn new(times: Vec<f64>, sup_norms: Vec<f64>) -> Result<Self> {
        let n = times.len();
        if n < 3 || sup_norms.len() != n {
            return Err(invalid("times", "need at least three (t, value) pairs"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times[0] <= 0.0 {
            return Err(invalid("times", "must be positive and strictly increasing"));
        }
        if sup_norms.iter().any(|v| !(*v > 0.0)) {
            return Err(invalid("sup_norms", "must be positive"));
        }
        let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
        let y: Vec<f64> = sup_norms.iter().map(|v| v.ln()).collect();
        let nf = n as f64;
        let mx = x.iter().sum::<f64>() / nf;
        let my = y.iter().sum::<f64>() / nf;
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let slope = sxy / sxx;
        let icpt = my - slope * mx;
        let sse: f64 = x.iter().zip(&y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
        let se = (sse / (nf - 2.0) / sxx).sqrt();
        let tq = StudentsT::new(0.0, 1.0, nf - 2.0)
            .map_err(|e| invalid("times", e.to_string()))?
            .inverse_cdf(0.975);
        Ok(Self {
            times,
            sup_norms,
            slope,
            slope_ci: (slope - tq * se, slope + tq * se),
        })
    }
}

/// Smoothed point mass `e^{−sΔ} δ_{(r₀, θ₀)}`. Its coefficients are
/// `φ̄_j(θ₀) J_{ν_j}(λ r₀) e^{−sλ²}` and its `L¹` norm is exactly 1, since
/// the heat flow on the cone conserves mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSource {
    pub r0: f64,
    pub theta0: f64,
    pub smoothing: f64,
}

impl PointSource {
    pub fn field(&self, cone: Cone, lambda: RadialGrid, j_max: usize) -> SpectralField {
        let orders: Vec<f64> = (0..=j_max as i64).map(|j| cone.mode_order(j)).collect();
        let bank = BesselBank::new(&orders);
        let mut scratch = Vec::new();
        let mut jtab = vec![0.0; j_max + 1];
        let mut field = SpectralField::zeros(cone, lambda.clone(), j_max);
        let jm = j_max as i64;
        let phases: Vec<Complex64> = (-jm..=jm).map(|j| cone.eigenfunction(j, self.theta0).conj()).collect();
        for (k, &l) in lambda.nodes().iter().enumerate() {
            bank.eval(l * self.r0, &mut jtab, &mut scratch);
            let damp = (-self.smoothing * l * l).exp();
            for j in -jm..=jm {
                field.coeff_mut(j)[k] = phases[(j + jm) as usize] * jtab[j.unsigned_abs() as usize] * damp;
            }
        }
        field
    }

    /// Angular truncation beyond which `J_ν(λ r₀)` is below `10⁻¹⁷` for
    /// every `λ ≤ lambda_max`.
    pub fn j_max(&self, cone: &Cone, lambda_max: f64) -> usize {
        let nu = 0.5 * std::f64::consts::E * lambda_max * self.r0 + 30.0;
        (nu * cone.rho()).ceil() as usize
    }
}

/// Frequency grid on the support of `β₀`, fine enough to resolve
/// `sin(tλ) J_ν(λr)` for `t + r ≤ phase_max`.
pub fn band_grid(phase_max: f64, order: usize) -> Result<RadialGrid> {
    let span = SUPPORT_HI - SUPPORT_LO;
    let panels = (phase_max * span / (2.0 * PI)).ceil() as usize + 4;
    let breaks: Vec<f64> = (0..=panels)
        .map(|i| SUPPORT_LO + span * i as f64 / panels as f64)
        .collect();
    RadialGrid::gauss(&breaks, order)
}

/// Sampling parameters for [`dispersive_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveConfig {
    /// Radius of the source; fronts sit at `r = |t − r₀|` and `t + r₀`.
    pub r0: f64,
    /// `‖g‖_{L¹}` of the data.
    pub l1_norm: f64,
    /// Half width of the refined band around the fronts.
    pub band: f64,
    pub fine_step: f64,
    pub coarse_step: f64,
    /// Angular samples per period; `None` uses `16(2 j_max + 1)`.
    pub n_angles: Option<usize>,
    /// Times entering the log-log fit.
    pub fit_range: (f64, f64),
}

impl DispersiveConfig {
    pub fn new(r0: f64) -> Self {
        Self {
            r0,
            l1_norm: 1.0,
            band: 6.0,
            fine_step: 0.02,
            coarse_step: 0.1,
            n_angles: None,
            fit_range: (5.0, 50.0),
        }
    }
}

/// Sup-norm sample at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveSample {
    pub t: f64,
    /// `‖β(√Δ) U(t) g‖_{L^∞} / ‖g‖_{L¹}`.
    pub sup: f64,
    pub r_at_max: f64,
    pub theta_at_max: f64,
    /// The maximum sits on the edge of the sampled region.
    pub boundary_max: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveScan {
    pub samples: Vec<DispersiveSample>,
    pub fit: DecayFit,
    pub warning: bool,
}

/// Scans `‖β(√Δ)U(t)g‖_{L^∞}` over `times` and fits its decay exponent on
/// `cfg.fit_range`. The maximum is taken over a polar grid that is refined
/// in a band around both fronts.
pub fn dispersive_scan(g: &SpectralField, times: &[f64], cfg: &DispersiveConfig) -> Result<DispersiveScan> {
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) {
        return Err(invalid("times", "need positive times"));
    }
    if !(cfg.l1_norm > 0.0) {
        return Err(invalid("l1_norm", "must be positive"));
    }
    let cone = *g.cone();
    let j_max = g.j_max();
    let lambda = g.lambda_grid();
    let jm = j_max as i64;
    let n_angles = cfg.n_angles.unwrap_or(16 * (2 * j_max + 1));
    let (thetas, _) = cone.angular_grid(n_angles);
    let orders: Vec<f64> = (0..=jm).map(|j| cone.mode_order(j)).collect();
    let bank = BesselBank::new(&orders);
    let localized: Vec<Vec<Complex64>> = (-jm..=jm)
        .map(|j| {
            g.coeff(j)
                .iter()
                .zip(lambda.nodes())
                .zip(lambda.weights())
                .map(|((c, &l), w)| c * beta0(l) * *w)
                .collect()
        })
        .collect();
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        let radii = scan_radii(t, cfg);
        let sinc: Vec<f64> = lambda.nodes().iter().map(|&l| sinc_t(t, l)).collect();
        let coeffs: Vec<Vec<Complex64>> = localized
            .iter()
            .map(|row| row.iter().zip(&sinc).map(|(c, s)| c * s).collect())
            .collect();
        // Per radius: (max |u|, θ index) over the angular grid.
        let best: Vec<(f64, usize)> = radii
            .par_iter()
            .map_init(
                || (vec![0.0; j_max + 1], Vec::new()),
                |(jtab, scratch), &r| {
                    let mut prof = vec![Complex64::new(0.0, 0.0); 2 * j_max + 1];
                    for (k, &l) in lambda.nodes().iter().enumerate() {
                        bank.eval(l * r, jtab, scratch);
                        for (idx, p) in prof.iter_mut().enumerate() {
                            let a = (idx as i64 - jm).unsigned_abs() as usize;
                            *p += coeffs[idx][k] * jtab[a];
                        }
                    }
                    let prof: Vec<Vec<Complex64>> = prof.into_iter().map(|c| vec![c]).collect();
                    let vals = synthesize(&cone, j_max, &prof, 1, &thetas);
                    vals.iter()
                        .enumerate()
                        .fold((0.0, 0), |acc, (m, v)| if v.norm() > acc.0 { (v.norm(), m) } else { acc })
                },
            )
            .collect();
        let (i_max, &(sup, m_max)) = best
            .iter()
            .enumerate()
            .fold((0, &best[0]), |acc, (i, b)| if b.0 > acc.1 .0 { (i, b) } else { acc });
        let boundary_max = i_max + 1 == radii.len() || (i_max == 0 && radii[0] > 0.0);
        samples.push(DispersiveSample {
            t,
            sup: sup / cfg.l1_norm,
            r_at_max: radii[i_max],
            theta_at_max: thetas[m_max],
            boundary_max,
        });
    }
    let (lo, hi) = cfg.fit_range;
    let (ft, fv): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|s| s.t >= lo && s.t <= hi)
        .map(|s| (s.t, s.sup))
        .unzip();
    let fit = DecayFit::new(ft, fv)?;
    let warning = samples.iter().any(|s| s.boundary_max);
    Ok(DispersiveScan { samples, fit, warning })
}

fn scan_radii(t: f64, cfg: &DispersiveConfig) -> Vec<f64> {
    let outer = t + cfg.r0 + cfg.band;
    let band_lo = ((t - cfg.r0).abs() - cfg.band).max(0.0);
    let mut radii = Vec::new();
    let mut r = cfg.coarse_step;
    while r < band_lo {
        radii.push(r);
        r += cfg.coarse_step;
    }
    let n = ((outer - band_lo) / cfg.fine_step).ceil() as usize;
    for i in 0..=n {
        let r = band_lo + (outer - band_lo) * i as f64 / n as f64;
        if r > 0.0 {
            radii.push(r);
        }
    }
    radii
}

/// Space-time quadrature grid for Strichartz norms.
#[derive(Debug, Clone)]
pub struct SpaceTimeGrid {
    pub radial: RadialGrid,
    pub n_theta: usize,
    /// Gauss nodes and weights on `[0, T]`.
    pub times: Vec<f64>,
    pub time_weights: Vec<f64>,
}

impl SpaceTimeGrid {
    /// Composite Gauss grids with panels no longer than `r_panel` in space
    /// and `t_panel` in time.
    pub fn new(r_max: f64, r_panel: f64, n_theta: usize, t_max: f64, t_panel: f64, order: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_panel > 0.0 && r_panel > 0.0) || n_theta == 0 {
            return Err(invalid("grid", "sizes must be positive"));
        }
        let radial = RadialGrid::gauss_uniform(r_max, (r_max / r_panel).ceil() as usize, order)?;
        let nt = (t_max / t_panel).ceil() as usize;
        let breaks: Vec<f64> = (0..=nt).map(|i| t_max * i as f64 / nt as f64).collect();
        let (times, time_weights) = composite_gauss(&breaks, order);
        Ok(Self {
            radial,
            n_theta,
            times,
            time_weights,
        })
    }
}

/// Both sides of a Strichartz estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzValue {
    /// `‖u‖_{L^p([0,T]; L^q)}`.
    pub lhs: f64,
    /// `‖f‖_{Ḣ^γ} + ‖g‖_{Ḣ^{γ−1}}`.
    pub rhs: f64,
    pub ratio: f64,
}

/// `‖u‖_{L^p([0,T];L^q)} / (‖f‖_{Ḣ^γ} + ‖g‖_{Ḣ^{γ−1}})` by tensor
/// quadrature of the spectral solution over `grid`.
pub fn strichartz_ratio(
    triple: &AdmissibleTriple,
    f: &SpectralField,
    g: &SpectralField,
    grid: &SpaceTimeGrid,
) -> Result<StrichartzValue> {
    if !triple.q.is_finite() || !triple.p.is_finite() {
        return Err(invalid("triple", "p and q must be finite for tensor quadrature"));
    }
    let rhs = f.sobolev_norm(triple.gamma, true)? + g.sobolev_norm(triple.gamma - 1.0, true)?;
    if rhs == 0.0 {
        return Err(invalid("data", "zero data has no Strichartz ratio"));
    }
    let lhs = space_time_norm(triple.p, triple.q, f, g, grid)?;
    Ok(StrichartzValue {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// `‖u‖_{L^p([0,T]; L^q)}` for the solution with data `(f, g)`.
pub fn space_time_norm(p: f64, q: f64, f: &SpectralField, g: &SpectralField, grid: &SpaceTimeGrid) -> Result<f64> {
    let cone = *f.cone();
    let radii = grid.radial.nodes();
    let table = BesselTable::new(&cone, f.j_max(), radii, f.lambda_grid().nodes());
    let (thetas, dtheta) = cone.angular_grid(grid.n_theta);
    let lq: Vec<f64> = grid
        .times
        .iter()
        .map(|&t| {
            let (u, _) = SpectralField::wave_solve(f, g, t)?;
            let prof = table.profiles(&u);
            let vals = synthesize(&cone, f.j_max(), &prof, radii.len(), &thetas);
            let n = thetas.len();
            let s: f64 = grid
                .radial
                .weights()
                .iter()
                .enumerate()
                .map(|(i, w)| w * vals[i * n..(i + 1) * n].iter().map(|v| v.norm().powf(q)).sum::<f64>())
                .sum();
            Ok((s * dtheta).powf(1.0 / q))
        })
        .collect::<Result<_>>()?;
    let total: f64 = lq.iter().zip(&grid.time_weights).map(|(v, w)| w * v.powf(p)).sum();
    Ok(total.powf(1.0 / p))
}

/// Options for [`hilbert_time_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HilbertConfig {
    /// Fraction of the record tapered at each end; 0 treats the samples as
    /// one period of a periodic signal (no leakage check).
    pub taper: f64,
    /// Zero padding factor (total length = `pad · n`), used with a taper.
    pub pad: usize,
}

impl HilbertConfig {
    /// Exact multiplier for signals periodic on the sampled window.
    pub fn periodic() -> Self {
        Self { taper: 0.0, pad: 1 }
    }

    pub fn windowed(taper: f64) -> Self {
        Self { taper, pad: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HilbertOutput {
    pub values: Vec<f64>,
    /// Share of the windowed signal's energy in the outer 2% of samples at
    /// each end.
    pub boundary_fraction: f64,
    pub leakage_warning: bool,
}

/// Taper equal to 1 in the interior and rising from 0 over a fraction
/// `taper` of the record at each end along an error-function profile with
/// width 1/16 of the edge, so the window's spectrum decays like a Gaussian.
pub fn taper_window(n: usize, taper: f64) -> Vec<f64> {
    let edge = taper * (n.saturating_sub(1)) as f64;
    let sigma = edge / 16.0;
    (0..n)
        .map(|i| {
            if edge <= 0.0 {
                return 1.0;
            }
            let x = i as f64;
            let d = x.min((n - 1) as f64 - x);
            if d >= edge {
                1.0
            } else {
                0.5 * erfc((0.5 * edge - d) / (sigma * SQRT_2))
            }
        })
        .collect()
}

/// Applies the time-frequency multiplier `−i sgn(τ)` to uniformly spaced
/// samples, i.e. `(Tv)(t) = (1/π) PV ∫ v(s)/(t − s) ds` for band-limited
/// `v`. With a taper, the samples are multiplied by [`taper_window`] and
/// zero padded before the transform; the result is meaningful where the
/// window equals 1.
pub fn hilbert_time_transform(v: &[f64], cfg: &HilbertConfig) -> Result<HilbertOutput> {
    let n = v.len();
    if n < 4 {
        return Err(invalid("v", "need at least four samples"));
    }
    if !(0.0..0.5).contains(&cfg.taper) || cfg.pad == 0 {
        return Err(invalid("taper", "taper must lie in [0, 0.5) and pad be positive"));
    }
    let w = taper_window(n, cfg.taper);
    let windowed: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a * b).collect();
    let total: f64 = windowed.iter().map(|x| x * x).sum();
    let ends = (n / 50).max(1);
    let edge: f64 = windowed[..ends]
        .iter()
        .chain(&windowed[n - ends..])
        .map(|x| x * x)
        .sum();
    let boundary_fraction = if total > 0.0 { edge / total } else { 0.0 };
    let m = if cfg.taper > 0.0 { n * cfg.pad } else { n };
    let mut buf: Vec<Complex64> = windowed.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(m, Complex64::new(0.0, 0.0));
    let mut planner = FftPlanner::<f64>::new();
    let fwd: Arc<dyn Fft<f64>> = planner.plan_fft_forward(m);
    let inv: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(m);
    fwd.process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let s = if k == 0 || 2 * k == m {
            0.0
        } else if 2 * k < m {
            1.0
        } else {
            -1.0
        };
        *c *= Complex64::new(0.0, -s);
    }
    inv.process(&mut buf);
    let scale = 1.0 / m as f64;
    Ok(HilbertOutput {
        values: buf[..n].iter().map(|c| c.re * scale).collect(),
        boundary_fraction,
        leakage_warning: cfg.taper > 0.0 && boundary_fraction > 1e-6,
    })
}

/// Result of [`cosine_via_hilbert_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertCheck {
    /// `max |w + Tv| / max |w|` over the compared samples.
    pub deviation: f64,
    pub max_w: f64,
    pub leakage_warning: bool,
}

/// Compares `w = β(√Δ) cos(t√Δ) f` with `−T v`, `v = β(√Δ) U(t) √Δ f`, at
/// the given points over the uniform time grid `times`. With a taper only
/// samples where the window equals 1 are compared.
pub fn cosine_via_hilbert_check(
    f: &SpectralField,
    points: &[(f64, f64)],
    times: &[f64],
    cfg: &HilbertConfig,
) -> Result<HilbertCheck> {
    if times.len() < 4 {
        return Err(invalid("times", "need at least four times"));
    }
    let cone = *f.cone();
    let loc = f.apply_multiplier(|l2| beta0(l2.sqrt()));
    if loc.l2_norm() == 0.0 {
        return Ok(HilbertCheck {
            deviation: 0.0,
            max_w: 0.0,
            leakage_warning: false,
        });
    }
    let radii: Vec<f64> = points.iter().map(|p| p.0).collect();
    let table = BesselTable::new(&cone, f.j_max(), &radii, f.lambda_grid().nodes());
    let phis: Vec<Vec<Complex64>> = points
        .iter()
        .map(|&(_, th)| (-(f.j_max() as i64)..=f.j_max() as i64).map(|j| cone.eigenfunction(j, th)).collect())
        .collect();
    let eval = |field: &SpectralField| -> Vec<f64> {
        let prof = table.profiles(field);
        (0..points.len())
            .map(|i| prof.iter().zip(&phis[i]).map(|(p, ph)| p[i] * ph).sum::<Complex64>().re)
            .collect()
    };
    // Rows: time; columns: points.
    let (w_rows, v_rows): (Vec<Vec<f64>>, Vec<Vec<f64>>) = times
        .par_iter()
        .map(|&t| {
            let w = loc.apply_multiplier(|l2| (t * l2.sqrt()).cos());
            let v = loc.apply_multiplier(|l2| (t * l2.sqrt()).sin());
            (eval(&w), eval(&v))
        })
        .unzip();
    let window = taper_window(times.len(), cfg.taper);
    let mut max_w: f64 = 0.0;
    let mut max_dev: f64 = 0.0;
    let mut leak = false;
    for i in 0..points.len() {
        let series: Vec<f64> = v_rows.iter().map(|row| row[i]).collect();
        let tv = hilbert_time_transform(&series, cfg)?;
        leak |= tv.leakage_warning;
        for (k, row) in w_rows.iter().enumerate() {
            if window[k] < 1.0 {
                continue;
            }
            max_w = max_w.max(row[i].abs());
            max_dev = max_dev.max((row[i] + tv.values[k]).abs());
        }
    }
    Ok(HilbertCheck {
        deviation: if max_w > 0.0 { max_dev / max_w } else { 0.0 },
        max_w,
        leakage_warning: leak,
    })
}

/// Parameters of the per-harmonic Morawetz estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorawetzConfig {
    /// Lowest retained harmonic.
    pub m: u32,
    pub alpha: f64,
    pub t_max: f64,
}

impl MorawetzConfig {
    /// Checks `m ≥ 1`, `0 < α < 1/4 + ν_m/2`, `T > 0`.
    pub fn new(cone: &Cone, m: u32, alpha: f64, t_max: f64) -> Result<Self> {
        let cfg = Self { m, alpha, t_max };
        if m == 0 {
            return Err(invalid("m", "must be at least 1"));
        }
        if !(alpha > 0.0 && alpha < cfg.alpha_bound(cone)) {
            return Err(invalid(
                "alpha",
                format!("need 0 < α < {} for m = {m}, got {alpha}", cfg.alpha_bound(cone)),
            ));
        }
        if !(t_max > 0.0) {
            return Err(invalid("t_max", "must be positive"));
        }
        Ok(cfg)
    }

    pub fn alpha_bound(&self, cone: &Cone) -> f64 {
        0.25 + 0.5 * cone.mode_order(self.m as i64)
    }
}

/// `∫₀^∞ J_ν(x)² x^{−s} dx` for `0 < s < 2ν + 1` (Weber–Schafheitlin).
pub fn bessel_square_moment(nu: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 2.0 * nu + 1.0) {
        return Err(invalid("s", format!("moment diverges for ν = {nu}, s = {s}")));
    }
    let ln = ln_gamma(s) + ln_gamma(nu + 0.5 * (1.0 - s))
        - s * 2f64.ln()
        - 2.0 * ln_gamma(0.5 * (1.0 + s))
        - ln_gamma(nu + 0.5 * (1.0 + s));
    Ok(ln.exp())
}

/// Quadrature grids for [`morawetz_ratio`].
#[derive(Debug, Clone)]
pub struct MorawetzGrid {
    /// Radial nodes and plain `dr` weights.
    pub radii: Vec<f64>,
    pub radial_weights: Vec<f64>,
    /// Gauss nodes and weights on `[−T, T]`.
    pub times: Vec<f64>,
    pub time_weights: Vec<f64>,
}

impl MorawetzGrid {
    /// Panels of length `panel` on `[0, r_max]` (graded towards the tip)
    /// and on `[−T, T]`.
    pub fn new(r_max: f64, t_max: f64, panel: f64, order: usize) -> Self {
        let mut breaks = vec![0.0, 1e-3, 1e-2, 1e-1];
        let n = (r_max / panel).ceil() as usize;
        breaks.extend((1..=n).map(|i| r_max * i as f64 / n as f64).filter(|&b| b > 0.1));
        let (radii, radial_weights) = composite_gauss(&breaks, order);
        let nt = (2.0 * t_max / panel).ceil() as usize;
        let tb: Vec<f64> = (0..=nt).map(|i| -t_max + 2.0 * t_max * i as f64 / nt as f64).collect();
        let (times, time_weights) = composite_gauss(&tb, order);
        Self {
            radii,
            radial_weights,
            times,
            time_weights,
        }
    }
}

/// Result of [`morawetz_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorawetzValue {
    /// Direct quadrature of the left side over `|t| ≤ T`.
    pub lhs: f64,
    /// `‖f‖_{Ḣ^{1/2}} + ‖g‖_{Ḣ^{−1/2}}`.
    pub rhs: f64,
    pub ratio: f64,
    /// Left side over all times from the frequency-side identity.
    pub lhs_full: f64,
    /// `lhs_full² − lhs²`, the squared contribution of `|t| > T`.
    pub tail: f64,
}

/// `‖Ω^{−1/2−2α} Δ^{1/4−α} u‖_{L²([−T,T]×C)} / (‖f‖_{Ḣ^{1/2}} + ‖g‖_{Ḣ^{−1/2}})`.
///
/// The left side is evaluated per harmonic by quadrature in `(t, r)`. The
/// untruncated value follows from Plancherel in time and
/// `∫ J_ν(λr)² r^{−4α} dr = λ^{4α−1} M(ν, 4α)`:
/// `LHS² = π Σ_j M(ν_j, 4α) (‖f_j‖²_{Ḣ^{1/2}} + ‖g_j‖²_{Ḣ^{−1/2}})`.
pub fn morawetz_ratio(
    cfg: &MorawetzConfig,
    f: &SpectralField,
    g: &SpectralField,
    grid: &MorawetzGrid,
) -> Result<MorawetzValue> {
    let cone = *f.cone();
    if g.j_max() != f.j_max() || g.lambda_grid() != f.lambda_grid() {
        return Err(ConeError::Dimension("f and g live on different grids".into()));
    }
    let nu_m = cone.mode_order(cfg.m as i64);
    let jm = f.j_max() as i64;
    let lambda = f.lambda_grid();
    let mode_energy = |field: &SpectralField, j: i64| -> f64 {
        field
            .coeff(j)
            .iter()
            .zip(lambda.weights())
            .map(|(c, w)| c.norm_sqr() * w)
            .sum()
    };
    let total: f64 = (-jm..=jm).map(|j| mode_energy(f, j) + mode_energy(g, j)).sum();
    let leaked: f64 = (-jm..=jm)
        .filter(|&j| cone.mode_order(j) < nu_m - 1e-12)
        .map(|j| mode_energy(f, j) + mode_energy(g, j))
        .sum();
    if leaked > 1e-10 * total {
        return Err(invalid(
            "data",
            format!("harmonics below ν_m carry {:.3e} of the energy", leaked / total.max(1e-300)),
        ));
    }
    let retained: Vec<i64> = (-jm..=jm).filter(|&j| cone.mode_order(j) >= nu_m - 1e-12).collect();
    let s = 4.0 * cfg.alpha;
    let hf = |field: &SpectralField, j: i64, pow: f64| -> f64 {
        field
            .coeff(j)
            .iter()
            .zip(lambda.nodes())
            .zip(lambda.weights())
            .map(|((c, &l), w)| c.norm_sqr() * l.powf(pow) * w)
            .sum()
    };
    let mut full_sq = 0.0;
    for &j in &retained {
        let mf = hf(f, j, 1.0);
        let mg = hf(g, j, -1.0);
        full_sq += PI * bessel_square_moment(cone.mode_order(j), s)? * (mf + mg);
    }
    let rhs = f.sobolev_norm(0.5, true)? + g.sobolev_norm(-0.5, true)?;
    if rhs == 0.0 {
        return Err(invalid("data", "zero data"));
    }
    let power = 0.5 - 2.0 * cfg.alpha;
    let lhs_sq: f64 = retained
        .par_iter()
        .map(|&j| {
            let nu = cone.mode_order(j);
            let (fc, gc) = (f.coeff(j), g.coeff(j));
            if fc.iter().chain(gc).all(|c| c.norm_sqr() == 0.0) {
                return 0.0;
            }
            // P[i][k] = q_k λ_k^{1/2−2α} J_ν(λ_k r_i).
            let bank = BesselBank::new(&[nu]);
            let mut out = [0.0];
            let mut scratch = Vec::new();
            let nl = lambda.len();
            let mut pm = vec![0.0; grid.radii.len() * nl];
            for (i, &r) in grid.radii.iter().enumerate() {
                for (k, (&l, w)) in lambda.nodes().iter().zip(lambda.weights()).enumerate() {
                    bank.eval(l * r, &mut out, &mut scratch);
                    pm[i * nl + k] = w * l.powf(power) * out[0];
                }
            }
            let rw: Vec<f64> = grid
                .radii
                .iter()
                .zip(&grid.radial_weights)
                .map(|(&r, w)| w * r.powf(-s))
                .collect();
            let mut acc = 0.0;
            let mut v = vec![Complex64::new(0.0, 0.0); nl];
            for (&t, tw) in grid.times.iter().zip(&grid.time_weights) {
                for (k, &l) in lambda.nodes().iter().enumerate() {
                    v[k] = fc[k] * (t * l).cos() + gc[k] * sinc_t(t, l);
                }
                let mut st = 0.0;
                for (i, q) in rw.iter().enumerate() {
                    let row = &pm[i * nl..(i + 1) * nl];
                    let (mut re, mut im) = (0.0, 0.0);
                    for (p, c) in row.iter().zip(&v) {
                        re += p * c.re;
                        im += p * c.im;
                    }
                    st += q * (re * re + im * im);
                }
                acc += tw * st;
            }
            acc
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let lhs = lhs_sq.sqrt();
    Ok(MorawetzValue {
        lhs,
        rhs,
        ratio: lhs / rhs,
        lhs_full: full_sq.sqrt(),
        tail: full_sq - lhs_sq,
    })
}

/// JSON summary of one estimate check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub check_name: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub values: BTreeMap<String, serde_json::Value>,
    pub slope: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub pass: bool,
    pub tolerances: BTreeMap<String, f64>,
}

impl EstimateReport {
    pub fn new(check_name: &str) -> Self {
        Self {
            check_name: check_name.to_string(),
            params: BTreeMap::new(),
            values: BTreeMap::new(),
            slope: None,
            ci: None,
            pass: false,
            tolerances: BTreeMap::new(),
        }
    }

    pub fn param<V: Serialize>(mut self, key: &str, v: V) -> Self {
        self.params.insert(key.to_string(), serde_json::to_value(v).unwrap_or_default());
        self
    }

    pub fn value<V: Serialize>(mut self, key: &str, v: V) -> Self {
        self.values.insert(key.to_string(), serde_json::to_value(v).unwrap_or_default());
        self
    }

    pub fn tolerance(mut self, key: &str, v: f64) -> Self {
        self.tolerances.insert(key.to_string(), v);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }
}
