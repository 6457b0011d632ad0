//! Functional calculus of the cone Laplacian through its Fourier–Bessel
//! resolution: angular modes `φ_j` with Bessel order `ν_j = |j|/ρ`, and in
//! each mode the Hankel transform of order `ν_j`.
//!
//! A [`SpectralField`] stores the Hankel-side coefficients `â_j(λ)` on a
//! frequency grid for `|j| ≤ j_max`; functions of `Δ` act by multiplying
//! `â_j(λ)` by `G(λ²)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::BesselBank;
use crate::cone::Cone;
use crate::error::{invalid, ConeError, Result};
use crate::hankel::RadialGrid;
use crate::lp::LpCutoff;

/// Angular mode `j` with its Bessel order `ν_j = |j|/ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeIndex {
    pub j: i64,
    pub nu: f64,
}

/// Samples of a complex function on a polar grid: radial nodes from a
/// [`RadialGrid`] and `n_theta` uniform angles over one period.
#[derive(Debug, Clone)]
pub struct PolarSamples {
    pub cone: Cone,
    pub radial: RadialGrid,
    pub thetas: Vec<f64>,
    pub dtheta: f64,
    /// Row-major: `values[i * n_theta + m]` at `(r_i, θ_m)`.
    pub values: Vec<Complex64>,
}

impl PolarSamples {
    pub fn from_fn<F: Fn(f64, f64) -> Complex64 + Sync>(cone: Cone, radial: RadialGrid, n_theta: usize, f: F) -> Self {
        let (thetas, dtheta) = cone.angular_grid(n_theta);
        let values = radial
            .nodes()
            .par_iter()
            .flat_map_iter(|&r| thetas.iter().map(move |&th| (r, th)).collect::<Vec<_>>())
            .map(|(r, th)| f(r, th))
            .collect();
        Self {
            cone,
            radial,
            thetas,
            dtheta,
            values,
        }
    }

    pub fn from_real_fn<F: Fn(f64, f64) -> f64 + Sync>(cone: Cone, radial: RadialGrid, n_theta: usize, f: F) -> Self {
        Self::from_fn(cone, radial, n_theta, |r, th| Complex64::new(f(r, th), 0.0))
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    /// `∫ |a|² r dr dθ` on the grid.
    pub fn l2_norm(&self) -> f64 {
        let n = self.n_theta();
        self.radial
            .weights()
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let row: f64 = self.values[i * n..(i + 1) * n].iter().map(|v| v.norm_sqr()).sum();
                w * row * self.dtheta
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Complex radial profile of one angular mode.
#[derive(Debug, Clone)]
pub struct ModeProfile {
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
}

/// `Π_j a(r) = ∫ a(r, θ) φ̄_j(θ) dθ` on each radial node. Requires at least
/// `4|j|` angular samples.
pub fn project_mode(samples: &PolarSamples, j: i64) -> Result<ModeProfile> {
    let n = samples.n_theta();
    if n < 4 * j.unsigned_abs() as usize || n == 0 {
        return Err(ConeError::Aliasing { samples: n, mode: j });
    }
    let cone = &samples.cone;
    let conj: Vec<Complex64> = samples
        .thetas
        .iter()
        .map(|&th| cone.eigenfunction(j, th).conj() * samples.dtheta)
        .collect();
    let values = (0..samples.radial.len())
        .map(|i| {
            samples.values[i * n..(i + 1) * n]
                .iter()
                .zip(&conj)
                .map(|(a, c)| a * c)
                .sum()
        })
        .collect();
    Ok(ModeProfile {
        grid: samples.radial.clone(),
        values,
    })
}

/// Default angular truncation `⌈4ρ λ_max⌉ + 8`.
pub fn default_j_max(cone: &Cone, lambda_max: f64) -> usize {
    (4.0 * cone.rho() * lambda_max).ceil() as usize + 8
}

/// Field on the cone in Fourier–Bessel form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralField {
    cone: Cone,
    lambda: RadialGrid,
    j_max: usize,
    /// `coeffs[j + j_max][k] = â_j(λ_k)`.
    coeffs: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(cone: Cone, lambda: RadialGrid, j_max: usize) -> Self {
        let n = lambda.len();
        Self {
            cone,
            lambda,
            j_max,
            coeffs: vec![vec![Complex64::new(0.0, 0.0); n]; 2 * j_max + 1],
        }
    }

    /// Builds coefficients from `c(j, λ)`.
    pub fn from_mode_fn<F: Fn(i64, f64) -> Complex64>(cone: Cone, lambda: RadialGrid, j_max: usize, c: F) -> Self {
        let jm = j_max as i64;
        let coeffs = (-jm..=jm)
            .map(|j| lambda.nodes().iter().map(|&l| c(j, l)).collect())
            .collect();
        Self {
            cone,
            lambda,
            j_max,
            coeffs,
        }
    }

    /// Projects polar samples onto modes `|j| ≤ j_max` and Hankel transforms
    /// each onto `lambda`.
    pub fn from_polar(samples: &PolarSamples, lambda: RadialGrid, j_max: usize) -> Result<Self> {
        let cone = samples.cone;
        let jm = j_max as i64;
        let profiles = (-jm..=jm)
            .map(|j| project_mode(samples, j))
            .collect::<Result<Vec<_>>>()?;
        let radial = &samples.radial;
        let table = BesselTable::new(&cone, j_max, radial.nodes(), lambda.nodes());
        let coeffs = (-jm..=jm)
            .into_par_iter()
            .map(|j| {
                let prof = &profiles[(j + jm) as usize];
                let weighted: Vec<Complex64> = prof
                    .values
                    .iter()
                    .zip(radial.weights())
                    .map(|(v, w)| v * *w)
                    .collect();
                table.transform_to_lambda(j.unsigned_abs() as usize, &weighted)
            })
            .collect();
        Ok(Self {
            cone,
            lambda,
            j_max,
            coeffs,
        })
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn lambda_grid(&self) -> &RadialGrid {
        &self.lambda
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda.r_max()
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn modes(&self) -> impl Iterator<Item = ModeIndex> + '_ {
        let jm = self.j_max as i64;
        (-jm..=jm).map(move |j| ModeIndex {
            j,
            nu: self.cone.mode_order(j),
        })
    }

    pub fn coeff(&self, j: i64) -> &[Complex64] {
        &self.coeffs[(j + self.j_max as i64) as usize]
    }

    pub fn coeff_mut(&mut self, j: i64) -> &mut [Complex64] {
        let jm = self.j_max as i64;
        &mut self.coeffs[(j + jm) as usize]
    }

    fn same_shape(&self, other: &SpectralField) -> Result<()> {
        if self.j_max != other.j_max || self.lambda != other.lambda || self.cone != other.cone {
            return Err(ConeError::Dimension("spectral fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.iter_mut().flatten().for_each(|x| *x *= c);
        out
    }

    /// `G(Δ)` for a real multiplier given as a function of `λ²`.
    pub fn apply_multiplier<G: Fn(f64) -> f64>(&self, g: G) -> SpectralField {
        let gv: Vec<f64> = self.lambda.nodes().iter().map(|&l| g(l * l)).collect();
        let mut out = self.clone();
        for row in out.coeffs.iter_mut() {
            for (x, m) in row.iter_mut().zip(&gv) {
                *x *= m;
            }
        }
        out
    }

    /// Mode-dependent complex multiplier `m(j, λ)`.
    pub fn apply_mode_multiplier<G: Fn(i64, f64) -> Complex64>(&self, g: G) -> SpectralField {
        let mut out = self.clone();
        let jm = self.j_max as i64;
        for (idx, row) in out.coeffs.iter_mut().enumerate() {
            let j = idx as i64 - jm;
            for (x, &l) in row.iter_mut().zip(self.lambda.nodes()) {
                *x *= g(j, l);
            }
        }
        out
    }

    /// `Σ_j ∫ w(λ) |â_j|² λ dλ`.
    fn weighted_norm_sq<W: Fn(f64) -> f64>(&self, w: W) -> f64 {
        let wts: Vec<f64> = self
            .lambda
            .nodes()
            .iter()
            .zip(self.lambda.weights())
            .map(|(&l, q)| q * w(l))
            .collect();
        self.coeffs
            .iter()
            .map(|row| row.iter().zip(&wts).map(|(c, q)| q * c.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Spectral `L²` norm (equal to the physical one by Plancherel).
    pub fn l2_norm(&self) -> f64 {
        self.weighted_norm_sq(|_| 1.0).sqrt()
    }

    /// `‖a‖_{Ḣ^s}` (`homogeneous`) or `‖a‖_{H^s}`, `s ∈ [−2, 2]`.
    ///
    /// Homogeneous norms with `s < 0` are refused when the coefficients do
    /// not vanish near `λ = 0`: the part of the weighted integral from the
    /// lowest 2% of the frequency range must stay below `10⁻⁶` of the total.
    pub fn sobolev_norm(&self, s: f64, homogeneous: bool) -> Result<f64> {
        if !(-2.0..=2.0).contains(&s) {
            return Err(invalid("s", format!("must lie in [-2, 2], got {s}")));
        }
        if !homogeneous {
            return Ok(self.weighted_norm_sq(|l| (1.0 + l * l).powf(s)).sqrt());
        }
        let total = self.weighted_norm_sq(|l| l.powf(2.0 * s));
        if s < 0.0 {
            let cut = 0.02 * self.lambda_max();
            let low = self.weighted_norm_sq(|l| if l < cut { l.powf(2.0 * s) } else { 0.0 });
            if !(low <= 1e-6 * total) || !total.is_finite() {
                return Err(invalid(
                    "s",
                    format!("homogeneous norm of order {s} diverges: low-frequency mass {low:.3e} of {total:.3e}"),
                ));
            }
        }
        Ok(total.sqrt())
    }

    /// Dyadic pieces `β_k(√Δ) a` for `k` in `k_range` (inclusive).
    pub fn lp_decompose(&self, k_lo: i32, k_hi: i32) -> Result<LpDecomposition> {
        if k_lo > k_hi {
            return Err(invalid("k_range", "empty dyadic range"));
        }
        let pieces: Vec<SpectralField> = (k_lo..=k_hi)
            .map(|k| {
                let c = LpCutoff::new(k);
                self.apply_multiplier(|l2| c.eval(l2.sqrt()))
            })
            .collect();
        let total = self.weighted_norm_sq(|_| 1.0);
        let (lo, _) = LpCutoff::new(k_lo).support();
        let (_, hi) = LpCutoff::new(k_hi).support();
        // Mass missed by the truncated partition, weighted by (1 - Σ β_k)².
        let missed: f64 = self
            .lambda
            .nodes()
            .iter()
            .zip(self.lambda.weights())
            .enumerate()
            .map(|(k, (&l, q))| {
                let cover: f64 = (k_lo..=k_hi).map(|m| LpCutoff::new(m).eval(l)).sum();
                let e: f64 = self.coeffs.iter().map(|row| row[k].norm_sqr()).sum();
                q * e * (1.0 - cover).powi(2)
            })
            .sum();
        Ok(LpDecomposition {
            k_lo,
            pieces,
            band: (lo, hi),
            uncovered_fraction: if total > 0.0 { missed / total } else { 0.0 },
            coverage_warning: total > 0.0 && missed > 1e-8 * total,
        })
    }

    /// `(u(t), u_t(t))` for `u'' + Δu = 0`, `u(0) = f`, `u_t(0) = g`.
    pub fn wave_solve(f: &SpectralField, g: &SpectralField, t: f64) -> Result<(SpectralField, SpectralField)> {
        f.same_shape(g)?;
        let nodes = f.lambda.nodes();
        let c: Vec<f64> = nodes.iter().map(|&l| (t * l).cos()).collect();
        let s: Vec<f64> = nodes.iter().map(|&l| sinc_t(t, l)).collect();
        let ls: Vec<f64> = nodes.iter().map(|&l| l * (t * l).sin()).collect();
        let mut u = f.clone();
        let mut ut = f.clone();
        for ((ur, utr), (fr, gr)) in u
            .coeffs
            .iter_mut()
            .zip(ut.coeffs.iter_mut())
            .zip(f.coeffs.iter().zip(&g.coeffs))
        {
            for k in 0..nodes.len() {
                ur[k] = fr[k] * c[k] + gr[k] * s[k];
                utr[k] = -fr[k] * ls[k] + gr[k] * c[k];
            }
        }
        Ok((u, ut))
    }

    /// `‖u_t‖² + ‖u‖²_{Ḣ¹}`.
    pub fn energy(u: &SpectralField, ut: &SpectralField) -> f64 {
        ut.weighted_norm_sq(|_| 1.0) + u.weighted_norm_sq(|l| l * l)
    }

    /// Radial profiles `c_j(r) = Σ_k w_k â_j(λ_k) J_{ν_j}(λ_k r)` for every
    /// mode, indexed `[j + j_max][i]`.
    pub fn radial_profiles(&self, radii: &[f64]) -> Vec<Vec<Complex64>> {
        let table = BesselTable::new(&self.cone, self.j_max, radii, self.lambda.nodes());
        table.profiles(self)
    }

    /// Physical values at `(r, θ)` pairs.
    pub fn evaluate(&self, points: &[(f64, f64)]) -> Vec<Complex64> {
        let radii: Vec<f64> = points.iter().map(|p| p.0).collect();
        let prof = self.radial_profiles(&radii);
        let jm = self.j_max as i64;
        points
            .iter()
            .enumerate()
            .map(|(i, &(_, th))| {
                (-jm..=jm)
                    .map(|j| prof[(j + jm) as usize][i] * self.cone.eigenfunction(j, th))
                    .sum()
            })
            .collect()
    }

    /// Physical values on the tensor grid `radii × thetas`, row-major.
    pub fn evaluate_polar(&self, radii: &[f64], thetas: &[f64]) -> Vec<Complex64> {
        let prof = self.radial_profiles(radii);
        synthesize(&self.cone, self.j_max, &prof, radii.len(), thetas)
    }
}

/// Angular synthesis of radial mode profiles on a tensor grid.
pub fn synthesize(cone: &Cone, j_max: usize, prof: &[Vec<Complex64>], n_r: usize, thetas: &[f64]) -> Vec<Complex64> {
    let jm = j_max as i64;
    let phis: Vec<Vec<Complex64>> = (-jm..=jm)
        .map(|j| thetas.iter().map(|&th| cone.eigenfunction(j, th)).collect())
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n_r * thetas.len()];
    for (jj, p) in prof.iter().enumerate() {
        for i in 0..n_r {
            let c = p[i];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = &mut out[i * thetas.len()..(i + 1) * thetas.len()];
            for (o, ph) in row.iter_mut().zip(&phis[jj]) {
                *o += c * ph;
            }
        }
    }
    out
}

/// `sin(tλ)/λ`, by its Taylor series when `tλ < 10⁻⁴`.
pub fn sinc_t(t: f64, l: f64) -> f64 {
    let x = t * l;
    if x.abs() < 1e-4 {
        let x2 = x * x;
        t * (1.0 - x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        (x).sin() / l
    }
}

/// Output of [`SpectralField::lp_decompose`].
#[derive(Debug, Clone)]
pub struct LpDecomposition {
    pub k_lo: i32,
    pub pieces: Vec<SpectralField>,
    /// Frequency band covered by the cutoffs.
    pub band: (f64, f64),
    /// Fraction of `L²` mass not captured by the retained cutoffs.
    pub uncovered_fraction: f64,
    pub coverage_warning: bool,
}

impl LpDecomposition {
    /// Sum of the pieces.
    pub fn recompose(&self) -> Result<SpectralField> {
        let mut it = self.pieces.iter();
        let first = it.next().ok_or_else(|| invalid("pieces", "empty decomposition"))?.clone();
        it.try_fold(first, |acc, p| acc.add(p))
    }
}

/// `J_{ν_j}(λ_k r_i)` for `j = 0..=j_max`, all radii and frequencies,
/// stored `[j][i][k]`.
#[derive(Debug, Clone)]
pub struct BesselTable {
    n_r: usize,
    n_l: usize,
    j_count: usize,
    values: Vec<f64>,
}

impl BesselTable {
    pub fn new(cone: &Cone, j_max: usize, radii: &[f64], lambdas: &[f64]) -> Self {
        let orders: Vec<f64> = (0..=j_max as i64).map(|j| cone.mode_order(j)).collect();
        let bank = BesselBank::new(&orders);
        let j_count = j_max + 1;
        let n_l = lambdas.len();
        let n_r = radii.len();
        // Rows per radius: [k][j] for locality, then transposed.
        let rows: Vec<Vec<f64>> = radii
            .par_iter()
            .map(|&r| {
                let mut out = vec![0.0; n_l * j_count];
                let mut tmp = vec![0.0; j_count];
                let mut scratch = Vec::new();
                for (k, &l) in lambdas.iter().enumerate() {
                    bank.eval(l * r, &mut tmp, &mut scratch);
                    for j in 0..j_count {
                        out[j * n_l + k] = tmp[j];
                    }
                }
                out
            })
            .collect();
        let mut values = vec![0.0; j_count * n_r * n_l];
        for (i, row) in rows.iter().enumerate() {
            for j in 0..j_count {
                let dst = (j * n_r + i) * n_l;
                values[dst..dst + n_l].copy_from_slice(&row[j * n_l..(j + 1) * n_l]);
            }
        }
        Self {
            n_r,
            n_l,
            j_count,
            values,
        }
    }

    pub fn row(&self, j: usize, i: usize) -> &[f64] {
        let s = (j * self.n_r + i) * self.n_l;
        &self.values[s..s + self.n_l]
    }

    pub fn j_count(&self) -> usize {
        self.j_count
    }

    /// `Σ_i weighted_i J(λ_k r_i)` for each frequency `k`; `weighted` already
    /// includes the radial quadrature weights.
    pub fn transform_to_lambda(&self, j: usize, weighted: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_l];
        for (i, c) in weighted.iter().enumerate() {
            for (o, b) in out.iter_mut().zip(self.row(j, i)) {
                *o += c * b;
            }
        }
        out
    }

    /// Radial profiles of a field whose frequency grid matches the table.
    pub fn profiles(&self, field: &SpectralField) -> Vec<Vec<Complex64>> {
        let jm = field.j_max as i64;
        let w = field.lambda.weights();
        (-jm..=jm)
            .into_par_iter()
            .map(|j| {
                let a = j.unsigned_abs() as usize;
                let wc: Vec<Complex64> = field.coeff(j).iter().zip(w).map(|(c, q)| c * *q).collect();
                if wc.iter().all(|c| c.norm_sqr() == 0.0) {
                    return vec![Complex64::new(0.0, 0.0); self.n_r];
                }
                (0..self.n_r)
                    .map(|i| {
                        let (mut re, mut im) = (0.0, 0.0);
                        for (c, b) in wc.iter().zip(self.row(a, i)) {
                            re += c.re * b;
                            im += c.im * b;
                        }
                        Complex64::new(re, im)
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian_blob(cone: &Cone, rc: f64, thc: f64, w: f64) -> impl Fn(f64, f64) -> f64 + Sync + '_ {
        move |r: f64, th: f64| {
            let d = cone.normalize_angle(th - thc);
            let d2 = r * r + rc * rc - 2.0 * r * rc * d.cos();
            (-d2 / (w * w)).exp()
        }
    }

    fn setup(rho: f64) -> (Cone, PolarSamples, SpectralField) {
        let cone = Cone::new(rho).unwrap();
        let j_max = (60.0 * rho).ceil() as usize;
        let radial = RadialGrid::gauss_uniform(7.0, 28, 16).unwrap();
        let samples = PolarSamples::from_real_fn(cone, radial, 4 * j_max + 8, gaussian_blob(&cone, 3.0, 0.3, 0.6));
        let lambda = RadialGrid::gauss_uniform(18.0, 36, 16).unwrap();
        let field = SpectralField::from_polar(&samples, lambda, j_max).unwrap();
        (cone, samples, field)
    }

    #[test]
    fn projection_examples() {
        let cone = Cone::new(0.75).unwrap();
        let radial = RadialGrid::gauss_uniform(2.0, 2, 8).unwrap();
        let s = PolarSamples::from_fn(cone, radial, 32, |r, th| cone.eigenfunction(1, th) * (-r * r).exp());
        let p1 = project_mode(&s, 1).unwrap();
        let p0 = project_mode(&s, 0).unwrap();
        for (i, &r) in p1.grid.nodes().iter().enumerate() {
            assert!((p1.values[i] - (-r * r).exp()).norm() < 1e-14);
            assert!(p0.values[i].norm() < 1e-15);
        }
        assert!(project_mode(&s, 9).is_err());
        let s = PolarSamples::from_real_fn(cone, p1.grid.clone(), 32, |r, th| r * (2.0 * th).cos() + th.sin());
        let a = project_mode(&s, 2).unwrap();
        let b = project_mode(&s, -2).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn plancherel_physical_vs_spectral() {
        for rho in [2.0 / 3.0, 1.0, 1.5] {
            let (_, samples, field) = setup(rho);
            let p = samples.l2_norm();
            let s = field.l2_norm();
            assert!((p - s).abs() < 1e-8 * p, "rho={rho}: {p} vs {s}");
        }
    }

    #[test]
    fn round_trip_reproduces_samples() {
        let (cone, _, field) = setup(2.0 / 3.0);
        let pts = [(2.7, 0.2), (3.5, -0.1), (0.4, 1.0)];
        let vals = field.evaluate(&pts);
        let f = gaussian_blob(&cone, 3.0, 0.3, 0.6);
        for (p, v) in pts.iter().zip(&vals) {
            assert!((v.re - f(p.0, p.1)).abs() < 1e-9, "{p:?}: {v} vs {}", f(p.0, p.1));
            assert!(v.im.abs() < 1e-9);
        }
    }

    #[test]
    fn multipliers_compose_and_identity() {
        let (_, _, field) = setup(1.5);
        let id = field.apply_multiplier(|_| 1.0);
        assert_eq!(id.coeffs, field.coeffs);
        let g1 = |l2: f64| (-0.1 * l2).exp();
        let g2 = |l2: f64| 1.0 / (1.0 + l2);
        let a = field.apply_multiplier(g1).apply_multiplier(g2);
        let b = field.apply_multiplier(|l2| g1(l2) * g2(l2));
        for (x, y) in a.coeffs.iter().flatten().zip(b.coeffs.iter().flatten()) {
            assert!((x - y).norm() <= 1e-15 * x.norm().max(1e-300) + 1e-300);
        }
        let lo = field.apply_multiplier(|l2| crate::lp::beta0(l2.sqrt()));
        let hi = field.apply_multiplier(|l2| 1.0 - crate::lp::beta0(l2.sqrt()));
        let sum = lo.add(&hi).unwrap();
        for (x, y) in sum.coeffs.iter().flatten().zip(field.coeffs.iter().flatten()) {
            assert!((x - y).norm() <= 1e-15 * y.norm().max(1e-300));
        }
    }

    #[test]
    fn laplacian_multiplier_matches_finite_differences() {
        let (cone, _, field) = setup(2.0 / 3.0);
        let lap = field.apply_multiplier(|l2| l2);
        let f = gaussian_blob(&cone, 3.0, 0.3, 0.6);
        // Fourth-order central differences.
        let h = 1e-2;
        let d2 = |g: &dyn Fn(f64) -> f64, x: f64| {
            (-g(x + 2.0 * h) + 16.0 * g(x + h) - 30.0 * g(x) + 16.0 * g(x - h) - g(x - 2.0 * h)) / (12.0 * h * h)
        };
        let d1 = |g: &dyn Fn(f64) -> f64, x: f64| {
            (-g(x + 2.0 * h) + 8.0 * g(x + h) - 8.0 * g(x - h) + g(x - 2.0 * h)) / (12.0 * h)
        };
        for &(r, th) in &[(3.0, 0.3), (2.6, 0.2), (3.4, 0.5)] {
            let frr = d2(&|x| f(x, th), r);
            let fr = d1(&|x| f(x, th), r);
            let ftt = d2(&|x| f(r, x), th);
            let fd = -(frr + fr / r + ftt / (r * r));
            let v = lap.evaluate(&[(r, th)])[0].re;
            assert!((v - fd).abs() < 1e-5 * fd.abs().max(1.0), "({r},{th}): {v} vs {fd}");
        }
    }

    #[test]
    fn lp_decomposition_recomposes() {
        let (_, _, field) = setup(1.0);
        let d = field.lp_decompose(-12, 5).unwrap();
        let back = d.recompose().unwrap();
        let diff = back.add(&field.scale(Complex64::new(-1.0, 0.0))).unwrap();
        assert!(diff.l2_norm() <= 1e-10 * field.l2_norm());
        assert!(!d.coverage_warning);
        let narrow = field.lp_decompose(0, 1).unwrap();
        assert!(narrow.coverage_warning);
    }

    #[test]
    fn sobolev_norm_identities() {
        let (_, _, field) = setup(1.0);
        let l2 = field.l2_norm();
        assert!((field.sobolev_norm(0.0, true).unwrap() - l2).abs() < 1e-14 * l2);
        let h1 = field.sobolev_norm(1.0, false).unwrap();
        let dh1 = field.sobolev_norm(1.0, true).unwrap();
        assert!((h1 * h1 - l2 * l2 - dh1 * dh1).abs() < 1e-12 * h1 * h1);
        assert!(field.sobolev_norm(3.0, true).is_err());
        assert!(field.sobolev_norm(-1.5, true).is_err());
    }

    #[test]
    fn narrow_bump_sobolev_scaling() {
        let cone = Cone::new(1.0).unwrap();
        let lambda = RadialGrid::gauss_uniform(4.0, 40, 12).unwrap();
        let f = SpectralField::from_mode_fn(cone, lambda, 2, |j, l| {
            if j == 1 {
                Complex64::new((-((l - 2.0) / 0.02).powi(2)).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        for s in [-0.5, 0.5, 1.0] {
            let ratio = f.sobolev_norm(s, true).unwrap() / f.l2_norm();
            assert!((ratio / 2f64.powf(s) - 1.0).abs() < 1e-3, "s={s}: {ratio}");
        }
    }

    #[test]
    fn wave_solve_initial_data_and_energy() {
        let (_, _, f) = setup(2.0 / 3.0);
        let g = f.apply_multiplier(|l2| (-0.2 * l2).exp());
        let (u0, ut0) = SpectralField::wave_solve(&f, &g, 0.0).unwrap();
        assert_eq!(u0.coeffs, f.coeffs);
        assert_eq!(ut0.coeffs, g.coeffs);
        let e0 = SpectralField::energy(&u0, &ut0);
        for t in [0.5, 7.0, 33.0, 100.0] {
            let (u, ut) = SpectralField::wave_solve(&f, &g, t).unwrap();
            let e = SpectralField::energy(&u, &ut);
            assert!((e - e0).abs() <= 1e-10 * e0);
            assert!(u.l2_norm() <= f.l2_norm() + t * g.l2_norm());
        }
    }

    #[test]
    fn sinc_series_branch_is_continuous() {
        let t = 2.0;
        for l in [0.4999e-4_f64, 0.5001e-4] {
            let direct = (t * l).sin() / l;
            assert!((sinc_t(t, l) - direct).abs() < 1e-12);
        }
        assert!((sinc_t(1.0, 0.0) - 1.0).abs() < 1e-16);
        assert!((sinc_t(PI, 1.0)).abs() < 1e-15);
    }
}
