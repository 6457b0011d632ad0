//! Wave equation on the wedge `{0 ≤ θ ≤ α}` with Dirichlet or Neumann
//! walls, solved by odd or even extension to the cone with `ρ = α/π`.
//!
//! A [`WedgeField`] holds Hankel-side coefficients `û_j(λ)` against
//! `sin(jπθ/α)` (Dirichlet, `j ≥ 1`) or `cos(jπθ/α)` (Neumann, `j ≥ 0`);
//! the radial profile of mode `j` is `u_j(r) = ∫ û_j(λ) J_{jπ/α}(λr) λ dλ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cone::Cone;
use crate::error::{invalid, Result};
use crate::hankel::RadialGrid;
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
        }
    }
}

/// Wedge of opening `α ∈ (0, 2π]` and its doubling cone `ρ = α/π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wedge {
    alpha: f64,
    bc: BoundaryCondition,
    cone: Cone,
}

impl Wedge {
    pub fn new(alpha: f64, bc: BoundaryCondition) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0 * PI) {
            return Err(invalid("alpha", format!("must lie in (0, 2π], got {alpha}")));
        }
        Ok(Self {
            alpha,
            bc,
            cone: Cone::new(alpha / PI)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    /// Bessel order `jπ/α` of mode `j`.
    pub fn mode_order(&self, j: usize) -> f64 {
        j as f64 * PI / self.alpha
    }

    /// Angular basis function of mode `j`.
    pub fn angular(&self, j: usize, theta: f64) -> f64 {
        let x = j as f64 * PI * theta / self.alpha;
        match self.bc {
            BoundaryCondition::Dirichlet => x.sin(),
            BoundaryCondition::Neumann => x.cos(),
        }
    }

    /// `θ`-derivative of [`Wedge::angular`].
    pub fn angular_derivative(&self, j: usize, theta: f64) -> f64 {
        let k = j as f64 * PI / self.alpha;
        match self.bc {
            BoundaryCondition::Dirichlet => k * (k * theta).cos(),
            BoundaryCondition::Neumann => -k * (k * theta).sin(),
        }
    }

    fn first_mode(&self) -> usize {
        match self.bc {
            BoundaryCondition::Dirichlet => 1,
            BoundaryCondition::Neumann => 0,
        }
    }

    /// Cone coefficient multiplying `û_j` in modes `+j` and `−j`.
    ///
    /// With `φ_k = (2α)^{−1/2} e^{ikπθ/α}`, `sin(jπθ/α) = √(2α)(φ_j − φ_{−j})/(2i)`,
    /// `cos(jπθ/α) = √(2α)(φ_j + φ_{−j})/2` and `1 = √(2α) φ_0`.
    fn extension_weights(&self, j: usize) -> (Complex64, Complex64) {
        let s = (2.0 * self.alpha).sqrt();
        match (self.bc, j) {
            (BoundaryCondition::Neumann, 0) => (Complex64::new(s, 0.0), Complex64::new(0.0, 0.0)),
            (BoundaryCondition::Neumann, _) => (Complex64::new(0.5 * s, 0.0), Complex64::new(0.5 * s, 0.0)),
            (BoundaryCondition::Dirichlet, _) => (Complex64::new(0.0, -0.5 * s), Complex64::new(0.0, 0.5 * s)),
        }
    }
}

/// Sine or cosine expansion of a function on the wedge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedgeField {
    pub wedge: Wedge,
    pub lambda: RadialGrid,
    pub j_max: usize,
    /// `coeffs[j][k] = û_j(λ_k)` for `j = 0..=j_max`; row 0 must vanish for
    /// Dirichlet walls.
    pub coeffs: Vec<Vec<Complex64>>,
}

impl WedgeField {
    pub fn from_mode_fn<F: Fn(usize, f64) -> Complex64>(wedge: Wedge, lambda: RadialGrid, j_max: usize, c: F) -> Self {
        let first = wedge.first_mode();
        let coeffs = (0..=j_max)
            .map(|j| {
                lambda
                    .nodes()
                    .iter()
                    .map(|&l| if j < first { Complex64::new(0.0, 0.0) } else { c(j, l) })
                    .collect()
            })
            .collect();
        Self {
            wedge,
            lambda,
            j_max,
            coeffs,
        }
    }

    /// Projects samples of `u(r, θ)` on the wedge onto the sine or cosine
    /// basis (midpoint rule in `θ` with `n_theta` nodes) and Hankel
    /// transforms every mode onto `lambda`.
    pub fn from_samples<F: Fn(f64, f64) -> f64 + Sync>(
        wedge: Wedge,
        radial: &RadialGrid,
        n_theta: usize,
        lambda: RadialGrid,
        j_max: usize,
        u: F,
    ) -> Result<Self> {
        if n_theta < 2 * (j_max + 1) {
            return Err(invalid("n_theta", format!("{n_theta} samples cannot resolve {j_max} modes")));
        }
        let h = wedge.alpha / n_theta as f64;
        let thetas: Vec<f64> = (0..n_theta).map(|m| (m as f64 + 0.5) * h).collect();
        let first = wedge.first_mode();
        // ∫₀^α S_j² dθ.
        let norm = |j: usize| if j == 0 { wedge.alpha } else { 0.5 * wedge.alpha };
        let samples: Vec<Vec<f64>> = radial
            .nodes()
            .iter()
            .map(|&r| thetas.iter().map(|&th| u(r, th)).collect())
            .collect();
        let orders: Vec<f64> = (0..=j_max).map(|j| wedge.mode_order(j)).collect();
        let profiles: Vec<Vec<Complex64>> = (0..=j_max)
            .map(|j| {
                let basis: Vec<f64> = thetas.iter().map(|&th| wedge.angular(j, th) * h / norm(j)).collect();
                samples
                    .iter()
                    .zip(radial.weights())
                    .map(|(row, w)| {
                        if j < first {
                            return Complex64::new(0.0, 0.0);
                        }
                        Complex64::new(row.iter().zip(&basis).map(|(a, b)| a * b).sum::<f64>() * w, 0.0)
                    })
                    .collect()
            })
            .collect();
        let table = OrderTable::new(&orders, radial.nodes(), lambda.nodes());
        let coeffs = (0..=j_max).map(|j| table.transform(j, &profiles[j])).collect();
        Ok(Self {
            wedge,
            lambda,
            j_max,
            coeffs,
        })
    }

    /// Odd (Dirichlet) or even (Neumann) extension to the cone `ρ = α/π`.
    pub fn extend_to_cone(&self) -> Result<SpectralField> {
        if self.wedge.bc == BoundaryCondition::Dirichlet && self.coeffs[0].iter().any(|c| c.norm_sqr() > 0.0) {
            return Err(invalid(
                "field",
                "a Dirichlet field cannot carry a θ-independent mode; the data mix the sine and cosine subspaces",
            ));
        }
        let mut out = SpectralField::zeros(*self.wedge.cone(), self.lambda.clone(), self.j_max);
        for j in 0..=self.j_max {
            let (wp, wm) = self.wedge.extension_weights(j);
            let ji = j as i64;
            for (k, c) in self.coeffs[j].iter().enumerate() {
                out.coeff_mut(ji)[k] += wp * c;
                if j > 0 {
                    out.coeff_mut(-ji)[k] += wm * c;
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`WedgeField::extend_to_cone`]. Returns the field and the
    /// relative size of the part that breaks the odd or even symmetry.
    pub fn restrict_from_cone(wedge: Wedge, field: &SpectralField) -> Result<(Self, f64)> {
        if (field.cone().rho() - wedge.cone().rho()).abs() > 1e-14 {
            return Err(invalid("field", "cone does not match the wedge opening"));
        }
        let j_max = field.j_max();
        let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); field.lambda_grid().len()]; j_max + 1];
        let mut broken = 0.0;
        let mut total = 0.0;
        for (j, row) in coeffs.iter_mut().enumerate() {
            let ji = j as i64;
            let (wp, wm) = wedge.extension_weights(j);
            for (k, slot) in row.iter_mut().enumerate() {
                let a = field.coeff(ji)[k];
                if j == 0 {
                    total += a.norm_sqr();
                    match wedge.bc {
                        BoundaryCondition::Neumann => *slot = a / wp,
                        BoundaryCondition::Dirichlet => broken += a.norm_sqr(),
                    }
                    continue;
                }
                let b = field.coeff(-ji)[k];
                total += a.norm_sqr() + b.norm_sqr();
                // Symmetric part a/wp + b/wm and its defect a/wp − b/wm.
                let (x, y) = (a / wp, b / wm);
                *slot = 0.5 * (x + y);
                broken += 0.25 * (x - y).norm_sqr() * wp.norm_sqr();
            }
        }
        let defect = if total > 0.0 { (broken / total).sqrt() } else { 0.0 };
        Ok((
            Self {
                wedge,
                lambda: field.lambda_grid().clone(),
                j_max,
                coeffs,
            },
            defect,
        ))
    }

    /// Radial profiles `u_j(r)` on `radii`, indexed `[j][i]`.
    pub fn radial_profiles(&self, radii: &[f64]) -> Vec<Vec<Complex64>> {
        let orders: Vec<f64> = (0..=self.j_max).map(|j| self.wedge.mode_order(j)).collect();
        let table = OrderTable::new(&orders, radii, self.lambda.nodes());
        (0..=self.j_max)
            .map(|j| {
                let weighted: Vec<Complex64> = self.coeffs[j]
                    .iter()
                    .zip(self.lambda.weights())
                    .map(|(c, w)| c * *w)
                    .collect();
                table.synthesize(j, &weighted)
            })
            .collect()
    }

    pub fn scale(&self, c: f64) -> WedgeField {
        let mut out = self.clone();
        out.coeffs.iter_mut().flatten().for_each(|x| *x *= c);
        out
    }

    /// `∫_wedge |u_t|² + |∇u|²` for the pair `(u, u_t)`.
    pub fn energy(u: &WedgeField, ut: &WedgeField) -> f64 {
        let norm = |j: usize| if j == 0 { u.wedge.alpha } else { 0.5 * u.wedge.alpha };
        let l = u.lambda.nodes();
        let w = u.lambda.weights();
        (0..=u.j_max)
            .map(|j| {
                let s: f64 = (0..l.len())
                    .map(|k| w[k] * (ut.coeffs[j][k].norm_sqr() + l[k] * l[k] * u.coeffs[j][k].norm_sqr()))
                    .sum();
                norm(j) * s
            })
            .sum()
    }

    /// Values at `(r, θ)` points of the wedge.
    pub fn evaluate(&self, points: &[(f64, f64)]) -> Vec<f64> {
        let radii: Vec<f64> = points.iter().map(|p| p.0).collect();
        let prof = self.radial_profiles(&radii);
        points
            .iter()
            .enumerate()
            .map(|(i, &(_, th))| (0..=self.j_max).map(|j| prof[j][i].re * self.wedge.angular(j, th)).sum())
            .collect()
    }
}

/// `J_{ν_j}(λ_k r_i)` for arbitrary orders, stored `[j][i][k]`.
struct OrderTable {
    n_r: usize,
    n_l: usize,
    values: Vec<f64>,
}

impl OrderTable {
    fn new(orders: &[f64], radii: &[f64], lambdas: &[f64]) -> Self {
        let bank = crate::bessel::BesselBank::new(orders);
        let (n_r, n_l) = (radii.len(), lambdas.len());
        let mut values = vec![0.0; orders.len() * n_r * n_l];
        let mut out = vec![0.0; orders.len()];
        let mut scratch = Vec::new();
        for (i, &r) in radii.iter().enumerate() {
            for (k, &l) in lambdas.iter().enumerate() {
                bank.eval(l * r, &mut out, &mut scratch);
                for (j, v) in out.iter().enumerate() {
                    values[(j * n_r + i) * n_l + k] = *v;
                }
            }
        }
        Self { n_r, n_l, values }
    }

    fn row(&self, j: usize, i: usize) -> &[f64] {
        let s = (j * self.n_r + i) * self.n_l;
        &self.values[s..s + self.n_l]
    }

    /// `Σ_i x_i J(λ_k r_i)` for every `k`.
    fn transform(&self, j: usize, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_l];
        for (i, c) in x.iter().enumerate() {
            for (o, b) in out.iter_mut().zip(self.row(j, i)) {
                *o += c * b;
            }
        }
        out
    }

    /// `Σ_k y_k J(λ_k r_i)` for every `i`.
    fn synthesize(&self, j: usize, y: &[Complex64]) -> Vec<Complex64> {
        (0..self.n_r)
            .map(|i| self.row(j, i).iter().zip(y).map(|(b, c)| c * b).sum())
            .collect()
    }
}

/// `(u(t), u_t(t))` on the wedge via the cone solver.
pub fn solve_wedge(f: &WedgeField, g: &WedgeField, t: f64) -> Result<(WedgeField, WedgeField)> {
    if f.wedge != g.wedge {
        return Err(invalid("data", "f and g belong to different wedges"));
    }
    let (u, ut) = SpectralField::wave_solve(&f.extend_to_cone()?, &g.extend_to_cone()?, t)?;
    let (u, _) = WedgeField::restrict_from_cone(f.wedge, &u)?;
    let (ut, _) = WedgeField::restrict_from_cone(f.wedge, &ut)?;
    Ok((u, ut))
}

/// Largest boundary residual over `radii` on both walls: `|u|` for
/// Dirichlet, `|∂_θ u|/r` for Neumann.
pub fn boundary_trace_check(u: &WedgeField, radii: &[f64]) -> f64 {
    let w = &u.wedge;
    let prof = u.radial_profiles(radii);
    let mut worst: f64 = 0.0;
    for (i, &r) in radii.iter().enumerate() {
        for theta in [0.0, w.alpha()] {
            let v: f64 = (0..=u.j_max)
                .map(|j| {
                    let c = prof[j][i].re;
                    match w.bc() {
                        BoundaryCondition::Dirichlet => c * w.angular(j, theta),
                        BoundaryCondition::Neumann => c * w.angular_derivative(j, theta) / r,
                    }
                })
                .sum();
            worst = worst.max(v.abs());
        }
    }
    worst
}

/// Planar Gaussian `exp(−|x − c|²/w²)` centred at polar position `(r, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBlob {
    pub r: f64,
    pub theta: f64,
    pub width: f64,
}

impl GaussianBlob {
    pub fn new(r: f64, theta: f64, width: f64) -> Result<Self> {
        if !(r >= 0.0 && width > 0.0 && r.is_finite() && width.is_finite() && theta.is_finite()) {
            return Err(invalid("blob", "needs r ≥ 0, finite θ and a positive width"));
        }
        Ok(Self { r, theta, width })
    }

    /// Value at polar point `(r, θ)` of the plane.
    pub fn value(&self, r: f64, theta: f64) -> f64 {
        let s2 = planar_distance_sq(self.r, self.theta, r, theta);
        (-s2 / (self.width * self.width)).exp()
    }

    /// Radius beyond which the blob is below `e^{−36}`.
    pub fn support_radius(&self) -> f64 {
        self.r + 6.0 * self.width
    }

    /// Largest frequency carried above `e^{−36}`.
    pub fn lambda_max(&self) -> f64 {
        12.0 / self.width
    }
}

fn planar_distance_sq(r1: f64, t1: f64, r2: f64, t2: f64) -> f64 {
    let half = (0.5 * (t1 - t2)).sin();
    (r1 - r2) * (r1 - r2) + 4.0 * r1 * r2 * half * half
}

/// Which Cauchy datum carries the blob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataSlot {
    /// `u(0) = G`, `u_t(0) = 0`.
    Displacement,
    /// `u(0) = 0`, `u_t(0) = G`.
    Velocity,
}

/// Free planar wave with a Gaussian datum of width `w`, at distance `s`
/// from the centre, by the Hankel representation
///
/// ```text
/// Velocity:     ∫₀^∞ sin(tk) (w²/2) e^{−k²w²/4} J₀(ks) dk
/// Displacement: ∫₀^∞ cos(tk) (w²/2) e^{−k²w²/4} J₀(ks) k dk
/// ```
pub fn planar_gaussian_wave(width: f64, s: f64, t: f64, slot: DataSlot) -> f64 {
    let k_max = 12.0 / width;
    let panel = PI / (t.abs() + s + 1.0);
    let panels = (k_max / panel).ceil() as usize;
    let h = k_max / panels as f64;
    let gl = crate::quadrature::GaussLegendre::new(16);
    let c = 0.5 * width * width;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        acc += gl.integrate(a, a + h, |k| {
            let env = c * (-0.25 * k * k * width * width).exp() * crate::bessel::jv(0.0, k * s);
            match slot {
                DataSlot::Velocity => (t * k).sin() * env,
                DataSlot::Displacement => (t * k).cos() * env * k,
            }
        });
    }
    acc
}

/// Method-of-images solution on the wedge `α = π/N`: the blob and its
/// `2N − 1` mirror copies under the reflection group of the two walls,
/// odd copies carrying the sign `−1` for Dirichlet walls.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageOracle {
    pub wedge: Wedge,
    pub blob: GaussianBlob,
    images: Vec<(f64, f64)>,
}

impl ImageOracle {
    pub fn new(wedge: Wedge, blob: GaussianBlob) -> Result<Self> {
        let n = PI / wedge.alpha();
        let nr = n.round();
        if nr < 1.0 || (n - nr).abs() > 1e-9 {
            return Err(invalid("alpha", "the image oracle needs α = π/N for a positive integer N"));
        }
        let sign = match wedge.bc() {
            BoundaryCondition::Dirichlet => -1.0,
            BoundaryCondition::Neumann => 1.0,
        };
        let a = wedge.alpha();
        let images = (0..nr as usize)
            .flat_map(|k| {
                let rot = 2.0 * k as f64 * a;
                [(blob.theta + rot, 1.0), (-blob.theta + rot, sign)]
            })
            .collect();
        Ok(Self { wedge, blob, images })
    }

    /// Image-sum datum at `(r, θ)`.
    pub fn data(&self, r: f64, theta: f64) -> f64 {
        self.images
            .iter()
            .map(|&(ang, sg)| sg * GaussianBlob { theta: ang, ..self.blob }.value(r, theta))
            .sum()
    }

    /// Solution at time `t` when the image sum occupies `slot`.
    pub fn solution(&self, t: f64, r: f64, theta: f64, slot: DataSlot) -> f64 {
        self.images
            .iter()
            .map(|&(ang, sg)| {
                let s = planar_distance_sq(self.blob.r, ang, r, theta).sqrt();
                sg * planar_gaussian_wave(self.blob.width, s, t, slot)
            })
            .sum()
    }
}

/// Discretization of wedge data built from a blob.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeGrids {
    pub radial: RadialGrid,
    pub lambda: RadialGrid,
    pub j_max: usize,
    pub n_theta: usize,
}

impl WedgeGrids {
    /// Grids resolving a blob: radial panels of width about `w/2`, frequency
    /// panels of width about `1/(2 r_support)` and enough modes for the
    /// angular bandwidth `12 r/w`.
    pub fn for_blob(wedge: &Wedge, blob: &GaussianBlob) -> Result<Self> {
        let r_sup = blob.support_radius();
        let l_max = blob.lambda_max();
        let radial = RadialGrid::gauss_uniform(r_sup, (2.0 * r_sup / blob.width).ceil() as usize, 16)?;
        let lambda = RadialGrid::gauss_uniform(l_max, (0.5 * l_max * r_sup).ceil().max(8.0) as usize, 16)?;
        let nu_max = 12.0 * blob.r / blob.width + 12.0;
        let j_max = (nu_max * wedge.alpha() / PI).ceil() as usize + 4;
        Ok(Self {
            radial,
            lambda,
            j_max,
            n_theta: 4 * j_max + 8,
        })
    }

    pub fn field<F: Fn(f64, f64) -> f64 + Sync>(&self, wedge: Wedge, u: F) -> Result<WedgeField> {
        WedgeField::from_samples(wedge, &self.radial, self.n_theta, self.lambda.clone(), self.j_max, u)
    }
}

/// Outcome of [`diffraction_signature`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffractionSignature {
    /// `|u − u_geom|` at the time before the tip-diffracted front arrives.
    pub before_front: f64,
    /// `|u − u_geom|` at the time after it.
    pub after_front: f64,
    /// Diffractive term of the kernel route at the later time.
    pub kernel_diffractive: f64,
    /// Largest `|u|` over a polar sample of the wedge at both times.
    pub peak: f64,
}

impl DiffractionSignature {
    /// Diffracted field above `threshold·peak` after the front while the
    /// difference stays below `floor·peak` before it.
    pub fn present(&self, threshold: f64, floor: f64) -> bool {
        self.after_front > threshold * self.peak && self.before_front < floor * self.peak
    }
}

/// Compares the Dirichlet wedge solution with velocity datum `blob` against
/// the geometric part of the cone kernel applied to its odd extension, at
/// `target` for times `t_before < r + r_blob < t_after`. The geometric part
/// is the full sum of free-plane images visible in the unfolded cone, so
/// the difference is the field diffracted by the corner.
pub fn diffraction_signature(
    alpha: f64,
    blob: GaussianBlob,
    target: (f64, f64),
    t_before: f64,
    t_after: f64,
) -> Result<DiffractionSignature> {
    let wedge = Wedge::new(alpha, BoundaryCondition::Dirichlet)?;
    let grids = WedgeGrids::for_blob(&wedge, &blob)?;
    let g = grids.field(wedge, |r, th| blob.value(r, th))?;
    let zero = WedgeField::from_mode_fn(wedge, grids.lambda.clone(), grids.j_max, |_, _| Complex64::new(0.0, 0.0));
    let cone = *wedge.cone();
    let odd = move |r: f64, th: f64| {
        let th = cone.normalize_angle(th);
        if th >= 0.0 {
            blob.value(r, th)
        } else {
            -blob.value(r, -th)
        }
    };
    let cfg = crate::kernel::PropagatorConfig::new(blob.support_radius());
    let point = cone.point(target.0, target.1)?;
    let sample: Vec<(f64, f64)> = (1..=24)
        .flat_map(|i| (1..=8).map(move |m| (0.25 * i as f64, alpha * m as f64 / 9.0)))
        .collect();
    let mut peak: f64 = 0.0;
    let mut diffs = [0.0; 2];
    let mut kernel_diff = 0.0;
    for (slot, &t) in [t_before, t_after].iter().enumerate() {
        let (u, _) = solve_wedge(&zero, &g, t)?;
        peak = u.evaluate(&sample).iter().fold(peak, |m, v| m.max(v.abs()));
        let spectral = u.evaluate(&[target])[0];
        let kv = crate::kernel::apply_sine_propagator(&cone, t, &odd, point, &cfg)?;
        diffs[slot] = (spectral - kv.geometric).abs();
        kernel_diff = kv.diffractive.abs();
    }
    Ok(DiffractionSignature {
        before_front: diffs[0],
        after_front: diffs[1],
        kernel_diffractive: kernel_diff,
        peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle_error(alpha: f64, bc: BoundaryCondition) -> (f64, f64) {
        let wedge = Wedge::new(alpha, bc).unwrap();
        let blob = GaussianBlob::new(2.5, 0.4 * alpha, 0.5).unwrap();
        let oracle = ImageOracle::new(wedge, blob).unwrap();
        let grids = WedgeGrids::for_blob(&wedge, &blob).unwrap();
        let g = grids.field(wedge, |r, th| oracle.data(r, th)).unwrap();
        let f = g.clone();
        let pts: Vec<(f64, f64)> = (1..=10)
            .flat_map(|i| [0.2, 0.5, 0.8].map(|a| (0.5 * i as f64, a * alpha)))
            .collect();
        let (mut err, mut peak) = (0.0_f64, 0.0_f64);
        for t in [1.0, 3.0] {
            let (u, _) = solve_wedge(&f, &g, t).unwrap();
            let vals = u.evaluate(&pts);
            for (v, &(r, th)) in vals.iter().zip(&pts) {
                let o = oracle.solution(t, r, th, DataSlot::Velocity) + oracle.solution(t, r, th, DataSlot::Displacement);
                err = err.max((v - o).abs());
                peak = peak.max(o.abs());
            }
        }
        (err / peak, peak)
    }

    fn radial_field(wedge: Wedge, j: usize) -> WedgeField {
        let lambda = RadialGrid::gauss_uniform(10.0, 10, 12).unwrap();
        WedgeField::from_mode_fn(wedge, lambda, 4, move |m, l| {
            Complex64::new(if m == j { (-l * l / 4.0).exp() } else { 0.0 }, 0.0)
        })
    }

    #[test]
    fn dirichlet_single_mode_extends_to_odd_pair() {
        let wedge = Wedge::new(PI / 2.0, BoundaryCondition::Dirichlet).unwrap();
        let f = radial_field(wedge, 1);
        let cone = f.extend_to_cone().unwrap();
        for j in -4..=4_i64 {
            let row = cone.coeff(j);
            if j.abs() == 1 {
                assert!(row.iter().zip(cone.coeff(-j)).all(|(a, b)| (a + b).norm() < 1e-15));
                assert!(row.iter().any(|c| c.norm() > 0.1));
            } else {
                assert!(row.iter().all(|c| c.norm() == 0.0));
            }
        }
        let pts = [(0.7, 0.3), (1.4, 1.1)];
        let wedge_vals = f.evaluate(&pts);
        let cone_vals = cone.evaluate(&pts);
        let mirror = cone.evaluate(&[(0.7, -0.3), (1.4, -1.1)]);
        for i in 0..2 {
            assert!((wedge_vals[i] - cone_vals[i].re).abs() < 1e-13);
            assert!(cone_vals[i].im.abs() < 1e-13);
            assert!((cone_vals[i].re + mirror[i].re).abs() < 1e-13);
        }
    }

    #[test]
    fn neumann_constant_mode_extends_unchanged() {
        let wedge = Wedge::new(PI / 3.0, BoundaryCondition::Neumann).unwrap();
        let f = radial_field(wedge, 0);
        let cone = f.extend_to_cone().unwrap();
        let pts = [(0.5, 0.2), (1.0, -0.9), (2.0, 1.0)];
        let c = cone.evaluate(&pts);
        let w = f.evaluate(&[(0.5, 0.2), (1.0, 0.9), (2.0, 1.0)]);
        for i in 0..3 {
            assert!((c[i].re - w[i]).abs() < 1e-13 && c[i].im.abs() < 1e-13);
        }
    }

    #[test]
    fn restriction_inverts_extension() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let wedge = Wedge::new(2.0 * PI / 3.0, bc).unwrap();
            let lambda = RadialGrid::gauss_uniform(6.0, 4, 8).unwrap();
            let f = WedgeField::from_mode_fn(wedge, lambda, 6, |j, l| Complex64::new((j as f64 + 1.0) * l.cos(), l.sin()));
            let (back, defect) = WedgeField::restrict_from_cone(wedge, &f.extend_to_cone().unwrap()).unwrap();
            assert!(defect < 1e-15);
            for (a, b) in back.coeffs.iter().flatten().zip(f.coeffs.iter().flatten()) {
                assert!((a - b).norm() <= 1e-15 * b.norm().max(1.0));
            }
        }
    }

    #[test]
    fn dirichlet_rejects_constant_mode() {
        let wedge = Wedge::new(PI / 2.0, BoundaryCondition::Dirichlet).unwrap();
        let mut f = radial_field(wedge, 1);
        f.coeffs[0][0] = Complex64::new(1.0, 0.0);
        assert!(f.extend_to_cone().is_err());
        let neu = radial_field(Wedge::new(PI / 2.0, BoundaryCondition::Neumann).unwrap(), 0);
        let (_, defect) = WedgeField::restrict_from_cone(wedge, &neu.extend_to_cone().unwrap()).unwrap();
        assert!(defect > 0.99);
    }

    #[test]
    fn boundary_residuals_vanish() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let wedge = Wedge::new(0.9, bc).unwrap();
            let lambda = RadialGrid::gauss_uniform(8.0, 8, 12).unwrap();
            let f = WedgeField::from_mode_fn(wedge, lambda, 5, |j, l| {
                Complex64::new((-l * l / 8.0).exp() / (1.0 + j as f64), 0.0)
            });
            let radii = [0.3, 1.0, 2.5];
            let peak = f.evaluate(&[(1.0, 0.45)])[0].abs();
            assert!(boundary_trace_check(&f, &radii) <= 1e-12 * peak);
        }
    }

    #[test]
    fn planar_oracle_matches_its_initial_data() {
        for s in [0.0, 0.3, 1.1] {
            let d = planar_gaussian_wave(0.5, s, 0.0, DataSlot::Displacement);
            assert!((d - (-s * s / 0.25_f64).exp()).abs() < 1e-13);
            let h = 1e-4;
            let v = (planar_gaussian_wave(0.5, s, h, DataSlot::Velocity)
                - planar_gaussian_wave(0.5, s, -h, DataSlot::Velocity))
                / (2.0 * h);
            assert!((v - (-s * s / 0.25_f64).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn image_oracle_equivalence() {
        for (n, bc) in [
            (1.0, BoundaryCondition::Dirichlet),
            (2.0, BoundaryCondition::Dirichlet),
            (2.0, BoundaryCondition::Neumann),
        ] {
            let (rel, _) = oracle_error(PI / n, bc);
            assert!(rel < 1e-8, "N = {n} {bc:?}: {rel:e}");
        }
    }

    #[test]
    fn image_oracle_needs_submultiple_of_pi() {
        let wedge = Wedge::new(2.0 * PI / 3.0, BoundaryCondition::Dirichlet).unwrap();
        assert!(ImageOracle::new(wedge, GaussianBlob::new(1.0, 0.5, 0.3).unwrap()).is_err());
    }

    #[test]
    fn finite_speed_and_energy() {
        let wedge = Wedge::new(PI / 3.0, BoundaryCondition::Neumann).unwrap();
        let blob = GaussianBlob::new(1.5, 0.5, 0.3).unwrap();
        let oracle = ImageOracle::new(wedge, blob).unwrap();
        let grids = WedgeGrids::for_blob(&wedge, &blob).unwrap();
        let g = grids.field(wedge, |r, th| oracle.data(r, th)).unwrap();
        let f = g.scale(0.5);
        let e0 = WedgeField::energy(&f, &g);
        let t = 1.0;
        let (u, ut) = solve_wedge(&f, &g, t).unwrap();
        let reach = blob.support_radius() + t;
        let far: Vec<(f64, f64)> = [reach + 0.2, reach + 1.0].iter().flat_map(|&r| [(r, 0.2), (r, 0.8)]).collect();
        let near: Vec<(f64, f64)> = (1..=12).map(|i| (0.25 * i as f64, 0.5)).collect();
        let peak = u.evaluate(&near).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(u.evaluate(&far).iter().all(|v| v.abs() <= 1e-10 * peak));
        let e1 = WedgeField::energy(&u, &ut);
        let (u, ut) = solve_wedge(&f, &g, 100.0).unwrap();
        let e2 = WedgeField::energy(&u, &ut);
        assert!(((e1 - e0) / e0).abs() <= 1e-10 && ((e2 - e0) / e0).abs() <= 1e-10);
    }

    #[test]
    fn diffraction_signature_behind_the_front() {
        let a = 2.0 * PI / 3.0;
        let blob = GaussianBlob::new(2.0, a / 2.0, 0.3).unwrap();
        let s = diffraction_signature(a, blob, (2.0, a / 2.0 + 0.5), 2.0, 6.0).unwrap();
        assert!(s.present(1e-4, 1e-10), "{s:?}");
        assert!((s.after_front - s.kernel_diffractive).abs() < 1e-8 * s.peak);
    }
}
