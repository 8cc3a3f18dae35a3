//! Local density functional for superfluid He-4: the self-interaction
//! operator O(ρ), the energy it derives from, the Madelung quantum
//! potential, and closed-form bulk relations.
//!
//! O(ρ) = b·ρ + ((2+γ)/2)·c·ρ^(1+γ) − 2d·ρ″ is the density variation of
//! E_int[ρ] = ∫ (b/2)ρ² + (c/2)ρ^(2+γ) + d(ρ′)² dx.

use crate::dynamics::WaveField;
use crate::stencil;
use crate::units::PhysicalConstants;
use thiserror::Error;

/// Density floor applied wherever √ρ or 1/ρ appears, Å⁻³.
pub const RHO_FLOOR: f64 = 1e-12;
/// Negative densities above this magnitude are treated as roundoff and
/// clamped to zero before fractional powers.
pub const NEG_CLAMP: f64 = 1e-14;

/// Field-level input failures.
#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("fields have mismatched lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Parameters of the helium density functional, in Kelvin–Ångström units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalParams {
    /// Two-body coefficient, K·Å³ (attractive, b < 0).
    pub b: f64,
    /// Short-range repulsion coefficient, K·Å^(3+3γ).
    pub c: f64,
    /// Repulsion exponent (dimensionless).
    pub gamma: f64,
    /// Gradient-term coefficient, K·Å⁵.
    pub d: f64,
    /// Unit-system constants.
    pub constants: PhysicalConstants,
}

impl FunctionalParams {
    /// The He-4 parameter set of the local functional.
    pub fn helium4() -> Self {
        FunctionalParams {
            b: -888.81,
            c: 1.04554e7,
            gamma: 2.8,
            d: 2383.0,
            constants: PhysicalConstants::derive(),
        }
    }

    /// Check the sign constraints that make the functional a bound liquid.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.b < 0.0) {
            return Err(format!("b must be negative (attractive), got {}", self.b));
        }
        if !(self.c > 0.0) {
            return Err(format!("c must be positive (repulsive), got {}", self.c));
        }
        if !(self.d > 0.0) {
            return Err(format!("d must be positive (surface energy), got {}", self.d));
        }
        if !(self.gamma > 0.0) {
            return Err(format!("gamma must be positive, got {}", self.gamma));
        }
        Ok(())
    }

    /// ħ²/2m in K·Å², shorthand for the kinetic prefactor.
    pub fn kinetic(&self) -> f64 {
        self.constants.kinetic_coefficient
    }

    /// Particle mass in internal units.
    pub fn mass(&self) -> f64 {
        self.constants.mass_internal
    }
}

impl Default for FunctionalParams {
    fn default() -> Self {
        Self::helium4()
    }
}

fn clamp_density(rho: f64) -> f64 {
    if rho < 0.0 {
        debug_assert!(rho > -NEG_CLAMP, "density {rho} below roundoff clamp");
        0.0
    } else {
        rho
    }
}

/// Pointwise O(ρ) without the validation pass; used by the dynamics hot loop.
pub(crate) fn self_interaction_into(
    rho: &[f64],
    rho_xx: &[f64],
    params: &FunctionalParams,
    out: &mut [f64],
) {
    let cg = 0.5 * (2.0 + params.gamma) * params.c;
    let expo = 1.0 + params.gamma;
    for i in 0..rho.len() {
        let r = clamp_density(rho[i]);
        // below 1e-8 the repulsive term is < 1e-23 K, under the resolution
        // of the other terms; skipping powf there roughly halves the cost
        // of a derivative evaluation on a mostly-vacuum grid
        let repulsive = if r > 1e-8 { cg * r.powf(expo) } else { 0.0 };
        out[i] = params.b * r + repulsive - 2.0 * params.d * rho_xx[i];
    }
}

/// The self-interaction operator O(ρ) = bρ + ((2+γ)/2)cρ^(1+γ) − 2dρ″.
///
/// `rho_xx` is the caller-supplied second derivative of the density.
pub fn self_interaction(
    rho: &[f64],
    rho_xx: &[f64],
    params: &FunctionalParams,
) -> Result<Vec<f64>, FieldError> {
    if rho.len() != rho_xx.len() {
        return Err(FieldError::LengthMismatch(rho.len(), rho_xx.len()));
    }
    if !rho.iter().chain(rho_xx).all(|v| v.is_finite()) {
        return Err(FieldError::NonFinite);
    }
    let mut out = vec![0.0; rho.len()];
    self_interaction_into(rho, rho_xx, params, &mut out);
    Ok(out)
}

/// O(ρ) with the second derivative computed by the three-point stencil
/// (Dirichlet ghost values 0 at both ends).
pub fn self_interaction_of(
    rho: &[f64],
    dx: f64,
    params: &FunctionalParams,
) -> Result<Vec<f64>, FieldError> {
    if !rho.iter().all(|v| v.is_finite()) {
        return Err(FieldError::NonFinite);
    }
    let rho_xx = stencil::second_derivative(rho, dx);
    self_interaction(rho, &rho_xx, params)
}

/// Interaction energy per area ∫ (b/2)ρ² + (c/2)ρ^(2+γ) + d(ρ′)² dx.
///
/// The gradient term is sampled at half-points, which makes it the exact
/// discrete potential of the −2dρ″ term in O(ρ).
pub fn interaction_energy_per_area(rho: &[f64], dx: f64, params: &FunctionalParams) -> f64 {
    let expo = 2.0 + params.gamma;
    let pointwise: Vec<f64> = rho
        .iter()
        .map(|&r| {
            let r = clamp_density(r);
            0.5 * params.b * r * r + 0.5 * params.c * r.powf(expo)
        })
        .collect();
    stencil::trapezoid(&pointwise, dx) + params.d * stencil::gradient_energy(rho, dx)
}

/// Total energy per area of a wave field,
/// ∫ (1/2m)|ψ′|² + (b/2)ρ² + (c/2)ρ^(2+γ) + d(ρ′)² dx, ρ = |ψ|².
///
/// Gradient terms at half-points, pointwise terms by the trapezoid rule.
/// With the three-point Laplacian of the dynamics this is the conserved
/// discrete Hamiltonian, so the conservation monitor measures integrator
/// error rather than quadrature noise.
pub fn energy_per_area(psi: &WaveField, params: &FunctionalParams) -> Result<f64, FieldError> {
    if !psi.values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(FieldError::NonFinite);
    }
    let dx = psi.grid.dx;
    let rho: Vec<f64> = psi.values.iter().map(|v| v.norm_sqr()).collect();
    let kinetic = params.kinetic() * stencil::gradient_energy_complex(&psi.values, dx);
    Ok(kinetic + interaction_energy_per_area(&rho, dx, params))
}

/// Madelung energy of a wave field: the total energy minus the quantum
/// pressure contribution (1/2m)∫((√ρ)′)² dx. This is the quantity the
/// quantum-potential-subtracted dynamics conserves.
pub fn hydrodynamic_energy_per_area(
    psi: &WaveField,
    params: &FunctionalParams,
) -> Result<f64, FieldError> {
    let total = energy_per_area(psi, params)?;
    let dx = psi.grid.dx;
    let sqrt_rho: Vec<f64> = psi.values.iter().map(|v| v.norm()).collect();
    Ok(total - params.kinetic() * stencil::gradient_energy(&sqrt_rho, dx))
}

/// The Madelung quantum potential −(1/2m)(√ρ)″/√ρ, with the density floor
/// applied inside the square root. The two boundary points are set to 0
/// (they are Dirichlet-pinned in the dynamics).
pub fn quantum_potential(rho: &[f64], dx: f64, params: &FunctionalParams) -> Vec<f64> {
    let n = rho.len();
    let mut out = vec![0.0; n];
    if n < 3 {
        return out;
    }
    let sqrt_rho: Vec<f64> = rho
        .iter()
        .map(|&r| clamp_density(r).max(RHO_FLOOR).sqrt())
        .collect();
    let inv = 1.0 / (dx * dx);
    let kc = params.kinetic();
    for i in 1..n - 1 {
        let s_xx = (sqrt_rho[i + 1] - 2.0 * sqrt_rho[i] + sqrt_rho[i - 1]) * inv;
        out[i] = -kc * s_xx / sqrt_rho[i];
    }
    out
}

/// Zero-pressure bulk density (−b/((1+γ)c))^(1/γ), Å⁻³: the uniform
/// density minimizing energy per particle.
pub fn bulk_density(params: &FunctionalParams) -> f64 {
    (-params.b / ((1.0 + params.gamma) * params.c)).powf(1.0 / params.gamma)
}

/// Bulk chemical potential b·ρ∞/2 + (c/2)·ρ∞^(1+γ), K: the energy per
/// particle at the bulk density.
pub fn bulk_chemical_potential(params: &FunctionalParams) -> f64 {
    let rho = bulk_density(params);
    0.5 * params.b * rho + 0.5 * params.c * rho.powf(1.0 + params.gamma)
}

/// Oscillation wavenumber √(−b/(2d)) of the linearized classical
/// stationary equation ρ″ = (b/2d)ρ near the vacuum, Å⁻¹.
pub fn classical_vacuum_wavenumber(params: &FunctionalParams) -> f64 {
    (-params.b / (2.0 * params.d)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params() -> FunctionalParams {
        FunctionalParams::helium4()
    }

    #[test]
    fn default_parameters_are_exact() {
        let p = params();
        assert_eq!(p.b, -888.81);
        assert_eq!(p.c, 1.04554e7);
        assert_eq!(p.gamma, 2.8);
        assert_eq!(p.d, 2383.0);
        p.validate().unwrap();
    }

    #[test]
    fn self_interaction_of_zero_density() {
        let p = params();
        let v = self_interaction(&[0.0; 64], &[0.0; 64], &p).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn self_interaction_at_bulk_equals_bulk_mu() {
        let p = params();
        let rho = vec![0.021836; 32];
        let v = self_interaction(&rho, &[0.0; 32], &p).unwrap();
        for &x in &v {
            assert_abs_diff_eq!(x, -7.15, epsilon = 0.01);
        }
        // exact identity at the true bulk density
        let rb = vec![bulk_density(&p); 32];
        let vb = self_interaction(&rb, &[0.0; 32], &p).unwrap();
        let mu = bulk_chemical_potential(&p);
        for &x in &vb {
            assert_abs_diff_eq!(x, mu, epsilon = 1e-10);
        }
    }

    #[test]
    fn self_interaction_rejects_non_finite() {
        let p = params();
        assert_eq!(
            self_interaction(&[0.0, f64::NAN], &[0.0, 0.0], &p),
            Err(FieldError::NonFinite)
        );
    }

    #[test]
    fn self_interaction_matches_analytic_cosine() {
        // rho = A (1 + cos kx)/2 on [-pi/k, pi/k]; rho and rho' vanish at the
        // ends so the Dirichlet stencil error stays second order inside.
        let p = params();
        let a = 0.02;
        let k = 0.5;
        let n = 801;
        let l = std::f64::consts::PI / k;
        let dx = 2.0 * l / (n - 1) as f64;
        let rho: Vec<f64> = (0..n)
            .map(|i| {
                let x = -l + i as f64 * dx;
                0.5 * a * (1.0 + (k * x).cos())
            })
            .collect();
        let got = self_interaction_of(&rho, dx, &p).unwrap();
        let cg = 0.5 * (2.0 + p.gamma) * p.c;
        for i in 2..n - 2 {
            let x = -l + i as f64 * dx;
            let rho_xx = -0.5 * a * k * k * (k * x).cos();
            let want = p.b * rho[i] + cg * rho[i].powf(1.0 + p.gamma) - 2.0 * p.d * rho_xx;
            assert_abs_diff_eq!(got[i], want, epsilon = 2.0 * p.d * a * k.powi(4) * dx * dx);
        }
    }

    #[test]
    fn bulk_density_reference_value() {
        let p = params();
        assert_abs_diff_eq!(bulk_density(&p), 0.021836, epsilon = 1e-5);
        // closed-form scaling when b is halved
        let mut ph = p;
        ph.b = p.b / 2.0;
        assert_relative_eq!(
            bulk_density(&ph),
            bulk_density(&p) * 0.5f64.powf(1.0 / p.gamma),
            epsilon = 1e-12
        );
    }

    #[test]
    fn bulk_density_minimizes_energy_per_particle() {
        let p = params();
        let e_per_particle = |rho: f64| 0.5 * p.b * rho + 0.5 * p.c * rho.powf(1.0 + p.gamma);
        let rho = bulk_density(&p);
        let h = 1e-7;
        let deriv = (e_per_particle(rho + h) - e_per_particle(rho - h)) / (2.0 * h);
        assert_abs_diff_eq!(deriv, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn bulk_chemical_potential_reference_value() {
        let p = params();
        let mu = bulk_chemical_potential(&p);
        assert_abs_diff_eq!(mu, -7.15, epsilon = 0.01);
        // at rho = 0 the energy per particle vanishes
        assert_eq!(0.5 * p.b * 0.0 + 0.5 * p.c * 0.0f64.powf(1.0 + p.gamma), 0.0);
    }

    #[test]
    fn classical_vacuum_wavenumber_value_and_scaling() {
        let p = params();
        let k = classical_vacuum_wavenumber(&p);
        assert_abs_diff_eq!(k, 0.4318, epsilon = 5e-4);
        let mut pd = p;
        pd.d = 2.0 * p.d;
        assert_relative_eq!(
            classical_vacuum_wavenumber(&pd),
            k / 2.0f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn classical_stationary_ode_oscillates_at_vacuum_wavenumber() {
        // integrate 2d rho'' = b rho + ((2+gamma)/2) c rho^(1+gamma) from a
        // small seed; the zero crossings should be spaced by pi/k
        let p = params();
        let dx = 0.01;
        let mut rho = 1e-5;
        let mut slope = 0.0;
        let f = |r: f64| {
            (p.b * r + 0.5 * (2.0 + p.gamma) * p.c * r.abs().powf(1.0 + p.gamma) * r.signum())
                / (2.0 * p.d)
        };
        let mut crossings = Vec::new();
        let mut x = 0.0;
        let mut prev = rho;
        for _ in 0..20_000 {
            // RK4 on (rho, slope)
            let k1 = (slope, f(rho));
            let k2 = (slope + 0.5 * dx * k1.1, f(rho + 0.5 * dx * k1.0));
            let k3 = (slope + 0.5 * dx * k2.1, f(rho + 0.5 * dx * k2.0));
            let k4 = (slope + dx * k3.1, f(rho + dx * k3.0));
            rho += dx / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            slope += dx / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            x += dx;
            if prev.signum() != rho.signum() {
                crossings.push(x);
            }
            prev = rho;
        }
        assert!(crossings.len() >= 4, "expected several oscillations");
        let spans: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = spans.iter().sum::<f64>() / spans.len() as f64;
        let expected = std::f64::consts::PI / classical_vacuum_wavenumber(&p);
        assert_relative_eq!(mean, expected, max_relative = 0.02);
    }

    #[test]
    fn quantum_potential_of_uniform_density_vanishes() {
        let p = params();
        let u = quantum_potential(&[0.015; 100], 0.1, &p);
        assert!(u.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn quantum_potential_of_gaussian() {
        let p = params();
        let sigma: f64 = 2.0;
        let n = 1201;
        let dx = 0.02;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 - 600.0) * dx).collect();
        let rho: Vec<f64> = xs.iter().map(|x| (-x * x / (2.0 * sigma * sigma)).exp()).collect();
        let u = quantum_potential(&rho, dx, &p);
        let kc = p.kinetic();
        for (i, &x) in xs.iter().enumerate() {
            if x.abs() > 5.0 {
                continue; // stay away from the floor region
            }
            let want = -kc * (x * x / (4.0 * sigma.powi(4)) - 1.0 / (2.0 * sigma * sigma));
            assert_abs_diff_eq!(u[i], want, epsilon = 1e-3);
        }
    }

    #[test]
    fn quantum_potential_of_sine_squared() {
        let p = params();
        let k: f64 = 0.7;
        let n = 2001;
        let dx = 0.01;
        let rho: Vec<f64> = (0..n).map(|i| (k * i as f64 * dx).sin().powi(2)).collect();
        let u = quantum_potential(&rho, dx, &p);
        let want = p.kinetic() * k * k;
        for i in 1..n - 1 {
            let s = (k * i as f64 * dx).sin().abs();
            if s > 0.3 {
                assert_relative_eq!(u[i], want, max_relative = 1e-3);
            }
        }
    }

    #[test]
    fn quantum_potential_scale_invariance() {
        let p = params();
        let n = 501;
        let dx = 0.05;
        let rho: Vec<f64> = (0..n)
            .map(|i| {
                let x = (i as f64 - 250.0) * dx;
                0.01 * (-x * x / 50.0).exp() + 1e-4
            })
            .collect();
        let base = quantum_potential(&rho, dx, &p);
        for &s in &[0.5, 2.0, 10.0] {
            let scaled: Vec<f64> = rho.iter().map(|&r| s * r).collect();
            let u = quantum_potential(&scaled, dx, &p);
            for i in 0..n {
                assert_abs_diff_eq!(u[i], base[i], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn functional_derivative_consistency() {
        // (E_int[rho+eps*d] - E_int[rho-eps*d])/(2 eps) == integral O(rho)*d dx
        let p = params();
        let n = 1001;
        let dx = 0.1;
        let rho: Vec<f64> = (0..n)
            .map(|i| {
                let x = (i as f64 - 500.0) * dx;
                0.02 * (-x * x / 200.0).exp()
            })
            .collect();
        // a few smooth compact perturbations
        for (amp, width, center) in [(1e-3, 5.0, -10.0), (2e-3, 8.0, 15.0), (5e-4, 3.0, 0.0)] {
            let delta: Vec<f64> = (0..n)
                .map(|i| {
                    let x = (i as f64 - 500.0) * dx - center;
                    amp * (-x * x / (width * width)).exp()
                })
                .collect();
            let eps = 1e-6;
            let plus: Vec<f64> = rho.iter().zip(&delta).map(|(r, d)| r + eps * d).collect();
            let minus: Vec<f64> = rho.iter().zip(&delta).map(|(r, d)| r - eps * d).collect();
            let fd = (interaction_energy_per_area(&plus, dx, &p)
                - interaction_energy_per_area(&minus, dx, &p))
                / (2.0 * eps);
            let o = self_interaction_of(&rho, dx, &p).unwrap();
            let inner: Vec<f64> = o.iter().zip(&delta).map(|(a, b)| a * b).collect();
            let want = stencil::trapezoid(&inner, dx);
            assert_relative_eq!(fd, want, max_relative = 1e-6);
        }
    }
}
