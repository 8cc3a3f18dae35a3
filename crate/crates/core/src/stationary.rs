//! Stationary drop profiles from the first integral of the stationary
//! equation.
//!
//! Choosing the center density ρ0 fixes the chemical potential through the
//! turning-point condition; the profile follows by marching
//! dρ/dx = −√(slope²) outward from the center and mirroring.

use crate::functional::{bulk_density, FunctionalParams};
use crate::grid::Grid;
use crate::stencil;
use thiserror::Error;

/// Density below which the march switches to the analytic exponential tail.
const TAIL_SWITCH: f64 = 1e-9;
/// Density at which the stored profile ends.
const PROFILE_END: f64 = 1e-12;
/// Longest half-profile span before declaring failure, Å.
const MAX_SPAN: f64 = 2000.0;
/// Series-start deviation from ρ0 that is safely above powf roundoff.
const START_DEVIATION: f64 = 3e-11;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("center density {rho0} outside (0, {bulk}); no localized profile exists")]
    CenterDensityOutOfRange { rho0: f64, bulk: f64 },
    #[error("march failed to leave the turning point at rho0 = {rho0}")]
    TurningPointStall { rho0: f64 },
    #[error("density failed to decay below {threshold:e} within {span} Å")]
    NonDecaying { threshold: f64, span: f64 },
}

/// A stationary drop: density samples on a symmetric grid centered at 0,
/// plus the derived observables.
#[derive(Debug, Clone)]
pub struct DensityProfile {
    /// Symmetric grid; `x_wall` here is just the right edge of the profile.
    pub grid: Grid,
    /// Density samples, Å⁻³.
    pub rho: Vec<f64>,
    /// Center density, Å⁻³.
    pub rho0: f64,
    /// Chemical potential, K.
    pub mu: f64,
    /// Particles per unit area ∫ρ dx, Å⁻².
    pub n_per_area: f64,
    /// Effective length N/ρ0, Å.
    pub x_eff: f64,
}

/// Chemical potential fixed by the turning-point condition at ρ0:
/// μ = b·ρ0/2 + (c/2)·ρ0^(1+γ).
pub fn mu_from_center_density(rho0: f64, params: &FunctionalParams) -> Result<f64, ProfileError> {
    let bulk = bulk_density(params);
    if !(rho0 > 0.0) || rho0 >= bulk {
        return Err(ProfileError::CenterDensityOutOfRange { rho0, bulk });
    }
    Ok(0.5 * params.b * rho0 + 0.5 * params.c * rho0.powf(1.0 + params.gamma))
}

/// Squared spatial slope of the density from the first integral:
/// (ρ′)² = (8mρ/(8mρd+1))·(−μρ + bρ²/2 + cρ^(2+γ)/2).
pub fn slope_squared(rho: f64, mu: f64, params: &FunctionalParams) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let m = params.mass();
    let g = -mu * rho
        + 0.5 * params.b * rho * rho
        + 0.5 * params.c * rho.powf(2.0 + params.gamma);
    8.0 * m * rho / (8.0 * m * rho * params.d + 1.0) * g
}

/// Cancellation-safe slope² used by the march. Writing
/// g = ρ(ρ−ρ0)[b/2 + (c/2)(ρ^(1+γ)−ρ0^(1+γ))/(ρ−ρ0)] keeps the value
/// accurate near the turning point, where the direct form of
/// [`slope_squared`] loses all significant digits once ρ0 approaches the
/// bulk density (the roundoff limit the march must survive).
fn slope_squared_factored(rho: f64, rho0: f64, pow_rho0: f64, params: &FunctionalParams) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let delta = rho - rho0;
    let expo = 1.0 + params.gamma;
    let ratio = if delta == 0.0 {
        return 0.0;
    } else {
        (rho.powf(expo) - pow_rho0) / delta
    };
    let g = rho * delta * (0.5 * params.b + 0.5 * params.c * ratio);
    let m = params.mass();
    8.0 * m * rho / (8.0 * m * rho * params.d + 1.0) * g
}

/// ρ″ at the turning point, from the full second-order stationary equation
/// with ρ′ = 0.
fn curvature_at_center(rho0: f64, mu: f64, params: &FunctionalParams) -> f64 {
    let num = params.b * rho0 + 0.5 * (2.0 + params.gamma) * params.c * rho0.powf(1.0 + params.gamma)
        - mu;
    let den = 2.0 * params.d + 1.0 / (4.0 * params.mass() * rho0);
    num / den
}

/// Solve the stationary profile for center density ρ0 on spacing `dx`.
///
/// The march starts on the series ρ(x) = ρ0 + ½ρ″(0)x², far enough from
/// the turning point to clear floating-point noise, integrates
/// dρ/dx = −√(slope²) with the classic fourth-order one-step method, and
/// switches to the analytic exponential tail below 1e-9 Å⁻³.
pub fn solve_profile(
    rho0: f64,
    dx: f64,
    params: &FunctionalParams,
) -> Result<DensityProfile, ProfileError> {
    let bulk = bulk_density(params);
    if !(rho0 > 0.0) || rho0 >= bulk - 1e-9 {
        return Err(ProfileError::CenterDensityOutOfRange { rho0, bulk });
    }
    let mu = mu_from_center_density(rho0, params)?;
    let curv = curvature_at_center(rho0, mu, params);
    if !(curv < 0.0) {
        return Err(ProfileError::TurningPointStall { rho0 });
    }
    // series start: pick the first grid node where the deviation from rho0
    // exceeds the roundoff-safe floor
    let x_safe = (2.0 * START_DEVIATION / -curv).sqrt();
    let start_steps = (x_safe / dx).ceil().max(1.0) as usize;
    let pow_rho0 = rho0.powf(1.0 + params.gamma);
    let f = |r: f64| -slope_squared_factored(r, rho0, pow_rho0, params).max(0.0).sqrt();

    let mut half = Vec::with_capacity(4096);
    half.push(rho0);
    for j in 1..=start_steps {
        let x = j as f64 * dx;
        half.push(rho0 + 0.5 * curv * x * x);
    }
    let mut r = *half.last().unwrap();
    while r > TAIL_SWITCH {
        let k1 = f(r);
        let k2 = f(r + 0.5 * dx * k1);
        let k3 = f(r + 0.5 * dx * k2);
        let k4 = f(r + dx * k3);
        let next = r + dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !(next < r) {
            return Err(ProfileError::TurningPointStall { rho0 });
        }
        r = next;
        half.push(r);
        if half.len() as f64 * dx > MAX_SPAN {
            return Err(ProfileError::NonDecaying {
                threshold: TAIL_SWITCH,
                span: MAX_SPAN,
            });
        }
    }
    // analytic tail: rho ~ exp(-kappa x) with kappa = sqrt(8 m |mu|)
    let kappa = (8.0 * params.mass() * mu.abs()).sqrt();
    let decay = (-kappa * dx).exp();
    while r > PROFILE_END {
        r *= decay;
        half.push(r);
    }

    let k = half.len() - 1;
    let mut rho = Vec::with_capacity(2 * k + 1);
    rho.extend(half.iter().rev());
    rho.extend(half.iter().skip(1));
    let l = k as f64 * dx;
    let grid = Grid::new(-l, l, 2 * k + 1).expect("profile grid");
    let n_per_area = stencil::trapezoid(&rho, dx);
    Ok(DensityProfile {
        grid,
        rho,
        rho0,
        mu,
        n_per_area,
        x_eff: n_per_area / rho0,
    })
}

impl DensityProfile {
    /// Density at signed offset `x` from the drop center, by monotone cubic
    /// (Fritsch–Carlson) interpolation of the half profile; 0 beyond the
    /// profile end. Evenness is built in through |x|.
    pub fn density_at(&self, x: f64) -> f64 {
        let k = self.grid.n / 2; // center index
        let half = &self.rho[k..];
        let h = self.grid.dx;
        let ax = x.abs();
        let last = (half.len() - 1) as f64 * h;
        if ax >= last {
            return 0.0;
        }
        pchip_eval(half, h, ax)
    }

    /// Resample the profile onto `grid`, centered at `x0`.
    pub fn resample(&self, grid: &Grid, x0: f64) -> Vec<f64> {
        grid.positions().map(|x| self.density_at(x - x0)).collect()
    }
}

/// Monotone cubic Hermite evaluation on uniformly spaced samples.
fn pchip_eval(y: &[f64], h: f64, x: f64) -> f64 {
    let n = y.len();
    debug_assert!(n >= 3);
    let j = ((x / h).floor() as usize).min(n - 2);
    let del = |k: usize| (y[k + 1] - y[k]) / h;
    let slope_at = |k: usize| -> f64 {
        if k == 0 {
            let m = 1.5 * del(0) - 0.5 * del(1);
            shape_clamp(m, del(0))
        } else if k == n - 1 {
            let m = 1.5 * del(n - 2) - 0.5 * del(n - 3);
            shape_clamp(m, del(n - 2))
        } else {
            let (d0, d1) = (del(k - 1), del(k));
            if d0 * d1 <= 0.0 {
                0.0
            } else {
                2.0 * d0 * d1 / (d0 + d1)
            }
        }
    };
    let t = (x - j as f64 * h) / h;
    let (y0, y1) = (y[j], y[j + 1]);
    let (m0, m1) = (slope_at(j) * h, slope_at(j + 1) * h);
    let t2 = t * t;
    let t3 = t2 * t;
    y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + m0 * (t3 - 2.0 * t2 + t)
        + y1 * (-2.0 * t3 + 3.0 * t2)
        + m1 * (t3 - t2)
}

fn shape_clamp(m: f64, del: f64) -> f64 {
    if m * del <= 0.0 {
        0.0
    } else if m.abs() > 3.0 * del.abs() {
        3.0 * del
    } else {
        m
    }
}
