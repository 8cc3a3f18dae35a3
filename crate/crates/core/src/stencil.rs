//! Finite-difference stencils and quadrature shared by the functional and
//! dynamics modules.
//!
//! All stencils assume Dirichlet boundaries with ghost values of 0 beyond
//! both ends, matching the hard-wall closure of the dynamics grid.

use num_complex::Complex64;

/// Three-point second derivative with zero ghost values, written into `out`.
pub fn second_derivative_into(values: &[f64], dx: f64, out: &mut [f64]) {
    let n = values.len();
    assert_eq!(out.len(), n);
    if n == 0 {
        return;
    }
    let inv = 1.0 / (dx * dx);
    if n == 1 {
        out[0] = -2.0 * values[0] * inv;
        return;
    }
    out[0] = (values[1] - 2.0 * values[0]) * inv;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) * inv;
    }
    out[n - 1] = (values[n - 2] - 2.0 * values[n - 1]) * inv;
}

/// Three-point second derivative with zero ghost values.
pub fn second_derivative(values: &[f64], dx: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    second_derivative_into(values, dx, &mut out);
    out
}

/// Complex variant of [`second_derivative_into`].
pub fn second_derivative_complex_into(values: &[Complex64], dx: f64, out: &mut [Complex64]) {
    let n = values.len();
    assert_eq!(out.len(), n);
    if n == 0 {
        return;
    }
    let inv = 1.0 / (dx * dx);
    if n == 1 {
        out[0] = -2.0 * values[0] * inv;
        return;
    }
    out[0] = (values[1] - 2.0 * values[0]) * inv;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) * inv;
    }
    out[n - 1] = (values[n - 2] - 2.0 * values[n - 1]) * inv;
}

/// Two-point central first derivative with zero ghost values.
pub fn first_derivative(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let inv = 1.0 / (2.0 * dx);
    out[0] = values[1] * inv;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) * inv;
    }
    out[n - 1] = -values[n - 2] * inv;
    out
}

/// Trapezoid-rule integral of uniformly sampled values.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.5 * (values[0] + values[n - 1]);
    for v in &values[1..n - 1] {
        acc += v;
    }
    acc * dx
}

/// Midpoint-rule integral of |f′|² from half-point differences.
///
/// This sampling makes the gradient energy the exact discrete conjugate of
/// the three-point Laplacian, so the semi-discrete dynamics conserves it.
pub fn gradient_energy_complex(values: &[Complex64], dx: f64) -> f64 {
    let mut acc = 0.0;
    for w in values.windows(2) {
        acc += (w[1] - w[0]).norm_sqr();
    }
    acc / dx
}

/// Real-field variant of [`gradient_energy_complex`].
pub fn gradient_energy(values: &[f64], dx: f64) -> f64 {
    let mut acc = 0.0;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        acc += d * d;
    }
    acc / dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn second_derivative_of_sine_on_dirichlet_grid() {
        // sin(k x) on [0, pi/k] vanishes at both ends, so ghost zeros are exact
        let n = 201;
        let k = 2.0;
        let l = std::f64::consts::PI / k;
        let dx = l / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| (k * i as f64 * dx).sin()).collect();
        let d2 = second_derivative(&vals, dx);
        for i in 1..n - 1 {
            let expected = -k * k * vals[i];
            assert_relative_eq!(d2[i], expected, epsilon = 1e-3, max_relative = 1e-3);
        }
    }

    #[test]
    fn trapezoid_of_parabola() {
        let n = 1001;
        let dx = 1.0 / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| (i as f64 * dx).powi(2)).collect();
        assert_relative_eq!(trapezoid(&vals, dx), 1.0 / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn gradient_energy_matches_central_form_on_smooth_field() {
        let n = 2001;
        let dx = 0.05;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let x = (i as f64 - 1000.0) * dx;
                (-x * x / 8.0).exp()
            })
            .collect();
        let half = gradient_energy(&vals, dx);
        let central: f64 = first_derivative(&vals, dx).iter().map(|g| g * g).sum::<f64>() * dx;
        assert_relative_eq!(half, central, max_relative = 1e-3);
    }
}
