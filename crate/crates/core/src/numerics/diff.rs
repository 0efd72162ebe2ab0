//! Central finite differences and the Euler homogeneity residual.

/// Step used for coordinate `v`: `1e-5 · max(1, |v|)`.
pub fn fd_step(v: f64) -> f64 {
    1e-5 * v.abs().max(1.0)
}

/// Central first derivative of a scalar function.
pub fn central_derivative<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = fd_step(x);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central second derivative of a scalar function.
///
/// Uses a wider step (`1e-4 · max(1, |x|)`) than the first derivative, since
/// the rounding error grows like `ε/h²`.
pub fn central_second_derivative<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = 1e-4 * x.abs().max(1.0);
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// `|Σᵢ xᵢ ∂ᵢf(x) − degree · f(x)|`, partials by central differences.
///
/// Vanishes (up to finite-difference error) exactly when `f` is homogeneous of
/// the given degree in a neighbourhood of the ray through `x`.
pub fn homogeneity_residual<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], degree: f64) -> f64 {
    let mut probe = x.to_vec();
    let mut euler = 0.0;
    for i in 0..x.len() {
        if x[i] == 0.0 {
            continue;
        }
        let h = fd_step(x[i]);
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        euler += x[i] * (up - down) / (2.0 * h);
    }
    (euler - degree * f(x)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squared_norm_is_degree_two() {
        let f = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
        assert!(homogeneity_residual(f, &[1.0, 2.0], 2.0) <= 1e-6);
    }

    #[test]
    fn affine_shift_breaks_homogeneity() {
        let f = |v: &[f64]| v[0] * v[1] + 1.0;
        let r = homogeneity_residual(f, &[1.0, 1.0], 2.0);
        assert!((r - 2.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn bessel_rho_is_degree_two() {
        let rho = |v: &[f64]| -0.5 * v[0] * v[0];
        assert!(homogeneity_residual(rho, &[3.0], 2.0) <= 1e-5);
    }

    #[test]
    fn constant_has_degree_zero_exactly() {
        assert_eq!(homogeneity_residual(|_: &[f64]| 1.0, &[0.3, 2.0], 0.0), 0.0);
    }

    #[test]
    fn derivatives_of_smooth_functions() {
        let d = central_derivative(|x| x.sin(), 0.7);
        assert!((d - 0.7f64.cos()).abs() < 1e-9);
        let d2 = central_second_derivative(|x| x.sin(), 0.7);
        assert!((d2 + 0.7f64.sin()).abs() < 1e-6);
    }
}
