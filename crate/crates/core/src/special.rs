//! Special functions in log domain, Gauss–Legendre rules and small helpers.

use statrs::function::gamma::{gamma_ur, ln_gamma};

/// `ln(m!)`, exact summation below 32 and `ln Γ(m + 1)` above.
pub fn ln_factorial(m: usize) -> f64 {
    if m < 32 {
        (2..=m).map(|k| (k as f64).ln()).sum()
    } else {
        ln_gamma(m as f64 + 1.0)
    }
}

/// `P(Poisson(mean) ≥ dim)`: the mass of a coherent state with
/// `|α|² = mean` carried by the basis vectors at or beyond `dim`.
pub fn poisson_tail(mean: f64, dim: usize) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    if dim == 0 {
        return 1.0;
    }
    // P(N ≥ D) = P(D, mean), the regularized lower incomplete gamma.
    if mean > dim as f64 + 50.0 {
        return (1.0 - gamma_ur(dim as f64, mean)).clamp(0.0, 1.0);
    }
    lower_gamma_series(dim as f64, mean)
}

// Series for the regularized lower gamma, accurate when the result is tiny.
fn lower_gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    for k in 1..10_000 {
        term *= x / (a + k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    (a * x.ln() - x - ln_gamma(a) + sum.ln()).exp().min(1.0)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// Polynomial extrapolation to `x = 0` by Neville's scheme.
///
/// Returns the extrapolated value and the change contributed by the last
/// tableau column, which serves as an error estimate.
pub fn neville_at_zero(xs: &[f64], ys: &[crate::C64]) -> (crate::C64, f64) {
    let n = xs.len();
    assert_eq!(n, ys.len());
    assert!(n >= 2);
    let mut p: Vec<crate::C64> = ys.to_vec();
    let mut last_change = 0.0;
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            let next = (p[i + 1] * xi - p[i] * xj) / (xi - xj);
            if i == 0 {
                last_change = (next - p[0]).norm();
            }
            p[i] = next;
        }
    }
    (p[0], last_change)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_matches_product() {
        assert!((ln_factorial(0)).abs() < 1e-15);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-13);
        let direct: f64 = (2..=40).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(40) - direct).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // ∫ x^18 = 2/19
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn poisson_tail_limits() {
        assert_eq!(poisson_tail(0.0, 4), 0.0);
        // P(N ≥ 1) = 1 - e^{-m}
        assert!((poisson_tail(2.0, 1) - (1.0 - (-2.0f64).exp())).abs() < 1e-14);
        let tiny = poisson_tail(2.0, 60);
        assert!(tiny > 0.0 && tiny < 1e-50);
    }

    #[test]
    fn neville_recovers_polynomial() {
        let xs = [0.1, 0.2, 0.3, 0.4];
        let ys: Vec<_> = xs.iter().map(|&x| crate::C64::new(1.0 + 2.0 * x - x * x * x, 0.0)).collect();
        let (v, _) = neville_at_zero(&xs, &ys);
        assert!((v.re - 1.0).abs() < 1e-13);
    }
}
