//! Gauss–Hermite quadrature for expectations against the standard normal.
//!
//! Nodes and weights for the physicists' weight `e^{-x²}` are found by
//! Newton iteration on the orthonormal Hermite recurrence (stable up to high
//! orders since the orthonormal values stay O(1)). For a standard normal `U`
//! the substitution `u = √2·x` gives
//! `E f(U) = (1/√π) Σ_i w_i f(√2 x_i)`.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Result<Self> {
        // The root-stepping initial guesses degrade beyond ~128 nodes.
        if !(1..=128).contains(&order) {
            return Err(Error::Config(format!("quadrature order {order} out of range (1..=128)")));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let mut z = 0.0f64;
        for i in 0..m {
            // Initial guesses, largest root first.
            z = match i {
                0 => {
                    let an = n as f64;
                    (2.0 * an + 1.0).sqrt() - 1.85575 * (2.0 * an + 1.0).powf(-1.0 / 6.0)
                }
                1 => z - 1.14 * (n as f64).powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..200 {
                // Orthonormal recurrence: p0 = π^{-1/4}.
                let mut p1 = std::f64::consts::PI.powf(-0.25);
                let mut p2 = 0.0f64;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                // p_n'(z) = sqrt(2n)·p_{n-1}(z).
                pp = (2.0 * n as f64).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        if n % 2 == 1 {
            nodes[m - 1] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `∫ f(x) e^{-x²} dx`.
    pub fn integrate_weighted(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `E f(U)` for `U ~ N(0, 1)`.
    pub fn normal_expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        let sqrt2 = std::f64::consts::SQRT_2;
        self.integrate_weighted(|x| f(sqrt2 * x)) / std::f64::consts::PI.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_mass_and_moments() {
        let gh = GaussHermite::new(64).unwrap();
        assert!((gh.normal_expectation(|_| 1.0) - 1.0).abs() < 1e-13);
        assert!(gh.normal_expectation(|u| u).abs() < 1e-13);
        assert!((gh.normal_expectation(|u| u * u) - 1.0).abs() < 1e-12);
        assert!((gh.normal_expectation(|u| u.powi(4)) - 3.0).abs() < 1e-11);
        // Kinked integrands converge slowly (~5e-3 at order 64); anything
        // needing the absolute moment accurately goes through the erf
        // closed forms instead.
        let e_abs = (2.0 / std::f64::consts::PI).sqrt();
        assert!((gh.normal_expectation(f64::abs) - e_abs).abs() < 2e-2);
    }

    #[test]
    fn smooth_exponential_integrand_high_accuracy() {
        // E e^{tU} = e^{t²/2}: entire integrand, spectral convergence.
        let gh = GaussHermite::new(64).unwrap();
        for t in [0.3f64, 1.0, 2.0] {
            let exact = (0.5 * t * t).exp();
            let got = gh.normal_expectation(|u| (t * u).exp());
            assert!((got - exact).abs() < 1e-12 * exact, "t = {t}");
        }
    }

    #[test]
    fn odd_orders_have_zero_node() {
        let gh = GaussHermite::new(7).unwrap();
        assert!(gh.nodes.contains(&0.0));
        assert!((gh.normal_expectation(|u| u * u) - 1.0).abs() < 1e-12);
    }
}
