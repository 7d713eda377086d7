//! Closed forms for the Brownian-switching game.
//!
//! With discount rate `α` and `γ = √(2α)`:
//!
//! * exactly compensated costs `K(z, t) = −2z/α` make every control worth
//!   `V(x) = x/α`;
//! * the fair-switch kernel
//!   `K(z, t) = ∫ [(|√t·u − z| − |z|)/α + (e^{−γ|√t·u−z|} − e^{−γ|z|})/(αγ)] φ(u) du`
//!   makes the value `V(x) = ψ(|x|)` with `ψ(y) = (γy + e^{−γy})/(αγ)`,
//!   approached by the wait-ε-then-switch-at-zero strategies as ε ↓ 0.
//!
//! The kernel integrand is `h(√t·u − z) − h(z)` for `h = ψ(|·|)`, a kinked
//! function, and Gauss–Hermite quadrature converges only like ~5e-3 at order
//! 64 on kinks. Two evaluations are therefore provided:
//!
//! * [`k_case_b`] — quadrature of the displayed integrand, for the
//!   verification checker, whose residuals compare this kernel against the
//!   same-order quadrature of `h` and so stay at machine precision;
//! * [`k_case_b_exact`] — the erf closed form (absolute and exponential
//!   moments of a Gaussian), for the simulator, where an `O(5e-3)` kernel
//!   error charged at every switch would contaminate the value estimate.

use super::gauss::GaussHermite;

pub fn gamma_rate(alpha: f64) -> f64 {
    (2.0 * alpha).sqrt()
}

/// `ψ(y) = (γy + e^{−γy}) / (αγ)` for `y ≥ 0`.
pub fn psi(alpha: f64, y: f64) -> f64 {
    let g = gamma_rate(alpha);
    (g * y + (-g * y).exp()) / (alpha * g)
}

/// Candidate value function of the exactly-compensated case: `h(z) = z/α`.
pub fn h_case_a(alpha: f64, z: f64) -> f64 {
    z / alpha
}

/// Candidate value function of the fair-switch case: `h(z) = ψ(|z|)`.
pub fn h_case_b(alpha: f64, z: f64) -> f64 {
    psi(alpha, z.abs())
}

/// Second derivative of [`h_case_b`] (C² across the origin: both one-sided
/// limits equal `γ/α`).
pub fn h_case_b_dd(alpha: f64, z: f64) -> f64 {
    let g = gamma_rate(alpha);
    g * (-g * z.abs()).exp() / alpha
}

/// Switching cost of the exactly-compensated case.
pub fn k_case_a(alpha: f64, z: f64) -> f64 {
    -2.0 * z / alpha
}

/// Fair-switch cost via Gauss–Hermite quadrature of the displayed integrand
/// (see module docs for when to prefer the exact form).
pub fn k_case_b(alpha: f64, gh: &GaussHermite, z: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let g = gamma_rate(alpha);
    let rt = t.sqrt();
    let az = z.abs();
    gh.normal_expectation(|u| {
        let w = (rt * u - z).abs();
        (w - az) / alpha + ((-g * w).exp() - (-g * az).exp()) / (alpha * g)
    })
}

/// Fair-switch cost in closed form:
/// `K(z, t) = E ψ(|W|) − ψ(|z|)` for `W ~ N(−z, t)`, using the absolute and
/// exponential Gaussian moments.
pub fn k_case_b_exact(alpha: f64, z: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    expected_psi_abs(alpha, -z, t.sqrt()) - h_case_b(alpha, z)
}

/// `E ψ(|W|)` for `W ~ N(mu, sigma²)`:
/// `E|W| = σ√(2/π)·e^{−μ²/2σ²} + μ(1 − 2Φ(−μ/σ))` and
/// `E e^{−γ|W|} = e^{γμ+γ²σ²/2}Φ(−μ/σ−γσ) + e^{−γμ+γ²σ²/2}Φ(μ/σ−γσ)`.
pub fn expected_psi_abs(alpha: f64, mu: f64, sigma: f64) -> f64 {
    let g = gamma_rate(alpha);
    let r = mu / sigma;
    let e_abs = sigma * (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * r * r).exp()
        + mu * (1.0 - 2.0 * normal_cdf(-r));
    // exp(γμ + γ²σ²/2)·Φ(−μ/σ − γσ) computed in log space: the two factors
    // are huge × tiny for large arguments.
    let half = 0.5 * g * g * sigma * sigma;
    let e_exp = exp_times_cdf(g * mu + half, -r - g * sigma)
        + exp_times_cdf(-g * mu + half, r - g * sigma);
    (g * e_abs + e_exp) / (alpha * g)
}

/// `e^a · Φ(b)` without overflow: for very negative `b`, uses
/// `Φ(b) = erfc(−b/√2)/2` and folds the exponent into the scaled
/// complementary error function.
fn exp_times_cdf(a: f64, b: f64) -> f64 {
    if b > -8.0 {
        return a.exp() * normal_cdf(b);
    }
    let x = -b / std::f64::consts::SQRT_2; // large positive
    0.5 * (a - x * x).exp() * erfcx(x)
}

/// The optimal payoff of the fair-switch case started at offset `x`.
pub fn case_b_value(alpha: f64, x: f64) -> f64 {
    psi(alpha, x.abs())
}

// ---------------------------------------------------------------------------
// Error function and the standard normal CDF
// ---------------------------------------------------------------------------

/// `Φ(x)`, the standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `erf(x)` by Maclaurin series for small arguments and the continued
/// fraction of `erfc` (modified Lentz) for large ones; double precision
/// over the whole line.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 2.0 {
        erf_series(x)
    } else {
        1.0 - erfc_cf(x)
    }
}

pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Scaled complement `erfcx(x) = e^{x²}·erfc(x)` for `x ≥ 2`.
fn erfcx(x: f64) -> f64 {
    debug_assert!(x >= 2.0);
    erfc_cf_scaled(x)
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = (2/√π) Σ_k (−1)^k x^{2k+1} / (k! (2k+1)); converges fast for
    // x < 2 (worst case ~40 terms).
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= -x2 / k as f64;
        let add = term / (2 * k + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs().max(1e-300) || k > 200 {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

fn erfc_cf(x: f64) -> f64 {
    (-x * x).exp() * erfc_cf_scaled(x)
}

/// `e^{x²} erfc(x)` via the Laplace continued fraction
/// `erfc(x) = e^{−x²}/√π · 1/(x + 1/2/(x + 2/2/(x + 3/2/(x + …))))`,
/// evaluated by the modified Lentz algorithm.
fn erfc_cf_scaled(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    // b0 = x; a_k = k/2 for k ≥ 1, b_k = x.
    let mut k = 0usize;
    loop {
        let (a, b) = if k == 0 { (1.0, x) } else { (k as f64 / 2.0, x) };
        d = b + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 || k > 400 {
            break;
        }
        k += 1;
    }
    f / std::f64::consts::PI.sqrt()
}
