//! Pointwise nonlinearity functionals.
//!
//! For the pure power `f(y) = y^σ` the primitives are closed form:
//! `F(y) = y^{σ+1}/(σ+1)` and `G(y) = y f(y) − F(y) = σ F(y)`. The saturated
//! family `f(y) = y^σ / (1 + (δy)^σ)` is evaluated with the same interface;
//! its primitive `F` comes from adaptive quadrature and `G = y f − F`.

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::quad::integrate_adaptive;

const PRIMITIVE_TOL: f64 = 1e-12;

/// Selects one of the pointwise functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    /// `f(y)`, the coupling `|u|^{2σ}` written in `y = |u|²`.
    Coupling,
    /// `F(y) = ∫₀^y f`.
    Potential,
    /// `G(y) = y f(y) − F(y)`.
    Pressure,
    /// `f′(y)`.
    CouplingSlope,
    /// `G′(y) = y f′(y)`.
    PressureSlope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityFns {
    sigma: u32,
    delta: f64,
}

/// Second-order Taylor remainders of `G` and `F` between two densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderComparison {
    pub g_rem: f64,
    pub f_rem: f64,
    pub ratio: f64,
}

impl NonlinearityFns {
    pub fn new(sigma: u32, delta: f64) -> Result<Self> {
        if sigma == 0 {
            return Err(config("nonlinearity exponent σ must be an integer ≥ 1"));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(config(format!("saturation δ must be finite and ≥ 0, got {delta}")));
        }
        Ok(Self { sigma, delta })
    }

    pub fn pure_power(sigma: u32) -> Result<Self> {
        Self::new(sigma, 0.0)
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_saturated(&self) -> bool {
        self.delta > 0.0
    }

    fn s(&self) -> i32 {
        self.sigma as i32
    }

    fn denom(&self, y: f64) -> f64 {
        1.0 + (self.delta * y).powi(self.s())
    }

    /// `f(y)`. No domain check; `y` is expected to be ≥ 0.
    pub fn f(&self, y: f64) -> f64 {
        let p = y.powi(self.s());
        if self.is_saturated() {
            p / self.denom(y)
        } else {
            p
        }
    }

    pub fn f_prime(&self, y: f64) -> f64 {
        let s = self.s();
        let p = f64::from(self.sigma) * y.powi(s - 1);
        if self.is_saturated() {
            let d = self.denom(y);
            p / (d * d)
        } else {
            p
        }
    }

    pub fn f_second(&self, y: f64) -> f64 {
        let s = self.s();
        let sf = f64::from(self.sigma);
        let lead = if s >= 2 { (sf - 1.0) * y.powi(s - 2) } else { 0.0 };
        if !self.is_saturated() {
            return sf * lead;
        }
        let d = self.denom(y);
        let tail = (sf + 1.0) * self.delta.powi(s) * y.powi(2 * s - 2);
        sf * (lead - tail) / (d * d * d)
    }

    /// `F(y)`.
    pub fn big_f(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if self.is_saturated() {
            integrate_adaptive(|z| self.f(z), 0.0, y, PRIMITIVE_TOL)
        } else {
            y.powi(self.s() + 1) / f64::from(self.sigma + 1)
        }
    }

    /// `G(y) = y f(y) − F(y)`.
    pub fn g(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if self.is_saturated() {
            y * self.f(y) - self.big_f(y)
        } else {
            f64::from(self.sigma) * self.big_f(y)
        }
    }

    /// `F″ = f′`.
    pub fn potential_second(&self, y: f64) -> f64 {
        self.f_prime(y)
    }

    /// `G″ = f′ + y f″`.
    pub fn pressure_second(&self, y: f64) -> f64 {
        self.f_prime(y) + y * self.f_second(y)
    }

    pub fn eval(&self, which: Which, y: f64) -> Result<f64> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(domain(format!("nonlinearity functionals need y ≥ 0, got {y}")));
        }
        Ok(match which {
            Which::Coupling => self.f(y),
            Which::Potential => self.big_f(y),
            Which::Pressure => self.g(y),
            Which::CouplingSlope => self.f_prime(y),
            Which::PressureSlope => y * self.f_prime(y),
        })
    }

    /// `F(ρ′) − F(ρ) − (ρ′ − ρ) f(ρ)`, the Bregman divergence of `F`.
    ///
    /// Nonnegative by construction: the pure power uses the factored form
    /// `(ρ′−ρ)² Σ_j (σ−j) ρ′^j ρ^{σ−1−j} / (σ+1)`, the saturated case the
    /// integral form of the Taylor remainder.
    pub fn potential_remainder(&self, rho_p: f64, rho: f64) -> f64 {
        if self.is_saturated() {
            return taylor_remainder(|y| self.potential_second(y), rho_p, rho);
        }
        let d = rho_p - rho;
        let s = self.s();
        let sum: f64 = (0..s)
            .map(|j| f64::from(s - j) * rho_p.powi(j) * rho.powi(s - 1 - j))
            .sum();
        d * d * sum / f64::from(self.sigma + 1)
    }

    /// Both second-order remainders in integral form and their ratio `G/F`.
    /// When the ratio is `0/0` its limit `G″(ρ)/F″(ρ)` is reported (`σ` when
    /// both second derivatives vanish as well).
    pub fn remainder_comparison(&self, rho_p: f64, rho: f64) -> Result<RemainderComparison> {
        if !(rho_p >= 0.0 && rho >= 0.0) || !rho_p.is_finite() || !rho.is_finite() {
            return Err(domain("remainder comparison needs finite densities ≥ 0"));
        }
        let g_rem = taylor_remainder(|y| self.pressure_second(y), rho_p, rho);
        let f_rem = taylor_remainder(|y| self.potential_second(y), rho_p, rho);
        let ratio = if f_rem > 0.0 {
            g_rem / f_rem
        } else {
            let (g2, f2) = (self.pressure_second(rho), self.potential_second(rho));
            if f2 > 0.0 {
                g2 / f2
            } else {
                f64::from(self.sigma)
            }
        };
        Ok(RemainderComparison { g_rem, f_rem, ratio })
    }
}

/// `(b − a)² ∫₀¹ (1−θ) φ″(a + θ(b − a)) dθ` for a given second derivative.
fn taylor_remainder(second: impl Fn(f64) -> f64, b: f64, a: f64) -> f64 {
    let d = b - a;
    if d == 0.0 {
        return 0.0;
    }
    let scale = second(a).abs().max(second(b).abs()).max(second(0.5 * (a + b)).abs());
    let tol = 1e-15 * scale.max(f64::MIN_POSITIVE);
    let integral = integrate_adaptive(|t| (1.0 - t) * second(a + t * d), 0.0, 1.0, tol);
    d * d * integral
}

/// `h(y) = y^σ/(1+y^σ)` and its exact first derivative.
fn h_and_prime(sigma: u32, y: f64) -> (f64, f64) {
    let s = sigma as i32;
    let p = y.powi(s);
    let d = 1.0 + p;
    (p / d, f64::from(sigma) * y.powi(s - 1) / (d * d))
}

/// Pointwise check of `y h″(y) = h′(y)(σ−1−(σ+1)y^σ)/(1+y^σ)` for
/// `h(y) = y^σ/(1+y^σ)`, with `h″` taken by central differences of the exact
/// `h′`. Returns `(y h″, rhs, residual)`.
pub fn h_identity_check(sigma: u32, y: f64) -> Result<(f64, f64, f64)> {
    if sigma == 0 {
        return Err(config("σ must be ≥ 1"));
    }
    if !(y >= 0.0) || !y.is_finite() {
        return Err(domain(format!("h-identity needs y ≥ 0, got {y}")));
    }
    let step = 1e-5 * y.max(1e-3);
    let (lo, hi) = if y > step { (y - step, y + step) } else { (y, y + 2.0 * step) };
    let h2 = if y > step {
        (h_and_prime(sigma, hi).1 - h_and_prime(sigma, lo).1) / (hi - lo)
    } else {
        // one-sided second-order stencil at the boundary
        let (p0, p1, p2) = (
            h_and_prime(sigma, y).1,
            h_and_prime(sigma, y + step).1,
            h_and_prime(sigma, y + 2.0 * step).1,
        );
        (-3.0 * p0 + 4.0 * p1 - p2) / (2.0 * step)
    };
    let lhs = y * h2;
    let s = sigma as i32;
    let p = y.powi(s);
    let rhs = h_and_prime(sigma, y).1 * (f64::from(sigma) - 1.0 - f64::from(sigma + 1) * p) / (1.0 + p);
    Ok((lhs, rhs, lhs - rhs))
}
