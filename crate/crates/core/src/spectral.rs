//! Frequency-domain solution of the RC long chain.
//!
//! In the frequency domain the chain's node voltages obey the three-term
//! recurrence `(2 + RCjω)·V̇ᵢ = V̇ᵢ₋₁ + V̇ᵢ₊₁` with characteristic roots
//!
//! ```text
//! a = 1 + RCjω/2 + sqrt(-R²C²ω²/4 + RCjω),   b = 1/a   (a·b = 1 exactly)
//! ```
//!
//! The port admittance Ẏₙ(ω) = İ/V̇₀ is evaluated through the ratio
//!
//! ```text
//! Ḣₙ = ((τb − 1)/(τa − 1))·(b/a)^(n−1),   τ = 1 + RCjω
//! Ẏₙ = ((τ − b) + (a − τ)·Ḣₙ) / (1 − Ḣₙ) · 1/R
//! ```
//!
//! which never raises `a` to a positive power: `|b/a| = 1/|a|² ≤ 1`, so the
//! power term can only shrink. Two algebraic identities remove the
//! remaining cancellations: `τ − b = x/2 + s` and `τ − a = −x/(x/2 + s)`
//! with `x = RCjω` and `s` the principal square root, both sums of
//! same-signed parts. Below `|x| = 1e-12` the closed form loses digits to
//! the `1 + Ḣₙ ≈ 0` cancellation and a two-term series takes over:
//! `Ẏₙ/ω = (n+1)Cj + κRC²ω + O(ω²)`, `κ = n(n+1)(2n+1)/6`.
//!
//! One-step current coefficients come from damping the port voltage with a
//! Gaussian window `e^(-M²t²)` so its Fourier transform exists, then
//! transforming back at `t = s`:
//!
//! ```text
//! I(s) = Fₙ(s)·Δv/s + Gₙ(s)·v
//! Fₙ(s) = (-j/(4√π)) ∫ λ²·(Ẏₙ(λM)/(λM))·exp(-λ²/4 + jλMs) dλ
//! Gₙ(s) = (M/(2√π)) ∫ λ·(Ẏₙ(λM)/(λM))·exp(-λ²/4 + jλMs) dλ
//! ```
//!
//! over λ ∈ [-25, 25]; the window makes the damped V₀ vanish for t > s, so
//! causality holds without touching Ẏₙ. The alternative is to force a
//! causal impulse response Yₙ(t)·θ(t) directly in the frequency domain:
//! with θ̂(ν) = πδ(ν) + 1/(jν) the corrected response is the convolution
//! π(Ẏₙ(ω) − j·H[Ẏₙ](ω)), H the Hilbert transform. That route needs a
//! principal-value integral per frequency and is documented here for
//! completeness only; the damped-window route is the one computed.
//!
//! A truncated plain-linear V₀ (zero outside [0, s]) is tempting but its
//! transform decays like 1/ω while Ẏₙ(ω) grows like ω, so the F/G
//! integrals would not converge absolutely; the Gaussian window avoids
//! that entirely.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;

/// Quadrature targets for the F/G integrals, applied to the normalized
/// (capacitance-scaled) integrands.
const QUAD_EPS_ABS: f64 = 1e-12;
const QUAD_EPS_REL: f64 = 1e-9;

/// Below this |RCω| the closed form yields to the series path.
const SERIES_X_THRESHOLD: f64 = 1e-12;

/// Integration window in λ = ω/M units.
const LAMBDA_LIMIT: f64 = 25.0;

/// Parameters of one spectral evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    /// Series resistor count, n ≥ 1.
    pub n: usize,
    pub r_ohms: f64,
    pub c_farads: f64,
    /// Gaussian damping rate M (1/s), clamped into [1, 1e-6/s].
    pub m_damping: f64,
    /// Simulation time step s (seconds).
    pub step_s: f64,
}

impl SpectralParams {
    /// Build params with the default damping M = 1e-8/s (1e4 when
    /// s = 1e-12), clamped into the admissible band [1, 1e-6/s].
    pub fn new(n: usize, r_ohms: f64, c_farads: f64, step_s: f64) -> SpectralParams {
        Self::with_damping(n, r_ohms, c_farads, step_s, 1e-8 / step_s)
    }

    /// Build params with an explicit damping rate, clamped into
    /// [1, 1e-6/s].
    pub fn with_damping(
        n: usize,
        r_ohms: f64,
        c_farads: f64,
        step_s: f64,
        m_damping: f64,
    ) -> SpectralParams {
        assert!(n >= 1, "n must be >= 1");
        assert!(
            r_ohms > 0.0 && c_farads > 0.0 && step_s > 0.0,
            "R, C, s must be positive"
        );
        let m = m_damping.clamp(1.0, 1e-6 / step_s);
        SpectralParams {
            n,
            r_ohms,
            c_farads,
            m_damping: m,
            step_s,
        }
    }
}

/// One-step current coefficients `I(s) = F·Δv/s + G·v` with quadrature
/// error estimates. Imaginary residue of each integral is folded into its
/// error term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgCoefficients {
    pub f: f64,
    pub g: f64,
    pub f_err_abs: f64,
    pub g_err_abs: f64,
}

/// Characteristic roots of the chain recurrence at `ω`. Returns `(a, b)`
/// on the principal square-root branch, with `b = 1/a` so `a·b = 1` holds
/// to rounding and `|b| ≤ |a|` always.
pub fn char_roots(r_ohms: f64, c_farads: f64, omega: f64) -> (Complex64, Complex64) {
    assert!(r_ohms > 0.0 && c_farads > 0.0);
    let x = Complex64::new(0.0, r_ohms * c_farads * omega);
    let s = (x + x * x * 0.25).sqrt();
    let a = Complex64::new(1.0, 0.0) + x * 0.5 + s;
    let b = a.finv();
    (a, b)
}

/// Stable building blocks shared by `admittance` and `h_n`:
/// `u = τ − b = x/2 + s` and `a`, both free of cancellation, with `s` on
/// the principal branch so `Re(a) ≥ 1`.
fn chain_roots_parts(x: Complex64) -> (Complex64, Complex64) {
    let s = (x + x * x * 0.25).sqrt();
    let u = x * 0.5 + s;
    let a = Complex64::new(1.0, 0.0) + u;
    (u, a)
}

/// Ḣₙ(ω) in the identity-reduced form `-x / (u²·a^(2n))` evaluated as
/// `(-x/(u²a²))·(1/a²)^(n-1)`.
pub(crate) fn h_n(n: usize, r_ohms: f64, c_farads: f64, omega: f64) -> Complex64 {
    let x = Complex64::new(0.0, r_ohms * c_farads * omega);
    if x.im == 0.0 {
        return Complex64::new(-1.0, 0.0);
    }
    let (u, a) = chain_roots_parts(x);
    let ratio = (a * a).finv();
    debug_assert!(
        ratio.norm() <= 1.0 + 1e-9,
        "|b/a| must not exceed 1, got {}",
        ratio.norm()
    );
    let q = -x / (u * u * a * a);
    q * ratio.powu((n - 1) as u32)
}

/// Port admittance Ẏₙ(ω). Zero at ω = 0 (removable); series path below
/// `|RCω| = 1e-12`, closed form elsewhere.
pub fn admittance(p: &SpectralParams, omega: f64) -> Complex64 {
    admittance_nrc(p.n, p.r_ohms, p.c_farads, omega)
}

pub(crate) fn admittance_nrc(n: usize, r_ohms: f64, c_farads: f64, omega: f64) -> Complex64 {
    let x_abs = (r_ohms * c_farads * omega).abs();
    if x_abs < SERIES_X_THRESHOLD {
        return ratio_series(n, r_ohms, c_farads, omega) * omega;
    }
    let x = Complex64::new(0.0, r_ohms * c_farads * omega);
    let (u, a) = chain_roots_parts(x);
    let ratio = (a * a).finv();
    assert!(
        ratio.norm() <= 1.0 + 1e-9,
        "|b/a| must not exceed 1, got {} at omega {omega}",
        ratio.norm()
    );
    let h = (-x / (u * u * a * a)) * ratio.powu((n - 1) as u32);
    // numerator (τ − b) + (a − τ)Ḣ with a − τ = x/u
    let numer = u + (x / u) * h;
    let denom = Complex64::new(1.0, 0.0) - h;
    numer / (denom * r_ohms)
}

/// Ẏₙ(ω)/ω with its removable zero filled in: `(n+1)Cj` at ω = 0, the
/// series `(n+1)Cj + κRC²ω` for small |RCω|.
pub fn admittance_ratio(p: &SpectralParams, omega: f64) -> Complex64 {
    let x_abs = (p.r_ohms * p.c_farads * omega).abs();
    if omega == 0.0 || x_abs < SERIES_X_THRESHOLD {
        ratio_series(p.n, p.r_ohms, p.c_farads, omega)
    } else {
        admittance_nrc(p.n, p.r_ohms, p.c_farads, omega) / omega
    }
}

fn ratio_series(n: usize, r_ohms: f64, c_farads: f64, omega: f64) -> Complex64 {
    let nf = n as f64;
    let kappa = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 6.0;
    Complex64::new(
        kappa * r_ohms * c_farads * c_farads * omega,
        (nf + 1.0) * c_farads,
    )
}

/// Reference admittance from a direct solve of the frequency-domain
/// system with V̇₀ = 1. Internally the solve runs in shifted unknowns
/// Ûᵢ = V̇ᵢ − V̇₀, which keeps İ = (x − Û₁)/R well conditioned when
/// RCω is small; the system itself is unchanged.
pub fn admittance_bruteforce(p: &SpectralParams, omega: f64) -> Complex64 {
    let u = bruteforce_shifted(p.n, p.r_ohms, p.c_farads, omega);
    let x = Complex64::new(0.0, p.r_ohms * p.c_farads * omega);
    (x - u[0]) / p.r_ohms
}

/// Node voltages V̇₁..V̇ₙ from the direct solve (V̇₀ = 1).
pub(crate) fn bruteforce_voltages(p: &SpectralParams, omega: f64) -> Vec<Complex64> {
    bruteforce_shifted(p.n, p.r_ohms, p.c_farads, omega)
        .into_iter()
        .map(|u| Complex64::new(1.0, 0.0) + u)
        .collect()
}

/// Solve the complex tridiagonal system for Ûᵢ = V̇ᵢ − 1:
/// rows 1..n-1: (2+x)Ûᵢ − Ûᵢ₋₁ − Ûᵢ₊₁ = −x (Û₀ = 0), row n:
/// (1+x)Ûₙ − Ûₙ₋₁ = −x. Thomas elimination; the matrix is strictly
/// diagonally dominant for ω ≠ 0 and the ω = 0 solution is identically 0.
fn bruteforce_shifted(n: usize, r_ohms: f64, c_farads: f64, omega: f64) -> Vec<Complex64> {
    assert!(n >= 1 && n <= 4096, "bruteforce solve limited to n <= 4096");
    let x = Complex64::new(0.0, r_ohms * c_farads * omega);
    let one = Complex64::new(1.0, 0.0);
    let rhs = -x;

    let diag = |i: usize| {
        if i == n - 1 {
            one + x
        } else {
            Complex64::new(2.0, 0.0) + x
        }
    };

    // Forward sweep with unit off-diagonals (-1).
    let mut c_prime = vec![Complex64::default(); n];
    let mut d_prime = vec![Complex64::default(); n];
    let mut den = diag(0);
    assert!(den.norm() > 0.0, "singular system");
    c_prime[0] = -one / den;
    d_prime[0] = rhs / den;
    for i in 1..n {
        den = diag(i) + c_prime[i - 1];
        assert!(den.norm() > 0.0, "singular system");
        if i < n - 1 {
            c_prime[i] = -one / den;
        }
        d_prime[i] = (rhs + d_prime[i - 1]) / den;
    }

    let mut u = vec![Complex64::default(); n];
    u[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        u[i] = d_prime[i] - c_prime[i] * u[i + 1];
    }
    u
}

/// Evaluate Fₙ(s) and Gₙ(s) by adaptive quadrature over λ ∈ [-25, 25].
///
/// The integrands are scaled by 1/C so the quadrature tolerances act on
/// O(1)..O(n) quantities regardless of the capacitance decade. Errors when
/// an estimate exceeds `1e-6·max(|F|, 1e-30)`, carrying the partial
/// values.
pub fn fn_gn(p: &SpectralParams) -> Result<FgCoefficients> {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let ms = p.m_damping * p.step_s;
    let c = p.c_farads;

    // Normalized ratio: (Ẏₙ(λM)/(λM)) / C, magnitude in [1, n+1].
    let rho = |lambda: f64| admittance_ratio(p, lambda * p.m_damping) / c;
    let phase = |lambda: f64| Complex64::cis(lambda * ms) * (-lambda * lambda / 4.0).exp();

    let f_int = quad::integrate(
        |lam| rho(lam) * phase(lam) * (lam * lam),
        -LAMBDA_LIMIT,
        LAMBDA_LIMIT,
        QUAD_EPS_ABS,
        QUAD_EPS_REL,
    );
    let g_int = quad::integrate(
        |lam| rho(lam) * phase(lam) * lam,
        -LAMBDA_LIMIT,
        LAMBDA_LIMIT,
        QUAD_EPS_ABS,
        QUAD_EPS_REL,
    );

    let f_scale = c / (4.0 * sqrt_pi);
    let g_scale = c * p.m_damping / (2.0 * sqrt_pi);

    // F = (-j/(4√π))·C·I_F. Hermitian symmetry makes I_F purely
    // imaginary, so F = C·Im(I_F)/(4√π); the residue goes into the error.
    let f_complex = Complex64::new(0.0, -1.0) * f_int.value * f_scale;
    let g_complex = g_int.value * g_scale;

    let fg = FgCoefficients {
        f: f_complex.re,
        g: g_complex.re,
        f_err_abs: f_scale * f_int.abs_err + f_complex.im.abs(),
        g_err_abs: g_scale * g_int.abs_err + g_complex.im.abs(),
    };

    let gate = 1e-6 * fg.f.abs().max(1e-30);
    if !f_int.converged || !g_int.converged || fg.f_err_abs > gate || fg.g_err_abs > gate {
        return Err(Error::QuadratureNotConverged { partial: fg });
    }
    Ok(fg)
}
