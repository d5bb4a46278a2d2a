//! Closed-form predictions: Kibble-Zurek scales for homogeneous and
//! inhomogeneous quenches, the harmonic-oscillator modes of a static front,
//! co-moving modes of a slow front, and the Landau-Zener kink density of a
//! fast one.
//!
//! Scaling laws carry unit prefactors; their exponents are exact rationals.

use num_rational::Rational64;

use crate::error::{Error, Result};

/// Maximal quasiparticle velocity of the critical Ising chain, which is the
/// sharp threshold separating suppressed and Landau-Zener excitation.
pub const ISING_THRESHOLD_VELOCITY: f64 = 2.0;

/// Default ultraviolet cutoff of the Landau-Zener momentum integral.
pub const DEFAULT_LAMBDA: f64 = 1.0;

/// Default number of trapezoid intervals on `[-Lambda, Lambda]`.
pub const DEFAULT_K_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CriticalExponents {
    pub z: Rational64,
    pub nu: Rational64,
    pub dim: u32,
}

impl CriticalExponents {
    pub fn new(z: Rational64, nu: Rational64, dim: u32) -> Result<Self> {
        let zero = Rational64::from_integer(0);
        if z <= zero || nu <= zero || dim == 0 {
            return Err(Error::Invalid(format!("invalid exponents z = {z}, nu = {nu}, D = {dim}")));
        }
        Ok(Self { z, nu, dim })
    }

    /// z = nu = D = 1.
    pub fn ising() -> Self {
        let one = Rational64::from_integer(1);
        Self { z: one, nu: one, dim: 1 }
    }

    pub fn is_ising(&self) -> bool {
        *self == Self::ising()
    }
}

fn pow_rational(base: f64, exponent: Rational64) -> f64 {
    base.powf(*exponent.numer() as f64 / *exponent.denom() as f64)
}

/// A unit-prefactor power law `magnitude = base^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scale {
    pub exponent: Rational64,
    pub magnitude: f64,
}

impl Scale {
    fn of(base: f64, exponent: Rational64) -> Self {
        Self { exponent, magnitude: pow_rational(base, exponent) }
    }
}

/// Freeze-out scales of a homogeneous quench, as powers of `tau_Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KZScales {
    pub eps_hat: Scale,
    pub t_hat: Scale,
    pub xi_hat: Scale,
    pub density: Scale,
}

pub fn kz_scales(exponents: &CriticalExponents, tau_q: f64) -> Result<KZScales> {
    if !(tau_q > 0.0) {
        return Err(Error::Invalid(format!("tau_q = {tau_q} must be positive")));
    }
    let CriticalExponents { z, nu, dim } = *exponents;
    let one = Rational64::from_integer(1);
    let denom = z * nu + one;
    Ok(KZScales {
        eps_hat: Scale::of(tau_q, -one / denom),
        t_hat: Scale::of(tau_q, z * nu / denom),
        xi_hat: Scale::of(tau_q, nu / denom),
        density: Scale::of(tau_q, -Rational64::from_integer(dim as i64) * nu / denom),
    })
}

/// Static-front ("KZM in space") scales, as powers of the slope `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceKZScales {
    pub xi_hat: Scale,
    pub delta_n: Scale,
    pub gap_hat: Scale,
    pub v_hat: Scale,
}

pub fn space_kz_scales(exponents: &CriticalExponents, alpha: f64) -> Result<SpaceKZScales> {
    if !(alpha > 0.0) {
        return Err(Error::Invalid(format!("alpha = {alpha} must be positive")));
    }
    let CriticalExponents { z, nu, .. } = *exponents;
    let one = Rational64::from_integer(1);
    let xi = Scale::of(alpha, -nu / (one + nu));
    Ok(SpaceKZScales {
        xi_hat: xi,
        delta_n: xi,
        gap_hat: Scale::of(alpha, z * nu / (one + nu)),
        v_hat: Scale::of(alpha, nu * (z - one) / (one + nu)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdVelocity {
    /// `v_hat ~ alpha^(nu (z-1) / (1+nu))`.
    pub in_alpha: Scale,
    /// `v_hat ~ tau_Q^(-(z-1) nu / (z nu + 1))`, when a quench time was given.
    pub in_tau_q: Option<Scale>,
    /// Threshold quench time `tau_Q_hat ~ alpha^(-(z nu + 1) / (1 + nu))`.
    pub tau_q_hat: Scale,
    /// Calibrated magnitude, known only for the Ising chain (`v_hat = 2`).
    pub calibrated: Option<f64>,
}

pub fn threshold_velocity(
    exponents: &CriticalExponents,
    alpha: f64,
    tau_q: Option<f64>,
) -> Result<ThresholdVelocity> {
    if !(alpha > 0.0) {
        return Err(Error::Invalid(format!("alpha = {alpha} must be positive")));
    }
    if let Some(t) = tau_q {
        if !(t > 0.0) {
            return Err(Error::Invalid(format!("tau_q = {t} must be positive")));
        }
    }
    let CriticalExponents { z, nu, .. } = *exponents;
    let one = Rational64::from_integer(1);
    Ok(ThresholdVelocity {
        in_alpha: Scale::of(alpha, nu * (z - one) / (one + nu)),
        in_tau_q: tau_q.map(|t| Scale::of(t, -(z - one) * nu / (z * nu + one))),
        tau_q_hat: Scale::of(alpha, -(z * nu + one) / (one + nu)),
        calibrated: exponents.is_ising().then_some(ISING_THRESHOLD_VELOCITY),
    })
}

/// Normalized Hermite function `psi_m(x)`, eigenmode of
/// `(-d^2/dx^2 + x^2) / 2` with eigenvalue `m + 1/2`. `m = -1` gives 0.
pub fn oscillator_mode(m: i64, x: f64) -> Result<f64> {
    if m < -1 {
        return Err(Error::Invalid(format!("oscillator index {m} < -1")));
    }
    if m == -1 {
        return Ok(0.0);
    }
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 0..m {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * x * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `omega_m = sqrt(8 m alpha)` for a static linearized front.
pub fn static_front_spectrum(alpha: f64, m: u32) -> f64 {
    (8.0 * m as f64 * alpha).sqrt()
}

/// Co-moving stationary mode of a front moving slower than the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingFrontMode {
    pub omega: f64,
    /// `arcsin(v/2) / 2`.
    pub phase: f64,
    /// `x_v = x_scale * (n - v t)`, with `x_scale = (1 - v^2/4)^(-1/4) sqrt(alpha)`.
    pub x_scale: f64,
}

pub fn moving_front_modes(alpha: f64, v: f64, m: u32) -> Result<MovingFrontMode> {
    if !(alpha > 0.0) || !(v >= 0.0) {
        return Err(Error::Invalid(format!("need alpha > 0 and v >= 0, got {alpha}, {v}")));
    }
    if v >= ISING_THRESHOLD_VELOCITY {
        return Err(Error::SuperThreshold(v));
    }
    let contraction = 1.0 - v * v / 4.0;
    Ok(MovingFrontMode {
        omega: contraction.powf(0.75) * static_front_spectrum(alpha, m),
        phase: 0.5 * (v / 2.0).asin(),
        x_scale: contraction.powf(-0.25) * alpha.sqrt(),
    })
}

/// Depth `(1 - v^2/4)^(1/4) / sqrt(alpha)` to which order leaks ahead of a
/// slow front.
pub fn penetration_depth(alpha: f64, v: f64) -> Result<f64> {
    if !(alpha > 0.0) || !(v >= 0.0) {
        return Err(Error::Invalid(format!("need alpha > 0 and v >= 0, got {alpha}, {v}")));
    }
    if v >= ISING_THRESHOLD_VELOCITY {
        return Err(Error::SuperThreshold(v));
    }
    Ok((1.0 - v * v / 4.0).powf(0.25) / alpha.sqrt())
}

/// Stretched quench time `tau_Q (1 - 4/v^2)^(-3/2)` seen by the Landau-Zener
/// problem of a super-threshold front.
pub fn stretched_quench_time(tau_q: f64, v: f64) -> Result<f64> {
    if v <= ISING_THRESHOLD_VELOCITY {
        return Err(Error::Invalid(format!("v = {v} is not above threshold")));
    }
    Ok(tau_q * (1.0 - 4.0 / (v * v)).powf(-1.5))
}

/// Landau-Zener excitation probability `exp(-pi / (2 delta_k))` with
/// `delta_k = 1 / (4 k^2 tau)`, i.e. `exp(-2 pi k^2 tau)`.
pub fn lz_probability(k: f64, tau_q_tilde: f64) -> f64 {
    (-2.0 * std::f64::consts::PI * k * k * tau_q_tilde).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LZConfig {
    pub lambda: f64,
    pub k_grid: usize,
}

impl Default for LZConfig {
    fn default() -> Self {
        Self { lambda: DEFAULT_LAMBDA, k_grid: DEFAULT_K_GRID }
    }
}

impl LZConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= std::f64::consts::PI) {
            return Err(Error::Invalid(format!("Lambda = {} must lie in (0, pi]", self.lambda)));
        }
        if self.k_grid < 2 {
            return Err(Error::Invalid(format!("k_grid = {} too coarse", self.k_grid)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `v <= 2`: the front outruns no quasiparticle, predicted density 0.
    BelowThreshold,
    AboveThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinkPrediction {
    pub regime: Regime,
    pub tau_q: f64,
    pub d_closed: f64,
    pub d_numeric: f64,
    pub d_kzm: f64,
}

/// Homogeneous Kibble-Zurek density `1 / (2 pi sqrt(2 tau_Q))`.
pub fn kzm_density(tau_q: f64) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * (2.0 * tau_q).sqrt())
}

/// Trapezoid rule for `int_{-Lambda}^{Lambda} dk/(2 pi) p_k`.
pub fn lz_density_numeric(tau_q_tilde: f64, config: &LZConfig) -> f64 {
    let n = config.k_grid;
    let h = 2.0 * config.lambda / n as f64;
    let mut sum = 0.5 * (lz_probability(-config.lambda, tau_q_tilde) + lz_probability(config.lambda, tau_q_tilde));
    for i in 1..n {
        sum += lz_probability(-config.lambda + i as f64 * h, tau_q_tilde);
    }
    sum * h / (2.0 * std::f64::consts::PI)
}

/// Kink density left behind by a front of slope `alpha` and velocity `v`.
pub fn predict_kink_density(alpha: f64, v: f64, config: &LZConfig) -> Result<KinkPrediction> {
    config.validate()?;
    let tau_q = crate::model::effective_quench_time(alpha, v)?;
    let d_kzm = kzm_density(tau_q);
    if v <= ISING_THRESHOLD_VELOCITY {
        return Ok(KinkPrediction {
            regime: Regime::BelowThreshold,
            tau_q,
            d_closed: 0.0,
            d_numeric: 0.0,
            d_kzm,
        });
    }
    let tau_tilde = stretched_quench_time(tau_q, v)?;
    Ok(KinkPrediction {
        regime: Regime::AboveThreshold,
        tau_q,
        d_closed: (1.0 - 4.0 / (v * v)).powf(0.75) * d_kzm,
        d_numeric: lz_density_numeric(tau_tilde, config),
        d_kzm,
    })
}
