//! Chain geometry and transverse-field profiles.
//!
//! Sites are numbered `1..=N` (1-based) throughout the public interface, and
//! bonds couple `n` and `n + 1` for `n < N` (open chain).
//!
//! Tanh fronts use `g_n(t) = 1 + tanh[alpha (n - n_c(t))]` with `n_c = v t`
//! for a moving front. Behind the front (`n < n_c`) the chain is
//! ferromagnetic, ahead of it paramagnetic.

use crate::error::{Error, Result};

/// Default saturation margin for [`quench_window`].
pub const DEFAULT_MARGIN: f64 = 10.0;

/// `1 + tanh(x)` written as `2 / (1 + e^(-2x))`, which keeps full relative
/// precision deep in the ferromagnetic tail.
fn one_plus_tanh(x: f64) -> f64 {
    2.0 / (1.0 + (-2.0 * x).exp())
}

/// Open chain of `N >= 2` spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainGeometry {
    n_sites: usize,
}

impl ChainGeometry {
    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::Geometry(format!("need at least 2 sites, got {n_sites}")));
        }
        Ok(Self { n_sites })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_bonds(&self) -> usize {
        self.n_sites - 1
    }

    pub fn check_site(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_sites {
            return Err(Error::SiteOutOfRange { index: n, len: self.n_sites });
        }
        Ok(())
    }

    pub fn sites(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n_sites
    }
}

/// Transverse field `g_n(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldProfile {
    Uniform { g: f64 },
    /// Linear ramp `g(t) = 1 - (t - tau_q) / tau_q`, clamped to `[g_end, g_start]`.
    HomogeneousRamp { tau_q: f64, g_start: f64, g_end: f64 },
    StaticTanhFront { alpha: f64, n_c: f64 },
    MovingTanhFront { alpha: f64, v: f64 },
}

impl FieldProfile {
    pub fn uniform(g: f64) -> Result<Self> {
        let p = FieldProfile::Uniform { g };
        p.validate()?;
        Ok(p)
    }

    /// Ramp from `g = 2` to `g = 0`, crossing the critical point at `t = tau_q`.
    pub fn ramp(tau_q: f64) -> Result<Self> {
        Self::ramp_between(tau_q, 2.0, 0.0)
    }

    pub fn ramp_between(tau_q: f64, g_start: f64, g_end: f64) -> Result<Self> {
        let p = FieldProfile::HomogeneousRamp { tau_q, g_start, g_end };
        p.validate()?;
        Ok(p)
    }

    pub fn static_front(alpha: f64, n_c: f64) -> Result<Self> {
        let p = FieldProfile::StaticTanhFront { alpha, n_c };
        p.validate()?;
        Ok(p)
    }

    pub fn moving_front(alpha: f64, v: f64) -> Result<Self> {
        let p = FieldProfile::MovingTanhFront { alpha, v };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Profile(msg));
        match *self {
            FieldProfile::Uniform { g } => {
                if !g.is_finite() {
                    return bad(format!("g = {g} is not finite"));
                }
            }
            FieldProfile::HomogeneousRamp { tau_q, g_start, g_end } => {
                if !(tau_q > 0.0 && tau_q.is_finite()) {
                    return bad(format!("tau_q = {tau_q} must be positive"));
                }
                if !(g_start.is_finite() && g_end.is_finite()) || g_start <= g_end {
                    return bad(format!("ramp needs g_start > g_end, got {g_start} -> {g_end}"));
                }
            }
            FieldProfile::StaticTanhFront { alpha, n_c } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("alpha = {alpha} must be positive"));
                }
                if !n_c.is_finite() {
                    return bad(format!("n_c = {n_c} is not finite"));
                }
            }
            FieldProfile::MovingTanhFront { alpha, v } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("alpha = {alpha} must be positive"));
                }
                if !(v >= 0.0 && v.is_finite()) {
                    return bad(format!("v = {v} must be non-negative"));
                }
            }
        }
        Ok(())
    }

    /// Field at a (possibly fractional) position; no range check.
    pub fn value(&self, n: f64, t: f64) -> f64 {
        match *self {
            FieldProfile::Uniform { g } => g,
            FieldProfile::HomogeneousRamp { tau_q, g_start, g_end } => {
                (1.0 - (t - tau_q) / tau_q).clamp(g_end, g_start)
            }
            FieldProfile::StaticTanhFront { alpha, n_c } => one_plus_tanh(alpha * (n - n_c)),
            FieldProfile::MovingTanhFront { alpha, v } => one_plus_tanh(alpha * (n - v * t)),
        }
    }

    /// `g_n(t)` for site `n` in `1..=N`.
    pub fn field_at(&self, geometry: &ChainGeometry, n: usize, t: f64) -> Result<f64> {
        geometry.check_site(n)?;
        Ok(self.value(n as f64, t))
    }

    /// All fields `g_1(t) ..= g_N(t)` as a 0-based vector.
    pub fn fields(&self, geometry: &ChainGeometry, t: f64) -> Vec<f64> {
        geometry.sites().map(|n| self.value(n as f64, t)).collect()
    }

    /// Linearized distance from criticality; negative behind the front.
    pub fn local_epsilon(&self, n: f64, t: f64) -> f64 {
        match *self {
            FieldProfile::Uniform { g } => g - 1.0,
            FieldProfile::HomogeneousRamp { .. } => self.value(n, t) - 1.0,
            FieldProfile::StaticTanhFront { alpha, n_c } => alpha * (n - n_c),
            FieldProfile::MovingTanhFront { alpha, v } => alpha * (n - v * t),
        }
    }

    /// Front position `n_c(t)`, if the profile has a front.
    pub fn front_position(&self, t: f64) -> Option<f64> {
        match *self {
            FieldProfile::StaticTanhFront { n_c, .. } => Some(n_c),
            FieldProfile::MovingTanhFront { v, .. } => Some(v * t),
            _ => None,
        }
    }

    /// Largest `|g|` reached anywhere on the chain during `[t0, t1]`.
    pub fn max_field(&self, t0: f64, t1: f64) -> f64 {
        match *self {
            FieldProfile::Uniform { g } => g.abs(),
            FieldProfile::HomogeneousRamp { .. } => {
                self.value(0.0, t0).abs().max(self.value(0.0, t1).abs())
            }
            FieldProfile::StaticTanhFront { .. } | FieldProfile::MovingTanhFront { .. } => 2.0,
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        match *self {
            FieldProfile::HomogeneousRamp { .. } => true,
            FieldProfile::MovingTanhFront { v, .. } => v != 0.0,
            _ => false,
        }
    }
}

/// `tau_Q = 1 / (alpha v)` seen locally by a site as the front sweeps past.
pub fn effective_quench_time(alpha: f64, v: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Profile(format!("alpha = {alpha} must be positive")));
    }
    if v < 0.0 || v.is_nan() {
        return Err(Error::Profile(format!("v = {v} must be non-negative")));
    }
    if v == 0.0 {
        return Err(Error::StaticFront);
    }
    Ok(1.0 / (alpha * v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub margin: f64,
}

/// Time window over which a moving front crosses the whole chain.
///
/// The front starts `margin / alpha` sites before site 1 and stops
/// `margin / alpha` sites past site N, so the field at both ends is within
/// `2 exp(-2 margin)` of its saturated value.
pub fn quench_window(
    profile: &FieldProfile,
    geometry: &ChainGeometry,
    margin: f64,
) -> Result<QuenchWindow> {
    let FieldProfile::MovingTanhFront { alpha, v } = *profile else {
        return Err(Error::Profile("quench window needs a moving tanh front".into()));
    };
    profile.validate()?;
    if v == 0.0 {
        return Err(Error::StaticFront);
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::Profile(format!("margin = {margin} must be non-negative")));
    }
    let offset = margin / alpha;
    Ok(QuenchWindow {
        t_start: (1.0 - offset) / v,
        t_end: (geometry.n_sites() as f64 + offset) / v,
        margin,
    })
}

/// Window for either quench protocol: the tanh-front window above, or
/// `[tau_q (2 - g_start), tau_q (2 - g_end)]` for the homogeneous ramp.
pub fn window_for(
    profile: &FieldProfile,
    geometry: &ChainGeometry,
    margin: f64,
) -> Result<QuenchWindow> {
    match *profile {
        FieldProfile::MovingTanhFront { .. } => quench_window(profile, geometry, margin),
        FieldProfile::HomogeneousRamp { tau_q, g_start, g_end } => {
            profile.validate()?;
            Ok(QuenchWindow { t_start: tau_q * (2.0 - g_start), t_end: tau_q * (2.0 - g_end), margin })
        }
        _ => Err(Error::Profile("quench needs a moving front or a homogeneous ramp".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn field_on_the_front_is_critical() {
        let p = FieldProfile::moving_front(0.03, 2.7).unwrap();
        let t = 10.0;
        assert!((p.value(2.7 * t, t) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn static_front_one_slope_length_ahead() {
        let alpha = 2f64.powi(-5);
        let p = FieldProfile::static_front(alpha, 100.0).unwrap();
        let geo = ChainGeometry::new(200).unwrap();
        let g = p.field_at(&geo, 132, 0.0).unwrap();
        assert!((g - (1.0 + 1f64.tanh())).abs() < 1e-15);
        assert!((g - 1.76159).abs() < 1e-5);
    }

    #[test]
    fn uniform_and_out_of_range() {
        let geo = ChainGeometry::new(4).unwrap();
        let p = FieldProfile::uniform(2.0).unwrap();
        assert_eq!(p.field_at(&geo, 3, 123.0).unwrap(), 2.0);
        assert!(matches!(p.field_at(&geo, 0, 0.0), Err(Error::SiteOutOfRange { .. })));
        assert!(matches!(p.field_at(&geo, 5, 0.0), Err(Error::SiteOutOfRange { .. })));
        assert!(ChainGeometry::new(1).is_err());
    }

    #[test]
    fn epsilon_examples() {
        let p = FieldProfile::moving_front(0.1, 3.0).unwrap();
        assert_eq!(p.local_epsilon(6.0, 2.0), 0.0);
        let p = FieldProfile::static_front(2f64.powi(-4), 20.0).unwrap();
        assert_eq!(p.local_epsilon(28.0, 0.0), 0.5);
        let p = FieldProfile::uniform(0.3).unwrap();
        assert!((p.local_epsilon(1.0, 0.0) + 0.7).abs() < 1e-15);
    }

    #[test]
    fn quench_time_examples() {
        assert_eq!(effective_quench_time(2f64.powi(-6), 4.0).unwrap(), 16.0);
        assert_eq!(effective_quench_time(2f64.powi(-5), 1.0).unwrap(), 32.0);
        assert!(effective_quench_time(0.1, 1e12).unwrap() < 1e-10);
        assert!(matches!(effective_quench_time(0.1, 0.0), Err(Error::StaticFront)));
    }

    #[test]
    fn window_examples() {
        let geo = ChainGeometry::new(400).unwrap();
        let p = FieldProfile::moving_front(2f64.powi(-6), 4.0).unwrap();
        let w = quench_window(&p, &geo, 10.0).unwrap();
        assert_eq!(w.t_start, -159.75);
        assert_eq!(w.t_end, 260.0);
        let w0 = quench_window(&p, &geo, 0.0).unwrap();
        assert_eq!((w0.t_start, w0.t_end), (0.25, 100.0));
        // saturation at both ends
        let g1 = p.value(1.0, w.t_start);
        // equality up to the 2 e^-40 term, below one ulp
        assert!(g1 >= 2.0 - 2.0 * (-20f64).exp() - 1e-15);
        let gn = p.value(400.0, w.t_end);
        assert!(gn <= 2.0 * (-20f64).exp());
        let fixed = FieldProfile::moving_front(0.1, 0.0).unwrap();
        assert!(matches!(quench_window(&fixed, &geo, 10.0), Err(Error::StaticFront)));
    }

    #[test]
    fn ramp_crosses_at_tau_q() {
        let p = FieldProfile::ramp(64.0).unwrap();
        assert_eq!(p.value(3.0, 0.0), 2.0);
        assert_eq!(p.value(3.0, 64.0), 1.0);
        assert_eq!(p.value(3.0, 128.0), 0.0);
        assert_eq!(p.value(3.0, 500.0), 0.0);
        let geo = ChainGeometry::new(10).unwrap();
        let w = window_for(&p, &geo, DEFAULT_MARGIN).unwrap();
        assert_eq!((w.t_start, w.t_end), (0.0, 128.0));
    }

    #[test]
    fn invalid_profiles() {
        assert!(FieldProfile::moving_front(0.0, 1.0).is_err());
        assert!(FieldProfile::moving_front(0.1, -1.0).is_err());
        assert!(FieldProfile::ramp(0.0).is_err());
        assert!(FieldProfile::static_front(-1.0, 3.0).is_err());
    }

    proptest! {
        #[test]
        fn front_is_rigid(alpha in 0.001f64..0.5, v in 0.0f64..8.0, n in 1.0f64..1000.0,
                          t in -200.0f64..200.0, delta in -50.0f64..50.0) {
            let p = FieldProfile::moving_front(alpha, v).unwrap();
            let a = p.value(n, t);
            let b = p.value(n + v * delta, t + delta);
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn linearization_error_is_cubic(alpha in 0.001f64..0.5, v in 0.0f64..8.0,
                                        s in -0.5f64..0.5, t in -100.0f64..100.0) {
            let p = FieldProfile::moving_front(alpha, v).unwrap();
            let n = v * t + s / alpha;
            let g = p.value(n, t);
            let eps = p.local_epsilon(n, t);
            let x = alpha * (n - v * t);
            prop_assert!((g - 1.0 - eps).abs() <= x * x / 3.0 + 1e-12);
        }

        #[test]
        fn quench_time_product_is_one(alpha in 1e-4f64..1.0, v in 1e-3f64..100.0) {
            let tq = effective_quench_time(alpha, v).unwrap();
            prop_assert!((tq * alpha * v - 1.0).abs() < 1e-15);
        }

        #[test]
        fn moving_front_never_increases(alpha in 0.001f64..0.5, v in 0.0f64..8.0,
                                        n in 1.0f64..500.0, t in -100.0f64..100.0, dt in 0.0f64..10.0) {
            let p = FieldProfile::moving_front(alpha, v).unwrap();
            prop_assert!(p.value(n, t + dt) <= p.value(n, t));
        }
    }
}
