//! Measurements on Gaussian fermionic states.
//!
//! Majorana operators are ordered `(a_1, b_1, a_2, b_2, ...)` with
//! `a_n = c_n + c_n^dag` and `b_n = i (c_n^dag - c_n)`; index `2(n-1)` is
//! `a_n` and `2(n-1) + 1` is `b_n`. The covariance is
//! `Gamma[j][k] = (i/2) <[w_j, w_k]>`.
//!
//! With this ordering `<sigma^x_n> = -Gamma[a_n][b_n]` and the string
//! `sigma^z_m sigma^z_n` (`m < n`) is `(-1)^(n-m)` times the Pfaffian of the
//! contiguous block of `Gamma` running from `b_m` to `a_n`.

mod pfaffian;

pub use pfaffian::{pfaffian, pfaffian_view, ANTISYMMETRY_TOL};

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::model::FieldProfile;
use crate::static_solver::BogoliubovBasis;

pub type C64 = Complex<f64>;

/// Input unitarity accepted by [`covariance`].
pub const COVARIANCE_UNITARITY_TOL: f64 = 1e-8;

/// Modes with `omega` below this span the degenerate ground manifold and are
/// not counted as excitations.
pub const ZERO_MODE_TOL: f64 = 1e-8;

/// Default calibration half-distance of [`magnetization_profile`].
pub const DEFAULT_R_CAL: usize = 10;

#[derive(Debug, Clone)]
pub struct MajoranaCovariance {
    gamma: DMatrix<f64>,
}

#[inline]
fn ia(n: usize) -> usize {
    2 * (n - 1)
}

#[inline]
fn ib(n: usize) -> usize {
    2 * (n - 1) + 1
}

impl MajoranaCovariance {
    /// Wraps a raw 2N x 2N matrix after checking antisymmetry.
    pub fn from_matrix(gamma: DMatrix<f64>) -> Result<Self> {
        if gamma.nrows() != gamma.ncols() || gamma.nrows() % 2 == 1 || gamma.nrows() < 4 {
            return Err(Error::Invalid(format!(
                "covariance must be 2N x 2N with N >= 2, got {}x{}",
                gamma.nrows(),
                gamma.ncols()
            )));
        }
        let asym = (&gamma + gamma.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::NotAntisymmetric(asym));
        }
        Ok(Self { gamma })
    }

    /// Covariance of the vacuum of modes given as complex `u+ = u + v` and
    /// `u- = u - v` columns. No unitarity check.
    pub(crate) fn from_plus_minus(up: &DMatrix<C64>, um: &DMatrix<C64>) -> Self {
        // a_n carries u+, b_n carries -i u-; Gamma = -Im(W W^dag) = P Q^T - Q P^T
        let n = up.nrows();
        let modes = up.ncols();
        let mut p = DMatrix::<f64>::zeros(2 * n, modes);
        let mut q = DMatrix::<f64>::zeros(2 * n, modes);
        for m in 0..modes {
            for s in 0..n {
                let a = up[(s, m)];
                let b = um[(s, m)];
                p[(2 * s, m)] = a.re;
                q[(2 * s, m)] = a.im;
                // -i (x + i y) = y - i x
                p[(2 * s + 1, m)] = b.im;
                q[(2 * s + 1, m)] = -b.re;
            }
        }
        let g = &p * q.transpose();
        let mut gamma = &g - g.transpose();
        for j in 0..2 * n {
            gamma[(j, j)] = 0.0;
        }
        Self { gamma }
    }

    pub(crate) fn from_real_basis(basis: &BogoliubovBasis) -> Self {
        let n = basis.n_sites();
        let up = basis.u_plus();
        let um = basis.u_minus();
        // only a-b blocks are nonzero: Gamma[a_i][b_j] = -(u+ u-^T)[i][j]
        let g = &up * um.transpose();
        let mut gamma = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                gamma[(2 * i, 2 * j + 1)] = -g[(i, j)];
                gamma[(2 * j + 1, 2 * i)] = g[(i, j)];
            }
        }
        Self { gamma }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn n_sites(&self) -> usize {
        self.gamma.nrows() / 2
    }

    /// Largest entry of `|Gamma^2 + I|`; zero for a pure state.
    pub fn purity_defect(&self) -> f64 {
        let n = self.gamma.nrows();
        (&self.gamma * &self.gamma + DMatrix::<f64>::identity(n, n)).amax()
    }

    fn check_site(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_sites() {
            return Err(Error::SiteOutOfRange { index: n, len: self.n_sites() });
        }
        Ok(())
    }

    /// `<sigma^z_n sigma^z_{n+1}>` without range checks.
    fn nearest_neighbor_zz(&self, n: usize) -> f64 {
        -self.gamma[(ib(n), ia(n + 1))]
    }
}

/// Real and imaginary parts of `u+ = u + v` and `u- = u - v`.
fn split_plus_minus(u: &DMatrix<C64>, v: &DMatrix<C64>) -> [DMatrix<f64>; 4] {
    let (r, c) = u.shape();
    let mut parts = [DMatrix::zeros(r, c), DMatrix::zeros(r, c), DMatrix::zeros(r, c), DMatrix::zeros(r, c)];
    for j in 0..c {
        for i in 0..r {
            let (p, m) = (u[(i, j)] + v[(i, j)], u[(i, j)] - v[(i, j)]);
            parts[0][(i, j)] = p.re;
            parts[1][(i, j)] = p.im;
            parts[2][(i, j)] = m.re;
            parts[3][(i, j)] = m.im;
        }
    }
    parts
}

/// Bogoliubov unitarity defect of complex mode matrices:
/// the larger of `max|U^dag U + V^dag V - I|` and `max|U^T V + V^T U|`.
pub fn bogoliubov_defect(u: &DMatrix<C64>, v: &DMatrix<C64>) -> f64 {
    // U^dag U + V^dag V = (P^dag P + M^dag M) / 2 and U^T V + V^T U = (P^T P - M^T M) / 2
    // for P = u+, M = u-, evaluated with real products only
    let n = u.ncols();
    let [pr, pi, mr, mi] = split_plus_minus(u, v);
    let (prr, pii, pri) = (pr.tr_mul(&pr), pi.tr_mul(&pi), pr.tr_mul(&pi));
    let (mrr, mii, mri) = (mr.tr_mul(&mr), mi.tr_mul(&mi), mr.tr_mul(&mi));
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            let norm_re = 0.5 * (prr[(i, j)] + pii[(i, j)] + mrr[(i, j)] + mii[(i, j)]) - delta;
            let norm_im = 0.5 * (pri[(i, j)] - pri[(j, i)] + mri[(i, j)] - mri[(j, i)]);
            let anom_re = 0.5 * (prr[(i, j)] - pii[(i, j)] - mrr[(i, j)] + mii[(i, j)]);
            let anom_im = 0.5 * (pri[(i, j)] + pri[(j, i)] - mri[(i, j)] - mri[(j, i)]);
            worst = worst.max(norm_re.hypot(norm_im)).max(anom_re.hypot(anom_im));
        }
    }
    worst
}

/// Covariance of the state annihilated by every quasiparticle of `(U, V)`.
pub fn covariance(u: &DMatrix<C64>, v: &DMatrix<C64>) -> Result<MajoranaCovariance> {
    if u.shape() != v.shape() || u.nrows() != u.ncols() {
        return Err(Error::Invalid(format!(
            "mode matrices must be square and equal-sized, got {:?} and {:?}",
            u.shape(),
            v.shape()
        )));
    }
    let defect = bogoliubov_defect(u, v);
    if defect > COVARIANCE_UNITARITY_TOL {
        return Err(Error::NonUnitary { defect, tolerance: COVARIANCE_UNITARITY_TOL });
    }
    Ok(MajoranaCovariance::from_plus_minus(&(u + v), &(u - v)))
}

/// Ground-state covariance of a stationary basis.
pub fn ground_covariance(basis: &BogoliubovBasis) -> MajoranaCovariance {
    MajoranaCovariance::from_real_basis(basis)
}

/// `<sigma^x_n> = 1 - 2 <c_n^dag c_n>`.
pub fn transverse_magnetization(cov: &MajoranaCovariance, n: usize) -> Result<f64> {
    cov.check_site(n)?;
    Ok(-cov.gamma[(ia(n), ib(n))])
}

/// `<sigma^z_m sigma^z_n>` through the Jordan-Wigner string.
pub fn zz_correlator(cov: &MajoranaCovariance, m: usize, n: usize) -> Result<f64> {
    cov.check_site(m)?;
    cov.check_site(n)?;
    let (m, n) = if m <= n { (m, n) } else { (n, m) };
    if m == n {
        return Ok(1.0);
    }
    if n == m + 1 {
        return Ok(cov.nearest_neighbor_zz(m));
    }
    let start = ib(m);
    let len = 2 * (n - m);
    let block = cov.gamma.view((start, start), (len, len));
    let pf = pfaffian_view(block)?;
    Ok(if (n - m) % 2 == 0 { pf } else { -pf })
}

/// `(1 / (N - 1)) sum_n (1 - <sigma^z_n sigma^z_{n+1}>) / 2`.
pub fn kink_density(cov: &MajoranaCovariance) -> f64 {
    let n = cov.n_sites();
    let total: f64 = (1..n).map(|s| 0.5 * (1.0 - cov.nearest_neighbor_zz(s))).sum();
    (total / (n - 1) as f64).clamp(0.0, 1.0)
}

/// Per-bond kink probabilities `(1 - <sigma^z_n sigma^z_{n+1}>) / 2`, `n = 1..N-1`.
pub fn bond_kinks(cov: &MajoranaCovariance) -> Vec<f64> {
    (1..cov.n_sites()).map(|s| 0.5 * (1.0 - cov.nearest_neighbor_zz(s))).collect()
}

/// Default reference for [`magnetization_profile`]: the middle of the ordered
/// segment between site 1 and the `epsilon = -0.5` crossing, where the order
/// parameter is nearly saturated. `None` if the calibration window
/// `n_ref +/- r_cal` does not fit inside that segment.
pub fn default_reference_site(profile: &FieldProfile, t: f64, n_sites: usize, r_cal: usize) -> Option<usize> {
    let (alpha, n_c) = match *profile {
        FieldProfile::StaticTanhFront { alpha, n_c } => (alpha, n_c),
        FieldProfile::MovingTanhFront { alpha, v } => (alpha, v * t),
        _ => return None,
    };
    let crossing = (n_c - 0.5 / alpha).floor().min(n_sites as f64);
    if crossing < (2 * r_cal + 1) as f64 {
        return None;
    }
    let crossing = crossing as usize;
    Some(((crossing + 1) / 2).clamp(r_cal + 1, crossing - r_cal))
}

/// Ferromagnetic order profile `Z_n = C(n_ref, n) / sqrt(C(n_ref - r, n_ref + r))`
/// for `n = 1..=N`, `C` being the `zz` correlator.
///
/// Finite chains have `<sigma^z_n> = 0` by symmetry; the ratio recovers the
/// order parameter from connected-at-infinity correlations.
pub fn magnetization_profile(
    cov: &MajoranaCovariance,
    profile: &FieldProfile,
    t: f64,
    n_ref: usize,
    r_cal: usize,
) -> Result<Vec<f64>> {
    let n_sites = cov.n_sites();
    cov.check_site(n_ref)?;
    let epsilon = profile.local_epsilon(n_ref as f64, t);
    if epsilon > -0.5 {
        return Err(Error::ReferenceNotOrdered { n_ref, epsilon });
    }
    if r_cal == 0 || n_ref <= r_cal || n_ref + r_cal > n_sites {
        return Err(Error::Invalid(format!(
            "calibration sites {n_ref} +/- {r_cal} fall outside 1..={n_sites}"
        )));
    }
    let norm = zz_correlator(cov, n_ref - r_cal, n_ref + r_cal)?;
    if !(norm > 0.0) {
        return Err(Error::ReferenceNotOrdered { n_ref, epsilon });
    }
    let scale = norm.sqrt();
    (1..=n_sites).map(|n| Ok(zz_correlator(cov, n_ref, n)? / scale)).collect()
}

/// `<gamma~_k^dag gamma~_k>` for each target mode `k`, given evolved mode
/// matrices `(U, V)`: the squared row norms of `B = U'^T V^* + V'^T U^*`.
pub fn mode_occupations(
    u: &DMatrix<C64>,
    v: &DMatrix<C64>,
    target: &BogoliubovBasis,
) -> Result<Vec<f64>> {
    let n = target.n_sites();
    if u.nrows() != n || v.nrows() != n || u.shape() != v.shape() {
        return Err(Error::LengthMismatch { expected: n, got: u.nrows() });
    }
    // B^* = U'^T V + V'^T U = (P'^T P - M'^T M) / 2 with P = u+, M = u-
    let [pr, pi, mr, mi] = split_plus_minus(u, v);
    let (tp, tm) = (target.u_plus(), target.u_minus());
    let re = (tp.tr_mul(&pr) - tm.tr_mul(&mr)) * 0.5;
    let im = (tp.tr_mul(&pi) - tm.tr_mul(&mi)) * 0.5;
    Ok((0..n)
        .map(|k| re.row(k).iter().zip(im.row(k).iter()).map(|(a, b)| a * a + b * b).sum())
        .collect())
}

/// Quasiparticle density `(1/N) sum_k <gamma~_k^dag gamma~_k>` relative to
/// `target`, skipping zero modes (`omega < ZERO_MODE_TOL`).
pub fn excitation_density(
    u: &DMatrix<C64>,
    v: &DMatrix<C64>,
    target: &BogoliubovBasis,
) -> Result<f64> {
    let occ = mode_occupations(u, v, target)?;
    let n = target.n_sites();
    let total: f64 = occ
        .iter()
        .zip(&target.omega)
        .filter(|(_, &w)| w >= ZERO_MODE_TOL)
        .map(|(o, _)| o)
        .sum();
    Ok((total / n as f64).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChainGeometry;
    use crate::static_solver::solve_fields;

    fn ground(g: &[f64]) -> (BogoliubovBasis, MajoranaCovariance) {
        let geo = ChainGeometry::new(g.len()).unwrap();
        let b = solve_fields(&geo, g).unwrap();
        let c = ground_covariance(&b);
        (b, c)
    }

    fn complex(b: &BogoliubovBasis) -> (DMatrix<C64>, DMatrix<C64>) {
        (b.u.map(|x| C64::new(x, 0.0)), b.v.map(|x| C64::new(x, 0.0)))
    }

    #[test]
    fn paramagnet_is_fermion_vacuum() {
        let (_, c) = ground(&[1e6; 6]);
        for n in 1..=6 {
            assert!((transverse_magnetization(&c, n).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn ferromagnet_is_ordered() {
        let (_, c) = ground(&[0.0; 7]);
        for n in 1..=7 {
            assert!(transverse_magnetization(&c, n).unwrap().abs() < 1e-12);
            for m in 1..=7 {
                assert!((zz_correlator(&c, m, n).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        assert!(kink_density(&c) < 1e-12);
    }

    #[test]
    fn covariance_is_pure_and_antisymmetric() {
        let g = [0.4, 1.3, 0.9, 2.1, 0.2, 1.0, 1.7];
        let (b, c) = ground(&g);
        assert!((c.matrix() + c.matrix().transpose()).amax() < 1e-12);
        assert!(c.purity_defect() < 1e-8);
        let (u, v) = complex(&b);
        let c2 = covariance(&u, &v).unwrap();
        assert!((c2.matrix() - c.matrix()).amax() < 1e-12);
    }

    #[test]
    fn covariance_rejects_non_unitary_modes() {
        let (b, _) = ground(&[0.5, 1.5, 1.0]);
        let (mut u, v) = complex(&b);
        u[(0, 0)] += C64::new(1e-4, 0.0);
        assert!(matches!(covariance(&u, &v), Err(Error::NonUnitary { .. })));
    }

    #[test]
    fn maximally_kinked_state() {
        // Gamma[b_n][a_{n+1}] = +1 on every bond gives zz = -1
        let n = 5;
        let mut gamma = DMatrix::zeros(2 * n, 2 * n);
        gamma[(ia(1), ib(n))] = 1.0;
        gamma[(ib(n), ia(1))] = -1.0;
        for s in 1..n {
            gamma[(ib(s), ia(s + 1))] = 1.0;
            gamma[(ia(s + 1), ib(s))] = -1.0;
        }
        let c = MajoranaCovariance::from_matrix(gamma).unwrap();
        assert!(c.purity_defect() < 1e-14);
        assert_eq!(kink_density(&c), 1.0);
    }

    #[test]
    fn zz_is_symmetric_and_bounded() {
        let g = [0.3, 0.8, 1.1, 0.6, 1.4, 0.9, 0.5, 1.2];
        let (_, c) = ground(&g);
        for m in 1..=8 {
            assert_eq!(zz_correlator(&c, m, m).unwrap(), 1.0);
            for n in 1..=8 {
                let a = zz_correlator(&c, m, n).unwrap();
                let b = zz_correlator(&c, n, m).unwrap();
                assert_eq!(a, b);
                assert!(a.abs() <= 1.0 + 1e-12);
            }
        }
        assert!(zz_correlator(&c, 0, 3).is_err());
        assert!(zz_correlator(&c, 2, 9).is_err());
        assert!(transverse_magnetization(&c, 9).is_err());
    }

    #[test]
    fn zz_ignores_rotations_inside_degenerate_subspace() {
        // g = 0 bulk: omega = 2 is (N-1)-fold degenerate
        let n = 8;
        let (b, c) = ground(&vec![0.0; n]);
        let k = n - 1;
        // orthogonal rotation from a Householder reflection on modes 1..N
        let w: Vec<f64> = (0..k).map(|i| ((i * 7 + 3) % 5) as f64 - 1.7).collect();
        let ww: f64 = w.iter().map(|x| x * x).sum();
        let mut r = DMatrix::<f64>::identity(n, n);
        for i in 0..k {
            for j in 0..k {
                r[(i + 1, j + 1)] -= 2.0 * w[i] * w[j] / ww;
            }
        }
        let rotated = BogoliubovBasis { u: &b.u * &r, v: &b.v * &r, omega: b.omega.clone() };
        assert!(rotated.unitarity_defect() < 1e-12);
        let c2 = ground_covariance(&rotated);
        for m in 1..=n {
            for l in m..=n {
                let a = zz_correlator(&c, m, l).unwrap();
                let bb = zz_correlator(&c2, m, l).unwrap();
                assert!((a - bb).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn excitation_density_counts_occupied_modes() {
        let g = [0.7, 1.3, 0.4, 1.8, 1.1, 0.6];
        let (b, _) = ground(&g);
        let (u, v) = complex(&b);
        assert!(excitation_density(&u, &v, &b).unwrap() < 1e-12);
        // particle-hole swap of mode 2 occupies it
        let (mut u1, mut v1) = (u.clone(), v.clone());
        for r in 0..6 {
            u1[(r, 2)] = v[(r, 2)].conj();
            v1[(r, 2)] = u[(r, 2)].conj();
        }
        let d = excitation_density(&u1, &v1, &b).unwrap();
        assert!((d - 1.0 / 6.0).abs() < 1e-12);
        let occ = mode_occupations(&u1, &v1, &b).unwrap();
        assert!((occ[2] - 1.0).abs() < 1e-12);
        let (b3, _) = ground(&[1.0; 3]);
        assert!(excitation_density(&u, &v, &b3).is_err());
    }

    #[test]
    fn ordered_ground_state_profile_is_flat() {
        let n = 40;
        let (_, c) = ground(&vec![0.0; n]);
        let p = FieldProfile::uniform(0.0).unwrap();
        let z = magnetization_profile(&c, &p, 0.0, 20, DEFAULT_R_CAL).unwrap();
        assert!(z.iter().all(|x| (x - 1.0).abs() < 1e-12));
        assert!(magnetization_profile(&c, &p, 0.0, 5, DEFAULT_R_CAL).is_err());
        let para = FieldProfile::uniform(1.5).unwrap();
        assert!(matches!(
            magnetization_profile(&c, &para, 0.0, 20, DEFAULT_R_CAL),
            Err(Error::ReferenceNotOrdered { .. })
        ));
    }

    #[test]
    fn reference_window_stays_ordered() {
        let p = FieldProfile::static_front(2f64.powi(-4), 128.0).unwrap();
        assert_eq!(default_reference_site(&p, 0.0, 256, 10), Some(60));
        let p = FieldProfile::moving_front(2f64.powi(-5), 1.0).unwrap();
        assert_eq!(default_reference_site(&p, 150.0, 256, 10), Some(67));
        // crossing at site 21: the window 1..=21 just fits
        assert_eq!(default_reference_site(&p, 37.0, 256, 10), Some(11));
        assert_eq!(default_reference_site(&p, 36.0, 256, 10), None);
        assert_eq!(default_reference_site(&FieldProfile::uniform(0.0).unwrap(), 0.0, 10, 1), None);
    }
}
