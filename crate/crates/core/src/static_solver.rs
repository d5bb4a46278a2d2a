//! Stationary Bogoliubov-de Gennes problem of the open Ising chain.
//!
//! With `u± = u ± v` the BdG equations read `omega u+ = A u-` and
//! `omega u- = A^T u+`, where `A` is the lower-bidiagonal coupling matrix
//! (`A[n][n] = 2 g_n`, `A[n][n-1] = -2`). The singular value decomposition
//! `A = Phi Sigma Psi^T` therefore gives every mode at once with
//! `omega >= 0`: `u+` columns are `Phi`, `u-` columns are `Psi`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::ChainGeometry;

/// Bidiagonal coupling matrix; only the diagonal `2 g_n` is stored, the
/// subdiagonal is the constant `-2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    diag: Vec<f64>,
}

impl CouplingMatrix {
    pub fn n_sites(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.diag.len();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = self.diag[i];
            if i > 0 {
                a[(i, i - 1)] = -2.0;
            }
        }
        a
    }
}

pub fn build_coupling(geometry: &ChainGeometry, g: &[f64]) -> Result<CouplingMatrix> {
    if g.len() != geometry.n_sites() {
        return Err(Error::LengthMismatch { expected: geometry.n_sites(), got: g.len() });
    }
    Ok(CouplingMatrix { diag: g.iter().map(|&x| 2.0 * x).collect() })
}

/// Mode matrices and frequencies of a stationary BdG solution.
///
/// Column `m` of `u`/`v` holds `u_{n,m}`, `v_{n,m}` (row `n - 1` for site `n`);
/// `omega` is sorted ascending.
#[derive(Debug, Clone)]
pub struct BogoliubovBasis {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub omega: Vec<f64>,
}

impl BogoliubovBasis {
    pub fn n_sites(&self) -> usize {
        self.omega.len()
    }

    pub fn u_plus(&self) -> DMatrix<f64> {
        &self.u + &self.v
    }

    pub fn u_minus(&self) -> DMatrix<f64> {
        &self.u - &self.v
    }

    /// Largest entry of `|U^T U + V^T V - I|` and `|U^T V + V^T U|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n_sites();
        let ut = self.u.transpose();
        let vt = self.v.transpose();
        let norm = &ut * &self.u + &vt * &self.v - DMatrix::<f64>::identity(n, n);
        let anom = &ut * &self.v + &vt * &self.u;
        norm.amax().max(anom.amax())
    }

    /// Ground-state energy of the spin Hamiltonian, `-sum(omega) / 2`.
    pub fn ground_energy(&self) -> f64 {
        -0.5 * self.omega.iter().sum::<f64>()
    }

    /// RMS spatial spread (in sites) of mode `m`, weighted by `u^2 + v^2`.
    pub fn mode_width(&self, m: usize) -> f64 {
        let w: Vec<f64> =
            (0..self.n_sites()).map(|n| self.u[(n, m)].powi(2) + self.v[(n, m)].powi(2)).collect();
        let total: f64 = w.iter().sum();
        let mean = w.iter().enumerate().map(|(n, x)| n as f64 * x).sum::<f64>() / total;
        let var = w.iter().enumerate().map(|(n, x)| (n as f64 - mean).powi(2) * x).sum::<f64>() / total;
        var.sqrt()
    }
}

pub fn solve_static(a: &CouplingMatrix) -> BogoliubovBasis {
    let n = a.n_sites();
    let svd = a.to_dense().svd(true, true);
    let phi = svd.u.expect("left singular vectors requested");
    let psi = svd.v_t.expect("right singular vectors requested").transpose();
    let sigma: DVector<f64> = svd.singular_values;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[i].total_cmp(&sigma[j]).then(i.cmp(&j)));

    let mut u = DMatrix::zeros(n, n);
    let mut v = DMatrix::zeros(n, n);
    let mut omega = Vec::with_capacity(n);
    for (m, &k) in order.iter().enumerate() {
        let plus = phi.column(k);
        let minus = psi.column(k);
        let lead = plus.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            u[(r, m)] = 0.5 * sign * (plus[r] + minus[r]);
            v[(r, m)] = 0.5 * sign * (plus[r] - minus[r]);
        }
        omega.push(sigma[k]);
    }
    BogoliubovBasis { u, v, omega }
}

/// Convenience: build the coupling for `g` and solve.
pub fn solve_fields(geometry: &ChainGeometry, g: &[f64]) -> Result<BogoliubovBasis> {
    Ok(solve_static(&build_coupling(geometry, g)?))
}

/// Lowest even-parity excitation energy, `omega_0 + omega_1`.
pub fn energy_gap(basis: &BogoliubovBasis) -> Result<f64> {
    if basis.omega.len() < 2 {
        return Err(Error::Geometry("gap needs at least 2 modes".into()));
    }
    Ok(basis.omega[0] + basis.omega[1])
}

pub fn low_spectrum(basis: &BogoliubovBasis, m_max: usize) -> Result<&[f64]> {
    if m_max > basis.omega.len() {
        return Err(Error::Invalid(format!(
            "requested {m_max} frequencies from a {}-site basis",
            basis.omega.len()
        )));
    }
    Ok(&basis.omega[..m_max])
}
