//! Brute-force exact diagonalization of small open chains, used as an
//! independent reference for the free-fermion pipeline.
//!
//! Basis states are bit strings in the `sigma^x` eigenbasis: bit `n - 1` set
//! means `sigma^x_n = -1`.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

type C64 = Complex<f64>;

pub struct SpinChain {
    pub n: usize,
    pub g: Vec<f64>,
}

fn bit(s: usize, site: usize) -> bool {
    s >> (site - 1) & 1 == 1
}

fn sx(s: usize, site: usize) -> f64 {
    if bit(s, site) {
        -1.0
    } else {
        1.0
    }
}

impl SpinChain {
    pub fn new(g: &[f64]) -> Self {
        assert!(g.len() >= 2 && g.len() <= 12);
        Self { n: g.len(), g: g.to_vec() }
    }

    /// `<s| H |s'>` for `H = -sum g_n sigma^x_n - sum sigma^z_n sigma^z_{n+1}`
    /// restricted to `states`.
    fn hamiltonian(&self, states: &[usize]) -> DMatrix<f64> {
        let dim = states.len();
        let index = |s: usize| states.iter().position(|&x| x == s).expect("sector is closed under H");
        let mut h = DMatrix::zeros(dim, dim);
        for (i, &s) in states.iter().enumerate() {
            h[(i, i)] = -(1..=self.n).map(|k| self.g[k - 1] * sx(s, k)).sum::<f64>();
            for k in 1..self.n {
                let t = s ^ (0b11 << (k - 1));
                h[(index(t), i)] -= 1.0;
            }
        }
        h
    }

    fn sector(&self, even: bool) -> Vec<usize> {
        (0..1usize << self.n).filter(|s| (s.count_ones() % 2 == 0) == even).collect()
    }

    /// Sorted eigenvalues and eigenvectors (embedded in the full space) of
    /// one parity sector.
    pub fn sector_spectrum(&self, even: bool) -> (Vec<f64>, Vec<DVector<f64>>) {
        let states = self.sector(even);
        let eig = SymmetricEigen::new(self.hamiltonian(&states));
        let mut order: Vec<usize> = (0..states.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = order
            .iter()
            .map(|&k| {
                let mut full = DVector::zeros(1 << self.n);
                for (i, &s) in states.iter().enumerate() {
                    full[s] = eig.eigenvectors[(i, k)];
                }
                full
            })
            .collect();
        (values, vectors)
    }

    pub fn ground_energy(&self) -> f64 {
        self.sector_spectrum(true).0[0].min(self.sector_spectrum(false).0[0])
    }

    pub fn even_gap(&self) -> f64 {
        let e = self.sector_spectrum(true).0;
        e[1] - e[0]
    }

    pub fn even_ground_state(&self) -> DVector<f64> {
        self.sector_spectrum(true).1.swap_remove(0)
    }
}

pub fn expect_sigma_x(psi: &DVector<f64>, site: usize) -> f64 {
    (0..psi.len()).map(|s| psi[s] * psi[s] * sx(s, site)).sum()
}

pub fn expect_zz(psi: &DVector<f64>, m: usize, n: usize) -> f64 {
    if m == n {
        return 1.0;
    }
    let flip = (1 << (m - 1)) | (1 << (n - 1));
    (0..psi.len()).map(|s| psi[s ^ flip] * psi[s]).sum()
}

pub fn kink_density(chain: &SpinChain, psi: &DVector<f64>) -> f64 {
    let n = chain.n;
    (1..n).map(|k| 0.5 * (1.0 - expect_zz(psi, k, k + 1))).sum::<f64>() / (n - 1) as f64
}

/// `a_n = -sigma^z_n prod_{m<n} sigma^x_m` (`kind = 0`) or
/// `b_n = sigma^y_n prod_{m<n} sigma^x_m` (`kind = 1`) applied to `psi`.
fn majorana(psi: &DVector<C64>, site: usize, kind: usize) -> DVector<C64> {
    let mut out = DVector::zeros(psi.len());
    for s in 0..psi.len() {
        let string: f64 = (1..site).map(|m| sx(s, m)).product();
        let t = s ^ (1 << (site - 1));
        let amp = if kind == 0 { C64::new(-1.0, 0.0) } else { C64::new(0.0, -sx(s, site)) };
        out[t] += psi[s] * amp * string;
    }
    out
}

/// Majorana covariance `Gamma[j][k] = (i/2) <[w_j, w_k]>` with the
/// interleaved ordering `(a_1, b_1, a_2, ...)`.
pub fn covariance(chain: &SpinChain, psi: &DVector<f64>) -> DMatrix<f64> {
    covariance_complex(chain.n, &psi.map(|x| C64::new(x, 0.0)))
}

pub fn covariance_complex(n: usize, psi: &DVector<C64>) -> DMatrix<f64> {
    let w: Vec<DVector<C64>> = (0..2 * n).map(|j| majorana(psi, j / 2 + 1, j % 2)).collect();
    let mut gamma = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..2 * n {
        for k in 0..2 * n {
            if j != k {
                // (i/2)<[w_j, w_k]> = i <w_j w_k> = i <w_j psi | w_k psi>
                gamma[(j, k)] = -w[j].dotc(&w[k]).im;
            }
        }
    }
    gamma
}
