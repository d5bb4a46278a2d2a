//! Pfaffian of a real antisymmetric matrix by Householder tridiagonalization.

use nalgebra::{DMatrix, DMatrixView};

use crate::error::{Error, Result};

/// Relative antisymmetry tolerance accepted by [`pfaffian`].
pub const ANTISYMMETRY_TOL: f64 = 1e-10;

/// `Pf(M)` for an even-dimensional real antisymmetric matrix.
///
/// Each step reflects the first column below the diagonal onto a single
/// entry, which peels off one 2x2 block; `Pf(Q M Q^T) = det(Q) Pf(M)`
/// supplies the sign of every reflection.
pub fn pfaffian(m: &DMatrix<f64>) -> Result<f64> {
    pfaffian_view(m.as_view())
}

pub fn pfaffian_view(m: DMatrixView<'_, f64>) -> Result<f64> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Invalid(format!("Pfaffian of non-square {}x{} matrix", n, m.ncols())));
    }
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let mut scale = 0.0f64;
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(m[(i, j)].abs());
            asym = asym.max((m[(i, j)] + m[(j, i)]).abs());
        }
    }
    if asym > ANTISYMMETRY_TOL * scale.max(1.0) {
        return Err(Error::NotAntisymmetric(asym));
    }
    if n == 0 {
        return Ok(1.0);
    }

    // row-major working copy, antisymmetrized
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (m[(i, j)] - m[(j, i)]);
        }
    }
    Ok(pfaffian_in_place(&mut a, n))
}

fn pfaffian_in_place(a: &mut [f64], n: usize) -> f64 {
    let mut pf = 1.0;
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut k = 0;
    while k + 1 < n {
        // x = a[k+1.., k]
        let len = n - k - 1;
        let x0 = a[(k + 1) * n + k];
        let tail: f64 = (k + 2..n).map(|r| a[r * n + k].powi(2)).sum();
        let beta;
        if tail == 0.0 {
            beta = x0;
        } else {
            let norm = (x0 * x0 + tail).sqrt();
            beta = if x0 > 0.0 { -norm } else { norm };
            // v = x - beta e1, tau = 2 / v.v
            v[0] = x0 - beta;
            for r in 1..len {
                v[r] = a[(k + 1 + r) * n + k];
            }
            let vv = v[0] * v[0] + tail;
            let tau = 2.0 / vv;
            // w = tau C v on the trailing block C = a[k+1.., k+1..]
            for r in 0..len {
                let row = &a[(k + 1 + r) * n + k + 1..(k + 1 + r) * n + n];
                w[r] = tau * row.iter().zip(&v[..len]).map(|(c, x)| c * x).sum::<f64>();
            }
            // C <- C + v w^T - w v^T, only rows/cols beyond k+1 are needed later
            for r in 1..len {
                let (vr, wr) = (v[r], w[r]);
                let base = (k + 1 + r) * n + k + 1;
                for c in 1..len {
                    a[base + c] += vr * w[c] - wr * v[c];
                }
            }
            pf = -pf;
        }
        // reduced matrix couples k only to k+1 with entry a[k][k+1] = -beta
        pf *= -beta;
        if pf == 0.0 {
            return 0.0;
        }
        k += 2;
    }
    pf
}
