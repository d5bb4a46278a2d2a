//! Blocked propagation kernels.
//!
//! Modes are independent linear ODEs, so they are packed `LANES` at a time
//! with the mode index innermost: every site update is then a short
//! fixed-width loop the compiler turns into SIMD. Real and imaginary parts of
//! `u+` and `u-` live in separate arrays.

pub(crate) const LANES: usize = 8;

pub(crate) type Lane = [f64; LANES];

const ZERO: Lane = [0.0; LANES];

#[derive(Clone)]
pub(crate) struct ModeBlock {
    pub up_re: Vec<Lane>,
    pub up_im: Vec<Lane>,
    pub um_re: Vec<Lane>,
    pub um_im: Vec<Lane>,
}

impl ModeBlock {
    pub fn zeros(n: usize) -> Self {
        Self { up_re: vec![ZERO; n], up_im: vec![ZERO; n], um_re: vec![ZERO; n], um_im: vec![ZERO; n] }
    }

    pub fn len(&self) -> usize {
        self.up_re.len()
    }
}

/// Rotation `(c, s)` per site for one split step, plus the bond rotation
/// preceding it.
pub(crate) struct SplitStep<'a> {
    pub bond: (f64, f64),
    pub site: &'a [(f64, f64)],
}

/// Bond part `exp(2 i h sigma^x)` on pairs `(u+_{n+1}, u-_n)`, then site part
/// `exp(-i theta_n sigma^x)` on `(u+_n, u-_n)`, fused into one sweep.
#[inline]
pub(crate) fn split_sweep(b: &mut ModeBlock, step: &SplitStep<'_>) {
    let n = b.len();
    let (cb, sb) = step.bond;
    let ModeBlock { up_re, up_im, um_re, um_im } = b;
    for s in 0..n {
        if s + 1 < n {
            let (pr, pi) = (&mut up_re[s + 1], &mut up_im[s + 1]);
            let (mr, mi) = (&mut um_re[s], &mut um_im[s]);
            for j in 0..LANES {
                let (ar, ai, br, bi) = (pr[j], pi[j], mr[j], mi[j]);
                // a' = c a + i s b, b' = i s a + c b
                pr[j] = cb * ar - sb * bi;
                pi[j] = cb * ai + sb * br;
                mr[j] = cb * br - sb * ai;
                mi[j] = cb * bi + sb * ar;
            }
        }
        let (c, sn) = step.site[s];
        let (pr, pi) = (&mut up_re[s], &mut up_im[s]);
        let (mr, mi) = (&mut um_re[s], &mut um_im[s]);
        for j in 0..LANES {
            let (ar, ai, br, bi) = (pr[j], pi[j], mr[j], mi[j]);
            // a' = c a - i s b, b' = -i s a + c b
            pr[j] = c * ar + sn * bi;
            pi[j] = c * ai - sn * br;
            mr[j] = c * br + sn * ai;
            mi[j] = c * bi - sn * ar;
        }
    }
}

/// Bond rotation alone, closing a run of split steps.
pub(crate) fn bond_sweep(b: &mut ModeBlock, (cb, sb): (f64, f64)) {
    let n = b.len();
    let ModeBlock { up_re, up_im, um_re, um_im } = b;
    for s in 0..n.saturating_sub(1) {
        let (pr, pi) = (&mut up_re[s + 1], &mut up_im[s + 1]);
        let (mr, mi) = (&mut um_re[s], &mut um_im[s]);
        for j in 0..LANES {
            let (ar, ai, br, bi) = (pr[j], pi[j], mr[j], mi[j]);
            pr[j] = cb * ar - sb * bi;
            pi[j] = cb * ai + sb * br;
            mr[j] = cb * br - sb * ai;
            mi[j] = cb * bi + sb * ar;
        }
    }
}

/// `d/dt u+_n = -i (2 g_n u-_n - 2 u-_{n-1})`,
/// `d/dt u-_n = -i (2 g_n u+_n - 2 u+_{n+1})`.
pub(crate) fn rhs_block(y: &ModeBlock, g: &[f64], out: &mut ModeBlock) {
    let n = y.len();
    for s in 0..n {
        let g2 = 2.0 * g[s];
        let (prev_r, prev_i) = if s > 0 { (&y.um_re[s - 1], &y.um_im[s - 1]) } else { (&ZERO, &ZERO) };
        let (next_r, next_i) = if s + 1 < n { (&y.up_re[s + 1], &y.up_im[s + 1]) } else { (&ZERO, &ZERO) };
        for j in 0..LANES {
            let wr = g2 * y.um_re[s][j] - 2.0 * prev_r[j];
            let wi = g2 * y.um_im[s][j] - 2.0 * prev_i[j];
            out.up_re[s][j] = wi;
            out.up_im[s][j] = -wr;
            let xr = g2 * y.up_re[s][j] - 2.0 * next_r[j];
            let xi = g2 * y.up_im[s][j] - 2.0 * next_i[j];
            out.um_re[s][j] = xi;
            out.um_im[s][j] = -xr;
        }
    }
}

fn axpy_into(out: &mut ModeBlock, y: &ModeBlock, h: f64, k: &ModeBlock) {
    let pairs = [
        (&mut out.up_re, &y.up_re, &k.up_re),
        (&mut out.up_im, &y.up_im, &k.up_im),
        (&mut out.um_re, &y.um_re, &k.um_re),
        (&mut out.um_im, &y.um_im, &k.um_im),
    ];
    for (o, a, b) in pairs {
        for ((o, a), b) in o.iter_mut().zip(a.iter()).zip(b.iter()) {
            for j in 0..LANES {
                o[j] = a[j] + h * b[j];
            }
        }
    }
}

pub(crate) struct Rk4Scratch {
    k1: ModeBlock,
    k2: ModeBlock,
    k3: ModeBlock,
    k4: ModeBlock,
    tmp: ModeBlock,
}

impl Rk4Scratch {
    pub fn new(n: usize) -> Self {
        let z = ModeBlock::zeros(n);
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }
}

/// Classical fourth-order Runge-Kutta step with fields at `t`, `t + h/2`,
/// `t + h`.
pub(crate) fn rk4_step(y: &mut ModeBlock, h: f64, g0: &[f64], gm: &[f64], g1: &[f64], s: &mut Rk4Scratch) {
    let Rk4Scratch { k1, k2, k3, k4, tmp } = s;
    rhs_block(y, g0, k1);
    axpy_into(tmp, y, 0.5 * h, k1);
    rhs_block(tmp, gm, k2);
    axpy_into(tmp, y, 0.5 * h, k2);
    rhs_block(tmp, gm, k3);
    axpy_into(tmp, y, h, k3);
    rhs_block(tmp, g1, k4);
    let w = h / 6.0;
    let comps = [
        (&mut y.up_re, &k1.up_re, &k2.up_re, &k3.up_re, &k4.up_re),
        (&mut y.up_im, &k1.up_im, &k2.up_im, &k3.up_im, &k4.up_im),
        (&mut y.um_re, &k1.um_re, &k2.um_re, &k3.um_re, &k4.um_re),
        (&mut y.um_im, &k1.um_im, &k2.um_im, &k3.um_im, &k4.um_im),
    ];
    for (y, a, b, c, d) in comps {
        for s in 0..y.len() {
            for j in 0..LANES {
                y[s][j] += w * (a[s][j] + 2.0 * b[s][j] + 2.0 * c[s][j] + d[s][j]);
            }
        }
    }
}
