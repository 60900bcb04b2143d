//! Entropy of a channel.
//!
//! S(N) = log2 d_B minus the smallest output-conditional entropy S(B|R)
//! over inputs, where the channel acts on half a purification. The
//! minimization runs over unnormalized Gram factors G with rho = GG'/Tr, so
//! the search space is unconstrained and a plain descent with multiple
//! starts suffices; the maximally mixed start sits at the optimum for the
//! covariant channels used as anchors.

use crate::chan::{apply_choi_raw, ChannelSpec};
use crate::error::Result;
use crate::linalg::{cx, proj, sqrtm_psd, trace_out, trace_re, vn_entropy_bits, CMat, CVec};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn cond_out_entropy(choi: &CMat, rho: &CMat, da: usize, db: usize) -> f64 {
    let sq = sqrtm_psd(rho);
    let mut psi = CVec::zeros(da * da);
    for i in 0..da {
        for j in 0..da {
            psi[i * da + j] = sq[(i, j)];
        }
    }
    let omega = apply_choi_raw(choi, &proj(&psi), da, db, da);
    vn_entropy_bits(&omega) - vn_entropy_bits(&trace_out(&omega, &[db, da], &[0]))
}

fn descend(f: &dyn Fn(&[f64]) -> f64, start: Vec<f64>, iters: usize) -> f64 {
    let n = start.len();
    let mut x = start;
    let mut fx = f(&x);
    let mut step = 0.1;
    let h = 1e-5;
    for _ in 0..iters {
        let mut g = vec![0.0; n];
        let mut norm2 = 0.0;
        for i in 0..n {
            let keep = x[i];
            x[i] = keep + h;
            let fp = f(&x);
            x[i] = keep - h;
            let fm = f(&x);
            x[i] = keep;
            g[i] = (fp - fm) / (2.0 * h);
            norm2 += g[i] * g[i];
        }
        let norm = norm2.sqrt();
        if norm < 1e-9 {
            break;
        }
        let mut moved = false;
        while step >= 1e-10 {
            let cand: Vec<f64> =
                x.iter().zip(&g).map(|(a, b)| a - step * b / norm).collect();
            let fc = f(&cand);
            if fc < fx - 1e-14 {
                x = cand;
                fx = fc;
                step *= 1.4;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    fx
}

/// Heuristic estimate of the channel entropy; exact on channels whose
/// optimal input is maximally mixed, since that start is always probed.
pub fn channel_entropy(ch: &ChannelSpec) -> Result<f64> {
    let choi = ch.choi()?;
    let (da, db) = (ch.dim_in(), ch.dim_out());
    let n = 2 * da * da;

    let cmat = choi.mat().clone();
    let eval = move |params: &[f64]| -> f64 {
        let mut g = CMat::zeros(da, da);
        for i in 0..da {
            for j in 0..da {
                let k = 2 * (i * da + j);
                g[(i, j)] = cx(params[k], params[k + 1]);
            }
        }
        let gram = &g * g.adjoint();
        let tr = trace_re(&gram);
        if tr < 1e-12 {
            return f64::INFINITY;
        }
        cond_out_entropy(&cmat, &gram.unscale(tr), da, db)
    };

    let mut id_params = vec![0.0; n];
    for i in 0..da {
        id_params[2 * (i * da + i)] = 1.0;
    }
    let mut best = descend(&eval, id_params, 250);

    let mut rng = ChaCha8Rng::seed_from_u64(0xe57);
    for _ in 0..2 {
        let start: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        best = best.min(descend(&eval, start, 250));
    }
    Ok((db as f64).log2() - best)
}
