//! Seeded random states, unitaries and channels for tests and probes.

use crate::chan::{ChannelSpec, DensityMatrix};
use crate::linalg::{cx, dagger, CMat, CVec};
use rand::Rng;
use rand_distr::StandardNormal;

fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        cx(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase fix that
/// makes the distribution exactly invariant.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { cx(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_pure(d: usize, rng: &mut impl Rng) -> CVec {
    let v = CVec::from_fn(d, |_, _| {
        cx(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v.unscale(n)
}

/// Full-rank random density matrix (Ginibre GG†, normalized).
pub fn random_density(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = ginibre(d, d, rng);
    let m = &g * dagger(&g);
    let tr: f64 = (0..d).map(|i| m[(i, i)].re).sum();
    DensityMatrix::from_nearly(m.unscale(tr)).expect("GG†/tr is a state")
}

/// Random isometry dim_in -> dim_in * env (columns of a Haar unitary).
pub fn random_isometry(dim_in: usize, total: usize, rng: &mut impl Rng) -> CMat {
    let u = haar_unitary(total, rng);
    u.columns(0, dim_in).into_owned()
}

/// Random channel via Stinespring: V = isometry into out ⊗ env, trace out env.
/// Kraus ops are the env-indexed blocks of V.
pub fn random_channel(dim_in: usize, dim_out: usize, env: usize, rng: &mut impl Rng) -> ChannelSpec {
    let v = random_isometry(dim_in, dim_out * env, rng);
    let ks: Vec<CMat> = (0..env)
        .map(|e| {
            CMat::from_fn(dim_out, dim_in, |b, a| v[(b * env + e, a)])
        })
        .collect();
    ChannelSpec::from_kraus(dim_in, dim_out, ks).expect("Stinespring blocks are complete")
}
