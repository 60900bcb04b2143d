//! Free superchannels: pre/post processing pairs, optionally linked by a
//! memory register, that send every free channel of a theory to a free
//! channel. Sampling is per theory and freeness holds by construction, so
//! applying one must never increase a channel measure.
//!
//! The families:
//! - purity: arbitrary pre, classical memory, post mixes unitaries
//!   conditioned on the memory value (unital, so randomizing stays
//!   randomizing);
//! - classical capacity: arbitrary pre and post, no memory (replacement
//!   channels absorb anything composed around them);
//! - quantum memory: arbitrary pre and post with the memory dephased
//!   between them (a classical side channel keeps entanglement breaking,
//!   and also partial-transpose positivity, intact);
//! - uniformity: mixed-unitary pre and post (both fix the uniform state);
//! - coherence: pre and post sampled from mixtures of manifestly
//!   incoherent pieces;
//! - bipartite: independent local channels per tensor factor.

use crate::chan::{
    completely_dephasing, compose, kraus_to_choi, max_entangled, replacement_channel,
    tensor_chan, ChoiMatrix, DensityMatrix,
};
use crate::error::{Error, Result};
use crate::linalg::{cx, kron, CMat};
use crate::sample;
use crate::theories::{TheoryKind, TheorySpec};
use rand::seq::SliceRandom;
use rand::Rng;

/// Choi state of the identity channel.
pub fn identity_choi(d: usize) -> Result<ChoiMatrix> {
    ChoiMatrix::new(max_entangled(d), d, d)
}

/// Theta(N) = post . (N (x) id_E) . pre, with pre: A' -> A (x) E and
/// post: B (x) E -> B'.
#[derive(Debug, Clone)]
pub struct SuperChannel {
    pre: ChoiMatrix,
    post: ChoiMatrix,
    dim_mid_in: usize,
    dim_env: usize,
}

impl SuperChannel {
    pub fn new(
        pre: ChoiMatrix,
        post: ChoiMatrix,
        dim_mid_in: usize,
        dim_env: usize,
    ) -> Result<Self> {
        if dim_env == 0 || pre.dim_out() != dim_mid_in * dim_env {
            return Err(Error::DimensionMismatch(format!(
                "pre emits {} but the middle stage expects {} x {}",
                pre.dim_out(),
                dim_mid_in,
                dim_env
            )));
        }
        if post.dim_in() % dim_env != 0 {
            return Err(Error::DimensionMismatch(format!(
                "post consumes {} which does not factor through a memory of {}",
                post.dim_in(),
                dim_env
            )));
        }
        Ok(SuperChannel { pre, post, dim_mid_in, dim_env })
    }

    pub fn dim_env(&self) -> usize {
        self.dim_env
    }

    /// Input and output dimensions of channels this superchannel accepts.
    pub fn channel_dims(&self) -> (usize, usize) {
        (self.dim_mid_in, self.post.dim_in() / self.dim_env)
    }

    /// Dimensions of the transformed channel.
    pub fn result_dims(&self) -> (usize, usize) {
        (self.pre.dim_in(), self.post.dim_out())
    }

    pub fn apply(&self, n: &ChoiMatrix) -> Result<ChoiMatrix> {
        let (da, db) = self.channel_dims();
        if n.dim_in() != da || n.dim_out() != db {
            return Err(Error::DimensionMismatch(format!(
                "superchannel expects a {}->{} channel, got {}->{}",
                da,
                db,
                n.dim_in(),
                n.dim_out()
            )));
        }
        let mid = if self.dim_env == 1 {
            n.clone()
        } else {
            tensor_chan(n, &identity_choi(self.dim_env)?)?
        };
        compose(&self.post, &compose(&mid, &self.pre)?)
    }
}

fn random_channel_choi(din: usize, dout: usize, rng: &mut impl Rng) -> Result<ChoiMatrix> {
    sample::random_channel(din, dout, dout, rng).choi()
}

/// Random convex mixture of unitary conjugations.
fn mixed_unitary_choi(d: usize, terms: usize, rng: &mut impl Rng) -> Result<ChoiMatrix> {
    let weights: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let kraus: Vec<CMat> = weights
        .iter()
        .map(|&w| sample::haar_unitary(d, rng).scale((w / total).sqrt()))
        .collect();
    kraus_to_choi(&kraus, d, d)
}

/// B (x) E -> B: read the memory in its basis, then apply a uniform mixture
/// of unitaries chosen by the outcome. Reading the basis dephases the
/// memory, so cross terms between memory values never survive.
fn controlled_mixed_unitary_choi(
    db: usize,
    de: usize,
    per_branch: usize,
    rng: &mut impl Rng,
) -> Result<ChoiMatrix> {
    let norm = 1.0 / (per_branch as f64).sqrt();
    let mut kraus = Vec::with_capacity(de * per_branch);
    for e in 0..de {
        let bra = CMat::from_fn(1, de, |_, j| if j == e { cx(1.0, 0.0) } else { cx(0.0, 0.0) });
        for _ in 0..per_branch {
            let u = sample::haar_unitary(db, rng);
            kraus.push(kron(&u, &bra).scale(norm));
        }
    }
    kraus_to_choi(&kraus, db * de, db)
}

/// Random mixture of channels that each keep diagonal states diagonal:
/// permutations, diagonal phases, full dephasing after an arbitrary
/// channel, and replacement by a diagonal state.
fn incoherent_choi(din: usize, dout: usize, rng: &mut impl Rng) -> Result<ChoiMatrix> {
    let mut pieces: Vec<CMat> = Vec::new();

    if din == dout {
        let mut order: Vec<usize> = (0..din).collect();
        order.shuffle(rng);
        let perm = CMat::from_fn(din, din, |i, j| {
            if order[j] == i {
                cx(1.0, 0.0)
            } else {
                cx(0.0, 0.0)
            }
        });
        pieces.push(kraus_to_choi(&[perm], din, dout)?.mat().clone());

        let phase = CMat::from_fn(din, din, |i, j| {
            if i == j {
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                cx(t.cos(), t.sin())
            } else {
                cx(0.0, 0.0)
            }
        });
        pieces.push(kraus_to_choi(&[phase], din, dout)?.mat().clone());
    }

    let scrambled = compose(
        &completely_dephasing(dout).choi()?,
        &random_channel_choi(din, dout, rng)?,
    )?;
    pieces.push(scrambled.mat().clone());

    let mut probs: Vec<f64> = (0..dout).map(|_| rng.gen_range(0.05..1.0)).collect();
    let z: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= z);
    let diag = CMat::from_fn(dout, dout, |i, j| {
        if i == j {
            cx(probs[i], 0.0)
        } else {
            cx(0.0, 0.0)
        }
    });
    pieces.push(replacement_channel(din, &DensityMatrix::new(diag)?).choi()?.mat().clone());

    let weights: Vec<f64> = (0..pieces.len()).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut mix = CMat::zeros(din * dout, din * dout);
    for (w, m) in weights.iter().zip(&pieces) {
        mix += m.scale(w / total);
    }
    ChoiMatrix::new(mix, din, dout)
}

/// Independent random channel on every tensor factor.
fn local_product_choi(factors: &[usize], rng: &mut impl Rng) -> Result<ChoiMatrix> {
    let mut acc = random_channel_choi(factors[0], factors[0], rng)?;
    for &f in &factors[1..] {
        acc = tensor_chan(&acc, &random_channel_choi(f, f, rng)?)?;
    }
    Ok(acc)
}

/// Draw a free superchannel for the theory, acting on channels of the
/// spec's dimensions and returning channels of the same dimensions.
pub fn sample_free_superchannel(
    spec: &TheorySpec,
    rng: &mut impl Rng,
) -> Result<SuperChannel> {
    let (da, db) = (spec.dim_in(), spec.dim_out());
    match spec.kind() {
        TheoryKind::Purity => {
            let de = 2;
            let pre = random_channel_choi(da, da * de, rng)?;
            let post = controlled_mixed_unitary_choi(db, de, 2, rng)?;
            SuperChannel::new(pre, post, da, de)
        }
        TheoryKind::Communication => {
            let pre = random_channel_choi(da, da, rng)?;
            let post = random_channel_choi(db, db, rng)?;
            SuperChannel::new(pre, post, da, 1)
        }
        TheoryKind::QuantumMemory => {
            let de = 2;
            let pre = random_channel_choi(da, da * de, rng)?;
            let dephase_mem =
                tensor_chan(&identity_choi(db)?, &completely_dephasing(de).choi()?)?;
            let post = compose(&random_channel_choi(db * de, db, rng)?, &dephase_mem)?;
            SuperChannel::new(pre, post, da, de)
        }
        TheoryKind::Uniformity => {
            let pre = mixed_unitary_choi(da, 3, rng)?;
            let post = mixed_unitary_choi(db, 3, rng)?;
            SuperChannel::new(pre, post, da, 1)
        }
        TheoryKind::Coherence => {
            let pre = incoherent_choi(da, da, rng)?;
            let post = incoherent_choi(db, db, rng)?;
            SuperChannel::new(pre, post, da, 1)
        }
        TheoryKind::Entanglement => {
            let pre = local_product_choi(spec.in_factors(), rng)?;
            let post = local_product_choi(spec.out_factors(), rng)?;
            SuperChannel::new(pre, post, da, 1)
        }
    }
}
