//! Resource measures for channels.
//!
//! Every measure here reduces to a conic program over a theory's free Choi
//! set. Values come back as a [`Report`] carrying bound semantics: with a
//! relaxed cone description (PPT standing in for separability) a minimum
//! over the free set certifies only a lower bound, and search-based
//! estimates are flagged heuristic. Smoothed variants place a diamond-norm
//! ball of radius epsilon around the channel inside the same program, so no
//! outer search over nearby channels is ever needed.

pub mod diamond;
pub mod entropy;
pub mod fid;
pub mod hypothesis;
pub mod robustness;

pub use diamond::diamond_distance;
pub use entropy::channel_entropy;
pub use fid::{fidelity_measures, log_fidelity, root_fidelity_to_free};
pub use hypothesis::{
    dh_channel_interval, dh_choi, dh_probe, dh_state, dh_unassisted, Interval, ProbeBudget,
};
pub use robustness::{dmax, log_robustness};

use crate::chan::{tensor_power, ChoiMatrix};
use crate::conic::{MatVar, Problem};
use crate::error::{Error, Result};
use crate::linalg::{basis_ket, cx, identity, trace_out, trace_re, CVec};
use crate::theories::{constrain_in_cone, TheorySpec};
use rand::Rng;
use rand_distr::StandardNormal;

/// How to read a reported value relative to the true measure of the theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Exact,
    Lower,
    Upper,
    Heuristic,
}

impl BoundKind {
    pub fn token(self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::Lower => "lower",
            BoundKind::Upper => "upper",
            BoundKind::Heuristic => "heuristic",
        }
    }
}

/// A measure value with its semantics attached.
#[derive(Debug, Clone)]
pub struct Report {
    pub measure: &'static str,
    /// The value in bits; may be +inf (robustness over a cone that cannot
    /// absorb the channel).
    pub value: f64,
    pub bound: BoundKind,
    pub epsilon: f64,
    /// True when the cone is a superset of the theory's actual free set.
    pub relaxed: bool,
    /// Primal-dual gap of the solve that produced the value (0 for values
    /// settled by infeasibility or composition of other reports).
    pub gap: f64,
}

impl Report {
    fn solved(
        measure: &'static str,
        value: f64,
        epsilon: f64,
        spec: &TheorySpec,
        gap: f64,
    ) -> Self {
        let relaxed = !spec.relaxation_exact();
        Report {
            measure,
            value,
            bound: if relaxed { BoundKind::Lower } else { BoundKind::Exact },
            epsilon,
            relaxed,
            gap,
        }
    }

    /// Infeasibility of the defining program: the value is +inf even for the
    /// unrelaxed set, since shrinking the cone cannot restore feasibility.
    fn infinite(measure: &'static str, epsilon: f64, spec: &TheorySpec) -> Self {
        Report {
            measure,
            value: f64::INFINITY,
            bound: BoundKind::Exact,
            epsilon,
            relaxed: !spec.relaxation_exact(),
            gap: 0.0,
        }
    }
}

pub(crate) fn check_match(spec: &TheorySpec, choi: &ChoiMatrix) -> Result<()> {
    if choi.dim_in() != spec.dim_in() || choi.dim_out() != spec.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "channel is {}->{}, theory wants {}->{}",
            choi.dim_in(),
            choi.dim_out(),
            spec.dim_in(),
            spec.dim_out()
        )));
    }
    Ok(())
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    Ok(())
}

/// Adds a channel variable constrained to lie within half diamond-norm
/// `eps` of `center` and returns it. The ball is the dual characterization
/// for differences of channels: Z >= d_A (P - C), Z >= 0, Tr_B Z <= eps I.
///
/// Callers should special-case eps = 0 and use the center directly.
pub(crate) fn smoothed_choi_var(
    prob: &mut Problem,
    center: &crate::linalg::CMat,
    da: usize,
    db: usize,
    eps: f64,
) -> MatVar {
    let d = da * db;
    let p = prob.psd(d);
    prob.mat_eq_zero(move |pt| {
        trace_out(pt.mat(p), &[da, db], &[1]) - identity(da).unscale(da as f64)
    });
    let z = prob.psd(d);
    let c = center.clone();
    prob.mat_psd(move |pt| pt.mat(z) - (pt.mat(p) - &c).scale(da as f64));
    prob.mat_psd(move |pt| {
        identity(da).scale(eps) - trace_out(pt.mat(z), &[da, db], &[1])
    });
    p
}

pub(crate) fn phi_plus_vec(d: usize) -> CVec {
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        v += basis_ket(d * d, i * d + i);
    }
    v.unscale((d as f64).sqrt())
}

/// Gaussian jiggle on the sphere of pure states.
pub(crate) fn perturb_pure(v: &CVec, scale: f64, rng: &mut impl Rng) -> CVec {
    let mut w = v.clone();
    for i in 0..w.len() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        w[i] += cx(re * scale, im * scale);
    }
    let n = w.norm();
    w.unscale(n)
}

/// Per-copy value of `f` on the n-fold tensor power of the channel.
pub fn regularized<F>(f: F, choi: &ChoiMatrix, spec: &TheorySpec, n: usize) -> Result<f64>
where
    F: Fn(&ChoiMatrix, &TheorySpec) -> Result<f64>,
{
    let big = tensor_power(choi, n)?;
    let pspec = spec.power(n)?;
    Ok(f(&big, &pspec)? / n as f64)
}

/// Extremes (min, max) of Tr[target Y] over normalized members of the free
/// set. Equality of the two extremes means every free channel sees the same
/// overlap with the target.
pub fn free_overlap_range(spec: &TheorySpec, target: &ChoiMatrix) -> Result<(f64, f64)> {
    check_match(spec, target)?;
    let mut ends = [0.0f64; 2];
    for (slot, maximize) in [(0usize, false), (1usize, true)] {
        let mut prob = Problem::new();
        let y = prob.psd(target.total_dim());
        constrain_in_cone(&mut prob, y, spec);
        prob.eq_zero(move |p| trace_re(p.mat(y)) - 1.0);
        let t = target.mat().clone();
        let obj = move |p: &crate::conic::Point| crate::linalg::inner_re(&t, p.mat(y));
        if maximize {
            prob.maximize(obj);
        } else {
            prob.minimize(obj);
        }
        ends[slot] = prob.solve()?.optimal()?.objective;
    }
    Ok((ends[0], ends[1]))
}
