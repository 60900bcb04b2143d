//! Robustness-type measures.
//!
//! `log_robustness` asks how much free weight must be mixed in before the
//! channel lands inside the free set; it is infinite whenever the free cone
//! spans too small a subspace to absorb the channel. `dmax` instead scales a
//! free element until it dominates the channel in the PSD order, which always
//! succeeds, so it stays finite everywhere.

use super::{check_eps, check_match, smoothed_choi_var, Report};
use crate::chan::ChoiMatrix;
use crate::conic::{Outcome, Problem};
use crate::error::Result;
use crate::linalg::{identity, trace_out, trace_re};
use crate::theories::{cone_spans_ambient, constrain_in_cone, TheorySpec};

/// Half diamond-norm distance from the channel to the free set: the usual
/// one-sided dual with the second channel promoted to a free-cone variable.
fn free_diamond_distance(choi: &ChoiMatrix, spec: &TheorySpec) -> Result<f64> {
    let (da, db) = (spec.dim_in(), spec.dim_out());
    let d = da * db;
    let mut prob = Problem::new();
    let y = prob.psd(d);
    constrain_in_cone(&mut prob, y, spec);
    prob.eq_zero(move |p| trace_re(p.mat(y)) - 1.0);
    let z = prob.psd(d);
    let mu = prob.nonneg();
    let scaled = choi.mat().scale(da as f64);
    prob.mat_psd(move |p| p.mat(z) - &scaled + p.mat(y).scale(da as f64));
    prob.mat_psd(move |p| {
        identity(da).scale(p.scalar(mu)) - trace_out(p.mat(z), &[da, db], &[1])
    });
    prob.minimize(move |p| p.scalar(mu));
    Ok(prob.solve()?.optimal()?.objective.max(0.0))
}

/// log2(1 + min Tr X) over decompositions P + X = Y with X, Y in the free
/// cone and P a channel within half diamond-norm `eps` of the input.
pub fn log_robustness(choi: &ChoiMatrix, spec: &TheorySpec, eps: f64) -> Result<Report> {
    check_match(spec, choi)?;
    check_eps(eps)?;
    if !cone_spans_ambient(spec.kind()) {
        // P + X = Y forces P into the cone's linear span, and any spanned
        // channel is itself free, so the value is 0 on the smoothing ball's
        // reach and infinite beyond it. Deciding by distance avoids leaning
        // on infeasibility certificates, which are numerically fragile here.
        let dist = free_diamond_distance(choi, spec)?;
        return Ok(if dist <= eps + 1e-7 {
            Report::solved("lr", 0.0, eps, spec, 0.0)
        } else {
            Report::infinite("lr", eps, spec)
        });
    }
    let (da, db) = (spec.dim_in(), spec.dim_out());
    let d = da * db;
    let mut prob = Problem::new();
    let x = prob.psd(d);
    let y = prob.psd(d);
    constrain_in_cone(&mut prob, x, spec);
    constrain_in_cone(&mut prob, y, spec);
    if eps == 0.0 {
        let c = choi.mat().clone();
        prob.mat_eq_zero(move |p| &c + p.mat(x) - p.mat(y));
    } else {
        let pvar = smoothed_choi_var(&mut prob, choi.mat(), da, db, eps);
        prob.mat_eq_zero(move |p| p.mat(pvar) + p.mat(x) - p.mat(y));
    }
    prob.minimize(move |p| trace_re(p.mat(x)));
    match prob.solve()? {
        Outcome::Optimal(sol) => Ok(Report::solved(
            "lr",
            (1.0 + sol.objective.max(0.0)).log2(),
            eps,
            spec,
            sol.gap,
        )),
        Outcome::Infeasible => Ok(Report::infinite("lr", eps, spec)),
        Outcome::Unbounded => Err(crate::error::Error::SolverFailure(
            "robustness program unbounded".into(),
        )),
    }
}

/// log2 of the least trace of a free-cone element dominating some channel in
/// the eps ball: min log2 Tr Y with Y >= P, Y free.
pub fn dmax(choi: &ChoiMatrix, spec: &TheorySpec, eps: f64) -> Result<Report> {
    check_match(spec, choi)?;
    check_eps(eps)?;
    let (da, db) = (spec.dim_in(), spec.dim_out());
    let d = da * db;
    let mut prob = Problem::new();
    let y = prob.psd(d);
    constrain_in_cone(&mut prob, y, spec);
    if eps == 0.0 {
        let c = choi.mat().clone();
        prob.mat_psd(move |p| p.mat(y) - &c);
    } else {
        let pvar = smoothed_choi_var(&mut prob, choi.mat(), da, db, eps);
        prob.mat_psd(move |p| p.mat(y) - p.mat(pvar));
    }
    prob.minimize(move |p| trace_re(p.mat(y)));
    let sol = prob.solve()?.optimal()?;
    // Y >= P forces Tr Y >= 1, so the clamp only absorbs solver noise
    let value = sol.objective.log2().max(0.0);
    Ok(Report::solved("dmax", value, eps, spec, sol.gap))
}
