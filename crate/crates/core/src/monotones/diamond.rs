//! Diamond-norm distance between channels.
//!
//! Uses the one-sided dual program valid for differences of trace-preserving
//! maps: half the diamond norm of N - M is the least spectral bound mu such
//! that some Z >= d_A (Phi_N - Phi_M), Z >= 0 has Tr_B Z <= mu I.

use crate::chan::ChoiMatrix;
use crate::conic::Problem;
use crate::error::{Error, Result};
use crate::linalg::{identity, trace_out};

/// Half the diamond-norm distance between two channels of equal dims.
pub fn diamond_distance(a: &ChoiMatrix, b: &ChoiMatrix) -> Result<f64> {
    if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "{}->{} vs {}->{}",
            a.dim_in(),
            a.dim_out(),
            b.dim_in(),
            b.dim_out()
        )));
    }
    let (da, db) = (a.dim_in(), a.dim_out());
    let d = da * db;
    let mut prob = Problem::new();
    let z = prob.psd(d);
    let mu = prob.nonneg();
    let diff = (a.mat() - b.mat()).scale(da as f64);
    prob.mat_psd(move |p| p.mat(z) - &diff);
    prob.mat_psd(move |p| {
        identity(da).scale(p.scalar(mu)) - trace_out(p.mat(z), &[da, db], &[1])
    });
    prob.minimize(move |p| p.scalar(mu));
    Ok(prob.solve()?.optimal()?.objective.max(0.0))
}
