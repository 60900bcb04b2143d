//! Fidelity against the free set.
//!
//! The Choi-level quantity maximizes Uhlmann fidelity between the channel's
//! Choi state and a normalized free element, through the standard
//! root-fidelity block program: sqrt F = max Re Tr X subject to
//! [[rho, X], [X', sigma]] >= 0. For channels with pure Choi states its
//! negative log coincides with the entangled-input testing exponent, which
//! the tests pin down.

use super::hypothesis::ProbeBudget;
use super::{check_match, perturb_pure, phi_plus_vec, BoundKind, Report};
use crate::chan::{apply_choi_raw, ChoiMatrix};
use crate::conic::{Outcome, Problem};
use crate::error::{Error, Result};
use crate::linalg::{cx, hermitize, proj, sqrtm_psd, support_basis, trace_re, CMat};
use crate::theories::{constrain_in_cone, TheorySpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn block2(tl: &CMat, tr: &CMat, br: &CMat) -> CMat {
    let d = tl.nrows();
    let mut big = CMat::zeros(2 * d, 2 * d);
    big.view_mut((0, 0), (d, d)).copy_from(tl);
    big.view_mut((0, d), (d, d)).copy_from(tr);
    big.view_mut((d, 0), (d, d)).copy_from(&tr.adjoint());
    big.view_mut((d, d), (d, d)).copy_from(br);
    big
}

/// Isometry onto the support of rho and the compression of rho onto it.
///
/// Fidelity only sees sigma through supp(rho), and compressing keeps the
/// block program strictly feasible even for pure or rank-deficient rho,
/// which the solver otherwise handles at degraded accuracy.
fn support_compress(rho: &CMat) -> (CMat, CMat) {
    let mut v = support_basis(rho, 1e-11);
    if v.ncols() == 0 {
        v = CMat::identity(rho.nrows(), 1);
    }
    let rho_r = &v.adjoint() * rho * &v;
    (v, hermitize(&rho_r))
}

/// max over free sigma of sqrt F(rho, sigma(p)), with sigma affine in the
/// program variables; shared core of the two fidelity entry points.
fn root_fid_core(
    prob: &mut Problem,
    rho: &CMat,
    sigma_of: impl Fn(&crate::conic::Point) -> CMat + 'static,
) {
    let (v, rho_r) = support_compress(rho);
    let r = rho_r.nrows();
    let h = prob.herm(r);
    let k = prob.herm(r);
    prob.mat_psd(move |p| {
        let x = p.mat(h) + p.mat(k).map(|z| z * cx(0.0, 1.0));
        let sigma_r = &v.adjoint() * sigma_of(p) * &v;
        block2(&rho_r, &x, &sigma_r)
    });
    prob.maximize(move |p| trace_re(p.mat(h)));
}

/// Fidelity of two (nearly) PSD matrices without state validation; clipping
/// inside the square roots absorbs solver-level negativity.
fn fid_raw(a: &CMat, b: &CMat) -> f64 {
    let ra = sqrtm_psd(a);
    let inner = &ra * b * &ra;
    let rt = sqrtm_psd(&hermitize(&inner));
    trace_re(&rt).clamp(0.0, 1.0).powi(2)
}

/// max over free sigma of sqrt F(rho, sigma) where sigma is the output of a
/// free element on `input`; returns the root fidelity and the free element.
fn free_fid_at(
    choi: &ChoiMatrix,
    spec: &TheorySpec,
    input: &CMat,
    dr: usize,
) -> Result<(f64, CMat)> {
    let (da, db) = (spec.dim_in(), spec.dim_out());
    let d = da * db;
    let rho = hermitize(&apply_choi_raw(choi.mat(), input, da, db, dr));
    let mut prob = Problem::new();
    let y = prob.psd(d);
    constrain_in_cone(&mut prob, y, spec);
    prob.eq_zero(move |p| trace_re(p.mat(y)) - 1.0);
    let inp = input.clone();
    root_fid_core(&mut prob, &rho, move |p| {
        apply_choi_raw(p.mat(y), &inp, da, db, dr)
    });
    match prob.solve()? {
        Outcome::Optimal(sol) => {
            Ok((sol.objective.clamp(0.0, 1.0), sol.mat(y).clone()))
        }
        _ => Err(Error::SolverFailure("fidelity program degenerate".into())),
    }
}

/// Root fidelity between the Choi state and the free set.
pub fn root_fidelity_to_free(choi: &ChoiMatrix, spec: &TheorySpec) -> Result<f64> {
    check_match(spec, choi)?;
    let d = choi.total_dim();
    let mut prob = Problem::new();
    let y = prob.psd(d);
    constrain_in_cone(&mut prob, y, spec);
    prob.eq_zero(move |p| trace_re(p.mat(y)) - 1.0);
    root_fid_core(&mut prob, choi.mat(), move |p| p.mat(y).clone());
    Ok(prob.solve()?.optimal()?.objective.clamp(0.0, 1.0))
}

/// -log2 of the best free fidelity at the Choi state.
pub fn log_fidelity(choi: &ChoiMatrix, spec: &TheorySpec) -> Result<Report> {
    let r = root_fidelity_to_free(choi, spec)?;
    let f = (r * r).clamp(0.0, 1.0);
    let value = if f <= 0.0 { f64::INFINITY } else { (-f.log2()).max(0.0) };
    Ok(Report::solved("lfid", value, 0.0, spec, 0.0))
}

/// The alternation estimate of the worst-input free fidelity, together with
/// the exact Choi-level value.
pub fn fidelity_measures(
    choi: &ChoiMatrix,
    spec: &TheorySpec,
    budget: &ProbeBudget,
) -> Result<(Report, Report)> {
    check_match(spec, choi)?;
    let relaxed = !spec.relaxation_exact();
    let sqrt_f = root_fidelity_to_free(choi, spec)?;
    let f_tilde = (sqrt_f * sqrt_f).clamp(0.0, 1.0);

    let (da, db) = (spec.dim_in(), spec.dim_out());
    let dr = da;
    let f_est = if da == 1 {
        // one input state: the Choi program already answers the question
        f_tilde
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        let mut psi = phi_plus_vec(da);
        let (mut val, mut yfree) = free_fid_at(choi, spec, &proj(&psi), dr)?;
        for _ in 0..2 {
            // fixed free element: walk the input downhill
            let out = |v: &crate::linalg::CVec, yf: &CMat| {
                let p = proj(v);
                fid_raw(
                    &hermitize(&apply_choi_raw(choi.mat(), &p, da, db, dr)),
                    &hermitize(&apply_choi_raw(yf, &p, da, db, dr)),
                )
            };
            let mut cur = out(&psi, &yfree);
            let mut scale = 0.4;
            for _ in 0..budget.steps {
                let cand = perturb_pure(&psi, scale, &mut rng);
                let v = out(&cand, &yfree);
                if v < cur {
                    cur = v;
                    psi = cand;
                    scale *= 1.2;
                } else {
                    scale *= 0.7;
                }
                if scale < 1e-4 {
                    break;
                }
            }
            let (v2, y2) = free_fid_at(choi, spec, &proj(&psi), dr)?;
            val = v2;
            yfree = y2;
        }
        (val * val).clamp(0.0, 1.0)
    };

    Ok((
        Report {
            measure: "fid",
            value: f_est,
            bound: BoundKind::Heuristic,
            epsilon: 0.0,
            relaxed,
            gap: 0.0,
        },
        Report {
            measure: "fid-choi",
            value: f_tilde,
            bound: if relaxed { BoundKind::Upper } else { BoundKind::Exact },
            epsilon: 0.0,
            relaxed,
            gap: 0.0,
        },
    ))
}
