//! Declarative layer over the Clarabel interior-point solver.
//!
//! Problems are stated with Hermitian matrix variables, real scalar
//! variables, and affine constraints written as plain closures over a
//! [`Point`]. The builder discovers linear coefficients by probing each
//! closure at unit values of every variable parameter, so formulations read
//! like the math they implement and stay independent of the solver's data
//! layout.
//!
//! A Hermitian n x n variable has n^2 real parameters: the diagonal, then
//! (re, im) for each strict upper entry. PSD requirements go through the
//! real embedding E(H) = [[Re H, -Im H], [Im H, Re H]], which is symmetric
//! for Hermitian H and PSD exactly when H is.

use crate::error::{Error, Result};
use crate::linalg::{cx, CMat};
use crate::tol;
use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatVar(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarVar(usize);

/// Variable assignment handed to constraint and objective closures.
pub struct Point {
    mats: Vec<CMat>,
    scalars: Vec<f64>,
}

impl Point {
    pub fn mat(&self, v: MatVar) -> &CMat {
        &self.mats[v.0]
    }

    pub fn scalar(&self, v: ScalarVar) -> f64 {
        self.scalars[v.0]
    }
}

type ScalarFn = Box<dyn Fn(&Point) -> f64>;
type MatFn = Box<dyn Fn(&Point) -> CMat>;

enum Con {
    /// f(p) == 0
    ScalarEq(ScalarFn),
    /// f(p) >= 0
    ScalarGe(ScalarFn),
    /// Hermitian f(p) == 0
    MatEq(MatFn),
    /// Hermitian f(p) >= 0 in the PSD order
    MatPsd(MatFn),
}

pub struct Problem {
    mat_dims: Vec<usize>,
    mat_psd: Vec<bool>,
    scalar_nonneg: Vec<bool>,
    cons: Vec<Con>,
    obj: Option<ScalarFn>,
    maximize: bool,
}

pub enum Outcome {
    Optimal(Solution),
    Infeasible,
    Unbounded,
}

impl Outcome {
    /// The optimal solution, or a solver error for the two degenerate cases.
    pub fn optimal(self) -> Result<Solution> {
        match self {
            Outcome::Optimal(s) => Ok(s),
            Outcome::Infeasible => Err(Error::SolverFailure("problem is infeasible".into())),
            Outcome::Unbounded => Err(Error::SolverFailure("problem is unbounded".into())),
        }
    }
}

pub struct Solution {
    pub objective: f64,
    /// False when the solver stopped at reduced accuracy.
    pub accurate: bool,
    /// Primal-dual objective gap reported by the solver.
    pub gap: f64,
    point: Point,
}

impl Solution {
    pub fn mat(&self, v: MatVar) -> &CMat {
        self.point.mat(v)
    }

    pub fn scalar(&self, v: ScalarVar) -> f64 {
        self.point.scalar(v)
    }
}

const COEF_DROP: f64 = 1e-13;

fn herm_params(n: usize) -> usize {
    n * n
}

/// Writes parameter k of an n x n Hermitian variable into m scaled by t.
fn add_herm_basis(m: &mut CMat, n: usize, k: usize, t: f64) {
    if k < n {
        m[(k, k)] += cx(t, 0.0);
        return;
    }
    // strict upper entries in row-major order, re then im
    let mut idx = k - n;
    let mut i = 0;
    let rem = loop {
        let row_len = 2 * (n - i - 1);
        if idx < row_len {
            break idx;
        }
        idx -= row_len;
        i += 1;
    };
    let j = i + 1 + rem / 2;
    if rem % 2 == 0 {
        m[(i, j)] += cx(t, 0.0);
        m[(j, i)] += cx(t, 0.0);
    } else {
        m[(i, j)] += cx(0.0, t);
        m[(j, i)] += cx(0.0, -t);
    }
}

fn herm_from_params(n: usize, params: &[f64]) -> CMat {
    let mut m = CMat::zeros(n, n);
    for (k, &t) in params.iter().enumerate() {
        if t != 0.0 {
            add_herm_basis(&mut m, n, k, t);
        }
    }
    m
}

/// svec of the real embedding of Hermitian h, in the solver's column-major
/// upper-triangle order with sqrt(2) on off-diagonal entries.
fn svec_embed(h: &CMat) -> Vec<f64> {
    let n = h.nrows();
    let d = 2 * n;
    let entry = |i: usize, j: usize| -> f64 {
        // E = [[Re, -Im], [Im, Re]]
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        match (bi, bj) {
            (0, 0) | (1, 1) => h[(ii, jj)].re,
            (0, 1) => -h[(ii, jj)].im,
            _ => h[(ii, jj)].im,
        }
    };
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    let s2 = 2.0_f64.sqrt();
    for j in 0..d {
        for i in 0..=j {
            let v = entry(i, j);
            out.push(if i == j { v } else { s2 * v });
        }
    }
    out
}

struct Row {
    cols: Vec<(usize, f64)>,
    rhs: f64,
}

impl Problem {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        Self {
            mat_dims: Vec::new(),
            mat_psd: Vec::new(),
            scalar_nonneg: Vec::new(),
            cons: Vec::new(),
            obj: None,
            maximize: false,
        }
    }

    /// Free Hermitian matrix variable.
    pub fn herm(&mut self, n: usize) -> MatVar {
        self.mat_dims.push(n);
        self.mat_psd.push(false);
        MatVar(self.mat_dims.len() - 1)
    }

    /// Hermitian matrix variable constrained PSD.
    pub fn psd(&mut self, n: usize) -> MatVar {
        let v = self.herm(n);
        self.mat_psd[v.0] = true;
        v
    }

    pub fn scalar(&mut self) -> ScalarVar {
        self.scalar_nonneg.push(false);
        ScalarVar(self.scalar_nonneg.len() - 1)
    }

    pub fn nonneg(&mut self) -> ScalarVar {
        self.scalar_nonneg.push(true);
        ScalarVar(self.scalar_nonneg.len() - 1)
    }

    pub fn eq_zero(&mut self, f: impl Fn(&Point) -> f64 + 'static) {
        self.cons.push(Con::ScalarEq(Box::new(f)));
    }

    pub fn ge_zero(&mut self, f: impl Fn(&Point) -> f64 + 'static) {
        self.cons.push(Con::ScalarGe(Box::new(f)));
    }

    pub fn mat_eq_zero(&mut self, f: impl Fn(&Point) -> CMat + 'static) {
        self.cons.push(Con::MatEq(Box::new(f)));
    }

    pub fn mat_psd(&mut self, f: impl Fn(&Point) -> CMat + 'static) {
        self.cons.push(Con::MatPsd(Box::new(f)));
    }

    pub fn minimize(&mut self, f: impl Fn(&Point) -> f64 + 'static) {
        self.obj = Some(Box::new(f));
        self.maximize = false;
    }

    pub fn maximize(&mut self, f: impl Fn(&Point) -> f64 + 'static) {
        self.obj = Some(Box::new(f));
        self.maximize = true;
    }

    fn n_params(&self) -> usize {
        self.mat_dims.iter().map(|&n| herm_params(n)).sum::<usize>() + self.scalar_nonneg.len()
    }

    fn point_from(&self, params: &[f64]) -> Point {
        let mut mats = Vec::with_capacity(self.mat_dims.len());
        let mut off = 0;
        for &n in &self.mat_dims {
            mats.push(herm_from_params(n, &params[off..off + herm_params(n)]));
            off += herm_params(n);
        }
        Point {
            mats,
            scalars: params[off..].to_vec(),
        }
    }

    fn zero_point(&self) -> Point {
        self.point_from(&vec![0.0; self.n_params()])
    }

    fn unit_point(&self, k: usize) -> Point {
        let mut p = vec![0.0; self.n_params()];
        p[k] = 1.0;
        self.point_from(&p)
    }

    /// Quick second-difference test that the closure is affine in the
    /// variables; probing silently mislinearizes anything else.
    fn check_affine_scalar(&self, f: &ScalarFn) -> Result<()> {
        let n = self.n_params();
        let probe: Vec<f64> = (0..n).map(|k| 0.5 + 0.25 * ((k % 7) as f64)).collect();
        let double: Vec<f64> = probe.iter().map(|v| 2.0 * v).collect();
        let f0 = f(&self.zero_point());
        let f1 = f(&self.point_from(&probe));
        let f2 = f(&self.point_from(&double));
        let defect = (f2 - 2.0 * f1 + f0).abs();
        let scale = 1.0 + f0.abs() + f1.abs() + f2.abs();
        if defect > 1e-8 * scale {
            return Err(Error::SolverFailure("non-affine scalar expression".into()));
        }
        Ok(())
    }

    fn check_affine_mat(&self, f: &MatFn) -> Result<()> {
        let n = self.n_params();
        let probe: Vec<f64> = (0..n).map(|k| 0.5 + 0.25 * ((k % 7) as f64)).collect();
        let double: Vec<f64> = probe.iter().map(|v| 2.0 * v).collect();
        let f0 = f(&self.zero_point());
        let f1 = f(&self.point_from(&probe));
        let f2 = f(&self.point_from(&double));
        let scale = 1.0 + f0.norm() + f1.norm() + f2.norm();
        let defect = (f2 - f1.scale(2.0) + &f0).norm();
        if defect > 1e-8 * scale {
            return Err(Error::SolverFailure("non-affine matrix expression".into()));
        }
        let herm = crate::linalg::hermiticity_defect(&f1);
        if herm > 1e-9 * scale {
            return Err(Error::SolverFailure("non-Hermitian matrix expression".into()));
        }
        Ok(())
    }

    fn scalar_row(&self, f: &ScalarFn) -> Row {
        let c0 = f(&self.zero_point());
        let mut cols = Vec::new();
        for k in 0..self.n_params() {
            let v = f(&self.unit_point(k)) - c0;
            if v.abs() > COEF_DROP {
                cols.push((k, v));
            }
        }
        Row { cols, rhs: c0 }
    }

    /// Probes a matrix constraint: constant term plus per-parameter columns.
    fn mat_probe(&self, f: &MatFn) -> (CMat, Vec<(usize, CMat)>) {
        let c0 = f(&self.zero_point());
        let mut cols = Vec::new();
        for k in 0..self.n_params() {
            let m = f(&self.unit_point(k)) - &c0;
            if m.norm() > COEF_DROP {
                cols.push((k, m));
            }
        }
        (c0, cols)
    }

    pub fn solve(&self) -> Result<Outcome> {
        let n = self.n_params();
        let mut eq_rows: Vec<Row> = Vec::new();
        let mut ge_rows: Vec<Row> = Vec::new();
        // (side dim of embedded block, rows in svec order)
        let mut psd_blocks: Vec<(usize, Vec<Row>)> = Vec::new();

        // x >= 0 rows for flagged scalars
        let scalar_base: usize =
            self.mat_dims.iter().map(|&d| herm_params(d)).sum::<usize>();
        for (s, &flag) in self.scalar_nonneg.iter().enumerate() {
            if flag {
                ge_rows.push(Row {
                    cols: vec![(scalar_base + s, -1.0)],
                    rhs: 0.0,
                });
            }
        }

        // PSD variable blocks
        let mut off = 0;
        for (v, &dim) in self.mat_dims.iter().enumerate() {
            if self.mat_psd[v] {
                let side = 2 * dim;
                let mut rows: Vec<Row> =
                    (0..side * (side + 1) / 2).map(|_| Row { cols: Vec::new(), rhs: 0.0 }).collect();
                for k in 0..herm_params(dim) {
                    let mut basis = CMat::zeros(dim, dim);
                    add_herm_basis(&mut basis, dim, k, 1.0);
                    for (r, v) in svec_embed(&basis).into_iter().enumerate() {
                        if v.abs() > COEF_DROP {
                            rows[r].cols.push((off + k, -v));
                        }
                    }
                }
                psd_blocks.push((side, rows));
            }
            off += herm_params(dim);
        }

        // stated constraints
        for con in &self.cons {
            match con {
                Con::ScalarEq(f) => {
                    self.check_affine_scalar(f)?;
                    let r = self.scalar_row(f);
                    eq_rows.push(Row { cols: r.cols.iter().map(|&(c, v)| (c, v)).collect(), rhs: -r.rhs });
                }
                Con::ScalarGe(f) => {
                    self.check_affine_scalar(f)?;
                    let r = self.scalar_row(f);
                    // f = c0 + g.x >= 0  ->  -g.x + s = c0, s >= 0
                    ge_rows.push(Row {
                        cols: r.cols.iter().map(|&(c, v)| (c, -v)).collect(),
                        rhs: r.rhs,
                    });
                }
                Con::MatEq(f) => {
                    self.check_affine_mat(f)?;
                    let (c0, cols) = self.mat_probe(f);
                    let d = c0.nrows();
                    for i in 0..d {
                        for j in i..d {
                            let mut row = Row { cols: Vec::new(), rhs: -c0[(i, j)].re };
                            for (k, m) in &cols {
                                let v = m[(i, j)].re;
                                if v.abs() > COEF_DROP {
                                    row.cols.push((*k, v));
                                }
                            }
                            if !row.cols.is_empty() || row.rhs.abs() > COEF_DROP {
                                eq_rows.push(row);
                            }
                            if i < j {
                                let mut row = Row { cols: Vec::new(), rhs: -c0[(i, j)].im };
                                for (k, m) in &cols {
                                    let v = m[(i, j)].im;
                                    if v.abs() > COEF_DROP {
                                        row.cols.push((*k, v));
                                    }
                                }
                                if !row.cols.is_empty() || row.rhs.abs() > COEF_DROP {
                                    eq_rows.push(row);
                                }
                            }
                        }
                    }
                }
                Con::MatPsd(f) => {
                    self.check_affine_mat(f)?;
                    let (c0, cols) = self.mat_probe(f);
                    let side = 2 * c0.nrows();
                    let rhs = svec_embed(&c0);
                    let mut rows: Vec<Row> = rhs
                        .into_iter()
                        .map(|b| Row { cols: Vec::new(), rhs: b })
                        .collect();
                    for (k, m) in &cols {
                        for (r, v) in svec_embed(m).into_iter().enumerate() {
                            if v.abs() > COEF_DROP {
                                rows[r].cols.push((*k, -v));
                            }
                        }
                    }
                    psd_blocks.push((side, rows));
                }
            }
        }

        // objective
        let mut q = vec![0.0; n];
        if let Some(f) = &self.obj {
            self.check_affine_scalar(f)?;
            let r = self.scalar_row(f);
            let sign = if self.maximize { -1.0 } else { 1.0 };
            for (c, v) in r.cols {
                q[c] = sign * v;
            }
        }

        // assemble in cone order: Zero, Nonnegative, PSD triangles
        let mut ti = Vec::new();
        let mut tj = Vec::new();
        let mut tv = Vec::new();
        let mut b = Vec::new();
        let push_row = |row: &Row, b: &mut Vec<f64>, ti: &mut Vec<usize>, tj: &mut Vec<usize>, tv: &mut Vec<f64>| {
            let r = b.len();
            for &(c, v) in &row.cols {
                ti.push(r);
                tj.push(c);
                tv.push(v);
            }
            b.push(row.rhs);
        };

        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        for row in &eq_rows {
            push_row(row, &mut b, &mut ti, &mut tj, &mut tv);
        }
        if !eq_rows.is_empty() {
            cones.push(SupportedConeT::ZeroConeT(eq_rows.len()));
        }
        for row in &ge_rows {
            push_row(row, &mut b, &mut ti, &mut tj, &mut tv);
        }
        if !ge_rows.is_empty() {
            cones.push(SupportedConeT::NonnegativeConeT(ge_rows.len()));
        }
        for (side, rows) in &psd_blocks {
            for row in rows {
                push_row(row, &mut b, &mut ti, &mut tj, &mut tv);
            }
            cones.push(SupportedConeT::PSDTriangleConeT(*side));
        }

        let m = b.len();
        let a = CscMatrix::new_from_triplets(m, n, ti, tj, tv);
        let p = CscMatrix::zeros((n, n));

        let mut settings = DefaultSettings::default();
        settings.verbose = false;
        settings.max_iter = 500;
        settings.tol_gap_abs = tol::SOLVER_TOL;
        settings.tol_gap_rel = tol::SOLVER_TOL;
        settings.tol_feas = tol::SOLVER_TOL;

        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
            .map_err(|e| Error::SolverFailure(format!("setup: {e:?}")))?;
        solver.solve();
        let sol = &solver.solution;

        let accurate = match sol.status {
            SolverStatus::Solved => true,
            SolverStatus::AlmostSolved => false,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                return Ok(Outcome::Infeasible)
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                return Ok(Outcome::Unbounded)
            }
            other => {
                return Err(Error::SolverFailure(format!("solver stopped: {other:?}")))
            }
        };

        let point = self.point_from(&sol.x);
        let objective = self.obj.as_ref().map(|f| f(&point)).unwrap_or(0.0);
        let gap = (sol.obj_val - sol.obj_val_dual).abs();
        Ok(Outcome::Optimal(Solution { objective, accurate, gap, point }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, trace_re};
    use approx::assert_abs_diff_eq;

    fn test_a() -> CMat {
        // eigenvalues -1 +- sqrt(5): {1.2360679..., -3.2360679...}
        CMat::from_row_slice(
            2,
            2,
            &[cx(1.0, 0.0), cx(0.0, 1.0), cx(0.0, -1.0), cx(-3.0, 0.0)],
        )
    }

    #[test]
    fn min_trace_dominating_psd_matrix() {
        // min Tr X s.t. X >= A, X >= 0 equals the positive part of A's trace.
        let mut prob = Problem::new();
        let x = prob.psd(2);
        let a = test_a();
        prob.mat_psd(move |p| p.mat(x) - &a);
        prob.minimize(move |p| trace_re(p.mat(x)));
        let sol = prob.solve().unwrap().optimal().unwrap();
        assert_abs_diff_eq!(sol.objective, 5.0_f64.sqrt() - 1.0, epsilon = 1e-7);
    }

    #[test]
    fn smallest_dominating_multiple_of_identity() {
        // min t s.t. t I >= A equals the top eigenvalue of A.
        let mut prob = Problem::new();
        let t = prob.scalar();
        let a = test_a();
        prob.mat_psd(move |p| identity(2).scale(p.scalar(t)) - &a);
        prob.minimize(move |p| p.scalar(t));
        let sol = prob.solve().unwrap().optimal().unwrap();
        assert_abs_diff_eq!(sol.objective, 5.0_f64.sqrt() - 1.0, epsilon = 1e-7);
    }

    #[test]
    fn top_eigenvalue_as_state_optimization() {
        // max Tr(rho A) over density matrices equals the top eigenvalue.
        let mut prob = Problem::new();
        let rho = prob.psd(2);
        let a = test_a();
        prob.eq_zero(move |p| trace_re(p.mat(rho)) - 1.0);
        prob.maximize(move |p| trace_re(&(p.mat(rho) * &a)));
        let sol = prob.solve().unwrap().optimal().unwrap();
        assert_abs_diff_eq!(sol.objective, 5.0_f64.sqrt() - 1.0, epsilon = 1e-7);
    }

    #[test]
    fn matrix_equality_pins_variable() {
        let b = CMat::from_row_slice(
            2,
            2,
            &[cx(2.0, 0.0), cx(0.5, -0.25), cx(0.5, 0.25), cx(1.0, 0.0)],
        );
        let mut prob = Problem::new();
        let x = prob.herm(2);
        let bc = b.clone();
        prob.mat_eq_zero(move |p| p.mat(x) - &bc);
        prob.minimize(move |p| trace_re(p.mat(x)));
        let sol = prob.solve().unwrap().optimal().unwrap();
        assert_abs_diff_eq!(sol.objective, 3.0, epsilon = 1e-7);
        assert!((sol.mat(x) - &b).norm() < 1e-6);
    }

    #[test]
    fn infeasible_detected() {
        let mut prob = Problem::new();
        let x = prob.psd(2);
        prob.mat_psd(move |p| -p.mat(x) - identity(2));
        prob.minimize(move |p| trace_re(p.mat(x)));
        assert!(matches!(prob.solve().unwrap(), Outcome::Infeasible));
    }

    #[test]
    fn unbounded_detected() {
        let mut prob = Problem::new();
        let x = prob.psd(2);
        prob.maximize(move |p| trace_re(p.mat(x)));
        assert!(matches!(prob.solve().unwrap(), Outcome::Unbounded));
    }

    #[test]
    fn scalar_bound_via_nonneg_var() {
        let mut prob = Problem::new();
        let x = prob.nonneg();
        prob.ge_zero(move |p| p.scalar(x) - 3.0);
        prob.minimize(move |p| p.scalar(x));
        let sol = prob.solve().unwrap().optimal().unwrap();
        assert_abs_diff_eq!(sol.objective, 3.0, epsilon = 1e-7);
    }

    #[test]
    fn non_affine_expression_rejected() {
        let mut prob = Problem::new();
        let x = prob.psd(2);
        prob.ge_zero(move |p| trace_re(p.mat(x)).powi(2) - 1.0);
        prob.minimize(move |p| trace_re(p.mat(x)));
        assert!(prob.solve().is_err());
    }

    #[test]
    fn herm_param_round_trip() {
        let b = CMat::from_row_slice(
            3,
            3,
            &[
                cx(1.0, 0.0), cx(0.2, 0.3), cx(-0.1, 0.5),
                cx(0.2, -0.3), cx(2.0, 0.0), cx(0.0, -0.7),
                cx(-0.1, -0.5), cx(0.0, 0.7), cx(-1.0, 0.0),
            ],
        );
        // params: diag, then row-major upper (re, im)
        let params = [
            1.0, 2.0, -1.0,
            0.2, 0.3, -0.1, 0.5, 0.0, -0.7,
        ];
        assert!((herm_from_params(3, &params) - b).norm() < 1e-15);
    }
}
