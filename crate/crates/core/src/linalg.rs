//! Dense complex linear algebra on `DMatrix<Complex64>`: tensor products,
//! subsystem permutations, partial trace and transpose, Hermitian spectral
//! calculus.
//!
//! Composite indices are row-major over the factor list, so for factors
//! (d0, d1) the basis state |i, j> sits at linear index i * d1 + j.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[&CMat]) -> CMat {
    let mut out = ms[0].clone();
    for m in &ms[1..] {
        out = out.kronecker(m);
    }
    out
}

pub fn basis_ket(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = cx(1.0, 0.0);
    v
}

/// |v><v|, without normalizing v.
pub fn proj(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().sum()
}

pub fn trace_re(m: &CMat) -> f64 {
    trace(m).re
}

/// Re Tr[a b] without forming the product.
pub fn inner_re(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Largest entrywise deviation from the adjoint.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && hermiticity_defect(m) <= tol
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
/// Returns (eigenvalues, matrix whose k-th column is the k-th eigenvector).
pub fn herm_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vecs.set_column(new, &eig.eigenvectors.column(old));
    }
    (vals, vecs)
}

pub fn min_eig(m: &CMat) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Orthonormal basis, as matrix columns, of the span of eigenvectors whose
/// eigenvalue exceeds `rel_cut` times the largest one. The relative cutoff
/// separates genuine support from solver-level noise around zero.
pub fn support_basis(m: &CMat, rel_cut: f64) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    let rank = vals.iter().take_while(|&&v| v > rel_cut * top.max(1e-300)).count();
    vecs.columns(0, rank).into_owned()
}

pub fn support_projector(m: &CMat, rel_cut: f64) -> CMat {
    let v = support_basis(m, rel_cut);
    &v * v.adjoint()
}

/// f applied to the spectrum of a Hermitian matrix; eigenvalues below zero
/// are clipped first, so this is safe for sqrt/log on nearly-PSD input.
pub fn psd_apply(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    let n = vals.len();
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        let fv = f(vals[k].max(0.0));
        if fv != 0.0 {
            let col = vecs.column(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += col[i] * col[j].conj() * cx(fv, 0.0);
                }
            }
        }
    }
    out
}

pub fn sqrtm_psd(m: &CMat) -> CMat {
    psd_apply(m, f64::sqrt)
}

/// Sum of absolute eigenvalues; equals the trace norm for Hermitian input.
pub fn trace_norm_herm(m: &CMat) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().map(|v| v.abs()).sum()
}

/// Von Neumann entropy in bits of a PSD trace-one matrix.
pub fn vn_entropy_bits(m: &CMat) -> f64 {
    let eig = m.clone().symmetric_eigen();
    shannon_bits(eig.eigenvalues.as_slice())
}

/// Shannon entropy in bits; entries at or below zero contribute nothing.
pub fn shannon_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn digits_of(mut idx: usize, dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut d = vec![0usize; dims.len()];
    for k in 0..dims.len() {
        d[k] = idx / strides[k];
        idx %= strides[k];
    }
    d
}

/// Reorders tensor factors. `perm[j]` is the index into `dims` of the factor
/// that ends up at slot `j` of the output, so `perm = [1, 0]` swaps a pair.
pub fn permute_systems(m: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    debug_assert_eq!(dims.len(), perm.len());
    let total: usize = dims.iter().product();
    debug_assert_eq!(m.nrows(), total);
    let st_old = strides(dims);
    let dims_new: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
    let st_new = strides(&dims_new);
    // map[new linear index] = old linear index
    let mut map = vec![0usize; total];
    for (new_idx, slot) in map.iter_mut().enumerate() {
        let digits = digits_of(new_idx, &dims_new, &st_new);
        *slot = digits.iter().zip(perm).map(|(&a, &k)| a * st_old[k]).sum();
    }
    let mut out = CMat::zeros(total, total);
    for r in 0..total {
        for c in 0..total {
            out[(r, c)] = m[(map[r], map[c])];
        }
    }
    out
}

/// Traces out the factors listed in `traced`, keeping the rest in order.
pub fn trace_out(m: &CMat, dims: &[usize], traced: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    debug_assert_eq!(m.nrows(), total);
    let st = strides(dims);
    let keep: Vec<usize> = (0..dims.len()).filter(|k| !traced.contains(k)).collect();
    let dims_keep: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let dims_tr: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let nk: usize = dims_keep.iter().product::<usize>().max(1);
    let nt: usize = dims_tr.iter().product::<usize>().max(1);
    let st_keep = strides(&dims_keep);
    let st_tr = strides(&dims_tr);

    // offset of each kept (resp. traced) multi-index inside the full index
    let keep_off: Vec<usize> = (0..nk)
        .map(|i| {
            digits_of(i, &dims_keep, &st_keep)
                .iter()
                .zip(&keep)
                .map(|(&a, &k)| a * st[k])
                .sum()
        })
        .collect();
    let tr_off: Vec<usize> = (0..nt)
        .map(|i| {
            digits_of(i, &dims_tr, &st_tr)
                .iter()
                .zip(traced)
                .map(|(&a, &k)| a * st[k])
                .sum()
        })
        .collect();

    let mut out = CMat::zeros(nk, nk);
    for r in 0..nk {
        for c in 0..nk {
            let mut acc = cx(0.0, 0.0);
            for t in &tr_off {
                acc += m[(keep_off[r] + t, keep_off[c] + t)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// Transposes the factors listed in `flipped`, leaving the others alone.
pub fn partial_transpose(m: &CMat, dims: &[usize], flipped: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    debug_assert_eq!(m.nrows(), total);
    let st = strides(dims);
    let mut out = CMat::zeros(total, total);
    for r in 0..total {
        let rd = digits_of(r, dims, &st);
        for c in 0..total {
            let cd = digits_of(c, dims, &st);
            let mut r2 = 0usize;
            let mut c2 = 0usize;
            for k in 0..dims.len() {
                if flipped.contains(&k) {
                    r2 += cd[k] * st[k];
                    c2 += rd[k] * st[k];
                } else {
                    r2 += rd[k] * st[k];
                    c2 += cd[k] * st[k];
                }
            }
            out[(r2, c2)] = m[(r, c)];
        }
    }
    out
}
