//! Density matrices, Choi states and Kraus families.
//!
//! A channel N: A -> B is stored either as a Kraus list or as its Choi state
//! Φ_N = (I ⊗ N)(Φ+), normalized to unit trace, with the input copy of the
//! maximally entangled state first. Trace preservation is then the marginal
//! condition Tr_B Φ_N = I/d_A, which every constructor checks.

use crate::error::{Error, Result};
use crate::linalg::{
    self, basis_ket, cx, dagger, hermiticity_defect, hermitize, herm_eigen, identity, kron,
    min_eig, permute_systems, proj, sqrtm_psd, trace_norm_herm, trace_out, trace_re, CMat, CVec,
};
use crate::tol;

/// Validated quantum state: Hermitian, PSD, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::ShapeMismatch(format!("{}x{}", mat.nrows(), mat.ncols())));
        }
        let herm = hermiticity_defect(&mat);
        if herm > tol::HERM_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let lo = min_eig(&mat);
        if lo < -tol::VALIDATION_TOL {
            return Err(Error::NotPsd(lo));
        }
        let tr = trace_re(&mat);
        if (tr - 1.0).abs() > tol::VALIDATION_TOL {
            return Err(Error::BadTrace(tr));
        }
        Ok(Self { mat })
    }

    /// Hermitizes first; for matrices produced by exact-in-principle
    /// contractions where float noise breaks Hermiticity at the 1e-16 level.
    pub(crate) fn from_nearly(mat: CMat) -> Result<Self> {
        Self::new(hermitize(&mat))
    }

    pub fn pure(v: &CVec) -> Self {
        let n = v.norm();
        let v = v.unscale(n);
        Self { mat: proj(&v) }
    }

    pub fn max_mixed(d: usize) -> Self {
        Self { mat: identity(d).unscale(d as f64) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }
}

/// Validated Choi state of a trace-preserving channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    mat: CMat,
    dim_in: usize,
    dim_out: usize,
}

impl ChoiMatrix {
    pub fn new(mat: CMat, dim_in: usize, dim_out: usize) -> Result<Self> {
        let d = dim_in * dim_out;
        if d > tol::DIM_GUARD {
            return Err(Error::DimensionGuard(d, tol::DIM_GUARD));
        }
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "Choi for {}->{} must be {}x{}, got {}x{}",
                dim_in, dim_out, d, d, mat.nrows(), mat.ncols()
            )));
        }
        let herm = hermiticity_defect(&mat);
        if herm > tol::VALIDATION_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let lo = min_eig(&mat);
        if lo < -tol::VALIDATION_TOL {
            return Err(Error::NotPsd(lo));
        }
        let tr = trace_re(&mat);
        if (tr - 1.0).abs() > tol::VALIDATION_TOL {
            return Err(Error::BadTrace(tr));
        }
        let marg = trace_out(&mat, &[dim_in, dim_out], &[1]);
        let defect = (marg - identity(dim_in).unscale(dim_in as f64)).norm();
        if defect > tol::VALIDATION_TOL {
            return Err(Error::BadMarginal(defect));
        }
        Ok(Self { mat, dim_in, dim_out })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn total_dim(&self) -> usize {
        self.dim_in * self.dim_out
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Kraus(Vec<CMat>),
    Choi(CMat),
}

/// A channel given by dims plus one concrete representation.
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    dim_in: usize,
    dim_out: usize,
    repr: Repr,
}

impl ChannelSpec {
    /// Kraus operators are dim_out x dim_in; completeness Σ K†K = I is
    /// enforced at construction.
    pub fn from_kraus(dim_in: usize, dim_out: usize, kraus: Vec<CMat>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::ShapeMismatch("empty Kraus list".into()));
        }
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus must be {}x{}, got {}x{}",
                    dim_out, dim_in, k.nrows(), k.ncols()
                )));
            }
        }
        let mut acc = CMat::zeros(dim_in, dim_in);
        for k in &kraus {
            acc += dagger(k) * k;
        }
        let defect = (acc - identity(dim_in)).norm();
        if defect > tol::VALIDATION_TOL {
            return Err(Error::CompletenessViolation(defect));
        }
        Ok(Self { dim_in, dim_out, repr: Repr::Kraus(kraus) })
    }

    pub fn from_choi(choi: ChoiMatrix) -> Self {
        Self {
            dim_in: choi.dim_in,
            dim_out: choi.dim_out,
            repr: Repr::Choi(choi.mat),
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_kraus(&self) -> bool {
        matches!(self.repr, Repr::Kraus(_))
    }

    pub fn kraus_ops(&self) -> Option<&[CMat]> {
        match &self.repr {
            Repr::Kraus(ks) => Some(ks),
            Repr::Choi(_) => None,
        }
    }

    pub fn choi(&self) -> Result<ChoiMatrix> {
        match &self.repr {
            Repr::Kraus(ks) => kraus_to_choi(ks, self.dim_in, self.dim_out),
            Repr::Choi(m) => ChoiMatrix::new(m.clone(), self.dim_in, self.dim_out),
        }
    }

    /// A Kraus family for the channel, computed from the Choi spectrum when
    /// the channel was given in Choi form.
    pub fn kraus(&self) -> Result<Vec<CMat>> {
        match &self.repr {
            Repr::Kraus(ks) => Ok(ks.clone()),
            Repr::Choi(_) => Ok(choi_to_kraus(&self.choi()?)),
        }
    }
}

/// Choi state from a Kraus family.
pub fn kraus_to_choi(kraus: &[CMat], dim_in: usize, dim_out: usize) -> Result<ChoiMatrix> {
    let d = dim_in * dim_out;
    if d > tol::DIM_GUARD {
        return Err(Error::DimensionGuard(d, tol::DIM_GUARD));
    }
    let mut m = CMat::zeros(d, d);
    for k in kraus {
        if k.nrows() != dim_out || k.ncols() != dim_in {
            return Err(Error::ShapeMismatch(format!(
                "Kraus must be {}x{}, got {}x{}",
                dim_out, dim_in, k.nrows(), k.ncols()
            )));
        }
        // (1/dA) Σ_aa'bb' K[b,a] conj(K[b',a']) |a,b><a',b'|
        for a in 0..dim_in {
            for b in 0..dim_out {
                let kba = k[(b, a)];
                if kba.norm_sqr() == 0.0 {
                    continue;
                }
                for a2 in 0..dim_in {
                    for b2 in 0..dim_out {
                        m[(a * dim_out + b, a2 * dim_out + b2)] += kba * k[(b2, a2)].conj();
                    }
                }
            }
        }
    }
    m.unscale_mut(dim_in as f64);
    ChoiMatrix::new(hermitize(&m), dim_in, dim_out)
}

/// Kraus family from the Choi spectrum; eigenvalues below 1e-12 are dropped.
pub fn choi_to_kraus(choi: &ChoiMatrix) -> Vec<CMat> {
    let (da, db) = (choi.dim_in, choi.dim_out);
    let (vals, vecs) = herm_eigen(choi.mat());
    let mut out = Vec::new();
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 1e-12 {
            continue;
        }
        let w = (lam * da as f64).sqrt();
        let mut op = CMat::zeros(db, da);
        let col = vecs.column(k);
        for a in 0..da {
            for b in 0..db {
                op[(b, a)] = col[a * db + b] * cx(w, 0.0);
            }
        }
        out.push(op);
    }
    out
}

/// Raw Choi contraction: applies the channel to the first factor of rho,
/// which lives on A ⊗ R with dim_a * dim_r = rho side length.
/// out[(b,r),(b',r')] = d_A Σ_{a,a'} choi[(a,b),(a',b')] rho[(a,r),(a',r')].
pub fn apply_choi_raw(choi: &CMat, rho: &CMat, da: usize, db: usize, dr: usize) -> CMat {
    let mut out = CMat::zeros(db * dr, db * dr);
    for a in 0..da {
        for a2 in 0..da {
            for b in 0..db {
                for b2 in 0..db {
                    let cval = choi[(a * db + b, a2 * db + b2)];
                    if cval.norm_sqr() == 0.0 {
                        continue;
                    }
                    for r in 0..dr {
                        for r2 in 0..dr {
                            out[(b * dr + r, b2 * dr + r2)] +=
                                cval * rho[(a * dr + r, a2 * dr + r2)];
                        }
                    }
                }
            }
        }
    }
    out.scale(da as f64)
}

/// (N ⊗ I)(input) for input on A ⊗ R, channel acting on the first factor.
pub fn apply_channel(
    choi: &ChoiMatrix,
    input: &DensityMatrix,
    ancilla_dim: usize,
) -> Result<DensityMatrix> {
    if ancilla_dim == 0 || input.dim() != choi.dim_in * ancilla_dim {
        return Err(Error::DimensionMismatch(format!(
            "input dim {} != {} * {}",
            input.dim(),
            choi.dim_in,
            ancilla_dim
        )));
    }
    let out = apply_choi_raw(choi.mat(), input.mat(), choi.dim_in, choi.dim_out, ancilla_dim);
    DensityMatrix::from_nearly(out)
}

/// Choi state of the n-fold tensor power, reordered so that all input copies
/// precede all output copies.
pub fn tensor_power(choi: &ChoiMatrix, n: usize) -> Result<ChoiMatrix> {
    if n == 0 {
        return Err(Error::UnsupportedDims("tensor power needs n >= 1".into()));
    }
    let total = choi
        .total_dim()
        .checked_pow(n as u32)
        .ok_or(Error::DimensionGuard(usize::MAX, tol::DIM_GUARD))?;
    if total > tol::DIM_GUARD {
        return Err(Error::DimensionGuard(total, tol::DIM_GUARD));
    }
    if n == 1 {
        return Ok(choi.clone());
    }
    let mut big = choi.mat().clone();
    for _ in 1..n {
        big = kron(&big, choi.mat());
    }
    // factors are (A1,B1,...,An,Bn); gather inputs first, then outputs
    let mut dims = Vec::with_capacity(2 * n);
    for _ in 0..n {
        dims.push(choi.dim_in);
        dims.push(choi.dim_out);
    }
    let perm: Vec<usize> = (0..n).map(|j| 2 * j).chain((0..n).map(|j| 2 * j + 1)).collect();
    let m = permute_systems(&big, &dims, &perm);
    ChoiMatrix::new(
        hermitize(&m),
        choi.dim_in.pow(n as u32),
        choi.dim_out.pow(n as u32),
    )
}

/// Choi state of the sequential composition `after . before`, where
/// `before` maps A to B and `after` maps B to C.
pub fn compose(after: &ChoiMatrix, before: &ChoiMatrix) -> Result<ChoiMatrix> {
    if before.dim_out != after.dim_in {
        return Err(Error::DimensionMismatch(format!(
            "compose: inner dims {} vs {}",
            before.dim_out, after.dim_in
        )));
    }
    let (da, db, dc) = (before.dim_in, before.dim_out, after.dim_out);
    // Put the B factor of the first Choi state up front, act on it, swap back.
    let swapped = permute_systems(before.mat(), &[da, db], &[1, 0]);
    let acted = apply_choi_raw(after.mat(), &swapped, db, dc, da);
    let m = permute_systems(&acted, &[dc, da], &[1, 0]);
    ChoiMatrix::new(hermitize(&m), da, dc)
}

/// Choi state of the parallel composition left x right, with both inputs
/// grouped before both outputs.
pub fn tensor_chan(left: &ChoiMatrix, right: &ChoiMatrix) -> Result<ChoiMatrix> {
    let total = left
        .total_dim()
        .checked_mul(right.total_dim())
        .ok_or(Error::DimensionGuard(usize::MAX, tol::DIM_GUARD))?;
    if total > tol::DIM_GUARD {
        return Err(Error::DimensionGuard(total, tol::DIM_GUARD));
    }
    let dims = [left.dim_in, left.dim_out, right.dim_in, right.dim_out];
    let big = kron(left.mat(), right.mat());
    let m = permute_systems(&big, &dims, &[0, 2, 1, 3]);
    ChoiMatrix::new(
        hermitize(&m),
        left.dim_in * right.dim_in,
        left.dim_out * right.dim_out,
    )
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, clamped to [0, 1].
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let ra = sqrtm_psd(a.mat());
    let inner = &ra * b.mat() * &ra;
    let (vals, _) = herm_eigen(&hermitize(&inner));
    let root: f64 = vals.iter().map(|&v| v.max(0.0).sqrt()).sum();
    (root * root).clamp(0.0, 1.0)
}

/// (1/2)||a - b||_1.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    0.5 * trace_norm_herm(&(a.mat() - b.mat()))
}

// Common channel constructors ------------------------------------------------

pub fn pauli(which: char) -> CMat {
    match which {
        'i' => identity(2),
        'x' => CMat::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)]),
        'y' => CMat::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(0.0, -1.0), cx(0.0, 1.0), cx(0.0, 0.0)]),
        'z' => CMat::from_row_slice(2, 2, &[cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(-1.0, 0.0)]),
        _ => panic!("unknown Pauli {which}"),
    }
}

pub fn unitary_channel(u: CMat) -> Result<ChannelSpec> {
    let d = u.nrows();
    ChannelSpec::from_kraus(d, u.ncols(), vec![u.clone()]).map_err(|_| {
        Error::ShapeMismatch(format!("not unitary: {}x{}", d, u.ncols()))
    })
}

/// N_p(rho) = (1 - p) rho + p I/2 on a qubit.
pub fn depolarizing(p: f64) -> ChannelSpec {
    let w0 = (1.0 - 3.0 * p / 4.0).sqrt();
    let w = (p / 4.0).sqrt();
    ChannelSpec::from_kraus(
        2,
        2,
        vec![
            pauli('i').scale(w0),
            pauli('x').scale(w),
            pauli('y').scale(w),
            pauli('z').scale(w),
        ],
    )
    .expect("depolarizing Kraus family is complete")
}

/// Removes all off-diagonal entries in the computational basis.
pub fn completely_dephasing(d: usize) -> ChannelSpec {
    let ks = (0..d)
        .map(|i| {
            let e = basis_ket(d, i);
            proj(&e)
        })
        .collect();
    ChannelSpec::from_kraus(d, d, ks).expect("dephasing Kraus family is complete")
}

/// Discards the input and prepares sigma.
pub fn replacement_channel(dim_in: usize, sigma: &DensityMatrix) -> ChannelSpec {
    let db = sigma.dim();
    // K_{ij} = sqrt(lam_j) |v_j><i|
    let (vals, vecs) = herm_eigen(sigma.mat());
    let mut ks = Vec::new();
    for i in 0..dim_in {
        for (j, &lam) in vals.iter().enumerate() {
            if lam <= 1e-14 {
                continue;
            }
            let mut k = CMat::zeros(db, dim_in);
            for b in 0..db {
                k[(b, i)] = vecs[(b, j)] * cx(lam.sqrt(), 0.0);
            }
            ks.push(k);
        }
    }
    ChannelSpec::from_kraus(dim_in, db, ks).expect("replacement Kraus family is complete")
}

/// Discards the input and prepares I/d_out.
pub fn max_depolarizing(dim_in: usize, dim_out: usize) -> ChannelSpec {
    replacement_channel(dim_in, &DensityMatrix::max_mixed(dim_out))
}

/// The unit-trace Choi state of the identity channel, i.e. the maximally
/// entangled state |Φ+><Φ+| on d ⊗ d.
pub fn max_entangled(d: usize) -> CMat {
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = cx(1.0 / (d as f64).sqrt(), 0.0);
    }
    proj(&v)
}

/// Choi state of the qubit depolarizing channel: the isotropic state.
pub fn isotropic(p: f64) -> CMat {
    max_entangled(2).scale(1.0 - p) + identity(4).scale(p / 4.0)
}

pub use linalg::partial_transpose as choi_partial_transpose;
