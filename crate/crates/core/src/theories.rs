//! The six free-channel families.
//!
//! Each theory fixes a closed convex set of free channels; measures optimize
//! over its cone, i.e. over unnormalized Choi-like matrices X >= 0 obeying
//! the theory's linear conditions. Members of the cone are t * Phi with Phi
//! a free channel's Choi state and t >= 0, so a trace-tie Tr_B X = Tr[X] I/dA
//! appears wherever the structural conditions alone do not force it.
//!
//! Two families are semidefinite relaxations: the memory theory replaces
//! entanglement-breaking by positivity under input transposition, and the
//! entanglement theory replaces channels with separable Choi states by
//! positivity under transposition of the second party's factors. Both are
//! exact when the relevant joint dimension is at most 6.

use crate::chan::ChoiMatrix;
use crate::conic::{MatVar, Outcome, Problem};
use crate::error::{Error, Result};
use crate::linalg::{identity, kron, partial_transpose, trace, trace_out, trace_re, CMat};

/// Which free-channel family a computation runs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoryKind {
    /// Free: the completely depolarizing channel alone.
    Purity,
    /// Free: replacement channels (constant output, nothing transmitted).
    Communication,
    /// Free: entanglement-breaking channels, relaxed to Choi positivity
    /// under input transposition.
    QuantumMemory,
    /// Free: channels that preserve the uniform state.
    Uniformity,
    /// Free: channels that send diagonal states to diagonal states.
    Coherence,
    /// Free: local channels on a bipartite system, relaxed to Choi
    /// positivity under transposition of the second party.
    Entanglement,
}

impl TheoryKind {
    pub const ALL: [TheoryKind; 6] = [
        TheoryKind::Purity,
        TheoryKind::Communication,
        TheoryKind::QuantumMemory,
        TheoryKind::Uniformity,
        TheoryKind::Coherence,
        TheoryKind::Entanglement,
    ];

    pub fn token(self) -> &'static str {
        match self {
            TheoryKind::Purity => "purity",
            TheoryKind::Communication => "cc",
            TheoryKind::QuantumMemory => "qc",
            TheoryKind::Uniformity => "nu",
            TheoryKind::Coherence => "coh",
            TheoryKind::Entanglement => "ent",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.token() == s)
            .ok_or_else(|| Error::Parse(format!("unknown theory '{s}'")))
    }
}

/// A theory instantiated for concrete channel dimensions.
///
/// The entanglement theory additionally carries the tensor factorization of
/// the input and output spaces together with the party each factor belongs
/// to, so that tensor powers keep transposing the right factors.
#[derive(Debug, Clone)]
pub struct TheorySpec {
    kind: TheoryKind,
    dim_in: usize,
    dim_out: usize,
    in_factors: Vec<usize>,
    in_party: Vec<bool>,
    out_factors: Vec<usize>,
    out_party: Vec<bool>,
}

/// One structural requirement on a cone member X (on top of X >= 0).
pub enum ConeReq {
    /// The mapped matrix must vanish.
    EqZero(Box<dyn Fn(&CMat) -> CMat>),
    /// The mapped matrix must be PSD.
    Psd(Box<dyn Fn(&CMat) -> CMat>),
}

fn balanced_split(d: usize) -> Result<(usize, usize)> {
    if d == 1 {
        return Ok((1, 1));
    }
    let r = (d as f64).sqrt().round() as usize;
    if r * r == d {
        Ok((r, r))
    } else {
        Err(Error::UnsupportedDims(format!(
            "dimension {d} has no balanced bipartition; give one explicitly"
        )))
    }
}

impl TheorySpec {
    pub fn new(kind: TheoryKind, dim_in: usize, dim_out: usize) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::UnsupportedDims("zero dimension".into()));
        }
        match kind {
            TheoryKind::Entanglement => {
                let (a1, a2) = balanced_split(dim_in)?;
                let (b1, b2) = balanced_split(dim_out)?;
                Self::entanglement((a1, a2), (b1, b2))
            }
            _ => Ok(Self {
                kind,
                dim_in,
                dim_out,
                in_factors: vec![dim_in],
                in_party: vec![false],
                out_factors: vec![dim_out],
                out_party: vec![false],
            }),
        }
    }

    /// Entanglement theory on (A1 x A2) -> (B1 x B2), parties in this order.
    pub fn entanglement(in_split: (usize, usize), out_split: (usize, usize)) -> Result<Self> {
        let (a1, a2) = in_split;
        let (b1, b2) = out_split;
        if a1 == 0 || a2 == 0 || b1 == 0 || b2 == 0 {
            return Err(Error::UnsupportedDims("zero dimension in bipartition".into()));
        }
        Ok(Self {
            kind: TheoryKind::Entanglement,
            dim_in: a1 * a2,
            dim_out: b1 * b2,
            in_factors: vec![a1, a2],
            in_party: vec![false, true],
            out_factors: vec![b1, b2],
            out_party: vec![false, true],
        })
    }

    pub fn for_channel(kind: TheoryKind, ch: &crate::chan::ChannelSpec) -> Result<Self> {
        Self::new(kind, ch.dim_in(), ch.dim_out())
    }

    pub fn kind(&self) -> TheoryKind {
        self.kind
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// Tensor factorization of the channel input; a single factor except in
    /// the bipartite theory, where operations stay local per factor.
    pub fn in_factors(&self) -> &[usize] {
        &self.in_factors
    }

    pub fn out_factors(&self) -> &[usize] {
        &self.out_factors
    }

    /// The matching spec for an n-fold tensor power of the channel, with
    /// input copies grouped before output copies.
    pub fn power(&self, n: usize) -> Result<TheorySpec> {
        if n == 0 {
            return Err(Error::UnsupportedDims("power needs n >= 1".into()));
        }
        let rep = |v: &Vec<usize>| -> Vec<usize> {
            std::iter::repeat(v.clone()).take(n).flatten().collect()
        };
        let repb = |v: &Vec<bool>| -> Vec<bool> {
            std::iter::repeat(v.clone()).take(n).flatten().collect()
        };
        Ok(TheorySpec {
            kind: self.kind,
            dim_in: self.dim_in.pow(n as u32),
            dim_out: self.dim_out.pow(n as u32),
            in_factors: rep(&self.in_factors),
            in_party: repb(&self.in_party),
            out_factors: rep(&self.out_factors),
            out_party: repb(&self.out_party),
        })
    }

    /// Whether the semidefinite description is exact rather than a
    /// relaxation at these dimensions.
    pub fn relaxation_exact(&self) -> bool {
        match self.kind {
            TheoryKind::QuantumMemory => self.dim_in * self.dim_out <= 6,
            TheoryKind::Entanglement => {
                let mut p0 = 1usize;
                let mut p1 = 1usize;
                for (d, &snd) in self
                    .in_factors
                    .iter()
                    .chain(&self.out_factors)
                    .zip(self.in_party.iter().chain(&self.out_party))
                {
                    if snd {
                        p1 *= d;
                    } else {
                        p0 *= d;
                    }
                }
                p0 * p1 <= 6
            }
            _ => true,
        }
    }

    /// Structural requirements for membership of the theory's cone, beyond
    /// positivity of X itself.
    pub fn cone_reqs(&self) -> Vec<ConeReq> {
        let (da, db) = (self.dim_in, self.dim_out);
        let d = da * db;
        let mut reqs: Vec<ConeReq> = Vec::new();

        // Tr_B X = Tr[X] I/dA, needed where structure does not imply it
        let tie = move |x: &CMat| {
            trace_out(x, &[da, db], &[1]) - identity(da) * (trace(x) / (da as f64))
        };

        match self.kind {
            TheoryKind::Purity => {
                reqs.push(ConeReq::EqZero(Box::new(move |x| {
                    x - identity(d) * (trace(x) / (d as f64))
                })));
            }
            TheoryKind::Communication => {
                reqs.push(ConeReq::EqZero(Box::new(move |x| {
                    let gamma = trace_out(x, &[da, db], &[0]);
                    x - kron(&identity(da).unscale(da as f64), &gamma)
                })));
            }
            TheoryKind::QuantumMemory => {
                if da > 1 {
                    reqs.push(ConeReq::Psd(Box::new(move |x| {
                        partial_transpose(x, &[da, db], &[0])
                    })));
                    reqs.push(ConeReq::EqZero(Box::new(tie)));
                }
            }
            TheoryKind::Uniformity => {
                reqs.push(ConeReq::EqZero(Box::new(move |x| {
                    trace_out(x, &[da, db], &[0]) - identity(db) * (trace(x) / (db as f64))
                })));
                if da > 1 {
                    reqs.push(ConeReq::EqZero(Box::new(tie)));
                }
            }
            TheoryKind::Coherence => {
                if db > 1 {
                    for a in 0..da {
                        reqs.push(ConeReq::EqZero(Box::new(move |x| {
                            let mut block = CMat::zeros(db, db);
                            for b in 0..db {
                                for b2 in 0..db {
                                    if b != b2 {
                                        block[(b, b2)] = x[(a * db + b, a * db + b2)];
                                    }
                                }
                            }
                            block
                        })));
                    }
                }
                if da > 1 {
                    reqs.push(ConeReq::EqZero(Box::new(tie)));
                }
            }
            TheoryKind::Entanglement => {
                let dims: Vec<usize> = self
                    .in_factors
                    .iter()
                    .chain(&self.out_factors)
                    .copied()
                    .collect();
                let flipped: Vec<usize> = self
                    .in_party
                    .iter()
                    .chain(&self.out_party)
                    .enumerate()
                    .filter_map(|(i, &snd)| snd.then_some(i))
                    .collect();
                reqs.push(ConeReq::Psd(Box::new(move |x| {
                    partial_transpose(x, &dims, &flipped)
                })));
                if da > 1 {
                    reqs.push(ConeReq::EqZero(Box::new(tie)));
                }
            }
        }
        reqs
    }
}

/// Adds the full cone membership (PSD is assumed via the variable's own
/// declaration) for variable y to a problem.
pub fn constrain_in_cone(prob: &mut Problem, y: MatVar, spec: &TheorySpec) {
    for req in spec.cone_reqs() {
        match req {
            ConeReq::EqZero(f) => prob.mat_eq_zero(move |p| f(p.mat(y))),
            ConeReq::Psd(f) => prob.mat_psd(move |p| f(p.mat(y))),
        }
    }
}

/// Whether the free cone spans the whole Hermitian space. The two
/// transpose-criterion cones do; the other four are cut out by linear
/// equalities, so they sit inside a proper subspace and mixing with free
/// noise can never cancel a component outside it.
pub fn cone_spans_ambient(kind: TheoryKind) -> bool {
    matches!(kind, TheoryKind::QuantumMemory | TheoryKind::Entanglement)
}

/// Result of a membership test: trace distance to the free set and the
/// verdict at the given tolerance.
#[derive(Debug, Clone, Copy)]
pub struct FreeCheck {
    pub distance: f64,
    pub free: bool,
}

/// Trace distance from the channel to the theory's free set, as an SDP over
/// the difference decomposition Phi - Y = P - Q.
pub fn is_free(spec: &TheorySpec, choi: &ChoiMatrix, tol: f64) -> Result<FreeCheck> {
    if choi.dim_in() != spec.dim_in || choi.dim_out() != spec.dim_out {
        return Err(Error::DimensionMismatch(format!(
            "channel is {}->{}, theory wants {}->{}",
            choi.dim_in(),
            choi.dim_out(),
            spec.dim_in,
            spec.dim_out
        )));
    }
    let d = choi.total_dim();
    let mut prob = Problem::new();
    let p_var = prob.psd(d);
    let q_var = prob.psd(d);
    let y = prob.psd(d);
    constrain_in_cone(&mut prob, y, spec);
    prob.eq_zero(move |p| trace_re(p.mat(y)) - 1.0);
    let phi = choi.mat().clone();
    prob.mat_eq_zero(move |p| &phi - p.mat(y) - p.mat(p_var) + p.mat(q_var));
    prob.minimize(move |p| 0.5 * (trace_re(p.mat(p_var)) + trace_re(p.mat(q_var))));
    match prob.solve()? {
        Outcome::Optimal(sol) => {
            let distance = sol.objective.max(0.0);
            Ok(FreeCheck { distance, free: distance <= tol })
        }
        // the free set is never empty: Tr Y = 1 with Y = I/d ties out in
        // every theory, so anything else is a solver failure
        _ => Err(Error::SolverFailure("membership SDP did not solve".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chan::{
        completely_dephasing, max_depolarizing, replacement_channel, DensityMatrix,
    };
    use crate::linalg::basis_ket;
    use crate::targets;
    use approx::assert_abs_diff_eq;

    const TOL: f64 = 1e-6;

    fn check(kind: TheoryKind, ch: &crate::chan::ChannelSpec) -> FreeCheck {
        let spec = TheorySpec::for_channel(kind, ch).unwrap();
        is_free(&spec, &ch.choi().unwrap(), TOL).unwrap()
    }

    #[test]
    fn purity_membership() {
        assert!(check(TheoryKind::Purity, &max_depolarizing(2, 2)).free);
        let id = check(TheoryKind::Purity, &targets::identity2());
        assert!(!id.free);
        // distance to the single free point I/4 is exactly 3/4
        assert_abs_diff_eq!(id.distance, 0.75, epsilon = 1e-6);
    }

    #[test]
    fn communication_membership() {
        let sigma = DensityMatrix::pure(&basis_ket(2, 0));
        assert!(check(TheoryKind::Communication, &replacement_channel(2, &sigma)).free);
        // a classical wire still communicates
        assert!(!check(TheoryKind::Communication, &completely_dephasing(2)).free);
    }

    #[test]
    fn memory_membership() {
        assert!(check(TheoryKind::QuantumMemory, &completely_dephasing(2)).free);
        assert!(!check(TheoryKind::QuantumMemory, &targets::identity2()).free);
    }

    #[test]
    fn uniformity_membership() {
        // the identity preserves the uniform state
        assert!(check(TheoryKind::Uniformity, &targets::identity2()).free);
        let sigma = DensityMatrix::pure(&basis_ket(2, 0));
        assert!(!check(TheoryKind::Uniformity, &replacement_channel(2, &sigma)).free);
    }

    #[test]
    fn coherence_membership() {
        assert!(check(TheoryKind::Coherence, &completely_dephasing(2)).free);
        assert!(!check(TheoryKind::Coherence, &targets::hadamard()).free);
    }

    #[test]
    fn entanglement_membership() {
        let spec = TheorySpec::entanglement((2, 2), (2, 2)).unwrap();
        let free = is_free(&spec, &max_depolarizing(4, 4).choi().unwrap(), TOL).unwrap();
        assert!(free.free);
        let cnot = is_free(&spec, &targets::cnot().choi().unwrap(), TOL).unwrap();
        assert!(!cnot.free);
    }

    #[test]
    fn prepared_entangled_state_is_not_free() {
        let spec = TheorySpec::entanglement((1, 1), (2, 2)).unwrap();
        let phi = targets::prep_phi_plus().choi().unwrap();
        let res = is_free(&spec, &phi, TOL).unwrap();
        assert!(!res.free);
        // nearest PPT state to the maximally entangled pair is 1/2 away
        assert_abs_diff_eq!(res.distance, 0.5, epsilon = 1e-5);

        let sep = targets::prep_zero();
        let spec2 = TheorySpec::entanglement((1, 1), (2, 1)).unwrap();
        assert!(is_free(&spec2, &sep.choi().unwrap(), TOL).unwrap().free);
    }

    #[test]
    fn power_keeps_entanglement_factors() {
        let spec = TheorySpec::entanglement((1, 1), (2, 2)).unwrap();
        let p2 = spec.power(2).unwrap();
        assert_eq!(p2.dim_out(), 16);
        // a free preparation stays free at two copies under the power spec
        let sep = replacement_channel(1, &DensityMatrix::max_mixed(4));
        let two = crate::chan::tensor_power(&sep.choi().unwrap(), 2).unwrap();
        assert!(is_free(&p2, &two, TOL).unwrap().free);
        // two copies of the entangled preparation stay resourceful
        let phi2 = crate::chan::tensor_power(&targets::prep_phi_plus().choi().unwrap(), 2).unwrap();
        assert!(!is_free(&p2, &phi2, TOL).unwrap().free);
    }

    #[test]
    fn exactness_flags() {
        assert!(TheorySpec::new(TheoryKind::QuantumMemory, 2, 2).unwrap().relaxation_exact());
        assert!(!TheorySpec::new(TheoryKind::QuantumMemory, 4, 4).unwrap().relaxation_exact());
        assert!(TheorySpec::entanglement((1, 1), (2, 2)).unwrap().relaxation_exact());
        assert!(!TheorySpec::entanglement((2, 2), (2, 2)).unwrap().relaxation_exact());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let spec = TheorySpec::new(TheoryKind::Purity, 3, 3).unwrap();
        let choi = targets::identity2().choi().unwrap();
        assert!(is_free(&spec, &choi, TOL).is_err());
    }
}
