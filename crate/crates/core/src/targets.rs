//! Reference target channels used as distillation/dilution units.

use crate::chan::{max_entangled, pauli, unitary_channel, ChannelSpec, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{basis_ket, cx, identity, CMat, CVec};

/// Named targets accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetId {
    /// Identity qubit channel.
    Identity2,
    /// Hadamard gate.
    Hadamard,
    /// CNOT gate on two qubits.
    Cnot,
    /// Preparation of |0> from a trivial input.
    PrepZero,
    /// Preparation of |+> from a trivial input.
    PrepPlus,
    /// Preparation of the two-qubit maximally entangled state.
    PrepPhiPlus,
}

impl TargetId {
    pub const ALL: [TargetId; 6] = [
        TargetId::Identity2,
        TargetId::Hadamard,
        TargetId::Cnot,
        TargetId::PrepZero,
        TargetId::PrepPlus,
        TargetId::PrepPhiPlus,
    ];

    pub fn token(self) -> &'static str {
        match self {
            TargetId::Identity2 => "i2",
            TargetId::Hadamard => "had",
            TargetId::Cnot => "cnot",
            TargetId::PrepZero => "g2",
            TargetId::PrepPlus => "gplus",
            TargetId::PrepPhiPlus => "gphi",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.token() == s)
            .ok_or_else(|| Error::Parse(format!("unknown target '{s}'")))
    }

    pub fn channel(self) -> ChannelSpec {
        match self {
            TargetId::Identity2 => identity2(),
            TargetId::Hadamard => hadamard(),
            TargetId::Cnot => cnot(),
            TargetId::PrepZero => prep_zero(),
            TargetId::PrepPlus => prep_plus(),
            TargetId::PrepPhiPlus => prep_phi_plus(),
        }
    }
}

pub fn identity2() -> ChannelSpec {
    unitary_channel(identity(2)).expect("identity is unitary")
}

pub fn hadamard_gate() -> CMat {
    let s = 1.0 / 2.0_f64.sqrt();
    CMat::from_row_slice(2, 2, &[cx(s, 0.0), cx(s, 0.0), cx(s, 0.0), cx(-s, 0.0)])
}

pub fn hadamard() -> ChannelSpec {
    unitary_channel(hadamard_gate()).expect("Hadamard is unitary")
}

pub fn cnot_gate() -> CMat {
    let mut u = CMat::zeros(4, 4);
    u[(0, 0)] = cx(1.0, 0.0);
    u[(1, 1)] = cx(1.0, 0.0);
    u[(2, 3)] = cx(1.0, 0.0);
    u[(3, 2)] = cx(1.0, 0.0);
    u
}

pub fn cnot() -> ChannelSpec {
    unitary_channel(cnot_gate()).expect("CNOT is unitary")
}

fn prep(state: DensityMatrix) -> ChannelSpec {
    let d = state.dim();
    let choi = crate::chan::ChoiMatrix::new(state.into_mat(), 1, d)
        .expect("a state is a valid Choi matrix for a trivial input");
    ChannelSpec::from_choi(choi)
}

pub fn prep_zero() -> ChannelSpec {
    prep(DensityMatrix::pure(&basis_ket(2, 0)))
}

pub fn prep_plus() -> ChannelSpec {
    let mut v = CVec::zeros(2);
    let s = 1.0 / 2.0_f64.sqrt();
    v[0] = cx(s, 0.0);
    v[1] = cx(s, 0.0);
    prep(DensityMatrix::pure(&v))
}

pub fn prep_phi_plus() -> ChannelSpec {
    prep(DensityMatrix::new(max_entangled(2)).expect("Φ+ is a state"))
}

/// Z-basis dephasing of a qubit written as a mixed-unitary pair.
pub fn phase_flip(p: f64) -> ChannelSpec {
    ChannelSpec::from_kraus(
        2,
        2,
        vec![pauli('i').scale((1.0 - p).sqrt()), pauli('z').scale(p.sqrt())],
    )
    .expect("phase flip Kraus family is complete")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chan::apply_channel;
    use crate::linalg::proj;

    #[test]
    fn tokens_round_trip() {
        for t in TargetId::ALL {
            assert_eq!(TargetId::parse(t.token()).unwrap(), t);
        }
        assert!(TargetId::parse("nope").is_err());
    }

    #[test]
    fn preparations_output_their_states() {
        let one = DensityMatrix::max_mixed(1);
        let z = apply_channel(&prep_zero().choi().unwrap(), &one, 1).unwrap();
        assert!((z.mat() - proj(&basis_ket(2, 0))).norm() < 1e-14);

        let phi = apply_channel(&prep_phi_plus().choi().unwrap(), &one, 1).unwrap();
        assert!((phi.mat() - max_entangled(2)).norm() < 1e-14);
    }

    #[test]
    fn cnot_permutes_basis() {
        let u = cnot_gate();
        // |10> -> |11>
        let v = u * basis_ket(4, 2);
        assert!((v - basis_ket(4, 3)).norm() < 1e-15);
    }

    #[test]
    fn all_targets_have_valid_chois() {
        for t in TargetId::ALL {
            assert!(t.channel().choi().is_ok(), "target {:?}", t);
        }
    }
}
