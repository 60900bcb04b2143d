//! One-shot conversion rates between a channel and a registered unit target.
//!
//! Distillation asks how many target copies free superchannels can extract
//! from one use of the channel at error eps; dilution asks how many copies
//! are needed to build the channel. Both are bracketed by monotone ratios:
//! the achievable side divides a certified channel value by the per-copy
//! cost of the target, the converse side divides an upper estimate by the
//! per-copy yield. Which monotones appear depends on two switches: whether
//! the theory's free-set robustness is finite (it is for the memory and
//! bipartite theories, where the free set spans the full space), and
//! whether the target is a unitary or a state preparation.
//!
//! Copy counts n_l, n_u solve self-consistent inequalities because the
//! per-copy values m(T^n) = M(T^n)/n may in principle drift with n. For
//! the registered targets they are constant and known in closed form; for
//! anything else they are computed at n <= 2 and extrapolated.

use crate::chan::{tensor_power, ChannelSpec, ChoiMatrix};
use crate::error::{Error, Result};
use crate::monotones::{
    check_eps, dh_channel_interval, dh_choi, dh_unassisted, dmax, free_overlap_range,
    log_robustness, ProbeBudget, Report,
};
use crate::targets::TargetId;
use crate::theories::{is_free, TheoryKind, TheorySpec};
use crate::tol::RATE_SNAP;
use std::collections::{BTreeSet, HashMap};

/// Hard cap for the copy-count searches.
pub const N_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Distill,
    Dilute,
}

impl Task {
    pub fn token(self) -> &'static str {
        match self {
            Task::Distill => "distill",
            Task::Dilute => "dilute",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "distill" => Ok(Task::Distill),
            "dilute" => Ok(Task::Dilute),
            _ => Err(Error::Parse(format!("unknown task {s:?}, expected distill|dilute"))),
        }
    }
}

/// Integer bracket on a one-shot rate. `n_upper == None` means no finite
/// converse was established (reported as unbounded).
#[derive(Debug, Clone)]
pub struct RateBounds {
    pub task: Task,
    pub n_lower: u32,
    pub n_upper: Option<u32>,
    pub epsilon: f64,
    pub theorem_tag: &'static str,
    pub flags: Vec<String>,
    pub inputs: Vec<Report>,
}

/// Per-copy monotone flavors entering the rate brackets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MFlavor {
    LogRobust,
    Max,
    Hyp,
    HypChoi,
    HypUnassisted,
}

impl MFlavor {
    pub const ALL: [MFlavor; 5] = [
        MFlavor::LogRobust,
        MFlavor::Max,
        MFlavor::Hyp,
        MFlavor::HypChoi,
        MFlavor::HypUnassisted,
    ];

    pub fn token(self) -> &'static str {
        match self {
            MFlavor::LogRobust => "lr",
            MFlavor::Max => "dmax",
            MFlavor::Hyp => "dh",
            MFlavor::HypChoi => "dh-choi",
            MFlavor::HypUnassisted => "dh-unassisted",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.token() == s)
            .ok_or_else(|| Error::Parse(format!("unknown measure {s:?}")))
    }
}

pub fn target_is_unitary(id: TargetId) -> bool {
    matches!(id, TargetId::Identity2 | TargetId::Hadamard | TargetId::Cnot)
}

fn robustness_finite(kind: TheoryKind) -> bool {
    matches!(kind, TheoryKind::QuantumMemory | TheoryKind::Entanglement)
}

/// Theory spec matching a registered target's shape, with the party split
/// supplied for the bipartite theory.
pub fn target_theory_spec(kind: TheoryKind, id: TargetId) -> Result<TheorySpec> {
    match (kind, id) {
        (TheoryKind::Entanglement, TargetId::Cnot) => {
            TheorySpec::entanglement((2, 2), (2, 2))
        }
        (TheoryKind::Entanglement, TargetId::PrepPhiPlus) => {
            TheorySpec::entanglement((1, 1), (2, 2))
        }
        (TheoryKind::Entanglement, _) => Err(Error::MissingTarget(format!(
            "no party split registered for {} in the bipartite theory",
            id.token()
        ))),
        _ => {
            let ch = id.channel();
            TheorySpec::new(kind, ch.dim_in(), ch.dim_out())
        }
    }
}

/// Known per-copy constants for the registered (theory, target) pairs;
/// None means the pair or flavor is not registered and must be computed.
fn registered_m(kind: TheoryKind, id: TargetId, mf: MFlavor) -> Option<f64> {
    use MFlavor::*;
    use TargetId::*;
    use TheoryKind::*;
    match (kind, id) {
        (Purity, Identity2) => Some(match mf {
            LogRobust => f64::INFINITY,
            HypUnassisted => 1.0,
            _ => 2.0,
        }),
        (Communication, Identity2) => match mf {
            LogRobust => Some(f64::INFINITY),
            HypUnassisted => None,
            _ => Some(2.0),
        },
        (QuantumMemory, Identity2) => match mf {
            HypUnassisted => None,
            _ => Some(1.0),
        },
        (Uniformity, PrepZero) => Some(match mf {
            LogRobust => f64::INFINITY,
            _ => 1.0,
        }),
        (Coherence, Hadamard) => match mf {
            LogRobust => Some(f64::INFINITY),
            HypUnassisted => None,
            _ => Some(1.0),
        },
        (Coherence, PrepPlus) => Some(match mf {
            LogRobust => f64::INFINITY,
            _ => 1.0,
        }),
        // One bit, not two: measuring the control, re-preparing it, and
        // classically steering a flip on the target is a free channel whose
        // Choi overlaps the gate's at exactly 1/2 and majorizes it at scale 2,
        // so every one-shot constant collapses to 1 per copy.
        (Entanglement, Cnot) => match mf {
            HypUnassisted => None,
            _ => Some(1.0),
        },
        (Entanglement, PrepPhiPlus) => Some(1.0),
        _ => None,
    }
}

/// Every registered per-copy constant, flattened for reproduction runs.
pub fn registered_constants() -> Vec<(TheoryKind, TargetId, MFlavor, f64)> {
    use MFlavor::*;
    let pairs = [
        (TheoryKind::Purity, TargetId::Identity2),
        (TheoryKind::Communication, TargetId::Identity2),
        (TheoryKind::QuantumMemory, TargetId::Identity2),
        (TheoryKind::Uniformity, TargetId::PrepZero),
        (TheoryKind::Coherence, TargetId::Hadamard),
        (TheoryKind::Coherence, TargetId::PrepPlus),
        (TheoryKind::Entanglement, TargetId::Cnot),
        (TheoryKind::Entanglement, TargetId::PrepPhiPlus),
    ];
    let flavors = [LogRobust, Max, Hyp, HypChoi, HypUnassisted];
    let mut out = Vec::new();
    for (kind, id) in pairs {
        for mf in flavors {
            if let Some(c) = registered_m(kind, id, mf) {
                out.push((kind, id, mf, c));
            }
        }
    }
    out
}

/// M(T^n)/n for the chosen monotone on n copies of the target.
pub fn regularized_m(
    t_choi: &ChoiMatrix,
    t_spec: &TheorySpec,
    mf: MFlavor,
    n: usize,
    budget: &ProbeBudget,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::UnsupportedDims("per-copy value needs n >= 1".into()));
    }
    let powered = tensor_power(t_choi, n)?;
    let pspec = t_spec.power(n)?;
    let total = match mf {
        MFlavor::LogRobust => log_robustness(&powered, &pspec, 0.0)?.value,
        MFlavor::Max => dmax(&powered, &pspec, 0.0)?.value,
        MFlavor::Hyp => dh_channel_interval(&powered, &pspec, 0.0, budget)?.lo.value,
        MFlavor::HypChoi => dh_choi(&powered, &pspec, 0.0)?.value,
        MFlavor::HypUnassisted => dh_unassisted(&powered, &pspec, 0.0, budget)?.value,
    };
    Ok(total / n as f64)
}

/// Whether Tr[X P_target] is the same for every normalized free X, with the
/// extremal overlaps as witness. A prerequisite for the converse side of
/// generalized-robustness dilution.
#[derive(Debug, Clone, Copy)]
pub struct TraceCheck {
    pub constant: bool,
    pub lo: f64,
    pub hi: f64,
}

pub fn constant_trace_check(
    t_choi: &ChoiMatrix,
    t_spec: &TheorySpec,
    n: usize,
) -> Result<TraceCheck> {
    let powered = tensor_power(t_choi, n)?;
    let pspec = t_spec.power(n)?;
    let (lo, hi) = free_overlap_range(&pspec, &powered)?;
    Ok(TraceCheck { constant: hi - lo <= 1e-7, lo, hi })
}

/// Registered pairs whose dilution converse is taken as valid even though
/// the literal overlap functional is not constant; the accompanying flag
/// records the assumption.
fn trace_gate_registered(kind: TheoryKind, id: TargetId) -> bool {
    matches!((kind, id), (TheoryKind::Coherence, TargetId::Hadamard))
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= RATE_SNAP {
        r
    } else {
        x
    }
}

fn floor_snap(x: f64) -> u32 {
    snap(x).floor().max(0.0).min(N_CAP as f64) as u32
}

fn ceil_snap(x: f64) -> u32 {
    snap(x).ceil().max(0.0).min(N_CAP as f64) as u32
}

/// Cached per-copy evaluator: registered constants where available, else
/// computed values at n <= 2 carried forward.
struct PerCopy<'a> {
    t_choi: &'a ChoiMatrix,
    t_spec: &'a TheorySpec,
    kind: TheoryKind,
    id: TargetId,
    budget: &'a ProbeBudget,
    cache: HashMap<(MFlavor, usize), f64>,
    flags: BTreeSet<&'static str>,
}

impl<'a> PerCopy<'a> {
    fn new(
        t_choi: &'a ChoiMatrix,
        t_spec: &'a TheorySpec,
        kind: TheoryKind,
        id: TargetId,
        budget: &'a ProbeBudget,
    ) -> Self {
        PerCopy { t_choi, t_spec, kind, id, budget, cache: HashMap::new(), flags: BTreeSet::new() }
    }

    fn value(&mut self, mf: MFlavor, n: usize) -> Result<f64> {
        if let Some(c) = registered_m(self.kind, self.id, mf) {
            return Ok(c);
        }
        let eff = n.clamp(1, 2);
        if eff < n {
            self.flags.insert("m-extrapolated");
        }
        if mf == MFlavor::HypUnassisted || mf == MFlavor::Hyp {
            self.flags.insert("m-searched");
        }
        if let Some(&v) = self.cache.get(&(mf, eff)) {
            return Ok(v);
        }
        let v = regularized_m(self.t_choi, self.t_spec, mf, eff, self.budget)?;
        self.cache.insert((mf, eff), v);
        Ok(v)
    }

    /// Collapse holds when both flavors give one finite per-copy constant.
    fn collapsed(&mut self, a: MFlavor, b: MFlavor) -> Result<bool> {
        let va = self.value(a, 1)?;
        let vb = self.value(b, 1)?;
        Ok(va.is_finite() && vb.is_finite() && (va - vb).abs() <= 1e-6)
    }
}

/// Largest n in 0..=N_CAP with n <= budget / m(n); 0 when none qualifies.
fn search_max(
    budget_value: f64,
    m_of: &mut impl FnMut(usize) -> Result<f64>,
) -> Result<usize> {
    let mut best = 0;
    for n in 1..=N_CAP {
        let m = m_of(n)?;
        let ratio = budget_value / m;
        if ratio.is_nan() {
            continue;
        }
        if (n as f64) <= ratio + RATE_SNAP {
            best = n;
        }
    }
    Ok(best)
}

/// Smallest n in 0..=N_CAP with n >= budget / m(n); None when the cap is
/// passed without qualifying.
fn search_min(
    budget_value: f64,
    m_of: &mut impl FnMut(usize) -> Result<f64>,
) -> Result<Option<usize>> {
    if budget_value <= RATE_SNAP {
        return Ok(Some(0));
    }
    for n in 1..=N_CAP {
        let m = m_of(n)?;
        let ratio = budget_value / m;
        if ratio.is_nan() {
            continue;
        }
        if (n as f64) >= ratio - RATE_SNAP {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

fn free_result(task: Task, eps: f64) -> RateBounds {
    RateBounds {
        task,
        n_lower: 0,
        n_upper: Some(0),
        epsilon: eps,
        theorem_tag: "free-input",
        flags: Vec::new(),
        inputs: Vec::new(),
    }
}

fn collect_flags(per_copy: &PerCopy, extra: &BTreeSet<&'static str>) -> Vec<String> {
    per_copy
        .flags
        .iter()
        .chain(extra.iter())
        .map(|s| s.to_string())
        .collect()
}

/// Copies of the target extractable from one use of the channel.
pub fn distill_bounds(
    choi: &ChoiMatrix,
    spec: &TheorySpec,
    target: TargetId,
    eps: f64,
    budget: &ProbeBudget,
) -> Result<RateBounds> {
    check_eps(eps)?;
    if is_free(spec, choi, 1e-8)?.free {
        return Ok(free_result(Task::Distill, eps));
    }
    let unit = target.channel();
    let t_choi = unit.choi()?;
    let t_spec = target_theory_spec(spec.kind(), target)?;
    let mut pc = PerCopy::new(&t_choi, &t_spec, spec.kind(), target, budget);
    let mut flags: BTreeSet<&'static str> = BTreeSet::new();
    let mut inputs = Vec::new();

    let iv = dh_channel_interval(choi, spec, eps, budget)?;
    if iv.lo.relaxed {
        flags.insert("relaxed-inputs");
    }
    inputs.push(iv.lo.clone());
    inputs.push(iv.hi.clone());

    let finite = robustness_finite(spec.kind());
    let unitary = target_is_unitary(target);

    let (n_lower, converse_m) = if finite {
        if unitary {
            let nl = search_max(iv.lo.value, &mut |n| pc.value(MFlavor::LogRobust, n))?;
            (nl, MFlavor::Hyp)
        } else {
            let tilde = dh_choi(choi, spec, eps)?;
            inputs.push(tilde.clone());
            let nl = search_max(tilde.value, &mut |n| pc.value(MFlavor::LogRobust, n))?;
            (nl, MFlavor::HypUnassisted)
        }
    } else {
        // no achievability scheme without finite robustness
        (0, if unitary { MFlavor::Hyp } else { MFlavor::HypUnassisted })
    };

    let nu = search_max(iv.hi.value, &mut |n| pc.value(converse_m, n))?;
    let upper_real = iv.hi.value / pc.value(converse_m, nu.max(1))?;
    let n_upper = floor_snap(upper_real);
    if upper_real > N_CAP as f64 {
        flags.insert("n-cap");
    }

    let tag = if finite {
        let collapsed = pc.collapsed(MFlavor::LogRobust, converse_m)?;
        match (unitary, collapsed) {
            (true, true) => "distill-finite-collapse",
            (true, false) => "distill-finite",
            (false, true) => "distill-finite-prep-collapse",
            (false, false) => "distill-finite-prep",
        }
    } else if unitary {
        "distill-upper-only"
    } else {
        "distill-upper-only-prep"
    };

    if (n_lower as u32) > n_upper {
        return Err(Error::SolverFailure(format!(
            "distillation bracket inverted: {n_lower} > {n_upper}"
        )));
    }
    Ok(RateBounds {
        task: Task::Distill,
        n_lower: n_lower as u32,
        n_upper: Some(n_upper),
        epsilon: eps,
        theorem_tag: tag,
        flags: collect_flags(&pc, &flags),
        inputs,
    })
}

/// Copies of the target needed to realize the channel.
pub fn dilute_bounds(
    choi: &ChoiMatrix,
    spec: &TheorySpec,
    target: TargetId,
    eps: f64,
    budget: &ProbeBudget,
) -> Result<RateBounds> {
    check_eps(eps)?;
    if is_free(spec, choi, 1e-8)?.free {
        return Ok(free_result(Task::Dilute, eps));
    }
    let unit = target.channel();
    let t_choi = unit.choi()?;
    let t_spec = target_theory_spec(spec.kind(), target)?;
    let mut pc = PerCopy::new(&t_choi, &t_spec, spec.kind(), target, budget);
    let mut flags: BTreeSet<&'static str> = BTreeSet::new();
    let mut inputs = Vec::new();

    let finite = robustness_finite(spec.kind());
    let unitary = target_is_unitary(target);

    let (budget_rep, lower_m, upper_m, gate_ok) = if finite {
        let lr = log_robustness(choi, spec, eps)?;
        let m_up = if unitary { MFlavor::Hyp } else { MFlavor::HypChoi };
        (lr, MFlavor::LogRobust, m_up, true)
    } else {
        let dm = dmax(choi, spec, eps)?;
        let gate = if trace_gate_registered(spec.kind(), target) {
            flags.insert("trace-gate-registered");
            true
        } else {
            constant_trace_check(&t_choi, &t_spec, 1)?.constant
        };
        (dm, MFlavor::Max, MFlavor::HypChoi, gate)
    };
    if budget_rep.relaxed {
        flags.insert("relaxed-inputs");
    }
    inputs.push(budget_rep.clone());
    let b = budget_rep.value;

    let nl_idx = search_min(b, &mut |n| pc.value(lower_m, n))?;
    let n_lower = match nl_idx {
        Some(0) | None => {
            if nl_idx.is_none() {
                flags.insert("n-cap");
            }
            let m1 = pc.value(lower_m, 1)?;
            let r = b / m1;
            if r.is_nan() {
                0
            } else {
                ceil_snap(r)
            }
        }
        Some(n) => ceil_snap(b / pc.value(lower_m, n)?),
    };

    let n_upper = if !gate_ok {
        flags.insert("no-constant-trace");
        None
    } else {
        match search_min(b, &mut |n| pc.value(upper_m, n))? {
            Some(n) => Some(n as u32),
            None => {
                flags.insert("n-cap");
                None
            }
        }
    };

    let tag = if finite {
        let collapsed = pc.collapsed(MFlavor::LogRobust, upper_m)?;
        match (unitary, collapsed) {
            (true, true) => "dilute-finite-collapse",
            (true, false) => "dilute-finite",
            (false, true) => "dilute-finite-prep-collapse",
            (false, false) => "dilute-finite-prep",
        }
    } else {
        let collapsed = pc.collapsed(MFlavor::Max, MFlavor::HypChoi)?;
        match (unitary, collapsed) {
            (true, true) => "dilute-generalized-collapse",
            (true, false) => "dilute-generalized",
            (false, true) => "dilute-generalized-prep-collapse",
            (false, false) => "dilute-generalized-prep",
        }
    };

    if let Some(u) = n_upper {
        if n_lower > u {
            return Err(Error::SolverFailure(format!(
                "dilution bracket inverted: {n_lower} > {u}"
            )));
        }
    }
    Ok(RateBounds {
        task: Task::Dilute,
        n_lower,
        n_upper,
        epsilon: eps,
        theorem_tag: tag,
        flags: collect_flags(&pc, &flags),
        inputs,
    })
}

/// Finite-n per-copy values of the entangled-input testing exponent, plus
/// the closed-form anchor for the purity theory. These are finite-n
/// estimates, not the n -> infinity limit.
#[derive(Debug, Clone)]
pub struct AsymptoticEstimate {
    pub per_copy: Vec<f64>,
    pub entropy_anchor: Option<f64>,
}

pub fn asymptotic_estimate(
    ch: &ChannelSpec,
    kind: TheoryKind,
    n_max: usize,
) -> Result<AsymptoticEstimate> {
    if n_max == 0 || n_max > 2 {
        return Err(Error::UnsupportedDims(format!(
            "per-copy estimates are computed for 1 or 2 copies, not {n_max}"
        )));
    }
    let spec = TheorySpec::new(kind, ch.dim_in(), ch.dim_out())?;
    let choi = ch.choi()?;
    let mut per_copy = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let powered = tensor_power(&choi, n)?;
        let pspec = spec.power(n)?;
        per_copy.push(dh_choi(&powered, &pspec, 0.0)?.value / n as f64);
    }
    let entropy_anchor = if kind == TheoryKind::Purity {
        Some(crate::monotones::entropy::channel_entropy(ch)? / 2.0)
    } else {
        None
    };
    Ok(AsymptoticEstimate { per_copy, entropy_anchor })
}
