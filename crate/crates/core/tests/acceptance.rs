//! Acceptance gate: one test per release criterion, each printing a single
//! summary line. Passing tests hide the line under default capture; run
//! `cargo test --test acceptance -- --nocapture` to see every line.

use std::time::Instant;

use chanres::chan::{self, ChannelSpec};
use chanres::linalg;
use chanres::monotones::{
    channel_entropy, dh_choi, diamond_distance, dmax, log_robustness,
    root_fidelity_to_free, ProbeBudget,
};
use chanres::rates::{self, MFlavor};
use chanres::sample;
use chanres::targets::{self, TargetId};
use chanres::theories::{TheoryKind, TheorySpec};
use chanres::verify;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Collects labelled checks for one criterion and reduces them to a single
/// pass/fail line plus, on failure, a panic listing every violation.
struct Gate {
    tag: &'static str,
    checked: usize,
    failures: Vec<String>,
}

impl Gate {
    fn new(tag: &'static str) -> Self {
        Gate { tag, checked: 0, failures: Vec::new() }
    }

    /// |got - want| <= tol, with infinities matched by sign.
    fn near(&mut self, label: impl Into<String>, got: f64, want: f64, tol: f64) {
        self.checked += 1;
        let ok = if want.is_infinite() {
            got.is_infinite() && got.signum() == want.signum()
        } else {
            (got - want).abs() <= tol
        };
        if !ok {
            self.failures.push(format!("{}: got {got:.9}, want {want}", label.into()));
        }
    }

    fn claim(&mut self, label: impl Into<String>, ok: bool, detail: String) {
        self.checked += 1;
        if !ok {
            self.failures.push(format!("{}: {detail}", label.into()));
        }
    }

    fn absorb(&mut self, report: &verify::SuiteReport) {
        self.checked += report.checked;
        self.failures.extend(report.violations.iter().cloned());
    }

    fn finish(self) {
        let status = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "[accept] {}: {status} ({} of {} checks failed)",
            self.tag,
            self.failures.len(),
            self.checked
        );
        assert!(
            self.failures.is_empty(),
            "{}: {} violations\n{}",
            self.tag,
            self.failures.len(),
            self.failures.join("\n")
        );
    }
}

fn bracket(g: &mut Gate, label: String, got: &rates::RateBounds, want: u32) {
    let ok = got.n_lower == want && got.n_upper == Some(want);
    g.claim(
        label,
        ok,
        format!("got [{}, {:?}], want [{want}, {want}]", got.n_lower, got.n_upper),
    );
}

/// Reference constants for the three exact one-shot measures on the unit
/// channels, evaluated at a single copy.
#[test]
fn gate_01_constants_table() {
    let t0 = Instant::now();
    let mut g = Gate::new("1 constants-table");
    let inf = f64::INFINITY;
    // (theory, target, common constant, free-robustness constant)
    let rows: [(TheoryKind, TargetId, f64, f64); 8] = [
        (TheoryKind::Purity, TargetId::Identity2, 2.0, inf),
        (TheoryKind::Communication, TargetId::Identity2, 2.0, inf),
        (TheoryKind::QuantumMemory, TargetId::Identity2, 1.0, 1.0),
        (TheoryKind::Uniformity, TargetId::PrepZero, 1.0, inf),
        (TheoryKind::Coherence, TargetId::Hadamard, 1.0, inf),
        (TheoryKind::Coherence, TargetId::PrepPlus, 1.0, inf),
        // Reference table value. The toolkit computes 1 for every measure on
        // this row and ships a constructive certificate (a free simulation
        // reaching Choi overlap 1/2 and majorizing the gate at scale 2; see
        // tests/invariants.rs), so these three checks stay red until the
        // reference value is revised.
        (TheoryKind::Entanglement, TargetId::Cnot, 2.0, 2.0),
        (TheoryKind::Entanglement, TargetId::PrepPhiPlus, 1.0, 1.0),
    ];
    for (kind, id, want, want_lr) in rows {
        let spec = rates::target_theory_spec(kind, id).unwrap();
        let choi = id.channel().choi().unwrap();
        let row = format!("{}/{}", kind.token(), id.token());
        g.near(format!("{row} dmax"), dmax(&choi, &spec, 0.0).unwrap().value, want, 1e-5);
        g.near(
            format!("{row} log-robustness"),
            log_robustness(&choi, &spec, 0.0).unwrap().value,
            want_lr,
            1e-5,
        );
        g.near(format!("{row} dh-choi"), dh_choi(&choi, &spec, 0.0).unwrap().value, want, 1e-5);
    }
    let secs = t0.elapsed().as_secs_f64();
    g.claim("runtime <= 5 min", secs <= 300.0, format!("took {secs:.1} s"));
    g.finish();
}

/// The per-copy constants do not move between one and two copies.
#[test]
fn gate_02_regularization_constancy() {
    let mut g = Gate::new("2 regularization-constancy");
    let budget = ProbeBudget::light(7);
    let cases = [
        (TheoryKind::QuantumMemory, TargetId::Identity2),
        (TheoryKind::Entanglement, TargetId::PrepPhiPlus),
    ];
    for (kind, id) in cases {
        let spec = rates::target_theory_spec(kind, id).unwrap();
        let choi = id.channel().choi().unwrap();
        for mf in [MFlavor::Max, MFlavor::HypChoi, MFlavor::LogRobust] {
            let row = format!("{}/{} {}", kind.token(), id.token(), mf.token());
            let one = rates::regularized_m(&choi, &spec, mf, 1, &budget).unwrap();
            let two = rates::regularized_m(&choi, &spec, mf, 2, &budget).unwrap();
            g.near(format!("{row} n=1"), one, 1.0, 1e-5);
            g.near(format!("{row} n=2 vs n=1"), two, one, 1e-4);
        }
    }
    g.finish();
}

/// On the two pure-preparation units every one-shot measure coincides.
#[test]
fn gate_03_preparation_collapse() {
    let mut g = Gate::new("3 preparation-collapse");
    g.absorb(&verify::collapse_suite(1e-5, 23).unwrap());
    g.finish();
}

/// Measure ordering and smoothing directions over random channels.
#[test]
fn gate_04_ordering_sweeps() {
    let mut g = Gate::new("4 ordering-sweeps");
    for (i, &kind) in TheoryKind::ALL.iter().enumerate() {
        let r = verify::ordering_suite(kind, 50, &[0.0, 0.05], 1e-6, 100 + i as u64).unwrap();
        g.absorb(&r);
    }
    g.finish();
}

/// Free superchannels never raise the generalized robustness.
#[test]
fn gate_05_monotonicity_sweeps() {
    let mut g = Gate::new("5 monotonicity-sweeps");
    for (i, &kind) in TheoryKind::ALL.iter().enumerate() {
        let r = verify::monotonicity_suite(kind, 100, 5, 1e-6, 200 + i as u64).unwrap();
        g.absorb(&r);
    }
    g.finish();
}

/// Closed-form one-shot rate brackets on the unit channels.
#[test]
fn gate_06_rate_brackets() {
    let mut g = Gate::new("6 rate-brackets");
    let budget = ProbeBudget::light(5);

    let qc = TheorySpec::new(TheoryKind::QuantumMemory, 4, 4).unwrap();
    let i4 = chan::unitary_channel(linalg::identity(4)).unwrap().choi().unwrap();
    let d = rates::distill_bounds(&i4, &qc, TargetId::Identity2, 0.0, &budget).unwrap();
    bracket(&mut g, "qc/i4 distill".into(), &d, 2);
    let d = rates::dilute_bounds(&i4, &qc, TargetId::Identity2, 0.0, &budget).unwrap();
    bracket(&mut g, "qc/i4 dilute".into(), &d, 2);

    let coh = TheorySpec::new(TheoryKind::Coherence, 2, 2).unwrap();
    let had = targets::hadamard().choi().unwrap();
    let d = rates::dilute_bounds(&had, &coh, TargetId::PrepPlus, 0.0, &budget).unwrap();
    bracket(&mut g, "coh/had dilute".into(), &d, 1);

    // Reference bracket. The computed bracket is [1, 1], pinned by the same
    // certificate as the constants-table row: the gate's Choi has Schmidt
    // rank 2 across the party cut and a free simulation reaches it at
    // overlap 1/2, so one preparation per use is both achievable and tight.
    let ent = TheorySpec::entanglement((2, 2), (2, 2)).unwrap();
    let cnot = targets::cnot().choi().unwrap();
    let d = rates::distill_bounds(&cnot, &ent, TargetId::PrepPhiPlus, 0.0, &budget).unwrap();
    bracket(&mut g, "ent/cnot distill".into(), &d, 2);

    g.finish();
}

/// Worst-case distance against closed forms for the depolarizing family and
/// a phase flip.
#[test]
fn gate_07_diamond_oracle() {
    let mut g = Gate::new("7 diamond-oracle");
    let id = targets::identity2().choi().unwrap();
    for p in [0.1, 0.5, 1.0] {
        let noisy = chan::depolarizing(p).choi().unwrap();
        let got = diamond_distance(&id, &noisy).unwrap();
        g.near(format!("id vs depol({p})"), got, 0.75 * p, 1e-6);
    }
    let z = chan::unitary_channel(chan::pauli('z')).unwrap().choi().unwrap();
    g.near("id vs Z", diamond_distance(&id, &z).unwrap(), 1.0, 1e-6);
    g.finish();
}

/// The root-fidelity exponent equals the entangled-probe testing exponent on
/// unitaries.
#[test]
fn gate_08_fidelity_exponent_relation() {
    let mut g = Gate::new("8 fidelity-exponent");
    let spec = TheorySpec::new(TheoryKind::Coherence, 2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for k in 0..10 {
        let u = sample::haar_unitary(2, &mut rng);
        let choi = chan::unitary_channel(u).unwrap().choi().unwrap();
        let f = root_fidelity_to_free(&choi, &spec).unwrap();
        let exponent = -(f * f).log2();
        let probe = dh_choi(&choi, &spec, 0.0).unwrap().value;
        g.near(format!("haar unitary #{k}"), exponent, probe, 1e-5);
    }
    g.finish();
}

/// Ball smoothing only shrinks the robustness measures as the radius grows.
#[test]
fn gate_09_smoothing_monotonicity() {
    let mut g = Gate::new("9 smoothing-monotonicity");
    let qc = TheorySpec::new(TheoryKind::QuantumMemory, 2, 2).unwrap();
    let purity = TheorySpec::new(TheoryKind::Purity, 2, 2).unwrap();
    let grid = [0.0, 0.01, 0.05, 0.1];
    for p in [0.25, 0.5] {
        let choi = chan::depolarizing(p).choi().unwrap();
        let mut prev: Option<(f64, f64, f64)> = None;
        for eps in grid {
            let lr = log_robustness(&choi, &qc, eps).unwrap().value;
            let dm = dmax(&choi, &qc, eps).unwrap().value;
            let dp = dmax(&choi, &purity, eps).unwrap().value;
            if let Some((plr, pdm, pdp)) = prev {
                let tag = |m: &str| format!("depol({p}) eps={eps} {m}");
                g.claim(tag("qc lr"), lr <= plr + 1e-7, format!("{plr} -> {lr}"));
                g.claim(tag("qc dmax"), dm <= pdm + 1e-7, format!("{pdm} -> {dm}"));
                g.claim(tag("purity dmax"), dp <= pdp + 1e-7, format!("{pdp} -> {dp}"));
            }
            prev = Some((lr, dm, dp));
        }
    }
    g.finish();
}

/// Channel entropy closed forms and the purity anchor wired through the
/// asymptotic estimate.
#[test]
fn gate_10_entropy_anchor() {
    let mut g = Gate::new("10 entropy-anchor");
    let s_id = channel_entropy(&targets::identity2()).unwrap();
    g.near("S(I2)", s_id, 2.0, 1e-6);
    for p in [0.1, 0.5, 1.0] {
        let probs: [f64; 4] = [1.0 - 0.75 * p, 0.25 * p, 0.25 * p, 0.25 * p];
        let h: f64 = probs.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
        let got = channel_entropy(&chan::depolarizing(p)).unwrap();
        g.near(format!("S(depol({p}))"), got, 2.0 - h, 1e-5);
    }

    let anchored = |g: &mut Gate, ch: &ChannelSpec, label: &str, n_max: usize| {
        let est = rates::asymptotic_estimate(ch, TheoryKind::Purity, n_max).unwrap();
        let s = channel_entropy(ch).unwrap();
        g.claim(
            format!("{label} anchor present"),
            est.entropy_anchor.is_some(),
            "missing".into(),
        );
        g.near(format!("{label} anchor = S/2"), est.entropy_anchor.unwrap(), s / 2.0, 1e-9);
        g.claim(
            format!("{label} per-copy count"),
            est.per_copy.len() == n_max,
            format!("{} entries", est.per_copy.len()),
        );
    };
    anchored(&mut g, &targets::identity2(), "identity", 2);
    anchored(&mut g, &chan::depolarizing(0.5), "depol(0.5)", 1);
    g.finish();
}
