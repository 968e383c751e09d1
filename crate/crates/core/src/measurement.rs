//! Born-rule outcome distributions, seeded sampling, and the two-step
//! protocol that confronts the quantum predictions with non-contextuality.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{build_fig1_source, build_fig2, build_fig3_joint, propagate, DeviceGraph, JointPair, PairVariant};
use crate::outcome::{OutcomeLabel, Sign};
use crate::scalar::Real;
use crate::state::{PathSpinState, SpinVector};

/// Probability per outcome label, in device port order.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution<T: Real = f64> {
    entries: Vec<(OutcomeLabel, T)>,
}

impl<T: Real> OutcomeDistribution<T> {
    /// Checks that labels are distinct, no probability is below
    /// `-ALGEBRA_TOL`, and the total is one within `PROPAGATION_TOL`.
    pub fn new(entries: Vec<(OutcomeLabel, T)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut total = T::zero();
        for (label, p) in &entries {
            if !seen.insert(label) {
                return Err(Error::MalformedDistribution(format!("label {label} listed twice")));
            }
            if !p.is_finite() || *p < -T::ALGEBRA_TOL {
                return Err(Error::MalformedDistribution(format!("bad probability {p} for {label}")));
            }
            total = total + *p;
        }
        if (total - T::one()).abs() > T::PROPAGATION_TOL {
            return Err(Error::MalformedDistribution(format!("probabilities sum to {total}")));
        }
        Ok(OutcomeDistribution { entries })
    }

    pub fn entries(&self) -> &[(OutcomeLabel, T)] {
        &self.entries
    }

    pub fn probability(&self, label: &OutcomeLabel) -> T {
        self.entries
            .iter()
            .find(|(l, _)| l == label)
            .map_or(T::zero(), |(_, p)| *p)
    }

    /// Total probability of the outcomes matching `pred`.
    pub fn probability_where(&self, pred: impl Fn(&OutcomeLabel) -> bool) -> T {
        self.entries
            .iter()
            .filter(|(l, _)| pred(l))
            .fold(T::zero(), |acc, (_, p)| acc + *p)
    }

    /// Outcomes with probability at or above [`Real::SUPPORT_TOL`].
    pub fn support(&self) -> Vec<&OutcomeLabel> {
        self.entries
            .iter()
            .filter(|(_, p)| *p >= T::SUPPORT_TOL)
            .map(|(l, _)| l)
            .collect()
    }

    pub fn total(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, (_, p)| acc + *p)
    }

    /// Rendered label → probability, sorted by rendered label.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.entries
            .iter()
            .map(|(l, p)| (l.to_string(), p.to_f64_lossy()))
            .collect()
    }
}

impl<T: Real> Serialize for OutcomeDistribution<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_map().serialize(s)
    }
}

/// Born-rule probabilities of each outcome label of `graph` for `state`.
pub fn probabilities<T: Real>(graph: &DeviceGraph, state: &PathSpinState<T>) -> Result<OutcomeDistribution<T>> {
    if graph.outcome_labels().is_empty() {
        return Err(Error::InvalidGraph(vec!["device has no outcome labels".into()]));
    }
    let out = propagate(graph, state)?;
    let mut entries: Vec<(OutcomeLabel, T)> = Vec::new();
    for mode in graph.output_modes() {
        let label = graph.label_of(mode).expect("validated graphs label every output");
        let w = out.mode_weight(mode);
        match entries.iter_mut().find(|(l, _)| l == label) {
            Some((_, p)) => *p = *p + w,
            None => entries.push((label.clone(), w)),
        }
    }
    OutcomeDistribution::new(entries)
}

/// Sampled outcome counts. Only outcomes that occurred are listed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    #[serde(with = "rendered_counts")]
    pub entries: BTreeMap<OutcomeLabel, u64>,
    pub shots: u64,
    pub seed: u64,
}

mod rendered_counts {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<OutcomeLabel, u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let r: BTreeMap<String, u64> = m.iter().map(|(l, c)| (l.to_string(), *c)).collect();
        r.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<OutcomeLabel, u64>, D::Error> {
        let r = BTreeMap::<String, u64>::deserialize(d)?;
        r.into_iter()
            .map(|(k, v)| {
                OutcomeLabel::parse(&k)
                    .map(|l| (l, v))
                    .ok_or_else(|| serde::de::Error::custom(format!("bad outcome `{k}`")))
            })
            .collect()
    }
}

impl CountTable {
    /// Builds a table from explicit counts; `shots` is their sum.
    pub fn from_counts(entries: impl IntoIterator<Item = (OutcomeLabel, u64)>, seed: u64) -> Self {
        let entries: BTreeMap<OutcomeLabel, u64> = entries.into_iter().filter(|(_, c)| *c > 0).collect();
        let shots = entries.values().sum();
        CountTable { entries, shots, seed }
    }

    pub fn count(&self, label: &OutcomeLabel) -> u64 {
        self.entries.get(label).copied().unwrap_or(0)
    }

    pub fn count_where(&self, pred: impl Fn(&OutcomeLabel) -> bool) -> u64 {
        self.entries.iter().filter(|(l, _)| pred(l)).map(|(_, c)| c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `outcome,count` rows, one per observed outcome.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("outcome,count\n");
        for (label, count) in &self.entries {
            out.push_str(&format!("{label},{count}\n"));
        }
        out
    }
}

/// Draws `shots` i.i.d. outcomes and returns their indices into
/// `dist.entries()`, in draw order.
///
/// The generator is ChaCha8 seeded with `seed_from_u64(seed)`. Outcomes below
/// [`Real::SUPPORT_TOL`] get weight zero and are never drawn.
pub fn sample_events<T: Real>(dist: &OutcomeDistribution<T>, shots: u64, seed: u64) -> Vec<usize> {
    if shots == 0 {
        return Vec::new();
    }
    let weights: Vec<f64> = dist
        .entries
        .iter()
        .map(|(_, p)| if *p >= T::SUPPORT_TOL { p.to_f64_lossy() } else { 0.0 })
        .collect();
    let index = WeightedIndex::new(&weights).expect("normalized distributions have positive support");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..shots).map(|_| index.sample(&mut rng)).collect()
}

pub fn sample<T: Real>(dist: &OutcomeDistribution<T>, shots: u64, seed: u64) -> CountTable {
    let mut counts = vec![0u64; dist.entries.len()];
    for i in sample_events(dist, shots, seed) {
        counts[i] += 1;
    }
    let entries = dist
        .entries
        .iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|((l, _), c)| (l.clone(), c))
        .collect();
    CountTable { entries, shots, seed }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    QmConfirmedNctViolated,
    NctConsistent,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::QmConfirmedNctViolated => "QM_CONFIRMED_NCT_VIOLATED",
            Verdict::NctConsistent => "NCT_CONSISTENT",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// Step (i): every event of the separate pair measurements has `Z1·Z2 = +1`
/// and `X1·X2 = +1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOne {
    pub zz_always_plus: bool,
    pub xx_always_plus: bool,
    pub zz_counts: CountTable,
    pub xx_counts: CountTable,
}

/// Step (ii): joint `Z1X2`/`X1Z2` events split by whether the signs agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepTwo {
    pub forbidden_equal_sign_counts: u64,
    pub opposite_sign_counts: u64,
    pub counts: CountTable,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub step_i: Option<StepOne>,
    pub step_ii: Option<StepTwo>,
    pub verdict: Option<Verdict>,
}

/// Product of the signs of every observed outcome is `+1` and at least one
/// event was recorded.
fn always_plus(counts: &CountTable) -> bool {
    counts.shots > 0 && counts.count_where(|l| l.parity() == Sign::Minus) == 0
}

/// `Some(true)` when `Z1X2` and `X1Z2` carry the same sign.
pub fn equal_signs(label: &OutcomeLabel) -> Option<bool> {
    Some(label.get("Z1X2")? == label.get("X1Z2")?)
}

/// ψ1 as produced by the source device from `|a, x+⟩`.
pub fn prepared_psi1<T: Real>() -> Result<PathSpinState<T>> {
    let source_in = PathSpinState::ket("a", SpinVector::x_plus())?;
    propagate(&build_fig1_source(), &source_in)
}

fn require_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(Error::Precondition("protocol steps need at least one shot".into()));
    }
    Ok(())
}

/// Per-event sign products of a pair measurement; `true` if every product is `+1`.
fn pair_run<T: Real>(
    graph: &DeviceGraph,
    state: &PathSpinState<T>,
    shots: u64,
    seed: u64,
) -> Result<(bool, CountTable)> {
    let dist = probabilities(graph, state)?;
    let events = sample_events(&dist, shots, seed);
    let all_plus = !events.is_empty() && events.iter().all(|&i| dist.entries[i].0.parity() == Sign::Plus);
    let mut counts = vec![0u64; dist.entries.len()];
    for i in events {
        counts[i] += 1;
    }
    let table = CountTable::from_counts(dist.entries.iter().map(|(l, _)| l.clone()).zip(counts), seed);
    Ok((all_plus, table))
}

/// Step (i) on ψ1 from the source, with separate `Z1,Z2` and `X1,X2` devices.
/// The `X1,X2` run uses `seed + 1`.
pub fn run_step_i(shots: u64, seed: u64) -> Result<StepOne> {
    run_step_i_with(&prepared_psi1::<f64>()?, shots, seed)
}

pub fn run_step_i_with<T: Real>(state: &PathSpinState<T>, shots: u64, seed: u64) -> Result<StepOne> {
    require_shots(shots)?;
    let (zz_always_plus, zz_counts) = pair_run(&build_fig2(PairVariant::A), state, shots, seed)?;
    let (xx_always_plus, xx_counts) = pair_run(&build_fig2(PairVariant::D), state, shots, seed.wrapping_add(1))?;
    Ok(StepOne {
        zz_always_plus,
        xx_always_plus,
        zz_counts,
        xx_counts,
    })
}

/// Step (i) through the cascaded joint `Z1Z2`/`X1X2` device instead of two
/// separate pair devices.
pub fn run_step_i_joint<T: Real>(state: &PathSpinState<T>, shots: u64, seed: u64) -> Result<StepOne> {
    require_shots(shots)?;
    let dist = probabilities(&build_fig3_joint(JointPair::Z1Z2X1X2), state)?;
    let events = sample_events(&dist, shots, seed);
    let label = |i: usize| &dist.entries[i].0;
    let zz = events.iter().all(|&i| label(i).get("Z1Z2") == Some(Sign::Plus));
    let xx = events.iter().all(|&i| label(i).get("X1X2") == Some(Sign::Plus));
    let project = |name: &str| {
        let mut m: BTreeMap<OutcomeLabel, u64> = BTreeMap::new();
        for &i in &events {
            let sign = label(i).get(name).expect("joint device labels both products");
            *m.entry(OutcomeLabel::new([(name, sign)])).or_default() += 1;
        }
        CountTable::from_counts(m, seed)
    };
    Ok(StepOne {
        zz_always_plus: zz,
        xx_always_plus: xx,
        zz_counts: project("Z1Z2"),
        xx_counts: project("X1X2"),
    })
}

/// Step (ii) on ψ1 with the joint `Z1X2`/`X1Z2` device.
pub fn run_step_ii(shots: u64, seed: u64) -> Result<StepTwo> {
    let joint = build_fig3_joint(JointPair::Z1X2X1Z2);
    run_step_ii_with(&joint, &prepared_psi1::<f64>()?, shots, seed).map(|(s, _)| s)
}

/// Step (ii) with an arbitrary joint device and input state. Also returns
/// the exact distribution the events were drawn from.
pub fn run_step_ii_with<T: Real>(
    joint: &DeviceGraph,
    state: &PathSpinState<T>,
    shots: u64,
    seed: u64,
) -> Result<(StepTwo, OutcomeDistribution<T>)> {
    require_shots(shots)?;
    let dist = probabilities(joint, state)?;
    if let Some((l, _)) = dist.entries.iter().find(|(l, _)| equal_signs(l).is_none()) {
        return Err(Error::MalformedDistribution(format!(
            "outcome {l} lacks a Z1X2 or X1Z2 sign"
        )));
    }
    let counts = sample(&dist, shots, seed);
    let step = summarize_step_ii(counts);
    Ok((step, dist))
}

fn summarize_step_ii(counts: CountTable) -> StepTwo {
    let forbidden = counts.count_where(|l| equal_signs(l) == Some(true));
    let opposite = counts.count_where(|l| equal_signs(l) == Some(false));
    StepTwo {
        forbidden_equal_sign_counts: forbidden,
        opposite_sign_counts: opposite,
        counts,
    }
}

/// Classifies a report from its count tables alone.
pub fn verdict(report: &ProtocolReport) -> Result<Verdict> {
    let one = report.step_i.as_ref().ok_or(Error::MissingStep("i"))?;
    let two = report.step_ii.as_ref().ok_or(Error::MissingStep("ii"))?;
    let step_i_holds = always_plus(&one.zz_counts) && always_plus(&one.xx_counts);
    let equal = two.counts.count_where(|l| equal_signs(l) == Some(true));
    let opposite = two.counts.count_where(|l| equal_signs(l) == Some(false));
    Ok(if !step_i_holds || equal + opposite == 0 {
        Verdict::Inconclusive
    } else if equal == 0 {
        Verdict::QmConfirmedNctViolated
    } else if opposite == 0 {
        Verdict::NctConsistent
    } else {
        Verdict::Inconclusive
    })
}

/// Runs both steps on ψ1 and fills in the verdict. Step (ii) uses `seed + 2`.
pub fn run_protocol(shots: u64, seed: u64) -> Result<ProtocolReport> {
    let mut report = ProtocolReport {
        step_i: Some(run_step_i(shots, seed)?),
        step_ii: Some(run_step_ii(shots, seed.wrapping_add(2))?),
        verdict: None,
    };
    report.verdict = Some(verdict(&report)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{chi_states, psi1};

    fn lbl(s: &str) -> OutcomeLabel {
        OutcomeLabel::parse(s).unwrap()
    }

    fn fig3() -> DeviceGraph {
        build_fig3_joint(JointPair::Z1X2X1Z2)
    }

    #[test]
    fn fig3_distribution_on_psi1() {
        let d = probabilities(&fig3(), &psi1::<f64>()).unwrap();
        assert!((d.probability(&lbl("Z1X2=+1;X1Z2=-1")) - 0.5).abs() < 1e-9);
        assert!((d.probability(&lbl("Z1X2=-1;X1Z2=+1")) - 0.5).abs() < 1e-9);
        assert!(d.probability(&lbl("Z1X2=+1;X1Z2=+1")) < 1e-12);
        assert!(d.probability(&lbl("Z1X2=-1;X1Z2=-1")) < 1e-12);
        assert_eq!(d.entries().len(), 4);
        assert!((d.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fig2_distributions() {
        let uz = PathSpinState::ket("u", SpinVector::<f64>::z_plus()).unwrap();
        let d = probabilities(&build_fig2(PairVariant::A), &uz).unwrap();
        assert!((d.probability(&lbl("Z1=+1;Z2=+1")) - 1.0).abs() < 1e-12);
        assert_eq!(d.support().len(), 1);

        // ψ1 against (path z, spin x): every outcome 1/4
        let d = probabilities(&build_fig2(PairVariant::B), &psi1::<f64>()).unwrap();
        for (_, p) in d.entries() {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn distribution_validation() {
        let bad = OutcomeDistribution::new(vec![(lbl("Z1=+1"), 0.7f64)]);
        assert!(matches!(bad, Err(Error::MalformedDistribution(_))));
        let neg = OutcomeDistribution::new(vec![(lbl("Z1=+1"), 1.1f64), (lbl("Z1=-1"), -0.1)]);
        assert!(neg.is_err());
        let dup = OutcomeDistribution::new(vec![(lbl("Z1=+1"), 0.5f64), (lbl("Z1=+1"), 0.5)]);
        assert!(dup.is_err());
    }

    #[test]
    fn unlabeled_device_has_no_distribution() {
        let g = DeviceGraph::new(vec!["a".into()], vec![], BTreeMap::new());
        let s = PathSpinState::ket("a", SpinVector::<f64>::z_plus()).unwrap();
        assert!(matches!(probabilities(&g, &s), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn deterministic_sampling() {
        let d = OutcomeDistribution::new(vec![(lbl("Z1=+1"), 1.0f64)]).unwrap();
        let t = sample(&d, 4, 99);
        assert_eq!(t.count(&lbl("Z1=+1")), 4);
        assert_eq!(t.shots, 4);
        let empty = sample(&d, 0, 99);
        assert!(empty.is_empty() && empty.shots == 0);
    }

    #[test]
    fn sampling_concentrates() {
        let d =
            OutcomeDistribution::new(vec![(lbl("Z1X2=+1;X1Z2=-1"), 0.5f64), (lbl("Z1X2=-1;X1Z2=+1"), 0.5)]).unwrap();
        let t = sample(&d, 100_000, 3);
        let bound = 5.0 * (100_000f64 * 0.25).sqrt();
        for (l, _) in d.entries() {
            assert!((t.count(l) as f64 - 50_000.0).abs() <= bound);
        }
    }

    #[test]
    fn zero_probability_outcomes_never_drawn() {
        let d = OutcomeDistribution::new(vec![(lbl("Z1=+1"), 1.0 - 1e-13), (lbl("Z1=-1"), 1e-13f64)]).unwrap();
        assert_eq!(sample(&d, 200_000, 1).count(&lbl("Z1=-1")), 0);
    }

    #[test]
    fn same_seed_same_table() {
        let d = probabilities(&fig3(), &psi1::<f64>()).unwrap();
        let a = serde_json::to_string(&sample(&d, 1000, 5)).unwrap();
        let b = serde_json::to_string(&sample(&d, 1000, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, serde_json::to_string(&sample(&d, 1000, 6)).unwrap());
    }

    #[test]
    fn csv_export() {
        let t = CountTable::from_counts([(lbl("Z1X2=+1;X1Z2=-1"), 3), (lbl("Z1X2=-1;X1Z2=+1"), 2)], 0);
        assert_eq!(t.to_csv(), "outcome,count\nZ1X2=+1;X1Z2=-1,3\nZ1X2=-1;X1Z2=+1,2\n");
        let back: CountTable = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn step_i_on_psi1() {
        let r = run_step_i(10_000, 11).unwrap();
        assert!(r.zz_always_plus && r.xx_always_plus);
        let r = run_step_i(1, 11).unwrap();
        assert!(r.zz_always_plus && r.xx_always_plus);
        assert!(run_step_i(0, 11).is_err());
    }

    #[test]
    fn step_i_detects_wrong_state() {
        let s = PathSpinState::ket("u", SpinVector::<f64>::z_minus()).unwrap();
        let r = run_step_i_with(&s, 100, 1).unwrap();
        assert!(!r.zz_always_plus);
    }

    #[test]
    fn step_i_joint_cross_check() {
        let r = run_step_i_joint(&psi1::<f64>(), 10_000, 4).unwrap();
        assert!(r.zz_always_plus && r.xx_always_plus);
        assert_eq!(r.zz_counts.count(&lbl("Z1Z2=+1")), 10_000);
    }

    #[test]
    fn step_ii_on_psi1_and_chi() {
        let r = run_step_ii(100_000, 8).unwrap();
        assert_eq!(r.forbidden_equal_sign_counts, 0);
        assert_eq!(r.opposite_sign_counts, 100_000);
        let bound = 5.0 * 25_000f64.sqrt();
        for l in ["Z1X2=+1;X1Z2=-1", "Z1X2=-1;X1Z2=+1"] {
            assert!((r.counts.count(&lbl(l)) as f64 - 50_000.0).abs() <= bound);
        }
        let one = run_step_ii(1, 8).unwrap();
        assert_eq!((one.forbidden_equal_sign_counts, one.opposite_sign_counts), (0, 1));

        let (chi, _) = chi_states::<f64>();
        let (r, _) = run_step_ii_with(&fig3(), &chi, 1000, 2).unwrap();
        assert_eq!(r.counts.count(&lbl("Z1X2=+1;X1Z2=-1")), 1000);
    }

    #[test]
    fn step_ii_rejects_unsuitable_device() {
        let g = build_fig2(PairVariant::A);
        assert!(matches!(
            run_step_ii_with(&g, &psi1::<f64>(), 10, 0),
            Err(Error::MalformedDistribution(_))
        ));
    }

    #[test]
    fn verdicts() {
        let report = run_protocol(1000, 1).unwrap();
        assert_eq!(report.verdict, Some(Verdict::QmConfirmedNctViolated));

        let step_i = report.step_i.clone();
        let fabricated = |entries: Vec<(&str, u64)>| ProtocolReport {
            step_i: step_i.clone(),
            step_ii: Some(summarize_step_ii(CountTable::from_counts(
                entries.into_iter().map(|(l, c)| (lbl(l), c)),
                0,
            ))),
            verdict: None,
        };
        let equal = fabricated(vec![("Z1X2=+1;X1Z2=+1", 5), ("Z1X2=-1;X1Z2=-1", 3)]);
        assert_eq!(verdict(&equal).unwrap(), Verdict::NctConsistent);
        let mixed = fabricated(vec![("Z1X2=+1;X1Z2=+1", 5), ("Z1X2=+1;X1Z2=-1", 3)]);
        assert_eq!(verdict(&mixed).unwrap(), Verdict::Inconclusive);
        let empty = fabricated(vec![]);
        assert_eq!(verdict(&empty).unwrap(), Verdict::Inconclusive);

        let missing = ProtocolReport {
            step_ii: None,
            ..report
        };
        assert!(matches!(verdict(&missing), Err(Error::MissingStep("ii"))));
    }

    #[test]
    fn verdict_serializes_screaming() {
        assert_eq!(
            serde_json::to_string(&Verdict::QmConfirmedNctViolated).unwrap(),
            "\"QM_CONFIRMED_NCT_VIOLATED\""
        );
    }
}
