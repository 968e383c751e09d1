//! Optical elements, device graphs, and amplitude propagation.
//!
//! A device is an ordered list of beam splitters and Stern-Gerlach routers
//! wired by mode label. Propagation walks the list once, replacing the
//! branches on each element's input modes by branches on its output modes.
//! [`TransferCheck`] assembles the same device as one unitary matrix and
//! serves as an independent oracle for [`propagate`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::observables::{MODE_D, MODE_U};
use crate::outcome::{OutcomeLabel, Sign};
use crate::scalar::Real;
use crate::state::{spin_basis_coeffs, Axis, ModeLabel, PathSpinState, SpinVector};

/// 50-50 beam splitter transfer matrix, before the `1/√2` factor:
/// `|in₁⟩ → (|out₁⟩ + |out₂⟩)/√2`, `|in₂⟩ → (|out₁⟩ − |out₂⟩)/√2`.
///
/// This fixes `|u′⟩ = (|u⟩+|d⟩)/√2` and `|d′⟩ = (|u⟩−|d⟩)/√2`; any other
/// sign placement relabels the `X1` outcomes.
pub const BEAM_SPLITTER_SIGNS: [[f64; 2]; 2] = [[1.0, 1.0], [1.0, -1.0]];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Element {
    BeamSplitter {
        inputs: [ModeLabel; 2],
        outputs: [ModeLabel; 2],
    },
    SternGerlach {
        axis: Axis,
        input: ModeLabel,
        out_plus: ModeLabel,
        out_minus: ModeLabel,
    },
}

/// Beam splitter from `inputs` onto `outputs`.
pub fn beam_splitter_map(inputs: (&str, &str), outputs: (&str, &str)) -> Element {
    Element::BeamSplitter {
        inputs: [inputs.0.into(), inputs.1.into()],
        outputs: [outputs.0.into(), outputs.1.into()],
    }
}

/// Stern-Gerlach router: `|m⟩|axis±⟩ → |m±⟩|axis±⟩`, coherently.
pub fn stern_gerlach_map(axis: Axis, input: &str, outputs: (&str, &str)) -> Element {
    Element::SternGerlach {
        axis,
        input: input.into(),
        out_plus: outputs.0.into(),
        out_minus: outputs.1.into(),
    }
}

impl Element {
    pub fn inputs(&self) -> Vec<&ModeLabel> {
        match self {
            Element::BeamSplitter { inputs, .. } => inputs.iter().collect(),
            Element::SternGerlach { input, .. } => vec![input],
        }
    }

    pub fn outputs(&self) -> Vec<&ModeLabel> {
        match self {
            Element::BeamSplitter { outputs, .. } => outputs.iter().collect(),
            Element::SternGerlach {
                out_plus, out_minus, ..
            } => vec![out_plus, out_minus],
        }
    }

    /// Maps spinors on the input ports (in [`Element::inputs`] order) to
    /// spinors on the output ports.
    pub fn transfer<T: Real>(&self, inputs: &[SpinVector<T>]) -> Vec<SpinVector<T>> {
        match self {
            Element::BeamSplitter { .. } => {
                let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
                let coeff = |i: usize, j: usize| Complex::new(T::lit(BEAM_SPLITTER_SIGNS[i][j]), T::zero()) * h;
                (0..2)
                    .map(|i| inputs[0].scale(coeff(i, 0)).plus(&inputs[1].scale(coeff(i, 1))))
                    .collect()
            }
            Element::SternGerlach { axis, .. } => {
                let (plus, minus) = spin_basis_coeffs(&inputs[0], *axis);
                vec![
                    SpinVector::from_basis_coeffs(*axis, plus, Complex::zero()),
                    SpinVector::from_basis_coeffs(*axis, Complex::zero(), minus),
                ]
            }
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::BeamSplitter { inputs, outputs } => {
                write!(f, "BS({}, {} -> {}, {})", inputs[0], inputs[1], outputs[0], outputs[1])
            }
            Element::SternGerlach {
                axis,
                input,
                out_plus,
                out_minus,
            } => {
                let a = match axis {
                    Axis::Z => "z",
                    Axis::X => "x",
                };
                write!(f, "SG-{a}({input} -> {out_plus}, {out_minus})")
            }
        }
    }
}

/// Acyclic wiring of elements over mode labels, plus the observable signs
/// attached to each output port.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceGraph {
    elements: Vec<Element>,
    input_modes: Vec<ModeLabel>,
    output_modes: Vec<ModeLabel>,
    outcome_labels: BTreeMap<ModeLabel, OutcomeLabel>,
}

/// Modes produced by the elements (or given as inputs) and never consumed,
/// in order of production.
fn dangling_modes(inputs: &[ModeLabel], elements: &[Element]) -> Vec<ModeLabel> {
    let consumed: HashSet<&ModeLabel> = elements.iter().flat_map(|e| e.inputs()).collect();
    let mut seen = HashSet::new();
    inputs
        .iter()
        .chain(elements.iter().flat_map(|e| e.outputs()))
        .filter(|m| !consumed.contains(m) && seen.insert(*m))
        .cloned()
        .collect()
}

impl DeviceGraph {
    /// Output modes default to the unconsumed modes in production order.
    pub fn new(
        input_modes: Vec<ModeLabel>,
        elements: Vec<Element>,
        outcome_labels: BTreeMap<ModeLabel, OutcomeLabel>,
    ) -> Self {
        let output_modes = dangling_modes(&input_modes, &elements);
        DeviceGraph {
            elements,
            input_modes,
            output_modes,
            outcome_labels,
        }
    }

    /// Overrides the output port order. The set must still match the
    /// unconsumed modes for the graph to validate.
    pub fn with_output_order(mut self, outputs: Vec<ModeLabel>) -> Self {
        self.output_modes = outputs;
        self
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn input_modes(&self) -> &[ModeLabel] {
        &self.input_modes
    }

    pub fn output_modes(&self) -> &[ModeLabel] {
        &self.output_modes
    }

    pub fn outcome_labels(&self) -> &BTreeMap<ModeLabel, OutcomeLabel> {
        &self.outcome_labels
    }

    pub fn label_of(&self, mode: &ModeLabel) -> Option<&OutcomeLabel> {
        self.outcome_labels.get(mode)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GraphDoc::from(self))?)
    }

    /// Parses a device. Structural arity is checked here; wiring is left to
    /// [`validate`].
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Index of the offending element, if the problem is local to one.
    pub element: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.element {
            Some(i) => write!(f, "element {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Produced-but-unconsumed modes, recomputed from the wiring.
    pub outputs: Vec<ModeLabel>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| v.to_string()).collect()
    }
}

/// Checks acyclicity, single production and consumption of every mode,
/// output consistency, and label coverage.
///
/// A graph with no labels at all is accepted as a bare transport device;
/// once any port is labeled, every output port must be.
pub fn validate(graph: &DeviceGraph) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |element: Option<usize>, message: String| violations.push(Violation { element, message });

    let mut produced: HashSet<&ModeLabel> = HashSet::new();
    let mut available: HashSet<&ModeLabel> = HashSet::new();
    let mut consumed: HashSet<&ModeLabel> = HashSet::new();
    for m in &graph.input_modes {
        if !produced.insert(m) {
            push(None, format!("input mode `{m}` listed twice"));
        }
        available.insert(m);
    }

    for (i, el) in graph.elements.iter().enumerate() {
        let ports: Vec<&ModeLabel> = el.inputs().into_iter().chain(el.outputs()).collect();
        let distinct: HashSet<&ModeLabel> = ports.iter().copied().collect();
        if distinct.len() != ports.len() {
            push(Some(i), "port labels within one element must be distinct".into());
        }
        for m in el.inputs() {
            if consumed.contains(m) {
                push(Some(i), format!("mode `{m}` consumed twice"));
            } else if !available.contains(m) {
                push(
                    Some(i),
                    format!("input mode `{m}` is not a graph input or an earlier output"),
                );
            }
            consumed.insert(m);
            available.remove(m);
        }
        for m in el.outputs() {
            if !produced.insert(m) {
                push(Some(i), format!("mode `{m}` produced twice"));
            }
            available.insert(m);
        }
    }

    let outputs = dangling_modes(&graph.input_modes, &graph.elements);
    let declared: BTreeSet<&ModeLabel> = graph.output_modes.iter().collect();
    if declared.len() != graph.output_modes.len() {
        push(None, "output mode listed twice".into());
    }
    let actual: BTreeSet<&ModeLabel> = outputs.iter().collect();
    for m in actual.difference(&declared) {
        push(None, format!("unconsumed mode `{m}` is missing from the outputs"));
    }
    for m in declared.difference(&actual) {
        push(None, format!("declared output `{m}` is consumed or never produced"));
    }

    if !graph.outcome_labels.is_empty() {
        for m in &graph.output_modes {
            match graph.outcome_labels.get(m) {
                None => push(None, format!("output mode `{m}` has no outcome label")),
                Some(l) if l.is_empty() => push(None, format!("output mode `{m}` has an empty outcome label")),
                Some(_) => {}
            }
        }
        for m in graph.outcome_labels.keys() {
            if !declared.contains(m) {
                push(None, format!("label attached to non-output mode `{m}`"));
            }
        }
    }

    ValidationReport { violations, outputs }
}

fn ensure_valid(graph: &DeviceGraph) -> Result<()> {
    let report = validate(graph);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidGraph(report.messages()))
    }
}

/// Runs `state` through the device. The result has one branch per output
/// mode (zero branches included) and keeps the input norm.
pub fn propagate<T: Real>(graph: &DeviceGraph, state: &PathSpinState<T>) -> Result<PathSpinState<T>> {
    ensure_valid(graph)?;
    let inputs: HashSet<&ModeLabel> = graph.input_modes.iter().collect();
    if let Some(m) = state.modes().find(|m| !inputs.contains(m)) {
        return Err(Error::UnknownMode(m.to_string()));
    }

    let mut live: BTreeMap<ModeLabel, SpinVector<T>> = state.branches().clone();
    for el in &graph.elements {
        let ins: Vec<SpinVector<T>> = el
            .inputs()
            .into_iter()
            .map(|m| live.remove(m).unwrap_or_else(SpinVector::zero))
            .collect();
        for (m, v) in el.outputs().into_iter().zip(el.transfer(&ins)) {
            live.insert(m.clone(), v);
        }
    }
    let out = graph
        .output_modes
        .iter()
        .map(|m| (m.clone(), live.remove(m).unwrap_or_else(SpinVector::zero)))
        .collect();
    Ok(PathSpinState::from_normalized(out))
}

/// Whole-device unitary on `(all modes) ⊗ spin`, assembled from per-element
/// blocks. Each element is embedded as `V + V† + (P_out − VV†)`, where `V` is
/// its isometry from input ports to output ports; that operator is unitary
/// on the element's local ports and agrees with `V` on inputs.
#[derive(Clone, Debug)]
pub struct TransferCheck<T: Real = f64> {
    pub modes: Vec<ModeLabel>,
    pub matrix: CMatrix<T>,
    outputs: Vec<ModeLabel>,
}

fn spin_projector<T: Real>(axis: Axis, sign: Sign) -> CMatrix<T> {
    let s = sign.value() as f64;
    match axis {
        Axis::Z => CMatrix::from_real_rows(&[&[(1.0 + s) / 2.0, 0.0], &[0.0, (1.0 - s) / 2.0]]),
        Axis::X => CMatrix::from_real_rows(&[&[0.5, s / 2.0], &[s / 2.0, 0.5]]),
    }
}

/// Isometry of one element as a `(2·|out|) × (2·|in|)` block, row-major.
fn element_isometry<T: Real>(el: &Element) -> Vec<Vec<Complex<T>>> {
    match el {
        Element::BeamSplitter { .. } => {
            let h = T::FRAC_1_SQRT_2();
            let mut v = vec![vec![Complex::zero(); 4]; 4];
            for (o, row) in BEAM_SPLITTER_SIGNS.iter().enumerate() {
                for (i, &sign) in row.iter().enumerate() {
                    for s in 0..2 {
                        v[2 * o + s][2 * i + s] = Complex::new(T::lit(sign) * h, T::zero());
                    }
                }
            }
            v
        }
        Element::SternGerlach { axis, .. } => {
            let mut v = vec![vec![Complex::zero(); 2]; 4];
            for (o, sign) in Sign::BOTH.iter().enumerate() {
                let p = spin_projector::<T>(*axis, *sign);
                for r in 0..2 {
                    for c in 0..2 {
                        v[2 * o + r][c] = p[(r, c)];
                    }
                }
            }
            v
        }
    }
}

impl<T: Real> TransferCheck<T> {
    pub fn build(graph: &DeviceGraph) -> Result<Self> {
        ensure_valid(graph)?;
        let mut modes: Vec<ModeLabel> = graph.input_modes.clone();
        for el in &graph.elements {
            modes.extend(el.outputs().into_iter().cloned());
        }
        let index: HashMap<&ModeLabel, usize> = modes.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let dim = 2 * modes.len();
        let mut total = CMatrix::identity(dim);

        for el in &graph.elements {
            let ins: Vec<usize> = el.inputs().iter().map(|m| index[m]).collect();
            let outs: Vec<usize> = el.outputs().iter().map(|m| index[m]).collect();
            // global coordinates of the local in/out spaces
            let in_idx: Vec<usize> = ins.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
            let out_idx: Vec<usize> = outs.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
            let v = element_isometry::<T>(el);

            let mut w = CMatrix::identity(dim);
            for &g in in_idx.iter().chain(&out_idx) {
                for k in 0..dim {
                    w[(g, k)] = Complex::zero();
                    w[(k, g)] = Complex::zero();
                }
            }
            // V and V†
            for (r, &go) in out_idx.iter().enumerate() {
                for (c, &gi) in in_idx.iter().enumerate() {
                    w[(go, gi)] = v[r][c];
                    w[(gi, go)] = v[r][c].conj();
                }
            }
            // P_out − VV†
            for (r1, &g1) in out_idx.iter().enumerate() {
                for (r2, &g2) in out_idx.iter().enumerate() {
                    let vvd = (0..in_idx.len()).fold(Complex::<T>::zero(), |acc, c| acc + v[r1][c] * v[r2][c].conj());
                    let id: Complex<T> = if r1 == r2 { Complex::one() } else { Complex::zero() };
                    w[(g1, g2)] = id - vvd;
                }
            }
            total = &w * &total;
        }

        Ok(TransferCheck {
            modes,
            matrix: total,
            outputs: graph.output_modes.clone(),
        })
    }

    pub fn unitarity_defect(&self) -> T {
        self.matrix.unitarity_defect()
    }

    /// Applies the device matrix to `state` and keeps the output modes.
    pub fn apply(&self, state: &PathSpinState<T>) -> Result<PathSpinState<T>> {
        let index: HashMap<&ModeLabel, usize> = self.modes.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut v = vec![Complex::zero(); self.matrix.dim()];
        for (m, s) in state.branches() {
            let i = *index.get(m).ok_or_else(|| Error::UnknownMode(m.to_string()))?;
            v[2 * i] = s.plus_z;
            v[2 * i + 1] = s.minus_z;
        }
        let w = self.matrix.apply(&v);
        let out = self
            .outputs
            .iter()
            .map(|m| {
                let i = index[m];
                (m.clone(), SpinVector::new(w[2 * i], w[2 * i + 1]))
            })
            .collect();
        Ok(PathSpinState::from_normalized(out))
    }
}

// ---------------------------------------------------------------------------
// Built-in devices

/// The four pair-measurement devices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairVariant {
    /// `Z1`, `Z2`
    A,
    /// `Z1`, `X2`
    B,
    /// `X1`, `Z2`
    C,
    /// `X1`, `X2`
    D,
}

impl PairVariant {
    pub const ALL: [PairVariant; 4] = [PairVariant::A, PairVariant::B, PairVariant::C, PairVariant::D];

    fn path_is_x(self) -> bool {
        matches!(self, PairVariant::C | PairVariant::D)
    }

    fn spin_axis(self) -> Axis {
        match self {
            PairVariant::A | PairVariant::C => Axis::Z,
            PairVariant::B | PairVariant::D => Axis::X,
        }
    }

    pub fn observable_names(self) -> (&'static str, &'static str) {
        let p = if self.path_is_x() { "X1" } else { "Z1" };
        let s = match self.spin_axis() {
            Axis::Z => "Z2",
            Axis::X => "X2",
        };
        (p, s)
    }

    fn tag(self) -> &'static str {
        match self {
            PairVariant::A => "a",
            PairVariant::B => "b",
            PairVariant::C => "c",
            PairVariant::D => "d",
        }
    }
}

/// Which pair of commuting products the cascaded device measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JointPair {
    /// `Z1X2` then `X1Z2`.
    Z1X2X1Z2,
    /// `Z1Z2` then `X1X2`.
    Z1Z2X1X2,
}

impl JointPair {
    pub fn observable_names(self) -> (&'static str, &'static str) {
        match self {
            JointPair::Z1X2X1Z2 => ("Z1X2", "X1Z2"),
            JointPair::Z1Z2X1X2 => ("Z1Z2", "X1X2"),
        }
    }
}

struct Port {
    mode: ModeLabel,
    path: Sign,
    spin: Sign,
}

/// Elements of one pair-measurement stage on path inputs `(upper, lower)`.
/// Ports come back in `(+,+), (+,−), (−,+), (−,−)` order.
fn pair_stage(variant: PairVariant, upper: &ModeLabel, lower: &ModeLabel, prefix: &str) -> (Vec<Element>, Vec<Port>) {
    let mut elements = Vec::new();
    let (up, down) = if variant.path_is_x() {
        let up: ModeLabel = format!("{prefix}u'").into();
        let down: ModeLabel = format!("{prefix}d'").into();
        elements.push(Element::BeamSplitter {
            inputs: [upper.clone(), lower.clone()],
            outputs: [up.clone(), down.clone()],
        });
        (up, down)
    } else {
        (upper.clone(), lower.clone())
    };
    let stem = |m: &ModeLabel| {
        if variant.path_is_x() {
            m.to_string()
        } else if m == upper {
            format!("{prefix}u")
        } else {
            format!("{prefix}d")
        }
    };
    let mut ports = Vec::new();
    for (mode, path) in [(up, Sign::Plus), (down, Sign::Minus)] {
        let base = stem(&mode);
        let plus: ModeLabel = format!("{base}+").into();
        let minus: ModeLabel = format!("{base}-").into();
        elements.push(Element::SternGerlach {
            axis: variant.spin_axis(),
            input: mode,
            out_plus: plus.clone(),
            out_minus: minus.clone(),
        });
        ports.push(Port {
            mode: plus,
            path,
            spin: Sign::Plus,
        });
        ports.push(Port {
            mode: minus,
            path,
            spin: Sign::Minus,
        });
    }
    (elements, ports)
}

fn uv() -> (ModeLabel, ModeLabel) {
    (MODE_U.into(), MODE_D.into())
}

/// Source: one z-axis Stern-Gerlach taking mode `a` to `u` (z+) and `d` (z−).
pub fn build_fig1_source() -> DeviceGraph {
    let el = stern_gerlach_map(Axis::Z, "a", (MODE_U, MODE_D));
    let labels = [
        (
            MODE_U.into(),
            OutcomeLabel::new([("Z1", Sign::Plus), ("Z2", Sign::Plus)]),
        ),
        (
            MODE_D.into(),
            OutcomeLabel::new([("Z1", Sign::Minus), ("Z2", Sign::Minus)]),
        ),
    ]
    .into_iter()
    .collect();
    DeviceGraph::new(vec!["a".into()], vec![el], labels)
}

/// Pair-measurement device on inputs `u`, `d` with four labeled ports.
pub fn build_fig2(variant: PairVariant) -> DeviceGraph {
    let (u, d) = uv();
    let (elements, ports) = pair_stage(variant, &u, &d, &format!("f2{}.", variant.tag()));
    let (pn, sn) = variant.observable_names();
    let labels = ports
        .iter()
        .map(|p| (p.mode.clone(), OutcomeLabel::new([(pn, p.path), (sn, p.spin)])))
        .collect();
    let order = ports.iter().map(|p| p.mode.clone()).collect();
    DeviceGraph::new(vec![u, d], elements, labels).with_output_order(order)
}

/// Cascaded joint measurement of two commuting products.
///
/// The first stage separates the first product's eigenspaces; each pair of
/// ports sharing a product sign is recombined in a second-stage device,
/// which erases the individual factor values and measures the second
/// product. Output ports are ordered by `(first sign, second sign)`.
pub fn build_fig3_joint(pair: JointPair) -> DeviceGraph {
    let (first_stage, second_stage) = match pair {
        JointPair::Z1X2X1Z2 => (PairVariant::B, PairVariant::C),
        JointPair::Z1Z2X1X2 => (PairVariant::A, PairVariant::D),
    };
    let (first_name, second_name) = pair.observable_names();
    let (u, d) = uv();
    let (mut elements, stage1) = pair_stage(first_stage, &u, &d, "f3.s1.");

    let mut outputs: Vec<(OutcomeLabel, ModeLabel)> = Vec::new();
    for group in Sign::BOTH {
        let feed: Vec<&Port> = stage1.iter().filter(|p| p.path * p.spin == group).collect();
        // path-plus port feeds the upper input
        let upper = feed
            .iter()
            .find(|p| p.path == Sign::Plus)
            .expect("one port per path sign");
        let lower = feed
            .iter()
            .find(|p| p.path == Sign::Minus)
            .expect("one port per path sign");
        let prefix = format!("f3.s2{}.", group.symbol());
        let (els, ports) = pair_stage(second_stage, &upper.mode, &lower.mode, &prefix);
        elements.extend(els);
        for p in ports {
            let label = OutcomeLabel::new([(first_name, group), (second_name, p.path * p.spin)]);
            outputs.push((label, p.mode));
        }
    }
    outputs.sort_by(|a, b| a.0.cmp(&b.0));
    let order = outputs.iter().map(|(_, m)| m.clone()).collect();
    let labels = outputs.into_iter().map(|(l, m)| (m, l)).collect();
    DeviceGraph::new(vec![u, d], elements, labels).with_output_order(order)
}

pub const BUILTIN_DEVICES: [&str; 7] = ["fig1", "fig2a", "fig2b", "fig2c", "fig2d", "fig3-zx-xz", "fig3-zz-xx"];

/// Looks up a built-in device by its command-line name.
pub fn builtin_device(name: &str) -> Option<DeviceGraph> {
    Some(match name {
        "fig1" => build_fig1_source(),
        "fig2a" => build_fig2(PairVariant::A),
        "fig2b" => build_fig2(PairVariant::B),
        "fig2c" => build_fig2(PairVariant::C),
        "fig2d" => build_fig2(PairVariant::D),
        "fig3-zx-xz" => build_fig3_joint(JointPair::Z1X2X1Z2),
        "fig3-zz-xx" => build_fig3_joint(JointPair::Z1Z2X1X2),
        _ => return None,
    })
}

// ---------------------------------------------------------------------------
// JSON form

#[derive(Serialize, Deserialize)]
struct ElementDoc {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axis: Option<Axis>,
    #[serde(rename = "in")]
    inputs: Vec<ModeLabel>,
    #[serde(rename = "out")]
    outputs: Vec<ModeLabel>,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    inputs: Vec<ModeLabel>,
    elements: Vec<ElementDoc>,
    #[serde(default)]
    labels: BTreeMap<ModeLabel, OutcomeLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outputs: Option<Vec<ModeLabel>>,
}

impl From<&DeviceGraph> for GraphDoc {
    fn from(g: &DeviceGraph) -> Self {
        let elements = g
            .elements
            .iter()
            .map(|el| match el {
                Element::BeamSplitter { inputs, outputs } => ElementDoc {
                    kind: "bs".into(),
                    axis: None,
                    inputs: inputs.to_vec(),
                    outputs: outputs.to_vec(),
                },
                Element::SternGerlach {
                    axis,
                    input,
                    out_plus,
                    out_minus,
                } => ElementDoc {
                    kind: "sg".into(),
                    axis: Some(*axis),
                    inputs: vec![input.clone()],
                    outputs: vec![out_plus.clone(), out_minus.clone()],
                },
            })
            .collect();
        GraphDoc {
            inputs: g.input_modes.clone(),
            elements,
            labels: g.outcome_labels.clone(),
            outputs: Some(g.output_modes.clone()),
        }
    }
}

impl TryFrom<GraphDoc> for DeviceGraph {
    type Error = Error;
    fn try_from(doc: GraphDoc) -> Result<Self> {
        let mut elements = Vec::with_capacity(doc.elements.len());
        let mut problems = Vec::new();
        for (i, e) in doc.elements.into_iter().enumerate() {
            match (e.kind.as_str(), e.axis, e.inputs.len(), e.outputs.len()) {
                ("bs", None, 2, 2) => {
                    let [a, b]: [ModeLabel; 2] = e.inputs.try_into().expect("len 2");
                    let [c, d]: [ModeLabel; 2] = e.outputs.try_into().expect("len 2");
                    elements.push(Element::BeamSplitter {
                        inputs: [a, b],
                        outputs: [c, d],
                    });
                }
                ("sg", Some(axis), 1, 2) => {
                    let mut outs = e.outputs.into_iter();
                    elements.push(Element::SternGerlach {
                        axis,
                        input: e.inputs.into_iter().next().expect("len 1"),
                        out_plus: outs.next().expect("len 2"),
                        out_minus: outs.next().expect("len 2"),
                    });
                }
                ("bs", Some(_), _, _) => problems.push(format!("element {i}: beam splitter takes no axis")),
                ("bs", ..) => problems.push(format!("element {i}: beam splitter needs 2 inputs and 2 outputs")),
                ("sg", None, _, _) => problems.push(format!("element {i}: Stern-Gerlach needs an axis")),
                ("sg", ..) => problems.push(format!("element {i}: Stern-Gerlach needs 1 input and 2 outputs")),
                (kind, ..) => problems.push(format!("element {i}: unknown kind `{kind}`")),
            }
        }
        if !problems.is_empty() {
            return Err(Error::InvalidGraph(problems));
        }
        let graph = DeviceGraph::new(doc.inputs, elements, doc.labels);
        Ok(match doc.outputs {
            Some(order) => graph.with_output_order(order),
            None => graph,
        })
    }
}
