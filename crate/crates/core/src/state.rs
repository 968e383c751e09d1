//! Complex amplitudes and the single-particle path⊗spin state.
//!
//! A state is an association from spatial mode labels to spin spinors in
//! the `{|z+⟩, |z−⟩}` basis. The mode set is open ended: devices create new
//! labels as they route the particle.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Amplitude<T> = Complex<T>;

/// Identifier of a spatial mode. Compared by exact string equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeLabel(String);

impl ModeLabel {
    pub fn new(name: impl Into<String>) -> Self {
        ModeLabel(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ModeLabel {
    fn from(s: &str) -> Self {
        ModeLabel(s.to_string())
    }
}

impl From<String> for ModeLabel {
    fn from(s: String) -> Self {
        ModeLabel(s)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Spin quantization axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Z,
    X,
}

/// Spin part of one branch, as coordinates on `|z+⟩`, `|z−⟩`.
///
/// Not normalized on its own: a branch carries its share of the total weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpinVector<T: Real = f64> {
    pub plus_z: Amplitude<T>,
    pub minus_z: Amplitude<T>,
}

impl<T: Real> SpinVector<T> {
    pub fn new(plus_z: Amplitude<T>, minus_z: Amplitude<T>) -> Self {
        SpinVector { plus_z, minus_z }
    }

    pub fn real(plus_z: T, minus_z: T) -> Self {
        SpinVector::new(Complex::new(plus_z, T::zero()), Complex::new(minus_z, T::zero()))
    }

    pub fn zero() -> Self {
        SpinVector::new(Complex::zero(), Complex::zero())
    }

    /// Unit eigenvector of the given axis with the given sign.
    pub fn eigen(axis: Axis, plus: bool) -> Self {
        let (p, m) = if plus {
            (T::one(), T::zero())
        } else {
            (T::zero(), T::one())
        };
        SpinVector::from_basis_coeffs(axis, Complex::new(p, T::zero()), Complex::new(m, T::zero()))
    }

    pub fn z_plus() -> Self {
        Self::eigen(Axis::Z, true)
    }

    pub fn z_minus() -> Self {
        Self::eigen(Axis::Z, false)
    }

    pub fn x_plus() -> Self {
        Self::eigen(Axis::X, true)
    }

    pub fn x_minus() -> Self {
        Self::eigen(Axis::X, false)
    }

    /// Inverse of [`spin_basis_coeffs`].
    pub fn from_basis_coeffs(axis: Axis, plus: Amplitude<T>, minus: Amplitude<T>) -> Self {
        match axis {
            Axis::Z => SpinVector::new(plus, minus),
            Axis::X => {
                let (a, b) = hadamard_pair(plus, minus);
                SpinVector::new(a, b)
            }
        }
    }

    pub fn norm_sqr(&self) -> T {
        self.plus_z.norm_sqr() + self.minus_z.norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Amplitude<T> {
        self.plus_z.conj() * other.plus_z + self.minus_z.conj() * other.minus_z
    }

    pub fn scale(&self, c: Amplitude<T>) -> Self {
        SpinVector::new(self.plus_z * c, self.minus_z * c)
    }

    pub fn plus(&self, other: &Self) -> Self {
        SpinVector::new(self.plus_z + other.plus_z, self.minus_z + other.minus_z)
    }

    pub fn is_finite(&self) -> bool {
        [self.plus_z.re, self.plus_z.im, self.minus_z.re, self.minus_z.im]
            .iter()
            .all(|x| x.is_finite())
    }
}

/// `((a + b)/√2, (a − b)/√2)`.
pub(crate) fn hadamard_pair<T: Real>(a: Amplitude<T>, b: Amplitude<T>) -> (Amplitude<T>, Amplitude<T>) {
    let h = T::FRAC_1_SQRT_2();
    ((a + b) * h, (a - b) * h)
}

/// Coordinates of `v` on `{|axis+⟩, |axis−⟩}`.
pub fn spin_basis_coeffs<T: Real>(v: &SpinVector<T>, axis: Axis) -> (Amplitude<T>, Amplitude<T>) {
    match axis {
        Axis::Z => (v.plus_z, v.minus_z),
        Axis::X => hadamard_pair(v.plus_z, v.minus_z),
    }
}

/// Normalized pure state of one particle over an open set of spatial modes.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSpinState<T: Real = f64> {
    branches: BTreeMap<ModeLabel, SpinVector<T>>,
}

/// Result of [`make_state`]: the normalized state and whether the input was
/// off from unit norm by more than the propagation tolerance.
#[derive(Clone, Debug)]
pub struct Prepared<T: Real = f64> {
    pub state: PathSpinState<T>,
    pub renormalized: bool,
}

/// Builds a normalized state from raw branches.
pub fn make_state<T: Real, L: Into<ModeLabel>>(
    branches: impl IntoIterator<Item = (L, SpinVector<T>)>,
) -> Result<Prepared<T>> {
    let mut map = BTreeMap::new();
    for (label, spin) in branches {
        let label = label.into();
        if !spin.is_finite() {
            return Err(Error::NonFinite(label.0));
        }
        if map.contains_key(&label) {
            return Err(Error::DuplicateMode(label.0));
        }
        map.insert(label, spin);
    }
    let norm_sqr = map.values().fold(T::zero(), |acc, s| acc + s.norm_sqr());
    if !norm_sqr.is_finite() {
        return Err(Error::NonFinite("<total>".into()));
    }
    if norm_sqr <= T::zero() {
        return Err(Error::ZeroState);
    }
    let norm = norm_sqr.sqrt();
    let inv = Complex::new(norm.recip(), T::zero());
    for s in map.values_mut() {
        *s = s.scale(inv);
    }
    Ok(Prepared {
        state: PathSpinState { branches: map },
        renormalized: (norm - T::one()).abs() > T::PROPAGATION_TOL,
    })
}

/// `⟨s1|s2⟩`. Modes present in only one state contribute nothing.
pub fn inner_product<T: Real>(s1: &PathSpinState<T>, s2: &PathSpinState<T>) -> Amplitude<T> {
    s1.branches
        .iter()
        .filter_map(|(mode, a)| s2.branches.get(mode).map(|b| a.inner(b)))
        .fold(Complex::zero(), |acc, x| acc + x)
}

impl<T: Real> PathSpinState<T> {
    /// Normalizing constructor; see [`make_state`].
    pub fn new<L: Into<ModeLabel>>(branches: impl IntoIterator<Item = (L, SpinVector<T>)>) -> Result<Self> {
        make_state(branches).map(|p| p.state)
    }

    /// `|mode⟩ ⊗ spin`, normalized.
    pub fn ket(mode: impl Into<ModeLabel>, spin: SpinVector<T>) -> Result<Self> {
        Self::new([(mode.into(), spin)])
    }

    /// Wraps branches that are already known to be normalized (device output).
    pub(crate) fn from_normalized(branches: BTreeMap<ModeLabel, SpinVector<T>>) -> Self {
        PathSpinState { branches }
    }

    /// Normalized `Σ cᵢ |sᵢ⟩`.
    pub fn superpose<'a>(terms: impl IntoIterator<Item = (Amplitude<T>, &'a PathSpinState<T>)>) -> Result<Self> {
        let mut acc: BTreeMap<ModeLabel, SpinVector<T>> = BTreeMap::new();
        for (c, s) in terms {
            for (mode, spin) in &s.branches {
                let e = acc.entry(mode.clone()).or_insert_with(SpinVector::zero);
                *e = e.plus(&spin.scale(c));
            }
        }
        Self::new(acc)
    }

    pub fn branches(&self) -> &BTreeMap<ModeLabel, SpinVector<T>> {
        &self.branches
    }

    pub fn branch(&self, mode: &str) -> Option<&SpinVector<T>> {
        self.branches.get(&ModeLabel::from(mode))
    }

    pub fn modes(&self) -> impl Iterator<Item = &ModeLabel> {
        self.branches.keys()
    }

    pub fn norm_sqr(&self) -> T {
        self.branches.values().fold(T::zero(), |acc, s| acc + s.norm_sqr())
    }

    /// Weight carried by one mode, zero if absent.
    pub fn mode_weight(&self, mode: &ModeLabel) -> T {
        self.branches.get(mode).map_or(T::zero(), |s| s.norm_sqr())
    }

    /// Drops branches whose weight is below [`Real::PRUNE_TOL`].
    pub fn pruned(&self) -> Self {
        PathSpinState {
            branches: self
                .branches
                .iter()
                .filter(|(_, s)| s.norm_sqr() >= T::PRUNE_TOL)
                .map(|(m, s)| (m.clone(), *s))
                .collect(),
        }
    }

    /// `|⟨self|other⟩|`; equals one exactly when both describe the same ray.
    pub fn overlap(&self, other: &Self) -> T {
        inner_product(self, other).norm()
    }

    pub fn same_ray(&self, other: &Self, tol: T) -> bool {
        (self.overlap(other) - T::one()).abs() <= tol
    }

    pub fn scale(&self, c: Amplitude<T>) -> Self {
        PathSpinState {
            branches: self.branches.iter().map(|(m, s)| (m.clone(), s.scale(c))).collect(),
        }
    }

    /// Largest componentwise difference, treating absent modes as zero.
    pub fn max_component_diff(&self, other: &Self) -> T {
        let modes: std::collections::BTreeSet<&ModeLabel> = self.branches.keys().chain(other.branches.keys()).collect();
        let zero = SpinVector::zero();
        modes.into_iter().fold(T::zero(), |m, mode| {
            let a = self.branches.get(mode).unwrap_or(&zero);
            let b = other.branches.get(mode).unwrap_or(&zero);
            m.max((a.plus_z - b.plus_z).norm()).max((a.minus_z - b.minus_z).norm())
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&StateDoc::from(self))?)
    }

    /// Parses and re-validates through [`make_state`].
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: StateDoc<T> = serde_json::from_str(text)?;
        doc.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct BranchDoc<T: Real> {
    mode: ModeLabel,
    plus_z: [T; 2],
    minus_z: [T; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct StateDoc<T: Real> {
    branches: Vec<BranchDoc<T>>,
}

impl<T: Real> From<&PathSpinState<T>> for StateDoc<T> {
    fn from(s: &PathSpinState<T>) -> Self {
        StateDoc {
            branches: s
                .branches
                .iter()
                .map(|(m, v)| BranchDoc {
                    mode: m.clone(),
                    plus_z: [v.plus_z.re, v.plus_z.im],
                    minus_z: [v.minus_z.re, v.minus_z.im],
                })
                .collect(),
        }
    }
}

impl<T: Real> TryFrom<StateDoc<T>> for PathSpinState<T> {
    type Error = Error;
    fn try_from(doc: StateDoc<T>) -> Result<Self> {
        PathSpinState::new(doc.branches.into_iter().map(|b| {
            (
                b.mode,
                SpinVector::new(
                    Complex::new(b.plus_z[0], b.plus_z[1]),
                    Complex::new(b.minus_z[0], b.minus_z[1]),
                ),
            )
        }))
    }
}

impl<T: Real> Serialize for PathSpinState<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateDoc::from(self).serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for PathSpinState<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = StateDoc::<T>::deserialize(d)?;
        doc.try_into().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    fn psi1_raw(w: f64) -> PathSpinState {
        PathSpinState::new([("u", SpinVector::real(w, 0.0)), ("d", SpinVector::real(0.0, w))]).unwrap()
    }

    #[test]
    fn make_state_normalizes() {
        let p = make_state([
            ("u", SpinVector::real(FRAC_1_SQRT_2, 0.0)),
            ("d", SpinVector::real(0.0, FRAC_1_SQRT_2)),
        ])
        .unwrap();
        assert!(!p.renormalized);
        assert!((p.state.norm_sqr() - 1.0).abs() < 1e-12);

        let single = make_state([("u", SpinVector::<f64>::z_plus())]).unwrap();
        assert!(!single.renormalized);
        assert_eq!(single.state.branch("u").unwrap().plus_z, c(1.0));

        let scaled = make_state([("u", SpinVector::real(2.0, 0.0)), ("d", SpinVector::real(0.0, 2.0))]).unwrap();
        assert!(scaled.renormalized);
        assert!(scaled.state.max_component_diff(&psi1_raw(1.0)) < 1e-12);
    }

    #[test]
    fn make_state_errors() {
        let dup = make_state([("u", SpinVector::<f64>::z_plus()), ("u", SpinVector::z_minus())]);
        assert!(matches!(dup, Err(Error::DuplicateMode(m)) if m == "u"));
        let zero = make_state([("u", SpinVector::<f64>::zero())]);
        assert!(matches!(zero, Err(Error::ZeroState)));
        let empty = make_state(Vec::<(&str, SpinVector<f64>)>::new());
        assert!(matches!(empty, Err(Error::ZeroState)));
        let nan = make_state([("u", SpinVector::real(f64::NAN, 0.0))]);
        assert!(matches!(nan, Err(Error::NonFinite(_))));
    }

    #[test]
    fn inner_products() {
        let psi = psi1_raw(1.0);
        assert!((inner_product(&psi, &psi) - c(1.0)).norm() < 1e-12);
        let uz = PathSpinState::ket("u", SpinVector::z_plus()).unwrap();
        let dz = PathSpinState::ket("d", SpinVector::z_minus()).unwrap();
        assert_eq!(inner_product(&uz, &dz), c(0.0));
        // ⟨u,z+|ψ1⟩ = 1/√2
        assert!((inner_product(&uz, &psi) - c(FRAC_1_SQRT_2)).norm() < 1e-12);
    }

    #[test]
    fn inner_product_is_conjugate_linear_on_left() {
        let a = PathSpinState::ket("u", SpinVector::z_plus()).unwrap();
        let b = PathSpinState::new([
            ("u", SpinVector::new(Complex::new(0.0, 1.0), c(0.0))),
            ("d", SpinVector::real(1.0, 0.0)),
        ])
        .unwrap();
        let i = Complex::new(0.0, 1.0);
        let lhs = inner_product(&a.scale(i), &b);
        let rhs = i.conj() * inner_product(&a, &b);
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn spin_coefficients() {
        let h = FRAC_1_SQRT_2;
        let (p, m) = spin_basis_coeffs(&SpinVector::<f64>::z_plus(), Axis::X);
        assert!((p - c(h)).norm() < 1e-15 && (m - c(h)).norm() < 1e-15);
        let (p, m) = spin_basis_coeffs(&SpinVector::real(h, h), Axis::X);
        assert!((p - c(1.0)).norm() < 1e-15 && m.norm() < 1e-15);
        let v = SpinVector::<f64>::z_minus();
        assert_eq!(spin_basis_coeffs(&v, Axis::Z), (c(0.0), c(1.0)));
    }

    #[test]
    fn x_eigenvectors() {
        let xp = SpinVector::<f64>::x_plus();
        let xm = SpinVector::<f64>::x_minus();
        assert!((xp.plus_z - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((xm.minus_z + c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!(xp.inner(&xm).norm() < 1e-15);
    }

    #[test]
    fn pruning_drops_dust() {
        let s =
            PathSpinState::<f64>::new([("u", SpinVector::real(1.0, 0.0)), ("d", SpinVector::real(1e-9, 0.0))]).unwrap();
        let p = s.pruned();
        assert_eq!(p.modes().count(), 1);
        assert!((s.overlap(&p) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let psi = psi1_raw(1.0);
        let text = psi.to_json().unwrap();
        assert!(text.contains("\"plus_z\""));
        let back: PathSpinState = PathSpinState::from_json(&text).unwrap();
        assert!(back.max_component_diff(&psi) < 1e-15);

        let dup = r#"{"branches":[{"mode":"u","plus_z":[1,0],"minus_z":[0,0]},
                                  {"mode":"u","plus_z":[0,0],"minus_z":[1,0]}]}"#;
        assert!(matches!(
            PathSpinState::<f64>::from_json(dup),
            Err(Error::DuplicateMode(_))
        ));
        let zero = r#"{"branches":[{"mode":"u","plus_z":[0,0],"minus_z":[0,0]}]}"#;
        assert!(PathSpinState::<f64>::from_json(zero).is_err());
        let unnormalized = r#"{"branches":[{"mode":"u","plus_z":[3,0],"minus_z":[0,4]}]}"#;
        let s = PathSpinState::<f64>::from_json(unnormalized).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let s =
            PathSpinState::<f32>::new([("u", SpinVector::real(1.0, 0.0)), ("d", SpinVector::real(0.0, 1.0))]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < f32::PROPAGATION_TOL);
    }
}
