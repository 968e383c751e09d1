//! The four ±1 observables on path and spin, their products, and the
//! distinguished states `ψ1`, `χ(1,−1)`, `χ(−1,1)`.
//!
//! Matrices act on the canonical four-dimensional space ordered as
//! `(|u,z+⟩, |u,z−⟩, |d,z+⟩, |d,z−⟩)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{vdot, CMatrix};
use crate::outcome::Sign;
use crate::scalar::Real;
use crate::state::{inner_product, Amplitude, Axis, ModeLabel, PathSpinState, SpinVector};

pub const MODE_U: &str = "u";
pub const MODE_D: &str = "d";

/// Observable on the path qubit (modes `u`, `d`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PathObservable {
    Z1,
    X1,
}

/// Observable on the spin qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpinObservable {
    Z2,
    X2,
}

impl PathObservable {
    pub fn axis(self) -> Axis {
        match self {
            PathObservable::Z1 => Axis::Z,
            PathObservable::X1 => Axis::X,
        }
    }
}

impl SpinObservable {
    pub fn axis(self) -> Axis {
        match self {
            SpinObservable::Z2 => Axis::Z,
            SpinObservable::X2 => Axis::X,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseObservable {
    Path(PathObservable),
    Spin(SpinObservable),
}

impl BaseObservable {
    pub const Z1: Self = BaseObservable::Path(PathObservable::Z1);
    pub const X1: Self = BaseObservable::Path(PathObservable::X1);
    pub const Z2: Self = BaseObservable::Spin(SpinObservable::Z2);
    pub const X2: Self = BaseObservable::Spin(SpinObservable::X2);
    pub const ALL: [Self; 4] = [Self::Z1, Self::X1, Self::Z2, Self::X2];

    pub fn name(self) -> &'static str {
        match self {
            BaseObservable::Path(PathObservable::Z1) => "Z1",
            BaseObservable::Path(PathObservable::X1) => "X1",
            BaseObservable::Spin(SpinObservable::Z2) => "Z2",
            BaseObservable::Spin(SpinObservable::X2) => "X2",
        }
    }
}

/// Product of one path and one spin observable. The factors always commute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductObservable {
    pub path_factor: PathObservable,
    pub spin_factor: SpinObservable,
}

impl ProductObservable {
    pub const Z1Z2: Self = Self::new(PathObservable::Z1, SpinObservable::Z2);
    pub const X1X2: Self = Self::new(PathObservable::X1, SpinObservable::X2);
    pub const Z1X2: Self = Self::new(PathObservable::Z1, SpinObservable::X2);
    pub const X1Z2: Self = Self::new(PathObservable::X1, SpinObservable::Z2);
    pub const ALL: [Self; 4] = [Self::Z1Z2, Self::X1X2, Self::Z1X2, Self::X1Z2];

    pub const fn new(path_factor: PathObservable, spin_factor: SpinObservable) -> Self {
        ProductObservable {
            path_factor,
            spin_factor,
        }
    }

    pub fn name(self) -> &'static str {
        match (self.path_factor, self.spin_factor) {
            (PathObservable::Z1, SpinObservable::Z2) => "Z1Z2",
            (PathObservable::X1, SpinObservable::X2) => "X1X2",
            (PathObservable::Z1, SpinObservable::X2) => "Z1X2",
            (PathObservable::X1, SpinObservable::Z2) => "X1Z2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    Base(BaseObservable),
    Product(ProductObservable),
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Base(b) => b.name(),
            Observable::Product(p) => p.name(),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        BaseObservable::ALL
            .iter()
            .map(|b| Observable::Base(*b))
            .chain(ProductObservable::ALL.iter().map(|p| Observable::Product(*p)))
            .find(|o| o.name() == name)
    }
}

impl From<BaseObservable> for Observable {
    fn from(b: BaseObservable) -> Self {
        Observable::Base(b)
    }
}

impl From<ProductObservable> for Observable {
    fn from(p: ProductObservable) -> Self {
        Observable::Product(p)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn pauli<T: Real>(axis: Axis) -> CMatrix<T> {
    match axis {
        Axis::Z => CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]),
        Axis::X => CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
    }
}

/// 4×4 matrix of an observable in the canonical basis.
pub fn matrix_of<T: Real>(obs: impl Into<Observable>) -> CMatrix<T> {
    let id = CMatrix::identity(2);
    match obs.into() {
        Observable::Base(BaseObservable::Path(p)) => pauli(p.axis()).kron(&id),
        Observable::Base(BaseObservable::Spin(s)) => id.kron(&pauli(s.axis())),
        Observable::Product(p) => {
            &matrix_of::<T>(BaseObservable::Path(p.path_factor)) * &matrix_of::<T>(BaseObservable::Spin(p.spin_factor))
        }
    }
}

/// Projector onto the `sign` eigenspace: `(I ± M)/2`.
pub fn eigenprojector<T: Real>(obs: impl Into<Observable>, sign: Sign) -> CMatrix<T> {
    let m = matrix_of::<T>(obs);
    let s = Complex::new(T::lit(sign.value() as f64), T::zero());
    CMatrix::identity(4)
        .add(&m.scale(s))
        .scale(Complex::new(T::lit(0.5), T::zero()))
}

/// Coordinates of a state on the canonical basis.
pub fn to_canonical<T: Real>(state: &PathSpinState<T>) -> Result<[Amplitude<T>; 4]> {
    if let Some(m) = state.modes().find(|m| m.as_str() != MODE_U && m.as_str() != MODE_D) {
        return Err(Error::OutsideCanonicalSpace(m.to_string()));
    }
    let zero = SpinVector::zero();
    let u = state.branch(MODE_U).unwrap_or(&zero);
    let d = state.branch(MODE_D).unwrap_or(&zero);
    Ok([u.plus_z, u.minus_z, d.plus_z, d.minus_z])
}

/// Normalized state from canonical coordinates.
pub fn from_canonical<T: Real>(v: &[Amplitude<T>]) -> Result<PathSpinState<T>> {
    assert_eq!(v.len(), 4, "canonical vectors have four entries");
    PathSpinState::new([
        (MODE_U, SpinVector::new(v[0], v[1])),
        (MODE_D, SpinVector::new(v[2], v[3])),
    ])
}

/// `M|state⟩`. Every observable here is unitary, so the result stays normalized.
pub fn apply<T: Real>(obs: impl Into<Observable>, state: &PathSpinState<T>) -> Result<PathSpinState<T>> {
    let v = to_canonical(state)?;
    let w = matrix_of::<T>(obs).apply(&v);
    let mut map = BTreeMap::new();
    map.insert(ModeLabel::from(MODE_U), SpinVector::new(w[0], w[1]));
    map.insert(ModeLabel::from(MODE_D), SpinVector::new(w[2], w[3]));
    Ok(PathSpinState::from_normalized(map))
}

/// `⟨state|M|state⟩`.
///
/// Imaginary parts up to [`Real::ALGEBRA_TOL`] are rounding and get dropped;
/// anything larger is reported as an error.
pub fn expectation<T: Real>(obs: impl Into<Observable>, state: &PathSpinState<T>) -> Result<T> {
    let v = to_canonical(state)?;
    let mv = matrix_of::<T>(obs).apply(&v);
    let e = vdot(&v, &mv);
    if e.im.abs() > T::ALGEBRA_TOL {
        return Err(Error::ComplexExpectation(e.im.to_f64_lossy()));
    }
    Ok(e.re)
}

/// Product-basis ket: path eigenstate of `Z1` (axis z: `u`/`d`) or `X1`
/// (axis x: `u′`/`d′`) times a spin eigenstate.
pub fn product_ket<T: Real>(path: (Axis, Sign), spin: (Axis, Sign)) -> PathSpinState<T> {
    let s = SpinVector::eigen(spin.0, spin.1 == Sign::Plus);
    let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    let (cu, cd) = match path {
        (Axis::Z, Sign::Plus) => (Complex::one(), Complex::zero()),
        (Axis::Z, Sign::Minus) => (Complex::zero(), Complex::one()),
        (Axis::X, Sign::Plus) => (h, h),
        (Axis::X, Sign::Minus) => (h, -h),
    };
    let mut branches = Vec::new();
    if !cu.is_zero() {
        branches.push((MODE_U, s.scale(cu)));
    }
    if !cd.is_zero() {
        branches.push((MODE_D, s.scale(cd)));
    }
    PathSpinState::new(branches).expect("product kets are nonzero")
}

fn check_eigen<T: Real>(obs: impl Into<Observable>, state: &PathSpinState<T>, sign: Sign) {
    let obs = obs.into();
    let image = apply(obs, state).expect("canonical state");
    let target = state.scale(Complex::new(T::lit(sign.value() as f64), T::zero()));
    assert!(
        image.max_component_diff(&target) <= T::ALGEBRA_TOL,
        "{obs} eigenrelation failed"
    );
}

/// `(|u,z+⟩ + |d,z−⟩)/√2`, the joint +1 eigenstate of `Z1Z2` and `X1X2`.
pub fn psi1<T: Real>() -> PathSpinState<T> {
    let h = T::FRAC_1_SQRT_2();
    let psi = PathSpinState::new([
        (MODE_U, SpinVector::real(h, T::zero())),
        (MODE_D, SpinVector::real(T::zero(), h)),
    ])
    .expect("psi1 is nonzero");
    check_eigen(ProductObservable::Z1Z2, &psi, Sign::Plus);
    check_eigen(ProductObservable::X1X2, &psi, Sign::Plus);
    psi
}

/// `(χ(1,−1), χ(−1,1))`: joint eigenstates of `Z1X2` and `X1Z2` with
/// eigenvalue pairs `(+1,−1)` and `(−1,+1)`. Built from their z⊗z expansions.
pub fn chi_states<T: Real>() -> (PathSpinState<T>, PathSpinState<T>) {
    let q = T::lit(0.5);
    let plus_minus =
        PathSpinState::new([(MODE_U, SpinVector::real(q, q)), (MODE_D, SpinVector::real(-q, q))]).expect("nonzero");
    let minus_plus =
        PathSpinState::new([(MODE_U, SpinVector::real(q, -q)), (MODE_D, SpinVector::real(q, q))]).expect("nonzero");
    check_eigen(ProductObservable::Z1X2, &plus_minus, Sign::Plus);
    check_eigen(ProductObservable::X1Z2, &plus_minus, Sign::Minus);
    check_eigen(ProductObservable::Z1X2, &minus_plus, Sign::Minus);
    check_eigen(ProductObservable::X1Z2, &minus_plus, Sign::Plus);
    (plus_minus, minus_plus)
}

/// Expansion coefficients and the weight left outside the basis span.
#[derive(Clone, Debug)]
pub struct Decomposition<T: Real = f64> {
    pub coefficients: Vec<Amplitude<T>>,
    /// Squared norm of the component of the state orthogonal to the span.
    pub residual: T,
}

/// Expands `state` over an orthonormal `basis`: `cᵢ = ⟨bᵢ|state⟩`.
pub fn decompose<T: Real>(state: &PathSpinState<T>, basis: &[PathSpinState<T>]) -> Result<Decomposition<T>> {
    for (i, bi) in basis.iter().enumerate() {
        for (j, bj) in basis.iter().enumerate().skip(i) {
            let expect = if i == j { Complex::one() } else { Complex::zero() };
            let defect = (inner_product(bi, bj) - expect).norm();
            if defect > T::PROPAGATION_TOL {
                return Err(Error::NonOrthonormalBasis {
                    i,
                    j,
                    defect: defect.to_f64_lossy(),
                });
            }
        }
    }
    let coefficients: Vec<Amplitude<T>> = basis.iter().map(|b| inner_product(b, state)).collect();

    let mut rest: BTreeMap<ModeLabel, SpinVector<T>> = state.branches().clone();
    for (c, b) in coefficients.iter().zip(basis) {
        for (mode, spin) in b.branches() {
            let e = rest.entry(mode.clone()).or_insert_with(SpinVector::zero);
            *e = e.plus(&spin.scale(-*c));
        }
    }
    let residual = rest.values().fold(T::zero(), |acc, s| acc + s.norm_sqr());
    Ok(Decomposition { coefficients, residual })
}
