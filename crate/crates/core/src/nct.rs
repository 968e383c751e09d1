//! Exhaustive non-contextual value assignments.
//!
//! Every assignment fixes `v(Z1), v(X1), v(Z2), v(X2) ∈ {±1}` independently
//! of context, and products take `v(AB) = v(A)·v(B)`. All arithmetic here is
//! on exact signs; the only floating point input is the zero/nonzero support
//! of a quantum distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::OutcomeDistribution;
use crate::observables::{BaseObservable, PathObservable, ProductObservable, SpinObservable};
use crate::outcome::{OutcomeLabel, Sign};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    #[serde(rename = "Z1")]
    pub z1: Sign,
    #[serde(rename = "X1")]
    pub x1: Sign,
    #[serde(rename = "Z2")]
    pub z2: Sign,
    #[serde(rename = "X2")]
    pub x2: Sign,
}

impl Assignment {
    pub fn new(z1: Sign, x1: Sign, z2: Sign, x2: Sign) -> Self {
        Assignment { z1, x1, z2, x2 }
    }

    pub fn value(&self, obs: BaseObservable) -> Sign {
        match obs {
            BaseObservable::Path(PathObservable::Z1) => self.z1,
            BaseObservable::Path(PathObservable::X1) => self.x1,
            BaseObservable::Spin(SpinObservable::Z2) => self.z2,
            BaseObservable::Spin(SpinObservable::X2) => self.x2,
        }
    }
}

/// All 16 assignments, `Z1` most significant, `+1` before `−1`.
pub fn enumerate_assignments() -> Vec<Assignment> {
    let mut out = Vec::with_capacity(16);
    for z1 in Sign::BOTH {
        for x1 in Sign::BOTH {
            for z2 in Sign::BOTH {
                for x2 in Sign::BOTH {
                    out.push(Assignment::new(z1, x1, z2, x2));
                }
            }
        }
    }
    out
}

/// `v(path)·v(spin)`.
pub fn product_value(a: &Assignment, p: ProductObservable) -> Sign {
    a.value(BaseObservable::Path(p.path_factor)) * a.value(BaseObservable::Spin(p.spin_factor))
}

/// Product of the four product-observable values. Each base value occurs
/// twice, so this is `+1` for every assignment.
pub fn four_product_parity(a: &Assignment) -> Sign {
    ProductObservable::ALL
        .iter()
        .fold(Sign::Plus, |acc, p| acc * product_value(a, *p))
}

fn in_ensemble(a: &Assignment) -> bool {
    a.z1 == a.z2 && a.x1 == a.x2
}

/// Keeps assignments with `v(Z1) = v(Z2)` and `v(X1) = v(X2)`, i.e. those
/// that always report `Z1Z2 = X1X2 = +1`.
pub fn filter_ensemble(assignments: &[Assignment]) -> Vec<Assignment> {
    assignments.iter().copied().filter(in_ensemble).collect()
}

/// Whether the assignment predicts equal values for `Z1X2` and `X1Z2`.
/// Only defined on ensemble members.
pub fn nct_prediction(a: &Assignment) -> Result<bool> {
    if !in_ensemble(a) {
        return Err(Error::Precondition(format!(
            "assignment {a:?} is outside the Z1Z2 = X1X2 = +1 ensemble"
        )));
    }
    Ok(product_value(a, ProductObservable::Z1X2) == product_value(a, ProductObservable::X1Z2))
}

/// One row of the printed enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub assignment: Assignment,
    #[serde(rename = "Z1Z2")]
    pub z1z2: Sign,
    #[serde(rename = "X1X2")]
    pub x1x2: Sign,
    #[serde(rename = "Z1X2")]
    pub z1x2: Sign,
    #[serde(rename = "X1Z2")]
    pub x1z2: Sign,
    pub in_ensemble: bool,
    pub parity: Sign,
}

pub fn enumeration_table() -> Vec<TableRow> {
    enumerate_assignments()
        .into_iter()
        .map(|a| TableRow {
            assignment: a,
            z1z2: product_value(&a, ProductObservable::Z1Z2),
            x1x2: product_value(&a, ProductObservable::X1X2),
            z1x2: product_value(&a, ProductObservable::Z1X2),
            x1z2: product_value(&a, ProductObservable::X1Z2),
            in_ensemble: in_ensemble(&a),
            parity: four_product_parity(&a),
        })
        .collect()
}

/// Machine-checked contradiction between the non-contextual assignments and
/// the support of the quantum joint-measurement distribution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub total_assignments: usize,
    pub surviving: Vec<Assignment>,
    pub nct_prediction_holds: Vec<bool>,
    /// Outcomes of the `Z1X2`/`X1Z2` measurement that quantum mechanics allows.
    pub qm_support: Vec<OutcomeLabel>,
    pub qm_consistent_count: usize,
    pub parity_nct: Sign,
    pub parity_qm: Sign,
}

fn product_outcome(a: &Assignment) -> OutcomeLabel {
    OutcomeLabel::new([
        ("Z1X2", product_value(a, ProductObservable::Z1X2)),
        ("X1Z2", product_value(a, ProductObservable::X1Z2)),
    ])
}

fn certify(qm_support: Vec<OutcomeLabel>) -> Result<Certificate> {
    if qm_support.is_empty() {
        return Err(Error::MalformedDistribution("empty support".into()));
    }
    let mut parity_qm = None;
    for l in &qm_support {
        let (Some(a), Some(b)) = (l.get("Z1X2"), l.get("X1Z2")) else {
            return Err(Error::MalformedDistribution(format!(
                "outcome {l} lacks a Z1X2 or X1Z2 sign"
            )));
        };
        // Z1Z2 and X1X2 are +1 on the prepared ensemble.
        let p = a * b * Sign::Plus * Sign::Plus;
        match parity_qm {
            None => parity_qm = Some(p),
            Some(q) if q != p => {
                return Err(Error::MalformedDistribution(
                    "allowed outcomes disagree on the Z1X2·X1Z2 parity".into(),
                ))
            }
            Some(_) => {}
        }
    }

    let all = enumerate_assignments();
    let surviving = filter_ensemble(&all);
    let nct_prediction_holds = surviving
        .iter()
        .map(|a| nct_prediction(a).expect("survivors are in the ensemble"))
        .collect();
    let qm_consistent_count = all
        .iter()
        .filter(|a| {
            product_value(a, ProductObservable::Z1Z2) == Sign::Plus
                && product_value(a, ProductObservable::X1X2) == Sign::Plus
                && qm_support.contains(&product_outcome(a))
        })
        .count();
    let parity_nct = if all.iter().all(|a| four_product_parity(a) == Sign::Plus) {
        Sign::Plus
    } else {
        Sign::Minus
    };

    Ok(Certificate {
        total_assignments: all.len(),
        surviving,
        nct_prediction_holds,
        qm_support,
        qm_consistent_count,
        parity_nct,
        parity_qm: parity_qm.expect("support is nonempty"),
    })
}

/// Builds the certificate from the zero/nonzero pattern of the step (ii)
/// distribution; probability values themselves are not used.
pub fn build_certificate<T: Real>(qm_dist: &OutcomeDistribution<T>) -> Result<Certificate> {
    let mut support: Vec<OutcomeLabel> = qm_dist.support().into_iter().cloned().collect();
    support.sort();
    certify(support)
}

impl Certificate {
    /// Recomputes every field from the enumeration and the stored support.
    pub fn verify(&self) -> bool {
        certify(self.qm_support.clone()).is_ok_and(|c| &c == self)
    }

    /// The contradiction holds: every ensemble member predicts equal
    /// product values, yet no assignment fits the quantum support.
    pub fn demonstrates_contradiction(&self) -> bool {
        self.total_assignments == 16
            && self.nct_prediction_holds.iter().all(|&b| b)
            && self.qm_consistent_count == 0
            && self.parity_nct != self.parity_qm
    }
}
