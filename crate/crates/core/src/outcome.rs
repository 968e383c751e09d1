//! Measurement signs and the observable/sign labels attached to output ports.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An eigenvalue of a ±1-valued observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    /// `"+"` or `"-"`, used in mode names.
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i32(self.value())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Sign::from_value(v).ok_or_else(|| serde::de::Error::custom(format!("sign must be +1 or -1, got {v}")))
    }
}

/// Display order for observable names; unknown names sort after these.
const NAME_ORDER: [&str; 8] = ["Z1", "X1", "Z2", "X2", "Z1Z2", "X1X2", "Z1X2", "X1Z2"];

fn name_rank(name: &str) -> (usize, &str) {
    let rank = NAME_ORDER.iter().position(|n| *n == name).unwrap_or(NAME_ORDER.len());
    (rank, name)
}

/// Set of (observable name, sign) pairs identifying one measurement outcome.
///
/// Entries are kept in a fixed order (base observables, then products, then
/// anything else alphabetically) so rendering does not depend on how the
/// label was built.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OutcomeLabel {
    entries: Vec<(String, Sign)>,
}

impl OutcomeLabel {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, Sign)>,
        S: Into<String>,
    {
        let mut entries: Vec<(String, Sign)> = entries.into_iter().map(|(n, s)| (n.into(), s)).collect();
        entries.sort_by(|a, b| name_rank(&a.0).cmp(&name_rank(&b.0)));
        entries.dedup_by(|a, b| a.0 == b.0);
        OutcomeLabel { entries }
    }

    pub fn entries(&self) -> &[(String, Sign)] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<Sign> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Product of every sign in the label.
    pub fn parity(&self) -> Sign {
        self.entries.iter().fold(Sign::Plus, |acc, (_, s)| acc * *s)
    }

    /// Parses the rendered form, e.g. `Z1X2=+1;X1Z2=-1`.
    pub fn parse(text: &str) -> Option<Self> {
        let mut entries = Vec::new();
        for part in text.split(';').filter(|p| !p.is_empty()) {
            let (name, value) = part.split_once('=')?;
            let sign = Sign::from_value(value.trim_start_matches('+').parse().ok()?)?;
            entries.push((name.to_string(), sign));
        }
        Some(OutcomeLabel::new(entries))
    }
}

impl PartialOrd for OutcomeLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OutcomeLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let key = |l: &OutcomeLabel| {
            l.entries
                .iter()
                .map(|(n, s)| (name_rank(n).0, n.clone(), *s))
                .collect::<Vec<_>>()
        };
        key(self).cmp(&key(other))
    }
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, sign)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{name}={sign}")?;
        }
        Ok(())
    }
}

impl Serialize for OutcomeLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<&str, Sign> = self.entries.iter().map(|(n, s)| (n.as_str(), *s)).collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OutcomeLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, Sign>::deserialize(d)?;
        Ok(OutcomeLabel::new(map))
    }
}
