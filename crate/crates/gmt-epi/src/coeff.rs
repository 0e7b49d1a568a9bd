//! Normed abelian coefficient groups.
//!
//! Three groups are supported: the integers with |·|, the integers with the
//! discrete norm (every nonzero element has norm 1), and the Cantor group
//! (Z/2)^d with ‖a‖ = Σ 3^{-i}|a_i|, truncated at depth d.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GmtError, Result};

/// Largest supported Cantor depth; keeps 3^d exact in an `i64`.
pub const MAX_CANTOR_DEPTH: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum GroupSpec {
    Integers,
    Unit,
    Cantor { depth: u32 },
}

impl GroupSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GroupSpec::Cantor { depth } if depth == 0 || depth > MAX_CANTOR_DEPTH => {
                Err(GmtError::invalid(format!(
                    "cantor depth must be in 1..={MAX_CANTOR_DEPTH}, got {depth}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn zero(&self) -> Coeff {
        match *self {
            GroupSpec::Integers => Coeff::Integer(0),
            GroupSpec::Unit => Coeff::Unit(0),
            GroupSpec::Cantor { depth } => Coeff::Cantor { depth, bits: 0 },
        }
    }

    /// A canonical generator: 1 for the integer groups, (1,0,...,0) for Cantor.
    pub fn one(&self) -> Coeff {
        match *self {
            GroupSpec::Integers => Coeff::Integer(1),
            GroupSpec::Unit => Coeff::Unit(1),
            GroupSpec::Cantor { depth } => Coeff::Cantor { depth, bits: 1 },
        }
    }

    /// inf{‖g‖ : g ≠ 0}.
    pub fn gap(&self) -> f64 {
        match *self {
            GroupSpec::Integers | GroupSpec::Unit => 1.0,
            GroupSpec::Cantor { depth } => 3f64.powi(-(depth as i32)),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            GroupSpec::Integers => "integers".into(),
            GroupSpec::Unit => "unit".into(),
            GroupSpec::Cantor { depth } => format!("cantor({depth})"),
        }
    }

    /// Element from an integer payload (integer groups) or bit mask (Cantor).
    pub fn element(&self, payload: i64) -> Coeff {
        match *self {
            GroupSpec::Integers => Coeff::Integer(payload),
            GroupSpec::Unit => Coeff::Unit(payload),
            GroupSpec::Cantor { depth } => Coeff::Cantor {
                depth,
                bits: (payload as u64) & mask(depth),
            },
        }
    }
}

fn mask(depth: u32) -> u64 {
    if depth >= 64 {
        u64::MAX
    } else {
        (1u64 << depth) - 1
    }
}

/// Group element. Cantor bit `i` (from 0) carries weight 3^{-(i+1)}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coeff {
    Integer(i64),
    Unit(i64),
    Cantor { depth: u32, bits: u64 },
}

impl Coeff {
    pub fn spec(&self) -> GroupSpec {
        match *self {
            Coeff::Integer(_) => GroupSpec::Integers,
            Coeff::Unit(_) => GroupSpec::Unit,
            Coeff::Cantor { depth, .. } => GroupSpec::Cantor { depth },
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Coeff::Integer(v) | Coeff::Unit(v) => v == 0,
            Coeff::Cantor { bits, .. } => bits == 0,
        }
    }

    pub fn try_add(&self, other: &Coeff) -> Result<Coeff> {
        match (*self, *other) {
            (Coeff::Integer(a), Coeff::Integer(b)) => Ok(Coeff::Integer(a + b)),
            (Coeff::Unit(a), Coeff::Unit(b)) => Ok(Coeff::Unit(a + b)),
            (Coeff::Cantor { depth: d1, bits: a }, Coeff::Cantor { depth: d2, bits: b })
                if d1 == d2 =>
            {
                Ok(Coeff::Cantor {
                    depth: d1,
                    bits: a ^ b,
                })
            }
            _ => Err(GmtError::GroupMismatch(
                self.spec().name(),
                other.spec().name(),
            )),
        }
    }

    /// Addition for callers that already know both sides share a group.
    pub fn add(&self, other: &Coeff) -> Coeff {
        self.try_add(other).expect("coefficient group mismatch")
    }

    pub fn neg(&self) -> Coeff {
        match *self {
            Coeff::Integer(a) => Coeff::Integer(-a),
            Coeff::Unit(a) => Coeff::Unit(-a),
            c @ Coeff::Cantor { .. } => c,
        }
    }

    /// Integer multiple k·g.
    pub fn times(&self, k: i64) -> Coeff {
        match *self {
            Coeff::Integer(a) => Coeff::Integer(a * k),
            Coeff::Unit(a) => Coeff::Unit(a * k),
            Coeff::Cantor { depth, bits } => Coeff::Cantor {
                depth,
                bits: if k.rem_euclid(2) == 1 { bits } else { 0 },
            },
        }
    }

    /// Exact norm as numerator / denominator.
    pub fn norm_ratio(&self) -> (i64, i64) {
        match *self {
            Coeff::Integer(a) => (a.abs(), 1),
            Coeff::Unit(a) => ((a != 0) as i64, 1),
            Coeff::Cantor { depth, bits } => {
                let den = 3i64.pow(depth);
                let mut num = 0i64;
                for i in 0..depth {
                    if bits >> i & 1 == 1 {
                        num += 3i64.pow(depth - i - 1);
                    }
                }
                (num, den)
            }
        }
    }

    pub fn norm(&self) -> f64 {
        let (n, d) = self.norm_ratio();
        n as f64 / d as f64
    }

    /// Integer payload for serialization (bit mask for Cantor).
    pub fn payload(&self) -> i64 {
        match *self {
            Coeff::Integer(a) | Coeff::Unit(a) => a,
            Coeff::Cantor { bits, .. } => bits as i64,
        }
    }

    /// Cantor digits (a_1, ..., a_d); `None` for integer groups.
    pub fn cantor_digits(&self) -> Option<Vec<u8>> {
        match *self {
            Coeff::Cantor { depth, bits } => {
                Some((0..depth).map(|i| (bits >> i & 1) as u8).collect())
            }
            _ => None,
        }
    }

    pub fn from_cantor_digits(digits: &[u8]) -> Result<Coeff> {
        let depth = digits.len() as u32;
        GroupSpec::Cantor { depth }.validate()?;
        let mut bits = 0u64;
        for (i, &a) in digits.iter().enumerate() {
            if a > 1 {
                return Err(GmtError::invalid(format!(
                    "cantor digit {a} not in {{0,1}}"
                )));
            }
            bits |= (a as u64) << i;
        }
        Ok(Coeff::Cantor { depth, bits })
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Integer(a) => write!(f, "{a}"),
            Coeff::Unit(a) => write!(f, "{a}u"),
            Coeff::Cantor { .. } => {
                let d: Vec<String> = self
                    .cantor_digits()
                    .unwrap()
                    .iter()
                    .map(|x| x.to_string())
                    .collect();
                write!(f, "({})", d.join(","))
            }
        }
    }
}

pub fn group_add(a: &Coeff, b: &Coeff) -> Result<Coeff> {
    a.try_add(b)
}

pub fn group_norm(a: &Coeff) -> f64 {
    a.norm()
}

pub fn group_gap(spec: &GroupSpec) -> f64 {
    spec.gap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor(d: &[u8]) -> Coeff {
        Coeff::from_cantor_digits(d).unwrap()
    }

    #[test]
    fn integer_inverse() {
        assert!(Coeff::Integer(2).add(&Coeff::Integer(-2)).is_zero());
        assert_eq!(Coeff::Integer(-5).norm(), 5.0);
    }

    #[test]
    fn cantor_addition_is_mod_two() {
        assert_eq!(
            cantor(&[1, 0, 0]).add(&cantor(&[1, 1, 0])),
            cantor(&[0, 1, 0])
        );
    }

    #[test]
    fn unit_norm_is_constant() {
        let two = Coeff::Unit(1).add(&Coeff::Unit(1));
        assert_eq!(two, Coeff::Unit(2));
        assert_eq!(two.norm(), 1.0);
    }

    #[test]
    fn cantor_norms() {
        assert_eq!(cantor(&[1, 0, 0]).norm_ratio(), (9, 27));
        assert!((cantor(&[1, 0, 0]).norm() - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(cantor(&[1, 1, 1]).norm_ratio(), (13, 27));
    }

    #[test]
    fn gaps() {
        assert_eq!(GroupSpec::Integers.gap(), 1.0);
        assert_eq!(GroupSpec::Unit.gap(), 1.0);
        assert_eq!(GroupSpec::Cantor { depth: 4 }.gap(), 1.0 / 81.0);
        // brute force minimum over nonzero elements
        let d = 4;
        let min = (1..(1u64 << d))
            .map(|b| Coeff::Cantor { depth: d, bits: b }.norm())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min, GroupSpec::Cantor { depth: d }.gap());
    }

    #[test]
    fn mismatched_groups_error() {
        assert!(Coeff::Integer(1).try_add(&Coeff::Unit(1)).is_err());
        assert!(cantor(&[1]).try_add(&cantor(&[1, 0])).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let s = serde_json::to_string(&GroupSpec::Cantor { depth: 3 }).unwrap();
        assert_eq!(s, r#"{"tag":"cantor","depth":3}"#);
        let i: GroupSpec = serde_json::from_str(r#"{"tag":"integers"}"#).unwrap();
        assert_eq!(i, GroupSpec::Integers);
    }
}
