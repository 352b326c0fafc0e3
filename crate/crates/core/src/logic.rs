//! Literals, terms, clauses and instances.
//!
//! Terms and clauses are both stored as sorted, duplicate-free literal
//! vectors; the type only decides whether the set is read conjunctively or
//! disjunctively.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A signed feature index. Ordered by variable, then negative before positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn new(var: usize, positive: bool) -> Self {
        Literal { var, positive }
    }

    pub fn pos(var: usize) -> Self {
        Literal::new(var, true)
    }

    pub fn neg(var: usize) -> Self {
        Literal::new(var, false)
    }

    pub fn negated(self) -> Self {
        Literal::new(self.var, !self.positive)
    }

    /// Does the assignment `value` for this literal's variable satisfy it?
    pub fn satisfied_by(self, value: bool) -> bool {
        self.positive == value
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var)
        } else {
            write!(f, "-x{}", self.var)
        }
    }
}

impl FromStr for Literal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (positive, rest) = match s.strip_prefix('-') {
            Some(rest) => (false, rest),
            None => (true, s),
        };
        rest.strip_prefix('x')
            .and_then(|v| v.parse::<usize>().ok())
            .map(|var| Literal::new(var, positive))
            .ok_or_else(|| Error::InvalidInstance(format!("bad literal {s:?}")))
    }
}

impl Serialize for Literal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Literal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn normalize(literals: impl IntoIterator<Item = Literal>) -> Result<Vec<Literal>> {
    let mut lits: Vec<Literal> = literals.into_iter().collect();
    lits.sort_unstable();
    lits.dedup();
    for pair in lits.windows(2) {
        if pair[0].var == pair[1].var {
            return Err(Error::InconsistentLiterals { var: pair[0].var });
        }
    }
    Ok(lits)
}

macro_rules! literal_set {
    ($(#[$meta:meta])* $name:ident, $sep:literal, $empty:literal) => {
        $(#[$meta])*
        #[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
        #[serde(transparent)]
        pub struct $name {
            lits: Vec<Literal>,
        }

        impl $name {
            /// Builds the set, rejecting a variable that occurs with both signs.
            pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self> {
                Ok($name { lits: normalize(literals)? })
            }

            pub fn empty() -> Self {
                $name { lits: Vec::new() }
            }

            pub fn literals(&self) -> &[Literal] {
                &self.lits
            }

            pub fn iter(&self) -> impl Iterator<Item = Literal> + '_ {
                self.lits.iter().copied()
            }

            pub fn len(&self) -> usize {
                self.lits.len()
            }

            pub fn is_empty(&self) -> bool {
                self.lits.is_empty()
            }

            pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
                self.lits.iter().map(|l| l.var)
            }

            pub fn contains(&self, lit: Literal) -> bool {
                self.lits.binary_search(&lit).is_ok()
            }

            /// The literal over `var`, if any.
            pub fn literal_of(&self, var: usize) -> Option<Literal> {
                self.lits
                    .binary_search_by_key(&var, |l| l.var)
                    .ok()
                    .map(|i| self.lits[i])
            }

            pub fn contains_var(&self, var: usize) -> bool {
                self.literal_of(var).is_some()
            }

            pub fn is_subset(&self, other: &Self) -> bool {
                self.lits.iter().all(|l| other.contains(*l))
            }

            /// Copy of the set with the literal over `var` dropped.
            pub fn without_var(&self, var: usize) -> Self {
                $name {
                    lits: self.lits.iter().copied().filter(|l| l.var != var).collect(),
                }
            }

            pub fn max_var(&self) -> Option<usize> {
                self.lits.iter().map(|l| l.var).max()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                if self.lits.is_empty() {
                    return f.write_str($empty);
                }
                for (i, l) in self.lits.iter().enumerate() {
                    if i > 0 {
                        f.write_str($sep)?;
                    }
                    write!(f, "{l}")?;
                }
                Ok(())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(
                deserializer: D,
            ) -> std::result::Result<Self, D::Error> {
                let lits = Vec::<Literal>::deserialize(deserializer)?;
                $name::new(lits).map_err(serde::de::Error::custom)
            }
        }
    };
}

literal_set!(
    /// Conjunction of literals.
    Term,
    " & ",
    "true"
);
literal_set!(
    /// Disjunction of literals.
    Clause,
    " | ",
    "false"
);

impl Term {
    /// The clause made of the negations of this term's literals.
    pub fn negation(&self) -> Clause {
        let mut lits: Vec<Literal> = self.lits.iter().map(|l| l.negated()).collect();
        lits.sort_unstable();
        Clause { lits }
    }

    /// Does the instance satisfy every literal?
    pub fn covers(&self, x: &Instance) -> bool {
        self.lits
            .iter()
            .all(|l| l.var < x.len() && l.satisfied_by(x.value(l.var)))
    }
}

impl Clause {
    pub fn satisfied_by(&self, x: &Instance) -> bool {
        self.lits
            .iter()
            .any(|l| l.var < x.len() && l.satisfied_by(x.value(l.var)))
    }
}

/// A complete Boolean assignment to the features.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    values: Vec<bool>,
}

impl Instance {
    pub fn new(values: Vec<bool>) -> Self {
        Instance { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, var: usize) -> bool {
        self.values[var]
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// The literal of `var` agreed by this instance.
    pub fn literal(&self, var: usize) -> Literal {
        Literal::new(var, self.values[var])
    }

    /// `t_x`: the full term describing the instance.
    pub fn term(&self) -> Term {
        Term {
            lits: (0..self.values.len()).map(|v| self.literal(v)).collect(),
        }
    }

    /// The first `len` bits of `bits`, lowest bit first.
    pub fn from_mask(bits: u64, len: usize) -> Self {
        Instance::new((0..len).map(|i| bits >> i & 1 == 1).collect())
    }
}

impl FromStr for Instance {
    type Err = Error;

    /// Parses a bit string such as `1011`; commas and spaces are ignored.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidInstance(format!(
                    "unexpected character {other:?} in {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Instance::new)
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &v in &self.values {
            f.write_str(if v { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_rejects_both_polarities() {
        let err = Term::new([Literal::pos(2), Literal::neg(2)]).unwrap_err();
        assert!(matches!(err, Error::InconsistentLiterals { var: 2 }));
    }

    #[test]
    fn term_dedups_and_sorts() {
        let t = Term::new([Literal::pos(3), Literal::neg(0), Literal::pos(3)]).unwrap();
        assert_eq!(t.literals(), &[Literal::neg(0), Literal::pos(3)]);
        assert_eq!(t.to_string(), "-x0 & x3");
    }

    #[test]
    fn instance_term_and_parse() {
        let x: Instance = "1 0 1".parse().unwrap();
        assert_eq!(x.to_string(), "101");
        assert_eq!(x.term().to_string(), "x0 & -x1 & x2");
        assert!("10a".parse::<Instance>().is_err());
    }

    #[test]
    fn literal_round_trips_through_json() {
        let t = Term::new([Literal::pos(1), Literal::neg(4)]).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"["x1","-x4"]"#);
        let back: Term = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<Term>(r#"["x1","-x1"]"#).is_err());
    }

    #[test]
    fn negation_flips_every_literal() {
        let t = Term::new([Literal::pos(0), Literal::neg(1)]).unwrap();
        assert_eq!(t.negation().to_string(), "-x0 | x1");
    }
}
