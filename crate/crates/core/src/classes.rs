//! Numerical classes `(β, d)`, the positive cone and the three weak stability conditions.

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer vector in the rank-k lattice housing sheaf classes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChernClass(pub Vec<i64>);

impl ChernClass {
    pub fn zero(rank: usize) -> Self {
        ChernClass(vec![0; rank])
    }

    /// The `i`-th basis vector.
    pub fn unit(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        ChernClass(v)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Nonzero with every coordinate nonnegative.
    pub fn is_effective(&self) -> bool {
        !self.is_zero() && self.0.iter().all(|&c| c >= 0)
    }

    /// Coordinate-wise `self <= other`.
    pub fn le(&self, other: &ChernClass) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &ChernClass) -> ChernClass {
        assert_eq!(self.rank(), other.rank(), "lattice rank mismatch");
        ChernClass(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Parses `(1,0)` or `[1,0]`.
    pub fn parse(s: &str) -> Result<ChernClass> {
        let inner = strip_group(s)?;
        if inner.contains(';') {
            return Err(Error::Parse(format!("unexpected ';' in sheaf class {s:?}")));
        }
        Ok(ChernClass(parse_ints(inner)?))
    }
}

impl Add for &ChernClass {
    type Output = ChernClass;

    fn add(self, rhs: &ChernClass) -> ChernClass {
        assert_eq!(self.rank(), rhs.rank(), "lattice rank mismatch");
        ChernClass(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for ChernClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// A class `(β, d)` of an object `(F, V, φ)`: `β` is the sheaf class, `d = dim V`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NumClass {
    pub beta: ChernClass,
    pub d: u32,
}

impl NumClass {
    pub fn new(beta: ChernClass, d: u32) -> Self {
        NumClass { beta, d }
    }

    /// `(β, 0)`
    pub fn sheaf(beta: ChernClass) -> Self {
        NumClass { beta, d: 0 }
    }

    /// `(0, d)`
    pub fn vector(rank: usize, d: u32) -> Self {
        NumClass { beta: ChernClass::zero(rank), d }
    }

    pub fn rank(&self) -> usize {
        self.beta.rank()
    }

    pub fn in_positive_cone(&self) -> bool {
        (self.beta.is_effective()) || (self.beta.is_zero() && self.d > 0)
    }

    /// Parses `(c1,...,ck;d)`; without `;` the last entry is `d`.
    pub fn parse(s: &str) -> Result<NumClass> {
        let inner = strip_group(s)?;
        let (beta, d) = match inner.split_once(';') {
            Some((b, d)) => (parse_ints(b)?, d.trim()),
            None => {
                let mut all: Vec<&str> = inner.split(',').collect();
                let d = all
                    .pop()
                    .ok_or_else(|| Error::Parse(format!("empty class {s:?}")))?;
                (parse_ints(&all.join(","))?, d.trim())
            }
        };
        let d = d
            .parse::<u32>()
            .map_err(|_| Error::Parse(format!("bad d in class {s:?}")))?;
        if beta.is_empty() {
            return Err(Error::Parse(format!("class {s:?} has no sheaf coordinates")));
        }
        Ok(NumClass::new(ChernClass(beta), d))
    }
}

impl Add for &NumClass {
    type Output = NumClass;

    fn add(self, rhs: &NumClass) -> NumClass {
        NumClass { beta: &self.beta + &rhs.beta, d: self.d + rhs.d }
    }
}

impl fmt::Display for NumClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.beta, self.d)
    }
}

/// Componentwise sum of a nonempty run of classes.
pub fn total(classes: &[NumClass]) -> NumClass {
    let mut it = classes.iter();
    let first = it.next().expect("total of an empty run").clone();
    it.fold(first, |acc, c| &acc + c)
}

/// The weak stability conditions on the triples category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StabCondition {
    /// `0` on `d = 0`, `-1` on `d > 0`.
    TauBullet,
    /// `0` on `d = 0`, `1` on `d > 0`.
    TauTilde,
    /// Identically `0`.
    TauN,
}

impl StabCondition {
    pub const ALL: [StabCondition; 3] =
        [StabCondition::TauBullet, StabCondition::TauTilde, StabCondition::TauN];

    /// Value on a class, without cone validation.
    pub fn eval(self, c: &NumClass) -> i8 {
        match (self, c.d) {
            (StabCondition::TauN, _) | (_, 0) => 0,
            (StabCondition::TauBullet, _) => -1,
            (StabCondition::TauTilde, _) => 1,
        }
    }
}

/// Run-level lattice configuration. Every class handed to the engine must have this rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub rank: usize,
}

impl Lattice {
    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::ZeroRank);
        }
        Ok(Lattice { rank })
    }

    pub fn check_chern(&self, c: &ChernClass) -> Result<()> {
        if c.rank() != self.rank {
            return Err(Error::RankMismatch { expected: self.rank, found: c.rank() });
        }
        Ok(())
    }

    pub fn check(&self, c: &NumClass) -> Result<()> {
        self.check_chern(&c.beta)
    }

    /// Nonzero effective class of the configured rank.
    pub fn check_effective(&self, c: &ChernClass) -> Result<()> {
        self.check_chern(c)?;
        if !c.is_effective() {
            return Err(Error::NotEffective(c.to_string()));
        }
        Ok(())
    }

    pub fn in_positive_cone(&self, c: &NumClass) -> Result<bool> {
        self.check(c)?;
        Ok(c.in_positive_cone())
    }

    /// Validates rank and cone membership of every entry.
    pub fn check_sequence(&self, seq: &[NumClass]) -> Result<()> {
        if seq.is_empty() {
            return Err(Error::EmptySequence);
        }
        for c in seq {
            if !self.in_positive_cone(c)? {
                return Err(Error::OutsideCone(c.to_string()));
            }
        }
        Ok(())
    }

    pub fn zero(&self) -> ChernClass {
        ChernClass::zero(self.rank)
    }
}

/// Checked version of [`StabCondition::eval`].
pub fn stability_value(cond: StabCondition, c: &NumClass) -> Result<i8> {
    if !c.in_positive_cone() {
        return Err(Error::OutsideCone(c.to_string()));
    }
    Ok(cond.eval(c))
}

fn strip_group(s: &str) -> Result<&str> {
    let t = s.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .or_else(|| t.strip_prefix('[').and_then(|r| r.strip_suffix(']')));
    inner.ok_or_else(|| Error::Parse(format!("expected a parenthesised class, got {s:?}")))
}

fn parse_ints(s: &str) -> Result<Vec<i64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad integer {t:?}")))
        })
        .collect()
}

/// Splits `[(a),(b),...]` or `(a),(b)` into the parenthesised groups.
pub(crate) fn split_groups(s: &str) -> Result<Vec<&str>> {
    let t = s.trim();
    let t = match t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        Some(inner) if inner.trim_start().starts_with('(') => inner,
        _ => t,
    };
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = None;
    for (i, ch) in t.char_indices() {
        match ch {
            '(' => {
                if depth == 0 {
                    start = Some(i);
                }
                depth += 1;
            }
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| Error::Parse(format!("unbalanced ')' in {s:?}")))?;
                if depth == 0 {
                    out.push(&t[start.take().unwrap_or(0)..=i]);
                }
            }
            ',' | ' ' | '\t' if depth == 0 => {}
            _ if depth == 0 => {
                return Err(Error::Parse(format!("unexpected {ch:?} in {s:?}")));
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced '(' in {s:?}")));
    }
    Ok(out)
}

pub fn parse_num_sequence(s: &str) -> Result<Vec<NumClass>> {
    split_groups(s)?.into_iter().map(NumClass::parse).collect()
}

pub fn parse_chern_list(s: &str) -> Result<Vec<ChernClass>> {
    split_groups(s)?.into_iter().map(ChernClass::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nc(beta: &[i64], d: u32) -> NumClass {
        NumClass::new(ChernClass(beta.to_vec()), d)
    }

    #[test]
    fn positive_cone_membership() {
        let lat = Lattice::new(2).unwrap();
        assert!(lat.in_positive_cone(&nc(&[1, 0], 0)).unwrap());
        assert!(!lat.in_positive_cone(&nc(&[0, 0], 0)).unwrap());
        assert!(lat.in_positive_cone(&nc(&[0, 0], 2)).unwrap());
        assert!(!lat.in_positive_cone(&nc(&[1, -1], 3)).unwrap());
        assert_eq!(
            lat.in_positive_cone(&nc(&[1], 0)),
            Err(Error::RankMismatch { expected: 2, found: 1 })
        );
        assert_eq!(Lattice::new(0), Err(Error::ZeroRank));
    }

    #[test]
    fn stability_values() {
        let b = nc(&[1, 0], 2);
        assert_eq!(stability_value(StabCondition::TauBullet, &b).unwrap(), -1);
        assert_eq!(stability_value(StabCondition::TauTilde, &nc(&[0, 0], 2)).unwrap(), 1);
        assert_eq!(stability_value(StabCondition::TauN, &nc(&[1, 0], 5)).unwrap(), 0);
        assert_eq!(stability_value(StabCondition::TauBullet, &nc(&[3, 1], 0)).unwrap(), 0);
        assert!(stability_value(StabCondition::TauTilde, &nc(&[0, 0], 0)).is_err());
    }

    fn small_cone() -> Vec<NumClass> {
        let mut out = Vec::new();
        for a in 0..=2 {
            for b in 0..=2 {
                for d in 0..=3 {
                    let c = nc(&[a, b], d);
                    if c.in_positive_cone() {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn bullet_and_tilde_are_opposite() {
        for c in small_cone() {
            let b = StabCondition::TauBullet.eval(&c);
            let t = StabCondition::TauTilde.eval(&c);
            if c.d > 0 {
                assert_eq!(b, -t);
                assert_ne!(b, 0);
            } else {
                assert_eq!((b, t), (0, 0));
            }
        }
    }

    #[test]
    fn weak_seesaw_by_exhaustion() {
        let cone = small_cone();
        for cond in StabCondition::ALL {
            for x in &cone {
                for y in &cone {
                    let s = x + y;
                    let (a, m, c) = (cond.eval(x), cond.eval(&s), cond.eval(y));
                    assert!(
                        (a <= m && m <= c) || (a >= m && m >= c),
                        "{cond:?} fails seesaw on {x} + {y}"
                    );
                }
            }
        }
    }

    #[test]
    fn parsing() {
        assert_eq!(NumClass::parse("(0,2)").unwrap(), nc(&[0], 2));
        assert_eq!(NumClass::parse("(1;0)").unwrap(), nc(&[1], 0));
        assert_eq!(NumClass::parse("(1, 2; 3)").unwrap(), nc(&[1, 2], 3));
        assert!(NumClass::parse("(;2)").is_err());
        assert!(NumClass::parse("1,2").is_err());
        let seq = parse_num_sequence("[(0,2),(1;0)]").unwrap();
        assert_eq!(seq, vec![nc(&[0], 2), nc(&[1], 0)]);
        let parts = parse_chern_list("(1,0),(0,1)").unwrap();
        assert_eq!(parts, vec![ChernClass(vec![1, 0]), ChernClass(vec![0, 1])]);
        assert!(parse_num_sequence("(1,0").is_err());
    }

    #[test]
    fn display_and_json() {
        let c = nc(&[1, 0], 2);
        assert_eq!(c.to_string(), "([1,0],2)");
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"beta":[1,0],"d":2}"#);
    }
}
