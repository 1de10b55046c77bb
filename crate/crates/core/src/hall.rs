//! Formal Hall algebra: the free associative algebra over `Q` on generators `ε̄^(β,d)(τ•)`,
//! with the commutator bracket and the two assemblies of `ε̄^(β,d)(τ̃)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::classes::{ChernClass, Lattice, NumClass};
use crate::coefficients::u_coefficient;
use crate::error::{Error, Result};
use crate::rational::{format, inv_factorial, sign, Rational};

/// An ordered product of generators.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct HallWord(pub Vec<NumClass>);

impl HallWord {
    /// Componentwise sum of the letters.
    pub fn grade(&self) -> NumClass {
        crate::classes::total(&self.0)
    }
}

impl fmt::Display for HallWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ∗ ")?;
            }
            write!(f, "ε^{c}")?;
        }
        Ok(())
    }
}

/// Finite `Q`-linear combination of words; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HallElement {
    terms: BTreeMap<HallWord, Rational>,
}

impl HallElement {
    pub fn zero() -> Self {
        HallElement::default()
    }

    pub fn generator(c: NumClass) -> Self {
        HallElement::monomial(HallWord(vec![c]), Rational::one())
    }

    pub fn monomial(word: HallWord, coeff: Rational) -> Self {
        let mut e = HallElement::zero();
        e.add_term(word, coeff);
        e
    }

    pub fn add_term(&mut self, word: HallWord, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(word.clone()).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&word);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &HallWord) -> Rational {
        self.terms.get(word).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&HallWord, &Rational)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: &Rational) -> HallElement {
        if c.is_zero() {
            return HallElement::zero();
        }
        HallElement {
            terms: self.terms.iter().map(|(w, x)| (w.clone(), x * c)).collect(),
        }
    }

    pub fn add(&self, other: &HallElement) -> HallElement {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &HallElement) -> HallElement {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Bilinear extension of concatenation.
    pub fn mul(&self, other: &HallElement) -> HallElement {
        let mut out = HallElement::zero();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                let mut letters = u.0.clone();
                letters.extend(v.0.iter().cloned());
                out.add_term(HallWord(letters), a * b);
            }
        }
        out
    }

    /// `x ∗ y - y ∗ x`
    pub fn bracket(&self, other: &HallElement) -> HallElement {
        self.mul(other).sub(&other.mul(self))
    }
}

pub fn hall_mul(x: &HallElement, y: &HallElement) -> HallElement {
    x.mul(y)
}

pub fn hall_bracket(x: &HallElement, y: &HallElement) -> HallElement {
    x.bracket(y)
}

impl fmt::Display for HallElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{} · {w}", format(c))?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct TermOut<'a> {
    word: &'a HallWord,
    coeff: String,
}

impl Serialize for HallElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.terms.iter().map(|(word, c)| TermOut { word, coeff: format(c) }))
    }
}

/// A bracket expression over generators, kept as a tree so that bracket-homomorphic maps
/// can be applied without flattening.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BracketTree {
    Gen(NumClass),
    Bracket(Box<BracketTree>, Box<BracketTree>),
}

impl BracketTree {
    /// `[[⋯[[head, rest_1], rest_2], ⋯], rest_l]`
    pub fn left_nested(head: NumClass, rest: &[NumClass]) -> BracketTree {
        rest.iter().fold(BracketTree::Gen(head), |acc, c| {
            BracketTree::Bracket(Box::new(acc), Box::new(BracketTree::Gen(c.clone())))
        })
    }

    pub fn expand(&self) -> HallElement {
        match self {
            BracketTree::Gen(c) => HallElement::generator(c.clone()),
            BracketTree::Bracket(x, y) => x.expand().bracket(&y.expand()),
        }
    }

    /// Visits every generator leaf, left to right.
    pub fn generators(&self) -> Vec<&NumClass> {
        match self {
            BracketTree::Gen(c) => vec![c],
            BracketTree::Bracket(x, y) => {
                let mut v = x.generators();
                v.extend(y.generators());
                v
            }
        }
    }
}

impl fmt::Display for BracketTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketTree::Gen(c) => write!(f, "ε^{c}"),
            BracketTree::Bracket(x, y) => write!(f, "[{x}, {y}]"),
        }
    }
}

/// Rational combination of bracket trees.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BracketSum(pub Vec<(Rational, BracketTree)>);

impl BracketSum {
    pub fn expand(&self) -> HallElement {
        self.0
            .iter()
            .fold(HallElement::zero(), |acc, (c, t)| acc.add(&t.expand().scale(c)))
    }
}

impl fmt::Display for BracketSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, t)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{} · {t}", format(c))?;
        }
        Ok(())
    }
}

fn check_assembly(lattice: &Lattice, d: u32, parts: &[ChernClass]) -> Result<()> {
    if d != 1 && d != 2 {
        return Err(Error::UnsupportedRank(d));
    }
    parts.iter().try_for_each(|p| lattice.check_effective(p))
}

/// Positions are 0-based offsets into the final word; `inserts` must be sorted.
fn insert_vectors(parts: &[ChernClass], inserts: &[(usize, u32)], rank: usize) -> Vec<NumClass> {
    let mut seq = Vec::with_capacity(parts.len() + inserts.len());
    let mut sheaves = parts.iter();
    let mut ins = inserts.iter().peekable();
    let n = parts.len() + inserts.len();
    for pos in 0..n {
        match ins.peek() {
            Some(&&(p, d)) if p == pos => {
                seq.push(NumClass::vector(rank, d));
                ins.next();
            }
            _ => seq.push(NumClass::sheaf(sheaves.next().cloned().expect("one sheaf class per free slot"))),
        }
    }
    seq
}

/// `Σ U(seq) · ε̄^{seq_1} ∗ ⋯ ∗ ε̄^{seq_n}` over every way of inserting the `d` sections into
/// the ordered sheaf classes `parts`: a single `(0,d)` letter, plus for `d = 2` every pair of
/// `(0,1)` letters. Words with vanishing `U` are dropped.
pub fn assemble_epsilon_flat(lattice: &Lattice, d: u32, parts: &[ChernClass]) -> Result<HallElement> {
    check_assembly(lattice, d, parts)?;
    let n = parts.len() + 1;
    let mut out = HallElement::zero();
    for k in 0..n {
        let seq = insert_vectors(parts, &[(k, d)], lattice.rank);
        let u = u_coefficient(&seq)?;
        out.add_term(HallWord(seq), u);
    }
    if d == 2 {
        let n = parts.len() + 2;
        for k in 0..n {
            for m in k + 1..n {
                let seq = insert_vectors(parts, &[(k, 1), (m, 1)], lattice.rank);
                let u = u_coefficient(&seq)?;
                out.add_term(HallWord(seq), u);
            }
        }
    }
    Ok(out)
}

/// `(-1)^l/l! · [[⋯[[ε̄^(0,d), ε̄^(β_1,0)], ε̄^(β_2,0)], ⋯], ε̄^(β_l,0)]` as a bracket tree.
pub fn nested_expression(lattice: &Lattice, d: u32, parts: &[ChernClass]) -> Result<BracketSum> {
    check_assembly(lattice, d, parts)?;
    let l = parts.len();
    let coeff = sign(l as i64) * inv_factorial(l);
    let rest: Vec<NumClass> = parts.iter().cloned().map(NumClass::sheaf).collect();
    let tree = BracketTree::left_nested(NumClass::vector(lattice.rank, d), &rest);
    Ok(BracketSum(vec![(coeff, tree)]))
}

pub fn assemble_epsilon_nested(lattice: &Lattice, d: u32, parts: &[ChernClass]) -> Result<HallElement> {
    Ok(nested_expression(lattice, d, parts)?.expand())
}

/// Distinct orderings of a multiset, in lexicographic order.
pub fn distinct_orderings(parts: &[ChernClass]) -> Vec<Vec<ChernClass>> {
    let mut cur: Vec<ChernClass> = parts.to_vec();
    cur.sort();
    let mut out = vec![cur.clone()];
    // Standard next-permutation step.
    while let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) {
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap_or(i);
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatNestedReport {
    pub d: u32,
    pub parts: Vec<ChernClass>,
    pub orderings: usize,
    pub flat: HallElement,
    pub nested: HallElement,
    pub difference: HallElement,
    pub identical: bool,
}

/// Sums both assemblies over the distinct orderings of `parts` and compares them.
pub fn compare_flat_nested(lattice: &Lattice, d: u32, parts: &[ChernClass]) -> Result<FlatNestedReport> {
    check_assembly(lattice, d, parts)?;
    let orderings = distinct_orderings(parts);
    let mut flat = HallElement::zero();
    let mut nested = HallElement::zero();
    for ord in &orderings {
        flat = flat.add(&assemble_epsilon_flat(lattice, d, ord)?);
        nested = nested.add(&assemble_epsilon_nested(lattice, d, ord)?);
    }
    let difference = flat.sub(&nested);
    let mut sorted = parts.to_vec();
    sorted.sort();
    Ok(FlatNestedReport {
        d,
        parts: sorted,
        orderings: orderings.len(),
        identical: difference.is_zero(),
        flat,
        nested,
        difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn lat() -> Lattice {
        Lattice::new(1).unwrap()
    }
    fn c(b: i64) -> ChernClass {
        ChernClass(vec![b])
    }
    fn sh(b: i64) -> NumClass {
        NumClass::sheaf(c(b))
    }
    fn v(d: u32) -> NumClass {
        NumClass::vector(1, d)
    }
    fn w(letters: &[NumClass]) -> HallWord {
        HallWord(letters.to_vec())
    }

    #[test]
    fn product_examples() {
        let a = HallElement::generator(sh(1));
        let b = HallElement::generator(sh(2));
        let cc = HallElement::generator(sh(3));
        assert_eq!(a.mul(&b), HallElement::monomial(w(&[sh(1), sh(2)]), int(1)));
        let lhs = a.scale(&int(2)).mul(&b.scale(&int(3)).add(&cc));
        let mut rhs = HallElement::monomial(w(&[sh(1), sh(2)]), int(6));
        rhs.add_term(w(&[sh(1), sh(3)]), int(2));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn bracket_examples() {
        let a = HallElement::generator(sh(1));
        let b = HallElement::generator(sh(2));
        assert!(a.bracket(&a).is_zero());
        let mut expect = HallElement::monomial(w(&[sh(1), sh(2)]), int(1));
        expect.add_term(w(&[sh(2), sh(1)]), int(-1));
        assert_eq!(a.bracket(&b), expect);
    }

    #[test]
    fn flat_examples() {
        let empty = assemble_epsilon_flat(&lat(), 2, &[]).unwrap();
        assert_eq!(empty, HallElement::monomial(w(&[v(2)]), int(1)));

        let one = assemble_epsilon_flat(&lat(), 2, &[c(1)]).unwrap();
        let mut expect = HallElement::monomial(w(&[v(2), sh(1)]), int(-1));
        expect.add_term(w(&[sh(1), v(2)]), int(1));
        assert_eq!(one, expect);

        let two = assemble_epsilon_flat(&lat(), 2, &[c(1), c(2)]).unwrap();
        assert!(two.terms().all(|(word, _)| word.0.iter().all(|x| x.d != 1)));
        assert_eq!(two.len(), 3);

        assert_eq!(assemble_epsilon_flat(&lat(), 3, &[]), Err(Error::UnsupportedRank(3)));
        assert!(assemble_epsilon_flat(&lat(), 1, &[c(0)]).is_err());
    }

    #[test]
    fn nested_examples() {
        let one = assemble_epsilon_nested(&lat(), 2, &[c(1)]).unwrap();
        let mut expect = HallElement::monomial(w(&[v(2), sh(1)]), int(-1));
        expect.add_term(w(&[sh(1), v(2)]), int(1));
        assert_eq!(one, expect);
        assert_eq!(
            assemble_epsilon_nested(&lat(), 2, &[]).unwrap(),
            HallElement::monomial(w(&[v(2)]), int(1))
        );
        let two = assemble_epsilon_nested(&lat(), 1, &[c(1), c(2)]).unwrap();
        assert_eq!(two.len(), 4);
        assert!(two.terms().all(|(_, x)| *x == ratio(1, 2) || *x == ratio(-1, 2)));
    }

    #[test]
    fn orderings_of_multisets() {
        assert_eq!(distinct_orderings(&[c(1), c(1)]).len(), 1);
        assert_eq!(distinct_orderings(&[c(2), c(1), c(1)]).len(), 3);
        assert_eq!(distinct_orderings(&[c(3), c(1), c(2)]).len(), 6);
        assert_eq!(distinct_orderings(&[]).len(), 1);
    }

    #[test]
    fn flat_equals_nested_small() {
        for d in [1, 2] {
            for parts in [vec![c(1)], vec![c(1), c(1)], vec![c(1), c(2), c(3)]] {
                let r = compare_flat_nested(&lat(), d, &parts).unwrap();
                assert!(r.identical, "d={d} parts={parts:?}: {}", r.difference);
            }
        }
    }

    #[test]
    fn display() {
        let one = assemble_epsilon_flat(&lat(), 2, &[c(1)]).unwrap();
        assert_eq!(one.to_string(), "-1 · ε^([0],2) ∗ ε^([1],0) + 1 · ε^([1],0) ∗ ε^([0],2)");
        assert_eq!(
            serde_json::to_string(&HallElement::monomial(w(&[v(1)]), ratio(-1, 2))).unwrap(),
            r#"[{"word":[{"beta":[0],"d":1}],"coeff":"-1/2"}]"#
        );
    }
}
