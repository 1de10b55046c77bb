//! The nilpotent Lie algebra on symbols `λ̃^(β,d)` and the bracket-homomorphic evaluation of
//! Hall-algebra bracket expressions.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize, Serializer};

use crate::classes::{ChernClass, Lattice, NumClass};
use crate::error::{Error, Result};
use crate::hall::{BracketSum, BracketTree};
use crate::rational::{format, int, Rational};

/// Antisymmetric integer pairing `χ̄` on classes `(β, d)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "data", rename_all = "snake_case")]
pub enum EulerPairing {
    /// `χ̄((β,d),(γ,e)) = d·L(γ) - e·L(β)` for an integer functional `L` on sheaf classes.
    GeometricLinear(Vec<i64>),
    /// `χ̄(x,y) = xᵀ M y` in the basis `(e_1, …, e_k, e_d)`; `M` must be antisymmetric.
    ExplicitTable(Vec<Vec<i64>>),
}

impl EulerPairing {
    pub fn geometric(lattice: &Lattice, l: Vec<i64>) -> Result<Self> {
        let p = EulerPairing::GeometricLinear(l);
        p.validate(lattice)?;
        Ok(p)
    }

    pub fn explicit(lattice: &Lattice, matrix: Vec<Vec<i64>>) -> Result<Self> {
        let p = EulerPairing::ExplicitTable(matrix);
        p.validate(lattice)?;
        Ok(p)
    }

    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        match self {
            EulerPairing::GeometricLinear(l) => {
                if l.len() != lattice.rank {
                    return Err(Error::PairingShape(format!(
                        "linear functional has {} entries, lattice rank is {}",
                        l.len(),
                        lattice.rank
                    )));
                }
            }
            EulerPairing::ExplicitTable(m) => {
                let size = lattice.rank + 1;
                if m.len() != size || m.iter().any(|row| row.len() != size) {
                    return Err(Error::PairingShape(format!(
                        "pairing matrix must be {size}x{size} (lattice rank {} plus the d coordinate)",
                        lattice.rank
                    )));
                }
                for i in 0..size {
                    for j in i..size {
                        if m[i][j] != -m[j][i] {
                            return Err(Error::PairingAntisymmetry(i, j));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn chi(&self, x: &NumClass, y: &NumClass) -> Result<i128> {
        match self {
            EulerPairing::GeometricLinear(l) => {
                let lx = dot(l, &x.beta)?;
                let ly = dot(l, &y.beta)?;
                let a = i128::from(x.d).checked_mul(ly).ok_or(Error::Overflow)?;
                let b = i128::from(y.d).checked_mul(lx).ok_or(Error::Overflow)?;
                a.checked_sub(b).ok_or(Error::Overflow)
            }
            EulerPairing::ExplicitTable(m) => {
                let xs = coords(x);
                let ys = coords(y);
                let mut acc: i128 = 0;
                for (i, xi) in xs.iter().enumerate() {
                    for (j, yj) in ys.iter().enumerate() {
                        let t = xi
                            .checked_mul(i128::from(m[i][j]))
                            .and_then(|t| t.checked_mul(*yj))
                            .ok_or(Error::Overflow)?;
                        acc = acc.checked_add(t).ok_or(Error::Overflow)?;
                    }
                }
                Ok(acc)
            }
        }
    }
}

fn dot(l: &[i64], beta: &ChernClass) -> Result<i128> {
    l.iter().zip(&beta.0).try_fold(0i128, |acc, (a, b)| {
        acc.checked_add(i128::from(*a) * i128::from(*b)).ok_or(Error::Overflow)
    })
}

fn coords(x: &NumClass) -> Vec<i128> {
    x.beta.0.iter().map(|&c| i128::from(c)).chain([i128::from(x.d)]).collect()
}

/// Finite basis of the Lie algebra: cone classes `(γ, d)` with `γ <= beta_max` coordinatewise
/// and `d <= d_max`. Brackets landing outside are zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSet {
    pub beta_max: ChernClass,
    pub d_max: u32,
}

impl ClassSet {
    pub fn new(beta_max: ChernClass, d_max: u32) -> Self {
        ClassSet { beta_max, d_max }
    }

    pub fn contains(&self, c: &NumClass) -> bool {
        c.in_positive_cone() && c.beta.le(&self.beta_max) && c.d <= self.d_max
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LieElement {
    terms: BTreeMap<NumClass, Rational>,
}

impl LieElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(c: NumClass, coeff: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(c, coeff);
        e
    }

    pub fn add_term(&mut self, c: NumClass, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(c.clone()).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&c);
        }
    }

    pub fn coefficient(&self, c: &NumClass) -> Rational {
        self.terms.get(c).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NumClass, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (c, x) in &other.terms {
            out.add_term(c.clone(), x.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut out = Self::zero();
        for (c, x) in &self.terms {
            out.add_term(c.clone(), x * s);
        }
        out
    }
}

impl fmt::Display for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, x)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}·λ^{c}", format(x))?;
        }
        Ok(())
    }
}

impl Serialize for LieElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            class: &'a NumClass,
            coeff: String,
        }
        s.collect_seq(self.terms.iter().map(|(class, c)| Term { class, coeff: format(c) }))
    }
}

/// `(-1)^χ̄ · χ̄` for the pair of generators.
pub fn structure_constant(x: &NumClass, y: &NumClass, p: &EulerPairing) -> Result<Rational> {
    let chi = p.chi(x, y)?;
    let r = Rational::from_integer(BigInt::from(chi));
    Ok(if chi.rem_euclid(2) == 0 { r } else { -r })
}

/// `[λ̃^(β,d), λ̃^(γ,e)] = (-1)^χ̄ χ̄ λ̃^(β+γ,d+e)` extended bilinearly, truncated to `set`.
pub fn lie_bracket(x: &LieElement, y: &LieElement, p: &EulerPairing, set: &ClassSet) -> Result<LieElement> {
    let mut out = LieElement::zero();
    for (a, ca) in &x.terms {
        for (b, cb) in &y.terms {
            let sum = a + b;
            if !set.contains(&sum) {
                continue;
            }
            let k = structure_constant(a, b, p)?;
            out.add_term(sum, k * ca * cb);
        }
    }
    Ok(out)
}

/// Generalized DT values of sheaf classes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DtTable {
    entries: BTreeMap<ChernClass, Rational>,
}

impl DtTable {
    pub fn new(lattice: &Lattice, entries: impl IntoIterator<Item = (ChernClass, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (c, v) in entries {
            lattice.check_effective(&c)?;
            map.insert(c, v);
        }
        Ok(DtTable { entries: map })
    }

    pub fn get(&self, c: &ChernClass) -> Option<&Rational> {
        self.entries.get(c)
    }

    /// Keys in ascending order.
    pub fn support(&self) -> Vec<ChernClass> {
        self.entries.keys().cloned().collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ChernClass, &Rational)> {
        self.entries.iter()
    }

    pub fn scaled(&self, t: &Rational) -> DtTable {
        DtTable { entries: self.entries.iter().map(|(c, v)| (c.clone(), v * t)).collect() }
    }
}

/// Image of a generator `ε̄^(class)(τ•)` under `Ψ̃`.
pub fn generator_image(c: &NumClass, dt: &DtTable) -> Result<LieElement> {
    if c.beta.is_zero() {
        return match c.d {
            1 => Ok(LieElement::monomial(c.clone(), int(-1))),
            2 => Ok(LieElement::monomial(c.clone(), crate::stackcalc::psi_constant_02())),
            _ => Err(Error::NoImage(c.to_string())),
        };
    }
    if c.d != 0 {
        return Err(Error::NoImage(c.to_string()));
    }
    let value = dt.get(&c.beta).ok_or_else(|| Error::NoImage(c.to_string()))?;
    Ok(LieElement::monomial(c.clone(), -value.clone()))
}

fn psi_tree(t: &BracketTree, dt: &DtTable, p: &EulerPairing, set: &ClassSet) -> Result<LieElement> {
    match t {
        BracketTree::Gen(c) => generator_image(c, dt),
        BracketTree::Bracket(x, y) => {
            let a = psi_tree(x, dt, p, set)?;
            let b = psi_tree(y, dt, p, set)?;
            lie_bracket(&a, &b, p, set)
        }
    }
}

/// Substitutes generator images into each bracket tree and evaluates with [`lie_bracket`].
pub fn psi_apply(expr: &BracketSum, dt: &DtTable, p: &EulerPairing, set: &ClassSet) -> Result<LieElement> {
    expr.0.iter().try_fold(LieElement::zero(), |acc, (c, t)| {
        Ok(acc.add(&psi_tree(t, dt, p, set)?.scale(c)))
    })
}
