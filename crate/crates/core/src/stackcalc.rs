//! Rewrite calculus on the four point-quotient stack symbols that occur in the reduction of
//! `ε̄^(0,2)(τ•)`.
//!
//! Two rules, no overlaps:
//! * `[pt/GL₂] → F(GL₂,G²ₘ,G²ₘ)·[pt/G²ₘ] + F(GL₂,G²ₘ,Gₘ)·[pt/Gₘ]`
//! * `[pt/A¹⋊G²ₘ] → -[pt/Gₘ] + [pt/G²ₘ]`

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::classes::NumClass;
use crate::lie::LieElement;
use crate::rational::{format, int, ratio, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum StackSymbol {
    /// `[Spec C / GL₂(C)]`
    PtGL2,
    /// `[Spec C / G²ₘ]`
    PtGm2,
    /// `[Spec C / Gₘ]`
    PtGm,
    /// `[Spec C / A¹⋊G²ₘ]`
    PtA1Gm2,
}

impl StackSymbol {
    pub const ALL: [StackSymbol; 4] =
        [StackSymbol::PtGL2, StackSymbol::PtGm2, StackSymbol::PtGm, StackSymbol::PtA1Gm2];

    pub fn is_normal(self) -> bool {
        matches!(self, StackSymbol::PtGm | StackSymbol::PtGm2)
    }

    fn label(self) -> &'static str {
        match self {
            StackSymbol::PtGL2 => "[pt/GL2]",
            StackSymbol::PtGm2 => "[pt/Gm^2]",
            StackSymbol::PtGm => "[pt/Gm]",
            StackSymbol::PtA1Gm2 => "[pt/A1xGm^2]",
        }
    }
}

/// Torus splitting coefficients of `GL₂(C)` with respect to its maximal torus `G²ₘ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gl2Splitting {
    /// `F(GL₂, G²ₘ, G²ₘ)`
    pub full_torus: Rational,
    /// `F(GL₂, G²ₘ, Gₘ)`, the diagonal subgroup.
    pub diagonal: Rational,
}

impl Default for Gl2Splitting {
    fn default() -> Self {
        Gl2Splitting { full_torus: ratio(1, 2), diagonal: ratio(-3, 4) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StackFnElement {
    terms: BTreeMap<StackSymbol, Rational>,
}

impl StackFnElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn symbol(s: StackSymbol) -> Self {
        Self::from_terms([(s, Rational::one())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (StackSymbol, Rational)>) -> Self {
        let mut e = Self::zero();
        for (s, c) in terms {
            e.add_term(s, c);
        }
        e
    }

    pub fn add_term(&mut self, s: StackSymbol, c: Rational) {
        let slot = self.terms.entry(s).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&s);
        }
    }

    pub fn coefficient(&self, s: StackSymbol) -> Rational {
        self.terms.get(&s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&StackSymbol, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_normal(&self) -> bool {
        self.terms.keys().all(|s| s.is_normal())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(*s, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(s, x)| (*s, x * c)))
    }
}

impl fmt::Display for StackFnElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}·{}", format(c), s.label())?;
        }
        Ok(())
    }
}

impl Serialize for StackFnElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.terms.iter().map(|(k, v)| (k.label(), format(v))))
    }
}

/// One rewrite step applied to a single symbol; normal-form symbols rewrite to themselves.
pub fn rewrite_symbol(s: StackSymbol, f: &Gl2Splitting) -> StackFnElement {
    match s {
        StackSymbol::PtGL2 => StackFnElement::from_terms([
            (StackSymbol::PtGm2, f.full_torus.clone()),
            (StackSymbol::PtGm, f.diagonal.clone()),
        ]),
        StackSymbol::PtA1Gm2 => {
            StackFnElement::from_terms([(StackSymbol::PtGm, int(-1)), (StackSymbol::PtGm2, int(1))])
        }
        other => StackFnElement::symbol(other),
    }
}

/// Rewrites only the symbols in `order`, one pass per listed symbol.
pub fn rewrite_in_order(e: &StackFnElement, order: &[StackSymbol], f: &Gl2Splitting) -> StackFnElement {
    order.iter().fold(e.clone(), |acc, &target| {
        let mut out = StackFnElement::zero();
        for (s, c) in acc.terms() {
            if *s == target {
                out = out.add(&rewrite_symbol(*s, f).scale(c));
            } else {
                out.add_term(*s, c.clone());
            }
        }
        out
    })
}

pub fn normal_form_with(e: &StackFnElement, f: &Gl2Splitting) -> StackFnElement {
    let mut out = StackFnElement::zero();
    for (s, c) in e.terms() {
        out = out.add(&rewrite_symbol(*s, f).scale(c));
    }
    out
}

pub fn normal_form(e: &StackFnElement) -> StackFnElement {
    normal_form_with(e, &Gl2Splitting::default())
}

/// `δ̄^(0,2)(τ•) = [pt/GL₂]` in normal form.
pub fn split_gl2() -> StackFnElement {
    normal_form(&StackFnElement::symbol(StackSymbol::PtGL2))
}

/// `ε̄^(0,1)(τ•) ∗ ε̄^(0,1)(τ•) = [pt/A¹⋊G²ₘ]` in normal form.
pub fn product_e01_e01() -> StackFnElement {
    normal_form(&StackFnElement::symbol(StackSymbol::PtA1Gm2))
}

pub fn epsilon_02_normal_form_with(f: &Gl2Splitting) -> StackFnElement {
    // ε̄^(0,2) = δ̄^(0,2) - 1/2 · δ̄^(0,1) ∗ δ̄^(0,1)
    let raw = StackFnElement::from_terms([
        (StackSymbol::PtGL2, int(1)),
        (StackSymbol::PtA1Gm2, ratio(-1, 2)),
    ]);
    normal_form_with(&raw, f)
}

pub fn epsilon_02_normal_form() -> StackFnElement {
    epsilon_02_normal_form_with(&Gl2Splitting::default())
}

/// Behrend multiplicity of the point `[pt/Gₘ]`.
pub const POINT_SIGN_EXPONENT: i64 = 1;
/// Relative dimension of `[pt/Gₘ]` over `[pt/GL₂]`.
pub const RELATIVE_DIMENSION: i64 = 3;

/// Coefficient `c` in `Ψ̃(ε̄^(0,2)(τ•)) = c · λ̃^(0,2)`.
pub fn psi_constant_02_with(f: &Gl2Splitting) -> Rational {
    let nf = epsilon_02_normal_form_with(f);
    crate::rational::sign(POINT_SIGN_EXPONENT)
        * crate::rational::sign(RELATIVE_DIMENSION)
        * nf.coefficient(StackSymbol::PtGm)
}

pub fn psi_constant_02() -> Rational {
    psi_constant_02_with(&Gl2Splitting::default())
}

/// `Ψ̃(ε̄^(0,2)(τ•))` as an element of the Lie algebra at lattice rank `rank`.
pub fn psi_constant_image_02(rank: usize) -> LieElement {
    LieElement::monomial(NumClass::vector(rank, 2), psi_constant_02())
}

/// The image `Ψ̃(δ̄^(0,2)(τ•)) = λ̃^(0,2)`, stored as given rather than derived.
pub fn psi_delta_02_axiom() -> Rational {
    int(1)
}

/// Weights `w(PtGm), w(PtGm2)` a linear evaluation would need in order to reproduce both the
/// `δ̄^(0,2)` axiom and the `ε̄^(0,2)` image from their normal forms.
#[derive(Clone, Debug, Serialize)]
pub struct EvaluationTension {
    #[serde(with = "crate::rational::serde_str")]
    pub weight_gm: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub weight_gm2: Rational,
    /// `Ψ̃(δ̄^(0,2))` if `[pt/G²ₘ]` is given weight 0, as a non-virtually-indecomposable symbol.
    #[serde(with = "crate::rational::serde_str")]
    pub delta_image_if_gm2_vanishes: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub delta_axiom: Rational,
}

pub fn evaluation_tension() -> EvaluationTension {
    let f = Gl2Splitting::default();
    // The ε̄ image fixes w(Gm) = (point sign)·(relative-dimension sign).
    let weight_gm = crate::rational::sign(POINT_SIGN_EXPONENT + RELATIVE_DIMENSION);
    // The δ̄ axiom then fixes w(Gm2) from F(Gm2)·w(Gm2) + F(Gm)·w(Gm) = 1.
    let weight_gm2 = (psi_delta_02_axiom() - &f.diagonal * &weight_gm) / &f.full_torus;
    EvaluationTension {
        delta_image_if_gm2_vanishes: &f.diagonal * &weight_gm,
        weight_gm,
        weight_gm2,
        delta_axiom: psi_delta_02_axiom(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl2_split() {
        let e = split_gl2();
        assert_eq!(e.coefficient(StackSymbol::PtGm2), ratio(1, 2));
        assert_eq!(e.coefficient(StackSymbol::PtGm), ratio(-3, 4));
        assert_eq!(e.len(), 2);
        let sum: Rational = e.terms().map(|(_, c)| c.clone()).sum();
        assert_eq!(sum, ratio(-1, 4));
    }

    #[test]
    fn product_of_vectors() {
        let e = product_e01_e01();
        assert_eq!(e.coefficient(StackSymbol::PtGm), int(-1));
        assert_eq!(e.coefficient(StackSymbol::PtGm2), int(1));
        assert_eq!(e, normal_form(&StackFnElement::symbol(StackSymbol::PtA1Gm2)));
        let combined = split_gl2().add(&e.scale(&ratio(-1, 2)));
        assert_eq!(combined, StackFnElement::from_terms([(StackSymbol::PtGm, ratio(-1, 4))]));
    }

    #[test]
    fn epsilon_02_reduces_to_single_point() {
        let e = epsilon_02_normal_form();
        assert_eq!(e, StackFnElement::from_terms([(StackSymbol::PtGm, ratio(-1, 4))]));
        assert_eq!(e.coefficient(StackSymbol::PtGm2), int(0));
        assert!(e.is_normal());
        assert_eq!(normal_form(&e), e);
        assert_eq!(e.to_string(), "-1/4·[pt/Gm]");
    }

    #[test]
    fn psi_image() {
        assert_eq!(psi_constant_02(), ratio(-1, 4));
        assert_eq!(psi_constant_image_02(2).coefficient(&NumClass::vector(2, 2)), ratio(-1, 4));
        assert_eq!(crate::rational::sign(POINT_SIGN_EXPONENT + RELATIVE_DIMENSION), int(1));
    }

    #[test]
    fn rewriting_is_confluent_across_orders() {
        let f = Gl2Splitting::default();
        let inputs: Vec<StackFnElement> = vec![
            StackFnElement::from_terms([(StackSymbol::PtGL2, int(1)), (StackSymbol::PtA1Gm2, ratio(-1, 2))]),
            StackFnElement::from_terms(StackSymbol::ALL.iter().map(|&s| (s, int(3)))),
        ];
        let non_normal = [StackSymbol::PtGL2, StackSymbol::PtA1Gm2];
        for e in inputs {
            let a = rewrite_in_order(&e, &non_normal, &f);
            let b = rewrite_in_order(&e, &[non_normal[1], non_normal[0]], &f);
            assert_eq!(a, b);
            assert!(a.is_normal());
            assert_eq!(a, normal_form(&e));
            // Extra passes change nothing.
            assert_eq!(rewrite_in_order(&a, &StackSymbol::ALL, &f), a);
        }
    }

    #[test]
    fn wrong_splitting_is_visible() {
        let bad = Gl2Splitting { full_torus: ratio(1, 2), diagonal: ratio(-1, 2) };
        assert_ne!(psi_constant_02_with(&bad), ratio(-1, 4));
    }

    #[test]
    fn tension_report() {
        let t = evaluation_tension();
        assert_eq!(t.weight_gm, int(1));
        assert_eq!(t.weight_gm2, ratio(7, 2));
        assert_eq!(t.delta_image_if_gm2_vanishes, ratio(-3, 4));
    }
}
