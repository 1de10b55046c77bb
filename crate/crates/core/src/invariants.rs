//! Rank-2 and rank-1 pair invariants from DT inputs, by the product closed form and by
//! evaluating the nested-bracket wall-crossing identity in the Lie algebra.

use num_traits::Zero;
use serde::Serialize;

use crate::classes::{ChernClass, Lattice, NumClass};
use crate::error::Result;
use crate::hall::{compare_flat_nested, nested_expression};
use crate::lie::{psi_apply, ClassSet, DtTable, EulerPairing};
use crate::rational::{inv_factorial, ratio, sign, Rational};

/// Ordered tuples of `support` classes summing to `beta`, in lexicographic order.
pub fn enumerate_decompositions(beta: &ChernClass, support: &[ChernClass]) -> Vec<Vec<ChernClass>> {
    let mut support: Vec<ChernClass> = support.iter().filter(|c| c.is_effective()).cloned().collect();
    support.sort();
    support.dedup();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(rem: &ChernClass, support: &[ChernClass], cur: &mut Vec<ChernClass>, out: &mut Vec<Vec<ChernClass>>) {
        if rem.is_zero() {
            if !cur.is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        for c in support {
            if c.le(rem) {
                cur.push(c.clone());
                rec(&rem.checked_sub(c), support, cur, out);
                cur.pop();
            }
        }
    }
    if beta.is_effective() {
        rec(beta, &support, &mut cur, &mut out);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionContribution {
    pub parts: Vec<ChernClass>,
    #[serde(with = "crate::rational::serde_str")]
    pub closed_form: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub bracket_eval: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantResult {
    pub d: u32,
    pub targets: Vec<ChernClass>,
    #[serde(with = "crate::rational::serde_str")]
    pub closed_form: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub bracket_eval: Rational,
    pub agree: bool,
    pub per_decomposition: Vec<DecompositionContribution>,
}

impl InvariantResult {
    fn from_parts(d: u32, targets: Vec<ChernClass>, per_decomposition: Vec<DecompositionContribution>) -> Self {
        let closed_form = per_decomposition.iter().map(|c| c.closed_form.clone()).sum::<Rational>();
        let bracket_eval = per_decomposition.iter().map(|c| c.bracket_eval.clone()).sum::<Rational>();
        InvariantResult {
            d,
            targets,
            agree: closed_form == bracket_eval,
            closed_form,
            bracket_eval,
            per_decomposition,
        }
    }

    /// First decomposition whose two contributions differ, if any.
    pub fn first_disagreement(&self) -> Option<&DecompositionContribution> {
        self.per_decomposition.iter().find(|c| c.closed_form != c.bracket_eval)
    }
}

fn partial_sum(parts: &[ChernClass], rank: usize) -> ChernClass {
    parts.iter().fold(ChernClass::zero(rank), |acc, c| &acc + c)
}

/// `-1/4 · 1/l! · ∏ᵢ DT̄^{βᵢ} χ̄((β_1+⋯+β_{i-1},2),(βᵢ,0)) · (-1)^{χ̄((0,2),(β_1,0)) + Σᵢ χ̄(…)}`
/// for one ordered decomposition.
pub fn bss_closed_form_term(parts: &[ChernClass], dt: &DtTable, p: &EulerPairing) -> Result<Rational> {
    let Some(first) = parts.first() else {
        return Ok(Rational::zero());
    };
    let rank = first.rank();
    let mut value = -ratio(1, 4) * inv_factorial(parts.len());
    let mut exponent = p.chi(&NumClass::vector(rank, 2), &NumClass::sheaf(first.clone()))?;
    for (i, beta) in parts.iter().enumerate() {
        let head = NumClass::new(partial_sum(&parts[..i], rank), 2);
        let chi = p.chi(&head, &NumClass::sheaf(beta.clone()))?;
        let dt_value = dt.get(beta).cloned().unwrap_or_else(Rational::zero);
        value *= dt_value * Rational::from_integer(chi.into());
        exponent += chi;
    }
    Ok(value * sign((exponent.rem_euclid(2)) as i64))
}

/// Rank-`d` analogue of the product formula, without separate sign term on `β_1`:
/// `c_d · 1/l! · ∏ᵢ DT̄^{βᵢ} (-1)^{χ̄ᵢ} χ̄ᵢ` where `χ̄ᵢ = χ̄((β_1+⋯+β_{i-1},d),(βᵢ,0))` and
/// `c_d` is the `λ̃^(0,d)`-coefficient of `-Ψ̃(ε̄^(0,d))`.
fn product_term(parts: &[ChernClass], d: u32, dt: &DtTable, p: &EulerPairing) -> Result<Rational> {
    let Some(first) = parts.first() else {
        return Ok(Rational::zero());
    };
    let rank = first.rank();
    let head_coeff = match d {
        1 => Rational::from_integer((-1).into()),
        _ => crate::stackcalc::psi_constant_02(),
    };
    let mut value = head_coeff * inv_factorial(parts.len());
    for (i, beta) in parts.iter().enumerate() {
        let head = NumClass::new(partial_sum(&parts[..i], rank), d);
        let chi = p.chi(&head, &NumClass::sheaf(beta.clone()))?;
        let dt_value = dt.get(beta).cloned().unwrap_or_else(Rational::zero);
        value *= dt_value * Rational::from_integer(chi.into()) * sign(chi.rem_euclid(2) as i64);
    }
    Ok(value)
}

/// `(-1)^l/l!` times the `λ̃^(β,d)` coefficient of `Ψ̃([[⋯[ε̄^(0,d), ε̄^(β_1,0)], ⋯], ε̄^(β_l,0)])`.
pub fn bracket_term(parts: &[ChernClass], d: u32, dt: &DtTable, p: &EulerPairing) -> Result<Rational> {
    let Some(first) = parts.first() else {
        return Ok(Rational::zero());
    };
    let lattice = Lattice::new(first.rank())?;
    let beta = partial_sum(parts, lattice.rank);
    let expr = nested_expression(&lattice, d, parts)?;
    let set = ClassSet::new(beta.clone(), 2);
    let image = psi_apply(&expr, dt, p, &set)?;
    Ok(image.coefficient(&NumClass::new(beta, d)))
}

fn decompositions_for(beta: &ChernClass, dt: &DtTable) -> Vec<Vec<ChernClass>> {
    enumerate_decompositions(beta, &dt.support())
}

pub fn bss_closed_form(beta: &ChernClass, dt: &DtTable, p: &EulerPairing) -> Result<Rational> {
    decompositions_for(beta, dt)
        .iter()
        .try_fold(Rational::zero(), |acc, parts| Ok(acc + bss_closed_form_term(parts, dt, p)?))
}

pub fn bss_bracket_eval(beta: &ChernClass, dt: &DtTable, p: &EulerPairing) -> Result<Rational> {
    decompositions_for(beta, dt)
        .iter()
        .try_fold(Rational::zero(), |acc, parts| Ok(acc + bracket_term(parts, 2, dt, p)?))
}

/// Both evaluations of the rank-2 invariant of `β`, with per-decomposition contributions.
pub fn bss(beta: &ChernClass, dt: &DtTable, p: &EulerPairing) -> Result<InvariantResult> {
    let per = decompositions_for(beta, dt)
        .into_iter()
        .map(|parts| {
            Ok(DecompositionContribution {
                closed_form: bss_closed_form_term(&parts, dt, p)?,
                bracket_eval: bracket_term(&parts, 2, dt, p)?,
                parts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InvariantResult::from_parts(2, vec![beta.clone()], per))
}

/// Sum of the rank-2 invariant over the classes sharing one Hilbert polynomial.
pub fn hft_rank2(selector: &[ChernClass], dt: &DtTable, p: &EulerPairing) -> Result<InvariantResult> {
    let mut targets = selector.to_vec();
    targets.sort();
    targets.dedup();
    let mut per = Vec::new();
    for beta in &targets {
        per.extend(bss(beta, dt, p)?.per_decomposition);
    }
    Ok(InvariantResult::from_parts(2, targets, per))
}

/// Rank-1 pair invariant. `closed_form` is the product formula; `bracket_eval` evaluates
/// the nested brackets around `ε̄^(0,1)`.
pub fn pair_invariant_rank1(beta: &ChernClass, dt: &DtTable, p: &EulerPairing) -> Result<InvariantResult> {
    let per = decompositions_for(beta, dt)
        .into_iter()
        .map(|parts| {
            Ok(DecompositionContribution {
                closed_form: product_term(&parts, 1, dt, p)?,
                bracket_eval: bracket_term(&parts, 1, dt, p)?,
                parts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InvariantResult::from_parts(1, vec![beta.clone()], per))
}

/// Whether the flat `U`-weighted rank-1 assembly agrees with the nested one for every
/// multiset of parts appearing in the decompositions of `beta`.
pub fn rank1_assemblies_agree(lattice: &Lattice, beta: &ChernClass, dt: &DtTable) -> Result<bool> {
    let mut seen = std::collections::BTreeSet::new();
    for parts in decompositions_for(beta, dt) {
        let mut key = parts.clone();
        key.sort();
        if seen.insert(key.clone()) && !compare_flat_nested(lattice, 1, &key)?.identical {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rank-2 counterpart of [`product_term`]: the bracket evaluation written as a product.
pub fn bss_product_term(parts: &[ChernClass], dt: &DtTable, p: &EulerPairing) -> Result<Rational> {
    product_term(parts, 2, dt, p)
}
