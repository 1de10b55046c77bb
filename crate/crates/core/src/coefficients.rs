//! The `S` sign function, the Λ-set of regroupings, and the transformation coefficients `U`
//! relating `ε̄(τ̃)` to products of `ε̄(τ•)`.
//!
//! All sums are finite and evaluated exactly. A Λ-choice `(l, m, a, b)` cuts the sequence into
//! `m` consecutive blocks `θ_1..θ_m` at the points `a`, then groups the blocks into `l`
//! consecutive runs `γ_1..γ_l` at the points `b`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::classes::{total, ChernClass, Lattice, NumClass, StabCondition};
use crate::error::{Error, Result};
use crate::rational::{inv_factorial, ratio, Rational};

/// One element of Λ. `a` and `b` include the leading `0`; `a[m] = n` and `b[l] = m`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LambdaChoice {
    pub l: usize,
    pub m: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl LambdaChoice {
    /// The blocks `θ_i` of `seq` cut at `a`.
    pub fn thetas(&self, seq: &[NumClass]) -> Vec<NumClass> {
        self.a.windows(2).map(|w| total(&seq[w[0]..w[1]])).collect()
    }

    /// Index of the θ-block containing sequence position `pos` (0-based).
    pub fn block_of(&self, pos: usize) -> usize {
        self.a.windows(2).position(|w| w[0] <= pos && pos < w[1]).unwrap_or(self.m)
    }
}

/// A Λ-choice with its weight `(-1)^{l-1}/l · ∏ S(γ-run) · ∏ 1/(a_i - a_{i-1})!`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaTerm {
    pub choice: LambdaChoice,
    pub weight: Rational,
}

fn s_unchecked(seq: &[NumClass], coarse: StabCondition, fine: StabCondition) -> i8 {
    let n = seq.len();
    // prefix[i] = seq[0] + ... + seq[i-1]
    let mut prefix = Vec::with_capacity(n);
    let mut acc = seq[0].clone();
    prefix.push(acc.clone());
    for c in &seq[1..] {
        acc = &acc + c;
        prefix.push(acc.clone());
    }
    let whole = &prefix[n - 1];
    let mut r = 0usize;
    for i in 0..n - 1 {
        let left = fine.eval(&prefix[i]);
        let right_class = NumClass {
            beta: whole.beta.checked_sub(&prefix[i].beta),
            d: whole.d - prefix[i].d,
        };
        let right = fine.eval(&right_class);
        let (here, next) = (coarse.eval(&seq[i]), coarse.eval(&seq[i + 1]));
        if here <= next && left > right {
            r += 1;
        } else if here > next && left <= right {
            continue;
        } else {
            return 0;
        }
    }
    if r.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `S(seq; coarse, fine) ∈ {-1, 0, 1}`.
pub fn s_function(seq: &[NumClass], coarse: StabCondition, fine: StabCondition) -> Result<i8> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    check_cone(seq)?;
    Ok(s_unchecked(seq, coarse, fine))
}

fn check_cone(seq: &[NumClass]) -> Result<()> {
    let rank = seq[0].rank();
    Lattice::new(rank)?.check_sequence(seq)
}

/// All strictly increasing `0 = c_0 < c_1 < ... < c_p = n`, in lexicographic order.
fn compositions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0];
    fn rec(n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *cur.last().unwrap_or(&0);
        if last == n {
            out.push(cur.clone());
            return;
        }
        for next in last + 1..=n {
            cur.push(next);
            rec(n, cur, out);
            cur.pop();
        }
    }
    rec(n, &mut cur, &mut out);
    out
}

fn lambda_unchecked(
    seq: &[NumClass],
    coarse: StabCondition,
    fine: StabCondition,
) -> Vec<(LambdaChoice, Vec<NumClass>)> {
    let whole_fine = fine.eval(&total(seq));
    let mut out = Vec::new();
    for a in compositions(seq.len()) {
        let thetas: Vec<NumClass> = a.windows(2).map(|w| total(&seq[w[0]..w[1]])).collect();
        let blocks_ok = a.windows(2).zip(&thetas).all(|(w, theta)| {
            let t = coarse.eval(theta);
            seq[w[0]..w[1]].iter().all(|c| coarse.eval(c) == t)
        });
        if !blocks_ok {
            continue;
        }
        let m = thetas.len();
        for b in compositions(m) {
            let runs_ok = b
                .windows(2)
                .all(|w| fine.eval(&total(&thetas[w[0]..w[1]])) == whole_fine);
            if runs_ok {
                let choice = LambdaChoice { l: b.len() - 1, m, a: a.clone(), b };
                out.push((choice, thetas.clone()));
            }
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

/// Λ for `seq` with an explicit pair of conditions.
pub fn enumerate_lambda_with(
    seq: &[NumClass],
    coarse: StabCondition,
    fine: StabCondition,
) -> Result<Vec<LambdaChoice>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    check_cone(seq)?;
    Ok(lambda_unchecked(seq, coarse, fine).into_iter().map(|(c, _)| c).collect())
}

/// Λ for `seq` with `τ•` as the coarse and `τ̃` as the fine condition.
pub fn enumerate_lambda(seq: &[NumClass]) -> Result<Vec<LambdaChoice>> {
    enumerate_lambda_with(seq, StabCondition::TauBullet, StabCondition::TauTilde)
}

/// Every Λ-choice of `seq` with its contribution to `U`, zero contributions included.
pub fn lambda_terms(
    seq: &[NumClass],
    coarse: StabCondition,
    fine: StabCondition,
) -> Result<Vec<LambdaTerm>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    check_cone(seq)?;
    let terms = lambda_unchecked(seq, coarse, fine)
        .into_iter()
        .map(|(choice, thetas)| {
            let l = choice.l as i64;
            let mut weight = ratio(if l % 2 == 1 { 1 } else { -1 }, l);
            for w in choice.b.windows(2) {
                let s = s_unchecked(&thetas[w[0]..w[1]], coarse, fine);
                if s == 0 {
                    weight = Rational::zero();
                    break;
                }
                if s < 0 {
                    weight = -weight;
                }
            }
            if !weight.is_zero() {
                for w in choice.a.windows(2) {
                    weight *= inv_factorial(w[1] - w[0]);
                }
            }
            LambdaTerm { choice, weight }
        })
        .collect();
    Ok(terms)
}

pub fn u_coefficient_with(
    seq: &[NumClass],
    coarse: StabCondition,
    fine: StabCondition,
) -> Result<Rational> {
    Ok(lambda_terms(seq, coarse, fine)?
        .into_iter()
        .fold(Rational::zero(), |acc, t| acc + t.weight))
}

/// `U(seq; τ•, τ̃)`.
pub fn u_coefficient(seq: &[NumClass]) -> Result<Rational> {
    u_coefficient_with(seq, StabCondition::TauBullet, StabCondition::TauTilde)
}

/// Partial sums of `U` for a sequence with two `(0,1)` entries, split by configuration.
///
/// * Case 1, adjacent entries: `u1a` has them in distinct θ-blocks, `u1b` merges them
///   into a single `(0,2)` block.
/// * Case 2, one sheaf class between them: `u2a` is `l = 2` with the first γ-run ending
///   at the first `(0,1)`; `u2b` collects the rest (the run ending after the middle class).
/// * Case 3, two or more sheaf classes between them: everything goes to `u3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSplit {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub u1a: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub u1b: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub u2a: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub u2b: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub u3: Rational,
}

impl CaseSplit {
    pub fn total(&self) -> Rational {
        &self.u1a + &self.u1b + &self.u2a + &self.u2b + &self.u3
    }
}

/// Length-`n` sequence with `(0,1)` at the 1-based positions `k` and `m` and copies of
/// `generic` elsewhere.
pub fn two_vector_sequence(n: usize, k: usize, m: usize, generic: &ChernClass) -> Result<Vec<NumClass>> {
    if !(1 <= k && k < m && m <= n) {
        return Err(Error::InvalidPositions { n, k, m });
    }
    let rank = generic.rank();
    Ok((1..=n)
        .map(|i| {
            if i == k || i == m {
                NumClass::vector(rank, 1)
            } else {
                NumClass::sheaf(generic.clone())
            }
        })
        .collect())
}

/// Splits `U` of the two-`(0,1)` sequence `(n, k, m)` by the case taxonomy above.
pub fn u_case_decomposition(n: usize, k: usize, m: usize) -> Result<CaseSplit> {
    let seq = two_vector_sequence(n, k, m, &ChernClass(vec![1]))?;
    let mut split = CaseSplit {
        n,
        k,
        m,
        u1a: Rational::zero(),
        u1b: Rational::zero(),
        u2a: Rational::zero(),
        u2b: Rational::zero(),
        u3: Rational::zero(),
    };
    let gap = m - k - 1;
    for term in lambda_terms(&seq, StabCondition::TauBullet, StabCondition::TauTilde)? {
        let c = &term.choice;
        let slot = match gap {
            0 => {
                if c.block_of(k - 1) == c.block_of(m - 1) {
                    &mut split.u1b
                } else {
                    &mut split.u1a
                }
            }
            1 => {
                if c.l == 2 && c.a[c.b[1]] == k {
                    &mut split.u2a
                } else {
                    &mut split.u2b
                }
            }
            _ => &mut split.u3,
        };
        *slot += term.weight;
    }
    Ok(split)
}

/// `(-1/2) · 1/(k-1)! · (-1)^{n-1-k}/(n-1-k)!`, the adjacent-case value with separate blocks.
pub fn case1a_closed_form(n: usize, k: usize) -> Rational {
    let r = n - 1 - k;
    -ratio(1, 2) * inv_factorial(k - 1) * crate::rational::sign(r as i64) * inv_factorial(r)
}

/// `(-1/2) · 1/(k-1)! · (-1)^{n-k-2}/(n-k-2)!`, the one-gap value with the early cut.
pub fn case2a_closed_form(n: usize, k: usize) -> Rational {
    let r = n - k - 2;
    -ratio(1, 2) * inv_factorial(k - 1) * crate::rational::sign(r as i64) * inv_factorial(r)
}

/// Sequence of `l` sheaf classes with `(0,2)` inserted after the first `k` of them.
pub fn single_insertion_sequence(parts: &[ChernClass], k: usize, d: u32) -> Vec<NumClass> {
    let rank = parts.first().map_or(1, ChernClass::rank);
    let mut seq: Vec<NumClass> = parts.iter().cloned().map(NumClass::sheaf).collect();
    seq.insert(k, NumClass::vector(rank, d));
    seq
}

/// Closed forms proposed for `U` of a single `(0,2)` after `k` of `l` sheaf classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum E1Form {
    /// `(-1)^{l-k}/((k-1)!(l-k)!)` for `k >= 1`, with `(-1)^l/l!` at `k = 0`.
    Printed,
    /// `(-1)^{l-k}/(k!(l-k)!)`.
    KFactorial,
}

impl E1Form {
    pub const ALL: [E1Form; 2] = [E1Form::Printed, E1Form::KFactorial];

    pub fn name(self) -> &'static str {
        match self {
            E1Form::Printed => "(-1)^(l-k)/((k-1)!(l-k)!)",
            E1Form::KFactorial => "(-1)^(l-k)/(k!(l-k)!)",
        }
    }

    pub fn value(self, k: usize, l: usize) -> Rational {
        let tail = crate::rational::sign((l - k) as i64) * inv_factorial(l - k);
        match (self, k) {
            (E1Form::Printed, 0) => tail,
            (E1Form::Printed, _) => tail * inv_factorial(k - 1),
            (E1Form::KFactorial, _) => tail * inv_factorial(k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn sh(b: i64) -> NumClass {
        NumClass::sheaf(ChernClass(vec![b]))
    }
    fn v(d: u32) -> NumClass {
        NumClass::vector(1, d)
    }
    const TB: StabCondition = StabCondition::TauBullet;
    const TT: StabCondition = StabCondition::TauTilde;

    #[test]
    fn s_function_examples() {
        assert_eq!(s_function(&[sh(1), v(1)], TB, TT).unwrap(), 1);
        assert_eq!(s_function(&[v(2)], TB, TT).unwrap(), 1);
        assert_eq!(s_function(&[sh(1), sh(2)], TB, TT).unwrap(), 0);
        assert_eq!(s_function(&[v(1), sh(1)], TB, TT).unwrap(), -1);
        assert_eq!(s_function(&[], TB, TT), Err(Error::EmptySequence));
        assert!(s_function(&[NumClass::vector(1, 0)], TB, TT).is_err());
    }

    #[test]
    fn lambda_examples() {
        let single = enumerate_lambda(&[v(2)]).unwrap();
        assert_eq!(single, vec![LambdaChoice { l: 1, m: 1, a: vec![0, 1], b: vec![0, 1] }]);

        // Both entries d = 0: every regrouping is admissible.
        let two = enumerate_lambda(&[sh(1), sh(1)]).unwrap();
        assert_eq!(
            two,
            vec![
                LambdaChoice { l: 1, m: 1, a: vec![0, 2], b: vec![0, 1] },
                LambdaChoice { l: 1, m: 2, a: vec![0, 1, 2], b: vec![0, 2] },
                LambdaChoice { l: 2, m: 2, a: vec![0, 1, 2], b: vec![0, 1, 2] },
            ]
        );
    }

    #[test]
    fn lambda_contains_case_one_configurations() {
        // Three sheaf classes, then the adjacent pair of (0,1) entries at positions 4, 5.
        let seq = two_vector_sequence(6, 4, 5, &ChernClass(vec![1])).unwrap();
        let choices = enumerate_lambda(&seq).unwrap();
        // (a): separate blocks with a_1 = k-1 = 3, a_2 = 4, a_3 = 5, cut after block 2.
        assert!(choices.iter().any(|c| c.a.starts_with(&[0, 3, 4, 5]) && c.b == vec![0, 2, c.m]));
        // (b): merged block θ_2 = (0,2) with a_1 = 3, a_2 = 5, single run.
        assert!(choices.iter().any(|c| c.a.starts_with(&[0, 3, 5]) && c.l == 1));
    }

    #[test]
    fn u_examples() {
        assert_eq!(u_coefficient(&[v(2)]).unwrap(), int(1));
        assert_eq!(u_coefficient(&[v(2), sh(1)]).unwrap(), int(-1));
        assert_eq!(u_coefficient(&[sh(1), v(2)]).unwrap(), int(1));
        assert_eq!(u_coefficient(&[sh(1), v(1), v(1), sh(2)]).unwrap(), int(0));
        assert_eq!(u_coefficient(&[v(1), v(1)]).unwrap(), int(0));
    }

    #[test]
    fn e1_table_frozen() {
        // Independent brute force over all (l, m, a, b), rows l = 1..5, k = 0..l.
        let expected: [&[(i64, i64)]; 5] = [
            &[(-1, 1), (1, 1)],
            &[(1, 2), (-1, 1), (1, 2)],
            &[(-1, 6), (1, 2), (-1, 2), (1, 6)],
            &[(1, 24), (-1, 6), (1, 4), (-1, 6), (1, 24)],
            &[(-1, 120), (1, 24), (-1, 12), (1, 12), (-1, 24), (1, 120)],
        ];
        for (row, l) in expected.iter().zip(1usize..) {
            let parts = vec![ChernClass(vec![1]); l];
            for (k, &(p, q)) in row.iter().enumerate() {
                let seq = single_insertion_sequence(&parts, k, 2);
                assert_eq!(u_coefficient(&seq).unwrap(), ratio(p, q), "l={l} k={k}");
                assert_eq!(E1Form::KFactorial.value(k, l), ratio(p, q));
            }
        }
        assert_ne!(E1Form::Printed.value(2, 2), E1Form::KFactorial.value(2, 2));
    }

    #[test]
    fn case_split_frozen() {
        // (n, k, m) -> (u1a, u1b, u2a, u2b) from an independent brute force.
        let s = u_case_decomposition(7, 1, 2).unwrap();
        assert_eq!((s.u1a.clone(), s.u1b.clone()), (ratio(1, 240), ratio(-1, 240)));
        let s = u_case_decomposition(6, 3, 5).unwrap();
        assert_eq!((s.u2a.clone(), s.u2b.clone()), (ratio(1, 4), ratio(-1, 4)));
        assert_eq!(s.u1a, int(0));
        let s = u_case_decomposition(7, 2, 5).unwrap();
        assert_eq!(s.u3, int(0));
        assert_eq!(u_case_decomposition(4, 3, 3), Err(Error::InvalidPositions { n: 4, k: 3, m: 3 }));
        assert!(u_case_decomposition(4, 0, 2).is_err());
    }

    #[test]
    fn case_closed_forms_on_small_n() {
        for n in 2..=7 {
            for k in 1..n {
                let s = u_case_decomposition(n, k, k + 1).unwrap();
                assert_eq!(s.u1a, case1a_closed_form(n, k));
                assert_eq!(s.u1b, -case1a_closed_form(n, k));
                if k + 2 <= n {
                    let s = u_case_decomposition(n, k, k + 2).unwrap();
                    assert_eq!(s.u2a, case2a_closed_form(n, k));
                    assert_eq!(s.u2b, -case2a_closed_form(n, k));
                }
            }
        }
    }

    #[test]
    fn tau_n_as_fine_condition() {
        // With τⁿ fine every regrouping passes condition (2), but S vanishes as soon as
        // two entries appear, because τⁿ never separates partial sums.
        assert_eq!(s_function(&[sh(1), v(1)], TB, StabCondition::TauN).unwrap(), 1);
        assert_eq!(s_function(&[v(1), sh(1)], TB, StabCondition::TauN).unwrap(), 0);
        assert_eq!(u_coefficient_with(&[v(1)], TB, StabCondition::TauN).unwrap(), int(1));
    }
}
