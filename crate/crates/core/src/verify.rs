//! Machine re-derivation of the hand computations: every audit records failures instead of
//! raising, and reports are deterministic for fixed bounds.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::classes::{ChernClass, Lattice, NumClass};
use crate::coefficients::{
    case1a_closed_form, case2a_closed_form, single_insertion_sequence, two_vector_sequence,
    u_case_decomposition, u_coefficient, E1Form,
};
use crate::hall::compare_flat_nested;
use crate::invariants::{bss, enumerate_decompositions, pair_invariant_rank1};
use crate::lie::{lie_bracket, ClassSet, DtTable, EulerPairing, LieElement};
use crate::rational::{format, int, ratio, Rational};
use crate::stackcalc::{
    epsilon_02_normal_form_with, psi_constant_02_with, Gl2Splitting, StackFnElement, StackSymbol,
};

/// Cap on failure messages kept per audit; the count is always exact.
const MAX_REPORTED: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct Audit {
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    pub failure_count: usize,
    pub failures: Vec<String>,
    pub details: BTreeMap<String, Value>,
}

impl Audit {
    fn new(name: &str) -> Self {
        Audit {
            name: name.to_string(),
            passed: true,
            checks: 0,
            failure_count: 0,
            failures: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.passed = false;
            self.failure_count += 1;
            if self.failures.len() < MAX_REPORTED {
                self.failures.push(msg());
            }
        }
    }

    fn detail(&mut self, key: &str, v: Value) {
        self.details.insert(key.to_string(), v);
    }

    fn merge_checks(&mut self, results: Vec<(bool, String)>) {
        for (ok, msg) in results {
            self.check(ok, || msg);
        }
    }
}

/// Sheaf labels used to vary the generic classes in the two-`(0,1)` sweep.
fn label_pool() -> [ChernClass; 2] {
    [ChernClass(vec![1, 0]), ChernClass(vec![0, 1])]
}

/// `U(two (0,1) entries) = 0` for every placement and every labeling from a two-class pool,
/// plus the per-case closed forms.
pub fn verify_lemma_ub(n_max: usize) -> Audit {
    let mut audit = Audit::new("two_vector_vanishing");
    let placements: Vec<(usize, usize, usize)> = (2..=n_max)
        .flat_map(|n| (1..n).flat_map(move |k| (k + 1..=n).map(move |m| (n, k, m))))
        .collect();

    let labeled: Vec<Vec<(bool, String)>> = placements
        .par_iter()
        .map(|&(n, k, m)| {
            let pool = label_pool();
            let free = n - 2;
            (0..1usize << free)
                .map(|mask| {
                    let mut seq = two_vector_sequence(n, k, m, &pool[0]).expect("valid positions");
                    for (bit, c) in seq.iter_mut().filter(|c| c.d == 0).enumerate() {
                        c.beta = pool[(mask >> bit) & 1].clone();
                    }
                    let u = u_coefficient(&seq).expect("cone sequence");
                    (u.is_zero(), format!("U(n={n},k={k},m={m}, labels={mask:b}) = {}", format(&u)))
                })
                .collect()
        })
        .collect();
    let sequences: usize = labeled.iter().map(Vec::len).sum();
    for r in labeled {
        audit.merge_checks(r);
    }

    let cases: Vec<Vec<(bool, String)>> = placements
        .par_iter()
        .map(|&(n, k, m)| {
            let s = u_case_decomposition(n, k, m).expect("valid positions");
            let u = u_coefficient(&two_vector_sequence(n, k, m, &ChernClass(vec![1])).expect("valid"))
                .expect("cone sequence");
            let tag = format!("(n={n},k={k},m={m})");
            let mut out = vec![(s.total() == u, format!("case sums {tag} do not add up to U"))];
            match m - k - 1 {
                0 => {
                    let a = case1a_closed_form(n, k);
                    out.push((s.u1a == a, format!("U1a {tag} = {} != {}", format(&s.u1a), format(&a))));
                    let b = -a;
                    out.push((s.u1b == b, format!("U1b {tag} = {} != {}", format(&s.u1b), format(&b))));
                    out.push(((&s.u1a + &s.u1b).is_zero(), format!("case 1 total {tag} nonzero")));
                }
                1 => {
                    let a = case2a_closed_form(n, k);
                    out.push((s.u2a == a, format!("U2a {tag} = {} != {}", format(&s.u2a), format(&a))));
                    out.push(((&s.u2a + &s.u2b).is_zero(), format!("case 2 total {tag} nonzero")));
                }
                _ => out.push((s.u3.is_zero(), format!("case 3 total {tag} = {}", format(&s.u3)))),
            }
            out
        })
        .collect();
    for r in cases {
        audit.merge_checks(r);
    }
    audit.detail("n_max", json!(n_max));
    audit.detail("placements", json!(placements.len()));
    audit.detail("labeled_sequences", json!(sequences));
    audit
}

/// Compares brute-force `U` for a single `(0,2)` against both candidate closed forms.
pub fn verify_e1_coefficients(l_max: usize) -> Audit {
    let mut audit = Audit::new("e1_coefficients");
    let mut mismatches: BTreeMap<E1Form, Vec<String>> = BTreeMap::new();
    let mut rows = Vec::new();
    for l in 1..=l_max {
        let parts: Vec<ChernClass> = (1..=l as i64).map(|i| ChernClass(vec![i])).collect();
        let mut row_forms: Vec<&str> = Vec::new();
        let mut values = Vec::new();
        let mut row_ok: BTreeMap<E1Form, bool> = E1Form::ALL.iter().map(|&f| (f, true)).collect();
        for k in 0..=l {
            let u = u_coefficient(&single_insertion_sequence(&parts, k, 2)).expect("cone sequence");
            for form in E1Form::ALL {
                if form.value(k, l) != u {
                    row_ok.insert(form, false);
                    mismatches
                        .entry(form)
                        .or_default()
                        .push(format!("(k={k},l={l}): U={} form={}", format(&u), format(&form.value(k, l))));
                }
            }
            values.push(format(&u));
        }
        for (form, ok) in &row_ok {
            if *ok {
                row_forms.push(form.name());
            }
        }
        rows.push(json!({ "l": l, "u": values, "matching_forms": row_forms }));
    }
    let uniform: Vec<E1Form> =
        E1Form::ALL.iter().copied().filter(|f| !mismatches.contains_key(f)).collect();
    audit.check(uniform.len() == 1, || {
        format!("expected exactly one uniformly matching form, found {}", uniform.len())
    });
    audit.detail("rows", json!(rows));
    audit.detail(
        "matching_form",
        json!(uniform.first().map(|f| f.name()).unwrap_or("none")),
    );
    audit.detail(
        "mismatches",
        json!(mismatches
            .iter()
            .map(|(f, v)| (f.name().to_string(), json!(v)))
            .collect::<BTreeMap<_, _>>()),
    );
    audit
}

pub fn verify_stack_reduction_with(f: &Gl2Splitting) -> Audit {
    let mut audit = Audit::new("stack_reduction");
    let nf = epsilon_02_normal_form_with(f);
    let expect = StackFnElement::from_terms([(StackSymbol::PtGm, ratio(-1, 4))]);
    audit.check(nf == expect, || format!("ε̄^(0,2) normal form is {nf}, expected {expect}"));
    audit.check(nf.coefficient(StackSymbol::PtGm2).is_zero(), || "[pt/Gm^2] does not cancel".into());
    let psi = psi_constant_02_with(f);
    audit.check(psi == ratio(-1, 4), || format!("Ψ̃ image coefficient is {}", format(&psi)));
    audit.detail("normal_form", json!(nf.to_string()));
    audit.detail("psi_coefficient", json!(format(&psi)));
    audit.detail("evaluation_tension", json!(crate::stackcalc::evaluation_tension()));
    audit
}

/// `ε̄^(0,2)(τ•) = -1/4·[pt/Gₘ]` and `Ψ̃(ε̄^(0,2)(τ•)) = -1/4·λ̃^(0,2)`.
pub fn verify_stack_reduction() -> Audit {
    verify_stack_reduction_with(&Gl2Splitting::default())
}

/// All multisets of size `<= max` drawn from `pool`, in lexicographic order.
pub fn multisets(pool: &[ChernClass], max: usize) -> Vec<Vec<ChernClass>> {
    let mut out = Vec::new();
    fn rec(pool: &[ChernClass], start: usize, left: usize, cur: &mut Vec<ChernClass>, out: &mut Vec<Vec<ChernClass>>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i].clone());
            rec(pool, i, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(pool, 0, max, &mut Vec::new(), &mut out);
    out
}

fn flat_nested_pools() -> Vec<(Lattice, Vec<ChernClass>)> {
    vec![
        (Lattice { rank: 1 }, vec![ChernClass(vec![1]), ChernClass(vec![2])]),
        (
            Lattice { rank: 2 },
            vec![ChernClass(vec![1, 0]), ChernClass(vec![0, 1]), ChernClass(vec![1, 1])],
        ),
    ]
}

/// Flat `U`-weighted assembly against nested brackets, summed over orderings.
pub fn verify_flat_nested(ranks: &[u32], max_parts: usize) -> Audit {
    let mut audit = Audit::new(&format!(
        "flat_vs_nested_d{}",
        ranks.iter().map(u32::to_string).collect::<Vec<_>>().join("_")
    ));
    let jobs: Vec<(Lattice, u32, Vec<ChernClass>)> = flat_nested_pools()
        .into_iter()
        .flat_map(|(lat, pool)| {
            multisets(&pool, max_parts)
                .into_iter()
                .flat_map(move |ms| ranks.iter().map(move |&d| (lat, d, ms.clone())))
        })
        .collect();
    let results: Vec<(bool, String)> = jobs
        .par_iter()
        .map(|(lat, d, parts)| {
            let r = compare_flat_nested(lat, *d, parts).expect("valid parts");
            let names: Vec<String> = parts.iter().map(ToString::to_string).collect();
            (r.identical, format!("d={d} parts=[{}]: difference {}", names.join(","), r.difference))
        })
        .collect();
    audit.merge_checks(results);
    audit.detail("max_parts", json!(max_parts));
    audit.detail("multisets", json!(jobs.len()));
    audit
}

fn random_class(rng: &mut ChaCha8Rng, rank: usize) -> NumClass {
    loop {
        let beta = ChernClass((0..rank).map(|_| rng.gen_range(0..=2)).collect());
        let c = NumClass::new(beta, rng.gen_range(0..=2));
        if c.in_positive_cone() {
            return c;
        }
    }
}

fn random_element(rng: &mut ChaCha8Rng, rank: usize) -> LieElement {
    let mut e = LieElement::zero();
    for _ in 0..rng.gen_range(1..=3) {
        let c = ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3));
        e.add_term(random_class(rng, rank), c);
    }
    e
}

pub fn random_pairing(rng: &mut ChaCha8Rng, lattice: &Lattice, explicit: bool) -> EulerPairing {
    if explicit {
        let size = lattice.rank + 1;
        let mut m = vec![vec![0i64; size]; size];
        for i in 0..size {
            for j in i + 1..size {
                let v = rng.gen_range(-3..=3);
                m[i][j] = v;
                m[j][i] = -v;
            }
        }
        EulerPairing::ExplicitTable(m)
    } else {
        EulerPairing::GeometricLinear((0..lattice.rank).map(|_| rng.gen_range(-3..=3)).collect())
    }
}

/// Antisymmetry and Jacobi of `bracket` on random triples, both pairing modes.
pub fn verify_lie_laws_with<B>(instances: usize, seed: u64, bracket: B) -> Audit
where
    B: Fn(&LieElement, &LieElement, &EulerPairing, &ClassSet) -> LieElement,
{
    let mut audit = Audit::new("lie_laws");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set = ClassSet::new(ChernClass(vec![8, 8]), 8);
    let lattice = Lattice { rank: 2 };
    let mut jacobi_failures = 0usize;
    for explicit in [false, true] {
        let mode = if explicit { "explicit_table" } else { "geometric_linear" };
        for i in 0..instances {
            let p = random_pairing(&mut rng, &lattice, explicit);
            let x = random_element(&mut rng, 2);
            let y = random_element(&mut rng, 2);
            let z = random_element(&mut rng, 2);
            let xy = bracket(&x, &y, &p, &set);
            let yx = bracket(&y, &x, &p, &set);
            audit.check(xy.add(&yx).is_zero(), || format!("{mode} #{i}: antisymmetry fails"));
            let j = bracket(&xy, &z, &p, &set)
                .add(&bracket(&bracket(&y, &z, &p, &set), &x, &p, &set))
                .add(&bracket(&bracket(&z, &x, &p, &set), &y, &p, &set));
            if !j.is_zero() {
                jacobi_failures += 1;
            }
            audit.check(j.is_zero(), || format!("{mode} #{i}: Jacobi defect {j}"));
        }
    }
    audit.detail("instances_per_mode", json!(instances));
    audit.detail("jacobi_failures", json!(jacobi_failures));
    audit
}

pub fn verify_lie_laws(instances: usize, seed: u64) -> Audit {
    verify_lie_laws_with(instances, seed, |x, y, p, s| {
        lie_bracket(x, y, p, s).expect("small pairing values")
    })
}

/// Sheaf classes from which the agreement sweep draws DT supports, with their DT values.
pub fn sweep_pool() -> Vec<(ChernClass, Rational)> {
    vec![
        (ChernClass(vec![1, 0]), int(1)),
        (ChernClass(vec![0, 1]), ratio(-1, 2)),
        (ChernClass(vec![1, 1]), ratio(3, 4)),
        (ChernClass(vec![2, 0]), int(2)),
    ]
}

fn subsets<T: Clone>(items: &[T], max: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    for mask in 1usize..1 << items.len() {
        if mask.count_ones() as usize <= max {
            out.push((0..items.len()).filter(|i| mask >> i & 1 == 1).map(|i| items[i].clone()).collect());
        }
    }
    out
}

/// Instances, decomposition terms and `(length, |L|, message)` disagreements for one functional.
type SweepChunk = (usize, usize, Vec<(usize, i64, String)>);

#[derive(Clone, Debug, Serialize)]
pub struct SweepBounds {
    pub l_abs_max: i64,
    pub support_max: usize,
    pub length_max: usize,
}

impl Default for SweepBounds {
    fn default() -> Self {
        SweepBounds { l_abs_max: 3, support_max: 3, length_max: 4 }
    }
}

/// Closed form against bracket evaluation over every integer functional with `|L_i| <= bound`,
/// every DT support drawn from [`sweep_pool`], and every target below `(2,2)`.
pub fn verify_bss_agreement(bounds: &SweepBounds) -> Audit {
    let mut audit = Audit::new("closed_form_vs_bracket");
    let lattice = Lattice { rank: 2 };
    let supports = subsets(&sweep_pool(), bounds.support_max);
    let targets: Vec<ChernClass> = (0..=2)
        .flat_map(|a| (0..=2).map(move |b| ChernClass(vec![a, b])))
        .filter(ChernClass::is_effective)
        .collect();
    let r = bounds.l_abs_max;
    let functionals: Vec<Vec<i64>> = (-r..=r).flat_map(|a| (-r..=r).map(move |b| vec![a, b])).collect();

    let results: Vec<SweepChunk> = functionals
        .par_iter()
        .map(|l| {
            let p = EulerPairing::GeometricLinear(l.clone());
            let mut instances = 0;
            let mut terms = 0;
            let mut bad = Vec::new();
            for support in &supports {
                let dt = DtTable::new(&lattice, support.iter().cloned()).expect("effective pool");
                for beta in &targets {
                    let decs = enumerate_decompositions(beta, &dt.support());
                    if decs.is_empty() || decs.iter().any(|d| d.len() > bounds.length_max) {
                        continue;
                    }
                    instances += 1;
                    let res = bss(beta, &dt, &p).expect("valid instance");
                    terms += res.per_decomposition.len();
                    if let Some(c) = res.first_disagreement() {
                        let parts: Vec<String> = c.parts.iter().map(ToString::to_string).collect();
                        bad.push((
                            c.parts.len(),
                            l.iter().map(|x| x.abs()).sum::<i64>(),
                            format!(
                                "L={l:?} beta={beta} parts=[{}]: closed {} vs bracket {}",
                                parts.join(","),
                                format(&c.closed_form),
                                format(&c.bracket_eval)
                            ),
                        ));
                    }
                }
            }
            (instances, terms, bad)
        })
        .collect();

    let mut instances = 0;
    let mut terms = 0;
    let mut bad: Vec<(usize, i64, String)> = Vec::new();
    for (i, t, b) in results {
        instances += i;
        terms += t;
        bad.extend(b);
    }
    bad.sort();
    audit.checks = instances;
    audit.failure_count = bad.len();
    audit.passed = bad.is_empty();
    audit.failures = bad.iter().take(MAX_REPORTED).map(|b| b.2.clone()).collect();
    audit.detail("instances", json!(instances));
    audit.detail("decomposition_terms", json!(terms));
    audit.detail("bounds", json!(bounds));
    audit.detail(
        "minimal_counterexample",
        bad.first().map_or(Value::Null, |b| json!(b.2)),
    );
    audit
}

/// Rank-1 flat/nested agreement, closed form against brackets, and degree-`l` homogeneity
/// of each length-`l` contribution in the DT values.
pub fn verify_rank1(max_parts: usize) -> Audit {
    let mut audit = Audit::new("rank1_pipeline");
    let mut ms = 0;
    for (lat, pool) in flat_nested_pools() {
        for parts in multisets(&pool, max_parts) {
            ms += 1;
            let r = compare_flat_nested(&lat, 1, &parts).expect("valid parts");
            audit.check(r.identical, || format!("rank-1 flat/nested differ on {parts:?}: {}", r.difference));
        }
    }
    let lattice = Lattice { rank: 2 };
    let scalings = [int(2), ratio(-1, 3)];
    let beta = ChernClass(vec![2, 1]);
    for support in subsets(&sweep_pool(), 3) {
        let dt = DtTable::new(&lattice, support).expect("effective pool");
        for l in [vec![1, 2], vec![-3, 1], vec![2, -2]] {
            let p = EulerPairing::GeometricLinear(l.clone());
            let base = pair_invariant_rank1(&beta, &dt, &p).expect("valid instance");
            audit.check(base.agree, || format!("rank-1 closed form != bracket for L={l:?}"));
            for t in &scalings {
                let scaled = pair_invariant_rank1(&beta, &dt.scaled(t), &p).expect("valid instance");
                for (a, b) in base.per_decomposition.iter().zip(&scaled.per_decomposition) {
                    let factor = num_traits::pow(t.clone(), a.parts.len());
                    audit.check(b.bracket_eval == &a.bracket_eval * &factor, || {
                        format!("homogeneity fails for {:?} at t={}", a.parts, format(t))
                    });
                }
            }
        }
    }
    audit.detail("multisets", json!(ms));
    audit
}

#[derive(Clone, Debug, Serialize)]
pub struct Bounds {
    pub n_max: usize,
    pub l_max: usize,
    pub flat_max_parts: usize,
    pub rank1_max_parts: usize,
    pub lie_instances: usize,
    pub seed: u64,
    pub sweep: SweepBounds,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            n_max: 8,
            l_max: 5,
            flat_max_parts: 4,
            rank1_max_parts: 3,
            lie_instances: 100,
            seed: 0x5eed,
            sweep: SweepBounds::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub passed: bool,
    pub bounds: Bounds,
    pub audits: Vec<Audit>,
    pub failures: Vec<String>,
}

impl Summary {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for a in &self.audits {
            let status = if a.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} {} ({} checks)\n", a.name, a.checks));
            for f in &a.failures {
                out.push_str(&format!("    {f}\n"));
            }
        }
        out.push_str(if self.passed { "all audits passed\n" } else { "audits FAILED\n" });
        out
    }
}

pub fn selfcheck_all(bounds: &Bounds) -> Summary {
    let audits = vec![
        verify_lemma_ub(bounds.n_max),
        verify_e1_coefficients(bounds.l_max),
        verify_stack_reduction(),
        verify_flat_nested(&[1, 2], bounds.flat_max_parts),
        verify_lie_laws(bounds.lie_instances, bounds.seed),
        verify_bss_agreement(&bounds.sweep),
        verify_rank1(bounds.rank1_max_parts),
    ];
    let failures: Vec<String> = audits
        .iter()
        .flat_map(|a| a.failures.iter().map(move |f| format!("{}: {f}", a.name)))
        .collect();
    Summary { passed: audits.iter().all(|a| a.passed), bounds: bounds.clone(), audits, failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_counts() {
        let pool = [ChernClass(vec![1]), ChernClass(vec![2]), ChernClass(vec![3])];
        // 1 + 3 + 6 multisets of sizes 0, 1, 2.
        assert_eq!(multisets(&pool, 2).len(), 10);
        assert_eq!(subsets(&pool, 2).len(), 6);
    }

    #[test]
    fn small_two_vector_sweep_passes() {
        let a = verify_lemma_ub(5);
        assert!(a.passed, "{:?}", a.failures);
        assert_eq!(a.details["placements"], json!(1 + 3 + 6 + 10));
    }

    #[test]
    fn e1_verdict() {
        let a = verify_e1_coefficients(4);
        assert!(a.passed);
        assert_eq!(a.details["matching_form"], json!(E1Form::KFactorial.name()));
    }

    #[test]
    fn wrong_splitting_value_is_detected() {
        let bad = Gl2Splitting { full_torus: ratio(1, 2), diagonal: ratio(-1, 2) };
        assert!(!verify_stack_reduction_with(&bad).passed);
        assert!(verify_stack_reduction().passed);
    }

    #[test]
    fn sign_fault_in_bracket_is_detected_by_jacobi() {
        // Replace (-1)^χ̄ by (-1)^d of the left argument.
        let faulty = |x: &LieElement, y: &LieElement, p: &EulerPairing, s: &ClassSet| {
            let mut out = LieElement::zero();
            for (a, ca) in x.terms() {
                for (b, cb) in y.terms() {
                    let sum = a + b;
                    if !s.contains(&sum) {
                        continue;
                    }
                    let chi = p.chi(a, b).unwrap();
                    let k = crate::rational::sign(i64::from(a.d)) * int(chi as i64);
                    out.add_term(sum, k * ca * cb);
                }
            }
            out
        };
        let a = verify_lie_laws_with(50, 7, faulty);
        assert!(!a.passed);
        assert!(a.details["jacobi_failures"].as_u64().unwrap() > 0);
        assert!(verify_lie_laws(50, 7).passed);
    }
}
