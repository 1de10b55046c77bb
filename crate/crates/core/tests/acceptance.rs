use std::process::Command;
use std::time::{Duration, Instant};

use bp_wallcross::coefficients::E1Form;
use bp_wallcross::verify::{
    verify_bss_agreement, verify_e1_coefficients, verify_flat_nested, verify_lemma_ub, verify_lie_laws,
    verify_rank1, verify_stack_reduction, Audit, SweepBounds,
};

struct Line {
    id: usize,
    name: &'static str,
    ok: bool,
    note: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn summary(a: &Audit) -> String {
    match a.failures.first() {
        Some(f) => format!("{} checks, {} failures, first: {f}", a.checks, a.failure_count),
        None => format!("{} checks", a.checks),
    }
}

fn criterion_1() -> Line {
    let (a, t) = timed(|| verify_lemma_ub(8));
    let sequences = a.details["labeled_sequences"].as_u64().unwrap_or(0);
    Line {
        id: 1,
        name: "two-vector coefficients vanish for n <= 8, case sums exact",
        ok: a.passed && sequences >= 2000 && t < Duration::from_secs(60),
        note: format!("{}, {sequences} sequences, {t:.2?}", summary(&a)),
    }
}

fn criterion_2() -> Line {
    let a = verify_e1_coefficients(5);
    let named = a.details["matching_form"].as_str().unwrap_or("none").to_string();
    let stable = a.details["rows"].as_array().is_some_and(|rows| {
        rows.iter().all(|r| r["matching_forms"].as_array().is_some_and(|f| f.iter().any(|x| x == named.as_str())))
    });
    Line {
        id: 2,
        name: "single (0,2) coefficient table matches one closed form uniformly",
        ok: a.passed && stable && named == E1Form::KFactorial.name(),
        note: format!("{}, form {named}", summary(&a)),
    }
}

fn criterion_3() -> Line {
    let a = verify_flat_nested(&[1, 2], 4);
    Line { id: 3, name: "flat and nested assemblies agree, d in {1,2}, <= 4 parts", ok: a.passed, note: summary(&a) }
}

fn criterion_4() -> Line {
    let (a, t) = timed(verify_stack_reduction);
    Line {
        id: 4,
        name: "stack reduction gives -1/4 [pt/Gm] and -1/4 lambda^(0,2)",
        ok: a.passed && t < Duration::from_secs(1),
        note: format!("{}, {t:.2?}", summary(&a)),
    }
}

fn criterion_5() -> Line {
    let a = verify_lie_laws(100, 0x5eed);
    Line {
        id: 5,
        name: "antisymmetry and Jacobi, 100 random instances per pairing mode",
        ok: a.passed && a.checks >= 400,
        note: summary(&a),
    }
}

fn criterion_6() -> Line {
    let (a, t) = timed(|| verify_bss_agreement(&SweepBounds::default()));
    let instances = a.details["instances"].as_u64().unwrap_or(0);
    Line {
        id: 6,
        name: "closed form equals bracket evaluation, |L| <= 3, support <= 3, length <= 4",
        ok: a.passed && instances >= 300 && t < Duration::from_secs(120),
        note: format!("{}, minimal counterexample {}, {t:.2?}", summary(&a), a.details["minimal_counterexample"]),
    }
}

fn criterion_7() -> Line {
    let a = verify_rank1(3);
    Line { id: 7, name: "rank-1 assemblies agree and are homogeneous per length", ok: a.passed, note: summary(&a) }
}

fn criterion_8() -> Line {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_bp-wallcross"))
            .args(["verify", "--json"])
            .env_remove(bp_wallcross::cli::CONFIG_ENV)
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let ok = a.status.success() && b.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;
    Line {
        id: 8,
        name: "two runs of verify --json are byte-identical",
        ok,
        note: format!("{} bytes, exit {:?}/{:?}", a.stdout.len(), a.status.code(), b.status.code()),
    }
}

fn main() {
    let lines = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ];
    for l in &lines {
        println!("{} criterion {}: {} ({})", if l.ok { "PASS" } else { "FAIL" }, l.id, l.name, l.note);
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.ok).map(|l| l.id).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: 8/8 criteria passed");
}
