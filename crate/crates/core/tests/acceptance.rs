//! Acceptance run: one line per criterion, nonzero exit if any criterion fails.
//!
//! Built with `harness = false` so the summary lines are always printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use loopzip::coset::{embedding_fibers, k1_invariance, rescale_check, verify_psi_bijection, witt_verify_bijection};
use loopzip::gf::FieldSpec;
use loopzip::grpdata::{lemma_checks, Cocharacter};
use loopzip::orbits::{beta_transport, chain_compare, distinct_reps_check};
use loopzip::report::Check;
use loopzip::suites::{run, Suite, SuiteConfig};
use loopzip::weyl::{
    bruhat_leq, bruhat_leq_subword, bruhat_poset, epsilon_maps, min_coset_reps, parabolic_subgroup, pwz_order, Perm, Which,
};
use loopzip::witt::{integer_selftest, WittCtx};
use loopzip::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod common;

/// Configurations of the psi-bijection criterion: (q, weights).
const BIJECTION_CONFIGS: [(usize, &[i32]); 4] = [(2, &[1, 0]), (2, &[2, 0]), (3, &[1, 0]), (2, &[1, 1, 0])];
const SAMPLES: usize = 500;

fn mu(w: &[i32]) -> Cocharacter {
    Cocharacter::new(w.to_vec()).unwrap()
}

fn field(q: usize) -> &'static FieldSpec {
    FieldSpec::for_order(q).unwrap()
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xacce_0000 + tag)
}

/// Outcome of one criterion: pass flag plus a short summary.
struct Outcome {
    pass: bool,
    summary: String,
}

impl Outcome {
    fn from_checks(checks: &[Check]) -> Outcome {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        Outcome {
            pass: failed.is_empty() && !checks.is_empty(),
            summary: if failed.is_empty() {
                format!("{} checks", checks.len())
            } else {
                format!("{} of {} checks failed: {}", failed.len(), checks.len(), failed.join(", "))
            },
        }
    }
}

type Criterion = fn() -> Result<Outcome>;

fn bijection() -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut slowest = Duration::ZERO;
    for (i, (q, w)) in BIJECTION_CONFIGS.iter().enumerate() {
        let start = Instant::now();
        let r = verify_psi_bijection(&mu(w), field(*q), 6, 100, &mut rng(i as u64))?;
        let took = start.elapsed();
        slowest = slowest.max(took);
        let exact = r.orbit_count == r.class_count && r.roundtrip_failures == 0;
        checks.push(Check::new(format!("psi.{}.q{q}", mu(w)), r.injective && r.surjective && exact && took < Duration::from_secs(60)));
    }
    let mut o = Outcome::from_checks(&checks);
    o.summary += &format!(", slowest {:.2}s", slowest.as_secs_f64());
    Ok(o)
}

fn lemmas() -> Result<Outcome> {
    let start = Instant::now();
    let mut checks = Vec::new();
    for prec in 1..=3 {
        let cs = lemma_checks(&mu(&[1, 0]), field(2), prec, SAMPLES, u64::MAX, &mut rng(10 + prec as u64))?;
        for c in cs {
            let exhaustive = !c.name.starts_with("integrality") || c.counts.get("exhaustive") == Some(&1);
            checks.push(Check::new(format!("{}.prec{prec}", c.name), c.pass && exhaustive));
        }
    }
    for (q, w) in [(2, &[1, 1, 0][..]), (2, &[1, 0, 0]), (3, &[1, 0])] {
        let cs = lemma_checks(&mu(w), field(q), 6, SAMPLES, 1 << 12, &mut rng(20 + q as u64))?;
        checks.extend(cs.into_iter().map(|c| Check::new(format!("{}.{}.q{q}", c.name, mu(w)), c.pass)));
    }
    let minuscule = lemma_checks(&mu(&[1, 0]), field(2), 6, SAMPLES, 1 << 12, &mut rng(30))?;
    checks.push(Check::new("minuscule_equality", minuscule.iter().any(|c| c.name == "h_inclusion.minuscule_equality" && c.pass)));
    let wide = lemma_checks(&mu(&[2, 0]), field(2), 6, SAMPLES, 1 << 12, &mut rng(31))?;
    checks.push(Check::new("non_minuscule_witness", wide.iter().any(|c| c.name == "h_inclusion.non_minuscule_witness" && c.pass)));
    checks.extend(wide.into_iter().filter(|c| c.name.starts_with("integrality")));
    checks.push(Check::new("time", start.elapsed() < Duration::from_secs(30)));
    Ok(Outcome::from_checks(&checks))
}

fn k1_bi_invariance() -> Result<Outcome> {
    let mut checks = Vec::new();
    for (i, (q, w)) in BIJECTION_CONFIGS.iter().enumerate() {
        let c = k1_invariance(&mu(w), field(*q), 6, SAMPLES, &mut rng(40 + i as u64))?;
        let trials_ok = c.counts.get("trials").copied().unwrap_or(0) >= SAMPLES as i64;
        checks.push(Check::new(c.name.clone(), c.pass && trials_ok));
    }
    Ok(Outcome::from_checks(&checks))
}

fn rescaling() -> Result<Outcome> {
    let checks = vec![rescale_check(&mu(&[1, 0]), field(2), &[2, 3], 6)?, rescale_check(&mu(&[1, -1]), field(2), &[2, 3], 6)?];
    Ok(Outcome::from_checks(&checks))
}

fn mixed_characteristic() -> Result<Outcome> {
    let start = Instant::now();
    let mut checks = witt_verify_bijection(&mu(&[1, 0]), field(2), 3, SAMPLES, &mut rng(50))?;
    let mut r = rng(51);
    for p in [2u8, 3] {
        let f = FieldSpec::get(p, 1)?;
        for len in 1..=4 {
            let ctx = WittCtx::get(f, len)?;
            let mut bad = 0;
            for _ in 0..SAMPLES {
                let (a, b) = (ctx.random(&mut r), ctx.random(&mut r));
                bad += common::mismatches(&a, &b, p as u32);
            }
            checks.push(Check::new(format!("ghost.p{p}.N{len}"), bad == 0).count("cases", SAMPLES).count("mismatches", bad));
            let s = integer_selftest(p, len, SAMPLES, &mut r)?;
            checks.push(Check::new(format!("integer_model.p{p}.N{len}"), s.mismatches == 0 && s.cases >= SAMPLES));
        }
    }
    checks.push(Check::new("time", start.elapsed() < Duration::from_secs(60)));
    Ok(Outcome::from_checks(&checks))
}

fn embeddings() -> Result<Outcome> {
    let mut checks = Vec::new();
    for (q, w) in BIJECTION_CONFIGS {
        checks.extend(embedding_fibers(&mu(w), field(q))?);
    }
    Ok(Outcome::from_checks(&checks))
}

fn zip_transport() -> Result<Outcome> {
    let start = Instant::now();
    let mut checks = Vec::new();
    for q in [2, 4] {
        checks.extend(chain_compare(&mu(&[1, 0]), field(q), 1)?);
        checks.extend(beta_transport(&mu(&[1, 0]), field(q), 1, 200, &mut rng(60 + q as u64))?);
    }
    checks.push(Check::new("time", start.elapsed() < Duration::from_secs(60)));
    Ok(Outcome::from_checks(&checks))
}

fn weyl_layer() -> Result<Outcome> {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut disagree = 0usize;
    for n in 1..=4 {
        let all = Perm::all(n);
        for u in &all {
            for w in &all {
                disagree += usize::from(bruhat_leq(u, w) != bruhat_leq_subword(u, w));
            }
        }
    }
    checks.push(Check::new("bruhat_vs_subword", disagree == 0));

    // Every J for n <= 4: coset counts, poset axioms (enforced on construction), degeneration at J = {}.
    for n in 1..=4usize {
        for mask in 0u32..(1 << (n - 1)) {
            let j: Vec<usize> = (1..n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            let wj = parabolic_subgroup(n, &j)?.len();
            let reps = min_coset_reps(n, &j, true)?.len();
            checks.push(Check::new(format!("coset_count.n{n}.J{j:?}"), reps * wj == Perm::all(n).len()));
            for twist in [Perm::identity(n), Perm::longest(n)] {
                pwz_order(n, &j, &twist)?;
            }
        }
        let flat = pwz_order(n, &[], &Perm::identity(n))?;
        checks.push(Check::new(format!("pwz_degenerates.n{n}"), flat.leq == bruhat_poset(n, &[])?.leq));
    }

    for (q, w) in BIJECTION_CONFIGS {
        let m = mu(w);
        let reps = min_coset_reps(m.n(), &m.j_set(), true)?;
        for which in [Which::Eps1, Which::Eps2] {
            let images: std::collections::BTreeSet<Perm> =
                reps.iter().map(|r| epsilon_maps(r, &m, which).map(|l| l.perm)).collect::<Result<_>>()?;
            checks.push(Check::new(format!("eps_injective.{m}.{which:?}"), images.len() == reps.len()));
        }
        checks.extend(distinct_reps_check(&m, field(q))?);
    }
    checks.push(Check::new("time", start.elapsed() < Duration::from_secs(30)));
    Ok(Outcome::from_checks(&checks))
}

fn determinism() -> Result<Outcome> {
    let mut checks = Vec::new();
    for (q, w, seed) in [(2, &[1, 0][..], 0u64), (2, &[1, 0], 17), (3, &[1, 0], 3), (2, &[1, 1, 0], 5)] {
        let mut cfg = SuiteConfig::new(mu(w), q);
        cfg.seed = seed;
        cfg.samples = 60;
        for s in Suite::ALL {
            let a = run(&[s], &cfg)?.to_json_pretty();
            let b = run(&[s], &cfg)?.to_json_pretty();
            checks.push(Check::new(format!("{}.{}.q{q}.seed{seed}", s.name(), mu(w)), a == b));
        }
    }
    Ok(Outcome::from_checks(&checks))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("psi bijection", bijection),
        ("lemma suite", lemmas),
        ("K1 bi-invariance", k1_bi_invariance),
        ("rescaling", rescaling),
        ("mixed characteristic", mixed_characteristic),
        ("embeddings", embeddings),
        ("zip-stack transport and chain", zip_transport),
        ("Weyl layer", weyl_layer),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f().unwrap_or_else(|e| Outcome { pass: false, summary: format!("error: {e}") });
        failures += usize::from(!outcome.pass);
        println!(
            "criterion {} {:<30} {} ({}; {:.2}s)",
            i + 1,
            name,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.summary,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
