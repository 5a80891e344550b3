//! Named verification suites producing deterministic reports.
//!
//! Each suite draws from its own ChaCha8 stream derived from the seed, so a suite's
//! report does not depend on which other suites run alongside it.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coset::{
    census_budget, embedding_fibers, k1_invariance, prozip_invariance, psi_budget, rescale_check, verify_psi_bijection,
    witt_required_length, witt_verify_bijection,
};
use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::grpdata::{lemma_checks, zip_rescale_check, Cocharacter};
use crate::orbits::{action_axioms, beta_transport, chain_compare, distinct_reps_check, ActionKind, ActionSpec};
use crate::report::{Check, Report, SuiteReport};
use crate::weyl::{
    bruhat_leq, bruhat_leq_subword, bruhat_poset, epsilon_maps, longest_element, min_coset_reps, parabolic_subgroup, pwz_order, Perm, Which,
};
use crate::witt::integer_selftest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Lemmas,
    Psi,
    Witt,
    Chain,
    Weyl,
    Prozip,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Lemmas, Suite::Psi, Suite::Witt, Suite::Chain, Suite::Weyl, Suite::Prozip];

    /// Parses `all` or a comma-separated list of suite names, keeping first occurrences.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim) {
            let picked = match part {
                "all" => Suite::ALL.to_vec(),
                other => {
                    vec![*Suite::ALL.iter().find(|x| x.name() == other).ok_or_else(|| Error::Parse(format!("unknown suite {other:?}")))?]
                }
            };
            for x in picked {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        Ok(out)
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemmas => "lemmas",
            Suite::Psi => "psi",
            Suite::Witt => "witt",
            Suite::Chain => "chain",
            Suite::Weyl => "weyl",
            Suite::Prozip => "prozip",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub mu: Cocharacter,
    pub q: usize,
    pub prec: i32,
    pub seed: u64,
    pub samples: usize,
    /// `tau = sigma^tau` in the chain suite.
    pub tau: i64,
}

impl SuiteConfig {
    pub fn new(mu: Cocharacter, q: usize) -> Self {
        SuiteConfig { mu, q, prec: 6, seed: 0, samples: 500, tau: 1 }
    }

    fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("n".into(), self.mu.n().to_string());
        m.insert("q".into(), self.q.to_string());
        m.insert("mu".into(), self.mu.to_string());
        m.insert("prec".into(), self.prec.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("samples".into(), self.samples.to_string());
        m.insert("tau".into(), self.tau.to_string());
        m
    }

    fn rng(&self, suite: Suite) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(suite as u64 + 1);
        r
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn lemmas(cfg: &SuiteConfig, spec: &'static FieldSpec, notes: &mut BTreeMap<String, String>) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(Suite::Lemmas);
    let mut out = lemma_checks(&cfg.mu, spec, cfg.prec, cfg.samples, 1 << 12, &mut rng)?;
    if cfg.mu.n() <= 3 && spec.q() <= 9 {
        out.push(zip_rescale_check(&cfg.mu, spec, &[2, 3])?);
    } else {
        notes.insert("zip_rescale".into(), "skipped: enumeration needs n <= 3 and q <= 9".into());
    }
    Ok(out)
}

fn psi(cfg: &SuiteConfig, spec: &'static FieldSpec) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(Suite::Psi);
    let tag = format!("{}.q{}", cfg.mu, spec.q());
    let mut out =
        vec![verify_psi_bijection(&cfg.mu, spec, cfg.prec, cfg.samples.min(100), &mut rng)?.check(&format!("psi.bijection.{tag}"))];
    out.push(k1_invariance(&cfg.mu, spec, cfg.prec, cfg.samples, &mut rng)?);
    out.push(rescale_check(&cfg.mu, spec, &[2, 3], cfg.prec)?);
    out.extend(embedding_fibers(&cfg.mu, spec)?);
    Ok(out)
}

fn witt(cfg: &SuiteConfig, spec: &'static FieldSpec, notes: &mut BTreeMap<String, String>) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(Suite::Witt);
    let mut out = Vec::new();
    for p in [2u8, 3] {
        for len in 1..=4 {
            let r = integer_selftest(p, len, cfg.samples, &mut rng)?;
            out.push(
                Check::new(format!("witt.integer_model.p{p}.N{len}"), r.mismatches == 0)
                    .count("cases", r.cases)
                    .count("mismatches", r.mismatches),
            );
        }
    }
    let len = witt_required_length(&cfg.mu);
    let fits = matches!(spec.p(), 2 | 3) && cfg.mu.weights().iter().all(|d| d.abs() <= 1) && cfg.mu.n() <= 3 && spec.q() <= 4;
    match fits.then(|| witt_verify_bijection(&cfg.mu, spec, len, cfg.samples.min(100), &mut rng)) {
        Some(Ok(checks)) => out.extend(checks),
        Some(Err(Error::BudgetExceeded(m))) => {
            notes.insert("witt_census".into(), format!("skipped: {m}"));
        }
        Some(Err(e)) => return Err(e),
        None => {
            notes.insert("witt_census".into(), "skipped: needs p in {2,3}, |d_i| <= 1, n <= 3, q <= 4".into());
        }
    }
    Ok(out)
}

fn chain(cfg: &SuiteConfig, spec: &'static FieldSpec) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(Suite::Chain);
    let mut out = Vec::new();
    let taus: BTreeSet<i64> = [0, cfg.tau].into_iter().collect();
    for &m in &taus {
        out.extend(chain_compare(&cfg.mu, spec, m)?);
    }
    out.extend(beta_transport(&cfg.mu, spec, cfg.tau, cfg.samples.min(200), &mut rng)?);
    for kind in [ActionKind::ZipNormal, ActionKind::ZipFrobenius, ActionKind::PartialFrobenius, ActionKind::SigmaConjClasses] {
        out.push(action_axioms(&ActionSpec::new(kind, cfg.mu.clone(), spec, cfg.tau), 50, &mut rng)?);
    }
    Ok(out)
}

fn weyl(cfg: &SuiteConfig, spec: &'static FieldSpec, notes: &mut BTreeMap<String, String>) -> Result<Vec<Check>> {
    let mu = &cfg.mu;
    let n = mu.n();
    let j = mu.j_set();
    let mut out = Vec::new();

    let (mut pairs, mut disagree) = (0usize, 0usize);
    for k in 1..=4 {
        let all = Perm::all(k);
        for u in &all {
            for w in &all {
                pairs += 1;
                disagree += usize::from(bruhat_leq(u, w) != bruhat_leq_subword(u, w));
            }
        }
    }
    out.push(Check::new("weyl.bruhat_vs_subword.n_le_4", disagree == 0).count("pairs", pairs).count("disagreements", disagree));

    let left = min_coset_reps(n, &j, true)?;
    let right = min_coset_reps(n, &j, false)?;
    let wj = parabolic_subgroup(n, &j)?;
    let expected = factorial(n) / mu.block_sizes().iter().map(|&b| factorial(b)).product::<usize>();
    let w0j = longest_element(n, &j)?;
    let w0j_longest = wj.iter().all(|y| y.length() <= w0j.length()) && wj.contains(&w0j);
    out.push(
        Check::new(
            format!("weyl.coset_reps.{mu}"),
            left.len() == expected && right.len() == expected && left.len() * wj.len() == factorial(n) && w0j_longest,
        )
        .count("left_reps", left.len())
        .count("right_reps", right.len())
        .count("parabolic_order", wj.len())
        .count("expected", expected),
    );

    let e = Perm::identity(n);
    let pwz = pwz_order(n, &j, &e)?;
    let id = pwz.index_of(&e).expect("identity is a minimal representative");
    let id_min = (0..pwz.len()).all(|k| pwz.leq[id][k]);
    let degenerate = pwz_order(n, &[], &e)?.leq == bruhat_poset(n, &[])?.leq;
    out.push(
        Check::new(format!("weyl.pwz_order.{mu}"), id_min && degenerate)
            .count("elements", pwz.len())
            .count("covers", pwz.covers().len())
            .count("relations", pwz.leq.iter().flatten().filter(|&&b| b).count()),
    );

    let e1: BTreeSet<Perm> = left.iter().map(|w| epsilon_maps(w, mu, Which::Eps1).map(|l| l.perm)).collect::<Result<_>>()?;
    let e2: BTreeSet<Perm> = left.iter().map(|w| epsilon_maps(w, mu, Which::Eps2).map(|l| l.perm)).collect::<Result<_>>()?;
    out.push(
        Check::new(format!("weyl.eps_injective.{mu}"), e1.len() == left.len() && e2.len() == left.len())
            .count("coset_reps", left.len())
            .count("eps1_images", e1.len())
            .count("eps2_images", e2.len()),
    );
    let mut conj_bad = 0usize;
    for w in &left {
        let a = epsilon_maps(w, mu, Which::Eps1)?.perm;
        let b = epsilon_maps(w, mu, Which::Eps2)?.perm;
        conj_bad += usize::from(w0j.inverse().compose(&b).compose(&w0j) != a);
    }
    out.push(
        Check::new(format!("weyl.eps_levi_conjugate.{mu}"), conj_bad == 0).count("coset_reps", left.len()).count("failures", conj_bad),
    );

    if n <= 3 && spec.q() <= 4 {
        match distinct_reps_check(mu, spec) {
            Ok(c) => out.extend(c),
            Err(Error::BudgetExceeded(m)) => {
                notes.insert("eps_sigma_orbits".into(), format!("skipped: {m}"));
            }
            Err(e) => return Err(e),
        }
    } else {
        notes.insert("eps_sigma_orbits".into(), "skipped: needs n <= 3 and q <= 4".into());
    }
    Ok(out)
}

fn prozip(cfg: &SuiteConfig, spec: &'static FieldSpec) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(Suite::Prozip);
    Ok(vec![prozip_invariance(&cfg.mu, spec, cfg.prec, cfg.samples, &mut rng)?])
}

/// Largest rank for the Weyl suite, which enumerates all of `S_n`.
const WEYL_MAX_N: usize = 6;

/// Rejects configurations that some selected suite cannot run within budget.
pub fn preflight(suites: &[Suite], cfg: &SuiteConfig) -> Result<()> {
    let spec = FieldSpec::for_order(cfg.q)?;
    if cfg.prec < 1 {
        return Err(Error::Parse(format!("precision {} must be positive", cfg.prec)));
    }
    for s in suites {
        match s {
            Suite::Psi => psi_budget(&cfg.mu, spec)?,
            Suite::Chain => census_budget(&cfg.mu, spec)?,
            Suite::Weyl if cfg.mu.n() > WEYL_MAX_N => {
                return Err(Error::BudgetExceeded(format!("weyl suite needs n <= {WEYL_MAX_N}, got n = {}", cfg.mu.n())));
            }
            _ => {}
        }
    }
    Ok(())
}

/// Runs one suite. Budget and parse problems are errors, failed checks are not.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    preflight(&[suite], cfg)?;
    let spec = FieldSpec::for_order(cfg.q)?;
    let mut notes = BTreeMap::new();
    let checks = match suite {
        Suite::Lemmas => lemmas(cfg, spec, &mut notes)?,
        Suite::Psi => psi(cfg, spec)?,
        Suite::Witt => witt(cfg, spec, &mut notes)?,
        Suite::Chain => chain(cfg, spec)?,
        Suite::Weyl => weyl(cfg, spec, &mut notes)?,
        Suite::Prozip => prozip(cfg, spec)?,
    };
    let mut config = cfg.echo();
    for (k, v) in notes {
        config.insert(format!("note.{k}"), v);
    }
    Ok(SuiteReport::new(suite.name(), config, checks))
}

pub fn run(suites: &[Suite], cfg: &SuiteConfig) -> Result<Report> {
    preflight(suites, cfg)?;
    Ok(Report::new(suites.iter().map(|&s| run_suite(s, cfg)).collect::<Result<Vec<_>>>()?))
}
