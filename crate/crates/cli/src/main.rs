//! `loopzip` command-line front end.
//!
//! Exit codes: 0 all checks pass, 1 some check failed, 2 usage or configuration error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use loopzip::coset::census;
use loopzip::gf::FieldSpec;
use loopzip::grpdata::Cocharacter;
use loopzip::matring::{AnyMat, Dvr, Mat, MatJson};
use loopzip::orbits::{enumerate_orbits, ActionKind, ActionSpec};
use loopzip::suites::{run, Suite, SuiteConfig};
use loopzip::weyl::{pwz_order, Perm};
use loopzip::witt::integer_selftest;
use loopzip::Error;

#[derive(Parser)]
#[command(name = "loopzip", version, about = "Verification suites and censuses for loop-group double cosets and zip data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GroupArgs {
    /// Rank of GL_n.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Field order.
    #[arg(long, default_value_t = 2)]
    q: usize,
    /// Non-increasing weights, e.g. `1,0`; defaults to `1,0,...,0`.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
}

impl GroupArgs {
    fn cocharacter(&self) -> Result<Cocharacter, Error> {
        let mu = match &self.mu {
            Some(s) => Cocharacter::parse(s)?,
            None => Cocharacter::new((0..self.n).map(|i| i32::from(i == 0)).collect())?,
        };
        if mu.n() != self.n {
            return Err(Error::Parse(format!("--mu has {} weights but --n is {}", mu.n(), self.n)));
        }
        Ok(mu)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Twist {
    Identity,
    Longest,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and print a JSON report.
    Verify {
        #[command(flatten)]
        group: GroupArgs,
        /// Laurent precision N.
        #[arg(long, default_value_t = 6)]
        prec: i32,
        /// lemmas | psi | witt | chain | weyl | prozip | all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random samples per sampled check.
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// Frobenius power used by the chain suite.
        #[arg(long, default_value_t = 1)]
        tau: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Orbit census of a finite action, or of zip orbits on pairs with `--action double-cosets`.
    Orbits {
        #[command(flatten)]
        group: GroupArgs,
        /// zip-normal | zip-frobenius | partial-frobenius | sigma-conj | double-cosets
        #[arg(long, default_value = "zip-normal")]
        action: String,
        #[arg(long, default_value_t = 0)]
        tau: i64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smith normal form of a Laurent or Witt matrix read as JSON from standard input.
    Cartan {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The partial order on minimal coset representatives.
    Poset {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        #[arg(long, value_enum, default_value = "identity")]
        twist: Twist,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Witt arithmetic against the integer model Z/p^N.
    WittSelftest {
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Parse(format!("writing {}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Error::Parse(e.to_string()))
        }
    }
}

fn verify(group: GroupArgs, prec: i32, suite: String, seed: u64, samples: usize, tau: i64, out: Option<PathBuf>) -> Result<bool, Error> {
    let mu = group.cocharacter()?;
    let suites = Suite::parse_selection(&suite)?;
    let cfg = SuiteConfig { mu, q: group.q, prec, seed, samples, tau };
    let report = run(&suites, &cfg)?;
    for s in &report.suites {
        for c in &s.checks {
            eprintln!("{} {}/{}", if c.pass { "PASS" } else { "FAIL" }, s.suite, c.name);
        }
    }
    emit(&out, &(report.to_json_pretty() + "\n"))?;
    Ok(report.pass)
}

fn orbits(group: GroupArgs, action: String, tau: i64, format: Format, out: Option<PathBuf>) -> Result<bool, Error> {
    let mu = group.cocharacter()?;
    let spec = FieldSpec::for_order(group.q)?;
    let n = mu.n();
    let rows_of = |keys: &[u64]| -> serde_json::Value {
        let mats: Vec<_> = keys.iter().map(|&k| loopzip::matring::FqMat::from_key(spec, n, k).to_coeff_rows()).collect();
        if mats.len() == 1 {
            json!(mats[0])
        } else {
            json!(mats)
        }
    };
    let text = if action == "double-cosets" {
        let c = census(&mu, spec)?;
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["mu", "q", "rep_g", "rep_h", "orbit_size"]).map_err(csv_err)?;
                for r in &c.rows {
                    w.write_record([
                        mu.to_string(),
                        spec.q().to_string(),
                        r.class.g.serialize(),
                        r.class.h.serialize(),
                        r.size.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
                String::from_utf8(w.into_inner().map_err(|e| Error::Parse(e.to_string()))?).unwrap()
            }
            Format::Json => {
                let rows: Vec<_> = c.rows.iter().map(|r| json!({"class": r.class.to_json(), "orbit_size": r.size})).collect();
                serde_json::to_string_pretty(&json!({"schema": 1, "mu": mu.weights(), "q": spec.q(), "pair_count": c.pair_count, "orbit_count": c.rows.len(), "orbits": rows})).unwrap() + "\n"
            }
            Format::Dot => return Err(Error::Parse("orbit censuses are written as csv or json".into())),
        }
    } else {
        let kind = ActionKind::parse(&action)?;
        let part = enumerate_orbits(&ActionSpec::new(kind, mu.clone(), spec, tau))?;
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["action", "mu", "q", "rep", "size"]).map_err(csv_err)?;
                for o in &part.orbits {
                    w.write_record([
                        kind.name().to_string(),
                        mu.to_string(),
                        spec.q().to_string(),
                        rows_of(&o.rep).to_string(),
                        o.size.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
                String::from_utf8(w.into_inner().map_err(|e| Error::Parse(e.to_string()))?).unwrap()
            }
            Format::Json => {
                let rows: Vec<_> =
                    part.orbits.iter().map(|o| json!({"rep": rows_of(&o.rep), "size": o.size, "members_hash": o.members_hash})).collect();
                serde_json::to_string_pretty(&json!({
                    "schema": 1, "action": kind.name(), "mu": mu.weights(), "q": spec.q(), "tau": tau,
                    "group_order": part.group_order, "total": part.total, "orbit_count": part.orbits.len(), "orbits": rows
                }))
                .unwrap()
                    + "\n"
            }
            Format::Dot => return Err(Error::Parse("orbit censuses are written as csv or json".into())),
        }
    };
    emit(&out, &text)?;
    Ok(true)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn snf_json<D: Dvr>(x: &Mat<D>) -> Result<serde_json::Value, Error> {
    let s = x.snf()?;
    Ok(json!({"schema": 1, "a": s.a.to_json(), "d": s.d, "b": s.b.to_json()}))
}

fn cartan(out: Option<PathBuf>) -> Result<bool, Error> {
    let mut input = String::new();
    io::stdin().read_to_string(&mut input).map_err(|e| Error::Parse(e.to_string()))?;
    let mj: MatJson = serde_json::from_str(&input).map_err(|e| Error::Parse(format!("matrix JSON: {e}")))?;
    let v = match mj.parse()? {
        AnyMat::Fq(_) => return Err(Error::Parse("cartan needs a laurent or witt matrix".into())),
        AnyMat::Laurent(x) => snf_json(&x)?,
        AnyMat::Witt(x) => snf_json(&x)?,
    };
    emit(&out, &(serde_json::to_string_pretty(&v).unwrap() + "\n"))?;
    Ok(true)
}

fn poset(n: usize, mu: Option<String>, twist: Twist, format: Format, out: Option<PathBuf>) -> Result<bool, Error> {
    let group = GroupArgs { n, q: 2, mu };
    let mu = group.cocharacter()?;
    let c = match twist {
        Twist::Identity => Perm::identity(n),
        Twist::Longest => Perm::longest(n),
    };
    let p = pwz_order(n, &mu.j_set(), &c)?;
    let text = match format {
        Format::Dot => p.to_dot(),
        Format::Json => serde_json::to_string_pretty(&p.to_json()).unwrap() + "\n",
        Format::Csv => return Err(Error::Parse("posets are written as dot or json".into())),
    };
    emit(&out, &text)?;
    Ok(true)
}

fn witt_selftest(samples: usize, seed: u64, out: Option<PathBuf>) -> Result<bool, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs = Vec::new();
    let mut pass = true;
    for p in [2u8, 3] {
        for len in 1..=4 {
            let r = integer_selftest(p, len, samples, &mut rng)?;
            let checks = 3 * r.cases;
            eprintln!("p={p} N={len}: {}/{checks} agree", checks - r.mismatches);
            pass &= r.mismatches == 0;
            runs.push(json!({"p": p, "N": len, "cases": r.cases, "mismatches": r.mismatches,
                "pass_rate": if checks == 0 { 1.0 } else { (checks - r.mismatches) as f64 / checks as f64 }}));
        }
    }
    emit(&out, &(serde_json::to_string_pretty(&json!({"schema": 1, "runs": runs, "pass": pass})).unwrap() + "\n"))?;
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { group, prec, suite, seed, samples, tau, out } => verify(group, prec, suite, seed, samples, tau, out),
        Command::Orbits { group, action, tau, format, out } => orbits(group, action, tau, format, out),
        Command::Cartan { out } => cartan(out),
        Command::Poset { n, mu, twist, format, out } => poset(n, mu, twist, format, out),
        Command::WittSelftest { samples, seed, out } => witt_selftest(samples, seed, out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
