//! Double cosets `K_1 \ K mu(t) K / K_1` and their canonical zip-orbit representatives.
//!
//! A class is stored as the lexicographically least pair `(g, h)` in its orbit
//! under `(g, h).(p_-, p_+) = (p_-^-1 g, p_+^-1 h)`, comparing `FqMat::key` of `g`
//! first and then of `h`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::grpdata::{
    self, conj_by_mu, enumerate_gl, enumerate_points, enumerate_zip, lift, mu_matrix, mu_matrix_witt, random_gl, random_k, random_k1,
    random_sided_h, Cocharacter, SubgroupTag,
};
use crate::matring::{required_precision, teichmuller_lift, Dvr, FqMat, LaurentMat, Mat, WittMat};
use crate::report::Check;
use crate::witt::{WittCtx, WittFraction};

/// A point of `K_1 \ K mu K / K_1`, named by its canonical pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleCosetClass {
    pub mu: Cocharacter,
    pub g: FqMat,
    pub h: FqMat,
}

impl DoubleCosetClass {
    pub fn key(&self) -> (u64, u64) {
        (self.g.key(), self.h.key())
    }

    pub fn to_json(&self) -> ClassJson {
        ClassJson { mu: self.mu.weights().to_vec(), q: self.g.field().q(), rep_g: self.g.to_coeff_rows(), rep_h: self.h.to_coeff_rows() }
    }
}

impl PartialOrd for DoubleCosetClass {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for DoubleCosetClass {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        (&self.mu, self.key()).cmp(&(&o.mu, o.key()))
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ClassJson {
    pub mu: Vec<i32>,
    pub q: usize,
    pub rep_g: Vec<Vec<Vec<u8>>>,
    pub rep_h: Vec<Vec<Vec<u8>>>,
}

/// The finite zip group of a block shape, stored as inverse pairs `(p_-^-1, p_+^-1)`.
#[derive(Debug)]
pub struct ZipGroup {
    pub spec: &'static FieldSpec,
    pub block_sizes: Vec<usize>,
    inverses: Vec<(FqMat, FqMat)>,
}

impl ZipGroup {
    /// Cached group for the block shape of `mu`; it only depends on that shape.
    pub fn get(mu: &Cocharacter, spec: &'static FieldSpec) -> Result<&'static ZipGroup> {
        type Cache = Mutex<HashMap<(Vec<usize>, usize), &'static ZipGroup>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let key = (mu.block_sizes(), spec.q());
        let cache = CACHE.get_or_init(Default::default);
        if let Some(z) = cache.lock().unwrap().get(&key) {
            return Ok(z);
        }
        let inverses = enumerate_zip(SubgroupTag::ZipNormal, mu, spec, 0)?
            .into_iter()
            .map(|(pm, pp)| Ok((pm.inv()?, pp.inv()?)))
            .collect::<Result<Vec<_>>>()?;
        let z: &'static ZipGroup = Box::leak(Box::new(ZipGroup { spec, block_sizes: key.0.clone(), inverses }));
        cache.lock().unwrap().insert(key, z);
        Ok(z)
    }

    pub fn order(&self) -> usize {
        self.inverses.len()
    }

    /// Orbit of `(g, h)` as key pairs.
    pub fn orbit(&self, g: &FqMat, h: &FqMat) -> BTreeSet<(u64, u64)> {
        self.inverses.iter().map(|(a, b)| (a.mul(g).unwrap().key(), b.mul(h).unwrap().key())).collect()
    }

    /// Least pair of the orbit.
    pub fn canonical(&self, g: &FqMat, h: &FqMat) -> (FqMat, FqMat) {
        let mut best: Option<(u64, u64)> = None;
        for (a, b) in &self.inverses {
            let kg = a.mul(g).unwrap().key();
            if matches!(best, Some((bg, _)) if kg > bg) {
                continue;
            }
            let kh = b.mul(h).unwrap().key();
            if best.is_none_or(|bk| (kg, kh) < bk) {
                best = Some((kg, kh));
            }
        }
        let (kg, kh) = best.expect("zip group contains the identity");
        (FqMat::from_key(self.spec, g.n(), kg), FqMat::from_key(self.spec, h.n(), kh))
    }
}

/// Canonical class of the pair `(g, h)`.
pub fn canonicalize(g: &FqMat, h: &FqMat, mu: &Cocharacter) -> Result<DoubleCosetClass> {
    let z = ZipGroup::get(mu, g.field())?;
    let (g, h) = z.canonical(g, h);
    Ok(DoubleCosetClass { mu: mu.clone(), g, h })
}

/// Lift precision so that products through `mu(t)` stay known modulo `t^prec`.
fn lift_precision(mu: &Cocharacter, prec: i32) -> i32 {
    prec - mu.weights().iter().copied().min().unwrap_or(0).min(0)
}

/// Lift precision at which constant matrices times `mu(t)` can be passed to `class_of`.
pub fn cell_lift_precision(mu: &Cocharacter) -> i32 {
    lift_precision(mu, required_precision(mu.weights()))
}

/// `g^-1 mu(t) h` with entries known modulo `t^prec`.
pub fn psi_map(g: &FqMat, h: &FqMat, mu: &Cocharacter, prec: i32) -> Result<LaurentMat> {
    let gi = g.inv()?;
    let wp = lift_precision(mu, prec);
    lift(&gi, wp).mul(&mu_matrix(mu, g.field(), wp))?.mul(&lift(h, wp))
}

/// `g^-1 p^mu h` with Teichmuller lifts.
pub fn witt_psi_map(g: &FqMat, h: &FqMat, mu: &Cocharacter, ctx: &'static WittCtx) -> Result<WittMat> {
    let gi = g.inv()?;
    teichmuller_lift(&gi, ctx).mul(&mu_matrix_witt(mu, ctx)?)?.mul(&teichmuller_lift(h, ctx))
}

fn class_from_snf<D: Dvr>(x: &Mat<D>, mu: &Cocharacter) -> Result<DoubleCosetClass> {
    if x.n() != mu.n() {
        return Err(Error::SpecMismatch(format!("{}x{} matrix for GL_{}", x.n(), x.n(), mu.n())));
    }
    let snf = x.snf()?;
    if snf.d != mu.weights() {
        return Err(Error::WrongCell { expected: mu.weights().to_vec(), found: snf.d });
    }
    let (a, b) = (snf.a.reduce()?, snf.b.reduce()?);
    canonicalize(&a.inv()?, &b, mu)
}

/// Class of `x ∈ K mu(t) K`, via `x = a mu(t) b` and the pair `(abar^-1, bbar)`.
pub fn class_of(x: &LaurentMat, mu: &Cocharacter) -> Result<DoubleCosetClass> {
    let need = required_precision(mu.weights());
    if x.min_precision() < need {
        return Err(Error::InsufficientPrecision(format!("entries known modulo t^{}, need t^{need} for mu = {mu}", x.min_precision())));
    }
    class_from_snf(x, mu)
}

/// Witt length needed by `witt_class_of` for `mu`.
pub fn witt_required_length(mu: &Cocharacter) -> usize {
    (2 * mu.spread() + 1).max(3) as usize
}

/// Mixed-characteristic class of `x ∈ K p^mu K`; needs weights in `{-1, 0, 1}` and
/// length at least `witt_required_length(mu)`.
pub fn witt_class_of(x: &WittMat, mu: &Cocharacter) -> Result<DoubleCosetClass> {
    let len = x.get(0, 0).ctx().len();
    let need = witt_required_length(mu);
    if len < need {
        return Err(Error::InsufficientPrecision(format!("Witt length {len} < {need} for mu = {mu}")));
    }
    if mu.weights().iter().any(|d| d.abs() > 1) {
        return Err(Error::InsufficientPrecision(format!("weights of {mu} exceed 1 in absolute value")));
    }
    class_from_snf(x, mu)
}

/// Same representative, cocharacter `n mu`.
pub fn rescale_class(c: &DoubleCosetClass, n: i32) -> Result<DoubleCosetClass> {
    Ok(DoubleCosetClass { mu: c.mu.scale(n)?, g: c.g.clone(), h: c.h.clone() })
}

/// `alpha(g)`: the class of `(g^-1, 1)`, computed from `g mu(t)`.
pub fn embed_alpha(g: &FqMat, mu: &Cocharacter) -> Result<DoubleCosetClass> {
    let prec = cell_lift_precision(mu);
    class_of(&lift(g, prec).mul(&mu_matrix(mu, g.field(), prec))?, mu)
}

/// `beta(g)`: the class of `(1, g)`, computed from `mu(t) g`.
pub fn embed_beta(g: &FqMat, mu: &Cocharacter) -> Result<DoubleCosetClass> {
    let prec = cell_lift_precision(mu);
    mu_matrix(mu, g.field(), prec).mul(&lift(g, prec)).and_then(|x| class_of(&x, mu))
}

/// Budget for exhaustive censuses of `G(F_q)^2`: `n <= 3`, `q <= 4`, at most 200k pairs.
pub fn census_budget(mu: &Cocharacter, spec: &FieldSpec) -> Result<()> {
    if mu.n() > 3 || spec.q() > 4 {
        return Err(Error::BudgetExceeded(format!("census needs n <= 3 and q <= 4, got n = {}, q = {}", mu.n(), spec.q())));
    }
    let pairs = grpdata::gl_order(mu.n(), spec.q()).pow(2);
    if pairs > 200_000 {
        return Err(Error::BudgetExceeded(format!("{pairs} pairs in G(F_q)^2")));
    }
    Ok(())
}

/// One zip orbit on `G(F_q)^2`.
#[derive(Debug, Clone)]
pub struct OrbitRow {
    pub class: DoubleCosetClass,
    pub size: usize,
}

/// All zip orbits on `G(F_q)^2`, sorted by representative.
#[derive(Debug, Clone)]
pub struct Census {
    pub mu: Cocharacter,
    pub q: usize,
    pub pair_count: usize,
    pub rows: Vec<OrbitRow>,
}

impl Census {
    pub fn keys(&self) -> BTreeSet<(u64, u64)> {
        self.rows.iter().map(|r| r.class.key()).collect()
    }
}

pub fn census(mu: &Cocharacter, spec: &'static FieldSpec) -> Result<Census> {
    census_budget(mu, spec)?;
    let z = ZipGroup::get(mu, spec)?;
    let gl = enumerate_gl(spec, mu.n())?;
    let mut seen: BTreeSet<(u64, u64)> = BTreeSet::new();
    let mut rows = Vec::new();
    for g in &gl {
        for h in &gl {
            if seen.contains(&(g.key(), h.key())) {
                continue;
            }
            let orbit = z.orbit(g, h);
            let (kg, kh) = *orbit.iter().next().unwrap();
            rows.push(OrbitRow {
                class: DoubleCosetClass { mu: mu.clone(), g: FqMat::from_key(spec, mu.n(), kg), h: FqMat::from_key(spec, mu.n(), kh) },
                size: orbit.len(),
            });
            seen.extend(orbit);
        }
    }
    rows.sort_by_key(|r| r.class.key());
    Ok(Census { mu: mu.clone(), q: spec.q(), pair_count: gl.len() * gl.len(), rows })
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PsiReport {
    pub pair_count: usize,
    pub orbit_count: usize,
    pub class_count: usize,
    pub roundtrip_failures: usize,
    pub surjective_samples: usize,
    pub injective: bool,
    pub surjective: bool,
    pub precision: i32,
}

impl PsiReport {
    pub fn check(&self, name: &str) -> Check {
        Check::new(name, self.injective && self.surjective)
            .count("pair_count", self.pair_count)
            .count("orbit_count", self.orbit_count)
            .count("class_count", self.class_count)
            .count("roundtrip_failures", self.roundtrip_failures)
            .count("surjective_samples", self.surjective_samples)
            .count("precision", self.precision)
    }
}

/// Budget for `verify_psi_bijection`: the census budget and `q <= 3`.
pub fn psi_budget(mu: &Cocharacter, spec: &FieldSpec) -> Result<()> {
    if spec.q() > 3 {
        return Err(Error::BudgetExceeded(format!("psi bijection check needs q <= 3, got q = {}", spec.q())));
    }
    census_budget(mu, spec)
}

/// Maps every pair of `G(F_q)^2` through `psi` and `class_of`.
///
/// `injective` requires equal orbit and class counts and that every pair returns
/// its own orbit representative. `surjective` requires random elements `k mu k'`
/// of the Cartan cell to land on an enumerated class.
pub fn verify_psi_bijection<R: Rng>(
    mu: &Cocharacter,
    spec: &'static FieldSpec,
    prec: i32,
    samples: usize,
    rng: &mut R,
) -> Result<PsiReport> {
    psi_budget(mu, spec)?;
    let prec = prec.max(required_precision(mu.weights()));
    let c = census(mu, spec)?;
    let reps = c.keys();
    let z = ZipGroup::get(mu, spec)?;
    let gl = enumerate_gl(spec, mu.n())?;
    let mut classes = BTreeSet::new();
    let mut failures = 0;
    for g in &gl {
        for h in &gl {
            let cl = class_of(&psi_map(g, h, mu, prec)?, mu)?;
            let expected = z.canonical(g, h);
            if cl.key() != (expected.0.key(), expected.1.key()) {
                failures += 1;
            }
            classes.insert(cl.key());
        }
    }
    let mut hits = 0;
    let wp = lift_precision(mu, prec);
    let mu_t = mu_matrix(mu, spec, wp);
    for _ in 0..samples {
        let x = random_k(spec, mu.n(), wp, rng).mul(&mu_t)?.mul(&random_k(spec, mu.n(), wp, rng))?;
        hits += usize::from(reps.contains(&class_of(&x, mu)?.key()));
    }
    Ok(PsiReport {
        pair_count: c.pair_count,
        orbit_count: c.rows.len(),
        class_count: classes.len(),
        roundtrip_failures: failures,
        surjective_samples: samples,
        injective: failures == 0 && classes.len() == c.rows.len() && classes == reps,
        surjective: hits == samples,
        precision: prec,
    })
}

/// `class_of(k1 x k2) = class_of(x)` for random `x = psi(g, h)` and `k1, k2 ∈ K_1`,
/// plus agreement of `class_of` at precisions `N` and `N + 2`.
pub fn k1_invariance<R: Rng>(mu: &Cocharacter, spec: &'static FieldSpec, prec: i32, trials: usize, rng: &mut R) -> Result<Check> {
    let prec = prec.max(required_precision(mu.weights()));
    let n = mu.n();
    let (wp, wide_p) = (lift_precision(mu, prec), lift_precision(mu, prec + 2));
    let (mut bad, mut unstable) = (0usize, 0usize);
    for _ in 0..trials {
        let (g, h) = (random_gl(spec, n, rng), random_gl(spec, n, rng));
        let x = psi_map(&g, &h, mu, wp)?;
        let base = class_of(&x, mu)?;
        let y = random_k1(spec, n, wp, rng).mul(&x)?.mul(&random_k1(spec, n, wp, rng))?;
        bad += usize::from(class_of(&y, mu)? != base);
        let wide = random_k1(spec, n, wide_p, rng).mul(&psi_map(&g, &h, mu, wide_p)?)?.mul(&random_k1(spec, n, wide_p, rng))?;
        unstable += usize::from(class_of(&wide, mu)? != base);
    }
    Ok(Check::new(format!("k1_invariance.{}.q{}", mu, spec.q()), bad == 0 && unstable == 0)
        .count("trials", trials)
        .count("failures", bad)
        .count("precision_instabilities", unstable)
        .count("precision", prec))
}

/// The classes for `k mu` carry exactly the representatives of the classes for `mu`.
pub fn rescale_check(mu: &Cocharacter, spec: &'static FieldSpec, factors: &[i32], prec: i32) -> Result<Check> {
    let base = census(mu, spec)?;
    let mut mismatches = 0usize;
    let mut compared = 0usize;
    for &k in factors {
        let nmu = mu.scale(k)?;
        let scaled = census(&nmu, spec)?;
        mismatches += usize::from(scaled.keys() != base.keys());
        let p = prec.max(required_precision(nmu.weights()));
        for row in &base.rows {
            let expected = rescale_class(&row.class, k)?;
            let got = class_of(&psi_map(&row.class.g, &row.class.h, &nmu, p)?, &nmu)?;
            mismatches += usize::from(got != expected);
            compared += 1;
        }
    }
    Ok(Check::new(format!("rescale.{}.q{}", mu, spec.q()), mismatches == 0)
        .count("classes", base.rows.len())
        .count("compared", compared)
        .count("mismatches", mismatches))
}

/// Fibers of `alpha` are the cosets `g U_-`, fibers of `beta` the cosets `U_+ g`.
pub fn embedding_fibers(mu: &Cocharacter, spec: &'static FieldSpec) -> Result<Vec<Check>> {
    let gl = enumerate_gl(spec, mu.n())?;
    let mut out = Vec::new();
    for (name, tag, left) in [("alpha", SubgroupTag::Uminus, true), ("beta", SubgroupTag::Uplus, false)] {
        let u = enumerate_points(tag, mu, spec)?.len();
        let mut fibers: BTreeMap<(u64, u64), Vec<FqMat>> = BTreeMap::new();
        for g in &gl {
            let c = if left { embed_alpha(g, mu)? } else { embed_beta(g, mu)? };
            fibers.entry(c.key()).or_default().push(g.clone());
        }
        let mut bad_size = 0usize;
        let mut bad_coset = 0usize;
        for fiber in fibers.values() {
            bad_size += usize::from(fiber.len() != u);
            let g0 = &fiber[0];
            let g0i = g0.inv()?;
            for g in fiber {
                let r = if left { g0i.mul(g)? } else { g.mul(&g0i)? };
                bad_coset += usize::from(!grpdata::is_member_fq(&r, tag, mu)?);
            }
        }
        let sizes: BTreeSet<usize> = fibers.values().map(|f| f.len()).collect();
        let mut c = Check::new(format!("embed_{name}.{}.q{}", mu, spec.q()), bad_size == 0 && bad_coset == 0)
            .count("fibers", fibers.len())
            .count("expected_fiber_size", u)
            .count("wrong_size", bad_size)
            .count("outside_coset", bad_coset);
        if sizes.len() != 1 {
            c = c.detail(format!("fiber sizes {sizes:?}"));
        }
        out.push(c);
    }
    Ok(out)
}

/// Random element `I + pX` of `K_1` over `W_N(F_q)`.
pub fn random_witt_k1<R: Rng>(ctx: &'static WittCtx, n: usize, rng: &mut R) -> Result<WittMat> {
    let one = WittFraction::one(ctx);
    let zero = WittFraction::zero(ctx);
    let p = WittFraction::p_pow(ctx, 1)?;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let base = if i == j { one.clone() } else { zero.clone() };
            row.push(base.add(&WittFraction::from_witt(ctx.random(rng)).mul(&p)?)?);
        }
        rows.push(row);
    }
    Mat::from_rows(rows)
}

/// The mixed-characteristic census over every pair of `G(F_q)^2`, against the Laurent census.
pub fn witt_verify_bijection<R: Rng>(
    mu: &Cocharacter,
    spec: &'static FieldSpec,
    len: usize,
    trials: usize,
    rng: &mut R,
) -> Result<Vec<Check>> {
    let ctx = WittCtx::get(spec, len)?;
    let laurent = census(mu, spec)?;
    let z = ZipGroup::get(mu, spec)?;
    let gl = enumerate_gl(spec, mu.n())?;
    let mut classes = BTreeSet::new();
    let mut failures = 0usize;
    for g in &gl {
        for h in &gl {
            let cl = witt_class_of(&witt_psi_map(g, h, mu, ctx)?, mu)?;
            let (eg, eh) = z.canonical(g, h);
            failures += usize::from(cl.key() != (eg.key(), eh.key()));
            classes.insert(cl.key());
        }
    }
    let equal = classes == laurent.keys();
    let census_check = Check::new(format!("witt_census.{}.q{}.N{}", mu, spec.q(), len), equal && failures == 0)
        .count("witt_classes", classes.len())
        .count("laurent_classes", laurent.rows.len())
        .count("roundtrip_failures", failures)
        .count("witt_length", len);

    let mut bad = 0usize;
    for _ in 0..trials {
        let (g, h) = (random_gl(spec, mu.n(), rng), random_gl(spec, mu.n(), rng));
        let x = witt_psi_map(&g, &h, mu, ctx)?;
        let y = random_witt_k1(ctx, mu.n(), rng)?.mul(&x)?.mul(&random_witt_k1(ctx, mu.n(), rng)?)?;
        bad += usize::from(witt_class_of(&y, mu)? != witt_class_of(&x, mu)?);
    }
    let inv_check =
        Check::new(format!("witt_k1_invariance.{}.q{}.N{}", mu, spec.q(), len), bad == 0).count("trials", trials).count("failures", bad);
    Ok(vec![census_check, inv_check])
}

/// `(h^-1 x)^-1 mu (g^-1 y) = x^-1 mu y` for `g ∈ ^+H`, `h = mu g mu^-1` and random `x, y ∈ K`.
pub fn prozip_invariance<R: Rng>(mu: &Cocharacter, spec: &'static FieldSpec, prec: i32, samples: usize, rng: &mut R) -> Result<Check> {
    let n = mu.n();
    let prec = prec.max(required_precision(mu.weights()));
    let mu_t = mu_matrix(mu, spec, prec);
    let mut bad = 0usize;
    let mut tol_min = i32::MAX;
    for _ in 0..samples {
        let (x, y) = (random_k(spec, n, prec, rng), random_k(spec, n, prec, rng));
        let g = random_sided_h(mu, spec, prec, true, rng);
        let h = conj_by_mu(&g, mu, -1);
        let lhs = h.inv()?.mul(&x)?.inv()?.mul(&mu_t)?.mul(&g.inv()?.mul(&y)?)?;
        let rhs = x.inv()?.mul(&mu_t)?.mul(&y)?;
        let tol = lhs.min_precision().min(rhs.min_precision());
        tol_min = tol_min.min(tol);
        if tol < 1 {
            return Err(Error::InsufficientPrecision(format!("comparison only modulo t^{tol}")));
        }
        bad += usize::from(!lhs.congruent(&rhs, tol));
    }
    Ok(Check::new(format!("prozip_invariance.{}.q{}", mu, spec.q()), bad == 0)
        .count("samples", samples)
        .count("failures", bad)
        .count("precision", prec)
        .count("compared_modulo_t_pow", if samples == 0 { 0 } else { tol_min }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(q: usize) -> &'static FieldSpec {
        FieldSpec::for_order(q).unwrap()
    }
    fn mu(s: &str) -> Cocharacter {
        Cocharacter::parse(s).unwrap()
    }
    fn fq(spec: &'static FieldSpec, rows: &[&[i64]]) -> FqMat {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&c| spec.from_int(c)).collect()).collect()).unwrap()
    }

    #[test]
    fn psi_examples() {
        let f2 = f(2);
        let m = mu("1,0");
        let i = FqMat::identity(f2, 2);
        assert!(psi_map(&i, &i, &m, 5).unwrap().congruent(&mu_matrix(&m, f2, 5), 5));
        let g = fq(f2, &[&[1, 1], &[0, 1]]);
        let x = psi_map(&g, &i, &m, 5).unwrap();
        assert_eq!(x.get(0, 0).valuation(), Some(1));
        assert_eq!(x.get(0, 1).valuation(), Some(0));
        assert!(x.get(1, 0).is_zero());
        assert_eq!(x.get(1, 1).valuation(), Some(0));
        let m3 = mu("1,1,0");
        let levi = fq(f2, &[&[0, 1, 0], &[1, 1, 0], &[0, 0, 1]]);
        let y = psi_map(&levi, &levi, &m3, 5).unwrap();
        assert!(y.congruent(&mu_matrix(&m3, f2, 5), 5));
    }

    #[test]
    fn class_of_examples() {
        let f2 = f(2);
        let m = mu("1,0");
        let i = FqMat::identity(f2, 2);
        let c = class_of(&mu_matrix(&m, f2, 6), &m).unwrap();
        assert!(c.g.is_identity() && c.h.is_identity());
        assert_eq!(embed_alpha(&i, &m).unwrap(), c);
        assert_eq!(embed_beta(&i, &m).unwrap(), c);
        let wrong = mu_matrix(&mu("2,0"), f2, 6);
        assert!(matches!(class_of(&wrong, &m), Err(Error::WrongCell { .. })));
        assert!(matches!(class_of(&mu_matrix(&m, f2, 2), &m), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn canonical_is_orbit_minimum() {
        let f2 = f(2);
        let m = mu("1,0");
        let z = ZipGroup::get(&m, f2).unwrap();
        assert_eq!(z.order(), 4);
        let gl = enumerate_gl(f2, 2).unwrap();
        for g in &gl {
            for h in &gl {
                let (cg, ch) = z.canonical(g, h);
                assert_eq!((cg.key(), ch.key()), *z.orbit(g, h).iter().next().unwrap());
                assert_eq!(z.canonical(&cg, &ch), (cg.clone(), ch.clone()));
            }
        }
    }

    #[test]
    fn census_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = verify_psi_bijection(&mu("1,0"), f(2), 6, 20, &mut rng).unwrap();
        assert!(r.injective && r.surjective, "{r:?}");
        assert_eq!(r.pair_count, 36);
        assert_eq!(r.orbit_count, 9);
        let r0 = verify_psi_bijection(&mu("0,0"), f(2), 4, 5, &mut rng).unwrap();
        assert_eq!(r0.orbit_count, 6);
        assert!(r0.injective);
        assert!(matches!(verify_psi_bijection(&mu("1,0"), f(4), 6, 1, &mut rng), Err(Error::BudgetExceeded(_))));
        assert!(matches!(census(&mu("1,0"), f(5)), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn rescale_identity_and_census() {
        let c = canonicalize(&FqMat::identity(f(2), 2), &FqMat::identity(f(2), 2), &mu("1,0")).unwrap();
        assert_eq!(rescale_class(&c, 1).unwrap(), c);
        assert_eq!(rescale_class(&c, 3).unwrap().mu, mu("3,0"));
        assert!(rescale_check(&mu("1,0"), f(2), &[2, 3], 6).unwrap().pass);
    }

    #[test]
    fn fibers() {
        for c in embedding_fibers(&mu("1,0"), f(2)).unwrap() {
            assert!(c.pass, "{c:?}");
            assert_eq!(c.counts["expected_fiber_size"], 2);
        }
    }

    #[test]
    fn invariance_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(k1_invariance(&mu("1,0"), f(3), 6, 40, &mut rng).unwrap().pass);
        assert!(prozip_invariance(&mu("1,0"), f(2), 6, 40, &mut rng).unwrap().pass);
        assert!(prozip_invariance(&mu("2,1,0"), f(2), 8, 10, &mut rng).unwrap().pass);
    }

    #[test]
    fn prozip_levi_is_exact() {
        let f3 = f(3);
        let m = mu("1,0");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = lift(&fq(f3, &[&[2, 0], &[0, 1]]), 6);
        let h = conj_by_mu(&g, &m, -1);
        assert!(h.congruent(&g, h.min_precision()));
        let (x, y) = (random_k(f3, 2, 6, &mut rng), random_k(f3, 2, 6, &mut rng));
        let mu_t = mu_matrix(&m, f3, 6);
        let lhs = h.inv().unwrap().mul(&x).unwrap().inv().unwrap().mul(&mu_t).unwrap().mul(&g.inv().unwrap().mul(&y).unwrap()).unwrap();
        let rhs = x.inv().unwrap().mul(&mu_t).unwrap().mul(&y).unwrap();
        assert!(lhs.congruent(&rhs, rhs.min_precision()));
    }

    #[test]
    fn witt_pipeline() {
        let f2 = f(2);
        let m = mu("1,0");
        let ctx = WittCtx::get(f2, 3).unwrap();
        let i = FqMat::identity(f2, 2);
        let c = witt_class_of(&witt_psi_map(&i, &i, &m, ctx).unwrap(), &m).unwrap();
        assert!(c.g.is_identity() && c.h.is_identity());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for c in witt_verify_bijection(&m, f2, 3, 20, &mut rng).unwrap() {
            assert!(c.pass, "{c:?}");
        }
        let short = WittCtx::get(f2, 2).unwrap();
        assert!(matches!(witt_class_of(&witt_psi_map(&i, &i, &m, short).unwrap(), &m), Err(Error::InsufficientPrecision(_))));
    }
}
