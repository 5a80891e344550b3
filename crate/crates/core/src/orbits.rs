//! Exhaustive orbit partitions for the finite actions attached to `mu`.
//!
//! Points are key vectors: `[g.key()]` for elements of `G(F_q)` and `[g.key(), h.key()]`
//! for canonical class pairs. Orbits are merged with a union-find and named by their
//! least member.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use rand::Rng;
use serde::Serialize;

use crate::coset::{canonicalize, cell_lift_precision, census, class_of, embed_beta, ZipGroup};
use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::grpdata::{enumerate_gl, enumerate_zip, lift, mu_matrix, Cocharacter, SubgroupTag};
use crate::matring::FqMat;
use crate::report::Check;
use crate::weyl::{epsilon_maps, min_coset_reps, Which};

pub type Point = Vec<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    /// `g -> p_+^-1 g p_-` for `(p_-, p_+)` with equal Levi parts.
    ZipNormal,
    /// `g -> p_+^-1 g p_-` for `(p_-, p_+)` with `Levi(p_-) = tau(Levi(p_+))`.
    ZipFrobenius,
    /// `g -> p_+^-1 g tau(p_-)` for `(p_-, p_+)` with equal Levi parts.
    PartialFrobenius,
    /// `(a, b) -> canonical(a g, b tau(g))` on class representatives, `g ∈ G(F_q)`.
    SigmaConjClasses,
}

impl ActionKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "zip-normal" => ActionKind::ZipNormal,
            "zip-frobenius" => ActionKind::ZipFrobenius,
            "partial-frobenius" => ActionKind::PartialFrobenius,
            "sigma-conj" | "sigma-conj-classes" => ActionKind::SigmaConjClasses,
            other => return Err(Error::Parse(format!("unknown action {other:?}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::ZipNormal => "zip-normal",
            ActionKind::ZipFrobenius => "zip-frobenius",
            ActionKind::PartialFrobenius => "partial-frobenius",
            ActionKind::SigmaConjClasses => "sigma-conj",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ActionSpec {
    pub kind: ActionKind,
    pub mu: Cocharacter,
    pub spec: &'static FieldSpec,
    /// `tau = sigma^tau_power` on F_q-points.
    pub tau_power: i64,
}

impl ActionSpec {
    pub fn new(kind: ActionKind, mu: Cocharacter, spec: &'static FieldSpec, tau_power: i64) -> Self {
        ActionSpec { kind, mu, spec, tau_power }
    }
}

/// Raw group element: a zip pair `(p_-, p_+)` or an element of `G(F_q)`.
#[derive(Debug, Clone)]
enum GroupElt {
    Pair(FqMat, FqMat),
    Single(FqMat),
}

impl GroupElt {
    /// Product under which every action here is a right action.
    fn mul(&self, o: &GroupElt) -> GroupElt {
        match (self, o) {
            (GroupElt::Pair(a, b), GroupElt::Pair(c, d)) => GroupElt::Pair(a.mul(c).unwrap(), b.mul(d).unwrap()),
            (GroupElt::Single(a), GroupElt::Single(b)) => GroupElt::Single(a.mul(b).unwrap()),
            _ => unreachable!("mixed group elements"),
        }
    }
}

struct Acting<'a> {
    action: &'a ActionSpec,
    zip: Option<&'static ZipGroup>,
    raw: Vec<GroupElt>,
    /// Precomputed `(left, right)` factors of each element.
    pre: Vec<(FqMat, FqMat)>,
}

impl<'a> Acting<'a> {
    fn new(action: &'a ActionSpec) -> Result<Self> {
        let (mu, spec, tau) = (&action.mu, action.spec, action.tau_power);
        let raw: Vec<GroupElt> = match action.kind {
            ActionKind::ZipNormal | ActionKind::PartialFrobenius => {
                enumerate_zip(SubgroupTag::ZipNormal, mu, spec, 0)?.into_iter().map(|(a, b)| GroupElt::Pair(a, b)).collect()
            }
            ActionKind::ZipFrobenius => {
                enumerate_zip(SubgroupTag::ZipFrobenius, mu, spec, tau)?.into_iter().map(|(a, b)| GroupElt::Pair(a, b)).collect()
            }
            ActionKind::SigmaConjClasses => enumerate_gl(spec, mu.n())?.into_iter().map(GroupElt::Single).collect(),
        };
        let pre = raw.iter().map(|e| Self::factors(action, e)).collect::<Result<Vec<_>>>()?;
        let zip = match action.kind {
            ActionKind::SigmaConjClasses => Some(ZipGroup::get(mu, spec)?),
            _ => None,
        };
        Ok(Acting { action, zip, raw, pre })
    }

    fn factors(action: &ActionSpec, e: &GroupElt) -> Result<(FqMat, FqMat)> {
        let tau = action.tau_power;
        Ok(match (action.kind, e) {
            (ActionKind::ZipNormal | ActionKind::ZipFrobenius, GroupElt::Pair(pm, pp)) => (pp.inv()?, pm.clone()),
            (ActionKind::PartialFrobenius, GroupElt::Pair(pm, pp)) => (pp.inv()?, pm.frob_pow(tau)),
            (ActionKind::SigmaConjClasses, GroupElt::Single(g)) => (g.clone(), g.frob_pow(tau)),
            _ => unreachable!("group element does not match action"),
        })
    }

    fn apply_factors(&self, f: &(FqMat, FqMat), x: &Point) -> Point {
        let spec = self.action.spec;
        let n = self.action.mu.n();
        match self.action.kind {
            ActionKind::SigmaConjClasses => {
                let a = FqMat::from_key(spec, n, x[0]).mul(&f.0).unwrap();
                let b = FqMat::from_key(spec, n, x[1]).mul(&f.1).unwrap();
                let (a, b) = self.zip.unwrap().canonical(&a, &b);
                vec![a.key(), b.key()]
            }
            _ => vec![f.0.mul(&FqMat::from_key(spec, n, x[0])).unwrap().mul(&f.1).unwrap().key()],
        }
    }

    fn order(&self) -> usize {
        self.raw.len()
    }
}

/// Points acted on: `G(F_q)` or the class census.
fn acted_set(action: &ActionSpec) -> Result<Vec<Point>> {
    Ok(match action.kind {
        ActionKind::SigmaConjClasses => {
            census(&action.mu, action.spec)?.rows.iter().map(|r| vec![r.class.g.key(), r.class.h.key()]).collect()
        }
        _ => enumerate_gl(action.spec, action.mu.n())?.iter().map(|g| vec![g.key()]).collect(),
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller index as root so roots are least members.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Orbit {
    pub rep: Point,
    pub size: usize,
    pub members_hash: u64,
    #[serde(skip)]
    pub members: Vec<Point>,
}

#[derive(Debug, Clone)]
pub struct OrbitPartition {
    pub action: ActionSpec,
    pub group_order: usize,
    pub orbits: Vec<Orbit>,
    pub total: usize,
}

impl OrbitPartition {
    /// The partition as a set of member sets.
    pub fn blocks(&self) -> BTreeSet<BTreeSet<Point>> {
        self.orbits.iter().map(|o| o.members.iter().cloned().collect()).collect()
    }

    /// Orbit index of every point.
    pub fn labels(&self) -> HashMap<Point, usize> {
        let mut m = HashMap::new();
        for (i, o) in self.orbits.iter().enumerate() {
            for p in &o.members {
                m.insert(p.clone(), i);
            }
        }
        m
    }

    pub fn sizes_divide_order(&self) -> bool {
        self.orbits.iter().all(|o| self.group_order.is_multiple_of(o.size))
    }

    /// Representative matrices of an orbit.
    pub fn rep_matrices(&self, o: &Orbit) -> Vec<FqMat> {
        o.rep.iter().map(|&k| FqMat::from_key(self.action.spec, self.action.mu.n(), k)).collect()
    }
}

fn guard(action: &ActionSpec) -> Result<()> {
    if action.mu.n() > 3 || action.spec.q() > 4 {
        return Err(Error::BudgetExceeded(format!(
            "orbit enumeration needs n <= 3 and q <= 4, got n = {}, q = {}",
            action.mu.n(),
            action.spec.q()
        )));
    }
    Ok(())
}

/// Exact orbit partition; orbits sorted by least member.
pub fn enumerate_orbits(action: &ActionSpec) -> Result<OrbitPartition> {
    guard(action)?;
    let acting = Acting::new(action)?;
    let mut points = acted_set(action)?;
    points.sort();
    let index: HashMap<Point, usize> = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let mut uf = UnionFind::new(points.len());
    for (i, x) in points.iter().enumerate() {
        for f in &acting.pre {
            let y = acting.apply_factors(f, x);
            let j = *index.get(&y).ok_or_else(|| Error::ConventionError(format!("action leaves the point set at {y:?}")))?;
            uf.union(i, j);
        }
    }
    let mut groups: BTreeMap<usize, Vec<Point>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(p.clone());
    }
    let orbits = groups
        .into_values()
        .map(|members| {
            let mut h = DefaultHasher::new();
            members.hash(&mut h);
            Orbit { rep: members[0].clone(), size: members.len(), members_hash: h.finish(), members }
        })
        .collect();
    Ok(OrbitPartition { action: action.clone(), group_order: acting.order(), orbits, total: points.len() })
}

/// Identity acts trivially and `x.(s t) = (x.s).t` on random triples.
pub fn action_axioms<R: Rng>(action: &ActionSpec, samples: usize, rng: &mut R) -> Result<Check> {
    guard(action)?;
    let acting = Acting::new(action)?;
    let points = acted_set(action)?;
    let id = acting
        .raw
        .iter()
        .position(|e| match e {
            GroupElt::Pair(a, b) => a.is_identity() && b.is_identity(),
            GroupElt::Single(a) => a.is_identity(),
        })
        .ok_or_else(|| Error::ConventionError("acting group lacks the identity".into()))?;
    let mut bad = 0usize;
    for x in &points {
        bad += usize::from(acting.apply_factors(&acting.pre[id], x) != *x);
    }
    for _ in 0..samples {
        let x = &points[rng.gen_range(0..points.len())];
        let (i, j) = (rng.gen_range(0..acting.order()), rng.gen_range(0..acting.order()));
        let st = Acting::factors(action, &acting.raw[i].mul(&acting.raw[j]))?;
        let lhs = acting.apply_factors(&st, x);
        let rhs = acting.apply_factors(&acting.pre[j], &acting.apply_factors(&acting.pre[i], x));
        bad += usize::from(lhs != rhs);
    }
    Ok(Check::new(format!("action_axioms.{}.{}.q{}", action.kind.name(), action.mu, action.spec.q()), bad == 0)
        .count("points", points.len())
        .count("samples", samples)
        .count("failures", bad))
}

fn partition_check(name: String, p: &OrbitPartition, pass: bool) -> Check {
    Check::new(name, pass && p.sizes_divide_order())
        .count("orbits", p.orbits.len())
        .count("points", p.total)
        .count("group_order", p.group_order)
}

fn tau_blocks(blocks: &BTreeSet<BTreeSet<Point>>, spec: &'static FieldSpec, n: usize, tau: i64) -> BTreeSet<BTreeSet<Point>> {
    blocks.iter().map(|b| b.iter().map(|x| vec![FqMat::from_key(spec, n, x[0]).frob_pow(tau).key()]).collect()).collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The chain of orbit spaces for `tau = sigma^m`:
/// (i) the partial-Frobenius and Frobenius-zip partitions coincide,
/// (ii) `g -> tau(g)` carries one onto the other,
/// (iii) after `r = s / gcd(s, m)` steps (`q = p^s`) the chain closes up.
pub fn chain_compare(mu: &Cocharacter, spec: &'static FieldSpec, m: i64) -> Result<Vec<Check>> {
    let n = mu.n();
    let tag = format!("{}.q{}.m{}", mu, spec.q(), m);
    let rt = enumerate_orbits(&ActionSpec::new(ActionKind::PartialFrobenius, mu.clone(), spec, m))?;
    let e = enumerate_orbits(&ActionSpec::new(ActionKind::ZipFrobenius, mu.clone(), spec, m))?;
    let (rtb, eb) = (rt.blocks(), e.blocks());
    let mut out = vec![partition_check(format!("chain.identity_map.{tag}"), &rt, rtb == eb).count("frobenius_zip_orbits", e.orbits.len())];

    // tau(mu) = mu for split diagonal mu, so the target is the same partial-Frobenius partition.
    let transported = tau_blocks(&eb, spec, n, m);
    out.push(partition_check(format!("chain.tau_map.{tag}"), &rt, transported == rtb));

    let s = spec.m() as u64;
    let step = (m.rem_euclid(s as i64)) as u64;
    let r = if step == 0 { 1 } else { s / gcd(s, step) };
    let mut cur = eb.clone();
    let mut each_step_ok = true;
    for _ in 0..r {
        cur = tau_blocks(&cur, spec, n, m);
        each_step_ok &= cur == rtb;
    }
    let tau_r_identity = enumerate_gl(spec, n)?.iter().all(|g| g.frob_pow(m * r as i64) == *g);
    out.push(
        Check::new(format!("chain.cycle.{tag}"), each_step_ok && cur == eb && tau_r_identity).count("period", r).count("steps_checked", r),
    );
    Ok(out)
}

/// `g -> class_of(mu(t) g)` maps partial-Frobenius orbits of `G(F_q)` bijectively onto
/// `sigma`-conjugacy orbits of classes, and intertwines `p_+^-1 g tau(p_-)` with
/// `sigma`-conjugation by `p_-`.
pub fn beta_transport<R: Rng>(mu: &Cocharacter, spec: &'static FieldSpec, m: i64, samples: usize, rng: &mut R) -> Result<Vec<Check>> {
    let tag = format!("{}.q{}.m{}", mu, spec.q(), m);
    let rt = enumerate_orbits(&ActionSpec::new(ActionKind::PartialFrobenius, mu.clone(), spec, m))?;
    let sc = enumerate_orbits(&ActionSpec::new(ActionKind::SigmaConjClasses, mu.clone(), spec, m))?;
    let sc_label = sc.labels();
    let n = mu.n();
    let mut image_of: Vec<BTreeSet<usize>> = Vec::new();
    for o in &rt.orbits {
        let mut targets = BTreeSet::new();
        for x in &o.members {
            let c = embed_beta(&FqMat::from_key(spec, n, x[0]), mu)?;
            let lbl = sc_label
                .get(&vec![c.g.key(), c.h.key()])
                .copied()
                .ok_or_else(|| Error::ConventionError(format!("class {:?} missing from the census", c.key())))?;
            targets.insert(lbl);
        }
        image_of.push(targets);
    }
    let well_defined = image_of.iter().all(|t| t.len() == 1);
    let hit: BTreeSet<usize> = image_of.iter().flatten().copied().collect();
    let injective = well_defined && hit.len() == rt.orbits.len();
    let surjective = hit.len() == sc.orbits.len();
    let id = FqMat::identity(spec, n);
    let base_ok = embed_beta(&id, mu)? == canonicalize(&id, &id, mu)?;
    let mut out = vec![Check::new(format!("beta.orbit_transport.{tag}"), well_defined && injective && surjective && base_ok)
        .count("partial_frobenius_orbits", rt.orbits.len())
        .count("sigma_orbits", sc.orbits.len())
        .count("classes", sc.total)
        .count("well_defined", well_defined as i64)
        .count("injective", injective as i64)
        .count("surjective", surjective as i64)];

    // beta(p_+^-1 g tau(p_-)) = class of p_-^-1 (mu g) tau(p_-).
    let gl = enumerate_gl(spec, n)?;
    let zip = enumerate_zip(SubgroupTag::ZipNormal, mu, spec, 0)?;
    let prec = cell_lift_precision(mu);
    let mu_t = mu_matrix(mu, spec, prec);
    let mut bad = 0usize;
    for _ in 0..samples {
        let g = &gl[rng.gen_range(0..gl.len())];
        let (pm, pp) = &zip[rng.gen_range(0..zip.len())];
        let tpm = pm.frob_pow(m);
        let moved = pp.inv()?.mul(g)?.mul(&tpm)?;
        let lhs = class_of(&mu_t.mul(&lift(&moved, prec))?, mu)?;
        let rhs = class_of(&lift(&pm.inv()?, prec).mul(&mu_t)?.mul(&lift(&g.mul(&tpm)?, prec))?, mu)?;
        bad += usize::from(lhs != rhs);
    }
    out.push(Check::new(format!("beta.equivariance.{tag}"), bad == 0).count("samples", samples).count("failures", bad));
    Ok(out)
}

/// Classes of `P_{eps1(w)} mu(t)` for `w ∈ ^J W` lie in pairwise distinct `sigma`-conjugacy
/// orbits, and `P_{eps2(w)} mu(t)` lies in the same orbit as `P_{eps1(w)} mu(t)`.
pub fn distinct_reps_check(mu: &Cocharacter, spec: &'static FieldSpec) -> Result<Vec<Check>> {
    let n = mu.n();
    let tag = format!("{}.q{}", mu, spec.q());
    let sc = enumerate_orbits(&ActionSpec::new(ActionKind::SigmaConjClasses, mu.clone(), spec, 1))?;
    let labels = sc.labels();
    let reps = min_coset_reps(n, &mu.j_set(), true)?;
    let prec = cell_lift_precision(mu);
    let mu_t = mu_matrix(mu, spec, prec);
    let orbit_of = |perm: &crate::weyl::Perm| -> Result<usize> {
        let p = FqMat::permutation(spec, perm.one_line());
        let c = class_of(&lift(&p, prec).mul(&mu_t)?, mu)?;
        labels.get(&vec![c.g.key(), c.h.key()]).copied().ok_or_else(|| Error::ConventionError("class outside census".into()))
    };
    let mut eps1_orbits = BTreeSet::new();
    let mut eps2_mismatch = 0usize;
    for w in &reps {
        let o1 = orbit_of(&epsilon_maps(w, mu, Which::Eps1)?.perm)?;
        let o2 = orbit_of(&epsilon_maps(w, mu, Which::Eps2)?.perm)?;
        eps1_orbits.insert(o1);
        eps2_mismatch += usize::from(o1 != o2);
    }
    let distinct = eps1_orbits.len() == reps.len();
    Ok(vec![
        Check::new(format!("eps1.distinct_sigma_orbits.{tag}"), distinct && sc.orbits.len() >= reps.len())
            .count("coset_reps", reps.len())
            .count("distinct_orbits_hit", eps1_orbits.len())
            .count("sigma_orbits", sc.orbits.len()),
        Check::new(format!("eps2.same_sigma_orbit_as_eps1.{tag}"), eps2_mismatch == 0)
            .count("coset_reps", reps.len())
            .count("mismatches", eps2_mismatch),
    ])
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

    #[test]
    fn zip_normal_partitions() {
        let p = enumerate_orbits(&ActionSpec::new(ActionKind::ZipNormal, mu("1,0"), f(2), 0)).unwrap();
        assert_eq!(p.orbits.iter().map(|o| o.size).sum::<usize>(), 6);
        assert!(p.sizes_divide_order());
        let c = enumerate_orbits(&ActionSpec::new(ActionKind::ZipNormal, mu("0,0"), f(2), 0)).unwrap();
        let mut sizes: Vec<usize> = c.orbits.iter().map(|o| o.size).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2, 3]);
        let id = vec![FqMat::identity(f(2), 2).key()];
        assert!(c.orbits.iter().any(|o| o.members == vec![id.clone()]));
    }

    #[test]
    fn axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in [ActionKind::ZipNormal, ActionKind::ZipFrobenius, ActionKind::PartialFrobenius, ActionKind::SigmaConjClasses] {
            let a = ActionSpec::new(kind, mu("1,0"), f(4), 1);
            assert!(action_axioms(&a, 30, &mut rng).unwrap().pass, "{kind:?}");
        }
    }

    #[test]
    fn chain_and_transport() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (q, m) in [(2, 0), (2, 1), (4, 1), (4, 2)] {
            for c in chain_compare(&mu("1,0"), f(q), m).unwrap() {
                assert!(c.pass, "{c:?}");
            }
        }
        for c in beta_transport(&mu("1,0"), f(2), 1, 30, &mut rng).unwrap() {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn eps_reps() {
        for c in distinct_reps_check(&mu("1,0"), f(2)).unwrap() {
            assert!(c.pass, "{c:?}");
        }
        let c = distinct_reps_check(&mu("0,0"), f(2)).unwrap();
        assert_eq!(c[0].counts["coset_reps"], 1);
        assert!(c[0].pass);
    }

    #[test]
    fn budget() {
        let a = ActionSpec::new(ActionKind::ZipNormal, mu("1,0"), f(5), 0);
        assert!(matches!(enumerate_orbits(&a), Err(Error::BudgetExceeded(_))));
    }
}
