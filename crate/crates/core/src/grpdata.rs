//! Cocharacters of GL_n and the subgroups they cut out.
//!
//! Blocks are the maximal runs of equal weights, ordered by decreasing weight.
//! `P_+` is block upper triangular, `P_-` block lower triangular, `U_±` their
//! unipotent radicals and `M` the block diagonal Levi.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::matring::{FqMat, LaurentMat, Mat, WittMat};
use crate::report::Check;
use crate::series::LaurentElt;
use crate::witt::{WittCtx, WittFraction};

/// A dominant cocharacter `t -> diag(t^d_1, ..., t^d_n)` with `d_1 >= ... >= d_n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cocharacter {
    weights: Vec<i32>,
}

impl Cocharacter {
    pub fn new(weights: Vec<i32>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Parse("cocharacter needs at least one weight".into()));
        }
        if weights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Parse(format!("weights {weights:?} are not non-increasing")));
        }
        Ok(Cocharacter { weights })
    }

    /// Parses a comma list such as `1,0`.
    pub fn parse(s: &str) -> Result<Self> {
        let ws = s
            .split(',')
            .map(|x| x.trim().parse::<i32>().map_err(|e| Error::Parse(format!("weight {x:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ws)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }
    pub fn weights(&self) -> &[i32] {
        &self.weights
    }
    pub fn negated(&self) -> Vec<i32> {
        self.weights.iter().map(|d| -d).collect()
    }

    /// Block index of each position.
    pub fn block_of(&self, i: usize) -> usize {
        self.weights[..=i].windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn blocks(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.n() {
            if i == self.n() || self.weights[i] != self.weights[start] {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks().iter().map(|r| r.len()).collect()
    }

    /// Type `J = {i : d_i = d_{i+1}}`, 1-based.
    pub fn j_set(&self) -> Vec<usize> {
        (1..self.n()).filter(|&i| self.weights[i - 1] == self.weights[i]).collect()
    }

    pub fn is_minuscule(&self) -> bool {
        self.weights[0] - self.weights[self.n() - 1] <= 1
    }

    pub fn scale(&self, k: i32) -> Result<Self> {
        if k < 1 {
            return Err(Error::Parse(format!("scale factor {k} must be at least 1")));
        }
        Ok(Cocharacter { weights: self.weights.iter().map(|d| d * k).collect() })
    }

    /// `phi(mu) = p sigma(mu)`.
    pub fn phi(&self, p: u8) -> Self {
        Cocharacter { weights: self.weights.iter().map(|d| d * p as i32).collect() }
    }

    /// Split diagonal cocharacters are fixed by the Frobenius.
    pub fn sigma(&self) -> Self {
        self.clone()
    }

    /// Weight gap `d_max - d_min`.
    pub fn spread(&self) -> i32 {
        self.weights[0] - self.weights[self.n() - 1]
    }

    fn block_ids(&self) -> Vec<usize> {
        let mut ids = Vec::with_capacity(self.n());
        for (b, r) in self.blocks().into_iter().enumerate() {
            ids.extend(std::iter::repeat_n(b, r.len()));
        }
        ids
    }
}

impl fmt::Display for Cocharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ws: Vec<String> = self.weights.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", ws.join(","))
    }
}

impl fmt::Debug for Cocharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubgroupTag {
    G,
    Pplus,
    Pminus,
    Uplus,
    Uminus,
    M,
    K1,
    Hplus,
    Hminus,
    /// `L+G ∩ mu^-1 (L+G) mu`.
    LeftH,
    /// `L+G ∩ mu (L+G) mu^-1`.
    RightH,
    ZipNormal,
    ZipFrobenius,
    ZipLoop,
    ZipPro,
}

/// `diag(t^d_1, ..., t^d_n)`, each entry with relative precision `prec`.
pub fn mu_matrix(mu: &Cocharacter, spec: &'static FieldSpec, prec: i32) -> LaurentMat {
    Mat::diag_pi(&LaurentElt::zero(spec, prec), mu.weights(), prec).expect("Laurent monomials always exist")
}

/// `diag(t^-d_1, ..., t^-d_n)`.
pub fn mu_inverse_matrix(mu: &Cocharacter, spec: &'static FieldSpec, prec: i32) -> LaurentMat {
    Mat::diag_pi(&LaurentElt::zero(spec, prec), &mu.negated(), prec).expect("Laurent monomials always exist")
}

/// `diag(p^d_1, ..., p^d_n)` in `W_N(F_q)[1/p]`.
pub fn mu_matrix_witt(mu: &Cocharacter, ctx: &'static WittCtx) -> Result<WittMat> {
    let worst = (-mu.weights()[mu.n() - 1]).max(0);
    if ctx.len() as i32 - worst <= 0 {
        return Err(Error::InsufficientPrecision(format!("p^{} at Witt length {}", -worst, ctx.len())));
    }
    Mat::diag_pi(&WittFraction::zero(ctx), mu.weights(), ctx.len() as i32)
}

/// `mu^-1 g mu` for `sign = 1`, `mu g mu^-1` for `sign = -1`, by exact entry shifts.
pub fn conj_by_mu(g: &LaurentMat, mu: &Cocharacter, sign: i32) -> LaurentMat {
    let d = mu.weights();
    Mat::from_fn(g.n(), |i, j| g.get(i, j).shift(sign * (d[j] - d[i])))
}

fn in_block_pattern(g: &FqMat, mu: &Cocharacter, keep: impl Fn(usize, usize) -> bool) -> bool {
    let ids = mu.block_ids();
    (0..g.n()).all(|i| (0..g.n()).all(|j| keep(ids[i], ids[j]) || g.get(i, j).is_zero()))
}

fn diag_blocks_identity(g: &FqMat, mu: &Cocharacter) -> bool {
    let ids = mu.block_ids();
    (0..g.n()).all(|i| (0..g.n()).all(|j| ids[i] != ids[j] || g.get(i, j).code() == usize::from(i == j)))
}

/// Membership of an F_q-point in `G`, `P_±`, `U_±` or `M`.
pub fn is_member_fq(g: &FqMat, tag: SubgroupTag, mu: &Cocharacter) -> Result<bool> {
    if g.n() != mu.n() {
        return Err(Error::SpecMismatch(format!("{}x{} matrix for GL_{}", g.n(), g.n(), mu.n())));
    }
    if !g.is_invertible() {
        return Ok(false);
    }
    Ok(match tag {
        SubgroupTag::G => true,
        SubgroupTag::Pplus => in_block_pattern(g, mu, |bi, bj| bi <= bj),
        SubgroupTag::Pminus => in_block_pattern(g, mu, |bi, bj| bi >= bj),
        SubgroupTag::Uplus => in_block_pattern(g, mu, |bi, bj| bi <= bj) && diag_blocks_identity(g, mu),
        SubgroupTag::Uminus => in_block_pattern(g, mu, |bi, bj| bi >= bj) && diag_blocks_identity(g, mu),
        SubgroupTag::M => in_block_pattern(g, mu, |bi, bj| bi == bj),
        other => return Err(Error::SpecMismatch(format!("{other:?} is not a subgroup of G(F_q)"))),
    })
}

/// Membership of a Laurent matrix in `K_1`, `H^±` or the two intersections `^±H`.
pub fn is_member_laurent(g: &LaurentMat, tag: SubgroupTag, mu: &Cocharacter) -> Result<bool> {
    if !g.is_integral()? {
        return Ok(false);
    }
    let gbar = g.reduce()?;
    Ok(match tag {
        SubgroupTag::K1 => gbar.is_identity(),
        SubgroupTag::Hplus => is_member_fq(&gbar, SubgroupTag::Pplus, mu)?,
        SubgroupTag::Hminus => is_member_fq(&gbar, SubgroupTag::Pminus, mu)?,
        SubgroupTag::LeftH => gbar.is_invertible() && conj_by_mu(g, mu, -1).is_integral()?,
        SubgroupTag::RightH => gbar.is_invertible() && conj_by_mu(g, mu, 1).is_integral()?,
        other => return Err(Error::SpecMismatch(format!("{other:?} is not a subgroup of L+G"))),
    })
}

/// Block-diagonal part of an element of `P_+` or `P_-`.
pub fn levi_component(p: &FqMat, mu: &Cocharacter) -> Result<FqMat> {
    if !(is_member_fq(p, SubgroupTag::Pplus, mu)? || is_member_fq(p, SubgroupTag::Pminus, mu)?) {
        return Err(Error::NotInParabolic(format!("{p:?} for mu = {mu}")));
    }
    let ids = mu.block_ids();
    let zero = p.field().zero();
    Ok(Mat::from_fn(p.n(), |i, j| if ids[i] == ids[j] { *p.get(i, j) } else { zero }))
}

/// Pair membership for the finite zip groups; `tau_power` is ignored for `ZipNormal`.
pub fn is_zip_pair(pm: &FqMat, pp: &FqMat, tag: SubgroupTag, mu: &Cocharacter, tau_power: i64) -> Result<bool> {
    if !is_member_fq(pm, SubgroupTag::Pminus, mu)? || !is_member_fq(pp, SubgroupTag::Pplus, mu)? {
        return Ok(false);
    }
    let (lm, lp) = (levi_component(pm, mu)?, levi_component(pp, mu)?);
    Ok(match tag {
        SubgroupTag::ZipNormal => lm == lp,
        SubgroupTag::ZipFrobenius => lm == lp.frob_pow(tau_power),
        other => return Err(Error::SpecMismatch(format!("{other:?} is not a finite zip group"))),
    })
}

/// `(h_-, h_+) ∈ H^- x H^+` with reductions sharing their Levi component.
pub fn is_loop_zip_pair(hm: &LaurentMat, hp: &LaurentMat, mu: &Cocharacter) -> Result<bool> {
    if !is_member_laurent(hm, SubgroupTag::Hminus, mu)? || !is_member_laurent(hp, SubgroupTag::Hplus, mu)? {
        return Ok(false);
    }
    Ok(levi_component(&hm.reduce()?, mu)? == levi_component(&hp.reduce()?, mu)?)
}

/// `(h, g)` with `g ∈ ^+H`, `h ∈ ^-H` and `h = mu g mu^-1` within precision.
pub fn is_pro_zip_pair(h: &LaurentMat, g: &LaurentMat, mu: &Cocharacter) -> Result<bool> {
    if !is_member_laurent(g, SubgroupTag::LeftH, mu)? || !is_member_laurent(h, SubgroupTag::RightH, mu)? {
        return Ok(false);
    }
    let c = conj_by_mu(g, mu, -1);
    let tol = c.min_precision().min(h.min_precision());
    Ok(c.congruent(h, tol))
}

/// `|GL_n(F_q)| = prod_{i<n} (q^n - q^i)`.
pub fn gl_order(n: usize, q: usize) -> u64 {
    let qn = (q as u64).pow(n as u32);
    (0..n as u32).map(|i| qn - (q as u64).pow(i)).product()
}

const MAX_SCAN: u64 = 2_000_000;

fn guard(mu: &Cocharacter, spec: &FieldSpec) -> Result<()> {
    if mu.n() > 3 || spec.q() > 9 {
        return Err(Error::BudgetExceeded(format!("enumeration needs n <= 3 and q <= 9, got n = {}, q = {}", mu.n(), spec.q())));
    }
    Ok(())
}

/// All of `GL_n(F_q)`, sorted by key.
pub fn enumerate_gl(spec: &'static FieldSpec, n: usize) -> Result<Vec<FqMat>> {
    let total = (spec.q() as u64).checked_pow((n * n) as u32).unwrap_or(u64::MAX);
    if total > MAX_SCAN {
        return Err(Error::BudgetExceeded(format!("scanning {total} matrices for GL_{n}(F_{})", spec.q())));
    }
    let out: Vec<FqMat> = (0..total).map(|k| FqMat::from_key(spec, n, k)).filter(|g| g.is_invertible()).collect();
    assert_eq!(out.len() as u64, gl_order(n, spec.q()), "GL order formula");
    Ok(out)
}

/// Every matrix that agrees with `base` outside `free`, with `free` entries ranging over F_q.
fn fill_free(base: &FqMat, free: &[(usize, usize)]) -> Vec<FqMat> {
    let spec = base.field();
    let mut out = vec![base.clone()];
    for &(i, j) in free {
        out = out
            .into_iter()
            .flat_map(|m| {
                spec.elements().map(move |c| {
                    let mut m2 = m.clone();
                    m2.set(i, j, c);
                    m2
                })
            })
            .collect();
    }
    out
}

fn levi_elements(mu: &Cocharacter, spec: &'static FieldSpec) -> Result<Vec<FqMat>> {
    let n = mu.n();
    let mut out = vec![FqMat::identity(spec, n)];
    for r in mu.blocks() {
        let gl = enumerate_gl(spec, r.len())?;
        out = out
            .into_iter()
            .flat_map(|m| {
                let r = r.clone();
                gl.iter().map(move |b| {
                    let mut m2 = m.clone();
                    for (a, i) in r.clone().enumerate() {
                        for (c, j) in r.clone().enumerate() {
                            m2.set(i, j, *b.get(a, c));
                        }
                    }
                    m2
                })
            })
            .collect::<Vec<_>>();
    }
    Ok(out)
}

fn unipotent_elements(mu: &Cocharacter, spec: &'static FieldSpec, upper: bool) -> Vec<FqMat> {
    let ids = mu.block_ids();
    let n = mu.n();
    let free: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| if upper { ids[i] < ids[j] } else { ids[i] > ids[j] }).collect();
    fill_free(&FqMat::identity(spec, n), &free)
}

fn sorted_unique(mut v: Vec<FqMat>) -> Vec<FqMat> {
    v.sort_by_key(|m| m.key());
    v.dedup_by_key(|m| m.key());
    v
}

/// F_q-points of `G`, `P_±`, `U_±` or `M`, duplicate-free and sorted by key.
pub fn enumerate_points(tag: SubgroupTag, mu: &Cocharacter, spec: &'static FieldSpec) -> Result<Vec<FqMat>> {
    guard(mu, spec)?;
    let prod = |us: Vec<FqMat>, ms: &[FqMat]| -> Vec<FqMat> { us.iter().flat_map(|u| ms.iter().map(move |m| u.mul(m).unwrap())).collect() };
    Ok(match tag {
        SubgroupTag::G => enumerate_gl(spec, mu.n())?,
        SubgroupTag::M => sorted_unique(levi_elements(mu, spec)?),
        SubgroupTag::Uplus => sorted_unique(unipotent_elements(mu, spec, true)),
        SubgroupTag::Uminus => sorted_unique(unipotent_elements(mu, spec, false)),
        SubgroupTag::Pplus => sorted_unique(prod(unipotent_elements(mu, spec, true), &levi_elements(mu, spec)?)),
        SubgroupTag::Pminus => sorted_unique(prod(unipotent_elements(mu, spec, false), &levi_elements(mu, spec)?)),
        other => return Err(Error::SpecMismatch(format!("{other:?} has no finite point enumerator"))),
    })
}

/// `ZipNormal`: pairs `(u_- m, u_+ m)`. `ZipFrobenius`: pairs `(u_- tau(m), u_+ m)`.
pub fn enumerate_zip(tag: SubgroupTag, mu: &Cocharacter, spec: &'static FieldSpec, tau_power: i64) -> Result<Vec<(FqMat, FqMat)>> {
    guard(mu, spec)?;
    let twist = match tag {
        SubgroupTag::ZipNormal => 0,
        SubgroupTag::ZipFrobenius => tau_power,
        other => return Err(Error::SpecMismatch(format!("{other:?} is not a finite zip group"))),
    };
    let um = unipotent_elements(mu, spec, false);
    let up = unipotent_elements(mu, spec, true);
    let ms = levi_elements(mu, spec)?;
    let mut out = Vec::with_capacity(um.len() * up.len() * ms.len());
    for m in &ms {
        let tm = m.frob_pow(twist);
        for a in &um {
            let pm = a.mul(&tm)?;
            for b in &up {
                out.push((pm.clone(), b.mul(m)?));
            }
        }
    }
    Ok(out)
}

/// Uniform element of `G(F_q)` by rejection.
pub fn random_gl<R: Rng>(spec: &'static FieldSpec, n: usize, rng: &mut R) -> FqMat {
    loop {
        let g = Mat::from_fn(n, |_, _| spec.from_code(rng.gen_range(0..spec.q())).unwrap());
        if g.is_invertible() {
            return g;
        }
    }
}

/// Random point of `P_+` (`upper`) or `P_-`.
pub fn random_parabolic<R: Rng>(mu: &Cocharacter, spec: &'static FieldSpec, upper: bool, rng: &mut R) -> FqMat {
    let ids = mu.block_ids();
    loop {
        let g = Mat::from_fn(mu.n(), |i, j| {
            let allowed = if upper { ids[i] <= ids[j] } else { ids[i] >= ids[j] };
            if allowed {
                spec.from_code(rng.gen_range(0..spec.q())).unwrap()
            } else {
                spec.zero()
            }
        });
        if g.is_invertible() {
            return g;
        }
    }
}

/// Constant lift of an F_q-matrix, known modulo `t^prec`.
pub fn lift(g: &FqMat, prec: i32) -> LaurentMat {
    g.lift(&LaurentElt::zero(g.field(), prec), prec)
}

/// Random integral matrix known modulo `t^prec`.
pub fn random_integral<R: Rng>(spec: &'static FieldSpec, n: usize, prec: i32, rng: &mut R) -> LaurentMat {
    Mat::from_fn(n, |_, _| LaurentElt::random_integral(spec, prec, rng))
}

/// Random element of `K = L+G` known modulo `t^prec`.
pub fn random_k<R: Rng>(spec: &'static FieldSpec, n: usize, prec: i32, rng: &mut R) -> LaurentMat {
    let g = random_gl(spec, n, rng);
    let x = random_integral(spec, n, prec - 1, rng);
    lift(&g, prec).add(&x.map(|e| e.shift(1))).unwrap()
}

/// Random element `I + tX` of `K_1`.
pub fn random_k1<R: Rng>(spec: &'static FieldSpec, n: usize, prec: i32, rng: &mut R) -> LaurentMat {
    let x = random_integral(spec, n, prec - 1, rng);
    lift(&FqMat::identity(spec, n), prec).add(&x.map(|e| e.shift(1))).unwrap()
}

/// Random element of `H^+` (`upper`) or `H^-`: a parabolic point plus `tX`.
pub fn random_h<R: Rng>(mu: &Cocharacter, spec: &'static FieldSpec, prec: i32, upper: bool, rng: &mut R) -> LaurentMat {
    let p = random_parabolic(mu, spec, upper, rng);
    let x = random_integral(spec, mu.n(), prec - 1, rng);
    lift(&p, prec).add(&x.map(|e| e.shift(1))).unwrap()
}

/// Random element of `^+H` (`left`) or `^-H`.
///
/// For `^+H`, entry (i, j) with `d_i < d_j` is divisible by `t^(d_j - d_i)` so that
/// `mu g mu^-1` stays integral; diagonal blocks have invertible reduction.
pub fn random_sided_h<R: Rng>(mu: &Cocharacter, spec: &'static FieldSpec, prec: i32, left: bool, rng: &mut R) -> LaurentMat {
    let d = mu.weights();
    let p = random_parabolic(mu, spec, left, rng);
    Mat::from_fn(mu.n(), |i, j| {
        let gap = if left { d[j] - d[i] } else { d[i] - d[j] };
        if gap > 0 {
            LaurentElt::random_integral(spec, prec - gap, rng).shift(gap)
        } else {
            let c = LaurentElt::constant(*p.get(i, j), prec);
            let x = LaurentElt::random_integral(spec, prec - 1, rng).shift(1);
            c.add(&x).unwrap()
        }
    })
}

/// Elements of a group over `R = F_q[t]/t^N` with prescribed block shape.
///
/// Structural zeros are exact, so they carry extra precision.
fn truncated_points(
    mu: &Cocharacter,
    spec: &'static FieldSpec,
    prec: i32,
    upper: bool,
    unipotent: bool,
    budget: u64,
) -> Option<Vec<LaurentMat>> {
    let n = mu.n();
    let ids = mu.block_ids();
    let exact = prec + mu.spread() + 1;
    let free: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let shape = if upper { ids[i] <= ids[j] } else { ids[i] >= ids[j] };
            shape && !(unipotent && ids[i] == ids[j])
        })
        .collect();
    let per = (spec.q() as u64).checked_pow(prec as u32)?;
    let total = per.checked_pow(free.len() as u32)?;
    if total > budget {
        return None;
    }
    let elt = |code: u64| -> LaurentElt {
        let mut c = code;
        let coeffs = (0..prec)
            .map(|_| {
                let d = c % spec.q() as u64;
                c /= spec.q() as u64;
                spec.from_code(d as usize).unwrap()
            })
            .collect();
        LaurentElt::new(spec, 0, prec, coeffs).unwrap()
    };
    let base = Mat::from_fn(n, |i, j| {
        if unipotent && ids[i] == ids[j] {
            LaurentElt::constant(if i == j { spec.one() } else { spec.zero() }, prec)
        } else {
            LaurentElt::zero(spec, exact)
        }
    });
    let mut out = Vec::new();
    for idx in 0..total {
        let mut m = base.clone();
        let mut r = idx;
        for &(i, j) in &free {
            m.set(i, j, elt(r % per));
            r /= per;
        }
        if m.reduce().map(|g| g.is_invertible()).unwrap_or(false) {
            out.push(m);
        }
    }
    Some(out)
}

fn random_truncated<R: Rng>(
    mu: &Cocharacter,
    spec: &'static FieldSpec,
    prec: i32,
    upper: bool,
    unipotent: bool,
    rng: &mut R,
) -> LaurentMat {
    let ids = mu.block_ids();
    let exact = prec + mu.spread() + 1;
    loop {
        let m = Mat::from_fn(mu.n(), |i, j| {
            let shape = if upper { ids[i] <= ids[j] } else { ids[i] >= ids[j] };
            if unipotent && ids[i] == ids[j] {
                LaurentElt::constant(if i == j { spec.one() } else { spec.zero() }, prec)
            } else if shape {
                LaurentElt::random_integral(spec, prec, rng)
            } else {
                LaurentElt::zero(spec, exact)
            }
        });
        if m.reduce().unwrap().is_invertible() {
            return m;
        }
    }
}

/// Whether `x` lies in `L^1 U_+` (`upper`) or `L^1 U_-`: block unipotent with off-block entries in `tR`.
fn in_l1_unipotent(x: &LaurentMat, mu: &Cocharacter, upper: bool) -> Result<bool> {
    let ids = mu.block_ids();
    let n = mu.n();
    for i in 0..n {
        for j in 0..n {
            let e = x.get(i, j);
            let ok = if ids[i] == ids[j] {
                let unit = if i == j { x.field().one() } else { x.field().zero() };
                e.congruent(&LaurentElt::constant(unit, e.prec()), e.prec())
            } else if (ids[i] < ids[j]) == upper {
                e.valuation_bound() >= 1
            } else {
                e.is_zero()
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Inclusion checks for conjugation by `mu(t)` on block subgroups and on `^±H`, `H^±`.
///
/// Parabolic and unipotent families over `F_q[t]/t^N` are enumerated when they
/// have at most `exhaustive_budget` elements and sampled `samples` times otherwise.
pub fn lemma_checks<R: Rng>(
    mu: &Cocharacter,
    spec: &'static FieldSpec,
    prec: i32,
    samples: usize,
    exhaustive_budget: u64,
    rng: &mut R,
) -> Result<Vec<Check>> {
    let n = mu.n();
    let mu_t = mu_matrix(mu, spec, prec);
    let mu_inv = mu_inverse_matrix(mu, spec, prec);
    let mut checks = Vec::new();

    for upper in [true, false] {
        let side = if upper { "plus" } else { "minus" };
        // mu p mu^-1 on the plus side, mu^-1 p mu on the minus side.
        let conj = |p: &LaurentMat| -> Result<LaurentMat> {
            if upper {
                mu_t.mul(p)?.mul(&mu_inv)
            } else {
                mu_inv.mul(p)?.mul(&mu_t)
            }
        };
        for unipotent in [false, true] {
            let (family, exhaustive) = match truncated_points(mu, spec, prec, upper, unipotent, exhaustive_budget) {
                Some(all) => (all, true),
                None => ((0..samples).map(|_| random_truncated(mu, spec, prec, upper, unipotent, rng)).collect(), false),
            };
            let mut failures = 0usize;
            let mut mismatch = 0usize;
            for p in &family {
                let c = conj(p)?;
                let shifted = conj_by_mu(p, mu, if upper { -1 } else { 1 });
                if !c.congruent(&shifted, c.min_precision().min(shifted.min_precision())) {
                    mismatch += 1;
                }
                let ok = if unipotent {
                    is_member_laurent(&c, SubgroupTag::K1, mu)? && in_l1_unipotent(&c, mu, upper)?
                } else {
                    c.is_integral()?
                };
                if !ok {
                    failures += 1;
                }
            }
            let name = format!("integrality.{side}_{}", if unipotent { "unipotent" } else { "parabolic" });
            checks.push(
                Check::new(name, failures == 0 && mismatch == 0)
                    .count("elements", family.len())
                    .count("failures", failures)
                    .count("shift_mismatches", mismatch)
                    .count("exhaustive", exhaustive as i64)
                    .count("precision", prec),
            );
        }
    }

    // Conjugating ^+H shifts valuations by up to the spread, so sample with headroom.
    let wide = prec.max(2 * mu.spread() + 2);

    // ^+H elements g: reduction in P_+, mu g mu^-1 in ^-H, (mu g mu^-1, g) a loop-zip and pro-zip pair.
    let mut fails = [0usize; 4];
    for _ in 0..samples {
        let g = random_sided_h(mu, spec, wide, true, rng);
        let h = conj_by_mu(&g, mu, -1);
        fails[0] += usize::from(!is_member_laurent(&g, SubgroupTag::LeftH, mu)? || !is_member_laurent(&g, SubgroupTag::Hplus, mu)?);
        fails[1] += usize::from(!is_member_laurent(&h, SubgroupTag::RightH, mu)? || !is_member_laurent(&h, SubgroupTag::Hminus, mu)?);
        fails[2] += usize::from(!is_loop_zip_pair(&h, &g, mu)?);
        fails[3] += usize::from(!is_pro_zip_pair(&h, &g, mu)?);
    }
    for (k, name) in
        ["h_inclusion.left_in_h_plus", "h_inclusion.conjugate_in_right", "h_inclusion.loop_zip_pair", "h_inclusion.pro_zip_pair"]
            .iter()
            .enumerate()
    {
        checks.push(Check::new(*name, fails[k] == 0).count("samples", samples).count("failures", fails[k]).count("precision", wide));
    }

    // Elementary witnesses I + t E_ij of K_1 with mu^-1 k mu non-integral.
    let mut witness = None;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut k = lift(&FqMat::identity(spec, n), wide);
            k.set(i, j, LaurentElt::t_pow(spec, 1, wide - 1));
            if !conj_by_mu(&k, mu, 1).is_integral()? && witness.is_none() {
                witness = Some((i, j));
            }
        }
    }
    if mu.is_minuscule() {
        let mut fails = 0usize;
        for _ in 0..samples {
            let k = random_k1(spec, n, wide, rng);
            let hp = random_h(mu, spec, wide, true, rng);
            let hm = random_h(mu, spec, wide, false, rng);
            let ok = conj_by_mu(&k, mu, 1).is_integral()?
                && conj_by_mu(&k, mu, -1).is_integral()?
                && is_member_laurent(&hp, SubgroupTag::LeftH, mu)?
                && is_member_laurent(&hm, SubgroupTag::RightH, mu)?;
            fails += usize::from(!ok);
        }
        checks.push(
            Check::new("h_inclusion.minuscule_equality", fails == 0 && witness.is_none())
                .count("samples", samples)
                .count("failures", fails)
                .count("witnesses", usize::from(witness.is_some())),
        );
    } else {
        let mut c = Check::new("h_inclusion.non_minuscule_witness", witness.is_some()).count("witnesses", usize::from(witness.is_some()));
        if let Some((i, j)) = witness {
            c = c.detail(format!("k = I + t*E_{}{} lies in K_1 but mu^-1 k mu is not integral", i + 1, j + 1));
        }
        checks.push(c);
    }
    Ok(checks)
}

/// The normal zip group is unchanged when `mu` is replaced by `k mu`.
pub fn zip_rescale_check(mu: &Cocharacter, spec: &'static FieldSpec, factors: &[i32]) -> Result<Check> {
    let key = |v: Vec<(FqMat, FqMat)>| -> BTreeSet<(u64, u64)> { v.iter().map(|(a, b)| (a.key(), b.key())).collect() };
    let base = key(enumerate_zip(SubgroupTag::ZipNormal, mu, spec, 0)?);
    let mut same = true;
    for &k in factors {
        same &= key(enumerate_zip(SubgroupTag::ZipNormal, &mu.scale(k)?, spec, 0)?) == base;
    }
    Ok(Check::new("zip_group.rescale_invariance", same).count("group_order", base.len()).count("factors", factors.len()))
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
    fn cocharacter_data() {
        let m = mu("2,2,1,0,0");
        assert_eq!(m.blocks(), vec![0..2, 2..3, 3..5]);
        assert_eq!(m.j_set(), vec![1, 4]);
        assert_eq!(m.block_ids(), vec![0, 0, 1, 2, 2]);
        assert!(!m.is_minuscule());
        assert!(mu("1,1,0").is_minuscule());
        assert!(Cocharacter::parse("0,1").is_err());
        assert_eq!(mu("1,0").scale(2).unwrap(), mu("2,0"));
        assert_eq!(mu("1,0").phi(3), mu("3,0"));
        assert_eq!(mu("1,0").sigma(), mu("1,0"));
        assert_eq!(mu("1,0,-1").to_string(), "(1,0,-1)");
    }

    #[test]
    fn mu_matrices() {
        let f2 = f(2);
        let m = mu_matrix(&mu("1,0,-1"), f2, 4);
        assert_eq!(m.get(0, 0).valuation(), Some(1));
        assert_eq!(m.get(2, 2).valuation(), Some(-1));
        let ctx = WittCtx::get(f2, 3).unwrap();
        let w = mu_matrix_witt(&mu("1,0"), ctx).unwrap();
        assert_eq!(w.get(0, 0).numerator().coords(), &[f2.zero(), f2.one(), f2.zero()]);
        assert!(mu_matrix_witt(&mu("0,-3"), ctx).is_err());
    }

    #[test]
    fn parabolic_membership_and_levi() {
        let f3 = f(3);
        let m = mu("1,0");
        let g = FqMat::from_rows(vec![vec![f3.from_int(2), f3.from_int(1)], vec![f3.zero(), f3.one()]]).unwrap();
        assert!(is_member_fq(&g, SubgroupTag::Pplus, &m).unwrap());
        assert!(!is_member_fq(&g, SubgroupTag::Pminus, &m).unwrap());
        assert!(!is_member_fq(&g, SubgroupTag::Uplus, &m).unwrap());
        let l = levi_component(&g, &m).unwrap();
        assert!(is_member_fq(&l, SubgroupTag::M, &m).unwrap());
        assert_eq!(levi_component(&l, &m).unwrap(), l);
        let u = FqMat::from_rows(vec![vec![f3.one(), f3.from_int(1)], vec![f3.zero(), f3.one()]]).unwrap();
        assert!(levi_component(&u, &m).unwrap().is_identity());
        let full = FqMat::from_rows(vec![vec![f3.one(), f3.one()], vec![f3.one(), f3.from_int(2)]]).unwrap();
        assert!(matches!(levi_component(&full, &m), Err(Error::NotInParabolic(_))));
    }

    #[test]
    fn conjugation_shift_example() {
        let f2 = f(2);
        let g = lift(&FqMat::from_rows(vec![vec![f2.one(), f2.one()], vec![f2.one(), f2.zero()]]).unwrap(), 4);
        let c = conj_by_mu(&g, &mu("1,0"), 1);
        assert_eq!(c.get(0, 1).valuation(), Some(-1));
        assert_eq!(c.get(1, 0).valuation(), Some(1));
        assert_eq!(c.get(0, 0).valuation(), Some(0));
        assert_eq!(conj_by_mu(&c, &mu("1,0"), -1), g);
        let m = mu_matrix(&mu("1,0"), f2, 6);
        let mi = mu_inverse_matrix(&mu("1,0"), f2, 6);
        let prod = mi.mul(&g).unwrap().mul(&m).unwrap();
        assert!(prod.congruent(&c, 3));
    }

    #[test]
    fn point_counts() {
        let f2 = f(2);
        let m = mu("1,0");
        assert_eq!(enumerate_points(SubgroupTag::G, &m, f2).unwrap().len(), 6);
        assert_eq!(enumerate_points(SubgroupTag::Uplus, &m, f2).unwrap().len(), 2);
        assert_eq!(enumerate_points(SubgroupTag::M, &m, f2).unwrap().len(), 1);
        assert_eq!(enumerate_zip(SubgroupTag::ZipNormal, &m, f2, 0).unwrap().len(), 4);
        let m3 = mu("1,1,0");
        assert_eq!(enumerate_points(SubgroupTag::G, &m3, f2).unwrap().len(), 168);
        assert_eq!(enumerate_points(SubgroupTag::Pplus, &m3, f2).unwrap().len(), 24);
        assert_eq!(enumerate_points(SubgroupTag::M, &m3, f(3)).unwrap().len(), 48 * 2);
        assert!(matches!(enumerate_points(SubgroupTag::G, &mu("1,0,0,0"), f2), Err(Error::BudgetExceeded(_))));
        assert!(matches!(enumerate_points(SubgroupTag::G, &m, f(25)), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn zip_group_membership() {
        let f4 = f(4);
        let m = mu("1,0");
        for (pm, pp) in enumerate_zip(SubgroupTag::ZipNormal, &m, f4, 0).unwrap() {
            assert!(is_zip_pair(&pm, &pp, SubgroupTag::ZipNormal, &m, 0).unwrap());
        }
        let frob = enumerate_zip(SubgroupTag::ZipFrobenius, &m, f4, 1).unwrap();
        assert_eq!(frob.len(), 4 * 9 * 4);
        let mut mixed = 0;
        for (pm, pp) in &frob {
            assert!(is_zip_pair(pm, pp, SubgroupTag::ZipFrobenius, &m, 1).unwrap());
            mixed += usize::from(!is_zip_pair(pm, pp, SubgroupTag::ZipNormal, &m, 0).unwrap());
        }
        assert!(mixed > 0);
    }

    #[test]
    fn laurent_membership() {
        let f2 = f(2);
        let m = mu("1,0");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert!(is_member_laurent(&random_k1(f2, 2, 5, &mut rng), SubgroupTag::K1, &m).unwrap());
            let g = random_sided_h(&m, f2, 5, true, &mut rng);
            assert!(is_member_laurent(&g, SubgroupTag::LeftH, &m).unwrap());
            assert!(is_member_laurent(&g, SubgroupTag::Hplus, &m).unwrap());
            let h = random_sided_h(&m, f2, 5, false, &mut rng);
            assert!(is_member_laurent(&h, SubgroupTag::RightH, &m).unwrap());
        }
        let mut k = lift(&FqMat::identity(f2, 2), 4);
        k.set(0, 1, LaurentElt::t_pow(f2, 1, 3));
        assert!(is_member_laurent(&k, SubgroupTag::K1, &m).unwrap());
        assert!(is_member_laurent(&k, SubgroupTag::RightH, &m).unwrap());
        assert!(!is_member_laurent(&k, SubgroupTag::RightH, &mu("2,0")).unwrap());
    }

    #[test]
    fn lemma_checks_pass_on_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for prec in 1..=3 {
            for c in lemma_checks(&mu("1,0"), f(2), prec, 50, 1 << 12, &mut rng).unwrap() {
                assert!(c.pass, "{c:?}");
            }
        }
        let checks = lemma_checks(&mu("2,0"), f(2), 6, 50, 1 << 12, &mut rng).unwrap();
        let w = checks.iter().find(|c| c.name == "h_inclusion.non_minuscule_witness").unwrap();
        assert!(w.pass && w.detail.is_some());
    }

    #[test]
    fn rescaling_leaves_zip_group_alone() {
        assert!(zip_rescale_check(&mu("1,0"), f(2), &[2, 3]).unwrap().pass);
    }
}
