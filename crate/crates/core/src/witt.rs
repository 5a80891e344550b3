//! p-typical Witt vectors of length N over F_q and their p-inverted fractions.
//!
//! Addition and multiplication evaluate the integral structure polynomials
//! `S_n`, `P_n` (reduced mod p) on coordinates. The polynomials come from the
//! ghost recursion `w_n = sum_i p^i X_i^(p^(n-i))` computed once over Z.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{FieldSpec, FqElem};

/// Largest supported length.
pub const MAX_LEN: usize = 4;

/// Integer polynomial in `X_0..X_{N-1}, Y_0..Y_{N-1}`; exponent vectors have length 2N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl IntPoly {
    fn zero(nvars: usize) -> Self {
        IntPoly { nvars, terms: BTreeMap::new() }
    }

    fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, BigInt::one());
        IntPoly { nvars, terms }
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    fn scale(&self, k: &BigInt) -> Self {
        let mut r = IntPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), c * k);
        }
        r
    }

    fn mul(&self, o: &Self) -> Self {
        let mut acc: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *acc.entry(e).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        IntPoly { nvars: self.nvars, terms: acc }
    }

    fn pow(&self, k: u32) -> Self {
        let mut acc = IntPoly::zero(self.nvars);
        acc.terms.insert(vec![0; self.nvars], BigInt::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact division; `None` if some coefficient is not divisible.
    fn div_exact(&self, d: &BigInt) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if !(c % d).is_zero() {
                return None;
            }
            terms.insert(e.clone(), c / d);
        }
        Some(IntPoly { nvars: self.nvars, terms })
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the monomial with the given exponent vector.
    pub fn coeff(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Evaluates over Z.
    pub fn eval_int(&self, vals: &[BigInt]) -> BigInt {
        let mut s = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (v, &k) in vals.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(v.clone(), k as usize);
                }
            }
            s += t;
        }
        s
    }
}

impl fmt::Display for IntPoly {
    /// Terms by increasing total degree, e.g. `X1 + Y1 - X0*Y0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.nvars / 2;
        let mut terms: Vec<(&Vec<u32>, &BigInt)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let (da, db) = (a.0.iter().sum::<u32>(), b.0.iter().sum::<u32>());
            da.cmp(&db).then_with(|| b.0.cmp(a.0))
        });
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in terms.into_iter().enumerate() {
            let sign = match (k, c.is_negative()) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            let mut parts = Vec::new();
            if !c.abs().is_one() || e.iter().all(|&x| x == 0) {
                parts.push(c.abs().to_string());
            }
            for (i, &x) in e.iter().enumerate().filter(|(_, &x)| x > 0) {
                let name = if i < n { format!("X{i}") } else { format!("Y{}", i - n) };
                parts.push(if x == 1 { name } else { format!("{name}^{x}") });
            }
            write!(f, "{sign}{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// Integral sum and product polynomials `S_0..S_{N-1}`, `P_0..P_{N-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructurePolys {
    pub sum: Vec<IntPoly>,
    pub prod: Vec<IntPoly>,
}

fn ghost_of(parts: &[IntPoly], p: u32, n: usize, powers: &mut HashMap<(usize, u32), IntPoly>) -> IntPoly {
    // sum_{i<n} p^i parts_i^(p^(n-i)), with memoized repeated p-th powers.
    let mut acc = IntPoly::zero(parts[0].nvars);
    for (i, part) in parts.iter().enumerate().take(n) {
        let k = (n - i) as u32;
        for j in 1..=k {
            if !powers.contains_key(&(i, j)) {
                let prev = if j == 1 { part.clone() } else { powers[&(i, j - 1)].clone() };
                powers.insert((i, j), prev.pow(p));
            }
        }
        acc = acc.add(&powers[&(i, k)].scale(&BigInt::from(p).pow(i as u32)));
    }
    acc
}

fn generate(p: u32, n_len: usize) -> StructurePolys {
    let nv = 2 * n_len;
    let ghost = |off: usize, n: usize| {
        let mut g = IntPoly::zero(nv);
        for i in 0..=n {
            let x = IntPoly::var(nv, off + i).pow(p.pow((n - i) as u32));
            g = g.add(&x.scale(&BigInt::from(p).pow(i as u32)));
        }
        g
    };
    let mut sum: Vec<IntPoly> = Vec::new();
    let mut prod: Vec<IntPoly> = Vec::new();
    let (mut spow, mut ppow) = (HashMap::new(), HashMap::new());
    for n in 0..n_len {
        let (gx, gy) = (ghost(0, n), ghost(n_len, n));
        let pn = BigInt::from(p).pow(n as u32);
        let s_rest = if n == 0 { IntPoly::zero(nv) } else { ghost_of(&sum, p, n, &mut spow) };
        let s = gx.add(&gy).add(&s_rest.scale(&BigInt::from(-1)));
        sum.push(s.div_exact(&pn).expect("ghost recursion for S_n divides exactly"));
        let p_rest = if n == 0 { IntPoly::zero(nv) } else { ghost_of(&prod, p, n, &mut ppow) };
        let m = gx.mul(&gy).add(&p_rest.scale(&BigInt::from(-1)));
        prod.push(m.div_exact(&pn).expect("ghost recursion for P_n divides exactly"));
    }
    StructurePolys { sum, prod }
}

/// The structure polynomials for `(p, N)`, generated once and cached.
pub fn structure_polys(p: u8, n_len: usize) -> Result<&'static StructurePolys> {
    check_len(p, n_len)?;
    static CACHE: OnceLock<Mutex<HashMap<(u8, usize), &'static StructurePolys>>> = OnceLock::new();
    let mut guard = CACHE.get_or_init(Default::default).lock().unwrap();
    Ok(*guard.entry((p, n_len)).or_insert_with(|| Box::leak(Box::new(generate(p as u32, n_len)))))
}

fn check_len(p: u8, n_len: usize) -> Result<()> {
    if n_len == 0 || n_len > MAX_LEN {
        return Err(Error::BudgetExceeded(format!("Witt length {n_len} outside 1..={MAX_LEN}")));
    }
    // p = 5 at length 4 needs polynomials with ~10^5 terms.
    if p >= 5 && n_len > 3 {
        return Err(Error::BudgetExceeded(format!("Witt length {n_len} too large for p = {p}")));
    }
    Ok(())
}

/// A structure polynomial reduced mod p: `(coefficient, [(variable, exponent)])`.
#[derive(Debug)]
struct ModPoly {
    terms: Vec<(u8, Vec<(usize, u32)>)>,
}

impl ModPoly {
    fn from_int(poly: &IntPoly, p: u8) -> Self {
        let pb = BigInt::from(p);
        let terms = poly
            .terms
            .iter()
            .filter_map(|(e, c)| {
                let r = ((c % &pb) + &pb) % &pb;
                let r = r.to_u8().unwrap();
                (r != 0).then(|| (r, e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k)).collect()))
            })
            .collect();
        ModPoly { terms }
    }

    /// `pows[var][e]` holds `x_var^e` for `e < q`; larger exponents use `x^q = x`.
    fn eval(&self, pows: &[Vec<FqElem>], spec: &'static FieldSpec) -> FqElem {
        let q1 = spec.q() as u32 - 1;
        let mut s = spec.zero();
        for (c, mono) in &self.terms {
            let mut t = spec.from_int(*c as i64);
            for &(var, k) in mono {
                let kk = ((k - 1) % q1) + 1;
                t = t * pows[var][kk as usize];
                if t.is_zero() {
                    break;
                }
            }
            s = s + t;
        }
        s
    }
}

/// Shared context for Witt vectors of a fixed length over a fixed field.
pub struct WittCtx {
    spec: &'static FieldSpec,
    len: usize,
    sum: Vec<ModPoly>,
    prod: Vec<ModPoly>,
}

impl fmt::Debug for WittCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W_{}(F_{})", self.len, self.spec.q())
    }
}

impl WittCtx {
    /// Context for `W_N(F_q)`; cached so equal parameters share one context.
    pub fn get(spec: &'static FieldSpec, n_len: usize) -> Result<&'static WittCtx> {
        let polys = structure_polys(spec.p(), n_len)?;
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), &'static WittCtx>>> = OnceLock::new();
        let mut guard = CACHE.get_or_init(Default::default).lock().unwrap();
        Ok(*guard.entry((spec.q(), n_len)).or_insert_with(|| {
            let p = spec.p();
            Box::leak(Box::new(WittCtx {
                spec,
                len: n_len,
                sum: polys.sum.iter().map(|s| ModPoly::from_int(s, p)).collect(),
                prod: polys.prod.iter().map(|s| ModPoly::from_int(s, p)).collect(),
            }))
        }))
    }

    pub fn spec(&self) -> &'static FieldSpec {
        self.spec
    }
    pub fn len(&self) -> usize {
        self.len
    }
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
    pub fn p(&self) -> u8 {
        self.spec.p()
    }

    pub fn zero(&'static self) -> WittElt {
        WittElt { ctx: self, coords: vec![self.spec.zero(); self.len] }
    }
    pub fn one(&'static self) -> WittElt {
        self.teichmuller(self.spec.one())
    }
    pub fn teichmuller(&'static self, x: FqElem) -> WittElt {
        let mut w = self.zero();
        w.coords[0] = x;
        w
    }

    pub fn elem(&'static self, coords: Vec<FqElem>) -> Result<WittElt> {
        if coords.len() != self.len {
            return Err(Error::Parse(format!("expected {} Witt coordinates, got {}", self.len, coords.len())));
        }
        if coords.iter().any(|c| !std::ptr::eq(c.spec(), self.spec)) {
            return Err(Error::SpecMismatch("Witt coordinate from another field".into()));
        }
        Ok(WittElt { ctx: self, coords })
    }

    /// `p^k` (zero when `k >= N`).
    pub fn p_pow(&'static self, k: usize) -> WittElt {
        (0..k).fold(self.one(), |w, _| w.mul_p())
    }

    /// Image of an integer under Z -> W_N(F_q), by double-and-add.
    pub fn from_integer(&'static self, n: i64) -> WittElt {
        let mut acc = self.zero();
        let mut base = self.one();
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.add(&base).unwrap();
            }
            base = base.add(&base).unwrap();
            k >>= 1;
        }
        if n < 0 {
            acc.neg()
        } else {
            acc
        }
    }

    pub fn random<R: Rng>(&'static self, rng: &mut R) -> WittElt {
        let coords = (0..self.len).map(|_| self.spec.from_code(rng.gen_range(0..self.spec.q())).unwrap()).collect();
        WittElt { ctx: self, coords }
    }

    fn powers(&self, a: &[FqElem], b: &[FqElem]) -> Vec<Vec<FqElem>> {
        let q = self.spec.q();
        a.iter()
            .chain(b.iter())
            .map(|&x| {
                let mut v = Vec::with_capacity(q);
                v.push(self.spec.one());
                for i in 1..q {
                    v.push(v[i - 1] * x);
                }
                v
            })
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Op {
    Add,
    Mul,
}

/// A Witt vector `(x_0, ..., x_{N-1})`.
#[derive(Clone)]
pub struct WittElt {
    ctx: &'static WittCtx,
    coords: Vec<FqElem>,
}

impl PartialEq for WittElt {
    fn eq(&self, o: &Self) -> bool {
        std::ptr::eq(self.ctx, o.ctx) && self.coords == o.coords
    }
}
impl Eq for WittElt {}

impl WittElt {
    pub fn ctx(&self) -> &'static WittCtx {
        self.ctx
    }
    pub fn coords(&self) -> &[FqElem] {
        &self.coords
    }

    fn check(&self, o: &Self) -> Result<()> {
        if std::ptr::eq(self.ctx, o.ctx) {
            Ok(())
        } else {
            Err(Error::SpecMismatch(format!("{:?} vs {:?}", self.ctx, o.ctx)))
        }
    }

    fn apply(&self, o: &Self, op: Op) -> Vec<FqElem> {
        let polys = if op == Op::Add { &self.ctx.sum } else { &self.ctx.prod };
        let pows = self.ctx.powers(&self.coords, &o.coords);
        polys.iter().map(|poly| poly.eval(&pows, self.ctx.spec)).collect()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(WittElt { ctx: self.ctx, coords: self.apply(o, Op::Add) })
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(WittElt { ctx: self.ctx, coords: self.apply(o, Op::Mul) })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    /// Finds `b` with `op(self, b) = target`, one coordinate at a time.
    ///
    /// Coordinate n of `op(a, b)` is affine in `b_n` once `b_0..b_{n-1}` are fixed.
    fn solve(&self, target: &Self, op: Op) -> Result<Self> {
        let spec = self.ctx.spec;
        let mut b = self.ctx.zero();
        for n in 0..self.ctx.len {
            b.coords[n] = spec.zero();
            let at0 = self.apply(&b, op)[n];
            b.coords[n] = spec.one();
            let at1 = self.apply(&b, op)[n];
            let slope = at1 - at0;
            if slope.is_zero() {
                return Err(Error::NotAUnit(format!("leading Witt coordinate of {self:?} is zero")));
            }
            b.coords[n] = (target.coords[n] - at0) * slope.inv()?;
        }
        Ok(b)
    }

    pub fn neg(&self) -> Self {
        self.solve(&self.ctx.zero(), Op::Add).expect("addition is always solvable")
    }

    /// Inverse of a unit (`x_0 != 0`).
    pub fn inv(&self) -> Result<Self> {
        if self.coords[0].is_zero() {
            return Err(Error::NotAUnit(format!("{self:?} has x_0 = 0")));
        }
        self.solve(&self.ctx.one(), Op::Mul)
    }

    /// Coordinatewise p-power.
    pub fn frobenius(&self) -> Self {
        self.frobenius_pow(1)
    }

    pub fn frobenius_pow(&self, k: i64) -> Self {
        WittElt { ctx: self.ctx, coords: self.coords.iter().map(|c| c.frobenius_pow(k)).collect() }
    }

    /// Multiplication by p: `(0, x_0^p, ..., x_{N-2}^p)`.
    pub fn mul_p(&self) -> Self {
        let mut coords = vec![self.ctx.spec.zero()];
        coords.extend(self.coords[..self.ctx.len - 1].iter().map(|c| c.frobenius()));
        WittElt { ctx: self.ctx, coords }
    }

    /// Division by p of an element with `x_0 = 0`; the last coordinate becomes unknown and is set to 0.
    pub fn div_p(&self) -> Result<Self> {
        if !self.coords[0].is_zero() {
            return Err(Error::NotIntegral(format!("{self:?} is not divisible by p")));
        }
        let mut coords: Vec<FqElem> = self.coords[1..].iter().map(|c| c.pth_root()).collect();
        coords.push(self.ctx.spec.zero());
        Ok(WittElt { ctx: self.ctx, coords })
    }

    /// Index of the first nonzero coordinate among the first `known`.
    pub fn valuation_within(&self, known: usize) -> Option<usize> {
        self.coords.iter().take(known).position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Keeps the first `known` coordinates, zeroing the rest.
    pub fn truncated(&self, known: usize) -> Self {
        let mut w = self.clone();
        for c in w.coords.iter_mut().skip(known) {
            *c = self.ctx.spec.zero();
        }
        w
    }
}

impl fmt::Debug for WittElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", cs.join(", "))
    }
}

/// `p^{-e} w` with `w` known modulo `p^len`; absolute precision `len - e`.
///
/// Canonical form: when `e > 0` the numerator is a unit or the known window is empty.
#[derive(Clone)]
pub struct WittFraction {
    e: u32,
    w: WittElt,
    len: usize,
}

impl WittFraction {
    /// Builds and canonicalizes `p^{-e} w` with `w` fully known.
    pub fn new(w: WittElt, e: u32) -> Result<Self> {
        let len = w.ctx.len;
        Self::with_known(w, e, len)
    }

    pub fn with_known(w: WittElt, e: u32, len: usize) -> Result<Self> {
        let len = len.min(w.ctx.len);
        let w = w.truncated(len);
        let mut f = WittFraction { e, w, len };
        while f.e > 0 && f.len > 0 && f.w.coords[0].is_zero() {
            f.w = f.w.div_p()?;
            f.len -= 1;
            f.e -= 1;
        }
        if f.precision() <= 0 {
            return Err(Error::InsufficientPrecision(format!("p^-{e} times a numerator known modulo p^{len} has no known digits")));
        }
        Ok(f)
    }

    pub fn from_witt(w: WittElt) -> Self {
        let len = w.ctx.len;
        WittFraction { e: 0, w, len }
    }

    pub fn zero(ctx: &'static WittCtx) -> Self {
        Self::from_witt(ctx.zero())
    }
    pub fn one(ctx: &'static WittCtx) -> Self {
        Self::from_witt(ctx.one())
    }

    /// `p^k` for any integer k, numerator known to full length.
    pub fn p_pow(ctx: &'static WittCtx, k: i32) -> Result<Self> {
        if k >= 0 {
            Ok(Self::from_witt(ctx.p_pow(k as usize)))
        } else {
            Self::new(ctx.one(), (-k) as u32)
        }
    }

    pub fn ctx(&self) -> &'static WittCtx {
        self.w.ctx
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn numerator(&self) -> &WittElt {
        &self.w
    }
    pub fn known_len(&self) -> usize {
        self.len
    }

    /// The value is known modulo `p^precision()`.
    pub fn precision(&self) -> i32 {
        self.len as i32 - self.e as i32
    }

    pub fn valuation(&self) -> Option<i32> {
        self.w.valuation_within(self.len).map(|v| v as i32 - self.e as i32)
    }

    pub fn valuation_bound(&self) -> i32 {
        self.valuation().unwrap_or_else(|| self.precision())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    fn check(&self, o: &Self) -> Result<()> {
        self.w.check(&o.w)
    }

    /// Numerator rescaled to denominator `p^e` (requires `e >= self.e`).
    fn lifted(&self, e: u32) -> (WittElt, usize) {
        let k = (e - self.e) as usize;
        let w = (0..k).fold(self.w.clone(), |w, _| w.mul_p());
        (w, (self.len + k).min(self.w.ctx.len))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let e = self.e.max(o.e);
        let (a, la) = self.lifted(e);
        let (b, lb) = o.lifted(e);
        Self::with_known(a.add(&b)?, e, la.min(lb))
    }

    pub fn neg(&self) -> Self {
        WittFraction { e: self.e, w: self.w.neg().truncated(self.len), len: self.len }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let va = self.w.valuation_within(self.len).unwrap_or(self.len);
        let vb = o.w.valuation_within(o.len).unwrap_or(o.len);
        let len = (self.len + vb).min(o.len + va).min(self.w.ctx.len);
        Self::with_known(self.w.mul(&o.w)?, self.e + o.e, len)
    }

    /// Splits a nonzero value as `p^v u` with `u` a unit known modulo `p^len`.
    fn unit_part(&self) -> Result<(i32, WittElt, usize)> {
        let v = match self.w.valuation_within(self.len) {
            Some(v) => v,
            None if self.len == 0 => {
                return Err(Error::InsufficientPrecision("element with an empty window".into()));
            }
            None => return Err(Error::NotAUnit(format!("zero modulo p^{}", self.precision()))),
        };
        let u = (0..v).try_fold(self.w.clone(), |w, _| w.div_p())?;
        Ok((v as i32 - self.e as i32, u, self.len - v))
    }

    pub fn inv(&self) -> Result<Self> {
        let (v, u, rel) = self.unit_part()?;
        let ui = u.inv()?.truncated(rel);
        if v <= 0 {
            let k = (-v) as usize;
            let w = (0..k).fold(ui, |w, _| w.mul_p());
            Self::with_known(w, 0, rel + k)
        } else {
            Self::with_known(ui, v as u32, rel)
        }
    }

    /// Multiplication by `p^k` (exact up to storage length).
    pub fn mul_p_pow(&self, k: i32) -> Result<Self> {
        if k >= 0 {
            let k = k as u32;
            if self.e >= k {
                return Ok(WittFraction { e: self.e - k, w: self.w.clone(), len: self.len });
            }
            let extra = (k - self.e) as usize;
            let w = (0..extra).fold(self.w.clone(), |w, _| w.mul_p());
            Self::with_known(w, 0, self.len + extra)
        } else {
            Self::with_known(self.w.clone(), self.e + (-k) as u32, self.len)
        }
    }

    pub fn frobenius_pow(&self, k: i64) -> Self {
        WittFraction { e: self.e, w: self.w.frobenius_pow(k), len: self.len }
    }

    pub fn is_integral(&self) -> Result<bool> {
        match self.valuation() {
            Some(v) => Ok(v >= 0),
            None if self.precision() >= 0 => Ok(true),
            None => Err(Error::InsufficientPrecision("zero with negative precision".into())),
        }
    }

    /// Residue in F_q of an integral element.
    pub fn reduce(&self) -> Result<FqElem> {
        if let Some(v) = self.valuation() {
            if v < 0 {
                return Err(Error::NotIntegral(format!("valuation {v}")));
            }
        }
        if self.precision() < 1 {
            return Err(Error::InsufficientPrecision(format!("known modulo p^{}", self.precision())));
        }
        Ok(if self.e == 0 { self.w.coords[0] } else { self.w.ctx.spec.zero() })
    }

    /// Provable agreement modulo `p^n`.
    pub fn congruent(&self, o: &Self, n: i32) -> bool {
        if self.precision() < n || o.precision() < n {
            return false;
        }
        match self.sub(o) {
            Ok(d) => d.valuation_bound() >= n,
            Err(_) => false,
        }
    }

    pub fn to_json(&self) -> WittJson {
        WittJson {
            p: self.w.ctx.p(),
            n: self.w.ctx.len,
            coords: self.w.coords.iter().map(|c| c.coeffs()).collect(),
            e: self.e,
            prec: self.precision(),
        }
    }

    pub fn from_json(spec: &'static FieldSpec, j: &WittJson) -> Result<Self> {
        if j.p != spec.p() {
            return Err(Error::SpecMismatch(format!("p = {} for a field of characteristic {}", j.p, spec.p())));
        }
        let ctx = WittCtx::get(spec, j.n)?;
        let coords = j.coords.iter().map(|c| spec.elem(&c.iter().map(|&x| x as i64).collect::<Vec<_>>())).collect::<Result<Vec<_>>>()?;
        let known = (j.prec + j.e as i32).clamp(0, j.n as i32) as usize;
        Self::with_known(ctx.elem(coords)?, j.e, known)
    }
}

/// Strict equality: same denominator, same precision, same known digits.
impl PartialEq for WittFraction {
    fn eq(&self, o: &Self) -> bool {
        std::ptr::eq(self.w.ctx, o.w.ctx)
            && self.precision() == o.precision()
            && match (self.is_zero(), o.is_zero()) {
                (true, true) => true,
                (false, false) => self.e == o.e && self.w.coords[..self.len] == o.w.coords[..o.len],
                _ => false,
            }
    }
}

impl fmt::Debug for WittFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p^-{} {:?} + O(p^{})", self.e, self.w.truncated(self.len), self.precision())
    }
}

/// Serialized form `{p, N, coords, e, prec}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WittJson {
    pub p: u8,
    #[serde(rename = "N")]
    pub n: usize,
    pub coords: Vec<Vec<u8>>,
    pub e: u32,
    pub prec: i32,
}

/// Outcome of comparing Witt arithmetic over `F_p` with arithmetic in `Z/p^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SelfTest {
    pub p: u8,
    #[serde(rename = "N")]
    pub len: usize,
    pub cases: usize,
    pub mismatches: usize,
}

/// Value in `Z/p^N` of a Witt vector over `F_p`: `sum_i p^i [x_i]`, where the Teichmuller
/// representative `[x]` of a digit is `x^(p^(N-1)) mod p^N`.
pub fn to_integer(w: &WittElt) -> Result<u64> {
    let ctx = w.ctx();
    if ctx.spec().m() != 1 {
        return Err(Error::UnsupportedField(format!("integer model needs a prime field, got q = {}", ctx.spec().q())));
    }
    let p = ctx.p() as u64;
    let modulus = p.pow(ctx.len() as u32);
    let teich = |x: u64| -> u64 {
        let mut r = x % modulus;
        for _ in 1..ctx.len() {
            // r <- r^p
            let base = r;
            r = 1;
            for _ in 0..p {
                r = r * base % modulus;
            }
        }
        r
    };
    let mut total = 0u64;
    let mut scale = 1u64;
    for c in w.coords() {
        total = (total + scale * teich(c.coeffs()[0] as u64)) % modulus;
        scale *= p;
    }
    Ok(total)
}

/// Random sums and products checked against `Z/p^N` through [`to_integer`].
pub fn integer_selftest<R: Rng>(p: u8, len: usize, cases: usize, rng: &mut R) -> Result<SelfTest> {
    let ctx = WittCtx::get(FieldSpec::get(p, 1)?, len)?;
    let modulus = (p as u64).pow(len as u32);
    let mut mismatches = 0;
    for _ in 0..cases {
        let (a, b) = (ctx.random(rng), ctx.random(rng));
        let (ia, ib) = (to_integer(&a)?, to_integer(&b)?);
        mismatches += usize::from(to_integer(&a.add(&b)?)? != (ia + ib) % modulus);
        mismatches += usize::from(to_integer(&a.mul(&b)?)? != ia * ib % modulus);
        mismatches += usize::from(to_integer(&a.neg())? != (modulus - ia) % modulus);
    }
    Ok(SelfTest { p, len, cases, mismatches })
}
