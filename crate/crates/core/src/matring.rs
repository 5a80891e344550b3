//! Square matrices over F_q, truncated Laurent series and Witt fractions.
//!
//! The DVR rings share one Smith normal form routine: `x = a diag(pi^d) b`
//! with `a`, `b` integral of invertible reduction and `d` non-increasing.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gf::{FieldSpec, FqElem};
use crate::series::{LaurentElt, LaurentJson};
use crate::witt::{WittCtx, WittFraction, WittJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RingTag {
    Fq,
    Laurent,
    Witt,
}

/// Entry ring of a matrix. Errors carry precision loss or ring mismatch.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    const TAG: RingTag;
    fn add(&self, o: &Self) -> Result<Self>;
    fn sub(&self, o: &Self) -> Result<Self>;
    fn mul(&self, o: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self>;
    /// Zero and one in the same ring, known to absolute precision `prec` where that applies.
    fn zero_at(&self, prec: i32) -> Self;
    fn one_at(&self, prec: i32) -> Self;
    /// Absolute precision (`i32::MAX` for exact rings).
    fn precision(&self) -> i32;
    /// Pivot preference: valuation for DVRs, 0 for nonzero field elements, `None` for (window) zero.
    fn pivot_rank(&self) -> Option<i32>;
    /// Frobenius `sigma^k` on coefficients.
    fn frob_pow(&self, k: i64) -> Self;
    fn field(&self) -> &'static FieldSpec;
    fn to_value(&self) -> Value;
}

/// A complete discrete valuation ring (or its fraction field) with uniformizer pi.
pub trait Dvr: Ring {
    fn valuation(&self) -> Option<i32>;
    /// `pi^k` known to absolute precision `prec`.
    fn pi_pow_at(&self, k: i32, prec: i32) -> Result<Self>;
    /// Exact multiplication by `pi^k`.
    fn mul_pi_pow(&self, k: i32) -> Result<Self>;
    fn reduce(&self) -> Result<FqElem>;
    fn is_integral(&self) -> Result<bool>;
    /// Lift of a residue, known to absolute precision `prec`.
    fn lift_at(&self, c: FqElem, prec: i32) -> Self;
    fn congruent(&self, o: &Self, n: i32) -> bool;
}

impl Ring for FqElem {
    const TAG: RingTag = RingTag::Fq;
    fn add(&self, o: &Self) -> Result<Self> {
        self.checked_add(o)
    }
    fn sub(&self, o: &Self) -> Result<Self> {
        self.checked_sub(o)
    }
    fn mul(&self, o: &Self) -> Result<Self> {
        self.checked_mul(o)
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn inv(&self) -> Result<Self> {
        FqElem::inv(self)
    }
    fn zero_at(&self, _: i32) -> Self {
        self.spec().zero()
    }
    fn one_at(&self, _: i32) -> Self {
        self.spec().one()
    }
    fn precision(&self) -> i32 {
        i32::MAX
    }
    fn pivot_rank(&self) -> Option<i32> {
        (!self.is_zero()).then_some(0)
    }
    fn frob_pow(&self, k: i64) -> Self {
        self.frobenius_pow(k)
    }
    fn field(&self) -> &'static FieldSpec {
        self.spec()
    }
    fn to_value(&self) -> Value {
        serde_json::to_value(self.coeffs()).unwrap()
    }
}

impl Ring for LaurentElt {
    const TAG: RingTag = RingTag::Laurent;
    fn add(&self, o: &Self) -> Result<Self> {
        LaurentElt::add(self, o)
    }
    fn sub(&self, o: &Self) -> Result<Self> {
        LaurentElt::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Result<Self> {
        LaurentElt::mul(self, o)
    }
    fn neg(&self) -> Self {
        LaurentElt::neg(self)
    }
    fn inv(&self) -> Result<Self> {
        LaurentElt::inv(self)
    }
    fn zero_at(&self, prec: i32) -> Self {
        LaurentElt::zero(self.spec(), prec)
    }
    fn one_at(&self, prec: i32) -> Self {
        LaurentElt::one(self.spec(), prec)
    }
    fn precision(&self) -> i32 {
        self.prec()
    }
    fn pivot_rank(&self) -> Option<i32> {
        self.valuation()
    }
    fn frob_pow(&self, k: i64) -> Self {
        self.sigma_pow(k)
    }
    fn field(&self) -> &'static FieldSpec {
        self.spec()
    }
    fn to_value(&self) -> Value {
        serde_json::to_value(self.to_json()).unwrap()
    }
}

impl Dvr for LaurentElt {
    fn valuation(&self) -> Option<i32> {
        LaurentElt::valuation(self)
    }
    fn pi_pow_at(&self, k: i32, prec: i32) -> Result<Self> {
        Ok(LaurentElt::monomial(self.spec().one(), k, prec))
    }
    fn mul_pi_pow(&self, k: i32) -> Result<Self> {
        Ok(self.shift(k))
    }
    fn reduce(&self) -> Result<FqElem> {
        self.reduce_mod_t()
    }
    fn is_integral(&self) -> Result<bool> {
        LaurentElt::is_integral(self)
    }
    fn lift_at(&self, c: FqElem, prec: i32) -> Self {
        LaurentElt::constant(c, prec)
    }
    fn congruent(&self, o: &Self, n: i32) -> bool {
        LaurentElt::congruent(self, o, n)
    }
}

impl Ring for WittFraction {
    const TAG: RingTag = RingTag::Witt;
    fn add(&self, o: &Self) -> Result<Self> {
        WittFraction::add(self, o)
    }
    fn sub(&self, o: &Self) -> Result<Self> {
        WittFraction::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Result<Self> {
        WittFraction::mul(self, o)
    }
    fn neg(&self) -> Self {
        WittFraction::neg(self)
    }
    fn inv(&self) -> Result<Self> {
        WittFraction::inv(self)
    }
    fn zero_at(&self, prec: i32) -> Self {
        let ctx = self.ctx();
        WittFraction::with_known(ctx.zero(), 0, prec.clamp(1, ctx.len() as i32) as usize).unwrap()
    }
    fn one_at(&self, prec: i32) -> Self {
        let ctx = self.ctx();
        WittFraction::with_known(ctx.one(), 0, prec.clamp(1, ctx.len() as i32) as usize).unwrap()
    }
    fn precision(&self) -> i32 {
        WittFraction::precision(self)
    }
    fn pivot_rank(&self) -> Option<i32> {
        self.valuation()
    }
    fn frob_pow(&self, k: i64) -> Self {
        self.frobenius_pow(k)
    }
    fn field(&self) -> &'static FieldSpec {
        self.ctx().spec()
    }
    fn to_value(&self) -> Value {
        serde_json::to_value(self.to_json()).unwrap()
    }
}

impl Dvr for WittFraction {
    fn valuation(&self) -> Option<i32> {
        WittFraction::valuation(self)
    }
    fn pi_pow_at(&self, k: i32, prec: i32) -> Result<Self> {
        let ctx = self.ctx();
        let known = (prec + (-k).max(0)).clamp(0, ctx.len() as i32) as usize;
        if k >= 0 {
            WittFraction::with_known(ctx.p_pow(k as usize), 0, known)
        } else {
            WittFraction::with_known(ctx.one(), (-k) as u32, known)
        }
    }
    fn mul_pi_pow(&self, k: i32) -> Result<Self> {
        self.mul_p_pow(k)
    }
    fn reduce(&self) -> Result<FqElem> {
        WittFraction::reduce(self)
    }
    fn is_integral(&self) -> Result<bool> {
        WittFraction::is_integral(self)
    }
    fn lift_at(&self, c: FqElem, prec: i32) -> Self {
        let ctx = self.ctx();
        WittFraction::with_known(ctx.teichmuller(c), 0, prec.clamp(1, ctx.len() as i32) as usize).unwrap()
    }
    fn congruent(&self, o: &Self, n: i32) -> bool {
        WittFraction::congruent(self, o, n)
    }
}

/// Square matrix in row-major order.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat<R> {
    n: usize,
    entries: Vec<R>,
}

pub type FqMat = Mat<FqElem>;
pub type LaurentMat = Mat<LaurentElt>;
pub type WittMat = Mat<WittFraction>;

impl<R: Ring> Mat<R> {
    pub fn from_rows(rows: Vec<Vec<R>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("matrix must be square and nonempty".into()));
        }
        let entries: Vec<R> = rows.into_iter().flatten().collect();
        let f = entries[0].field();
        if entries.iter().any(|e| !std::ptr::eq(e.field(), f)) {
            return Err(Error::SpecMismatch("matrix entries over different fields".into()));
        }
        Ok(Mat { n, entries })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Mat { n, entries }
    }

    /// Identity whose entries take their ring from `like`, known to precision `prec`.
    pub fn identity_like(n: usize, like: &R, prec: i32) -> Self {
        Self::from_fn(n, |i, j| if i == j { like.one_at(prec) } else { like.zero_at(prec) })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.entries[i * self.n + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.entries[i * self.n + j] = v;
    }
    pub fn entries(&self) -> &[R] {
        &self.entries
    }
    pub fn field(&self) -> &'static FieldSpec {
        self.entries[0].field()
    }

    /// Smallest entry precision (`i32::MAX` for exact rings).
    pub fn min_precision(&self) -> i32 {
        self.entries.iter().map(|e| e.precision()).min().unwrap()
    }

    /// Largest entry precision (`i32::MAX` for exact rings).
    pub fn max_precision(&self) -> i32 {
        self.entries.iter().map(|e| e.precision()).max().unwrap()
    }

    pub fn map<S>(&self, f: impl Fn(&R) -> S) -> Mat<S> {
        Mat { n: self.n, entries: self.entries.iter().map(f).collect() }
    }

    pub fn try_map<S>(&self, f: impl Fn(&R) -> Result<S>) -> Result<Mat<S>> {
        Ok(Mat { n: self.n, entries: self.entries.iter().map(f).collect::<Result<_>>()? })
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.n != o.n {
            return Err(Error::SpecMismatch(format!("{}x{} vs {}x{}", self.n, self.n, o.n, o.n)));
        }
        if !std::ptr::eq(self.field(), o.field()) {
            return Err(Error::SpecMismatch("matrices over different fields".into()));
        }
        Ok(())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = self.get(i, 0).mul(o.get(0, j))?;
                for k in 1..n {
                    acc = acc.add(&self.get(i, k).mul(o.get(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(Mat { n, entries })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let entries = self.entries.iter().zip(&o.entries).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(Mat { n: self.n, entries })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let entries = self.entries.iter().zip(&o.entries).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(Mat { n: self.n, entries })
    }

    /// Entrywise `sigma^k`.
    pub fn frob_pow(&self, k: i64) -> Self {
        self.map(|e| e.frob_pow(k))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.n {
                self.entries.swap(a * self.n + j, b * self.n + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.n {
                self.entries.swap(i * self.n + a, i * self.n + b);
            }
        }
    }

    /// `row_dst += c * row_src`, columns from `from` on.
    fn add_row_multiple(&mut self, dst: usize, src: usize, c: &R, from: usize) -> Result<()> {
        for j in from..self.n {
            let v = self.get(dst, j).add(&c.mul(self.get(src, j))?)?;
            self.set(dst, j, v);
        }
        Ok(())
    }

    /// `col_dst += c * col_src`, rows from `from` on.
    fn add_col_multiple(&mut self, dst: usize, src: usize, c: &R, from: usize) -> Result<()> {
        for i in from..self.n {
            let v = self.get(i, dst).add(&self.get(i, src).mul(c)?)?;
            self.set(i, dst, v);
        }
        Ok(())
    }

    /// Minimal-rank pivot in rows/columns `rows x cols`, ties by row then column.
    /// Fails when a window-zero entry could still have smaller valuation.
    fn select_pivot(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Result<(usize, usize, i32)> {
        let mut best: Option<(usize, usize, i32)> = None;
        for i in rows.clone() {
            for j in cols.clone() {
                if let Some(r) = self.get(i, j).pivot_rank() {
                    if best.is_none_or(|(_, _, b)| r < b) {
                        best = Some((i, j, r));
                    }
                }
            }
        }
        let Some(best) = best else {
            let exact = rows.clone().all(|i| cols.clone().all(|j| self.get(i, j).precision() == i32::MAX));
            return Err(if exact {
                Error::NotInvertible("no nonzero pivot".into())
            } else {
                Error::InsufficientPrecision("no nonzero pivot within the precision window".into())
            });
        };
        for i in rows {
            for j in cols.clone() {
                let e = self.get(i, j);
                if e.pivot_rank().is_none() && e.precision() < best.2 {
                    return Err(Error::InsufficientPrecision(format!(
                        "entry ({i},{j}) is zero only modulo pi^{}, below the pivot valuation {}",
                        e.precision(),
                        best.2
                    )));
                }
            }
        }
        Ok(best)
    }

    /// Gauss-Jordan inverse with minimal-valuation pivots.
    pub fn inv(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut r = Self::identity_like(n, &self.entries[0], self.max_precision());
        for k in 0..n {
            let (pi, _, _) = a.select_pivot(k..n, k..k + 1)?;
            a.swap_rows(k, pi);
            r.swap_rows(k, pi);
            let pinv = a.get(k, k).inv()?;
            for j in 0..n {
                let v = a.get(k, j).mul(&pinv)?;
                a.set(k, j, v);
                let w = r.get(k, j).mul(&pinv)?;
                r.set(k, j, w);
            }
            for i in 0..n {
                // A window-zero entry is still eliminated: its unknown digits cost precision.
                if i == k {
                    continue;
                }
                let c = a.get(i, k).neg();
                a.add_row_multiple(i, k, &c, 0)?;
                r.add_row_multiple(i, k, &c, 0)?;
            }
        }
        Ok(r)
    }

    /// Fully resolved text, one row per line.
    pub fn pretty(&self) -> String
    where
        R: fmt::Display,
    {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).to_string()).collect::<Vec<_>>().join(" | ")).collect::<Vec<_>>().join("\n")
    }

    pub fn to_json(&self) -> MatJson {
        let f = self.field();
        MatJson {
            n: self.n,
            ring: R::TAG,
            p: f.p(),
            m: f.m(),
            entries: (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).to_value()).collect()).collect(),
        }
    }
}

impl<R: Ring> fmt::Debug for Mat<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.chunks(self.n)).finish()
    }
}

/// Serialized matrix `{n, ring, p, m, entries}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatJson {
    pub n: usize,
    pub ring: RingTag,
    pub p: u8,
    pub m: u8,
    pub entries: Vec<Vec<Value>>,
}

/// A parsed matrix of any supported ring.
#[derive(Debug, Clone)]
pub enum AnyMat {
    Fq(FqMat),
    Laurent(LaurentMat),
    Witt(WittMat),
}

impl MatJson {
    /// Parses entries; errors name the offending row and column (0-based).
    pub fn parse(&self) -> Result<AnyMat> {
        let spec = FieldSpec::get(self.p, self.m)?;
        if self.entries.len() != self.n || self.entries.iter().any(|r| r.len() != self.n) {
            return Err(Error::Parse(format!("expected {0} rows of {0} entries", self.n)));
        }
        let at = |i: usize, j: usize, e: Error| Error::Parse(format!("entry at row {i}, column {j}: {e}"));
        let coeffs =
            |v: &Value| -> Result<Vec<i64>> { serde_json::from_value::<Vec<i64>>(v.clone()).map_err(|e| Error::Parse(e.to_string())) };
        let rows = |f: &dyn Fn(&Value) -> Result<()>| -> Result<()> {
            for (i, r) in self.entries.iter().enumerate() {
                for (j, v) in r.iter().enumerate() {
                    f(v).map_err(|e| at(i, j, e))?;
                }
            }
            Ok(())
        };
        match self.ring {
            RingTag::Fq => {
                rows(&|v| spec.elem(&coeffs(v)?).map(|_| ()))?;
                let rs = self.entries.iter().map(|r| r.iter().map(|v| spec.elem(&coeffs(v).unwrap()).unwrap()).collect()).collect();
                Ok(AnyMat::Fq(Mat::from_rows(rs)?))
            }
            RingTag::Laurent => {
                let parse = |v: &Value| -> Result<LaurentElt> {
                    let j: LaurentJson = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
                    LaurentElt::from_json(spec, &j)
                };
                rows(&|v| parse(v).map(|_| ()))?;
                let rs = self.entries.iter().map(|r| r.iter().map(|v| parse(v).unwrap()).collect()).collect();
                Ok(AnyMat::Laurent(Mat::from_rows(rs)?))
            }
            RingTag::Witt => {
                let parse = |v: &Value| -> Result<WittFraction> {
                    let j: WittJson = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
                    WittFraction::from_json(spec, &j)
                };
                rows(&|v| parse(v).map(|_| ()))?;
                let rs: Vec<Vec<WittFraction>> = self.entries.iter().map(|r| r.iter().map(|v| parse(v).unwrap()).collect()).collect();
                if rs.iter().flatten().any(|e| e.ctx().len() != rs[0][0].ctx().len()) {
                    return Err(Error::Parse("Witt entries of different lengths".into()));
                }
                Ok(AnyMat::Witt(Mat::from_rows(rs)?))
            }
        }
    }
}

impl FqMat {
    pub fn identity(spec: &'static FieldSpec, n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { spec.one() } else { spec.zero() })
    }

    pub fn zeros(spec: &'static FieldSpec, n: usize) -> Self {
        Self::from_fn(n, |_, _| spec.zero())
    }

    /// Permutation matrix with `P e_j = e_{w(j)}`, for `w` in one-line notation (1-based).
    pub fn permutation(spec: &'static FieldSpec, w: &[usize]) -> Self {
        let n = w.len();
        Self::from_fn(n, |i, j| if w[j] == i + 1 { spec.one() } else { spec.zero() })
    }

    pub fn det(&self) -> FqElem {
        let n = self.n;
        let spec = self.field();
        let mut a = self.clone();
        let mut det = spec.one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a.get(i, k).is_zero()) else {
                return spec.zero();
            };
            if p != k {
                a.swap_rows(k, p);
                det = -det;
            }
            let pivot = *a.get(k, k);
            det = det * pivot;
            let pinv = FqElem::inv(&pivot).unwrap();
            for i in k + 1..n {
                let c = -(*a.get(i, k) * pinv);
                if !c.is_zero() {
                    a.add_row_multiple(i, k, &c, k).unwrap();
                }
            }
        }
        det
    }

    pub fn is_invertible(&self) -> bool {
        !self.det().is_zero()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j).code() == (i == j) as usize))
    }

    /// Base-q integer with the (0,0) entry most significant, so that integer order is row-major lex order.
    pub fn key(&self) -> u64 {
        let q = self.field().q() as u64;
        self.entries.iter().fold(0u64, |acc, e| acc * q + e.code() as u64)
    }

    pub fn from_key(spec: &'static FieldSpec, n: usize, mut key: u64) -> Self {
        let q = spec.q() as u64;
        let mut codes = vec![0usize; n * n];
        for c in codes.iter_mut().rev() {
            *c = (key % q) as usize;
            key /= q;
        }
        Mat { n, entries: codes.into_iter().map(|c| spec.from_code(c).unwrap()).collect() }
    }

    /// Entry coefficient vectors, row by row.
    pub fn to_coeff_rows(&self) -> Vec<Vec<Vec<u8>>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).coeffs()).collect()).collect()
    }

    /// Compact JSON text of the coefficient rows, used in CSV cells.
    pub fn serialize(&self) -> String {
        serde_json::to_string(&self.to_coeff_rows()).unwrap()
    }

    /// Constant lift into a DVR, known to precision `prec`.
    pub fn lift<D: Dvr>(&self, like: &D, prec: i32) -> Mat<D> {
        self.map(|&c| like.lift_at(c, prec))
    }
}

impl<D: Dvr> Mat<D> {
    /// Entrywise residue.
    pub fn reduce(&self) -> Result<FqMat> {
        self.try_map(|e| e.reduce())
    }

    pub fn is_integral(&self) -> Result<bool> {
        for e in &self.entries {
            if !e.is_integral()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Provable entrywise agreement modulo `pi^k`.
    pub fn congruent(&self, o: &Self, k: i32) -> bool {
        self.n == o.n && self.entries.iter().zip(&o.entries).all(|(a, b)| a.congruent(b, k))
    }

    /// `diag(pi^d_1, ..., pi^d_n)`, each diagonal entry with relative precision `rel`.
    pub fn diag_pi(like: &D, d: &[i32], rel: i32) -> Result<Self> {
        let n = d.len();
        let dmax = d.iter().copied().max().unwrap_or(0);
        let mut rows = Vec::with_capacity(n);
        for (i, &di) in d.iter().enumerate() {
            let mut row = Vec::with_capacity(n);
            for (j, &dj) in d.iter().enumerate() {
                row.push(if i == j { like.pi_pow_at(di, di + rel)? } else { like.zero_at(rel + dmax.max(di).max(dj)) });
            }
            rows.push(row);
        }
        Mat::from_rows(rows)
    }

    /// Smith normal form `self = a diag(pi^d) b` with `d` non-increasing.
    pub fn snf(&self) -> Result<Snf<D>> {
        let n = self.n;
        let prec = self.max_precision();
        let like = self.entries[0].clone();
        let mut x = self.clone();
        let mut a = Self::identity_like(n, &like, prec);
        let mut b = Self::identity_like(n, &like, prec);
        let mut d = Vec::with_capacity(n);
        for k in 0..n {
            let (pr, pc, v) = x.select_pivot(k..n, k..n)?;
            x.swap_rows(k, pr);
            a.swap_cols(k, pr);
            x.swap_cols(k, pc);
            b.swap_rows(k, pc);
            let pivot = x.get(k, k).clone();
            let pinv = pivot.inv()?;
            // Row ops E = I - c e_ik act as x <- E x, a <- a E^{-1}.
            // Window-zero entries are eliminated too, so their uncertainty reaches a, b and x.
            for i in k + 1..n {
                let c = x.get(i, k).mul(&pinv)?;
                x.add_row_multiple(i, k, &c.neg(), k)?;
                a.add_col_multiple(k, i, &c, 0)?;
            }
            // Column ops F = I - c e_kj act as x <- x F, b <- F^{-1} b.
            for j in k + 1..n {
                let c = pinv.mul(x.get(k, j))?;
                x.add_col_multiple(j, k, &c.neg(), k)?;
                b.add_row_multiple(k, j, &c, 0)?;
            }
            // pivot = pi^v u: keep pi^v in x, push the unit u into column k of a.
            let u = pivot.mul_pi_pow(-v)?;
            for i in 0..n {
                let val = a.get(i, k).mul(&u)?;
                a.set(i, k, val);
            }
            let exact = like.pi_pow_at(v, v + prec)?;
            x.set(k, k, exact);
            for j in k + 1..n {
                x.set(k, j, like.zero_at(prec));
                x.set(j, k, like.zero_at(prec));
            }
            d.push(v);
        }
        // Stable sort to non-increasing d; conjugating diag by the sorting permutation.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[j].cmp(&d[i]));
        let a_sorted = Self::from_fn(n, |i, j| a.get(i, order[j]).clone());
        let b_sorted = Self::from_fn(n, |i, j| b.get(order[i], j).clone());
        let d_sorted = order.iter().map(|&i| d[i]).collect();
        Ok(Snf { a: a_sorted, d: d_sorted, b: b_sorted })
    }
}

/// Output of the Smith normal form.
#[derive(Debug, Clone)]
pub struct Snf<D: Ring> {
    pub a: Mat<D>,
    pub d: Vec<i32>,
    pub b: Mat<D>,
}

impl<D: Dvr> Snf<D> {
    /// `a diag(pi^d) b`.
    pub fn remultiply(&self) -> Result<Mat<D>> {
        let like = self.a.get(0, 0);
        let diag = Mat::diag_pi(like, &self.d, self.a.max_precision())?;
        self.a.mul(&diag)?.mul(&self.b)
    }
}

impl LaurentMat {
    /// Largest absolute precision at which every entry is known.
    pub fn working_precision(&self) -> i32 {
        self.min_precision()
    }
}

/// Precision needed before a Cartan decomposition for weights `d`.
pub fn required_precision(d: &[i32]) -> i32 {
    let (lo, hi) = (d.iter().copied().min().unwrap_or(0), d.iter().copied().max().unwrap_or(0));
    let spread = 2 * (hi - lo) + 2;
    let span = 2 * d.iter().map(|x| x.abs()).max().unwrap_or(0) + 1;
    spread.max(span)
}

/// Constant Witt matrix with Teichmuller entries.
pub fn teichmuller_lift(g: &FqMat, ctx: &'static WittCtx) -> WittMat {
    g.map(|&c| WittFraction::from_witt(ctx.teichmuller(c)))
}
