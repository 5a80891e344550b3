//! Truncated Laurent series over F_q with absolute precision.
//!
//! A `LaurentElt` stands for `sum_{k=v}^{prec-1} c_k t^k + O(t^prec)`.
//! Nonzero elements are trimmed so that `c_v != 0`. An element whose window
//! holds only zeros keeps its window start `v` (possibly `v == prec`).

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{FieldSpec, FqElem};

#[derive(Clone)]
pub struct LaurentElt {
    spec: &'static FieldSpec,
    v: i32,
    prec: i32,
    coeffs: Vec<FqElem>,
}

impl LaurentElt {
    /// Builds `sum coeffs[i] t^(v+i) + O(t^prec)`; `coeffs.len()` must be `prec - v`.
    pub fn new(spec: &'static FieldSpec, v: i32, prec: i32, coeffs: Vec<FqElem>) -> Result<Self> {
        if v > prec || coeffs.len() != (prec - v) as usize {
            return Err(Error::Parse(format!("window [{v}, {prec}) does not match {} coefficients", coeffs.len())));
        }
        if coeffs.iter().any(|c| !std::ptr::eq(c.spec(), spec)) {
            return Err(Error::SpecMismatch("coefficient from another field".into()));
        }
        Ok(Self::normalized(spec, v, prec, coeffs))
    }

    fn normalized(spec: &'static FieldSpec, v: i32, prec: i32, mut coeffs: Vec<FqElem>) -> Self {
        match coeffs.iter().position(|c| !c.is_zero()) {
            Some(0) => {}
            Some(k) => {
                coeffs.drain(..k);
                return LaurentElt { spec, v: v + k as i32, prec, coeffs };
            }
            None => {}
        }
        LaurentElt { spec, v, prec, coeffs }
    }

    /// `0 + O(t^prec)` with an empty window.
    pub fn zero(spec: &'static FieldSpec, prec: i32) -> Self {
        LaurentElt { spec, v: prec, prec, coeffs: Vec::new() }
    }

    /// `c t^k + O(t^prec)`; collapses to zero when `k >= prec`.
    pub fn monomial(c: FqElem, k: i32, prec: i32) -> Self {
        if k >= prec {
            return Self::zero(c.spec(), prec);
        }
        let mut coeffs = vec![c.spec().zero(); (prec - k) as usize];
        coeffs[0] = c;
        Self::normalized(c.spec(), k, prec, coeffs)
    }

    pub fn constant(c: FqElem, prec: i32) -> Self {
        Self::monomial(c, 0, prec)
    }

    pub fn one(spec: &'static FieldSpec, prec: i32) -> Self {
        Self::constant(spec.one(), prec)
    }

    /// `t^k` with relative precision `rel`.
    pub fn t_pow(spec: &'static FieldSpec, k: i32, rel: i32) -> Self {
        Self::monomial(spec.one(), k, k + rel)
    }

    /// Uniformly random integral element known modulo `t^prec`.
    pub fn random_integral<R: Rng>(spec: &'static FieldSpec, prec: i32, rng: &mut R) -> Self {
        let coeffs = (0..prec.max(0)).map(|_| spec.from_code(rng.gen_range(0..spec.q())).unwrap()).collect();
        Self::normalized(spec, 0, prec.max(0), coeffs)
    }

    pub fn spec(&self) -> &'static FieldSpec {
        self.spec
    }
    /// Lowest stored exponent.
    pub fn v(&self) -> i32 {
        self.v
    }
    pub fn prec(&self) -> i32 {
        self.prec
    }
    pub fn coeffs(&self) -> &[FqElem] {
        &self.coeffs
    }

    /// Zero within the known window.
    pub fn is_zero(&self) -> bool {
        self.coeffs.first().is_none_or(|c| c.is_zero())
    }

    /// Exact valuation, `None` if no nonzero coefficient is known.
    pub fn valuation(&self) -> Option<i32> {
        if self.is_zero() {
            None
        } else {
            Some(self.v)
        }
    }

    /// Largest integer known to bound the valuation from below.
    pub fn valuation_bound(&self) -> i32 {
        self.valuation().unwrap_or(self.prec)
    }

    /// Coefficient of `t^k`; `None` beyond the precision window.
    pub fn coeff(&self, k: i32) -> Option<FqElem> {
        if k >= self.prec {
            None
        } else if k < self.v {
            Some(self.spec.zero())
        } else {
            Some(self.coeffs[(k - self.v) as usize])
        }
    }

    fn check(&self, o: &Self) -> Result<()> {
        if std::ptr::eq(self.spec, o.spec) {
            Ok(())
        } else {
            Err(Error::SpecMismatch(format!("F_{} vs F_{}", self.spec.q(), o.spec.q())))
        }
    }

    fn combine(&self, o: &Self, f: impl Fn(FqElem, FqElem) -> FqElem) -> Result<Self> {
        self.check(o)?;
        let prec = self.prec.min(o.prec);
        let lo = self.v.min(o.v).min(prec);
        let coeffs = (lo..prec).map(|k| f(self.coeff(k).unwrap(), o.coeff(k).unwrap())).collect();
        Ok(Self::normalized(self.spec, lo, prec, coeffs))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.combine(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.combine(o, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        LaurentElt { spec: self.spec, v: self.v, prec: self.prec, coeffs: self.coeffs.iter().map(|&c| -c).collect() }
    }

    /// Product with `v = v_a + v_b` and `prec = min(prec_a + v_b, prec_b + v_a)`.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let (va, vb) = (self.valuation_bound(), o.valuation_bound());
        let prec = (self.prec + vb).min(o.prec + va);
        if self.is_zero() || o.is_zero() {
            return Ok(Self::zero(self.spec, prec));
        }
        let v = va + vb;
        let len = (prec - v).max(0) as usize;
        let mut coeffs = vec![self.spec.zero(); len];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate().take(len.saturating_sub(i)) {
                coeffs[i + j] = coeffs[i + j] + a * b;
            }
        }
        Ok(Self::normalized(self.spec, v, prec, coeffs))
    }

    /// Inverse of `t^v u`; the result is known modulo `t^(prec - 2v)`.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(if self.v == self.prec {
                Error::InsufficientPrecision("inverting an element with an empty window".into())
            } else {
                Error::NotAUnit(format!("no nonzero coefficient below t^{}", self.prec))
            });
        }
        let r = self.coeffs.len();
        let c0inv = self.coeffs[0].inv()?;
        let mut b = Vec::with_capacity(r);
        b.push(c0inv);
        for k in 1..r {
            let mut s = self.spec.zero();
            for i in 1..=k {
                s = s + self.coeffs[i] * b[k - i];
            }
            b.push(-(c0inv * s));
        }
        Ok(Self::normalized(self.spec, -self.v, self.prec - 2 * self.v, b))
    }

    /// Multiplication by `t^k` (exact).
    pub fn shift(&self, k: i32) -> Self {
        LaurentElt { spec: self.spec, v: self.v + k, prec: self.prec + k, coeffs: self.coeffs.clone() }
    }

    /// Forgets everything from `t^n` on.
    pub fn truncate(&self, n: i32) -> Self {
        if n >= self.prec {
            return self.clone();
        }
        if n <= self.v {
            return Self::zero(self.spec, n);
        }
        let coeffs = self.coeffs[..(n - self.v) as usize].to_vec();
        Self::normalized(self.spec, self.v, n, coeffs)
    }

    /// Coefficientwise Frobenius.
    pub fn sigma(&self) -> Self {
        self.sigma_pow(1)
    }

    pub fn sigma_pow(&self, k: i64) -> Self {
        LaurentElt { spec: self.spec, v: self.v, prec: self.prec, coeffs: self.coeffs.iter().map(|c| c.frobenius_pow(k)).collect() }
    }

    /// `a_i t^i -> a_i^p t^(pi)`; precision scales by p.
    pub fn phi(&self) -> Self {
        let p = self.spec.p() as i32;
        let (v, prec) = (p * self.v, p * self.prec);
        let mut coeffs = vec![self.spec.zero(); (prec - v) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * p as usize] = c.frobenius();
        }
        Self::normalized(self.spec, v, prec, coeffs)
    }

    /// Whether the element is provably in F_q[[t]].
    pub fn is_integral(&self) -> Result<bool> {
        match self.valuation() {
            Some(v) => Ok(v >= 0),
            None if self.prec >= 0 => Ok(true),
            None => Err(Error::InsufficientPrecision(format!("zero known only modulo t^{}", self.prec))),
        }
    }

    /// Constant term of an integral element.
    pub fn reduce_mod_t(&self) -> Result<FqElem> {
        if let Some(v) = self.valuation() {
            if v < 0 {
                return Err(Error::NotIntegral(format!("term of degree {v}")));
            }
        }
        if self.prec < 1 {
            return Err(Error::InsufficientPrecision(format!("known only modulo t^{}", self.prec)));
        }
        Ok(self.coeff(0).unwrap())
    }

    /// Whether `self` and `o` provably agree modulo `t^n`.
    pub fn congruent(&self, o: &Self, n: i32) -> bool {
        if !std::ptr::eq(self.spec, o.spec) || self.prec < n || o.prec < n {
            return false;
        }
        let lo = self.v.min(o.v);
        (lo..n).all(|k| self.coeff(k) == o.coeff(k))
    }

    pub fn to_json(&self) -> LaurentJson {
        LaurentJson { v: self.v, prec: self.prec, coeffs: self.coeffs.iter().map(|c| c.coeffs()).collect() }
    }

    pub fn from_json(spec: &'static FieldSpec, j: &LaurentJson) -> Result<Self> {
        let coeffs = j.coeffs.iter().map(|c| spec.elem(&c.iter().map(|&x| x as i64).collect::<Vec<_>>())).collect::<Result<Vec<_>>>()?;
        Self::new(spec, j.v, j.prec, coeffs)
    }
}

/// Strict equality: same precision and same known coefficients.
impl PartialEq for LaurentElt {
    fn eq(&self, o: &Self) -> bool {
        if !std::ptr::eq(self.spec, o.spec) || self.prec != o.prec {
            return false;
        }
        match (self.is_zero(), o.is_zero()) {
            (true, true) => true,
            (false, false) => self.v == o.v && self.coeffs == o.coeffs,
            _ => false,
        }
    }
}

/// Serialized form `{v, prec, coeffs}` with each coefficient as a little-endian vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentJson {
    pub v: i32,
    pub prec: i32,
    pub coeffs: Vec<Vec<u8>>,
}

impl fmt::Display for LaurentElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cs = if self.spec.m() == 1 { c.to_string() } else { format!("({c})") };
            write!(f, "{cs}*t^{} + ", self.v + i as i32)?;
        }
        write!(f, "O(t^{})", self.prec)
    }
}

impl fmt::Debug for LaurentElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fld(q: usize) -> &'static FieldSpec {
        FieldSpec::for_order(q).unwrap()
    }

    fn ser(spec: &'static FieldSpec, v: i32, prec: i32, cs: &[i64]) -> LaurentElt {
        let coeffs = cs.iter().map(|&c| spec.from_int(c)).collect();
        LaurentElt::new(spec, v, prec, coeffs).unwrap()
    }

    #[test]
    fn product_precision_rule() {
        let f2 = fld(2);
        let a = ser(f2, 0, 3, &[1, 1, 0]);
        let b = ser(f2, 0, 2, &[1, 0]);
        let c = a.mul(&b).unwrap();
        assert_eq!(c, ser(f2, 0, 2, &[1, 1]));
        let sq = ser(f2, 0, 5, &[1, 1, 0, 0, 0]);
        assert_eq!(sq.mul(&sq).unwrap(), ser(f2, 0, 5, &[1, 0, 1, 0, 0]));
        let t = LaurentElt::t_pow(f2, 1, 4);
        let tinv = LaurentElt::t_pow(f2, -1, 4);
        let one = t.mul(&tinv).unwrap();
        assert_eq!(one, LaurentElt::one(f2, 4));
    }

    #[test]
    fn inverses() {
        let f3 = fld(3);
        let a = ser(f3, 0, 4, &[1, -1, 0, 0]);
        assert_eq!(a.inv().unwrap(), ser(f3, 0, 4, &[1, 1, 1, 1]));
        let b = ser(f3, 0, 3, &[2, 1, 0]);
        let bi = b.inv().unwrap();
        // (2 + t)(2 + 2t + 2t^2) = 4 + 6t + 6t^2 + 2t^3 = 1 mod (3, t^3).
        assert_eq!(bi, ser(f3, 0, 3, &[2, 2, 2]));
        assert!(b.mul(&bi).unwrap().congruent(&LaurentElt::one(f3, 3), 3));
        let t = LaurentElt::t_pow(f3, 1, 3);
        let ti = t.inv().unwrap();
        assert_eq!(ti.valuation(), Some(-1));
        assert_eq!(ti.prec(), 2);
    }

    #[test]
    fn inverse_errors() {
        let f2 = fld(2);
        let z = ser(f2, 0, 3, &[0, 0, 0]);
        assert!(matches!(z.inv(), Err(Error::NotAUnit(_))));
        let e = LaurentElt::zero(f2, 2);
        assert!(matches!(e.inv(), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn frobenii() {
        let f4 = fld(4);
        let w = f4.generator();
        let a = LaurentElt::new(f4, 0, 3, vec![f4.one(), w, f4.zero()]).unwrap();
        let sa = a.sigma();
        assert_eq!(sa.coeff(1).unwrap(), w * w);
        assert_eq!(sa.coeff(0).unwrap(), f4.one());
        let f2 = fld(2);
        let t = LaurentElt::t_pow(f2, 1, 3);
        let pt = t.phi();
        assert_eq!(pt.valuation(), Some(2));
        assert_eq!(pt.prec(), 8);
        let b = LaurentElt::new(f4, 0, 2, vec![w, f4.one()]).unwrap();
        let pb = b.phi();
        assert_eq!(pb.coeff(0).unwrap(), w.frobenius());
        assert_eq!(pb.coeff(1).unwrap(), f4.zero());
        assert_eq!(pb.coeff(2).unwrap(), f4.one());
        assert_eq!(LaurentElt::one(f2, 3).phi(), LaurentElt::one(f2, 6));
    }

    #[test]
    fn reduction() {
        let f2 = fld(2);
        assert_eq!(ser(f2, 0, 3, &[1, 1, 0]).reduce_mod_t().unwrap(), f2.one());
        assert_eq!(LaurentElt::t_pow(f2, 1, 3).reduce_mod_t().unwrap(), f2.zero());
        assert!(matches!(ser(f2, -1, 2, &[1, 1, 0]).reduce_mod_t(), Err(Error::NotIntegral(_))));
        assert!(matches!(LaurentElt::zero(f2, 0).reduce_mod_t(), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn text_and_json_forms() {
        let f3 = fld(3);
        let a = ser(f3, -1, 2, &[2, 0, 1]);
        assert_eq!(a.to_string(), "2*t^-1 + 1*t^1 + O(t^2)");
        let j = a.to_json();
        assert_eq!(serde_json::to_string(&j).unwrap(), r#"{"v":-1,"prec":2,"coeffs":[[2],[0],[1]]}"#);
        assert_eq!(LaurentElt::from_json(f3, &j).unwrap(), a);
    }

    #[test]
    fn strict_equality_requires_same_precision() {
        let f2 = fld(2);
        let a = ser(f2, 0, 3, &[1, 1, 0]);
        let b = ser(f2, 0, 2, &[1, 1]);
        assert_ne!(a, b);
        assert!(a.congruent(&b, 2));
        assert!(!a.congruent(&b, 3));
    }

    #[test]
    fn truncate_and_shift() {
        let f2 = fld(2);
        let a = ser(f2, 0, 4, &[1, 0, 1, 1]);
        assert_eq!(a.truncate(2), ser(f2, 0, 2, &[1, 0]));
        assert_eq!(a.shift(-2).valuation(), Some(-2));
        assert_eq!(a.shift(-2).prec(), 2);
        assert!(a.truncate(-1).is_zero());
    }
}
