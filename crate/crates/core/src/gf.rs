//! Small finite fields F_{p^m} with a fixed modulus per (p, m).
//!
//! Elements are encoded as integers `code = c_0 + c_1 p + ... + c_{m-1} p^{m-1}`
//! where `c_i` are the coefficients in the basis 1, w, w^2. All arithmetic goes
//! through tables built once per field, so `FqElem` is `Copy`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_Q: usize = 25;

/// Built-in moduli, coefficients low to high (monic). One entry per (p, m).
const MODULI: &[(u8, u8, &[u8])] =
    &[(2, 1, &[0, 1]), (2, 2, &[1, 1, 1]), (2, 3, &[1, 1, 0, 1]), (3, 1, &[0, 1]), (3, 2, &[1, 0, 1]), (5, 1, &[0, 1]), (5, 2, &[2, 0, 1])];

/// A finite field F_{p^m} together with its operation tables.
pub struct FieldSpec {
    p: u8,
    m: u8,
    q: u8,
    modulus: Vec<u8>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    frob: Vec<u8>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}(p={}, m={}, modulus={:?})", self.q, self.p, self.m, self.modulus)
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m
    }
}
impl Eq for FieldSpec {}

fn digits(code: usize, p: usize, m: usize) -> Vec<usize> {
    let mut c = code;
    (0..m)
        .map(|_| {
            let d = c % p;
            c /= p;
            d
        })
        .collect()
}

fn undigits(ds: &[usize], p: usize) -> usize {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Evaluates a polynomial over Z/p at a point of Z/p.
fn eval_mod(poly: &[u8], x: usize, p: usize) -> usize {
    poly.iter().rev().fold(0, |acc, &c| (acc * x + c as usize) % p)
}

impl FieldSpec {
    fn build(p: u8, m: u8, modulus: &[u8]) -> Result<FieldSpec> {
        let (pu, mu) = (p as usize, m as usize);
        if modulus.len() != mu + 1 || modulus[mu] != 1 {
            return Err(Error::UnsupportedField(format!("modulus {modulus:?} is not monic of degree {m}")));
        }
        // Degree <= 3: irreducible iff no root in Z/p.
        if mu > 1 && (0..pu).any(|x| eval_mod(modulus, x, pu) == 0) {
            return Err(Error::UnsupportedField(format!("modulus {modulus:?} is reducible over F_{p}")));
        }
        let q = pu.pow(mu as u32);
        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            let da = digits(a, pu, mu);
            for b in 0..q {
                let db = digits(b, pu, mu);
                let s: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % pu).collect();
                add[a * q + b] = undigits(&s, pu) as u8;
                // Schoolbook product, then reduce top-down by the monic modulus.
                let mut prod = vec![0usize; 2 * mu - 1];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % pu;
                    }
                }
                for k in (mu..prod.len()).rev() {
                    let c = prod[k];
                    if c != 0 {
                        for (i, &mc) in modulus.iter().enumerate().take(mu) {
                            let idx = k - mu + i;
                            prod[idx] = (prod[idx] + (pu - c) * mc as usize) % pu;
                        }
                        prod[k] = 0;
                    }
                }
                mul[a * q + b] = undigits(&prod[..mu], pu) as u8;
            }
        }
        let neg: Vec<u8> = (0..q)
            .map(|a| {
                let d: Vec<usize> = digits(a, pu, mu).iter().map(|x| (pu - x) % pu).collect();
                undigits(&d, pu) as u8
            })
            .collect();
        let mut inv = vec![0u8; q];
        for a in 1..q {
            let b = (1..q)
                .find(|&b| mul[a * q + b] == 1)
                .ok_or_else(|| Error::UnsupportedField(format!("{a} has no inverse; modulus not irreducible")))?;
            inv[a] = b as u8;
        }
        let frob: Vec<u8> = (0..q).map(|a| (1..pu).fold(a as u8, |acc, _| mul[acc as usize * q + a])).collect();
        Ok(FieldSpec { p, m, q: q as u8, modulus: modulus.to_vec(), add, mul, neg, inv, frob })
    }

    fn table() -> &'static [FieldSpec] {
        static TABLE: OnceLock<Vec<FieldSpec>> = OnceLock::new();
        TABLE.get_or_init(|| {
            MODULI.iter().map(|&(p, m, md)| FieldSpec::build(p, m, md).expect("built-in modulus table is irreducible")).collect()
        })
    }

    /// The built-in field F_{p^m}.
    pub fn get(p: u8, m: u8) -> Result<&'static FieldSpec> {
        Self::table()
            .iter()
            .find(|f| f.p == p && f.m == m)
            .ok_or_else(|| Error::UnsupportedField(format!("no built-in field with p={p}, m={m}")))
    }

    /// The built-in field of order `q`.
    pub fn for_order(q: usize) -> Result<&'static FieldSpec> {
        Self::table().iter().find(|f| f.q as usize == q).ok_or_else(|| Error::UnsupportedField(format!("no built-in field of order {q}")))
    }

    /// All built-in fields.
    pub fn all() -> &'static [FieldSpec] {
        Self::table()
    }

    pub fn p(&self) -> u8 {
        self.p
    }
    pub fn m(&self) -> u8 {
        self.m
    }
    pub fn q(&self) -> usize {
        self.q as usize
    }
    pub fn modulus(&self) -> &[u8] {
        &self.modulus
    }

    pub fn zero(&'static self) -> FqElem {
        FqElem { spec: self, code: 0 }
    }
    pub fn one(&'static self) -> FqElem {
        FqElem { spec: self, code: 1 }
    }

    /// The class of w (for m = 1 this is an integer of F_p).
    pub fn generator(&'static self) -> FqElem {
        if self.m == 1 {
            // Smallest element generating F_p^x.
            let g = (1..self.q)
                .find(|&g| {
                    let mut x = g;
                    let mut ord = 1;
                    while x != 1 {
                        x = self.mul[x as usize * self.q as usize + g as usize];
                        ord += 1;
                    }
                    ord == self.q - 1
                })
                .unwrap_or(1);
            FqElem { spec: self, code: g }
        } else {
            FqElem { spec: self, code: self.p }
        }
    }

    /// Element with the given little-endian integer encoding.
    pub fn from_code(&'static self, code: usize) -> Result<FqElem> {
        if code >= self.q() {
            return Err(Error::Parse(format!("code {code} out of range for F_{}", self.q)));
        }
        Ok(FqElem { spec: self, code: code as u8 })
    }

    /// Element from coefficients in the basis 1, w, w^2 (reduced mod p).
    pub fn elem(&'static self, coeffs: &[i64]) -> Result<FqElem> {
        if coeffs.len() > self.m as usize {
            return Err(Error::Parse(format!("{} coefficients given for a degree-{} field", coeffs.len(), self.m)));
        }
        let p = self.p as i64;
        let ds: Vec<usize> = coeffs.iter().map(|c| c.rem_euclid(p) as usize).collect();
        Ok(FqElem { spec: self, code: undigits(&ds, self.p as usize) as u8 })
    }

    /// Image of an integer under Z -> F_p -> F_q.
    pub fn from_int(&'static self, n: i64) -> FqElem {
        FqElem { spec: self, code: n.rem_euclid(self.p as i64) as u8 }
    }

    /// All elements in increasing code order.
    pub fn elements(&'static self) -> impl Iterator<Item = FqElem> {
        (0..self.q).map(move |c| FqElem { spec: self, code: c })
    }

    /// Nonzero elements in increasing code order.
    pub fn units(&'static self) -> impl Iterator<Item = FqElem> {
        (1..self.q).map(move |c| FqElem { spec: self, code: c })
    }
}

/// An element of a built-in finite field.
#[derive(Clone, Copy)]
pub struct FqElem {
    spec: &'static FieldSpec,
    code: u8,
}

impl FqElem {
    pub fn spec(&self) -> &'static FieldSpec {
        self.spec
    }
    pub fn code(&self) -> usize {
        self.code as usize
    }
    pub fn is_zero(&self) -> bool {
        self.code == 0
    }
    pub fn is_one(&self) -> bool {
        self.code == 1
    }

    /// Coefficients in the basis 1, w, w^2.
    pub fn coeffs(&self) -> Vec<u8> {
        digits(self.code as usize, self.spec.p as usize, self.spec.m as usize).into_iter().map(|d| d as u8).collect()
    }

    fn check(&self, other: &FqElem) -> Result<()> {
        if std::ptr::eq(self.spec, other.spec) {
            Ok(())
        } else {
            Err(Error::SpecMismatch(format!("F_{} vs F_{}", self.spec.q, other.spec.q)))
        }
    }

    pub fn checked_add(&self, o: &FqElem) -> Result<FqElem> {
        self.check(o)?;
        Ok(*self + *o)
    }
    pub fn checked_sub(&self, o: &FqElem) -> Result<FqElem> {
        self.check(o)?;
        Ok(*self - *o)
    }
    pub fn checked_mul(&self, o: &FqElem) -> Result<FqElem> {
        self.check(o)?;
        Ok(*self * *o)
    }

    pub fn inv(&self) -> Result<FqElem> {
        if self.code == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(FqElem { spec: self.spec, code: self.spec.inv[self.code as usize] })
    }

    pub fn pow(&self, mut e: u64) -> FqElem {
        let mut base = *self;
        let mut acc = self.spec.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// The p-power Frobenius.
    pub fn frobenius(&self) -> FqElem {
        FqElem { spec: self.spec, code: self.spec.frob[self.code as usize] }
    }

    /// sigma^k for any integer k (negative powers use sigma^m = id).
    pub fn frobenius_pow(&self, k: i64) -> FqElem {
        let m = self.spec.m as i64;
        let mut x = *self;
        for _ in 0..k.rem_euclid(m) {
            x = x.frobenius();
        }
        x
    }

    /// The unique p-th root.
    pub fn pth_root(&self) -> FqElem {
        self.frobenius_pow(-1)
    }
}

impl Add for FqElem {
    type Output = FqElem;
    /// Panics when the operands belong to different fields; use `checked_add` to get an error.
    fn add(self, o: FqElem) -> FqElem {
        assert!(std::ptr::eq(self.spec, o.spec), "FqElem operands from different fields");
        FqElem { spec: self.spec, code: self.spec.add[self.code as usize * self.spec.q as usize + o.code as usize] }
    }
}

impl Neg for FqElem {
    type Output = FqElem;
    fn neg(self) -> FqElem {
        FqElem { spec: self.spec, code: self.spec.neg[self.code as usize] }
    }
}

impl Sub for FqElem {
    type Output = FqElem;
    fn sub(self, o: FqElem) -> FqElem {
        self + (-o)
    }
}

impl Mul for FqElem {
    type Output = FqElem;
    /// Panics when the operands belong to different fields; use `checked_mul` to get an error.
    fn mul(self, o: FqElem) -> FqElem {
        assert!(std::ptr::eq(self.spec, o.spec), "FqElem operands from different fields");
        FqElem { spec: self.spec, code: self.spec.mul[self.code as usize * self.spec.q as usize + o.code as usize] }
    }
}

impl PartialEq for FqElem {
    fn eq(&self, o: &FqElem) -> bool {
        std::ptr::eq(self.spec, o.spec) && self.code == o.code
    }
}
impl Eq for FqElem {}

impl Hash for FqElem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.spec.q.hash(state);
        self.code.hash(state);
    }
}

/// Total order by integer encoding; only meaningful within one field.
impl Ord for FqElem {
    fn cmp(&self, o: &FqElem) -> Ordering {
        (self.spec.q, self.code).cmp(&(o.spec.q, o.code))
    }
}
impl PartialOrd for FqElem {
    fn partial_cmp(&self, o: &FqElem) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `3` in prime fields; `w^2+w+1`-style polynomials in w otherwise.
impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.spec.m == 1 {
            return write!(f, "{}", self.code);
        }
        let cs = self.coeffs();
        let mut terms = Vec::new();
        for (i, &c) in cs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "w".to_string(),
                _ => format!("w^{i}"),
            };
            terms.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}{mono}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join("+"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: usize) -> &'static FieldSpec {
        FieldSpec::for_order(q).unwrap()
    }

    #[test]
    fn table_covers_all_supported_orders() {
        let qs: Vec<usize> = FieldSpec::all().iter().map(|s| s.q()).collect();
        assert_eq!(qs, vec![2, 4, 8, 3, 9, 5, 25]);
        assert!(FieldSpec::for_order(27).is_err());
        assert!(FieldSpec::for_order(6).is_err());
    }

    #[test]
    fn reducible_modulus_is_rejected() {
        assert!(FieldSpec::build(2, 2, &[1, 0, 1]).is_err());
        assert!(FieldSpec::build(3, 2, &[2, 0, 1]).is_err());
    }

    #[test]
    fn small_examples() {
        let f2 = f(2);
        assert!((f2.one() + f2.one()).is_zero());
        let f4 = f(4);
        let w = f4.generator();
        assert_eq!(w * w, f4.elem(&[1, 1]).unwrap());
        assert_eq!(w.inv().unwrap(), f4.elem(&[1, 1]).unwrap());
        assert_eq!(w.frobenius(), f4.elem(&[1, 1]).unwrap());
        let f3 = f(3);
        assert_eq!(f3.from_int(2).inv().unwrap(), f3.from_int(2));
        assert_eq!(f2.one().inv().unwrap(), f2.one());
        assert_eq!(f3.zero().inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn mismatched_fields_error() {
        let a = f(2).one();
        let b = f(4).one();
        assert!(matches!(a.checked_add(&b), Err(Error::SpecMismatch(_))));
        assert!(matches!(a.checked_mul(&b), Err(Error::SpecMismatch(_))));
    }

    #[test]
    fn field_axioms_exhaustive() {
        for spec in FieldSpec::all() {
            let els: Vec<FqElem> = spec.elements().collect();
            for &a in &els {
                assert_eq!(a + spec.zero(), a);
                assert_eq!(a * spec.one(), a);
                assert!((a + (-a)).is_zero());
                if !a.is_zero() {
                    assert!((a * a.inv().unwrap()).is_one());
                }
                for &b in &els {
                    assert_eq!(a + b, b + a);
                    assert_eq!(a * b, b * a);
                    for &c in &els {
                        assert_eq!((a + b) + c, a + (b + c));
                        assert_eq!((a * b) * c, a * (b * c));
                        assert_eq!(a * (b + c), a * b + a * c);
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_is_ring_automorphism_of_order_m() {
        for spec in FieldSpec::all() {
            for a in spec.elements() {
                assert_eq!(a.frobenius(), a.pow(spec.p() as u64));
                assert_eq!(a.frobenius_pow(spec.m() as i64), a);
                assert_eq!(a.pth_root().frobenius(), a);
                for b in spec.elements() {
                    assert_eq!((a + b).frobenius(), a.frobenius() + b.frobenius());
                    assert_eq!((a * b).frobenius(), a.frobenius() * b.frobenius());
                }
            }
        }
    }

    #[test]
    fn coefficient_round_trip_and_display() {
        let f9 = f(9);
        for a in f9.elements() {
            let cs: Vec<i64> = a.coeffs().iter().map(|&c| c as i64).collect();
            assert_eq!(f9.elem(&cs).unwrap(), a);
        }
        assert_eq!(f(4).elem(&[1, 1]).unwrap().coeffs(), vec![1, 1]);
        assert_eq!(f(4).elem(&[1, 1]).unwrap().to_string(), "w+1");
        assert_eq!(f(9).elem(&[2, 2]).unwrap().to_string(), "2w+2");
        assert_eq!(f(5).from_int(3).to_string(), "3");
    }

    #[test]
    fn prime_field_generators_are_primitive() {
        assert_eq!(f(5).generator().code(), 2);
        assert_eq!(f(3).generator().code(), 2);
        assert_eq!(f(2).generator().code(), 1);
    }
}
