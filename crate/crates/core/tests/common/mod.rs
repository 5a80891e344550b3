//! Ghost-component model of p-typical Witt vectors over F_p, computed with integers.
#![allow(dead_code)]

use loopzip::witt::WittElt;
use num_bigint::BigInt;
use num_traits::Zero;

pub fn ghost(x: &[BigInt], p: u32, n: usize) -> BigInt {
    (0..=n).map(|i| BigInt::from(p).pow(i as u32) * x[i].pow(p.pow((n - i) as u32))).sum()
}

/// The integer Witt vector whose ghost components are `targets`.
pub fn from_ghost(targets: &[BigInt], p: u32) -> Vec<BigInt> {
    let mut s: Vec<BigInt> = Vec::new();
    for (n, t) in targets.iter().enumerate() {
        let partial: BigInt = (0..n).map(|i| BigInt::from(p).pow(i as u32) * s[i].pow(p.pow((n - i) as u32))).sum();
        let num = t - partial;
        let den = BigInt::from(p).pow(n as u32);
        assert!((&num % &den).is_zero(), "ghost recursion must divide exactly");
        s.push(num / den);
    }
    s
}

pub fn reduce(v: &[BigInt], p: u32) -> Vec<u64> {
    let pp = BigInt::from(p);
    v.iter().map(|x| u64::try_from(((x % &pp) + &pp) % &pp).unwrap()).collect()
}

pub fn digits(w: &WittElt) -> Vec<u64> {
    w.coords().iter().map(|c| c.code() as u64).collect()
}

pub fn lift(d: &[u64]) -> Vec<BigInt> {
    d.iter().map(|&x| BigInt::from(x)).collect()
}

/// Digits of `a + b`, `a * b` and `-a` predicted by the ghost model.
pub fn predict(a: &WittElt, b: &WittElt, p: u32) -> [Vec<u64>; 3] {
    let len = a.coords().len();
    let (ai, bi) = (lift(&digits(a)), lift(&digits(b)));
    let gs: Vec<_> = (0..len).map(|n| (ghost(&ai, p, n), ghost(&bi, p, n))).collect();
    let sum = from_ghost(&gs.iter().map(|(x, y)| x + y).collect::<Vec<_>>(), p);
    let prod = from_ghost(&gs.iter().map(|(x, y)| x * y).collect::<Vec<_>>(), p);
    let neg = from_ghost(&gs.iter().map(|(x, _)| -x).collect::<Vec<_>>(), p);
    [reduce(&sum, p), reduce(&prod, p), reduce(&neg, p)]
}

/// Number of disagreements between the library and the ghost model on `a, b`.
pub fn mismatches(a: &WittElt, b: &WittElt, p: u32) -> usize {
    let [s, m, n] = predict(a, b, p);
    usize::from(digits(&a.add(b).unwrap()) != s) + usize::from(digits(&a.mul(b).unwrap()) != m) + usize::from(digits(&a.neg()) != n)
}
