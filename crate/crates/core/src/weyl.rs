//! The symmetric group `S_n` as Weyl group of `GL_n`.
//!
//! Permutations are one-line and 1-based, composed as functions: `(uv)(i) = u(v(i))`.
//! `s_i` swaps `i` and `i + 1`.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grpdata::Cocharacter;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn new(one_line: Vec<usize>) -> Result<Self> {
        let n = one_line.len();
        let mut seen = vec![false; n + 1];
        for &x in &one_line {
            if x == 0 || x > n || seen[x] {
                return Err(Error::Parse(format!("{one_line:?} is not a permutation of 1..{n}")));
            }
            seen[x] = true;
        }
        Ok(Perm(one_line))
    }

    pub fn identity(n: usize) -> Self {
        Perm((1..=n).collect())
    }

    /// Simple reflection `s_i`, `1 <= i < n`.
    pub fn simple(n: usize, i: usize) -> Self {
        assert!(i >= 1 && i < n, "s_{i} is not a simple reflection of S_{n}");
        let mut v: Vec<usize> = (1..=n).collect();
        v.swap(i - 1, i);
        Perm(v)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }
    pub fn one_line(&self) -> &[usize] {
        &self.0
    }
    pub fn apply(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    pub fn compose(&self, o: &Perm) -> Perm {
        assert_eq!(self.n(), o.n(), "composing permutations of different degree");
        Perm(o.0.iter().map(|&i| self.0[i - 1]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut v = vec![0; self.n()];
        for (i, &x) in self.0.iter().enumerate() {
            v[x - 1] = i + 1;
        }
        Perm(v)
    }

    /// Inversion count.
    pub fn length(&self) -> usize {
        let v = &self.0;
        (0..v.len()).map(|i| (i + 1..v.len()).filter(|&j| v[i] > v[j]).count()).sum()
    }

    /// One reduced word `[i_1, ..., i_l]` with `self = s_{i_1} ... s_{i_l}`.
    pub fn reduced_word(&self) -> Vec<usize> {
        // Peel right descents: w = (w s_i) s_i with l(w s_i) < l(w).
        let mut w = self.clone();
        let mut word = Vec::new();
        while let Some(i) = (1..w.n()).find(|&i| w.apply(i) > w.apply(i + 1)) {
            word.push(i);
            w = w.compose(&Perm::simple(w.n(), i));
        }
        word.reverse();
        word
    }

    pub fn from_word(n: usize, word: &[usize]) -> Perm {
        word.iter().fold(Perm::identity(n), |acc, &i| acc.compose(&Perm::simple(n, i)))
    }

    /// All of `S_n` in lexicographic one-line order.
    pub fn all(n: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (1..=n).collect();
        loop {
            out.push(Perm(cur.clone()));
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else { break };
            let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        out
    }

    /// Longest element `w_0 = [n, ..., 1]`.
    pub fn longest(n: usize) -> Perm {
        Perm((1..=n).rev().collect())
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", s.join(","))
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Perm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// Rank-matrix criterion: `u <= w` iff `#{a <= i : u(a) >= j} <= #{a <= i : w(a) >= j}` for all `i, j`.
pub fn bruhat_leq(u: &Perm, w: &Perm) -> bool {
    let n = u.n();
    assert_eq!(n, w.n(), "Bruhat comparison across degrees");
    for j in 1..=n {
        let (mut cu, mut cw) = (0, 0);
        for a in 1..=n {
            cu += usize::from(u.apply(a) >= j);
            cw += usize::from(w.apply(a) >= j);
            if cu > cw {
                return false;
            }
        }
    }
    true
}

/// Subword criterion: `u <= w` iff some length-`l(u)` subword of a fixed reduced word of `w` multiplies to `u`.
pub fn bruhat_leq_subword(u: &Perm, w: &Perm) -> bool {
    let word = w.reduced_word();
    let l = u.length();
    if l > word.len() {
        return false;
    }
    let n = u.n();
    let m = word.len();
    (0u32..1 << m).filter(|mask| mask.count_ones() as usize == l).any(|mask| {
        let sub: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| word[i]).collect();
        Perm::from_word(n, &sub) == *u
    })
}

fn check_j(n: usize, j: &[usize]) -> Result<()> {
    match j.iter().find(|&&i| i == 0 || i >= n) {
        Some(i) => Err(Error::Parse(format!("s_{i} is not a simple reflection of S_{n}"))),
        None => Ok(()),
    }
}

/// `^J W = {w : l(s w) > l(w) for s ∈ J}` (`left = true`) or `W^J = {w : l(w s) > l(w)}`.
pub fn min_coset_reps(n: usize, j: &[usize], left: bool) -> Result<Vec<Perm>> {
    check_j(n, j)?;
    Ok(Perm::all(n)
        .into_iter()
        .filter(|w| {
            j.iter().all(|&i| {
                if left {
                    // l(s_i w) > l(w) iff w^-1(i) < w^-1(i+1)
                    let wi = w.inverse();
                    wi.apply(i) < wi.apply(i + 1)
                } else {
                    w.apply(i) < w.apply(i + 1)
                }
            })
        })
        .collect())
}

/// Subgroup `W_J` generated by `{s_i : i ∈ J}`.
pub fn parabolic_subgroup(n: usize, j: &[usize]) -> Result<Vec<Perm>> {
    check_j(n, j)?;
    let mut out = vec![Perm::identity(n)];
    let mut frontier = out.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for w in &frontier {
            for &i in j {
                let v = w.compose(&Perm::simple(n, i));
                if !out.contains(&v) {
                    out.push(v.clone());
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    out.sort();
    Ok(out)
}

/// Longest element of `W_J`: reverses each run of consecutive indices joined by `J`.
pub fn longest_element(n: usize, j: &[usize]) -> Result<Perm> {
    check_j(n, j)?;
    let mut v: Vec<usize> = (1..=n).collect();
    let mut start = 0;
    for i in 1..=n {
        if i == n || !j.contains(&i) {
            v[start..i].reverse();
            start = i;
        }
    }
    Ok(Perm(v))
}

/// `^J W` under a partial order, materialized as a relation matrix.
#[derive(Debug, Clone)]
pub struct CosetPoset {
    pub n: usize,
    pub j: Vec<usize>,
    pub elements: Vec<Perm>,
    /// `leq[a][b]` iff `elements[a] ≼ elements[b]`.
    pub leq: Vec<Vec<bool>>,
    index: HashMap<Perm, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PosetJson {
    pub n: usize,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    pub elements: Vec<Perm>,
    pub relation: Vec<(usize, usize)>,
}

impl CosetPoset {
    fn from_relation(n: usize, j: Vec<usize>, elements: Vec<Perm>, leq: Vec<Vec<bool>>) -> Result<Self> {
        let m = elements.len();
        for a in 0..m {
            if !leq[a][a] {
                return Err(Error::ConventionError(format!("{} is not related to itself", elements[a])));
            }
            for b in 0..m {
                if a != b && leq[a][b] && leq[b][a] {
                    return Err(Error::ConventionError(format!("{} and {} are mutually below each other", elements[a], elements[b])));
                }
                for c in 0..m {
                    if leq[a][b] && leq[b][c] && !leq[a][c] {
                        return Err(Error::ConventionError(format!(
                            "{} ≼ {} ≼ {} but not {} ≼ {}",
                            elements[a], elements[b], elements[c], elements[a], elements[c]
                        )));
                    }
                }
            }
        }
        let index = elements.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        Ok(CosetPoset { n, j, elements, leq, index })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
    pub fn index_of(&self, w: &Perm) -> Option<usize> {
        self.index.get(w).copied()
    }
    pub fn leq(&self, u: &Perm, w: &Perm) -> Option<bool> {
        Some(self.leq[self.index_of(u)?][self.index_of(w)?])
    }

    /// Covering pairs `(a, b)`: `a ≺ b` with nothing strictly between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let m = self.len();
        let lt = |a: usize, b: usize| a != b && self.leq[a][b];
        let mut out = Vec::new();
        for a in 0..m {
            for b in 0..m {
                if lt(a, b) && !(0..m).any(|c| lt(a, c) && lt(c, b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph poset {\n  rankdir=BT;\n");
        for (i, e) in self.elements.iter().enumerate() {
            s.push_str(&format!("  n{i} [label=\"{e}\"];\n"));
        }
        for (a, b) in self.covers() {
            s.push_str(&format!("  n{a} -> n{b};\n"));
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> PosetJson {
        let m = self.len();
        let relation = (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).filter(|&(a, b)| self.leq[a][b]).collect();
        PosetJson { n: self.n, j: self.j.clone(), elements: self.elements.clone(), relation }
    }
}

/// Bruhat order restricted to `^J W`.
pub fn bruhat_poset(n: usize, j: &[usize]) -> Result<CosetPoset> {
    let els = min_coset_reps(n, j, true)?;
    let leq = els.iter().map(|a| els.iter().map(|b| bruhat_leq(a, b)).collect()).collect();
    CosetPoset::from_relation(n, j.to_vec(), els, leq)
}

/// `w' ≼ w` iff some `y ∈ W_J` has `y w' δ(y)^-1 <= w` in Bruhat order, where
/// `δ(y) = c (x y x^-1) c^-1` with `x = w_0 w_{0,J}` and `c` the twist, so `δ(W_J)` is the
/// opposite parabolic `W_{J*}`.
///
/// The twist must be the identity or `w_0` (the two Coxeter automorphisms of `S_n`).
pub fn pwz_order(n: usize, j: &[usize], twist: &Perm) -> Result<CosetPoset> {
    check_j(n, j)?;
    if twist.n() != n {
        return Err(Error::ConventionError(format!("twist {twist} does not act on S_{n}")));
    }
    let ti = twist.inverse();
    for i in 1..n {
        let image = twist.compose(&Perm::simple(n, i)).compose(&ti);
        if image.length() != 1 {
            return Err(Error::ConventionError(format!("twist {twist} sends s_{i} to {image}, not a simple reflection")));
        }
    }
    let x = Perm::longest(n).compose(&longest_element(n, j)?);
    let xi = x.inverse();
    let wj = parabolic_subgroup(n, j)?;
    let conj: Vec<(Perm, Perm)> = wj
        .iter()
        .map(|y| {
            let d = twist.compose(&x).compose(y).compose(&xi).compose(&ti);
            (y.clone(), d.inverse())
        })
        .collect();
    let els = min_coset_reps(n, j, true)?;
    let leq =
        els.iter().map(|wp| els.iter().map(|w| conj.iter().any(|(y, di)| bruhat_leq(&y.compose(wp).compose(di), w))).collect()).collect();
    CosetPoset::from_relation(n, j.to_vec(), els, leq)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Eps1,
    Eps2,
}

/// A permutation with an optional translation label `t^mu`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Labeled {
    pub perm: Perm,
    pub label: Option<Vec<i32>>,
}

/// `eps1(w) = w w_0 w_{0,mu}` labelled `t^mu`; `eps2(w) = w_{0,mu} w w_0`.
pub fn epsilon_maps(w: &Perm, mu: &Cocharacter, which: Which) -> Result<Labeled> {
    let n = mu.n();
    if w.n() != n {
        return Err(Error::SpecMismatch(format!("{w} acts on {} letters, mu on {n}", w.n())));
    }
    let j = mu.j_set();
    if !min_coset_reps(n, &j, true)?.contains(w) {
        return Err(Error::NotMinimalRep(format!("{w} is not minimal in its W_J coset for J = {j:?}")));
    }
    let w0 = Perm::longest(n);
    let w0mu = longest_element(n, &j)?;
    Ok(match which {
        Which::Eps1 => Labeled { perm: w.compose(&w0).compose(&w0mu), label: Some(mu.weights().to_vec()) },
        Which::Eps2 => Labeled { perm: w0mu.compose(w).compose(&w0), label: None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Perm {
        Perm::new(v.to_vec()).unwrap()
    }

    #[test]
    fn group_basics() {
        let s1 = Perm::simple(3, 1);
        let s2 = Perm::simple(3, 2);
        assert_eq!(s1.compose(&s2), p(&[2, 3, 1]));
        assert_eq!(s1.compose(&s2).length(), 2);
        assert_eq!(Perm::all(4).len(), 24);
        for w in Perm::all(4) {
            assert_eq!(w.compose(&w.inverse()), Perm::identity(4));
            assert_eq!(Perm::from_word(4, &w.reduced_word()), w);
            assert_eq!(w.reduced_word().len(), w.length());
        }
        assert!(Perm::new(vec![1, 1]).is_err());
    }

    #[test]
    fn bruhat_examples() {
        let s1 = Perm::simple(3, 1);
        let s2 = Perm::simple(3, 2);
        assert!(bruhat_leq(&s1, &s1.compose(&s2)));
        assert!(!bruhat_leq(&s1, &s2));
        for w in Perm::all(3) {
            assert!(bruhat_leq(&Perm::identity(3), &w));
            assert!(bruhat_leq(&w, &Perm::longest(3)));
        }
    }

    #[test]
    fn bruhat_matches_subwords() {
        for n in 1..=4 {
            for u in Perm::all(n) {
                for w in Perm::all(n) {
                    assert_eq!(bruhat_leq(&u, &w), bruhat_leq_subword(&u, &w), "{u} {w}");
                }
            }
        }
    }

    #[test]
    fn coset_reps() {
        assert_eq!(min_coset_reps(3, &[], true).unwrap().len(), 6);
        assert_eq!(min_coset_reps(3, &[1], true).unwrap().len(), 3);
        assert_eq!(min_coset_reps(4, &[1, 3], false).unwrap().len(), 6);
        assert_eq!(longest_element(3, &[1, 2]).unwrap(), p(&[3, 2, 1]));
        assert_eq!(longest_element(4, &[1, 3]).unwrap(), p(&[2, 1, 4, 3]));
        assert_eq!(parabolic_subgroup(4, &[1, 2]).unwrap().len(), 6);
        for w in min_coset_reps(4, &[2], true).unwrap() {
            assert!(w.inverse().apply(2) < w.inverse().apply(3));
            assert!(Perm::simple(4, 2).compose(&w).length() > w.length());
        }
        assert!(min_coset_reps(3, &[3], true).is_err());
    }

    #[test]
    fn pwz_degenerates_and_is_partial() {
        let e = Perm::identity(3);
        let b = bruhat_poset(3, &[]).unwrap();
        let pz = pwz_order(3, &[], &e).unwrap();
        assert_eq!(b.leq, pz.leq);
        let pz1 = pwz_order(3, &[1], &e).unwrap();
        assert_eq!(pz1.len(), 3);
        let id = pz1.index_of(&e).unwrap();
        assert!((0..3).all(|k| pz1.leq[id][k]));
        assert!(pwz_order(3, &[1], &p(&[2, 1, 3])).is_err());
        let dot = pz1.to_dot();
        assert!(dot.starts_with("digraph") && dot.contains("->"));
    }

    #[test]
    fn epsilon_examples() {
        let m = Cocharacter::parse("1,0").unwrap();
        let w0 = Perm::longest(2);
        let e = Perm::identity(2);
        assert_eq!(epsilon_maps(&e, &m, Which::Eps2).unwrap().perm, w0);
        assert_eq!(epsilon_maps(&w0, &m, Which::Eps2).unwrap().perm, e);
        let l = epsilon_maps(&e, &m, Which::Eps1).unwrap();
        assert_eq!(l.perm, w0);
        assert_eq!(l.label, Some(vec![1, 0]));
        let m3 = Cocharacter::parse("1,1,0").unwrap();
        let imgs: std::collections::BTreeSet<Perm> =
            min_coset_reps(3, &m3.j_set(), true).unwrap().iter().map(|w| epsilon_maps(w, &m3, Which::Eps2).unwrap().perm).collect();
        assert_eq!(imgs.len(), 3);
        assert!(matches!(epsilon_maps(&Perm::simple(3, 1), &m3, Which::Eps1), Err(Error::NotMinimalRep(_))));
    }

    #[test]
    fn eps_identity_holds_only_up_to_levi_conjugation() {
        let m3 = Cocharacter::parse("1,1,0").unwrap();
        let w0mu = longest_element(3, &m3.j_set()).unwrap();
        let e = Perm::identity(3);
        let a = epsilon_maps(&e, &m3, Which::Eps1).unwrap().perm;
        let b = epsilon_maps(&e, &m3, Which::Eps2).unwrap().perm;
        assert_ne!(a, b);
        for w in min_coset_reps(3, &m3.j_set(), true).unwrap() {
            let a = epsilon_maps(&w, &m3, Which::Eps1).unwrap().perm;
            let b = epsilon_maps(&w, &m3, Which::Eps2).unwrap().perm;
            assert_eq!(w0mu.inverse().compose(&b).compose(&w0mu), a);
        }
    }
}
