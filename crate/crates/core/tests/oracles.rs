//! Independent oracles. Nothing here reuses library arithmetic beyond reading inputs
//! and outputs: Witt vectors are checked through ghost components over Z, and class
//! equality is checked by brute-force search over K1 modulo a power of t.

use std::collections::BTreeMap;

mod common;
use common::{from_ghost, ghost, lift, mismatches, reduce};

use loopzip::coset::{class_of, psi_map, ZipGroup};
use loopzip::gf::FieldSpec;
use loopzip::grpdata::{enumerate_gl, random_gl, Cocharacter};
use loopzip::matring::FqMat;
use loopzip::witt::WittCtx;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn witt_arithmetic_matches_ghost_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut total = 0;
    for p in [2u32, 3] {
        let f = FieldSpec::get(p as u8, 1).unwrap();
        for len in 1..=4 {
            let ctx = WittCtx::get(f, len).unwrap();
            for _ in 0..500 {
                let (a, b) = (ctx.random(&mut rng), ctx.random(&mut rng));
                assert_eq!(mismatches(&a, &b, p), 0, "p={p} N={len} {a:?} {b:?}");
                total += 1;
            }
        }
    }
    assert_eq!(total, 4000);
}

#[test]
fn ghost_oracle_sanity() {
    // 1 + 1 = (0, 1) in W_2(F_2), i.e. 2 = V(1).
    let one = lift(&[1, 0]);
    let g: Vec<_> = (0..2).map(|n| ghost(&one, 2, n) * 2).collect();
    assert_eq!(reduce(&from_ghost(&g, 2), 2), vec![0, 1]);
    assert!(ghost(&one, 3, 1).is_one());
}

// ---------- brute-force K1 equivalence over F_p ----------

/// Laurent polynomial over F_p, exponent -> coefficient.
#[derive(Clone, Debug, Default, PartialEq)]
struct Lp(BTreeMap<i32, u64>);

impl Lp {
    fn mono(c: u64, e: i32, p: u64) -> Lp {
        let mut m = BTreeMap::new();
        if !c.is_multiple_of(p) {
            m.insert(e, c % p);
        }
        Lp(m)
    }
    fn add(&self, o: &Lp, p: u64) -> Lp {
        let mut m = self.0.clone();
        for (&e, &c) in &o.0 {
            let v = (m.get(&e).copied().unwrap_or(0) + c) % p;
            if v == 0 {
                m.remove(&e);
            } else {
                m.insert(e, v);
            }
        }
        Lp(m)
    }
    fn mul(&self, o: &Lp, p: u64) -> Lp {
        let mut r = Lp::default();
        for (&e1, &c1) in &self.0 {
            for (&e2, &c2) in &o.0 {
                r = r.add(&Lp::mono(c1 * c2, e1 + e2, p), p);
            }
        }
        r
    }
}

type M2 = [[Lp; 2]; 2];

fn mmul(a: &M2, b: &M2, p: u64) -> M2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0].mul(&b[0][j], p).add(&a[i][1].mul(&b[1][j], p), p)))
}

fn constant(rows: [[u64; 2]; 2], p: u64) -> M2 {
    std::array::from_fn(|i| std::array::from_fn(|j| Lp::mono(rows[i][j], 0, p)))
}

fn fq_rows(g: &FqMat) -> [[u64; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| g.get(i, j).code() as u64))
}

fn inv_const(m: [[u64; 2]; 2], p: u64) -> [[u64; 2]; 2] {
    let det = (m[0][0] * m[1][1] + p * p - m[0][1] * m[1][0] % p) % p;
    let di = (1..p).find(|x| x * det % p == 1).expect("invertible");
    [[m[1][1] * di % p, (p - m[0][1]) * di % p], [(p - m[1][0]) * di % p, m[0][0] * di % p]]
}

fn diag_t(d: [i32; 2], p: u64) -> M2 {
    [[Lp::mono(1, d[0], p), Lp::default()], [Lp::default(), Lp::mono(1, d[1], p)]]
}

/// All of K1 modulo t^(depth+1): I + t M_1 + ... + t^depth M_depth.
fn k1_reps(p: u64, depth: i32) -> Vec<M2> {
    let per = p.pow(4);
    let count = per.pow(depth as u32);
    (0..count)
        .map(|mut code| {
            let mut k = constant([[1, 0], [0, 1]], p);
            for e in 1..=depth {
                let mut c = code % per;
                code /= per;
                for entry in k.iter_mut().flatten() {
                    *entry = entry.add(&Lp::mono(c % p, e, p), p);
                    c /= p;
                }
            }
            k
        })
        .collect()
}

fn in_k1(m: &M2) -> bool {
    (0..2).all(|i| {
        (0..2).all(|j| {
            let e = &m[i][j].0;
            e.keys().all(|&k| k >= 0) && e.get(&0).copied().unwrap_or(0) == u64::from(i == j)
        })
    })
}

/// Brute force: is g'^{-1} mu h' in K1 (g^{-1} mu h) K1?
struct Brute {
    p: u64,
    mu: [i32; 2],
    ks: Vec<M2>,
}

impl Brute {
    fn new(p: u64, mu: [i32; 2]) -> Brute {
        assert!(mu[1] == 0 && mu[0] >= 0);
        Brute { p, mu, ks: k1_reps(p, mu[0]) }
    }
    fn related(&self, (g, h): (&FqMat, &FqMat), (g2, h2): (&FqMat, &FqMat)) -> bool {
        let p = self.p;
        let (gr, hr, g2r, h2r) = (fq_rows(g), fq_rows(h), fq_rows(g2), fq_rows(h2));
        // x^{-1} = h^{-1} mu^{-1} g ; y = g2^{-1} mu h2
        let xinv = mmul(&mmul(&constant(inv_const(hr, p), p), &diag_t([-self.mu[0], -self.mu[1]], p), p), &constant(gr, p), p);
        let y = mmul(&mmul(&constant(inv_const(g2r, p), p), &diag_t(self.mu, p), p), &constant(h2r, p), p);
        // Exponents of x^{-1} are >= -mu_0 and of y are >= 0, so k mod t^(mu_0+1) decides.
        self.ks.iter().any(|k| in_k1(&mmul(&mmul(&xinv, k, p), &y, p)))
    }
}

fn same_class(mu: &Cocharacter, a: (&FqMat, &FqMat), b: (&FqMat, &FqMat)) -> bool {
    let prec = 10;
    class_of(&psi_map(a.0, a.1, mu, prec).unwrap(), mu).unwrap() == class_of(&psi_map(b.0, b.1, mu, prec).unwrap(), mu).unwrap()
}

#[test]
fn classes_match_brute_force_over_f2() {
    let f = FieldSpec::get(2, 1).unwrap();
    let g = enumerate_gl(f, 2).unwrap();
    let pairs: Vec<(FqMat, FqMat)> = g.iter().flat_map(|a| g.iter().map(move |b| (a.clone(), b.clone()))).collect();
    for w in [[1, 0], [2, 0]] {
        let mu = Cocharacter::new(w.to_vec()).unwrap();
        let brute = Brute::new(2, w);
        let zip = ZipGroup::get(&mu, f).unwrap();
        let mut related = 0;
        for a in &pairs {
            let orbit = zip.orbit(&a.0, &a.1);
            for b in &pairs {
                let bf = brute.related((&a.0, &a.1), (&b.0, &b.1));
                assert_eq!(bf, same_class(&mu, (&a.0, &a.1), (&b.0, &b.1)), "mu={w:?}");
                assert_eq!(bf, orbit.contains(&(b.0.key(), b.1.key())), "mu={w:?}");
                related += usize::from(bf);
            }
        }
        // Orbit sizes: 36 pairs split into classes; relatedness counts sum of squares.
        assert!(related >= pairs.len());
    }
}

#[test]
fn classes_match_brute_force_over_f3_sampled() {
    let f = FieldSpec::get(3, 1).unwrap();
    let mu = Cocharacter::new(vec![1, 0]).unwrap();
    let brute = Brute::new(3, [1, 0]);
    let zip = ZipGroup::get(&mu, f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut hits, mut misses) = (0, 0);
    for i in 0..500 {
        let a = (random_gl(f, 2, &mut rng), random_gl(f, 2, &mut rng));
        let b = if i % 2 == 0 {
            // Draw from the zip orbit of `a` so related pairs are well represented.
            let orbit: Vec<_> = zip.orbit(&a.0, &a.1).into_iter().collect();
            let (kg, kh) = orbit[rng.gen_range(0..orbit.len())];
            (FqMat::from_key(f, 2, kg), FqMat::from_key(f, 2, kh))
        } else {
            (random_gl(f, 2, &mut rng), random_gl(f, 2, &mut rng))
        };
        let bf = brute.related((&a.0, &a.1), (&b.0, &b.1));
        assert_eq!(bf, same_class(&mu, (&a.0, &a.1), (&b.0, &b.1)));
        if bf {
            hits += 1;
        } else {
            misses += 1;
        }
    }
    assert!(hits >= 250 && misses > 0);
}
