use bhzeta_core::matrix::Q;
use bhzeta_core::padic::*;
use bhzeta_core::Error;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn padic_of_rational(x: &BigRational, p: u64, n: u32) -> PadicNumber {
    let m = BigInt::from(pow_p(p, n));
    let den = x.denom() % &m;
    let inv = den.modinv(&m).expect("denominator prime to p");
    PadicNumber::from_bigint(p, n, &(x.numer() * inv))
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * k)
}

/// a_k from the closed convolution sum_{i+pj=k} pi^{i+j} (-1)^j / (i! j!).
fn dwork_oracle(k: u64, p: u64) -> BigRational {
    let mut acc = BigRational::zero();
    let mut j = 0;
    while p * j <= k {
        let i = k - p * j;
        let e = i + j;
        let q = e / (p - 1);
        let mut t = BigRational::new(BigInt::one(), factorial(i) * factorial(j));
        t *= BigRational::from_integer(BigInt::from(-(p as i64)).pow(q as u32));
        if j % 2 == 1 {
            t = -t;
        }
        acc += t;
        j += 1;
    }
    acc
}

fn reflection_sign(x: &Q, p: u64) -> i64 {
    // Gamma_p(x) Gamma_p(1-x) = (-1)^{l(x)}, l(x) in 1..=p with l = x mod p
    let r = PadicNumber::from_ratio(p, 1, x).unwrap().residue;
    let l: u64 = if r.is_zero() { p } else { r.try_into().unwrap() };
    if l % 2 == 0 { 1 } else { -1 }
}

#[test]
fn gamma_int_values() {
    assert_eq!(gamma_p_int(0, 7, 5), PadicNumber::one(7, 5));
    assert_eq!(gamma_p_int(1, 7, 5), PadicNumber::from_i64(7, 5, -1));
    assert_eq!(gamma_p_int(2, 7, 5), PadicNumber::one(7, 5));
    assert_eq!(gamma_p_int(8, 7, 5), PadicNumber::from_i64(7, 5, 720));
    assert_eq!(gamma_p_int(9, 7, 5), PadicNumber::from_i64(7, 5, -5760));
}

#[test]
fn block_product_matches_direct_product() {
    for p in [3u64, 5, 7, 13] {
        for t in 0..200 {
            let direct = gamma_p_int(t, p, 6);
            let block = gamma_p_rational(&Q::from_integer(t as i64), p, 6).unwrap();
            assert_eq!(direct, block, "p = {p}, t = {t}");
        }
    }
}

#[test]
fn dwork_matches_closed_convolution() {
    for p in [3u64, 5, 7] {
        let n = 6;
        let s = dwork_coeffs(p, n, 60).unwrap();
        for k in 0..=60 {
            let want = padic_of_rational(&dwork_oracle(k, p), p, n + 1);
            assert!(s.values[k as usize].congruent(&want), "p = {p}, k = {k}");
        }
        s.self_test().unwrap();
    }
}

#[test]
fn gamma_table_matches_block_product() {
    for p in [3u64, 5, 7, 11, 13, 31] {
        let n = 6;
        let t = GammaTable::build(p, n).unwrap();
        for m in 0..p {
            let x = Q::new(m as i64, p as i64 - 1);
            let want = gamma_p_rational(&x, p, n).unwrap();
            assert_eq!(t.get(m), &want, "p = {p}, m = {m}");
            assert!(t.get(m).is_unit());
        }
    }
}

#[test]
fn lemma_alpha_one_identity() {
    let (p, n) = (13u64, 6);
    let s = dwork_coeffs(p, n, required_k_max(p, n)).unwrap();
    let mut acc = PadicNumber::zero(p, n);
    for (k, a) in s.values.iter().enumerate().skip(1) {
        if k as u64 % (p - 1) == 0 {
            acc = acc.add(a);
        }
    }
    let lhs = acc.mul_int(p as i64 - 1);
    assert_eq!(lhs.truncate(n), PadicNumber::from_i64(p, n, -(p as i64)));
}

#[test]
fn reflection_on_table() {
    for p in [5u64, 13, 31] {
        let t = GammaTable::build(p, 5).unwrap();
        for m in 0..p {
            let x = Q::new(m as i64, p as i64 - 1);
            let prod = t.get(m).mul(t.get(p - 1 - m));
            assert_eq!(prod, PadicNumber::from_i64(p, 5, reflection_sign(&x, p)), "p = {p}, m = {m}");
        }
    }
    let t = GammaTable::build(13, 6).unwrap();
    assert_eq!(t.get(6).pow(2), PadicNumber::from_i64(13, 6, reflection_sign(&Q::new(1, 2), 13)));
}

#[test]
fn gamma_vector_cases() {
    let t = GammaTable::build(13, 5).unwrap();
    let z = Q::from_integer(0);
    let o = Q::from_integer(1);
    assert_eq!(t.gamma_vector(&[z, z, z, z]).unwrap(), PadicNumber::one(13, 5));
    assert_eq!(t.gamma_vector(&[o, z, o, z]).unwrap(), PadicNumber::one(13, 5));
    assert!(matches!(gamma_p_vector(&[Q::new(1, 5)], 13, 5), Err(Error::DenominatorMismatch { .. })));
}

#[test]
fn table_row_reduces_to_p_at_1801() {
    // Gamma(1/2)^2 Gamma(1/3) Gamma(2/3) = 1 by reflection
    let p = 1801;
    let v = [Q::new(1, 2), Q::new(1, 3), Q::new(1, 2), Q::new(2, 3)];
    let mut want = 1;
    for x in [Q::new(1, 2), Q::new(1, 3)] {
        want *= reflection_sign(&x, p);
    }
    assert_eq!(want, 1);
    let g: PadicNumber = v
        .iter()
        .map(|x| gamma_p_rational(x, p, 3).unwrap())
        .fold(PadicNumber::one(p, 3), |a, b| a.mul(&b));
    assert_eq!(g, PadicNumber::one(p, 3));
}

#[test]
fn short_stream_is_rejected() {
    let s = dwork_coeffs(13, 6, 50).unwrap();
    assert!(matches!(GammaTable::from_stream(&s), Err(Error::PrecisionExhausted { .. })));
    assert!(matches!(dwork_coeffs(15, 4, 10), Err(Error::NotPrime(15))));
}

#[test]
fn pi_ring_reduction() {
    let p = 5;
    let pi = PiRingElement::monomial(PadicNumber::one(p, 6), 1);
    let mut x = pi.clone();
    for _ in 1..4 {
        x = x.mul(&pi);
    }
    assert_eq!(x.to_padic().unwrap().truncate(6), PadicNumber::from_i64(p, 6, -5));
    assert_eq!(x.pi_valuation(), Some(4));
    let s = dwork_coeffs(p, 4, 30).unwrap();
    let v = s.value(1);
    assert!(v.coeffs.iter().zip(&pi.coeffs).all(|(a, b)| a.congruent(b)));
}

#[test]
fn teichmuller_lifts() {
    for a in 1..13 {
        let w = teichmuller(a, 13, 8);
        assert_eq!(w.pow(12), PadicNumber::one(13, 8));
        assert_eq!(&w.residue % 13u32, BigUint::from(a));
    }
}

#[test]
fn dwork_valuation_growth() {
    let (p, n) = (7u64, 8);
    let s = dwork_coeffs(p, n, required_k_max(p, n)).unwrap();
    for (k, a) in s.values.iter().enumerate() {
        let k = k as i64;
        let r = k % (p as i64 - 1);
        let bound = (k * (p as i64 - 1) * (p as i64 - 1) - r * (p * p) as i64) as f64 / ((p * p * (p - 1)) as f64);
        assert!(a.is_zero() || a.valuation() as f64 >= bound.ceil().min(a.precision as f64));
    }
}

proptest! {
    #[test]
    fn padic_ring_ops_match_integers(a in -10_000i64..10_000, b in -10_000i64..10_000, p in prop::sample::select(vec![3u64, 5, 7, 101])) {
        let n = 4;
        let (x, y) = (PadicNumber::from_i64(p, n, a), PadicNumber::from_i64(p, n, b));
        prop_assert_eq!(x.add(&y), PadicNumber::from_i64(p, n, a + b));
        prop_assert_eq!(x.sub(&y), PadicNumber::from_i64(p, n, a - b));
        prop_assert_eq!(x.mul(&y).truncate(n), PadicNumber::from_i64(p, n, a * b));
        prop_assert_eq!(x.centered(), BigInt::from(a).mod_floor_centered(&BigInt::from(pow_p(p, n))));
    }

    #[test]
    fn gamma_functional_equation(num in -500i64..500, den in 1i64..40) {
        let p = 7u64;
        prop_assume!(den % 7 != 0);
        let x = Q::new(num, den);
        prop_assume!(x.numer() % 7 != 0);
        // Gamma(x+1) = -x Gamma(x) for x a unit
        let g = gamma_p_rational(&x, p, 5).unwrap();
        let g1 = gamma_p_rational(&(x + Q::from_integer(1)), p, 5).unwrap();
        let xs = PadicNumber::from_ratio(p, 5, &x).unwrap();
        prop_assert_eq!(g1, g.mul(&xs).neg().truncate(5));
    }

    #[test]
    fn gamma_reflection(num in -500i64..500, den in 1i64..40) {
        let p = 11u64;
        prop_assume!(den % 11 != 0);
        let x = Q::new(num, den);
        let g = gamma_p_rational(&x, p, 4).unwrap();
        let h = gamma_p_rational(&(Q::from_integer(1) - x), p, 4).unwrap();
        prop_assert_eq!(g.mul(&h).truncate(4), PadicNumber::from_i64(p, 4, reflection_sign(&x, p)));
    }
}

trait Centered {
    fn mod_floor_centered(&self, m: &BigInt) -> BigInt;
}

impl Centered for BigInt {
    fn mod_floor_centered(&self, m: &BigInt) -> BigInt {
        use num_integer::Integer;
        let r = self.mod_floor(m);
        if &r * 2 > *m { r - m } else { r }
    }
}
