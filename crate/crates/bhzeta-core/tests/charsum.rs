use bhzeta_core::charsum::*;
use bhzeta_core::matrix::Q;
use bhzeta_core::Error;
use num_bigint::BigInt;
use proptest::prelude::*;

fn q(a: i64, b: i64) -> Q {
    Q::new(a, b)
}

/// J(chi_1, ..., chi_s) = sum over x_1 + ... + x_s = 1 of prod chi_i(x_i), by brute force.
fn jacobi_direct(ks: &[u64], m: u64, t: &CharacterTable) -> CyclotomicInt {
    let p = t.prime;
    let mut counts = vec![0i64; m as usize];
    let s = ks.len();
    let mut x = vec![0u64; s - 1];
    loop {
        let last = (1 + p * s as u64 - x.iter().sum::<u64>()) % p;
        let all: Vec<u64> = x.iter().copied().chain([last]).collect();
        if all.iter().all(|&v| v != 0) {
            let e: u64 = all.iter().zip(ks).map(|(&v, &k)| k * t.dlog[v as usize] as u64).sum();
            counts[(e % m) as usize] += 1;
        }
        let mut i = 0;
        while i < x.len() {
            x[i] += 1;
            if x[i] < p {
                break;
            }
            x[i] = 0;
            i += 1;
        }
        if i == x.len() {
            break;
        }
    }
    CyclotomicInt::from_power_sums(m, &counts)
}

#[test]
fn primitive_roots() {
    assert_eq!(build_character_table(7).unwrap().generator, 3);
    assert_eq!(build_character_table(7).unwrap().dlog[3], 1);
    assert_eq!(build_character_table(5).unwrap().generator, 2);
    assert_eq!(build_character_table(3).unwrap().generator, 2);
    assert!(matches!(build_character_table(9), Err(Error::NotPrime(9))));
}

#[test]
fn cyclotomic_polys() {
    assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
    assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
    assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
    assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    let z = CyclotomicInt::zeta_pow(5, 1);
    assert_eq!(z.pow(5), CyclotomicInt::one(5));
}

#[test]
fn quadratic_pair() {
    let t = build_character_table(13).unwrap();
    let j = jacobi_sum(&[q(1, 2), q(1, 2)], &t).unwrap();
    assert_eq!(j.as_integer(), Some(BigInt::from(1)));
    // two-character sum against the double loop
    for (a, b, m) in [(1, 1, 2), (1, 2, 4), (1, 1, 3), (2, 3, 6), (1, 5, 12)] {
        assert_eq!(t.jacobi2(a, b, m), jacobi_direct(&[a, b], m, &t));
    }
}

#[test]
fn chained_product_matches_direct_sum() {
    // prod g(chi_i) = chi_r(-1) p J(chi_1..chi_{r-1}) when the product character is trivial
    let t = build_character_table(31).unwrap();
    for b in [vec![q(1, 3), q(1, 3), q(1, 3)], vec![q(1, 2), q(1, 5), q(3, 10)], vec![q(1, 6), q(1, 2), q(1, 3)]] {
        let m = 30;
        let ks: Vec<u64> = b.iter().map(|x| (x * m as i64).to_integer() as u64).collect();
        let direct = jacobi_direct(&ks[..ks.len() - 1], m, &t);
        let sgn = t.sign_at_minus_one(ks[ks.len() - 1], m) * 31;
        let got = gauss_product(&b, &t).unwrap();
        let e = got.order;
        let want = direct.scale(&BigInt::from(sgn));
        // compare in Z[zeta_30]
        let mut sparse = vec![BigInt::from(0); m as usize];
        for (i, c) in got.coeffs.iter().enumerate() {
            sparse[(i as u64 * (m / e)) as usize] += c;
        }
        assert_eq!(CyclotomicInt::from_power_sums(m, &sparse), want, "{b:?}");
    }
}

#[test]
fn table_row_is_p() {
    let t = build_character_table(1801).unwrap();
    let g = gauss_product(&[q(1, 2), q(2, 3), q(1, 2), q(1, 3)], &t).unwrap();
    assert_eq!(g.as_integer(), Some(BigInt::from(1801 * 1801)));
    let j = jacobi_sum(&[q(1, 2), q(1, 3), q(1, 2), q(2, 3)], &t).unwrap();
    assert_eq!(j.as_integer(), Some(BigInt::from(1801)));
}

#[test]
fn degenerate_and_mismatched() {
    let t = build_character_table(13).unwrap();
    assert!(matches!(jacobi_sum(&[q(1, 2), q(1, 1)], &t), Err(Error::DegenerateTuple { index: 1 })));
    assert!(matches!(jacobi_sum(&[q(1, 5), q(4, 5)], &t), Err(Error::DenominatorMismatch { .. })));
}

#[test]
fn norm_checks() {
    let p = 13;
    assert!(norm_check(&CyclotomicInt::from_int(4, BigInt::from(p)), p, q(1, 1)).pass);
    assert!(!norm_check(&CyclotomicInt::from_int(4, BigInt::from(p + 1)), p, q(1, 2)).pass);
    let t = build_character_table(p).unwrap();
    let j = t.jacobi2(1, 1, 4);
    let r = norm_check(&j, p, q(1, 2));
    assert!(r.pass && r.exact == Some(true), "{r:?}");
}

proptest! {
    #[test]
    fn jacobi_norm_is_sqrt_p(pi in 0usize..6, a in 1u64..60, b in 1u64..60) {
        let p = [31u64, 61, 151, 181, 211, 241][pi];
        let m = 30;
        let (a, b) = (a % m, b % m);
        prop_assume!(a != 0 && b != 0 && (a + b) % m != 0);
        let t = build_character_table(p).unwrap();
        let j = t.jacobi2(a, b, m);
        let r = norm_check(&j, p, q(1, 2));
        prop_assert!(r.pass && r.exact == Some(true));
    }

    #[test]
    fn galois_is_a_ring_map(c1 in prop::collection::vec(-50i64..50, 12), c2 in prop::collection::vec(-50i64..50, 12), u in prop::sample::select(vec![1u64, 5, 7, 11, 13, 17, 19, 23])) {
        let x = CyclotomicInt::from_power_sums(24, &c1.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>());
        let y = CyclotomicInt::from_power_sums(24, &c2.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>());
        prop_assert_eq!(x.mul(&y).galois(u), x.galois(u).mul(&y.galois(u)));
        prop_assert_eq!(x.add(&y).galois(u), x.galois(u).add(&y.galois(u)));
    }
}
