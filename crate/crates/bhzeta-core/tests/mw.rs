use bhzeta_core::matrix::*;
use bhzeta_core::milnor::sector_spectrum;
use bhzeta_core::mw::*;
use bhzeta_core::padic::{gamma_p_rational, is_prime, GammaTable, PadicNumber};
use bhzeta_core::spectrum::*;
use bhzeta_core::Error;
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

fn fermat(n: usize) -> BHMatrix {
    BHMatrix::diagonal(&vec![n as i64; n]).unwrap()
}

fn chain223() -> BHMatrix {
    BHMatrix::new(vec![vec![2, 1, 0], vec![0, 2, 1], vec![0, 0, 3]]).unwrap()
}

fn q(a: i64, b: i64) -> Q {
    Q::new(a, b)
}

fn pw(b: u64, e: u32, p: u64) -> u64 {
    (0..e).fold(1, |acc, _| acc * b % p)
}

/// Projective points of `sum_i prod_j x_j^{A_ij} = 0`, by enumerating the affine cone.
fn brute(a: &BHMatrix, p: u64) -> u64 {
    let n = a.n();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || a.get(i, j) == 0));
    let affine = if diagonal {
        // histogram of x^d, convolved coordinate by coordinate
        let mut hist = vec![0u64; p as usize];
        hist[0] = 1;
        for i in 0..n {
            let mut next = vec![0u64; p as usize];
            for x in 0..p {
                let t = pw(x, a.get(i, i) as u32, p);
                for (s, c) in hist.iter().enumerate() {
                    next[(s as u64 + t) as usize % p as usize] += c;
                }
            }
            hist = next;
        }
        hist[0]
    } else {
        let mut count = 0;
        let mut x = vec![0u64; n];
        loop {
            let w: u64 = (0..n)
                .map(|i| (0..n).fold(1, |acc, j| acc * pw(x[j], a.get(i, j) as u32, p) % p))
                .sum::<u64>()
                % p;
            count += (w == 0) as u64;
            let mut i = 0;
            while i < n {
                x[i] += 1;
                if x[i] < p {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        count
    };
    (affine - 1) / (p - 1)
}

fn supertrace_count(a: &BHMatrix, p: u64) -> BigInt {
    let g = a.j_group();
    let labels = sector_spectrum(a, &g).unwrap().labels;
    let n = auto_precision(&labels, p, 1);
    let table = GammaTable::build(p, n).unwrap();
    let rs = eigenvalues_for(&labels, p, n, Some(&table)).unwrap();
    supertrace(&rs, 1).unwrap().lift
}

#[test]
fn one_dimensional_identity() {
    for p in [7u64, 13, 31] {
        let sums = DworkSums::new(p, 8, None).unwrap();
        for m in 0..p {
            let (l, r) = sums.lemma_sides(m).unwrap();
            assert!(l.congruent(&r), "p = {p}, m = {m}: {l:?} vs {r:?}");
            assert!(l.precision >= 8);
        }
    }
}

#[test]
fn lemma_closed_form_fermat_box() {
    let p = 13;
    let n = 6;
    let sums = DworkSums::new(p, n, None).unwrap();
    let steps: Vec<Q> = (0..=4).map(|i| q(i, 4)).collect();
    let mut checked = 0;
    for idx in 0..5usize.pow(4) {
        let v: Vec<Q> = (0..4).map(|j| steps[idx / 5usize.pow(j) % 5]).collect();
        if !v.iter().sum::<Q>().is_integer() {
            continue;
        }
        let s = sums.s_sum(&v).unwrap();
        let lhs = s.mul(&PadicNumber::from_i64(p, n + 8, 12).pow(4));
        let deg = v.iter().sum::<Q>().to_integer() as u32;
        let mut rhs = PadicNumber::from_i64(p, n + 8, -(p as i64)).pow(deg as u64);
        for x in &v {
            rhs = rhs.mul(&gamma_p_rational(x, p, n).unwrap());
        }
        assert!(lhs.congruent(&rhs), "{v:?}");
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn s_sum_edge_cases() {
    let p = 13;
    let sums = DworkSums::new(p, 8, None).unwrap();
    // (p-1) S(0) = G_0 = -1 in one variable
    let s0 = sums.s_sum(&[q(0, 1)]).unwrap().mul_int(12);
    assert!(s0.congruent(&PadicNumber::from_i64(p, 8, -1)));
    // each coordinate equal to 1 contributes -p/(p-1)
    let s1 = sums.s_sum(&[q(1, 1); 3]).unwrap().mul(&PadicNumber::from_i64(p, 20, 12).pow(3));
    assert!(s1.congruent(&PadicNumber::from_i64(p, 8, -(13i64.pow(3)))));
    // full delta is the S-sum, empty delta is a single diagonal entry
    let v = vec![q(1, 4), q(3, 4), q(0, 1), q(1, 1)];
    assert_eq!(sums.s_partial(&v, &[0, 1, 2, 3]).unwrap(), sums.s_sum(&v).unwrap());
    let single = sums.s_partial(&v, &[]).unwrap();
    let mut direct = PadicNumber::one(p, 8);
    for x in &v {
        direct = direct.mul(&sums.coefficient(x).unwrap());
    }
    assert!(single.congruent(&direct.mul(&PadicNumber::from_i64(p, 8, -13))));
}

#[test]
fn truncation_is_stable() {
    for p in [7u64, 13, 31] {
        let n = 8;
        let m = certified_truncation(p, n);
        let a = DworkSums::new(p, n, Some(m)).unwrap();
        let b = DworkSums::new(p, n, Some(m + 2)).unwrap();
        for v in [vec![q(1, 2), q(1, 2)], vec![q(0, 1), q(1, 1)], vec![q(1, 3), q(2, 3), q(1, 1)]] {
            if v.iter().any(|x| !(x * (p as i64 - 1)).is_integer()) {
                continue;
            }
            assert_eq!(a.s_sum(&v).unwrap(), b.s_sum(&v).unwrap(), "p = {p}, {v:?}");
        }
    }
    assert!(matches!(DworkSums::new(7, 8, Some(2)), Err(Error::PrecisionExhausted { .. })));
}

#[test]
fn vertical_part() {
    let c = mw_point_count(&fermat(4), 13, 6).unwrap();
    assert_eq!(c.vertical, BigUint::from(1u32 + 13 + 169));
    assert!(c.residual.unwrap().is_zero());
}

#[test]
fn fermat_tri_oracle() {
    for n in [3usize, 4] {
        let a = fermat(n);
        for p in (5u64..100).filter(|&p| is_prime(p) && (p - 1) % n as u64 == 0) {
            let c = mw_point_count(&a, p, 6).unwrap();
            let mw = BigInt::from(c.lift.clone().unwrap());
            let b = BigInt::from(brute(&a, p));
            let st = supertrace_count(&a, p);
            assert_eq!(mw, b, "n = {n}, p = {p}");
            assert_eq!(st, b, "n = {n}, p = {p}");
            let dual = mw_point_count_with(&a, p, 6, Cone::Dual).unwrap();
            assert_eq!(dual.value, c.value);
        }
    }
}

#[test]
fn chain_counts_under_both_cones() {
    let a = chain223();
    for p in [13u64, 37, 61, 73, 97] {
        let b = BigUint::from(brute(&a, p));
        let mono = mw_point_count_with(&a, p, 6, Cone::Monomial).unwrap();
        let dual = mw_point_count_with(&a, p, 6, Cone::Dual).unwrap();
        assert_eq!(mono.lift, Some(b.clone()), "p = {p}");
        assert_eq!(dual.lift, Some(b.clone()), "p = {p}");
        assert_eq!(BigInt::from(b), supertrace_count(&a, p));
    }
    assert_eq!(brute(&a, 13), 20);
}

#[test]
fn interior_matches_supertrace() {
    let a = fermat(4);
    let c = interior_count(&a, 13, 6).unwrap();
    assert_eq!(BigInt::from(c.residue), supertrace_count(&a, 13));
}

fn subsets(c: &CancellationClass) -> Vec<(Vec<usize>, Vec<usize>)> {
    c.pairs.iter().map(|q| (q.left.subset.clone(), q.right.subset.clone())).collect()
}

fn one_based(s: &[usize]) -> Vec<usize> {
    s.iter().map(|i| i + 1).collect()
}

#[test]
fn fermat_quartic_tables() {
    let a = fermat(4);
    let r = cancellation_report(&a, 13, 6).unwrap();
    assert!(r.all_vanish(), "{}", r.render());
    assert_eq!(r.interior_classes, 21);

    let c = r.find(&[q(1, 4), q(3, 4), q(0, 1), q(0, 1)], &[]).unwrap();
    assert_eq!(c.pivot, 2);
    let expect: Vec<(Vec<usize>, Vec<usize>)> = vec![
        (vec![], vec![3]),
        (vec![1], vec![1, 3]),
        (vec![2], vec![2, 3]),
        (vec![4], vec![3, 4]),
        (vec![1, 2], vec![1, 2, 3]),
        (vec![1, 4], vec![1, 3, 4]),
        (vec![2, 4], vec![2, 3, 4]),
        (vec![1, 2, 4], vec![1, 2, 3, 4]),
    ];
    let mut got: Vec<_> = subsets(c).iter().map(|(l, r)| (one_based(l), one_based(r))).collect();
    got.sort_by_key(|(l, _)| (l.len(), l.clone()));
    assert_eq!(got, expect);
    let first = c.pairs.iter().find(|q| q.left.subset.is_empty()).unwrap();
    assert_eq!(first.left.label(), "(-p)^4 (-p)^1 Gamma_p(1/4, 3/4, 0, 0)");
    assert_eq!(first.right.label(), "(-p)^3 (-p)^2 Gamma_p(1/4, 3/4, 1, 0)");
    let four = c.pairs.iter().find(|q| q.left.subset == [3]).unwrap();
    assert_eq!((four.left.weight, four.left.degree()), (3, 2));
    assert_eq!((four.right.weight, four.right.degree()), (2, 3));
    assert!(c.pairs.iter().all(|q| q.left.gamma_form && q.right.gamma_form));

    let c = r.find(&[q(1, 2), q(3, 4), q(3, 4), q(0, 1)], &[]).unwrap();
    assert_eq!(c.pivot, 3);
    assert_eq!(c.pairs.len(), 8);
    assert!(c.pairs.iter().all(|q| q.left.degree() == 2 && q.right.degree() == 3));

    // value patterns of gamma A^{-1} up to permutation, `None` for {0, 1}
    let mut patterns: Vec<Vec<Option<Q>>> = r
        .classes
        .iter()
        .map(|c| c.fracs.iter().map(|x| (!x.is_zero()).then_some(*x)).collect())
        .collect();
    for pat in &mut patterns {
        pat.sort();
    }
    patterns.sort();
    patterns.dedup();
    let s = None;
    let t = |a, b| Some(q(a, b));
    let mut boundary = vec![
        vec![s, s, s, s],
        vec![s, s, t(1, 4), t(3, 4)],
        vec![s, s, t(1, 2), t(1, 2)],
        vec![s, t(1, 4), t(1, 4), t(1, 2)],
        vec![s, t(1, 2), t(3, 4), t(3, 4)],
    ];
    boundary.sort();
    assert_eq!(patterns, boundary);
}

#[test]
fn three_chain_tables() {
    let a = chain223();
    let r = cancellation_report(&a, 13, 6).unwrap();
    assert!(r.all_vanish(), "{}", r.render());

    // vertices of the fundamental region
    let c = r.find(&[q(0, 1); 3], &[]).unwrap();
    assert_eq!(c.pivot, 0);
    let mut gammas: Vec<(Vec<i64>, Vec<i64>)> = c.pairs.iter().map(|q| (q.left.gamma.clone(), q.right.gamma.clone())).collect();
    gammas.sort();
    assert_eq!(
        gammas,
        vec![
            (vec![0, 0, 0], vec![2, 1, 0]),
            (vec![0, 0, 3], vec![2, 1, 3]),
            (vec![0, 2, 1], vec![2, 3, 1]),
            (vec![0, 2, 4], vec![2, 3, 4]),
        ]
    );
    let a0 = c.pairs.iter().find(|q| q.left.subset.is_empty()).unwrap();
    assert_eq!(a0.left.label(), "(-p)^3 (-p)^0 Gamma_p(0, 0, 0)");
    assert_eq!(a0.right.label(), "(-p)^2 (-p)^1 Gamma_p(1, 0, 0)");

    // gamma = (0,1,2) + sum t_i e_i A; the box representative serves every I
    let c = r.find(&[q(0, 1), q(1, 2), q(1, 2)], &[]).unwrap();
    assert_eq!(c.pivot, 0);
    let mut got: Vec<_> = subsets(c).iter().map(|(l, r)| (one_based(l), one_based(r))).collect();
    got.sort_by_key(|(l, _)| (l.len(), l.clone()));
    assert_eq!(got, vec![(vec![], vec![1]), (vec![2], vec![1, 2]), (vec![3], vec![1, 3]), (vec![2, 3], vec![1, 2, 3])]);
    assert!(c.pairs.iter().all(|q| q.left.gamma == [0, 1, 2] && q.right.gamma == [2, 2, 2]));
    // the translated rows (0,3,3), (0,1,5), (0,3,6) cancel against their e_1 A shifts too
    let sums = DworkSums::new(13, 7, None).unwrap();
    for (gamma, weight) in [([0i64, 3, 3], 2u32), ([0, 1, 5], 2), ([0, 3, 6], 1)] {
        let v = dual_coords(&a, &gamma);
        let mut w = v.clone();
        w[0] += 1;
        let l = sums.s_sum(&v).unwrap().mul(&PadicNumber::from_i64(13, 20, -13).pow(weight as u64 + 1));
        let r = sums.s_sum(&w).unwrap().mul(&PadicNumber::from_i64(13, 20, -13).pow(weight as u64));
        assert!(l.add(&r).is_zero(), "{gamma:?}");
    }

    // terms with gamma_i > 0 but (gamma A^{-1})_i = 0
    let c = r.find(&[q(0, 1); 3], &[1]).unwrap();
    assert_eq!(c.pivot, 2);
    let rows: Vec<(String, String)> = c.pairs.iter().map(|q| (q.left.label(), q.right.label())).collect();
    assert!(rows.contains(&("(-p)^2 S^{1, 3}(1, 0, 0)".into(), "(-p)^1 S^{1, 3}(1, 0, 1)".into())));
    assert!(rows.contains(&("(-p)^1 S^{1, 3}(1, 0, 0)".into(), "(-p)^0 S^{1, 3}(1, 0, 1)".into())));
    assert_eq!(one_based(&c.pairs[0].left.subset), vec![2]);
    let c = r.find(&[q(0, 1); 3], &[2]).unwrap();
    assert_eq!(c.pivot, 0);
    let rows: Vec<(String, String)> = c.pairs.iter().map(|q| (q.left.label(), q.right.label())).collect();
    assert!(rows.contains(&("(-p)^2 S^{1, 2}(0, 1, 0)".into(), "(-p)^1 S^{1, 2}(1, 1, 0)".into())));
    assert!(rows.contains(&("(-p)^1 S^{1, 2}(0, 1, 0)".into(), "(-p)^0 S^{1, 2}(1, 1, 0)".into())));
    assert!(r.classes.iter().filter(|c| !c.frozen.is_empty()).count() == 2);
}

#[test]
fn unsupported_shapes() {
    let chain = BHMatrix::new(vec![vec![3, 1, 0], vec![0, 2, 1], vec![0, 0, 3]]).unwrap();
    assert!(matches!(mw_point_count(&chain, 13, 4), Err(Error::NotHomogeneous)));
    assert!(matches!(cancellation_report(&fermat(3), 11, 4), Err(Error::DenominatorMismatch { .. })));
    assert_eq!(Error::UnpairedTerm { detail: String::new() }.code(), "mw.unpaired_term");
}

#[test]
fn cone_monomials() {
    let a = chain223();
    // gamma = (2,1,0): gamma_2 > 0 while (gamma A^{-1})_2 = 0
    assert!(ConeMonomial::new(&a, vec![2, 1, 0], vec![1], Cone::Monomial).is_some());
    assert!(ConeMonomial::new(&a, vec![2, 1, 0], vec![1], Cone::Dual).is_none());
    let m = ConeMonomial::new(&a, vec![0, 1, 2], vec![1, 2], Cone::Dual).unwrap();
    assert_eq!(m.v, vec![q(0, 1), q(1, 2), q(1, 2)]);
    assert_eq!(m.degree(), 1);
    assert!(ConeMonomial::new(&a, vec![1, 0, 0], vec![], Cone::Dual).is_none());
    let s = s_sum(&a, &[0, 1, 2], 13, 6, None).unwrap();
    // (-p) S(0) S(1/2)^2 with unit one-dimensional sums
    assert_eq!(s.value.valuation(), 1);
    assert_eq!(s_sum(&a, &[2, 2, 2], 13, 6, None).unwrap().v, vec![q(1, 1), q(1, 2), q(1, 2)]);
    assert!(matches!(s_sum(&a, &[4, 4, 4], 13, 6, None), Err(Error::OutsideBox(_))));
}

#[test]
fn loop_pairs_and_counts() {
    let a = BHMatrix::new(vec![vec![2, 1, 0], vec![0, 2, 1], vec![1, 0, 2]]).unwrap();
    for p in [19u64, 37] {
        let r = cancellation_report(&a, p, 6).unwrap();
        assert!(r.all_vanish(), "{}", r.render());
        assert_eq!(r.pair_count(), 10);
        assert_eq!(r.classes.iter().filter(|c| !c.frozen.is_empty()).count(), 3);
        let b = brute(&a, p);
        assert_eq!(mw_point_count(&a, p, 6).unwrap().lift, Some(BigUint::from(b)));
        assert_eq!(supertrace_count(&a, p), BigInt::from(b));
    }
}
