use bhzeta_core::matrix::*;
use bhzeta_core::milnor::*;

fn q(a: i64, b: i64) -> Q {
    Q::new(a, b)
}

#[test]
fn fermat_one_variable() {
    let b = milnor_basis(&BHMatrix::diagonal(&[4]).unwrap()).unwrap();
    assert_eq!(b.basis, vec![vec![0], vec![1], vec![2]]);
}

#[test]
fn empty_potential() {
    let b = milnor_basis(&BHMatrix::new(vec![]).unwrap()).unwrap();
    assert_eq!(b.basis, vec![Vec::<i64>::new()]);
}

#[test]
fn fermat_quartic_untwisted_invariants() {
    let a = BHMatrix::diagonal(&[4; 4]).unwrap();
    let b = milnor_basis(&a).unwrap();
    assert_eq!(b.mu(), 81);
    let gt = a.transpose_group(&a.j_group());
    let inv = b
        .basis
        .iter()
        .filter(|f| {
            let g: Vec<i64> = f.iter().map(|x| x + 1).collect();
            gt.contains(&a.element(Side::AT, &g).unwrap())
        })
        .count();
    // oracle: gamma in {1,2,3}^4 with |gamma| = 0 mod 4
    let mut oracle = 0;
    for x in 0..81 {
        let g = [x % 3 + 1, x / 3 % 3 + 1, x / 9 % 3 + 1, x / 27 + 1];
        if g.iter().sum::<i64>() % 4 == 0 {
            oracle += 1;
        }
    }
    assert_eq!(inv, oracle);
    assert_eq!(inv, 21);
}

#[test]
fn chain_untwisted_classes() {
    let a = BHMatrix::new(vec![vec![2, 1, 0], vec![0, 2, 1], vec![0, 0, 3]]).unwrap();
    let b = milnor_basis(&a).unwrap();
    assert_eq!(b.mu(), 8);
    let sp = sector_spectrum(&a, &a.j_group()).unwrap();
    let untwisted: Vec<Vec<i64>> =
        sp.labels.iter().filter(|l| l.lambda.is_zero()).map(|l| l.gamma.rep.clone()).collect();
    assert_eq!(untwisted, vec![vec![1, 1, 1], vec![1, 2, 3]]);
    let sr: Vec<(Q, Q)> = sp.labels.iter().map(|l| (l.s, l.r)).collect();
    assert_eq!(
        sr,
        vec![(q(0, 1), q(0, 1)), (q(0, 1), q(1, 1)), (q(1, 1), q(0, 1)), (q(1, 1), q(1, 1))]
    );
}

#[test]
fn k3_m30_spectrum() {
    let a = BHMatrix::diagonal(&[2, 3, 10, 15]).unwrap();
    let sp = sector_spectrum(&a, &a.j_group()).unwrap();
    assert_eq!(sp.labels.len(), 24);
    let h = hodge_numbers(&sp.labels);
    assert_eq!(h[&(q(1, 1), q(1, 1))], 20);
    assert_eq!(euler_characteristic(&sp.labels), 24);
    assert!(sp.warnings.is_empty());
}

#[test]
fn quintic_spectrum() {
    let a = BHMatrix::diagonal(&[5; 5]).unwrap();
    let sp = sector_spectrum(&a, &a.j_group()).unwrap();
    assert_eq!(sp.labels.len(), 208);
    let h = hodge_numbers(&sp.labels);
    assert_eq!(h[&(q(1, 1), q(2, 1))], 101);
    assert_eq!(h[&(q(2, 1), q(1, 1))], 101);
    assert_eq!(euler_characteristic(&sp.labels), -200);
}

#[test]
fn non_cy_cubic_surface() {
    let a = BHMatrix::new(vec![vec![2, 1, 0, 0], vec![0, 2, 1, 0], vec![0, 0, 2, 1], vec![0, 0, 0, 3]]).unwrap();
    let sp = sector_spectrum(&a, &a.j_group()).unwrap();
    assert_eq!(sp.labels.len(), 8);
    assert!(!sp.warnings.is_empty());
    let fr: Vec<Vec<Q>> = sp.labels.iter().filter(|l| l.lambda.is_zero()).map(|l| l.gamma.fracs()).collect();
    assert!(fr.contains(&vec![q(1, 1), q(0, 1), q(1, 1), q(0, 1)]));
    assert!(fr.contains(&vec![q(1, 1), q(0, 1), q(1, 2), q(1, 2)]));
    let tw: Vec<(Q, Q)> = sp.labels.iter().filter(|l| !l.lambda.is_zero()).map(|l| (l.s, l.r)).collect();
    assert_eq!(tw, vec![(q(1, 3), q(1, 3)), (q(5, 3), q(5, 3))]);
}

#[test]
fn serre_pairing_on_fixtures() {
    let mats = vec![
        BHMatrix::new(vec![vec![2, 1, 0], vec![0, 2, 1], vec![0, 0, 3]]).unwrap(),
        BHMatrix::diagonal(&[2, 3, 10, 15]).unwrap(),
        BHMatrix::new(vec![vec![3, 1, 0, 0], vec![1, 3, 0, 0], vec![0, 0, 3, 1], vec![0, 0, 1, 3]]).unwrap(),
        BHMatrix::new(vec![vec![3, 1, 0, 0], vec![0, 3, 1, 0], vec![0, 0, 3, 1], vec![0, 0, 0, 4]]).unwrap(),
        BHMatrix::new(vec![vec![5, 0, 0, 0], vec![0, 15, 0, 0], vec![0, 0, 3, 0], vec![1, 0, 0, 2]]).unwrap(),
    ];
    for a in mats {
        let sp = sector_spectrum(&a, &a.j_group()).unwrap();
        let pair = serre_pairing(&a, &sp.labels);
        let n = a.n() as i64;
        for (i, p) in pair.iter().enumerate() {
            let j = p.unwrap_or_else(|| panic!("no partner for {:?}", sp.labels[i]));
            assert_eq!(pair[j], Some(i));
            let (x, y) = (&sp.labels[i], &sp.labels[j]);
            assert_eq!(x.s + y.s, Q::from_integer(n - 2), "{:?} {:?}", x, y);
            assert_eq!(x.r + y.r, Q::from_integer(n - 2));
        }
    }
}
