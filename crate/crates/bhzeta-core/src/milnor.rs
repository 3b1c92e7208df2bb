//! Jacobian rings of invertible potentials and the `(gamma, lambda)` sector labels
//! of the orbifold cohomology.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::{BHMatrix, GroupElement, Side, SymmetryGroup, Q};

/// Monomial basis of `C[x] / (dW_A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MilnorBasis {
    pub weights: Vec<i64>,
    pub degree: i64,
    /// Exponent vectors, sorted by (weighted degree, exponent).
    pub basis: Vec<Vec<i64>>,
    /// Reduced `G_{A^T}` class numerators of each basis monomial.
    pub grading: Vec<Vec<i64>>,
}

impl MilnorBasis {
    pub fn mu(&self) -> usize {
        self.basis.len()
    }
}

/// Milnor number `prod (1/q_i - 1)` from the charges.
pub fn milnor_number(a: &BHMatrix) -> Q {
    a.weights().into_iter().fold(Q::from_integer(1), |acc, q| acc * (q.recip() - Q::from_integer(1)))
}

fn monomials_up_to(w: &[i64], max: i64) -> Vec<Vec<i64>> {
    fn rec(w: &[i64], i: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i == w.len() {
            out.push(cur.clone());
            return;
        }
        let mut e = 0;
        while e * w[i] <= left {
            cur.push(e);
            rec(w, i + 1, left - e * w[i], cur, out);
            cur.pop();
            e += 1;
        }
    }
    let mut out = Vec::new();
    if max >= 0 {
        rec(w, 0, max, &mut Vec::new(), &mut out);
    }
    out
}

fn gcd_normalize(row: &mut [i128]) {
    let g = row.iter().fold(0i128, |g, &x| g.gcd(&x));
    if g > 1 {
        for x in row.iter_mut() {
            *x /= g;
        }
    }
}

/// Columns not holding a pivot after fraction-free elimination, columns scanned in order.
fn non_pivot_columns(mut rows: Vec<Vec<i128>>, ncols: usize) -> Result<Vec<usize>> {
    let mut free = Vec::new();
    let mut top = 0;
    for c in 0..ncols {
        let Some(pr) = (top..rows.len()).find(|&r| rows[r][c] != 0) else {
            free.push(c);
            continue;
        };
        rows.swap(top, pr);
        let piv = rows[top][c];
        for r in top + 1..rows.len() {
            let f = rows[r][c];
            if f == 0 {
                continue;
            }
            for k in c..ncols {
                let v = rows[r][k]
                    .checked_mul(piv)
                    .and_then(|x| x.checked_sub(rows[top][k].checked_mul(f)?))
                    .ok_or(Error::Overflow("Jacobian elimination"))?;
                rows[r][k] = v;
            }
            gcd_normalize(&mut rows[r]);
        }
        top += 1;
    }
    Ok(free)
}

/// Monomial basis of the Jacobian ring, computed bucket by bucket over
/// (weighted degree, `G_{A^T}` class); pivots go to the larger monomials.
pub fn milnor_basis(a: &BHMatrix) -> Result<MilnorBasis> {
    let n = a.n();
    if n == 0 {
        return Ok(MilnorBasis { weights: vec![], degree: 1, basis: vec![vec![]], grading: vec![vec![]] });
    }
    if let Some(index) = a.weights().iter().position(|q| *q <= Q::from_integer(0)) {
        return Err(Error::NonPositiveWeight { index });
    }
    let (w, d) = a.integer_weights();
    let hmax: i64 = w.iter().map(|wi| d - 2 * wi).sum();
    let deg = |f: &[i64]| -> i64 { f.iter().zip(&w).map(|(x, y)| x * y).sum() };
    let class = |f: &[i64]| -> Vec<i64> { a.from_num(Side::AT, &a.frac_num(Side::AT, f)).num };

    // bucket -> monomials in the bucket
    let mut buckets: BTreeMap<(i64, Vec<i64>), Vec<Vec<i64>>> = BTreeMap::new();
    for f in monomials_up_to(&w, hmax) {
        buckets.entry((deg(&f), class(&f))).or_default().push(f);
    }
    // generators x^g d_iW, as (bucket, [(monomial, coeff)])
    let mut gens: BTreeMap<(i64, Vec<i64>), Vec<Vec<(Vec<i64>, i128)>>> = BTreeMap::new();
    for i in 0..n {
        let shift = d - w[i];
        for g in monomials_up_to(&w, hmax - shift) {
            let mut terms = Vec::new();
            for r in 0..n {
                let c = a.get(r, i);
                if c == 0 {
                    continue;
                }
                let mut e = g.clone();
                for j in 0..n {
                    e[j] += a.get(r, j);
                }
                e[i] -= 1;
                terms.push((e, c as i128));
            }
            let key = (deg(&terms[0].0), class(&terms[0].0));
            gens.entry(key).or_default().push(terms);
        }
    }
    let mut basis = Vec::new();
    for (key, mut monos) in buckets {
        // descending lexicographic within a fixed degree
        monos.sort_by(|x, y| y.cmp(x));
        let rows: Vec<Vec<i128>> = gens
            .get(&key)
            .map(|polys| {
                polys
                    .iter()
                    .map(|terms| {
                        let mut row = vec![0i128; monos.len()];
                        for (e, c) in terms {
                            let idx = monos.binary_search_by(|m| e.cmp(m)).expect("same bucket");
                            row[idx] += c;
                        }
                        row
                    })
                    .collect()
            })
            .unwrap_or_default();
        for c in non_pivot_columns(rows, monos.len())? {
            basis.push(monos[c].clone());
        }
    }
    basis.sort_by(|x, y| deg(x).cmp(&deg(y)).then_with(|| x.cmp(y)));
    let mu = milnor_number(a);
    if !mu.is_integer() || mu.to_integer() != basis.len() as i64 {
        return Err(Error::NotIsolated {
            expected: mu.to_integer(),
            found: basis.len() as i64,
        });
    }
    let grading = basis.iter().map(|f| class(f)).collect();
    Ok(MilnorBasis { weights: w, degree: d, basis, grading })
}

/// A `(gamma, lambda)` pair with `delta = 1` and its Hodge bidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorLabel {
    /// `gamma` as an exact vector (coordinates of `gamma A^{-1}` may equal 1).
    pub gamma: GroupElement,
    pub lambda: GroupElement,
    pub delta: u8,
    pub s: Q,
    pub r: Q,
    pub age_lambda: Q,
    pub dual_age_gamma: Q,
}

impl SectorLabel {
    pub fn total_degree(&self) -> Q {
        self.s + self.r
    }

    pub fn dim_lambda(&self) -> usize {
        self.lambda.dim()
    }

    /// `gamma A^{-1}` moved into `[0, 1]^n` by an integer vector of zero sum. Milnor
    /// relations are weighted homogeneous, so the class and `age^v` are unchanged; for
    /// loops the stored monomial can have coordinates outside the box.
    pub fn box_coords(&self) -> Option<Vec<Q>> {
        let raw = self.gamma.fracs();
        let zero = Q::zero();
        let one = Q::from_integer(1);
        if raw.iter().all(|x| *x >= zero && *x <= one) {
            return Some(raw);
        }
        let mut v: Vec<Q> = raw.iter().map(|x| x - x.floor()).collect();
        let need = raw.iter().sum::<Q>() - v.iter().sum::<Q>();
        let fixed: Vec<usize> = (0..v.len()).filter(|&i| raw[i].is_integer() && self.lambda.frac(i).is_zero()).collect();
        if !need.is_integer() || need < zero || need.to_integer() as usize > fixed.len() {
            return None;
        }
        for &i in fixed.iter().take(need.to_integer() as usize) {
            v[i] = one;
        }
        Some(v)
    }

    /// `(-1)^{s+r}`, only meaningful when `s + r` is an integer.
    pub fn sign(&self) -> i32 {
        let t = self.total_degree();
        if t.is_integer() && t.to_integer().is_odd() { -1 } else { 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    pub labels: Vec<SectorLabel>,
    pub warnings: Vec<String>,
}

fn pairs_integrally(a: &BHMatrix, gamma: &GroupElement, g: &SymmetryGroup) -> bool {
    let test: &[GroupElement] = if g.generators.is_empty() { &g.elements } else { &g.generators };
    test.iter().all(|l| BHMatrix::pairing_num(gamma, l) % a.order() == 0)
}

/// All sectors with `delta(gamma, lambda) = 1` for `G < G_A`.
pub fn sector_spectrum(a: &BHMatrix, g: &SymmetryGroup) -> Result<Spectrum> {
    let n = a.n();
    let mut warnings = Vec::new();
    let j_a = a.element(Side::A, &a.j())?;
    let j_at = a.element(Side::AT, &a.j())?;
    if !g.contains(&j_a) || !pairs_integrally(a, &j_at, g) {
        warnings.push(String::from("J is not in G and G^T; fractional ages present"));
    }
    let mut cache: BTreeMap<Vec<usize>, MilnorBasis> = BTreeMap::new();
    let mut labels = Vec::new();
    for lambda in &g.elements {
        let support = lambda.support();
        if !cache.contains_key(&support) {
            cache.insert(support.clone(), milnor_basis(&a.submatrix(&support))?);
        }
        let mb = &cache[&support];
        let age_l = lambda.age();
        let dim_l = lambda.dim() as i64;
        for f in &mb.basis {
            let mut gamma = vec![0i64; n];
            for (k, &i) in support.iter().enumerate() {
                gamma[i] = f[k] + 1;
            }
            let gamma = a.raw_element(Side::AT, &gamma)?;
            if !pairs_integrally(a, &gamma, g) {
                continue;
            }
            let dual_age = gamma.age();
            labels.push(SectorLabel {
                s: age_l + dual_age - Q::from_integer(1),
                r: Q::from_integer(dim_l) + age_l - dual_age - Q::from_integer(1),
                gamma,
                lambda: lambda.clone(),
                delta: 1,
                age_lambda: age_l,
                dual_age_gamma: dual_age,
            });
        }
    }
    labels.sort_by(|x, y| {
        x.total_degree()
            .cmp(&y.total_degree())
            .then(x.s.cmp(&y.s))
            .then_with(|| x.gamma.fracs().cmp(&y.gamma.fracs()))
            .then_with(|| x.lambda.fracs().cmp(&y.lambda.fracs()))
    });
    Ok(Spectrum { labels, warnings })
}

/// `(J A^lambda_0 - gamma, J (A^T)^gamma_0 - lambda)` as an exact gamma vector and a lambda class.
pub fn serre_partner(a: &BHMatrix, label: &SectorLabel) -> (Vec<i64>, GroupElement) {
    let n = a.n();
    let s_l = label.lambda.support();
    let mut gamma = vec![0i64; n];
    for &i in &s_l {
        gamma[i] = s_l.iter().map(|&j| a.get(j, i)).sum::<i64>() - label.gamma.rep[i];
    }
    for i in 0..n {
        if !s_l.contains(&i) {
            gamma[i] = -label.gamma.rep[i];
        }
    }
    let s_g = label.gamma.support();
    let mut lam = vec![0i64; n];
    for i in 0..n {
        let base: i64 = if s_g.contains(&i) { s_g.iter().map(|&j| a.get(i, j)).sum() } else { 0 };
        lam[i] = base - label.lambda.rep[i];
    }
    let lambda = a.element(Side::A, &lam).expect("length n");
    (gamma, lambda)
}

/// Index of the Serre partner of each label, if found.
pub fn serre_pairing(a: &BHMatrix, labels: &[SectorLabel]) -> Vec<Option<usize>> {
    labels
        .iter()
        .map(|l| {
            let (gamma, lambda) = serre_partner(a, l);
            labels
                .iter()
                .position(|m| m.gamma.rep == gamma && m.lambda.num == lambda.num)
                .or_else(|| {
                    let cls = a.element(Side::AT, &gamma).ok()?;
                    labels.iter().position(|m| {
                        m.lambda.num == lambda.num && m.gamma.reduced_num() == cls.num
                    })
                })
        })
        .collect()
}

/// `#{labels with (s, r)}` keyed by the bidegree.
pub fn hodge_numbers(labels: &[SectorLabel]) -> BTreeMap<(Q, Q), usize> {
    let mut m = BTreeMap::new();
    for l in labels {
        *m.entry((l.s, l.r)).or_insert(0) += 1;
    }
    m
}

/// `sum (-1)^{s+r}` over labels with integral total degree.
pub fn euler_characteristic(labels: &[SectorLabel]) -> i64 {
    labels.iter().filter(|l| l.total_degree().is_integer()).map(|l| l.sign() as i64).sum()
}
