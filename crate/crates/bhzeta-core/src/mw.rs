//! Diagonal Monsky–Washnitzer trace for homogeneous Calabi–Yau potentials:
//! S-sums, the subset-sum point count and pairwise cancellation of the
//! residual terms.
//!
//! Diagonal entries of Frobenius factor over the rows of `A`, so with
//! `v = gamma A^{-1}` every entry is `(-p)^{sum frac(v_j)} prod_j a_{(p-1) v_j}`
//! in terms of the one-dimensional Dwork coefficients `a_k`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::{BHMatrix, Side, Q};
use crate::padic::{check_prime, dwork_coeffs, dwork_floor, gamma_p_rational, pow_p, DworkCoefficientStream, PadicNumber};

/// Condition a subset `I` imposes on a monomial `x^gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cone {
    /// `gamma_i > 0` for `i in I`, the support of `R^dagger_I`.
    Monomial,
    /// `(gamma A^{-1})_i > 0` for `i in I`.
    Dual,
}

/// `gamma A^{-1}` as exact rationals.
pub fn dual_coords(a: &BHMatrix, gamma: &[i64]) -> Vec<Q> {
    let d = a.order();
    a.frac_num(Side::AT, gamma).into_iter().map(|x| Q::new(x, d)).collect()
}

/// `v A`, which must be integral.
pub fn from_dual(a: &BHMatrix, v: &[Q]) -> Vec<i64> {
    let n = a.n();
    (0..n)
        .map(|i| {
            let s: Q = (0..n).map(|j| v[j] * a.get(j, i)).sum();
            debug_assert!(s.is_integer());
            s.to_integer()
        })
        .collect()
}

/// A monomial `x^gamma` of the cone together with a subset `I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeMonomial {
    pub gamma: Vec<i64>,
    pub v: Vec<Q>,
    pub subset: Vec<usize>,
}

impl ConeMonomial {
    /// `None` unless `gamma A^{-1} >= 0`, `|gamma A^{-1}|` is integral and
    /// every `i in subset` satisfies the cone condition.
    pub fn new(a: &BHMatrix, gamma: Vec<i64>, subset: Vec<usize>, cone: Cone) -> Option<Self> {
        if gamma.len() != a.n() {
            return None;
        }
        let v = dual_coords(a, &gamma);
        if v.iter().any(|x| *x < Q::zero()) || !v.iter().sum::<Q>().is_integer() {
            return None;
        }
        let ok = subset.iter().all(|&i| {
            i < gamma.len()
                && match cone {
                    Cone::Monomial => gamma[i] > 0,
                    Cone::Dual => v[i] > Q::zero(),
                }
        });
        ok.then_some(ConeMonomial { gamma, v, subset })
    }

    pub fn degree(&self) -> i64 {
        self.v.iter().sum::<Q>().to_integer()
    }
}

/// `W_A` homogeneous of degree `n`.
pub fn check_homogeneous(a: &BHMatrix) -> Result<()> {
    let n = a.n();
    let ok = (0..n).all(|i| (0..n).map(|j| a.get(i, j)).sum::<i64>() == n as i64);
    if ok {
        Ok(())
    } else {
        Err(Error::NotHomogeneous)
    }
}

/// Every omitted `a_k`, `k >= (p-1)(M+1)`, has `v_p >= N`.
pub fn tail_certified(p: u64, n: u32, m: u32) -> bool {
    let base = (p - 1) * (m as u64 + 1);
    (0..p - 1).all(|r| dwork_floor(base + r, p) >= n as i64)
}

/// Smallest certified `M >= N + 2`.
pub fn certified_truncation(p: u64, n: u32) -> u32 {
    let mut m = n + 2;
    while !tail_certified(p, n, m) {
        m += 1;
    }
    m
}

fn signed_p_power(x: &PadicNumber, e: u32) -> PadicNumber {
    let y = x.shift(e);
    if e % 2 == 1 {
        y.neg()
    } else {
        y
    }
}

/// One-dimensional Dwork series behind all S-sums, to `precision` digits.
#[derive(Clone, Debug)]
pub struct DworkSums {
    pub prime: u64,
    pub precision: u32,
    pub truncation: u32,
    stream: DworkCoefficientStream,
}

impl DworkSums {
    /// `truncation = None` picks [`certified_truncation`].
    pub fn new(p: u64, n: u32, truncation: Option<u32>) -> Result<Self> {
        check_prime(p)?;
        let m = truncation.unwrap_or_else(|| certified_truncation(p, n));
        if !tail_certified(p, n, m) {
            return Err(Error::PrecisionExhausted {
                context: format!("truncation M = {} leaves terms above p^{}", m, n),
            });
        }
        let stream = dwork_coeffs(p, n, (p - 1) * (m as u64 + 2))?;
        Ok(DworkSums { prime: p, precision: n, truncation: m, stream })
    }

    fn index(&self, v: &Q) -> Result<u64> {
        let s = v * (self.prime as i64 - 1);
        if !s.is_integer() || s < Q::zero() {
            return Err(Error::DenominatorMismatch { num: *v.numer(), den: *v.denom(), pm1: self.prime - 1 });
        }
        let k = s.to_integer() as u64;
        if k > self.stream.k_max() {
            return Err(Error::PrecisionExhausted { context: format!("a_{} beyond the stream", k) });
        }
        Ok(k)
    }

    /// `a_{(p-1)v}`.
    pub fn coefficient(&self, v: &Q) -> Result<PadicNumber> {
        Ok(self.stream.values[self.index(v)? as usize].truncate(self.precision))
    }

    /// `sum_{m=0}^{M} a_{(p-1)(v+m)}` for `0 <= v <= 1`.
    pub fn series(&self, v: &Q) -> Result<PadicNumber> {
        let k0 = self.index(v)?;
        let step = self.prime - 1;
        let mut acc = PadicNumber::zero(self.prime, self.precision);
        for m in 0..=self.truncation as u64 {
            let k = k0 + m * step;
            if k > self.stream.k_max() {
                return Err(Error::PrecisionExhausted { context: format!("a_{} beyond the stream", k) });
            }
            acc = acc.add(&self.stream.values[k as usize]);
        }
        Ok(acc.truncate(self.precision))
    }

    /// `S^delta(v)`: series in the coordinates of `delta`, single coefficients elsewhere.
    pub fn s_partial(&self, v: &[Q], delta: &[usize]) -> Result<PadicNumber> {
        let mut frac = Q::zero();
        let mut acc = PadicNumber::one(self.prime, self.precision);
        for (j, x) in v.iter().enumerate() {
            frac += x.fract();
            let f = if delta.contains(&j) { self.series(x)? } else { self.coefficient(x)? };
            acc = acc.mul(&f);
        }
        if !frac.is_integer() {
            return Err(Error::NonIntegralDegree(format!("{}", v.iter().sum::<Q>())));
        }
        Ok(signed_p_power(&acc, frac.to_integer() as u32).truncate(self.precision))
    }

    pub fn s_sum(&self, v: &[Q]) -> Result<PadicNumber> {
        let all: Vec<usize> = (0..v.len()).collect();
        self.s_partial(v, &all)
    }

    /// Both sides of `(p-1) sum_m a_{(p-1)(x+m)} = -(-p)^{floor x} Gamma_p(x)`
    /// at `x = m/(p-1)`, the right side by Morita's product.
    pub fn lemma_sides(&self, m: u64) -> Result<(PadicNumber, PadicNumber)> {
        let p = self.prime;
        let x = Q::new(m as i64, p as i64 - 1);
        let lhs = self.series(&x)?.mul_int(p as i64 - 1);
        let g = gamma_p_rational(&x, p, self.precision)?;
        let rhs = signed_p_power(&g, x.floor().to_integer() as u32).neg().truncate(self.precision);
        Ok((lhs, rhs))
    }
}

/// A box-representative S-sum.
#[derive(Clone, Debug)]
pub struct SSum {
    pub gamma: Vec<i64>,
    pub v: Vec<Q>,
    pub value: PadicNumber,
    pub truncation: u32,
}

fn box_coords(a: &BHMatrix, gamma: &[i64]) -> Result<Vec<Q>> {
    if gamma.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: gamma.len() });
    }
    let v = dual_coords(a, gamma);
    if let Some(x) = v.iter().find(|x| **x < Q::zero() || **x > Q::one()) {
        return Err(Error::OutsideBox(format!("{}", x)));
    }
    Ok(v)
}

/// `S(gamma)` for `0 <= gamma A^{-1} <= 1`, truncated at `M`.
pub fn s_sum(a: &BHMatrix, gamma: &[i64], p: u64, n: u32, m: Option<u32>) -> Result<SSum> {
    let v = box_coords(a, gamma)?;
    let sums = DworkSums::new(p, n, m)?;
    let value = sums.s_sum(&v)?;
    Ok(SSum { gamma: gamma.to_vec(), v, value, truncation: sums.truncation })
}

/// `S^delta(gamma)`.
pub fn s_partial(a: &BHMatrix, gamma: &[i64], delta: &[usize], p: u64, n: u32, m: Option<u32>) -> Result<PadicNumber> {
    let v = box_coords(a, gamma)?;
    DworkSums::new(p, n, m)?.s_partial(&v, delta)
}

/// A coset of `Z^n A^{-1}` mod `Z^n` with a set of coordinates frozen at zero.
/// Coordinates in `forced` must be positive for the frozen ones to carry `gamma_i > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Shape {
    fracs: Vec<Q>,
    frozen: Vec<usize>,
    forced: Vec<usize>,
}

impl Shape {
    fn interior(&self) -> bool {
        self.fracs.iter().all(|x| !x.is_zero())
    }

    fn pivot(&self) -> Option<usize> {
        (0..self.fracs.len())
            .find(|j| self.fracs[*j].is_zero() && !self.frozen.contains(j) && !self.forced.contains(j))
    }

    /// Box representative for the subset `I`.
    fn representative(&self, subset: &[usize]) -> Vec<Q> {
        (0..self.fracs.len())
            .map(|j| {
                if !self.fracs[j].is_zero() {
                    self.fracs[j]
                } else if (subset.contains(&j) && !self.frozen.contains(&j)) || self.forced.contains(&j) {
                    Q::one()
                } else {
                    Q::zero()
                }
            })
            .collect()
    }

    fn subsets(&self) -> Vec<Vec<usize>> {
        let n = self.fracs.len();
        (0u32..1 << n)
            .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
            .filter(|s: &Vec<usize>| self.frozen.iter().all(|z| s.contains(z)))
            .collect()
    }
}

fn forced_coords(a: &BHMatrix, frozen: &[usize]) -> Result<Option<Vec<usize>>> {
    let n = a.n();
    let mut forced = BTreeSet::new();
    for &i in frozen {
        let cands: Vec<usize> = (0..n).filter(|&j| j != i && a.get(j, i) > 0).collect();
        match cands.as_slice() {
            [] => return Ok(None),
            [j] if frozen.contains(j) => return Ok(None),
            [j] => {
                forced.insert(*j);
            }
            _ => {
                return Err(Error::UnpairedTerm {
                    detail: format!("column {} has {} off-diagonal entries", i + 1, cands.len()),
                })
            }
        }
    }
    Ok(Some(forced.into_iter().collect()))
}

fn shapes(a: &BHMatrix, cone: Cone) -> Result<Vec<Shape>> {
    let n = a.n();
    let mut out = Vec::new();
    for g in a.enumerate_group(Side::AT) {
        let fracs = g.fracs();
        if !fracs.iter().sum::<Q>().is_integer() {
            continue;
        }
        let zeros: Vec<usize> = (0..n).filter(|&i| fracs[i].is_zero()).collect();
        let masks = if cone == Cone::Dual { 1u32 } else { 1u32 << zeros.len() };
        for mask in 0..masks {
            let frozen: Vec<usize> =
                zeros.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i).collect();
            if let Some(forced) = forced_coords(a, &frozen)? {
                out.push(Shape { fracs: fracs.clone(), frozen, forced });
            }
        }
    }
    Ok(out)
}

/// One summand `(-p)^{|complement of I|} S^delta(gamma)` with `delta` the unfrozen coordinates.
#[derive(Clone, Debug)]
pub struct TraceTerm {
    pub subset: Vec<usize>,
    pub frozen: Vec<usize>,
    pub gamma: Vec<i64>,
    pub v: Vec<Q>,
    pub weight: u32,
    pub value: PadicNumber,
    /// Agreement with `(-1)^|delta| (-p)^{weight + |v|} Gamma_p(v) / (p-1)^|delta|`.
    pub gamma_form: bool,
}

impl TraceTerm {
    pub fn degree(&self) -> i64 {
        self.v.iter().sum::<Q>().to_integer()
    }

    /// The table entry, e.g. `(-p)^4 (-p)^1 Gamma_p(1/4, 3/4, 0, 0)`.
    pub fn label(&self) -> String {
        let v = join(self.v.iter().map(|x| format!("{}", x)));
        if self.frozen.is_empty() {
            format!("(-p)^{} (-p)^{} Gamma_p({})", self.weight, self.degree(), v)
        } else {
            let n = self.v.len();
            let delta = join((0..n).filter(|j| !self.frozen.contains(j)).map(|j| format!("{}", j + 1)));
            format!("(-p)^{} S^{{{}}}({})", self.weight, delta, v)
        }
    }
}

fn join(it: impl Iterator<Item = String>) -> String {
    it.collect::<Vec<_>>().join(", ")
}

fn subset_label(s: &[usize]) -> String {
    if s.is_empty() {
        String::from("{}")
    } else {
        format!("{{{}}}", join(s.iter().map(|i| format!("{}", i + 1))))
    }
}

fn evaluate(a: &BHMatrix, sums: &DworkSums, shape: &Shape, subset: &[usize]) -> Result<TraceTerm> {
    let n = a.n();
    let p = sums.prime;
    let v = shape.representative(subset);
    let delta: Vec<usize> = (0..n).filter(|j| !shape.frozen.contains(j)).collect();
    let weight = (n - subset.len()) as u32;
    let s = sums.s_partial(&v, &delta)?;
    let value = signed_p_power(&s, weight);
    let degree = v.iter().sum::<Q>().to_integer() as u32;
    let mut g = PadicNumber::one(p, sums.precision);
    for j in &delta {
        g = g.mul(&gamma_p_rational(&v[*j], p, sums.precision)?);
    }
    let mut closed = signed_p_power(&g, weight + degree);
    if delta.len() % 2 == 1 {
        closed = closed.neg();
    }
    let scaled = value.mul(&PadicNumber::from_i64(p, sums.precision + weight, p as i64 - 1).pow(delta.len() as u64));
    Ok(TraceTerm {
        subset: subset.to_vec(),
        frozen: shape.frozen.clone(),
        gamma: from_dual(a, &v),
        v,
        weight,
        value,
        gamma_form: scaled.congruent(&closed),
    })
}

fn prepare(a: &BHMatrix, p: u64, n: u32) -> Result<DworkSums> {
    check_prime(p)?;
    check_homogeneous(a)?;
    let pm1 = p as i64 - 1;
    for g in a.enumerate_group(Side::AT) {
        if let Some(x) = g.fracs().into_iter().find(|x| pm1 % x.denom() != 0) {
            return Err(Error::DenominatorMismatch { num: *x.numer(), den: *x.denom(), pm1: p - 1 });
        }
    }
    DworkSums::new(p, n + 1, None)
}

fn vertical(p: u64, n: usize) -> BigUint {
    (pow_p(p, n as u32 - 1) - 1u32) / BigUint::from(p - 1)
}

/// `N_MW` split into its parts.
#[derive(Clone, Debug)]
pub struct MwCount {
    pub prime: u64,
    pub precision: u32,
    pub cone: Cone,
    pub truncation: u32,
    /// `(p^{n-1} - 1)/(p - 1)`.
    pub vertical: BigUint,
    /// Classes without a coordinate in `{0, 1}`, scaled by `(-1)^n / p`.
    pub interior: Option<PadicNumber>,
    /// The remaining terms `Z`, scaled by `(-1)^n / p`.
    pub residual: Option<PadicNumber>,
    pub value: PadicNumber,
    /// The count itself when `p^N` exceeds the number of points of `P^{n-1}`.
    pub lift: Option<BigUint>,
}

pub fn mw_point_count(a: &BHMatrix, p: u64, n: u32) -> Result<MwCount> {
    mw_point_count_with(a, p, n, Cone::Monomial)
}

pub fn mw_point_count_with(a: &BHMatrix, p: u64, n: u32, cone: Cone) -> Result<MwCount> {
    let sums = prepare(a, p, n)?;
    let dim = a.n();
    let mut inner = PadicNumber::zero(p, n + 1);
    let mut resid = PadicNumber::zero(p, n + 1);
    for shape in shapes(a, cone)? {
        for subset in shape.subsets() {
            let v = shape.representative(&subset);
            let delta: Vec<usize> = (0..dim).filter(|j| !shape.frozen.contains(j)).collect();
            let t = signed_p_power(&sums.s_partial(&v, &delta)?, (dim - subset.len()) as u32);
            if shape.interior() {
                inner = inner.add(&t);
            } else {
                resid = resid.add(&t);
            }
        }
    }
    let scale = |x: &PadicNumber| -> Result<PadicNumber> {
        let y = x.truncate(n + 1).unshift(1)?;
        Ok(if dim % 2 == 1 { y.neg() } else { y })
    };
    let vert = vertical(p, dim);
    let value = scale(&inner.add(&resid))?.add(&PadicNumber::new(p, n, vert.clone()));
    let ambient = (pow_p(p, dim as u32) - 1u32) / BigUint::from(p - 1);
    let lift = (pow_p(p, n) > ambient).then(|| value.residue.clone());
    Ok(MwCount {
        prime: p,
        precision: n,
        cone,
        truncation: sums.truncation,
        vertical: vert,
        interior: scale(&inner).ok(),
        residual: scale(&resid).ok(),
        value,
        lift,
    })
}

#[derive(Clone, Debug)]
pub struct CancellationPair {
    pub left: TraceTerm,
    pub right: TraceTerm,
    pub vanishes: bool,
}

/// Residual terms of one class, paired through `(I, I + {pivot})`.
#[derive(Clone, Debug)]
pub struct CancellationClass {
    pub fracs: Vec<Q>,
    pub frozen: Vec<usize>,
    pub pivot: usize,
    pub pairs: Vec<CancellationPair>,
}

impl CancellationClass {
    /// `(1/4, 3/4, *, *)`, with `*` for coordinates in `{0, 1}`.
    pub fn pattern(&self) -> String {
        format!(
            "({})",
            join(self.fracs.iter().map(|x| if x.is_zero() { String::from("*") } else { format!("{}", x) }))
        )
    }
}

#[derive(Clone, Debug)]
pub struct CancellationReport {
    pub prime: u64,
    pub precision: u32,
    pub interior_classes: usize,
    pub classes: Vec<CancellationClass>,
    /// `sum_alpha sum_I (-p)^{|complement of I|} S`, before the factor `(-1)^n / p`.
    pub residual: PadicNumber,
}

impl CancellationReport {
    pub fn all_vanish(&self) -> bool {
        self.residual.is_zero() && self.classes.iter().all(|c| c.pairs.iter().all(|q| q.vanishes))
    }

    pub fn pair_count(&self) -> usize {
        self.classes.iter().map(|c| c.pairs.len()).sum()
    }

    /// Classes whose pattern matches up to the order of coordinates.
    pub fn find(&self, fracs: &[Q], frozen: &[usize]) -> Option<&CancellationClass> {
        self.classes.iter().find(|c| c.fracs == fracs && c.frozen == frozen)
    }

    /// Tables with columns `I`, `|complement of I|`, `|gamma A^{-1}|`, term, for both sides of each pair.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.classes {
            let _ = write!(out, "class {} pivot {}", c.pattern(), c.pivot + 1);
            if !c.frozen.is_empty() {
                let _ = write!(out, " frozen {}", subset_label(&c.frozen));
            }
            out.push('\n');
            for q in &c.pairs {
                let side = |t: &TraceTerm| {
                    format!("{} | {} | {} | {}", subset_label(&t.subset), t.weight, t.degree(), t.label())
                };
                let mark = if q.vanishes { "ok" } else { "FAIL" };
                let _ = writeln!(out, "  {} || {} || {}", side(&q.left), side(&q.right), mark);
            }
        }
        let _ = writeln!(out, "residual zero: {}", self.residual.is_zero());
        out
    }
}

/// Pairs every residual trace term against its partner in the same class.
pub fn cancellation_report(a: &BHMatrix, p: u64, n: u32) -> Result<CancellationReport> {
    let sums = prepare(a, p, n)?;
    let mut classes = Vec::new();
    let mut interior_classes = 0;
    let mut residual = PadicNumber::zero(p, n + 1);
    for shape in shapes(a, Cone::Monomial)? {
        if shape.interior() {
            interior_classes += 1;
            continue;
        }
        let pivot = shape.pivot().ok_or_else(|| Error::UnpairedTerm {
            detail: format!("class {:?} frozen {:?} has no pivot", shape.fracs, shape.frozen),
        })?;
        let mut pairs = Vec::new();
        for subset in shape.subsets().into_iter().filter(|s| !s.contains(&pivot)) {
            let mut partner = subset.clone();
            partner.push(pivot);
            partner.sort_unstable();
            let left = evaluate(a, &sums, &shape, &subset)?;
            let right = evaluate(a, &sums, &shape, &partner)?;
            let sum = left.value.add(&right.value);
            residual = residual.add(&sum);
            pairs.push(CancellationPair { vanishes: sum.is_zero(), left, right });
        }
        classes.push(CancellationClass { fracs: shape.fracs, frozen: shape.frozen, pivot, pairs });
    }
    Ok(CancellationReport { prime: p, precision: n, interior_classes, classes, residual })
}

/// `(p^{n-1} - 1)/(p - 1) + (p-1)^n/p * sum S(gamma)` over interior classes,
/// i.e. the count with every residual term dropped.
pub fn interior_count(a: &BHMatrix, p: u64, n: u32) -> Result<PadicNumber> {
    let c = mw_point_count_with(a, p, n, Cone::Dual)?;
    let inner = c.interior.ok_or_else(|| Error::PrecisionExhausted { context: String::from("interior part not divisible by p") })?;
    Ok(inner.add(&PadicNumber::new(p, n, c.vertical)))
}
