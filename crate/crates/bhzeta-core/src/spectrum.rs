//! Twisted Frobenius eigenvalues, supertraces and the assembled zeta function.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::charsum::{eigenvalue_exact, norm_check, CharacterTable, CyclotomicInt};
use crate::error::{Error, Result};
use crate::matrix::{BHMatrix, SymmetryGroup, Q};
use crate::milnor::{sector_spectrum, serre_pairing, SectorLabel};
use crate::padic::{check_prime, gamma_p_rational, pow_p, GammaTable, PadicNumber};

pub type Poly = Vec<BigInt>;

#[derive(Clone, Debug)]
pub struct EigenvalueRecord {
    pub label: SectorLabel,
    /// `gamma A^{-1}` of the stored representative.
    pub frac: Vec<Q>,
    /// `None` for sectors of fractional age, which are withheld.
    pub alpha_padic: Option<PadicNumber>,
    pub alpha_exact: Option<CyclotomicInt>,
    pub sign: i32,
}

impl EigenvalueRecord {
    /// `s + r` when integral.
    pub fn degree(&self) -> Option<u32> {
        let t = self.label.total_degree();
        (t.is_integer() && self.alpha_padic.is_some()).then(|| t.to_integer() as u32)
    }

    /// `v_p(alpha) = age(lambda) - 1 + age^v(gamma)`.
    pub fn valuation(&self) -> Option<i64> {
        let e = self.label.age_lambda + self.label.dual_age_gamma - Q::from_integer(1);
        e.is_integer().then(|| e.to_integer())
    }
}

fn gamma_of(v: &[Q], p: u64, n: u32, table: Option<&GammaTable>) -> Result<PadicNumber> {
    match table {
        Some(t) => t.gamma_vector(v),
        None => v.iter().try_fold(PadicNumber::one(p, n), |acc, x| Ok(acc.mul(&gamma_p_rational(x, p, n)?))),
    }
}

/// `alpha = p^{age(lambda)-1} (-p)^{age^v(gamma)} Gamma_p(gamma A^{-1})` for each label.
/// `table` must be built for the same `p` and `N`; without one, `Gamma_p` is evaluated
/// through the block product, which also covers `det A` not dividing `p - 1`.
pub fn eigenvalues_for(labels: &[SectorLabel], p: u64, n: u32, table: Option<&GammaTable>) -> Result<Vec<EigenvalueRecord>> {
    check_prime(p)?;
    labels
        .iter()
        .map(|l| {
            let frac = l.box_coords().ok_or_else(|| Error::NoBoxRepresentative(format!("{:?}", l.gamma.fracs())))?;
            let alpha = if l.age_lambda.is_integer() && l.dual_age_gamma.is_integer() {
                let e = (l.age_lambda + l.dual_age_gamma).to_integer() - 1;
                if e < 0 {
                    return Err(Error::PrecisionExhausted { context: format!("negative p-power for {:?}", frac) });
                }
                let mut a = gamma_of(&frac, p, n, table)?.shift(e as u32).truncate(n);
                if l.dual_age_gamma.to_integer() % 2 != 0 {
                    a = a.neg();
                }
                Some(a)
            } else {
                None
            };
            Ok(EigenvalueRecord { label: l.clone(), frac, alpha_padic: alpha, alpha_exact: None, sign: l.sign() })
        })
        .collect()
}

pub fn eigenvalues(a: &BHMatrix, g: &SymmetryGroup, p: u64, n: u32) -> Result<Vec<EigenvalueRecord>> {
    check_prime(p)?;
    let spec = sector_spectrum(a, g)?;
    let table = if (p - 1) % a.order() as u64 == 0 { Some(GammaTable::build(p, n)?) } else { None };
    eigenvalues_for(&spec.labels, p, n, table.as_ref())
}

/// Fills `alpha_exact` from Gauss sums.
pub fn attach_exact(records: &mut [EigenvalueRecord], table: &CharacterTable) -> Result<()> {
    for r in records.iter_mut() {
        if r.alpha_padic.is_some() {
            r.alpha_exact = eigenvalue_exact(&r.label, table)?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Supertrace {
    pub nu: u32,
    pub value: PadicNumber,
    /// Centered lift mod `p^N`.
    pub lift: BigInt,
    /// The lift mod `p^{N-2}` agrees with the lift mod `p^N`.
    pub rational: bool,
    /// Records without an eigenvalue (fractional age).
    pub withheld: usize,
}

/// `sum_i (-1)^{s_i+r_i} alpha_i^nu`.
pub fn supertrace(records: &[EigenvalueRecord], nu: u32) -> Option<Supertrace> {
    let first = records.iter().find_map(|r| r.alpha_padic.as_ref())?;
    let (p, n) = (first.prime, records.iter().filter_map(|r| r.alpha_padic.as_ref()).map(|a| a.precision).min()?);
    let mut acc = PadicNumber::zero(p, n);
    let mut withheld = 0;
    for r in records {
        match &r.alpha_padic {
            Some(a) => {
                let t = a.pow(nu as u64).truncate(n);
                acc = if r.sign < 0 { acc.sub(&t) } else { acc.add(&t) };
            }
            None => withheld += 1,
        }
    }
    let value = acc.truncate(n);
    let lift = value.centered();
    let rational = n > 2 && value.truncate(n - 2).centered() == lift;
    Some(Supertrace { nu, value, lift, rational, withheld })
}

/// `ceil(log_p(2 B)) + 1`: digits needed to certify an integer of absolute value at most `B`.
pub fn digits_for_bound(bound: &BigUint, p: u64) -> u32 {
    let target = bound * 2u32;
    let mut n = 0;
    let mut pw = BigUint::one();
    while pw <= target {
        pw *= p;
        n += 1;
    }
    n + 1
}

/// `ceil(p^{e/2})`.
fn half_power(p: u64, e: u64) -> BigUint {
    let full = pow_p(p, (e / 2) as u32);
    if e % 2 == 0 {
        full
    } else {
        let s = BigUint::from(p).sqrt() + 1u32;
        full * s
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// `|c_j| <= C(d, j) q^{kj/2}`, `q = p^nu`.
pub fn weil_bounds(d: usize, k: u32, p: u64, nu: u32) -> Vec<BigUint> {
    (0..=d as u64).map(|j| binomial(d as u64, j) * half_power(p, nu as u64 * k as u64 * j)).collect()
}

/// Supertrace digits needed: `|ST| <= sum q^{k/2}` plus two guard digits.
pub fn supertrace_precision(labels: &[SectorLabel], p: u64, nu: u32) -> u32 {
    let bound: BigUint = labels
        .iter()
        .filter(|l| l.total_degree().is_integer())
        .map(|l| half_power(p, nu as u64 * l.total_degree().to_integer() as u64))
        .sum();
    digits_for_bound(&bound, p) + 2
}

/// `conj_u`: fractional coordinates go to `<u v_i>`, integral ones stay.
fn conj(v: &[Q], u: i64) -> Vec<Q> {
    v.iter().map(|x| if x.is_integer() { *x } else { (x * u).fract() }).collect()
}

fn frac_order(v: &[Q]) -> i64 {
    v.iter().filter(|x| !x.is_integer()).fold(1i64, |e, x| e.lcm(x.denom()))
}

type OrbitKey = (Q, Vec<Q>);

/// Galois orbits among keys of one degree, or `None` if some orbit is incomplete.
fn galois_orbits(keys: &[&OrbitKey]) -> Option<Vec<Vec<usize>>> {
    let mut pool: BTreeMap<&OrbitKey, Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate().rev() {
        pool.entry(*k).or_default().push(i);
    }
    let mut orbits = Vec::new();
    for (age, frac) in keys.iter().copied() {
        if pool.get(&(*age, frac.clone())).is_none_or(|v| v.is_empty()) {
            continue;
        }
        let e = frac_order(frac);
        let mut images: Vec<Vec<Q>> = (1..=e).filter(|u| u.gcd(&e) == 1).map(|u| conj(frac, u)).collect();
        images.sort();
        images.dedup();
        let mut orbit = Vec::new();
        for v in images {
            orbit.push(pool.get_mut(&(*age, v))?.pop()?);
        }
        orbits.push(orbit);
    }
    Some(orbits)
}

/// `(degree, age(lambda), gamma A^{-1})` for a sector with an eigenvalue.
fn orbit_key(l: &SectorLabel) -> Option<(u32, OrbitKey)> {
    let integral = l.age_lambda.is_integer() && l.dual_age_gamma.is_integer();
    integral.then(|| (l.total_degree().to_integer() as u32, (l.age_lambda, l.gamma.fracs())))
}

/// Sectors grouped by degree, each degree split into the factors that are
/// reconstructed separately: Galois orbits, or the whole degree as a fallback.
pub fn factor_plan(labels: &[SectorLabel]) -> BTreeMap<u32, Vec<Vec<usize>>> {
    let mut by_k: BTreeMap<u32, Vec<(usize, OrbitKey)>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        if let Some((k, key)) = orbit_key(l) {
            by_k.entry(k).or_default().push((i, key));
        }
    }
    by_k.into_iter()
        .map(|(k, items)| {
            let keys: Vec<&OrbitKey> = items.iter().map(|(_, key)| key).collect();
            let groups = match galois_orbits(&keys) {
                Some(orbits) => orbits.into_iter().map(|o| o.into_iter().map(|j| items[j].0).collect()).collect(),
                None => vec![items.iter().map(|(i, _)| *i).collect()],
            };
            (k, groups)
        })
        .collect()
}

/// Digits needed to reconstruct every factor over `F_{p^nu}`.
pub fn zeta_precision(labels: &[SectorLabel], p: u64, nu: u32) -> u32 {
    factor_plan(labels)
        .iter()
        .flat_map(|(k, groups)| groups.iter().map(move |g| (*k, g.len())))
        .map(|(k, d)| {
            let b = weil_bounds(d, k, p, nu).into_iter().max().unwrap();
            digits_for_bound(&b, p)
        })
        .max()
        .unwrap_or(1)
}

/// Precision for the zeta function over `F_{p^nu}` for `nu <= nu_max` and
/// for rationality-flagged supertraces.
pub fn auto_precision(labels: &[SectorLabel], p: u64, nu_max: u32) -> u32 {
    (1..=nu_max.max(1))
        .map(|nu| zeta_precision(labels, p, nu).max(supertrace_precision(labels, p, nu)))
        .max()
        .unwrap()
}

/// `zeta(t) = prod_k P_k(t)^{(-1)^{k+1}}` over `F_{p^nu}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZetaFunction {
    pub prime: u64,
    pub nu: u32,
    pub precision: u32,
    pub factors: BTreeMap<u32, Poly>,
    /// The separately reconstructed pieces of each `P_k`.
    pub orbit_factors: BTreeMap<u32, Vec<Poly>>,
    pub chi: i64,
    pub withheld: usize,
}

pub fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Poly {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_from_i64(c: &[i64]) -> Poly {
    c.iter().map(|&x| BigInt::from(x)).collect()
}

/// `prod (1 - alpha t)` in p-adic arithmetic.
fn padic_char_poly(alphas: &[PadicNumber], p: u64, n: u32) -> Vec<PadicNumber> {
    let mut out = vec![PadicNumber::one(p, n)];
    for a in alphas {
        let mut next = vec![PadicNumber::zero(p, n); out.len() + 1];
        for (j, c) in out.iter().enumerate() {
            next[j] = next[j].add(c);
            next[j + 1] = next[j + 1].sub(&c.mul(a).truncate(n));
        }
        out = next;
    }
    out
}

pub fn zeta(records: &[EigenvalueRecord], nu: u32) -> Result<ZetaFunction> {
    let first = records.iter().find_map(|r| r.alpha_padic.as_ref()).ok_or(Error::InsufficientPrecision { needed: 1, have: 0 })?;
    let p = first.prime;
    let have = records.iter().filter_map(|r| r.alpha_padic.as_ref()).map(|a| a.precision).min().unwrap();
    let labels: Vec<SectorLabel> = records.iter().map(|r| r.label.clone()).collect();
    let needed = zeta_precision(&labels, p, nu);
    if needed > have {
        return Err(Error::InsufficientPrecision { needed, have });
    }
    let modulus = BigInt::from(pow_p(p, have));
    let mut factors = BTreeMap::new();
    let mut orbit_factors = BTreeMap::new();
    for (k, groups) in factor_plan(&labels) {
        let mut full = vec![BigInt::one()];
        let mut pieces = Vec::new();
        for g in groups {
            let alphas: Vec<PadicNumber> =
                g.iter().map(|&i| records[i].alpha_padic.as_ref().unwrap().pow(nu as u64).truncate(have)).collect();
            let bounds = weil_bounds(alphas.len(), k, p, nu);
            let poly: Poly = padic_char_poly(&alphas, p, have).iter().map(|c| c.truncate(have).centered()).collect();
            for (c, b) in poly.iter().zip(&bounds) {
                if c.magnitude() > b || c.magnitude() * 2u32 >= *modulus.magnitude() {
                    return Err(Error::ReconstructionFailed { k });
                }
            }
            full = poly_mul(&full, &poly);
            pieces.push(poly);
        }
        factors.insert(k, full);
        orbit_factors.insert(k, pieces);
    }
    let chi = factors.iter().map(|(k, f)| if k % 2 == 0 { 1 } else { -1 } * (f.len() as i64 - 1)).sum();
    let withheld = records.iter().filter(|r| r.alpha_padic.is_none()).count();
    Ok(ZetaFunction { prime: p, nu, precision: have, factors, orbit_factors, chi, withheld })
}

/// Power sums `s_1..s_m` of the inverse roots of `P(t) = prod (1 - alpha t)`.
pub fn power_sums(poly: &[BigInt], m: usize) -> Vec<BigInt> {
    let c = |i: usize| poly.get(i).cloned().unwrap_or_default();
    let mut s: Vec<BigInt> = Vec::with_capacity(m);
    for j in 1..=m {
        let mut v = -(c(j) * BigInt::from(j));
        for i in 1..j {
            v -= c(i) * &s[j - i - 1];
        }
        s.push(v);
    }
    s
}

impl ZetaFunction {
    /// `#X(F_{q^j})`, `j = 1..=m`, with `q = p^nu`.
    pub fn point_counts(&self, m: usize) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); m];
        for (k, f) in &self.factors {
            for (j, s) in power_sums(f, m).into_iter().enumerate() {
                if k % 2 == 0 {
                    out[j] += s;
                } else {
                    out[j] -= s;
                }
            }
        }
        out
    }

    pub fn numerator(&self) -> Poly {
        self.factors.iter().filter(|(k, _)| *k % 2 == 1).fold(vec![BigInt::one()], |acc, (_, f)| poly_mul(&acc, f))
    }

    pub fn denominator(&self) -> Poly {
        self.factors.iter().filter(|(k, _)| *k % 2 == 0).fold(vec![BigInt::one()], |acc, (_, f)| poly_mul(&acc, f))
    }

    /// Checks `zeta(1/(Q t)) = C (Q t)^chi zeta(t)` with `Q = q^w` and `C^2 Q^chi = 1`;
    /// returns the sign of `C Q^{chi/2}`.
    pub fn functional_equation(&self, w: u32) -> Option<i32> {
        let qq = BigInt::from(pow_p(self.prime, self.nu * w));
        let (num, den) = (self.numerator(), self.denominator());
        let twist = |f: &Poly| -> Poly {
            let d = f.len() - 1;
            let mut out = vec![BigInt::zero(); d + 1];
            for (i, c) in f.iter().enumerate() {
                out[d - i] = c * qq.pow((d - i) as u32);
            }
            out
        };
        let (nt, dt) = (twist(&num), twist(&den));
        let (ntop, dtop) = (num.last().unwrap().clone(), den.last().unwrap().clone());
        let lhs: Poly = poly_mul(&nt, &den).into_iter().map(|c| c * &dtop).collect();
        let rhs: Poly = poly_mul(&num, &dt).into_iter().map(|c| c * &ntop).collect();
        if lhs != rhs {
            return None;
        }
        // C = ntop / dtop, C^2 Q^chi = 1
        let chi = self.chi;
        let (a, b) = if chi >= 0 {
            (&ntop * &ntop * qq.pow(chi as u32), &dtop * &dtop)
        } else {
            (&ntop * &ntop, &dtop * &dtop * qq.pow((-chi) as u32))
        };
        if a != b {
            return None;
        }
        // sign of C
        Some(if (ntop.is_negative()) == (dtop.is_negative()) { 1 } else { -1 })
    }

    /// `P_k` with the factors `(1 - e p^{k/2} t)`, `e = +-1`, of rational eigenvalues split off.
    pub fn peeled(&self, k: u32, records: &[EigenvalueRecord]) -> Vec<(Poly, usize)> {
        let mut rest = self.factors.get(&k).cloned().unwrap_or_else(|| vec![BigInt::one()]);
        let mut out = Vec::new();
        if k % 2 == 0 {
            let root = BigInt::from(pow_p(self.prime, self.nu * k / 2));
            for sgn in [1i32, -1] {
                let target = if sgn > 0 { root.clone() } else { -root.clone() };
                let count = records
                    .iter()
                    .filter(|r| r.degree() == Some(k))
                    .filter(|r| {
                        let a = r.alpha_padic.as_ref().unwrap().pow(self.nu as u64);
                        a.congruent(&PadicNumber::from_bigint(a.prime, a.precision, &target))
                    })
                    .count();
                if count > 0 {
                    let lin = vec![BigInt::one(), -target.clone()];
                    for _ in 0..count {
                        rest = poly_divexact(&rest, &lin);
                    }
                    out.push((lin, count));
                }
            }
        }
        if rest.len() > 1 {
            out.push((rest, 1));
        }
        out
    }
}

/// Exact quotient of integer polynomials with unit leading constant term.
pub fn poly_divexact(a: &[BigInt], b: &[BigInt]) -> Poly {
    // divide from the constant term; b[0] = 1
    let n = a.len() - (b.len() - 1);
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); n];
    for i in 0..n {
        let c = &r[i] / &b[0];
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= &c * bj;
        }
        q[i] = c;
    }
    q
}

#[derive(Clone, Debug)]
pub struct WeilReport {
    /// Every record has a Serre partner.
    pub pairing_complete: bool,
    /// Pairs with `alpha alpha' != p^{n-2}` or valuations not summing to `n - 2`.
    pub pairing_violations: Vec<String>,
    pub chi_records: i64,
    pub chi_zeta: i64,
    /// Sign of the functional equation, `None` if it fails.
    pub functional_equation: Option<i32>,
    /// `#{(s, r)} = #{(r, s)}`.
    pub hodge_symmetric: bool,
    /// `|alpha| = p^{(s+r)/2}` on every exact eigenvalue, if any ran.
    pub riemann: Option<bool>,
}

impl WeilReport {
    pub fn ok(&self) -> bool {
        self.pairing_complete
            && self.pairing_violations.is_empty()
            && self.chi_records == self.chi_zeta
            && self.functional_equation.is_some()
            && self.hodge_symmetric
            && self.riemann != Some(false)
    }
}

pub fn weil_check(a: &BHMatrix, records: &[EigenvalueRecord], zeta: &ZetaFunction) -> WeilReport {
    let n = a.n() as i64;
    let p = zeta.prime;
    let labels: Vec<SectorLabel> = records.iter().map(|r| r.label.clone()).collect();
    let pairs = serre_pairing(a, &labels);
    let pairing_complete = pairs.iter().all(|x| x.is_some());
    let mut violations = Vec::new();
    for (i, j) in pairs.iter().enumerate() {
        let Some(j) = *j else { continue };
        if j < i {
            continue;
        }
        let (x, y) = (&records[i], &records[j]);
        if let (Some(ax), Some(ay)) = (&x.alpha_padic, &y.alpha_padic) {
            let prod = ax.mul(ay);
            let want = PadicNumber::new(p, prod.precision, pow_p(p, (n - 2) as u32));
            if !prod.congruent(&want) {
                violations.push(format!("alpha product for {:?} / {:?}", x.frac, y.frac));
            }
            if x.valuation().zip(y.valuation()).map(|(u, v)| u + v) != Some(n - 2) {
                violations.push(format!("valuations for {:?} / {:?}", x.frac, y.frac));
            }
        }
    }
    let chi_records = records.iter().filter(|r| r.degree().is_some()).map(|r| r.sign as i64).sum();
    let mut hodge: BTreeMap<(Q, Q), i64> = BTreeMap::new();
    for r in records {
        *hodge.entry((r.label.s, r.label.r)).or_default() += 1;
    }
    let hodge_symmetric = hodge.iter().all(|((s, r), c)| hodge.get(&(*r, *s)) == Some(c));
    let mut riemann = None;
    for r in records {
        if let (Some(x), Some(k)) = (&r.alpha_exact, r.degree()) {
            let ok = norm_check(x, p, Q::new(k as i64, 2)).pass;
            riemann = Some(riemann.unwrap_or(true) && ok);
        }
    }
    WeilReport {
        pairing_complete,
        pairing_violations: violations,
        chi_records,
        chi_zeta: zeta.chi,
        functional_equation: zeta.functional_equation((n - 2) as u32),
        hodge_symmetric,
        riemann,
    }
}
