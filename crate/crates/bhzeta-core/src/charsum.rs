//! Multiplicative characters of F_p, Jacobi and Gauss sums in `Z[zeta_m]`.

use alloc::vec;
use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
#[allow(unused_imports)]
use num_traits::float::Float;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::Q;
use crate::milnor::SectorLabel;
use crate::padic::{check_prime, mod_pow_u64, teichmuller, PadicNumber};

/// Discrete logarithms for a fixed primitive root.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    pub prime: u64,
    pub generator: u64,
    /// `dlog[x] = k` with `g^k = x`; `dlog[0]` is unused.
    pub dlog: Vec<u32>,
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn build_character_table(p: u64) -> Result<CharacterTable> {
    check_prime(p)?;
    let qs = prime_factors(p - 1);
    let g = (2..p).find(|&g| qs.iter().all(|q| mod_pow_u64(g, (p - 1) / q, p) != 1)).unwrap();
    let mut dlog = vec![0u32; p as usize];
    let mut x = 1u64;
    for k in 0..p - 1 {
        dlog[x as usize] = k as u32;
        x = x * g % p;
    }
    Ok(CharacterTable { prime: p, generator: g, dlog })
}

impl CharacterTable {
    /// `chi_{k/m}(-1) = (-1)^{k (p-1)/m}`.
    pub fn sign_at_minus_one(&self, k: u64, m: u64) -> i64 {
        if (k * ((self.prime - 1) / m)) % 2 == 0 { 1 } else { -1 }
    }

    /// `J(chi_{a/m}, chi_{b/m}) = sum_{x != 0, 1} chi_a(x) chi_b(1 - x)`.
    pub fn jacobi2(&self, a: u64, b: u64, m: u64) -> CyclotomicInt {
        let p = self.prime;
        let mut counts = vec![0i64; m as usize];
        for x in 2..p {
            let e = a * self.dlog[x as usize] as u64 + b * self.dlog[(p + 1 - x) as usize] as u64;
            counts[(e % m) as usize] += 1;
        }
        CyclotomicInt::from_power_sums(m, &counts)
    }
}

fn poly_divexact(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![0i64; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db] / b[db];
        q[i] = c;
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= c * bj;
        }
    }
    q
}

/// Coefficients of the `m`-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_poly(m: u64) -> Vec<i64> {
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m % d == 0 {
            num = poly_divexact(&num, &cyclotomic_poly(d));
        }
    }
    num
}

/// Element of `Z[zeta_m]` in the power basis `1, zeta, ..., zeta^{phi(m)-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicInt {
    pub order: u64,
    pub coeffs: Vec<BigInt>,
}

impl CyclotomicInt {
    /// `sum_i c_i zeta^i` for an arbitrary exponent range, reduced.
    pub fn from_power_sums<T: Clone + Into<BigInt>>(m: u64, c: &[T]) -> Self {
        let mut folded = vec![BigInt::zero(); m as usize];
        for (i, x) in c.iter().enumerate() {
            folded[i % m as usize] += x.clone().into();
        }
        let phi = cyclotomic_poly(m);
        let d = phi.len() - 1;
        for i in (d..folded.len()).rev() {
            let lead = core::mem::take(&mut folded[i]);
            if lead.is_zero() {
                continue;
            }
            for (j, pj) in phi.iter().enumerate().take(d) {
                folded[i - d + j] -= &lead * pj;
            }
        }
        folded.truncate(d);
        CyclotomicInt { order: m, coeffs: folded }
    }

    pub fn from_int(m: u64, x: BigInt) -> Self {
        Self::from_power_sums(m, &[x])
    }

    pub fn zero(m: u64) -> Self {
        Self::from_int(m, BigInt::zero())
    }

    pub fn one(m: u64) -> Self {
        Self::from_int(m, BigInt::one())
    }

    pub fn zeta_pow(m: u64, k: u64) -> Self {
        let mut c = vec![BigInt::zero(); (k % m) as usize + 1];
        c[(k % m) as usize] = BigInt::one();
        Self::from_power_sums(m, &c)
    }

    pub fn add(&self, o: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect();
        CyclotomicInt { order: self.order, coeffs }
    }

    pub fn neg(&self) -> Self {
        CyclotomicInt { order: self.order, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        CyclotomicInt { order: self.order, coeffs: self.coeffs.iter().map(|a| a * k).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut c = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::from_power_sums(self.order, &c)
    }

    pub fn pow(&self, e: u64) -> Self {
        (0..e).fold(Self::one(self.order), |acc, _| acc.mul(self))
    }

    /// `zeta -> zeta^u`.
    pub fn galois(&self, u: u64) -> Self {
        let m = self.order;
        let mut c = vec![BigInt::zero(); m as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            c[(i as u64 * u % m) as usize] += a;
        }
        Self::from_power_sums(m, &c)
    }

    pub fn conj(&self) -> Self {
        self.galois(self.order - 1)
    }

    /// The element as a rational integer, if it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs.first().cloned().unwrap_or_default())
        } else {
            None
        }
    }

    /// Images under `zeta -> exp(2 pi i j / m)` for `gcd(j, m) = 1`, as `(re, im)`.
    pub fn embeddings(&self) -> Vec<(f64, f64)> {
        let m = self.order;
        (1..=m)
            .filter(|j| j.gcd(&m) == 1)
            .map(|j| {
                let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
                for (i, c) in self.coeffs.iter().enumerate() {
                    let c = c.to_f64().unwrap_or(f64::INFINITY);
                    let th = 2.0 * core::f64::consts::PI * ((i as u64 * j % m) as f64) / m as f64;
                    re.add(c * th.cos());
                    im.add(c * th.sin());
                }
                (re.sum(), im.sum())
            })
            .collect()
    }

    /// Image in `Z_p / p^N` under `zeta_m -> omega(g)^{(p-1)/m}`.
    pub fn to_padic(&self, table: &CharacterTable, n: u32) -> PadicNumber {
        let p = table.prime;
        let z = teichmuller(table.generator, p, n).pow((p - 1) / self.order);
        let mut acc = PadicNumber::zero(p, n);
        let mut zp = PadicNumber::one(p, n);
        for c in &self.coeffs {
            acc = acc.add(&PadicNumber::from_bigint(p, n, c).mul(&zp));
            zp = zp.mul(&z);
        }
        acc.truncate(n)
    }
}

#[derive(Default)]
struct Neumaier {
    s: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn sum(&self) -> f64 {
        self.s + self.c
    }
}

/// Common denominator `e` of a tuple, required to divide `p - 1`.
fn common_order(a: &[Q], p: u64) -> Result<u64> {
    let e = a.iter().fold(1i64, |e, x| e.lcm(x.denom())) as u64;
    if (p - 1) % e != 0 {
        let bad = a.iter().find(|x| (p - 1) % *x.denom() as u64 != 0).unwrap_or(&a[0]);
        return Err(Error::DenominatorMismatch { num: *bad.numer(), den: *bad.denom(), pm1: p - 1 });
    }
    Ok(e)
}

/// `prod_i g(chi_{b_i})` for fractional `b_i` with integral sum, by chaining
/// `g(X) g(Y) = J(X, Y) g(XY)` and `g(X) g(X^{-1}) = X(-1) p`.
pub fn gauss_product(b: &[Q], table: &CharacterTable) -> Result<CyclotomicInt> {
    let p = table.prime;
    if let Some(index) = b.iter().position(|x| x.is_integer()) {
        return Err(Error::DegenerateTuple { index });
    }
    let e = if b.is_empty() { 1 } else { common_order(b, p)? };
    let ks: Vec<u64> = b.iter().map(|x| (x.fract() * e as i64).to_integer().rem_euclid(e as i64) as u64).collect();
    let mut v = CyclotomicInt::one(e);
    let mut psi: Option<u64> = None;
    for &k in &ks {
        psi = match psi {
            None => Some(k),
            Some(c) if (c + k) % e != 0 => {
                v = v.mul(&table.jacobi2(c, k, e));
                Some((c + k) % e)
            }
            Some(c) => {
                v = v.scale(&BigInt::from(table.sign_at_minus_one(c, e) * p as i64));
                None
            }
        };
    }
    if psi.is_some() {
        let s: Q = b.iter().sum();
        return Err(Error::DenominatorMismatch { num: *s.numer(), den: *s.denom(), pm1: p - 1 });
    }
    Ok(v)
}

/// `J(a) = chi_{a_r}(-1) prod g(chi_{a_i}) / p`.
pub fn jacobi_sum(a: &[Q], table: &CharacterTable) -> Result<CyclotomicInt> {
    let t = gauss_product(a, table)?;
    let last = a.last().ok_or(Error::DegenerateTuple { index: 0 })?;
    let e = t.order;
    let k = (last.fract() * e as i64).to_integer().rem_euclid(e as i64) as u64;
    let sgn = table.sign_at_minus_one(k, e);
    let p = BigInt::from(table.prime);
    let coeffs = t
        .coeffs
        .iter()
        .map(|c| {
            let (q, r) = c.div_rem(&p);
            debug_assert!(r.is_zero());
            q * sgn
        })
        .collect();
    Ok(CyclotomicInt { order: e, coeffs })
}

/// Exact eigenvalue `p^{age(lambda)-1} p^{#ones} (-1)^r prod_i g(chi_{1-v_i})`
/// over the `r` fractional coordinates `v_i` of `gamma A^{-1}`; `None` for
/// sectors of fractional degree.
pub fn eigenvalue_exact(label: &SectorLabel, table: &CharacterTable) -> Result<Option<CyclotomicInt>> {
    if !label.age_lambda.is_integer() || !label.dual_age_gamma.is_integer() {
        return Ok(None);
    }
    let v = label.box_coords().ok_or_else(|| Error::NoBoxRepresentative(format!("{:?}", label.gamma.fracs())))?;
    let ones = v.iter().filter(|x| **x == Q::from_integer(1)).count() as u32;
    let b: Vec<Q> = v.iter().filter(|x| !x.is_integer()).map(|x| Q::from_integer(1) - x).collect();
    let t = gauss_product(&b, table)?;
    let e = label.age_lambda.to_integer() - 1 + ones as i64;
    let pb = BigInt::from(table.prime);
    let mut scale = pb.pow(e.max(0) as u32);
    if b.len() % 2 == 1 {
        scale = -scale;
    }
    let mut t = t;
    if e < 0 {
        let d = pb.pow((-e) as u32);
        if t.coeffs.iter().any(|c| !c.is_multiple_of(&d)) {
            return Err(Error::Overflow("Gauss sum product not divisible by p"));
        }
        t.coeffs.iter_mut().for_each(|c| *c /= &d);
    }
    Ok(Some(t.scale(&scale)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub pass: bool,
    /// Largest `| |x|^2 / p^{2t} - 1 |` over the embeddings.
    pub worst: f64,
    /// `x * conj(x) == p^{2t}` in the ring, when `2t` is an integer.
    pub exact: Option<bool>,
}

/// Every complex embedding has `|x| = p^t`.
pub fn norm_check(x: &CyclotomicInt, p: u64, t: Q) -> NormReport {
    const TOL: f64 = 1e-6;
    let target = (p as f64).powf((t * 2).to_f64().unwrap_or(f64::NAN));
    let worst = x
        .embeddings()
        .iter()
        .map(|(re, im)| ((re * re + im * im) / target - 1.0).abs())
        .fold(0.0, f64::max);
    let exact = (t * 2).is_integer().then(|| {
        let e = (t * 2).to_integer();
        e >= 0 && x.mul(&x.conj()) == CyclotomicInt::from_int(x.order, BigInt::from(p).pow(e as u32))
    });
    NormReport { pass: worst <= TOL && exact != Some(false), worst, exact }
}
