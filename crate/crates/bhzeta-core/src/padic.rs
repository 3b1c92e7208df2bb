//! Truncated p-adic integers, Dwork's splitting-function coefficients and
//! Morita's p-adic gamma function.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::Q;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Odd primes only.
pub fn check_prime(p: u64) -> Result<()> {
    if p > 2 && is_prime(p) { Ok(()) } else { Err(Error::NotPrime(p)) }
}

/// `(v_p(n), n / p^v)` for `n > 0`.
pub fn split_p(mut n: u64, p: u64) -> (u32, u64) {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    (v, n)
}

pub fn pow_p(p: u64, e: u32) -> BigUint {
    BigUint::from(p).pow(e)
}

pub fn mod_pow_u64(b: u64, mut e: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut r = 1u128;
    let mut b = b as u128 % m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r as u64
}

/// `u^{-1} mod p^e` by Newton lifting from `u^{p-2} mod p`.
fn inverse_unit(u: &BigUint, p: u64, e: u32, modulus: &BigUint) -> BigUint {
    let u0 = (u % p).to_u64().unwrap();
    let mut x = BigUint::from(mod_pow_u64(u0, p - 2, p));
    let mut have = 1;
    let two = BigUint::from(2u32);
    while have < e {
        have = (2 * have).min(e);
        let m = pow_p(p, have);
        let ux = (u * &x) % &m;
        let t = (&two + &m - ux) % &m;
        x = (x * t) % &m;
    }
    x % modulus
}

/// An element of `Z_p / p^N`, with `N` the absolute precision.
#[derive(Clone, PartialEq, Eq)]
pub struct PadicNumber {
    pub residue: BigUint,
    pub prime: u64,
    pub precision: u32,
}

impl fmt::Debug for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({}^{})", self.residue, self.prime, self.precision)
    }
}

impl PadicNumber {
    pub fn new(p: u64, precision: u32, residue: BigUint) -> Self {
        let residue = residue % pow_p(p, precision);
        PadicNumber { residue, prime: p, precision }
    }

    pub fn zero(p: u64, precision: u32) -> Self {
        PadicNumber { residue: BigUint::zero(), prime: p, precision }
    }

    pub fn one(p: u64, precision: u32) -> Self {
        Self::new(p, precision, BigUint::one())
    }

    pub fn from_bigint(p: u64, precision: u32, x: &BigInt) -> Self {
        let m = BigInt::from(pow_p(p, precision));
        let r = x.mod_floor(&m);
        PadicNumber { residue: r.to_biguint().unwrap(), prime: p, precision }
    }

    pub fn from_i64(p: u64, precision: u32, x: i64) -> Self {
        Self::from_bigint(p, precision, &BigInt::from(x))
    }

    /// `num/den` for a denominator prime to p.
    pub fn from_ratio(p: u64, precision: u32, x: &Q) -> Result<Self> {
        if x.denom() % p as i64 == 0 {
            return Err(Error::NotPadicUnit);
        }
        let m = pow_p(p, precision);
        let d = Self::from_i64(p, precision, *x.denom());
        let inv = inverse_unit(&d.residue, p, precision, &m);
        Ok(Self::from_i64(p, precision, *x.numer()).mul_residue(&inv))
    }

    fn modulus(&self) -> BigUint {
        pow_p(self.prime, self.precision)
    }

    fn mul_residue(&self, k: &BigUint) -> Self {
        let r = (&self.residue * k) % self.modulus();
        PadicNumber { residue: r, prime: self.prime, precision: self.precision }
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    /// `v_p`, capped at the precision.
    pub fn valuation(&self) -> u32 {
        if self.residue.is_zero() {
            return self.precision;
        }
        let mut v = 0;
        let mut r = self.residue.clone();
        let p = BigUint::from(self.prime);
        loop {
            let (q, rem) = r.div_rem(&p);
            if !rem.is_zero() {
                return v;
            }
            r = q;
            v += 1;
        }
    }

    pub fn is_unit(&self) -> bool {
        self.precision > 0 && !(&self.residue % self.prime).is_zero()
    }

    /// Lowers the precision to `n`.
    pub fn truncate(&self, n: u32) -> Self {
        let n = n.min(self.precision);
        Self::new(self.prime, n, self.residue.clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.precision.min(o.precision);
        Self::new(self.prime, n, &self.residue + &o.residue)
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus();
        Self::new(self.prime, self.precision, &m - &self.residue)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Product, keeping every digit determined by the inputs.
    pub fn mul(&self, o: &Self) -> Self {
        let n = (self.precision + o.valuation()).min(o.precision + self.valuation());
        Self::new(self.prime, n, &self.residue * &o.residue)
    }

    pub fn mul_int(&self, k: i64) -> Self {
        self.mul(&Self::from_i64(self.prime, self.precision + 64, k))
    }

    /// Multiplies by `p^e`, gaining `e` digits.
    pub fn shift(&self, e: u32) -> Self {
        Self::new(self.prime, self.precision + e, &self.residue * pow_p(self.prime, e))
    }

    /// Exact division by `p^e`, losing `e` digits.
    pub fn unshift(&self, e: u32) -> Result<Self> {
        if self.valuation() < e {
            return Err(Error::PrecisionExhausted {
                context: format!("{:?} is not divisible by p^{}", self, e),
            });
        }
        let r = &self.residue / pow_p(self.prime, e);
        Ok(Self::new(self.prime, self.precision - e, r))
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotPadicUnit);
        }
        let m = self.modulus();
        let r = inverse_unit(&self.residue, self.prime, self.precision, &m);
        Ok(PadicNumber { residue: r, prime: self.prime, precision: self.precision })
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.prime, self.precision);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        acc
    }

    /// Representative in `(-p^N/2, p^N/2]`.
    pub fn centered(&self) -> BigInt {
        let m = self.modulus();
        let r = BigInt::from(self.residue.clone());
        if self.residue.clone() * 2u32 > m {
            r - BigInt::from(m)
        } else {
            r
        }
    }

    /// Base-p digits, least significant first, `precision` of them.
    pub fn digits(&self) -> Vec<u64> {
        let mut r = self.residue.clone();
        let p = BigUint::from(self.prime);
        (0..self.precision)
            .map(|_| {
                let (q, d) = r.div_rem(&p);
                r = q;
                d.to_u64().unwrap()
            })
            .collect()
    }

    /// Agreement modulo `p^min(N, N')`.
    pub fn congruent(&self, o: &Self) -> bool {
        let n = self.precision.min(o.precision);
        self.truncate(n).residue == o.truncate(n).residue
    }
}

/// `sum_j a_j pi^j`, `0 <= j < p-1`, with `pi^{p-1} = -p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiRingElement {
    pub coeffs: Vec<PadicNumber>,
}

impl PiRingElement {
    pub fn zero(p: u64, precision: u32) -> Self {
        PiRingElement { coeffs: vec![PadicNumber::zero(p, precision); (p - 1) as usize] }
    }

    /// `a pi^e`, reduced.
    pub fn monomial(a: PadicNumber, e: u64) -> Self {
        let p = a.prime;
        let (q, r) = (e / (p - 1), (e % (p - 1)) as usize);
        let mut out = Self::zero(p, a.precision);
        let mut c = a.shift(q as u32);
        if q % 2 == 1 {
            c = c.neg();
        }
        out.coeffs[r] = c;
        out
    }

    pub fn prime(&self) -> u64 {
        self.coeffs[0].prime
    }

    pub fn add(&self, o: &Self) -> Self {
        PiRingElement { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.prime();
        let l = self.coeffs.len();
        let prec = self.coeffs.iter().chain(&o.coeffs).map(|c| c.precision).max().unwrap_or(0);
        let mut out = Self::zero(p, prec + 1);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                let t = a.mul(b);
                if i + j < l {
                    out.coeffs[i + j] = out.coeffs[i + j].add(&t);
                } else {
                    out.coeffs[i + j - l] = out.coeffs[i + j - l].sub(&t.shift(1));
                }
            }
        }
        out
    }

    /// Valuation in units of `ord(pi) = 1/(p-1)`, `None` if zero to the stored precision.
    pub fn pi_valuation(&self) -> Option<u64> {
        let l = self.coeffs.len() as u64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| c.valuation() as u64 * l + j as u64)
            .min()
    }

    /// The element as a p-adic integer when only the `pi^0` coefficient survives.
    pub fn to_padic(&self) -> Option<PadicNumber> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) { Some(self.coeffs[0].clone()) } else { None }
    }
}

/// Terms `lambda_k = a_k pi^{k mod (p-1)}` of `exp(pi (t - t^p)) = sum lambda_k t^k`.
#[derive(Clone, Debug)]
pub struct DworkCoefficientStream {
    pub prime: u64,
    pub precision: u32,
    /// Working precision of the recurrence.
    pub working: u32,
    pub values: Vec<PadicNumber>,
}

/// Smallest `k_max` for which every dropped term has `v_p >= N + 1`.
pub fn required_k_max(p: u64, n: u32) -> u64 {
    ((n as u64 + 2) * p * p).div_ceil(p - 1)
}

/// Lowest `v_p(a_k)` allowed by `ord_p lambda_k >= k(p-1)/p^2`.
pub(crate) fn dwork_floor(k: u64, p: u64) -> i64 {
    let r = (k % (p - 1)) as i128;
    let num = k as i128 * (p as i128 - 1) * (p as i128 - 1) - r * (p as i128) * (p as i128);
    let den = (p as i128) * (p as i128) * (p as i128 - 1);
    Integer::div_ceil(&num, &den) as i64
}

/// Digits lost below the working precision for each `k`.
fn deficits(p: u64, k_max: u64) -> Vec<u32> {
    let mut d = vec![0u32; k_max as usize + 1];
    for k in 1..=k_max {
        let zero = (k % (p - 1) == 0) as u32;
        let mut best = d[k as usize - 1].saturating_sub(zero);
        if k >= p {
            best = best.max(d[(k - p) as usize].saturating_sub(1 + zero));
        }
        d[k as usize] = best + split_p(k, p).0;
    }
    d
}

/// `a_k` for `k <= k_max` with at least `N + 1` correct digits each.
pub fn dwork_coeffs(p: u64, n: u32, k_max: u64) -> Result<DworkCoefficientStream> {
    check_prime(p)?;
    let d = deficits(p, k_max);
    let working = n + 2 + d.iter().copied().max().unwrap_or(0);
    let pw: Vec<BigUint> = (0..=working + 2).map(|e| pow_p(p, e)).collect();
    let mut vals: Vec<(BigUint, u32)> = Vec::with_capacity(k_max as usize + 1);
    vals.push((BigUint::one(), working));
    for k in 1..=k_max {
        let zero = k % (p - 1) == 0;
        let (prev, prev_prec) = &vals[k as usize - 1];
        let (back, back_prec) = if k >= p {
            let (b, bp) = &vals[(k - p) as usize];
            (b.clone(), *bp)
        } else {
            (BigUint::zero(), working)
        };
        let (t, prec) = if zero {
            // k a_k = -p a_{k-1} + p^2 a_{k-p}
            let prec = (prev_prec + 1).min(back_prec + 2).min(working);
            let m = &pw[prec as usize];
            let t = (back * &pw[2] % m + m - prev * &pw[1] % m) % m;
            (t, prec)
        } else {
            // k a_k = a_{k-1} - p a_{k-p}
            let prec = (*prev_prec).min(back_prec + 1).min(working);
            let m = &pw[prec as usize];
            let t = (prev % m + m - back * &pw[1] % m) % m;
            (t, prec)
        };
        let (v, u) = split_p(k, p);
        if prec < v || !(&t % &pw[v as usize]).is_zero() {
            return Err(Error::PrecisionExhausted { context: format!("Dwork recurrence at k = {}", k) });
        }
        let prec = prec - v;
        let m = &pw[prec as usize];
        let t = &t / &pw[v as usize];
        let inv = inverse_unit(&BigUint::from(u), p, prec.max(1), m);
        vals.push((t * inv % m, prec));
    }
    let values: Vec<PadicNumber> =
        vals.into_iter().map(|(r, prec)| PadicNumber { residue: r, prime: p, precision: prec }).collect();
    if let Some((k, _)) = values.iter().enumerate().find(|(_, a)| a.precision < n + 1) {
        return Err(Error::PrecisionExhausted { context: format!("a_{} below N + 1 digits", k) });
    }
    for (k, a) in values.iter().enumerate() {
        let floor = dwork_floor(k as u64, p);
        if floor > 0 && !a.is_zero() && (a.valuation() as i64) < floor.min(a.precision as i64) {
            return Err(Error::PrecisionExhausted {
                context: format!("a_{} violates the Dwork valuation bound", k),
            });
        }
    }
    Ok(DworkCoefficientStream { prime: p, precision: n, working, values })
}

impl DworkCoefficientStream {
    pub fn k_max(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    /// `lambda_k` as a `pi`-ring element.
    pub fn value(&self, k: u64) -> PiRingElement {
        PiRingElement::monomial(self.values[k as usize].clone(), k % (self.prime - 1))
    }

    /// `k lambda_k = pi lambda_{k-1} - p pi lambda_{k-p}`, checked on the residues.
    pub fn self_test(&self) -> Result<()> {
        let p = self.prime;
        let pi = PiRingElement::monomial(PadicNumber::one(p, self.working), 1);
        for k in 1..=self.k_max() {
            if k % p == 0 {
                continue;
            }
            let lhs = self.value(k).mul(&PiRingElement::monomial(PadicNumber::from_i64(p, self.working, k as i64), 0));
            let mut rhs = pi.mul(&self.value(k - 1));
            if k >= p {
                let back = pi.mul(&self.value(k - p));
                let back = PiRingElement { coeffs: back.coeffs.iter().map(|c| c.shift(1)).collect() };
                rhs = PiRingElement { coeffs: rhs.coeffs.iter().zip(&back.coeffs).map(|(a, b)| a.sub(b)).collect() };
            }
            let ok = lhs.coeffs.iter().zip(&rhs.coeffs).all(|(a, b)| a.congruent(b));
            if !ok {
                return Err(Error::PrecisionExhausted { context: format!("recurrence self-test at k = {}", k) });
            }
        }
        Ok(())
    }
}

/// `Gamma_p(m/(p-1))` for `m = 0..=p-1`.
#[derive(Clone, Debug)]
pub struct GammaTable {
    pub prime: u64,
    pub precision: u32,
    pub values: Vec<PadicNumber>,
}

impl GammaTable {
    /// Sums `S_m = sum_j a_{m+(p-1)j}`; `Gamma_p(m/(p-1)) = -(p-1) S_m` for `0 < m < p-1`
    /// and `Gamma_p(1) = (p-1)(S_0 - 1)/p`.
    pub fn from_stream(s: &DworkCoefficientStream) -> Result<Self> {
        let p = s.prime;
        let n = s.precision;
        if s.k_max() < required_k_max(p, n) {
            return Err(Error::PrecisionExhausted {
                context: format!("k_max = {} below the tail bound {}", s.k_max(), required_k_max(p, n)),
            });
        }
        let l = (p - 1) as usize;
        let mut sums = vec![PadicNumber::zero(p, n + 1); l];
        for (k, a) in s.values.iter().enumerate() {
            sums[k % l] = sums[k % l].add(&a.truncate(n + 1));
        }
        let mut values = Vec::with_capacity(l + 1);
        values.push(PadicNumber::one(p, n));
        for m in 1..l {
            values.push(sums[m].mul_int(-(l as i64)).truncate(n));
        }
        let g1 = sums[0].sub(&PadicNumber::one(p, n + 1)).unshift(1)?.mul_int(l as i64);
        if !g1.congruent(&PadicNumber::from_i64(p, n, -1)) {
            return Err(Error::PrecisionExhausted { context: format!("Gamma_p(1) came out as {:?}", g1) });
        }
        values.push(g1.truncate(n));
        Ok(GammaTable { prime: p, precision: n, values })
    }

    pub fn build(p: u64, n: u32) -> Result<Self> {
        Self::from_stream(&dwork_coeffs(p, n, required_k_max(p, n))?)
    }

    /// `Gamma_p(m/(p-1))`.
    pub fn get(&self, m: u64) -> &PadicNumber {
        &self.values[m as usize]
    }

    /// `Gamma_p(x)` for `x in [0, 1]` with `(p-1) x` integral.
    pub fn gamma(&self, x: &Q) -> Result<PadicNumber> {
        let pm1 = self.prime as i64 - 1;
        let s = x * pm1;
        if !s.is_integer() {
            return Err(Error::DenominatorMismatch { num: *x.numer(), den: *x.denom(), pm1: self.prime - 1 });
        }
        let m = s.to_integer();
        if (0..=pm1).contains(&m) {
            Ok(self.get(m as u64).clone())
        } else {
            gamma_p_rational(x, self.prime, self.precision)
        }
    }

    /// `prod_i Gamma_p(v_i)`.
    pub fn gamma_vector(&self, v: &[Q]) -> Result<PadicNumber> {
        v.iter().try_fold(PadicNumber::one(self.prime, self.precision), |acc, x| Ok(acc.mul(&self.gamma(x)?)))
    }
}

/// `Gamma_p(t) = (-1)^t prod_{0<j<t, p∤j} j`.
pub fn gamma_p_int(t: u64, p: u64, n: u32) -> PadicNumber {
    if t > 1 << 16 {
        return gamma_p_rational(&Q::from_integer(t as i64), p, n).expect("integers are p-adic units");
    }
    let m = pow_p(p, n);
    let mut acc = BigUint::one();
    for j in 1..t {
        if j % p != 0 {
            acc = acc * j % &m;
        }
    }
    let x = PadicNumber::new(p, n, acc);
    if t % 2 == 1 { x.neg() } else { x }
}

/// `Gamma_p(m/(p-1))` from a freshly built table.
pub fn gamma_p_frac(m: u64, p: u64, n: u32) -> Result<PadicNumber> {
    if m >= p {
        return Err(Error::DenominatorMismatch { num: m as i64, den: p as i64 - 1, pm1: p - 1 });
    }
    Ok(GammaTable::build(p, n)?.get(m).clone())
}

pub fn gamma_p_vector(v: &[Q], p: u64, n: u32) -> Result<PadicNumber> {
    for x in v {
        if !(x * (p as i64 - 1)).is_integer() {
            return Err(Error::DenominatorMismatch { num: *x.numer(), den: *x.denom(), pm1: p - 1 });
        }
    }
    GammaTable::build(p, n)?.gamma_vector(v)
}

type Poly = Vec<BigUint>;

fn poly_mul(a: &Poly, b: &Poly, m: &BigUint, deg: usize) -> Poly {
    let mut out = vec![BigUint::zero(); deg];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate().take(deg - i) {
            out[i + j] = (&out[i + j] + x * y) % m;
        }
    }
    out
}

/// `f(u + c)` truncated to degree `< deg`.
fn poly_shift(f: &Poly, c: &BigUint, m: &BigUint, deg: usize) -> Poly {
    let mut out = vec![BigUint::zero(); deg];
    let mut cpow = vec![BigUint::one(); deg];
    for i in 1..deg {
        cpow[i] = &cpow[i - 1] * c % m;
    }
    // binomials row by row
    let mut binom = vec![BigUint::one()];
    for (k, fk) in f.iter().enumerate() {
        for (a, b) in binom.iter().enumerate() {
            let t = fk * b % m * &cpow[k - a] % m;
            out[a] = (&out[a] + t) % m;
        }
        let mut next = vec![BigUint::one(); (k + 2).min(deg)];
        for a in 1..next.len() {
            next[a] = if a < binom.len() { (&binom[a - 1] + &binom[a]) % m } else { binom[a - 1].clone() };
        }
        binom = next;
    }
    out
}

/// `Gamma_p(x)` for rational `x` with denominator prime to p, by reducing `x`
/// to an integer mod `p^N` and evaluating the Morita product in blocks of `p`.
pub fn gamma_p_rational(x: &Q, p: u64, n: u32) -> Result<PadicNumber> {
    check_prime(p)?;
    let big_x = PadicNumber::from_ratio(p, n, x)?.residue;
    let m = pow_p(p, n);
    let deg = n.max(1) as usize;
    let pb = BigUint::from(p);
    let (q, r) = big_x.div_rem(&pb);
    let r = r.to_u64().unwrap();
    // F(u) = prod_{i=1}^{p-1} (u + i)
    let mut f: Poly = vec![BigUint::one()];
    for i in 1..p {
        f = poly_mul(&f, &vec![BigUint::from(i), BigUint::one()], &m, deg);
    }
    let mut h: Poly = vec![BigUint::one()];
    let mut l = BigUint::zero();
    for bit in (0..q.bits()).rev() {
        let c = &pb * &l % &m;
        h = poly_mul(&h, &poly_shift(&h, &c, &m, deg), &m, deg);
        l *= 2u32;
        if q.bit(bit) {
            let c = &pb * &l % &m;
            h = poly_mul(&h, &poly_shift(&f, &c, &m, deg), &m, deg);
            l += 1u32;
        }
    }
    let mut acc = h.first().cloned().unwrap_or_else(BigUint::one) % &m;
    let base = &q * &pb;
    for i in 1..r {
        acc = acc * ((&base + i) % &m) % &m;
    }
    let out = PadicNumber::new(p, n, acc);
    Ok(if big_x.bit(0) { out.neg() } else { out })
}

/// Teichmuller representative of `a mod p`, by Newton iteration on `x^{p-1} = 1`.
pub fn teichmuller(a: u64, p: u64, n: u32) -> PadicNumber {
    let mut x = PadicNumber::from_i64(p, n, (a % p) as i64);
    if x.is_zero() {
        return x;
    }
    for _ in 0..=32 - n.leading_zeros() {
        let fx = x.pow(p - 1).sub(&PadicNumber::one(p, n));
        let dfx = x.pow(p - 2).mul_int(p as i64 - 1);
        x = x.sub(&fx.mul(&dfx.inverse().expect("unit")));
    }
    x
}

/// `(v_p(x), x / p^v)` for a nonzero integer.
pub fn split_bigint(x: &BigInt, p: u64) -> (u32, BigInt) {
    let mut v = 0;
    let mut r = x.clone();
    let pb = BigInt::from(p);
    while !r.is_zero() {
        let (q, rem) = r.div_rem(&pb);
        if !rem.is_zero() {
            break;
        }
        r = q;
        v += 1;
    }
    (v, r)
}
