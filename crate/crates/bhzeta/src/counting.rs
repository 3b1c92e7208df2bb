//! Brute-force point counts of `X_A` over `F_q`.
//!
//! Affine solutions are counted block by block: variables that share no
//! monomial are enumerated separately into value histograms which are then
//! convolved over the additive group of `F_q`. Every point of `F_q^n` is still
//! accounted for exactly once.

use crate::error::{Error, Result};
use bhzeta_core::matrix::BHMatrix;
use rayon::prelude::*;

/// Largest field for which exp/log tables are built.
pub const MAX_FIELD: u64 = 1 << 24;
/// Largest `q^n` accepted by [`count_projective_smallcheck`].
pub const SMALLCHECK_LIMIT: u128 = 10_000_000;

const ZERO: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct FiniteField {
    pub p: u64,
    pub nu: u32,
    pub q: u64,
    /// Monic, lowest degree first, length `nu + 1`.
    pub modulus: Vec<u64>,
    /// `g^k` for a fixed primitive element `g`.
    exp: Vec<u32>,
    /// Discrete log, [`ZERO`] at 0.
    log: Vec<u32>,
}

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    bhzeta_core::padic::mod_pow_u64(a, p - 2, p)
}

fn poly_rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let df = f.len() - 1;
    let lead_inv = inv_mod(f[df], p);
    while r.len() > df {
        let d = r.len() - 1;
        let c = r[d] * lead_inv % p;
        for (i, fi) in f.iter().enumerate() {
            let j = d - df + i;
            r[j] = (r[j] + p - c * fi % p) % p;
        }
        trim(&mut r);
    }
    r
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_rem(&out, f, p)
}

fn poly_powmod(a: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut base = poly_rem(a, f, p);
    let mut acc = vec![1u64];
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &base, f, p);
        }
        base = poly_mulmod(&base, &base, f, p);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
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

/// Rabin's test: `x^{p^nu} = x mod f` and `gcd(x^{p^{nu/r}} - x, f) = 1` for primes `r | nu`.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let nu = f.len() as u32 - 1;
    if nu == 1 {
        return true;
    }
    let x = vec![0, 1];
    let frob = |k: u32| {
        let mut h = x.clone();
        for _ in 0..k {
            h = poly_powmod(&h, p, f, p);
        }
        h
    };
    let mut top = frob(nu);
    top.resize(2.max(top.len()), 0);
    if poly_rem(&top, f, p) != poly_rem(&x, f, p) {
        return false;
    }
    prime_factors(nu as u64).into_iter().all(|r| {
        let mut h = frob(nu / r as u32);
        h.resize(h.len().max(2), 0);
        h[1] = (h[1] + p - 1) % p;
        let g = poly_gcd(&h, f, p);
        g.len() == 1
    })
}

impl FiniteField {
    /// `F_{p^nu}` with the first irreducible modulus in the order
    /// `x^nu + 1, x^nu + 2, ..., x^nu + x, x^nu + x + 1, ...`.
    pub fn new(p: u64, nu: u32) -> Result<Self> {
        if !bhzeta_core::padic::is_prime(p) {
            return Err(bhzeta_core::Error::NotPrime(p).into());
        }
        if nu == 0 {
            return Err(Error::Usage("field degree must be positive".into()));
        }
        let q = (p as u128).pow(nu);
        if q > MAX_FIELD as u128 {
            return Err(Error::FieldTooLarge { p, nu });
        }
        let q = q as u64;
        let modulus = if nu == 1 {
            vec![0, 1]
        } else {
            (1..q)
                .map(|code| {
                    let mut f: Vec<u64> = (0..nu).map(|i| code / p.pow(i) % p).collect();
                    f.push(1);
                    f
                })
                .find(|f| is_irreducible(f, p))
                .expect("an irreducible polynomial of every degree exists")
        };
        let mut field = FiniteField { p, nu, q, modulus, exp: Vec::new(), log: Vec::new() };
        let g = field.primitive_element();
        let mut exp = Vec::with_capacity(q as usize - 1);
        let mut log = vec![ZERO; q as usize];
        let mut cur = field.to_poly(1);
        let gp = field.to_poly(g);
        for k in 0..q - 1 {
            let idx = field.from_poly(&cur);
            exp.push(idx);
            log[idx as usize] = k as u32;
            cur = if nu == 1 { vec![cur.first().copied().unwrap_or(0) * g as u64 % p] } else { poly_mulmod(&cur, &gp, &field.modulus, p) };
        }
        field.exp = exp;
        field.log = log;
        Ok(field)
    }

    fn to_poly(&self, x: u32) -> Vec<u64> {
        let mut x = x as u64;
        let mut v = Vec::with_capacity(self.nu as usize);
        for _ in 0..self.nu {
            v.push(x % self.p);
            x /= self.p;
        }
        v
    }

    fn from_poly(&self, v: &[u64]) -> u32 {
        v.iter().rev().fold(0u64, |acc, c| acc * self.p + c) as u32
    }

    fn primitive_element(&self) -> u32 {
        let factors = prime_factors(self.q - 1);
        (2..self.q as u32)
            .find(|&g| {
                let gp = self.to_poly(g);
                factors.iter().all(|r| {
                    let h = if self.nu == 1 {
                        vec![bhzeta_core::padic::mod_pow_u64(g as u64, (self.q - 1) / r, self.p)]
                    } else {
                        poly_powmod(&gp, (self.q - 1) / r, &self.modulus, self.p)
                    };
                    h != [1]
                })
            })
            .unwrap_or(1)
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.nu == 1 {
            return ((a as u64 + b as u64) % self.p) as u32;
        }
        let (mut a, mut b, p) = (a as u64, b as u64, self.p);
        let (mut out, mut scale) = (0u64, 1u64);
        while a > 0 || b > 0 {
            out += (a % p + b % p) % p * scale;
            a /= p;
            b /= p;
            scale *= p;
        }
        out as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        if self.nu == 1 {
            return ((self.p - a as u64) % self.p) as u32;
        }
        let (mut a, p) = (a as u64, self.p);
        let (mut out, mut scale) = (0u64, 1u64);
        while a > 0 {
            out += (p - a % p) % p * scale;
            a /= p;
            scale *= p;
        }
        out as u32
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match (self.log[a as usize], self.log[b as usize]) {
            (ZERO, _) | (_, ZERO) => 0,
            (x, y) => self.exp[((x as u64 + y as u64) % (self.q - 1)) as usize],
        }
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        match self.log[a as usize] {
            ZERO if e == 0 => 1,
            ZERO => 0,
            x => self.exp[((x as u128 * e as u128) % (self.q as u128 - 1)) as usize],
        }
    }

    /// `None` at zero.
    pub fn dlog(&self, a: u32) -> Option<u32> {
        let l = self.log[a as usize];
        (l != ZERO).then_some(l)
    }

    pub fn exp(&self, k: u64) -> u32 {
        self.exp[(k % (self.q - 1)) as usize]
    }

    /// The polynomial `modulus` is irreducible and `exp` cycles through all units.
    pub fn certify(&self) -> bool {
        is_irreducible(&self.modulus, self.p)
            && self.exp.len() as u64 == self.q - 1
            && self.log.iter().filter(|&&l| l == ZERO).count() == 1
    }
}

/// Monomials `prod_j x_j^{e_j}` summed with coefficient 1.
struct Form {
    n: usize,
    rows: Vec<Vec<u32>>,
}

impl Form {
    fn from_matrix(a: &BHMatrix) -> Self {
        Form { n: a.n(), rows: a.rows().into_iter().map(|r| r.into_iter().map(|x| x as u32).collect()).collect() }
    }

    /// Connected components of the variables under "share a monomial".
    fn blocks(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut comp: Vec<usize> = (0..self.n).collect();
        fn find(c: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while c[r] != r {
                r = c[r];
            }
            c[i] = r;
            r
        }
        for row in &self.rows {
            let vars: Vec<usize> = (0..self.n).filter(|&j| row[j] > 0).collect();
            for w in vars.windows(2) {
                let (x, y) = (find(&mut comp, w[0]), find(&mut comp, w[1]));
                comp[x] = y;
            }
        }
        let mut out: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for j in 0..self.n {
            let r = find(&mut comp, j);
            match out.iter_mut().find(|(vars, _)| find(&mut comp, vars[0]) == r) {
                Some((vars, _)) => vars.push(j),
                None => out.push((vec![j], Vec::new())),
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(j) = (0..self.n).find(|&j| row[j] > 0) {
                let r = find(&mut comp, j);
                let b = out.iter().position(|(vars, _)| find(&mut comp, vars[0]) == r).unwrap();
                out[b].1.push(i);
            }
        }
        out
    }
}

/// Power tables `A_ij log(v)` for one block.
struct Block<'a> {
    field: &'a FiniteField,
    k: usize,
    /// `tables[r][c][v]`: exponent of `v` in monomial `r` at block coordinate `c`, in dlog units.
    tables: Vec<Vec<Option<Vec<u32>>>>,
}

impl<'a> Block<'a> {
    fn new(field: &'a FiniteField, form: &Form, vars: &[usize], rows: &[usize]) -> Self {
        let m = field.q - 1;
        let tables = rows
            .iter()
            .map(|&r| {
                vars.iter()
                    .map(|&j| {
                        let e = form.rows[r][j] as u64;
                        (e > 0).then(|| {
                            (0..field.q as u32)
                                .map(|v| field.dlog(v).map_or(ZERO, |l| ((l as u64 * e) % m) as u32))
                                .collect()
                        })
                    })
                    .collect()
            })
            .collect();
        Block { field, k: vars.len(), tables }
    }

    fn value(&self, x: &[u32]) -> u32 {
        let m = self.field.q - 1;
        let mut acc = 0u32;
        'rows: for t in &self.tables {
            let mut l = 0u64;
            for (c, tab) in t.iter().enumerate() {
                if let Some(tab) = tab {
                    let e = tab[x[c] as usize];
                    if e == ZERO {
                        continue 'rows;
                    }
                    l += e as u64;
                }
            }
            acc = self.field.add(acc, self.field.exp((l % m) as u64));
        }
        acc
    }

    /// Visits every point of `F_q^k`, parallel over the first two coordinates.
    fn fold<T, F, R>(&self, init: fn(&FiniteField) -> T, visit: F, reduce: R) -> T
    where
        T: Send,
        F: Fn(&mut T, u32) + Sync,
        R: Fn(T, T) -> T + Sync + Send,
    {
        let q = self.field.q as u32;
        let k = self.k;
        let heads: u64 = if k >= 2 { (q as u64) * (q as u64) } else { q as u64 };
        (0..heads)
            .into_par_iter()
            .fold(
                || init(self.field),
                |mut acc, h| {
                    let mut x = vec![0u32; k];
                    if k >= 2 {
                        x[0] = (h / q as u64) as u32;
                        x[1] = (h % q as u64) as u32;
                    } else {
                        x[0] = h as u32;
                    }
                    let start = k.min(2);
                    loop {
                        visit(&mut acc, self.value(&x));
                        let mut i = k;
                        loop {
                            if i == start {
                                return acc;
                            }
                            i -= 1;
                            x[i] += 1;
                            if x[i] < q {
                                break;
                            }
                            x[i] = 0;
                        }
                    }
                },
            )
            .reduce(|| init(self.field), reduce)
    }

    fn histogram(&self) -> Vec<u128> {
        self.fold(
            |f| vec![0u128; f.q as usize],
            |h, v| h[v as usize] += 1,
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
    }
}

fn convolve(field: &FiniteField, a: &[u128], b: &[u128]) -> Vec<u128> {
    let q = field.q as usize;
    (0..q as u32)
        .into_par_iter()
        .map(|c| {
            (0..q as u32)
                .filter(|&x| a[x as usize] != 0)
                .map(|x| {
                    let y = field.add(c, field.neg(x));
                    a[x as usize] * b[y as usize]
                })
                .sum()
        })
        .collect()
}

fn affine_zeros(form: &Form, field: &FiniteField) -> u128 {
    let blocks = form.blocks();
    let mut hist: Option<Vec<u128>> = None;
    let (last, rest) = blocks.split_last().expect("n >= 1");
    for (vars, rows) in rest {
        let h = Block::new(field, form, vars, rows).histogram();
        hist = Some(match hist {
            None => h,
            Some(prev) => convolve(field, &prev, &h),
        });
    }
    let block = Block::new(field, form, &last.0, &last.1);
    match hist {
        None => block.fold(|_| 0u128, |acc, v| *acc += (v == 0) as u128, |a, b| a + b),
        Some(prev) => {
            let prev = &prev;
            block.fold(|_| 0u128, move |acc, v| *acc += prev[field.neg(v) as usize], |a, b| a + b)
        }
    }
}

fn check_weights(a: &BHMatrix, weights: &[i64]) -> Result<()> {
    if weights.len() != a.n() || weights.iter().any(|&w| w <= 0) {
        return Err(Error::BadWeights(format!("{weights:?}")));
    }
    let degs: Vec<i64> = a.rows().iter().map(|r| r.iter().zip(weights).map(|(e, w)| e * w).sum()).collect();
    if degs.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::BadWeights(format!("{weights:?} gives degrees {degs:?}")));
    }
    Ok(())
}

/// Estimated monomial evaluations for [`count_projective`].
pub fn estimate_ops(a: &BHMatrix, q: u64) -> u128 {
    let form = Form::from_matrix(a);
    let blocks = form.blocks();
    let enumerate: u128 = blocks.iter().map(|(v, _)| (q as u128).pow(v.len() as u32)).sum();
    enumerate + blocks.len().saturating_sub(2) as u128 * (q as u128).pow(2)
}

/// `#{x in F_q^n \ 0 : W_A(x) = 0} / (q - 1)`.
pub fn count_projective(a: &BHMatrix, weights: &[i64], field: &FiniteField) -> Result<u128> {
    check_weights(a, weights)?;
    let form = Form::from_matrix(a);
    cone_quotient(affine_zeros(&form, field) - 1, field.q)
}

/// `#P(Q)(F_q)` by the same engine with no monomials.
pub fn count_ambient(n: usize, field: &FiniteField) -> Result<u128> {
    let form = Form { n, rows: Vec::new() };
    cone_quotient(affine_zeros(&form, field) - 1, field.q)
}

fn cone_quotient(nonzero: u128, q: u64) -> Result<u128> {
    let d = q as u128 - 1;
    if nonzero % d != 0 {
        return Err(Error::NonDivisible { count: nonzero, q });
    }
    Ok(nonzero / d)
}

/// Orbit enumeration under `t . x = (t^{w_i} x_i)`: each orbit of a zero of `W_A`
/// contributes `1/|Stab|`.
pub fn count_projective_smallcheck(a: &BHMatrix, weights: &[i64], field: &FiniteField) -> Result<u128> {
    check_weights(a, weights)?;
    let form = Form::from_matrix(a);
    orbit_mass(a.n(), weights, field, |x| {
        let mut acc = 0u32;
        for row in &form.rows {
            let mut v = 1u32;
            for (j, &e) in row.iter().enumerate() {
                v = field.mul(v, field.pow(x[j], e as u64));
            }
            acc = field.add(acc, v);
        }
        acc == 0
    })
}

/// `#P(Q)(F_q)` by orbit enumeration.
pub fn count_ambient_smallcheck(weights: &[i64], field: &FiniteField) -> Result<u128> {
    orbit_mass(weights.len(), weights, field, |_| true)
}

fn orbit_mass(n: usize, weights: &[i64], field: &FiniteField, keep: impl Fn(&[u32]) -> bool) -> Result<u128> {
    let q = field.q;
    let total = (q as u128).pow(n as u32);
    if total > SMALLCHECK_LIMIT {
        return Err(Error::BudgetExceeded { ops: total, budget: SMALLCHECK_LIMIT });
    }
    let index = |x: &[u32]| x.iter().fold(0u64, |acc, &c| acc * q + c as u64) as usize;
    let mut seen = vec![false; total as usize];
    let mut mass = 0u128;
    let mut x = vec![0u32; n];
    for code in 1..total as u64 {
        let mut c = code;
        for i in (0..n).rev() {
            x[i] = (c % q) as u32;
            c /= q;
        }
        if seen[code as usize] {
            continue;
        }
        let mut orbit = 0u128;
        let mut stab = 0u128;
        let mut y = vec![0u32; n];
        for t in 0..q - 1 {
            for i in 0..n {
                y[i] = field.mul(field.exp(t * weights[i] as u64), x[i]);
            }
            let j = index(&y);
            if y == x {
                stab += 1;
            }
            if !seen[j] {
                seen[j] = true;
                orbit += 1;
            }
        }
        debug_assert_eq!(orbit * stab, q as u128 - 1);
        if keep(&x) {
            mass += orbit;
        }
    }
    cone_quotient(mass, q)
}
