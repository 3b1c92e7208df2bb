//! Fixture documents: one JSON file per example under `fixtures/`.

use crate::cache;
use crate::counting::{count_projective, estimate_ops, FiniteField};
use crate::error::{Error, Result};
use bhzeta_core::charsum::{build_character_table, jacobi_sum};
use bhzeta_core::matrix::{BHMatrix, Side, SymmetryGroup, Q};
use bhzeta_core::milnor::{euler_characteristic, hodge_numbers, sector_spectrum, SectorLabel};
use bhzeta_core::mw::{cancellation_report, mw_point_count};
use bhzeta_core::padic::{pow_p, GammaTable};
use bhzeta_core::spectrum::{
    attach_exact, auto_precision, eigenvalues_for, poly_mul, supertrace, weil_check, zeta, EigenvalueRecord, Poly,
    ZetaFunction,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const SCHEMA: u32 = 1;
pub const ENV_DIR: &str = "BHZETA_FIXTURES";
/// Primes above this are slow paths.
pub const SLOW_PRIME: u64 = 10_000;
pub const DEFAULT_BUDGET: u128 = 2_000_000_000;

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Assert,
    Diagnostic,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Speed {
    Fast,
    Slow,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub schema: u32,
    pub id: String,
    pub title: String,
    pub citation: String,
    pub status: Status,
    pub matrix: Vec<Vec<i64>>,
    /// Generators of `G` on the `A` side; `<J>` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Vec<Vec<i64>>>,
    /// Weights of the ambient weighted projective space; those of `A` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumExpect>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cases: Vec<Case>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mw: Option<MwExpect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobi: Option<JacobiExpect>,
    /// Commentary only, never asserted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct SpectrumExpect {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<i64>,
    /// `"s,r" -> h^{s,r}`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub hodge: BTreeMap<String, usize>,
}

/// `prod_i c_i q^{e_i} t^i`, raised to `power`, with `q = p^nu`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub terms: Vec<(i64, u32)>,
    #[serde(default = "one_usize")]
    pub power: usize,
}

fn one_usize() -> usize {
    1
}

fn one_u32() -> u32 {
    1
}

#[derive(Serialize, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub prime: u64,
    #[serde(default = "one_u32")]
    pub nu: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    /// Run the character-sum backend and compare digit for digit.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exact: bool,
    /// `P_k` equals the product.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub factors: BTreeMap<String, Vec<Factor>>,
    /// `P_k` is divisible by the product.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub divides: BTreeMap<String, Vec<Factor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerator: Option<Vec<Factor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator: Option<Vec<Factor>>,
    /// Multiplicities of the distinct Galois-orbit factors of `P_k`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub orbit_powers: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supertrace: Option<String>,
    /// `N_{q^m}` for `m = 1, 2, ...`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub point_counts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brute_force: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padic: Option<PadicExpect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial: Option<PartialExpect>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sectors: Vec<SectorExpect>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct PadicExpect {
    pub digits: Vec<u64>,
    pub rational: bool,
}

/// Supertrace over the sectors with integral age only.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct PartialExpect {
    pub value: String,
    pub withheld: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct SectorExpect {
    pub gamma_a_inv: Vec<String>,
    /// `alpha mod p^len`, lowest digit first.
    pub digits: Vec<u64>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct MwExpect {
    pub precision: u32,
    /// MW count, supertrace and brute force agree at each prime.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tri_oracle: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cancellation: Option<CancellationExpect>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct CancellationExpect {
    pub prime: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior_classes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frozen_classes: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<ClassExpect>,
    /// Sorted distinct value patterns of `gamma A^{-1}`, `*` for 0 or 1.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub patterns: Vec<Vec<String>>,
}

/// Coordinates are 1-based.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct ClassExpect {
    pub table: String,
    pub fracs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frozen: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_count: Option<usize>,
    /// `(I, I + pivot)`, the complete list.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<(Vec<usize>, Vec<usize>)>,
    /// `(gamma, gamma')`, the complete list.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gammas: Vec<(Vec<i64>, Vec<i64>)>,
    /// Rows that must appear.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct JacobiExpect {
    pub prime: u64,
    pub entries: Vec<JacobiEntry>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct JacobiEntry {
    pub a: Vec<String>,
    /// As printed, `x+yi` or `p`.
    pub value: String,
}

pub fn parse_q(s: &str) -> Result<Q> {
    let bad = || Error::Usage(format!("not a rational: {s}"));
    match s.split_once('/') {
        Some((n, d)) => Ok(Q::new(n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?)),
        None => Ok(Q::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

fn parse_int(s: &str) -> Result<BigInt> {
    s.trim().parse().map_err(|_| Error::Usage(format!("not an integer: {s}")))
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Fixture directory: `$BHZETA_FIXTURES`, else `./fixtures`, else the one in the source tree.
pub fn fixtures_dir() -> PathBuf {
    if let Some(d) = std::env::var_os(ENV_DIR).filter(|s| !s.is_empty()) {
        return PathBuf::from(d);
    }
    let local = PathBuf::from("fixtures");
    if local.is_dir() {
        return local;
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn load_path(path: &Path) -> Result<Fixture> {
    let text = std::fs::read_to_string(path)?;
    let f: Fixture = serde_json::from_str(&text)?;
    let bad = |detail: String| Error::BadFixture { id: f.id.clone(), detail };
    if f.schema != SCHEMA {
        return Err(bad(format!("schema {} (expected {SCHEMA})", f.schema)));
    }
    if f.citation.trim().is_empty() {
        return Err(bad("missing citation".into()));
    }
    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
        if stem != f.id {
            return Err(bad(format!("stored as {stem}.json")));
        }
    }
    Ok(f)
}

pub fn load_from(dir: &Path, id: &str) -> Result<Fixture> {
    let path = dir.join(format!("{id}.json"));
    if !path.is_file() {
        return Err(Error::UnknownFixture(id.to_string()));
    }
    load_path(&path)
}

pub fn load(id: &str) -> Result<Fixture> {
    load_from(&fixtures_dir(), id)
}

/// Sorted fixture ids in `dir`.
pub fn list(dir: &Path) -> Result<Vec<String>> {
    let mut ids: Vec<String> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let p = e.path();
            (p.extension()? == "json").then(|| p.file_stem()?.to_str().map(String::from))?
        })
        .collect();
    ids.sort();
    Ok(ids)
}

impl Fixture {
    pub fn bh(&self) -> Result<BHMatrix> {
        Ok(BHMatrix::new(self.matrix.clone())?)
    }

    pub fn group(&self, a: &BHMatrix) -> Result<SymmetryGroup> {
        match &self.group {
            None => Ok(a.j_group()),
            Some(gens) => Ok(a.span(Side::A, gens)?),
        }
    }

    pub fn weights_for(&self, a: &BHMatrix) -> Vec<i64> {
        self.weights.clone().unwrap_or_else(|| a.integer_weights().0)
    }

    /// Estimated work for one case: Dwork coefficients plus brute force.
    pub fn case_ops(&self, case: &Case) -> u128 {
        let q = (case.prime as u128).pow(case.nu);
        let brute = match (&case.brute_force, self.bh()) {
            (Some(_), Ok(a)) => estimate_ops(&a, q.min(u64::MAX as u128) as u64),
            _ => 0,
        };
        brute + 30 * case.prime as u128
    }

    pub fn case_speed(&self, case: &Case, budget: u128) -> Speed {
        if case.prime > SLOW_PRIME || self.case_ops(case) > budget {
            Speed::Slow
        } else {
            Speed::Fast
        }
    }

    pub fn speed(&self, budget: u128) -> Speed {
        if self.cases.iter().any(|c| self.case_speed(c, budget) == Speed::Slow) {
            Speed::Slow
        } else {
            Speed::Fast
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub allow_slow: bool,
    pub budget: u128,
    pub cache_dir: Option<PathBuf>,
    /// Floor on the working precision; below the automatic one it is refused.
    pub precision: Option<u32>,
    /// Weil checks and stability under `N -> N + 2` on every case.
    pub properties: bool,
    /// Only cases at these primes.
    pub primes: Option<Vec<u64>>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { allow_slow: false, budget: DEFAULT_BUDGET, cache_dir: None, precision: None, properties: false, primes: None }
    }
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub diagnostic: bool,
    pub detail: String,
}

#[derive(Serialize, Clone, Debug)]
pub struct FixtureReport {
    pub id: String,
    pub citation: String,
    pub status: Status,
    pub speed: Speed,
    pub checks: Vec<Check>,
    pub skipped: Vec<String>,
}

impl FixtureReport {
    /// Diagnostic checks report and never fail.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok || c.diagnostic)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.ok && !c.diagnostic).collect()
    }

    pub fn render(&self) -> String {
        let mut s = format!("{} [{}] {}\n", self.id, if self.passed() { "pass" } else { "FAIL" }, self.citation);
        for c in &self.checks {
            let tag = match (c.ok, c.diagnostic) {
                (true, _) => "ok  ",
                (false, true) => "diag",
                (false, false) => "FAIL",
            };
            s += &format!("  {tag} {:<40} {}\n", c.name, c.detail);
        }
        for k in &self.skipped {
            s += &format!("  skip {k}\n");
        }
        s
    }
}

struct Recorder {
    checks: Vec<Check>,
    diagnostic: bool,
}

impl Recorder {
    fn push(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), ok, diagnostic: self.diagnostic, detail: detail.into() });
    }

    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, name: impl Into<String>, got: T, want: T) {
        let ok = got == want;
        let detail = if ok { format!("{got:?}") } else { format!("got {got:?}, expected {want:?}") };
        self.push(name, ok, detail);
    }

    fn error(&mut self, name: impl Into<String>, e: impl std::fmt::Display) {
        self.push(name, false, format!("error: {e}"));
    }
}

/// `prod (sum_i c_i q^{e_i} t^i)^power`.
pub fn expand(factors: &[Factor], q: &BigInt) -> Poly {
    let mut out = vec![BigInt::one()];
    for f in factors {
        let poly: Poly = f.terms.iter().map(|(c, e)| BigInt::from(*c) * q.pow(*e)).collect();
        for _ in 0..f.power {
            out = poly_mul(&out, &poly);
        }
    }
    out
}

/// `a / b` when exact; `b(0) = 1`.
fn divide(a: &[BigInt], b: &[BigInt]) -> Option<Poly> {
    if b.len() > a.len() || !b[0].is_one() {
        return None;
    }
    let mut rest = a.to_vec();
    let mut quot = vec![BigInt::zero(); a.len() - b.len() + 1];
    for i in 0..quot.len() {
        let c = rest[i].clone();
        for (j, bj) in b.iter().enumerate() {
            rest[i + j] -= &c * bj;
        }
        quot[i] = c;
    }
    rest.iter().all(|x| x.is_zero()).then_some(quot)
}

fn poly_str(p: &[BigInt]) -> String {
    let v: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("[{}]", v.join(", "))
}

pub fn hodge_key(s: &Q, r: &Q) -> String {
    format!("{},{}", fmt_q(s), fmt_q(r))
}

/// Precision, `Gamma_p` table and records for one prime.
pub struct Prepared {
    pub precision: u32,
    pub auto: u32,
    pub records: Vec<EigenvalueRecord>,
}

pub fn prepare(a: &BHMatrix, labels: &[SectorLabel], p: u64, nu: u32, floor: Option<u32>, cache_dir: Option<&Path>) -> Result<Prepared> {
    let auto = auto_precision(labels, p, nu);
    let precision = match floor {
        Some(n) if n < auto => return Err(Error::PrecisionTooLow { requested: n, minimum: auto }),
        Some(n) => n,
        None => auto,
    };
    let table: Option<GammaTable> = if (p - 1) % a.order() as u64 == 0 { Some(cache::gamma_table(p, precision, cache_dir)?) } else { None };
    let records = eigenvalues_for(labels, p, precision, table.as_ref())?;
    Ok(Prepared { precision, auto, records })
}

pub fn run(f: &Fixture, opts: &RunOptions) -> FixtureReport {
    let mut rec = Recorder { checks: Vec::new(), diagnostic: f.status == Status::Diagnostic };
    let mut skipped = Vec::new();
    let speed = f.speed(opts.budget);
    let report = |rec: Recorder, skipped| FixtureReport {
        id: f.id.clone(),
        citation: f.citation.clone(),
        status: f.status,
        speed,
        checks: rec.checks,
        skipped,
    };
    let (a, g) = match f.bh().and_then(|a| f.group(&a).map(|g| (a, g))) {
        Ok(x) => x,
        Err(e) => {
            rec.error("matrix", e);
            return report(rec, skipped);
        }
    };
    let labels = match sector_spectrum(&a, &g) {
        Ok(s) => s.labels,
        Err(e) => {
            rec.error("spectrum", e);
            return report(rec, skipped);
        }
    };
    if let Some(s) = &f.spectrum {
        if let Some(b) = s.basis {
            rec.eq("basis size", labels.len(), b);
        }
        if let Some(chi) = s.chi {
            rec.eq("euler characteristic", euler_characteristic(&labels), chi);
        }
        if !s.hodge.is_empty() {
            let got: BTreeMap<String, usize> = hodge_numbers(&labels).iter().map(|((s, r), c)| (hodge_key(s, r), *c)).collect();
            let got: BTreeMap<String, usize> = got.into_iter().filter(|(k, _)| s.hodge.contains_key(k)).collect();
            rec.eq("hodge numbers", got, s.hodge.clone());
        }
    }
    for case in &f.cases {
        if opts.primes.as_ref().is_some_and(|ps| !ps.contains(&case.prime)) {
            continue;
        }
        let tag = if case.nu == 1 { format!("p={}", case.prime) } else { format!("p={}^{}", case.prime, case.nu) };
        if f.case_speed(case, opts.budget) == Speed::Slow && !opts.allow_slow {
            skipped.push(format!("{tag}: slow path, needs --allow-slow"));
            continue;
        }
        let outer = rec.diagnostic;
        rec.diagnostic = outer || case.status == Some(Status::Diagnostic);
        if let Err(e) = run_case(f, &a, &labels, case, opts, &tag, &mut rec) {
            rec.error(format!("{tag} run"), e);
        }
        rec.diagnostic = outer;
    }
    if let Some(mw) = &f.mw {
        run_mw(f, &a, &labels, mw, opts, &mut rec);
    }
    if let Some(j) = &f.jacobi {
        let outer = rec.diagnostic;
        rec.diagnostic = true;
        if let Err(e) = run_jacobi(j, &mut rec) {
            rec.error("jacobi", e);
        }
        rec.diagnostic = outer;
    }
    report(rec, skipped)
}

fn run_case(f: &Fixture, a: &BHMatrix, labels: &[SectorLabel], case: &Case, opts: &RunOptions, tag: &str, rec: &mut Recorder) -> Result<()> {
    let p = case.prime;
    let nu = case.nu;
    let need_digits = case.sectors.iter().map(|s| s.digits.len() as u32).chain(case.padic.as_ref().map(|x| x.digits.len() as u32)).max();
    let floor = match (opts.precision, case.precision.or(need_digits)) {
        (Some(o), Some(c)) => Some(o.max(c).max(auto_precision(labels, p, nu))),
        (Some(o), None) => Some(o),
        (None, Some(c)) => Some(c.max(auto_precision(labels, p, nu))),
        (None, None) => None,
    };
    let prep = prepare(a, labels, p, nu, floor, opts.cache_dir.as_deref())?;
    let mut rs = prep.records;
    let q = BigInt::from(pow_p(p, nu));

    if case.exact {
        let ct = build_character_table(p)?;
        attach_exact(&mut rs, &ct)?;
        let mut mismatched = Vec::new();
        let mut compared = 0;
        for r in &rs {
            if let (Some(x), Some(y)) = (&r.alpha_exact, &r.alpha_padic) {
                compared += 1;
                if &x.to_padic(&ct, y.precision) != y {
                    mismatched.push(r.frac.iter().map(fmt_q).collect::<Vec<_>>().join(","));
                }
            }
        }
        let all = rs.iter().filter(|r| r.alpha_padic.is_some()).count();
        rec.push(
            format!("{tag} exact = p-adic"),
            mismatched.is_empty() && compared == all,
            format!("{compared}/{all} sectors agree to {} digits{}", prep.precision, if mismatched.is_empty() { String::new() } else { format!("; mismatch at {mismatched:?}") }),
        );
    }

    let st = supertrace(&rs, nu);
    if let Some(want) = &case.supertrace {
        let want = parse_int(want)?;
        match &st {
            Some(st) => {
                rec.eq(format!("{tag} supertrace"), st.lift.clone(), want);
                rec.eq(format!("{tag} supertrace rational"), st.rational, true);
            }
            None => rec.push(format!("{tag} supertrace"), false, "no eigenvalues"),
        }
    }
    if let Some(px) = &case.padic {
        match &st {
            Some(st) => {
                let d = st.value.digits();
                rec.eq(format!("{tag} supertrace digits"), d[..px.digits.len().min(d.len())].to_vec(), px.digits.clone());
                rec.eq(format!("{tag} supertrace rational"), st.rational, px.rational);
            }
            None => rec.push(format!("{tag} supertrace digits"), false, "no eigenvalues"),
        }
    }
    if let Some(part) = &case.partial {
        match &st {
            Some(st) => {
                rec.eq(format!("{tag} integral-age sum"), st.lift.clone(), parse_int(&part.value)?);
                rec.eq(format!("{tag} withheld sectors"), st.withheld, part.withheld);
            }
            None => rec.push(format!("{tag} integral-age sum"), false, "no eigenvalues"),
        }
    }
    for s in &case.sectors {
        let v: Vec<Q> = s.gamma_a_inv.iter().map(|x| parse_q(x)).collect::<Result<_>>()?;
        let hits: Vec<&EigenvalueRecord> = rs.iter().filter(|r| r.frac == v).collect();
        let name = format!("{tag} sector ({})", s.gamma_a_inv.join(", "));
        if hits.is_empty() {
            rec.push(name, false, "no such sector");
            continue;
        }
        let got: Vec<Vec<u64>> = hits
            .iter()
            .map(|r| r.alpha_padic.as_ref().map(|x| x.digits()[..s.digits.len()].to_vec()).unwrap_or_default())
            .collect();
        let ok = got.iter().all(|d| d == &s.digits);
        rec.push(name, ok, format!("{:?}{}", got[0], if ok { String::new() } else { format!(", expected {:?}", s.digits) }));
    }

    let wants_zeta = !case.factors.is_empty()
        || !case.divides.is_empty()
        || case.numerator.is_some()
        || case.denominator.is_some()
        || !case.orbit_powers.is_empty()
        || !case.point_counts.is_empty()
        || opts.properties;
    let z: Option<ZetaFunction> = if wants_zeta {
        match zeta(&rs, nu) {
            Ok(z) => Some(z),
            Err(e) => {
                rec.error(format!("{tag} zeta"), e);
                None
            }
        }
    } else {
        None
    };
    if let Some(z) = &z {
        for (k, fs) in &case.factors {
            let kk: u32 = k.parse().map_err(|_| Error::Usage(format!("degree {k}")))?;
            let got = z.factors.get(&kk).cloned().unwrap_or_else(|| vec![BigInt::one()]);
            let want = expand(fs, &q);
            let ok = got == want;
            rec.push(format!("{tag} P_{k}"), ok, if ok { format!("degree {}", got.len() - 1) } else { format!("got {}, expected {}", poly_str(&got), poly_str(&want)) });
        }
        for (k, fs) in &case.divides {
            let kk: u32 = k.parse().map_err(|_| Error::Usage(format!("degree {k}")))?;
            let got = z.factors.get(&kk).cloned().unwrap_or_else(|| vec![BigInt::one()]);
            let want = expand(fs, &q);
            let ok = divide(&got, &want).is_some();
            rec.push(format!("{tag} P_{k} divisible"), ok, format!("by {}", poly_str(&want)));
        }
        if let Some(fs) = &case.numerator {
            rec.eq(format!("{tag} numerator"), z.numerator(), expand(fs, &q));
        }
        if let Some(fs) = &case.denominator {
            rec.eq(format!("{tag} denominator"), z.denominator(), expand(fs, &q));
        }
        for (k, want) in &case.orbit_powers {
            let kk: u32 = k.parse().map_err(|_| Error::Usage(format!("degree {k}")))?;
            let mut seen: Vec<(Poly, usize)> = Vec::new();
            for f in z.orbit_factors.get(&kk).into_iter().flatten() {
                match seen.iter_mut().find(|(g, _)| g == f) {
                    Some((_, c)) => *c += 1,
                    None => seen.push((f.clone(), 1)),
                }
            }
            let mut got: Vec<usize> = seen.iter().map(|(_, c)| *c).collect();
            got.sort();
            let mut want = want.clone();
            want.sort();
            rec.eq(format!("{tag} P_{k} orbit multiplicities"), got, want);
        }
        if !case.point_counts.is_empty() {
            let want: Vec<BigInt> = case.point_counts.iter().map(|s| parse_int(s)).collect::<Result<_>>()?;
            rec.eq(format!("{tag} point counts"), z.point_counts(want.len()), want);
        }
        if opts.properties {
            let w = weil_check(a, &rs, z);
            rec.push(format!("{tag} weil"), w.ok(), format!("{w:?}"));
            let stable = prepare(a, labels, p, nu, Some(prep.precision + 2), opts.cache_dir.as_deref())
                .and_then(|x| Ok(zeta(&x.records, nu)?))
                .map(|z2| z2.factors == z.factors);
            match stable {
                Ok(ok) => rec.push(format!("{tag} stable at N+2"), ok, format!("N = {} -> {}", prep.precision, prep.precision + 2)),
                Err(e) => rec.error(format!("{tag} stable at N+2"), e),
            }
        }
    }
    if let Some(want) = &case.brute_force {
        let field = FiniteField::new(p, nu)?;
        let n = count_projective(a, &f.weights_for(a), &field)?;
        rec.eq(format!("{tag} brute force"), BigInt::from(n), parse_int(want)?);
    }
    Ok(())
}

fn run_mw(_f: &Fixture, a: &BHMatrix, labels: &[SectorLabel], mw: &MwExpect, opts: &RunOptions, rec: &mut Recorder) {
    for &p in &mw.tri_oracle {
        let res = (|| -> Result<(String, bool)> {
            let m = mw_point_count(a, p, mw.precision)?;
            let prep = prepare(a, labels, p, 1, None, opts.cache_dir.as_deref())?;
            let st = supertrace(&prep.records, 1).ok_or_else(|| Error::Usage("no eigenvalues".into()))?;
            let brute = count_projective(a, &a.integer_weights().0, &FiniteField::new(p, 1)?)?;
            let mwv = m.lift.map(BigInt::from);
            let ok = mwv.as_ref() == Some(&st.lift) && st.lift == BigInt::from(brute);
            Ok((format!("MW {mwv:?}, ST {}, brute force {brute}", st.lift), ok))
        })();
        match res {
            Ok((d, ok)) => rec.push(format!("p={p} tri-oracle"), ok, d),
            Err(e) => rec.error(format!("p={p} tri-oracle"), e),
        }
    }
    let Some(c) = &mw.cancellation else { return };
    let report = match cancellation_report(a, c.prime, mw.precision) {
        Ok(r) => r,
        Err(e) => return rec.error("cancellation", e),
    };
    rec.push(
        format!("p={} residual vanishes", c.prime),
        report.all_vanish() && report.residual.is_zero(),
        format!("{} pairs in {} classes", report.pair_count(), report.classes.len()),
    );
    if let Some(k) = c.interior_classes {
        rec.eq("interior classes", report.interior_classes, k);
    }
    if let Some(k) = c.frozen_classes {
        rec.eq("classes with frozen coordinates", report.classes.iter().filter(|x| !x.frozen.is_empty()).count(), k);
    }
    if !c.patterns.is_empty() {
        let mut got: Vec<Vec<String>> = report
            .classes
            .iter()
            .map(|cl| {
                let mut v: Vec<Option<Q>> = cl.fracs.iter().map(|x| (!x.is_integer()).then_some(*x)).collect();
                v.sort();
                v.into_iter().map(|x| x.map_or("*".to_string(), |x| fmt_q(&x))).collect()
            })
            .collect();
        got.sort();
        got.dedup();
        let mut want = c.patterns.clone();
        want.sort();
        rec.eq("class patterns", got, want);
    }
    for ce in &c.classes {
        let fracs: Vec<Q> = match ce.fracs.iter().map(|x| parse_q(x)).collect::<Result<_>>() {
            Ok(v) => v,
            Err(e) => {
                rec.error(&ce.table, e);
                continue;
            }
        };
        let frozen: Vec<usize> = ce.frozen.iter().map(|i| i - 1).collect();
        let name = format!("{} ({})", ce.table, ce.fracs.join(", "));
        let Some(cl) = report.find(&fracs, &frozen) else {
            rec.push(name, false, "class not found");
            continue;
        };
        if let Some(pv) = ce.pivot {
            rec.eq(format!("{name} pivot"), cl.pivot + 1, pv);
        }
        if let Some(k) = ce.pair_count {
            rec.eq(format!("{name} pairs"), cl.pairs.len(), k);
        }
        if !ce.pairs.is_empty() {
            let one = |s: &[usize]| s.iter().map(|i| i + 1).collect::<Vec<_>>();
            let mut got: Vec<(Vec<usize>, Vec<usize>)> = cl.pairs.iter().map(|x| (one(&x.left.subset), one(&x.right.subset))).collect();
            got.sort();
            let mut want = ce.pairs.clone();
            want.sort();
            rec.eq(format!("{name} subsets"), got, want);
        }
        if !ce.gammas.is_empty() {
            let mut got: Vec<(Vec<i64>, Vec<i64>)> = cl.pairs.iter().map(|x| (x.left.gamma.clone(), x.right.gamma.clone())).collect();
            got.sort();
            let mut want = ce.gammas.clone();
            want.sort();
            rec.eq(format!("{name} gammas"), got, want);
        }
        if !ce.labels.is_empty() {
            let rows: Vec<(String, String)> = cl.pairs.iter().map(|x| (x.left.label(), x.right.label())).collect();
            let missing: Vec<&(String, String)> = ce.labels.iter().filter(|l| !rows.contains(l)).collect();
            rec.push(format!("{name} labels"), missing.is_empty(), if missing.is_empty() { format!("{} rows", ce.labels.len()) } else { format!("missing {missing:?}") });
        }
        rec.push(format!("{name} cancels"), cl.pairs.iter().all(|x| x.vanishes), format!("{} pairs", cl.pairs.len()));
    }
}

fn run_jacobi(j: &JacobiExpect, rec: &mut Recorder) -> Result<()> {
    let ct = build_character_table(j.prime)?;
    let p = j.prime as f64;
    for e in &j.entries {
        let a: Vec<Q> = e.a.iter().map(|x| parse_q(x)).collect::<Result<_>>()?;
        let js = jacobi_sum(&a, &ct)?;
        let printed = parse_gaussian(&e.value, j.prime);
        let emb = js.embeddings();
        let name = format!("J({})", e.a.join(", "));
        let detail = |best: Option<(f64, f64)>| {
            let norm = emb.first().map(|(x, y)| x * x + y * y).unwrap_or(0.0);
            let pn = printed.map(|(x, y)| x * x + y * y);
            format!(
                "|J|^2 = {norm:.0} (p^2 = {:.0}); printed {} with norm {}; nearest embedding {}",
                p * p,
                e.value,
                pn.map_or("?".into(), |v| format!("{v:.0}")),
                best.map_or("-".into(), |(x, y)| format!("{x:.1}{:+.1}i", y))
            )
        };
        let best = printed.and_then(|(px, py)| {
            emb.iter().copied().min_by(|a, b| {
                let da = (a.0 - px).hypot(a.1 - py);
                let db = (b.0 - px).hypot(b.1 - py);
                da.total_cmp(&db)
            })
        });
        let ok = match (printed, best) {
            (Some((px, py)), Some((x, y))) => (x - px).hypot(y - py) < 0.5,
            _ => false,
        };
        rec.push(name, ok, detail(best));
    }
    Ok(())
}

fn parse_gaussian(s: &str, p: u64) -> Option<(f64, f64)> {
    let s = s.replace(' ', "");
    if s == "p" {
        return Some((p as f64, 0.0));
    }
    let body = s.strip_suffix('i')?;
    let cut = body.rfind(['+', '-']).filter(|&i| i > 0)?;
    let (re, im) = body.split_at(cut);
    Some((re.parse().ok()?, im.parse().ok()?))
}
