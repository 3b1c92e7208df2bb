use bhzeta::cache;
use bhzeta::counting::{count_projective, estimate_ops, FiniteField};
use bhzeta::fixtures::{self, fmt_q, Fixture, RunOptions, DEFAULT_BUDGET, SLOW_PRIME};
use bhzeta::{Error, Result};
use bhzeta_core::charsum::build_character_table;
use bhzeta_core::matrix::BHMatrix;
use bhzeta_core::milnor::{euler_characteristic, hodge_numbers, sector_spectrum, SectorLabel};
use bhzeta_core::mw::{cancellation_report, mw_point_count};
use bhzeta_core::spectrum::{attach_exact, supertrace, weil_check, zeta, EigenvalueRecord, Poly};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bhzeta", version, about = "Orbifold zeta functions of Berglund-Hubsch hypersurfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every expectation stored in a fixture.
    Validate {
        #[command(flatten)]
        run: RunArgs,
        /// Also run the Weil checks and the N + 2 stability test.
        #[arg(long)]
        properties: bool,
    },
    /// Twisted sectors, bigrading and Hodge numbers.
    Spectrum(RunArgs),
    /// Supertraces ST_{p^nu} for nu = 1..=nu_max.
    Supertrace(RunArgs),
    /// Integer P_k, Euler characteristic and point counts.
    Zeta(RunArgs),
    /// Exhaustive projective point count.
    Count(RunArgs),
    /// Monsky-Washnitzer count, tri-oracle comparison and cancellation report.
    Mw(RunArgs),
    /// Serre pairing, functional equation, Hodge symmetry and root absolute values.
    Weil(RunArgs),
    /// List fixtures, or run them all with --run.
    Fixtures {
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        run: bool,
        #[arg(long)]
        allow_slow: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Fixture document.
    #[arg(long)]
    input: PathBuf,
    /// Defaults to the primes of the fixture's cases.
    #[arg(long)]
    prime: Option<u64>,
    /// Working precision; refused below the automatic one.
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long, default_value_t = 1)]
    nu_max: u32,
    #[arg(long, value_enum, default_value = "padic")]
    backend: Backend,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Permit p > 10^4 and counts above the operation budget.
    #[arg(long)]
    allow_slow: bool,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    max_ops: u128,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Backend {
    Padic,
    Exact,
    Both,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Table,
    Structured,
}

/// Exit status 1: a computed value disagrees with an expectation or another backend.
struct Mismatch;

type Outcome = std::result::Result<(), Mismatch>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Mismatch)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Validate { run, properties } => validate(&run, properties),
        Command::Spectrum(r) => spectrum(&r),
        Command::Supertrace(r) => per_prime(&r, supertraces),
        Command::Zeta(r) => per_prime(&r, zeta_cmd),
        Command::Count(r) => count(&r),
        Command::Mw(r) => mw(&r),
        Command::Weil(r) => per_prime(&r, weil),
        Command::Fixtures { dir, run, allow_slow, format } => list(dir, run, allow_slow, format),
    }
}

fn emit(format: Format, table: String, structured: Value) {
    match format {
        Format::Table => print!("{table}"),
        Format::Structured => println!("{}", serde_json::to_string_pretty(&structured).expect("json")),
    }
}

fn provenance(f: &Fixture) -> Value {
    json!({"id": f.id, "title": f.title, "citation": f.citation, "status": f.status})
}

fn primes(r: &RunArgs, f: &Fixture) -> Result<Vec<u64>> {
    let mut ps: Vec<u64> = match r.prime {
        Some(p) => vec![p],
        None => f.cases.iter().map(|c| c.prime).collect(),
    };
    ps.dedup();
    if ps.is_empty() {
        return Err(Error::Usage("the fixture has no cases; pass --prime".into()));
    }
    for &p in &ps {
        if p > SLOW_PRIME && !r.allow_slow {
            return Err(Error::Usage(format!("p = {p} exceeds {SLOW_PRIME}; pass --allow-slow")));
        }
    }
    Ok(ps)
}

struct Setup {
    fixture: Fixture,
    a: BHMatrix,
    labels: Vec<SectorLabel>,
}

fn setup(r: &RunArgs) -> Result<Setup> {
    let fixture = fixtures::load_path(&r.input)?;
    let a = fixture.bh()?;
    let g = fixture.group(&a)?;
    let labels = sector_spectrum(&a, &g)?.labels;
    Ok(Setup { fixture, a, labels })
}

/// Records at `p` for the chosen backend, with the precision actually used.
fn records(s: &Setup, r: &RunArgs, p: u64) -> Result<(Vec<EigenvalueRecord>, u32, u32, Outcome)> {
    let prep = fixtures::prepare(&s.a, &s.labels, p, r.nu_max, r.precision, cache::dir_from_env().as_deref())?;
    let mut rs = prep.records;
    let mut outcome = Ok(());
    if r.backend != Backend::Padic {
        let ct = build_character_table(p)?;
        attach_exact(&mut rs, &ct)?;
        for x in rs.iter_mut() {
            let (Some(e), Some(y)) = (&x.alpha_exact, &x.alpha_padic) else { continue };
            let image = e.to_padic(&ct, y.precision);
            if r.backend == Backend::Both && &image != y {
                eprintln!("backend mismatch at gamma A^-1 = ({})", fracs(&x.frac));
                outcome = Err(Mismatch);
            }
            x.alpha_padic = Some(image);
        }
    }
    Ok((rs, prep.precision, prep.auto, outcome))
}

fn fracs(v: &[bhzeta_core::matrix::Q]) -> String {
    v.iter().map(fmt_q).collect::<Vec<_>>().join(", ")
}

fn header(s: &Setup, r: &RunArgs, p: u64, n: u32, auto: u32) -> String {
    format!("# {} | {}\n# p = {p}, N = {n} (auto {auto}), nu_max = {}, backend = {}\n", s.fixture.id, s.fixture.citation, r.nu_max, backend_name(r.backend))
}

fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Padic => "padic",
        Backend::Exact => "exact",
        Backend::Both => "both",
    }
}

type PrimeCmd = fn(&Setup, &RunArgs, u64, &[EigenvalueRecord], u32, u32) -> Result<(String, Value, Outcome)>;

fn per_prime(r: &RunArgs, f: PrimeCmd) -> Result<Outcome> {
    let s = setup(r)?;
    let mut outcome = Ok(());
    let mut table = String::new();
    let mut runs = Vec::new();
    for p in primes(r, &s.fixture)? {
        let (rs, n, auto, backend) = records(&s, r, p)?;
        let (t, v, o) = f(&s, r, p, &rs, n, auto)?;
        table += &header(&s, r, p, n, auto);
        table += &t;
        runs.push(json!({"prime": p, "precision": n, "auto_precision": auto, "nu_max": r.nu_max, "backend": backend_name(r.backend), "result": v}));
        outcome = outcome.and(backend).and(o);
    }
    emit(r.format, table, json!({"fixture": provenance(&s.fixture), "runs": runs}));
    Ok(outcome)
}

fn validate(r: &RunArgs, properties: bool) -> Result<Outcome> {
    let f = fixtures::load_path(&r.input)?;
    let opts = RunOptions {
        allow_slow: r.allow_slow,
        budget: r.max_ops,
        cache_dir: cache::dir_from_env(),
        precision: r.precision,
        properties,
        primes: r.prime.map(|p| vec![p]),
    };
    let rep = fixtures::run(&f, &opts);
    emit(r.format, rep.render(), serde_json::to_value(&rep).expect("json"));
    Ok(if rep.passed() { Ok(()) } else { Err(Mismatch) })
}

fn spectrum(r: &RunArgs) -> Result<Outcome> {
    let s = setup(r)?;
    let mut t = format!("# {} | {}\n# {} sectors, chi = {}\n", s.fixture.id, s.fixture.citation, s.labels.len(), euler_characteristic(&s.labels));
    t += &format!("{:>4}  {:<32} {:<24} {:>6} {:>6}\n", "#", "gamma A^-1", "lambda", "s", "r");
    let mut rows = Vec::new();
    for (i, l) in s.labels.iter().enumerate() {
        let g = fracs(&(0..l.gamma.n()).map(|j| l.gamma.frac(j)).collect::<Vec<_>>());
        let lam = fracs(&(0..l.lambda.n()).map(|j| l.lambda.frac(j)).collect::<Vec<_>>());
        t += &format!("{:>4}  ({g:<30}) ({lam:<22}) {:>6} {:>6}\n", i + 1, fmt_q(&l.s), fmt_q(&l.r));
        rows.push(json!({"gamma": g, "lambda": lam, "s": fmt_q(&l.s), "r": fmt_q(&l.r)}));
    }
    let hodge: serde_json::Map<String, Value> = hodge_numbers(&s.labels).iter().map(|((a, b), c)| (fixtures::hodge_key(a, b), json!(c))).collect();
    t += "hodge numbers:";
    for (k, v) in &hodge {
        t += &format!(" h({k}) = {v}");
    }
    t += "\n";
    emit(r.format, t, json!({"fixture": provenance(&s.fixture), "chi": euler_characteristic(&s.labels), "sectors": rows, "hodge": hodge}));
    Ok(Ok(()))
}

fn supertraces(_: &Setup, r: &RunArgs, _p: u64, rs: &[EigenvalueRecord], _: u32, _: u32) -> Result<(String, Value, Outcome)> {
    let mut t = String::new();
    let mut v = Vec::new();
    for nu in 1..=r.nu_max {
        let Some(st) = supertrace(rs, nu) else {
            return Err(Error::Usage("every sector has fractional age; no eigenvalues to sum".into()));
        };
        let digits = st.value.digits();
        if st.rational {
            t += &format!("ST_(p^{nu}) = {}", st.lift);
        } else {
            t += &format!("ST_(p^{nu}) not an integer at this precision; p-adic digits {digits:?}");
        }
        if st.withheld > 0 {
            t += &format!(" ({} fractional-age sectors withheld)", st.withheld);
        }
        t += "\n";
        v.push(json!({"nu": nu, "rational": st.rational, "value": st.rational.then(|| st.lift.to_string()), "digits": digits, "withheld": st.withheld}));
    }
    Ok((t, json!(v), Ok(())))
}

/// Coefficients written as `c q^e` with `q^e` the largest power dividing them.
fn poly_string(p: &Poly, q: u64, sym: &str) -> String {
    let qq = BigInt::from(q);
    let zero = BigInt::from(0);
    let mut s = String::new();
    for (i, c) in p.iter().enumerate() {
        if c == &zero {
            continue;
        }
        let neg = c < &zero;
        let mut m = if neg { -c.clone() } else { c.clone() };
        let mut e = 0;
        while i > 0 && (&m % &qq) == zero {
            m /= &qq;
            e += 1;
        }
        s += match (s.is_empty(), neg) {
            (true, true) => "-",
            (true, false) => "",
            (false, true) => " - ",
            (false, false) => " + ",
        };
        let mut parts = Vec::new();
        if m != BigInt::from(1) || i == 0 {
            parts.push(m.to_string());
        }
        match e {
            0 => {}
            1 => parts.push(sym.to_string()),
            _ => parts.push(format!("{sym}^{e}")),
        }
        match i {
            0 => {}
            1 => parts.push("t".into()),
            _ => parts.push(format!("t^{i}")),
        }
        s += &parts.join(" ");
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

fn zeta_cmd(s: &Setup, r: &RunArgs, p: u64, rs: &[EigenvalueRecord], _: u32, _: u32) -> Result<(String, Value, Outcome)> {
    let mut t = String::new();
    let mut out = Vec::new();
    let mut outcome = Ok(());
    for nu in 1..=r.nu_max {
        let z = zeta(rs, nu)?;
        t += &format!("over F_(p^{nu}), q = {p}^{nu}: chi = {}\n", z.chi);
        let mut factors = serde_json::Map::new();
        for (k, poly) in &z.factors {
            let shown: Vec<String> = z
                .peeled(*k, rs)
                .iter()
                .map(|(f, e)| {
                    let f = poly_string(f, z.prime.pow(nu), if nu == 1 { "p" } else { "q" });
                    if *e == 1 {
                        format!("({f})")
                    } else {
                        format!("({f})^{e}")
                    }
                })
                .collect();
            t += &format!("  P_{k} = {}\n", shown.join(" "));
            factors.insert(k.to_string(), json!(poly.iter().map(|c| c.to_string()).collect::<Vec<_>>()));
        }
        let counts: Vec<String> = z.point_counts(3).iter().map(|c| c.to_string()).collect();
        t += &format!("  N_(q^m), m = 1, 2, 3: {}\n", counts.join(", "));
        let w = weil_check(&s.a, rs, &z);
        if !w.ok() {
            t += "  weil checks FAIL\n";
            outcome = Err(Mismatch);
        }
        out.push(json!({"nu": nu, "P": factors, "chi": z.chi, "counts": counts, "weil": weil_json(&w)}));
    }
    Ok((t, json!(out), outcome))
}

fn weil_json(w: &bhzeta_core::spectrum::WeilReport) -> Value {
    json!({
        "ok": w.ok(),
        "pairing_complete": w.pairing_complete,
        "pairing_violations": w.pairing_violations,
        "chi_records": w.chi_records,
        "chi_zeta": w.chi_zeta,
        "functional_equation_sign": w.functional_equation,
        "hodge_symmetric": w.hodge_symmetric,
        "riemann": w.riemann,
    })
}

fn weil(s: &Setup, r: &RunArgs, _p: u64, rs: &[EigenvalueRecord], _: u32, _: u32) -> Result<(String, Value, Outcome)> {
    let mut t = String::new();
    let mut out = Vec::new();
    let mut outcome = Ok(());
    for nu in 1..=r.nu_max {
        let z = zeta(rs, nu)?;
        let w = weil_check(&s.a, rs, &z);
        let yn = |b: bool| if b { "yes" } else { "NO" };
        t += &format!("nu = {nu}\n");
        t += &format!("  serre pairing complete     {}\n", yn(w.pairing_complete));
        t += &format!("  pairing violations         {}\n", w.pairing_violations.len());
        t += &format!("  chi (records / zeta)       {} / {}\n", w.chi_records, w.chi_zeta);
        t += &format!("  functional equation sign   {}\n", w.functional_equation.map_or("fails".into(), |x| x.to_string()));
        t += &format!("  hodge symmetric            {}\n", yn(w.hodge_symmetric));
        t += &format!("  |alpha| = p^(k/2)          {}\n", w.riemann.map_or("not run (use --backend exact)", yn));
        for v in &w.pairing_violations {
            t += &format!("    {v}\n");
        }
        if !w.ok() {
            outcome = Err(Mismatch);
        }
        out.push(json!({"nu": nu, "weil": weil_json(&w)}));
    }
    Ok((t, json!(out), outcome))
}

fn count(r: &RunArgs) -> Result<Outcome> {
    let s = setup(r)?;
    let weights = s.fixture.weights_for(&s.a);
    let mut t = format!("# {} | {}\n", s.fixture.id, s.fixture.citation);
    let mut runs = Vec::new();
    for p in primes(r, &s.fixture)? {
        for nu in 1..=r.nu_max {
            let field = FiniteField::new(p, nu)?;
            let ops = estimate_ops(&s.a, field.q);
            if ops > r.max_ops && !r.allow_slow {
                return Err(Error::BudgetExceeded { ops, budget: r.max_ops });
            }
            let n = count_projective(&s.a, &weights, &field)?;
            t += &format!("#X(F_{p}^{nu}) = {n}    ({ops} field operations)\n");
            runs.push(json!({"prime": p, "nu": nu, "count": n.to_string(), "ops": ops.to_string()}));
        }
    }
    emit(r.format, t, json!({"fixture": provenance(&s.fixture), "weights": weights, "runs": runs}));
    Ok(Ok(()))
}

fn mw(r: &RunArgs) -> Result<Outcome> {
    let s = setup(r)?;
    let precision = r.precision.or(s.fixture.mw.as_ref().map(|m| m.precision)).unwrap_or(6);
    let ps: Vec<u64> = match (r.prime, &s.fixture.mw) {
        (Some(p), _) => vec![p],
        (None, Some(m)) => m.tri_oracle.clone(),
        (None, None) => primes(r, &s.fixture)?,
    };
    let mut t = format!("# {} | {}\n# MW precision {precision}\n", s.fixture.id, s.fixture.citation);
    let mut runs = Vec::new();
    let mut outcome = Ok(());
    for p in ps {
        let m = mw_point_count(&s.a, p, precision)?;
        let prep = fixtures::prepare(&s.a, &s.labels, p, 1, None, cache::dir_from_env().as_deref())?;
        let st = supertrace(&prep.records, 1).ok_or_else(|| Error::Usage("every sector has fractional age; no eigenvalues to sum".into()))?;
        let brute = count_projective(&s.a, &s.fixture.weights_for(&s.a), &FiniteField::new(p, 1)?)?;
        let mwv = m.lift.as_ref().map(|x| BigInt::from(x.clone()));
        let agree = mwv.as_ref() == Some(&st.lift) && st.lift == BigInt::from(brute);
        if !agree {
            outcome = Err(Mismatch);
        }
        t += &format!(
            "p = {p}: MW {}, ST {}, brute force {brute}: {}\n",
            mwv.as_ref().map_or("uncertified".into(), |x| x.to_string()),
            st.lift,
            if agree { "agree" } else { "DISAGREE" }
        );
        let rep = cancellation_report(&s.a, p, precision)?;
        if !(rep.all_vanish() && rep.residual.is_zero()) {
            outcome = Err(Mismatch);
        }
        if r.prime.is_some() {
            t += &rep.render();
        }
        runs.push(json!({
            "prime": p,
            "mw": mwv.map(|x| x.to_string()),
            "supertrace": st.lift.to_string(),
            "brute_force": brute.to_string(),
            "agree": agree,
            "classes": rep.classes.len(),
            "pairs": rep.pair_count(),
            "residual_vanishes": rep.residual.is_zero(),
        }));
    }
    emit(r.format, t, json!({"fixture": provenance(&s.fixture), "precision": precision, "runs": runs}));
    Ok(outcome)
}

fn list(dir: Option<PathBuf>, run: bool, allow_slow: bool, format: Format) -> Result<Outcome> {
    let dir = dir.unwrap_or_else(fixtures::fixtures_dir);
    let mut t = String::new();
    let mut rows = Vec::new();
    let mut outcome = Ok(());
    for id in fixtures::list(&dir)? {
        let f = fixtures::load_from(&dir, &id)?;
        let speed = f.speed(DEFAULT_BUDGET);
        let mut row = json!({"id": id, "status": f.status, "speed": speed, "citation": f.citation});
        if run {
            let rep = fixtures::run(&f, &RunOptions { allow_slow, ..Default::default() });
            if !rep.passed() {
                outcome = Err(Mismatch);
            }
            t += &rep.render();
            row["passed"] = json!(rep.passed());
            row["skipped"] = json!(rep.skipped);
        } else {
            t += &format!("{id:<28} {:<10} {:<5} {}\n", json!(f.status).as_str().unwrap_or(""), json!(speed).as_str().unwrap_or(""), f.citation);
        }
        rows.push(row);
    }
    emit(format, t, json!({"fixtures": rows}));
    Ok(outcome)
}
