//! `knotcensus`: counts of genus-1 simple knots with Alexander polynomial
//! `m t^2 + (1 - 2m) t + m`, and the surrounding number-theoretic checks.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use knotcensus::census::{
    census, fit_csv, gauss_total, heuristic_fit, lattice_count_s_d, local_density, mertens_product,
    siegel_total, table_csv, table_json, CensusOptions, VERSION,
};
use knotcensus::clheuristics::{
    constrained_samples, empirical, gerth_comparison, limit_moment, moment, sample_quotients, total_variation,
    CLDistribution, FiniteAbelianGroup, Truncation,
};
use knotcensus::localize::{brute_force_localized_equivalent, knot_count, orbit_label};
use knotcensus::qform::{canonical, QuadForm};
use knotcensus::seifert::{
    alexander_polynomial, random_seifert, s_equivalence_witness, s_equivalent, seifert_report, seifert_to_form,
    SeifertMatrix,
};
use knotcensus::Error;

#[derive(Parser, Debug)]
#[command(name = "knotcensus", version, about = "Census of genus-1 simple knots via binary quadratic forms over Z[1/m]")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Number of knots with Alexander polynomial m t^2 + (1-2m) t + m, i.e.
    /// SL2(Z[1/m])-classes of forms of discriminant 1-4m, per content stratum.
    Count {
        #[arg(long, allow_hyphen_values = true)]
        m: i128,
    },
    /// Per-m knot counts T(m), h+(1-4m) and kernel orders over a range.
    Census(CensusArgs),
    /// Totals T(X) by stratum against X^{3/2}, X^{3/2}/log X and X log X.
    Fit {
        #[arg(long = "to")]
        to: u64,
        /// Comma-separated, strictly ascending.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
        #[command(flatten)]
        workers: Workers,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Solutions of ac = b(b+1) mod d and the local density rho(d).
    Density {
        #[arg(long)]
        d: u64,
    },
    /// Lattice points S_d(X) of the truncated fundamental domain with
    /// X <= ac - b'(b'+1) <= 2X divisible by d.
    Lattice {
        #[arg(long = "X")]
        x: u64,
        #[arg(long, default_value_t = 1)]
        d: u64,
    },
    /// The product over primes p < Z of (1 - rho(p)).
    Mertens {
        #[arg(long = "Z")]
        z: u64,
    },
    /// Gauss sum of h+(1-4m) over 0 < m <= X.
    Gauss {
        #[arg(long = "X")]
        x: u64,
    },
    /// Siegel sum of h+(D) r(D) over non-square 0 < D <= X, D = 1 mod 4.
    Siegel {
        #[arg(long = "X")]
        x: u64,
    },
    /// Cohen-Lenstra distributions mu^u.
    #[command(subcommand)]
    Cl(ClCommand),
    /// Seifert matrices, Alexander polynomials and S-equivalence.
    #[command(subcommand)]
    Seifert(SeifertCommand),
    /// Brute-force search for X in SL2(Z[1/m]) with q1 o X = q2.
    Oracle {
        #[arg(long, allow_hyphen_values = true)]
        m: i128,
        #[arg(long, allow_hyphen_values = true)]
        q1: QuadForm,
        #[arg(long, allow_hyphen_values = true)]
        q2: QuadForm,
        #[arg(long, default_value_t = 2)]
        k_max: u32,
        /// Defaults to 10 m^2.
        #[arg(long)]
        height_max: Option<i128>,
    },
}

#[derive(Args, Debug)]
struct Workers {
    /// Worker threads; 0 means one per core.
    #[arg(long, env = "KNOTCENSUS_WORKERS", default_value_t = 0)]
    workers: usize,
}

#[derive(Args, Debug)]
struct CensusArgs {
    #[arg(long, allow_hyphen_values = true)]
    from: i128,
    #[arg(long, allow_hyphen_values = true)]
    to: i128,
    #[command(flatten)]
    workers: Workers,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Skip the Cl+ structure column.
    #[arg(long)]
    no_structure: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Truncate {
    /// Truncation bound on |G|.
    #[arg(long = "B")]
    b: u64,
    /// Restrict to p-groups (the p-primary marginal).
    #[arg(long)]
    p: Option<u64>,
}

impl Truncate {
    fn truncation(&self) -> Truncation {
        match self.p {
            Some(p) => Truncation::Primary { p, bound: self.b },
            None => Truncation::Order(self.b),
        }
    }
}

#[derive(Subcommand, Debug)]
enum ClCommand {
    /// Quotients of G ~ mu^u by k uniform elements, against mu^(u+k).
    Sample {
        #[arg(long)]
        u: u32,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        trunc: Truncate,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Quotients by tuples with prod g_i^(n_i) = 1, against mu^(u+k-1).
    Constrained {
        #[arg(long)]
        u: u32,
        #[arg(long, value_delimiter = ',')]
        exponents: Vec<u64>,
        #[command(flatten)]
        trunc: Truncate,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Exact truncated expectation of #Sur(G, A) under mu^u.
    Moment {
        #[arg(long)]
        u: u32,
        /// Cyclic factors of A, e.g. 3 or 2,2.
        #[arg(long)]
        target: FiniteAbelianGroup,
        #[command(flatten)]
        trunc: Truncate,
    },
    /// The (group, weight) table of mu^u.
    Table {
        #[arg(long)]
        u: u32,
        #[command(flatten)]
        trunc: Truncate,
    },
    /// Mean of #Sur(Cl+(1-4p)^2, A) over primes p <= X with 1-4p squarefree.
    Gerth {
        #[arg(long = "X")]
        x: u64,
        #[arg(long)]
        target: FiniteAbelianGroup,
    },
}

#[derive(Subcommand, Debug)]
enum SeifertCommand {
    /// Alexander polynomial det(tP - P^T) / t^(dim ker P).
    Poly {
        /// Rows separated by ';', entries by ',' (e.g. "1,1;0,1").
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// The quadratic form (P + P^T)/2 with its class and SL2(Z[1/m])-orbit.
    Form {
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// S-equivalence of two 2x2 Seifert matrices of the same determinant.
    Sequiv {
        #[arg(long, allow_hyphen_values = true)]
        p1: String,
        #[arg(long, allow_hyphen_values = true)]
        p2: String,
        /// Also search for an explicit congruence P1 = X P2 X^T.
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = 2)]
        k_max: u32,
        #[arg(long)]
        height_max: Option<i128>,
    },
    /// Random 2x2 Seifert matrices of determinant m.
    Random {
        #[arg(long, allow_hyphen_values = true)]
        m: i128,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Capacity(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Capacity { .. } | Error::Overflow(_) => Failure::Capacity(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn meta(extra: Value) -> Value {
    let mut m = json!({ "version": VERSION });
    if let (Some(obj), Value::Object(more)) = (m.as_object_mut(), extra) {
        obj.extend(more);
    }
    m
}

fn report(meta_extra: Value, body: Value) -> String {
    let mut v = json!({ "meta": meta(meta_extra) });
    if let (Some(obj), Value::Object(more)) = (v.as_object_mut(), body) {
        obj.extend(more);
    }
    serde_json::to_string_pretty(&v).expect("json values serialize") + "\n"
}

fn parse_matrix(s: &str) -> Result<SeifertMatrix, Failure> {
    let rows: Result<Vec<Vec<i128>>, _> = if s.trim_start().starts_with('[') {
        serde_json::from_str(s).map_err(|e| e.to_string())
    } else {
        s.split(';')
            .map(|r| r.split(',').map(|x| x.trim().parse::<i128>().map_err(|e| e.to_string())).collect())
            .collect()
    };
    let rows = rows.map_err(|e| Failure::Usage(format!("cannot parse matrix {s:?}: {e}")))?;
    Ok(SeifertMatrix::new(rows)?)
}

fn distribution(u: u32, trunc: &Truncate) -> Result<CLDistribution, Failure> {
    Ok(CLDistribution::new(u, trunc.truncation())?)
}

fn sample_report(
    samples: &[FiniteAbelianGroup],
    reference: &CLDistribution,
    meta_extra: Value,
) -> String {
    let freq = empirical(samples);
    let mut rows: Vec<(&FiniteAbelianGroup, f64)> = freq.iter().map(|(g, f)| (g, *f)).collect();
    rows.sort_by(|a, b| (a.0.order(), a.0).cmp(&(b.0.order(), b.0)));
    let table: Vec<Value> = rows
        .iter()
        .map(|(g, f)| json!({ "group": g.to_string(), "empirical": f, "reference": reference.weight(g) }))
        .collect();
    report(
        meta_extra,
        json!({
            "total_variation": total_variation(&freq, reference),
            "reference_u": reference.u(),
            "frequencies": table,
        }),
    )
}

fn execute(cmd: Command) -> Result<String, Failure> {
    Ok(match cmd {
        Command::Count { m } => {
            let c = knot_count(m)?;
            report(json!({}), serde_json::to_value(&c).expect("count serializes"))
        }
        Command::Census(a) => {
            let start = Instant::now();
            let opts = CensusOptions {
                workers: a.workers.workers,
                structure: !a.no_structure,
            };
            let table = census(a.from, a.to, &opts)?;
            let text = match a.format {
                Format::Csv => table_csv(&table)?,
                Format::Json => table_json(&table, start.elapsed().as_secs_f64())? + "\n",
            };
            match a.out {
                Some(path) => {
                    std::fs::write(&path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                    String::new()
                }
                None => text,
            }
        }
        Command::Fit {
            to,
            checkpoints,
            workers,
            format,
        } => {
            let x = to as i128;
            let opts = CensusOptions {
                workers: workers.workers,
                structure: false,
            };
            let table = census(-x, x, &opts)?;
            let fit = heuristic_fit(&table, &checkpoints)?;
            match format {
                Format::Csv => fit_csv(&fit)?,
                Format::Json => report(json!({ "range": [-x, x] }), serde_json::to_value(&fit).expect("fit serializes")),
            }
        }
        Command::Density { d } => {
            let ld = local_density(d)?;
            report(json!({}), json!({ "d": ld.d, "count": ld.count, "rho": ld.rho.to_string() }))
        }
        Command::Lattice { x, d } => {
            let n = lattice_count_s_d(x, d)?;
            report(json!({}), json!({ "X": x, "d": d, "S_d": n }))
        }
        Command::Mertens { z } => {
            let v = mertens_product(z)?;
            report(json!({}), json!({ "Z": z, "product": v, "product_times_log_Z": v * (z as f64).ln() }))
        }
        Command::Gauss { x } => {
            let v = gauss_total(x)?;
            report(json!({}), json!({ "X": x, "total": v, "ratio_to_X^1.5": v as f64 / (x as f64).powf(1.5) }))
        }
        Command::Siegel { x } => {
            let v = siegel_total(x)?;
            report(json!({}), json!({ "X": x, "total": v, "ratio_to_X^1.5": v / (x as f64).powf(1.5) }))
        }
        Command::Cl(c) => execute_cl(c)?,
        Command::Seifert(s) => execute_seifert(s)?,
        Command::Oracle {
            m,
            q1,
            q2,
            k_max,
            height_max,
        } => {
            let h = height_max.unwrap_or(10 * m * m);
            let found = brute_force_localized_equivalent(&q1, &q2, m, k_max, h)?;
            let predicted = orbit_label(&q1, m)? == orbit_label(&q2, m)?;
            let witness = found.map(|w| json!({ "u": [[w.u.p, w.u.q], [w.u.r, w.u.s]], "k": w.k }));
            report(
                json!({ "k_max": k_max, "height_max": h }),
                json!({
                    "m": m,
                    "q1": q1,
                    "q2": q2,
                    "found": witness.is_some(),
                    "witness": witness,
                    "same_predicted_orbit": predicted,
                }),
            )
        }
    })
}

fn execute_cl(c: ClCommand) -> Result<String, Failure> {
    Ok(match c {
        ClCommand::Sample { u, k, trunc, n, seed } => {
            let dist = distribution(u, &trunc)?;
            let reference = distribution(u + k as u32, &trunc)?;
            let samples = sample_quotients(&dist, k, n, seed);
            sample_report(
                &samples,
                &reference,
                json!({ "u": u, "k": k, "truncation": trunc.truncation(), "n": n, "seed": seed }),
            )
        }
        ClCommand::Constrained {
            u,
            exponents,
            trunc,
            n,
            seed,
        } => {
            if exponents.is_empty() {
                return Err(Failure::Usage("--exponents needs at least one value".into()));
            }
            let dist = distribution(u, &trunc)?;
            let reference = distribution(u + exponents.len() as u32 - 1, &trunc)?;
            let samples = constrained_samples(&dist, &exponents, n, seed)?;
            sample_report(
                &samples,
                &reference,
                json!({ "u": u, "exponents": exponents, "truncation": trunc.truncation(), "n": n, "seed": seed }),
            )
        }
        ClCommand::Moment { u, target, trunc } => {
            let dist = distribution(u, &trunc)?;
            report(
                json!({ "u": u, "truncation": trunc.truncation() }),
                json!({
                    "target": target.to_string(),
                    "moment": moment(&dist, &target)?,
                    "limit": limit_moment(u, &target),
                }),
            )
        }
        ClCommand::Table { u, trunc } => distribution(u, &trunc)?.to_csv(),
        ClCommand::Gerth { x, target } => {
            let r = gerth_comparison(x, &target)?;
            report(json!({}), serde_json::to_value(&r).expect("report serializes"))
        }
    })
}

fn execute_seifert(s: SeifertCommand) -> Result<String, Failure> {
    Ok(match s {
        SeifertCommand::Poly { matrix } => {
            let p = parse_matrix(&matrix)?;
            let poly = alexander_polynomial(&p)?;
            report(
                json!({}),
                json!({ "P": p, "alexander": poly, "text": poly.to_string(), "symmetric": poly.is_symmetric() }),
            )
        }
        SeifertCommand::Form { matrix } => {
            let p = parse_matrix(&matrix)?;
            if p.size() == 2 {
                report(json!({}), serde_json::to_value(seifert_report(&p)?).expect("report serializes"))
            } else {
                return Err(Failure::Usage("seifert form needs a 2x2 matrix".into()));
            }
        }
        SeifertCommand::Sequiv {
            p1,
            p2,
            witness,
            k_max,
            height_max,
        } => {
            let (a, b) = (parse_matrix(&p1)?, parse_matrix(&p2)?);
            let equivalent = s_equivalent(&a, &b)?;
            let mut body = json!({
                "P1": a,
                "P2": b,
                "m": a.det()?,
                "forms": [seifert_to_form(&a)?, seifert_to_form(&b)?],
                "classes": [canonical(&seifert_to_form(&a)?)?, canonical(&seifert_to_form(&b)?)?],
                "s_equivalent": equivalent,
            });
            let mut meta_extra = json!({});
            if witness {
                let m = a.det()?;
                let h = height_max.unwrap_or(10 * m * m);
                let w = s_equivalence_witness(&a, &b, k_max, h)?;
                body["witness"] = w.map_or(Value::Null, |w| json!({ "u": [[w.u.p, w.u.q], [w.u.r, w.u.s]], "k": w.k }));
                meta_extra = json!({ "k_max": k_max, "height_max": h });
            }
            report(meta_extra, body)
        }
        SeifertCommand::Random { m, count, seed } => {
            let ps = random_seifert(m, count, seed)?;
            report(json!({ "m": m, "count": count, "seed": seed }), json!({ "matrices": ps }))
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) | Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Capacity(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
