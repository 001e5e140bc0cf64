use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use iwahori_core::group_algebra::{compare_filtrations, AugmentationLadder, DEFAULT_GROUP_CAP};
use iwahori_core::verify::{default_quotient, smallest_admissible_prime};
use iwahori_core::{
    gk_bounds, run_verify, CartanType, Enveloping, Error, GradedLie, RingSpec, RootSystem,
    StructureConstants, VerifyOptions,
};

const CAP_VAR: &str = "IWAHORI_GROUP_CAP";

#[derive(Parser)]
#[command(name = "iwahori-gr", version, about = "Graded Lie algebras of pro-p Iwahori subgroups")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Root-system data.
    Roots {
        #[command(subcommand)]
        cmd: RootsCmd,
    },
    /// Run every check for one datum and print a JSON report.
    Verify {
        #[command(flatten)]
        datum: DatumArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grade bound for the commutative quotient, in units of 1/h (default 2h).
        #[arg(long)]
        grade_bound: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dimension bound against the flag-variety count.
    Gk {
        #[arg(long = "type")]
        ctype: String,
        #[arg(long, default_value_t = 1)]
        f: usize,
    },
    /// Write a table to a file.
    Export {
        what: ExportWhat,
        #[command(flatten)]
        datum: DatumArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum RootsCmd {
    Info { ctype: String },
}

#[derive(clap::Args)]
struct DatumArgs {
    #[arg(long = "type")]
    ctype: String,
    /// Defaults to the smallest prime above h + 1.
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, default_value_t = 1)]
    f: usize,
    #[arg(long = "N", default_value_t = 2)]
    n: u32,
    /// Dimension of the central torus.
    #[arg(long = "reductive", default_value_t = 0)]
    d_z: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportWhat {
    Brackets,
    Constants,
    Quotient,
    Filtration,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

struct Datum {
    ct: CartanType,
    rs: Arc<RootSystem>,
    p: u64,
    f: usize,
    n: u32,
    d_z: usize,
}

impl DatumArgs {
    fn resolve(&self) -> anyhow::Result<Datum> {
        let ct = CartanType::parse(&self.ctype)?;
        let rs = Arc::new(RootSystem::build(ct));
        let p = self.p.unwrap_or_else(|| smallest_admissible_prime(&rs));
        Ok(Datum { ct, rs, p, f: self.f, n: self.n, d_z: self.d_z })
    }
}

fn group_cap() -> anyhow::Result<usize> {
    match std::env::var(CAP_VAR) {
        Ok(v) => v.parse().with_context(|| format!("{CAP_VAR} must be a positive integer")),
        Err(_) => Ok(DEFAULT_GROUP_CAP),
    }
}

fn write_or_print(out: Option<&PathBuf>, body: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

fn reduced_lie(d: &Datum) -> anyhow::Result<GradedLie> {
    if !d.rs.check_admissible(d.p) {
        return Err(Error::InadmissiblePrime { p: d.p, bound: d.rs.coxeter_number() as u64 + 1 }.into());
    }
    let spec = RingSpec::new(d.p, d.f, d.n)?;
    let sc = Arc::new(StructureConstants::compute(d.rs.clone())?);
    Ok(GradedLie::new(sc, spec, d.d_z, true)?)
}

fn export(what: ExportWhat, d: &Datum, format: Format) -> anyhow::Result<String> {
    let pretty = |v: &serde_json::Value| serde_json::to_string_pretty(v).expect("json");
    Ok(match what {
        ExportWhat::Constants => {
            let sc = StructureConstants::compute(d.rs.clone())?;
            match format {
                Format::Json => pretty(&sc.to_json()),
                Format::Csv => sc.to_csv(),
            }
        }
        ExportWhat::Brackets => {
            if format == Format::Csv {
                bail!("brackets are exported as JSON only");
            }
            pretty(&reduced_lie(d)?.bracket_table_json())
        }
        ExportWhat::Quotient => {
            if format == Format::Csv {
                bail!("the quotient report is exported as JSON only");
            }
            let env = Enveloping::new(reduced_lie(d)?)?;
            let bound = 2 * d.rs.coxeter_number();
            let rep = env.commutative_quotient(bound)?;
            pretty(&json!({"quotient": rep, "relations": env.relations_json()}))
        }
        ExportWhat::Filtration => {
            if d.f != 1 {
                bail!("group-algebra models are implemented for f = 1");
            }
            let q = default_quotient(&d.rs, d.p, d.n, d.d_z, group_cap()?)?;
            let ladder = AugmentationLadder::compute(&q.group, None);
            match format {
                Format::Csv => ladder.to_csv(),
                Format::Json => {
                    let k = ladder.nilpotency_index().saturating_sub(1);
                    pretty(&serde_json::to_value(compare_filtrations(&q, &ladder, k)?)?)
                }
            }
        }
    })
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Roots { cmd: RootsCmd::Info { ctype } } => {
            let rs = RootSystem::from_label(&ctype)?;
            println!("{}", serde_json::to_string_pretty(&rs.to_json())?);
        }
        Cmd::Verify { datum, seed, grade_bound, out } => {
            let d = datum.resolve()?;
            let opts = VerifyOptions {
                seed,
                grade_bound_units: grade_bound,
                group_cap: group_cap()?,
                ..VerifyOptions::default()
            };
            let rep = run_verify(d.ct, d.p, d.f, d.n, d.d_z, &opts)?;
            for c in &rep.checks {
                eprintln!("{:<12} {} ({})", format!("{:?}", c.status).to_lowercase(), c.name, c.anchor);
            }
            write_or_print(out.as_ref(), &rep.to_json_string())?;
            if rep.any_fail() {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Gk { ctype, f } => {
            let s = gk_bounds(CartanType::parse(&ctype)?, f);
            println!("{}", serde_json::to_string_pretty(&s)?);
        }
        Cmd::Export { what, datum, format, out } => {
            let d = datum.resolve()?;
            let body = export(what, &d, format)?;
            std::fs::write(&out, body).with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let inadmissible = matches!(e.downcast_ref::<Error>(), Some(Error::InadmissiblePrime { .. }));
            ExitCode::from(if inadmissible { 2 } else { 1 })
        }
    }
}
