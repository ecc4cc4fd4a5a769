//! `hyperstar`: sample random k-uniform hypergraphs, run the collision
//! census, evaluate exact expectation oracles and limit laws, export
//! star-dependent matrices, verify the spectral split, and run seeded
//! Monte Carlo experiments.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;

use hyperstar_core::collisions::{
    build_partition, census, expected_triples_exact, expected_xr_exact, limit_parameters,
};
use hyperstar_core::hypergraph::Hypergraph;
use hyperstar_core::montecarlo::{run_experiment, run_histograms, ExperimentPlan};
use hyperstar_core::sampler::{edge_probability, RegimeSpec, SampleConfig};
use hyperstar_core::spectral::spectral_split_check;
use hyperstar_core::star_matrix::{build_matrix, quotient, Kernel};

const VERSION: &str = env!("CARGO_PKG_VERSION");

const USAGE: &str = "\
hyperstar <command> [flags]

commands:
  sample      --n N --k K --regime R [--seed S] [--out FILE.hg]
  census      FILE.hg [--json|--csv]
  expect      --n N --k K (--p P | --regime R) --r R
  limits      --k K --regime R
  matrix      FILE.hg --kernel NAME [--quotient] [--out FILE.csv]
  check       FILE.hg --kernel NAME [--tol T]
  experiment  (--plan PLAN.json | --n N[,N..] --k K --regime R --trials T)
              [--seed S] [--r-max R] [--pmf-cap C] [--collect-spectral]
              [--workers W] [--out FILE.json] [--hist-csv PREFIX]

regimes: p=<float> | lambda=<float> | log+c=<float> | halfloglog+w=<float>
kernels: codegree | banerjee | laplacian | randomwalk
env: HYPERSTAR_SEED overrides the default seed (0) when --seed is absent.";

enum CliError {
    Usage(String),
    Domain(String),
}

impl From<hyperstar_core::Error> for CliError {
    fn from(e: hyperstar_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}\n\n{USAGE}");
            ExitCode::from(2)
        }
    }
}

fn run(args: &[String]) -> CliResult {
    let Some(command) = args.first() else {
        return Err(CliError::Usage("missing command".into()));
    };
    let rest = &args[1..];
    match command.as_str() {
        "sample" => cmd_sample(rest),
        "census" => cmd_census(rest),
        "expect" => cmd_expect(rest),
        "limits" => cmd_limits(rest),
        "matrix" => cmd_matrix(rest),
        "check" => cmd_check(rest),
        "experiment" => cmd_experiment(rest),
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::Usage(format!("unknown command `{other}`"))),
    }
}

/// Parsed flags: `--name value` pairs, bare `--switch`es, positionals.
struct Flags {
    positional: Vec<String>,
    values: BTreeMap<String, String>,
    switches: BTreeSet<String>,
}

fn parse_flags(args: &[String], value_flags: &[&str], switch_flags: &[&str]) -> Result<Flags, CliError> {
    let mut flags = Flags {
        positional: Vec::new(),
        values: BTreeMap::new(),
        switches: BTreeSet::new(),
    };
    let mut it = args.iter().peekable();
    while let Some(arg) = it.next() {
        if let Some(name) = arg.strip_prefix("--") {
            if switch_flags.contains(&name) {
                flags.switches.insert(name.to_string());
            } else if value_flags.contains(&name) {
                let value = it
                    .next()
                    .ok_or_else(|| CliError::Usage(format!("flag --{name} needs a value")))?;
                flags.values.insert(name.to_string(), value.clone());
            } else {
                return Err(CliError::Usage(format!("unknown flag --{name}")));
            }
        } else {
            flags.positional.push(arg.clone());
        }
    }
    Ok(flags)
}

impl Flags {
    fn required(&self, name: &str) -> Result<&str, CliError> {
        self.values
            .get(name)
            .map(|s| s.as_str())
            .ok_or_else(|| CliError::Usage(format!("missing required flag --{name}")))
    }

    fn parse<T: std::str::FromStr>(&self, name: &str) -> Result<T, CliError> {
        let raw = self.required(name)?;
        raw.parse()
            .map_err(|_| CliError::Usage(format!("invalid value `{raw}` for --{name}")))
    }

    fn parse_opt<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, CliError> {
        match self.values.get(name) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("invalid value `{raw}` for --{name}"))),
        }
    }

    fn single_positional(&self, what: &str) -> Result<&str, CliError> {
        match self.positional.as_slice() {
            [one] => Ok(one),
            [] => Err(CliError::Usage(format!("missing {what}"))),
            _ => Err(CliError::Usage(format!("expected exactly one {what}"))),
        }
    }
}

fn parse_regime(raw: &str) -> Result<RegimeSpec, CliError> {
    raw.parse::<RegimeSpec>().map_err(|e| CliError::Usage(e.to_string()))
}

fn default_seed(flags: &Flags) -> Result<u64, CliError> {
    if let Some(seed) = flags.parse_opt::<u64>("seed")? {
        return Ok(seed);
    }
    match std::env::var("HYPERSTAR_SEED") {
        Ok(raw) => raw
            .parse()
            .map_err(|_| CliError::Usage(format!("HYPERSTAR_SEED `{raw}` is not a u64"))),
        Err(_) => Ok(0),
    }
}

fn load_hypergraph(path: &str) -> Result<Hypergraph, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(Hypergraph::parse_hg(&text)?)
}

fn write_or_stdout(out: Option<&String>, content: &str) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_sample(args: &[String]) -> CliResult {
    let flags = parse_flags(args, &["n", "k", "regime", "seed", "out"], &[])?;
    let n: u32 = flags.parse("n")?;
    let k: u32 = flags.parse("k")?;
    let regime = parse_regime(flags.required("regime")?)?;
    let seed = default_seed(&flags)?;
    let p = edge_probability(&regime, n, k)?;
    let lambda = regime.lambda(n, k)?;
    let h = hyperstar_core::sampler::sample(&SampleConfig { n, k, seed }, &regime)?;
    if let Some(path) = flags.values.get("out") {
        std::fs::write(path, h.serialize_hg())?;
    }
    println!(
        "{}",
        serde_json::json!({
            "version": VERSION,
            "n": n,
            "k": k,
            "m": h.m(),
            "p": p,
            "lambda": lambda,
            "seed": seed,
        })
    );
    Ok(())
}

fn census_csv(c: &hyperstar_core::collisions::CollisionCensus) -> String {
    let mut out = String::from("stat,value\n");
    out.push_str(&format!("n,{}\n", c.n));
    out.push_str(&format!("k,{}\n", c.k));
    out.push_str(&format!("m,{}\n", c.m));
    out.push_str(&format!("I_n,{}\n", c.isolated));
    out.push_str(&format!("X0,{}\n", c.x0));
    for (r, count) in &c.x {
        out.push_str(&format!("X{r},{count}\n"));
    }
    for (size, count) in &c.u {
        out.push_str(&format!("U{size},{count}\n"));
    }
    out.push_str(&format!("Y,{}\n", c.y));
    out.push_str(&format!("dim_loc,{}\n", c.dim_loc));
    out
}

fn cmd_census(args: &[String]) -> CliResult {
    let flags = parse_flags(args, &[], &["json", "csv"])?;
    if flags.switches.contains("json") && flags.switches.contains("csv") {
        return Err(CliError::Usage("--json and --csv are mutually exclusive".into()));
    }
    let h = load_hypergraph(flags.single_positional("input .hg file")?)?;
    let c = census(&h);
    if flags.switches.contains("csv") {
        print!("{}", census_csv(&c));
    } else {
        let mut value = serde_json::to_value(&c).expect("census serializes");
        value["version"] = serde_json::json!(VERSION);
        println!("{}", serde_json::to_string_pretty(&value).expect("census serializes"));
    }
    Ok(())
}

fn cmd_expect(args: &[String]) -> CliResult {
    let flags = parse_flags(args, &["n", "k", "p", "regime", "r"], &[])?;
    let n: u32 = flags.parse("n")?;
    let k: u32 = flags.parse("k")?;
    let r: u32 = flags.parse("r")?;
    let (p, lambda) = match (flags.values.get("p"), flags.values.get("regime")) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("--p and --regime are mutually exclusive".into()))
        }
        (Some(_), None) => {
            let p: f64 = flags.parse("p")?;
            let regime = RegimeSpec::FixedP(p);
            let p = edge_probability(&regime, n, k)?;
            (p, regime.lambda(n, k)?)
        }
        (None, Some(raw)) => {
            let regime = parse_regime(raw)?;
            (edge_probability(&regime, n, k)?, regime.lambda(n, k)?)
        }
        (None, None) => return Err(CliError::Usage("need --p or --regime".into())),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "version": VERSION,
            "n": n,
            "k": k,
            "p": p,
            "lambda": lambda,
            "r": r,
            "expected_xr_exact": expected_xr_exact(n, k, p, r),
            "expected_xr_asymptotic": hyperstar_core::collisions::expected_xr_asymptotic(n, k, lambda, r),
            "expected_triples_exact": expected_triples_exact(n, k, p),
        }))
        .expect("json")
    );
    Ok(())
}

fn cmd_limits(args: &[String]) -> CliResult {
    let flags = parse_flags(args, &["k", "regime"], &[])?;
    let k: u32 = flags.parse("k")?;
    let regime = parse_regime(flags.required("regime")?)?;
    let law = limit_parameters(&regime, k)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "version": VERSION,
            "k": k,
            "regime": regime.to_string(),
            "limit": law,
        }))
        .expect("json")
    );
    Ok(())
}

fn parse_kernel(flags: &Flags) -> Result<Kernel, CliError> {
    flags
        .required("kernel")?
        .parse::<Kernel>()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn cmd_matrix(args: &[String]) -> CliResult {
    let flags = parse_flags(args, &["kernel", "out"], &["quotient"])?;
    let h = load_hypergraph(flags.single_positional("input .hg file")?)?;
    let kernel = parse_kernel(&flags)?;
    let m = build_matrix(&h, &kernel)?;
    let csv = if flags.switches.contains("quotient") {
        let contraction = quotient(&m, &build_partition(&h))?;
        contraction.to_csv()
    } else {
        m.matrix().to_csv()
    };
    write_or_stdout(flags.values.get("out"), &csv)
}

fn cmd_check(args: &[String]) -> CliResult {
    let flags = parse_flags(args, &["kernel", "tol"], &[])?;
    let h = load_hypergraph(flags.single_positional("input .hg file")?)?;
    let kernel = parse_kernel(&flags)?;
    let tol: f64 = flags.parse_opt("tol")?.unwrap_or(1e-8);
    let report = spectral_split_check(&h, &kernel, tol)?;
    let c = census(&h);
    let partition = build_partition(&h);
    let x0_identity = c.x0 == c.isolated * c.isolated.saturating_sub(1) / 2;
    let dim_loc_identity = c.dim_loc == partition.dim_loc();
    let count_identity = report.spec_m.len()
        == report.spec_quotient.len() + report.unit_eigs.len()
        && partition.part_count() as u64 + partition.dim_loc() == h.n() as u64;
    let equitable = report.equitable_deviation == 0.0;
    let pass = report.matched && equitable && x0_identity && dim_loc_identity && count_identity;
    eprintln!(
        "spectral split [{}]: n={} dim_loc={} matched={} max_match_error={:.3e} \
         equitable_deviation={:.3e} integer_identities={}",
        report.kernel,
        report.n,
        report.dim_loc,
        report.matched,
        report.max_match_error,
        report.equitable_deviation,
        x0_identity && dim_loc_identity && count_identity,
    );
    let mut value = serde_json::to_value(&report).expect("report serializes");
    value["version"] = serde_json::json!(VERSION);
    value["pass"] = serde_json::json!(pass);
    println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    if pass {
        Ok(())
    } else {
        Err(CliError::Domain("spectral split check failed".into()))
    }
}

fn parse_n_list(raw: &str) -> Result<Vec<u32>, CliError> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Usage(format!("invalid n `{tok}`")))
        })
        .collect()
}

fn cmd_experiment(args: &[String]) -> CliResult {
    let flags = parse_flags(
        args,
        &[
            "plan", "n", "k", "regime", "trials", "seed", "r-max", "pmf-cap", "workers", "out",
            "hist-csv",
        ],
        &["collect-spectral"],
    )?;
    let plan: ExperimentPlan = if let Some(path) = flags.values.get("plan") {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Domain(format!("bad plan JSON: {e}")))?
    } else {
        ExperimentPlan {
            n_list: parse_n_list(flags.required("n")?)?,
            k: flags.parse("k")?,
            regime: parse_regime(flags.required("regime")?)?,
            trials: flags.parse("trials")?,
            master_seed: default_seed(&flags)?,
            collect_spectral: flags.switches.contains("collect-spectral"),
            r_max: flags.parse_opt("r-max")?.unwrap_or(4),
            pmf_cap: flags.parse_opt("pmf-cap")?.unwrap_or(64),
        }
    };
    let workers: usize = flags.parse_opt("workers")?.unwrap_or(1);
    if workers == 0 {
        return Err(CliError::Usage("--workers must be >= 1".into()));
    }
    let started = std::time::Instant::now();
    let summary = run_experiment(&plan, workers)?;
    // Wall time goes to stderr so results JSON stays a pure function of
    // the plan (byte-identical across worker counts).
    eprintln!(
        "experiment: {} n-values x {} trials in {:.2?} on {workers} worker(s)",
        plan.n_list.len(),
        plan.trials,
        started.elapsed()
    );
    if let Some(prefix) = flags.values.get("hist-csv") {
        for &n in &plan.n_list {
            for (stat, hist) in run_histograms(&plan, n, workers)? {
                std::fs::write(format!("{prefix}-n{n}-{stat}.csv"), hist.to_csv())?;
            }
        }
    }
    let json = summary.to_json() + "\n";
    write_or_stdout(flags.values.get("out"), &json)
}
