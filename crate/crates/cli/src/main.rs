use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use radial_sbp_cli::{build, config, dispatch, merge, CliError};

/// Summation-by-parts schemes for the radial wave system.
#[derive(Parser, Debug)]
#[command(name = "radial-sbp", version)]
struct Args {
    /// weights, verify, evolve, converge or probe.
    #[arg(value_name = "COMMAND")]
    positional: Option<String>,
    /// Plain-text key=value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    command: Option<String>,
    /// evans, sbp2, sbp4 (weights only), sbp41 or sbp42.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    p: Option<String>,
    /// Harmonic index; with --n gives p = 2l + n.
    #[arg(long)]
    l: Option<String>,
    /// Sphere dimension.
    #[arg(long)]
    n: Option<String>,
    /// staggered or centred.
    #[arg(long)]
    kind: Option<String>,
    /// Outer index; half-integer on staggered grids.
    #[arg(long = "M")]
    m: Option<String>,
    #[arg(long = "R")]
    r: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// max_dissipative, pi_derivative, psi_derivative or general.
    #[arg(long = "bc-variant")]
    bc: Option<String>,
    #[arg(long)]
    bc_rho: Option<String>,
    #[arg(long)]
    bc_sigma: Option<String>,
    #[arg(long)]
    bc_mu: Option<String>,
    #[arg(long)]
    bc_nu: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    tag: Option<String>,
    #[arg(long)]
    i_star: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    /// Any other config key, as KEY=VALUE.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Args {
    fn flags(self) -> Result<BTreeMap<String, String>, CliError> {
        let mut map = BTreeMap::new();
        let named = [
            ("command", self.command.or(self.positional)),
            ("method", self.method),
            ("p", self.p),
            ("l", self.l),
            ("n", self.n),
            ("kind", self.kind),
            ("M", self.m),
            ("R", self.r),
            ("lambda", self.lambda),
            ("bc", self.bc),
            ("bc_rho", self.bc_rho),
            ("bc_sigma", self.bc_sigma),
            ("bc_mu", self.bc_mu),
            ("bc_nu", self.bc_nu),
            ("out", self.out),
            ("tag", self.tag),
            ("i_star", self.i_star),
            ("t_end", self.t_end),
            ("levels", self.levels),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        }
        for s in &self.set {
            let extra = config::parse_text(s)?;
            map.extend(extra);
        }
        Ok(map)
    }
}

fn run(args: Args) -> Result<bool, CliError> {
    let file = match &args.config {
        Some(path) => config::parse_file(path)?,
        None => BTreeMap::new(),
    };
    let cfg = build(&merge(file, args.flags()?)?)?;
    let outcome = dispatch(&cfg)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    for path in &outcome.files {
        println!("wrote {}", path.display());
    }
    for f in &outcome.failures {
        eprintln!("FAIL {f}");
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
