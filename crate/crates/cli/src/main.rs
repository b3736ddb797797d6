//! `doubling`: covers, atlases, chains and doubling bounds from the command
//! line. Every subcommand prints one report; the exit status is 0 exactly
//! when all of its checks pass.

use std::fs;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use doubling_core::atlas::AtlasMode;
use doubling_core::experiments::{self, DoublingArgs, ExperimentConfig, ExperimentReport};
use doubling_core::polyalg;
use doubling_core::C64;

#[derive(Parser)]
#[command(name = "doubling", version, about = "Doubling coverings, chart atlases and doubling inequalities")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for every sampler.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sample count for sampled checks.
    #[arg(long, global = true, default_value_t = 2000)]
    samples: usize,
    /// Atlas construction mode.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Practical)]
    mode: Mode,
    /// Whitney parameter γ (> 1).
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Samples per chart during atlas construction.
    #[arg(long, global = true, default_value_t = 100)]
    chart_samples: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Report)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Faithful,
    Practical,
    Covering,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Report,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Whitney cover of the cube punctured at the given points.
    CoverCube {
        #[arg(long)]
        dim: usize,
        /// Points separated by `;`, coordinates by `,`.
        #[arg(long, default_value = "")]
        punctures: String,
        #[arg(long)]
        delta: f64,
    },
    /// Chart atlas of `{P = level}` inside the unit cube.
    CoverHypersurface(Surface),
    /// Chart chain and Kobayashi bound between two points.
    Chain {
        #[command(flatten)]
        surface: Surface,
        /// Start point as realified coordinates `x1,y1,x2,y2,…`.
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Doubling constants, κ lower bounds and polynomial bounds.
    DoublingBound {
        #[arg(long, default_value_t = 1)]
        p: u32,
        #[arg(long, default_value_t = 1.0)]
        a_p: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.25)]
        beta: f64,
        #[arg(long, default_value_t = 0.1)]
        rho: f64,
        /// Doubling constant for the κ lower bound.
        #[arg(long)]
        dc: Option<f64>,
        /// Polynomial bound inputs `n,d,d1,K,delta`.
        #[arg(long)]
        poly_bound: Option<String>,
    },
    /// Reproduce the example families.
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
    /// Quick self-check of every module.
    Verify,
}

#[derive(Args)]
struct Surface {
    /// Polynomial such as `z1*z2 - 0.01` or `(1+2i)z1^2 + z2`.
    #[arg(long)]
    poly: String,
    #[arg(long)]
    n: usize,
    /// Level `c` as `re` or `re,im`.
    #[arg(long, default_value = "0")]
    level: String,
    /// Gradient constant `K`; sampled when absent.
    #[arg(long)]
    k: Option<f64>,
    /// Distance from `Y` to the singular points; estimated when absent.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Experiment {
    Hyperbola {
        /// Comma-separated ε values.
        #[arg(long, default_value = "0.1,0.05,0.01")]
        eps: String,
    },
    Quadric {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value = "0.1,0.05,0.01")]
        eps: String,
    },
    Product {
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long, default_value = "0.1,0.05,0.025")]
        eps: String,
    },
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad number `{t}`")))
        .collect()
}

fn parse_points(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(parse_list).collect()
}

fn parse_level(s: &str) -> Result<C64> {
    let v = parse_list(s)?;
    match v.as_slice() {
        [re] => Ok(C64::new(*re, 0.0)),
        [re, im] => Ok(C64::new(*re, *im)),
        _ => bail!("level must be `re` or `re,im`"),
    }
}

fn parse_complex_point(s: &str, n: usize) -> Result<Vec<C64>> {
    let v = parse_list(s)?;
    if v.len() != 2 * n {
        bail!("expected {} realified coordinates, got {}", 2 * n, v.len());
    }
    Ok(polyalg::complexify(&v))
}

fn surface(s: &Surface, seed: u64) -> Result<experiments::Hypersurface> {
    let poly = polyalg::parse_poly(&s.poly, s.n)?;
    let level = parse_level(&s.level)?;
    Ok(experiments::prepare_hypersurface(poly, level, s.k, s.delta, seed)?)
}

fn run(cli: &Cli) -> Result<ExperimentReport> {
    let c = &cli.common;
    if let Some(g) = c.gamma {
        if !(g > 1.0) {
            bail!("--gamma must exceed 1, got {g}");
        }
    }
    let cfg = ExperimentConfig {
        seed: c.seed,
        samples: c.samples,
        mode: match c.mode {
            Mode::Faithful => AtlasMode::Faithful,
            Mode::Practical => AtlasMode::Practical,
            Mode::Covering => AtlasMode::Covering,
        },
        gamma: c.gamma,
        chart_samples: c.chart_samples,
    };
    let rep = match &cli.command {
        Command::CoverCube { dim, punctures, delta } => {
            let pts = parse_points(punctures)?;
            experiments::cover_cube(*dim, &pts, *delta, c.gamma.unwrap_or(2.0), &cfg)?
        }
        Command::CoverHypersurface(s) => experiments::cover_hypersurface(&surface(s, c.seed)?, &cfg)?,
        Command::Chain { surface: s, from, to } => {
            let h = surface(s, c.seed)?;
            let a = parse_complex_point(from, s.n)?;
            let b = parse_complex_point(to, s.n)?;
            experiments::chain_report(&h, &a, &b, &cfg)?
        }
        Command::DoublingBound { p, a_p, alpha, beta, rho, dc, poly_bound } => {
            let poly = match poly_bound {
                Some(t) => {
                    let v = parse_list(t)?;
                    if v.len() != 5 {
                        bail!("--poly-bound expects n,d,d1,K,delta");
                    }
                    Some((v[0] as usize, v[1] as u32, v[2] as u32, v[3], v[4]))
                }
                None => None,
            };
            let args = DoublingArgs { p: *p, a_p: *a_p, alpha: *alpha, beta: *beta, rho: *rho, poly, dc: *dc };
            experiments::doubling_bound(&args, c.seed)?
        }
        Command::Experiment { which } => match which {
            Experiment::Hyperbola { eps } => experiments::hyperbola(&parse_list(eps)?, &cfg)?,
            Experiment::Quadric { n, eps } => experiments::quadric(*n, &parse_list(eps)?, &cfg)?,
            Experiment::Product { d, eps } => experiments::product(*d, &parse_list(eps)?, &cfg)?,
        },
        Command::Verify => experiments::verify(&cfg)?,
    };
    Ok(rep)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rep = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let text = match cli.common.format {
        Format::Report => rep.to_json() + "\n",
        Format::Table => rep.to_table(),
    };
    match &cli.common.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("error: cannot write {path}: {e}");
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if rep.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
