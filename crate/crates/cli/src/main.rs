//! Command-line front end: every subcommand prints a machine-readable
//! report (JSON with a `schema` field, or CSV where row data makes sense)
//! and exits 0 on success, 1 on validation errors, 2 when a certified
//! invariant fails.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use medianosc::cube::{dyadic_family, CellBudget, Cube};
use medianosc::error::Error;
use medianosc::median::MedianParams;
use medianosc::points::PointSet;
use medianosc::porosity::PorosityConfig;
use medianosc::rational::{fmt_rat, parse_rat, Rat};
use medianosc::selftest::{run_selftest, SelftestScale};
use medianosc::weights::{MuConfig, PIndex, WeightParams};
use medianosc::StepFunction;

#[derive(Parser)]
#[command(name = "medianosc", version, about = "Exact median-oscillation analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for parallel sections (selftest only).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Output format for row-oriented reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Medians and the median difference of a step function on a cube.
    Median(MedianArgs),
    /// Sparse decomposition with a certified pointwise bound.
    Sparse(SparseArgs),
    /// Free-cube volumes, porosity ratios, and sandwich diagnostics.
    Porosity(PorosityArgs),
    /// Muckenhoupt products of a distance-power weight over a cube family.
    Weights(WeightsArgs),
    /// Bracketing estimate of the Muckenhoupt decay exponent.
    Mu(MuArgs),
    /// The alternating profile whose dyadic median differences vanish.
    Counterexample(CounterexampleArgs),
    /// Power-gap set scans and demonstrations.
    Gamma(GammaArgs),
    /// Deterministic invariant suite.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct MedianArgs {
    /// Path to a step-function JSON file.
    #[arg(long)]
    function: String,
    /// Cube as comma-separated values, corner coordinates then side.
    #[arg(long)]
    cube: String,
    #[arg(long)]
    s: String,
    #[arg(long)]
    t: String,
}

#[derive(Args)]
struct SparseArgs {
    #[arg(long)]
    function: String,
    /// Decomposition root; defaults to the function domain.
    #[arg(long)]
    cube: Option<String>,
    #[arg(long)]
    s: String,
    #[arg(long)]
    t: String,
    /// Build the chain-extended decomposition instead of the dyadic one.
    #[arg(long)]
    general: bool,
}

#[derive(Args)]
struct PorosityArgs {
    /// Point file: one point per line, whitespace-separated coordinates.
    #[arg(long)]
    points: Option<String>,
    /// Generator: zn:<dim> | point:<x,..> | subspace:<dim>:<subdim> |
    /// gamma:<g>:<bound>
    #[arg(long)]
    generator: Option<String>,
    /// Family: dyadic:<cube>:<depth> | centered:<point>:<lo>..<hi> | @file
    #[arg(long)]
    family: String,
    #[arg(long)]
    s: String,
    #[arg(long)]
    t: String,
    /// Inventory depth.
    #[arg(long, default_value_t = 6)]
    depth: u32,
    /// Classification threshold δ.
    #[arg(long, default_value = "1/16")]
    delta: String,
}

#[derive(Args)]
struct WeightsArgs {
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    generator: Option<String>,
    #[arg(long)]
    family: String,
    /// Weight exponent α of dist^{-α}.
    #[arg(long)]
    alpha: String,
    /// Muckenhoupt order: a rational ≥ 1 or `inf`.
    #[arg(long)]
    p: String,
    /// Quadrature depth for dimensions above one.
    #[arg(long, default_value_t = 8)]
    quad_depth: u32,
}

#[derive(Args)]
struct MuArgs {
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    generator: Option<String>,
    #[arg(long)]
    p: String,
    /// Length-scale index.
    #[arg(long, default_value = "1/2")]
    s: String,
    #[arg(long, default_value_t = -10, allow_negative_numbers = true)]
    scale_min: i32,
    #[arg(long, default_value_t = 10, allow_negative_numbers = true)]
    scale_max: i32,
}

#[derive(Args)]
struct CounterexampleArgs {
    #[arg(long, short = 'K')]
    k: u32,
    #[arg(long, default_value = "3/10")]
    s: String,
    #[arg(long, default_value = "9/20")]
    t: String,
}

#[derive(Args)]
struct GammaArgs {
    #[arg(long)]
    gamma: String,
    /// `porosity` runs the growth demonstration.
    #[arg(long)]
    demo: Option<String>,
    /// `good` scans anchored intervals against the predicted scale.
    #[arg(long)]
    scan: Option<String>,
    #[arg(long, default_value = "1/2")]
    s: String,
    #[arg(long, default_value_t = 10_000)]
    bound: u64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Emit (m, ratio) columns for plotting instead of the full report.
    #[arg(long)]
    plot_data: bool,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Random-suite sizes: quick or standard.
    #[arg(long, default_value = "standard")]
    scale: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn budget_from_env() -> CellBudget {
    match std::env::var("MEDIANOSC_CELL_BUDGET") {
        Ok(v) => match v.parse::<u64>() {
            Ok(n) if n > 0 => CellBudget(n),
            _ => CellBudget::default(),
        },
        Err(_) => CellBudget::default(),
    }
}

/// Cube text form: comma-separated rationals, corner coordinates then side.
fn parse_cube(text: &str) -> Result<Cube, Error> {
    let parts: Result<Vec<Rat>, Error> = text.split(',').map(parse_rat).collect();
    let mut parts = parts?;
    if parts.len() < 2 {
        return Err(Error::InvalidParams(format!("cube `{text}` needs corner and side")));
    }
    let side = parts.pop().expect("nonempty");
    Cube::new(parts, side)
}

fn parse_point(text: &str) -> Result<Vec<Rat>, Error> {
    text.split(',').map(parse_rat).collect()
}

fn parse_generator(text: &str) -> Result<PointSet, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["zn", dim] => {
            let d: usize = dim
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad dimension `{dim}`")))?;
            PointSet::lattice(d)
        }
        ["point", coords] => PointSet::single_point(parse_point(coords)?),
        ["subspace", dim, sub] => {
            let d: usize = dim
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad dimension `{dim}`")))?;
            let k: usize = sub
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad dimension `{sub}`")))?;
            PointSet::subspace(d, k)
        }
        ["gamma", g, bound] => {
            let gamma = parse_rat(g)?;
            let b: u64 = bound
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad bound `{bound}`")))?;
            PointSet::power_gamma(gamma, b, false)
        }
        _ => Err(Error::InvalidParams(format!(
            "unknown generator `{text}` (try zn:, point:, subspace:, gamma:)"
        ))),
    }
}

fn load_set(points: &Option<String>, generator: &Option<String>) -> Result<PointSet, Error> {
    match (points, generator) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidParams(format!("cannot read {path}: {e}")))?;
            PointSet::from_point_lines(&text)
        }
        (None, Some(spec)) => parse_generator(spec),
        _ => Err(Error::InvalidParams("give exactly one of --points or --generator".into())),
    }
}

/// Family text form: `dyadic:<cube>:<depth>`, `centered:<point>:<lo>..<hi>`,
/// or `@path` with one cube per line.
fn parse_family(text: &str, budget: CellBudget) -> Result<Vec<Cube>, Error> {
    if let Some(path) = text.strip_prefix('@') {
        let body = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParams(format!("cannot read {path}: {e}")))?;
        return body
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(parse_cube)
            .collect();
    }
    if let Some(rest) = text.strip_prefix("dyadic:") {
        let (cube_text, depth_text) = rest
            .rsplit_once(':')
            .ok_or_else(|| Error::InvalidParams(format!("bad family `{text}`")))?;
        let root = parse_cube(cube_text)?;
        let depth: u32 = depth_text
            .parse()
            .map_err(|_| Error::InvalidParams(format!("bad depth `{depth_text}`")))?;
        return dyadic_family(&root, depth, budget);
    }
    if let Some(rest) = text.strip_prefix("centered:") {
        let (point_text, scales) = rest
            .rsplit_once(':')
            .ok_or_else(|| Error::InvalidParams(format!("bad family `{text}`")))?;
        let center = parse_point(point_text)?;
        let (lo, hi) = scales
            .split_once("..")
            .ok_or_else(|| Error::InvalidParams(format!("bad scale range `{scales}`")))?;
        let lo: i32 = lo
            .parse()
            .map_err(|_| Error::InvalidParams(format!("bad scale `{lo}`")))?;
        let hi: i32 = hi
            .parse()
            .map_err(|_| Error::InvalidParams(format!("bad scale `{hi}`")))?;
        if lo > hi {
            return Err(Error::InvalidParams("empty scale range".into()));
        }
        let mut out = Vec::new();
        for k in lo..=hi {
            let half = medianosc::rational::pow2(k);
            let corner: Vec<Rat> = center.iter().map(|c| c - &half).collect();
            let side = &half * Rat::from_integer(2.into());
            out.push(Cube::new(corner, side)?);
        }
        return Ok(out);
    }
    Err(Error::InvalidParams(format!(
        "unknown family `{text}` (try dyadic:, centered:, or @file)"
    )))
}

fn params(s: &str, t: &str) -> Result<MedianParams, Error> {
    MedianParams::new(parse_rat(s)?, parse_rat(t)?)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let budget = budget_from_env();
    match cli.command {
        Command::Median(a) => {
            let text = std::fs::read_to_string(&a.function)
                .map_err(|e| Error::InvalidParams(format!("cannot read {}: {e}", a.function)))?;
            let f = StepFunction::from_json(&text, budget)?;
            let q = parse_cube(&a.cube)?;
            let p = params(&a.s, &a.t)?;
            let (low, high) = medianosc::median::median_pair(&f, &q, &p)?;
            let out = json!({
                "schema": 1,
                "cube": q.describe(),
                "s": fmt_rat(p.s()),
                "t": fmt_rat(p.t()),
                "median_low": fmt_rat(&low),
                "median_high": fmt_rat(&high),
                "difference": fmt_rat(&(&high - &low)),
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Sparse(a) => {
            let text = std::fs::read_to_string(&a.function)
                .map_err(|e| Error::InvalidParams(format!("cannot read {}: {e}", a.function)))?;
            let f = StepFunction::from_json(&text, budget)?;
            let root = match &a.cube {
                Some(c) => parse_cube(c)?,
                None => f.root().clone(),
            };
            let p = params(&a.s, &a.t)?;
            let (family, report) = if a.general {
                medianosc::sparse::build_general_decomposition(&f, &root, &p)?
            } else {
                medianosc::sparse::build_dyadic_decomposition(&f, &root, &p)?
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&family.to_report_json(Some(&report))).expect("json")
            );
            if !report.holds {
                eprintln!("invariant violation: sparse domination bound failed at cell {}", report.worst_cell);
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Porosity(a) => {
            let set = load_set(&a.points, &a.generator)?;
            let family = parse_family(&a.family, budget)?;
            let p = params(&a.s, &a.t)?;
            let mut cfg = PorosityConfig::new(a.depth);
            cfg.delta = parse_rat(&a.delta)?;
            cfg.budget = budget;
            let report = medianosc::porosity::porosity_report(&set, &family, &p, &cfg)?;
            match cli.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report.to_json()).expect("json")
                ),
                Format::Csv => print!("{}", report.to_csv()),
            }
            let sandwich_broken = report.rows.iter().any(|r| {
                r.sandwich_lower_ok == Some(false) || r.sandwich_upper_ok == Some(false)
            });
            if sandwich_broken {
                eprintln!("invariant violation: distance-median sandwich failed");
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Weights(a) => {
            let set = load_set(&a.points, &a.generator)?;
            let family = parse_family(&a.family, budget)?;
            let w = WeightParams::new(parse_rat(&a.alpha)?, PIndex::parse(&a.p)?)?;
            match medianosc::weights::muckenhoupt_constant(&set, &w, &family, a.quad_depth, budget)
            {
                Ok(report) => {
                    match cli.format {
                        Format::Json => println!(
                            "{}",
                            serde_json::to_string_pretty(&report.to_json()).expect("json")
                        ),
                        Format::Csv => print!("{}", report.to_csv()),
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(Error::Divergence { cube, exponent }) => {
                    // divergence is a finding about the weight, not a failure
                    let out = json!({
                        "schema": 1,
                        "divergence": { "cube": cube, "exponent": exponent },
                    });
                    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => Err(e),
            }
        }
        Command::Mu(a) => {
            let set = load_set(&a.points, &a.generator)?;
            let p = PIndex::parse(&a.p)?;
            let cfg = MuConfig {
                s: parse_rat(&a.s)?,
                scale_min: a.scale_min,
                scale_max: a.scale_max,
                ..MuConfig::default()
            };
            let est = medianosc::weights::mu_exponent_estimate(&set, &p, &cfg)?;
            println!("{}", serde_json::to_string_pretty(&est.to_json()).expect("json"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Counterexample(a) => {
            let f = medianosc::constructions::haar_counterexample(a.k)?;
            let p = params(&a.s, &a.t)?;
            let family = dyadic_family(f.root(), a.k + 2, budget)?;
            let seminorm = medianosc::median::median_seminorm(&f, &family, &p)?;
            let wide = MedianParams::new(parse_rat("1/8")?, parse_rat("7/8")?)?;
            let pairs: Vec<serde_json::Value> = (0..(1i64 << (a.k - 1)))
                .map(|m| {
                    let q = Cube::interval(
                        Rat::from_integer((2 * m).into()),
                        Rat::from_integer(2.into()),
                    )
                    .expect("pair interval");
                    let d = medianosc::median::median_difference(&f, &q, &wide)
                        .expect("pair difference");
                    json!({"m": m, "difference": fmt_rat(&d)})
                })
                .collect();
            let out = json!({
                "schema": 1,
                "k": a.k,
                "s": fmt_rat(p.s()),
                "t": fmt_rat(p.t()),
                "dyadic_seminorm": fmt_rat(&seminorm),
                "pair_differences_at_1/8_7/8": pairs,
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
            if !seminorm.is_integer() || fmt_rat(&seminorm) != "0" {
                eprintln!("invariant violation: narrow-band dyadic seminorm must vanish");
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gamma(a) => {
            let gamma = parse_rat(&a.gamma)?;
            match (a.demo.as_deref(), a.scan.as_deref()) {
                (Some("porosity"), None) => {
                    let cfg = medianosc::constructions::GammaDemoConfig {
                        bound: a.bound,
                        sample_count: a.samples,
                        seed: a.seed,
                        ..medianosc::constructions::GammaDemoConfig::default()
                    };
                    let report = medianosc::constructions::gamma_porosity_demo(&gamma, &cfg)?;
                    if a.plot_data {
                        print!("{}", report.plot_data());
                    } else {
                        println!(
                            "{}",
                            serde_json::to_string_pretty(&report.to_json()).expect("json")
                        );
                    }
                    Ok(ExitCode::SUCCESS)
                }
                (None, Some("good")) => {
                    let s = parse_rat(&a.s)?;
                    let report = medianosc::constructions::good_interval_scan(
                        &gamma, &s, a.bound, a.count,
                    )?;
                    match cli.format {
                        Format::Json => println!(
                            "{}",
                            serde_json::to_string_pretty(&report.to_json()).expect("json")
                        ),
                        Format::Csv => print!("{}", report.to_csv()),
                    }
                    Ok(ExitCode::SUCCESS)
                }
                _ => Err(Error::InvalidParams(
                    "give exactly one of --demo porosity or --scan good".into(),
                )),
            }
        }
        Command::Selftest(a) => {
            let scale = match a.scale.as_str() {
                "quick" => SelftestScale {
                    median_functions: 12,
                    decomposition_functions: 4,
                    point_sets: 4,
                    gamma_samples: 8,
                },
                "standard" => SelftestScale::default(),
                other => {
                    return Err(Error::InvalidParams(format!(
                        "unknown scale `{other}` (quick|standard)"
                    )))
                }
            };
            let report = run_selftest(a.seed, &scale, cli.jobs)?;
            print!("{}", report.render());
            if report.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("invariant violation: selftest sections failed");
                Ok(ExitCode::from(2))
            }
        }
    }
}
