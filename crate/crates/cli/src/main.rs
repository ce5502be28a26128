use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nk_core::combinatorics::count_by_overlap;
use nk_core::enumeration::Scanner;
use nk_core::landscape::{Landscape, LandscapeSpec};
use nk_core::paths::{build_bridge, path_report, verify_theorem_bounds};
use nk_core::rng::{derive_seed, CounterRng, SeedRange};
use nk_core::sampler::{estimate_max, free_energy_ti, Effort};
use nk_core::theory;
use nk_lab::experiments::bridge_endpoints;
use nk_lab::output::{format_float, write_bundle};
use nk_lab::{
    execute, run, threads_from_env, Cell, Check, CliError, CliResult, Experiment, ExperimentConfig,
    Format, Knobs, OutputConfig, Ranges, Table,
};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "nklab", version, about = "NK fitness landscape laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Landscape / chain seed.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the output files and a MANIFEST.json into this directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Shape {
    #[arg(long)]
    n: usize,
    #[arg(long, conflicts_with = "alpha")]
    k: Option<usize>,
    /// Epistasis ratio; K = floor(alpha (N - 1)).
    #[arg(long)]
    alpha: Option<f64>,
}

impl Shape {
    fn spec(&self, seed: u64) -> CliResult<LandscapeSpec> {
        Ok(match (self.k, self.alpha) {
            (Some(k), _) => LandscapeSpec::with_k(self.n, k, seed)?,
            (None, Some(a)) => LandscapeSpec::with_alpha(self.n, a, seed)?,
            (None, None) => return Err(CliError::Usage("give --k or --alpha".into())),
        })
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Endpoints {
    /// Exact fittest genome and the farthest genome within eta of it.
    Fittest,
    /// Best adaptive-walk optimum and the farthest walk end within eta of it.
    Walk,
    /// Two uniformly random genomes.
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form constants and curves.
    Theory {
        /// Critical inverse temperature sqrt(2 ln 2).
        #[arg(long)]
        beta_c: bool,
        /// Epistasis threshold 3 - 2 sqrt(2).
        #[arg(long)]
        alpha_star: bool,
        /// Limiting free energy at this beta.
        #[arg(long, value_name = "BETA")]
        free_energy: Option<f64>,
        /// Threshold beta_p of the p-spin bound.
        #[arg(long, value_name = "P")]
        beta_p: Option<u32>,
        /// Overlap-gap thresholds at (--alpha, --delta).
        #[arg(long, requires_all = ["alpha", "delta"])]
        gap: bool,
        /// c1, c2 and delta_* at --alpha.
        #[arg(long, requires = "alpha")]
        low: bool,
        /// E(delta) curve at --alpha, as CSV.
        #[arg(long, requires = "alpha")]
        curve: bool,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 49)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Overlap counts |{sigma : N Q(sigma, 1) = l}|.
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Cross-check against brute force and the counting bounds.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive enumeration of one landscape.
    Exact {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, num_args = 1.., default_values_t = [1.0])]
        beta: Vec<f64>,
        /// Also compute the replica overlap law (N <= 14).
        #[arg(long)]
        overlap: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Tempering estimates on one landscape.
    Sample {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 16)]
        chains: usize,
        #[arg(long, default_value_t = 2000)]
        sweeps: u64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// Also search for the maximum.
        #[arg(long)]
        max: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Bridge path between two fit genomes, as CSV.
    Path {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0.2)]
        eta: f64,
        /// Defaults to `fittest` up to N = 22 and `walk` beyond.
        #[arg(long, value_enum)]
        endpoints: Option<Endpoints>,
        #[command(flatten)]
        common: Common,
    },
    /// Run an experiment from a JSON configuration file.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Bivariate normal orthant probability P(X > x, Y > x), correlation t.
    Orthant {
        #[arg(long)]
        t: f64,
        #[arg(long, conflicts_with = "s")]
        x: Option<f64>,
        /// Threshold x = s sqrt(N); also prints the large-deviation bound.
        #[arg(long, requires = "n")]
        s: Option<f64>,
        #[arg(long)]
        n: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

/// Either all assertions held or some failed.
type Verdict = bool;

const EXACT_ENDPOINT_LIMIT: usize = 22;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let pool = threads_from_env().and_then(|t| {
        if let Some(t) = t {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(())
    });
    match pool.and_then(|_| dispatch(cli.command)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn print_json(v: &Value) -> CliResult<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn save(common: &Common, files: Vec<(String, String)>) -> CliResult<()> {
    if let Some(dir) = &common.out {
        let files: Vec<(String, Vec<u8>)> = files
            .into_iter()
            .map(|(n, s)| (n, s.into_bytes()))
            .collect();
        write_bundle(dir, &files)?;
    }
    Ok(())
}

fn dispatch(cmd: Command) -> CliResult<Verdict> {
    match cmd {
        Command::Theory {
            beta_c,
            alpha_star,
            free_energy,
            beta_p,
            gap,
            low,
            curve,
            alpha,
            delta,
            points,
            common,
        } => {
            let mut out = Map::new();
            if beta_c {
                out.insert("beta_c".into(), json!(theory::beta_c()));
            }
            if alpha_star {
                out.insert("alpha_star".into(), json!(theory::alpha_star()));
            }
            if let Some(b) = free_energy {
                out.insert(
                    "free_energy".into(),
                    json!(theory::limiting_free_energy(b)?),
                );
            }
            if let Some(p) = beta_p {
                out.insert("beta_p".into(), json!(theory::beta_p(p)?.beta));
            }
            if gap {
                let g = theory::gap_bounds(alpha.unwrap(), delta.unwrap())?;
                out.insert("gap".into(), serde_json::to_value(g)?);
            }
            if low {
                let a = alpha.unwrap();
                let (c1, c2) = theory::c1_c2(a)?;
                out.insert(
                    "low".into(),
                    json!({"c1": c1, "c2": c2, "discriminant": theory::discriminant(a), "delta_star": theory::delta_star(a)?}),
                );
            }
            let mut table = None;
            if curve {
                let a = alpha.unwrap();
                let mut t = Table::new(&["alpha", "delta", "e"]);
                for (d, e) in theory::e_curve(a, points)? {
                    t.push(vec![a.into(), d.into(), e.into()]);
                }
                table = Some(t);
            }
            if out.is_empty() && table.is_none() {
                return Err(CliError::Usage(
                    "nothing requested; see `nklab theory --help`".into(),
                ));
            }
            let value = Value::Object(out.clone());
            if common.json {
                let mut v = out;
                if let Some(t) = &table {
                    v.insert("curve".into(), serde_json::to_value(t)?);
                }
                print_json(&Value::Object(v))?;
            } else {
                for (key, v) in &out {
                    match v.as_f64() {
                        Some(x) if out.len() == 1 => println!("{x:.6}"),
                        Some(x) => println!("{key} = {x:.6}"),
                        None => println!("{key} = {v}"),
                    }
                }
                if let Some(t) = &table {
                    print!("{}", t.to_csv());
                }
            }
            let mut files = vec![(
                "theory.json".to_string(),
                serde_json::to_string_pretty(&value)? + "\n",
            )];
            if let Some(t) = table {
                files.push(("curve.csv".into(), t.to_csv()));
            }
            save(&common, files)?;
            Ok(true)
        }
        Command::Count {
            n,
            k,
            check,
            common,
        } => {
            let t = count_by_overlap(n, k)?;
            // Same checks as the count_check experiment at this single point.
            let checks = if check {
                let cfg = ExperimentConfig {
                    experiment: Experiment::CountCheck,
                    ranges: Ranges {
                        n: vec![n],
                        k: vec![k],
                        ..Default::default()
                    },
                    seeds: SeedRange::new(common.seed, 1),
                    knobs: Knobs::default(),
                    output: OutputConfig {
                        dir: ".".into(),
                        format: Format::Csv,
                    },
                };
                execute(&cfg)?.checks
            } else {
                Vec::new()
            };
            let ok = checks.iter().all(|c| c.passed);
            let mut csv = Table::new(&["n", "k", "l", "count"]);
            for (l, c) in t.counts().iter().enumerate() {
                csv.push(vec![n.into(), k.into(), l.into(), c.to_string().into()]);
            }
            if common.json {
                let mut v = serde_json::to_value(&t)?;
                if check {
                    v["checks"] = serde_json::to_value(&checks)?;
                }
                print_json(&v)?;
            } else {
                println!("{t}");
                print_checks(&checks);
            }
            save(&common, vec![("count.csv".into(), csv.to_csv())])?;
            Ok(ok)
        }
        Command::Exact {
            shape,
            beta,
            overlap,
            common,
        } => {
            let land = Landscape::new(shape.spec(common.seed)?.auto_cache(1 << 22))?;
            let sc = Scanner::default();
            let gs = sc.ground_state(&land)?;
            let grid = sc.free_energy_grid(&land, &beta)?;
            let mut table = Table::new(&["beta", "f", "mean_energy", "p_q1", "mean_q", "theory_f"]);
            let mut ok = true;
            let mut laws = Vec::new();
            for g in &grid {
                if g.beta > 0.0 {
                    ok &= gs.m <= g.f / g.beta + 1e-12
                        && g.f / g.beta <= gs.m + std::f64::consts::LN_2 / g.beta + 1e-12;
                }
                let mean_q = if overlap {
                    let law = sc
                        .exact_overlap_law(&land, g.beta)?
                        .overlap_law
                        .expect("law requested");
                    let m = law.mean_q();
                    laws.push(law);
                    Cell::from(m)
                } else {
                    Cell::Empty
                };
                table.push(vec![
                    g.beta.into(),
                    g.f.into(),
                    g.mean_energy.into(),
                    g.p_q1.into(),
                    mean_q,
                    theory::limiting_free_energy(g.beta)?.into(),
                ]);
            }
            if common.json {
                print_json(&json!({
                    "n": land.n(), "k": land.k(), "seed": common.seed,
                    "m": gs.m, "argmax": gs.sigma_star.bits(), "argmax_ties": gs.argmax_ties,
                    "gibbs": grid, "overlap_laws": laws, "sandwich_holds": ok,
                }))?;
            } else {
                println!("N = {}  K = {}  seed = {}", land.n(), land.k(), common.seed);
                println!(
                    "M = {}  argmax = {:#x}",
                    format_float(gs.m),
                    gs.sigma_star.bits()
                );
                print!("{}", table.to_csv());
            }
            save(&common, vec![("exact.csv".into(), table.to_csv())])?;
            Ok(ok)
        }
        Command::Sample {
            shape,
            beta,
            chains,
            sweeps,
            step,
            max,
            common,
        } => {
            let land = Landscape::new(shape.spec(common.seed)?.auto_cache(1 << 22))?;
            let effort = Effort::new(chains, sweeps, derive_seed(common.seed, 0x5341_4d50));
            let fe = free_energy_ti(&land, beta, step, &effort)?;
            let mx = max.then(|| estimate_max(&land, &effort)).transpose()?;
            let mut table = Table::new(&[
                "beta",
                "f",
                "f_std_error",
                "mean_energy",
                "energy_std_error",
                "max_lower_bound",
                "theory_f",
            ]);
            table.push(vec![
                beta.into(),
                fe.f.value.into(),
                fe.f.std_error.into(),
                fe.mean_energy.value.into(),
                fe.mean_energy.std_error.into(),
                mx.as_ref().map(|m| m.m).into(),
                theory::limiting_free_energy(beta)?.into(),
            ]);
            if common.json {
                print_json(
                    &json!({"n": land.n(), "k": land.k(), "seed": common.seed, "free_energy": fe, "max": mx}),
                )?;
            } else {
                println!(
                    "F = {} +- {}  <H>/N = {} +- {}",
                    format_float(fe.f.value),
                    format_float(fe.f.std_error),
                    format_float(fe.mean_energy.value),
                    format_float(fe.mean_energy.std_error)
                );
                if let Some(m) = &mx {
                    println!("M >= {}", format_float(m.m));
                }
            }
            save(&common, vec![("sample.csv".into(), table.to_csv())])?;
            Ok(true)
        }
        Command::Path {
            shape,
            steps,
            eta,
            endpoints,
            common,
        } => {
            let spec = shape.spec(common.seed)?;
            let land = Landscape::new(spec.auto_cache(1 << 22))?;
            let n = land.n();
            let mode = endpoints.unwrap_or(if n <= EXACT_ENDPOINT_LIMIT {
                Endpoints::Fittest
            } else {
                Endpoints::Walk
            });
            let (hat, check, m) = match mode {
                Endpoints::Fittest | Endpoints::Walk => {
                    let limit = if mode == Endpoints::Fittest { 26 } else { 0 };
                    let (a, b, m, _) = bridge_endpoints(&land, eta, limit, common.seed)?;
                    (a, b, m)
                }
                Endpoints::Random => {
                    let mut rng = CounterRng::new(derive_seed(common.seed, 0x5241_4e44), &[]);
                    let a = nk_core::landscape::Genome::random(n, &mut rng)?;
                    let b = nk_core::landscape::Genome::random(n, &mut rng)?;
                    let m = land.norm_fitness(&a)?.max(land.norm_fitness(&b)?);
                    (a, b, m)
                }
            };
            let path = build_bridge(&hat, &check, steps)?;
            let rep = path_report(&land, &path)?;
            let flags = verify_theorem_bounds(&rep, spec.effective_alpha(), steps, eta, m);
            let mut table = Table::new(&["node", "bits", "nq", "nr", "q", "r", "flips", "fitness"]);
            for (l, g) in path.nodes.iter().enumerate() {
                let (nq, nr, q, r, flips) = match l.checked_sub(1).map(|i| &rep.steps[i]) {
                    Some(s) => (s.nq, s.nr, s.q, s.r, s.flips),
                    None => (n as i64, n as i64, 1.0, 1.0, 0),
                };
                table.push(vec![
                    l.into(),
                    format!("{:#x}", g.bits()).into(),
                    nq.into(),
                    nr.into(),
                    q.into(),
                    r.into(),
                    flips.into(),
                    rep.fitness[l].into(),
                ]);
            }
            if common.json {
                print_json(
                    &json!({"n": n, "k": land.k(), "steps": steps, "m": m, "report": rep, "flags": flags}),
                )?;
            } else {
                print!("{}", table.to_csv());
            }
            save(
                &common,
                vec![
                    ("path.csv".into(), table.to_csv()),
                    (
                        "flags.json".into(),
                        serde_json::to_string_pretty(&flags)? + "\n",
                    ),
                ],
            )?;
            Ok(flags.block_q_ok && flags.block_r_ok)
        }
        Command::Sweep { config, common } => {
            let text = std::fs::read_to_string(&config).map_err(|e| CliError::io(&config, e))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if common.seed != 0 {
                cfg.seeds.base = common.seed;
            }
            if let Some(dir) = common.out {
                cfg.output.dir = dir;
            }
            let summary = run(&cfg)?;
            if common.json {
                print_json(&serde_json::to_value(&summary.record)?)?;
            } else {
                print_checks(&summary.record.checks);
                for f in &summary.files {
                    println!("wrote {}", f.display());
                }
            }
            Ok(summary.passed())
        }
        Command::Orthant { t, x, s, n, common } => {
            let x = match (x, s, n) {
                (Some(x), _, _) => x,
                (None, Some(s), Some(n)) => s * n.sqrt(),
                _ => return Err(CliError::Usage("give --x, or --s with --n".into())),
            };
            let p = theory::orthant_prob(t, x)?;
            let bound = match (s, n) {
                (Some(s), Some(n)) => Some(theory::lemma2_3_bound(t, s, n)?),
                _ => None,
            };
            let v = json!({"t": t, "x": x, "probability": p, "bound": bound});
            if common.json {
                print_json(&v)?;
            } else {
                println!("{}", format_float(p));
                if let Some(b) = bound {
                    println!("bound = {}", format_float(b));
                }
            }
            save(
                &common,
                vec![(
                    "orthant.json".into(),
                    serde_json::to_string_pretty(&v)? + "\n",
                )],
            )?;
            Ok(bound.is_none_or(|b| p <= b))
        }
    }
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        println!(
            "{} {} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
}
