use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use skewdyn::arith::{fmt_q, parse_q, qi};
use skewdyn::berk::BerkPoint;
use skewdyn::complexdyn::{self, NumericMap};
use skewdyn::cover::{choose_markov_level, classify_point, Classification, Cover};
use skewdyn::curves;
use skewdyn::green::g_na;
use skewdyn::markov::{build_graph, equidistribution_check, parry, MarkovGraph, ParryData};
use skewdyn::multiplicity::{bound_multiplicity, unbounded_witness};
use skewdyn::normal::{normalize, GermMap};
use num_complex::Complex64;
use skewdyn::skew::{EscapeStatus, SkewMap};
use skewdyn::{Error, Mode, PuiseuxSeries, Q};

#[derive(Parser, Debug)]
#[command(name = "skewdyn", version, about = "Exact local dynamics of superattracting skew products")]
struct Cli {
    #[command(flatten)]
    cfg: RunConfig,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Map spec: a JSON file or inline JSON such as '{"d":4,"c":2,"h":{"0":"-z^4"}}'.
    #[arg(long, global = true)]
    map: Option<String>,
    /// Overrides the mode given in the map spec.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Precision (exponent of z) for Puiseux computations.
    #[arg(long, global = true, default_value = "24")]
    precision: String,
    /// Cover depth / Markov level search bound.
    #[arg(long, global = true, default_value_t = 4)]
    depth: usize,
    /// Iteration budget for orbits and classification.
    #[arg(long, global = true, default_value_t = 32)]
    budget: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the output here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel core.
    #[arg(long, global = true, env = "SKEWDYN_THREADS")]
    threads: Option<usize>,
    /// Progress messages on stderr.
    #[arg(long, short, global = true, env = "SKEWDYN_VERBOSE")]
    verbose: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Numeric,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical branches with J, ν, Crit⁺ and escape status.
    Critical,
    /// Orbit of a Berkovich point, e.g. 'zeta(z^2, 3)' or a series.
    Orbit {
        point: String,
        #[arg(long, default_value_t = 5)]
        steps: usize,
    },
    /// Nested ball cover of 𝒦 down to --depth.
    Cover {
        /// Root ball exponent t_0 (default t_ρ/2).
        #[arg(long)]
        t0: Option<String>,
    },
    /// Markov graph at the first critical-free level, with its Parry vector.
    Graph,
    /// Cylinder mass of a word, or equidistribution of iterated preimages.
    Measure {
        /// Comma-separated vertex word.
        #[arg(long, conflicts_with = "equidistribution")]
        word: Option<String>,
        /// Bin the n-th preimages of --x0 on the Markov balls.
        #[arg(long)]
        equidistribution: Option<usize>,
        #[arg(long, default_value = "0")]
        x0: String,
    },
    /// Non-Archimedean Green function at a point.
    Green { point: String },
    /// Escape / 𝒦 classification of a point.
    Classify { point: String },
    /// Upper bound on multiplicities in 𝒦.
    MultBound,
    /// Denominator growth along a periodic Crit⁺ branch.
    MultWitness {
        #[arg(long, default_value = "0")]
        branch: String,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
    },
    /// Curve with a given itinerary.
    Curve {
        /// Comma-separated vertex word.
        word: String,
    },
    /// Parry-weighted plaques as CSV.
    Plaques {
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        word_len: usize,
        /// Sampling radius in t (default: the heuristic radius).
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Formal normal form of a germ JSON {"fz", "fw", "M"}.
    Normalize {
        /// Germ JSON file or inline JSON.
        germ: String,
    },
    /// Complex orbit in log-magnitude form.
    ComplexOrbit {
        #[command(flatten)]
        p: ComplexPoint,
        #[arg(long)]
        csv: bool,
    },
    /// Attraction rate of a complex orbit.
    Rate {
        #[command(flatten)]
        p: ComplexPoint,
    },
    /// Curve points against generic points: rates d and c.
    Crosscheck {
        #[arg(long, default_value_t = 10)]
        curve_points: usize,
        #[arg(long, default_value_t = 10)]
        generic: usize,
        #[arg(long, default_value_t = 3)]
        word_len: usize,
        #[arg(long, default_value_t = complexdyn::DEFAULT_STEPS)]
        steps: usize,
    },
}

#[derive(Args, Debug)]
struct ComplexPoint {
    /// z as 're,im' or 're'.
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    #[arg(long, allow_hyphen_values = true)]
    w: String,
    #[arg(long, default_value_t = complexdyn::DEFAULT_STEPS)]
    steps: usize,
    /// Green function tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Input(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Error::HypothesisFailed(_)
                | Error::CriticalInK
                | Error::NoCover
                | Error::DegenerateEigenspace(_)
                | Error::SplittingFieldRequired
                | Error::RootsOfUnityUnavailable(_)
                | Error::NoPreimageInBall(_)
                | Error::DivisionObstruction => 2,
                Error::BudgetExceeded(_) | Error::InsufficientPrecision(_) | Error::IndeterminateOrder => 3,
                _ => 1,
            },
        }
    }
}

type CliResult<T> = Result<T, CliError>;

enum Output {
    Json(Value),
    Text(String),
}

fn read_json(arg: &str) -> CliResult<Value> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg)?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("bad JSON in {arg}: {e}")))
}

fn parse_word(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| CliError::Input(format!("bad vertex '{t}'"))))
        .collect()
}

fn parse_complex(s: &str) -> CliResult<Complex64> {
    let bad = || CliError::Input(format!("bad complex number '{s}' (expected 're,im')"));
    let mut it = s.split(',').map(|t| t.trim().parse::<f64>());
    let re = it.next().ok_or_else(bad)?.map_err(|_| bad())?;
    let im = match it.next() {
        Some(v) => v.map_err(|_| bad())?,
        None => 0.0,
    };
    Ok(Complex64::new(re, im))
}

fn escape_json(e: &EscapeStatus) -> Value {
    match e {
        EscapeStatus::Escapes(n) => json!({"escapes": n}),
        EscapeStatus::InK { preperiod, period } => json!({"in_K": {"preperiod": preperiod, "period": period}}),
        EscapeStatus::Unresolved(n) => json!({"unresolved": n}),
    }
}

fn classification_json(c: &Classification) -> Value {
    match c {
        Classification::Escapes { n, exit } => json!({"escapes": n, "exit": fmt_q(exit)}),
        Classification::InCoverAtDepth(n) => json!({"in_cover_at_depth": n}),
        Classification::CertifiedInK { preperiod, period } => {
            json!({"in_K": {"preperiod": preperiod, "period": period}})
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    precision: Q,
}

impl Ctx {
    fn log(&self, msg: &str) {
        if self.cfg.verbose {
            eprintln!("skewdyn: {msg}");
        }
    }

    fn map(&self) -> CliResult<SkewMap> {
        let spec = self
            .cfg
            .map
            .as_deref()
            .ok_or_else(|| CliError::Input("this command needs --map".into()))?;
        let f = SkewMap::from_json(&read_json(spec)?)?;
        Ok(match self.cfg.mode {
            Some(ModeArg::Exact) => f.with_mode(Mode::Exact)?,
            Some(ModeArg::Numeric) => f.with_mode(Mode::Numeric)?,
            None => f,
        })
    }

    fn markov(&self, f: &SkewMap) -> CliResult<(Cover, MarkovGraph, ParryData)> {
        self.log("refining cover");
        let (n, cover) = choose_markov_level(f, None, self.cfg.depth)?;
        let g = build_graph(&cover, n)?;
        let p = parry(&g)?;
        Ok((cover, g, p))
    }
}

fn run(ctx: &Ctx, cmd: &Command) -> CliResult<(Option<Value>, Output)> {
    let prec = &ctx.precision;
    let budget = ctx.cfg.budget;
    if let Command::Normalize { germ } = cmd {
        let v = read_json(germ)?;
        let (g, m) = GermMap::from_json(&v)?;
        let nf = normalize(&g, m)?;
        let mut out = nf.to_json();
        if let Ok(f) = nf.skew_map() {
            out["skew_map"] = f.to_json();
        }
        return Ok((Some(json!({"germ": v})), Output::Json(out)));
    }
    let f = ctx.map()?;
    let map_json = Some(f.to_json());
    let out = match cmd {
        Command::Critical => {
            let crit = f.critical_data(prec, budget)?;
            let branches: Vec<Value> = crit
                .iter()
                .map(|c| {
                    json!({
                        "series": c.series.to_string(),
                        "J": c.j,
                        "nu": c.nu,
                        "crit_plus": c.in_crit_plus,
                        "image": f.apply_rigid(&c.series).to_string(),
                        "escape": escape_json(&c.escape),
                    })
                })
                .collect();
            Output::Json(json!({"rho0": f.rho0().to_string(), "branches": branches}))
        }
        Command::Orbit { point, steps } => {
            let mut x: BerkPoint = point.parse()?;
            let mut orbit = vec![x.to_string()];
            for _ in 0..*steps {
                x = f.apply_point(&x)?;
                orbit.push(x.to_string());
            }
            Output::Json(json!({"orbit": orbit}))
        }
        Command::Cover { t0 } => {
            let t0 = t0.as_deref().map(parse_q).transpose()?;
            Output::Json(Cover::build(&f, t0, ctx.cfg.depth)?.to_json())
        }
        Command::Graph => {
            let (_, g, p) = ctx.markov(&f)?;
            Output::Json(g.to_json(Some(&p)))
        }
        Command::Measure { word, equidistribution, x0 } => {
            let (_, g, p) = ctx.markov(&f)?;
            match (word, equidistribution) {
                (Some(w), _) => {
                    let w = parse_word(w)?;
                    let mass = p.cylinder_mass(&w)?;
                    Output::Json(json!({"word": w, "mass": fmt_q(&mass)}))
                }
                (None, Some(n)) => {
                    let x0: PuiseuxSeries = x0.parse()?;
                    let rep = equidistribution_check(&f, &g, &p, &x0, *n)?;
                    Output::Json(json!({
                        "n": rep.n,
                        "counts": rep.counts,
                        "outside": rep.outside,
                        "weights": rep.weights.iter().map(fmt_q).collect::<Vec<_>>(),
                        "parry": p.m.iter().map(fmt_q).collect::<Vec<_>>(),
                        "exact": rep.is_exact(),
                    }))
                }
                (None, None) => Output::Json(json!({"parry": p.m.iter().map(fmt_q).collect::<Vec<_>>()})),
            }
        }
        Command::Green { point } => {
            let x: BerkPoint = point.parse()?;
            Output::Json(g_na(&f, &x, budget)?.to_json(&x))
        }
        Command::Classify { point } => {
            let x: BerkPoint = point.parse()?;
            Output::Json(json!({"point": x.to_string(), "class": classification_json(&classify_point(&f, &x, budget)?)}))
        }
        Command::MultBound => {
            let (n, cover) = choose_markov_level(&f, None, ctx.cfg.depth)?;
            let mut v = bound_multiplicity(&f, &cover, n)?.to_json();
            v["level"] = json!(n);
            Output::Json(v)
        }
        Command::MultWitness { branch, n_max } => {
            let c0: PuiseuxSeries = branch.parse()?;
            Output::Json(unbounded_witness(&f, &c0, *n_max)?.to_json())
        }
        Command::Curve { word } => {
            let (_, g, _) = ctx.markov(&f)?;
            let c = curves::itinerary_to_curve(&f, &g, &parse_word(word)?, prec)?;
            Output::Json(c.to_json())
        }
        Command::Plaques { count, word_len, radius } => {
            let (_, g, p) = ctx.markov(&f)?;
            let pl = curves::emit_plaques(&f, &g, &p, *count, *word_len, *radius, prec, ctx.cfg.seed)?;
            for x in pl.iter().filter(|x| x.beyond_heuristic) {
                eprintln!(
                    "skewdyn: warning: plaque {:?} sampled at radius {} beyond heuristic {}",
                    x.itinerary, x.radius, x.heuristic_radius
                );
            }
            Output::Text(curves::plaques_to_csv(&pl))
        }
        Command::ComplexOrbit { p, csv } => {
            let nf = NumericMap::new(&f);
            let rec = complexdyn::iterate_orbit(&nf, parse_complex(&p.z)?, parse_complex(&p.w)?, p.steps)?;
            if *csv {
                Output::Text(rec.to_csv())
            } else {
                Output::Json(rec.to_json())
            }
        }
        Command::Rate { p } => {
            let nf = NumericMap::new(&f);
            let (z, w) = (parse_complex(&p.z)?, parse_complex(&p.w)?);
            let rec = complexdyn::iterate_orbit(&nf, z, w, p.steps)?;
            let g = complexdyn::green_complex(&nf, z, w, p.tol, budget.max(p.steps))?;
            Output::Json(json!({
                "rate": complexdyn::attraction_rate(&rec).to_json(),
                "green": g.to_json(),
                "omega0_entry": rec.omega0_entry(),
                "radius": nf.radius,
            }))
        }
        Command::Crosscheck { curve_points, generic, word_len, steps } => {
            let (_, g, p) = ctx.markov(&f)?;
            let nf = NumericMap::new(&f);
            let pl = curves::emit_plaques(&f, &g, &p, *curve_points, *word_len, None, prec, ctx.cfg.seed)?;
            let mut on = Vec::new();
            for (k, x) in pl.iter().enumerate() {
                let fam = curves::shift_family(&f, &g, &x.itinerary, prec)?;
                let ts = curves::annulus_samples(0.01, x.heuristic_radius.min(0.1), pl.len().max(2));
                on.push((fam, ts[k]));
            }
            let off = complexdyn::generic_points(&nf, *generic, ctx.cfg.seed);
            Output::Json(complexdyn::crosscheck(&nf, &on, &off, *steps)?.to_json())
        }
        Command::Normalize { .. } => unreachable!(),
    };
    Ok((map_json, out))
}

fn envelope(ctx: &Ctx, name: &str, map: Option<Value>, result: Value) -> Value {
    let c = &ctx.cfg;
    json!({
        "schema": 1,
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "map": map,
        "mode": c.mode.map(|m| format!("{m:?}").to_lowercase()),
        "budgets": {"precision": fmt_q(&ctx.precision), "depth": c.depth, "iterations": c.budget},
        "seed": c.seed,
        "result": result,
    })
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Critical => "critical",
        Command::Orbit { .. } => "orbit",
        Command::Cover { .. } => "cover",
        Command::Graph => "graph",
        Command::Measure { .. } => "measure",
        Command::Green { .. } => "green",
        Command::Classify { .. } => "classify",
        Command::MultBound => "mult-bound",
        Command::MultWitness { .. } => "mult-witness",
        Command::Curve { .. } => "curve",
        Command::Plaques { .. } => "plaques",
        Command::Normalize { .. } => "normalize",
        Command::ComplexOrbit { .. } => "complex-orbit",
        Command::Rate { .. } => "rate",
        Command::Crosscheck { .. } => "crosscheck",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.cfg.threads {
        // read by the thread pool on first use
        std::env::set_var("RAYON_NUM_THREADS", n.to_string());
    }
    let result = (|| -> CliResult<String> {
        let precision = parse_q(&cli.cfg.precision)?;
        if precision <= qi(0) || cli.cfg.depth == 0 || cli.cfg.budget == 0 {
            return Err(CliError::Input("budgets must be positive".into()));
        }
        let ctx = Ctx { cfg: cli.cfg, precision };
        let name = command_name(&cli.cmd);
        ctx.log(&format!("running {name}"));
        let (map, out) = run(&ctx, &cli.cmd)?;
        let text = match out {
            Output::Json(v) => serde_json::to_string_pretty(&envelope(&ctx, name, map, v)).unwrap() + "\n",
            Output::Text(t) => {
                let head = envelope(&ctx, name, map, Value::Null);
                format!("# {}\n{t}", serde_json::to_string(&head).unwrap())
            }
        };
        match &ctx.cfg.out {
            Some(p) => {
                fs::write(p, &text)?;
                Ok(String::new())
            }
            None => Ok(text),
        }
    })();
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("skewdyn: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
