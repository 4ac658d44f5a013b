use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use repgame::experiments::{self, DecayMethod};
use repgame::generators::{self, GeneratorParams};
use repgame::io::{fraction_json, fraction_text, parse_game, serialize_game, strategy_json, tuples_json};
use repgame::structure::{self, GraphKind, ProjectionWitness};
use repgame::transform::{self, TransformSpec, DEFAULT_M_CAP};
use repgame::{Error, ExactGame, Rational, Scalar, DEFAULT_BUDGET};

#[derive(Parser)]
#[command(name = "repgame", version, about = "Exact analysis of finite one-round multiplayer games")]
struct Cli {
    /// Maximum number of deterministic strategies to enumerate.
    #[arg(long, global = true, env = "REPGAME_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    /// Maximum number of uniform predicate slots.
    #[arg(long, global = true, default_value_t = DEFAULT_M_CAP)]
    m_cap: u64,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for local search and random generation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Projection and connectivity verdicts.
    Check { game: PathBuf },
    /// Exact value with an optimal strategy.
    Value {
        game: PathBuf,
        /// Seeded hill climbing instead of exhaustive search (lower bound).
        #[arg(long)]
        local_search: bool,
        #[arg(long, default_value_t = 10_000)]
        iterations: usize,
    },
    /// Apply T^i_p (players numbered from 1) or a sequence from a file.
    Transform {
        game: PathBuf,
        #[arg(long, requires = "p", conflicts_with = "seq")]
        i: Option<usize>,
        #[arg(long, requires = "i")]
        p: Option<usize>,
        /// JSON list of [i, p] pairs.
        #[arg(long)]
        seq: Option<PathBuf>,
        /// Rewrite the result with uniform predicate slots.
        #[arg(long)]
        uniformize: bool,
        /// Uniformize, then add the slot player.
        #[arg(long)]
        plain: bool,
    },
    /// Transform until the question support stops growing.
    Saturate {
        game: PathBuf,
        /// JSON list of [i, p] pairs; defaults to all pairs in row-major order.
        #[arg(long)]
        beta: Option<PathBuf>,
        #[arg(long)]
        max_passes: Option<usize>,
        /// Pass log CSV destination (standard error if absent).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Value of the n-fold parallel repetition.
    RepeatValue {
        game: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        local_search: bool,
        #[arg(long, default_value_t = 10_000)]
        iterations: usize,
    },
    /// Exact checks of every inequality, as CSV.
    Verify {
        game: Option<PathBuf>,
        /// Run over the built-in example games (only "bundled").
        #[arg(long, value_parser = ["bundled"])]
        suite: Option<String>,
    },
    /// Values of G^n for n = 1..n-max, as CSV.
    Decay {
        game: PathBuf,
        #[arg(long)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        #[arg(long, default_value_t = 10_000)]
        iterations: usize,
    },
    /// Emit a bundled or random game.
    Gen {
        #[arg(value_parser = ["chsh", "chain3", "ghz", "diag3", "single", "accept_all", "sat_shared", "sat3", "random"])]
        name: String,
        #[arg(long, default_value_t = 3)]
        players: usize,
        #[arg(long, default_value_t = 2)]
        questions: usize,
        #[arg(long, default_value_t = 2)]
        answers: usize,
        #[arg(long, default_value_t = 50)]
        density: u32,
        #[arg(long, default_value_t = 1)]
        min_classes: usize,
        #[arg(long, default_value_t = 2)]
        max_classes: usize,
        #[arg(long, default_value_t = 3)]
        max_weight: u32,
        #[arg(long, default_value_t = 1)]
        blocks: usize,
    },
    /// Support graph in DOT syntax.
    ExportDot {
        game: PathBuf,
        #[arg(value_enum)]
        graph: Graph,
        /// Player (from 1) for the player graph.
        #[arg(long, default_value_t = 1)]
        player: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    LocalSearch,
}

#[derive(Clone, Copy, ValueEnum)]
enum Graph {
    Tuple,
    Player,
    Loose,
}

enum Failure {
    Game(Error),
    Io(PathBuf, io::Error),
    Usage(String),
    ClaimsFailed(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Game(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::ClaimsFailed(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Game(Error::Parse { .. }) => 3,
            Failure::Game(
                Error::DistributionNotNormalized { .. }
                | Error::ArityMismatch { .. }
                | Error::UnknownLabel { .. }
                | Error::UnknownPredicate { .. }
                | Error::NegativeWeight { .. }
                | Error::MissingMix { .. }
                | Error::TooFewPlayers(_)
                | Error::EmptyAlphabet { .. }
                | Error::EmptySupport,
            ) => 4,
            Failure::Game(Error::BudgetExceeded { .. } | Error::MBlowup { .. }) => 5,
            Failure::Game(_) => 6,
            Failure::Io(..) => 7,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Game(e) => e.to_string(),
            Failure::Io(path, e) => format!("{}: {e}", path.display()),
            Failure::Usage(m) => m.clone(),
            Failure::ClaimsFailed(n) => format!("{n} claim(s) do not hold"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load(path: &Path) -> Result<ExactGame, Failure> {
    Ok(parse_game(&read(path)?)?)
}

fn write_to(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(p.to_path_buf(), e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(PathBuf::from("<stdout>"), e)),
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn name_of(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "game".to_string(), |s| s.to_string_lossy().into_owned())
}

fn player(index: usize, players: usize) -> Result<usize, Failure> {
    if index == 0 || index > players {
        return Err(Failure::Game(Error::PlayerOutOfRange {
            player: index,
            players,
        }));
    }
    Ok(index - 1)
}

fn value_json(value: &Rational, exact: bool) -> Result<Value, Failure> {
    let mut m = Map::new();
    m.insert("value".into(), Value::from(fraction_text(value)));
    if let Value::Object(f) = fraction_json(value)? {
        m.extend(f);
    }
    m.insert("approx".into(), json!(Scalar::to_f64(value)));
    m.insert("exact".into(), Value::from(exact));
    Ok(Value::Object(m))
}

fn check(game: &ExactGame) -> Result<Value, Failure> {
    let mut out = Map::new();
    match structure::is_projection(game) {
        ProjectionWitness::Holds(maps) => {
            out.insert("projection".into(), Value::from(true));
            let classes: Vec<Value> = maps
                .iter()
                .map(|m| {
                    json!({
                        "q": m.question.0,
                        "predicate": m.predicate,
                        "classes": m.classes,
                        "sigma": m.sigma,
                    })
                })
                .collect();
            out.insert("projection_maps".into(), Value::Array(classes));
        }
        ProjectionWitness::Fails(w) => {
            out.insert("projection".into(), Value::from(false));
            out.insert(
                "counterexample".into(),
                json!({
                    "q": w.question.0,
                    "predicate": w.predicate,
                    "component": w.component,
                    "missing": w.answer.0,
                }),
            );
        }
    }
    let report = structure::connectivity(game);
    out.insert("connected".into(), Value::from(report.is_connected()));
    out.insert(
        "player_wise_connected".into(),
        Value::from(report.is_player_wise_connected()),
    );
    out.insert("loosely_connected".into(), Value::from(report.is_loosely_connected()));
    let parts = |cs: &[Vec<repgame::Tuple>]| Value::Array(cs.iter().map(|c| tuples_json(c)).collect());
    out.insert("tuple_components".into(), parts(&report.tuple_components));
    out.insert("player_components".into(), json!(report.player_components));
    out.insert("loose_components".into(), parts(&report.loose_components));
    if let Some(split) = report.splitting_partition() {
        let sides: Vec<Value> = split
            .iter()
            .map(|(a, b)| json!([a.iter().collect::<Vec<_>>(), b.iter().collect::<Vec<_>>()]))
            .collect();
        out.insert("splitting_partition".into(), Value::Array(sides));
    }
    Ok(Value::Object(out))
}

fn run(cli: Cli) -> Outcome {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let out = cli.out.as_deref();
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Check { game } => write_to(out, &json_text(&check(&load(&game)?)?)),
        Command::Value {
            game,
            local_search,
            iterations,
        } => {
            let g = load(&game)?;
            let (value, strategy, exact) = if local_search {
                let lb = g.local_search_value(seed, iterations);
                (lb.value, lb.strategy, false)
            } else {
                let s = g.exact_value(cli.budget)?;
                (s.value, s.strategy, true)
            };
            let mut v = value_json(&value, exact)?;
            v["strategy"] = strategy_json(&strategy);
            write_to(out, &json_text(&v))
        }
        Command::Transform {
            game,
            i,
            p,
            seq,
            uniformize,
            plain,
        } => {
            let g = load(&game)?;
            let spec = match (i, p, seq) {
                (Some(i), Some(p), None) => {
                    TransformSpec::new(vec![(player(i, g.players())?, player(p, g.players())?)])?
                }
                (None, None, Some(path)) => TransformSpec::from_json(&read(&path)?)?,
                _ => return Err(Failure::Usage("give either --i and --p, or --seq".into())),
            };
            let mut t = transform::transform_seq(&g, &spec)?;
            if uniformize || plain {
                t = transform::uniformize(&t, cli.m_cap)?;
            }
            if plain {
                t = transform::to_plain_game(&t)?;
            }
            write_to(out, &serialize_game(&t)?)
        }
        Command::Saturate {
            game,
            beta,
            max_passes,
            log,
        } => {
            let g = load(&game)?;
            let beta = beta
                .map(|p| read(&p).and_then(|t| Ok(TransformSpec::from_json(&t)?)))
                .transpose()?;
            let sat = transform::saturate(&g, beta.as_ref(), max_passes)?;
            let csv = sat.log_csv();
            match log {
                Some(path) => fs::write(&path, csv).map_err(|e| Failure::Io(path, e))?,
                None => eprint!("{csv}"),
            }
            write_to(out, &serialize_game(&sat.game)?)
        }
        Command::RepeatValue {
            game,
            n,
            local_search,
            iterations,
        } => {
            let rep = load(&game)?.repeated(n)?;
            let (value, strategy, exact) = if local_search {
                let lb = match rep.local_search_from_tensor(cli.budget, seed, iterations) {
                    Err(Error::BudgetExceeded { .. }) => rep.local_search_value(None, seed, iterations),
                    other => other?,
                };
                (lb.value, lb.strategy, false)
            } else {
                let s = rep.exact_value(cli.budget)?;
                (s.value, s.strategy, true)
            };
            let mut v = value_json(&value, exact)?;
            v["n"] = Value::from(n);
            v["strategy"] = strategy_json(&strategy);
            write_to(out, &json_text(&v))
        }
        Command::Verify { game, suite } => {
            let reports = match (game, suite) {
                (None, Some(_)) => experiments::verify_suite(cli.budget)?,
                (Some(path), None) => experiments::verify_game(&load(&path)?, &name_of(&path), cli.budget)?,
                _ => return Err(Failure::Usage("give a game file or --suite bundled".into())),
            };
            write_to(out, &experiments::reports_csv(&reports))?;
            let failed = reports.iter().filter(|r| !r.holds).count();
            if failed > 0 {
                return Err(Failure::ClaimsFailed(failed));
            }
            Ok(())
        }
        Command::Decay {
            game,
            n_max,
            method,
            iterations,
        } => {
            let method = match method {
                Method::Exact => DecayMethod::Exact,
                Method::LocalSearch => DecayMethod::LocalSearch,
            };
            let pts = experiments::decay_curve(&load(&game)?, n_max, method, seed, iterations, cli.budget)?;
            write_to(out, &experiments::decay_csv(&pts))
        }
        Command::Gen {
            name,
            players,
            questions,
            answers,
            density,
            min_classes,
            max_classes,
            max_weight,
            blocks,
        } => {
            let g = if name == "random" {
                generators::random_projection_game(&GeneratorParams {
                    seed: cli.seed.unwrap_or(GeneratorParams::default().seed),
                    players,
                    questions,
                    answers,
                    density_percent: density,
                    classes: (min_classes, max_classes),
                    max_weight,
                    blocks,
                })?
            } else {
                generators::by_name(&name).expect("names are restricted by the parser")
            };
            write_to(out, &serialize_game(&g)?)
        }
        Command::ExportDot {
            game,
            graph,
            player: who,
        } => {
            let g = load(&game)?;
            let kind = match graph {
                Graph::Tuple => GraphKind::Tuple,
                Graph::Loose => GraphKind::Loose,
                Graph::Player => GraphKind::Player(player(who, g.players())?),
            };
            write_to(out, &structure::to_dot(&g, kind))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("repgame: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
