//! Command-line driver: instance and vector generation, the two rounding
//! pipelines, colorers, the discrepancy game, the scheduling/discrepancy
//! reduction, block-SDP tools and seeded batch runs.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use flowdisc::equivalence::{load_identity_holds, roundtrip_check, signs_from_assignment, vectors_to_maxflow_instance, TwoSparseVector};
use flowdisc::game::{breaker_hard_instance, play_game, GreedyMaker, PairingMaker, Player, RandomBreaker, Strategy, TreeBreaker};
use flowdisc::maxflow::full_round_maxflow;
use flowdisc::model::{gen_periodic_instance, gen_random_instance, MachineAssignment, RandomInstanceParams, SchedulingInstance};
use flowdisc::prefix::{discrepancy_of, gen_random_vectors, Colorer, Mode, SignedVectorSequence, VectorKind, DEFAULT_BRUTE_FORCE_LIMIT};
use flowdisc::rational::{format_rat, parse_rat, to_f64, Rat};
use flowdisc::sdp::{build_block_instance, choose_r, color_block_in_k, gaussian_measure_mc, sdp_prefix_discrepancy, signs_to_sdp_vectors, SdpSolution};
use flowdisc::summary::{summarize, SummaryRow};
use flowdisc::totalflow::full_round_totalflow;
use flowdisc::Error;

/// Directory for artifacts whose path was not given on the command line.
pub const OUT_DIR_ENV: &str = "FLOWDISC_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "flowdisc", version, about = "Flow-time scheduling and prefix discrepancy workbench")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate instances, vector sequences and hard game inputs.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Round the assignment LP for maximum flow time.
    Maxflow(PipelineArgs),
    /// Round the time-indexed LP for total flow time.
    Totalflow(PipelineArgs),
    /// Color a vector sequence and report its discrepancy.
    Color(ColorArgs),
    /// Play the one-dimensional discrepancy game.
    Game(GameArgs),
    /// Translate between vector sequences and max-flow instances.
    Reduce {
        #[command(subcommand)]
        what: ReduceCommand,
    },
    /// Block construction, SDP vectors and Gaussian measure estimates.
    Sdp {
        #[command(subcommand)]
        what: SdpCommand,
    },
    /// Run a seeded batch of random instances and print a summary table.
    Bench(BenchArgs),
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Random integral scheduling instance.
    Instance {
        #[command(flatten)]
        shape: InstanceShape,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random vector sequence.
    Vectors {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = KindArg::BeckFiala)]
        kind: KindArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Values of the hard game instance for even k.
    Hard {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Copies of a base instance shifted by a period.
    Periodic {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        period: String,
        #[arg(long)]
        copies: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct InstanceShape {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    p_min: i64,
    #[arg(long, default_value_t = 4)]
    p_max: i64,
    #[arg(long, default_value_t = 3)]
    r_max: i64,
    /// Probability that a processing time is infinite.
    #[arg(long, default_value_t = 0.0)]
    inf_prob: f64,
}

impl InstanceShape {
    fn params(&self) -> RandomInstanceParams {
        RandomInstanceParams {
            n: self.n,
            m: self.m,
            p_range: (self.p_min, self.p_max),
            r_range: (0, self.r_max),
            infinity_prob: self.inf_prob,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum KindArg {
    BeckFiala,
    TwoSparse,
    Vm,
}

impl From<KindArg> for VectorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::BeckFiala => VectorKind::BeckFiala,
            KindArg::TwoSparse => VectorKind::TwoSparseUnit,
            KindArg::Vm => VectorKind::Vm,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ColorerArg {
    Brute,
    Greedy,
    Floating,
    Paired,
}

#[derive(Args, Debug, Clone)]
struct ColorerChoice {
    #[arg(long, value_enum, default_value_t = ColorerArg::Brute)]
    colorer: ColorerArg,
    /// Largest sequence the brute-force colorer accepts.
    #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_LIMIT)]
    limit: usize,
}

impl ColorerChoice {
    fn colorer(&self) -> Result<Colorer, Failure> {
        if self.limit == 0 {
            return Err(Failure::Validation("--limit must be positive".into()));
        }
        Ok(match self.colorer {
            ColorerArg::Brute => Colorer::BruteForce { limit: self.limit },
            ColorerArg::Greedy => Colorer::Greedy,
            ColorerArg::Floating => Colorer::Floating,
            ColorerArg::Paired => Colorer::TwoSparsePaired,
        })
    }
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    colorer: ColorerChoice,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModeArg {
    Prefix,
    Interval,
    OneSided,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Prefix => Mode::Prefix,
            ModeArg::Interval => Mode::Interval,
            ModeArg::OneSided => Mode::OneSidedInterval,
        }
    }
}

#[derive(Args, Debug)]
struct ColorArgs {
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Prefix)]
    mode: ModeArg,
    #[command(flatten)]
    colorer: ColorerChoice,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum MakerArg {
    Pairing,
    Greedy,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum BreakerArg {
    Tree,
    Random,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum StarterArg {
    Maker,
    Breaker,
}

#[derive(Args, Debug)]
struct GameArgs {
    /// Play on the hard instance with this even k.
    #[arg(long, conflicts_with = "values")]
    hard_k: Option<usize>,
    /// JSON list of rational values in [-1, 1].
    #[arg(long)]
    values: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MakerArg::Pairing)]
    maker: MakerArg,
    #[arg(long, value_enum, default_value_t = BreakerArg::Tree)]
    breaker: BreakerArg,
    #[arg(long, value_enum, default_value_t = StarterArg::Breaker)]
    starter: StarterArg,
    #[arg(long)]
    maker_wait: bool,
    #[arg(long)]
    breaker_wait: bool,
    /// Waiting probability of the random breaker.
    #[arg(long, default_value_t = 0.0)]
    wait_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV trace of every move.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ReduceCommand {
    /// Build the max-flow instance of a sequence of two-entry vectors.
    Build {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read signs off an assignment of the built instance.
    Signs {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve both sides exhaustively and compare.
    Roundtrip {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum SdpCommand {
    /// Smallest block size meeting the Gaussian measure requirement.
    ChooseR {
        #[arg(long)]
        delta: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Write the block vectors of a sequence.
    Build {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search block signs keeping every prefix in K and write the SDP vectors.
    Color {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        delta: String,
        #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_LIMIT)]
        limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prefix discrepancy of an SDP solution.
    Verify {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        delta: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo tail estimate for one block.
    Mc {
        #[arg(long)]
        delta: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Block size; chosen from delta, n and m when absent.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum BenchKind {
    Maxflow,
    Totalflow,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = BenchKind::Maxflow)]
    kind: BenchKind,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[command(flatten)]
    shape: InstanceShape,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    colorer: ColorerChoice,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Bad input, arguments or files: exit code 1.
    Validation(String),
    /// A checked bound or internal invariant failed: exit code 2.
    Violation(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Violation(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant(_) => Failure::Violation(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Validation(m) => eprintln!("error: {m}"),
                Failure::Violation(m) => eprintln!("violation: {m}"),
            }
            f.exit_code()
        }
    }
}

fn execute(command: Command) -> CmdResult {
    match command {
        Command::Gen { what } => gen(what),
        Command::Maxflow(a) => maxflow(a),
        Command::Totalflow(a) => totalflow(a),
        Command::Color(a) => color(a),
        Command::Game(a) => game(a),
        Command::Reduce { what } => reduce(what),
        Command::Sdp { what } => sdp(what),
        Command::Bench(a) => bench(a),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: flowdisc::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<SchedulingInstance, Failure> {
    in_file(path, SchedulingInstance::from_json(&read(path)?))
}

fn read_vectors(path: &Path) -> Result<SignedVectorSequence, Failure> {
    in_file(path, SignedVectorSequence::from_json(&read(path)?))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn rat_arg(name: &str, s: &str) -> Result<Rat, Failure> {
    parse_rat(s).map_err(|e| Failure::Validation(format!("--{name}: {e}")))
}

fn rat_list(values: &[Rat]) -> Value {
    Value::Array(values.iter().map(|v| Value::String(format_rat(v))).collect())
}

/// Writes to `out`, else into the directory named by [`OUT_DIR_ENV`] under
/// `default_name`, else to stdout.
fn emit(out: Option<&Path>, default_name: &str, content: &str) -> CmdResult {
    let target = match out {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name)),
    };
    match target {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Failure::Validation(format!("{}: {e}", parent.display())))?;
            }
            fs::write(&path, content).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            let tail = if content.ends_with('\n') { "" } else { "\n" };
            match write!(stdout, "{content}{tail}").and_then(|()| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Validation(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("value serializes")
}

fn gen(what: GenCommand) -> CmdResult {
    match what {
        GenCommand::Instance { shape, seed, out } => {
            let inst = gen_random_instance(&shape.params(), seed)?;
            emit(out.as_deref(), "instance.json", &inst.to_json())
        }
        GenCommand::Vectors { n, m, kind, seed, out } => {
            let seq = gen_random_vectors(m, n, kind.into(), seed)?;
            emit(out.as_deref(), "vectors.json", &seq.to_json())
        }
        GenCommand::Hard { k, out } => {
            let values = breaker_hard_instance(k)?;
            emit(out.as_deref(), "hard.json", &pretty(&rat_list(&values)))
        }
        GenCommand::Periodic { base, period, copies, out } => {
            let inst = read_instance(&base)?;
            let p = rat_arg("period", &period)?;
            let periodic = gen_periodic_instance(&inst, &p, copies)?;
            emit(out.as_deref(), "periodic.json", &periodic.to_json())
        }
    }
}

fn maxflow(a: PipelineArgs) -> CmdResult {
    let inst = read_instance(&a.instance)?;
    let r = full_round_maxflow(&inst, &a.colorer.colorer()?)?;
    emit(a.out.as_deref(), "maxflow.json", &r.to_json())?;
    let t = &r.trace;
    eprintln!("T* = {}, max flow = {}, bound = {}", format_rat(&t.t_star), format_rat(&t.max_flow), format_rat(&t.bound));
    if t.max_flow > t.bound {
        return Err(Failure::Violation(format!("max flow {} exceeds bound {}", format_rat(&t.max_flow), format_rat(&t.bound))));
    }
    Ok(())
}

fn totalflow(a: PipelineArgs) -> CmdResult {
    let inst = read_instance(&a.instance)?;
    let r = full_round_totalflow(&inst, &a.colorer.colorer()?)?;
    emit(a.out.as_deref(), "totalflow.json", &r.to_json())?;
    let t = &r.trace;
    eprintln!(
        "LP cost = {}, total flow = {}, alpha = {} (bound {})",
        format_rat(&t.lp_cost),
        format_rat(&t.total_flow),
        format_rat(&t.alpha_final),
        format_rat(&t.alpha_bound)
    );
    if let Some(l) = t.levels.iter().find(|l| l.alpha_out > l.alpha_bound) {
        return Err(Failure::Violation(format!("level {} alpha {} exceeds {}", l.h, format_rat(&l.alpha_out), format_rat(&l.alpha_bound))));
    }
    if t.alpha_final > t.alpha_bound {
        return Err(Failure::Violation(format!("alpha {} exceeds bound {}", format_rat(&t.alpha_final), format_rat(&t.alpha_bound))));
    }
    Ok(())
}

fn color(a: ColorArgs) -> CmdResult {
    let seq = read_vectors(&a.vectors)?;
    let mode: Mode = a.mode.into();
    let c = a.colorer.colorer()?.color(seq.m, &seq.vectors, mode)?;
    let report = discrepancy_of(seq.m, &seq.vectors, &c.signs, mode)?;
    if report.value != c.value {
        return Err(Failure::Violation("colorer misreported its discrepancy".into()));
    }
    let out = json!({
        "mode": mode.to_string(),
        "signs": c.signs,
        "value": format_rat(&report.value),
        "witness": report.witness,
    });
    emit(a.out.as_deref(), "coloring.json", &pretty(&out))
}

fn game(a: GameArgs) -> CmdResult {
    let values = match (&a.hard_k, &a.values) {
        (Some(k), _) => breaker_hard_instance(*k)?,
        (None, Some(path)) => {
            let v = read_json(path)?;
            let items = v.as_array().ok_or_else(|| Failure::Validation(format!("{}: expected a JSON list", path.display())))?;
            items
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    x.as_str()
                        .ok_or_else(|| format!("entry {i} is not a string"))
                        .and_then(parse_rat)
                        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        (None, None) => return Err(Failure::Validation("give --hard-k or --values".into())),
    };
    let mut maker: Box<dyn Strategy> = match a.maker {
        MakerArg::Pairing => Box::new(PairingMaker::relaxed()),
        MakerArg::Greedy => Box::new(GreedyMaker),
    };
    let mut breaker: Box<dyn Strategy> = match a.breaker {
        BreakerArg::Tree => {
            let k = a.hard_k.ok_or_else(|| Failure::Validation("the tree breaker needs --hard-k".into()))?;
            Box::new(TreeBreaker::new(k)?)
        }
        BreakerArg::Random => Box::new(RandomBreaker::new(a.seed, a.wait_prob)),
    };
    let starter = match a.starter {
        StarterArg::Maker => Player::Maker,
        StarterArg::Breaker => Player::Breaker,
    };
    let n = values.len();
    let outcome = play_game(values, maker.as_mut(), breaker.as_mut(), starter, [a.maker_wait, a.breaker_wait])?;
    if let Some(path) = &a.trace {
        emit(Some(path), "trace.csv", &outcome.trace_csv())?;
    }
    let out = json!({
        "n": n,
        "moves": outcome.trace.len(),
        "payoff": format_rat(&outcome.payoff),
        "draw_stop": outcome.draw_stop,
    });
    emit(a.out.as_deref(), "game.json", &pretty(&out))
}

fn two_sparse(path: &Path) -> Result<(Vec<TwoSparseVector>, usize), Failure> {
    let seq = read_vectors(path)?;
    let vs = seq
        .vectors
        .iter()
        .enumerate()
        .map(|(j, v)| TwoSparseVector::from_dense(v).map_err(|e| Failure::Validation(format!("{}: vector {j}: {e}", path.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((vs, seq.m))
}

fn read_assignment(path: &Path) -> Result<MachineAssignment, Failure> {
    let v = read_json(path)?;
    let list = v.get("assign").or_else(|| v.get("assignment")).unwrap_or(&v);
    let assign: Vec<usize> =
        serde_json::from_value(list.clone()).map_err(|e| Failure::Validation(format!("{}: assignment: {e}", path.display())))?;
    Ok(MachineAssignment::new(assign))
}

fn reduce(what: ReduceCommand) -> CmdResult {
    match what {
        ReduceCommand::Build { vectors, out } => {
            let (vs, m) = two_sparse(&vectors)?;
            let eq = vectors_to_maxflow_instance(&vs, m)?;
            emit(out.as_deref(), "reduced.json", &eq.inst.to_json())
        }
        ReduceCommand::Signs { vectors, assignment, out } => {
            let (vs, m) = two_sparse(&vectors)?;
            let eq = vectors_to_maxflow_instance(&vs, m)?;
            let asg = read_assignment(&assignment)?;
            let signs = signs_from_assignment(&eq, &asg)?;
            if !load_identity_holds(&eq, &asg, &signs) {
                return Err(Failure::Violation("per-step load identity fails".into()));
            }
            let value = if vs.is_empty() {
                flowdisc::rational::zero()
            } else {
                discrepancy_of(m, &eq.dense_vectors(), &signs, Mode::OneSidedInterval)?.value
            };
            let out_v = json!({ "signs": signs, "one_sided_interval": format_rat(&value) });
            emit(out.as_deref(), "signs.json", &pretty(&out_v))
        }
        ReduceCommand::Roundtrip { vectors, out } => {
            let (vs, m) = two_sparse(&vectors)?;
            let r = roundtrip_check(&vs, m)?;
            let out_v = json!({
                "lp_optimum": format_rat(&r.lp_optimum),
                "opt_max_flow": format_rat(&r.opt_max_flow),
                "assignment": r.opt_assignment.assign,
                "signs": r.signs,
                "extracted": format_rat(&r.extracted),
                "optimum": format_rat(&r.optimum),
                "optimum_signs": r.optimum_signs,
                "identity_holds": r.identity_holds,
            });
            emit(out.as_deref(), "roundtrip.json", &pretty(&out_v))?;
            if !r.identity_holds || r.extracted > r.opt_max_flow || r.optimum > r.extracted {
                return Err(Failure::Violation("roundtrip inequalities fail".into()));
            }
            Ok(())
        }
    }
}

fn sdp(what: SdpCommand) -> CmdResult {
    match what {
        SdpCommand::ChooseR { delta, n, m } => {
            let r = choose_r(to_f64(&rat_arg("delta", &delta)?), n, m)?;
            emit(None, "r.json", &json!({ "r": r }).to_string())
        }
        SdpCommand::Build { vectors, r, out } => {
            let seq = read_vectors(&vectors)?;
            let b = build_block_instance(&seq, r)?;
            let block = SignedVectorSequence::new(b.dim(), b.vectors)?;
            emit(out.as_deref(), "block.json", &block.to_json())
        }
        SdpCommand::Color { vectors, r, delta, limit, out } => {
            let seq = read_vectors(&vectors)?;
            let d = rat_arg("delta", &delta)?;
            let b = build_block_instance(&seq, r)?;
            match color_block_in_k(&b, &d, limit)? {
                Some(signs) => emit(out.as_deref(), "sdp.json", &signs_to_sdp_vectors(&signs, r)?.to_json()),
                None => Err(Failure::Validation("no block coloring keeps every prefix in K".into())),
            }
        }
        SdpCommand::Verify { vectors, solution, delta, out } => {
            let seq = read_vectors(&vectors)?;
            let sol = in_file(&solution, SdpSolution::from_json(&read(&solution)?))?;
            let d = rat_arg("delta", &delta)?;
            let rep = sdp_prefix_discrepancy(&seq, &sol)?;
            let cap = (flowdisc::rational::one() + &d) * (flowdisc::rational::one() + &d);
            let within = rep.value_sq <= cap;
            let out_v = json!({
                "value_sq": format_rat(&rep.value_sq),
                "row": rep.row,
                "prefix": rep.prefix,
                "within": within,
            });
            emit(out.as_deref(), "verify.json", &pretty(&out_v))?;
            if within {
                Ok(())
            } else {
                Err(Failure::Validation(format!("squared value {} exceeds (1+delta)^2", format_rat(&rep.value_sq))))
            }
        }
        SdpCommand::Mc { delta, n, m, r, samples, seed, out } => {
            let d = to_f64(&rat_arg("delta", &delta)?);
            let r = match r {
                Some(r) => r,
                None => choose_r(d, n, m)?,
            };
            let est = gaussian_measure_mc(r, d, n, m, samples, seed)?;
            let mut v = serde_json::to_value(&est).expect("estimate serializes");
            v["r"] = json!(r);
            emit(out.as_deref(), "mc.json", &pretty(&v))
        }
    }
}

fn bench(a: BenchArgs) -> CmdResult {
    let colorer = a.colorer.colorer()?;
    let params = a.shape.params();
    let rows: Vec<Result<SummaryRow, Failure>> = (0..a.runs)
        .into_par_iter()
        .map(|id| {
            let inst = gen_random_instance(&params, a.seed.wrapping_add(id as u64))?;
            Ok(match a.kind {
                BenchKind::Maxflow => SummaryRow::from_maxflow(id, &inst, &full_round_maxflow(&inst, &colorer)?),
                BenchKind::Totalflow => SummaryRow::from_totalflow(id, &inst, &full_round_totalflow(&inst, &colorer)?),
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let s = summarize(&rows)?;
    if let Some(path) = &a.csv {
        emit(Some(path), "bench.csv", &s.csv)?;
    }
    emit(a.out.as_deref(), "bench.txt", &s.text)?;
    if !s.all_ok {
        let bad: Vec<String> = rows.iter().filter(|r| !r.ok).map(|r| r.id.to_string()).collect();
        return Err(Failure::Violation(format!("bound violated in runs {}", bad.join(", "))));
    }
    Ok(())
}
