use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qsat::amplifier::{self, Dyadic, LogisticParams};
use qsat::entropy::{self, CMatrix, DensityMatrix, KrausChannel, LogBase};
use qsat::lindblad::{self, Classification, DissipativeParams, HamiltonianParams};
use qsat::pipeline::{self, Engine, SolveOptions, EXIT_ERROR};
use qsat::simulator::{self, DEFAULT_WIDTH_CAP};
use qsat::{compile, CnfInstance};
use serde::Serialize;
use serde_json::{json, Value};
use std::error::Error;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

type Res<T> = Result<T, Box<dyn Error>>;

/// Largest register whose amplitudes `simulate` will print.
const DUMP_WIDTH: usize = 12;

#[derive(Parser)]
#[command(name = "qsat", version, about = "Quantum SAT circuit simulation and discriminators")]
struct Cli {
    /// Emit JSON instead of plain text where both are available.
    #[arg(long, global = true)]
    json: bool,
    /// Write CSV trajectories to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_WIDTH_CAP)]
    width_cap: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on a DIMACS file (exit 10 SAT, 20 UNSAT).
    Solve(SolveArgs),
    /// Print the qubit layout and gate list.
    Compile { file: PathBuf },
    /// Run the circuit and report the success probability.
    Simulate { file: PathBuf },
    /// Iterate the logistic map from q^2.
    Amplify(AmplifyArgs),
    /// Run the two-level discriminator for a weight q.
    Lindblad(LindbladArgs),
    /// Entropy metrics for a state and channel read from JSON.
    Entropy(EntropyArgs),
    /// Count satisfying assignments by brute force.
    Oracle { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Chaos,
    Lindblad,
    Both,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = EngineArg::Chaos)]
    engine: EngineArg,
    #[arg(long, default_value_t = amplifier::DEFAULT_A)]
    a: f64,
    /// Logistic steps (default 2n).
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    gamma_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma_im: f64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    e0: i64,
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    e1: i64,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long, default_value_t = lindblad::DEFAULT_DT)]
    dt: f64,
    /// Estimate q^2 from this many seeded measurement shots.
    #[arg(long)]
    shots: Option<u64>,
    /// Include wall-clock stage timings in the report.
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct AmplifyArgs {
    /// q^2 as a fraction `r/d` or a decimal.
    #[arg(long)]
    q2: String,
    #[arg(long, default_value_t = amplifier::DEFAULT_A)]
    a: f64,
    /// Defaults to 2n when q^2 is given as r/2^n.
    #[arg(long)]
    steps: Option<usize>,
    /// Also run the big-integer interval oracle (needs q^2 = r/2^n and a
    /// with at most two decimals).
    #[arg(long)]
    certify: bool,
}

#[derive(Args)]
struct LindbladArgs {
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma_im: f64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    e0: i64,
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    e1: i64,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long, default_value_t = lindblad::DEFAULT_DT)]
    dt: f64,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Overrides the `base` field of the input.
    #[arg(long)]
    base: Option<String>,
    /// Random rotations tried inside degenerate eigenspaces for I1.
    #[arg(long, default_value_t = 0)]
    search_budget: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

fn run(cli: &Cli) -> Res<i32> {
    match &cli.command {
        Command::Solve(args) => solve(cli, args),
        Command::Compile { file } => compile_cmd(cli, file),
        Command::Simulate { file } => simulate(cli, file),
        Command::Amplify(args) => amplify(cli, args),
        Command::Lindblad(args) => lindblad_cmd(cli, args),
        Command::Entropy(args) => entropy_cmd(cli, args),
        Command::Oracle { file } => oracle(cli, file),
    }
}

fn read_instance(path: &Path) -> Res<CnfInstance> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(CnfInstance::parse_dimacs(&text)?)
}

fn print_json<T: Serialize + ?Sized>(value: &T) -> Res<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", qsat::json::to_string_pretty(value)?)?;
    Ok(())
}

fn emit_csv(cli: &Cli, body: &str) -> Res<()> {
    match &cli.csv {
        Some(path) => std::fs::write(path, body).map_err(|e| format!("{}: {e}", path.display()))?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn solve(cli: &Cli, args: &SolveArgs) -> Res<i32> {
    let instance = read_instance(&args.file)?;
    let opts = SolveOptions {
        engine: match args.engine {
            EngineArg::Chaos => Engine::Chaos,
            EngineArg::Lindblad => Engine::Lindblad,
            EngineArg::Both => Engine::Both,
        },
        a: args.a,
        steps: args.steps,
        gamma: Complex64::new(args.gamma_re, args.gamma_im),
        energies: HamiltonianParams::new(args.e0, args.e1)?,
        t_final: args.t_final,
        dt: args.dt,
        shots: args.shots,
        seed: cli.seed,
        width_cap: cli.width_cap,
        timings: args.timings,
    };
    let report = pipeline::solve(&instance, &opts)?;
    print_json(&report)?;
    if let Some(d) = &report.diagnostic {
        eprintln!("disagreement: {d}");
    }
    Ok(report.exit_code())
}

fn compile_cmd(cli: &Cli, file: &Path) -> Res<i32> {
    let circuit = compile(&read_instance(file)?)?;
    if cli.json {
        print_json(&circuit)?;
        return Ok(0);
    }
    let l = &circuit.layout;
    let mut out = String::new();
    writeln!(out, "n = {}, m = {}, mu = {}, total = {}", l.n, l.m, l.mu, l.total)?;
    writeln!(out, "s = {:?}, s_final = {}", l.s, l.s_final)?;
    for op in &circuit.sequence.ops {
        let neg = if op.negate_controls.iter().any(|&b| b) {
            format!(" neg={:?}", op.negate_controls)
        } else {
            String::new()
        };
        writeln!(out, "{} {:?}{neg}", serde_json::to_value(op.kind)?.as_str().unwrap_or("?"), op.wires)?;
    }
    print!("{out}");
    Ok(0)
}

fn simulate(cli: &Cli, file: &Path) -> Res<i32> {
    let circuit = compile(&read_instance(file)?)?;
    let state = simulator::init_state_with_cap(&circuit.layout, cli.width_cap)?;
    let state = simulator::apply(state, &circuit.sequence)?;
    let p = simulator::success_probability(&state, &circuit.layout)?;
    let amplitudes: Option<Vec<Value>> = (state.width() <= DUMP_WIDTH).then(|| {
        state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, a)| json!({"index": i, "re": a.re, "im": a.im}))
            .collect()
    });
    if cli.json {
        print_json(&json!({
            "width": state.width(),
            "success_probability": p,
            "amplitudes": amplitudes,
        }))?;
    } else {
        println!("width = {}", state.width());
        println!("success_probability = {p}");
        for a in amplitudes.iter().flatten() {
            let w = state.width();
            let i = a["index"].as_u64().unwrap_or(0);
            println!("|{:0w$b}>  {} {:+}i", i, a["re"], a["im"].as_f64().unwrap_or(0.0));
        }
    }
    Ok(0)
}

/// `q^2` from `r/d` or a decimal; the dyadic form is kept when `d` is a power
/// of two.
fn parse_q2(s: &str) -> Res<(f64, Option<Dyadic>)> {
    if let Some((num, den)) = s.split_once('/') {
        let num: u64 = num.trim().parse()?;
        let den: u64 = den.trim().parse()?;
        if den == 0 || num > den {
            return Err(format!("q^2 = {s} is not in [0, 1]").into());
        }
        let dyadic = den
            .is_power_of_two()
            .then(|| Dyadic::new(num, den.trailing_zeros()))
            .transpose()?;
        Ok((num as f64 / den as f64, dyadic))
    } else {
        Ok((s.trim().parse()?, None))
    }
}

/// `a` as a fraction over 100 when it has at most two decimals.
fn a_as_hundredths(a: f64) -> Option<u64> {
    let scaled = (a * 100.0).round();
    ((scaled / 100.0 - a).abs() < 1e-12 && scaled >= 0.0).then_some(scaled as u64)
}

fn amplify(cli: &Cli, args: &AmplifyArgs) -> Res<i32> {
    let (q2, dyadic) = parse_q2(&args.q2)?;
    let steps = match (args.steps, dyadic) {
        (Some(s), _) => s,
        (None, Some(d)) => 2 * d.exp as usize,
        (None, None) => return Err("--steps is required unless q^2 is given as r/2^n".into()),
    };
    let params = LogisticParams::new(args.a, steps, amplifier::DEFAULT_THRESHOLD)?;
    let (decision, traj) = amplifier::decide_sat(q2, &params)?;

    let mut csv = String::from("step,x\n");
    for (m, x) in traj.xs.iter().enumerate() {
        writeln!(csv, "{m},{x}")?;
    }
    emit_csv(cli, &csv)?;

    let mut verdict = json!({
        "decision": decision,
        "first_crossing": traj.first_crossing,
    });
    if args.certify {
        let d = dyadic.ok_or("--certify needs q^2 = r/2^n")?;
        let a_num = a_as_hundredths(args.a).ok_or("--certify needs a with at most two decimals")?;
        let oracle = amplifier::iterate_oracle(
            d,
            a_num,
            100,
            steps,
            amplifier::DEFAULT_THRESHOLD,
            amplifier::required_precision(steps).max(64 + 4 * d.exp),
        )?;
        verdict["oracle_first_crossing"] = json!(oracle.trajectory.first_crossing);
        verdict["certified"] = json!(oracle.certified);
        verdict["agrees"] = json!(oracle.trajectory.first_crossing == traj.first_crossing);
    }
    print_json(&verdict)?;
    Ok(0)
}

fn lindblad_cmd(cli: &Cli, args: &LindbladArgs) -> Res<i32> {
    let gamma = DissipativeParams::new(Complex64::new(args.gamma_re, args.gamma_im))?;
    let energies = HamiltonianParams::new(args.e0, args.e1)?;
    let t_final = args
        .t_final
        .unwrap_or_else(|| lindblad::default_t_final(&gamma, &energies));
    let record = lindblad::discriminator_trajectory(args.q, &gamma, &energies, t_final, args.dt)?;
    let classification = lindblad::classify(&record, lindblad::DEFAULT_DECAY_FLOOR)?;

    let mut csv = String::from("t,p1,abs_c\n");
    for ((t, p), c) in record.times.iter().zip(&record.p1).zip(&record.coherence) {
        writeln!(csv, "{t},{p},{}", c.norm())?;
    }
    emit_csv(cli, &csv)?;

    let decision = match classification {
        Classification::Damped => "q_nonzero",
        Classification::Oscillatory => "q_zero",
        Classification::Stationary => "inconclusive",
    };
    print_json(&json!({
        "classification": classification,
        "decision": decision,
        "t_final": t_final,
    }))?;
    Ok(0)
}

fn parse_complex_matrix(v: &Value) -> Res<CMatrix> {
    let rows = v.as_array().ok_or("matrix must be an array of rows")?;
    let d = rows.len();
    let cols = rows
        .first()
        .and_then(Value::as_array)
        .map(Vec::len)
        .ok_or("matrix must have at least one row")?;
    let mut m = CMatrix::zeros(d, cols);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().filter(|r| r.len() == cols).ok_or("ragged matrix")?;
        for (j, entry) in row.iter().enumerate() {
            m[(i, j)] = match entry {
                Value::Number(x) => Complex64::new(x.as_f64().ok_or("bad number")?, 0.0),
                Value::Array(pair) if pair.len() == 2 => Complex64::new(
                    pair[0].as_f64().ok_or("bad real part")?,
                    pair[1].as_f64().ok_or("bad imaginary part")?,
                ),
                _ => return Err("entries must be numbers or [re, im] pairs".into()),
            };
        }
    }
    Ok(m)
}

fn entropy_cmd(cli: &Cli, args: &EntropyArgs) -> Res<i32> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| format!("{}: {e}", args.input.display()))?;
    let input: Value = serde_json::from_str(&text)?;
    let rho = DensityMatrix::new(parse_complex_matrix(&input["rho"])?)?;
    let kraus = input["channel"]["kraus"]
        .as_array()
        .ok_or("channel.kraus must be an array of matrices")?
        .iter()
        .map(parse_complex_matrix)
        .collect::<Res<Vec<_>>>()?;
    let channel = KrausChannel::new(kraus)?;
    let base = match (&args.base, &input["base"]) {
        (Some(s), _) => LogBase::parse(s)?,
        (None, Value::Null) => LogBase::Two,
        (None, Value::String(s)) => LogBase::parse(s)?,
        (None, Value::Number(x)) => LogBase::parse(&x.to_string())?,
        (None, _) => return Err("base must be 2 or \"e\"".into()),
    };

    let report = entropy::entropy_report(&rho, &channel, base)?;
    let i1 = if args.search_budget > 0 {
        entropy::mutual_entropy_search(&rho, &channel, base, args.search_budget, cli.seed)?
    } else {
        report.i1
    };
    let comparison = channel
        .is_rank_one_pvm()
        .then(|| entropy::pvm_comparison(&rho, &channel, base))
        .transpose()?;
    print_json(&json!({
        "S": report.s_rho,
        "S_out": report.s_out,
        "S_e": report.s_e,
        "I1": i1,
        "I2": report.i2,
        "I3": report.i3,
        "pvm_comparison": comparison.map(|c| json!({
            "i1_bounded": c.i1_bounded,
            "i2_zero": c.i2_zero,
            "i3_equals_s": c.i3_equals_s,
        })),
    }))?;
    Ok(0)
}

fn oracle(cli: &Cli, file: &Path) -> Res<i32> {
    let instance = read_instance(file)?;
    let r = instance.count_satisfying()?;
    let n = instance.num_vars();
    if cli.json {
        print_json(&json!({"n": n, "r": r, "assignments": 1u64 << n}))?;
    } else {
        println!("r = {r}");
        println!("2^n = {}", 1u64 << n);
    }
    Ok(0)
}
