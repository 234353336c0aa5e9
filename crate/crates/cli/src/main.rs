use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shiftnet::bits::BitString;
use shiftnet::circuit::{parse_circuit, write_circuit, Circuit};
use shiftnet::correction::{
    analyze, analyze_sampled, largest_epsilon_within, lemma_budget, lemma_budget_blocks, parse_family, play, CostMethod,
    Family, GameAnalysis, GameSpec, GammaEncoder,
};
use shiftnet::flow::{max_concurrent_flow_with, verify_flow, write_flow_csv, FlowOptions, PivotRule};
use shiftnet::funcgen::{
    build_depth3_identity, build_depth3_shift, build_shifter, random_circuit, shift_input, shift_oracle, RandomCircuitSpec,
    ShiftEncoding, ShiftSpec,
};
use shiftnet::netcode::{
    measure_rate, parse_instance, undirect, verify_correctness, write_instance, CodingSolution, CommInstance,
};
use shiftnet::reduction::{
    build_instance_a, build_network_b, certify_a, certify_b, choose_alpha_b, choose_shift_a, extract_family, Certificate,
    Depth3Shape, ModeAOptions, ModeBOptions, ShiftHint, ShiftLayout,
};
use shiftnet::scalar::{format_rational, parse_rational, Scalar};
use shiftnet::Rational;

const VERSION: &str = env!("CARGO_PKG_VERSION");
const MAX_BUDGET: usize = 30;

#[derive(Parser)]
#[command(name = "shiftnet", version, about = "Shift circuits, k-pairs networks, concurrent flow and their certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// Largest number of message bits enumerated exactly.
    #[arg(long, default_value_t = 20, value_parser = parse_budget)]
    budget: usize,
    /// Seed for random families and circuits.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

fn parse_budget(s: &str) -> Result<usize, String> {
    let b: usize = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if b > MAX_BUDGET {
        return Err(format!("budget {b} exceeds {MAX_BUDGET}"));
    }
    Ok(b)
}

fn parse_ratio(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not a number or fraction"))
}

#[derive(Subcommand)]
enum Command {
    /// Generate a circuit.
    #[command(subcommand)]
    Gen(Gen),
    /// Evaluate a circuit on one input.
    Eval(EvalArgs),
    /// Build the network of a reduction and write it in instance format.
    #[command(subcommand)]
    Reduce(Mode),
    /// Maximum concurrent flow of the undirected version of an instance.
    Flow(FlowArgs),
    /// Measure the witness coding solution of a reduction.
    #[command(subcommand)]
    Coding(Mode),
    /// The correction game.
    #[command(subcommand)]
    Correction(Correction),
    /// Evaluate the full inequality chain of a reduction.
    #[command(subcommand)]
    Certify(Mode),
}

#[derive(Subcommand)]
enum Gen {
    /// Logarithmic barrel shifter with binary shift inputs.
    Barrel {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cyclic: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Depth-3 identity with an empty middle layer.
    #[command(name = "depth3-id")]
    Depth3Id {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        window: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Depth-3 shift circuit with a middle layer of about `eps·n` gates.
    #[command(name = "depth3-shift")]
    Depth3Shift {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Encoding::Onehot)]
        encoding: Encoding,
        #[arg(long)]
        cyclic: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Random bounded fan-in/fan-out circuit.
    Random {
        #[arg(long)]
        n_in: usize,
        #[arg(long)]
        gates: usize,
        #[arg(long)]
        n_out: usize,
        #[arg(long, default_value_t = 2)]
        max_fan_in: usize,
        #[arg(long, default_value_t = 2)]
        max_fan_out: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Encoding {
    Onehot,
    Binary,
}

impl From<Encoding> for ShiftEncoding {
    fn from(e: Encoding) -> Self {
        match e {
            Encoding::Onehot => ShiftEncoding::OneHot,
            Encoding::Binary => ShiftEncoding::Binary,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    circuit: PathBuf,
    /// Data bits `x_1 x_2 ...`, first bit first.
    #[arg(long, conflicts_with = "input")]
    x: Option<String>,
    /// Shift register value `l - 1` as a decimal number.
    #[arg(long, conflicts_with = "l")]
    j: Option<usize>,
    /// Shift amount `l` (1-based).
    #[arg(long)]
    l: Option<usize>,
    /// Every input bit, first bit first.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    cyclic: bool,
    #[arg(long, default_value = "auto", value_parser = clap::value_parser!(ShiftHint))]
    shift: ShiftHint,
}

#[derive(Args, Clone, Debug)]
struct CircuitArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Pair `x_j` with `y_{((j+l-2) mod n)+1}`.
    #[arg(long)]
    cyclic: bool,
    /// How the shift amount enters the circuit.
    #[arg(long, default_value = "auto", value_parser = clap::value_parser!(ShiftHint))]
    shift: ShiftHint,
    /// Flag steps whose size threshold is not met as failures.
    #[arg(long)]
    strict: bool,
    /// Solve the flow LP in exact rational arithmetic.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value = "hybrid", value_parser = clap::value_parser!(PivotRule))]
    rule: PivotRule,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Mode {
    /// Bounded-degree circuit as its own network.
    #[command(name = "A", alias = "a")]
    A {
        #[command(flatten)]
        args: CircuitArgs,
        /// Use this shift instead of the one with most far pairs (reduce only).
        #[arg(long)]
        l0: Option<usize>,
    },
    /// Depth-3 circuit with a supervisor network.
    #[command(name = "B", alias = "b")]
    B {
        #[command(flatten)]
        args: CircuitArgs,
        /// Block length.
        #[arg(long)]
        k: usize,
        /// Claimed middle-layer fraction; defaults to the measured one.
        #[arg(long, value_parser = parse_ratio)]
        eps: Option<Rational>,
        /// Reroute X∪Y nodes of larger degree through new middle gates.
        #[arg(long)]
        split: Option<usize>,
    },
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value = "hybrid", value_parser = clap::value_parser!(PivotRule))]
    rule: PivotRule,
    /// Keep per-commodity cycles in the reported flows.
    #[arg(long)]
    no_cancel: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone, Debug)]
struct GameArgs {
    #[arg(long)]
    n: usize,
    /// Number of players.
    #[arg(long)]
    m: usize,
    /// Family file: hex members or `fixedbits` lines.
    #[arg(long, conflicts_with = "random")]
    family: Option<PathBuf>,
    /// Random family of this many members (uses --seed).
    #[arg(long)]
    random: Option<usize>,
}

#[derive(Subcommand)]
enum Correction {
    /// Expected message lengths and entropies.
    Cost {
        #[command(flatten)]
        game: GameArgs,
        /// Estimate from this many samples instead of enumerating.
        #[arg(long)]
        mc: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// One round on a given string.
    Play {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        beta: String,
        #[command(flatten)]
        common: Common,
    },
    /// The closed-form communication budget.
    Budget {
        #[arg(long)]
        n: usize,
        /// Block length (players m = n/k).
        #[arg(long)]
        k: usize,
        #[arg(long, value_parser = parse_ratio)]
        eps: Rational,
        #[command(flatten)]
        common: Common,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_circuit(path: &PathBuf) -> Result<Circuit> {
    Ok(parse_circuit(&read(path)?)?)
}

fn header(command: &str, config: &[(&str, String)]) -> String {
    let mut out = format!("# shiftnet {VERSION}\n# command: {command}\n");
    for (k, v) in config {
        writeln!(out, "# {k}: {v}").unwrap();
    }
    out
}

fn common_config(c: &Common) -> Vec<(&'static str, String)> {
    vec![("budget", c.budget.to_string()), ("seed", c.seed.to_string())]
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Circuit files are written bare so they parse back; reports get a header.
fn emit_report(common: &Common, command: &str, config: &[(&str, String)], body: &str) -> Result<()> {
    let text = match common.format {
        Format::Text => format!("{}{body}", header(command, config)),
        Format::Csv => body.to_string(),
    };
    emit(common, &text)
}

fn circuit_config(a: &CircuitArgs) -> Vec<(&'static str, String)> {
    let mut v = vec![
        ("circuit", a.circuit.display().to_string()),
        ("cyclic", a.cyclic.to_string()),
        ("shift", format!("{:?}", a.shift).to_lowercase()),
        ("strict", a.strict.to_string()),
        ("lp", if a.exact { "exact".into() } else { "f64".into() }),
        ("pivot rule", format!("{:?}", a.rule).to_lowercase()),
    ];
    v.extend(common_config(&a.common));
    v
}

fn run_gen(g: Gen) -> Result<bool> {
    let (circuit, common) = match g {
        Gen::Barrel { n, cyclic, common } => {
            (build_shifter(if cyclic { ShiftSpec::cyclic(n) } else { ShiftSpec::plain(n) })?, common)
        }
        Gen::Depth3Id { n, window, common } => (build_depth3_identity(n, window)?, common),
        Gen::Depth3Shift { n, eps, encoding, cyclic, common } => {
            let spec = if cyclic { ShiftSpec::cyclic(n) } else { ShiftSpec::plain(n) };
            let built = build_depth3_shift(spec, eps, encoding.into())?;
            eprintln!("epsilon {} (|F|/n), X∪Y degree {}", format_rational(&built.epsilon), built.c);
            (built.circuit, common)
        }
        Gen::Random { n_in, gates, n_out, max_fan_in, max_fan_out, common } => {
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            let spec = RandomCircuitSpec { n_in, n_gates: gates, n_out, max_fan_in, max_fan_out };
            (random_circuit(&mut rng, spec), common)
        }
    };
    emit(&common, &write_circuit(&circuit))?;
    Ok(true)
}

fn parse_bits(s: &str) -> Result<Vec<bool>> {
    Ok(BitString::parse(s).ok_or_else(|| anyhow!("`{s}` is not a bit string"))?.0)
}

fn run_eval(a: EvalArgs) -> Result<bool> {
    let c = load_circuit(&a.circuit)?;
    let mut out = String::new();
    let (input, oracle) = match (&a.input, &a.x) {
        (Some(bits), None) => (parse_bits(bits)?, None),
        (None, Some(x)) => {
            let layout = ShiftLayout::detect(&c, a.cyclic, a.shift)?;
            let enc = layout.encoding.ok_or_else(|| anyhow!("circuit has no shift block; use --input"))?;
            let x = parse_bits(x)?;
            if x.len() != layout.n {
                bail!("--x has {} bits, the circuit shifts {}", x.len(), layout.n);
            }
            let l = match (a.j, a.l) {
                (Some(j), None) => j + 1,
                (None, Some(l)) => l,
                _ => bail!("give the shift with --j or --l"),
            };
            if l == 0 || l > layout.n {
                bail!("shift {l} outside 1..={}", layout.n);
            }
            let spec = ShiftSpec { n: layout.n, cyclic: layout.cyclic };
            (shift_input(enc, &x, l), Some(shift_oracle(spec, &x, l)?))
        }
        _ => bail!("give either --x or --input"),
    };
    let y = c.evaluate(&input)?;
    writeln!(out, "input  {}", BitString(input)).unwrap();
    writeln!(out, "output {}", BitString(y.clone())).unwrap();
    let ok = match oracle {
        Some(expect) => {
            let ok = expect == y;
            writeln!(out, "oracle {} ({})", BitString(expect), if ok { "match" } else { "MISMATCH" }).unwrap();
            ok
        }
        None => true,
    };
    print!("{out}");
    Ok(ok)
}

fn game_spec(g: &GameArgs, seed: u64) -> Result<GameSpec> {
    let family = match (&g.family, g.random) {
        (Some(p), _) => parse_family(&read(p)?, g.n)?,
        (None, Some(size)) => Family::random(&mut ChaCha8Rng::seed_from_u64(seed), g.n, size)?,
        (None, None) => Family::full(g.n)?,
    };
    Ok(GameSpec::new(g.m, family)?)
}

fn game_config(g: &GameArgs, common: &Common) -> Vec<(&'static str, String)> {
    let mut v = vec![
        ("n", g.n.to_string()),
        ("m", g.m.to_string()),
        ("family", match (&g.family, g.random) {
            (Some(p), _) => p.display().to_string(),
            (None, Some(s)) => format!("random, {s} members"),
            (None, None) => "all strings".into(),
        }),
    ];
    v.extend(common_config(common));
    v
}

fn cost_report(a: &GameAnalysis, format: Format) -> String {
    let mut out = String::new();
    if format == Format::Csv {
        out.push_str("player,expected_len,entropy,distinct,prefix_free\n");
        for (i, p) in a.players.iter().enumerate() {
            writeln!(out, "{},{},{:.12},{},{}", i + 1, format_rational(&p.expected_len), p.entropy, p.distinct_messages, p.prefix_free)
                .unwrap();
        }
        writeln!(out, "total,{},,,", format_rational(&a.total_expected)).unwrap();
        return out;
    }
    writeln!(out, "family size {} (epsilon {:.9})", a.family_size, a.epsilon).unwrap();
    match &a.method {
        CostMethod::Exact => writeln!(out, "method: exact enumeration of 2^{} strings", a.n).unwrap(),
        CostMethod::MonteCarlo { samples, seed, half_width } => writeln!(
            out,
            "method: {samples} samples (seed {seed}); total within ±{half_width:.6} at 95% confidence"
        )
        .unwrap(),
    }
    for (i, p) in a.players.iter().enumerate() {
        writeln!(
            out,
            "player {}: E|R| = {} (~{:.6}), H(R) = {:.9}, {} messages, prefix-free {}",
            i + 1,
            format_rational(&p.expected_len),
            p.expected_len.to_f64(),
            p.entropy,
            p.distinct_messages,
            p.prefix_free
        )
        .unwrap();
    }
    writeln!(out, "total E|R| = {} (~{:.6})", format_rational(&a.total_expected), a.total_expected.to_f64()).unwrap();
    let lemma = lemma_budget(a.n, a.m, a.epsilon).expect("valid parameters");
    writeln!(out, "three-term budget {:.6}", lemma.total).unwrap();
    writeln!(out, "corrections outside the family: {}", a.failures).unwrap();
    out
}

fn run_correction(c: Correction) -> Result<bool> {
    match c {
        Correction::Cost { game, mc, common } => {
            let spec = game_spec(&game, common.seed)?;
            let a = match mc {
                Some(samples) => analyze_sampled(&spec, &GammaEncoder, samples, common.seed)?,
                None => analyze(&spec, &GammaEncoder, common.budget)?,
            };
            let mut config = game_config(&game, &common);
            if let Some(s) = mc {
                config.push(("samples", s.to_string()));
            }
            emit_report(&common, "correction cost", &config, &cost_report(&a, common.format))?;
            Ok(a.failures == 0 && a.prefix_free())
        }
        Correction::Play { game, beta, common } => {
            let spec = game_spec(&game, common.seed)?;
            let t = play(&spec, &BitString(parse_bits(&beta)?))?;
            let mut out = String::new();
            writeln!(out, "beta      {}", t.beta).unwrap();
            writeln!(out, "nearest   {}", t.target).unwrap();
            for (i, (r, chi)) in t.messages.iter().zip(&t.outputs).enumerate() {
                writeln!(out, "player {}: R = {r}, chi = {chi}", i + 1).unwrap();
            }
            let corrected = t.corrected();
            let member = spec.family.contains(corrected.to_u64() as u32);
            writeln!(out, "corrected {corrected} (in family: {member})").unwrap();
            writeln!(out, "bits sent {}", t.total_bits).unwrap();
            emit_report(&common, "correction play", &game_config(&game, &common), &out)?;
            Ok(member)
        }
        Correction::Budget { n, k, eps, common } => {
            let e = eps.to_f64();
            let b = lemma_budget_blocks(n, k, e)?;
            let limit = 5.0 * n as f64 / k as f64;
            let mut out = String::new();
            if common.format == Format::Csv {
                out.push_str("term1,term2,term3,total,five_n_over_k,within\n");
                writeln!(out, "{:.12},{:.12},{:.12},{:.12},{:.12},{}", b.terms[0], b.terms[1], b.terms[2], b.total, limit, b.total <= limit + 1e-9)
                    .unwrap();
            } else {
                writeln!(out, "3n/k                      = {:.12}", b.terms[0]).unwrap();
                writeln!(out, "(2n/k) lg(k sqrt(eps/2)+1) = {:.12}", b.terms[1]).unwrap();
                writeln!(out, "sqrt(eps/8) n lg(2/eps)   = {:.12}", b.terms[2]).unwrap();
                writeln!(out, "total                     = {:.12}", b.total).unwrap();
                writeln!(out, "5n/k                      = {:.12}", limit).unwrap();
                writeln!(out, "within 5n/k: {}", b.total <= limit + 1e-9).unwrap();
                match largest_epsilon_within(k, 5.0) {
                    Some(x) => writeln!(out, "largest eps within 5n/k at this k: {x:.9e}").unwrap(),
                    None => writeln!(out, "no eps keeps the budget within 5n/k at this k").unwrap(),
                }
            }
            let config = vec![("n", n.to_string()), ("k", k.to_string()), ("eps", format_rational(&eps))];
            emit_report(&common, "correction budget", &config, &out)?;
            Ok(true)
        }
    }
}

fn run_flow<S: Scalar>(a: &FlowArgs) -> Result<bool> {
    let inst = parse_instance(&read(&a.instance)?)?;
    let flow_inst = undirect(&inst, false)?;
    let sol = max_concurrent_flow_with::<S>(&flow_inst, FlowOptions { rule: a.rule, cancel_cycles: !a.no_cancel })?;
    let violations = verify_flow(&flow_inst, &sol);
    let body = match a.common.format {
        Format::Csv => write_flow_csv(&flow_inst, &sol),
        Format::Text => {
            let mut out = format!("rate {}\n", shiftnet::flow::format_scalar(&sol.rate));
            if !S::is_exact() {
                writeln!(out, "tolerance 1e-6").unwrap();
            }
            for (i, st) in sol.status.iter().enumerate() {
                writeln!(out, "commodity {}: {:?}", i + 1, st).unwrap();
            }
            writeln!(out, "verification: {} violations", violations.len()).unwrap();
            for v in &violations {
                writeln!(out, "  {v}").unwrap();
            }
            out
        }
    };
    let mut config = vec![
        ("instance", a.instance.display().to_string()),
        ("lp", if S::is_exact() { "exact".into() } else { "f64".into() }),
        ("pivot rule", format!("{:?}", a.rule).to_lowercase()),
    ];
    config.extend(common_config(&a.common));
    emit_report(&a.common, "flow", &config, &body)?;
    Ok(violations.is_empty())
}

fn mode_a_options(a: &CircuitArgs) -> ModeAOptions {
    ModeAOptions { cyclic: a.cyclic, hint: a.shift, budget: a.common.budget, strict: a.strict, rule: a.rule }
}

fn mode_b_options(a: &CircuitArgs, k: usize, eps: &Option<Rational>, split: Option<usize>) -> ModeBOptions {
    ModeBOptions {
        k,
        eps: eps.clone(),
        cyclic: a.cyclic,
        hint: a.shift,
        split,
        budget: a.common.budget,
        strict: a.strict,
        rule: a.rule,
    }
}

fn b_config(args: &CircuitArgs, k: usize, eps: &Option<Rational>, split: Option<usize>) -> Vec<(&'static str, String)> {
    let mut config = circuit_config(args);
    config.push(("k", k.to_string()));
    config.push(("eps", eps.as_ref().map_or("measured".into(), format_rational)));
    config.push(("split", split.map_or("none".into(), |s| s.to_string())));
    config
}

fn render(cert: &Certificate, format: Format) -> String {
    match format {
        Format::Text => cert.render_table(),
        Format::Csv => cert.to_csv(),
    }
}

fn run_certify<S: Scalar>(mode: &Mode) -> Result<bool> {
    let (cert, args, config) = match mode {
        Mode::A { args, .. } => {
            let rep = certify_a::<S>(&load_circuit(&args.circuit)?, &mode_a_options(args))?;
            (rep.certificate, args, circuit_config(args))
        }
        Mode::B { args, k, eps, split } => {
            let rep = certify_b::<S>(&load_circuit(&args.circuit)?, &mode_b_options(args, *k, eps, *split))?;
            (rep.certificate, args, b_config(args, *k, eps, *split))
        }
    };
    let name = format!("certify {}", cert.mode);
    emit_report(&args.common, &name, &config, &render(&cert, args.common.format))?;
    Ok(cert.verdict())
}

/// Instance, witness solution, summary lines, arguments and config echo.
type Reduction<'a> = (CommInstance, CodingSolution, String, &'a CircuitArgs, Vec<(&'static str, String)>);

fn reduction_instance(mode: &Mode) -> Result<Reduction<'_>> {
    let mut summary = String::new();
    match mode {
        Mode::A { args, l0 } => {
            let c = load_circuit(&args.circuit)?;
            let layout = ShiftLayout::detect(&c, args.cyclic, args.shift)?;
            let choice = choose_shift_a(&c, &layout)?;
            let l0 = l0.unwrap_or(choice.l0);
            writeln!(summary, "n {}, c {}, l0 {l0}", layout.n, choice.c).unwrap();
            writeln!(summary, "far pairs by shift: {:?}", choice.counts).unwrap();
            let (inst, sol) = build_instance_a(&c, &layout, l0)?;
            let mut config = circuit_config(args);
            config.push(("l0", l0.to_string()));
            Ok((inst, sol, summary, args, config))
        }
        Mode::B { args, k, eps, split } => {
            let c = load_circuit(&args.circuit)?;
            let layout = ShiftLayout::detect(&c, args.cyclic, args.shift)?;
            let shape = Depth3Shape::new(&c, layout, *split)?;
            let alpha = choose_alpha_b(&shape, *k)?;
            let ex = extract_family(&shape, alpha.alpha0, args.common.budget)?;
            let net = build_network_b(&ex.gamma, &shape.layout, alpha.alpha0, &ex.family, *k, args.common.budget)?;
            writeln!(summary, "n {}, k {k}, c {}, alpha0 {}", shape.n(), shape.c, alpha.alpha0).unwrap();
            writeln!(summary, "far blocks by alignment: {:?}", alpha.counts).unwrap();
            writeln!(summary, "family size {}, fhat {}", ex.family.len(), ex.fhat).unwrap();
            let costs: Vec<String> = net.costs.iter().map(format_rational).collect();
            writeln!(summary, "c_l = E|R_l|: {}", costs.join(" ")).unwrap();
            Ok((net.instance, net.solution, summary, args, b_config(args, *k, eps, *split)))
        }
    }
}

fn run_reduce(mode: &Mode) -> Result<bool> {
    let (inst, _, summary, args, config) = reduction_instance(mode)?;
    let text = write_instance(&inst);
    match &args.common.output {
        Some(p) => {
            fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
            print!("{}{summary}", header("reduce", &config));
            println!("instance written to {}", p.display());
        }
        None => print!("{}{summary}{text}", header("reduce", &config)),
    }
    Ok(true)
}

fn run_coding(mode: &Mode) -> Result<bool> {
    let (inst, sol, summary, args, config) = reduction_instance(mode)?;
    let correct = verify_correctness(&inst, &sol, args.common.budget)?;
    let report = measure_rate(&inst, &sol, args.common.budget)?;
    let body = match args.common.format {
        Format::Csv => report.to_csv(),
        Format::Text => {
            let mut out = summary;
            writeln!(out, "correct on all {} tuples: {}", correct.tuples, correct.passed()).unwrap();
            if let Some(ce) = &correct.counterexample {
                let msgs: Vec<String> = ce.messages.iter().map(|m| m.to_string()).collect();
                writeln!(out, "counterexample: messages {} decode pair {} as {}", msgs.join(" "), ce.pair + 1, ce.decoded).unwrap();
            }
            out.push_str(&report.summary());
            out
        }
    };
    emit_report(&args.common, "coding", &config, &body)?;
    Ok(correct.passed() && report.violations.is_empty())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen(g) => run_gen(g),
        Command::Eval(a) => run_eval(a),
        Command::Reduce(m) => run_reduce(&m),
        Command::Flow(a) => {
            if a.exact {
                run_flow::<Rational>(&a)
            } else {
                run_flow::<f64>(&a)
            }
        }
        Command::Coding(m) => run_coding(&m),
        Command::Correction(c) => run_correction(c),
        Command::Certify(m) => {
            let exact = match &m {
                Mode::A { args, .. } | Mode::B { args, .. } => args.exact,
            };
            if exact {
                run_certify::<Rational>(&m)
            } else {
                run_certify::<f64>(&m)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
