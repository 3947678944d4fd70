use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quatquot::io::read_input;
use quatquot::pipeline::{run, Command, Options};

#[derive(Parser)]
#[command(name = "quatquot", version, about = "Toric quaternionic quotients: validation and numerical certification")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check S (and R, if present)
    Validate(Common),
    /// Derive T, Ω and the kernel basis; run the locally-free screen
    Derive(Common),
    /// Scan the transversality determinant over the orbit space
    ScanTransversality(Common),
    /// Joyce determinant scan and its correspondence with transversality
    JoyceCheck(Common),
    /// Descend the quaternionic structure at random points
    Descend(Common),
    /// Twistor-line checks and the classification triple
    Classify(Common),
    /// Invariant quadratic twistor functions beyond the torus span
    Deform(Common),
    /// Every stage in order
    Pipeline(Common),
}

#[derive(Args)]
struct Common {
    /// Input JSON file
    input: PathBuf,
    #[arg(long, group = "format")]
    json: bool,
    #[arg(long, group = "format")]
    text: bool,
    #[arg(long, group = "format")]
    csv: bool,
    /// Grid resolution per axis
    #[arg(long, default_value_t = Options::default().grid)]
    grid: usize,
    /// Random samples for the descent
    #[arg(long, default_value_t = Options::default().samples)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Zero tolerance for normalized determinants
    #[arg(long, default_value_t = Options::default().tol)]
    tol: f64,
    /// Boundary offsets for the Joyce scan
    #[arg(long, value_delimiter = ',', default_values_t = Options::default().eps)]
    eps: Vec<f64>,
    /// Coefficient bound for the locally-free screen
    #[arg(long, default_value_t = Options::default().bound)]
    bound: i64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("QUATQUOT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let (command, args) = match cli.command {
        Cmd::Validate(a) => (Command::Validate, a),
        Cmd::Derive(a) => (Command::Derive, a),
        Cmd::ScanTransversality(a) => (Command::ScanTransversality, a),
        Cmd::JoyceCheck(a) => (Command::JoyceCheck, a),
        Cmd::Descend(a) => (Command::Descend, a),
        Cmd::Classify(a) => (Command::Classify, a),
        Cmd::Deform(a) => (Command::Deform, a),
        Cmd::Pipeline(a) => (Command::Pipeline, a),
    };
    let opts = Options {
        grid: args.grid,
        samples: args.samples,
        seed: args.seed,
        tol: args.tol,
        eps: args.eps,
        bound: args.bound,
    };
    let outcome = read_input(&args.input).and_then(|input| run(command, &input, &opts));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if args.csv {
        match outcome.csv() {
            Some(csv) => print!("{csv}"),
            None => {
                eprintln!("error: {} has no CSV output", command.name());
                return ExitCode::from(2);
            }
        }
    } else if args.text {
        print!("{}", outcome.text());
    } else {
        println!("{}", serde_json::to_string_pretty(&outcome.json()).expect("serializable"));
    }
    ExitCode::from(outcome.exit_code() as u8)
}
