//! Run every stage on a fixture file, as the command-line tool does.
use quatquot::io::read_input;
use quatquot::pipeline::{run, Command, Options};

fn main() -> quatquot::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/k3.json").to_string());
    let input = read_input(path.as_ref())?;
    let opts = Options { grid: 20, samples: 50, ..Options::default() };
    let outcome = run(Command::Pipeline, &input, &opts)?;
    print!("{}", outcome.text());
    std::process::exit(outcome.exit_code());
}
