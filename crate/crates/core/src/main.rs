use clap::Parser;
use sise::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = run(&cli);
    if result.exit_code == 0 {
        for path in &result.artifacts {
            println!("{}", path.display());
        }
        eprintln!("{}", result.summary);
    } else {
        eprintln!("{}", result.summary);
    }
    std::process::exit(result.exit_code);
}
