use alpha2_dynamo::cli::{run, Cli};
use clap::Parser;

fn main() {
    let cli = Cli::parse();

    // DYNAMO_THREADS caps sweep parallelism; 0 or unset means automatic.
    let threads = std::env::var("DYNAMO_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0);
    let outcome = if threads >= 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(_) => run(&cli),
        }
    } else {
        run(&cli)
    };

    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
