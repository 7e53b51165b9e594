use clap::Parser;

use gwsteer::cli;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    // worker pool for sweep rows and rollout samples
    if let Ok(threads) = std::env::var("GWSTEER_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not size the thread pool: {e}");
                }
            }
            _ => log::warn!("ignoring GWSTEER_THREADS={threads}: expected a positive integer"),
        }
    }

    let cli = cli::Cli::parse();
    if let Err(error) = cli::run(cli) {
        eprintln!("error: {error}");
        std::process::exit(cli::exit_code(&error));
    }
}
