use clap::Parser;

fn main() {
    let cli = lqmc_cli::Cli::parse();
    if let Err(e) = lqmc_cli::execute(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.failure.exit_code());
    }
}
