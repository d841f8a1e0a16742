use clap::Parser;

fn main() {
    let cli = vmap_cli::Cli::parse();
    if let Err(err) = vmap_cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(vmap_cli::exit_code(&err));
    }
}
