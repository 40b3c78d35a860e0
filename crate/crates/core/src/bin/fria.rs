use clap::Parser;

fn main() {
    let cli = fria::cli::Cli::parse();
    let code = fria::cli::run(cli, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
