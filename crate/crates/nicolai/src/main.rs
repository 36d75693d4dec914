use clap::Parser;

fn main() {
    let cli = nicolai::cli::Cli::parse();
    std::process::exit(nicolai::cli::run(&cli));
}
