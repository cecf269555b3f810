use clap::Parser;

fn main() {
    let cli = circle_pattern::cli::Cli::parse();
    std::process::exit(circle_pattern::cli::run(cli));
}
