use clap::Parser;

fn main() {
    let args = qwzmem::cli::Args::parse();
    std::process::exit(qwzmem::cli::main_with(&args));
}
