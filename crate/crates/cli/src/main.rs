use clap::Parser;

fn main() {
    let args = vanspec::cli::Cli::parse();
    if let Err(e) = vanspec::cli::execute(args) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
