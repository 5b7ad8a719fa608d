use beta_spectral::cli;

fn main() {
    std::process::exit(cli::main_entry());
}
