//! `sideband` command-line tool.

fn main() {
    std::process::exit(sideband::cli::main_with_args(std::env::args_os()));
}
