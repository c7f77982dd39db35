use std::process::ExitCode;

fn main() -> ExitCode {
    corrlab::cli::main_entry()
}
