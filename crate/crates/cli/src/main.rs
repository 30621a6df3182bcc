use std::process::ExitCode;

fn main() -> ExitCode {
    firstint_cli::main_with(std::env::args_os())
}
