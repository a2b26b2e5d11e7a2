use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(plateau_lab::cli::run(std::env::args_os()))
}
