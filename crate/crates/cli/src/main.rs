use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(missq_cli::run(std::env::args_os()))
}
