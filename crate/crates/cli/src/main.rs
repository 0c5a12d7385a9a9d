use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(bioprep_cli::run(std::env::args_os()))
}
