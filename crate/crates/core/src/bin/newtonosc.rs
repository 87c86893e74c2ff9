use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(newtonosc::cli::run(std::env::args_os()))
}
