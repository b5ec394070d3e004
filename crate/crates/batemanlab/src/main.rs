use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(batemanlab::cli::run() as u8)
}
