use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(rectify_cli::dispatch(std::env::args()) as u8)
}
