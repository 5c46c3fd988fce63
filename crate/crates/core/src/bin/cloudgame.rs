use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cloudgame::cli::run(std::env::args_os()))
}
