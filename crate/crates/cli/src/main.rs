use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(lvg_cli::run_cli(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr()))
}
