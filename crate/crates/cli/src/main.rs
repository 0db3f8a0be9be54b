use std::process::ExitCode;

fn main() -> ExitCode {
    let env = std::env::var(nbs_cli::config::TAIL_EPS_VAR).ok();
    ExitCode::from(nbs_cli::main_with(std::env::args_os(), env.as_deref()))
}
