use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let status = ecc_profiler::cli::parse_and_run(
        std::env::args_os(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    ExitCode::from(status as u8)
}
