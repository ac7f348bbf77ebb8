use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(e) = hilb_cli::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(hilb_cli::EXIT_INPUT as u8);
    }
    let code = hilb_cli::run(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
