use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use skillfix_cli::{exit, run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT as u8 } else { 0 });
        }
    };
    let (text, code) = run(&cli);
    if code == exit::INPUT || code == exit::SOLVER && text.starts_with("error:") {
        eprint!("{text}");
    } else {
        print!("{text}");
        let _ = std::io::stdout().flush();
    }
    ExitCode::from(code as u8)
}
