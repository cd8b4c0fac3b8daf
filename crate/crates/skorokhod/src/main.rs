use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = skorokhod::Cli::parse();
    match skorokhod::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
