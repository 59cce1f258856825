use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use qsier_cli::error::{CliError, EXIT_OK};
use qsier_cli::{run, Cli};

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::from(EXIT_OK as u8);
        }
        Err(e) => return fail(&CliError::Usage(e.render().to_string().trim_end().to_owned())),
    };
    match run(cli) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(CliError::Verification(report)) => {
            println!("{report}");
            fail(&CliError::Verification(
                "one or more categories out of tolerance".into(),
            ))
        }
        Err(e) => fail(&e),
    }
}
