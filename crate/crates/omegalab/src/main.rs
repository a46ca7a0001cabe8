use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use omegalab::cli::{run, Cli};
use omegalab::records::write_records;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(rows) => {
            let mut out = io::BufWriter::new(io::stdout().lock());
            if let Err(e) =
                write_records(&mut out, &rows, cli.params.format).and_then(|()| out.flush())
            {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
