use std::process::ExitCode;

use clap::Parser;
use kazhdan_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("kazhdan: cannot set up {t} threads: {e}");
            return ExitCode::from(3);
        }
    }
    let (code, report) = kazhdan_cli::run(&cli);
    print!("{report}");
    if code != 0 {
        if let Ok(v) = serde_json::from_str::<serde_json::Value>(&report) {
            if let Some(m) = v["error"]["message"].as_str() {
                eprintln!("kazhdan: {m}");
            }
        }
    }
    ExitCode::from(code as u8)
}
