use clap::Parser;
use sispread_cli::app::Cli;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are successes, bad flags are not
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = cli.run() {
        eprintln!("sispread: {e}");
        std::process::exit(e.exit_code());
    }
}
