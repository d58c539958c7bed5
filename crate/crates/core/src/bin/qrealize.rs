use clap::Parser;

use qrealize::cli::{run, Cli, EXIT_FAIL, EXIT_PASS};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are validation failures; 2 is reserved for I/O.
            std::process::exit(if e.use_stderr() { EXIT_FAIL } else { EXIT_PASS });
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run(&cli, &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}
