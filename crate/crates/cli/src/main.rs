use std::io::Write;

use cooldecomp_cli::config::SEGMENTS_ENV;

fn main() {
    let env = std::env::var(SEGMENTS_ENV).ok();
    let outcome = cooldecomp_cli::run(std::env::args_os(), env.as_deref());
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    std::process::exit(outcome.code);
}
