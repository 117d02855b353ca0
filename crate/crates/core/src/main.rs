use std::io;

fn main() {
    let status = rap_core::cli::run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(status.0);
}
