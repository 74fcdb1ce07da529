use std::process::ExitCode;

fn main() -> ExitCode {
    inflow::cli::main()
}
