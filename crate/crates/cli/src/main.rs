fn main() -> std::process::ExitCode {
    steerkit::cli::main_entry()
}
