fn main() -> std::process::ExitCode {
    lodco::cli::main_from_env()
}
