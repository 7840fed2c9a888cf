fn main() -> std::process::ExitCode {
    improvise::cli::main()
}
