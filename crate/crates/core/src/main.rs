fn main() -> std::process::ExitCode {
    roughinv::cli::main()
}
