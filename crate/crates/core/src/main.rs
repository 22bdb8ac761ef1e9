fn main() -> std::process::ExitCode {
    byzvision::cli::main()
}
