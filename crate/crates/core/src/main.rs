fn main() -> std::process::ExitCode {
    dhtrng::cli::main()
}
