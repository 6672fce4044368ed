fn main() -> std::process::ExitCode {
    hawkes_micro::cli::main()
}
