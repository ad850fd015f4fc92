fn main() -> std::process::ExitCode {
    shiftlab::cli::main()
}
