fn main() -> std::process::ExitCode {
    qsvm::cli::main()
}
