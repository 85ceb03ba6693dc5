fn main() -> std::process::ExitCode {
    ising_cycle::cli::main()
}
