fn main() -> std::process::ExitCode {
    itree_sim::cli::main()
}
