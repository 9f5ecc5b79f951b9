fn main() -> std::process::ExitCode {
    spikefeat::cli::main()
}
