fn main() -> std::process::ExitCode {
    omnivr::cli::main()
}
