fn main() -> std::process::ExitCode {
    manifold_hermite::cli::main()
}
