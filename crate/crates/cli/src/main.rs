fn main() -> std::process::ExitCode {
    ymtorus::main_with_args()
}
