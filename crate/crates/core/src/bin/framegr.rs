fn main() -> std::process::ExitCode {
    framegr::cli::main_from(std::env::args_os())
}
