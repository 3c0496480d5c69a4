fn main() {
    std::process::exit(grboot::cli::dispatch(std::env::args_os()));
}
