fn main() {
    std::process::exit(etc_lab::cli::dispatch(std::env::args_os()));
}
