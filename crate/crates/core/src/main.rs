fn main() {
    std::process::exit(coupled_tops::cli::dispatch(std::env::args_os()));
}
