fn main() {
    std::process::exit(reactive_slab::cli::run(std::env::args_os()));
}
