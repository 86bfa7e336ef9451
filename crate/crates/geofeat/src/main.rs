fn main() {
    std::process::exit(geofeat::cli::run(std::env::args_os().collect()));
}
