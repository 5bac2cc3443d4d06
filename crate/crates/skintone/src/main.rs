fn main() {
    std::process::exit(skintone::cli::dispatch(std::env::args_os()));
}
