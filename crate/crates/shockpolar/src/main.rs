fn main() {
    std::process::exit(shockpolar::cli::main());
}
