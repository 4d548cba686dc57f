fn main() {
    std::process::exit(dpvote::cli::run());
}
