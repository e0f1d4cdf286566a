fn main() { std::process::exit(tropdiff::cli::run(std::env::args())); }
