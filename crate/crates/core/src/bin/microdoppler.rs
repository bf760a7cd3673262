use clap::Parser;

use microdoppler::cli::{diagnostic, run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("{}", diagnostic(&e));
            std::process::exit(1);
        }
    }
}
