use clap::Parser;
use rofsim::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            println!("{}", report.summary);
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("rofsim: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
