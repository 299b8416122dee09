//! Prints the seven-pipe convergence table for one model and the
//! manufactured-solution rates.
//!
//! ```text
//! cargo run --release -p gasnet-core --example convergence -- linear 5
//! ```

use std::time::Instant;

use gasnet_core::harness::{run_manufactured, run_table1};
use gasnet_core::models::ModelKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let kind: ModelKind = args.next().as_deref().unwrap_or("linear").parse()?;
    let levels: usize = args.next().as_deref().unwrap_or("5").parse()?;
    let start = Instant::now();
    println!("{}", run_table1(kind, levels, 1)?.to_text());
    println!("elapsed {:.1?}", start.elapsed());
    for k in 1..=3 {
        println!("{}", run_manufactured(k, 4)?.to_text());
    }
    Ok(())
}
