//! Trains on a config and prints the four-mode accuracy table.
//!
//! cargo run --release -p digit-reward --example desk_run -- configs/desk.json

use std::time::Instant;

use digit_reward::classifier::AblationMode;
use digit_reward::config::LoadedConfig;
use digit_reward::eval::{compare_modes, summary_table};
use digit_reward::pipeline;

fn main() -> digit_reward::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/desk.json".into());
    let cfg = LoadedConfig::load(&path)?;
    let start = Instant::now();
    let trained = pipeline::train(&cfg)?;
    for pool in &trained.model.pools {
        println!(
            "digit {}: {:?}",
            pool.digit,
            pool.round_counts(cfg.config.selection.rounds)
        );
    }
    println!("trained in {:.1}s", start.elapsed().as_secs_f64());
    let reports = compare_modes(&trained.split, &trained.model, &cfg.config)?;
    print!("{}", summary_table(&reports));
    for r in &reports {
        if r.mode == AblationMode::Full {
            print!("{}", r.confusion_csv());
        }
    }
    println!("total {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
