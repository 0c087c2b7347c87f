//! `rankaft bench`: wall-time sweep of the full vs sub-sampled loss.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankaft::bench::loss_timing_sweep;
use rankaft::Result;

#[derive(clap::Args)]
pub struct Args {
    /// Ascending sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000,8000")]
    sizes: Vec<usize>,

    /// Partners sampled per event subject.
    #[arg(long, default_value_t = 5)]
    pairs_per_event: usize,

    #[arg(long, default_value_t = 7)]
    repetitions: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Optional CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let table = loss_timing_sweep(&args.sizes, args.pairs_per_event, args.repetitions, &mut rng)?;

    println!(
        "{:>8} {:>16} {:>16} {:>10}",
        "n", "full (s)", "subsampled (s)", "pairs"
    );
    for row in &table.rows {
        println!(
            "{:>8} {:>16.6e} {:>16.6e} {:>10}",
            row.n, row.full_seconds, row.subsampled_seconds, row.pairs_evaluated
        );
    }
    println!(
        "log-log slopes: full {:.3} (expect ≈ 2), subsampled {:.3} (expect ≈ 1) at s = {}",
        table.full_slope, table.subsampled_slope, table.s
    );

    if let Some(path) = &args.out {
        let mut text = String::from("n,full_seconds,subsampled_seconds,pairs_evaluated\n");
        for row in &table.rows {
            text.push_str(&format!(
                "{},{:e},{:e},{}\n",
                row.n, row.full_seconds, row.subsampled_seconds, row.pairs_evaluated
            ));
        }
        std::fs::write(path, text)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
