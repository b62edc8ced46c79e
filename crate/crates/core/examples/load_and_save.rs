//! Reading and writing the two dataset formats.
//!
//! ```bash
//! cargo run -p spikemi --example load_and_save -- crates/core/examples/data/trains.txt
//! ```

use spikemi::data::{load_dataset, save_dataset, DataFormat};
use spikemi::metrics::{distance_matrix, MetricSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/trains.txt").to_string());
    let d = load_dataset(&path, DataFormat::SpikeText)?;
    println!("{} stimuli x {} trials", d.n_s(), d.n_t());

    let dm = distance_matrix(&d, &MetricSpec::VictorPurpura { q: 50.0 })?;
    dm.write_csv(std::io::stdout().lock())?;

    let out = std::env::temp_dir().join("spikemi-trains.txt");
    save_dataset(&d, &out, DataFormat::SpikeText)?;
    assert_eq!(load_dataset(&out, DataFormat::SpikeText)?, d);
    println!("round trip through {} ok", out.display());
    Ok(())
}
