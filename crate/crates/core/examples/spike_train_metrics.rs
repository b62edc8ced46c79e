//! Distances between spike trains and an estimate that depends on the metric.
//!
//! Two stimuli evoke the same spike count but different timing, so the
//! information is only visible to a metric that looks at spike times.

use rand::Rng;

use spikemi::data::{LabeledDataset, ResponsePoint, StimulusId};
use spikemi::estimators::{kernel_mi, KernelConfig};
use spikemi::metrics::{distance_matrix, van_rossum, victor_purpura, MetricSpec};
use spikemi::rng;

fn main() -> spikemi::Result<()> {
    let a = [0.010, 0.052, 0.130];
    let b = [0.012, 0.090];
    for q in [0.0, 10.0, 100.0, 1000.0] {
        println!("victor-purpura q = {q:>6}: {:.4}", victor_purpura(&a, &b, q));
    }
    for tau in [0.001, 0.01, 0.1] {
        println!("van rossum tau = {tau:>5}: {:.4}", van_rossum(&a, &b, tau));
    }

    // four spikes in 200 ms; early or late bunching depending on the stimulus
    let mut g = rng::stream(1, &[]);
    let (mut points, mut labels) = (Vec::new(), Vec::new());
    for s in 0..2 {
        for _ in 0..30 {
            let centre = if s == 0 { 0.05 } else { 0.15 };
            let mut t: Vec<f64> = (0..4).map(|_| centre + g.random_range(-0.05..0.05)).collect();
            t.sort_by(f64::total_cmp);
            points.push(ResponsePoint::SpikeTrain(t));
            labels.push(StimulusId(s));
        }
    }
    let d = LabeledDataset::new(points, labels)?;

    for m in [
        MetricSpec::VictorPurpura { q: 1.0 },
        MetricSpec::VictorPurpura { q: 20.0 },
        MetricSpec::VictorPurpura { q: 200.0 },
        MetricSpec::VanRossum { tau: 0.02 },
    ] {
        let dm = distance_matrix(&d, &m)?;
        let est = kernel_mi(&d, &dm, &KernelConfig::default())?;
        println!("{m:?}: {:.3} bits", est.bits);
    }
    Ok(())
}
