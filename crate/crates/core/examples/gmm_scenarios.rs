//! Ideal points from zero to four mixture peaks, and the noisy starting
//! points used when coalitions do not begin at the ideals.

use coalition_core::harness::scenario::{perturb_init, sample_ideal_points, sample_status_quo, GmmSpec};
use coalition_core::stats::{mean, std_dev};
use coalition_core::RunRng;
use rand::SeedableRng;

fn main() -> coalition_core::Result<()> {
    let mut rng = RunRng::seed_from_u64(2024);
    let r = sample_status_quo(&mut rng);
    println!("status quo ({:.1}, {:.1})", r.x, r.y);
    for peaks in 0..=4u8 {
        let spec = GmmSpec::sample(peaks, &mut rng)?;
        let pts = sample_ideal_points(500, &spec, &mut rng);
        let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.y).collect();
        println!(
            "peaks {peaks}: x {:6.1} +- {:5.1}, y {:6.1} +- {:5.1}",
            mean(&xs),
            std_dev(&xs),
            mean(&ys),
            std_dev(&ys)
        );
        for (k, m) in spec.means.iter().enumerate() {
            println!(
                "    component {k}: mean ({:.1}, {:.1}), std {:.1}, weight {:.3}",
                m.x, m.y, spec.stds[k], spec.weights[k]
            );
        }
    }
    let ideal = sample_ideal_points(1, &GmmSpec::uniform(), &mut rng)[0];
    println!("ideal ({:.2}, {:.2}) starts at:", ideal.x, ideal.y);
    for _ in 0..3 {
        let s = perturb_init(&ideal, &mut rng);
        println!("    ({:.2}, {:.2})", s.x, s.y);
    }
    Ok(())
}
