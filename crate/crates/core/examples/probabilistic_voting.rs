//! The approval law: certain inside the status-quo radius, a half-Gaussian
//! density of the proposal distance outside it.

use coalition_core::agents::{half_gaussian_approval, vote};
use coalition_core::{Agent, Euclid2D, Point2D, RunRng};
use rand::SeedableRng;

fn main() -> coalition_core::Result<()> {
    let to_status_quo = 5.0;
    println!("d(ideal, r) = {to_status_quo}");
    print!("{:>10}", "d(ideal,p)");
    let sigmas = [0.0, 1.0, 5.0, 10.0, 30.0];
    for s in sigmas {
        print!("{:>10}", format!("sigma={s}"));
    }
    println!();
    for d in [1.0, 4.9, 5.1, 6.0, 10.0, 20.0, 40.0] {
        print!("{d:>10}");
        for s in sigmas {
            print!("{:>10.4}", half_gaussian_approval(to_status_quo, d, s));
        }
        println!();
    }

    let agent = Agent::new(0, Point2D { x: 0.0, y: 0.0 }, 1.0)?;
    let r = Point2D { x: 0.5, y: 0.0 };
    let p = Point2D { x: 1.0, y: 0.0 };
    let mut rng = RunRng::seed_from_u64(7);
    let draws = 20_000;
    let mut yes = 0;
    for _ in 0..draws {
        if vote(&agent, &Euclid2D, &r, &p, &mut rng)?.is_approve() {
            yes += 1;
        }
    }
    println!(
        "sigma 1, d(ideal,p) = 1, d(ideal,r) = 0.5: F = {:.6}, observed {:.4} over {draws} votes",
        half_gaussian_approval(0.5, 1.0, 1.0),
        yes as f64 / draws as f64
    );
    Ok(())
}
