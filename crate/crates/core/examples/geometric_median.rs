//! Weighted geometric median by Weiszfeld iteration against the weighted
//! mean, including a case where one heavy point is itself the optimum.

use coalition_core::metric::{geometric_median, weighted_distance_sum, WeiszfeldOptions};
use coalition_core::{Euclid2D, LinearSpace, Point2D};

fn show(name: &str, pts: &[(Point2D, f64)]) -> coalition_core::Result<()> {
    let gm = geometric_median(pts, WeiszfeldOptions::default())?;
    let refs: Vec<_> = pts.iter().map(|(p, w)| (p, *w)).collect();
    let mean = Euclid2D.weighted_mean(&refs)?;
    println!("{name}");
    println!(
        "  median ({:.4}, {:.4}) cost {:.4} after {} iterations",
        gm.point.x, gm.point.y, gm.objective, gm.iterations
    );
    println!(
        "  mean   ({:.4}, {:.4}) cost {:.4}",
        mean.x,
        mean.y,
        weighted_distance_sum(pts, &mean)
    );
    Ok(())
}

fn main() -> coalition_core::Result<()> {
    let p = |x, y| Point2D { x, y };
    show(
        "five spread points",
        &[(p(0.0, 0.0), 1.0), (p(200.0, 0.0), 2.0), (p(100.0, 180.0), 1.5), (p(30.0, 60.0), 1.0), (p(150.0, 150.0), 1.0)],
    )?;
    show("one dominant weight", &[(p(0.0, 0.0), 10.0), (p(50.0, 0.0), 1.0), (p(0.0, 50.0), 1.0), (p(60.0, 60.0), 2.0)])?;
    Ok(())
}
