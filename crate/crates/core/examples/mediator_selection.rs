//! How alpha shifts which coalition the mediator picks first, and the
//! size-weighted compromise it then proposes.

use coalition_core::mediator::{compromise_euclid, select_pair, selection_probabilities};
use coalition_core::{AgentId, Coalition, CoalitionStructure, Euclid2D, Point2D, RunRng};
use rand::SeedableRng;

fn main() -> coalition_core::Result<()> {
    let layout = [((100.0, 100.0), 6), ((110.0, 95.0), 3), ((40.0, 160.0), 1), ((190.0, 10.0), 2)];
    let mut next = 0;
    let coalitions = layout
        .iter()
        .map(|&((x, y), size)| {
            let members = (next..next + size).map(AgentId).collect();
            next += size;
            Coalition::new(members, Point2D { x, y })
        })
        .collect::<coalition_core::Result<Vec<_>>>()?;
    let s = CoalitionStructure::new(coalitions);

    for alpha in [-1.0, 0.0, 1.0] {
        let probs = selection_probabilities(&Euclid2D, &s, alpha)?;
        let shown: Vec<String> = probs.iter().map(|p| format!("{p:.3}")).collect();
        println!("alpha {alpha:>4}: P(first) = [{}]", shown.join(", "));
    }

    let mut rng = RunRng::seed_from_u64(3);
    for _ in 0..4 {
        let (i, j) = select_pair(&Euclid2D, &s, 1.0, &mut rng)?;
        let p = compromise_euclid(&s.coalitions()[i], &s.coalitions()[j]);
        println!("pair ({i}, {j}) -> compromise ({:.2}, {:.2})", p.x, p.y);
    }
    Ok(())
}
