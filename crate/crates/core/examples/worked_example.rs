//! The three-agent instance on a finite metric: the mediator offers B and C
//! the point BC, both accept and the process halts after one iteration.

use coalition_core::engine::{run_process, ProcessConfig, Scenario};
use coalition_core::mediator::{MediatorProposal, ScriptedMediator};
use coalition_core::{Agent, FiniteMetric, MetricSpace, RunRng};
use rand::SeedableRng;

fn main() -> coalition_core::Result<()> {
    let m = FiniteMetric::new(
        &["A", "B", "C", "r", "BC"],
        &[
            ("A", "B", 3.0),
            ("A", "C", 5.0),
            ("B", "C", 2.0),
            ("A", "r", 9.0),
            ("B", "r", 6.0),
            ("C", "r", 8.0),
            ("B", "BC", 1.0),
            ("C", "BC", 1.0),
            // not given with the instance; any values keeping it a metric work
            ("A", "BC", 4.0),
            ("r", "BC", 7.0),
        ],
    )?;
    assert!(m.is_metric());
    let p = |l: &str| m.point(l).unwrap();
    let agents = ["A", "B", "C"]
        .iter()
        .enumerate()
        .map(|(k, l)| Agent::new(k as u32, p(l), 0.0))
        .collect::<coalition_core::Result<Vec<_>>>()?;
    let scenario = Scenario::from_ideals(0, p("r"), agents);

    for (label, agent) in ["A", "B", "C"].iter().zip(&scenario.agents) {
        println!(
            "{label}: d(ideal, BC) = {}, d(ideal, r) = {}",
            m.dist(&agent.ideal, &p("BC"))?,
            m.dist(&agent.ideal, &p("r"))?
        );
    }

    let mut mediator = ScriptedMediator::new([MediatorProposal { i: 1, j: 2, point: p("BC") }]);
    let mut rng = RunRng::seed_from_u64(0);
    let res = run_process(&m, &scenario, &ProcessConfig::default(), &mut mediator, &mut rng)?;
    let it = &res.trace[0];
    println!("iteration 1: votes {:?}, sizes {:?}", it.votes, it.sizes);
    let winner = res.winning_coalition.as_ref().unwrap();
    println!(
        "status {} after {} iteration(s); winner {:?} at {}; quality {}",
        res.status,
        res.iterations,
        winner.members(),
        m.label(winner.point),
        res.quality.unwrap()
    );
    Ok(())
}
