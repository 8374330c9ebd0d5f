//! Human-side and agent-side rivalry for one hand-picked situation, and the
//! shaped rewards each condition would produce.
//!
//! cargo run --example rivalry_report

use chefs_hat::agents::ConfidenceTrace;
use chefs_hat::rivalry::{
    shaped_reward, HumanProfile, PredictedRivalryReport, RivalryReport, RivalryScale, ShapingCondition,
    TraitVector, DEFAULT_LAMBDA,
};

fn main() -> anyhow::Result<()> {
    let human = HumanProfile::new(TraitVector::new(4.0, 3.5, 2.0)?, 4.5)?;
    let assessed = TraitVector::new(3.0, 4.0, 1.5)?;
    for scale in [RivalryScale::Verbatim, RivalryScale::Normalized] {
        let r = RivalryReport::compute(&human, &assessed, 9, 12, scale);
        println!("{scale:?}: {}", serde_json::to_string(&r)?);
    }

    let mut trace = ConfidenceTrace::new();
    for q in [0.9, 0.4, 0.2, 1.3, 0.05] {
        trace.record_q(q);
    }
    let predicted = PredictedRivalryReport::compute([3.8, 3.2, 2.4], &assessed, &trace, 12, 9)?;
    println!("agent side: {}", serde_json::to_string(&predicted)?);
    for c in [
        ShapingCondition::Increase,
        ShapingCondition::Maintain,
        ShapingCondition::Decrease,
        ShapingCondition::None,
    ] {
        let r = shaped_reward(1.0, c, predicted.rivalry, DEFAULT_LAMBDA, 1.5);
        println!("{c:<9} final reward {r:+.4}");
    }
    Ok(())
}
