use crate::game::StepOutcome;

pub const WIN_REWARD: f32 = 1.0;
pub const STEP_REWARD: f32 = -0.01;

/// +1 for the discard that makes the actor the first finisher of the match,
/// -0.01 for every other action.
pub fn base_reward(outcome: &StepOutcome) -> f32 {
    if outcome.finish_position == Some(1) {
        WIN_REWARD
    } else {
        STEP_REWARD
    }
}
