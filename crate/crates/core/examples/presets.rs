//! The shipped training recipes, each run for a shortened budget.

use innaprop::harness::{run_experiment, Preset};
use innaprop::Result;

fn main() -> Result<()> {
    for p in Preset::ALL {
        let recipe = p.config();
        println!(
            "{:<11} sigma {:<5} decay {:<5} lr {:<7} schedule {:?} clip {:?}",
            p.name(),
            recipe.sigma,
            recipe.weight_decay,
            recipe.lr,
            recipe.schedule,
            recipe.grad_clip
        );
        let short = innaprop::harness::RunConfig {
            steps: recipe.steps.min(200),
            decay_steps: Some(recipe.steps.min(200)),
            warmup_steps: recipe.warmup_steps.min(20),
            log_every: 50,
            ..recipe
        };
        let s = run_experiment(&short)?.summary;
        println!(
            "            {} steps: loss {:.4} -> {:.4}, test accuracy {:?}",
            s.steps_run,
            s.initial_train_loss,
            s.final_train_loss.unwrap_or(f64::NAN),
            s.final_test_metric
        );
    }
    Ok(())
}
