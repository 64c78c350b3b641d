//! Learning-rate schedules and the well-posedness bound they must respect.

use innaprop::schedulers::ScheduleSpec;
use innaprop::Result;

fn main() -> Result<()> {
    let schedules = [
        ("constant", ScheduleSpec::constant(1e-3, 1000)),
        ("cosine", ScheduleSpec::cosine(1e-3, 0.0, 1000)),
        ("cosine_warmup", ScheduleSpec::cosine_warmup(1e-3, 1e-4, 100, 1000, 1000)),
        ("linear_warmup", ScheduleSpec::linear_warmup(1e-3, 100, 1000)),
    ];
    print!("{:>6}", "k");
    for (name, _) in &schedules {
        print!("  {name:>14}");
    }
    println!();
    for k in [0, 1, 50, 100, 250, 500, 750, 999, 1000] {
        print!("{k:>6}");
        for (_, s) in &schedules {
            print!("  {:>14.6e}", s.lr_at(k)?);
        }
        println!();
    }

    let cosine = ScheduleSpec::cosine(1.0, 0.0, 100);
    println!("cosine from 1.0 stays below beta = 0.9: {}", cosine.stays_below(0.9, 100)?);
    Ok(())
}
