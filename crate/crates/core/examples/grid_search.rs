//! The default 9 x 9 `(alpha, beta)` grid on a two-Gaussian tiny MLP, printed
//! as short-horizon and full-horizon training-loss heatmaps.

use innaprop::harness::{grid_search, parse_config, GridRow, DEFAULT_GRID};
use innaprop::Result;

fn main() -> Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/two_gaussians_innaprop.json");
    let base = parse_config(path)?;
    let grid = grid_search(&base, &DEFAULT_GRID, &DEFAULT_GRID)?;

    let short = format!("training loss at step {}", grid.short_step);
    let heatmaps: [(&str, fn(&GridRow) -> Option<f64>); 2] = [
        (&short, |r| r.short_train_loss),
        ("final training loss", |r| r.final_train_loss),
    ];
    for (title, value) in heatmaps {
        println!("{title}");
        print!("alpha\\beta");
        for b in DEFAULT_GRID {
            print!("{b:>8}");
        }
        println!();
        for a in DEFAULT_GRID {
            print!("{a:>10}");
            for b in DEFAULT_GRID {
                match grid.cell(a, b).and_then(value) {
                    Some(v) => print!("{v:>8.4}"),
                    None => print!("{:>8}", "div"),
                }
            }
            println!();
        }
    }
    println!("{:.0}% of cells finished", 100.0 * grid.ok_fraction());
    Ok(())
}
