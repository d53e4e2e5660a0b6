//! The one-sided paired t-test behind the bolding rule.
//!
//! cargo run --example significance

use shapebench::eval::mark_best;
use shapebench::paired_one_sided_t_test;

fn main() -> shapebench::Result<()> {
    let r = paired_one_sided_t_test(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0], 0.05)?;
    println!(
        "d = {{1, 2, 3}}: t = {:.4}, df = {}, p = {:.4}, significant = {}",
        r.t_stat, r.df, r.p_value, r.significant
    );

    let best = [0.95, 0.97, 0.93, 0.96, 0.98, 0.94];
    let close = [0.94, 0.97, 0.94, 0.95, 0.97, 0.94];
    let worse = [0.90, 0.91, 0.89, 0.92, 0.93, 0.90];
    for (name, cand) in [("close", &close), ("worse", &worse)] {
        let r = paired_one_sided_t_test(cand, &best, 0.05)?;
        println!("{name} vs best: t = {:.3}, p = {:.4}", r.t_stat, r.p_value);
    }
    let bold = mark_best(&[("best", &best), ("close", &close), ("worse", &worse)], 0.05)?;
    println!("bold: {bold:?}");
    Ok(())
}
