//! Ratios `r/δ^α` along the approach sequence to the flat boundary point of
//! the flat convex domain; they grow without bound for every α.

use plurilab::kobayashi::{flat_point_sequence, holder_divergence};
use plurilab::DomainSpec;

fn main() -> plurilab::Result<()> {
    let dom = DomainSpec::flat_convex(2)?;
    let alphas = [0.25, 0.5, 1.0];
    let table = holder_divergence(&dom, &flat_point_sequence(2, 2..=16), &alphas)?;
    println!("{:>8} {:>12} {:>10} {:>12} {:>12} {:>12}", "ν", "δ", "r", "α=0.25", "α=0.5", "α=1");
    for row in &table.rows {
        println!(
            "{:>8} {:>12.4e} {:>10.5} {:>12.4} {:>12.4} {:>12.4}",
            row.nu, row.delta, row.radius, row.ratios[0], row.ratios[1], row.ratios[2]
        );
    }
    for v in &table.verdicts {
        println!("α = {}: slope {:.3}, diverges: {}", v.alpha, v.slope, v.diverges);
    }
    table.write_csv(std::io::stdout())
}
