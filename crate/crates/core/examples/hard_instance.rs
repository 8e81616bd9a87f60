//! The paired hard instance: duplicate statistics of the order-ℓ marginals
//! against the product proposal.

use pardpp::validation::{duplicate_probability, duplicate_scaling_report};

fn main() -> pardpp::Result<()> {
    let report = duplicate_scaling_report(200, 100, &[5, 10, 20])?;
    println!("{:>4} {:>3} {:>12} {:>12}", "l", "t", "P[t pairs]", "(l^2/k)^t");
    for row in report.rows.iter().filter(|r| r.t <= 3) {
        println!("{:>4} {:>3} {:>12.4e} {:>12.4e}", row.ell, row.t, row.probability, row.reference);
    }
    for r in report.ratios.iter().filter(|r| r.t >= 1 && r.t <= 3) {
        println!("doubling l = {} at t = {}: ratio {:.3} (4^t = {})", r.ell, r.t, r.ratio, r.target);
    }
    let ratio = duplicate_probability(100, 10, 1) / duplicate_probability(100, 5, 1);
    println!("k = 100: P[1 pair] at l = 10 over l = 5 is {ratio:.3}");
    Ok(())
}
