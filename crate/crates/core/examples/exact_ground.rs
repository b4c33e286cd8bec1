//! Exact ground state of the ring TIM across the critical point.
//!
//! `cargo run --release --example exact_ground -- 10`

use vqe_lab::ising::{build_tim, exact_ground, TimParams};

fn main() -> vqe_lab::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    println!("{:>6} {:>14} {:>6} {:>12}", "h", "E_g", "deg", "gap");
    for h in [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let sol = exact_ground(&build_tim(&TimParams::ring(n, 1.0, h))?)?;
        println!("{h:>6.2} {:>14.8} {:>6} {:>12.4e}", sol.ground_energy, sol.degeneracy, sol.gap);
    }
    Ok(())
}
