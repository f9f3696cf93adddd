//! How the worst-case optimality gap and battery size scale with V and E_min.

use lodco::model::{bound_constants, SystemParams};

fn main() {
    println!("{:>10} {:>10} {:>12} {:>12} {:>12} {:>12}", "E_min", "V", "nu", "C/V", "gap", "C_B (mJ)");
    for e_min in [2e-6, 2e-5, 2e-4] {
        for v in [2e-5, 1.6e-4, 1e-3] {
            let p = SystemParams::baseline().with_control(v, e_min);
            let b = bound_constants(&p);
            println!("{:>10.1e} {:>10.1e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.3}",
                e_min, v, b.nu, b.c / v, b.gap, (p.theta + p.eh_max) * 1e3);
        }
    }
}
