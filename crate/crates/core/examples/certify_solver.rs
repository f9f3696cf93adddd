//! Check the closed-form slot solver against a brute-force grid.

use lodco::oracle::{certify, GridSpec};
use lodco::SystemParams;

fn main() -> Result<(), lodco::oracle::OracleError> {
    let params = SystemParams::baseline();
    let report = certify(&params, 2000, 42, &GridSpec::uniform(20_000))?;
    println!("states        {}", report.n_states);
    println!("max gap       {:.3e}", report.max_gap);
    println!("mean gap      {:.3e}", report.mean_gap);
    println!("min signed    {:.3e}", report.min_signed_gap);
    println!("mode agree    {} (+{} ties)", report.mode_agreements, report.explained_ties);
    println!("passed        {}", report.passed);
    Ok(())
}
