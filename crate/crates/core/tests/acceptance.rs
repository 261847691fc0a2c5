//! Runs without the libtest harness so the per-criterion lines always reach
//! the `cargo test` output. Failing criteria are reported, not fatal.

use su2metro::acceptance::{self, CRITERIA};

fn main() {
    let results = acceptance::run_all();
    assert_eq!(results.len(), CRITERIA as usize);
    println!("\nrunning {CRITERIA} acceptance criteria");
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.number).collect();
    println!("{} of {} criteria pass; failing: {failed:?}\n", results.len() - failed.len(), results.len());
}
