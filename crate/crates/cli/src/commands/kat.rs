use std::path::Path;

use anyhow::Result;

use modelyap::kat::run_kat;

use super::read_file;

/// Verify every vector in a KAT file. Exit 0 when all pass, 1 on any
/// failure, 2 on a malformed file.
pub fn execute(file: &Path) -> Result<i32> {
    let text = read_file(file)?;
    let report = run_kat(&text)?;
    if report.total == 0 {
        println!("warning: 0 vectors in {}", file.display());
        return Ok(0);
    }
    if report.passed() {
        println!("ok: {} vectors verified", report.total);
        Ok(0)
    } else {
        println!(
            "FAILED: {} of {} vectors did not verify",
            report.failures.len(),
            report.total
        );
        for failure in &report.failures {
            println!(
                "  line {} ({}): {}",
                failure.line, failure.cipher, failure.reason
            );
        }
        Ok(1)
    }
}
