use std::io::Write;

use super::ClearingResult;

impl ClearingResult {
    /// Per-bank table `bank_id,degree,x,K_prime,status`.
    pub fn write_table<W: Write>(&self, degrees: &[usize], out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bank_id", "degree", "x", "K_prime", "status"])?;
        for i in 0..self.repayments.len() {
            w.write_record([
                i.to_string(),
                degrees.get(i).copied().unwrap_or(0).to_string(),
                self.repayments[i].to_string(),
                self.net_worths[i].to_string(),
                self.statuses[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Summary row `F,iterations,residual`.
    pub fn write_summary<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["F", "iterations", "residual"])?;
        w.write_record([
            self.induced_failures.to_string(),
            self.iterations.to_string(),
            self.residual.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }
}
