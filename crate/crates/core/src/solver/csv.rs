use std::io::{self, Write};

use super::{BVSolution, SolveReport};

/// Shortest round-trip-safe rendering with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header `t,y_1..y_d,v_1..v_d,dist_to_C,residual` and one row per output sample.
pub fn write_trajectory_csv<W: Write>(mut w: W, sol: &BVSolution) -> io::Result<()> {
    let d = sol.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("y_{i}")));
    header.extend((1..=d).map(|i| format!("v_{i}")));
    header.push("dist_to_C".into());
    header.push("residual".into());
    writeln!(w, "{}", header.join(","))?;
    for k in 0..sol.times.len() {
        let mut row = vec![num(sol.times[k])];
        row.extend(sol.values[k].coords().iter().map(|&c| num(c)));
        row.extend(sol.densities[k].coords().iter().map(|&c| num(c)));
        row.push(num(sol.dist_to_c[k]));
        row.push(num(sol.residuals[k]));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Header `level,sup_diff,max_violation`; the first level has no `sup_diff`.
pub fn write_report_csv<W: Write>(mut w: W, report: &SolveReport) -> io::Result<()> {
    writeln!(w, "level,sup_diff,max_violation")?;
    for (k, level) in report.levels_run.iter().enumerate() {
        let diff = if k == 0 {
            String::new()
        } else {
            num(report.sup_diffs[k - 1])
        };
        writeln!(w, "{level},{diff},{}", num(report.violations[k]))?;
    }
    Ok(())
}
