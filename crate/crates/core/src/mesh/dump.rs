use std::io::{self, Write};

use super::{EnergyReport, PwaFunction};
use crate::format::fmt_f64;

/// `node_id,x1[,x2],value`.
pub fn write_nodes_csv<W: Write>(mut out: W, u: &PwaFunction) -> io::Result<()> {
    let m = u.mesh();
    if m.dim() == 1 {
        writeln!(out, "node_id,x1,value")?;
    } else {
        writeln!(out, "node_id,x1,x2,value")?;
    }
    for i in 0..m.num_nodes() {
        let x = m.node(i);
        write!(out, "{i},{}", fmt_f64(x[0]))?;
        if m.dim() == 2 {
            write!(out, ",{}", fmt_f64(x[1]))?;
        }
        writeln!(out, ",{}", fmt_f64(u.values()[i]))?;
    }
    Ok(())
}

/// `cell_id,node_ids...,grad_1[,grad_2],f_value,fss_value,measure`.
pub fn write_cells_csv<W: Write>(mut out: W, u: &PwaFunction, report: &EnergyReport) -> io::Result<()> {
    let m = u.mesh();
    let nodes: Vec<String> = (0..=m.dim()).map(|k| format!("node_{k}")).collect();
    let grads: Vec<String> = (1..=m.dim()).map(|k| format!("grad_{k}")).collect();
    writeln!(out, "cell_id,{},{},f_value,fss_value,measure", nodes.join(","), grads.join(","))?;
    for (c, e) in report.cells.iter().enumerate() {
        let ids: Vec<String> = m.cell(c).iter().map(|i| i.to_string()).collect();
        let g: Vec<String> = (0..m.dim()).map(|d| fmt_f64(e.gradient[d])).collect();
        writeln!(
            out,
            "{c},{},{},{},{},{}",
            ids.join(","),
            g.join(","),
            fmt_f64(e.f_value),
            fmt_f64(e.fss_value),
            fmt_f64(e.measure)
        )?;
    }
    Ok(())
}
