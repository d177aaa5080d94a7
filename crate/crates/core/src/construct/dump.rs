use std::io::Write;

use super::CoverReport;
use crate::format::fmt_f64;

/// One row per patch, then a `F_v,Fss_u,epsilon,certified` summary block.
pub fn write_cover_csv<W: Write>(
    out: W,
    cover: &CoverReport,
    summary: Option<&super::Ledger>,
) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let mut header = vec!["patch_id".to_string(), "cell_id".to_string(), "kind".to_string()];
    for d in 0..cover.dim {
        header.push(format!("x0_{}", d + 1));
    }
    header.extend(["s", "core_energy", "cap_energy", "flux_term", "residual_measure"].map(String::from));
    w.write_record(&header)?;
    for p in &cover.patches {
        let mut row = vec![p.id.to_string(), p.cell.to_string(), p.kind.name().to_string()];
        for d in 0..cover.dim {
            row.push(fmt_f64(p.anchor[d]));
        }
        for v in [p.scale, p.core_energy, p.cap_energy, p.flux_term, p.residual_measure] {
            row.push(fmt_f64(v));
        }
        w.write_record(&row)?;
    }
    if let Some(l) = summary {
        w.write_record(["F_v", "Fss_u", "epsilon", "certified"])?;
        w.write_record([fmt_f64(l.f_v), fmt_f64(l.fss_u), fmt_f64(l.epsilon), l.certified.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
