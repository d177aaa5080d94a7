use std::io::{self, Write};

use super::{ContactMask, ConvexEnvelope, SampledLagrangian};
use crate::format::fmt_f64;

/// `node_id,x1[,x2],f,fss,contact`.
pub fn write_envelope_csv<W: Write>(
    mut out: W,
    f: &SampledLagrangian,
    env: &ConvexEnvelope,
    contact: &ContactMask,
) -> io::Result<()> {
    let two = f.dim() == 2;
    writeln!(out, "node_id,x1,{}f,fss,contact", if two { "x2," } else { "" })?;
    for i in 0..f.len() {
        let x = f.node(i);
        write!(out, "{i},{}", fmt_f64(x[0]))?;
        if two {
            write!(out, ",{}", fmt_f64(x[1]))?;
        }
        writeln!(
            out,
            ",{},{},{}",
            fmt_f64(f.value(i)),
            fmt_f64(env.node_values()[i]),
            u8::from(contact.is_contact(i))
        )?;
    }
    Ok(())
}
