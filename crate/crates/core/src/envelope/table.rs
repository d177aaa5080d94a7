//! CSV Lagrangian tables: header `x1[,x2],value`, `inf` for `+∞`.

use std::path::Path;

use super::{EnvelopeError, Minorant, SampledLagrangian};

fn bad(msg: impl Into<String>) -> EnvelopeError {
    EnvelopeError::InvalidSamples(msg.into())
}

fn parse_value(s: &str) -> Result<f64, EnvelopeError> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("+inf") {
        return Ok(f64::INFINITY);
    }
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| bad(format!("cannot parse value `{t}`")))
}

/// Parses table text; rows may come in any order but must fill a
/// rectilinear grid exactly once.
pub fn parse_table(text: &str, minorant: Minorant) -> Result<SampledLagrangian, EnvelopeError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let dim = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["x1", "value"] => 1,
        ["x1", "x2", "value"] => 2,
        _ => return Err(bad(format!("header must be `x1,value` or `x1,x2,value`, got `{}`", header.join(",")))),
    };
    let mut rows: Vec<([f64; 2], f64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut x = [0.0; 2];
        for d in 0..dim {
            x[d] = rec[d]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("cannot parse coordinate `{}`", &rec[d])))?;
        }
        rows.push((x, parse_value(&rec[dim])?));
    }
    let mut axes: Vec<Vec<f64>> = (0..dim)
        .map(|d| {
            let mut c: Vec<f64> = rows.iter().map(|r| r.0[d]).collect();
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect();
    let count: usize = axes.iter().map(Vec::len).product();
    if count != rows.len() {
        return Err(bad(format!(
            "{} rows do not form a rectilinear grid of {} nodes",
            rows.len(),
            count
        )));
    }
    let mut values = vec![f64::NAN; count];
    let m0 = axes[0].len();
    for (x, v) in &rows {
        let i = axes[0].binary_search_by(|a| a.total_cmp(&x[0])).unwrap();
        let j = if dim == 2 { axes[1].binary_search_by(|a| a.total_cmp(&x[1])).unwrap() } else { 0 };
        let slot = &mut values[i + m0 * j];
        if !slot.is_nan() {
            return Err(bad(format!("duplicate row at ({}, {})", x[0], x[1])));
        }
        *slot = *v;
    }
    for ax in &mut axes {
        ax.shrink_to_fit();
    }
    SampledLagrangian::new(axes, values, minorant, None)
}

pub fn read_table(path: &Path, minorant: Minorant) -> Result<SampledLagrangian, EnvelopeError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    parse_table(&text, minorant)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_unordered_rows_with_inf() {
        let text = "x1,value\n1,1\n-1,inf\n0,0\n2,4\n";
        let f = parse_table(text, Minorant::quadratic(1.0, 0.0)).unwrap();
        assert_eq!(f.axes()[0], vec![-1.0, 0.0, 1.0, 2.0]);
        assert_eq!(f.values()[0], f64::INFINITY);
        assert_eq!(f.values()[3], 4.0);
    }

    #[test]
    fn rejects_ragged_grids() {
        let text = "x1,x2,value\n0,0,1\n1,0,1\n0,1,1\n";
        assert!(parse_table(text, Minorant::quadratic(1.0, -5.0)).is_err());
        assert!(parse_table("a,b\n1,2\n", Minorant::quadratic(1.0, 0.0)).is_err());
    }
}
