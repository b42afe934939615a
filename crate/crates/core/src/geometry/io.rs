//! Curve CSV import and export.

use std::io::{Read, Write};
use std::sync::Arc;

use super::curve::{ParametricCurve, SampledCurve};
use super::instance::TwoCurveInstance;
use crate::error::{Error, Result};

/// Writes `component,t,x0,...,x{D-1}` rows; component is +1 or -1 and t the arc-length fraction.
pub fn write_curves_csv<W: Write>(instance: &TwoCurveInstance, out: W) -> Result<()> {
    let dim = instance.dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["component".to_string(), "t".to_string()];
    header.extend((0..dim).map(|d| format!("x{d}")));
    w.write_record(&header)?;
    for (label, curve) in [(1, &instance.plus), (-1, &instance.minus)] {
        for (i, p) in curve.points.iter().enumerate() {
            let mut row = vec![label.to_string(), format!("{:.17e}", curve.arc[i] / curve.length)];
            row.extend(p.iter().map(|v| format!("{v:.17e}")));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads curves written by `write_curves_csv` (or any equispaced closed samples).
///
/// Rows for each component must be ordered by t and equispaced over one period.
pub fn read_curves_csv<R: Read>(input: R) -> Result<(Arc<dyn ParametricCurve>, Arc<dyn ParametricCurve>)> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let dim = headers.len().saturating_sub(2);
    if headers.get(0) != Some("component") || headers.get(1) != Some("t") || dim < 3 {
        return Err(Error::domain("curve CSV header must be component,t,x0,...,x{D-1} with D >= 3"));
    }
    for d in 0..dim {
        if headers.get(d + 2) != Some(format!("x{d}").as_str()) {
            return Err(Error::domain(format!("unexpected column '{}'", &headers[d + 2])));
        }
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let parse = |k: usize| -> Result<f64> {
            record[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::domain(format!("row {}: column {k}: {e}", line + 2)))
        };
        let label = parse(0)?;
        let point: Vec<f64> = (0..dim).map(|d| parse(d + 2)).collect::<Result<_>>()?;
        if label > 0.0 {
            plus.push(point);
        } else {
            minus.push(point);
        }
    }
    Ok((Arc::new(SampledCurve::new(&plus)?), Arc::new(SampledCurve::new(&minus)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin::{builtin_geometry, BuiltinName, BuiltinOptions};

    #[test]
    fn roundtrip_preserves_geometry() {
        let opts = BuiltinOptions { samples: 128, ..Default::default() };
        let inst = builtin_geometry(BuiltinName::TwoCircles, &opts).unwrap();
        let mut buf = Vec::new();
        write_curves_csv(&inst, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("component,t,x0,x1,x2\n"));
        let (p, m) = read_curves_csv(buf.as_slice()).unwrap();
        let back = TwoCurveInstance::from_curves("import", p, m, 128).unwrap();
        assert!((back.plus.length - inst.plus.length).abs() < 1e-10);
        assert!((back.minus.length - inst.minus.length).abs() < 1e-10);
        assert!((back.kappa() - inst.kappa()).abs() < 1e-8);
    }

    #[test]
    fn bad_header_rejected() {
        let text = "label,t,x0,x1,x2\n1,0,1,0,0\n";
        assert!(read_curves_csv(text.as_bytes()).is_err());
    }
}
