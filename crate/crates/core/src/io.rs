//! CSV formats: families (`n,k,a...,b...,weight`), clouds (`x1..xn`) and
//! scale series (`scale,value`). Comma separated, header row, LF endings.

use std::io::{Read, Write};

use crate::affine::{AffinePlane, Ambient};
use crate::dimension::{PointCloud, ScaleSeries, SeriesKind};
use crate::error::{Error, Result};
use crate::family::WeightedFamily;

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv: {e}"))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Invalid(format!("io: {e}"))
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn parse(field: &str, line: u64) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("line {line}: not a number: {field:?}")))
}

fn family_header(amb: Ambient) -> Vec<String> {
    let m = amb.codim();
    let mut h = vec!["n".to_string(), "k".to_string()];
    h.extend((1..=m).map(|j| format!("a{j}")));
    for i in 1..=amb.k() {
        h.extend((1..=m).map(|j| format!("b{i}_{j}")));
    }
    h.push("weight".into());
    h
}

pub fn write_family_csv<W: Write>(out: W, family: &WeightedFamily) -> Result<()> {
    let mut w = writer(out);
    w.write_record(family_header(family.ambient())).map_err(csv_err)?;
    let amb = family.ambient();
    for (p, weight) in family.iter() {
        let mut rec = vec![amb.n().to_string(), amb.k().to_string()];
        rec.extend(p.flat_code().iter().map(f64::to_string));
        rec.push(weight.to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// Planes and weights. Without a `weight` column the weights are uniform.
pub fn read_family_csv<R: Read>(input: R) -> Result<(Vec<AffinePlane>, Vec<f64>)> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    let has_weight = headers.iter().next_back() == Some("weight");
    let mut planes = Vec::new();
    let mut weights = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = row as u64 + 2;
        let vals: Vec<f64> = rec.iter().map(|f| parse(f, line)).collect::<Result<_>>()?;
        if vals.len() < 2 {
            return Err(Error::Invalid(format!("line {line}: missing n, k")));
        }
        let amb = Ambient::new(vals[0] as usize, vals[1] as usize)?;
        let code_end = 2 + amb.code_len();
        let expected = code_end + usize::from(has_weight);
        if vals.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "family record",
                expected,
                got: vals.len(),
            });
        }
        planes.push(AffinePlane::from_flat_code(&vals[2..code_end], amb)?);
        if has_weight {
            weights.push(vals[code_end]);
        }
    }
    if planes.is_empty() {
        return Err(Error::Empty("family file"));
    }
    if !has_weight {
        weights = vec![1.0 / planes.len() as f64; planes.len()];
    }
    Ok((planes, weights))
}

pub fn write_cloud_csv<W: Write>(out: W, cloud: &PointCloud) -> Result<()> {
    let mut w = writer(out);
    w.write_record((1..=cloud.dim()).map(|d| format!("x{d}"))).map_err(csv_err)?;
    for p in cloud.points() {
        w.write_record(p.iter().map(f64::to_string)).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads a cloud; without `gen_scale` it is inferred with [`infer_gen_scale`].
pub fn read_cloud_csv<R: Read>(input: R, gen_scale: Option<f64>) -> Result<PointCloud> {
    let mut r = csv::Reader::from_reader(input);
    let n = r.headers().map_err(csv_err)?.len();
    let mut coords = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = row as u64 + 2;
        if rec.len() != n {
            return Err(Error::DimensionMismatch {
                what: "cloud record",
                expected: n,
                got: rec.len(),
            });
        }
        for f in rec.iter() {
            coords.push(parse(f, line)?);
        }
    }
    let gen = match gen_scale {
        Some(g) => g,
        None => infer_gen_scale(n, &coords),
    };
    PointCloud::from_flat(n, coords, gen)
}

/// Smallest positive gap between distinct values of any one coordinate, or
/// 1 when every coordinate is constant.
pub fn infer_gen_scale(n: usize, coords: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for d in 0..n {
        let mut v: Vec<f64> = coords.iter().skip(d).step_by(n.max(1)).copied().collect();
        v.sort_by(f64::total_cmp);
        for w in v.windows(2) {
            let g = w[1] - w[0];
            if g > 1e-12 {
                best = best.min(g);
            }
        }
    }
    if best.is_finite() {
        best
    } else {
        1.0
    }
}

pub fn write_series_csv<W: Write>(out: W, series: &ScaleSeries) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["scale", "value"]).map_err(csv_err)?;
    for (e, v) in series.entries() {
        w.write_record([e.to_string(), v.to_string()]).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_series_csv<R: Read>(input: R, kind: SeriesKind) -> Result<ScaleSeries> {
    let mut r = csv::Reader::from_reader(input);
    let mut entries = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = row as u64 + 2;
        if rec.len() != 2 {
            return Err(Error::DimensionMismatch {
                what: "series record",
                expected: 2,
                got: rec.len(),
            });
        }
        entries.push((parse(&rec[0], line)?, parse(&rec[1], line)?));
    }
    ScaleSeries::new(entries, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::cantor_code_family;

    #[test]
    fn family_round_trip() {
        let fam = cantor_code_family(0.5, 0, 3, Ambient::new(3, 2).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_family_csv(&mut buf, &fam).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,k,a1,b1_1,b2_1,weight\n"));
        assert!(!text.contains('\r'));
        let (planes, weights) = read_family_csv(buf.as_slice()).unwrap();
        assert_eq!(planes, fam.planes());
        assert_eq!(weights, fam.weights());
    }

    #[test]
    fn family_without_weights_is_uniform() {
        let text = "n,k,a,b\n2,1,0.1,0.0\n2,1,-0.2,0.5\n";
        let (planes, weights) = read_family_csv(text.as_bytes()).unwrap();
        assert_eq!(planes.len(), 2);
        assert_eq!(planes[1].slopes(), &[vec![0.5]]);
        assert_eq!(weights, vec![0.5, 0.5]);
        assert!(read_family_csv("n,k,a,b\n2,1,0.1\n".as_bytes()).is_err());
        assert!(read_family_csv("n,k,a,b\n2,1,x,0\n".as_bytes()).is_err());
    }

    #[test]
    fn cloud_round_trip() {
        let c = PointCloud::new(2, &[vec![0.0, 0.25], vec![0.125, 1.0 / 3.0]], 0.125).unwrap();
        let mut buf = Vec::new();
        write_cloud_csv(&mut buf, &c).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("x1,x2\n"));
        assert_eq!(read_cloud_csv(buf.as_slice(), Some(0.125)).unwrap(), c);
        let inferred = read_cloud_csv(buf.as_slice(), None).unwrap();
        assert_close!(inferred.gen_scale(), 1.0 / 3.0 - 0.25, 1e-15);
    }

    #[test]
    fn series_round_trip() {
        let s = ScaleSeries::new(vec![(0.5, 3.0), (0.25, 9.0)], SeriesKind::BoxCount).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "scale,value\n0.5,3\n0.25,9\n");
        assert_eq!(read_series_csv(buf.as_slice(), SeriesKind::BoxCount).unwrap(), s);
    }
}
