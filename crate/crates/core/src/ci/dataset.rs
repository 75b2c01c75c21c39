use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Numeric samples, one row per observation and one column per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub data: DMatrix<f64>,
}

impl Dataset {
    pub fn new(names: Vec<String>, data: DMatrix<f64>) -> Result<Self> {
        if names.len() != data.ncols() {
            return Err(Error::InvalidArgument(format!(
                "{} names for {} columns",
                names.len(),
                data.ncols()
            )));
        }
        Ok(Dataset { names, data })
    }

    pub fn n_samples(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.data.ncols()
    }

    /// CSV with a header row and numeric cells.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if names.is_empty() {
            return Err(Error::Parse("CSV has no columns".into()));
        }
        let mut values = Vec::new();
        let mut rows = 0;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != names.len() {
                return Err(Error::Parse(format!("row {} has {} cells, expected {}", i + 1, rec.len(), names.len())));
            }
            for cell in rec.iter() {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: `{cell}` is not a number", i + 1)))?;
                values.push(v);
            }
            rows += 1;
        }
        Dataset::new(names.clone(), DMatrix::from_row_slice(rows, names.len(), &values))
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        for r in 0..self.n_samples() {
            w.write_record(self.data.row(r).iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Sample Pearson correlation matrix.
    pub fn correlation(&self) -> Result<DMatrix<f64>> {
        let n = self.n_samples();
        if n < 2 {
            return Err(Error::InvalidArgument("need at least two samples".into()));
        }
        let p = self.n_vars();
        let means: Vec<f64> = (0..p).map(|j| self.data.column(j).mean()).collect();
        let centered = DMatrix::from_fn(n, p, |i, j| self.data[(i, j)] - means[j]);
        let cov = centered.transpose() * &centered;
        let mut corr = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                let d = (cov[(i, i)] * cov[(j, j)]).sqrt();
                if d <= 0.0 {
                    return Err(Error::Numerical(format!("column `{}` is constant", self.names[i.max(j)])));
                }
                corr[(i, j)] = if i == j { 1.0 } else { cov[(i, j)] / d };
            }
        }
        Ok(corr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let ds = Dataset::new(
            vec!["a".into(), "b".into()],
            DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.5, 3.0, 5.0]),
        )
        .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = Dataset::from_csv_reader(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
        let c = back.correlation().unwrap();
        assert!((c[(0, 1)] - c[(1, 0)]).abs() < 1e-15);
        assert!(c[(0, 1)] > 0.9);
    }

    #[test]
    fn rejects_bad_cells() {
        assert!(matches!(Dataset::from_csv_reader("a,b\n1,x\n".as_bytes()), Err(Error::Parse(_))));
        assert!(Dataset::from_csv_reader("a,b\n1\n".as_bytes()).is_err());
    }
}
