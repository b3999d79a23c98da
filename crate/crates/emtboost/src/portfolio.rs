//! Policy portfolios: losses, predictors, durations, and CSV I/O.
//!
//! The CSV schema is `y,omega,x1,...,xp[,true_premium]`. Empty predictor
//! cells are missing values (stored as NaN and routed by the trees'
//! missing-direction rule); `y` and `omega` must always be present.

use std::path::Path;

use crate::error::{Error, Result};

/// Dense column-major predictor matrix. Missing entries are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(
                "predictor columns have unequal lengths".into(),
            ));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for col in &columns {
            data.extend_from_slice(col);
        }
        Ok(Self { data, rows, cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch(
                "predictor rows have unequal lengths".into(),
            ));
        }
        let mut data = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                data[j * n + i] = v;
            }
        }
        Ok(Self {
            data,
            rows: n,
            cols: p,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[col * self.rows + row]
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(row, j)).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = vec![0.0; idx.len() * self.cols];
        for j in 0..self.cols {
            let src = self.column(j);
            for (new_i, &i) in idx.iter().enumerate() {
                data[j * idx.len() + new_i] = src[i];
            }
        }
        Matrix {
            data,
            rows: idx.len(),
            cols: self.cols,
        }
    }
}

/// A dataset of policy records `(y_i, x_i, omega_i)` with an optional
/// expected-true-loss column used by the simulation studies.
#[derive(Clone, Debug, PartialEq)]
pub struct Portfolio {
    y: Vec<f64>,
    x: Matrix,
    omega: Vec<f64>,
    true_premium: Option<Vec<f64>>,
}

impl Portfolio {
    pub fn new(
        y: Vec<f64>,
        x: Matrix,
        omega: Vec<f64>,
        true_premium: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = y.len();
        if x.n_rows() != n || omega.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "y has {n} rows, x has {}, omega has {}",
                x.n_rows(),
                omega.len()
            )));
        }
        if let Some(tp) = &true_premium {
            if tp.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "true_premium has {} rows, expected {n}",
                    tp.len()
                )));
            }
        }
        if let Some(bad) = y.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Data(format!("losses must be finite and >= 0, got {bad}")));
        }
        if let Some(bad) = omega.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::Data(format!(
                "durations must be finite and > 0, got {bad}"
            )));
        }
        Ok(Self {
            y,
            x,
            omega,
            true_premium,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.n_cols()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn true_premium(&self) -> Option<&[f64]> {
        self.true_premium.as_deref()
    }

    pub fn n_zero(&self) -> usize {
        self.y.iter().filter(|&&v| v == 0.0).count()
    }

    pub fn n_pos(&self) -> usize {
        self.len() - self.n_zero()
    }

    pub fn subset(&self, idx: &[usize]) -> Portfolio {
        Portfolio {
            y: idx.iter().map(|&i| self.y[i]).collect(),
            x: self.x.select_rows(idx),
            omega: idx.iter().map(|&i| self.omega[i]).collect(),
            true_premium: self
                .true_premium
                .as_ref()
                .map(|tp| idx.iter().map(|&i| tp[i]).collect()),
        }
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;

        let headers = reader.headers()?.clone();
        let mut fields: Vec<&str> = headers.iter().collect();
        if fields.len() < 2 || fields[0] != "y" || fields[1] != "omega" {
            return Err(Error::Data(format!(
                "{}: header must start with y,omega",
                path.display()
            )));
        }
        let has_true_premium = fields.last() == Some(&"true_premium");
        if has_true_premium {
            fields.pop();
        }
        let p = fields.len() - 2;
        for (j, name) in fields[2..].iter().enumerate() {
            let expected = format!("x{}", j + 1);
            if *name != expected {
                return Err(Error::Data(format!(
                    "{}: expected column {expected}, found {name}",
                    path.display()
                )));
            }
        }

        let mut y = Vec::new();
        let mut omega = Vec::new();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); p];
        let mut true_premium = if has_true_premium { Some(Vec::new()) } else { None };

        for record in reader.records() {
            let record = record?;
            let line = record
                .position()
                .map(|pos| pos.line().to_string())
                .unwrap_or_else(|| "?".into());
            let expected_len = 2 + p + usize::from(has_true_premium);
            if record.len() != expected_len {
                return Err(Error::Data(format!(
                    "{}:{line}: expected {expected_len} fields, found {}",
                    path.display(),
                    record.len()
                )));
            }
            let parse_required = |field: &str, name: &str| -> Result<f64> {
                field.parse::<f64>().map_err(|_| {
                    Error::Data(format!(
                        "{}:{line}: cannot parse {name} value {field:?}",
                        path.display()
                    ))
                })
            };
            y.push(parse_required(&record[0], "y")?);
            omega.push(parse_required(&record[1], "omega")?);
            for j in 0..p {
                let field = &record[2 + j];
                if field.is_empty() {
                    cols[j].push(f64::NAN);
                } else {
                    cols[j].push(parse_required(field, &format!("x{}", j + 1))?);
                }
            }
            if let Some(tp) = true_premium.as_mut() {
                tp.push(parse_required(&record[2 + p], "true_premium")?);
            }
        }

        Portfolio::new(y, Matrix::from_columns(cols)?, omega, true_premium)
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        let p = self.n_features();
        let mut header: Vec<String> = vec!["y".into(), "omega".into()];
        header.extend((1..=p).map(|j| format!("x{j}")));
        if self.true_premium.is_some() {
            header.push("true_premium".into());
        }
        writer.write_record(&header)?;
        for i in 0..self.len() {
            let mut record: Vec<String> = Vec::with_capacity(header.len());
            record.push(format_value(self.y[i]));
            record.push(format_value(self.omega[i]));
            for j in 0..p {
                let v = self.x.get(i, j);
                record.push(if v.is_nan() { String::new() } else { format_value(v) });
            }
            if let Some(tp) = &self.true_premium {
                record.push(format_value(tp[i]));
            }
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Shortest decimal form that parses back to the same double.
fn format_value(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Portfolio {
        let x = Matrix::from_rows(&[
            vec![0.1, 1.0],
            vec![0.2, f64::NAN],
            vec![0.30000000000000004, 3.5],
        ])
        .unwrap();
        Portfolio::new(
            vec![0.0, 1.5, 2.25],
            x,
            vec![1.0, 2.0, 0.5],
            Some(vec![0.4, 0.5, 0.6]),
        )
        .unwrap()
    }

    #[test]
    fn rejects_inconsistent_or_invalid_data() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(Portfolio::new(vec![1.0], x.clone(), vec![1.0, 1.0], None).is_err());
        let x1 = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(Portfolio::new(vec![-1.0], x1.clone(), vec![1.0], None).is_err());
        assert!(Portfolio::new(vec![1.0], x1, vec![0.0], None).is_err());
    }

    #[test]
    fn csv_round_trip_is_value_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("portfolio.csv");
        let original = sample();
        original.write_csv(&path).unwrap();
        let restored = Portfolio::read_csv(&path).unwrap();
        assert_eq!(original.y(), restored.y());
        assert_eq!(original.omega(), restored.omega());
        assert_eq!(original.true_premium(), restored.true_premium());
        for j in 0..original.n_features() {
            for i in 0..original.len() {
                let a = original.x().get(i, j);
                let b = restored.x().get(i, j);
                assert!(a == b || (a.is_nan() && b.is_nan()));
            }
        }
    }

    #[test]
    fn csv_parse_error_carries_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "y,omega,x1\n1.0,1.0,0.5\noops,1.0,0.5\n").unwrap();
        let err = Portfolio::read_csv(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":3:"), "missing line number in {msg}");
    }

    #[test]
    fn csv_missing_cells_become_nan() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing.csv");
        std::fs::write(&path, "y,omega,x1,x2\n1.0,1.0,,0.5\n0.0,2.0,0.25,\n").unwrap();
        let p = Portfolio::read_csv(&path).unwrap();
        assert!(p.x().get(0, 0).is_nan());
        assert!(p.x().get(1, 1).is_nan());
        assert_eq!(p.x().get(1, 0), 0.25);
    }

    #[test]
    fn csv_rejects_unexpected_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hdr.csv");
        std::fs::write(&path, "loss,omega,x1\n1.0,1.0,0.5\n").unwrap();
        assert!(Portfolio::read_csv(&path).is_err());
    }

    #[test]
    fn subset_and_counts() {
        let p = sample();
        assert_eq!(p.n_zero(), 1);
        assert_eq!(p.n_pos(), 2);
        let s = p.subset(&[2, 0]);
        assert_eq!(s.y(), &[2.25, 0.0]);
        assert_eq!(s.omega(), &[0.5, 1.0]);
        assert_eq!(s.x().get(0, 1), 3.5);
    }
}
