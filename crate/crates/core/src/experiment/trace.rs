use std::io::Write;

use serde::Serialize;

use crate::paths::PathFamily;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TraceMetadata {
    pub label: String,
    pub family: Option<PathFamily>,
    /// Path traversal time, ms.
    pub duration_ms: Option<f64>,
    pub seed: Option<u64>,
}

/// Bright-state probability versus delay.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeTrace {
    pub delays: Vec<f64>,
    pub p_bright: Vec<f64>,
    /// 0 for an ideal (unsampled) trace.
    pub shots_per_point: u32,
    pub std_errors: Vec<f64>,
    pub metadata: TraceMetadata,
}

impl FringeTrace {
    /// Ideal trace with zero standard errors.
    pub fn ideal(delays: Vec<f64>, p_bright: Vec<f64>, metadata: TraceMetadata) -> Result<Self> {
        if delays.len() != p_bright.len() {
            return Err(Error::InvalidInput(format!("{} delays but {} probabilities", delays.len(), p_bright.len())));
        }
        if let Some(p) = p_bright.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidInput(format!("probability {p} outside [0, 1]")));
        }
        let n = delays.len();
        Ok(Self { delays, p_bright, shots_per_point: 0, std_errors: vec![0.0; n], metadata })
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    /// CSV with columns delay_ms, p_bright, std_err.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["delay_ms", "p_bright", "std_err"])?;
        for i in 0..self.len() {
            out.write_record([
                format!("{:.9}", self.delays[i]),
                format!("{:.12}", self.p_bright[i]),
                format!("{:.12}", self.std_errors[i]),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::InvalidInput(format!("trace CSV lacks a '{name}' column")))
        };
        let (cd, cp) = (col("delay_ms")?, col("p_bright")?);
        let ce = col("std_err").ok();
        let mut t = FringeTrace {
            delays: vec![],
            p_bright: vec![],
            shots_per_point: 0,
            std_errors: vec![],
            metadata: TraceMetadata::default(),
        };
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let num = |c: usize| -> Result<f64> {
                rec.get(c)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("row {}: column {} is not a number", line + 2, c + 1)))
            };
            t.delays.push(num(cd)?);
            t.p_bright.push(num(cp)?);
            t.std_errors.push(match ce {
                Some(c) => num(c)?,
                None => 0.0,
            });
        }
        if t.is_empty() {
            return Err(Error::InvalidInput("trace CSV has no rows".into()));
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let t = FringeTrace::ideal(vec![0.0, 0.01, 0.02], vec![0.1, 0.5, 0.9], TraceMetadata::default()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("delay_ms,p_bright,std_err\n"));
        let back = FringeTrace::read_csv(&buf[..]).unwrap();
        assert_eq!(back.p_bright, t.p_bright);
        assert_eq!(back.delays, t.delays);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(FringeTrace::ideal(vec![0.0], vec![1.2], TraceMetadata::default()).is_err());
        assert!(FringeTrace::ideal(vec![0.0, 1.0], vec![0.2], TraceMetadata::default()).is_err());
    }
}
