use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const HEADER: [&str; 12] =
    ["experiment", "n", "eps", "p", "q", "r", "s", "t", "trial", "seed", "statistic_name", "statistic_value"];

/// One CSV line. Parameters that do not apply stay empty.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepRow {
    pub experiment: String,
    pub n: Option<usize>,
    pub eps: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<usize>,
    pub r: Option<usize>,
    pub s: Option<usize>,
    pub t: Option<usize>,
    /// `None` for aggregate rows.
    pub trial: Option<usize>,
    pub seed: u64,
    pub statistic_name: String,
    pub statistic_value: f64,
}

impl SweepRow {
    pub fn new(experiment: &str, seed: u64) -> Self {
        Self { experiment: experiment.to_string(), seed, ..Default::default() }
    }

    /// Copy with a different statistic.
    pub fn stat(&self, name: impl Into<String>, value: f64) -> Self {
        Self { statistic_name: name.into(), statistic_value: value, ..self.clone() }
    }

    pub fn with_trial(&self, trial: usize) -> Self {
        Self { trial: Some(trial), ..self.clone() }
    }

    pub fn fields(&self) -> [String; 12] {
        let u = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        let f = |x: Option<f64>| x.map(format_g12).unwrap_or_default();
        [
            self.experiment.clone(),
            u(self.n),
            f(self.eps),
            f(self.p),
            u(self.q),
            u(self.r),
            u(self.s),
            u(self.t),
            u(self.trial),
            self.seed.to_string(),
            self.statistic_name.clone(),
            format_g12(self.statistic_value),
        ]
    }
}

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e12)`.
pub fn format_g12(x: f64) -> String {
    const P: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn write_rows<W: Write>(w: W, rows: &[SweepRow]) -> std::result::Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(HEADER)?;
    for row in rows {
        wtr.write_record(row.fields())?;
    }
    wtr.flush()?;
    Ok(())
}

/// Header plus rows, in the given order.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    write_rows(std::io::BufWriter::new(file), rows).map_err(|source| Error::Csv { path: path.to_path_buf(), source })
}

/// Same bytes as [`emit_csv`], as a string.
pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}
