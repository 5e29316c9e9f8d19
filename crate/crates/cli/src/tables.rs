//! CSV schemas emitted by the commands. Each table parses its own output
//! back and re-emits identical bytes.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
#[error("malformed table: {0}")]
pub struct TableError(pub String);

fn bad(e: impl fmt::Display) -> TableError {
    TableError(e.to_string())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt(s: &str) -> Result<Option<f64>, TableError> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(bad)
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    ClosedForm,
    Exact,
    Fitted,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::ClosedForm => "closed_form",
            Source::Exact => "exact",
            Source::Fitted => "fitted",
        }
    }
}

impl FromStr for Source {
    type Err = TableError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closed_form" => Ok(Source::ClosedForm),
            "exact" => Ok(Source::Exact),
            "fitted" => Ok(Source::Fitted),
            _ => Err(TableError(format!("unknown source `{s}`"))),
        }
    }
}

/// One row of the weak-value table; columns in `PL, PR, WL, WR` order.
/// Observables not requested are left empty.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakValueRow {
    pub alpha_deg: f64,
    pub values: [Option<f64>; 4],
    pub source: Source,
    /// Present on fitted rows only.
    pub stderr: [Option<f64>; 4],
}

pub const WEAK_VALUE_HEADER: [&str; 10] = [
    "alpha_deg",
    "wPL",
    "wPR",
    "wWL",
    "wWR",
    "source",
    "stderr_PL",
    "stderr_PR",
    "stderr_WL",
    "stderr_WR",
];

pub fn weak_values_to_csv(rows: &[WeakValueRow]) -> String {
    let mut w = writer();
    w.write_record(WEAK_VALUE_HEADER).unwrap();
    for r in rows {
        let mut rec = vec![r.alpha_deg.to_string()];
        rec.extend(r.values.iter().map(|&v| fmt_opt(v)));
        rec.push(r.source.as_str().to_string());
        rec.extend(r.stderr.iter().map(|&v| fmt_opt(v)));
        w.write_record(&rec).unwrap();
    }
    finish(w)
}

pub fn weak_values_from_csv(text: &str) -> Result<Vec<WeakValueRow>, TableError> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    if rd.headers().map_err(bad)?.iter().ne(WEAK_VALUE_HEADER) {
        return Err(TableError("unexpected weak-value header".into()));
    }
    rd.records()
        .map(|rec| {
            let rec = rec.map_err(bad)?;
            let opt = |i: usize| parse_opt(&rec[i]);
            Ok(WeakValueRow {
                alpha_deg: rec[0].parse().map_err(bad)?,
                values: [opt(1)?, opt(2)?, opt(3)?, opt(4)?],
                source: rec[5].parse()?,
                stderr: [opt(6)?, opt(7)?, opt(8)?, opt(9)?],
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IteRow {
    pub transmission: f64,
    pub t: f64,
    pub n: f64,
    pub n_err: f64,
}

/// Line fit written after the rows as `# key=value` comment lines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IteFooter {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub weak_value: f64,
    pub weak_value_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IteTable {
    pub observable: String,
    pub alpha_deg: f64,
    pub rows: Vec<IteRow>,
    pub footer: IteFooter,
}

pub const ITE_HEADER: [&str; 4] = ["T", "t", "N", "N_err"];

impl IteTable {
    fn footer_pairs(&self) -> [(&'static str, String); 7] {
        let f = &self.footer;
        [
            ("observable", self.observable.clone()),
            ("alpha_deg", self.alpha_deg.to_string()),
            ("slope", f.slope.to_string()),
            ("intercept", f.intercept.to_string()),
            ("slope_stderr", f.slope_stderr.to_string()),
            ("weak_value", f.weak_value.to_string()),
            ("weak_value_err", f.weak_value_err.to_string()),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut w = writer();
        w.write_record(ITE_HEADER).unwrap();
        for r in &self.rows {
            w.write_record([r.transmission, r.t, r.n, r.n_err].map(|x| x.to_string()))
                .unwrap();
        }
        let mut out = finish(w);
        for (k, v) in self.footer_pairs() {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, TableError> {
        let mut rd = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        if rd.headers().map_err(bad)?.iter().ne(ITE_HEADER) {
            return Err(TableError("unexpected curve header".into()));
        }
        let rows = rd
            .records()
            .map(|rec| {
                let rec = rec.map_err(bad)?;
                let num = |i: usize| rec[i].parse::<f64>().map_err(bad);
                Ok(IteRow {
                    transmission: num(0)?,
                    t: num(1)?,
                    n: num(2)?,
                    n_err: num(3)?,
                })
            })
            .collect::<Result<Vec<_>, TableError>>()?;
        let footer: std::collections::HashMap<&str, &str> = text
            .lines()
            .filter_map(|l| l.strip_prefix("# "))
            .filter_map(|l| l.split_once('='))
            .collect();
        let get = |k: &str| {
            footer
                .get(k)
                .copied()
                .ok_or_else(|| TableError(format!("footer lacks `{k}`")))
        };
        let num = |k: &str| get(k)?.parse::<f64>().map_err(bad);
        Ok(Self {
            observable: get("observable")?.to_string(),
            alpha_deg: num("alpha_deg")?,
            rows,
            footer: IteFooter {
                slope: num("slope")?,
                intercept: num("intercept")?,
                slope_stderr: num("slope_stderr")?,
                weak_value: num("weak_value")?,
                weak_value_err: num("weak_value_err")?,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weak_value_rows_round_trip() {
        let rows = vec![
            WeakValueRow {
                alpha_deg: 45.0,
                values: [Some(0.0), Some(0.5), Some(0.5), Some(0.0)],
                source: Source::Exact,
                stderr: [None; 4],
            },
            WeakValueRow {
                alpha_deg: 12.5,
                values: [None, Some(0.81234567890123), None, Some(-1e-7)],
                source: Source::Fitted,
                stderr: [None, Some(0.1), None, Some(0.2)],
            },
        ];
        let text = weak_values_to_csv(&rows);
        assert!(text.starts_with(
            "alpha_deg,wPL,wPR,wWL,wWR,source,stderr_PL,stderr_PR,stderr_WL,stderr_WR\n45,0,0.5,0.5,0,exact,,,,\n"
        ));
        let back = weak_values_from_csv(&text).unwrap();
        assert_eq!(back, rows);
        assert_eq!(weak_values_to_csv(&back), text);
    }

    #[test]
    fn ite_table_round_trip() {
        let t = IteTable {
            observable: "PR".into(),
            alpha_deg: 45.0,
            rows: vec![IteRow {
                transmission: 1.0,
                t: 0.0,
                n: 1.0,
                n_err: 0.0,
            }],
            footer: IteFooter {
                slope: -1.0,
                intercept: 1.0,
                slope_stderr: 0.0,
                weak_value: 0.5,
                weak_value_err: 0.0,
            },
        };
        let text = t.to_csv();
        assert!(text.contains("# weak_value=0.5\n"));
        let back = IteTable::from_csv(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_csv(), text);
        assert!(IteTable::from_csv("T,t,N,N_err\n").is_err());
    }
}
