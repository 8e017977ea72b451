//! Output records and formats of the `jacobi-heat` command-line tool.
//!
//! CSV files have a header row, `,` separators and numbers written with 17 significant
//! digits, so parsing them back recovers every f64 exactly. JSON keys come out in a fixed
//! order (struct field order, maps sorted).

use std::io::{Read, Write};
use std::process::ExitCode;

use jacobi_heat::maximal::WeakTypeRow;
use jacobi_heat::JacobiParams;

/// Process exit codes.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const CHECK_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const PRECISION_FLOOR: u8 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Kernel(#[from] jacobi_heat::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed record: {0}")]
    Parse(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        use jacobi_heat::Error as E;
        ExitCode::from(match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Kernel(E::PrecisionFloor { .. }) => exit::PRECISION_FLOOR,
            CliError::Kernel(E::InvalidParams(_) | E::Domain { .. } | E::GridMismatch(_)) => {
                exit::USAGE
            }
            _ => exit::CHECK_FAILED,
        })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// `{:.16e}`: 17 significant digits, enough to round-trip any f64.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_num(s: &str) -> CliResult<f64> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("not a number: {s:?}")))
}

fn parse_bool(s: &str) -> CliResult<bool> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("not a boolean: {s:?}")))
}

/// One kernel evaluation with the envelope it is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub params: JacobiParams,
    pub theta: f64,
    pub phi: f64,
    pub t: f64,
    pub kernel: f64,
    pub envelope: f64,
    /// kernel / envelope
    pub ratio: f64,
    pub tail_bound: f64,
    pub certified: bool,
}

impl ReportRow {
    pub const HEADER: [&'static str; 10] = [
        "alpha",
        "beta",
        "theta",
        "phi",
        "t",
        "kernel",
        "envelope",
        "ratio",
        "tail_bound",
        "certified",
    ];

    fn record(&self) -> Vec<String> {
        let mut r: Vec<String> = [
            self.params.alpha(),
            self.params.beta(),
            self.theta,
            self.phi,
            self.t,
            self.kernel,
            self.envelope,
            self.ratio,
            self.tail_bound,
        ]
        .iter()
        .map(|&v| fmt_num(v))
        .collect();
        r.push(self.certified.to_string());
        r
    }

    fn from_record(r: &csv::StringRecord) -> CliResult<Self> {
        if r.len() != Self::HEADER.len() {
            return Err(CliError::Parse(format!(
                "expected {} fields, got {}",
                Self::HEADER.len(),
                r.len()
            )));
        }
        let n = |i: usize| parse_num(&r[i]);
        Ok(Self {
            params: JacobiParams::new(n(0)?, n(1)?)?,
            theta: n(2)?,
            phi: n(3)?,
            t: n(4)?,
            kernel: n(5)?,
            envelope: n(6)?,
            ratio: n(7)?,
            tail_bound: n(8)?,
            certified: parse_bool(&r[9])?,
        })
    }
}

pub fn write_report_rows<W: Write>(out: W, rows: &[ReportRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ReportRow::HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report_rows<R: Read>(input: R) -> CliResult<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(ReportRow::HEADER) {
        return Err(CliError::Parse("unexpected header".into()));
    }
    r.records()
        .map(|rec| ReportRow::from_record(&rec?))
        .collect()
}

pub const WEAK_TYPE_HEADER: [&str; 3] = ["width", "center", "ratio"];

/// Weak-type rows; a multi-dimensional center is written as `;`-separated coordinates.
pub fn write_weak_type_rows<W: Write>(out: W, rows: &[WeakTypeRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(WEAK_TYPE_HEADER)?;
    for row in rows {
        let center: Vec<String> = row.center.iter().map(|&c| fmt_num(c)).collect();
        w.write_record([fmt_num(row.width), center.join(";"), fmt_num(row.ratio)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_weak_type_rows<R: Read>(input: R) -> CliResult<Vec<WeakTypeRow>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(WEAK_TYPE_HEADER) {
        return Err(CliError::Parse("unexpected header".into()));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(CliError::Parse(format!(
                    "expected 3 fields, got {}",
                    rec.len()
                )));
            }
            Ok(WeakTypeRow {
                width: parse_num(&rec[0])?,
                center: rec[1].split(';').map(parse_num).collect::<CliResult<_>>()?,
                ratio: parse_num(&rec[2])?,
            })
        })
        .collect()
}

/// Parses `a,b` into a parameter pair.
pub fn parse_pair(s: &str) -> Result<JacobiParams, String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected ALPHA,BETA, got {s:?}"))?;
    let a: f64 = a
        .trim()
        .parse()
        .map_err(|_| format!("bad alpha in {s:?}"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad beta in {s:?}"))?;
    JacobiParams::new(a, b).map_err(|e| e.to_string())
}

/// Thread count from `JACOBI_HEAT_THREADS`; `None` (auto) when unset or 0.
pub fn thread_cap(var: Option<&str>) -> Result<Option<usize>, String> {
    match var.map(str::trim) {
        None | Some("") => Ok(None),
        Some(s) => match s.parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(format!(
                "JACOBI_HEAT_THREADS must be a non-negative integer, got {s:?}"
            )),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(theta: f64) -> ReportRow {
        ReportRow {
            params: JacobiParams::new(2.3, 0.7).unwrap(),
            theta,
            phi: 0.1 + 0.2,
            t: 1e-3,
            kernel: 1.0 / 3.0,
            envelope: f64::MIN_POSITIVE,
            ratio: f64::INFINITY,
            tail_bound: 0.0,
            certified: true,
        }
    }

    #[test]
    fn report_rows_round_trip() {
        let rows = vec![row(0.0), row(std::f64::consts::PI), row(1.0 / 7.0)];
        let mut buf = Vec::new();
        write_report_rows(&mut buf, &rows).unwrap();
        assert_eq!(read_report_rows(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn weak_rows_round_trip() {
        let rows = vec![
            WeakTypeRow {
                width: 0.2,
                center: vec![0.1, 1.0 / 3.0],
                ratio: 0.987654321,
            },
            WeakTypeRow {
                width: 0.025,
                center: vec![2.0],
                ratio: 1.0,
            },
        ];
        let mut buf = Vec::new();
        write_weak_type_rows(&mut buf, &rows).unwrap();
        assert_eq!(read_weak_type_rows(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_num(0.5), "5.0000000000000000e-1");
        assert_eq!(
            fmt_num(0.1)
                .trim_start_matches('-')
                .split('e')
                .next()
                .unwrap()
                .len(),
            18
        );
    }

    fn any_f64() -> impl proptest::strategy::Strategy<Value = f64> {
        use proptest::num::f64 as f;
        f::POSITIVE | f::NEGATIVE | f::ZERO | f::SUBNORMAL | f::INFINITE
    }

    proptest::proptest! {
        #[test]
        fn any_row_round_trips(
            a in -0.99f64..10.0,
            b in -0.99f64..10.0,
            nums in proptest::collection::vec(any_f64(), 8),
            certified: bool,
        ) {
            let r = ReportRow {
                params: JacobiParams::new(a, b).unwrap(),
                theta: nums[0],
                phi: nums[1],
                t: nums[2],
                kernel: nums[3],
                envelope: nums[4],
                ratio: nums[5],
                tail_bound: nums[6],
                certified,
            };
            let mut buf = Vec::new();
            write_report_rows(&mut buf, &[r]).unwrap();
            proptest::prop_assert_eq!(read_report_rows(buf.as_slice()).unwrap(), vec![r]);
        }

        #[test]
        fn any_weak_row_round_trips(width in any_f64(), center in proptest::collection::vec(any_f64(), 1..4), ratio in any_f64()) {
            let rows = vec![WeakTypeRow { width, center, ratio }];
            let mut buf = Vec::new();
            write_weak_type_rows(&mut buf, &rows).unwrap();
            proptest::prop_assert_eq!(read_weak_type_rows(buf.as_slice()).unwrap(), rows);
        }
    }

    #[test]
    fn pairs_and_threads() {
        assert_eq!(
            parse_pair("-0.5, 1.5").unwrap(),
            JacobiParams::new(-0.5, 1.5).unwrap()
        );
        assert!(parse_pair("-1,0").is_err());
        assert!(parse_pair("0").is_err());
        assert_eq!(thread_cap(None), Ok(None));
        assert_eq!(thread_cap(Some("0")), Ok(None));
        assert_eq!(thread_cap(Some("3")), Ok(Some(3)));
        assert!(thread_cap(Some("x")).is_err());
    }
}
