//! The initial price forward curve (PFC) `f_0(τ)`.
//!
//! Curves are piecewise constant over delivery segments, right-continuous at
//! every breakpoint, and bounded by a horizon. Times are hours from the
//! reference epoch shared by the whole crate.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_START_COLUMN: &str = "delivery_start_hours";
pub const CSV_PRICE_COLUMN: &str = "price_eur_mwh";
pub const CSV_END_COLUMN: &str = "end_hours";

/// Piecewise-constant price forward curve in EUR/MWh.
///
/// Segment `i` covers `[starts[i], starts[i + 1])`, the last one
/// `[starts[n - 1], horizon]`. The horizon itself is evaluable and takes the
/// last segment's value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PfcJson", into = "PfcJson")]
pub struct PriceForwardCurve {
    starts: Vec<f64>,
    values: Vec<f64>,
    horizon: f64,
}

#[derive(Serialize, Deserialize)]
struct PfcJson {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    horizon: f64,
}

impl TryFrom<PfcJson> for PriceForwardCurve {
    type Error = Error;

    fn try_from(json: PfcJson) -> Result<Self> {
        Self::new(json.breakpoints, json.values, json.horizon)
    }
}

impl From<PriceForwardCurve> for PfcJson {
    fn from(pfc: PriceForwardCurve) -> Self {
        PfcJson {
            breakpoints: pfc.starts,
            values: pfc.values,
            horizon: pfc.horizon,
        }
    }
}

impl PriceForwardCurve {
    pub fn new(starts: Vec<f64>, values: Vec<f64>, horizon: f64) -> Result<Self> {
        if starts.is_empty() {
            return Err(Error::Argument("PFC needs at least one segment".into()));
        }
        if starts.len() != values.len() {
            return Err(Error::Argument(format!(
                "PFC has {} breakpoints but {} values",
                starts.len(),
                values.len()
            )));
        }
        for (i, (&s, &v)) in starts.iter().zip(&values).enumerate() {
            if !s.is_finite() {
                return Err(Error::Row { row: i + 1, message: format!("non-finite delivery start {s}") });
            }
            if !v.is_finite() {
                return Err(Error::Row { row: i + 1, message: format!("non-finite price {v}") });
            }
            if i > 0 && s <= starts[i - 1] {
                return Err(Error::Row {
                    row: i + 1,
                    message: format!("delivery start {s} not after previous {}", starts[i - 1]),
                });
            }
        }
        let last = *starts.last().expect("non-empty");
        if !horizon.is_finite() || horizon <= last {
            return Err(Error::Argument(format!(
                "horizon {horizon} must be finite and after the last delivery start {last}"
            )));
        }
        Ok(Self { starts, values, horizon })
    }

    pub fn flat(price: f64, start: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![start], vec![price], horizon)
    }

    pub fn start(&self) -> f64 {
        self.starts[0]
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn starts(&self) -> &[f64] {
        &self.starts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// All breakpoints including the horizon.
    pub fn knots(&self) -> Vec<f64> {
        let mut knots = self.starts.clone();
        knots.push(self.horizon);
        knots
    }

    pub fn segment_count(&self) -> usize {
        self.starts.len()
    }

    pub fn contains(&self, tau: f64) -> bool {
        tau >= self.start() && tau <= self.horizon
    }

    fn check_domain(&self, what: &'static str, tau: f64) -> Result<()> {
        if self.contains(tau) {
            Ok(())
        } else {
            Err(Error::Domain { what, value: tau, start: self.start(), end: self.horizon })
        }
    }

    fn segment(&self, tau: f64) -> usize {
        // right-continuous: a breakpoint belongs to the segment it opens
        self.starts.partition_point(|&s| s <= tau).saturating_sub(1)
    }

    fn segment_end(&self, i: usize) -> f64 {
        self.starts.get(i + 1).copied().unwrap_or(self.horizon)
    }

    pub fn value(&self, tau: f64) -> Result<f64> {
        self.check_domain("tau", tau)?;
        Ok(self.values[self.segment(tau)])
    }

    /// Exact integral of the curve over `[tau1, tau2]`, `tau1 <= tau2`.
    pub fn integral(&self, tau1: f64, tau2: f64) -> Result<f64> {
        self.check_domain("tau1", tau1)?;
        self.check_domain("tau2", tau2)?;
        if tau1 > tau2 {
            return Err(Error::Argument(format!("tau1 = {tau1} > tau2 = {tau2}")));
        }
        let mut total = 0.0;
        let mut i = self.segment(tau1);
        let mut lo = tau1;
        while lo < tau2 {
            let hi = self.segment_end(i).min(tau2);
            total += (hi - lo) * self.values[i];
            lo = hi;
            i += 1;
            if i == self.starts.len() {
                break;
            }
        }
        Ok(total)
    }

    /// Exact average of the curve over `[tau1, tau2]`.
    pub fn average(&self, tau1: f64, tau2: f64) -> Result<f64> {
        if !(tau1 < tau2) {
            return Err(Error::Argument(format!("average needs tau1 < tau2, got [{tau1}, {tau2}]")));
        }
        Ok(self.integral(tau1, tau2)? / (tau2 - tau1))
    }

    /// Smallest and largest segment value overlapping `[tau1, tau2]`.
    pub fn range_on(&self, tau1: f64, tau2: f64) -> Result<(f64, f64)> {
        self.check_domain("tau1", tau1)?;
        self.check_domain("tau2", tau2)?;
        let first = self.segment(tau1);
        let mut last = self.segment(tau2);
        // a window ending exactly on a breakpoint does not touch the next segment
        if last > first && self.starts[last] == tau2 {
            last -= 1;
        }
        let slice = &self.values[first..=last];
        let lo = slice.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((lo, hi))
    }

    /// Reads the CSV format `delivery_start_hours,price_eur_mwh[,end_hours]`.
    ///
    /// The final segment ends at the last row's `end_hours` if that column is
    /// present, otherwise at `horizon`, which is then required.
    pub fn from_csv_reader<R: Read>(reader: R, horizon: Option<f64>) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = csv.headers()?.clone();
        let column = |name: &str| headers.iter().position(|h| h == name);
        let start_col = column(CSV_START_COLUMN).ok_or_else(|| {
            Error::Argument(format!("missing `{CSV_START_COLUMN}` column in PFC header"))
        })?;
        let price_col = column(CSV_PRICE_COLUMN).ok_or_else(|| {
            Error::Argument(format!("missing `{CSV_PRICE_COLUMN}` column in PFC header"))
        })?;
        let end_col = column(CSV_END_COLUMN);

        let mut starts = Vec::new();
        let mut values = Vec::new();
        let mut ends: Vec<Option<f64>> = Vec::new();
        for (i, record) in csv.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::Row { row, message: e.to_string() })?;
            let field = |col: usize, name: &str| -> Result<f64> {
                let raw = record
                    .get(col)
                    .ok_or_else(|| Error::Row { row, message: format!("missing `{name}`") })?;
                let v: f64 = raw
                    .parse()
                    .map_err(|_| Error::Row { row, message: format!("cannot parse `{name}` value {raw:?}") })?;
                if !v.is_finite() {
                    return Err(Error::Row { row, message: format!("non-finite `{name}` value {raw:?}") });
                }
                Ok(v)
            };
            let start = field(start_col, CSV_START_COLUMN)?;
            let price = field(price_col, CSV_PRICE_COLUMN)?;
            if let Some(&prev) = starts.last() {
                if start <= prev {
                    return Err(Error::Row {
                        row,
                        message: format!("delivery start {start} not after previous {prev} (rows must be sorted)"),
                    });
                }
            }
            let end = match end_col {
                Some(col) if record.get(col).is_some_and(|s| !s.is_empty()) => {
                    Some(field(col, CSV_END_COLUMN)?)
                }
                _ => None,
            };
            starts.push(start);
            values.push(price);
            ends.push(end);
        }
        if starts.is_empty() {
            return Err(Error::Argument("PFC file has no data rows".into()));
        }
        for (i, end) in ends.iter().enumerate().take(starts.len() - 1) {
            if let Some(end) = *end {
                if end != starts[i + 1] {
                    return Err(Error::Row {
                        row: i + 1,
                        message: format!("end_hours {end} does not match next delivery start {}", starts[i + 1]),
                    });
                }
            }
        }
        let column_horizon = *ends.last().expect("non-empty");
        let horizon = match (column_horizon, horizon) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Argument(format!(
                    "PFC end_hours {a} disagrees with horizon {b}"
                )))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => {
                return Err(Error::Argument(
                    "PFC final segment end unknown: add an `end_hours` column or pass a horizon".into(),
                ))
            }
        };
        Self::new(starts, values, horizon).map_err(|e| match e {
            Error::Argument(msg) => Error::Row { row: ends.len(), message: msg },
            other => other,
        })
    }

    pub fn from_csv_path(path: impl AsRef<Path>, horizon: Option<f64>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::File { path: path.display().to_string(), source })?;
        Self::from_csv_reader(file, horizon)
    }

    /// Writes the curve with an explicit `end_hours` column so that it reloads
    /// without a horizon argument.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record([CSV_START_COLUMN, CSV_PRICE_COLUMN, CSV_END_COLUMN])?;
        for (i, (&s, &v)) in self.starts.iter().zip(&self.values).enumerate() {
            csv.write_record([s.to_string(), v.to_string(), self.segment_end(i).to_string()])?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// Loads a PFC from a CSV byte stream.
pub fn load_pfc<R: Read>(source: R, horizon: Option<f64>) -> Result<PriceForwardCurve> {
    PriceForwardCurve::from_csv_reader(source, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_step() -> PriceForwardCurve {
        load_pfc("delivery_start_hours,price_eur_mwh\n0,30\n12,50\n".as_bytes(), Some(24.0)).unwrap()
    }

    #[test]
    fn flat_csv() {
        let pfc = load_pfc("delivery_start_hours,price_eur_mwh\n0,40\n24,40\n".as_bytes(), Some(48.0)).unwrap();
        assert_eq!(pfc.value(10.0).unwrap(), 40.0);
        assert_eq!(pfc.value(7.3).unwrap(), 40.0);
        assert_eq!(pfc.average(0.0, 24.0).unwrap(), 40.0);
        assert_eq!(pfc.horizon(), 48.0);
    }

    #[test]
    fn piecewise_lookup_and_right_continuity() {
        let pfc = two_step();
        assert_eq!(pfc.value(13.0).unwrap(), 50.0);
        assert_eq!(pfc.value(12.0).unwrap(), 50.0);
        assert_eq!(pfc.value(11.999).unwrap(), 30.0);
        assert_eq!(pfc.value(24.0).unwrap(), 50.0);
    }

    #[test]
    fn averages() {
        let pfc = two_step();
        assert_eq!(pfc.average(0.0, 24.0).unwrap(), 40.0);
        assert_eq!(pfc.average(6.0, 18.0).unwrap(), 40.0);
        assert_eq!(pfc.average(13.0, 14.0).unwrap(), 50.0);
        assert!(matches!(pfc.average(5.0, 5.0), Err(Error::Argument(_))));
        assert!(matches!(pfc.average(6.0, 5.0), Err(Error::Argument(_))));
    }

    #[test]
    fn out_of_domain() {
        let pfc = two_step();
        assert!(matches!(pfc.value(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(pfc.value(24.5), Err(Error::Domain { .. })));
        assert!(matches!(pfc.average(-1.0, 3.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn nan_price_names_row() {
        let err = load_pfc("delivery_start_hours,price_eur_mwh\n0,30\n1,NaN\n".as_bytes(), Some(2.0)).unwrap_err();
        match err {
            Error::Row { row, message } => {
                assert_eq!(row, 2);
                assert!(message.contains("NaN"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_unsorted_rows() {
        let err = load_pfc("delivery_start_hours,price_eur_mwh\n0,30\nabc,3\n".as_bytes(), Some(2.0)).unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }), "{err:?}");
        let err = load_pfc("delivery_start_hours,price_eur_mwh\n0,30\n5,3\n4,1\n".as_bytes(), Some(6.0)).unwrap_err();
        assert!(matches!(err, Error::Row { row: 3, .. }), "{err:?}");
        let err = load_pfc("delivery_start_hours,price_eur_mwh\n0,30\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn end_hours_column() {
        let pfc = load_pfc(
            "delivery_start_hours,price_eur_mwh,end_hours\n0,30,12\n12,50,30\n".as_bytes(),
            None,
        )
        .unwrap();
        assert_eq!(pfc.horizon(), 30.0);
        let err = load_pfc(
            "delivery_start_hours,price_eur_mwh,end_hours\n0,30,11\n12,50,30\n".as_bytes(),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Row { row: 1, .. }));
    }

    #[test]
    fn json_fields() {
        let json = serde_json::to_value(two_step()).unwrap();
        assert_eq!(json["breakpoints"], serde_json::json!([0.0, 12.0]));
        assert_eq!(json["values"], serde_json::json!([30.0, 50.0]));
        assert_eq!(json["horizon"], serde_json::json!(24.0));
        let bad = serde_json::from_str::<PriceForwardCurve>(r#"{"breakpoints":[0,1],"values":[1],"horizon":2}"#);
        assert!(bad.is_err());
    }

    fn arb_curve() -> impl Strategy<Value = PriceForwardCurve> {
        prop::collection::vec((0.1f64..48.0, -50.0f64..200.0), 1..30).prop_map(|segs| {
            let mut t = 0.0;
            let mut starts = Vec::new();
            let mut values = Vec::new();
            for (len, v) in segs {
                starts.push(t);
                values.push(v);
                t += len;
            }
            PriceForwardCurve::new(starts, values, t).unwrap()
        })
    }

    proptest! {
        #[test]
        fn average_bounded_and_additive(pfc in arb_curve(), x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0) {
            let span = pfc.horizon() - pfc.start();
            let mut pts = [x * span, y * span, z * span];
            pts.sort_by(f64::total_cmp);
            let [a, b, c] = pts;
            prop_assume!(b - a > 1e-9 && c - b > 1e-9);
            let (lo, hi) = pfc.range_on(a, c).unwrap();
            let avg = pfc.average(a, c).unwrap();
            prop_assert!(avg >= lo - 1e-12 * lo.abs().max(1.0) && avg <= hi + 1e-12 * hi.abs().max(1.0));
            let lhs = (b - a) * pfc.average(a, b).unwrap() + (c - b) * pfc.average(b, c).unwrap();
            let rhs = (c - a) * avg;
            let scale = pfc.values().iter().map(|v| v.abs()).fold(1.0, f64::max) * (c - a);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn csv_roundtrip(pfc in arb_curve()) {
            let mut buf = Vec::new();
            pfc.write_csv(&mut buf).unwrap();
            let once = load_pfc(buf.as_slice(), None).unwrap();
            let mut buf2 = Vec::new();
            once.write_csv(&mut buf2).unwrap();
            prop_assert_eq!(&once, &pfc);
            prop_assert_eq!(buf, buf2);
        }
    }
}
