use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One piece of a piecewise-constant function of delivery time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPoint {
    pub start_hours: f64,
    pub value: f64,
}

/// Right-continuous step function. Before the first start it takes the first
/// value; after the last start it keeps the last value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<StepPoint>", into = "Vec<StepPoint>")]
pub struct StepFunction {
    starts: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(starts: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if starts.is_empty() || starts.len() != values.len() {
            return Err(Error::Argument(format!(
                "step function needs matching non-empty starts and values ({} vs {})",
                starts.len(),
                values.len()
            )));
        }
        for (i, (&s, &v)) in starts.iter().zip(&values).enumerate() {
            if !s.is_finite() || !v.is_finite() {
                return Err(Error::Argument(format!("step {i} is not finite: ({s}, {v})")));
            }
            if i > 0 && s <= starts[i - 1] {
                return Err(Error::Argument(format!("step starts not increasing at index {i}")));
            }
        }
        Ok(Self { starts, values })
    }

    pub fn constant(value: f64) -> Self {
        Self { starts: vec![0.0], values: vec![value] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.starts.partition_point(|&s| s <= x).saturating_sub(1);
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Points where the function may jump.
    pub fn breakpoints(&self) -> &[f64] {
        &self.starts[1..]
    }
}

impl TryFrom<Vec<StepPoint>> for StepFunction {
    type Error = Error;

    fn try_from(points: Vec<StepPoint>) -> Result<Self> {
        let (starts, values) = points.into_iter().map(|p| (p.start_hours, p.value)).unzip();
        Self::new(starts, values)
    }
}

impl From<StepFunction> for Vec<StepPoint> {
    fn from(f: StepFunction) -> Self {
        f.starts
            .into_iter()
            .zip(f.values)
            .map(|(start_hours, value)| StepPoint { start_hours, value })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_is_right_continuous_and_extended() {
        let f = StepFunction::new(vec![0.0, 10.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(f.eval(-3.0), 1.0);
        assert_eq!(f.eval(9.99), 1.0);
        assert_eq!(f.eval(10.0), 2.0);
        assert_eq!(f.eval(1e6), 2.0);
        assert_eq!(f.breakpoints(), &[10.0]);
    }

    #[test]
    fn json_shape() {
        let f: StepFunction = serde_json::from_str(r#"[{"start_hours":0,"value":0.1},{"start_hours":24,"value":0.2}]"#).unwrap();
        assert_eq!(f.eval(30.0), 0.2);
        assert!(serde_json::from_str::<StepFunction>(r#"[{"start_hours":5,"value":0.1},{"start_hours":1,"value":0.2}]"#).is_err());
    }
}
