//! Piecewise-constant control schedules u: [0,T] → R^m.

use crate::error::{Error, Result};

/// Piecewise-constant control: strictly increasing breakpoints
/// 0 = t_0 < … < t_K = T with one m-vector per interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    breakpoints: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl ControlSchedule {
    pub fn new(breakpoints: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints[0] != 0.0 {
            return Err(Error::InvalidParam("breakpoints must start at 0".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParam("breakpoints must be strictly increasing".into()));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidParam(format!(
                "{} intervals but {} control vectors",
                breakpoints.len() - 1,
                values.len()
            )));
        }
        let m = values.first().map_or(0, Vec::len);
        if values.iter().any(|v| v.len() != m) {
            return Err(Error::InvalidParam("control vectors must share a length".into()));
        }
        Ok(ControlSchedule { breakpoints, values })
    }

    /// Free evolution: zero control vector on [0, duration].
    pub fn zero(m: usize, duration: f64) -> Self {
        if duration <= 0.0 {
            return ControlSchedule { breakpoints: vec![0.0], values: Vec::new() };
        }
        ControlSchedule { breakpoints: vec![0.0, duration], values: vec![vec![0.0; m]] }
    }

    /// Single interval with constant control.
    pub fn constant(u: Vec<f64>, duration: f64) -> Result<Self> {
        if duration <= 0.0 {
            return Err(Error::InvalidParam("duration must be positive".into()));
        }
        ControlSchedule::new(vec![0.0, duration], vec![u])
    }

    /// Empty schedule of zero duration.
    pub fn empty() -> Self {
        ControlSchedule { breakpoints: vec![0.0], values: Vec::new() }
    }

    pub fn duration(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn num_intervals(&self) -> usize {
        self.values.len()
    }

    pub fn num_channels(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64, &[f64])> {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (w[0], w[1], v.as_slice()))
    }

    /// Control vector on the interval containing t (right-continuous;
    /// the final value extends to t = T). Zero vector outside [0, T].
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let m = self.num_channels();
        if self.values.is_empty() || t < 0.0 || t > self.duration() {
            return vec![0.0; m];
        }
        let idx = match self.breakpoints.binary_search_by(|b| b.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.values.len() - 1),
            Err(i) => i.saturating_sub(1).min(self.values.len() - 1),
        };
        self.values[idx].clone()
    }

    /// Concatenation self ♯ other (other shifted after self). Associative.
    pub fn concat(&self, other: &ControlSchedule) -> Result<ControlSchedule> {
        if self.num_intervals() > 0
            && other.num_intervals() > 0
            && self.num_channels() != other.num_channels()
        {
            return Err(Error::InvalidParam("cannot concatenate schedules with different channel counts".into()));
        }
        let t0 = self.duration();
        let mut breakpoints = self.breakpoints.clone();
        let mut values = self.values.clone();
        for w in other.breakpoints.iter().skip(1) {
            breakpoints.push(t0 + w);
        }
        values.extend(other.values.iter().cloned());
        Ok(ControlSchedule { breakpoints, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(ControlSchedule::new(vec![0.0, 1.0, 1.0], vec![vec![1.0], vec![2.0]]).is_err());
        assert!(ControlSchedule::new(vec![0.5, 1.0], vec![vec![1.0]]).is_err());
        assert!(ControlSchedule::new(vec![0.0, 1.0], vec![]).is_err());
    }

    #[test]
    fn concat_is_associative() {
        let a = ControlSchedule::constant(vec![1.0], 0.5).unwrap();
        let b = ControlSchedule::constant(vec![2.0], 0.25).unwrap();
        let c = ControlSchedule::constant(vec![-1.0], 1.0).unwrap();
        let left = a.concat(&b).unwrap().concat(&c).unwrap();
        let right = a.concat(&b.concat(&c).unwrap()).unwrap();
        assert_eq!(left, right);
        assert!((left.duration() - 1.75).abs() < 1e-15);
        assert_eq!(left.num_intervals(), 3);
    }

    #[test]
    fn zero_schedule_has_zero_values() {
        let z = ControlSchedule::zero(3, 2.0);
        assert_eq!(z.num_intervals(), 1);
        assert!(z.intervals().next().unwrap().2.iter().all(|&v| v == 0.0));
    }
}
