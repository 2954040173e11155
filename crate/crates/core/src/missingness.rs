//! Deletion mechanisms applied to complete synthetic data.

use std::fmt;

use serde::Serialize;

use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::rng::RngStream;

/// Default MAR cut point: `y` is deleted whenever `x > -1`.
pub const DEFAULT_THRESHOLD: f64 = -1.0;
/// Default MCAR deletion probability.
pub const DEFAULT_MISS_PROB: f64 = 0.84;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    /// Missing iff `x > threshold`.
    MarThreshold { threshold: f64 },
    /// Missing independently with probability `miss_prob`.
    Mcar { miss_prob: f64 },
}

impl Mechanism {
    pub fn mar(threshold: f64) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(invalid("MAR threshold must be finite"));
        }
        Ok(Mechanism::MarThreshold { threshold })
    }

    pub fn mcar(miss_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&miss_prob) {
            return Err(invalid(format!(
                "MCAR probability {miss_prob} outside [0, 1]"
            )));
        }
        Ok(Mechanism::Mcar { miss_prob })
    }

    pub fn default_mar() -> Self {
        Mechanism::MarThreshold {
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn default_mcar() -> Self {
        Mechanism::Mcar {
            miss_prob: DEFAULT_MISS_PROB,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Mechanism::MarThreshold { threshold } => Self::mar(threshold).map(|_| ()),
            Mechanism::Mcar { miss_prob } => Self::mcar(miss_prob).map(|_| ()),
        }
    }

    /// Short label used in file names and CSV columns.
    pub fn label(&self) -> &'static str {
        match self {
            Mechanism::MarThreshold { .. } => "mar",
            Mechanism::Mcar { .. } => "mcar",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Delete outcomes from a complete dataset. The MAR rule never touches the
/// stream.
pub fn ampute(data: &Dataset, mech: &Mechanism, stream: &mut RngStream) -> Result<Dataset> {
    mech.validate()?;
    if data.missing_count() > 0 {
        return Err(invalid("ampute expects a dataset with no missing outcomes"));
    }
    let mask: Vec<bool> = match *mech {
        Mechanism::MarThreshold { threshold } => data.x().iter().map(|&x| x > threshold).collect(),
        Mechanism::Mcar { miss_prob } => (0..data.n())
            .map(|_| stream.uniform() < miss_prob)
            .collect(),
    };
    Ok(data.with_mask(&mask))
}

pub fn missing_fraction(data: &Dataset) -> f64 {
    if data.n() == 0 {
        return 0.0;
    }
    data.missing_count() as f64 / data.n() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_bivariate_normal;
    use crate::rng::make_stream;

    #[test]
    fn mar_keeps_low_x_and_deletes_high_x() {
        let d = Dataset::from_points(&[(-2.0, 5.0), (0.0, 6.0), (-1.0, 7.0)]).unwrap();
        let out = ampute(&d, &Mechanism::default_mar(), &mut make_stream(0, 0)).unwrap();
        assert_eq!(out.y(), &[Some(5.0), None, Some(7.0)]);
        assert_eq!(out.x(), d.x());
    }

    #[test]
    fn mcar_boundaries() {
        let d = gen_bivariate_normal(&mut make_stream(1, 0), 300, 0.5).unwrap();
        let none = ampute(&d, &Mechanism::mcar(0.0).unwrap(), &mut make_stream(1, 1)).unwrap();
        assert_eq!(none, d);
        let all = ampute(&d, &Mechanism::mcar(1.0).unwrap(), &mut make_stream(1, 1)).unwrap();
        assert_eq!(missing_fraction(&all), 1.0);
    }

    #[test]
    fn rejects_already_incomplete_input() {
        let d = Dataset::new(vec![0.0, 1.0], vec![Some(1.0), None]).unwrap();
        assert!(ampute(&d, &Mechanism::default_mar(), &mut make_stream(0, 0)).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Mechanism::mcar(1.2).is_err());
        assert!(Mechanism::mcar(-0.1).is_err());
        assert!(Mechanism::mar(f64::NAN).is_err());
    }

    #[test]
    fn fraction_counts() {
        let y: Vec<Option<f64>> = (0..100)
            .map(|i| if i < 84 { None } else { Some(1.0) })
            .collect();
        let d = Dataset::new(vec![0.0; 100], y).unwrap();
        assert!((missing_fraction(&d) - 0.84).abs() < 1e-15);
        let full = Dataset::complete(vec![0.0; 4], vec![1.0; 4]).unwrap();
        assert_eq!(missing_fraction(&full), 0.0);
    }

    #[test]
    fn mar_ignores_stream() {
        let d = gen_bivariate_normal(&mut make_stream(2, 0), 500, 0.8).unwrap();
        let a = ampute(&d, &Mechanism::default_mar(), &mut make_stream(10, 1)).unwrap();
        let b = ampute(&d, &Mechanism::default_mar(), &mut make_stream(99, 7)).unwrap();
        assert_eq!(a, b);
    }
}
