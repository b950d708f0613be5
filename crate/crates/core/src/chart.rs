//! Coordinate charts: the local patch a system lives on, with a safe
//! sampling box per coordinate used by every numeric probe.

use crate::expr::Num;
use num_traits::ToPrimitive;
use rand::Rng;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ChartError {
    #[error("chart dimension must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("duplicate coordinate name {0}")]
    DuplicateName(String),
    #[error("degenerate sampling interval for {0}")]
    DegenerateBox(String),
    #[error("unknown coordinate {0}")]
    UnknownCoordinate(String),
}

/// Sampling interval used when an input file does not pin one down.
pub const DEFAULT_BOX: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    coords: Arc<[String]>,
    /// Closed rational intervals, cached as f64 for sampling.
    boxes: Arc<[(Num, Num)]>,
    boxes_f64: Arc<[(f64, f64)]>,
}

impl Chart {
    pub fn new(coords: Vec<String>, boxes: Vec<(Num, Num)>) -> Result<Chart, ChartError> {
        if coords.len() < 2 {
            return Err(ChartError::TooSmall(coords.len()));
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(ChartError::DuplicateName(c.clone()));
            }
        }
        assert_eq!(coords.len(), boxes.len(), "one box per coordinate");
        let mut cached = Vec::with_capacity(boxes.len());
        for (c, (lo, hi)) in coords.iter().zip(&boxes) {
            let (lo, hi) = (lo.to_f64().unwrap_or(f64::NAN), hi.to_f64().unwrap_or(f64::NAN));
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ChartError::DegenerateBox(c.clone()));
            }
            cached.push((lo, hi));
        }
        Ok(Chart {
            coords: coords.into(),
            boxes: boxes.into(),
            boxes_f64: cached.into(),
        })
    }

    /// Chart with the default sampling box on every coordinate.
    pub fn with_default_boxes(coords: Vec<String>) -> Result<Chart, ChartError> {
        let n = coords.len();
        let b = (
            Num::new(1.into(), 2.into()),
            Num::from_integer(2.into()),
        );
        Chart::new(coords, vec![b; n])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &str {
        &self.coords[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn boxes(&self) -> &[(Num, Num)] {
        &self.boxes
    }

    pub fn box_f64(&self, i: usize) -> (f64, f64) {
        self.boxes_f64[i]
    }

    /// Center of the sampling box, the default base point for
    /// normalization and transport.
    pub fn base_point(&self) -> Vec<f64> {
        self.boxes_f64.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.boxes_f64.iter())
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    /// Draw a uniform point from the sampling box.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.boxes_f64
            .iter()
            .map(|(lo, hi)| rng.gen_range(*lo..*hi))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_dimension_one() {
        let r = Chart::with_default_boxes(vec!["x".into()]);
        assert!(matches!(r, Err(ChartError::TooSmall(1))));
    }

    #[test]
    fn rejects_duplicate_names() {
        let r = Chart::with_default_boxes(vec!["x".into(), "x".into()]);
        assert!(matches!(r, Err(ChartError::DuplicateName(_))));
    }

    #[test]
    fn rejects_degenerate_box() {
        let one = Num::from_integer(1.into());
        let r = Chart::new(
            vec!["x".into(), "y".into()],
            vec![(one.clone(), one.clone()), (one.clone(), one + Num::from_integer(1.into()))],
        );
        assert!(matches!(r, Err(ChartError::DegenerateBox(_))));
    }

    #[test]
    fn base_point_is_box_center() {
        let c = Chart::with_default_boxes(vec!["x".into(), "y".into()]).unwrap();
        assert_eq!(c.base_point(), vec![1.25, 1.25]);
    }
}
