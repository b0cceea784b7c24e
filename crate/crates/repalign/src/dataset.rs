use crate::error::{Error, Result};
use crate::linalg::Mat;

/// A supervised dataset: one feature row per sample plus a label vector.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Mat,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Mat, y: Vec<f64>) -> Result<Dataset> {
        if x.rows() != y.len() {
            return Err(Error::invalid_input(format!(
                "dataset: {} feature rows but {} labels",
                x.rows(),
                y.len()
            )));
        }
        if !x.all_finite() || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid_input("dataset: non-finite entries"));
        }
        Ok(Dataset { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}
