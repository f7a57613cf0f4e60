use std::path::Path;

use lafter_core::{BinaryMatrix, FitReport, ModelState, RealMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk form of a fitted model. Floats are written in shortest
/// round-trip form, so reading a file back reproduces every bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub k: usize,
    pub lambda: f64,
    pub z: Vec<Vec<u8>>,
    pub w: Vec<Vec<f64>>,
    pub objective_trace: Vec<f64>,
    pub seed: u64,
}

impl ModelFile {
    pub fn from_report(report: &FitReport, seed: u64) -> Self {
        let state = &report.final_state;
        ModelFile {
            k: state.k_plus(),
            lambda: state.lambda(),
            z: state.z().to_rows(),
            w: state.w().to_rows(),
            objective_trace: report.objective_trace.clone(),
            seed,
        }
    }

    /// Rebuilds the model, recomputing every cache from `Z` and `W`.
    pub fn to_state(&self) -> Result<ModelState> {
        if self.w.len() != self.k {
            return Err(Error::Usage(format!("model has k = {} but {} rows of w", self.k, self.w.len())));
        }
        if self.z.is_empty() {
            return Err(Error::Usage("model has no nodes".into()));
        }
        let z = BinaryMatrix::from_rows(&self.z, self.k)?;
        let w = RealMatrix::from_rows(&self.w, self.k)?;
        Ok(ModelState::new(z, w, self.lambda)?)
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::from_json(&text).map_err(|e| e.in_file(path))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.to_json()?;
        crate::io::write_atomic(path, |w| w.write_all(text.as_bytes()))
    }
}
