//! JSON field files: `{"grid": {"n_r": .., "n_theta": ..}, "values": [..]}` for
//! the sphere and `{"grid": {"n_phi": ..}, "values": [..]}` for the circle.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::{CircleField, CircleGrid, PolarGrid, ScalarField};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Sphere { n_r: usize, n_theta: usize },
    Circle { n_phi: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldFile {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

/// A field read from disk, on whichever grid the file declares.
#[derive(Debug, Clone)]
pub enum AnyField {
    Sphere(ScalarField),
    Circle(CircleField),
}

impl FieldFile {
    pub fn into_field(self) -> Result<AnyField> {
        match self.grid {
            GridSpec::Sphere { n_r, n_theta } => {
                let g = PolarGrid::new(n_r, n_theta)?;
                Ok(AnyField::Sphere(ScalarField::new(g, self.values)?))
            }
            GridSpec::Circle { n_phi } => {
                let g = CircleGrid::new(n_phi)?;
                Ok(AnyField::Circle(CircleField::new(g, self.values)?))
            }
        }
    }
}

impl From<&ScalarField> for FieldFile {
    fn from(f: &ScalarField) -> Self {
        let g = f.grid();
        Self { grid: GridSpec::Sphere { n_r: g.n_r(), n_theta: g.n_theta() }, values: f.values().to_vec() }
    }
}

impl From<&CircleField> for FieldFile {
    fn from(h: &CircleField) -> Self {
        Self { grid: GridSpec::Circle { n_phi: h.grid().len() }, values: h.values().to_vec() }
    }
}

pub fn read_field(path: impl AsRef<Path>) -> Result<AnyField> {
    let text = fs::read_to_string(path)?;
    let file: FieldFile = serde_json::from_str(&text)?;
    file.into_field()
}

pub fn write_sphere_field(path: impl AsRef<Path>, f: &ScalarField) -> Result<()> {
    fs::write(path, serde_json::to_string(&FieldFile::from(f))?)?;
    Ok(())
}

pub fn write_circle_field(path: impl AsRef<Path>, h: &CircleField) -> Result<()> {
    fs::write(path, serde_json::to_string(&FieldFile::from(h))?)?;
    Ok(())
}
