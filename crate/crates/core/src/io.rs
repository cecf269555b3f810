//! JSON interchange.
//!
//! Every command reads and writes a [`Bundle`]:
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "regular-torus-2x2",
//!   "mesh": { "genus": 1, "faces": [[0, 1, 2], ...], "deck_labels": [[0, 0], ...] },
//!   "cr": [[0.5, 0.866], ...],
//!   "theta": [1.047, ...],
//!   "positions": [[1.0, -2.0], ...],
//!   "q": [1.0, ...],
//!   "point": { ... }
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs. `deck_labels` holds one word per
//! half-edge (half-edge `3f + t` runs from corner `t` to corner `t + 1` of
//! face `f`) and may be omitted for tori. Only `version` and `mesh` are
//! required.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::crsys::{AngleStructure, CrossRatioSystem};
use crate::error::{Error, Result};
use crate::fixtures::Fixture;
use crate::moebius::C64;
use crate::solver::AffineFamilyPoint;
use crate::surface::{TriangulatedSurface, Word};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshData {
    pub genus: u32,
    pub faces: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deck_labels: Option<Vec<Word>>,
}

impl MeshData {
    pub fn of(s: &TriangulatedSurface) -> Self {
        Self {
            genus: s.genus(),
            faces: s.faces().to_vec(),
            deck_labels: s.is_torus().then(|| s.labels().to_vec()),
        }
    }

    pub fn build(&self) -> Result<TriangulatedSurface> {
        TriangulatedSurface::new(self.faces.clone(), self.genus, self.deck_labels.clone())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bundle {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub mesh: MeshData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cr: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<AffineFamilyPoint>,
}

impl Bundle {
    pub fn new(s: &TriangulatedSurface) -> Self {
        Self {
            version: FORMAT_VERSION,
            name: None,
            mesh: MeshData::of(s),
            cr: None,
            theta: None,
            positions: None,
            q: None,
            point: None,
        }
    }

    pub fn from_fixture(f: &Fixture) -> Self {
        Self {
            name: Some(f.name.clone()),
            cr: f.cr.as_ref().map(|c| c.cr.clone()),
            theta: f.theta.as_ref().map(|t| t.theta.clone()),
            positions: f.positions.clone(),
            q: f.q.clone(),
            ..Self::new(&f.surface)
        }
    }

    /// Attaches a solved point, replacing the cross ratios and angles.
    pub fn with_point(mut self, p: AffineFamilyPoint) -> Self {
        self.cr = Some(p.cr.cr.clone());
        self.theta = Some(p.theta.theta.clone());
        self.point = Some(p);
        self
    }

    pub fn surface(&self) -> Result<TriangulatedSurface> {
        self.mesh.build()
    }

    pub fn cross_ratios(&self) -> Result<CrossRatioSystem> {
        let cr = self
            .cr
            .clone()
            .ok_or_else(|| Error::InvalidSystem("input has no cross ratios".into()))?;
        CrossRatioSystem::new(cr)
    }

    /// Angles from `theta`, or else the arguments of the cross ratios.
    pub fn angles(&self) -> Result<AngleStructure> {
        match (&self.theta, &self.cr) {
            (Some(t), _) => Ok(AngleStructure { theta: t.clone() }),
            (None, Some(cr)) => Ok(AngleStructure { theta: cr.iter().map(|c| c.arg()).collect() }),
            (None, None) => Err(Error::InvalidAngles("input has neither angles nor cross ratios".into())),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: Bundle = serde_json::from_str(text)?;
        if b.version != FORMAT_VERSION {
            return Err(Error::InvalidMesh(format!(
                "unsupported format version {} (expected {FORMAT_VERSION})",
                b.version
            )));
        }
        Ok(b)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Reads a bundle from a path, or from standard input for `None` or `-`.
pub fn read_bundle(path: Option<&std::path::Path>) -> Result<Bundle> {
    let text = match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)?,
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    Bundle::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{equilateral_torus, jessen_fixture};

    #[test]
    fn round_trip() {
        for f in [equilateral_torus(2, 3), jessen_fixture().unwrap()] {
            let b = Bundle::from_fixture(&f);
            let back = Bundle::from_json(&b.to_json().unwrap()).unwrap();
            let s = back.surface().unwrap();
            assert_eq!(s.faces(), f.surface.faces());
            assert_eq!(back.cr, b.cr);
            assert_eq!(back.q, b.q);
        }
    }

    #[test]
    fn rejects_other_versions() {
        let mut b = Bundle::from_fixture(&equilateral_torus(1, 1));
        b.version = 7;
        assert!(Bundle::from_json(&b.to_json().unwrap()).is_err());
        assert!(Bundle::from_json("{not json").is_err());
    }
}
