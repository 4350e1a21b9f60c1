//! JSON description of a skeleton.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::arc::ArcGeometry;
use super::curve::{v3, CurveSpec};
use super::skeleton::{ClampedEnd, Incidence, Knot, Skeleton};
use crate::error::{Error, Result};

const DEFAULT_RESAMPLE: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    #[serde(flatten)]
    pub curve: CurveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_override: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotSpec {
    /// Defaults to the centerline point of the first incidence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 3]>,
    /// `[arc_id, abscissa]` pairs.
    pub incidences: Vec<(usize, f64)>,
    #[serde(default = "one")]
    pub rho: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonSpec {
    pub arcs: Vec<ArcSpec>,
    #[serde(default)]
    pub knots: Vec<KnotSpec>,
    #[serde(default)]
    pub clamped: Vec<ClampedEnd>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resample_n: Option<usize>,
}

impl SkeletonSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<Skeleton> {
        let n = self.resample_n.unwrap_or(DEFAULT_RESAMPLE);
        let arcs = self
            .arcs
            .iter()
            .enumerate()
            .map(|(i, a)| ArcGeometry::build(i, &a.curve, a.frame_override, n))
            .collect::<Result<Vec<_>>>()?;
        let mut knots = Vec::with_capacity(self.knots.len());
        for (id, k) in self.knots.iter().enumerate() {
            let incidences: Vec<Incidence> = k
                .incidences
                .iter()
                .map(|&(arc, s)| Incidence { arc, s })
                .collect();
            let position = match (k.position, incidences.first()) {
                (Some(p), _) => v3(p),
                (None, Some(first)) => arcs
                    .get(first.arc)
                    .ok_or_else(|| Error::InvalidInput(format!("knot {id}: missing arc {}", first.arc)))?
                    .position(first.s)?,
                (None, None) => {
                    return Err(Error::InvalidInput(format!("knot {id} has no incidences")))
                }
            };
            knots.push(Knot {
                id,
                position,
                incidences,
                rho: k.rho,
            });
        }
        Skeleton::new(arcs, knots, self.clamped.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_curve_kinds() {
        let text = r#"{
          "arcs": [
            {"type": "segment", "start": [0,0,0], "end": [1,0,0], "frame_override": [0,1,0]},
            {"type": "circular_arc", "center": [1,1,0], "radius": 1, "start_angle": -1.5707963267948966, "end_angle": 0},
            {"type": "helix", "radius": 1, "pitch": 0.2, "t0": 0, "t1": 3},
            {"type": "spline", "points": [[0,0,0],[1,2,0],[2,0,1],[3,1,0]], "frame_override": [0,0,1]}
          ],
          "knots": [{"incidences": [[0, 1.0], [1, 0.0]]}],
          "clamped": [{"arc": 0, "end": "start"}]
        }"#;
        let spec = SkeletonSpec::from_json(text).unwrap();
        assert_eq!(spec.arcs.len(), 4);
        let round: SkeletonSpec =
            SkeletonSpec::from_json(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(round, spec);
        let sk = spec.build().unwrap();
        assert!((sk.knots[0].position - nalgebra::Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-14);
        assert_eq!(sk.knots[0].rho, 1.0);
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(
            SkeletonSpec::from_json("{\"arcs\": [{\"type\": \"bogus\"}]}"),
            Err(Error::Parse(_))
        ));
    }
}
