//! Scene files: geometric input in JSON with one-based indices.

use std::fmt;
use std::path::Path;

use blockrank::geometry::{
    CurveSet, Incidence, Line, LineSet, PointList, SubspaceArrangement, Triples, Vector, C64,
};
use blockrank::Error as CoreError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// Malformed JSON or a value of the wrong shape; `field` is the JSON path.
    #[error("parse error at line {line}, column {column}, field `{field}`: {message}")]
    Parse {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("invalid scene: {0}")]
    Invalid(String),
}

impl From<CoreError> for SceneError {
    fn from(e: CoreError) -> Self {
        SceneError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SceneKind {
    Points,
    Subspaces,
    Lines,
    Curves,
}

impl fmt::Display for SceneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SceneKind::Points => "points",
            SceneKind::Subspaces => "subspaces",
            SceneKind::Lines => "lines",
            SceneKind::Curves => "curves",
        };
        f.write_str(s)
    }
}

/// One-based incidence record as stored on disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidenceEntry {
    pub i: usize,
    pub j: usize,
    pub t: C64,
    pub t_prime: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineEntry {
    pub base: Vec<C64>,
    pub direction: Vec<C64>,
}

/// Raw file layout. `data` is decoded according to `kind`:
/// points `[[z; d]; n]`, subspaces `[[[z; d]; ell]; n]` (basis vectors),
/// lines `[{"base", "direction"}]`, curves `[[[z; d]; r + 1]; n]` (coefficients by degree).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub kind: SceneKind,
    pub d: usize,
    pub data: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triples: Option<Vec<[usize; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incidences: Option<Vec<IncidenceEntry>>,
}

/// Validated scene, zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Scene {
    Points {
        points: PointList,
        triples: Option<Triples>,
    },
    Subspaces(SubspaceArrangement),
    Lines(LineSet),
    Curves {
        curves: CurveSet,
        incidences: Option<Vec<Incidence>>,
    },
}

fn parse_error(e: serde_path_to_error::Error<serde_json::Error>, prefix: &str) -> SceneError {
    let path = e.path().to_string();
    let inner = e.into_inner();
    let field = match (prefix, path.as_str()) {
        ("", p) => p.to_string(),
        (pre, ".") => pre.to_string(),
        (pre, p) if p.starts_with('[') => format!("{pre}{p}"),
        (pre, p) => format!("{pre}.{p}"),
    };
    SceneError::Parse {
        line: inner.line(),
        column: inner.column(),
        field,
        message: inner.to_string(),
    }
}

/// Decodes JSON text, reporting the JSON path of the first offending field.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, SceneError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| parse_error(e, ""))
}

fn decode<T: DeserializeOwned>(value: &Value, prefix: &str) -> Result<T, SceneError> {
    serde_path_to_error::deserialize(value).map_err(|e| parse_error(e, prefix))
}

fn vector(zs: &[C64], d: usize, what: &str) -> Result<Vector, SceneError> {
    if zs.len() != d {
        return Err(SceneError::Invalid(format!("{what} has {} coordinates, expected d = {d}", zs.len())));
    }
    Ok(Vector::from_column_slice(zs))
}

fn zero_based(idx: usize, n: usize, what: &str) -> Result<usize, SceneError> {
    if idx == 0 || idx > n {
        return Err(SceneError::Invalid(format!("{what}: index {idx} outside 1..={n}")));
    }
    Ok(idx - 1)
}

impl SceneFile {
    pub fn validate(&self) -> Result<Scene, SceneError> {
        let d = self.d;
        if d == 0 {
            return Err(SceneError::Invalid("d must be >= 1".into()));
        }
        if self.triples.is_some() && self.kind != SceneKind::Points {
            return Err(SceneError::Invalid(format!("`triples` only applies to points, not {}", self.kind)));
        }
        if self.incidences.is_some() && self.kind != SceneKind::Curves {
            return Err(SceneError::Invalid(format!("`incidences` only applies to curves, not {}", self.kind)));
        }
        match self.kind {
            SceneKind::Points => {
                let raw: Vec<Vec<C64>> = decode(&self.data, "data")?;
                let points = raw
                    .iter()
                    .enumerate()
                    .map(|(i, p)| vector(p, d, &format!("point {}", i + 1)))
                    .collect::<Result<Vec<_>, _>>()?;
                let n = points.len();
                let points = PointList::new(d, points)?;
                let triples = match &self.triples {
                    None => None,
                    Some(ts) => Some(
                        ts.iter()
                            .enumerate()
                            .map(|(row, t)| {
                                let what = format!("triple {}", row + 1);
                                let z = [
                                    zero_based(t[0], n, &what)?,
                                    zero_based(t[1], n, &what)?,
                                    zero_based(t[2], n, &what)?,
                                ];
                                if z[0] == z[1] || z[1] == z[2] || z[0] == z[2] {
                                    return Err(SceneError::Invalid(format!("{what} repeats a point")));
                                }
                                Ok(z)
                            })
                            .collect::<Result<Vec<_>, _>>()?,
                    ),
                };
                Ok(Scene::Points { points, triples })
            }
            SceneKind::Subspaces => {
                let raw: Vec<Vec<Vec<C64>>> = decode(&self.data, "data")?;
                let ell = raw.first().map_or(0, |b| b.len());
                if ell == 0 {
                    return Err(SceneError::Invalid("subspaces need at least one basis vector".into()));
                }
                let mut bases = Vec::with_capacity(raw.len());
                for (i, basis) in raw.iter().enumerate() {
                    if basis.len() != ell {
                        return Err(SceneError::Invalid(format!(
                            "subspace {} has {} basis vectors, expected {ell}",
                            i + 1,
                            basis.len()
                        )));
                    }
                    let cols = basis
                        .iter()
                        .map(|v| vector(v, d, &format!("subspace {} basis vector", i + 1)))
                        .collect::<Result<Vec<_>, _>>()?;
                    bases.push(blockrank::geometry::Mat::from_columns(&cols));
                }
                Ok(Scene::Subspaces(SubspaceArrangement::new(d, ell, bases)?))
            }
            SceneKind::Lines => {
                let raw: Vec<LineEntry> = decode(&self.data, "data")?;
                let lines = raw
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        Ok(Line {
                            base: vector(&l.base, d, &format!("line {} base", i + 1))?,
                            direction: vector(&l.direction, d, &format!("line {} direction", i + 1))?,
                        })
                    })
                    .collect::<Result<Vec<_>, SceneError>>()?;
                Ok(Scene::Lines(LineSet::new(d, lines)?))
            }
            SceneKind::Curves => {
                let raw: Vec<Vec<Vec<C64>>> = decode(&self.data, "data")?;
                let terms = raw.first().map_or(0, |c| c.len());
                if terms < 2 {
                    return Err(SceneError::Invalid("curves need degree >= 1".into()));
                }
                let mut curves = Vec::with_capacity(raw.len());
                for (i, c) in raw.iter().enumerate() {
                    if c.len() != terms {
                        return Err(SceneError::Invalid(format!(
                            "curve {} has {} coefficients, expected {terms} (common degree)",
                            i + 1,
                            c.len()
                        )));
                    }
                    curves.push(
                        c.iter()
                            .map(|v| vector(v, d, &format!("curve {} coefficient", i + 1)))
                            .collect::<Result<Vec<_>, _>>()?,
                    );
                }
                let n = curves.len();
                let curves = CurveSet::new(d, terms - 1, curves)?;
                let incidences = match &self.incidences {
                    None => None,
                    Some(list) => Some(
                        list.iter()
                            .enumerate()
                            .map(|(row, x)| {
                                let what = format!("incidence {}", row + 1);
                                Ok(Incidence {
                                    i: zero_based(x.i, n, &what)?,
                                    j: zero_based(x.j, n, &what)?,
                                    t: x.t,
                                    t_prime: x.t_prime,
                                    residual: 0.0,
                                })
                            })
                            .collect::<Result<Vec<_>, SceneError>>()?,
                    ),
                };
                Ok(Scene::Curves { curves, incidences })
            }
        }
    }
}

fn coords(v: &Vector) -> Value {
    serde_json::to_value(v.iter().copied().collect::<Vec<C64>>()).expect("complex vector")
}

impl Scene {
    pub fn kind(&self) -> SceneKind {
        match self {
            Scene::Points { .. } => SceneKind::Points,
            Scene::Subspaces(_) => SceneKind::Subspaces,
            Scene::Lines(_) => SceneKind::Lines,
            Scene::Curves { .. } => SceneKind::Curves,
        }
    }

    /// File form, back to one-based indices.
    pub fn to_file(&self) -> SceneFile {
        let one = |i: usize| i + 1;
        match self {
            Scene::Points { points, triples } => SceneFile {
                kind: SceneKind::Points,
                d: points.d,
                data: Value::Array(points.points.iter().map(coords).collect()),
                triples: triples
                    .as_ref()
                    .map(|ts| ts.iter().map(|t| t.map(one)).collect()),
                incidences: None,
            },
            Scene::Subspaces(w) => SceneFile {
                kind: SceneKind::Subspaces,
                d: w.d,
                data: Value::Array(
                    w.bases
                        .iter()
                        .map(|b| Value::Array(b.column_iter().map(|c| coords(&c.into_owned())).collect()))
                        .collect(),
                ),
                triples: None,
                incidences: None,
            },
            Scene::Lines(ls) => SceneFile {
                kind: SceneKind::Lines,
                d: ls.d,
                data: serde_json::to_value(
                    ls.lines
                        .iter()
                        .map(|l| LineEntry {
                            base: l.base.iter().copied().collect(),
                            direction: l.direction.iter().copied().collect(),
                        })
                        .collect::<Vec<_>>(),
                )
                .expect("line entries"),
                triples: None,
                incidences: None,
            },
            Scene::Curves { curves, incidences } => SceneFile {
                kind: SceneKind::Curves,
                d: curves.d,
                data: Value::Array(
                    curves
                        .curves
                        .iter()
                        .map(|c| Value::Array(c.iter().map(coords).collect()))
                        .collect(),
                ),
                triples: None,
                incidences: incidences.as_ref().map(|list| {
                    list.iter()
                        .map(|x| IncidenceEntry {
                            i: x.i + 1,
                            j: x.j + 1,
                            t: x.t,
                            t_prime: x.t_prime,
                        })
                        .collect()
                }),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scene serializes")
    }
}

pub fn parse_scene(text: &str) -> Result<Scene, SceneError> {
    parse_json::<SceneFile>(text)?.validate()
}

pub fn read_text(path: &Path) -> Result<String, SceneError> {
    std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_scene(path: &Path) -> Result<Scene, SceneError> {
    parse_scene(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_with_triples() {
        let text = r#"{"kind": "points", "d": 2,
            "data": [[[0,0],[0,0]], [[1,0],[0,0]], [[2,0],[0,0]]],
            "triples": [[1, 2, 3]]}"#;
        match parse_scene(text).unwrap() {
            Scene::Points { points, triples } => {
                assert_eq!(points.n(), 3);
                assert_eq!(triples.unwrap(), vec![[0, 1, 2]]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_number_scalar_names_field() {
        let text = r#"{"kind": "points", "d": 2, "data": [[[0,0], 1.5]]}"#;
        match parse_scene(text) {
            Err(SceneError::Parse { field, .. }) => assert_eq!(field, "data[0][1]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_curve_rejected() {
        let text = r#"{"kind": "curves", "d": 2, "data": [[[[1,0],[2,0]], [[0,0],[0,0]]]]}"#;
        let err = parse_scene(text).unwrap_err();
        assert!(err.to_string().contains("non constant polynomial"), "{err}");
    }

    #[test]
    fn zero_index_rejected() {
        let text = r#"{"kind": "points", "d": 2, "data": [[[0,0],[0,0]]], "triples": [[0, 1, 1]]}"#;
        assert!(matches!(parse_scene(text), Err(SceneError::Invalid(_))));
    }

    #[test]
    fn round_trip() {
        let text = r#"{"kind": "curves", "d": 2,
            "data": [[[[0,0],[0,0]], [[1,0],[0,0]]], [[[0,0],[1,0]], [[1,0],[-1,0]]]],
            "incidences": [{"i": 1, "j": 2, "t": [0.5, 0], "t_prime": [0.5, 0]}]}"#;
        let s = parse_scene(text).unwrap();
        assert_eq!(parse_scene(&s.to_json()).unwrap(), s);
    }
}
