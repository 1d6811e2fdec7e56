use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DenseModel, GaussConv1DModel, IsingKac2DModel, Link, NormConstants, RateModel};
use crate::error::{Error, Result};
use crate::fastsum::{DenseMatrix, Workspace};
use crate::scalar::Scalar;

fn default_death_rate() -> f64 {
    1.0
}

/// Declarative model description, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
#[allow(clippy::large_enum_variant)]
pub enum ModelConfig {
    #[serde(rename = "gauss-conv-1d")]
    GaussConv1D {
        n: usize,
        sigma: f64,
        #[serde(default = "default_death_rate")]
        death_rate: f64,
        #[serde(default)]
        periodic: bool,
    },
    #[serde(rename = "ising-kac-2d")]
    IsingKac2D {
        side: usize,
        beta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a_scale: Option<f64>,
        #[serde(default)]
        periodic: bool,
    },
    #[serde(rename = "dense")]
    Dense {
        s_matrix_file: PathBuf,
        link_up: String,
        link_down: String,
        #[serde(default)]
        params: DenseParams,
    },
}

/// Per-direction link parameters of a dense model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseParams {
    #[serde(default)]
    pub up: LinkParams,
    #[serde(default)]
    pub down: LinkParams,
}

/// Parameters of a named link; fields irrelevant to the link are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkParams {
    pub scale: Option<f64>,
    pub offset: Option<f64>,
    pub floor: Option<f64>,
    pub gain: Option<f64>,
    pub field: Option<f64>,
    pub rate: Option<f64>,
}

impl LinkParams {
    /// Builds the link `name`; `sign` orients `tanh-ising` (+1 up, −1 down).
    pub fn build<T: Scalar>(&self, name: &str, sign: f64) -> Result<Link<T>> {
        let link = match name {
            "linear-with-floor" => Link::LinearWithFloor {
                scale: T::lit(self.scale.unwrap_or(1.0)),
                offset: T::lit(self.offset.unwrap_or(0.0)),
                floor: T::lit(self.floor.unwrap_or(0.0)),
            },
            "tanh-ising" => Link::TanhIsing {
                sign: T::lit(sign),
                gain: T::lit(self.gain.unwrap_or(1.0)),
                field: T::lit(self.field.unwrap_or(0.0)),
            },
            "constant" => Link::Constant(T::lit(
                self.rate
                    .ok_or_else(|| Error::config("constant link requires params.rate"))?,
            )),
            other => {
                return Err(Error::config(format!(
                    "unsupported link function {other:?} (expected linear-with-floor, tanh-ising or constant)"
                )))
            }
        };
        link.validate()?;
        Ok(link)
    }
}

impl ModelConfig {
    /// Constructs the model. Relative weight-file paths resolve against
    /// `base_dir`.
    pub fn build<T: Scalar>(&self, base_dir: &Path) -> Result<AnyModel<T>> {
        match self {
            ModelConfig::GaussConv1D {
                n,
                sigma,
                death_rate,
                periodic,
            } => Ok(AnyModel::GaussConv1D(GaussConv1DModel::with_boundary(
                *n,
                T::lit(*sigma),
                T::lit(*death_rate),
                *periodic,
            )?)),
            ModelConfig::IsingKac2D {
                side,
                beta,
                a,
                a_scale,
                periodic,
            } => {
                let a = match (a, a_scale) {
                    (Some(a), None) => *a,
                    (None, Some(s)) => *s / (side * side) as f64,
                    (Some(_), Some(_)) => {
                        return Err(Error::config(
                            "ising-kac-2d: give either \"a\" or \"a_scale\", not both",
                        ))
                    }
                    (None, None) => return Err(Error::config("ising-kac-2d: missing field \"a\" (or \"a_scale\")")),
                };
                Ok(AnyModel::IsingKac2D(IsingKac2DModel::new(
                    *side,
                    T::lit(*beta),
                    T::lit(a),
                    *periodic,
                )?))
            }
            ModelConfig::Dense {
                s_matrix_file,
                link_up,
                link_down,
                params,
            } => {
                let path = if s_matrix_file.is_absolute() {
                    s_matrix_file.clone()
                } else {
                    base_dir.join(s_matrix_file)
                };
                let weights = read_weight_csv(&path)?;
                let up = params.up.build(link_up, 1.0)?;
                let down = params.down.build(link_down, -1.0)?;
                Ok(AnyModel::Dense(DenseModel::new(weights, up, down)?))
            }
        }
    }
}

/// Reads a square weight matrix, one row per line, comma or whitespace
/// separated. Blank lines and lines starting with `#` are skipped.
pub fn read_weight_csv<T: Scalar>(path: &Path) -> Result<DenseMatrix<T>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read weight file {}: {e}", path.display())))?;
    let mut data = Vec::new();
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for tok in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let v: f64 = tok.parse().map_err(|_| {
                Error::config(format!(
                    "{}:{}: cannot parse {tok:?} as a number",
                    path.display(),
                    lineno + 1
                ))
            })?;
            data.push(T::lit(v));
        }
        rows += 1;
    }
    if rows * rows != data.len() {
        return Err(Error::config(format!(
            "weight file {} is not square ({rows} rows, {} entries)",
            path.display(),
            data.len()
        )));
    }
    DenseMatrix::new(rows, data)
}

/// Any of the built-in models, selected at run time.
#[derive(Debug, Clone)]
pub enum AnyModel<T: Scalar> {
    GaussConv1D(GaussConv1DModel<T>),
    IsingKac2D(IsingKac2DModel<T>),
    Dense(DenseModel<T>),
}

macro_rules! each {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            AnyModel::GaussConv1D($m) => $e,
            AnyModel::IsingKac2D($m) => $e,
            AnyModel::Dense($m) => $e,
        }
    };
}

impl<T: Scalar> RateModel<T> for AnyModel<T> {
    fn size(&self) -> usize {
        each!(self, m => m.size())
    }
    fn shape(&self) -> [usize; 2] {
        each!(self, m => m.shape())
    }
    fn weights_apply(&self, x: &[T], out: &mut [T], ws: &mut Workspace<T>) {
        each!(self, m => m.weights_apply(x, out, ws))
    }
    fn potential_offset(&self) -> Option<&[T]> {
        each!(self, m => m.potential_offset())
    }
    fn weights_transpose_apply(&self, y: &[T], out: &mut [T], ws: &mut Workspace<T>) {
        each!(self, m => m.weights_transpose_apply(y, out, ws))
    }
    fn weight(&self, i: usize, j: usize) -> T {
        each!(self, m => m.weight(i, j))
    }
    fn update_potentials(&self, j: usize, dx: T, v: &mut [T]) {
        each!(self, m => m.update_potentials(j, dx, v))
    }
    #[inline]
    fn rates_at(&self, i: usize, v_i: T) -> (T, T) {
        each!(self, m => m.rates_at(i, v_i))
    }
    #[inline]
    fn rate_slopes_at(&self, i: usize, v_i: T) -> (T, T) {
        each!(self, m => m.rate_slopes_at(i, v_i))
    }
    fn norm_constants(&self) -> NormConstants<T> {
        each!(self, m => m.norm_constants())
    }
    fn is_state_independent(&self) -> bool {
        each!(self, m => m.is_state_independent())
    }
}
