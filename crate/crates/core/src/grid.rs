//! Rectilinear 4D sampling grids and the tabulated grid file format.
//!
//! # File format (`metric-crb grid v1`)
//!
//! A UTF-8 text file. Header lines are `key = value`; `#` starts a comment.
//! The header ends with a line containing only `data`, followed by one row
//! per grid node with whitespace-separated numbers.
//!
//! ```text
//! # metric-crb grid v1
//! kind = stress-energy            # or: metric
//! chart = cartesian               # chart name, see Chart
//! units = geometric               # G = c = 1, Gaussian electromagnetic units
//! theta0 = 0                      # metric grids only
//! lo = 0 -1 -1 -1
//! hi = 1 1 1 1
//! n = 3 5 5 5
//! columns = x0 x1 x2 x3 T00 T01 T02 T03 T11 T12 T13 T22 T23 T33
//! data
//! 0.0 -1.0 -1.0 -1.0 0.0 0.0 ...
//! ```
//!
//! Rows are ordered with axis 0 varying slowest. A stress-energy grid carries
//! the 10 independent contravariant components T^{μν} (μ ≤ ν). A metric grid
//! carries the 10 covariant g_{μν} at θ0 followed by the 10 ∂g_{μν}/∂θ.

use crate::metric::{Chart, Point, Tensor2, DIM};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

pub const FORMAT_MAGIC: &str = "# metric-crb grid v1";

/// Index pairs (μ, ν), μ ≤ ν, in file column order.
pub const SYM_PAIRS: [(usize, usize); 10] =
    [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error("grid needs at least 2 nodes and lo < hi on every axis (axis {axis})")]
    Degenerate { axis: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing header key `{0}`")]
    MissingKey(&'static str),
    #[error("expected {expected} data rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("unsupported grid kind `{0}`")]
    Kind(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Inclusive node grid on a coordinate box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid4 {
    pub lo: Point,
    pub hi: Point,
    pub n: [usize; DIM],
}

impl Grid4 {
    pub fn new(lo: Point, hi: Point, n: [usize; DIM]) -> Result<Self, GridError> {
        for axis in 0..DIM {
            if n[axis] < 2 || !(lo[axis] < hi[axis]) || !lo[axis].is_finite() || !hi[axis].is_finite() {
                return Err(GridError::Degenerate { axis });
            }
        }
        Ok(Self { lo, hi, n })
    }

    pub fn spacing(&self) -> [f64; DIM] {
        std::array::from_fn(|i| (self.hi[i] - self.lo[i]) / (self.n[i] - 1) as f64)
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i == self.n[axis] - 1 {
            self.hi[axis]
        } else {
            self.lo[axis] + self.spacing()[axis] * i as f64
        }
    }

    /// Multi-index of flat index `k` (axis 0 slowest).
    pub fn unflatten(&self, mut k: usize) -> [usize; DIM] {
        let mut idx = [0; DIM];
        for axis in (0..DIM).rev() {
            idx[axis] = k % self.n[axis];
            k /= self.n[axis];
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize; DIM]) -> usize {
        idx.iter().zip(&self.n).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn node(&self, k: usize) -> Point {
        let idx = self.unflatten(k);
        std::array::from_fn(|a| self.coord(a, idx[a]))
    }

    pub fn contains(&self, x: &Point) -> bool {
        (0..DIM).all(|a| x[a] >= self.lo[a] && x[a] <= self.hi[a])
    }

    /// Cell indices and fractional offsets for multilinear interpolation.
    fn locate(&self, x: &Point) -> Option<([usize; DIM], [f64; DIM])> {
        if !self.contains(x) {
            return None;
        }
        let h = self.spacing();
        let mut cell = [0; DIM];
        let mut frac = [0.0; DIM];
        for a in 0..DIM {
            let s = (x[a] - self.lo[a]) / h[a];
            let i = (s.floor() as usize).min(self.n[a] - 2);
            cell[a] = i;
            frac[a] = (s - i as f64).clamp(0.0, 1.0);
        }
        Some((cell, frac))
    }

    /// Multilinear interpolation of per-node records; `None` outside the grid.
    pub fn interpolate<const K: usize>(&self, values: &[[f64; K]], x: &Point) -> Option<[f64; K]> {
        let (cell, frac) = self.locate(x)?;
        let mut out = [0.0; K];
        for corner in 0..(1 << DIM) {
            let mut w = 1.0;
            let mut idx = cell;
            for a in 0..DIM {
                if corner & (1 << a) != 0 {
                    idx[a] += 1;
                    w *= frac[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            if w == 0.0 {
                continue;
            }
            let v = &values[self.flatten(&idx)];
            for c in 0..K {
                out[c] += w * v[c];
            }
        }
        Some(out)
    }
}

/// Packs the symmetric components of a tensor in file column order.
pub fn pack_symmetric(t: &Tensor2) -> [f64; 10] {
    std::array::from_fn(|c| {
        let (i, j) = SYM_PAIRS[c];
        t[(i, j)]
    })
}

pub fn unpack_symmetric(v: &[f64]) -> Tensor2 {
    let mut t = Tensor2::zeros();
    for (c, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        t[(i, j)] = v[c];
        t[(j, i)] = v[c];
    }
    t
}

/// What a grid file tabulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    StressEnergy,
    Metric,
}

impl GridKind {
    fn name(self) -> &'static str {
        match self {
            GridKind::StressEnergy => "stress-energy",
            GridKind::Metric => "metric",
        }
    }

    fn value_columns(self) -> usize {
        match self {
            GridKind::StressEnergy => 10,
            GridKind::Metric => 20,
        }
    }

    fn column_names(self) -> Vec<String> {
        let mut cols: Vec<String> = (0..DIM).map(|a| format!("x{a}")).collect();
        fn sym(p: &'static str) -> impl Iterator<Item = String> {
            SYM_PAIRS.iter().map(move |(i, j)| format!("{p}{i}{j}"))
        }
        match self {
            GridKind::StressEnergy => cols.extend(sym("T")),
            GridKind::Metric => {
                cols.extend(sym("g"));
                cols.extend(sym("dg"));
            }
        }
        cols
    }
}

/// Parsed contents of a grid file.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub kind: GridKind,
    pub chart: Chart,
    pub theta0: f64,
    pub grid: Grid4,
    /// One row of `kind.value_columns()` numbers per node.
    pub values: Vec<Vec<f64>>,
}

fn parse_chart(s: &str) -> Option<Chart> {
    [
        Chart::Cartesian,
        Chart::Spherical,
        Chart::Schwarzschild,
        Chart::Isotropic,
        Chart::ConformalFlrw,
        Chart::ConformalDeSitter,
    ]
    .into_iter()
    .find(|c| c.name() == s)
}

fn parse_floats(line: usize, s: &str) -> Result<Vec<f64>, GridError> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| GridError::Parse { line, msg: format!("bad number `{t}`: {e}") })
        })
        .collect()
}

fn four<T: Copy + Default>(line: usize, v: Vec<T>, key: &str) -> Result<[T; DIM], GridError> {
    if v.len() != DIM {
        return Err(GridError::Parse { line, msg: format!("`{key}` needs {DIM} values, got {}", v.len()) });
    }
    Ok(std::array::from_fn(|i| v[i]))
}

impl GridFile {
    pub fn parse(text: &str) -> Result<Self, GridError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut kind = None;
        let mut chart = None;
        let mut theta0 = 0.0;
        let (mut lo, mut hi, mut n) = (None, None, None);
        let mut saw_data = false;
        for (ln, raw) in lines.by_ref() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line == "data" {
                saw_data = true;
                break;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| GridError::Parse { line: ln, msg: format!("expected `key = value`, got `{line}`") })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "kind" => {
                    kind = Some(match value {
                        "stress-energy" => GridKind::StressEnergy,
                        "metric" => GridKind::Metric,
                        other => return Err(GridError::Kind(other.to_string())),
                    })
                }
                "chart" => {
                    chart = Some(parse_chart(value).ok_or_else(|| GridError::Parse {
                        line: ln,
                        msg: format!("unknown chart `{value}`"),
                    })?)
                }
                "theta0" => {
                    theta0 = value
                        .parse()
                        .map_err(|e| GridError::Parse { line: ln, msg: format!("theta0: {e}") })?
                }
                "lo" => lo = Some(four(ln, parse_floats(ln, value)?, "lo")?),
                "hi" => hi = Some(four(ln, parse_floats(ln, value)?, "hi")?),
                "n" => {
                    let v = parse_floats(ln, value)?;
                    let v: Vec<usize> = v.iter().map(|x| *x as usize).collect();
                    n = Some(four(ln, v, "n")?);
                }
                "units" | "columns" => {}
                other => {
                    return Err(GridError::Parse { line: ln, msg: format!("unknown header key `{other}`") })
                }
            }
        }
        if !saw_data {
            return Err(GridError::MissingKey("data"));
        }
        let kind = kind.ok_or(GridError::MissingKey("kind"))?;
        let chart = chart.ok_or(GridError::MissingKey("chart"))?;
        let grid = Grid4::new(
            lo.ok_or(GridError::MissingKey("lo"))?,
            hi.ok_or(GridError::MissingKey("hi"))?,
            n.ok_or(GridError::MissingKey("n"))?,
        )?;
        let h = grid.spacing();
        let width = DIM + kind.value_columns();
        let mut values = Vec::with_capacity(grid.len());
        for (ln, raw) in lines {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = parse_floats(ln, line)?;
            if row.len() != width {
                return Err(GridError::Parse { line: ln, msg: format!("expected {width} columns, got {}", row.len()) });
            }
            let k = values.len();
            if k >= grid.len() {
                return Err(GridError::RowCount { expected: grid.len(), found: k + 1 });
            }
            let node = grid.node(k);
            for a in 0..DIM {
                if (row[a] - node[a]).abs() > 1e-9 * h[a].max(1.0) {
                    return Err(GridError::Parse {
                        line: ln,
                        msg: format!("coordinate x{a} = {} does not match grid node {}", row[a], node[a]),
                    });
                }
            }
            values.push(row[DIM..].to_vec());
        }
        if values.len() != grid.len() {
            return Err(GridError::RowCount { expected: grid.len(), found: values.len() });
        }
        Ok(Self { kind, chart, theta0, grid, values })
    }

    pub fn read(path: &Path) -> Result<Self, GridError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Serializes with 17 significant digits per number.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ");
        writeln!(s, "{FORMAT_MAGIC}").unwrap();
        writeln!(s, "kind = {}", self.kind.name()).unwrap();
        writeln!(s, "chart = {}", self.chart.name()).unwrap();
        writeln!(s, "units = geometric").unwrap();
        if self.kind == GridKind::Metric {
            writeln!(s, "theta0 = {:.16e}", self.theta0).unwrap();
        }
        writeln!(s, "lo = {}", join(&self.grid.lo)).unwrap();
        writeln!(s, "hi = {}", join(&self.grid.hi)).unwrap();
        writeln!(s, "n = {}", self.grid.n.map(|v| v.to_string()).join(" ")).unwrap();
        writeln!(s, "columns = {}", self.kind.column_names().join(" ")).unwrap();
        writeln!(s, "data").unwrap();
        for (k, row) in self.values.iter().enumerate() {
            let node = self.grid.node(k);
            writeln!(s, "{} {}", join(&node), join(row)).unwrap();
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), GridError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
