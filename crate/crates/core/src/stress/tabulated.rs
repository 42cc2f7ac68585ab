use super::{StressError, TensorSource};
use crate::grid::{unpack_symmetric, Grid4, GridFile, GridKind};
use crate::metric::{Chart, Point, Tensor2, DIM};

/// T^{μν} sampled on a grid, multilinearly interpolated, zero outside.
#[derive(Debug, Clone)]
pub struct TabulatedTensor {
    grid: Grid4,
    chart: Chart,
    values: Vec<[f64; 10]>,
}

impl TabulatedTensor {
    pub fn new(file: &GridFile) -> Result<Self, StressError> {
        if file.kind != GridKind::StressEnergy {
            return Err(StressError::WrongKind(file.kind));
        }
        let values = file.values.iter().map(|r| std::array::from_fn(|c| r[c])).collect();
        Ok(Self { grid: file.grid, chart: file.chart, values })
    }

    pub fn grid(&self) -> Grid4 {
        self.grid
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }
}

impl TensorSource for TabulatedTensor {
    fn tensor(&self, x: &Point) -> Result<Tensor2, StressError> {
        Ok(self.grid.interpolate(&self.values, x).map_or_else(Tensor2::zeros, |v| unpack_symmetric(&v)))
    }
    fn label(&self) -> String {
        format!("tabulated ({} chart, {} nodes)", self.chart, self.grid.len())
    }
    fn native_spacing(&self) -> Option<[f64; DIM]> {
        Some(self.grid.spacing())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stress::{MaxwellSource, PlaneWaveField, StressEnergyField};
    use std::sync::Arc;

    #[test]
    fn tabulate_then_reload_reproduces_nodes() {
        let grid = Grid4::new([0.0, -1.0, -1.0, -1.0], [1.0; 4], [3, 4, 3, 3]).unwrap();
        let src = MaxwellSource::flat(Arc::new(PlaneWaveField::monochromatic(0.7, 2.0)));
        let f = StressEnergyField::new(Arc::new(src), grid);
        let file = f.tabulate(Chart::Cartesian).unwrap();
        let reread = GridFile::parse(&file.to_text()).unwrap();
        let g = StressEnergyField::from_grid_file(&reread).unwrap();
        for k in [0, 7, grid.len() - 1] {
            let x = grid.node(k);
            assert!((f.at(&x).unwrap() - g.at(&x).unwrap()).abs().max() < 1e-15);
        }
        assert_eq!(g.at(&[5.0, 0.0, 0.0, 0.0]).unwrap(), Tensor2::zeros());
    }
}
