use super::{AxisBound, Chart, ChartDomain, MetricError, MetricFamily, Point, Tensor2};
use crate::grid::{unpack_symmetric, Grid4, GridFile, GridKind};

/// Metric family from a grid of g_{μν}(θ0) and ∂g_{μν}/∂θ samples,
/// linear in θ: g(θ) = g(θ0) + (θ − θ0)·∂g/∂θ. Valid on the grid box.
#[derive(Debug, Clone)]
pub struct TabulatedFamily {
    name: String,
    chart: Chart,
    theta0: f64,
    grid: Grid4,
    values: Vec<[f64; 20]>,
}

impl TabulatedFamily {
    pub fn new(name: impl Into<String>, file: &GridFile) -> Result<Self, MetricError> {
        if file.kind != GridKind::Metric {
            return Err(MetricError::InvalidParameter("grid file does not hold metric data".into()));
        }
        let values = file.values.iter().map(|r| std::array::from_fn(|c| r[c])).collect();
        Ok(Self { name: name.into(), chart: file.chart, theta0: file.theta0, grid: file.grid, values })
    }

    fn sample(&self, x: &Point) -> [f64; 20] {
        self.grid.interpolate(&self.values, x).unwrap_or([f64::NAN; 20])
    }
}

impl MetricFamily for TabulatedFamily {
    fn name(&self) -> &str {
        &self.name
    }
    fn chart(&self) -> Chart {
        self.chart
    }
    fn theta0(&self) -> f64 {
        self.theta0
    }
    fn domain(&self) -> ChartDomain {
        ChartDomain { axes: std::array::from_fn(|a| AxisBound::closed(self.grid.lo[a], self.grid.hi[a])) }
    }
    fn components(&self, theta: f64, x: &Point) -> Tensor2 {
        let v = self.sample(x);
        unpack_symmetric(&v[..10]) + unpack_symmetric(&v[10..]) * (theta - self.theta0)
    }
    fn analytic_derivative(&self, x: &Point) -> Option<Tensor2> {
        Some(unpack_symmetric(&self.sample(x)[10..]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::pack_symmetric;
    use crate::metric::{evaluate_metric, finite_difference_derivative, GwPlaneWave, MetricFamily};

    #[test]
    fn tabulated_gw_matches_analytic_family() {
        let gw = GwPlaneWave::default();
        let grid = Grid4::new([-1.0; 4], [1.0; 4], [3; 4]).unwrap();
        let values = (0..grid.len())
            .map(|k| {
                let x = grid.node(k);
                let mut row = pack_symmetric(&gw.components(0.0, &x)).to_vec();
                row.extend(pack_symmetric(&gw.analytic_derivative(&x).unwrap()));
                row
            })
            .collect();
        let file = GridFile { kind: GridKind::Metric, chart: Chart::Cartesian, theta0: 0.0, grid, values };
        let tab = TabulatedFamily::new("tab-gw", &GridFile::parse(&file.to_text()).unwrap()).unwrap();
        let x = [0.2, -0.4, 0.9, 0.1];
        assert_eq!(evaluate_metric(&tab, 0.3, &x).unwrap(), gw.components(0.3, &x));
        let fd = finite_difference_derivative(&tab, &x, 1e-6).unwrap();
        assert!((fd - tab.analytic_derivative(&x).unwrap()).abs().max() < 1e-8);
        assert!(evaluate_metric(&tab, 0.0, &[2.0, 0.0, 0.0, 0.0]).is_err());
    }
}
