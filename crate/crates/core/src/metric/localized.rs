use super::{BumpProfile, Chart, ChartDomain, MetricError, MetricFamily, Point, Tensor2};
use std::sync::Arc;

/// A global family made compact by a bump function:
/// g(θ, x) = base.g(θ0 + (θ − θ0)·χ(x), x).
#[derive(Debug, Clone)]
pub struct LocalizedFamily {
    base: Arc<dyn MetricFamily>,
    bump: BumpProfile,
    name: String,
    domain: ChartDomain,
}

impl LocalizedFamily {
    pub fn base(&self) -> &Arc<dyn MetricFamily> {
        &self.base
    }

    pub fn profile(&self) -> &BumpProfile {
        &self.bump
    }
}

/// Localizes `base` with `bump`. Fails if the support leaves the chart.
pub fn localize(base: Arc<dyn MetricFamily>, bump: BumpProfile) -> Result<LocalizedFamily, MetricError> {
    let domain = base.domain();
    for (axis, w) in bump.axes.iter().enumerate() {
        let Some(w) = w else { continue };
        let b = domain.axes[axis];
        // χ > 0 only on the open support interval, which must lie in the chart
        if !(w.support.0 >= b.lo && w.support.1 <= b.hi) {
            return Err(MetricError::SupportOutsideChart {
                family: base.name().to_string(),
                axis,
                lo: w.support.0,
                hi: w.support.1,
            });
        }
    }
    let name = format!("localized-{}", base.name());
    Ok(LocalizedFamily { base, bump, name, domain })
}

impl MetricFamily for LocalizedFamily {
    fn name(&self) -> &str {
        &self.name
    }
    fn chart(&self) -> Chart {
        self.base.chart()
    }
    fn theta0(&self) -> f64 {
        self.base.theta0()
    }
    fn domain(&self) -> ChartDomain {
        self.domain
    }
    fn components(&self, theta: f64, x: &Point) -> Tensor2 {
        let theta0 = self.base.theta0();
        if theta == theta0 {
            return self.base.components(theta0, x);
        }
        let chi = self.bump.value(x);
        self.base.components(theta0 + (theta - theta0) * chi, x)
    }
    fn analytic_derivative(&self, x: &Point) -> Option<Tensor2> {
        let chi = self.bump.value(x);
        if chi == 0.0 {
            return Some(Tensor2::zeros());
        }
        self.base.analytic_derivative(x).map(|d| d * chi)
    }
    fn bump(&self) -> Option<&BumpProfile> {
        Some(&self.bump)
    }
    fn fd_step(&self) -> f64 {
        self.base.fd_step()
    }
}
