//! Reductions of the metric bound to familiar uncertainty relations: a single
//! constant metric component, proper time and proper distance.

use super::{integrate_box, integrate_generator, GeneratorError, RegionSpec};
use crate::metric::{ComponentPerturbation, Point, UniformPerturbation, UniformTarget};
use crate::numerics::AxisRule;
use crate::stress::StressEnergyField;
use serde::{Deserialize, Serialize};

/// Bound for a single constant component g_{μ0ν0} = η_{μ0ν0} + θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentReduction {
    pub mu: usize,
    pub nu: usize,
    /// ⟨P⟩ from the generator.
    pub generator: f64,
    /// ∫_K dμ̊ T^{μ0ν0}.
    pub component_integral: f64,
    /// P / ∫T^{μ0ν0}: ½ on the diagonal, 1 off it.
    pub coupling: f64,
    /// Right-hand side of ⟨(δg)²⟩⟨(Δ∫T^{μ0ν0})²⟩ ≥ ħ²/(4·coupling²).
    pub product_bound: f64,
}

/// Evaluates the constant-component reduction on `region`.
pub fn component_reduction(
    field: &StressEnergyField,
    family: &ComponentPerturbation,
    region: &RegionSpec,
    hbar: f64,
) -> Result<ComponentReduction, GeneratorError> {
    let p = integrate_generator(field, family, region, &Default::default())?.p_total;
    let (mu, nu) = (family.mu, family.nu);
    let fine = region.refined();
    let q = integrate_box(&fine, |x: &Point| Ok([field.at(x)?[(mu, nu)]]))?[0];
    if q == 0.0 {
        return Err(GeneratorError::InvalidRegion(format!(
            "T^{{{mu}{nu}}} integrates to zero over the region; the coupling is undefined"
        )));
    }
    let coupling = p / q;
    Ok(ComponentReduction {
        mu,
        nu,
        generator: p,
        component_integral: q,
        coupling,
        product_bound: hbar * hbar / (4.0 * coupling * coupling),
    })
}

/// Bound for the proper time (lapse) or proper distance (shift) accumulated
/// under a spatially uniform perturbation with time profile a(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformReduction {
    pub target: UniformTarget,
    /// ⟨P⟩ from the generator.
    pub generator: f64,
    /// Conserved charge on the mid-time slice: H = ∫T^{00}d³x (lapse) or
    /// P_x = ∫T^{0x}d³x (shift).
    pub charge: f64,
    /// ∫a(t) dt over the region.
    pub profile_integral: f64,
    /// |dq/dθ| / ∫a dt for the observable q: ½ for proper time, 1 for
    /// proper distance.
    pub conversion: f64,
    /// P / (conversion · charge · ∫a dt); 1 when the charge is constant.
    pub coefficient: f64,
    pub charge_variance: f64,
    /// Bound on ⟨(δq)²⟩: ħ²/(4·coefficient²·⟨(ΔQ)²⟩).
    pub bound: f64,
    /// ħ²/(4⟨(ΔQ)²⟩).
    pub expected: f64,
}

impl UniformReduction {
    pub fn relative_error(&self) -> f64 {
        (self.bound - self.expected).abs() / self.expected
    }
}

/// Evaluates the proper-time or proper-distance reduction on `region`, with
/// the charge variance of the probe state supplied by the caller.
pub fn uniform_reduction(
    field: &StressEnergyField,
    family: &UniformPerturbation,
    region: &RegionSpec,
    charge_variance: f64,
    hbar: f64,
) -> Result<UniformReduction, GeneratorError> {
    if !(charge_variance > 0.0) {
        return Err(GeneratorError::InvalidRegion(format!(
            "charge variance must be positive, got {charge_variance}"
        )));
    }
    let p = integrate_generator(field, family, region, &Default::default())?.p_total;
    let fine = region.refined();
    let (component, conversion) = match family.target {
        UniformTarget::Lapse => ((0, 0), 0.5),
        UniformTarget::Shift => ((0, 1), 1.0),
    };
    let t_mid = 0.5 * (fine.lo[0] + fine.hi[0]);
    let slice = RegionSpec {
        lo: [0.0, fine.lo[1], fine.lo[2], fine.lo[3]],
        hi: [1.0, fine.hi[1], fine.hi[2], fine.hi[3]],
        rule: fine.rule,
        resolution: [fine.rule.min_resolution(), fine.resolution[1], fine.resolution[2], fine.resolution[3]],
    };
    let charge = integrate_box(&slice, |y: &Point| {
        let x = [t_mid, y[1], y[2], y[3]];
        Ok([field.at(&x)?[component]])
    })?[0];
    let time_axis = AxisRule::new(fine.lo[0], fine.hi[0], fine.resolution[0], fine.rule);
    let profile_integral = time_axis.integrate(|t| family.profile.at(t));
    let denom = conversion * charge * profile_integral;
    if denom == 0.0 {
        return Err(GeneratorError::InvalidRegion(
            "charge or ∫a dt vanishes; the reduction is undefined".into(),
        ));
    }
    let coefficient = p / denom;
    Ok(UniformReduction {
        target: family.target,
        generator: p,
        charge,
        profile_integral,
        conversion,
        coefficient,
        charge_variance,
        bound: hbar * hbar / (4.0 * coefficient * coefficient * charge_variance),
        expected: hbar * hbar / (4.0 * charge_variance),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid4;
    use crate::metric::TimeProfile;
    use crate::numerics::Rule;
    use crate::stress::{Dust, MaxwellSource, PlaneWaveField};
    use std::sync::Arc;

    fn region() -> RegionSpec {
        RegionSpec::new([0.0, -1.0, -1.0, -1.0], [2.0, 1.0, 1.0, 1.0], Rule::Trapezoid, [9; 4]).unwrap()
    }

    fn field(src: Arc<dyn crate::stress::TensorSource>) -> StressEnergyField {
        StressEnergyField::new(src, Grid4::new([-5.0; 4], [5.0; 4], [2; 4]).unwrap())
    }

    #[test]
    fn constant_lapse_with_dust_gives_energy_times_duration() {
        let rho = 1.7;
        let f = field(Arc::new(Dust { density: rho }));
        let fam = UniformPerturbation { target: UniformTarget::Lapse, profile: TimeProfile::Constant { value: 0.4 } };
        let r = uniform_reduction(&f, &fam, &region(), 2.0, 1.0).unwrap();
        let h = rho * 8.0;
        assert!((r.generator - 0.5 * h * 0.4 * 2.0).abs() < 1e-12);
        assert!((r.coefficient - 1.0).abs() < 1e-12);
        assert!(r.relative_error() < 1e-12);
    }

    #[test]
    fn harmonic_lapse_still_reduces_exactly() {
        let f = field(Arc::new(MaxwellSource::flat(Arc::new(PlaneWaveField::uniform(0.9)))));
        let fam = UniformPerturbation {
            target: UniformTarget::Lapse,
            profile: TimeProfile::Harmonic { mean: 1.0, amplitude: 0.5, omega: 3.0 },
        };
        let r = uniform_reduction(&f, &fam, &region(), 1.0, 1.0).unwrap();
        assert!((r.coefficient - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shift_uses_momentum() {
        let f = field(Arc::new(MaxwellSource::flat(Arc::new(PlaneWaveField::uniform(0.9)))));
        let fam = UniformPerturbation { target: UniformTarget::Shift, profile: TimeProfile::Constant { value: 1.0 } };
        let r = uniform_reduction(&f, &fam, &region(), 1.0, 1.0).unwrap();
        let px = 0.81 / (4.0 * std::f64::consts::PI) * 8.0;
        assert!((r.charge - px).abs() < 1e-12);
        assert!((r.coefficient - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_component_gives_hbar_squared() {
        let f = field(Arc::new(MaxwellSource::flat(Arc::new(PlaneWaveField::uniform(0.9)))));
        let r = component_reduction(&f, &ComponentPerturbation::new(1, 1).unwrap(), &region(), 1.0).unwrap();
        assert!((r.coupling - 0.5).abs() < 1e-12);
        assert!((r.product_bound - 1.0).abs() < 1e-12);
        let off = component_reduction(&f, &ComponentPerturbation::new(0, 1).unwrap(), &region(), 1.0).unwrap();
        assert!((off.coupling - 1.0).abs() < 1e-12);
        assert!((off.product_bound - 0.25).abs() < 1e-12);
    }
}
