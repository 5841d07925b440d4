use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{numeric, DerivativeKind, Jacobian, MomentumField, Singularity};
use crate::model::{ComplexVector, TolerancePolicy, UnitSystem, C64, I};

pub type ScalarFn = Arc<dyn Fn(&ComplexVector) -> C64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&ComplexVector) -> ComplexVector + Send + Sync>;
/// Second derivatives `h[i][k] = d^2 psi / dx_i dx_k`, packed in a [`Jacobian`].
pub type HessianFn = Arc<dyn Fn(&ComplexVector) -> Jacobian + Send + Sync>;

/// Field `p = -i hbar grad(psi) / psi` of a caller-supplied wavefunction.
///
/// The gradient is numeric unless supplied. Field derivatives are numeric
/// unless the Hessian is supplied too. Evaluation is restricted to the real
/// axis unless the caller declares `psi` holomorphic.
#[derive(Clone)]
pub struct WavefunctionField {
    dim: usize,
    psi: ScalarFn,
    gradient: Option<GradientFn>,
    hessian: Option<HessianFn>,
    nodes: Vec<Singularity>,
    hbar: f64,
    node_guard: f64,
    holomorphic: bool,
}

impl fmt::Debug for WavefunctionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WavefunctionField")
            .field("dim", &self.dim)
            .field("gradient", &self.gradient.is_some())
            .field("hessian", &self.hessian.is_some())
            .field("nodes", &self.nodes)
            .finish()
    }
}

impl WavefunctionField {
    pub fn new(dim: usize, psi: ScalarFn, units: UnitSystem) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("dimension {dim} not in 1..=3")));
        }
        units.validate()?;
        Ok(WavefunctionField {
            dim,
            psi,
            gradient: None,
            hessian: None,
            nodes: Vec::new(),
            hbar: units.hbar,
            node_guard: TolerancePolicy::default().node_guard,
            holomorphic: false,
        })
    }

    pub fn with_gradient(mut self, gradient: GradientFn) -> Self {
        self.gradient = Some(gradient);
        self
    }

    pub fn with_hessian(mut self, hessian: HessianFn) -> Self {
        self.hessian = Some(hessian);
        self
    }

    pub fn with_nodes(mut self, nodes: Vec<Singularity>) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn with_node_guard(mut self, guard: f64) -> Self {
        self.node_guard = guard;
        self
    }

    /// Allow evaluation at complex positions.
    pub fn holomorphic(mut self, yes: bool) -> Self {
        self.holomorphic = yes;
        self
    }

    fn psi_checked(&self, r: &ComplexVector) -> Result<C64> {
        let v = (self.psi)(r);
        if v.norm() == 0.0 || !v.is_finite() {
            return Err(Error::NodeEvaluation { axis: 0, node: r[0].re, distance: 0.0 });
        }
        Ok(v)
    }

    fn grad(&self, r: &ComplexVector) -> Result<ComplexVector> {
        match &self.gradient {
            Some(g) => Ok(g(r)),
            None => numeric::gradient_with(|x| Ok((self.psi)(x)), r, self.numeric_steps(r)),
        }
    }
}

/// Builds the momentum field of a 1D to 3D wavefunction with declared nodes.
pub fn field_from_wavefunction(
    dim: usize,
    psi: ScalarFn,
    gradient: Option<GradientFn>,
    nodes: Vec<Singularity>,
    units: UnitSystem,
) -> Result<WavefunctionField> {
    let mut field = WavefunctionField::new(dim, psi, units)?.with_nodes(nodes);
    if let Some(g) = gradient {
        field = field.with_gradient(g);
    }
    Ok(field)
}

impl MomentumField for WavefunctionField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn derivative_kind(&self) -> DerivativeKind {
        if self.hessian.is_some() && self.gradient.is_some() {
            DerivativeKind::ClosedForm
        } else {
            DerivativeKind::NumericCentralDifference
        }
    }

    fn singularities(&self) -> &[Singularity] {
        &self.nodes
    }

    fn node_guard(&self) -> f64 {
        self.node_guard
    }

    fn is_holomorphic(&self) -> bool {
        self.holomorphic
    }

    fn momentum_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        let psi = self.psi_checked(r)?;
        Ok(self.grad(r)? * (-I * self.hbar / psi))
    }

    fn jacobian_raw(&self, r: &ComplexVector) -> Result<Jacobian> {
        let (Some(h), Some(_)) = (&self.hessian, &self.gradient) else {
            let steps = self.numeric_steps(r);
            let steps = if self.gradient.is_some() { steps } else { steps.widened() };
            return numeric::jacobian_with(|x| self.momentum_raw(x), r, steps);
        };
        let psi = self.psi_checked(r)?;
        let g = self.grad(r)?;
        let hess = h(r);
        let mut j = Jacobian::zeros(self.dim);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let v = hess.get(i, k) / psi - g[i] * g[k] / (psi * psi);
                j.set(i, k, -I * self.hbar * v);
            }
        }
        Ok(j)
    }

    fn laplacian_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        if self.derivative_kind() == DerivativeKind::ClosedForm {
            // one numeric level on top of the analytic Jacobian
            let mut acc = ComplexVector::zeros(self.dim);
            for k in 0..self.dim {
                acc += numeric::partial_with(|x| Ok(self.jacobian_raw(x)?.column(k)), r, k, self.numeric_steps(r).first)?;
            }
            Ok(acc)
        } else {
            numeric::vector_laplacian_with(|x| self.momentum_raw(x), r, self.numeric_steps(r))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::QhoField;

    fn x(v: f64) -> ComplexVector {
        ComplexVector::real_scalar(v)
    }

    fn qho1_psi() -> (ScalarFn, GradientFn) {
        let psi: ScalarFn = Arc::new(|r| r[0] * (-r[0] * r[0] * 0.5).exp());
        let grad: GradientFn = Arc::new(|r| {
            let x = r[0];
            ComplexVector::scalar((C64::new(1.0, 0.0) - x * x) * (-x * x * 0.5).exp())
        });
        (psi, grad)
    }

    #[test]
    fn plane_wave_is_constant() {
        let k = 1.7;
        let psi: ScalarFn = Arc::new(move |r| (I * k * r[0]).exp());
        let f = field_from_wavefunction(1, psi, None, vec![], UnitSystem::natural()).unwrap();
        for v in [-3.0, 0.0, 0.4, 11.0] {
            let p = f.momentum(&x(v)).unwrap()[0];
            assert!((p - C64::new(k, 0.0)).norm() < 1e-9, "{p}");
        }
    }

    #[test]
    fn matches_closed_form_oscillator() {
        let (psi, grad) = qho1_psi();
        let f = field_from_wavefunction(1, psi, Some(grad), vec![Singularity::point(0.0)], UnitSystem::natural())
            .unwrap();
        let p = f.momentum(&x(2.0)).unwrap()[0];
        assert!((p - C64::new(0.0, 1.5)).norm() < 1e-14);
        assert!(matches!(f.momentum(&x(1e-7)), Err(Error::NodeEvaluation { .. })));
    }

    #[test]
    fn decaying_state_has_imaginary_momentum() {
        let psi: ScalarFn = Arc::new(|r| (-r[0]).exp());
        let f = field_from_wavefunction(1, psi, None, vec![], UnitSystem::natural()).unwrap();
        let p = f.momentum(&x(3.0)).unwrap()[0];
        assert!((p - I).norm() < 1e-9);
    }

    #[test]
    fn refuses_off_axis_unless_holomorphic() {
        let (psi, grad) = qho1_psi();
        let f = WavefunctionField::new(1, psi, UnitSystem::natural()).unwrap().with_gradient(grad);
        let z = ComplexVector::scalar(C64::new(1.0, 0.3));
        assert!(matches!(f.momentum(&z), Err(Error::OffAxisEvaluation(_))));
        let f = f.holomorphic(true);
        assert!(f.momentum(&z).is_ok());
    }

    #[test]
    fn hessian_gives_closed_form_jacobian() {
        let (psi, grad) = qho1_psi();
        let hess: HessianFn = Arc::new(|r| {
            let x = r[0];
            let v = (x * x * x - x * 3.0) * (-x * x * 0.5).exp();
            Jacobian::diagonal(&ComplexVector::scalar(v))
        });
        let f = WavefunctionField::new(1, psi, UnitSystem::natural())
            .unwrap()
            .with_gradient(grad)
            .with_hessian(hess)
            .with_nodes(vec![Singularity::point(0.0)]);
        assert_eq!(f.derivative_kind(), DerivativeKind::ClosedForm);
        let q = QhoField::new(1, UnitSystem::natural()).unwrap();
        for v in [0.3, 1.2, 2.5] {
            let a = f.jacobian(&x(v)).unwrap().get(0, 0);
            let b = q.jacobian(&x(v)).unwrap().get(0, 0);
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
            let la = f.vector_laplacian(&x(v)).unwrap()[0];
            let lb = q.vector_laplacian(&x(v)).unwrap()[0];
            assert!((la - lb).norm() < 1e-7 * lb.norm().max(1.0), "{la} vs {lb}");
        }
    }
}
