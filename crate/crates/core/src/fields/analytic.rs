use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{DerivativeKind, Jacobian, MomentumField, Singularity};
use crate::model::{ComplexVector, TolerancePolicy, C64};

/// Uniform momentum, the plane-wave field.
#[derive(Debug, Clone)]
pub struct ConstantField {
    value: ComplexVector,
}

impl ConstantField {
    pub fn new(value: ComplexVector) -> Self {
        ConstantField { value }
    }
}

impl MomentumField for ConstantField {
    fn dim(&self) -> usize {
        self.value.dim()
    }

    fn derivative_kind(&self) -> DerivativeKind {
        DerivativeKind::ClosedForm
    }

    fn singularities(&self) -> &[Singularity] {
        &[]
    }

    fn node_guard(&self) -> f64 {
        TolerancePolicy::default().node_guard
    }

    fn is_holomorphic(&self) -> bool {
        true
    }

    fn momentum_raw(&self, _r: &ComplexVector) -> Result<ComplexVector> {
        Ok(self.value)
    }

    fn jacobian_raw(&self, r: &ComplexVector) -> Result<Jacobian> {
        Ok(Jacobian::zeros(r.dim()))
    }

    fn laplacian_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        Ok(ComplexVector::zeros(r.dim()))
    }
}

/// Affine field `p = A r + b`.
#[derive(Debug, Clone)]
pub struct LinearField {
    matrix: Jacobian,
    offset: ComplexVector,
}

impl LinearField {
    /// `rows[i][k]` is `A_ik`.
    pub fn new(rows: &[Vec<C64>], offset: ComplexVector) -> Result<Self> {
        let d = offset.dim();
        if rows.len() != d || rows.iter().any(|row| row.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: rows.len() });
        }
        let mut matrix = Jacobian::zeros(d);
        for (i, row) in rows.iter().enumerate() {
            for (k, &a) in row.iter().enumerate() {
                matrix.set(i, k, a);
            }
        }
        Ok(LinearField { matrix, offset })
    }

    /// `p = eps * (-y, x, 0)`, a pure rotation with curl `2 eps` along z.
    pub fn rotation(dim: usize, eps: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooLow(dim));
        }
        let zero = C64::new(0.0, 0.0);
        let mut rows = vec![vec![zero; dim]; dim];
        rows[0][1] = C64::new(-eps, 0.0);
        rows[1][0] = C64::new(eps, 0.0);
        Self::new(&rows, ComplexVector::zeros(dim))
    }
}

impl MomentumField for LinearField {
    fn dim(&self) -> usize {
        self.offset.dim()
    }

    fn derivative_kind(&self) -> DerivativeKind {
        DerivativeKind::ClosedForm
    }

    fn singularities(&self) -> &[Singularity] {
        &[]
    }

    fn node_guard(&self) -> f64 {
        TolerancePolicy::default().node_guard
    }

    fn is_holomorphic(&self) -> bool {
        true
    }

    fn momentum_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        Ok(self.matrix.directional(r) + self.offset)
    }

    fn jacobian_raw(&self, _r: &ComplexVector) -> Result<Jacobian> {
        Ok(self.matrix)
    }

    fn laplacian_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        Ok(ComplexVector::zeros(r.dim()))
    }
}

/// Pointwise sum of two fields of equal dimension.
#[derive(Clone)]
pub struct FieldSum {
    a: Arc<dyn MomentumField>,
    b: Arc<dyn MomentumField>,
    nodes: Vec<Singularity>,
}

impl FieldSum {
    pub fn new(a: Arc<dyn MomentumField>, b: Arc<dyn MomentumField>) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
        }
        let nodes = a.singularities().iter().chain(b.singularities()).copied().collect();
        Ok(FieldSum { a, b, nodes })
    }
}

impl MomentumField for FieldSum {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn derivative_kind(&self) -> DerivativeKind {
        match (self.a.derivative_kind(), self.b.derivative_kind()) {
            (DerivativeKind::ClosedForm, DerivativeKind::ClosedForm) => DerivativeKind::ClosedForm,
            _ => DerivativeKind::NumericCentralDifference,
        }
    }

    fn singularities(&self) -> &[Singularity] {
        &self.nodes
    }

    fn node_guard(&self) -> f64 {
        self.a.node_guard().max(self.b.node_guard())
    }

    fn is_holomorphic(&self) -> bool {
        self.a.is_holomorphic() && self.b.is_holomorphic()
    }

    fn momentum_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        Ok(self.a.momentum_raw(r)? + self.b.momentum_raw(r)?)
    }

    fn jacobian_raw(&self, r: &ComplexVector) -> Result<Jacobian> {
        Ok(self.a.jacobian_raw(r)? + self.b.jacobian_raw(r)?)
    }

    fn laplacian_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        Ok(self.a.laplacian_raw(r)? + self.b.laplacian_raw(r)?)
    }
}

/// Field of a product state `psi(r) = prod_k psi_k(x_k)`: component `k` is
/// the 1D field of factor `k` evaluated at `x_k`.
#[derive(Clone)]
pub struct SeparableField {
    factors: Vec<Arc<dyn MomentumField>>,
    nodes: Vec<Singularity>,
}

impl SeparableField {
    pub fn new(factors: Vec<Arc<dyn MomentumField>>) -> Result<Self> {
        if factors.is_empty() || factors.len() > 3 {
            return Err(Error::InvalidParameter(format!("need 1 to 3 factors, got {}", factors.len())));
        }
        let mut nodes = Vec::new();
        for (axis, f) in factors.iter().enumerate() {
            if f.dim() != 1 {
                return Err(Error::DimensionMismatch { expected: 1, got: f.dim() });
            }
            nodes.extend(f.singularities().iter().map(|s| Singularity { axis, at: s.at }));
        }
        Ok(SeparableField { factors, nodes })
    }

    fn each<F>(&self, r: &ComplexVector, eval: F) -> Result<ComplexVector>
    where
        F: Fn(&dyn MomentumField, &ComplexVector) -> Result<C64>,
    {
        let mut out = ComplexVector::zeros(self.factors.len());
        for (k, f) in self.factors.iter().enumerate() {
            out[k] = eval(f.as_ref(), &ComplexVector::scalar(r[k]))?;
        }
        Ok(out)
    }
}

impl MomentumField for SeparableField {
    fn dim(&self) -> usize {
        self.factors.len()
    }

    fn derivative_kind(&self) -> DerivativeKind {
        if self.factors.iter().all(|f| f.derivative_kind() == DerivativeKind::ClosedForm) {
            DerivativeKind::ClosedForm
        } else {
            DerivativeKind::NumericCentralDifference
        }
    }

    fn singularities(&self) -> &[Singularity] {
        &self.nodes
    }

    fn node_guard(&self) -> f64 {
        self.factors.iter().map(|f| f.node_guard()).fold(0.0, f64::max)
    }

    fn is_holomorphic(&self) -> bool {
        self.factors.iter().all(|f| f.is_holomorphic())
    }

    fn momentum_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        self.each(r, |f, x| Ok(f.momentum_raw(x)?[0]))
    }

    fn jacobian_raw(&self, r: &ComplexVector) -> Result<Jacobian> {
        Ok(Jacobian::diagonal(&self.each(r, |f, x| Ok(f.jacobian_raw(x)?.get(0, 0)))?))
    }

    fn laplacian_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        self.each(r, |f, x| Ok(f.laplacian_raw(x)?[0]))
    }
}
