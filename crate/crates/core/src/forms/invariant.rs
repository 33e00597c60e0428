use std::sync::Arc;

use super::form::Form;
use super::FormError;

/// Closedness tolerance for the curvature representative.
pub const CURVATURE_CLOSED_TOL: f64 = 1e-8;

/// An `S¹`-invariant form `p*σ + p*τ∧η` on the circle bundle `M → T³`.
///
/// The connection form `η` is never stored. It is characterized by unit
/// fiber integral and `dη = p*γ`, which is all the algebra below needs;
/// `η∧η = 0` because `η` is a 1-form.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantForm {
    degree: usize,
    sigma: Form,
    tau: Option<Form>,
    gamma: Arc<Form>,
}

impl InvariantForm {
    /// `p*σ + p*τ∧η`. `tau` must be `None` exactly when `σ` is a function.
    pub fn new(sigma: Form, tau: Option<Form>, gamma: Arc<Form>) -> Result<Self, FormError> {
        let degree = sigma.degree();
        match (&tau, degree) {
            (None, 0) => {}
            (Some(t), d) if d >= 1 && t.degree() + 1 == d => {}
            (Some(t), _) => {
                return Err(FormError::WrongDegree { expected: degree.saturating_sub(1), found: t.degree() })
            }
            (None, _) => return Err(FormError::MissingFiberPart { degree }),
        }
        if gamma.degree() != 2 {
            return Err(FormError::WrongDegree { expected: 2, found: gamma.degree() });
        }
        let residual = gamma.exterior_derivative().max_abs_coeff();
        if residual > CURVATURE_CLOSED_TOL {
            return Err(FormError::CurvatureNotClosed { residual });
        }
        Ok(Self { degree, sigma, tau, gamma })
    }

    /// Pullback `p*σ` (zero fiber part).
    pub fn pullback(sigma: Form, gamma: Arc<Form>) -> Result<Self, FormError> {
        let tau = (sigma.degree() > 0).then(|| Form::zero(sigma.degree() - 1, sigma.truncation()));
        Self::new(sigma, tau, gamma)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn sigma(&self) -> &Form {
        &self.sigma
    }

    pub fn tau(&self) -> Option<&Form> {
        self.tau.as_ref()
    }

    pub fn gamma(&self) -> &Arc<Form> {
        &self.gamma
    }

    /// Zero-pads or truncates `σ` and `τ`; the curvature is shared unchanged.
    pub fn resized(&self, k: usize) -> Self {
        Self {
            degree: self.degree,
            sigma: self.sigma.resized(k),
            tau: self.tau.as_ref().map(|t| t.resized(k)),
            gamma: Arc::clone(&self.gamma),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        let t = self.tau.as_ref().map_or(0.0, Form::max_abs_coeff);
        self.sigma.max_abs_coeff().max(t)
    }

    /// Twisted differential `d(σ, τ) = (dσ + (−1)^{deg τ}·τ∧γ, dτ)`.
    pub fn invariant_d(&self) -> Result<InvariantForm, FormError> {
        if self.degree >= 4 {
            return Err(FormError::DegreeOverflow { degree: self.degree + 1 });
        }
        let k = self.sigma.truncation();
        let mut sigma = self.sigma.exterior_derivative();
        let tau = match &self.tau {
            Some(t) => {
                let (tg, _) = t.wedge_any(&self.gamma);
                let tg = if t.degree() % 2 == 0 { tg } else { tg.scale(-1.0) };
                sigma = sigma.add(&tg)?;
                t.exterior_derivative()
            }
            None => Form::zero(0, k),
        };
        Ok(Self { degree: self.degree + 1, sigma, tau: Some(tau), gamma: Arc::clone(&self.gamma) })
    }

    /// See [`InvariantForm::invariant_wedge_tracked`].
    pub fn invariant_wedge(&self, other: &InvariantForm) -> Result<InvariantForm, FormError> {
        self.invariant_wedge_tracked(other).map(|(w, _)| w)
    }

    /// `(σ₁,τ₁)∧(σ₂,τ₂) = (σ₁∧σ₂, σ₁∧τ₂ + (−1)^{deg σ₂}·τ₁∧σ₂)`, with the
    /// summed truncation residual of every product.
    pub fn invariant_wedge_tracked(&self, other: &InvariantForm) -> Result<(InvariantForm, f64), FormError> {
        let degree = self.degree + other.degree;
        if degree > 4 {
            return Err(FormError::DegreeOverflow { degree });
        }
        if self.gamma != other.gamma && *self.gamma != *other.gamma {
            return Err(FormError::ConnectionMismatch);
        }
        let k = self.sigma.truncation().max(other.sigma.truncation());
        let (sigma, mut residual) = self.sigma.wedge_any(&other.sigma);
        let tau = if degree == 0 {
            None
        } else {
            let mut tau = Form::zero(degree - 1, k);
            if let Some(t2) = &other.tau {
                let (p, r) = self.sigma.wedge_any(t2);
                residual += r;
                tau = tau.add(&p)?;
            }
            if let Some(t1) = &self.tau {
                let (p, r) = t1.wedge_any(&other.sigma);
                residual += r;
                let p = if other.sigma.degree() % 2 == 0 { p } else { p.scale(-1.0) };
                tau = tau.add(&p)?;
            }
            Some(tau)
        };
        Ok((Self { degree, sigma, tau, gamma: Arc::clone(&self.gamma) }, residual))
    }

    /// Integration along the fiber: `p_*(p*σ + p*τ∧η) = τ`. For functions
    /// (degree 0) the result is the zero function.
    pub fn fiber_integrate(&self) -> Form {
        self.tau.clone().unwrap_or_else(|| Form::zero(0, self.sigma.truncation()))
    }

    /// `∫_M w` for a top-degree form, with `M` oriented by `p*(vol_N)∧η`.
    pub fn integrate_m(&self) -> Result<f64, FormError> {
        if self.degree != 4 {
            return Err(FormError::WrongDegree { expected: 4, found: self.degree });
        }
        self.fiber_integrate().integrate_fundamental()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::ScalarField;

    fn flat(k: usize) -> Arc<Form> {
        Arc::new(Form::zero(2, k))
    }

    fn dx(k: usize) -> Form {
        Form::constant_one_form(k, [1.0, 0.0, 0.0])
    }

    #[test]
    fn omega_squared_on_four_torus_has_mass_two() {
        let g = flat(2);
        let omega = InvariantForm::new(Form::constant_two_form(2, [1.0, 0.0, 0.0]), Some(dx(2)), g).unwrap();
        let sq = omega.invariant_wedge(&omega).unwrap();
        assert_eq!(sq.degree(), 4);
        assert!((sq.integrate_m().unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn fiber_part_squared_vanishes() {
        let w = InvariantForm::new(Form::zero(2, 2), Some(dx(2)), flat(2)).unwrap();
        assert_eq!(w.invariant_wedge(&w).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn d_of_fiber_part_uses_curvature() {
        // γ = β∧α with α = dx, β = sin(2πy)·dy: closed, and d(0, α) = (−α∧γ, 0) = 0
        let k = 3;
        let alpha = dx(k);
        let beta = Form::from_components(
            1,
            vec![ScalarField::zero(k), ScalarField::sin(k, [0, 1, 0], 1.0), ScalarField::zero(k)],
        )
        .unwrap();
        let gamma = Arc::new(beta.wedge(&alpha).unwrap());
        let w = InvariantForm::new(Form::zero(2, k), Some(alpha), gamma).unwrap();
        let dw = w.invariant_d().unwrap();
        assert!(dw.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn d_of_function_has_zero_fiber_part() {
        let f = Form::function(ScalarField::cos(2, [1, 1, 0], 1.0));
        let w = InvariantForm::pullback(f.clone(), flat(2)).unwrap();
        let dw = w.invariant_d().unwrap();
        assert_eq!(dw.sigma(), &f.exterior_derivative());
        assert_eq!(dw.tau().unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn rejects_inconsistent_degrees_and_open_curvature() {
        assert!(InvariantForm::new(Form::zero(2, 1), Some(Form::zero(2, 1)), flat(1)).is_err());
        assert!(InvariantForm::new(Form::zero(2, 1), None, flat(1)).is_err());
        let bad = Form::from_components(
            2,
            vec![ScalarField::sin(2, [0, 0, 1], 1.0), ScalarField::zero(2), ScalarField::zero(2)],
        )
        .unwrap();
        assert!(matches!(
            InvariantForm::pullback(Form::zero(1, 2), Arc::new(bad)),
            Err(FormError::CurvatureNotClosed { .. })
        ));
    }

    #[test]
    fn top_degree_has_no_derivative() {
        let w = InvariantForm::new(Form::zero(4, 1), Some(Form::volume(1)), flat(1)).unwrap();
        assert!(w.invariant_d().is_err());
        assert_eq!(w.integrate_m().unwrap(), 1.0);
    }
}
