use std::fmt;

use serde::{Deserialize, Serialize};

use super::field::{Point, ScalarField};
use super::FormError;

/// A coordinate multi-index over the coframe `(dx, dy, dθ)`, stored as a
/// bitmask (`1 = dx`, `2 = dy`, `4 = dθ`).
pub type MultiIndex = u8;

const BASIS: [&[MultiIndex]; 5] = [&[0], &[1, 2, 4], &[3, 5, 6], &[7], &[]];

/// Strictly increasing multi-indices of the given degree, in storage order.
pub fn basis(degree: usize) -> &'static [MultiIndex] {
    BASIS[degree]
}

/// Digit string of a multi-index (`"01"` for `dx∧dy`, `""` for degree 0).
pub fn index_name(idx: MultiIndex) -> String {
    (0..3).filter(|b| idx & (1 << b) != 0).map(|b| char::from(b'0' + b)).collect()
}

pub fn parse_index_name(s: &str) -> Option<MultiIndex> {
    let mut idx = 0u8;
    let mut last: Option<u8> = None;
    for ch in s.bytes() {
        let b = ch.checked_sub(b'0').filter(|b| *b < 3)?;
        if last.is_some_and(|l| l >= b) {
            return None;
        }
        idx |= 1 << b;
        last = Some(b);
    }
    Some(idx)
}

/// Sign of `dx_I ∧ dx_J` relative to `dx_{I∪J}`, or zero if they overlap.
pub fn wedge_sign(i: MultiIndex, j: MultiIndex) -> i32 {
    if i & j != 0 {
        return 0;
    }
    let mut inversions = 0;
    for a in 0..3 {
        if i & (1 << a) != 0 {
            inversions += (j & ((1u8 << a) - 1)).count_ones();
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Coordinate cycles of the 3-torus through the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cycle {
    XCircle,
    YCircle,
    ThetaCircle,
    /// Oriented by `(∂y, ∂θ)`.
    YThetaTorus,
    /// Oriented by `(∂θ, ∂x)`.
    ThetaXTorus,
    /// Oriented by `(∂x, ∂y)`.
    XyTorus,
}

impl Cycle {
    pub const CIRCLES: [Cycle; 3] = [Cycle::XCircle, Cycle::YCircle, Cycle::ThetaCircle];
    pub const TORI: [Cycle; 3] = [Cycle::YThetaTorus, Cycle::ThetaXTorus, Cycle::XyTorus];

    pub fn dimension(self) -> usize {
        match self {
            Cycle::XCircle | Cycle::YCircle | Cycle::ThetaCircle => 1,
            _ => 2,
        }
    }

    /// Component and orientation sign integrated along this cycle.
    fn component(self) -> (MultiIndex, f64) {
        match self {
            Cycle::XCircle => (1, 1.0),
            Cycle::YCircle => (2, 1.0),
            Cycle::ThetaCircle => (4, 1.0),
            Cycle::YThetaTorus => (6, 1.0),
            Cycle::ThetaXTorus => (5, -1.0),
            Cycle::XyTorus => (3, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Cycle::XCircle => "x-circle",
            Cycle::YCircle => "y-circle",
            Cycle::ThetaCircle => "theta-circle",
            Cycle::YThetaTorus => "y-theta-torus",
            Cycle::ThetaXTorus => "theta-x-torus",
            Cycle::XyTorus => "xy-torus",
        }
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Differential form on the flat 3-torus with truncated-Fourier coefficients
/// in the coordinate coframe. Degree 4 is allowed and is always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    degree: usize,
    k: usize,
    components: Vec<ScalarField>,
}

impl Form {
    pub fn zero(degree: usize, k: usize) -> Self {
        assert!(degree <= 4, "degree {degree} form on a 3-manifold");
        Self { degree, k, components: vec![ScalarField::zero(k); basis(degree).len()] }
    }

    /// Components in [`basis`] order. Truncations are promoted to the largest.
    pub fn from_components(degree: usize, components: Vec<ScalarField>) -> Result<Self, FormError> {
        if degree > 4 {
            return Err(FormError::DegreeOverflow { degree });
        }
        if components.len() != basis(degree).len() {
            return Err(FormError::ComponentCount { degree, expected: basis(degree).len(), found: components.len() });
        }
        let k = components.iter().map(ScalarField::truncation).max().unwrap_or(0);
        let components = components.into_iter().map(|c| c.resized(k)).collect();
        Ok(Self { degree, k, components })
    }

    pub fn function(f: ScalarField) -> Self {
        Self { degree: 0, k: f.truncation(), components: vec![f] }
    }

    /// Constant 1-form `a·dx + b·dy + c·dθ`.
    pub fn constant_one_form(k: usize, coords: [f64; 3]) -> Self {
        Self { degree: 1, k, components: coords.iter().map(|v| ScalarField::constant(k, *v)).collect() }
    }

    /// Constant 2-form `n₁·dy∧dθ + n₂·dθ∧dx + n₃·dx∧dy`.
    pub fn constant_two_form(k: usize, coords: [f64; 3]) -> Self {
        let [n1, n2, n3] = coords;
        Self { degree: 2, k, components: [n3, -n2, n1].iter().map(|v| ScalarField::constant(k, *v)).collect() }
    }

    /// `dx∧dy∧dθ`.
    pub fn volume(k: usize) -> Self {
        Self { degree: 3, k, components: vec![ScalarField::constant(k, 1.0)] }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn truncation(&self) -> usize {
        self.k
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, idx: MultiIndex) -> Option<&ScalarField> {
        basis(self.degree).iter().position(|b| *b == idx).map(|i| &self.components[i])
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(ScalarField::is_constant)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.components.iter().map(ScalarField::max_abs_coeff).fold(0.0, f64::max)
    }

    pub fn resized(&self, k: usize) -> Self {
        Self { degree: self.degree, k, components: self.components.iter().map(|c| c.resized(k)).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { degree: self.degree, k: self.k, components: self.components.iter().map(|c| c.scale(s)).collect() }
    }

    pub fn add(&self, other: &Form) -> Result<Form, FormError> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Form) -> Result<Form, FormError> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &Form, op: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Result<Form, FormError> {
        if self.degree != other.degree {
            return Err(FormError::WrongDegree { expected: self.degree, found: other.degree });
        }
        let k = self.k.max(other.k);
        let components = self.components.iter().zip(&other.components).map(|(a, b)| op(a, b)).collect();
        Ok(Form { degree: self.degree, k, components })
    }

    /// Wedge product on the 3-torus. Fails if the result would exceed degree 3.
    pub fn wedge(&self, other: &Form) -> Result<Form, FormError> {
        self.wedge_tracked(other).map(|(f, _)| f)
    }

    /// Wedge product plus the summed `ℓ¹` truncation residual of all
    /// component products.
    pub fn wedge_tracked(&self, other: &Form) -> Result<(Form, f64), FormError> {
        let degree = self.degree + other.degree;
        if degree > 3 {
            return Err(FormError::DegreeOverflow { degree });
        }
        Ok(self.wedge_any(other))
    }

    /// Wedge product with no truncation: the result has radius `K₁ + K₂`.
    pub fn wedge_exact(&self, other: &Form) -> Result<Form, FormError> {
        let k = self.k + other.k;
        self.resized(k).wedge(&other.resized(k))
    }

    /// Wedge allowing degree 4 (always zero) for the invariant-form algebra.
    pub(crate) fn wedge_any(&self, other: &Form) -> (Form, f64) {
        let degree = self.degree + other.degree;
        debug_assert!(degree <= 4);
        let k = self.k.max(other.k);
        let out_basis = basis(degree);
        let mut components = vec![ScalarField::zero(k); out_basis.len()];
        let mut residual = 0.0;
        for (i, a) in basis(self.degree).iter().zip(&self.components) {
            for (j, b) in basis(other.degree).iter().zip(&other.components) {
                let sign = wedge_sign(*i, *j);
                if sign == 0 {
                    continue;
                }
                let slot = out_basis.iter().position(|x| *x == i | j).expect("basis index");
                let (prod, dropped) = a.mul_tracked(b);
                residual += dropped;
                components[slot] = if sign > 0 { &components[slot] + &prod } else { &components[slot] - &prod };
            }
        }
        (Form { degree, k, components }, residual)
    }

    /// Spectral exterior derivative. A 3-form maps to the zero 4-form.
    pub fn exterior_derivative(&self) -> Form {
        let degree = self.degree + 1;
        if degree > 3 {
            return Form::zero(4.min(degree), self.k);
        }
        let out_basis = basis(degree);
        let mut components = vec![ScalarField::zero(self.k); out_basis.len()];
        for (idx, f) in basis(self.degree).iter().zip(&self.components) {
            for axis in 0..3u8 {
                let bit = 1u8 << axis;
                if idx & bit != 0 {
                    continue;
                }
                let slot = out_basis.iter().position(|x| *x == idx | bit).expect("basis index");
                let df = f.derivative(axis as usize);
                components[slot] =
                    if wedge_sign(bit, *idx) > 0 { &components[slot] + &df } else { &components[slot] - &df };
            }
        }
        Form { degree, k: self.k, components }
    }

    /// Component values at a point, in [`basis`] order.
    pub fn evaluate_at(&self, p: Point) -> Vec<f64> {
        self.components.iter().map(|c| c.evaluate(p)).collect()
    }

    /// `∫_{T³} a` for a 3-form, with `dx∧dy∧dθ` positive.
    pub fn integrate_fundamental(&self) -> Result<f64, FormError> {
        if self.degree != 3 {
            return Err(FormError::WrongDegree { expected: 3, found: self.degree });
        }
        Ok(self.components[0].mean())
    }

    /// Period over a coordinate cycle through the origin.
    pub fn integrate_over_cycle(&self, cycle: Cycle) -> Result<f64, FormError> {
        if cycle.dimension() != self.degree {
            return Err(FormError::CycleDimension { cycle, degree: self.degree });
        }
        let (idx, sign) = cycle.component();
        let field = self.component(idx).expect("cycle component");
        // the component's index doubles as the mask of cycle directions:
        // frequencies along them must vanish, the rest are evaluated at the
        // origin where every exponential is 1
        let total: f64 = field
            .nonzero()
            .filter(|(freq, _)| (0..3).all(|a| idx & (1 << a) == 0 || freq[a] == 0))
            .map(|(_, c)| c.re)
            .sum();
        Ok(sign * total)
    }

    /// Periods over the x-, y- and θ-circles.
    pub fn periods_b1(&self) -> Result<[f64; 3], FormError> {
        let mut out = [0.0; 3];
        for (o, c) in out.iter_mut().zip(Cycle::CIRCLES) {
            *o = self.integrate_over_cycle(c)?;
        }
        Ok(out)
    }

    /// Periods over the yθ-, θx- and xy-tori (coordinates in the basis
    /// `[dy∧dθ], [dθ∧dx], [dx∧dy]`).
    pub fn periods_b2(&self) -> Result<[f64; 3], FormError> {
        let mut out = [0.0; 3];
        for (o, c) in out.iter_mut().zip(Cycle::TORI) {
            *o = self.integrate_over_cycle(c)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dx(k: usize) -> Form {
        Form::constant_one_form(k, [1.0, 0.0, 0.0])
    }
    fn dy(k: usize) -> Form {
        Form::constant_one_form(k, [0.0, 1.0, 0.0])
    }

    #[test]
    fn wedge_signs() {
        assert_eq!(wedge_sign(1, 2), 1);
        assert_eq!(wedge_sign(2, 1), -1);
        assert_eq!(wedge_sign(4, 3), 1);
        assert_eq!(wedge_sign(2, 5), -1);
        assert_eq!(wedge_sign(1, 1), 0);
    }

    #[test]
    fn index_names_round_trip() {
        for d in 0..=3 {
            for idx in basis(d) {
                assert_eq!(parse_index_name(&index_name(*idx)), Some(*idx));
            }
        }
        assert_eq!(parse_index_name("10"), None);
        assert_eq!(parse_index_name("3"), None);
    }

    #[test]
    fn dx_wedge_dy_is_unit_xy() {
        let w = dx(2).wedge(&dy(2)).unwrap();
        assert_eq!(w.component(3).unwrap().mean(), 1.0);
        assert_eq!(w.component(5).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn one_form_wedge_itself_vanishes() {
        let a = Form::from_components(
            1,
            vec![
                ScalarField::sin(3, [1, 2, 0], 0.7),
                ScalarField::cos(3, [0, 1, 1], 1.1),
                ScalarField::constant(3, 0.4),
            ],
        )
        .unwrap();
        assert!(a.wedge(&a).unwrap().max_abs_coeff() < 1e-15);
    }

    #[test]
    fn degree_overflow_is_rejected() {
        let w = Form::constant_two_form(1, [1.0, 0.0, 0.0]);
        assert!(matches!(w.wedge(&w), Err(FormError::DegreeOverflow { degree: 4 })));
    }

    #[test]
    fn derivative_of_sine() {
        let f = Form::function(ScalarField::sin(2, [1, 0, 0], 1.0));
        let df = f.exterior_derivative();
        let expect = ScalarField::cos(2, [1, 0, 0], std::f64::consts::TAU);
        assert!((&df.components()[0] - &expect).max_abs_coeff() < 1e-14);
        assert_eq!(df.components()[1].max_abs_coeff(), 0.0);
    }

    #[test]
    fn derivative_of_theta_free_top_xy_component_vanishes() {
        let rho = &ScalarField::sin(3, [1, 2, 0], 1.0) + &ScalarField::cos(3, [2, -1, 0], 0.5);
        let w = Form::from_components(2, vec![rho, ScalarField::zero(3), ScalarField::zero(3)]).unwrap();
        assert_eq!(w.exterior_derivative().max_abs_coeff(), 0.0);
    }

    #[test]
    fn three_form_derivative_is_zero_four_form() {
        let d = Form::volume(2).exterior_derivative();
        assert_eq!(d.degree(), 4);
        assert!(d.components().is_empty());
    }

    #[test]
    fn integrals() {
        assert_eq!(Form::volume(3).integrate_fundamental().unwrap(), 1.0);
        let s = Form::from_components(3, vec![ScalarField::sin(3, [1, 0, 0], 1.0)]).unwrap();
        assert_eq!(s.integrate_fundamental().unwrap(), 0.0);
        assert!(dx(1).integrate_fundamental().is_err());
    }

    #[test]
    fn cycle_periods() {
        assert_eq!(dx(1).integrate_over_cycle(Cycle::XCircle).unwrap(), 1.0);
        assert_eq!(dx(1).integrate_over_cycle(Cycle::YCircle).unwrap(), 0.0);
        let xy = dx(1).wedge(&dy(1)).unwrap();
        assert_eq!(xy.integrate_over_cycle(Cycle::XyTorus).unwrap(), 1.0);
        assert_eq!(xy.integrate_over_cycle(Cycle::YThetaTorus).unwrap(), 0.0);
        assert!(xy.integrate_over_cycle(Cycle::XCircle).is_err());
        let b2 = Form::constant_two_form(1, [0.5, -2.0, 3.0]);
        assert_eq!(b2.periods_b2().unwrap(), [0.5, -2.0, 3.0]);
    }

    #[test]
    fn evaluate_sine_component() {
        let a = Form::from_components(
            1,
            vec![ScalarField::sin(2, [1, 0, 0], 1.0), ScalarField::zero(2), ScalarField::zero(2)],
        )
        .unwrap();
        let v = a.evaluate_at([0.25, 0.3, 0.9]);
        assert!((v[0] - 1.0).abs() < 1e-15);
    }
}
