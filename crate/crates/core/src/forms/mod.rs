//! Spectral exterior calculus on the flat 3-torus and the algebra of
//! circle-invariant forms on a principal circle bundle over it.

mod certified;
mod field;
mod form;
mod invariant;
mod serial;
pub(crate) mod spectral;

use thiserror::Error;

pub use certified::{certified_min, certified_min_with_tail, certify_positive, CertifiedBound, MAX_REFINED_GRID};
pub use field::{FieldEvaluator, Frequency, JointEvaluator, Point, ScalarField};
pub use form::{basis, index_name, parse_index_name, wedge_sign, Cycle, Form, MultiIndex};
pub use invariant::{InvariantForm, CURVATURE_CLOSED_TOL};
pub use serial::FormRepr;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("wedge would produce a degree {degree} form")]
    DegreeOverflow { degree: usize },
    #[error("expected a degree {expected} form, found degree {found}")]
    WrongDegree { expected: usize, found: usize },
    #[error("degree {degree} form needs {expected} components, got {found}")]
    ComponentCount { degree: usize, expected: usize, found: usize },
    #[error("cannot integrate a degree {degree} form over the {cycle}")]
    CycleDimension { cycle: Cycle, degree: usize },
    #[error("frequency {freq:?} outside truncation K = {k}")]
    FrequencyOutOfRange { freq: Frequency, k: usize },
    #[error("coefficients are not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("invariant form of degree {degree} needs a fiber part")]
    MissingFiberPart { degree: usize },
    #[error("curvature form is not closed (residual {residual:e})")]
    CurvatureNotClosed { residual: f64 },
    #[error("invariant forms refer to different curvature forms")]
    ConnectionMismatch,
}
