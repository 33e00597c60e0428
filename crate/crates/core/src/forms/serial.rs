//! JSON layout for forms:
//! `{"degree": d, "K": K, "components": {"01": [[k1,k2,k3,re,im], ...], ...}}`.
//! Only non-zero coefficients are written; reading them back is bit-exact.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::form::{basis, index_name, parse_index_name, Form};
use super::invariant::InvariantForm;
use super::FormError;

type Coefficient = (i64, i64, i64, f64, f64);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormRepr {
    pub degree: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub components: BTreeMap<String, Vec<Coefficient>>,
}

impl From<&Form> for FormRepr {
    fn from(form: &Form) -> Self {
        let components = basis(form.degree())
            .iter()
            .zip(form.components())
            .map(|(idx, field)| {
                let coeffs = field.nonzero().map(|(f, c)| (f[0], f[1], f[2], c.re, c.im)).collect();
                (index_name(*idx), coeffs)
            })
            .collect();
        Self { degree: form.degree(), k: form.truncation(), components }
    }
}

impl TryFrom<FormRepr> for Form {
    type Error = FormError;

    fn try_from(repr: FormRepr) -> Result<Self, FormError> {
        if repr.degree > 4 {
            return Err(FormError::DegreeOverflow { degree: repr.degree });
        }
        let mut fields = vec![ScalarField::zero(repr.k); basis(repr.degree).len()];
        for (name, coeffs) in repr.components {
            let slot = parse_index_name(&name)
                .and_then(|idx| basis(repr.degree).iter().position(|b| *b == idx))
                .ok_or_else(|| FormError::UnknownComponent(name.clone()))?;
            let entries = coeffs.into_iter().map(|(a, b, c, re, im)| ([a, b, c], Complex64::new(re, im)));
            fields[slot] = ScalarField::from_coefficients(repr.k, entries)?;
        }
        Form::from_components(repr.degree, fields)
    }
}

impl Serialize for Form {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FormRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Form {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = FormRepr::deserialize(d)?;
        Form::try_from(repr).map_err(serde::de::Error::custom)
    }
}

/// `{"degree": d, "sigma": Form, "tau": Form | null, "gamma": Form}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InvariantRepr {
    degree: usize,
    sigma: Form,
    tau: Option<Form>,
    gamma: Form,
}

impl Serialize for InvariantForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        InvariantRepr {
            degree: self.degree(),
            sigma: self.sigma().clone(),
            tau: self.tau().cloned(),
            gamma: (**self.gamma()).clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for InvariantForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = InvariantRepr::deserialize(d)?;
        let form = InvariantForm::new(repr.sigma, repr.tau, Arc::new(repr.gamma)).map_err(serde::de::Error::custom)?;
        if form.degree() != repr.degree {
            return Err(serde::de::Error::custom(format!(
                "declared degree {} but components have degree {}",
                repr.degree,
                form.degree()
            )));
        }
        Ok(form)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_layout() {
        let f = Form::constant_one_form(1, [2.0, 0.0, -1.5]);
        let v: serde_json::Value = serde_json::to_value(&f).unwrap();
        assert_eq!(v["degree"], 1);
        assert_eq!(v["K"], 1);
        assert_eq!(v["components"]["0"], serde_json::json!([[0, 0, 0, 2.0, 0.0]]));
        assert_eq!(v["components"]["1"], serde_json::json!([]));
    }

    #[test]
    fn rejects_bad_component_names_and_non_hermitian_data() {
        let bad = r#"{"degree":1,"K":1,"components":{"01":[]}}"#;
        assert!(serde_json::from_str::<Form>(bad).is_err());
        let skew = r#"{"degree":0,"K":1,"components":{"":[[1,0,0,1.0,0.0]]}}"#;
        assert!(serde_json::from_str::<Form>(skew).is_err());
        let outside = r#"{"degree":0,"K":1,"components":{"":[[2,0,0,1.0,0.0],[-2,0,0,1.0,0.0]]}}"#;
        assert!(serde_json::from_str::<Form>(outside).is_err());
    }
}
