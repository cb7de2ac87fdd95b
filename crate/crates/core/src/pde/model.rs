use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{Assumptions, Expr, FnAtom};
use crate::io::{read_entries, split_list, FileError, ParseContext};

use super::VectorField;

/// Coefficient names in the order they multiply
/// `u_xy, u_x u_y, u_2x, u_2y, u_y, u_x, 1`.
pub const COEFF_NAMES: [&str; 7] = ["A", "B", "C", "D", "E", "F", "G"];

/// Jet monomial multiplied by each coefficient.
pub fn coeff_jet_monomial(i: usize) -> Expr {
    match i {
        0 => Expr::u_of("xy"),
        1 => Expr::u_of("x") * Expr::u_of("y"),
        2 => Expr::u_of("xx"),
        3 => Expr::u_of("yy"),
        4 => Expr::u_of("y"),
        5 => Expr::u_of("x"),
        _ => Expr::one(),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),
    #[error("coefficient {coeff} contains the derivative `{jet}`; only bare u is allowed")]
    JetInCoefficient { coeff: String, jet: String },
    #[error("coefficient {coeff} uses undeclared symbol `{symbol}`")]
    Undeclared { coeff: String, symbol: String },
}

/// `u_t = A u_xy + B u_x u_y + C u_2x + D u_2y + E u_y + F u_x + G` with
/// coefficients in `(t, x, y, u)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdeModel {
    pub name: String,
    pub coeffs: [Expr; 7],
    pub parameters: Vec<String>,
    #[serde(skip)]
    pub positive: Assumptions,
    /// Opaque coefficient functions (only the fully general model has any).
    pub functions: Vec<String>,
}

pub const BUILTIN_MODELS: [&str; 5] = ["ricci", "convdiff", "heat-power", "heat-exp", "general"];

impl PdeModel {
    pub fn new(
        name: &str,
        coeffs: [Expr; 7],
        parameters: Vec<String>,
        positive: Assumptions,
    ) -> Result<Self, ModelError> {
        let m = PdeModel {
            name: name.to_string(),
            coeffs: coeffs.map(|c| c.normalize_with(&positive)),
            parameters,
            positive,
            functions: Vec::new(),
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let declared: BTreeSet<&str> = ["t", "x", "y"]
            .into_iter()
            .chain(self.parameters.iter().map(String::as_str))
            .collect();
        for (c, name) in self.coeffs.iter().zip(COEFF_NAMES) {
            if let Some(j) = c.jets().into_iter().find(|j| j.order() > 0) {
                return Err(ModelError::JetInCoefficient {
                    coeff: name.into(),
                    jet: j.name(),
                });
            }
            if let Some(s) = c.symbols().into_iter().find(|s| !declared.contains(s.name())) {
                return Err(ModelError::Undeclared {
                    coeff: name.into(),
                    symbol: s.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn builtin(name: &str) -> Result<Self, ModelError> {
        let u = Expr::u();
        let z = Expr::zero;
        match name {
            "ricci" => PdeModel::new(
                "ricci",
                [u.recip(), -u.powi(-2), z(), z(), z(), z(), z()],
                vec![],
                Assumptions::default(),
            ),
            "convdiff" => PdeModel::new(
                "convdiff",
                [z(), z(), u.clone(), u.clone(), z(), -Expr::sym("v"), z()],
                vec!["v".into()],
                Assumptions::default(),
            ),
            "heat-power" => {
                let n = Expr::sym("n");
                PdeModel::new(
                    "heat-power",
                    [
                        u.pow(n.clone()),
                        n.clone() * u.pow(n - Expr::one()),
                        z(),
                        z(),
                        z(),
                        z(),
                        z(),
                    ],
                    vec!["n".into()],
                    Assumptions::positive(["u"]),
                )
            }
            "heat-exp" => PdeModel::new(
                "heat-exp",
                [u.exp(), u.exp(), z(), z(), z(), z(), z()],
                vec![],
                Assumptions::default(),
            ),
            "general" => {
                let coeffs = COEFF_NAMES.map(|n| Expr::func_atom(FnAtom::new(n)));
                Ok(PdeModel {
                    name: "general".into(),
                    coeffs,
                    parameters: vec![],
                    positive: Assumptions::default(),
                    functions: COEFF_NAMES.iter().map(|s| s.to_string()).collect(),
                })
            }
            other => Err(ModelError::UnknownBuiltin(other.to_string())),
        }
    }

    /// Builtin name or path to a model file.
    pub fn load(spec: &str) -> Result<Self, ModelError> {
        if BUILTIN_MODELS.contains(&spec) {
            return PdeModel::builtin(spec);
        }
        let text = std::fs::read_to_string(spec).map_err(|e| {
            ModelError::File(FileError::Invalid {
                line: 0,
                message: format!("cannot read `{spec}`: {e}"),
            })
        })?;
        PdeModel::from_text(&text)
    }

    /// Key-value model file: `name`, `parameters`, `positive`, and any of
    /// `A` to `G` (missing coefficients are 0).
    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let entries = read_entries(text)?;
        let mut name = "custom".to_string();
        let mut parameters = Vec::new();
        let mut positive = Vec::new();
        for e in &entries {
            match e.key.as_str() {
                "name" => name = e.value.clone(),
                "parameters" => parameters = split_list(&e.value),
                "positive" => positive = split_list(&e.value),
                k if COEFF_NAMES.contains(&k) => {}
                _ => return Err(e.invalid(format!("unknown key `{}`", e.key)).into()),
            }
        }
        let ctx = ParseContext::default()
            .with_params(parameters.clone())
            .with_positive(positive.clone());
        ctx.validate().map_err(|m| FileError::Invalid { line: 0, message: m })?;
        let mut coeffs: [Expr; 7] = std::array::from_fn(|_| Expr::zero());
        for e in &entries {
            if let Some(i) = COEFF_NAMES.iter().position(|n| *n == e.key) {
                coeffs[i] = e.parse_expr(&ctx)?;
            }
        }
        PdeModel::new(&name, coeffs, parameters, Assumptions::positive(positive))
    }

    pub fn coeff(&self, name: &str) -> Option<&Expr> {
        COEFF_NAMES.iter().position(|n| *n == name).map(|i| &self.coeffs[i])
    }

    /// Right-hand side of the evolution equation.
    pub fn rhs(&self) -> Expr {
        let terms: Vec<Expr> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero_const())
            .map(|(i, c)| c * coeff_jet_monomial(i))
            .collect();
        Expr::add_all(terms).normalize_with(&self.positive)
    }

    /// `u_t - rhs`.
    pub fn residual_expr(&self) -> Expr {
        (Expr::u_of("t") - self.rhs()).normalize_with(&self.positive)
    }

    pub fn parse_context(&self) -> ParseContext {
        ParseContext::default()
            .with_params(self.parameters.clone())
            .with_positive(self.positive.names().map(String::from).collect::<Vec<_>>())
            .with_functions(self.functions.clone())
    }

    /// No explicit `t` in any coefficient.
    pub fn is_autonomous(&self) -> bool {
        let t = crate::expr::Var::sym("t");
        self.coeffs.iter().all(|c| !c.contains_var(&t))
    }

    /// Generator basis of the builtin models' symmetry algebras as stated
    /// in the literature for these equations.
    pub fn reference_basis(&self) -> Option<Vec<VectorField>> {
        let x = Expr::sym("x");
        let y = Expr::sym("y");
        let u = Expr::u();
        let z = Expr::zero;
        match self.name.as_str() {
            "ricci" => Some(vec![
                VectorField::new(z(), x, z(), -u.clone()),
                VectorField::new(z(), Expr::one(), z(), z()),
                VectorField::new(z(), z(), y, -u),
                VectorField::new(z(), z(), Expr::one(), z()),
            ]),
            "convdiff" => {
                let s = x - Expr::sym("v") * Expr::sym("t");
                Some(vec![
                    VectorField::new(z(), s.clone() / Expr::int(2), y.clone() / Expr::int(2), u),
                    VectorField::new(z(), y, -s, z()),
                    VectorField::new(z(), Expr::one(), z(), z()),
                    VectorField::new(z(), z(), Expr::one(), z()),
                ])
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse;

    #[test]
    fn ricci_rhs_matches_text() {
        let m = PdeModel::builtin("ricci").unwrap();
        let expected = parse("u_xy/u - u_x*u_y/u^2", &ParseContext::default()).unwrap();
        assert_eq!(m.rhs(), expected);
    }

    #[test]
    fn model_file_round_trip() {
        let text = "name = cd\nparameters = v\nC = u\nD = u\nF = -v\n";
        let m = PdeModel::from_text(text).unwrap();
        assert_eq!(m.coeffs, PdeModel::builtin("convdiff").unwrap().coeffs);
        assert!(PdeModel::from_text("A = u_x").is_err());
        assert!(PdeModel::from_text("A = w*u").is_err());
        assert!(PdeModel::from_text("Q = u").is_err());
    }
}
