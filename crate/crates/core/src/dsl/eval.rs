use std::collections::BTreeMap;

use super::ast::{Expr, Relation};
use super::EvalError;
use crate::dimension::Dimension;
use crate::quantity::{Quantity, QuantityError};
use crate::registry::{unit_symbol, ConstantRegistry};
use crate::scalar::Real;

/// Symbol source for evaluation.
pub trait Environment<T: Real> {
    fn lookup(&self, name: &str) -> Option<Quantity<T>>;
}

/// Registry plus local bindings. Lookup order: locals, registry, unit
/// symbols (`cm`, `g`, `s`, `erg`, `dyn`, `esu`).
#[derive(Debug, Clone)]
pub struct Env<'a, T> {
    registry: &'a ConstantRegistry<T>,
    locals: BTreeMap<String, Quantity<T>>,
}

impl<'a, T: Real> Env<'a, T> {
    pub fn new(registry: &'a ConstantRegistry<T>) -> Self {
        Self { registry, locals: BTreeMap::new() }
    }

    pub fn registry(&self) -> &'a ConstantRegistry<T> {
        self.registry
    }

    pub fn bind(&mut self, name: impl Into<String>, q: Quantity<T>) -> &mut Self {
        self.locals.insert(name.into(), q);
        self
    }

    pub fn with(mut self, name: impl Into<String>, q: Quantity<T>) -> Self {
        self.bind(name, q);
        self
    }

    /// Evaluates a relation's `@let` bindings in order into a child scope.
    pub fn with_bindings(&self, rel: &Relation) -> Result<Env<'a, T>, EvalError> {
        let mut env = self.clone();
        for (name, expr) in &rel.bindings {
            let q = evaluate(expr, &env)?;
            env.bind(name.clone(), q);
        }
        Ok(env)
    }
}

impl<T: Real> Environment<T> for Env<'_, T> {
    fn lookup(&self, name: &str) -> Option<Quantity<T>> {
        self.locals
            .get(name)
            .copied()
            .or_else(|| self.registry.get(name).map(|e| e.quantity))
            .or_else(|| unit_symbol(name))
    }
}

impl<T: Real> Environment<T> for BTreeMap<String, Quantity<T>> {
    fn lookup(&self, name: &str) -> Option<Quantity<T>> {
        self.get(name).copied()
    }
}

fn at(e: &Expr) -> impl FnOnce(QuantityError) -> EvalError + '_ {
    move |err| EvalError::from_quantity(err, e)
}

/// Bottom-up evaluation with dimension checking at every node.
pub fn evaluate<T: Real, E: Environment<T> + ?Sized>(e: &Expr, env: &E) -> Result<Quantity<T>, EvalError> {
    match e {
        Expr::Symbol(name) => env.lookup(name).ok_or_else(|| EvalError::UnknownSymbol(name.clone())),
        Expr::Literal(d) => Quantity::dimensionless(T::of(d.to_f64())).map_err(at(e)),
        Expr::Product(a, b) => evaluate(a, env)?.mul(evaluate(b, env)?).map_err(at(e)),
        Expr::Quotient(a, b) => evaluate(a, env)?.div(evaluate(b, env)?).map_err(at(e)),
        Expr::Sum(a, b) | Expr::Difference(a, b) => {
            let (x, y) = additive_operands(a, b, env)?;
            if matches!(e, Expr::Sum(..)) {
                x.add(y).map_err(at(e))
            } else {
                x.sub(y).map_err(at(e))
            }
        }
        Expr::Power(base, r) => evaluate(base, env)?.pow(*r).map_err(at(e)),
    }
}

/// A literal zero operand of `+`/`-` takes the other operand's dimension, so
/// unary minus (`0 - x`) works on dimensioned `x`.
fn additive_operands<T: Real, E: Environment<T> + ?Sized>(
    a: &Expr,
    b: &Expr,
    env: &E,
) -> Result<(Quantity<T>, Quantity<T>), EvalError> {
    let adopt = |zero: Quantity<T>, other: &Quantity<T>| zero.with_dimension(other.dimension());
    match (a.is_zero_literal(), b.is_zero_literal()) {
        (true, false) => {
            let y = evaluate(b, env)?;
            Ok((adopt(evaluate(a, env)?, &y), y))
        }
        (false, true) => {
            let x = evaluate(a, env)?;
            Ok((x, adopt(evaluate(b, env)?, &x)))
        }
        _ => Ok((evaluate(a, env)?, evaluate(b, env)?)),
    }
}

/// Dimension-only evaluation: symbol dimensions from `env`, no magnitudes.
pub fn infer_dimension<T: Real, E: Environment<T> + ?Sized>(e: &Expr, env: &E) -> Result<Dimension, EvalError> {
    match e {
        Expr::Symbol(name) => env
            .lookup(name)
            .map(|q| q.dimension())
            .ok_or_else(|| EvalError::UnknownSymbol(name.clone())),
        Expr::Literal(_) => Ok(Dimension::dimensionless()),
        Expr::Product(a, b) => Ok(infer_dimension(a, env)? * infer_dimension(b, env)?),
        Expr::Quotient(a, b) => Ok(infer_dimension(a, env)? / infer_dimension(b, env)?),
        Expr::Sum(a, b) | Expr::Difference(a, b) => {
            let da = infer_dimension(a, env)?;
            let db = infer_dimension(b, env)?;
            if a.is_zero_literal() {
                Ok(db)
            } else if b.is_zero_literal() || da == db {
                Ok(da)
            } else {
                Err(EvalError::DimensionMismatch { expr: e.to_string(), left: da, right: db })
            }
        }
        Expr::Power(base, r) => Ok(infer_dimension(base, env)?.pow(*r)),
    }
}
