//! Single-occurrence algebraic isolation through `*`, `/` and `^`.

use super::ast::{Expr, Relation};
use super::eval::{evaluate, Env};
use super::EvalError;
use crate::quantity::Quantity;
use crate::scalar::Real;

/// Solved value together with the closed form it was evaluated from.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub value: Quantity<T>,
    pub closed_form: Expr,
}

/// Rewrites `side == target` until `side` is the bare unknown; returns the
/// resulting expression for the unknown.
pub fn isolate(rel: &Relation, unknown: &str) -> Result<Expr, EvalError> {
    let not_isolatable = |reason: &str| EvalError::NotIsolatable {
        unknown: unknown.to_string(),
        reason: reason.to_string(),
    };
    match rel.occurrences(unknown) {
        0 => return Err(not_isolatable("does not occur in the relation")),
        1 => {}
        _ => return Err(not_isolatable("occurs more than once")),
    }
    let (mut side, mut target) = if rel.lhs.occurrences(unknown) == 1 {
        (&rel.lhs, rel.rhs.clone())
    } else {
        (&rel.rhs, rel.lhs.clone())
    };
    loop {
        side = match side {
            Expr::Symbol(_) => return Ok(target),
            Expr::Literal(_) => unreachable!("literal cannot contain the unknown"),
            Expr::Sum(..) | Expr::Difference(..) => {
                return Err(not_isolatable("sits under `+` or `-`; additive isolation is not supported"))
            }
            Expr::Product(a, b) => {
                if a.occurrences(unknown) == 1 {
                    target = Expr::quotient(target, (**b).clone());
                    a
                } else {
                    target = Expr::quotient(target, (**a).clone());
                    b
                }
            }
            Expr::Quotient(a, b) => {
                if a.occurrences(unknown) == 1 {
                    target = Expr::product(target, (**b).clone());
                    a
                } else {
                    target = Expr::quotient((**a).clone(), target);
                    b
                }
            }
            Expr::Power(base, r) => {
                if *r.numer() == 0 {
                    return Err(not_isolatable("sits under a zeroth power"));
                }
                target = Expr::power(target, r.recip());
                base
            }
        };
    }
}

/// Solves `rel` for `unknown`; `~` is treated as equality. The relation's
/// `@let` bindings are evaluated first, and the unknown itself is never read
/// from the environment.
pub fn solve_for<T: Real>(rel: &Relation, unknown: &str, env: &Env<'_, T>) -> Result<Solution<T>, EvalError> {
    let closed_form = isolate(rel, unknown)?;
    let env = env.with_bindings(rel)?;
    let value = evaluate(&closed_form, &env)?;
    Ok(Solution { value, closed_form })
}
