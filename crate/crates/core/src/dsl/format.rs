//! Canonical printing with minimal parentheses. Output re-parses to a
//! structurally identical tree.

use std::fmt::{self, Write};

use super::ast::{Expr, Relation};
use crate::dimension::Exponent;

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Sum(..) | Expr::Difference(..) => PREC_ADD,
        Expr::Product(..) | Expr::Quotient(..) => PREC_MUL,
        Expr::Power(..) => PREC_POW,
        Expr::Symbol(_) | Expr::Literal(_) => PREC_ATOM,
    }
}

pub fn format_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e).expect("writing to a String cannot fail");
    out
}

fn write_child(out: &mut String, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        out.push('(');
        write_expr(out, e)?;
        out.push(')');
        Ok(())
    } else {
        write_expr(out, e)
    }
}

fn write_binary(out: &mut String, a: &Expr, op: char, b: &Expr, prec: u8) -> fmt::Result {
    // Left-associative: the left child may share the level, the right may not.
    write_child(out, a, precedence(a) < prec)?;
    out.push(op);
    write_child(out, b, precedence(b) <= prec)
}

fn write_exponent(out: &mut String, r: &Exponent) -> fmt::Result {
    if r.is_integer() {
        write!(out, "{}", r.numer())
    } else {
        write!(out, "({}/{})", r.numer(), r.denom())
    }
}

fn write_expr(out: &mut String, e: &Expr) -> fmt::Result {
    match e {
        Expr::Symbol(s) => out.write_str(s),
        Expr::Literal(d) => write!(out, "{d}"),
        Expr::Sum(a, b) => write_binary(out, a, '+', b, PREC_ADD),
        Expr::Difference(a, b) => write_binary(out, a, '-', b, PREC_ADD),
        Expr::Product(a, b) => write_binary(out, a, '*', b, PREC_MUL),
        Expr::Quotient(a, b) => write_binary(out, a, '/', b, PREC_MUL),
        Expr::Power(base, r) => {
            write_child(out, base, precedence(base) < PREC_ATOM)?;
            out.push('^');
            write_exponent(out, r)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_expr(self))
    }
}

/// Catalog-line form: annotations in fixed order, then `lhs op rhs`.
impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.name.is_empty() {
            write!(f, "@name({}) ", self.name)?;
        }
        if !self.paper_tag.is_empty() {
            write!(f, "@paper({}) ", self.paper_tag)?;
        }
        if let Some(t) = self.tol {
            write!(f, "@tol(decades={t}) ")?;
        }
        if !self.bindings.is_empty() {
            let list: Vec<String> = self.bindings.iter().map(|(s, e)| format!("{s}={e}")).collect();
            write!(f, "@let({}) ", list.join(", "))?;
        }
        if let Some(d) = &self.defines {
            write!(f, "@defines({d}) ")?;
        }
        write!(f, "{} {} {}", self.lhs, self.operator.symbol(), self.rhs)
    }
}
