//! Named physical constants in CGS-Gaussian units.
//!
//! Reference values are reproducible defaults; the large-number quantities
//! `l`, `N`, `M` and `T` are derived from them and re-derived whenever an
//! input changes, unless they were overridden themselves.
//!
//! Config format, one assignment per line:
//!
//! ```text
//! # comment
//! G = 6.674e-8 cm^3*g^-1*s^-2
//! N = 1e80
//! ```
//!
//! The value is a number followed by an optional unit expression over `cm`,
//! `g`, `s`, `erg`, `dyn`, `esu` and existing registry symbols. A right-hand
//! side that does not start with a number is evaluated as an expression.

use std::collections::BTreeMap;

use num_rational::Ratio;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dimension::Dimension;
use crate::dsl::{evaluate, is_identifier, parse_expression, Env, EvalError, Expr, ParseError};
use crate::quantity::{format_sig9, Quantity};
use crate::scalar::Real;

pub const UNIT_SYSTEM: &str = "CGS-Gaussian";

/// Where a registry value came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// Built-in reference value with a sourcing note.
    Reference(String),
    /// Computed from other entries by `formula`.
    Derived { formula: String },
    /// Set by a config file or command-line override.
    Override { source: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistryEntry<T> {
    pub quantity: Quantity<T>,
    pub description: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("deriving `{symbol}`: {source}")]
    Derivation { symbol: String, source: EvalError },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{source_name}:{line}: {message}")]
    Syntax { source_name: String, line: usize, message: String },
    #[error("{source_name}:{line}: {error}")]
    Parse { source_name: String, line: usize, error: ParseError },
    #[error("{source_name}:{line}: {error}")]
    Eval { source_name: String, line: usize, error: EvalError },
    #[error("{source_name}:{line}: `{symbol}` has dimension {expected}; override has {found}")]
    DimensionChange { source_name: String, line: usize, symbol: String, expected: Dimension, found: Dimension },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

impl ConfigError {
    /// True for failures of the right-hand side's evaluation (unknown
    /// symbol, dimension), as opposed to malformed text.
    pub fn is_evaluation(&self) -> bool {
        matches!(self, ConfigError::Eval { .. } | ConfigError::DimensionChange { .. } | ConfigError::Registry(_))
    }
}

/// Unit symbols available to every evaluation environment.
pub fn unit_symbol<T: Real>(name: &str) -> Option<Quantity<T>> {
    let half = |n| Ratio::new(n, 2);
    let dim = match name {
        "cm" => Dimension::length(),
        "g" => Dimension::mass(),
        "s" => Dimension::time(),
        "erg" => Dimension::mlt(1, 2, -2),
        "dyn" => Dimension::mlt(1, 1, -2),
        "esu" => Dimension::new(half(1), half(3), Ratio::from_integer(-1)),
        _ => return None,
    };
    Quantity::new(T::one(), dim).ok()
}

const DERIVATIONS: [(&str, &str, &str); 4] = [
    ("l", "hbar/(m_pi*c)", "pion Compton wavelength; the uncertainty length l = R/sqrt(N)"),
    ("N", "(R/l)^2", "particle number of the universe, from l = R/sqrt(N)"),
    ("M", "R*c^2/G", "mass of the universe, from R = G*M/c^2"),
    ("T", "R/c", "age of the universe, from c*T = R"),
];

/// Case-sensitive symbol table; iteration is in symbol order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantRegistry<T> {
    entries: BTreeMap<String, RegistryEntry<T>>,
}

impl<T: Real> ConstantRegistry<T> {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    /// Reference CGS values plus the derived large-number entries.
    pub fn cgs_default() -> Self {
        let mut reg = Self::empty();
        let mut put = |sym: &str, value: f64, dim: Dimension, desc: &str, note: &str| {
            let q = Quantity::new(T::of(value), dim).expect("reference values are finite");
            reg.insert(sym, q, desc, Provenance::Reference(note.to_string()));
        };
        put("c", 2.99792458e10, Dimension::mlt(0, 1, -1), "speed of light", "exact SI value in cm/s");
        put("G", 6.674e-8, Dimension::mlt(-1, 3, -2), "Newtonian gravitational constant", "CODATA, 4 digits");
        put("hbar", 1.054571817e-27, Dimension::mlt(1, 2, -1), "reduced Planck constant", "exact SI value in erg*s");
        put(
            "e",
            4.80320471e-10,
            Dimension::new(Ratio::new(1, 2), Ratio::new(3, 2), Ratio::from_integer(-1)),
            "elementary charge (Gaussian)",
            "CODATA in esu",
        );
        put("m_P", 2.176e-5, Dimension::mass(), "Planck mass", "standard value, sqrt(hbar*c/G) to 4 digits");
        put("m_pi", 2.488e-25, Dimension::mass(), "charged pion mass", "139.57 MeV/c^2");
        put("H", 2.27e-18, Dimension::mlt(0, 0, -1), "Hubble constant", "70 km/s/Mpc");
        put("R", 1e28, Dimension::length(), "radius of the universe", "order-of-magnitude value 10^28 cm");
        for (sym, formula, desc) in DERIVATIONS {
            reg.entries.insert(
                sym.to_string(),
                RegistryEntry {
                    // placeholder until rederive() fills it in
                    quantity: Quantity::dimensionless(T::zero()).expect("zero is finite"),
                    description: desc.to_string(),
                    provenance: Provenance::Derived { formula: formula.to_string() },
                },
            );
        }
        reg.rederive().expect("default derivations evaluate");
        reg
    }

    pub fn unit_system(&self) -> &'static str {
        UNIT_SYSTEM
    }

    pub fn get(&self, symbol: &str) -> Option<&RegistryEntry<T>> {
        self.entries.get(symbol)
    }

    pub fn lookup(&self, symbol: &str) -> Result<Quantity<T>, RegistryError> {
        self.get(symbol)
            .map(|e| e.quantity)
            .ok_or_else(|| RegistryError::UnknownSymbol(symbol.to_string()))
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.entries.contains_key(symbol)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &RegistryEntry<T>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Raw insert; does not re-derive dependents.
    pub fn insert(&mut self, symbol: &str, quantity: Quantity<T>, description: &str, provenance: Provenance) {
        self.entries.insert(
            symbol.to_string(),
            RegistryEntry { quantity, description: description.to_string(), provenance },
        );
    }

    /// Replaces a value in place, keeping description and provenance and
    /// leaving derived entries untouched. Test registries use this to mutate
    /// one constant's dimension.
    pub fn replace_quantity(&mut self, symbol: &str, quantity: Quantity<T>) -> Result<(), RegistryError> {
        let entry = self
            .entries
            .get_mut(symbol)
            .ok_or_else(|| RegistryError::UnknownSymbol(symbol.to_string()))?;
        entry.quantity = quantity;
        Ok(())
    }

    /// Overrides (or adds) a value, then re-derives dependents.
    pub fn set_override(&mut self, symbol: &str, quantity: Quantity<T>, source: &str) -> Result<(), RegistryError> {
        let description = self.get(symbol).map(|e| e.description.clone()).unwrap_or_default();
        self.insert(symbol, quantity, &description, Provenance::Override { source: source.to_string() });
        self.rederive()
    }

    /// True when `symbol` still carries its built-in derivation.
    pub fn is_derived(&self, symbol: &str) -> bool {
        matches!(self.get(symbol), Some(RegistryEntry { provenance: Provenance::Derived { .. }, .. }))
    }

    /// Recomputes derived entries in dependency order.
    pub fn rederive(&mut self) -> Result<(), RegistryError> {
        for (sym, formula, _) in DERIVATIONS {
            if !self.is_derived(sym) {
                continue;
            }
            let expr = parse_expression(formula).expect("built-in derivation parses");
            let q = evaluate(&expr, &Env::new(self))
                .map_err(|source| RegistryError::Derivation { symbol: sym.to_string(), source })?;
            self.entries.get_mut(sym).expect("derived entry present").quantity = q;
        }
        Ok(())
    }

    /// Applies `symbol = value [unit-expression]` lines. Overrides of an
    /// existing symbol must keep its dimension.
    pub fn apply_config(&mut self, text: &str, source_name: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.apply_assignment(line, source_name, i + 1)?;
        }
        Ok(())
    }

    /// One `symbol = value [unit]` assignment.
    pub fn apply_assignment(&mut self, line: &str, source_name: &str, line_no: usize) -> Result<(), ConfigError> {
        let syntax = |message: String| ConfigError::Syntax { source_name: source_name.to_string(), line: line_no, message };
        let (sym, rhs) = line.split_once('=').ok_or_else(|| syntax("expected `symbol = value unit`".into()))?;
        let sym = sym.trim();
        if !is_identifier(sym) {
            return Err(syntax(format!("invalid symbol name {sym:?}")));
        }
        let rhs = rhs.trim();
        if rhs.is_empty() {
            return Err(syntax(format!("missing value for `{sym}`")));
        }
        let expr = assignment_expr(rhs).map_err(|error| ConfigError::Parse {
            source_name: source_name.to_string(),
            line: line_no,
            error,
        })?;
        let q = evaluate(&expr, &Env::new(self)).map_err(|error| ConfigError::Eval {
            source_name: source_name.to_string(),
            line: line_no,
            error,
        })?;
        if let Some(existing) = self.get(sym) {
            if existing.quantity.dimension() != q.dimension() {
                return Err(ConfigError::DimensionChange {
                    source_name: source_name.to_string(),
                    line: line_no,
                    symbol: sym.to_string(),
                    expected: existing.quantity.dimension(),
                    found: q.dimension(),
                });
            }
        }
        self.set_override(sym, q, source_name)?;
        Ok(())
    }

    /// SHA-256 over every (symbol, magnitude bits, dimension), hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for (sym, entry) in &self.entries {
            let bits = entry.quantity.magnitude().as_f64().to_bits();
            h.update(format!("{sym}={bits:016x}:{}\n", entry.quantity.dimension()).as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Config-format dump that reloads to the same values.
    pub fn to_config(&self) -> String {
        let mut out = format!("# {UNIT_SYSTEM} constant registry\n");
        for (sym, entry) in &self.entries {
            let q = entry.quantity;
            out.push_str(&format!("{sym} = {}{}\n", format_sig9(q.magnitude().as_f64()), unit_text(q.dimension())));
        }
        out
    }
}

/// `value unit` or a bare expression.
fn assignment_expr(rhs: &str) -> Result<Expr, ParseError> {
    let (head, tail) = match rhs.split_once(char::is_whitespace) {
        Some((h, t)) => (h, t.trim()),
        None => (rhs, ""),
    };
    if head.parse::<f64>().is_ok() {
        let value = parse_expression(head)?;
        if tail.is_empty() {
            Ok(value)
        } else {
            let unit = crate::dsl::parse_expression(tail).map_err(|e| shift(e, rhs.len() - tail.len()))?;
            Ok(Expr::product(value, unit))
        }
    } else {
        parse_expression(rhs)
    }
}

fn shift(e: ParseError, by: usize) -> ParseError {
    match e {
        ParseError::Lex { offset, message } => ParseError::Lex { offset: offset + by, message },
        ParseError::Syntax { offset, message } => ParseError::Syntax { offset: offset + by, message },
    }
}

/// ` g^1*cm^2*s^-1`-style unit expression for a dimension.
fn unit_text(d: Dimension) -> String {
    use crate::dimension::Base;
    let parts: Vec<String> = d
        .iter()
        .map(|(b, e)| {
            let unit = match b {
                Base::Mass => "g",
                Base::Length => "cm",
                Base::Time => "s",
            };
            if e.is_integer() {
                format!("{unit}^{}", e.numer())
            } else {
                format!("{unit}^({}/{})", e.numer(), e.denom())
            }
        })
        .collect();
    if parts.is_empty() {
        String::new()
    } else {
        format!(" {}", parts.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reg() -> ConstantRegistry<f64> {
        ConstantRegistry::cgs_default()
    }

    #[test]
    fn lookup_reference_values() {
        let r = reg();
        let c = r.lookup("c").unwrap();
        assert_eq!(c.magnitude(), 2.99792458e10);
        assert_eq!(c.dimension(), Dimension::mlt(0, 1, -1));
        assert_eq!(r.lookup("m_P").unwrap().magnitude(), 2.176e-5);
        assert_eq!(r.lookup("nosuch").unwrap_err(), RegistryError::UnknownSymbol("nosuch".into()));
        assert!(r.lookup("C").is_err(), "lookups are case-sensitive");
    }

    #[test]
    fn derived_entries() {
        let r = reg();
        assert_relative_eq!(r.lookup("l").unwrap().magnitude(), 1.413855683e-13, max_relative = 1e-9);
        assert_relative_eq!(r.lookup("N").unwrap().magnitude(), 5.002531549e81, max_relative = 1e-9);
        assert_relative_eq!(r.lookup("M").unwrap().magnitude(), 1.346651452e56, max_relative = 1e-9);
        assert_relative_eq!(r.lookup("T").unwrap().magnitude(), 3.335640952e17, max_relative = 1e-9);
        assert!(r.is_derived("N"));
        assert_eq!(r.unit_system(), "CGS-Gaussian");
    }

    #[test]
    fn override_rederives_dependents() {
        let mut r = reg();
        r.apply_config("R = 2e28 cm # doubled\n", "test").unwrap();
        assert_relative_eq!(r.lookup("T").unwrap().magnitude(), 2e28 / 2.99792458e10, max_relative = 1e-15);
        assert_relative_eq!(r.lookup("N").unwrap().magnitude(), 4.0 * 5.002531549e81, max_relative = 1e-9);
    }

    #[test]
    fn overridden_derived_entry_sticks() {
        let mut r = reg();
        r.apply_config("N = 1e80\nR = 3e28 cm", "cfg").unwrap();
        assert_eq!(r.lookup("N").unwrap().magnitude(), 1e80);
        assert!(!r.is_derived("N"));
    }

    #[test]
    fn config_with_units_and_expressions() {
        let mut r = reg();
        r.apply_config("G = 6.674e-6 cm^3*g^-1*s^-2\nmu = 2*m_pi", "cfg").unwrap();
        assert_eq!(r.lookup("G").unwrap().magnitude(), 6.674e-6);
        assert_eq!(r.lookup("mu").unwrap().magnitude(), 2.0 * 2.488e-25);
    }

    #[test]
    fn config_errors() {
        let mut r = reg();
        assert!(matches!(r.apply_config("G 1", "x"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(r.apply_config("\nG = 1 cm^", "x"), Err(ConfigError::Parse { line: 2, .. })));
        let err = r.apply_config("Q = 1 zz", "x").unwrap_err();
        assert!(err.is_evaluation());
        assert!(matches!(r.apply_config("G = 1 cm", "x"), Err(ConfigError::DimensionChange { .. })));
    }

    #[test]
    fn fingerprint_tracks_values() {
        let a = reg();
        let mut b = reg();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.apply_config("H = 2.27e-16 s^-1", "x").unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn config_dump_reloads_bit_exactly() {
        let a = reg();
        let mut b = ConstantRegistry::<f64>::empty();
        b.apply_config(&a.to_config(), "dump").unwrap();
        for (sym, entry) in a.iter() {
            let got = b.lookup(sym).unwrap();
            assert_eq!(got.magnitude().to_bits(), entry.quantity.magnitude().to_bits(), "{sym}");
            assert_eq!(got.dimension(), entry.quantity.dimension());
        }
    }
}
