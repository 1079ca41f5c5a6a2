use std::fmt::Write;

use serde::Serialize;

use super::report::JsonQuantity;
use super::EngineError;
use crate::dsl::{evaluate, parse_expression, parse_relation, solve_for, Env, EvalError};
use crate::quantity::{CoincidenceVerdict, Quantity};
use crate::scalar::Real;

pub const CHAIN_NAMES: [&str; 3] = ["weinberg", "planck_constant", "planck_particle"];

struct StepDef {
    name: &'static str,
    relation: &'static str,
    unknown: &'static str,
    reference: Option<&'static str>,
}

struct CheckDef {
    name: &'static str,
    lhs: &'static str,
    rhs: &'static str,
    tol_decades: f64,
}

const fn step(name: &'static str, relation: &'static str, unknown: &'static str, reference: Option<&'static str>) -> StepDef {
    StepDef { name, relation, unknown, reference }
}

const fn check(name: &'static str, lhs: &'static str, rhs: &'static str, tol_decades: f64) -> CheckDef {
    CheckDef { name, lhs, rhs, tol_decades }
}

const WEINBERG: ([StepDef; 3], [CheckDef; 3]) = (
    [
        step("pion mass from the Hubble constant", "m = (hbar^2*H/(G*c))^(1/3)", "m", Some("m_pi")),
        step("self-gravitating length at that mass", "L = hbar^2/(2*m^3*G)", "L", Some("R")),
        step("self-gravitating length at the registry pion mass", "L_pi = hbar^2/(2*m_pi^3*G)", "L_pi", Some("R")),
    ],
    [
        check("mass against m_pi", "m", "m_pi", 1.0),
        check("length at the derived mass against R", "L", "R", 2.0),
        check("length at m_pi against R", "L_pi", "R", 2.0),
    ],
);

const PLANCK_CONSTANT: ([StepDef; 3], [CheckDef; 1]) = (
    [
        step("correlation length", "hbar/m_pi = l*c", "l", Some("l")),
        step("particle number", "l = R/N^(1/2)", "N", Some("N")),
        step("Planck constant from fluctuation", "hbar_x = G*N^(1/2)*m_pi^2/c", "hbar_x", Some("hbar")),
    ],
    [check("derived against registry hbar", "hbar_x", "hbar", 1.5)],
);

const PLANCK_PARTICLE: ([StepDef; 4], [CheckDef; 2]) = (
    [
        step("self-consistent Planck mass", "m_Ps^2 = hbar*c/G", "m_Ps", Some("m_P")),
        step("self-gravitating length", "L = hbar^2/(2*m_Ps^3*G)", "L", Some("1e-33*cm")),
        step("self-gravitating energy", "E = G*m_Ps^2/L", "E", Some("m_Ps*c^2")),
        step("energy in units of rest energy", "ratio = E/(m_Ps*c^2)", "ratio", None),
    ],
    [
        check("length against 1e-33 cm", "L", "1e-33*cm", 0.5),
        check("energy against rest energy", "E", "m_Ps*c^2", 0.5),
    ],
);

#[derive(Debug, Clone, PartialEq)]
pub struct ChainStep<T> {
    pub name: String,
    pub symbol: String,
    pub value: Quantity<T>,
    pub relation: String,
    /// Reference expression and its value, when the step has one.
    pub reference: Option<(String, Quantity<T>)>,
    /// `log10(value/reference)`.
    pub gap_decades: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck<T> {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub verdict: CoincidenceVerdict<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport<T> {
    pub chain: String,
    pub steps: Vec<ChainStep<T>>,
    pub checks: Vec<CrossCheck<T>>,
}

impl<T: Real> ChainReport<T> {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict.pass)
    }

    pub fn step(&self, symbol: &str) -> Option<&ChainStep<T>> {
        self.steps.iter().find(|s| s.symbol == symbol)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct JStep<'a> {
            name: &'a str,
            symbol: &'a str,
            relation: &'a str,
            value: JsonQuantity,
            reference: Option<&'a str>,
            reference_value: Option<JsonQuantity>,
            gap_decades: Option<f64>,
        }
        #[derive(Serialize)]
        struct JCheck<'a> {
            name: &'a str,
            lhs: &'a str,
            rhs: &'a str,
            log10_ratio: f64,
            tol_decades: f64,
            dimensions_match: bool,
            pass: bool,
        }
        #[derive(Serialize)]
        struct JChain<'a> {
            chain: &'a str,
            pass: bool,
            steps: Vec<JStep<'a>>,
            checks: Vec<JCheck<'a>>,
        }
        let doc = JChain {
            chain: &self.chain,
            pass: self.pass(),
            steps: self
                .steps
                .iter()
                .map(|s| JStep {
                    name: &s.name,
                    symbol: &s.symbol,
                    relation: &s.relation,
                    value: JsonQuantity::from(&s.value),
                    reference: s.reference.as_ref().map(|r| r.0.as_str()),
                    reference_value: s.reference.as_ref().map(|r| JsonQuantity::from(&r.1)),
                    gap_decades: s.gap_decades.map(Real::as_f64),
                })
                .collect(),
            checks: self
                .checks
                .iter()
                .map(|c| JCheck {
                    name: &c.name,
                    lhs: &c.lhs,
                    rhs: &c.rhs,
                    log10_ratio: c.verdict.log10_ratio.as_f64(),
                    tol_decades: c.verdict.tol_decades.as_f64(),
                    dimensions_match: c.verdict.dimensions_match,
                    pass: c.verdict.pass,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("chain report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("chain {}\n", self.chain);
        for (i, s) in self.steps.iter().enumerate() {
            let _ = write!(
                out,
                "{:>2}. {:<50} {:<7} = {:>14.6e}  {:<16}",
                i + 1,
                s.name,
                s.symbol,
                s.value.magnitude().as_f64(),
                s.value.dimension().to_string()
            );
            if let (Some((r, _)), Some(g)) = (&s.reference, s.gap_decades) {
                let _ = write!(out, "  gap {:+.4} vs {}", g.as_f64(), r);
            }
            out.push('\n');
            let _ = writeln!(out, "    from {}", s.relation);
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "check {:<40} {:+.4} (tol {:.2})  {}",
                c.name,
                c.verdict.log10_ratio.as_f64(),
                c.verdict.tol_decades.as_f64(),
                if c.verdict.pass { "pass" } else { "FAIL" }
            );
        }
        let _ = writeln!(out, "overall: {}", if self.pass() { "PASS" } else { "FAIL" });
        out
    }
}

/// Runs one named derivation chain. Each step's solved symbol is bound for
/// the steps after it; the registry itself is never modified.
pub fn run_chain<T: Real>(name: &str, env: &Env<'_, T>) -> Result<ChainReport<T>, EngineError> {
    match name {
        "weinberg" => execute(name, &WEINBERG.0, &WEINBERG.1, env),
        "planck_constant" => execute(name, &PLANCK_CONSTANT.0, &PLANCK_CONSTANT.1, env),
        "planck_particle" => execute(name, &PLANCK_PARTICLE.0, &PLANCK_PARTICLE.1, env),
        other => Err(EngineError::UnknownChain(other.to_string())),
    }
}

fn execute<T: Real>(
    chain: &str,
    steps: &[StepDef],
    checks: &[CheckDef],
    env: &Env<'_, T>,
) -> Result<ChainReport<T>, EngineError> {
    let mut env = env.clone();
    let mut out = Vec::with_capacity(steps.len());
    for def in steps {
        let fail = |source| EngineError::Step { chain: chain.to_string(), step: def.name.to_string(), source };
        let rel = parse_relation(def.relation).expect("built-in chain relation parses");
        let solved = solve_for(&rel, def.unknown, &env).map_err(fail)?.value;
        let reference = match def.reference {
            Some(text) => Some((text.to_string(), eval_text(text, &env).map_err(fail)?)),
            None => None,
        };
        let gap_decades = match &reference {
            Some((_, r)) => Some(
                solved
                    .coincide(r, T::zero())
                    .map_err(|e| fail(EvalError::Quantity(e)))?
                    .log10_ratio,
            ),
            None => None,
        };
        env.bind(def.unknown, solved);
        out.push(ChainStep {
            name: def.name.to_string(),
            symbol: def.unknown.to_string(),
            value: solved,
            relation: def.relation.to_string(),
            reference,
            gap_decades,
        });
    }
    let mut verdicts = Vec::with_capacity(checks.len());
    for def in checks {
        let fail = |source| EngineError::Step { chain: chain.to_string(), step: def.name.to_string(), source };
        let lhs = eval_text(def.lhs, &env).map_err(fail)?;
        let rhs = eval_text(def.rhs, &env).map_err(fail)?;
        let verdict = lhs
            .coincide(&rhs, T::of(def.tol_decades))
            .map_err(|e| fail(EvalError::Quantity(e)))?;
        verdicts.push(CrossCheck {
            name: def.name.to_string(),
            lhs: def.lhs.to_string(),
            rhs: def.rhs.to_string(),
            verdict,
        });
    }
    Ok(ChainReport { chain: chain.to_string(), steps: out, checks: verdicts })
}

fn eval_text<T: Real>(text: &str, env: &Env<'_, T>) -> Result<Quantity<T>, EvalError> {
    evaluate(&parse_expression(text).expect("built-in chain expression parses"), env)
}

/// Fluctuational energy of `N` particles and its product with `T = R/c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationEnergy<T> {
    /// `G*N^(1/2)*m_pi^2/R`
    pub energy: Quantity<T>,
    /// `energy * R/c`, which reduces to `G*N^(1/2)*m_pi^2/c`.
    pub action: Quantity<T>,
}

pub fn fluctuation_energy<T: Real>(env: &Env<'_, T>) -> Result<FluctuationEnergy<T>, EvalError> {
    let energy = eval_text("G*N^(1/2)*m_pi^2/R", env)?;
    let period = eval_text("R/c", env)?;
    let action = energy.mul(period).map_err(EvalError::Quantity)?;
    Ok(FluctuationEnergy { energy, action })
}
