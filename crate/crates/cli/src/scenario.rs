use std::fs;
use std::path::Path;

use scalebridge::sim::{consistency_csv, fields_csv, hj_csv, run_scenario, Fixture, Scenario};
use serde::Deserialize;
use toml::{Table, Value};

use crate::{Failure, FixtureName, SimulateArgs};

/// Overlays `user` onto `base`, descending into tables.
fn overlay(base: &mut Table, user: Table) {
    for (key, value) in user {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(u)) => overlay(b, u),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Scenario from TOML text: `fixture` picks the defaults, every other key
/// overrides one of them. Unknown keys are rejected.
pub fn parse_scenario(text: &str, fallback: Fixture) -> Result<Scenario, String> {
    let user: Table = toml::from_str(text).map_err(|e| e.to_string())?;
    let fixture = match user.get("fixture") {
        None => fallback,
        Some(v) => Fixture::deserialize(v.clone()).map_err(|e| format!("fixture: {e}"))?,
    };
    let defaults = Scenario::for_fixture(fixture);
    let mut merged = match Value::try_from(&defaults).map_err(|e| e.to_string())? {
        Value::Table(t) => t,
        _ => unreachable!("a struct serializes to a table"),
    };
    overlay(&mut merged, user);
    Scenario::deserialize(Value::Table(merged)).map_err(|e| e.to_string())
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

pub fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let fallback = match args.fixture {
        Some(FixtureName::Free) => Fixture::Free,
        _ => Fixture::Harmonic,
    };
    let mut sc = match &args.scenario {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            parse_scenario(&text, fallback).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => Scenario::for_fixture(fallback),
    };
    if let Some(w) = args.workers {
        sc.workers = w;
    }
    if let Some(s) = args.seed {
        sc.seed = s;
    }
    if let Some(n) = args.n_paths {
        sc.n_paths = n;
    }
    if let Some(n) = args.n_steps {
        sc.n_steps = n;
    }
    if let Some(dt) = args.dt {
        sc.dt = dt;
    }
    if let Some(dir) = &args.out {
        sc.output.dir = Some(dir.display().to_string());
    }
    sc.output.fields |= args.fields;
    sc.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let outcome = run_scenario::<f64>(&sc).map_err(|e| {
        if e.is_config() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    })?;
    print!("{}", outcome.summary());

    if let Some(dir) = &sc.output.dir {
        let dir = Path::new(dir);
        fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
        write(dir, "consistency.csv", &consistency_csv(&outcome.samples))?;
        if let Some(hj) = &outcome.hj {
            write(dir, "hj_residual.csv", &hj_csv(hj))?;
        }
        if sc.output.fields {
            write(dir, "fields.csv", &fields_csv(&outcome.final_psi))?;
        }
    }
    if outcome.pass() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}
