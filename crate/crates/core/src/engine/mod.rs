//! Deterministic stock-flow simulation kernel.
//!
//! A [`ModelDefinition`] declares stocks, auxiliaries, flows, parameters and
//! table functions. [`compile_model`] resolves every equation to an
//! evaluation plan ordered so each auxiliary or flow is computed after the
//! variables it reads. The resulting [`ExecutableModel`] is integrated with
//! explicit Euler on a [`TimeGrid`]:
//!
//! ```text
//! S(t + dt) = S(t) + dt * (inflows(t) - outflows(t))
//! ```
//!
//! Auxiliaries and flows are evaluated once per grid point, including the
//! final one, so every recorded series has one value per grid point.

mod expr;
mod plan;
mod table;
mod trajectory;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use expr::{parse, Expr, ParseError};
pub use plan::{compile_model, ExecutableModel};
pub use table::{lookup_eval, Table};
pub use trajectory::Trajectory;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("cannot parse equation of `{variable}`: {source}")]
    Parse {
        variable: String,
        #[source]
        source: ParseError,
    },
    #[error("name `{0}` is declared more than once")]
    DuplicateName(String),
    #[error("`{variable}` references undeclared name `{name}`")]
    UnknownReference { variable: String, name: String },
    #[error("algebraic loop among auxiliaries: {}", .cycle.join(" -> "))]
    AlgebraicLoop { cycle: Vec<String> },
    #[error("table `{table}` is invalid: {reason}")]
    InvalidTable { table: String, reason: String },
    #[error("`{variable}`: {reason}")]
    InvalidEquation { variable: String, reason: String },
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value {value} in `{variable}` at t = {time}")]
    NonFiniteValue {
        variable: String,
        time: f64,
        value: f64,
    },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("state has {got} values, model has {expected} stocks")]
    StateLength { expected: usize, got: usize },
    #[error("cannot read model definition: {0}")]
    Format(String),
}

/// Initial value of a stock: a literal or an expression over parameters,
/// tables and constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Initial {
    Value(f64),
    Expression(String),
}

impl From<f64> for Initial {
    fn from(v: f64) -> Self {
        Initial::Value(v)
    }
}

impl From<&str> for Initial {
    fn from(s: &str) -> Self {
        Initial::Expression(s.to_string())
    }
}

impl From<String> for Initial {
    fn from(s: String) -> Self {
        Initial::Expression(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockDef {
    pub name: String,
    pub initial: Initial,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxDef {
    pub name: String,
    pub equation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

/// A rate moving material out of `from` and into `to`. A missing end is
/// outside the model boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowDef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    pub rate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelDefinition {
    #[serde(rename = "stock", default)]
    pub stocks: Vec<StockDef>,
    #[serde(rename = "auxiliary", default)]
    pub auxiliaries: Vec<AuxDef>,
    #[serde(rename = "flow", default)]
    pub flows: Vec<FlowDef>,
    #[serde(rename = "parameter", default)]
    pub parameters: Vec<ParamDef>,
    #[serde(rename = "table", default)]
    pub tables: Vec<Table>,
}

impl ModelDefinition {
    pub fn from_toml_str(src: &str) -> Result<Self, EngineError> {
        toml::from_str(src).map_err(|e| EngineError::Format(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String, EngineError> {
        toml::to_string(self).map_err(|e| EngineError::Format(e.to_string()))
    }

    pub fn stock(&mut self, name: &str, initial: impl Into<Initial>) -> &mut Self {
        self.stocks.push(StockDef {
            name: name.to_string(),
            initial: initial.into(),
            units: None,
        });
        self
    }

    pub fn aux(&mut self, name: &str, equation: impl Into<String>) -> &mut Self {
        self.auxiliaries.push(AuxDef {
            name: name.to_string(),
            equation: equation.into(),
            units: None,
        });
        self
    }

    pub fn flow(
        &mut self,
        name: &str,
        from: Option<&str>,
        to: Option<&str>,
        rate: impl Into<String>,
    ) -> &mut Self {
        self.flows.push(FlowDef {
            name: name.to_string(),
            from: from.map(str::to_string),
            to: to.map(str::to_string),
            rate: rate.into(),
            units: None,
        });
        self
    }

    pub fn param(&mut self, name: &str, value: f64) -> &mut Self {
        self.parameters.push(ParamDef {
            name: name.to_string(),
            value,
            units: None,
        });
        self
    }

    pub fn table(&mut self, name: &str, points: Vec<[f64; 2]>) -> &mut Self {
        self.tables.push(Table::new(name, points));
        self
    }

    /// Names of every declared symbol, in declaration order by category.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.stocks
            .iter()
            .map(|s| s.name.as_str())
            .chain(self.auxiliaries.iter().map(|a| a.name.as_str()))
            .chain(self.flows.iter().map(|f| f.name.as_str()))
            .chain(self.parameters.iter().map(|p| p.name.as_str()))
            .chain(self.tables.iter().map(|t| t.name.as_str()))
    }
}

/// Simulation time axis in years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            start: 2015.0,
            end: 2100.0,
            step: 1.0,
        }
    }
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self, EngineError> {
        if !(start.is_finite() && end.is_finite() && step.is_finite()) {
            return Err(EngineError::InvalidGrid("bounds must be finite".into()));
        }
        if start >= end {
            return Err(EngineError::InvalidGrid(format!(
                "start {start} must precede end {end}"
            )));
        }
        if step <= 0.0 {
            return Err(EngineError::InvalidGrid(format!(
                "step {step} must be positive"
            )));
        }
        let n = (end - start) / step;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
            return Err(EngineError::InvalidGrid(format!(
                "span {} is not a multiple of step {step}",
                end - start
            )));
        }
        Ok(Self { start, end, step })
    }

    /// Number of integration steps.
    pub fn steps(&self) -> usize {
        ((self.end - self.start) / self.step).round() as usize
    }

    /// Number of grid points, both ends included.
    pub fn len(&self) -> usize {
        self.steps() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps() {
            self.end
        } else {
            self.start + k as f64 * self.step
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }

    /// Grid index of `t`, if `t` is a grid point.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = ((t - self.start) / self.step).round();
        if k < 0.0 || k as usize >= self.len() {
            return None;
        }
        let k = k as usize;
        ((self.time(k) - t).abs() <= 1e-9 * self.step).then_some(k)
    }
}
