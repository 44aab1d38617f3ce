use serde::Serialize;

use super::{Configuration, CountingMachine, ExtendedConfiguration};

/// One JSON line of a run trace.
#[derive(Clone, Debug, Serialize)]
pub struct TraceLine {
    pub step: u64,
    pub kind: String,
    pub k: usize,
    /// Counter per bound variable.
    #[serde(rename = "C")]
    pub counters: serde_json::Map<String, serde_json::Value>,
    /// Number of valid subformulas.
    #[serde(rename = "F")]
    pub valid: usize,
    /// Residual variables.
    #[serde(rename = "D")]
    pub residual: Vec<String>,
    /// `R` per subformula in canonical order, one bit per node.
    #[serde(rename = "R")]
    pub results: Vec<String>,
    /// `S` per subformula in canonical order.
    #[serde(rename = "S")]
    pub stable: Vec<String>,
}

impl CountingMachine<'_> {
    pub fn trace_line(&self, step: u64, kind: &str, kappa: &Configuration, residual: &[String]) -> TraceLine {
        let vars = self.idx.vars();
        TraceLine {
            step,
            kind: kind.to_owned(),
            k: kappa.k,
            counters: vars.iter().zip(&kappa.counters).map(|(x, &c)| (x.clone(), c.into())).collect(),
            valid: kappa.valid.count_ones(..),
            residual: residual.to_vec(),
            results: kappa.results.iter().map(|s| s.bit_string()).collect(),
            stable: kappa.stable.iter().map(|s| s.bit_string()).collect(),
        }
    }

    pub fn trace_line_extended(&self, step: u64, kind: &str, x: &ExtendedConfiguration) -> TraceLine {
        let d: Vec<String> = x.residual.ones().map(|v| self.idx.var_name(v).to_owned()).collect();
        self.trace_line(step, kind, &x.config, &d)
    }
}
