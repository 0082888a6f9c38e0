use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Orders;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdentConfig {
    /// Breakpoint counts tried by the grid search.
    #[serde(rename = "breakpoints")]
    pub breakpoint_grid: Vec<usize>,
    pub orders: Vec<Orders>,
    pub max_iters: usize,
    #[serde(rename = "tol")]
    pub tol_rel_cost: f64,
    pub multistarts: usize,
    pub seed: u64,
    pub warmup_excluded: bool,
    /// Candidates within this many fit points of the best count as tied;
    /// ties go to the candidate with fewer parameters.
    pub tie_tol_pct: f64,
}

impl Default for IdentConfig {
    fn default() -> Self {
        IdentConfig {
            breakpoint_grid: (5..=10).collect(),
            orders: vec![Orders::default()],
            max_iters: 200,
            tol_rel_cost: 1e-6,
            multistarts: 8,
            seed: 0,
            warmup_excluded: true,
            tie_tol_pct: 0.1,
        }
    }
}

impl IdentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.breakpoint_grid.is_empty() || self.breakpoint_grid.iter().any(|k| !(2..=50).contains(k)) {
            return Err(Error::InvalidArgument("breakpoint grid must be non-empty and within [2, 50]".into()));
        }
        if self.orders.is_empty() {
            return Err(Error::InvalidArgument("orders grid is empty".into()));
        }
        for o in &self.orders {
            o.validate()?;
        }
        if self.multistarts == 0 {
            return Err(Error::InvalidArgument("need at least one multistart".into()));
        }
        if !(self.tol_rel_cost >= 0.0) || !(self.tie_tol_pct >= 0.0) {
            return Err(Error::InvalidArgument("tolerances must be non-negative".into()));
        }
        Ok(())
    }
}
