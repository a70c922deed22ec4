//! Search strategies and the name-keyed registry the driver selects from.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use crate::arc_search::ArcSearch;
use crate::ipm_kernel::KernelError;
use crate::mehrotra_search::MehrotraSearch;
use crate::model::{Direction, Iterate};

/// The part of an iteration that differs between methods: how far to move
/// along the two derivative directions, and how to move.
pub trait SearchStrategy: Send + Sync + Debug {
    fn name(&self) -> &'static str;

    /// Unscaled maximal step lengths `(α_x, α_s)` keeping `x` and `s` nonnegative.
    fn step_lengths(
        &self,
        it: &Iterate,
        dir1: &Direction,
        dir2: &Direction,
    ) -> Result<(f64, f64), KernelError>;

    fn update(
        &self,
        it: &Iterate,
        dir1: &Direction,
        dir2: &Direction,
        alpha_x: f64,
        alpha_s: f64,
    ) -> Result<Iterate, KernelError>;

    /// Factor by which a step of length `alpha` shrinks the linear residuals.
    fn residual_factor(&self, alpha: f64) -> f64;
}

#[derive(Debug, Clone, Default)]
pub struct StrategyRegistry {
    entries: BTreeMap<String, Arc<dyn SearchStrategy>>,
}

impl StrategyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding `arc` and `mehrotra`.
    pub fn with_defaults() -> Self {
        let mut r = Self::new();
        r.register(Arc::new(ArcSearch));
        r.register(Arc::new(MehrotraSearch));
        r
    }

    /// Returns the strategy previously registered under the same name, if any.
    pub fn register(
        &mut self,
        strategy: Arc<dyn SearchStrategy>,
    ) -> Option<Arc<dyn SearchStrategy>> {
        self.entries.insert(strategy.name().to_string(), strategy)
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn SearchStrategy>> {
        self.entries.get(name).cloned()
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}
