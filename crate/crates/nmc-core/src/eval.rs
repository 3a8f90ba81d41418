//! Interchangeable NMC evaluation strategies behind a name-keyed registry.
//!
//! Three routes compute the same quantity: the graph-kernel form for
//! bands, ray casting of the set definition for every shape, and the
//! boundary-integral form for closed shapes. Each sits behind
//! [`NmcStrategy`] so callers pick a route by name at runtime; the
//! verification suites and the CLI's `set-eval` lean on cross-route
//! agreement rather than trusting any single implementation.

use crate::error::{NmcError, Result};
use crate::graph;
use crate::kernels::KernelContext;
use crate::quad::QuadratureConfig;
use crate::setgeom::{self, PlanarSet};

/// One way of evaluating nonlocal mean curvature on a [`PlanarSet`].
///
/// `t` is the shape's boundary parameter: the angle parameter for discs
/// and ellipses, the horizontal coordinate (upper boundary) for bands.
pub trait NmcStrategy {
    /// Registry key, stable across versions.
    fn name(&self) -> &'static str;

    /// One-line summary for usage listings.
    fn summary(&self) -> &'static str;

    /// Whether this route is defined for the shape at all.
    fn supports(&self, set: &PlanarSet) -> bool;

    /// NMC at the boundary point `set.boundary_point(t)`.
    fn evaluate(
        &self,
        alpha: f64,
        set: &PlanarSet,
        t: f64,
        cfg: &QuadratureConfig,
    ) -> Result<f64>;
}

struct GraphKernel;

impl NmcStrategy for GraphKernel {
    fn name(&self) -> &'static str {
        "graph"
    }

    fn summary(&self) -> &'static str {
        "graph-kernel form for straight and graph bands"
    }

    fn supports(&self, set: &PlanarSet) -> bool {
        matches!(
            set,
            PlanarSet::StraightBand { .. } | PlanarSet::GraphBand { .. }
        )
    }

    fn evaluate(
        &self,
        alpha: f64,
        set: &PlanarSet,
        t: f64,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        match set {
            PlanarSet::StraightBand { half_width } => {
                let ctx = KernelContext::new(alpha, *half_width)?;
                graph::straight_band_h(&ctx, cfg)
            }
            PlanarSet::GraphBand { profile } => {
                let ctx = KernelContext::new(alpha, 1.0)?;
                graph::nmc_of_graph(&ctx, profile, t, cfg)
            }
            _ => Err(NmcError::InvalidParameter(
                "the graph route applies to bands only".into(),
            )),
        }
    }
}

struct SetRays;

impl NmcStrategy for SetRays {
    fn name(&self) -> &'static str {
        "set"
    }

    fn summary(&self) -> &'static str {
        "paired-ray casting of the set definition, any shape"
    }

    fn supports(&self, _set: &PlanarSet) -> bool {
        true
    }

    fn evaluate(
        &self,
        alpha: f64,
        set: &PlanarSet,
        t: f64,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        let ctx = KernelContext::new(alpha, 1.0)?;
        let (x, _) = set.boundary_point(t);
        setgeom::nmc_of_set(&ctx, set, x, cfg)
    }
}

struct BoundaryForm;

impl NmcStrategy for BoundaryForm {
    fn name(&self) -> &'static str {
        "boundary"
    }

    fn summary(&self) -> &'static str {
        "boundary-integral form for discs and ellipses"
    }

    fn supports(&self, set: &PlanarSet) -> bool {
        matches!(set, PlanarSet::Disc { .. } | PlanarSet::Ellipse { .. })
    }

    fn evaluate(
        &self,
        alpha: f64,
        set: &PlanarSet,
        t: f64,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        let ctx = KernelContext::new(alpha, 1.0)?;
        let (x, _) = set.boundary_point(t);
        setgeom::nmc_boundary_form(&ctx, set, x, cfg)
    }
}

/// Name-keyed set of [`NmcStrategy`] implementations.
pub struct StrategyRegistry {
    entries: Vec<Box<dyn NmcStrategy>>,
}

impl StrategyRegistry {
    /// Registry with the three built-in routes.
    pub fn builtin() -> Self {
        let mut reg = StrategyRegistry {
            entries: Vec::new(),
        };
        reg.register(Box::new(GraphKernel)).unwrap();
        reg.register(Box::new(SetRays)).unwrap();
        reg.register(Box::new(BoundaryForm)).unwrap();
        reg
    }

    /// Adds a strategy; names must be unique.
    pub fn register(&mut self, strategy: Box<dyn NmcStrategy>) -> Result<()> {
        if self.get(strategy.name()).is_some() {
            return Err(NmcError::InvalidParameter(format!(
                "strategy {:?} is already registered",
                strategy.name()
            )));
        }
        self.entries.push(strategy);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&dyn NmcStrategy> {
        self.entries
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
    }

    /// Registered names in registration order.
    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|s| s.name()).collect()
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        StrategyRegistry::builtin()
    }
}
