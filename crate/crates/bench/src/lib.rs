//! Fixtures shared by the solver benchmarks.

use stark_core::operators::{assemble_model_1d, assemble_window_2d, WindowParams};
use stark_core::{
    build_domain, DiscreteOperator, DomainSpec, EdgeCondition, LimitParams, Regime, Result,
    TubularMap,
};

/// Half-line Airy model on (0, 40) with `n` intervals.
pub fn airy_model(n: usize) -> Result<DiscreteOperator> {
    assemble_model_1d(40.0, n, EdgeCondition::Dirichlet, |_| 0.0)
}

/// Dirichlet window operator of the unit disk at `h`, resolving the first-regime
/// threshold with `μ = mu`, and that threshold.
pub fn disk_window(h: f64, mu: f64) -> Result<(DiscreteOperator, f64)> {
    let map = TubularMap::new(build_domain(&DomainSpec::unit_disk())?)?;
    let lambda = LimitParams::new(0.0, mu, 1.0).threshold(Regime::First, h)?;
    let mut p = WindowParams::new(h);
    p.spectral_top = mu + 0.5;
    Ok((assemble_window_2d(&map, &p)?, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert!(airy_model(400).unwrap().matrix().n() > 300);
        let (op, lambda) = disk_window(0.08, 4.0).unwrap();
        assert!(op.matrix().n() > 1000 && lambda > 0.0);
    }
}
