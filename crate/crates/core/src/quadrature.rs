//! Composite Gauss-Legendre rules over delivery windows.

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};

/// Node count and maximum segment length of a composite rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub nodes_per_segment: usize,
    pub max_segment_hours: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes_per_segment: 16, max_segment_hours: 24.0 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_segment < 2 {
            return Err(argument(format!(
                "nodes_per_segment must be at least 2, got {}",
                self.nodes_per_segment
            )));
        }
        if !(self.max_segment_hours > 0.0) {
            return Err(argument(format!(
                "max_segment_hours must be positive, got {}",
                self.max_segment_hours
            )));
        }
        Ok(())
    }

    /// The same segmentation with twice the nodes.
    pub fn refined(&self, factor: usize) -> Self {
        Self { nodes_per_segment: self.nodes_per_segment * factor, ..*self }
    }
}

fn rule(n: usize) -> Result<GaussLegendre> {
    GaussLegendre::new(n).map_err(|e| argument(e.to_string()))
}

/// Integrates `f` over `[a, b]` with a single `n`-node Gauss-Legendre rule.
pub fn gauss_legendre(n: usize, a: f64, b: f64, f: impl FnMut(f64) -> f64) -> Result<f64> {
    Ok(rule(n)?.integrate(a, b, f))
}

/// Nodes and absolute weights of a composite rule on `[tau1, tau2]`.
///
/// The window is split at every breakpoint strictly inside it, then each
/// piece is cut into equal segments no longer than `max_segment_hours`.
#[derive(Debug, Clone)]
pub struct DeliveryQuadrature {
    tau1: f64,
    tau2: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl DeliveryQuadrature {
    pub fn new(tau1: f64, tau2: f64, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        if !(tau1.is_finite() && tau2.is_finite() && tau1 < tau2) {
            return Err(argument(format!("delivery window needs tau1 < tau2, got [{tau1}, {tau2}]")));
        }
        let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > tau1 && b < tau2).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(tau1);
        edges.extend(cuts);
        edges.push(tau2);

        let gl = rule(spec.nodes_per_segment)?;
        let pairs = gl.as_node_weight_pairs();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for piece in edges.windows(2) {
            let (lo, hi) = (piece[0], piece[1]);
            let count = ((hi - lo) / spec.max_segment_hours).ceil().max(1.0) as usize;
            let h = (hi - lo) / count as f64;
            for k in 0..count {
                let a = lo + k as f64 * h;
                let b = if k + 1 == count { hi } else { a + h };
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                for &(x, w) in pairs {
                    nodes.push(mid + half * x);
                    weights.push(half * w);
                }
            }
        }
        Ok(Self { tau1, tau2, nodes, weights })
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    pub fn length(&self) -> f64 {
        self.tau2 - self.tau1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&u, &w)| w * f(u)).sum()
    }

    pub fn try_integrate(&self, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
        let mut total = 0.0;
        for (&u, &w) in self.nodes.iter().zip(&self.weights) {
            total += w * f(u)?;
        }
        Ok(total)
    }

    /// Weighted sum of already evaluated integrand values at the nodes.
    pub fn sum(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let q = DeliveryQuadrature::new(0.0, 3.0, &[], &QuadratureSpec { nodes_per_segment: 4, max_segment_hours: 10.0 }).unwrap();
        let exact = 3.0f64.powi(8) / 8.0;
        assert!((q.integrate(|x| x.powi(7)) - exact).abs() < 1e-10 * exact);
        assert!((q.weights().iter().sum::<f64>() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn splits_at_breakpoints() {
        let q = DeliveryQuadrature::new(0.0, 24.0, &[-5.0, 12.0, 12.0, 30.0], &QuadratureSpec::default()).unwrap();
        assert_eq!(q.len(), 32);
        let step = q.integrate(|u| if u < 12.0 { 30.0 } else { 50.0 });
        assert!((step - 960.0).abs() < 1e-10);
    }

    #[test]
    fn respects_max_segment() {
        let spec = QuadratureSpec { nodes_per_segment: 8, max_segment_hours: 10.0 };
        let q = DeliveryQuadrature::new(0.0, 25.0, &[], &spec).unwrap();
        assert_eq!(q.len(), 24);
        let exact = 10.0 * (1.0 - (-2.5f64).exp());
        assert!((q.integrate(|u| (-u / 10.0).exp()) - exact).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(DeliveryQuadrature::new(1.0, 1.0, &[], &QuadratureSpec::default()).is_err());
        let spec = QuadratureSpec { nodes_per_segment: 1, max_segment_hours: 1.0 };
        assert!(DeliveryQuadrature::new(0.0, 1.0, &[], &spec).is_err());
    }
}
