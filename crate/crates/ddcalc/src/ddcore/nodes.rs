use crate::error::{DdError, Result};

/// An ordered multiset of real nodes with multiplicities — the argument of
/// every divided difference.
///
/// Construction sorts the entries ascending and coalesces values that fall
/// within the relative tolerance of each other (the recursion divides by node
/// gaps and is unstable for near-coincident nodes; the tableau with derivative
/// seeding is not). The representative of a coalesced group is the
/// multiplicity-weighted mean, which keeps construction deterministic under
/// permutation of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSystem {
    entries: Vec<(f64, usize)>,
}

impl NodeSystem {
    /// Default relative coalescing tolerance.
    pub const DEFAULT_COALESCE_TOL: f64 = 1e-8;

    pub fn new(entries: &[(f64, usize)]) -> Result<Self> {
        Self::with_tolerance(entries, Self::DEFAULT_COALESCE_TOL)
    }

    pub fn with_tolerance(entries: &[(f64, usize)], tol: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(DdError::Precondition(
                "node system must have at least one entry".into(),
            ));
        }
        let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(entries.len());
        for &(v, m) in entries {
            if !v.is_finite() {
                return Err(DdError::Domain(format!("non-finite node value {v}")));
            }
            if m == 0 {
                return Err(DdError::Precondition("multiplicity must be >= 1".into()));
            }
            sorted.push((v, m));
        }
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // Coalesce clusters of nearby values into one entry with summed
        // multiplicity; the representative is the weighted mean.
        let mut out: Vec<(f64, usize)> = Vec::with_capacity(sorted.len());
        let mut cluster: Vec<(f64, usize)> = vec![sorted[0]];
        let close = |a: f64, b: f64| (a - b).abs() <= tol * f64::max(1.0, f64::max(a.abs(), b.abs()));
        for &(v, m) in &sorted[1..] {
            if close(v, cluster.last().unwrap().0) {
                cluster.push((v, m));
            } else {
                out.push(Self::collapse(&cluster));
                cluster = vec![(v, m)];
            }
        }
        out.push(Self::collapse(&cluster));
        Ok(NodeSystem { entries: out })
    }

    fn collapse(cluster: &[(f64, usize)]) -> (f64, usize) {
        let total: usize = cluster.iter().map(|e| e.1).sum();
        let mean = cluster.iter().map(|e| e.0 * e.1 as f64).sum::<f64>() / total as f64;
        (mean, total)
    }

    /// All multiplicities one.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let entries: Vec<(f64, usize)> = values.iter().map(|&v| (v, 1)).collect();
        Self::new(&entries)
    }

    pub fn single(value: f64) -> Result<Self> {
        Self::new(&[(value, 1)])
    }

    pub fn entries(&self) -> &[(f64, usize)] {
        &self.entries
    }

    /// Order n = (Σ multiplicities) − 1.
    pub fn order(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum::<usize>() - 1
    }

    /// The expanded tuple (u_0, …, u_n), with all copies of a value adjacent.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.order() + 1);
        for &(v, m) in &self.entries {
            out.extend(std::iter::repeat(v).take(m));
        }
        out
    }

    pub fn is_simple(&self) -> bool {
        self.entries.iter().all(|e| e.1 == 1)
    }

    pub fn max_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.1).max().unwrap()
    }

    pub fn min_value(&self) -> f64 {
        self.entries.first().unwrap().0
    }

    pub fn max_value(&self) -> f64 {
        self.entries.last().unwrap().0
    }

    /// The union of two node systems (multiplicities add where values merge).
    pub fn merge(&self, other: &NodeSystem) -> Result<NodeSystem> {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        NodeSystem::new(&entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_invariants() {
        let ns = NodeSystem::new(&[(2.0, 1), (1.0, 2)]).unwrap();
        assert_eq!(ns.order(), 2);
        assert_eq!(ns.flat(), vec![1.0, 1.0, 2.0]);
        assert!(!ns.is_simple());
    }

    #[test]
    fn coalesces_close_values() {
        let ns = NodeSystem::new(&[(1.0, 1), (1.0 + 1e-12, 1), (2.0, 1)]).unwrap();
        assert_eq!(ns.entries().len(), 2);
        assert_eq!(ns.entries()[0].1, 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(NodeSystem::new(&[]).is_err());
        assert!(NodeSystem::new(&[(f64::NAN, 1)]).is_err());
        assert!(NodeSystem::new(&[(1.0, 0)]).is_err());
    }

    #[test]
    fn merge_adds_multiplicities() {
        let a = NodeSystem::new(&[(1.0, 2)]).unwrap();
        let b = NodeSystem::new(&[(1.0, 1), (3.0, 1)]).unwrap();
        let m = a.merge(&b).unwrap();
        assert_eq!(m.entries(), &[(1.0, 3), (3.0, 1)]);
    }
}
