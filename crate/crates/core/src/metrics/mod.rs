//! Monge–Kantorovich distances, unit-pivot bridges, propinquity bound
//! certificates and quantum-isometry verification.

pub mod bridge;
pub mod chain;
pub mod isometry;
pub mod kantorovich;

pub use bridge::{beta_bound_certificate, bridge_seminorm, rescaling_bridge_bound, BridgeLeg, UnitPivotBridge};
pub use chain::{propinquity_chain_bound, ChainBound, EffrosShenFamily};
pub use isometry::{relabel_tower, verify_quantum_isometry, IsometryMap};
pub use kantorovich::{diameter_upper_bound, kantorovich_commutative_exact, kantorovich_lower_bound, KantorovichEstimate};

use crate::seminorms::LipSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Whether a bound follows from machine-checked hypotheses or only from
/// sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BoundLabel {
    Certified,
    Empirical,
}

/// One sampled instance `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`; the instance holds when this is at most the tolerance.
    pub residual: f64,
}

/// A pass/fail structural check recorded alongside the witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Record of an inequality instance with everything needed to re-check it.
///
/// Invariant: `verified` holds iff every check passed and every witness
/// residual is at most `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCertificate {
    pub kind: String,
    pub label: BoundLabel,
    pub bound: f64,
    /// Exact rational form of `bound` when it has one.
    pub bound_exact: Option<String>,
    pub verified: bool,
    pub witness_count: usize,
    pub worst_residual: Option<f64>,
    pub seed: u64,
    pub tolerance: f64,
    /// SHA-256 of the canonical input description.
    pub digest: String,
    pub checks: Vec<Check>,
    pub witnesses: Vec<Witness>,
}

impl MetricCertificate {
    pub(crate) fn assemble(
        kind: &str,
        label: BoundLabel,
        bound: f64,
        bound_exact: Option<String>,
        seed: u64,
        tolerance: f64,
        inputs: &str,
        checks: Vec<Check>,
        witnesses: Vec<Witness>,
    ) -> Self {
        let worst_residual = witnesses.iter().map(|w| w.residual).fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
        let mut cert = MetricCertificate {
            kind: kind.to_string(),
            label,
            bound,
            bound_exact,
            verified: false,
            witness_count: witnesses.len(),
            worst_residual,
            seed,
            tolerance,
            digest: digest(inputs),
            checks,
            witnesses,
        };
        cert.verified = cert.recheck();
        cert
    }

    /// Re-evaluates `verified` from the stored checks and witnesses.
    pub fn recheck(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
            && self.witness_count == self.witnesses.len()
            && self.witnesses.iter().all(|w| w.lhs - w.rhs == w.residual && w.residual <= self.tolerance)
    }

    /// Name of the first failed check, if any.
    pub fn rejected_at(&self) -> Option<&str> {
        self.checks.iter().find(|c| !c.passed).map(|c| c.name.as_str())
    }
}

pub(crate) fn witness(index: usize, inequality: &str, lhs: f64, rhs: f64) -> Witness {
    Witness { index, inequality: inequality.to_string(), lhs, rhs, residual: lhs - rhs }
}

pub(crate) fn digest(inputs: &str) -> String {
    hex::encode(Sha256::digest(inputs.as_bytes()))
}

/// Canonical text for a spec: shapes, steps, kind, trace bits and exact β.
pub(crate) fn spec_fingerprint(spec: &LipSpec) -> String {
    let t = spec.tower();
    let levels: Vec<&[usize]> = t.levels().iter().map(|s| s.dims()).collect();
    let trace: Vec<String> = spec.trace().map(|w| w.lambda().iter().map(|l| format!("{:016x}", l.to_bits())).collect()).unwrap_or_default();
    let beta: Vec<String> = spec.beta().beta().iter().map(|b| b.to_string()).collect();
    format!("levels={levels:?};steps={:?};kind={};trace={trace:?};beta={beta:?}", t.step_matrices(), spec.kind().as_str())
}
