use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::betti::BettiTable;
use super::shooting::{shoot_critical_points, CriticalPoint, ShootingOptions};
use crate::error::{Error, Result};
use crate::geometry::SubmanifoldPatch;

/// Focal times closer than this to the endpoint make the target non-generic.
pub const GENERIC_MARGIN: f64 = 1e-4;
/// Energy margin of the reliable-degree rule, as a fraction of the cap.
pub const CAP_MARGIN: f64 = 0.05;

/// Counting polynomial: `coefficients[k]` critical points of index `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorsePolynomial {
    pub coefficients: Vec<usize>,
    pub generic: bool,
    /// Positions of degenerate critical points in the input list.
    pub degenerate: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Perfect {
        reliable_degree: Option<usize>,
    },
    Mismatch {
        degrees: Vec<usize>,
        reliable_degree: Option<usize>,
        hint: Option<String>,
    },
}

impl Verdict {
    pub fn is_perfect(&self) -> bool {
        matches!(self, Verdict::Perfect { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseReport {
    pub target: Vec<f64>,
    pub cap: f64,
    pub seeds: usize,
    pub converged: usize,
    pub duplicates_collapsed: usize,
    pub failed_seeds: usize,
    pub critical_points: Vec<CriticalPoint>,
    pub polynomial: MorsePolynomial,
    pub reference: Option<BettiTable>,
    pub verdict: Option<Verdict>,
    pub diagnostic: Option<String>,
}

fn degenerate(cp: &CriticalPoint) -> bool {
    cp.nullity > 0 || cp.focal.iter().any(|r| (r.time - 1.0).abs() <= GENERIC_MARGIN)
}

pub fn morse_polynomial(criticals: &[CriticalPoint]) -> MorsePolynomial {
    let top = criticals.iter().map(|c| c.index).max();
    let mut coefficients = vec![0; top.map_or(0, |k| k + 1)];
    for c in criticals {
        coefficients[c.index] += 1;
    }
    let degenerate: Vec<usize> = criticals
        .iter()
        .enumerate()
        .filter(|(_, c)| degenerate(c))
        .map(|(i, _)| i)
        .collect();
    MorsePolynomial {
        generic: degenerate.is_empty(),
        coefficients,
        degenerate,
    }
}

/// Largest `k` such that every found critical point of index `≤ k` has
/// energy at most `cap·(1 − margin)`.
pub fn reliable_degree(criticals: &[CriticalPoint], cap: f64) -> Option<usize> {
    let top = criticals.iter().map(|c| c.index).max()?;
    let bound = cap * (1.0 - CAP_MARGIN);
    (0..=top)
        .rev()
        .find(|&k| criticals.iter().filter(|c| c.index <= k).all(|c| c.energy <= bound))
}

/// Degree-wise comparison of the counting polynomial with the reference.
///
/// Mismatches above the reliable degree carry a "cap too low" hint.
pub fn perfectness_verdict(report: &MorseReport) -> Result<Verdict> {
    if !report.polynomial.generic {
        return Err(Error::Precondition(
            "non-generic target: some critical point is degenerate or has a focal time near the endpoint".into(),
        ));
    }
    let reference = report
        .reference
        .as_ref()
        .ok_or_else(|| Error::Precondition("no reference Betti table attached".into()))?;
    let reliable = reliable_degree(&report.critical_points, report.cap);
    let count = |d: usize| report.polynomial.coefficients.get(d).copied().unwrap_or(0);
    let degrees: Vec<usize> = (0..=reference.max_degree())
        .filter(|&d| count(d) != reference.rank(d))
        .collect();
    if degrees.is_empty() {
        return Ok(Verdict::Perfect { reliable_degree: reliable });
    }
    let beyond = degrees.iter().any(|&d| reliable.is_none_or(|r| d > r));
    Ok(Verdict::Mismatch {
        degrees,
        reliable_degree: reliable,
        hint: beyond.then(|| "cap too low".to_string()),
    })
}

/// Shoots, counts and, for generic targets with a reference, decides.
pub fn morse_report(
    patch: &SubmanifoldPatch<f64>,
    target: &DVector<f64>,
    cap: f64,
    opts: &ShootingOptions,
    reference: Option<BettiTable>,
) -> Result<MorseReport> {
    let shot = shoot_critical_points(patch, target, cap, opts)?;
    let polynomial = morse_polynomial(&shot.critical_points);
    let mut report = MorseReport {
        target: target.iter().copied().collect(),
        cap,
        seeds: shot.seeds,
        converged: shot.converged,
        duplicates_collapsed: shot.duplicates_collapsed,
        failed_seeds: shot.failures.len(),
        critical_points: shot.critical_points,
        polynomial,
        reference,
        verdict: None,
        diagnostic: None,
    };
    if report.reference.is_some() {
        match perfectness_verdict(&report) {
            Ok(v) => report.verdict = Some(v),
            Err(e) => report.diagnostic = Some(e.to_string()),
        }
    }
    Ok(report)
}
