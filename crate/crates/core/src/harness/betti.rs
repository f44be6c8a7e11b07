use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bundled Betti numbers of a path space, with where they come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiTable {
    pub scenario: String,
    /// Coefficient field: `Z`, `Z2` or `Zp`.
    pub field: String,
    /// `ranks[k]` is the rank in degree `k`.
    pub ranks: Vec<usize>,
    pub provenance: String,
}

impl BettiTable {
    fn new(scenario: &str, field: &str, ranks: &[usize], provenance: &str) -> Self {
        Self {
            scenario: scenario.into(),
            field: field.into(),
            ranks: ranks.to_vec(),
            provenance: provenance.into(),
        }
    }

    pub fn rank(&self, degree: usize) -> usize {
        self.ranks.get(degree).copied().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.ranks.len().saturating_sub(1)
    }
}

/// Counts, by index, the geodesics of a one-parameter family of lengths
/// `first + period·j` and `period·(j+1) − first`, where every crossing of a
/// multiple of `spacing` adds `step` to the index.
fn enumerate_family(first: f64, period: f64, spacing: f64, step: usize, max_degree: usize) -> Vec<usize> {
    let mut ranks = vec![0; max_degree + 1];
    let mut j = 0usize;
    loop {
        let lens = [first + period * j as f64, period * (j as f64 + 1.0) - first];
        let mut any = false;
        for l in lens {
            let idx = (l / spacing).floor() as usize * step;
            if idx <= max_degree {
                ranks[idx] += 1;
                any = true;
            }
        }
        if !any {
            return ranks;
        }
        j += 1;
    }
}

fn parse_degree(id: &str, rest: &str) -> Result<usize> {
    rest.parse::<usize>()
        .map_err(|_| Error::Lookup(format!("bad degree bound in scenario id `{id}`")))
}

/// Reference table for a known scenario id.
///
/// Known ids: `omega-s{n}:{k}` (loop space of the round `n`-sphere up to
/// degree `k`), `hopf-fiber-s3:{k}`, `circle-r2`, `sphere-s{n}-r{n+1}`,
/// `hyperplane-r{n}`, `lens-{p}-{q}:zp`, `lens-{p}-{q}:z2`.
pub fn reference_betti(id: &str) -> Result<BettiTable> {
    let unknown = || Error::Lookup(format!("unknown scenario id `{id}`"));
    if let Some(rest) = id.strip_prefix("omega-s") {
        let (n, k) = rest.split_once(':').ok_or_else(unknown)?;
        let n: usize = n.parse().map_err(|_| unknown())?;
        if n < 2 {
            return Err(unknown());
        }
        let k = parse_degree(id, k)?;
        // generic endpoint at distance 1: lengths 1 + 2πj and 2π(j+1) − 1
        let ranks = enumerate_family(1.0, 2.0 * PI, PI, n - 1, k);
        return Ok(BettiTable::new(
            id,
            "Z",
            &ranks,
            "great-circle enumeration: conjugate points at multiples of π, multiplicity n−1",
        ));
    }
    if let Some(k) = id.strip_prefix("hopf-fiber-s3:") {
        let k = parse_degree(id, k)?;
        // great circle to a generic point at distance 0.5: lengths 0.5 + πj and π(j+1) − 0.5
        let ranks = enumerate_family(0.5, PI, PI / 2.0, 1, k);
        return Ok(BettiTable::new(
            id,
            "Z",
            &ranks,
            "great-circle enumeration: focal points of a great circle at multiples of π/2, multiplicity 1",
        ));
    }
    if id == "circle-r2" {
        return Ok(BettiTable::new(
            id,
            "Z",
            &[1, 1],
            "segments retract: Betti numbers of the circle",
        ));
    }
    if let Some(rest) = id.strip_prefix("sphere-s") {
        let (n, m) = rest.split_once("-r").ok_or_else(unknown)?;
        let n: usize = n.parse().map_err(|_| unknown())?;
        let m: usize = m.parse().map_err(|_| unknown())?;
        if n == 0 || m != n + 1 {
            return Err(unknown());
        }
        let mut ranks = vec![0; n + 1];
        ranks[0] = 1;
        ranks[n] = 1;
        return Ok(BettiTable::new(id, "Z", &ranks, "segments retract: Betti numbers of the sphere"));
    }
    if let Some(n) = id.strip_prefix("hyperplane-r") {
        n.parse::<usize>().map_err(|_| unknown())?;
        return Ok(BettiTable::new(id, "Z", &[1], "segments retract: contractible leaf"));
    }
    if let Some(rest) = id.strip_prefix("lens-") {
        let (pq, field) = rest.split_once(':').ok_or_else(unknown)?;
        let (p, q) = pq.split_once('-').ok_or_else(unknown)?;
        let p: u64 = p.parse().map_err(|_| unknown())?;
        let q: u64 = q.parse().map_err(|_| unknown())?;
        if p < 2 || gcd(p, q) != 1 {
            return Err(unknown());
        }
        return match field {
            "zp" => Ok(BettiTable::new(id, "Zp", &[1, 1, 1, 1], "transcribed: H_k(L(p,q); Z_p) = Z_p, k = 0..3")),
            "z2" if p % 2 == 1 => Ok(BettiTable::new(
                id,
                "Z2",
                &[1, 0, 0, 1],
                "transcribed: H_2(L(p,q); Z_2) = 0 for odd p; H_1 by universal coefficients",
            )),
            "z2" => Ok(BettiTable::new(id, "Z2", &[1, 1, 1, 1], "universal coefficients for even p")),
            _ => Err(unknown()),
        };
    }
    Err(unknown())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
