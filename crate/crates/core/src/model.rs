//! The hopping model on H(d,q): single-particle energies, degeneracies and the Fermi sea.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{big_ln, binomial_exact, krawtchouk_integer_column, LogWeight};

/// The Hamming graph H(d,q): q-ary tuples of length d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphSpec {
    pub d: u32,
    pub q: u32,
}

impl GraphSpec {
    pub fn new(d: u32, q: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpec("d must be at least 1".into()));
        }
        if q < 2 {
            return Err(Error::InvalidSpec(format!("q = {q} must be at least 2")));
        }
        Ok(Self { d, q })
    }

    pub fn vertex_count(&self) -> BigUint {
        num_traits::pow(BigUint::from(self.q), self.d as usize)
    }

    pub fn ln_vertex_count(&self) -> f64 {
        f64::from(self.d) * f64::from(self.q).ln()
    }

    /// Number of vertices at distance `i` from a fixed vertex, `C(d,i)(q-1)^i`.
    pub fn neighborhood_size(&self, i: u32) -> BigUint {
        if i > self.d {
            return BigUint::zero();
        }
        binomial_exact(i64::from(self.d), i64::from(i))
            * num_traits::pow(BigUint::from(self.q - 1), i as usize)
    }

    /// Adjacency eigenvalue `ω_k = kq - d`.
    pub fn omega(&self, k: u32) -> i64 {
        i64::from(k) * i64::from(self.q) - i64::from(self.d)
    }

    /// Degeneracy `D_k = C(d,k)(q-1)^(d-k)` of `ω_k`.
    pub fn degeneracy(&self, k: u32) -> BigUint {
        if k > self.d {
            return BigUint::zero();
        }
        binomial_exact(i64::from(self.d), i64::from(k))
            * num_traits::pow(BigUint::from(self.q - 1), (self.d - k) as usize)
    }

    pub(crate) fn check_level(&self, what: &str, k: u32) -> Result<()> {
        if k > self.d {
            Err(Error::Domain(format!("{what} = {k} exceeds d = {}", self.d)))
        } else {
            Ok(())
        }
    }
}

/// Hopping amplitudes `α_0..α_d`, indexed by Hamming distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    alpha: Vec<f64>,
}

impl Couplings {
    pub fn new(spec: GraphSpec, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != spec.d as usize + 1 {
            return Err(Error::InvalidSpec(format!(
                "expected {} couplings, got {}",
                spec.d + 1,
                alpha.len()
            )));
        }
        if let Some(bad) = alpha.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidSpec(format!("non-finite coupling {bad}")));
        }
        Ok(Self { alpha })
    }

    /// `α_0` on-site, `α_1` nearest neighbour, zero beyond.
    pub fn nearest_neighbor(spec: GraphSpec, a0: f64, a1: f64) -> Result<Self> {
        let mut alpha = vec![0.0; spec.d as usize + 1];
        alpha[0] = a0;
        alpha[1] = a1;
        Self::new(spec, alpha)
    }

    /// `α_0` on-site and `α_i = exp(-c i)` for `i >= 1`.
    pub fn exponential(spec: GraphSpec, c: f64, a0: f64) -> Result<Self> {
        let alpha = (0..=spec.d)
            .map(|i| if i == 0 { a0 } else { (-c * f64::from(i)).exp() })
            .collect();
        Self::new(spec, alpha)
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
}

/// A sorted set of levels or distances in `0..=d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LevelSet(BTreeSet<u32>);

impl LevelSet {
    pub fn new<I: IntoIterator<Item = u32>>(levels: I) -> Self {
        Self(levels.into_iter().collect())
    }

    /// `{0, 1, ..., k0}`.
    pub fn up_to(k0: u32) -> Self {
        Self((0..=k0).collect())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, k: u32) -> bool {
        self.0.contains(&k)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn max(&self) -> Option<u32> {
        self.0.last().copied()
    }

    /// `Some(k0)` when the set is exactly `{0..k0}`.
    pub fn contiguous_top(&self) -> Option<u32> {
        let max = self.max()?;
        (self.0.len() == max as usize + 1).then_some(max)
    }

    pub fn complement(&self, d: u32) -> Self {
        Self((0..=d).filter(|k| !self.0.contains(k)).collect())
    }

    pub fn validate(&self, spec: &GraphSpec, what: &str) -> Result<()> {
        match self.max() {
            Some(m) if m > spec.d => Err(Error::Domain(format!(
                "{what} contains {m}, beyond d = {}",
                spec.d
            ))),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for LevelSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromIterator<u32> for LevelSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        Self::new(iter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticleSpectrum {
    pub spec: GraphSpec,
    /// Adjacency eigenvalues `kq - d`.
    pub omega: Vec<i64>,
    /// Energies `Ω_k`.
    pub energy: Vec<f64>,
    /// Degeneracies `D_k`.
    pub degeneracy: Vec<BigUint>,
}

/// Occupied levels and the levels too close to zero energy to classify.
#[derive(Debug, Clone, PartialEq)]
pub struct FermiSea {
    pub levels: LevelSet,
    pub zero_modes: Vec<u32>,
}

/// `Ω_k = Σ_i α_i K̂_i(d-k)`, with the integer Krawtchouk values computed exactly
/// and the weighted sum carried out in log space.
pub fn single_particle_energies(spec: GraphSpec, c: &Couplings) -> SingleParticleSpectrum {
    let d = spec.d;
    let energy = (0..=d)
        .map(|k| {
            let column = krawtchouk_integer_column(d, d - k, spec.q, d);
            let terms = column.iter().zip(c.alpha()).map(|(kh, &a)| {
                LogWeight::from_bigint(kh) * LogWeight::from_f64(a)
            });
            LogWeight::sum(terms).to_f64()
        })
        .collect();
    SingleParticleSpectrum {
        spec,
        omega: (0..=d).map(|k| spec.omega(k)).collect(),
        energy,
        degeneracy: (0..=d).map(|k| spec.degeneracy(k)).collect(),
    }
}

pub fn fermi_sea(s: &SingleParticleSpectrum) -> FermiSea {
    let scale = s.energy.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let tol = 1e-12 * scale;
    let mut levels = Vec::new();
    let mut zero_modes = Vec::new();
    for (k, &e) in s.energy.iter().enumerate() {
        if e.abs() <= tol {
            zero_modes.push(k as u32);
        } else if e < 0.0 {
            levels.push(k as u32);
        }
    }
    FermiSea {
        levels: LevelSet::new(levels),
        zero_modes,
    }
}

/// Diagonal entry of the ground-state correlation projector, `Σ_{k∈SE} D_k / q^d`.
pub fn ground_state_correlation_weight(spec: GraphSpec, se: &LevelSet) -> Result<f64> {
    se.validate(&spec, "SE")?;
    if se.is_empty() {
        return Ok(0.0);
    }
    if se.len() == spec.d as usize + 1 {
        return Ok(1.0);
    }
    let ln_total = spec.ln_vertex_count();
    let w = LogWeight::sum(
        se.iter()
            .map(|k| LogWeight::from_ln(big_ln(&spec.degeneracy(k)) - ln_total)),
    );
    Ok(w.to_f64().clamp(0.0, 1.0))
}

/// Exact `Σ_k D_k`, equal to `q^d`.
pub fn total_degeneracy(spec: GraphSpec) -> BigUint {
    (0..=spec.d).map(|k| spec.degeneracy(k)).sum()
}

/// Exact integer `K̂_i(x)` table row for the energies; exposed for cross-checks.
pub fn energy_terms(spec: GraphSpec, k: u32) -> Vec<BigInt> {
    krawtchouk_integer_column(spec.d, spec.d - k, spec.q, spec.d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn energy_examples() {
        let s = GraphSpec::new(3, 2).unwrap();
        let c = Couplings::new(s, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let e = single_particle_energies(s, &c);
        assert!(close(&e.energy, &[-3.0, -1.0, 1.0, 3.0], 1e-12));
        assert_eq!(fermi_sea(&e).levels, LevelSet::new([0, 1]));

        let s = GraphSpec::new(2, 2).unwrap();
        let c = Couplings::new(s, vec![0.0, 0.5, 0.25]).unwrap();
        let e = single_particle_energies(s, &c);
        assert!(close(&e.energy, &[-0.75, -0.25, 1.25], 1e-12));
        assert_eq!(fermi_sea(&e).levels, LevelSet::new([0, 1]));

        let s = GraphSpec::new(1, 4).unwrap();
        let c = Couplings::new(s, vec![0.0, 1.0]).unwrap();
        let e = single_particle_energies(s, &c);
        assert!(close(&e.energy, &[-1.0, 3.0], 1e-12));
    }

    #[test]
    fn empty_sea_and_zero_modes() {
        let s = GraphSpec::new(2, 2).unwrap();
        let c = Couplings::new(s, vec![5.0, 1.0, 0.0]).unwrap();
        let fs = fermi_sea(&single_particle_energies(s, &c));
        assert!(fs.levels.is_empty());
        let c = Couplings::new(s, vec![0.0, 1.0, 0.0]).unwrap();
        let fs = fermi_sea(&single_particle_energies(s, &c));
        assert_eq!(fs.zero_modes, vec![1]);
        assert_eq!(fs.levels, LevelSet::new([0]));
    }

    #[test]
    fn correlation_weight() {
        let s = GraphSpec::new(3, 2).unwrap();
        let w = ground_state_correlation_weight(s, &LevelSet::new([0])).unwrap();
        assert!((w - 0.125).abs() < 1e-15);
        assert_eq!(ground_state_correlation_weight(s, &LevelSet::up_to(3)).unwrap(), 1.0);
        assert_eq!(ground_state_correlation_weight(s, &LevelSet::empty()).unwrap(), 0.0);
        assert!(ground_state_correlation_weight(s, &LevelSet::new([4])).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(GraphSpec::new(0, 2).is_err());
        assert!(GraphSpec::new(3, 1).is_err());
        let s = GraphSpec::new(2, 3).unwrap();
        assert!(Couplings::new(s, vec![0.0, 1.0]).is_err());
        assert!(Couplings::new(s, vec![0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn level_set_helpers() {
        assert_eq!(LevelSet::up_to(3).contiguous_top(), Some(3));
        assert_eq!(LevelSet::new([0, 2]).contiguous_top(), None);
        assert_eq!(LevelSet::new([1, 2]).contiguous_top(), None);
        assert_eq!(LevelSet::new([0, 2]).complement(3), LevelSet::new([1, 3]));
        assert_eq!(LevelSet::new([0, 2]).to_string(), "{0,2}");
    }
}
