//! Entanglement entropy and entanglement-Hamiltonian spectra from correlation spectra.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::LogWeight;
use crate::spectrum::CorrelationSpectrum;

/// `-λ ln λ - (1-λ) ln(1-λ)` with `0 ln 0 = 0`.
pub fn binary_entropy(lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("occupation {lambda} outside [0, 1]")));
    }
    if lambda == 0.0 || lambda == 1.0 {
        return Ok(0.0);
    }
    Ok(-lambda * lambda.ln() - (1.0 - lambda) * (-lambda).ln_1p())
}

/// `S = Σ_λ D_λ h(λ)` in nats; large degeneracies are multiplied in log space.
pub fn entropy_from_spectrum(spec: &CorrelationSpectrum) -> Result<f64> {
    let mut terms = Vec::with_capacity(spec.len());
    for e in spec.entries() {
        let h = binary_entropy(e.lambda)?;
        terms.push(LogWeight::from_biguint(&e.degeneracy) * LogWeight::from_f64(h));
    }
    Ok(LogWeight::sum(terms).to_f64().max(0.0))
}

/// Spectrum of `h = ln((1-C)/C)`: finite levels plus the counts sent to `±∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementSpectrum {
    pub levels: Vec<(f64, BigUint)>,
    /// Multiplicity of `λ = 0`, i.e. `h = +∞`.
    pub at_plus_infinity: BigUint,
    /// Multiplicity of `λ = 1`, i.e. `h = -∞`.
    pub at_minus_infinity: BigUint,
}

pub fn entanglement_hamiltonian_spectrum(spec: &CorrelationSpectrum) -> EntanglementSpectrum {
    let mut out = EntanglementSpectrum {
        levels: Vec::new(),
        at_plus_infinity: BigUint::zero(),
        at_minus_infinity: BigUint::zero(),
    };
    for e in spec.entries() {
        if e.lambda <= 0.0 {
            out.at_plus_infinity += &e.degeneracy;
        } else if e.lambda >= 1.0 {
            out.at_minus_infinity += &e.degeneracy;
        } else {
            let h = (-e.lambda).ln_1p() - e.lambda.ln();
            out.levels.push((h, e.degeneracy.clone()));
        }
    }
    out.levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Which computational route produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Subgraph,
    Neighborhood,
    Heun,
    Direct,
    Oracle,
    BetheCheck,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Subgraph => "subgraph",
            Method::Neighborhood => "neighborhood",
            Method::Heun => "heun",
            Method::Direct => "direct",
            Method::Oracle => "oracle",
            Method::BetheCheck => "bethe-check",
        }
    }
}

/// An entropy together with the spectrum and the inputs it was computed from.
#[derive(Debug, Clone)]
pub struct EntropyResult {
    pub d: u32,
    pub q: u32,
    pub subsystem: String,
    pub fermi_sea: String,
    pub method: Method,
    pub spectrum: CorrelationSpectrum,
    pub entropy: f64,
}

impl EntropyResult {
    pub fn new(
        d: u32,
        q: u32,
        subsystem: String,
        fermi_sea: String,
        method: Method,
        spectrum: CorrelationSpectrum,
    ) -> Result<Self> {
        let entropy = entropy_from_spectrum(&spectrum)?;
        Ok(Self {
            d,
            q,
            subsystem,
            fermi_sea,
            method,
            spectrum,
            entropy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn entropy_examples() {
        let s = CorrelationSpectrum::from_values(vec![(0.5, b(1))]).unwrap();
        assert!((entropy_from_spectrum(&s).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        let s = CorrelationSpectrum::from_values(vec![(0.0, b(1_000_000)), (1.0, b(1_000_000))])
            .unwrap();
        assert_eq!(entropy_from_spectrum(&s).unwrap(), 0.0);
        let s = CorrelationSpectrum::from_values(vec![(0.375, b(1)), (0.0, b(2))]).unwrap();
        assert!((entropy_from_spectrum(&s).unwrap() - 0.661563).abs() < 1e-6);
    }

    #[test]
    fn huge_degeneracy_stays_finite() {
        let deg = num_traits::pow(BigUint::from(10u32), 40);
        let s = CorrelationSpectrum::from_values(vec![(0.5, deg)]).unwrap();
        let e = entropy_from_spectrum(&s).unwrap();
        assert!((e / 1e40 - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_levels() {
        let s = CorrelationSpectrum::from_values(vec![(0.5, b(1)), (0.375, b(1)), (0.0, b(2)), (1.0, b(3))])
            .unwrap();
        let h = entanglement_hamiltonian_spectrum(&s);
        assert_eq!(h.at_plus_infinity, b(2));
        assert_eq!(h.at_minus_infinity, b(3));
        assert_eq!(h.levels[0].0, 0.0);
        assert!((h.levels[1].0 - (5.0f64 / 3.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }
}
