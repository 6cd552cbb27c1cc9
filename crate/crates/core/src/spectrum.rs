//! Correlation-matrix spectra with exact degeneracies.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::special::{big_ln, LogWeight};

/// Eigenvalues farther than this outside `[0, 1]` are treated as a numerical failure.
pub const CLAMP_TOLERANCE: f64 = 1e-8;
/// Eigenvalues closer than this are merged into one entry.
pub const MERGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub lambda: f64,
    pub degeneracy: BigUint,
}

impl SpectrumEntry {
    pub fn log10_degeneracy(&self) -> f64 {
        big_ln(&self.degeneracy) / std::f64::consts::LN_10
    }
}

/// Eigenvalues in `[0, 1]`, sorted ascending, each with its exact multiplicity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelationSpectrum {
    entries: Vec<SpectrumEntry>,
}

impl CorrelationSpectrum {
    /// Sorts, clamps and merges raw `(λ, multiplicity)` pairs.
    ///
    /// Values outside `[-clamp_tol, 1 + clamp_tol]` are rejected.
    pub fn from_raw(raw: Vec<(f64, BigUint)>, clamp_tol: f64, merge_tol: f64) -> Result<Self> {
        let mut items = Vec::with_capacity(raw.len());
        for (lambda, deg) in raw {
            if deg.is_zero() {
                continue;
            }
            if !lambda.is_finite() || lambda < -clamp_tol || lambda > 1.0 + clamp_tol {
                return Err(Error::Numerical(format!(
                    "correlation eigenvalue {lambda:e} lies outside [0, 1] by more than {clamp_tol:e}"
                )));
            }
            // adding +0 turns -0 into 0
            items.push((lambda.clamp(0.0, 1.0) + 0.0, deg));
        }
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut entries: Vec<SpectrumEntry> = Vec::new();
        for (lambda, deg) in items {
            match entries.last_mut() {
                Some(last) if lambda - last.lambda <= merge_tol => last.degeneracy += deg,
                _ => entries.push(SpectrumEntry {
                    lambda,
                    degeneracy: deg,
                }),
            }
        }
        Ok(Self { entries })
    }

    pub fn from_values(raw: Vec<(f64, BigUint)>) -> Result<Self> {
        Self::from_raw(raw, CLAMP_TOLERANCE, MERGE_TOLERANCE)
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ multiplicity`, the subsystem dimension.
    pub fn total_degeneracy(&self) -> BigUint {
        self.entries.iter().map(|e| &e.degeneracy).sum()
    }

    /// `Σ λ·multiplicity`, accumulated in log space.
    pub fn trace(&self) -> f64 {
        LogWeight::sum(self.entries.iter().map(|e| {
            LogWeight::from_biguint(&e.degeneracy) * LogWeight::from_f64(e.lambda)
        }))
        .to_f64()
    }

    /// The spectrum of `1 - C`.
    pub fn complement(&self) -> Self {
        let mut entries: Vec<SpectrumEntry> = self
            .entries
            .iter()
            .rev()
            .map(|e| SpectrumEntry {
                lambda: 1.0 - e.lambda,
                degeneracy: e.degeneracy.clone(),
            })
            .collect();
        entries.dedup_by(|b, a| {
            if (b.lambda - a.lambda).abs() <= MERGE_TOLERANCE {
                a.degeneracy += &b.degeneracy;
                true
            } else {
                false
            }
        });
        Self { entries }
    }

    /// Largest deviation between the two sorted eigenvalue lists (multiplicities
    /// expanded), or an error message when the dimensions differ.
    pub fn max_deviation(&self, other: &Self) -> std::result::Result<f64, String> {
        let (na, nb) = (self.total_degeneracy(), other.total_degeneracy());
        if na != nb {
            return Err(format!("dimension mismatch: {na} vs {nb}"));
        }
        let mut dev = 0.0f64;
        let (mut ia, mut ib) = (0, 0);
        let mut rem_a = self.entries.first().map(|e| e.degeneracy.clone());
        let mut rem_b = other.entries.first().map(|e| e.degeneracy.clone());
        while let (Some(ra), Some(rb)) = (rem_a.as_mut(), rem_b.as_mut()) {
            dev = dev.max((self.entries[ia].lambda - other.entries[ib].lambda).abs());
            let step = (&*ra).min(&*rb).clone();
            *ra -= &step;
            *rb -= &step;
            if ra.is_zero() {
                ia += 1;
                rem_a = self.entries.get(ia).map(|e| e.degeneracy.clone());
            }
            if rb.is_zero() {
                ib += 1;
                rem_b = other.entries.get(ib).map(|e| e.degeneracy.clone());
            }
        }
        Ok(dev)
    }

    /// Agreement of the multiplicity-expanded sorted lists within `tol`.
    pub fn matches(&self, other: &Self, tol: f64) -> std::result::Result<(), String> {
        let dev = self.max_deviation(other)?;
        if dev > tol {
            return Err(format!("eigenvalues differ by {dev:e} (tolerance {tol:e})"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn sorting_merging_and_clamping() {
        let s = CorrelationSpectrum::from_values(vec![
            (0.5, b(1)),
            (-1e-12, b(2)),
            (0.0, b(1)),
            (1.0 + 1e-11, b(3)),
        ])
        .unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.entries()[0].lambda, 0.0);
        assert_eq!(s.entries()[0].degeneracy, b(3));
        assert_eq!(s.entries()[2].lambda, 1.0);
        assert_eq!(s.total_degeneracy(), b(7));
        assert!((s.trace() - 3.5).abs() < 1e-14);
        assert!(CorrelationSpectrum::from_values(vec![(1.1, b(1))]).is_err());
    }

    #[test]
    fn deviation_walks_multiplicities() {
        let a = CorrelationSpectrum::from_values(vec![(0.25, b(2)), (0.5, b(1))]).unwrap();
        let c = CorrelationSpectrum::from_values(vec![(0.25, b(1)), (0.25 + 1e-13, b(1)), (0.5, b(1))])
            .unwrap();
        assert!(a.matches(&c, 1e-9).is_ok());
        let d = CorrelationSpectrum::from_values(vec![(0.25, b(1)), (0.5, b(2))]).unwrap();
        assert!(a.matches(&d, 1e-9).is_err());
        let e = CorrelationSpectrum::from_values(vec![(0.25, b(1))]).unwrap();
        assert!(a.max_deviation(&e).is_err());
    }

    #[test]
    fn complement_reverses() {
        let a = CorrelationSpectrum::from_values(vec![(0.25, b(2)), (1.0, b(1))]).unwrap();
        let c = a.complement();
        assert_eq!(c.entries()[0].lambda, 0.0);
        assert_eq!(c.entries()[1].lambda, 0.75);
        assert_eq!(c.entries()[1].degeneracy, b(2));
    }
}
