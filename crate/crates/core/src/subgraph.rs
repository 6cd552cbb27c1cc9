//! Subsystems that are Hamming subgraphs H(L,q): the first d−L coordinates are fixed to 0.
//!
//! The chopped correlation matrix is block diagonal in the number `N_q` of
//! zero symbols among the free coordinates; each block is a multiple of the
//! identity with eigenvalue a binomial tail sum.

use num_bigint::BigUint;

use crate::entropy::{binary_entropy, entropy_from_spectrum};
use crate::error::{Error, Result};
use crate::model::{GraphSpec, LevelSet};
use crate::special::{binomial_exact, cumulative_binomial, neumaier_sum, LnFactorials, LogWeight};
use crate::spectrum::CorrelationSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubgraphSpec {
    pub parent: GraphSpec,
    pub l: u32,
}

impl SubgraphSpec {
    pub fn new(parent: GraphSpec, l: u32) -> Result<Self> {
        if l > parent.d {
            return Err(Error::Domain(format!("L = {l} exceeds d = {}", parent.d)));
        }
        Ok(Self { parent, l })
    }

    /// `q^L`.
    pub fn size(&self) -> BigUint {
        num_traits::pow(BigUint::from(self.parent.q), self.l as usize)
    }

    /// Multiplicity `C(L, N_q)(q-1)^(L-N_q)` of the block with `N_q` zeros.
    pub fn block_degeneracy(&self, nq: u32) -> BigUint {
        binomial_exact(i64::from(self.l), i64::from(nq))
            * num_traits::pow(BigUint::from(self.parent.q - 1), (self.l - nq) as usize)
    }
}

/// `λ_{N_q} = Σ_{k∈SE} C(D, k-N_q) (1/q)^(k-N_q) ((q-1)/q)^(D-k+N_q)` with `D = d-L`.
pub fn subgraph_eigenvalue(s: &SubgraphSpec, se: &LevelSet, nq: u32, table: &LnFactorials) -> f64 {
    let dd = s.parent.d - s.l;
    let q = f64::from(s.parent.q);
    let window = nq..=nq + dd;
    let hits: Vec<u32> = se.iter().filter(|k| window.contains(k)).collect();
    if hits.is_empty() {
        return 0.0;
    }
    if hits.len() == dd as usize + 1 {
        return 1.0;
    }
    let ln_p = -q.ln();
    let ln_r = ((q - 1.0) / q).ln();
    let terms = hits.iter().map(|&k| {
        let t = i64::from(k - nq);
        let ln = table.ln_binomial(i64::from(dd), t)
            + t as f64 * ln_p
            + (i64::from(dd) - t) as f64 * ln_r;
        ln.exp()
    });
    neumaier_sum(terms).clamp(0.0, 1.0)
}

pub fn subgraph_correlation_spectrum(s: &SubgraphSpec, se: &LevelSet) -> Result<CorrelationSpectrum> {
    se.validate(&s.parent, "SE")?;
    let table = LnFactorials::new(s.parent.d as usize);
    let raw = (0..=s.l)
        .map(|nq| (subgraph_eigenvalue(s, se, nq, &table), s.block_degeneracy(nq)))
        .collect();
    CorrelationSpectrum::from_values(raw)
}

/// Entropy for `SE = {0..k0}`, checking each eigenvalue against the cumulative
/// binomial `F(k0 - N_q; d-L, 1/q)`.
pub fn subgraph_entropy_contiguous(s: &SubgraphSpec, k0: u32) -> Result<f64> {
    s.parent.check_level("k0", k0)?;
    let se = LevelSet::up_to(k0);
    let table = LnFactorials::new(s.parent.d as usize);
    let dd = u64::from(s.parent.d - s.l);
    let p = 1.0 / f64::from(s.parent.q);
    for nq in 0..=s.l {
        let lam = subgraph_eigenvalue(s, &se, nq, &table);
        let f = cumulative_binomial(i64::from(k0) - i64::from(nq), dd, p)?;
        if (lam - f).abs() > 1e-10 {
            return Err(Error::Numerical(format!(
                "block N_q = {nq}: eigenvalue {lam} differs from cumulative binomial {f}"
            )));
        }
    }
    entropy_from_spectrum(&subgraph_correlation_spectrum(s, &se)?)
}

/// Closed-form entropy as a sum over `i = 0..d-L` of
/// `C(L, k0-i)(q-1)^(L-k0+i) h(F(i; d-L, 1/q))`.
pub fn subgraph_entropy_closed_form(s: &SubgraphSpec, k0: u32) -> Result<f64> {
    s.parent.check_level("k0", k0)?;
    let dd = s.parent.d - s.l;
    let p = 1.0 / f64::from(s.parent.q);
    let mut terms = Vec::new();
    for i in 0..=dd {
        let nq = i64::from(k0) - i64::from(i);
        if nq < 0 || nq > i64::from(s.l) {
            continue;
        }
        let coeff = s.block_degeneracy(nq as u32);
        let h = binary_entropy(cumulative_binomial(i64::from(i), u64::from(dd), p)?)?;
        terms.push(LogWeight::from_biguint(&coeff) * LogWeight::from_f64(h));
    }
    Ok(LogWeight::sum(terms).to_f64().max(0.0))
}
