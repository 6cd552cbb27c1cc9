//! Irreducible modules of the Terwilliger algebra of H(d,q) with respect to the
//! reference vertex 0, and the correlation spectra of neighborhood unions.
//!
//! A module is labelled by the number `n` of coordinates in which its vectors
//! can differ from "all zeros or all one fixed nonzero symbol", and by a spin
//! `j` (stored doubled). Its basis `|j,m⟩`, `m = -j..j`, is indexed here by
//! `r = j + m`; the vector `|j,m⟩` lives in neighborhood `d - n/2 - m`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::Result;
use crate::model::{GraphSpec, LevelSet};
use crate::special::{big_ln, binomial_exact, krawtchouk_integer_column, LnFactorials};
use crate::spectrum::CorrelationSpectrum;
use crate::tridiag::TridiagonalOperator;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IrreducibleModule {
    pub n: u32,
    pub twice_j: u32,
    pub multiplicity: BigUint,
}

impl IrreducibleModule {
    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    /// `n/2 - j`, the distance offset of the top (`m = j`) basis vector from `d - n`.
    pub fn low(&self) -> u32 {
        (self.n - self.twice_j) / 2
    }

    /// `2m` for basis index `r`.
    pub fn twice_m(&self, r: usize) -> i64 {
        2 * r as i64 - i64::from(self.twice_j)
    }

    /// Neighborhood `i(m) = d - n/2 - m` of basis index `r`.
    pub fn neighborhood(&self, spec: &GraphSpec, r: usize) -> u32 {
        spec.d - self.low() - r as u32
    }

    pub fn index_of_neighborhood(&self, spec: &GraphSpec, i: u32) -> Option<usize> {
        let top = spec.d - self.low();
        (i <= top && top - i <= self.twice_j).then(|| (top - i) as usize)
    }

    /// Fermi-sea level `k = j - k' + n/2` carried by overlap column `k'`.
    pub fn level_of_column(&self, x: usize) -> u32 {
        (self.n + self.twice_j) / 2 - x as u32
    }

    pub fn column_of_level(&self, k: u32) -> Option<usize> {
        let top = (self.n + self.twice_j) / 2;
        (k <= top && top - k <= self.twice_j).then(|| (top - k) as usize)
    }
}

/// One entry per `(n, j)` with multiplicity
/// `(q-2)^(d-n) C(d,n) (2j+1)/(n+1) C(n+1, n/2-j)`.
pub fn enumerate_modules(spec: &GraphSpec) -> Vec<IrreducibleModule> {
    let d = spec.d;
    let mut out = Vec::new();
    for n in 0..=d {
        let outer = num_traits::pow(BigUint::from(spec.q - 2), (d - n) as usize)
            * binomial_exact(i64::from(d), i64::from(n));
        if outer.is_zero() {
            continue;
        }
        for twice_j in (n % 2..=n).step_by(2) {
            let inner = binomial_exact(i64::from(n) + 1, i64::from((n - twice_j) / 2))
                * (twice_j + 1)
                / (n + 1);
            out.push(IrreducibleModule {
                n,
                twice_j,
                multiplicity: &outer * inner,
            });
        }
    }
    out
}

/// `Σ multiplicity·(2j+1)`; equals `q^d`.
pub fn total_module_dimension(spec: &GraphSpec) -> BigUint {
    enumerate_modules(spec)
        .iter()
        .map(|m| &m.multiplicity * BigUint::from(m.twice_j + 1))
        .sum()
}

/// `Σ multiplicity` over modules meeting neighborhood `i`; equals `C(d,i)(q-1)^i`.
pub fn neighborhood_dimension(spec: &GraphSpec, i: u32) -> BigUint {
    enumerate_modules(spec)
        .iter()
        .filter(|m| m.index_of_neighborhood(spec, i).is_some())
        .map(|m| m.multiplicity.clone())
        .sum()
}

/// `A` on the module: hopping `√((q-1)(j+m+1)(j-m))`, diagonal `nq/2 - d - (q-2)m`.
pub fn restricted_adjacency(spec: &GraphSpec, module: &IrreducibleModule) -> TridiagonalOperator {
    let (q, d, n, tj) = (
        i64::from(spec.q),
        i64::from(spec.d),
        i64::from(module.n),
        i64::from(module.twice_j),
    );
    let diag = (0..module.dim())
        .map(|r| (n * q - 2 * d - (q - 2) * module.twice_m(r)) as f64 / 2.0)
        .collect();
    let off = (0..module.dim().saturating_sub(1))
        .map(|r| (((q - 1) * (r as i64 + 1) * (tj - r as i64)) as f64).sqrt())
        .collect();
    TridiagonalOperator::new(diag, off)
}

/// Diagonal of `A*` on the module: `qm + nq/2 - d`.
pub fn restricted_dual(spec: &GraphSpec, module: &IrreducibleModule) -> Vec<f64> {
    let (q, d, n) = (i64::from(spec.q), i64::from(spec.d), i64::from(module.n));
    (0..module.dim())
        .map(|r| (q * module.twice_m(r) + n * q - 2 * d) as f64 / 2.0)
        .collect()
}

/// Eigenvectors of the restricted adjacency in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    /// Rows indexed by `r = j + m`, columns by `k'`; column `k'` has eigenvalue
    /// `q(j - k' + n/2) - d`.
    pub values: DMatrix<f64>,
}

/// Rows `a = 0..=amax` (with `a = j - m`) of the overlap matrix for spin `twice_j/2`:
/// `Q = sqrt(C(N,k')/C(N,a)) q^(-N/2) (q-1)^((k'-a)/2) K̂_a(k')`, `N = 2j`.
pub fn overlap_rows(q: u32, twice_j: u32, amax: u32, table: &LnFactorials) -> DMatrix<f64> {
    let nn = twice_j;
    let amax = amax.min(nn);
    let ln_q = f64::from(q).ln();
    let ln_q1 = f64::from(q - 1).ln();
    let mut out = DMatrix::zeros(amax as usize + 1, nn as usize + 1);
    for x in 0..=nn {
        let col = krawtchouk_integer_column(nn, x, q, amax);
        for (a, kh) in col.iter().enumerate() {
            if kh.is_zero() {
                continue;
            }
            let a_i = a as i64;
            let x_i = i64::from(x);
            let mut ln = 0.5 * (table.ln_binomial(i64::from(nn), x_i) - table.ln_binomial(i64::from(nn), a_i))
                - 0.5 * f64::from(nn) * ln_q
                + big_ln(kh.magnitude());
            if q > 2 {
                ln += 0.5 * (x_i - a_i) as f64 * ln_q1;
            }
            let v = ln.exp();
            out[(a, x as usize)] = if kh.sign() == num_bigint::Sign::Minus { -v } else { v };
        }
    }
    out
}

pub fn overlap_matrix(spec: &GraphSpec, module: &IrreducibleModule) -> OverlapMatrix {
    let table = LnFactorials::new(module.twice_j as usize);
    let rows = overlap_rows(spec.q, module.twice_j, module.twice_j, &table);
    let dim = module.dim();
    OverlapMatrix {
        values: DMatrix::from_fn(dim, dim, |r, x| rows[(dim - 1 - r, x)]),
    }
}

/// Overlap rows shared between modules of equal spin.
#[derive(Debug)]
pub struct OverlapCache {
    q: u32,
    table: LnFactorials,
    rows: HashMap<u32, DMatrix<f64>>,
}

impl OverlapCache {
    pub fn new(spec: &GraphSpec) -> Self {
        Self {
            q: spec.q,
            table: LnFactorials::new(spec.d as usize + 1),
            rows: HashMap::new(),
        }
    }

    /// Matrix whose row `a` is overlap row `a = j - m`, with at least `amax + 1` rows.
    pub fn rows(&mut self, twice_j: u32, amax: u32) -> &DMatrix<f64> {
        let have = self.rows.get(&twice_j).map_or(0, |m| m.nrows());
        if have < amax as usize + 1 {
            let m = overlap_rows(self.q, twice_j, amax, &self.table);
            self.rows.insert(twice_j, m);
        }
        &self.rows[&twice_j]
    }
}

/// Correlation matrix of one module restricted to the basis vectors lying in `sd`.
#[derive(Debug, Clone)]
pub struct RestrictedCorrelation {
    /// Basis indices `r` kept, ascending.
    pub rows: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

pub(crate) fn restricted_with_cache(
    spec: &GraphSpec,
    module: &IrreducibleModule,
    sd: &LevelSet,
    se: &LevelSet,
    cache: &mut OverlapCache,
) -> RestrictedCorrelation {
    let mut rows: Vec<usize> = sd
        .iter()
        .filter_map(|i| module.index_of_neighborhood(spec, i))
        .collect();
    rows.sort_unstable();
    let cols: Vec<usize> = se.iter().filter_map(|k| module.column_of_level(k)).collect();
    if rows.is_empty() {
        return RestrictedCorrelation {
            rows,
            matrix: DMatrix::zeros(0, 0),
        };
    }
    let tj = module.twice_j as usize;
    let amax = tj - rows[0];
    let q = cache.rows(module.twice_j, amax as u32);
    let b = DMatrix::from_fn(rows.len(), cols.len(), |i, c| q[(tj - rows[i], cols[c])]);
    let matrix = &b * b.transpose();
    RestrictedCorrelation { rows, matrix }
}

/// Entries `Σ_{k'∈SE} Q_{m,k'} Q_{m',k'}` over the `m` with `i(m) ∈ SD`.
pub fn restricted_correlation(
    spec: &GraphSpec,
    module: &IrreducibleModule,
    sd: &LevelSet,
    se: &LevelSet,
) -> RestrictedCorrelation {
    let mut cache = OverlapCache::new(spec);
    restricted_with_cache(spec, module, sd, se, &mut cache)
}

pub(crate) fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)]],
        _ => m.clone().symmetric_eigenvalues().iter().copied().collect(),
    }
}

/// Spectrum for a single neighborhood: each meeting module contributes one eigenvalue
/// `Σ_{k∈SE} Q²_{m,k'(k)}` with its multiplicity.
pub fn neighborhood_spectrum(spec: &GraphSpec, i: u32, se: &LevelSet) -> Result<CorrelationSpectrum> {
    spec.check_level("neighborhood", i)?;
    se.validate(spec, "SE")?;
    let mut cache = OverlapCache::new(spec);
    let mut raw = Vec::new();
    for module in enumerate_modules(spec) {
        let Some(r) = module.index_of_neighborhood(spec, i) else {
            continue;
        };
        let a = module.twice_j as usize - r;
        let q = cache.rows(module.twice_j, a as u32);
        let lam: f64 = se
            .iter()
            .filter_map(|k| module.column_of_level(k))
            .map(|x| q[(a, x)].powi(2))
            .sum();
        raw.push((lam, module.multiplicity));
    }
    CorrelationSpectrum::from_values(raw)
}

/// Spectrum for an arbitrary union of neighborhoods by diagonalizing every
/// module's restricted correlation matrix.
pub fn neighborhood_union_spectrum(
    spec: &GraphSpec,
    sd: &LevelSet,
    se: &LevelSet,
) -> Result<CorrelationSpectrum> {
    sd.validate(spec, "SD")?;
    se.validate(spec, "SE")?;
    let mut cache = OverlapCache::new(spec);
    let mut raw = Vec::new();
    for module in enumerate_modules(spec) {
        let rc = restricted_with_cache(spec, &module, sd, se, &mut cache);
        for lam in symmetric_eigenvalues(&rc.matrix) {
            raw.push((lam, module.multiplicity.clone()));
        }
    }
    CorrelationSpectrum::from_values(raw)
}

/// Ball `{v : ∂(0,v) ≤ N}` by direct diagonalization of the module blocks.
pub fn ball_spectrum_direct(spec: &GraphSpec, radius: u32, se: &LevelSet) -> Result<CorrelationSpectrum> {
    spec.check_level("N", radius)?;
    neighborhood_union_spectrum(spec, &LevelSet::up_to(radius), se)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: u32, q: u32) -> GraphSpec {
        GraphSpec::new(d, q).unwrap()
    }

    #[test]
    fn module_lists() {
        let m = enumerate_modules(&spec(3, 2));
        let got: Vec<(u32, u32, u64)> = m
            .iter()
            .map(|m| (m.n, m.twice_j, m.multiplicity.to_u64_digits().first().copied().unwrap_or(0)))
            .collect();
        assert_eq!(got, vec![(3, 1, 2), (3, 3, 1)]);
        let m = enumerate_modules(&spec(1, 3));
        let got: Vec<(u32, u32)> = m.iter().map(|m| (m.n, m.twice_j)).collect();
        assert_eq!(got, vec![(0, 0), (1, 1)]);
        assert_eq!(total_module_dimension(&spec(7, 5)), spec(7, 5).vertex_count());
    }

    #[test]
    fn cube_restrictions() {
        let s = spec(3, 2);
        let m = IrreducibleModule {
            n: 3,
            twice_j: 3,
            multiplicity: BigUint::from(1u32),
        };
        let a = restricted_adjacency(&s, &m);
        assert_eq!(a.diag, vec![0.0; 4]);
        let s3 = 3f64.sqrt();
        for (x, y) in a.offdiag.iter().zip([s3, 2.0, s3]) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(restricted_dual(&s, &m), vec![-3.0, -1.0, 1.0, 3.0]);
        let q = overlap_matrix(&s, &m);
        // m = 1/2 is r = 2; k' = 3
        assert!((q.values[(2, 3)] + s3 / 8f64.sqrt()).abs() < 1e-14);
        assert!((q.values[(3, 0)] - 2f64.powf(-1.5)).abs() < 1e-15);
        let rc = restricted_correlation(&s, &m, &LevelSet::new([1]), &LevelSet::new([0]));
        assert_eq!(rc.rows, vec![2]);
        assert!((rc.matrix[(0, 0)] - 0.375).abs() < 1e-14);
    }

    #[test]
    fn overlaps_diagonalize_adjacency() {
        for q in 2..=5 {
            for d in 1..=7 {
                let s = spec(d, q);
                for m in enumerate_modules(&s) {
                    let a = restricted_adjacency(&s, &m).to_dense();
                    let qm = overlap_matrix(&s, &m).values;
                    let ortho = qm.transpose() * &qm - DMatrix::identity(m.dim(), m.dim());
                    assert!(ortho.amax() < 1e-12);
                    for x in 0..m.dim() {
                        let omega = s.omega(m.level_of_column(x)) as f64;
                        let col = qm.column(x);
                        assert!((&a * col - col * omega).amax() < 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn single_neighborhood_example() {
        let s = spec(3, 2);
        let sp = neighborhood_spectrum(&s, 1, &LevelSet::new([0])).unwrap();
        assert_eq!(sp.len(), 2);
        assert_eq!(sp.entries()[0].lambda, 0.0);
        assert_eq!(sp.entries()[0].degeneracy, BigUint::from(2u32));
        assert!((sp.entries()[1].lambda - 0.375).abs() < 1e-14);
        let sp = neighborhood_spectrum(&s, 0, &LevelSet::new([0])).unwrap();
        assert_eq!(sp.len(), 1);
        assert!((sp.entries()[0].lambda - 0.125).abs() < 1e-15);
    }

    #[test]
    fn full_support_is_projector() {
        let s = spec(5, 3);
        let sp = neighborhood_union_spectrum(&s, &LevelSet::up_to(5), &LevelSet::new([1, 3])).unwrap();
        for e in sp.entries() {
            assert!(e.lambda.abs() < 1e-12 || (e.lambda - 1.0).abs() < 1e-12);
        }
        assert_eq!(sp.total_degeneracy(), s.vertex_count());
    }
}
