//! Data behind the entropy plots: subgraphs (2a/2b), single neighborhoods
//! (3a/3b) and balls (4a/4b), all with nearest-neighbor hopping so that the
//! Fermi sea is `{0..k0}`.

use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;

use crate::entropy::entropy_from_spectrum;
use crate::error::{Error, Result};
use crate::heun::ball_spectrum_via_heun;
use crate::model::{GraphSpec, LevelSet};
use crate::subgraph::{subgraph_entropy_contiguous, SubgraphSpec};
use crate::terwilliger::neighborhood_spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Half-filled subgraphs with `L ∈ {d/4, d/2, 3d/4}`.
    SubgraphSize,
    /// `S / q^L` for `L = d/4` over every filling.
    SubgraphFilling,
    /// Half-filled neighborhoods with `i ∈ {d/8, d/4, 3d/8}`.
    NeighborhoodSize,
    /// `S / |SV|` for the neighborhood `i = d/4` over every filling.
    NeighborhoodFilling,
    /// Half-filled balls with `N ∈ {d/8, d/4, d/2}`.
    BallSize,
    /// `S / |∂SV|` for balls `N = d/4` at fillings 1/4, 1/2, 3/4.
    BallBoundary,
}

impl Figure {
    pub const ALL: [Figure; 6] = [
        Figure::SubgraphSize,
        Figure::SubgraphFilling,
        Figure::NeighborhoodSize,
        Figure::NeighborhoodFilling,
        Figure::BallSize,
        Figure::BallBoundary,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Figure::SubgraphSize => "2a",
            Figure::SubgraphFilling => "2b",
            Figure::NeighborhoodSize => "3a",
            Figure::NeighborhoodFilling => "3b",
            Figure::BallSize => "4a",
            Figure::BallBoundary => "4b",
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Figure::SubgraphSize => &["d", "L", "L_ratio", "k0", "S"],
            Figure::SubgraphFilling => &["d", "L", "k0", "filling", "S", "S_over_volume"],
            Figure::NeighborhoodSize => &["d", "i", "i_ratio", "k0", "S"],
            Figure::NeighborhoodFilling => &["d", "i", "k0", "filling", "S", "S_over_volume"],
            Figure::BallSize => &["d", "N", "N_ratio", "k0", "S"],
            Figure::BallBoundary => &[
                "d",
                "N",
                "k0",
                "filling",
                "S",
                "boundary",
                "S_over_boundary",
                "outer_boundary",
                "S_over_outer_boundary",
            ],
        }
    }

    /// Dimensions swept by default.
    pub fn default_dims(&self) -> Vec<u32> {
        match self {
            Figure::SubgraphSize => (8..=48).step_by(4).collect(),
            Figure::SubgraphFilling | Figure::NeighborhoodSize | Figure::NeighborhoodFilling => {
                (8..=48).step_by(8).collect()
            }
            Figure::BallSize | Figure::BallBoundary => (8..=120).step_by(8).collect(),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.tag() == s)
            .ok_or_else(|| Error::Domain(format!("unknown figure {s:?}; expected one of 2a, 2b, 3a, 3b, 4a, 4b")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub figure: Figure,
    pub q: u32,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl FigureTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

fn big_to_f64(x: &num_bigint::BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

fn subgraph_entropy(spec: GraphSpec, l: u32, k0: u32) -> Result<f64> {
    subgraph_entropy_contiguous(&SubgraphSpec::new(spec, l)?, k0)
}

fn neighborhood_entropy(spec: &GraphSpec, i: u32, k0: u32) -> Result<f64> {
    entropy_from_spectrum(&neighborhood_spectrum(spec, i, &LevelSet::up_to(k0))?)
}

fn ball_entropy(spec: &GraphSpec, n: u32, k0: u32) -> Result<f64> {
    entropy_from_spectrum(&ball_spectrum_via_heun(spec, n, k0)?.spectrum)
}

/// Sweeps one figure over the given dimensions (each must be at least 8 so the
/// subsystem ratios are nonzero).
pub fn figure_table(figure: Figure, q: u32, dims: &[u32]) -> Result<FigureTable> {
    let mut rows = Vec::new();
    for &d in dims {
        let spec = GraphSpec::new(d, q)?;
        let df = f64::from(d);
        let half = d / 2;
        match figure {
            Figure::SubgraphSize => {
                for l in [d / 4, d / 2, 3 * d / 4] {
                    let s = subgraph_entropy(spec, l, half)?;
                    rows.push(vec![df, l.into(), f64::from(l) / df, half.into(), s]);
                }
            }
            Figure::SubgraphFilling => {
                let l = d / 4;
                let volume = f64::from(q).powi(l as i32);
                for k0 in 0..=d {
                    let s = subgraph_entropy(spec, l, k0)?;
                    rows.push(vec![df, l.into(), k0.into(), f64::from(k0) / df, s, s / volume]);
                }
            }
            Figure::NeighborhoodSize => {
                for i in [d / 8, d / 4, 3 * d / 8] {
                    let s = neighborhood_entropy(&spec, i, half)?;
                    rows.push(vec![df, i.into(), f64::from(i) / df, half.into(), s]);
                }
            }
            Figure::NeighborhoodFilling => {
                let i = d / 4;
                let volume = big_to_f64(&spec.neighborhood_size(i));
                for k0 in 0..=d {
                    let s = neighborhood_entropy(&spec, i, k0)?;
                    rows.push(vec![df, i.into(), k0.into(), f64::from(k0) / df, s, s / volume]);
                }
            }
            Figure::BallSize => {
                for n in [d / 8, d / 4, d / 2] {
                    let s = ball_entropy(&spec, n, half)?;
                    rows.push(vec![df, n.into(), f64::from(n) / df, half.into(), s]);
                }
            }
            Figure::BallBoundary => {
                let n = d / 4;
                // the outermost shell of the ball, and the shell just outside it
                let boundary = big_to_f64(&spec.neighborhood_size(n));
                let outer = if n < d { big_to_f64(&spec.neighborhood_size(n + 1)) } else { f64::NAN };
                for k0 in [d / 4, d / 2, 3 * d / 4] {
                    let s = ball_entropy(&spec, n, k0)?;
                    rows.push(vec![
                        df,
                        n.into(),
                        k0.into(),
                        f64::from(k0) / df,
                        s,
                        boundary,
                        s / boundary,
                        outer,
                        s / outer,
                    ]);
                }
            }
        }
    }
    Ok(FigureTable {
        figure,
        q,
        columns: figure.columns().to_vec(),
        rows,
    })
}

/// Every index whose value is within `rel_tol` (relative) of the maximum.
pub fn argmax_set(values: &[f64], rel_tol: f64) -> Vec<usize> {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = rel_tol * top.abs().max(f64::MIN_POSITIVE);
    (0..values.len()).filter(|&i| top - values[i] <= tol).collect()
}

/// Fixed formatting with 12 significant digits; integers print without a
/// fractional part.
pub fn format_sig12(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == x.trunc() && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = s.trim_end_matches('0');
        s.trim_end_matches('.').to_string()
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, exponent) = s.split_once('e').unwrap_or((&s, "0"));
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for f in Figure::ALL {
            assert_eq!(f.tag().parse::<Figure>().unwrap(), f);
        }
        assert!("5c".parse::<Figure>().is_err());
    }

    #[test]
    fn formatting() {
        assert_eq!(format_sig12(8.0), "8");
        assert_eq!(format_sig12(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(format_sig12(0.25), "0.25");
        assert_eq!(format_sig12(1.5e-7), "1.5e-7");
        assert_eq!(format_sig12(1.174981698388622e28), "1.17498169839e28");
        assert_eq!(format_sig12(123456.7890123456), "123456.789012");
    }

    #[test]
    fn subgraph_filling_peaks_at_half() {
        // q = 2 reflection k -> d - k makes S(d/2 - 1) = S(d/2) for even d
        let t = figure_table(Figure::SubgraphFilling, 2, &[8, 9, 16]).unwrap();
        for (d, peak) in [(8.0, vec![3, 4]), (9.0, vec![4]), (16.0, vec![7, 8])] {
            let s: Vec<f64> = t.rows.iter().filter(|r| r[0] == d).map(|r| r[4]).collect();
            assert_eq!(argmax_set(&s, 1e-9), peak);
        }
    }

    #[test]
    fn ball_boundary_columns() {
        let t = figure_table(Figure::BallBoundary, 2, &[8]).unwrap();
        assert_eq!(t.rows.len(), 3);
        let r = &t.rows[1];
        assert_eq!(r[1], 2.0);
        assert_eq!(r[5], 28.0);
        assert_eq!(r[7], 56.0);
        assert!((r[6] - r[4] / 28.0).abs() < 1e-15);
    }
}
