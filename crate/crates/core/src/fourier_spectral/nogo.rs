//! Scan of the spectral parameter exhibiting a half-plane of eigenvalues of
//! `D_n^+`, which rules out compact parametrices.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mode::{estimate_growth_window, mu_from_alpha, unweight};
use super::probe::{fit_slope, Membership, ProbeTables};
use crate::budget::evaluation_budget;
use crate::error::{Error, Result};
use crate::sequences::{limit_class, CoefficientSequence, LimitClass};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fraction of non-degenerate samples right of the fitted boundary that must
/// be eigenvalues for the half-plane verdict.
const HALF_PLANE_FRACTION: f64 = 0.9;

/// Rectangular grid of spectral parameters, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub re_steps: usize,
    pub im_min: f64,
    pub im_max: f64,
    pub im_steps: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid {
            re_min: -4.0,
            re_max: 6.0,
            re_steps: 41,
            im_min: -2.0,
            im_max: 2.0,
            im_steps: 9,
        }
    }
}

fn axis(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..steps).map(|i| min + (max - min) * i as f64 / (steps - 1) as f64).collect(),
    }
}

impl LambdaGrid {
    /// The same grid with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        LambdaGrid {
            re_min: self.re_min * factor,
            re_max: self.re_max * factor,
            im_min: self.im_min * factor,
            im_max: self.im_max * factor,
            ..*self
        }
    }

    /// Grid points in canonical order: by real part, then imaginary part.
    pub fn points(&self) -> Vec<Complex64> {
        let ims = axis(self.im_min, self.im_max, self.im_steps);
        axis(self.re_min, self.re_max, self.re_steps)
            .into_iter()
            .flat_map(|re| ims.iter().map(move |&im| Complex64::new(re, im)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NogoSettings {
    /// Fourier mode of `D_n^+`.
    pub n: usize,
    /// Truncation length of each eigenfunction.
    pub size: usize,
    pub grid: LambdaGrid,
    /// Constant added to `β` (a bounded perturbation).
    pub beta_shift: Complex64,
    /// Constant added to `α` (a bounded perturbation).
    pub alpha_shift: Complex64,
}

impl Default for NogoSettings {
    fn default() -> Self {
        NogoSettings {
            n: 1,
            size: 100_000,
            grid: LambdaGrid::default(),
            beta_shift: ZERO,
            alpha_shift: ZERO,
        }
    }
}

/// Classification of one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatVerdict {
    Member,
    NonMember,
    Inconclusive,
    /// `λ = β(j+n)` for some `j`: the eigenfunction is finitely supported.
    Degenerate,
}

impl From<Membership> for HeatVerdict {
    fn from(m: Membership) -> Self {
        match m {
            Membership::Member => HeatVerdict::Member,
            Membership::NonMember => HeatVerdict::NonMember,
            Membership::Inconclusive => HeatVerdict::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatCell {
    pub re_lambda: f64,
    pub im_lambda: f64,
    /// Fitted power-law exponent of the eigenfunction; absent when degenerate.
    pub exponent: Option<f64>,
    pub verdict: HeatVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NogoVerdict {
    IncompatibleWithCompactParametrices,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NogoReport {
    pub n: usize,
    pub size: usize,
    /// `lim (β(k+1) − β(k))`.
    pub beta_inf: Complex64,
    /// Reductions applied before probing, in order.
    pub reductions: Vec<String>,
    /// Sampled constants of `c₂(k+1) ≤ |β(k)| ≤ c₁(k+1)` (estimates).
    pub c1_estimate: f64,
    pub c2_estimate: f64,
    /// Fitted power of `|μ(k)|` over the top decade (an estimate).
    pub mu_exponent_estimate: f64,
    pub cells: Vec<HeatCell>,
    /// `Re λ` at which the fitted exponent crosses `−1/2`.
    pub boundary: Option<f64>,
    /// Slope of the fitted exponent against `Re λ`.
    pub boundary_slope: Option<f64>,
    /// Fraction of non-degenerate samples right of the boundary that are
    /// eigenvalues.
    pub member_fraction_right: f64,
    /// Whether eigenvalues reach the right edge of the grid.
    pub members_at_right_edge: bool,
    pub verdict: NogoVerdict,
    pub conclusion: String,
    /// Properties that the scan does not test.
    pub not_machine_checked: Vec<String>,
}

/// Requires a nonzero limit of the increments of `β`.
fn beta_limit(beta: &CoefficientSequence) -> Result<Complex64> {
    let report = limit_class(&beta.increments(), 16, 1e-9, evaluation_budget())?;
    match report.class {
        LimitClass::NonzeroLimit(c) => Ok(c),
        LimitClass::C0 => Err(Error::InvalidInput(
            "the increments of β tend to zero; the scan requires a nonzero limit".into(),
        )),
        LimitClass::Divergent => Err(Error::InvalidInput(
            "the increments of β diverge; the scan requires a nonzero limit".into(),
        )),
    }
}

/// Reduces `U β(K) f − f U α(K)` on the weighted space of `w` to the
/// unweighted operator with positive `β` and extracted `μ`, probes the
/// eigenfunctions of `D_n^+ − λ` over the grid (in parallel, with output in
/// canonical grid order), fits the membership boundary, and concludes when a
/// right half-plane of the grid consists of eigenvalues.
pub fn nogo_scan(
    beta: &CoefficientSequence,
    alpha: &CoefficientSequence,
    w: &CoefficientSequence,
    settings: &NogoSettings,
) -> Result<NogoReport> {
    let beta_inf = beta_limit(beta)?;
    let mut reductions = Vec::new();
    let (mut b, mut a) = (beta.clone(), alpha.clone());
    if settings.beta_shift != ZERO || settings.alpha_shift != ZERO {
        b = b.add(&CoefficientSequence::constant(settings.beta_shift));
        a = a.add(&CoefficientSequence::constant(settings.alpha_shift));
        reductions.push(format!(
            "bounded shift: β → β + {}, α → α + {}",
            settings.beta_shift, settings.alpha_shift
        ));
    }
    let b = b.map(|z| Complex64::new(z.norm(), 0.0));
    reductions.push("gauge: β → |β|".into());
    let a = unweight(&a, w)?;
    reductions.push("weight transfer: α(k) → α(k) √(w(k)/w(k+1))".into());
    let mu = mu_from_alpha(&b, &a)?;
    reductions.push("μ(k) = ∏_{j<k} α(j)/β(j)".into());

    let tables = ProbeTables::new(&b, &mu, settings.n, settings.size)?;
    let window = estimate_growth_window(&b, settings.size.min(1 << 16));
    let cells: Vec<HeatCell> = settings
        .grid
        .points()
        .into_par_iter()
        .map(|lambda| match tables.probe(lambda) {
            Ok(p) => Ok(HeatCell {
                re_lambda: lambda.re,
                im_lambda: lambda.im,
                exponent: Some(p.exponent),
                verdict: p.verdict.into(),
            }),
            Err(Error::DegenerateLambda { .. }) => Ok(HeatCell {
                re_lambda: lambda.re,
                im_lambda: lambda.im,
                exponent: None,
                verdict: HeatVerdict::Degenerate,
            }),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    let points: Vec<(f64, f64)> = cells.iter().filter_map(|c| c.exponent.map(|p| (c.re_lambda, p))).collect();
    let slope = fit_slope(&points);
    let boundary = slope.filter(|s| *s < 0.0).map(|s| {
        let (xm, ym) = mean(&points);
        xm + (-0.5 - ym) / s
    });

    let (mut right, mut members, mut edge) = (0usize, 0usize, false);
    if let Some(x0) = boundary {
        for c in cells.iter().filter(|c| c.re_lambda > x0 && c.verdict != HeatVerdict::Degenerate) {
            right += 1;
            if c.verdict == HeatVerdict::Member {
                members += 1;
                edge |= c.re_lambda >= settings.grid.re_max;
            }
        }
    }
    let fraction = if right == 0 { 0.0 } else { members as f64 / right as f64 };
    let verdict = if boundary.is_some() && fraction >= HALF_PLANE_FRACTION && edge {
        NogoVerdict::IncompatibleWithCompactParametrices
    } else {
        NogoVerdict::Inconclusive
    };
    let conclusion = match (verdict, boundary) {
        (NogoVerdict::IncompatibleWithCompactParametrices, Some(x0)) => format!(
            "eigenfunctions of D_{n}^+ − λ are square summable throughout the sampled half-plane Re λ > {x0:.3} \
             ({:.1}% of samples): a half-plane of point spectrum. An operator with compact parametrices has \
             empty spectrum, all of ℂ, or isolated eigenvalues accumulating only at infinity, so D has no \
             compact parametrices.",
            100.0 * fraction,
            n = settings.n
        ),
        _ => "no right half-plane of eigenvalues was established on this grid".into(),
    };

    Ok(NogoReport {
        n: settings.n,
        size: settings.size,
        beta_inf,
        reductions,
        c1_estimate: window.c1,
        c2_estimate: window.c2,
        mu_exponent_estimate: tables.mu_exponent(),
        cells,
        boundary,
        boundary_slope: slope,
        member_fraction_right: fraction,
        members_at_right_edge: edge,
        verdict,
        conclusion,
        not_machine_checked: vec![
            "empty continuous spectrum of D_n^+ (closed range)".into(),
            "finiteness of the residual spectrum of D_n^+".into(),
        ],
    })
}

fn mean(points: &[(f64, f64)]) -> (f64, f64) {
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    (sx / m, sy / m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(text: &str) -> CoefficientSequence {
        CoefficientSequence::parse(text).unwrap()
    }

    #[test]
    fn grid_points_are_canonical() {
        let grid = LambdaGrid::default();
        let pts = grid.points();
        assert_eq!(pts.len(), 41 * 9);
        assert_eq!(pts[0], Complex64::new(-4.0, -2.0));
        assert_eq!(pts[9], Complex64::new(-3.75, -2.0));
        assert_eq!(*pts.last().unwrap(), Complex64::new(6.0, 2.0));
        assert_eq!(grid.scaled(2.0).re_max, 12.0);
    }

    #[test]
    fn model_case_boundary() {
        let settings = NogoSettings {
            size: 20_000,
            ..NogoSettings::default()
        };
        let beta = seq("k+1");
        let report = nogo_scan(&beta, &beta, &CoefficientSequence::one(), &settings).unwrap();
        let b = report.boundary.unwrap();
        assert!((b - 1.5).abs() < 0.2, "{b}");
        assert_eq!(report.verdict, NogoVerdict::IncompatibleWithCompactParametrices);
        assert_eq!(report.beta_inf, Complex64::new(1.0, 0.0));
        let degenerate = report.cells.iter().filter(|c| c.verdict == HeatVerdict::Degenerate).count();
        // λ = 2, 3, 4, 5, 6 on the real axis
        assert_eq!(degenerate, 5);
        assert!(report.mu_exponent_estimate.abs() < 1e-12);
    }

    #[test]
    fn scaled_beta_moves_the_boundary() {
        let settings = NogoSettings {
            size: 20_000,
            grid: LambdaGrid::default().scaled(2.0),
            ..NogoSettings::default()
        };
        let beta = seq("2*(k+1)");
        let report = nogo_scan(&beta, &beta, &CoefficientSequence::one(), &settings).unwrap();
        assert!((report.boundary.unwrap() - 3.0).abs() < 0.3);
        assert_eq!(report.verdict, NogoVerdict::IncompatibleWithCompactParametrices);
    }

    #[test]
    fn phases_and_weights_are_reduced_away() {
        let settings = NogoSettings {
            size: 20_000,
            ..NogoSettings::default()
        };
        // |β| = k+1 and α̃ = α √(w(k)/w(k+1)) = k+1
        let report = nogo_scan(&seq("-i*(k+1)"), &seq("(k+1)^2/(k+2)"), &seq("(k+1)^(-2)"), &settings).unwrap();
        assert!((report.boundary.unwrap() - 1.5).abs() < 0.2);
        assert!(report.reductions.len() >= 3);
        // a geometric weight underflows long before the probe length
        assert!(matches!(
            nogo_scan(&seq("k+1"), &seq("k+1"), &seq("2^(-(k+1))"), &settings),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let settings = NogoSettings {
            size: 1000,
            ..NogoSettings::default()
        };
        let beta = seq("k+1");
        // α(k) = β(k−1) vanishes at k = 0
        let err = nogo_scan(&beta, &beta.shifted(-1), &CoefficientSequence::one(), &settings).unwrap_err();
        assert_eq!(err, Error::ZeroCoefficient { name: "alpha", k: 0 });
        // bounded coefficients violate the hypothesis
        assert!(matches!(
            nogo_scan(&seq("1"), &seq("1"), &CoefficientSequence::one(), &settings),
            Err(Error::InvalidInput(_))
        ));
        // a bounded shift removes the zero
        let shifted = NogoSettings {
            alpha_shift: Complex64::new(1.0, 0.0),
            ..settings
        };
        assert!(nogo_scan(&beta, &beta.shifted(-1), &CoefficientSequence::one(), &shifted).is_ok());
    }
}
