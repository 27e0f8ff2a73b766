//! Job configuration: one JSON document per run, tagged by `command`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qdisk::fourier_spectral::{LambdaGrid, NogoSettings, Sign};

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn default_window() -> usize {
    16
}

fn default_tail_tol() -> f64 {
    1e-9
}

/// A single batch job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum JobConfig {
    Algebra(AlgebraJob),
    Derive(DeriveJob),
    States(StatesJob),
    Implement(ImplementJob),
    Parametrix(ParametrixJob),
    Nogo(NogoJob),
    Appendix(AppendixJob),
}

impl JobConfig {
    pub fn name(&self) -> &'static str {
        match self {
            JobConfig::Algebra(_) => "algebra",
            JobConfig::Derive(_) => "derive",
            JobConfig::States(_) => "states",
            JobConfig::Implement(_) => "implement",
            JobConfig::Parametrix(_) => "parametrix",
            JobConfig::Nogo(_) => "nogo",
            JobConfig::Appendix(_) => "appendix",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraOperation {
    /// Product of all operands, left to right.
    Multiply,
    /// Sum of all operands.
    Add,
    /// `[a, b]` of two operands.
    Commutator,
    /// Adjoint of a single operand.
    Adjoint,
    /// `ρ_θ` of a single operand.
    Rotate,
}

/// Randomised law check over `triples` seeded triples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawCheck {
    pub triples: usize,
    #[serde(default = "LawCheck::default_band")]
    pub band: usize,
    #[serde(default = "LawCheck::default_tol")]
    pub tol: f64,
    /// Truncation size of the dense-matrix comparison.
    #[serde(default = "LawCheck::default_size")]
    pub matrix_size: usize,
}

impl LawCheck {
    fn default_band() -> usize {
        3
    }
    fn default_tol() -> f64 {
        1e-12
    }
    fn default_size() -> usize {
        32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJob {
    pub operation: AlgebraOperation,
    /// Elements in the textual grammar (`U`, `U*`, `e_0`, `[k+1]`, ...).
    pub operands: Vec<String>,
    #[serde(default)]
    pub theta: f64,
    /// When set, the result is also written as a dense `N × N` truncation.
    #[serde(default)]
    pub matrix_size: Option<usize>,
    #[serde(default)]
    pub laws: Option<LawCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Invariant,
    Covariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeriveJob {
    pub beta: String,
    #[serde(default = "DeriveJob::default_kind")]
    pub kind: Kind,
    /// Elements to which the derivation is applied.
    #[serde(default)]
    pub apply: Vec<String>,
    /// Indices `n` at which the approximate-inner defect is reported.
    #[serde(default)]
    pub defect_at: Vec<usize>,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_tail_tol")]
    pub tol: f64,
}

impl DeriveJob {
    fn default_kind() -> Kind {
        Kind::Invariant
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatesJob {
    /// `ω(k) = τ(P_k)`; mutually exclusive with `lambda_inf`/`weights`.
    #[serde(default)]
    pub omega: Option<String>,
    #[serde(default)]
    pub lambda_inf: Option<f64>,
    #[serde(default)]
    pub weights: Option<String>,
    /// Elements to evaluate the state on.
    #[serde(default)]
    pub evaluate: Vec<String>,
    /// Elements whose GNS norm is reported.
    #[serde(default)]
    pub gns_norms: Vec<String>,
    /// Number of weights listed in the output.
    #[serde(default = "StatesJob::default_table")]
    pub table_len: usize,
}

impl StatesJob {
    fn default_table() -> usize {
        16
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceName {
    Fock,
    Circle,
    Weighted,
}

/// An implementation operator: a GNS space, a transformation law and its
/// coefficient data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub space: SpaceName,
    #[serde(default = "OperatorSpec::default_kind")]
    pub kind: Kind,
    /// Coefficient sequence (Fock and weighted spaces, and the derivation
    /// checked by `implement`).
    #[serde(default = "OperatorSpec::default_beta")]
    pub beta: String,
    /// Increment limit (circle space).
    #[serde(default = "one")]
    pub beta_inf: Complex64,
    /// Free additive constant.
    #[serde(default = "zero")]
    pub c: Complex64,
    /// Right coefficient of weighted operators; defaults to the canonical one.
    #[serde(default)]
    pub alpha: Option<String>,
    /// Weight of the weighted space.
    #[serde(default)]
    pub w: Option<String>,
}

impl OperatorSpec {
    fn default_kind() -> Kind {
        Kind::Invariant
    }
    fn default_beta() -> String {
        "k+1".into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImplementJob {
    pub operator: OperatorSpec,
    #[serde(default = "ImplementJob::default_size")]
    pub size: usize,
    #[serde(default = "ImplementJob::default_generators")]
    pub generators: Vec<String>,
    #[serde(default = "ImplementJob::default_tol")]
    pub tol: f64,
}

impl ImplementJob {
    fn default_size() -> usize {
        64
    }
    fn default_generators() -> Vec<String> {
        vec!["U".into(), "U*".into(), "e_0".into()]
    }
    fn default_tol() -> f64 {
        1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametrixJob {
    pub operator: OperatorSpec,
    /// Number of eigenvalues (or pairs per axis) written to the CSV table.
    #[serde(default = "ParametrixJob::default_table")]
    pub table_len: usize,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_tail_tol")]
    pub tol: f64,
}

impl ParametrixJob {
    fn default_table() -> usize {
        32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NogoJob {
    pub beta: String,
    pub alpha: String,
    #[serde(default = "NogoJob::default_w")]
    pub w: String,
    #[serde(default = "NogoJob::default_n")]
    pub n: usize,
    #[serde(default = "NogoJob::default_size")]
    pub size: usize,
    #[serde(default)]
    pub grid: LambdaGrid,
    #[serde(default = "zero")]
    pub beta_shift: Complex64,
    #[serde(default = "zero")]
    pub alpha_shift: Complex64,
}

impl NogoJob {
    fn default_w() -> String {
        "1".into()
    }
    fn default_n() -> usize {
        NogoSettings::default().n
    }
    fn default_size() -> usize {
        NogoSettings::default().size
    }

    pub fn settings(&self) -> NogoSettings {
        NogoSettings {
            n: self.n,
            size: self.size,
            grid: self.grid,
            beta_shift: self.beta_shift,
            alpha_shift: self.alpha_shift,
        }
    }
}

/// A mode operator `D_n^±` (optionally adjointed) given by `β` and either
/// `μ` or `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub sign: Sign,
    #[serde(default)]
    pub adjointed: bool,
    pub n: usize,
    pub beta: String,
    #[serde(default)]
    pub mu: Option<String>,
    #[serde(default)]
    pub alpha: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppendixJob {
    /// Fixed operator; when absent, `seeds` random mode operators are drawn
    /// from the `--seed` stream.
    #[serde(default)]
    pub operator: Option<ModeSpec>,
    #[serde(default = "AppendixJob::default_size")]
    pub size: usize,
    #[serde(default = "AppendixJob::default_lambda")]
    pub lambda: Complex64,
    #[serde(default = "AppendixJob::default_seeds")]
    pub seeds: usize,
    #[serde(default = "AppendixJob::default_tol")]
    pub tol: f64,
}

impl AppendixJob {
    fn default_size() -> usize {
        32
    }
    fn default_lambda() -> Complex64 {
        Complex64::new(0.0, 1.0)
    }
    fn default_seeds() -> usize {
        20
    }
    fn default_tol() -> f64 {
        1e-9
    }
}
