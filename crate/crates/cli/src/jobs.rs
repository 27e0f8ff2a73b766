//! Execution of each job kind into a JSON summary plus CSV tables.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use qdisk::algebra::AlgebraElement;
use qdisk::derivations::{
    approx_inner_defect, classify_derivation, interior, Derivation, EquivarianceLaw, TailSettings,
};
use qdisk::fourier_spectral::{appendix_verify, nogo_scan, AppendixReport, ModeOperator, Sign};
use qdisk::implementations::{
    divergence_test, implementation_defect, unitary_rotation_defect, ImplementedOperator, RotationLaw,
};
use qdisk::states::{decompose_from_projections, GnsVector, InvariantState, Space};
use qdisk::{budget, linalg, random, CoefficientSequence};

use crate::config::{
    AlgebraJob, AlgebraOperation, AppendixJob, DeriveJob, ImplementJob, JobConfig, Kind, LawCheck, ModeSpec,
    NogoJob, OperatorSpec, ParametrixJob, SpaceName, StatesJob,
};
use crate::output::{complex_columns, Artifacts, Failure, Table};

pub fn run(config: &JobConfig, seed: u64) -> Result<Artifacts, Failure> {
    match config {
        JobConfig::Algebra(job) => algebra(job, seed),
        JobConfig::Derive(job) => derive(job),
        JobConfig::States(job) => states(job),
        JobConfig::Implement(job) => implement(job),
        JobConfig::Parametrix(job) => parametrix(job),
        JobConfig::Nogo(job) => nogo(job),
        JobConfig::Appendix(job) => appendix(job, seed),
    }
}

fn sequence(text: &str) -> Result<CoefficientSequence, Failure> {
    Ok(CoefficientSequence::parse(text)?)
}

fn element(text: &str) -> Result<AlgebraElement, Failure> {
    Ok(AlgebraElement::parse(text)?)
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("summaries serialize to JSON")
}

/// Number of leading coefficients listed for elements whose coefficients
/// have no symbolic form.
const SAMPLED_COEFFICIENTS: i64 = 16;

fn samples(c: &CoefficientSequence) -> Vec<[f64; 2]> {
    (0..SAMPLED_COEFFICIENTS).map(|k| [c.eval(k).re, c.eval(k).im]).collect()
}

/// The serialized sequence, or its first coefficients as `[re, im]` pairs.
fn sequence_value(c: &CoefficientSequence) -> Value {
    serde_json::to_value(c).unwrap_or_else(|_| json!({"samples": samples(c)}))
}

/// The element record when every coefficient is symbolic or finite;
/// otherwise each mode with its first coefficients as `[re, im]` pairs.
fn element_value(a: &AlgebraElement) -> Value {
    serde_json::to_value(a).unwrap_or_else(|_| {
        let modes: Vec<Value> = a
            .modes()
            .map(|(n, c)| json!({"n": n, "samples": samples(c)}))
            .collect();
        json!({"modes": modes})
    })
}

fn algebra(job: &AlgebraJob, seed: u64) -> Result<Artifacts, Failure> {
    let operands = job.operands.iter().map(|t| element(t)).collect::<Result<Vec<_>, _>>()?;
    let arity = |n: usize| -> Result<(), Failure> {
        if operands.len() == n {
            Ok(())
        } else {
            Err(Failure::Config(format!("{:?} takes {n} operand(s), got {}", job.operation, operands.len())))
        }
    };
    let result = match job.operation {
        AlgebraOperation::Multiply => operands.iter().fold(AlgebraElement::identity(), |acc, x| acc.multiply(x)),
        AlgebraOperation::Add => operands.iter().fold(AlgebraElement::zero(), |acc, x| acc.add(x)),
        AlgebraOperation::Commutator => {
            arity(2)?;
            operands[0].commutator(&operands[1])
        }
        AlgebraOperation::Adjoint => {
            arity(1)?;
            operands[0].adjoint()
        }
        AlgebraOperation::Rotate => {
            arity(1)?;
            operands[0].rotate(job.theta)
        }
    };
    let mut artifacts = Artifacts::new(json!({
        "operation": job.operation,
        "operands": job.operands,
        "result": element_value(&result),
        "text": result.to_string(),
        "is_identity": result == AlgebraElement::identity(),
        "band": result.band(),
    }));
    if let Some(size) = job.matrix_size {
        let m = result.to_matrix(size);
        let mut table = Table::new("matrix", &["row", "col", "re", "im"]);
        for i in 0..size {
            for j in 0..size {
                let mut row = vec![i.to_string(), j.to_string()];
                row.extend(complex_columns(m[(i, j)]));
                table.push(row);
            }
        }
        artifacts.tables.push(table);
    }
    if let Some(laws) = &job.laws {
        let report = law_check(laws, seed);
        if report.worst > laws.tol {
            artifacts.fail(format!("algebra laws deviate by {:.3e} > {:.1e}", report.worst, laws.tol));
        }
        artifacts.set("laws", to_value(&report));
    }
    Ok(artifacts)
}

#[derive(Serialize)]
struct LawReport {
    triples: usize,
    seed: u64,
    associativity: f64,
    anti_multiplicativity: f64,
    rotation: f64,
    matrix_oracle: f64,
    worst: f64,
}

fn law_check(laws: &LawCheck, seed: u64) -> LawReport {
    let mut rng = random::rng(seed);
    let last = 4 * laws.band as i64 + 64;
    let size = laws.matrix_size;
    let (mut assoc, mut star, mut rot, mut oracle) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..laws.triples {
        let a = random::element(&mut rng, laws.band, 4);
        let b = random::element(&mut rng, laws.band, 4);
        let c = random::element(&mut rng, laws.band, 4);
        let theta = rng.gen_range(0.0..2.0 * PI);
        assoc = assoc.max(a.multiply(&b).multiply(&c).max_deviation(&a.multiply(&b.multiply(&c)), last));
        star = star.max(a.multiply(&b).adjoint().max_deviation(&b.adjoint().multiply(&a.adjoint()), last));
        rot = rot.max(a.multiply(&b).rotate(theta).max_deviation(&a.rotate(theta).multiply(&b.rotate(theta)), last));
        let dense = a.multiply(&b).to_matrix(size) - a.to_matrix(size) * b.to_matrix(size);
        oracle = oracle.max(linalg::max_abs_block(&dense, interior(size, b.band())));
    }
    LawReport {
        triples: laws.triples,
        seed,
        associativity: assoc,
        anti_multiplicativity: star,
        rotation: rot,
        matrix_oracle: oracle,
        worst: assoc.max(star).max(rot).max(oracle),
    }
}

fn tail_settings(window: usize, tol: f64) -> TailSettings {
    TailSettings {
        window,
        tol,
        budget: budget::evaluation_budget(),
    }
}

fn derive(job: &DeriveJob) -> Result<Artifacts, Failure> {
    let beta = sequence(&job.beta)?;
    let d = match job.kind {
        Kind::Invariant => Derivation::invariant(beta.clone()),
        Kind::Covariant => Derivation::covariant(beta.clone()),
    };
    let settings = tail_settings(job.window, job.tol);
    let classification = classify_derivation(&beta, &settings)?;
    let mut table = Table::new("defects", &["n", "defect"]);
    let mut defects = Vec::new();
    for &n in &job.defect_at {
        let report = approx_inner_defect(&beta, n, &settings)?;
        table.push(vec![n.to_string(), report.value.to_string()]);
        defects.push(json!({"n": n, "value": report.value, "from_metadata": report.from_metadata}));
    }
    let mut applied = Vec::new();
    for text in &job.apply {
        let a = element(text)?;
        let image = d.apply(&a);
        let law = EquivarianceLaw::from(d.kind);
        applied.push(json!({
            "element": text,
            "image": element_value(&image),
            "text": image.to_string(),
            "equivariance_defect": qdisk::derivations::equivariance_defect(&d, law, &a, 1.0, 32),
        }));
    }
    let mut artifacts = Artifacts::new(json!({
        "beta": job.beta,
        "kind": job.kind,
        "alpha": sequence_value(&d.alpha()),
        "generator": element_value(&d.generator()),
        "classification": classification,
        "defects": defects,
        "applied": applied,
    }));
    artifacts.tables.push(table);
    Ok(artifacts)
}

fn states(job: &StatesJob) -> Result<Artifacts, Failure> {
    let state = match (&job.omega, job.lambda_inf, &job.weights) {
        (Some(omega), None, None) => decompose_from_projections(&sequence(omega)?)?,
        (None, Some(l), Some(w)) => InvariantState::new(l, sequence(w)?)?,
        (None, Some(l), None) if l == 1.0 => InvariantState::at_infinity(),
        _ => {
            return Err(Failure::Config(
                "give either `omega`, or `lambda_inf` with `weights` (`lambda_inf` = 1 alone is τ∞)".into(),
            ))
        }
    };
    let summary = state.summary(job.table_len);
    let mut weights = Table::new("weights", &["k", "weight"]);
    for (k, w) in summary.weights.iter().enumerate() {
        weights.push(vec![k.to_string(), w.to_string()]);
    }
    let mut evaluations = Vec::new();
    for text in &job.evaluate {
        let v = state.evaluate(&element(text)?)?;
        evaluations.push(json!({"element": text, "re": v.re, "im": v.im}));
    }
    let mut norms = Vec::new();
    if !job.gns_norms.is_empty() {
        let space = Space::of_state(&state)?;
        for text in &job.gns_norms {
            let norm = GnsVector::from_element(&space, &element(text)?)?.norm()?;
            norms.push(json!({"element": text, "space": space.name(), "norm": norm}));
        }
    }
    let mut artifacts = Artifacts::new(json!({
        "state": summary,
        "evaluations": evaluations,
        "gns_norms": norms,
    }));
    artifacts.tables.push(weights);
    Ok(artifacts)
}

fn operator(spec: &OperatorSpec) -> Result<ImplementedOperator, Failure> {
    let beta = sequence(&spec.beta)?;
    let alpha = spec.alpha.as_deref().map(sequence).transpose()?;
    let weight = || -> Result<CoefficientSequence, Failure> {
        sequence(spec.w.as_deref().ok_or_else(|| Failure::Config("the weighted space needs `w`".into()))?)
    };
    Ok(match (spec.space, spec.kind) {
        (SpaceName::Fock, Kind::Invariant) => ImplementedOperator::inv_fock(beta, spec.c),
        (SpaceName::Fock, Kind::Covariant) => ImplementedOperator::cov_fock(beta),
        (SpaceName::Circle, Kind::Invariant) => ImplementedOperator::inv_circle(spec.beta_inf, spec.c),
        (SpaceName::Circle, Kind::Covariant) => ImplementedOperator::cov_circle(spec.beta_inf, spec.c),
        (SpaceName::Weighted, Kind::Invariant) => ImplementedOperator::inv_weighted(beta, alpha, weight()?)?,
        (SpaceName::Weighted, Kind::Covariant) => ImplementedOperator::cov_weighted(beta, alpha, weight()?)?,
    })
}

/// Eigenvalues of diagonal variants, singular values otherwise.
fn spectrum_table(op: &ImplementedOperator, size: usize) -> Table {
    match op.predicted_eigenvalues(size) {
        Some(values) => {
            let mut table = Table::new("eigenvalues", &["index", "re", "im"]);
            for (i, v) in values.into_iter().enumerate() {
                let mut row = vec![i.to_string()];
                row.extend(complex_columns(v));
                table.push(row);
            }
            table
        }
        None => {
            let mut table = Table::new("singular_values", &["index", "value"]);
            for (i, s) in linalg::singular_values(&op.truncation(size).left).into_iter().enumerate() {
                table.push(vec![i.to_string(), s.to_string()]);
            }
            table
        }
    }
}

fn implement(job: &ImplementJob) -> Result<Artifacts, Failure> {
    let op = operator(&job.operator)?;
    let beta = sequence(&job.operator.beta)?;
    let (d, law) = match job.operator.kind {
        Kind::Invariant => (Derivation::invariant(beta), RotationLaw::Invariant),
        Kind::Covariant => (Derivation::covariant(beta), RotationLaw::Covariant),
    };
    let mut defects = Vec::new();
    let mut worst: f64 = 0.0;
    for text in &job.generators {
        let defect = implementation_defect(&op, &d, &element(text)?, job.size)?;
        worst = worst.max(defect);
        defects.push(json!({"generator": text, "defect": defect}));
    }
    let rotation = unitary_rotation_defect(&op, law, 1.0, job.size.min(64));
    let mut artifacts = Artifacts::new(json!({
        "operator": op.name(),
        "space": op.space().name(),
        "size": job.size,
        "defects": defects,
        "max_defect": worst,
        "rotation_defect": rotation,
        "tol": job.tol,
    }));
    if worst > job.tol {
        artifacts.fail(format!("implementation defect {worst:.3e} exceeds {:.1e}", job.tol));
    }
    if rotation > job.tol {
        artifacts.fail(format!("rotation defect {rotation:.3e} exceeds {:.1e}", job.tol));
    }
    artifacts.tables.push(spectrum_table(&op, job.size.min(256)));
    Ok(artifacts)
}

fn parametrix(job: &ParametrixJob) -> Result<Artifacts, Failure> {
    let op = operator(&job.operator)?;
    let report = divergence_test(&op, &tail_settings(job.window, job.tol))?;
    let mut artifacts = Artifacts::new(json!({
        "operator": op.name(),
        "space": op.space().name(),
        "verdict": report.verdict,
        "ladder": report.ladder,
        "witness": report.witness,
        "from_metadata": report.from_metadata,
    }));
    artifacts.tables.push(spectrum_table(&op, job.table_len));
    Ok(artifacts)
}

fn nogo(job: &NogoJob) -> Result<Artifacts, Failure> {
    let report = nogo_scan(&sequence(&job.beta)?, &sequence(&job.alpha)?, &sequence(&job.w)?, &job.settings())?;
    let mut table = Table::new("heatmap", &["re_lambda", "im_lambda", "exponent", "verdict"]);
    for cell in &report.cells {
        let verdict = to_value(&cell.verdict);
        table.push(vec![
            cell.re_lambda.to_string(),
            cell.im_lambda.to_string(),
            cell.exponent.map_or(String::new(), |e| e.to_string()),
            verdict.as_str().unwrap_or_default().to_string(),
        ]);
    }
    let mut summary = to_value(&report);
    if let Value::Object(map) = &mut summary {
        map.remove("cells");
        map.insert("beta".into(), json!(job.beta));
        map.insert("alpha".into(), json!(job.alpha));
        map.insert("w".into(), json!(job.w));
    }
    let mut artifacts = Artifacts::new(summary);
    artifacts.tables.push(table);
    Ok(artifacts)
}

fn mode_operator(spec: &ModeSpec) -> Result<ModeOperator, Failure> {
    let beta = sequence(&spec.beta)?;
    Ok(match (&spec.mu, &spec.alpha) {
        (Some(_), Some(_)) => return Err(Failure::Config("give `mu` or `alpha`, not both".into())),
        (None, Some(alpha)) => ModeOperator::from_alpha(spec.sign, spec.adjointed, spec.n, beta, sequence(alpha)?)?,
        (mu, None) => {
            let mu = mu.as_deref().map(sequence).transpose()?.unwrap_or_else(CoefficientSequence::one);
            ModeOperator::new(spec.sign, spec.adjointed, spec.n, beta, mu)?
        }
    })
}

fn random_mode(rng: &mut impl Rng) -> Result<(ModeOperator, usize, Complex64), Failure> {
    let beta = CoefficientSequence::affine(
        Complex64::new(rng.gen_range(0.5..2.0), 0.0),
        random::complex(rng) + 1.0,
    );
    let mu = CoefficientSequence::parse(&format!("1 + {}*k", rng.gen_range(0.0..1.0)))?;
    let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
    let op = ModeOperator::new(sign, rng.gen_bool(0.5), rng.gen_range(1..=3), beta, mu)?;
    let size = rng.gen_range(8..=64);
    let lambda = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.5..1.5));
    Ok((op, size, lambda))
}

fn appendix(job: &AppendixJob, seed: u64) -> Result<Artifacts, Failure> {
    let mut cases: Vec<(String, AppendixReport)> = Vec::new();
    match &job.operator {
        Some(spec) => {
            let op = mode_operator(spec)?;
            cases.push((op.name(), appendix_verify(&op.truncation(job.size), job.lambda)?));
        }
        None => {
            let mut rng = random::rng(seed);
            for _ in 0..job.seeds {
                let (op, size, lambda) = random_mode(&mut rng)?;
                cases.push((op.name(), appendix_verify(&op.truncation(size), lambda)?));
            }
        }
    }
    let mut table = Table::new(
        "appendix",
        &["operator", "size", "re_lambda", "im_lambda", "resolvent", "parametrix_right", "parametrix_left", "block", "max_condition"],
    );
    let mut worst: f64 = 0.0;
    for (name, r) in &cases {
        worst = worst.max(r.worst());
        table.push(vec![
            name.clone(),
            r.size.to_string(),
            r.re_lambda.to_string(),
            r.im_lambda.to_string(),
            r.resolvent.to_string(),
            r.parametrix_right.to_string(),
            r.parametrix_left.to_string(),
            r.block.to_string(),
            r.max_condition.to_string(),
        ]);
    }
    let reports: Vec<Value> = cases
        .iter()
        .map(|(name, r)| json!({"operator": name, "report": r}))
        .collect();
    let mut artifacts = Artifacts::new(json!({
        "seed": job.operator.is_none().then_some(seed),
        "cases": reports,
        "worst_residual": worst,
        "tol": job.tol,
    }));
    if worst > job.tol {
        artifacts.fail(format!("appendix residual {worst:.3e} exceeds {:.1e}", job.tol));
    }
    artifacts.tables.push(table);
    Ok(artifacts)
}
