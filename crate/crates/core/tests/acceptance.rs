//! Acceptance harness: runs every acceptance criterion at its stated
//! tolerance, prints one PASS/FAIL line per criterion and exits nonzero when
//! any criterion fails.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;

use qdisk::algebra::AlgebraElement;
use qdisk::derivations::{
    approx_inner_defect, classify_derivation, equivariance_defect, interior, Derivation, DerivationClass,
    EquivarianceLaw, TailSettings,
};
use qdisk::fourier_spectral::{
    apply_mode, appendix_verify, formal_kernel, gauge_defect, kernel_growth_exponent, nogo_scan, round_trip_defect,
    weight_transfer_defect, ModeOperator, NogoSettings, NogoVerdict, Sign,
};
use qdisk::implementations::{
    divergence_test, implementation_defect, outer_sigma_min, unitary_rotation_defect, ImplementedOperator,
    ParametrixVerdict, RotationLaw,
};
use qdisk::linalg;
use qdisk::random;
use qdisk::sequences::Poly;
use qdisk::states::{decompose_from_projections, InvariantState, WeightedSpace};
use qdisk::CoefficientSequence;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

type Outcome = Result<String, String>;

fn seq(text: &str) -> CoefficientSequence {
    CoefficientSequence::parse(text).unwrap()
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn algebra_laws() -> Outcome {
    let mut rng = random::rng(1);
    let (mut assoc, mut star, mut rot, mut oracle) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let size = 32;
    for t in 0..200 {
        let a = random::element(&mut rng, 3, 4);
        let b = random::element(&mut rng, 3, 4);
        let c = random::element(&mut rng, 3, 4);
        let theta = rng.gen_range(0.0..2.0 * PI);
        let last = 64;
        assoc = assoc.max(a.multiply(&b).multiply(&c).max_deviation(&a.multiply(&b.multiply(&c)), last));
        star = star.max(a.multiply(&b).adjoint().max_deviation(&b.adjoint().multiply(&a.adjoint()), last));
        rot = rot.max(a.multiply(&b).rotate(theta).max_deviation(&a.rotate(theta).multiply(&b.rotate(theta)), last));
        let dense = a.multiply(&b).to_matrix(size) - a.to_matrix(size) * b.to_matrix(size);
        oracle = oracle.max(linalg::max_abs_block(&dense, interior(size, b.band())));
        ensure(assoc.max(star).max(rot).max(oracle) <= 1e-12, || {
            format!("triple {t}: assoc {assoc:.2e}, star {star:.2e}, rotation {rot:.2e}, oracle {oracle:.2e}")
        })?;
    }
    Ok(format!(
        "200 triples; max deviations assoc {assoc:.1e}, star {star:.1e}, rotation {rot:.1e}, matrix oracle {oracle:.1e}"
    ))
}

fn derivation_classification() -> Outcome {
    let beta = seq("sqrt(k+1)");
    let settings = TailSettings::default();
    let class = classify_derivation(&beta, &settings).map_err(|e| e.to_string())?;
    ensure(class.class == DerivationClass::ApproximatelyInner, || format!("classified {:?}", class.class))?;
    let mut worst: f64 = 0.0;
    for n in [10usize, 100, 1000] {
        let value = approx_inner_defect(&beta, n, &settings).map_err(|e| e.to_string())?.value;
        let expected = (n as f64 + 2.0).sqrt() - (n as f64 + 1.0).sqrt();
        worst = worst.max((value - expected).abs());
        ensure((value - expected).abs() <= 1e-10, || format!("n={n}: defect {value} vs {expected}"))?;
    }
    Ok(format!("approximately_inner; defect error {worst:.1e} at n in {{10,100,1000}}"))
}

fn state_decomposition() -> Outcome {
    let state = decompose_from_projections(&seq("2^(-(k+2))")).map_err(|e| e.to_string())?;
    ensure((state.lambda_0() - 0.5).abs() <= 1e-12, || format!("λ0 = {}", state.lambda_0()))?;
    ensure((state.lambda_inf() - 0.5).abs() <= 1e-12, || format!("λ∞ = {}", state.lambda_inf()))?;
    for k in 0..200 {
        let w = state.weights().eval(k);
        let expected = 2f64.powi(-(k as i32 + 1));
        ensure((w - re(expected)).norm() <= 1e-12, || format!("w({k}) = {w}"))?;
    }
    let mut rng = random::rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let a = random::element(&mut rng, 3, 6);
        let value = state.evaluate(&a).map_err(|e| e.to_string())?;
        let mut combination = InvariantState::at_infinity().evaluate(&a).map_err(|e| e.to_string())? * state.lambda_inf();
        for k in 0..80 {
            let pure = InvariantState::pure(k).evaluate(&a).map_err(|e| e.to_string())?;
            combination += pure * state.weights().eval(k as i64) * state.lambda_0();
        }
        worst = worst.max((value - combination).norm());
    }
    ensure(worst <= 1e-10, || format!("convex combination deviation {worst:.2e}"))?;
    Ok(format!("λ0 = λ∞ = 0.5, w = 2^-(k+1); 50 elements within {worst:.1e}"))
}

fn implementation_identity() -> Outcome {
    let beta = seq("k+1");
    let w = seq("2^(-(k+1))");
    let d_inv = Derivation::invariant(beta.clone());
    let d_cov = Derivation::covariant(beta.clone());
    let variants: Vec<(ImplementedOperator, &Derivation, &Derivation, RotationLaw)> = vec![
        (ImplementedOperator::inv_fock(beta.clone(), ZERO), &d_inv, &d_cov, RotationLaw::Invariant),
        (ImplementedOperator::inv_circle(ONE, ZERO), &d_inv, &d_cov, RotationLaw::Invariant),
        (
            ImplementedOperator::inv_weighted(beta.clone(), None, w.clone()).map_err(|e| e.to_string())?,
            &d_inv,
            &d_cov,
            RotationLaw::Invariant,
        ),
        (ImplementedOperator::cov_fock(beta.clone()), &d_cov, &d_inv, RotationLaw::Covariant),
        (ImplementedOperator::cov_circle(ONE, ONE), &d_cov, &d_inv, RotationLaw::Covariant),
        (
            ImplementedOperator::cov_weighted(beta.clone(), None, w).map_err(|e| e.to_string())?,
            &d_cov,
            &d_inv,
            RotationLaw::Covariant,
        ),
    ];
    let generators = [
        AlgebraElement::shift(),
        AlgebraElement::shift_adjoint(),
        AlgebraElement::projection(0),
    ];
    let size = 128;
    let (mut worst, mut worst_rot, mut control): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for (op, d, wrong, law) in &variants {
        for a in &generators {
            let defect = implementation_defect(op, d, a, size).map_err(|e| e.to_string())?;
            ensure(defect <= 1e-9, || format!("{} on {a}: defect {defect:.2e}", op.name()))?;
            worst = worst.max(defect);
        }
        let u = AlgebraElement::shift();
        let negative = implementation_defect(op, wrong, &u, size).map_err(|e| e.to_string())?;
        ensure(negative > 0.1, || format!("{} against the other derivation: {negative:.2e}", op.name()))?;
        control = control.min(negative);
        for theta in [PI / 5.0, 1.7] {
            let rot = unitary_rotation_defect(op, *law, theta, 16);
            ensure(rot <= 1e-10, || format!("{} rotation defect {rot:.2e}", op.name()))?;
            worst_rot = worst_rot.max(rot);
            let other = match law {
                RotationLaw::Invariant => RotationLaw::Covariant,
                RotationLaw::Covariant => RotationLaw::Invariant,
            };
            let negative = unitary_rotation_defect(op, other, theta, 16);
            ensure(negative > 0.1, || format!("{} wrong rotation law: {negative:.2e}", op.name()))?;
            control = control.min(negative);
        }
    }
    let mut rng = random::rng(4);
    for _ in 0..20 {
        let a = random::element(&mut rng, 3, 4);
        for theta in [0.0, PI / 5.0, PI, 1.7] {
            for (d, law) in [(&d_inv, EquivarianceLaw::Invariant), (&d_cov, EquivarianceLaw::Covariant)] {
                let e = equivariance_defect(d, law, &a, theta, 32);
                ensure(e <= 1e-10, || format!("equivariance defect {e:.2e} at θ={theta}"))?;
                worst_rot = worst_rot.max(e);
            }
        }
        let neg = equivariance_defect(&d_cov, EquivarianceLaw::Invariant, &AlgebraElement::shift(), 1.7, 32);
        ensure(neg > 0.1, || format!("covariant derivation passes the invariant law: {neg:.2e}"))?;
        control = control.min(neg);
    }
    Ok(format!(
        "six variants at N={size}: defect {worst:.1e}; equivariance {worst_rot:.1e}; negative controls ≥ {control:.2}"
    ))
}

fn parametrix_criteria() -> Outcome {
    let settings = TailSettings::default();
    let fock = divergence_test(&ImplementedOperator::inv_fock(seq("k+1"), ZERO), &settings).map_err(|e| e.to_string())?;
    ensure(fock.verdict == ParametrixVerdict::CompactParametrices, || format!("inv_fock: {:?}", fock.verdict))?;
    let circle = divergence_test(&ImplementedOperator::inv_circle(ZERO, re(2.0)), &settings).map_err(|e| e.to_string())?;
    ensure(circle.verdict == ParametrixVerdict::NotCompact, || format!("inv_circle: {:?}", circle.verdict))?;
    let witness = circle.witness.ok_or("inv_circle: no witness")?;
    ensure(witness.samples.iter().all(|(_, v)| *v == re(2.0)), || "witness is not constant".into())?;
    let op = ImplementedOperator::inv_weighted(seq("k+1"), Some(seq("k - i*sqrt(k+1)")), seq("2^(-(k+1))"))
        .map_err(|e| e.to_string())?;
    let weighted = divergence_test(&op, &settings).map_err(|e| e.to_string())?;
    ensure(weighted.verdict == ParametrixVerdict::CompactParametrices, || {
        format!("inv_weighted: {:?}", weighted.verdict)
    })?;
    let sigma: Vec<f64> = [64, 256, 1024]
        .iter()
        .map(|&n| outer_sigma_min(&op, n))
        .collect::<qdisk::Result<_>>()
        .map_err(|e| e.to_string())?;
    for pair in sigma.windows(2) {
        ensure(pair[1] >= 1.5 * pair[0], || format!("σ_min trend {sigma:?}"))?;
    }
    Ok(format!(
        "inv_fock compact; inv_circle(0) not compact with constant witness; inv_weighted compact, outer σ_min {:.3} → {:.3} → {:.3}",
        sigma[0], sigma[1], sigma[2]
    ))
}

fn mode_identities() -> Outcome {
    let mut rng = random::rng(17);
    let mut kernel_worst: f64 = 0.0;
    for _ in 0..20 {
        let beta = CoefficientSequence::affine(re(rng.gen_range(0.5..3.0)), random::complex(&mut rng) + 2.0);
        let mu = CoefficientSequence::eventually(
            Vec::new(),
            Poly::new(vec![ONE, random::complex(&mut rng) + 1.5, re(rng.gen_range(0.0..1.0))]),
        );
        let n = rng.gen_range(1..=4);
        for (sign, adj) in [(Sign::Plus, false), (Sign::Minus, true)] {
            let op = ModeOperator::new(sign, adj, n, beta.clone(), mu.clone()).map_err(|e| e.to_string())?;
            let f = formal_kernel(&op).map_err(|e| e.to_string())?.to_sequence();
            for k in 0..200 {
                let own = op.apply(|j| if j == k { f.eval(j) } else { ZERO }, k).norm();
                let rest = op.apply(|j| if j == k { ZERO } else { f.eval(j) }, k).norm();
                let rel = apply_mode(&op, &f, k).norm() / (own + rest).max(f64::MIN_POSITIVE);
                kernel_worst = kernel_worst.max(rel);
                ensure(rel <= 1e-12, || format!("{} kernel residual {rel:.2e} at k={k}", op.name()))?;
            }
        }
    }
    let mut trip_worst: f64 = 0.0;
    for seed in 0..5 {
        let mut rng = random::rng(100 + seed);
        let beta = CoefficientSequence::affine(re(rng.gen_range(0.5..2.0)), random::complex(&mut rng) + 2.0);
        let mu = CoefficientSequence::eventually(Vec::new(), Poly::new(vec![ONE, re(rng.gen_range(0.1..1.0))]));
        let g: Vec<Complex64> = (0..rng.gen_range(1..=16)).map(|_| random::complex(&mut rng)).collect();
        for sign in [Sign::Plus, Sign::Minus] {
            for adj in [false, true] {
                let op = ModeOperator::new(sign, adj, rng.gen_range(1..=3), beta.clone(), mu.clone())
                    .map_err(|e| e.to_string())?;
                let d = round_trip_defect(&op, &g, 48);
                trip_worst = trip_worst.max(d);
                ensure(d <= 1e-12, || format!("{} round trip {d:.2e}", op.name()))?;
            }
        }
    }
    let mut gauge_worst: f64 = 0.0;
    for sign in [Sign::Plus, Sign::Minus] {
        for adj in [false, true] {
            let op = ModeOperator::from_alpha(sign, adj, 2, seq("(2+i)*(k+1) + exp(i*k)"), seq("k+2"))
                .map_err(|e| e.to_string())?;
            let d = gauge_defect(&op, 48).map_err(|e| e.to_string())?;
            gauge_worst = gauge_worst.max(d);
            ensure(d <= 1e-10, || format!("{} gauge defect {d:.2e}", op.name()))?;
        }
    }
    let space = WeightedSpace::new(seq("2^(-(k+1))")).map_err(|e| e.to_string())?;
    let mut rng = random::rng(6);
    let mut transfer_worst: f64 = 0.0;
    for _ in 0..20 {
        let f = random::element(&mut rng, 3, 6);
        let d = weight_transfer_defect(&space, &f).map_err(|e| e.to_string())?;
        transfer_worst = transfer_worst.max(d);
        ensure(d <= 1e-10, || format!("weight transfer defect {d:.2e}"))?;
    }
    Ok(format!(
        "kernels {kernel_worst:.1e} (rel), round trips {trip_worst:.1e}, gauge {gauge_worst:.1e}, weight transfer {transfer_worst:.1e}"
    ))
}

fn nogo_reproduction() -> Outcome {
    let beta = seq("k+1");
    let op = ModeOperator::new(Sign::Plus, false, 1, beta.clone(), CoefficientSequence::one()).map_err(|e| e.to_string())?;
    let exponent = kernel_growth_exponent(&op, &[1_000, 10_000, 100_000]).map_err(|e| e.to_string())?;
    ensure((exponent - 3.0).abs() <= 0.1, || format!("kernel exponent {exponent}"))?;
    let report = nogo_scan(&beta, &beta, &CoefficientSequence::one(), &NogoSettings::default()).map_err(|e| e.to_string())?;
    let boundary = report.boundary.ok_or("no boundary fitted")?;
    ensure((boundary - 1.5).abs() <= 0.2, || format!("boundary {boundary}"))?;
    ensure(report.verdict == NogoVerdict::IncompatibleWithCompactParametrices, || {
        format!("verdict {:?}", report.verdict)
    })?;
    Ok(format!(
        "kernel exponent {exponent:.4}; boundary Re λ = {boundary:.3} at N={}; members right of boundary {:.0}%: {}",
        report.size,
        100.0 * report.member_fraction_right,
        report.conclusion
    ))
}

fn appendix_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = random::rng(1000 + seed);
        let beta = CoefficientSequence::affine(re(rng.gen_range(0.5..2.0)), random::complex(&mut rng) + 1.0);
        let mu = CoefficientSequence::eventually(Vec::new(), Poly::new(vec![ONE, re(rng.gen_range(0.0..1.0))]));
        let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
        let op = ModeOperator::new(sign, rng.gen_bool(0.5), rng.gen_range(1..=3), beta, mu).map_err(|e| e.to_string())?;
        let size = rng.gen_range(8..=64);
        let lambda = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.5..1.5));
        let report = appendix_verify(&op.truncation(size), lambda).map_err(|e| format!("seed {seed}: {e}"))?;
        worst = worst.max(report.worst());
        ensure(report.worst() <= 1e-9, || format!("seed {seed} ({} N={size}): {report:?}", op.name()))?;
    }
    Ok(format!("20 seeds, N ≤ 64: worst residual {worst:.1e}"))
}

fn circle_sanity() -> Outcome {
    let op = ImplementedOperator::inv_circle(ONE, ZERO);
    for m in [3usize, 40, 300] {
        let size = 2 * m + 1;
        let t = op.truncation(size).left;
        let mut spectrum: Vec<f64> = Vec::with_capacity(size);
        for i in 0..size {
            for j in 0..size {
                ensure(i == j || t[(i, j)] == ZERO, || format!("off-diagonal entry at ({i}, {j})"))?;
            }
            ensure(t[(i, i)].im == 0.0, || format!("complex eigenvalue {}", t[(i, i)]))?;
            spectrum.push(t[(i, i)].re);
        }
        spectrum.sort_by(f64::total_cmp);
        let expected: Vec<f64> = (-(m as i64)..=m as i64).map(|n| n as f64).collect();
        ensure(spectrum == expected, || format!("spectrum for M={m} differs: {spectrum:?}"))?;
    }
    Ok("spectrum of the 2M+1 truncation is exactly {-M..M} for M in {3, 40, 300}".into())
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "algebra laws", limit: Some(Duration::from_secs(10)), run: algebra_laws },
        Criterion { id: 2, name: "derivation classification", limit: None, run: derivation_classification },
        Criterion { id: 3, name: "state decomposition", limit: None, run: state_decomposition },
        Criterion { id: 4, name: "implementation identity", limit: None, run: implementation_identity },
        Criterion { id: 5, name: "compact parametrix criteria", limit: Some(Duration::from_secs(60)), run: parametrix_criteria },
        Criterion { id: 6, name: "mode operator identities", limit: None, run: mode_identities },
        Criterion { id: 7, name: "no-go reproduction", limit: Some(Duration::from_secs(120)), run: nogo_reproduction },
        Criterion { id: 8, name: "resolvent and parametrix identities", limit: None, run: appendix_identities },
        Criterion { id: 9, name: "circle spectrum", limit: None, run: circle_sanity },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = match panic::catch_unwind(AssertUnwindSafe(c.run)) {
            Ok(outcome) => outcome,
            Err(payload) => Err(payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("runtime {elapsed:.1?} exceeds {limit:.0?}")),
            (other, _) => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {} {} ({:.2} s): {detail}", c.id, c.name, elapsed.as_secs_f64()),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {} {} ({:.2} s): {detail}", c.id, c.name, elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
