use qthermo::base::{sample_base, BaseSystem};
use qthermo::fiber::{check_hypotheses, ModelSpec, ParamField, PotentialSpec, Verdict};
use qthermo::hyperbolic::expansion_sequence;
use qthermo::thermo::{correlation_series, fit_decay_rate, gibbs_report, implied_entropy, pressure_from_lambda};
use qthermo::transfer::{lambda_bound_violation, solve_triple, TripleParams};

fn random_mp() -> ModelSpec {
    ModelSpec::random_mp(
        ParamField::Cosine { mean: 0.5, amplitude: 0.2 },
        ParamField::Cosine { mean: 0.0, amplitude: 0.1 },
    )
}

#[test]
fn random_mp_pipeline() {
    let base = BaseSystem::golden_rotation(11);
    let model = random_mp();
    let pot = PotentialSpec::cosine(0.05, 1);
    let n = 40;
    let nb = 96;
    let sample = &sample_base(&base, 1, -(nb as i64), (n + nb) as i64).unwrap()[0];
    let triple = solve_triple(&model, &pot, sample, TripleParams::new(n, nb, 1024)).unwrap();
    assert!(lambda_bound_violation(&triple, &model, &pot).unwrap() <= 0.0);

    let p = pressure_from_lambda(&triple);
    assert!(p > 2f64.ln() - 0.05 && p < 2f64.ln() + 0.05);
    let h = implied_entropy(&triple, &pot).unwrap();
    assert!(h > 0.0 && h <= 2f64.ln() + 0.05);

    let report = gibbs_report(&triple, &model, &pot, 0.62, 0.1, 0.02).unwrap();
    let record = expansion_sequence(&model, sample, 0.62, n).unwrap().with_times(0.1);
    assert_eq!(report.times, record.times);

    let left = |x: f64| (std::f64::consts::TAU * x).cos();
    let right = |x: f64| x * x - 1.0 / 3.0;
    let c = correlation_series(&triple, &model, &pot, &left, &right, 30).unwrap();
    let fit = fit_decay_rate(&c).unwrap();
    assert!(fit.tau < 1.0);
}

#[test]
fn doubling_hypotheses_hold() {
    let base = BaseSystem::golden_rotation(3);
    let ensemble = sample_base(&base, 8, 0, 32).unwrap();
    let report = check_hypotheses(&ModelSpec::doubling(), &PotentialSpec::cosine(0.05, 1), &base, &ensemble).unwrap();
    assert_eq!(report.p.verdict, Verdict::Holds);
    assert_eq!(report.h3.verdict, Verdict::Holds);
}
