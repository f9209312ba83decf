//! End-to-end use of the public API.

use qstat::descr::moments;
use qstat::hypothesis::{anova_oneway, anova_oneway_summary, t_test_pooled, t_test_pooled_summary};
use qstat::resample::{histogram, permutation_null, permutation_p_value};
use qstat::sim::{clt_experiment, generate_treatment_groups, CltExperimentConfig, TreatmentConfig, TreatmentMode};
use qstat::workflow::{recommend, variance_homogeneity_check, ChosenMethod, WorkflowConfig};
use qstat::{Df, DistSpec, GroupSample, RngSeed, StatisticKind, Tail, TestMethod, TestResult};

fn expand(id: &str, counts: &[(f64, usize)]) -> GroupSample {
    GroupSample::new(id, counts.iter().flat_map(|&(v, k)| std::iter::repeat_n(v, k)).collect()).unwrap()
}

fn triple() -> Vec<GroupSample> {
    vec![
        expand("g1", &[(3.0, 5), (4.0, 3), (5.0, 3), (6.0, 7), (7.0, 3), (8.0, 5)]),
        expand("g2", &[(1.0, 1), (6.0, 8), (8.0, 12), (9.0, 3), (10.0, 2)]),
        expand("g3", &[(2.0, 1), (5.0, 1), (6.0, 3), (7.0, 8), (8.0, 10), (9.0, 1), (10.0, 2)]),
    ]
}

#[test]
fn raw_and_summary_forms_agree() {
    let gs = triple();
    let s: Vec<_> = gs.iter().map(|g| moments(g).unwrap()).collect();
    let raw = t_test_pooled(&gs[0], &gs[1], Tail::TwoSided).unwrap();
    let summ = t_test_pooled_summary(s[0].mean, s[0].variance, 26, s[1].mean, s[1].variance, 26, Tail::TwoSided)
        .unwrap();
    assert_eq!(raw.statistic, summ.statistic);
    let raw = anova_oneway(&gs).unwrap();
    let means: Vec<f64> = s.iter().map(|x| x.mean).collect();
    let vars: Vec<f64> = s.iter().map(|x| x.variance).collect();
    let summ = anova_oneway_summary(&means, &vars, &[26, 26, 26]).unwrap();
    assert!((raw.statistic - summ.statistic).abs() < 1e-10 * raw.statistic);
    assert_eq!(raw.df, Df::Pair(2.0, 75.0));
}

#[test]
fn permutation_p_for_fixture_is_small() {
    let gs = triple();
    let observed = anova_oneway(&gs).unwrap().statistic;
    let dist = permutation_null(&gs, StatisticKind::FAnova, 20_000, RngSeed::new(1)).unwrap();
    let p = permutation_p_value(observed, &dist, Tail::Right).unwrap();
    assert!(p < 0.002, "{p}");
    assert!(p >= 1.0 / 20_001.0);
}

#[test]
fn clt_exponential_and_uniform() {
    for (dist, seed) in [(DistSpec::Exponential { lambda: 0.5 }, 3), (DistSpec::Uniform { a: 0.0, b: 1.0 }, 4)] {
        let cfg = CltExperimentConfig { dist, k: 5, n: 25, n_iter: 100_000, seed: RngSeed::new(seed) };
        let d = clt_experiment(&cfg).unwrap();
        assert!(d.ks_distance.unwrap() < 0.02, "{dist:?} {:?}", d.ks_distance);
        assert!((d.mean().unwrap() - 120.0 / 118.0).abs() < 0.01);
        assert!((d.histogram.as_ref().unwrap().total_mass() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn workflow_on_generated_data() {
    let cfg = TreatmentConfig {
        mu_org: 4.0,
        effects: vec![0.0, -1.2, -3.1],
        noise_sigma: 0.5,
        mode: TreatmentMode::Systematic,
        hetero_sigma: 0.0,
        n_subjects: 24,
        seed: RngSeed::new(2),
    };
    let gs = generate_treatment_groups(&cfg).unwrap();
    let vc = variance_homogeneity_check(&gs, 0.25).unwrap();
    assert!((vc.ratio - 1.0).abs() < 1e-9);
    let report = recommend(&gs, &WorkflowConfig::default()).unwrap();
    assert_eq!(report.chosen_method, ChosenMethod::AnovaOneway);
    assert!(report.significant);
}

#[test]
fn json_round_trips() {
    let spec: DistSpec = serde_json::from_str(r#"{"kind":"student_t","df":50.0}"#).unwrap();
    assert_eq!(spec, DistSpec::StudentT { df: 50.0 });
    let r = anova_oneway(&triple()).unwrap();
    let back: TestResult = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back.method, TestMethod::AnovaOneway);
    assert_eq!(back.df, r.df);
    let seed: RngSeed = serde_json::from_str(r#"{"master_seed":7,"stream_index":0}"#).unwrap();
    assert_eq!(seed, RngSeed::new(7));
    let h = histogram(&[1.0, 2.0, 2.5], 2).unwrap();
    let back: qstat::HistogramData = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
    assert_eq!(back, h);
}
