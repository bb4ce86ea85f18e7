//! Joint-missingness targets of the five BreastCancer pairs at N = 116.

use missq_core::missgen::{JmPairSpec, JmPattern, VariableRef};
use missq_core::synthetic::breast_cancer_like;
use missq_core::{inject_jm, jm_matrices, profile, GenerationMode, MissingnessSpec};

/// `(j, k, p_j, p_k, pattern, p_jk, expected E)`
const PAIRS: [(&str, &str, f64, f64, JmPattern, f64, f64); 5] = [
    ("Age", "BMI", 0.32, 0.34, JmPattern::Below, 0.036, 0.109),
    ("Glucose", "Insulin", 0.33, 0.33, JmPattern::Below, 0.073, 0.109),
    ("HOMA", "Leptin", 0.26, 0.41, JmPattern::Equal, 0.107, 0.107),
    ("Adiponectin", "Resistin", 0.46, 0.33, JmPattern::Above, 0.211, 0.152),
    ("MCP.1", "Classification", 0.46, 0.50, JmPattern::Above, 0.383, 0.23),
];

fn spec(seed: u64) -> MissingnessSpec {
    let mut spec = MissingnessSpec::new(GenerationMode::Jm, seed);
    spec.jm_pairs = PAIRS
        .iter()
        .map(|&(j, k, p_j, p_k, pattern, p_jk, _)| JmPairSpec {
            j: VariableRef::from(j),
            k: VariableRef::from(k),
            p_j,
            p_k,
            pattern,
            p_jk: Some(p_jk),
        })
        .collect();
    spec
}

#[test]
fn expected_joint_missingness_matches_targets() {
    let base = breast_cancer_like(0);
    let (d, manifest) = inject_jm(&base, &spec(7)).unwrap();
    let p = profile(&d).unwrap();
    for &(j, k, _, _, _, _, e) in &PAIRS {
        let (j, k) = (d.index_of(j).unwrap(), d.index_of(k).unwrap());
        let got = p.entries[j].q_am * p.entries[k].q_am;
        assert!((got - e).abs() <= 0.005, "{j}-{k}: E = {got}, target {e}");
    }
    let counts: Vec<usize> = manifest.jm_pairs.iter().map(|t| t.joint_count).collect();
    assert_eq!(counts, vec![4, 8, 12, 24, 44]);
    let q_am = p.q_am();
    let min = q_am.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = q_am.iter().cloned().fold(0.0, f64::max);
    assert!((min - 0.259).abs() < 0.0005);
    assert_eq!(max, 0.5);
}

#[test]
fn seeded_pairs_give_directional_extremes() {
    for seed in 0..20 {
        let (d, _) = inject_jm(&breast_cancer_like(0), &spec(seed)).unwrap();
        let jm = jm_matrices(&d).unwrap();
        let pair = |a: &str, b: &str| jm.directional.get(d.index_of(a).unwrap(), d.index_of(b).unwrap()).unwrap();
        assert!((pair("Age", "BMI") - -0.073).abs() <= 0.01);
        assert!((pair("MCP.1", "Classification") - 0.151).abs() <= 0.01);
        assert!((jm.magnitude.get(8, 9).unwrap() - 0.379).abs() < 0.0005);
    }
}
