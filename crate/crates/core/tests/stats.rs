use implicit_ie::fixtures_dir;
use implicit_ie::qa::{AnswerRecord, PairedRow, ScoreDistribution, ScoreField};
use implicit_ie::stats::*;
use proptest::prelude::*;

/// Two-sided, greater and less p-values by walking all 2^n sign vectors
/// over the ranks of an untied sample.
fn enumerate_p(diffs: &[f64]) -> (f64, f64, f64) {
    let mut mags: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let rank = |d: f64| mags.iter().position(|m| *m == d.abs()).unwrap() as u64 + 1;
    let observed: u64 = diffs.iter().filter(|d| **d > 0.0).map(|d| rank(*d)).sum();
    let n = diffs.len();
    let (mut ge, mut le) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: u64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i as u64 + 1).sum();
        ge += u64::from(w >= observed);
        le += u64::from(w <= observed);
    }
    let total = (1u64 << n) as f64;
    let (g, l) = (ge as f64 / total, le as f64 / total);
    ((2.0 * g.min(l)).min(1.0), g, l)
}

fn zeros(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

#[test]
fn identical_samples_are_degenerate() {
    let x = [0.5, 1.0, 0.0];
    assert_eq!(wilcoxon_signed_rank(&x, &x, Alternative::TwoSided), Err(StatsError::DegenerateSample));
}

#[test]
fn precondition_errors() {
    assert_eq!(
        wilcoxon_signed_rank(&[1.0], &[1.0, 2.0], Alternative::TwoSided),
        Err(StatsError::LengthMismatch { x: 1, y: 2 })
    );
    assert_eq!(wilcoxon_signed_rank(&[], &[], Alternative::TwoSided), Err(StatsError::Empty));
    assert_eq!(wilcoxon_signed_rank(&[f64::NAN], &[0.0], Alternative::TwoSided), Err(StatsError::NonFinite));
}

#[test]
fn six_differences_match_enumeration() {
    let d = [1.0, 2.0, 3.0, 4.0, 5.0, -6.0];
    let r = wilcoxon_signed_rank(&d, &zeros(6), Alternative::TwoSided).unwrap();
    assert_eq!(r.w_statistic, 15.0);
    assert_eq!(r.method, Method::Exact);
    let (two, greater, _) = enumerate_p(&d);
    // W+ >= 15 iff the negative ranks sum to at most 6: 14 of the 64 subsets
    assert_eq!(greater, 14.0 / 64.0);
    assert!((r.p_value - 2.0 * greater).abs() < 1e-12);
    assert!((r.p_value - two).abs() < 1e-12);
}

#[test]
fn zero_differences_are_dropped() {
    let r = wilcoxon_signed_rank(&[1.0, 0.0, 3.0, -2.0], &zeros(4), Alternative::TwoSided).unwrap();
    assert_eq!((r.n_input, r.n_effective), (4, 3));
    assert_eq!(r.zero_method, "wilcox");
}

/// z-statistic written out directly from ranks, tie groups and the
/// continuity correction, independent of the library code path.
fn z_oracle(diffs: &[f64]) -> f64 {
    let nz: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let n = nz.len() as f64;
    let mut w = 0.0;
    let mut tie_sum = 0.0;
    for d in &nz {
        let below = nz.iter().filter(|e| e.abs() < d.abs()).count() as f64;
        let equal = nz.iter().filter(|e| e.abs() == d.abs()).count() as f64;
        if *d > 0.0 {
            w += below + (equal + 1.0) / 2.0;
        }
        // each member of a tie group of size t adds (t^3 - t) / t
        tie_sum += (equal * equal * equal - equal) / equal;
    }
    let mu = n * (n + 1.0) / 4.0;
    let sigma = (n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_sum / 48.0).sqrt();
    ((w - mu).abs() - 0.5).max(0.0) / sigma
}

fn erfc_two_sided(z: f64) -> f64 {
    statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
}

#[test]
fn large_sample_matches_closed_form_z() {
    // 200 pairs on a 0, 0.5, 1 score grid with a lean towards the first
    let mut state = 12345u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) as f64 / (1u64 << 31) as f64
    };
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for _ in 0..200 {
        x.push(if next() < 0.8 { 1.0 } else { 0.5 });
        y.push([0.0, 0.5, 1.0][(next() * 3.0) as usize]);
    }
    let r = wilcoxon_signed_rank(&x, &y, Alternative::TwoSided).unwrap();
    assert_eq!(r.method, Method::NormalApproximation);
    let diffs: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
    let z = z_oracle(&diffs);
    assert!((r.z.unwrap() - z).abs() < 1e-12);
    assert!((r.p_value - erfc_two_sided(z)).abs() < 1e-12, "{} vs {}", r.p_value, erfc_two_sided(z));
}

#[test]
fn ties_force_the_approximation_even_when_small() {
    let r = wilcoxon_signed_rank(&[1.0, 1.0, 2.0, 3.0], &zeros(4), Alternative::TwoSided).unwrap();
    assert_eq!(r.method, Method::NormalApproximation);
    let r = wilcoxon_signed_rank(&[1.0, 1.5, 2.0, 3.0], &zeros(4), Alternative::TwoSided).unwrap();
    assert_eq!(r.method, Method::Exact);
}

#[test]
fn threshold_boundary() {
    let x: Vec<f64> = (1..=25).map(f64::from).collect();
    assert_eq!(wilcoxon_signed_rank(&x, &zeros(25), Alternative::Greater).unwrap().method, Method::Exact);
    let x: Vec<f64> = (1..=26).map(f64::from).collect();
    let r = wilcoxon_signed_rank(&x, &zeros(26), Alternative::Greater).unwrap();
    assert_eq!(r.method, Method::NormalApproximation);
    assert!(r.p_value > 0.0);
}

#[test]
fn uniform_shift_is_significant_with_exact_p() {
    // every implicit score sits 0.3 or more below its explicit partner; the
    // gaps differ per row so the magnitudes are untied and the test is exact
    let n = 12;
    let rows: Vec<PairedRow> = (0..n)
        .map(|i| PairedRow {
            entity_id: format!("Q{i}"),
            explicit: 0.9,
            implicit: 0.6 - 0.01 * i as f64,
            explicit_failure: false,
            implicit_failure: false,
        })
        .collect();
    let dist = ScoreDistribution {
        metric_id: "baseline".into(),
        field: ScoreField::Score,
        rows,
    };
    let report = compare_conditions(&dist, &CompareOptions::default()).unwrap();
    assert_eq!(report.test.method, Method::Exact);
    assert!((report.test.p_value - 2.0 * 0.5f64.powi(n)).abs() < 1e-15);
    assert!(report.significant);
}

#[test]
fn constant_shift_of_point_three() {
    // every difference equals 0.3: all tied, so the approximation applies,
    // and the result must still be strongly significant
    let x: Vec<f64> = (0..30).map(|i| 0.3 + f64::from(i % 3) * 0.25).collect();
    let y: Vec<f64> = x.iter().map(|v| v - 0.3).collect();
    let r = wilcoxon_signed_rank(&x, &y, Alternative::TwoSided).unwrap();
    assert_eq!(r.n_effective, 30);
    assert!(r.p_value < 1e-5);
}

#[test]
fn significance_is_strict() {
    assert!(!is_significant(0.05, 0.05));
    assert!(is_significant(0.0499999, 0.05));
}

#[test]
fn invalid_alpha_is_rejected() {
    let dist = ScoreDistribution {
        metric_id: "baseline".into(),
        field: ScoreField::Score,
        rows: vec![],
    };
    let opts = CompareOptions { alpha: 1.5, ..Default::default() };
    assert_eq!(compare_conditions(&dist, &opts), Err(StatsError::InvalidAlpha(1.5)));
}

fn failure_fixture() -> Vec<AnswerRecord> {
    implicit_ie::jsonl::read(&fixtures_dir().join("qa/failure_fixture.jsonl")).unwrap()
}

#[test]
fn failure_fixture_report_renders_rates() {
    let dist = ScoreDistribution::from_records(&failure_fixture(), ScoreField::Score, "baseline").unwrap();
    let report = compare_conditions(&dist, &CompareOptions::default()).unwrap();
    assert_eq!(report.implicit.failures, 146);
    assert_eq!(report.explicit.failures, 13);
    let md = report.to_markdown();
    assert!(md.contains("14.60% against 1.30%"), "{md}");
    let json = serde_json::to_value(&report).unwrap();
    for key in ["n_input", "n_effective", "w", "p", "method", "alternative", "significant", "alpha"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert_eq!(json["alternative"], "two-sided");
    assert!(json["including_failures"].is_object());
}

#[test]
fn similarity_report_counts_weak_matches() {
    let rows = vec![
        PairedRow { entity_id: "a".into(), explicit: 0.9, implicit: 0.5, explicit_failure: false, implicit_failure: false },
        PairedRow { entity_id: "b".into(), explicit: 0.7, implicit: 0.2, explicit_failure: false, implicit_failure: false },
        PairedRow { entity_id: "c".into(), explicit: 0.55, implicit: 0.0, explicit_failure: false, implicit_failure: true },
    ];
    let dist = ScoreDistribution { metric_id: "baseline".into(), field: ScoreField::SemanticDistance, rows };
    let r = compare_conditions(&dist, &CompareOptions::default()).unwrap();
    assert_eq!(r.test.n_input, 2);
    assert_eq!(r.including_failures.as_ref().unwrap().n_input, 3);
    let low = r.low_similarity.unwrap();
    assert_eq!((low.threshold, low.explicit_below, low.implicit_below), (0.6, 1, 2));
    assert!((r.explicit.median - 0.7).abs() < 1e-12);
}

/// Distinct non-zero magnitudes on a 1/8 grid, so sums stay exact.
fn untied(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::sample::subsequence((1..=40).collect::<Vec<i32>>(), n)
        .prop_flat_map(|mags| {
            let len = mags.len();
            (Just(mags), prop::collection::vec(any::<bool>(), len), Just(()))
        })
        .prop_map(|(mags, signs, _)| {
            mags.iter().zip(signs).map(|(m, s)| if s { *m as f64 / 8.0 } else { -(*m as f64) / 8.0 }).collect()
        })
        .prop_shuffle()
}

proptest! {
    #[test]
    fn exact_matches_enumeration(d in untied(1..=12)) {
        let r = wilcoxon_signed_rank(&d, &zeros(d.len()), Alternative::TwoSided).unwrap();
        let g = wilcoxon_signed_rank(&d, &zeros(d.len()), Alternative::Greater).unwrap();
        let l = wilcoxon_signed_rank(&d, &zeros(d.len()), Alternative::Less).unwrap();
        let (two, greater, less) = enumerate_p(&d);
        prop_assert!((r.p_value - two).abs() < 1e-12);
        prop_assert!((g.p_value - greater).abs() < 1e-12);
        prop_assert!((l.p_value - less).abs() < 1e-12);
    }

    #[test]
    fn result_invariants(x in prop::collection::vec(0i32..5, 1..60), y in prop::collection::vec(0i32..5, 60)) {
        let x: Vec<f64> = x.iter().map(|v| *v as f64 / 4.0).collect();
        let y: Vec<f64> = y[..x.len()].iter().map(|v| *v as f64 / 4.0).collect();
        match wilcoxon_signed_rank(&x, &y, Alternative::TwoSided) {
            Ok(r) => {
                let n = r.n_effective as f64;
                prop_assert!(r.n_effective <= r.n_input);
                prop_assert!(r.w_statistic >= 0.0 && r.w_statistic <= n * (n + 1.0) / 2.0);
                prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
                let (_, tied) = signed_ranks(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
                prop_assert_eq!(r.method == Method::Exact, r.n_effective <= EXACT_THRESHOLD && !tied);
            }
            Err(e) => prop_assert_eq!(e, StatsError::DegenerateSample),
        }
    }

    #[test]
    fn swapping_samples_mirrors_w(x in prop::collection::vec(0i32..6, 1..40), y in prop::collection::vec(0i32..6, 40)) {
        let x: Vec<f64> = x.iter().map(|v| *v as f64).collect();
        let y: Vec<f64> = y[..x.len()].iter().map(|v| *v as f64).collect();
        if let Ok(a) = wilcoxon_signed_rank(&x, &y, Alternative::TwoSided) {
            let b = wilcoxon_signed_rank(&y, &x, Alternative::TwoSided).unwrap();
            let n = a.n_effective as f64;
            prop_assert_eq!(a.w_statistic + b.w_statistic, n * (n + 1.0) / 2.0);
            prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
        }
    }

    #[test]
    fn translation_invariance(x in prop::collection::vec(-16i32..16, 1..40), y in prop::collection::vec(-16i32..16, 40), c in -64i32..64) {
        let x: Vec<f64> = x.iter().map(|v| *v as f64 / 4.0).collect();
        let y: Vec<f64> = y[..x.len()].iter().map(|v| *v as f64 / 4.0).collect();
        let shift = |v: &[f64]| v.iter().map(|a| a + c as f64 / 2.0).collect::<Vec<_>>();
        prop_assert_eq!(
            wilcoxon_signed_rank(&x, &y, Alternative::TwoSided),
            wilcoxon_signed_rank(&shift(&x), &shift(&y), Alternative::TwoSided)
        );
    }

    #[test]
    fn exact_and_approximate_agree(d in untied(10..=25)) {
        let exact = wilcoxon_signed_rank(&d, &zeros(d.len()), Alternative::TwoSided).unwrap();
        let opts = WilcoxonOptions { exact_threshold: 0, ..Default::default() };
        let approx = wilcoxon_with(&d, &zeros(d.len()), &opts).unwrap();
        prop_assert_eq!(exact.method, Method::Exact);
        prop_assert_eq!(approx.method, Method::NormalApproximation);
        prop_assert!((exact.p_value - approx.p_value).abs() <= 0.02, "{} vs {}", exact.p_value, approx.p_value);
    }

    #[test]
    fn growing_positive_differences_never_raises_greater_p(d in untied(1..=30), k in 1i32..8) {
        let before = wilcoxon_signed_rank(&d, &zeros(d.len()), Alternative::Greater).unwrap();
        let grown: Vec<f64> = d.iter().map(|v| if *v > 0.0 { v + 5.0 + k as f64 } else { *v }).collect();
        let after = wilcoxon_signed_rank(&grown, &zeros(d.len()), Alternative::Greater).unwrap();
        prop_assert!(after.p_value <= before.p_value + 1e-12, "{} -> {}", before.p_value, after.p_value);
    }
}
