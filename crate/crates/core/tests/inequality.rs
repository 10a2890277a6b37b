use mlab_core::grid::plane_wave;
use mlab_core::inequality::*;
use mlab_core::littlewood_paley::{make_bump, BumpKind};
use mlab_core::random::PacketRanges;
use mlab_core::rearrangement::{field_lorentz_norm, lorentz_norm, LorentzParams};
use mlab_core::{Field, GridSpec};

fn grid() -> GridSpec {
    GridSpec::new(1, 8.0, 256).unwrap()
}

fn setup(trials: usize, seed: u64) -> TrialSetup {
    TrialSetup::new(grid(), trials, seed).unwrap()
}

fn indicator(grid: GridSpec, lo: f64, hi: f64) -> Field {
    Field::from_real_fn(grid, |x| if (lo..hi).contains(&x[0]) { 1.0 } else { 0.0 })
}

#[test]
fn young_l2_branch_on_nonnegative_gaussians() {
    let ranges = PacketRanges {
        nonnegative: true,
        ..PacketRanges::default()
    };
    let r = check_young(2.0, 1.0, 2.0, 2.0, &setup(32, 1).with_ranges(ranges)).unwrap();
    assert_eq!(r.ceiling, Some(1.0 + CEILING_SLACK));
    assert!(r.pass && r.worst_ratio <= 1.0 + 1e-6, "{}", r.worst_ratio);
    let r = check_young(1.5, 1.2, 2.0, 1.0, &setup(16, 1)).unwrap();
    assert!(r.ceiling.is_none() && r.pass && r.worst_ratio > 0.0);
    assert!(check_young(1.5, 2.0, 2.0, 1.0, &setup(1, 1)).is_err());
}

#[test]
fn hausdorff_young_plane_wave() {
    // |f^| is 2L on one lattice cell of measure 1/(2L), so with the Lorentz
    // normalization used here the ratio is (p/p')^(1/r), independent of L.
    for (p, r) in [(4.0, 1.0), (4.0, 4.0 / 3.0), (3.0, 2.0)] {
        let f = plane_wave(grid(), [0.75, 0.0]);
        let pc = p / (p - 1.0);
        let got = lorentz_norm(&spectrum_profile(&f), LorentzParams::new(p, r).unwrap())
            / field_lorentz_norm(&f, LorentzParams::new(pc, r).unwrap());
        let expect = (p / pc).powf(1.0 / r);
        assert!((got - expect).abs() < 1e-10 * expect, "{got} vs {expect}");
    }
    assert!(check_hausdorff_young(2.0, 1.0, &setup(1, 1)).is_err());
    let r = check_hausdorff_young(4.0, 1.0, &setup(16, 1)).unwrap();
    assert!(r.ceiling.is_none() && r.pass);
}

#[test]
fn kato_ponce_examples() {
    let ones = Field::from_real_fn(grid(), |_| 1.0);
    let r = check_kato_ponce_weight(&ones, 2.0, 1.0, 0.75, &setup(8, 2)).unwrap();
    assert!((r.worst_ratio - 1.0).abs() < 1e-10);
    // s = 0: |theta f| <= sup|theta| |f| pointwise.
    let psi = make_bump(BumpKind::Psi, 1).unwrap();
    let sup = psi.space_field(&grid()).unwrap().sup_norm();
    let r = check_kato_ponce(&psi, 2.0, 1.0, 0.0, &setup(16, 2)).unwrap();
    assert!(r.worst_ratio <= sup * (1.0 + 1e-12));
    assert_eq!(r.profile, Some(BumpKind::Psi));
    assert!(check_kato_ponce(&psi, 1.0, 1.0, 0.5, &setup(1, 2)).is_err());
    assert!(check_kato_ponce(&psi, 2.0, 1.0, -0.5, &setup(1, 2)).is_err());
}

#[test]
fn minkowski_examples() {
    let norm = LorentzParams::new(2.0, 1.0).unwrap();
    let f = indicator(grid(), -1.0, 1.0);
    assert!((minkowski_ratio(&[f], 1.0, norm) - 1.0).abs() < 1e-14);
    // k disjoint indicators of equal measure: ratio k^(1/p - 1/q).
    for (k, q, p) in [(4usize, 1.0, 2.0), (3, 1.5, 3.0)] {
        let family: Vec<Field> = (0..k)
            .map(|i| indicator(grid(), i as f64, i as f64 + 0.5))
            .collect();
        let norm = LorentzParams::new(p, 1.0).unwrap();
        let got = minkowski_ratio(&family, q, norm);
        let expect = (k as f64).powf(1.0 / p - 1.0 / q);
        assert!((got - expect).abs() < 1e-12 * expect, "{got} vs {expect}");
    }
    assert!(check_minkowski(2.0, 2.0, 1.0, 8, &setup(1, 1)).is_err());
}

#[test]
fn holder_examples() {
    let f = indicator(grid(), -1.0, 0.5);
    let l22 = LorentzParams::new(2.0, 2.0).unwrap();
    assert!((holder_ratio(&f, &f, l22, l22) - 1.0).abs() < 1e-10);
    let r = check_holder(3.0, 1.0, &setup(100, 3)).unwrap();
    assert!(r.pass && r.worst_ratio <= 1.0 + 1e-6);
    // The co-monotone trials approach the constant.
    let r = check_holder(3.0, 3.0, &setup(2, 3)).unwrap();
    assert!((r.worst_ratio - 1.0).abs() < 1e-10);
}

#[test]
fn embedding_examples() {
    let r = check_embedding(2.0, 2.0, 0.5, 2.0, 2.0, 0.5, &setup(4, 1)).unwrap();
    assert!((r.worst_ratio - 1.0).abs() < 1e-14);
    // Same p, s0 > s1: J^(s1 - s0) is convolution with a probability kernel,
    // which contracts every Lorentz norm with r <= p.
    for (p, r0) in [(2.0, 2.0), (2.0, 1.0), (3.0, 2.0)] {
        let r = check_embedding(p, r0, 1.0, p, r0, 0.25, &setup(16, 1)).unwrap();
        assert!(r.worst_ratio <= 1.0 + 1e-10, "{p} {r0}: {}", r.worst_ratio);
    }
    // (4/3, 3/4) -> (2, 1/4) in n = 1 has s0 - s1 = 1/2 but n/p0 - n/p1 = 1/4.
    assert!(check_embedding(4.0 / 3.0, 2.0, 0.75, 2.0, 2.0, 0.25, &setup(1, 1)).is_err());
    let r = check_embedding(4.0 / 3.0, 2.0, 0.75, 2.0, 2.0, 0.5, &setup(16, 1)).unwrap();
    assert!(r.pass && r.worst_ratio > 0.0);
}

fn all_reports(s: &TrialSetup) -> Vec<CheckReport> {
    let psi = make_bump(BumpKind::Psi, 1).unwrap();
    vec![
        check_young(1.5, 1.2, 2.0, 1.0, s).unwrap(),
        check_hausdorff_young(4.0, 1.0, s).unwrap(),
        check_kato_ponce(&psi, 2.0, 1.0, 0.75, s).unwrap(),
        check_minkowski(1.0, 2.0, 1.0, 8, s).unwrap(),
        check_holder(3.0, 1.0, s).unwrap(),
        check_embedding(4.0 / 3.0, 2.0, 0.75, 2.0, 2.0, 0.5, s).unwrap(),
    ]
}

#[test]
fn every_checker_is_scale_covariant() {
    let base = all_reports(&setup(6, 4));
    let scaled = all_reports(&setup(6, 4).with_amplitude(37.5));
    for (a, b) in base.iter().zip(&scaled) {
        assert_eq!(a.lemma_id, b.lemma_id);
        assert!((a.worst_ratio - b.worst_ratio).abs() < 1e-10 * a.worst_ratio, "{:?}", a.lemma_id);
    }
}

#[test]
fn reports_are_deterministic_given_the_seed() {
    let a = all_reports(&setup(6, 9));
    let b = all_reports(&setup(6, 9));
    assert_eq!(a, b);
    let c = all_reports(&setup(6, 10));
    assert!(a.iter().zip(&c).any(|(x, y)| x.worst_ratio != y.worst_ratio));
}

#[test]
fn ledger_holds_one_line_per_report() {
    let reports = all_reports(&setup(2, 1));
    let mut buf = Vec::new();
    append_ledger(&mut buf, &reports).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let back: Vec<CheckReport> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(back, reports);
    let ids: Vec<&str> = back.iter().map(|r| r.lemma_id.name()).collect();
    assert_eq!(ids, ["young", "hausdorff_young", "kato_ponce", "minkowski", "holder", "embedding"]);
}
