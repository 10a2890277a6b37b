use mlab_core::hardy::*;
use mlab_core::random::{PacketRanges, WavePackets};
use mlab_core::symbol::MultiplierSymbol;
use mlab_core::{Complex64, Field, GridSpec};
use proptest::prelude::*;

fn packets(seed: u64) -> WavePackets {
    WavePackets::random(1, PacketRanges::default(), seed).unwrap()
}

#[test]
fn l2_constants_are_refinement_stable() {
    // Below 2^2 the top smoothing layer is the identity, so M f >= |f|.
    let k = Some((-3, 2));
    let bounds = |grid: GridSpec| {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for seed in 0..16 {
            let f = band_limit(&packets(seed).sample(&grid).unwrap(), 4.0);
            let ratio = hardy_norm(&f, 2.0, k).unwrap() / f.lp_norm(2.0);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        (lo, hi)
    };
    let (a_lo, a_hi) = bounds(GridSpec::new(1, 8.0, 512).unwrap());
    let (b_lo, b_hi) = bounds(GridSpec::new(1, 8.0, 1024).unwrap());
    assert!(a_lo >= 1.0 - 1e-9 && b_lo >= 1.0 - 1e-9);
    assert!(a_hi < 10.0);
    assert!((a_lo / b_lo - 1.0).abs() < 0.05 && (a_hi / b_hi - 1.0).abs() < 0.05);
}

fn moment(atom: &Atom, alpha: [i32; 2]) -> f64 {
    let grid = *atom.values.grid();
    (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let u = [x[0] - atom.cube.center[0], x[1] - atom.cube.center[1]];
            atom.values.values()[i].re * u[0].powi(alpha[0]) * u[1].powi(alpha[1])
        })
        .sum::<f64>()
        * grid.cell_measure()
}

#[test]
fn atoms_have_support_size_and_moments() {
    let cases = [
        (GridSpec::new(1, 8.0, 512).unwrap(), 1.0, Some(0), vec![[0, 0]]),
        (GridSpec::new(1, 8.0, 512).unwrap(), 0.5, Some(1), vec![[0, 0], [1, 0]]),
        (GridSpec::new(1, 8.0, 512).unwrap(), 1.5, None, vec![]),
        (GridSpec::new(2, 4.0, 64).unwrap(), 0.75, Some(0), vec![[0, 0]]),
        (GridSpec::new(2, 4.0, 64).unwrap(), 0.6, Some(1), vec![[0, 0], [1, 0], [0, 1]]),
    ];
    for (grid, p, order, alphas) in cases {
        let dim = grid.dim();
        assert_eq!(Atom::moment_order(dim, p), order);
        let cube = Cube { center: [0.5, -0.25], side: 2.0 };
        let atom = make_atom(&grid, cube, p, 7).unwrap();
        for i in 0..grid.len() {
            if !cube.contains(grid.point(i), dim) {
                assert_eq!(atom.values.values()[i], Complex64::new(0.0, 0.0));
            }
        }
        let size = cube.measure(dim).powf(-1.0 / p);
        assert!((atom.values.sup_norm() - size).abs() < 1e-12 * size);
        let scale = size * cube.measure(dim);
        for alpha in alphas {
            assert!(moment(&atom, alpha).abs() < 1e-10 * scale, "p {p} {alpha:?}");
        }
    }
}

#[test]
fn atom_rejects_bad_cubes() {
    let grid = GridSpec::new(1, 8.0, 256).unwrap();
    assert!(make_atom(&grid, Cube { center: [0.0, 0.0], side: 0.1 }, 1.0, 0).is_err());
    assert!(make_atom(&grid, Cube { center: [7.5, 0.0], side: 2.0 }, 1.0, 0).is_err());
    assert!(make_atom(&grid, Cube { center: [0.0, 0.0], side: 1.0 }, 0.0, 0).is_err());
}

#[test]
fn atom_norms_are_uniform_in_scale() {
    // Same seed gives the same profile in the cube's scaled coordinates, so the
    // three atoms are dilates of each other.
    let grid = GridSpec::new(1, 32.0, 16384).unwrap();
    let norms: Vec<f64> = [0.25, 1.0, 4.0]
        .iter()
        .map(|&side| {
            let atom = make_atom(&grid, Cube { center: [0.0, 0.0], side }, 1.0, 11).unwrap();
            hardy_norm(&atom.values, 1.0, Some((-6, 6))).unwrap()
        })
        .collect();
    let max = norms.iter().cloned().fold(0.0, f64::max);
    let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min > 0.0 && max / min < 1.25, "{norms:?}");
}

#[test]
fn constant_symbols_scale_the_norm() {
    let grid = GridSpec::new(1, 8.0, 512).unwrap();
    let f = packets(3).sample(&grid).unwrap();
    for c in [Complex64::new(2.5, 0.0), Complex64::new(0.0, -0.5), Complex64::new(3.0, 4.0)] {
        let sigma = MultiplierSymbol::constant(grid, c);
        for p in [0.5, 1.0, 2.0] {
            let r = operator_ratio(&sigma, &f, p, None).unwrap();
            assert!((r - c.norm()).abs() < 1e-12 * c.norm(), "{c} {p}: {r}");
        }
    }
    let zero = Field::zeros(grid);
    let one = MultiplierSymbol::constant(grid, Complex64::new(1.0, 0.0));
    assert!(operator_ratio(&one, &zero, 1.0, None).is_err());
}

#[test]
fn synthesis_is_the_weighted_sum() {
    let grid = GridSpec::new(1, 8.0, 256).unwrap();
    let a = make_atom(&grid, Cube { center: [-2.0, 0.0], side: 1.0 }, 1.0, 1).unwrap();
    let b = make_atom(&grid, Cube { center: [2.0, 0.0], side: 2.0 }, 1.0, 2).unwrap();
    let (la, lb) = (Complex64::new(2.0, 0.0), Complex64::new(0.0, -3.0));
    let decomp = AtomicDecomposition { terms: vec![(la, a.clone()), (lb, b.clone())] };
    let f = synthesize(&decomp).unwrap();
    let expect = a.values.scale(la).add(&b.values.scale(lb)).unwrap();
    assert!(f.max_abs_diff(&expect) < 1e-14 * expect.sup_norm());
    assert_eq!(decomp.coefficient_norm(), 5.0);
    assert!(synthesize(&AtomicDecomposition::default()).is_err());
}

#[test]
fn dilation_law() {
    // ||f(2 .)||_{H^p} = 2^(-1/p) ||f||_{H^p} once the window moves by one octave.
    let grid = GridSpec::new(1, 16.0, 2048).unwrap();
    for seed in 0..3 {
        let w = packets(seed);
        let f = w.sample(&grid).unwrap();
        let g = Field::from_fn(grid, |x| w.value([2.0 * x[0], 0.0]));
        for p in [0.5, 1.0, 2.0] {
            let a = hardy_norm(&f, p, Some((0, 3))).unwrap();
            let b = hardy_norm(&g, p, Some((1, 4))).unwrap();
            let expect = 2f64.powf(-1.0 / p) * a;
            assert!((b - expect).abs() < 0.01 * expect, "p {p}: {b} vs {expect}");
        }
    }
}

#[test]
fn maximal_function_histogram_counts_every_cell() {
    let grid = GridSpec::new(1, 8.0, 256).unwrap();
    let m = maximal_function(&packets(4).sample(&grid).unwrap(), None).unwrap();
    assert_eq!(m.k_range, default_k_range(&grid));
    assert_eq!(m.argmax_histogram.iter().map(|h| h.1).sum::<usize>(), grid.len());
    assert!(maximal_function(&m.field, Some((0, 5))).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quasi_norm_is_p_subadditive(s1 in 0u64..1000, s2 in 0u64..1000, p in 0.3f64..=1.0) {
        let grid = GridSpec::new(1, 8.0, 256).unwrap();
        let f = packets(s1).sample(&grid).unwrap();
        let g = packets(s2).sample(&grid).unwrap();
        let sum = hardy_norm(&f.add(&g).unwrap(), p, None).unwrap().powf(p);
        let parts = hardy_norm(&f, p, None).unwrap().powf(p) + hardy_norm(&g, p, None).unwrap().powf(p);
        prop_assert!(sum <= parts * (1.0 + 1e-12));
    }
}
