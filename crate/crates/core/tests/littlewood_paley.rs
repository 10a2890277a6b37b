use mlab_core::counterexample::sigma_counter;
use mlab_core::grid::{plane_wave, Field};
use mlab_core::littlewood_paley::*;
use mlab_core::rearrangement::LorentzParams;
use mlab_core::symbol::MultiplierSymbol;
use mlab_core::{Complex64, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn radius(xi: [f64; 2]) -> f64 {
    xi[0].hypot(xi[1])
}

fn bump(kind: BumpKind, dim: usize) -> BumpProfile {
    make_bump(kind, dim).unwrap()
}

#[test]
fn partition_of_unity_on_sixteen_octaves() {
    let psi = bump(BumpKind::Psi, 2);
    let grid = GridSpec::new(2, 8.0, 512).unwrap();
    let mut checked = 0;
    for k in 0..grid.len() {
        let r = radius(grid.frequency(k));
        if (1.0 / 16.0..=16.0).contains(&r) {
            let sum: f64 = (-6..=6).map(|j| psi.frequency_value(2f64.powi(-j) * r)).sum();
            assert!((sum - 1.0).abs() < 1e-10, "{r}: {sum}");
            checked += 1;
        }
    }
    assert!(checked > 10_000);
}

#[test]
fn theta_is_one_on_the_support_of_psi() {
    let psi = bump(BumpKind::Psi, 1);
    let theta = bump(BumpKind::Theta, 1);
    for i in 0..100_000 {
        let r = 5.0 * i as f64 / 100_000.0;
        let p = psi.frequency_value(r);
        assert_eq!(theta.frequency_value(r) * p, p);
        let three = psi.frequency_value(0.5 * r) + p + psi.frequency_value(2.0 * r);
        assert!((theta.frequency_value(r) - three).abs() < 1e-15);
    }
}

#[test]
fn phi_has_unit_mass() {
    // The window must be wide enough that the tail of Phi is below 1e-8.
    for (dim, l, n) in [(1, 64.0, 2048), (2, 16.0, 96)] {
        let grid = GridSpec::new(dim, l, n).unwrap();
        let phi = bump(BumpKind::Phi, dim).space_field(&grid).unwrap();
        assert!((phi.integral().re - 1.0).abs() < 1e-8, "{}", phi.integral());
    }
}

#[test]
fn eta_profiles() {
    for dim in [1, 2] {
        let eta = bump(BumpKind::Eta, dim);
        let tilde = bump(BumpKind::EtaTilde, dim);
        assert_eq!(eta.frequency_value(1e-3), 0.0);
        assert_eq!(eta.frequency_value(0.5), 0.0);
        assert_eq!(tilde.frequency_value(1e-3), 1.0);
        assert_eq!(tilde.frequency_value(0.0), 1.0);
        assert_eq!(tilde.frequency_value(1e-2), 0.0);
        assert!((eta.space_value(0.0) - 1.0).abs() < 1e-8);
        let mut c = f64::INFINITY;
        for i in 0..=50 {
            let v = eta.space_value(0.01 * i as f64 / 50.0);
            assert!(v >= 0.0);
            c = c.min(v);
        }
        // eta varies on the scale 4000, so it is nearly 1 on |x| <= 1/100.
        assert!(c > 0.99, "{c}");
        assert!(eta.space_value(3000.0) >= 0.0);
    }
}

#[test]
fn lp_operator_on_plane_waves() {
    let grid = GridSpec::new(1, 8.0, 256).unwrap();
    let psi = bump(BumpKind::Psi, 1);
    let k = grid.wavenumber_index(13).unwrap();
    let xi = grid.frequency(k);
    let w = plane_wave(grid, xi);
    let l0 = lp_operator(&w, 0, &psi).unwrap();
    let expect = w.scale(psi.frequency_value(radius(xi)).into());
    assert!(l0.max_abs_diff(&expect) < 1e-12);
}

/// Random combination of lattice plane waves with `lo <= |xi| <= hi`.
fn banded(grid: GridSpec, lo: f64, hi: f64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Field::zeros(grid);
    for k in 0..grid.len() {
        let r = radius(grid.frequency(k));
        if (lo..=hi).contains(&r) && rng.gen_bool(0.3) {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            f = f.add(&plane_wave(grid, grid.frequency(k)).scale(c)).unwrap();
        }
    }
    f
}

#[test]
fn pieces_sum_back_and_theta_reproduces() {
    let grid = GridSpec::new(1, 8.0, 128).unwrap();
    let psi = bump(BumpKind::Psi, 1);
    let theta = bump(BumpKind::Theta, 1);
    let f = banded(grid, 1.0 / 8.0, 3.9, 1);
    let mut sum = Field::zeros(grid);
    for j in -6..=6 {
        let lj = lp_operator(&f, j, &psi).unwrap();
        let again = lp_operator(&lj, j, &theta).unwrap();
        assert!(again.max_abs_diff(&lj) < 1e-12 * f.sup_norm());
        sum = sum.add(&lj).unwrap();
    }
    assert!(sum.max_abs_diff(&f) < 1e-10 * f.sup_norm());
}

#[test]
fn distant_pieces_are_orthogonal() {
    let grid = GridSpec::new(2, 4.0, 64).unwrap();
    let psi = bump(BumpKind::Psi, 2);
    let f = banded(grid, 0.0, 8.0, 2);
    for j in -2..=2 {
        for jp in -2..=2i32 {
            if (j - jp).abs() >= 2 {
                // The multipliers have disjoint supports; the fields agree up to FFT round-off.
                let a = psi.frequency_samples(&grid, 2f64.powi(-j));
                let b = psi.frequency_samples(&grid, 2f64.powi(-jp));
                assert!(a.iter().zip(&b).all(|(x, y)| x * y == 0.0));
                let both = lp_operator(&lp_operator(&f, jp, &psi).unwrap(), j, &psi).unwrap();
                assert!(both.sup_norm() < 1e-14 * f.sup_norm());
            }
        }
    }
}

#[test]
fn square_function_examples() {
    let grid = GridSpec::new(1, 8.0, 256).unwrap();
    let psi = bump(BumpKind::Psi, 1);
    let w = plane_wave(grid, grid.frequency(grid.wavenumber_index(16).unwrap()));
    let s = square_function(&w, (-4, 4), &psi).unwrap();
    assert!(s.values().iter().all(|v| (v.re - 1.0).abs() < 1e-12));
    assert_eq!(square_function(&Field::zeros(grid), (-4, 4), &psi).unwrap().sup_norm(), 0.0);
    let f = banded(grid, 0.1, 10.0, 3);
    let s = square_function(&f, (-4, 4), &psi).unwrap();
    let parts: f64 = (-4..=4)
        .map(|j| lp_operator(&f, j, &psi).unwrap().lp_norm(2.0).powi(2))
        .sum();
    assert!((s.lp_norm(2.0) - parts.sqrt()).abs() < 1e-12 * parts.sqrt());
}

#[test]
fn square_function_constants_are_refinement_stable() {
    let psi = bump(BumpKind::Psi, 1);
    let measure = |grid: GridSpec| {
        let (mut c, mut big_c) = (f64::INFINITY, 0.0f64);
        for seed in 0..20 {
            let f = banded(grid, 0.25, 4.0, seed);
            let ratio = square_function(&f, (-4, 4), &psi).unwrap().lp_norm(2.0) / f.lp_norm(2.0);
            c = c.min(ratio);
            big_c = big_c.max(ratio);
        }
        (c, big_c)
    };
    let (c0, c1) = measure(GridSpec::new(1, 8.0, 128).unwrap());
    let (d0, d1) = measure(GridSpec::new(1, 8.0, 256).unwrap());
    assert!(c0 > 0.5 && c1 <= 1.0 + 1e-12);
    assert!((c0 / d0 - 1.0).abs() < 0.2 && (c1 / d1 - 1.0).abs() < 0.2);
}

#[test]
fn dyadic_pieces_of_simple_symbols() {
    let grid = GridSpec::new(1, 8.0, 256).unwrap();
    let piece_grid = GridSpec::new(1, 4.0, 256).unwrap();
    let psi = bump(BumpKind::Psi, 1);
    let one = MultiplierSymbol::constant(grid, Complex64::new(1.0, 0.0));
    for j in -2..=2i32 {
        let band = move |xi: [f64; 2]| {
            let r = radius(xi);
            let inside = r > 2f64.powi(j - 1) && r < 2f64.powi(j + 1);
            Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        };
        let banded_sym = MultiplierSymbol::from_closed_form(grid, band).unwrap();
        let a = dyadic_piece(&one, j, &psi, &piece_grid).unwrap();
        let b = dyadic_piece(&banded_sym, j, &psi, &piece_grid).unwrap();
        for i in 0..piece_grid.len() {
            let expect = psi.frequency_value(radius(piece_grid.point(i)));
            assert_eq!(a.values()[i].re, expect);
            assert_eq!(b.values()[i].re, expect);
        }
    }
    let (lo, hi) = resolvable_window(&grid);
    assert!(dyadic_piece(&one, hi + 1, &psi, &piece_grid).is_err());
    assert!(dyadic_piece(&one, lo - 1, &psi, &piece_grid).is_err());
}

#[test]
fn hormander_norm_of_constant_and_homogeneous_symbols() {
    let grid = GridSpec::new(2, 8.0, 64).unwrap();
    let piece_grid = GridSpec::new(2, 4.0, 64).unwrap();
    let psi = bump(BumpKind::Psi, 2);
    let lz = LorentzParams::new(1.5, 1.0).unwrap();
    let one = MultiplierSymbol::constant(grid, Complex64::new(1.0, 0.0));
    let r = hormander_norm(&one, 0.75, lz, None, &psi, &piece_grid).unwrap();
    assert!(r.windowed);
    for p in &r.pieces {
        assert_eq!(p.norm, r.pieces[0].norm);
    }
    let riesz = |xi: [f64; 2]| {
        let r = radius(xi);
        Complex64::new(if r > 0.0 { xi[0] / r } else { 0.0 }, 0.0)
    };
    let sym = MultiplierSymbol::from_closed_form(grid, riesz).unwrap();
    let r = hormander_norm(&sym, 0.75, lz, None, &psi, &piece_grid).unwrap();
    for p in &r.pieces {
        assert!((p.norm - r.pieces[0].norm).abs() < 1e-8 * r.value);
    }
}

#[test]
fn counterexample_symbol_lives_on_three_octaves() {
    let grid = GridSpec::new(1, 16.0, 1024).unwrap();
    let piece_grid = GridSpec::new(1, 0.2, 512).unwrap();
    let psi = bump(BumpKind::Psi, 1);
    let sigma = sigma_counter(0.875, 1.0, &grid).unwrap();
    let (lo, hi) = resolvable_window(&grid);
    assert!(lo <= -3 && hi >= 3);
    for j in lo..=hi {
        let piece = dyadic_piece(&sigma, j, &psi, &piece_grid).unwrap();
        if j.abs() >= 2 {
            assert_eq!(piece.sup_norm(), 0.0, "j = {j}");
        }
    }
    let lz = LorentzParams::new(4.0 / 3.0, 1.0).unwrap();
    let r = hormander_norm(&sigma, 0.75, lz, None, &psi, &piece_grid).unwrap();
    assert!((-2..=2).contains(&r.argmax_j) && r.value > 0.0 && r.value.is_finite());
    for p in &r.pieces {
        if p.j.abs() >= 2 {
            assert_eq!(p.norm, 0.0);
        }
    }
}
