mod common;

use common::*;
use orthomg::sparse::{dot, CsrMatrix};
use orthomg::{Error, SearchSpace, UpdateOutcome};
use proptest::prelude::*;

fn space_for(b: &[f64]) -> SearchSpace {
    let x0 = vec![0.0; b.len()];
    SearchSpace::new(x0, b.to_vec()).unwrap()
}

#[test]
fn fresh_space_is_empty_and_returns_anchor() {
    let s = SearchSpace::new(vec![1.0, 2.0], vec![3.0, 4.0]).unwrap();
    assert_eq!(s.len(), 0);
    assert_eq!(s.current(), (&[1.0, 2.0][..], &[3.0, 4.0][..]));
    assert!(SearchSpace::new(vec![1.0], vec![1.0, 2.0]).is_err());
}

#[test]
fn identity_system_solved_by_one_update() {
    let a = CsrMatrix::identity(5);
    let b = vec![1.0, -2.0, 3.0, 0.5, 4.0];
    let mut s = space_for(&b);
    assert_eq!(s.update(&a, b.clone()).unwrap(), UpdateOutcome::Accepted);
    for (x, bi) in s.solution().iter().zip(&b) {
        assert!((x - bi).abs() <= 1e-15);
    }
    assert!(s.residual_norm() <= 1e-15);
}

#[test]
fn redundant_direction_breaks_down() {
    let m = random_spd(&mut rng(20), 6);
    let a = to_csr(&m);
    let b = random_vec(&mut rng(21), 6);
    let z = random_vec(&mut rng(22), 6);
    let mut s = space_for(&b);
    s.update(&a, z.clone()).unwrap();
    let (x, r) = (s.solution().to_vec(), s.residual().to_vec());
    let scaled: Vec<f64> = z.iter().map(|v| -3.0 * v).collect();
    assert_eq!(s.update(&a, scaled).unwrap(), UpdateOutcome::Breakdown);
    assert_eq!(s.breakdown_count(), 1);
    assert_eq!(s.len(), 1);
    assert_eq!((s.solution(), s.residual()), (&x[..], &r[..]));
}

#[test]
fn zero_anchor_residual_always_breaks_down() {
    let a = to_csr(&random_spd(&mut rng(23), 4));
    let mut s = SearchSpace::new(vec![1.0; 4], vec![0.0; 4]).unwrap();
    for seed in 0..3 {
        assert_eq!(s.update(&a, random_vec(&mut rng(seed), 4)).unwrap(), UpdateOutcome::Breakdown);
    }
    assert_eq!(s.solution(), &[1.0; 4]);
}

#[test]
fn non_finite_direction_rejected() {
    let a = CsrMatrix::identity(3);
    let mut s = space_for(&[1.0, 1.0, 1.0]);
    assert!(matches!(s.update(&a, vec![1.0, f64::NAN, 0.0]), Err(Error::InvalidInput(_))));
    assert!(matches!(s.update(&a, vec![1.0, f64::INFINITY, 0.0]), Err(Error::InvalidInput(_))));
}

#[test]
fn three_updates_match_least_squares() {
    let mut rng = rng(24);
    let m = random_spd(&mut rng, 10);
    let a = to_csr(&m);
    let b = random_vec(&mut rng, 10);
    let mut s = space_for(&b);
    let mut zs = Vec::new();
    for _ in 0..3 {
        let z = random_vec(&mut rng, 10);
        zs.push(z.clone());
        s.update(&a, z).unwrap();
        let az: Vec<Vec<f64>> = zs.iter().map(|z| matvec(&m, z)).collect();
        let c = least_squares(&az, &b);
        let x: Vec<f64> = (0..10).map(|i| zs.iter().zip(&c).map(|(z, ci)| z[i] * ci).sum()).collect();
        for (got, want) in s.solution().iter().zip(&x) {
            assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()));
        }
    }
}

#[test]
fn reset_clears_basis_and_anchors() {
    let a = to_csr(&random_spd(&mut rng(25), 5));
    let mut s = space_for(&[1.0; 5]);
    s.update(&a, vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    s.update(&a, vec![0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
    s.reset(vec![2.0; 5], vec![0.5; 5]).unwrap();
    assert_eq!(s.len(), 0);
    assert_eq!(s.anchor(), (&[2.0; 5][..], &[0.5; 5][..]));
    s.reset(vec![0.0; 5], vec![0.0; 5]).unwrap();
    assert_eq!(s.residual_norm(), 0.0);
}

#[test]
fn restart_reaches_same_tolerance() {
    let mut rng = rng(26);
    let n = 30;
    let m = random_spd(&mut rng, n);
    let a = to_csr(&m);
    let b = random_vec(&mut rng, n);
    let tol = 1e-8 * norm(&b);
    let run = |cap: usize| -> (usize, f64) {
        let mut noise = common::rng(27);
        let mut s = space_for(&b);
        let mut updates = 0;
        while s.residual_norm() > tol && updates < 5000 {
            s.restart_if_full(cap);
            // residual-driven directions, like a smoother would produce
            let z: Vec<f64> = random_vec(&mut noise, n).iter().zip(s.residual()).map(|(zi, ri)| zi * 0.1 + ri).collect();
            s.update(&a, z).unwrap();
            updates += 1;
        }
        let x = s.solution().to_vec();
        (updates, norm(&sub(&b, &matvec(&m, &x))))
    };
    let (full, r_full) = run(usize::MAX);
    let (restarted, r_restarted) = run(7);
    assert!(r_full <= tol * 1.0001, "{full} updates");
    assert!(r_restarted <= tol * 1.0001, "{restarted} updates");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn residual_never_grows_and_stays_optimal(seed in any::<u64>(), n in 2usize..=50, k in 1usize..=12) {
        let mut rng = rng(seed);
        let m = random_spd(&mut rng, n);
        let a = to_csr(&m);
        let b = random_vec(&mut rng, n);
        let mut s = space_for(&b);
        let r0 = norm(&b);
        let mut prev = r0;
        for _ in 0..k {
            s.update(&a, random_vec(&mut rng, n)).unwrap();
            let r = s.residual_norm();
            prop_assert!(r <= prev * (1.0 + 1e-14));
            prev = r;
            for w in s.basis() {
                prop_assert!(dot(w, s.residual()).unwrap().abs() <= 1e-9 * r0);
            }
        }
        // residual agrees with b - A x
        let x = s.solution().to_vec();
        prop_assert!(norm(&sub(&sub(&b, &matvec(&m, &x)), s.residual())) <= 1e-9 * r0);
    }

    #[test]
    fn pairs_and_coefficients_stay_consistent(seed in any::<u64>(), n in 4usize..=40) {
        let mut rng = rng(seed);
        let m = random_spd(&mut rng, n);
        let a = to_csr(&m);
        let b = random_vec(&mut rng, n);
        let mut s = space_for(&b);
        for _ in 0..n.min(15) {
            s.update(&a, random_vec(&mut rng, n)).unwrap();
        }
        prop_assert_eq!(s.basis().len(), s.directions().len());
        prop_assert_eq!(s.basis().len(), s.alpha().len());
        for ((w, z), alpha) in s.basis().iter().zip(s.directions()).zip(s.alpha()) {
            let az = matvec(&m, z);
            prop_assert!(norm(&sub(&az, w)) <= 1e-8 * norm(w));
            prop_assert!((dot(w, &b).unwrap() - alpha).abs() <= 1e-10 * norm(&b));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn fifty_updates_keep_basis_orthonormal(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = 60;
        let m = random_spd(&mut rng, n);
        let a = to_csr(&m);
        let b = random_vec(&mut rng, n);
        let mut s = space_for(&b);
        for _ in 0..50 {
            s.update(&a, random_vec(&mut rng, n)).unwrap();
        }
        let w = s.basis();
        let mut drift: f64 = 0.0;
        for i in 0..w.len() {
            for j in 0..w.len() {
                let target = if i == j { 1.0 } else { 0.0 };
                drift = drift.max((dot(&w[i], &w[j]).unwrap() - target).abs());
            }
        }
        prop_assert!(drift <= 1e-9, "drift {}", drift);
    }
}
