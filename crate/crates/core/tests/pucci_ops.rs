use proptest::prelude::*;
use pucci_lab::pucci::{
    eigen_decompose, eigenvalues_sym, invert_pucci_1d, outer, pucci_eval, pucci_radial_eval, Ellipticity,
    OperatorSign, SymMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Coefficients of `det(xI − A)` (leading 1 first) by Faddeev–LeVerrier.
fn char_poly(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mul = |x: &[Vec<f64>], y: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum()).collect()).collect()
    };
    let mut coeffs = vec![1.0];
    let mut m: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
    for k in 1..=n {
        let mut next = mul(a, &m);
        let c_prev = *coeffs.last().unwrap();
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c_prev;
        }
        m = next;
        let am = mul(a, &m);
        let tr: f64 = (0..n).map(|i| am[i][i]).sum();
        coeffs.push(-tr / k as f64);
    }
    coeffs
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().fold(0.0, |acc, ci| acc * x + ci)
}

/// Real roots by sign-change scan and bisection.
fn real_roots(c: &[f64], bound: f64) -> Vec<f64> {
    let steps = 200_000;
    let mut roots = Vec::new();
    let mut x0 = -bound;
    let mut f0 = horner(c, x0);
    for i in 1..=steps {
        let x1 = -bound + 2.0 * bound * i as f64 / steps as f64;
        let f1 = horner(c, x1);
        if f0 == 0.0 || (f0 > 0.0) != (f1 > 0.0) {
            let (mut lo, mut hi, flo) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (horner(c, mid) > 0.0) == (flo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

fn random_sym(rng: &mut ChaCha8Rng, dim: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            m.set(i, j, rng.gen_range(-1.0..1.0));
        }
    }
    m
}

#[test]
fn spectrum_matches_characteristic_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let m = random_sym(&mut rng, 5);
        let roots = real_roots(&char_poly(&m.to_full()), m.frobenius_norm() + 1.0);
        let spec = eigenvalues_sym(&m).unwrap();
        assert_eq!(roots.len(), 5, "roots {roots:?}");
        for (a, b) in roots.iter().zip(&spec.eigenvalues) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn eval_matches_weighted_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ell = Ellipticity::new(0.7, 2.3, 4).unwrap();
    for _ in 0..100 {
        let m = random_sym(&mut rng, 4);
        let ev = eigenvalues_sym(&m).unwrap().eigenvalues;
        let plus: f64 = ev.iter().map(|&e| if e > 0.0 { 2.3 * e } else { 0.7 * e }).sum();
        let minus: f64 = ev.iter().map(|&e| if e > 0.0 { 0.7 * e } else { 2.3 * e }).sum();
        assert!((pucci_eval(&m, &ell, OperatorSign::Plus).unwrap() - plus).abs() < 1e-12);
        assert!((pucci_eval(&m, &ell, OperatorSign::Minus).unwrap() - minus).abs() < 1e-12);
    }
}

#[test]
fn outer_product_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xi: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let norm2: f64 = xi.iter().map(|x| x * x).sum();
    let ev = eigenvalues_sym(&outer(&xi)).unwrap().eigenvalues;
    for e in &ev[..5] {
        assert!(e.abs() < 1e-12, "{e}");
    }
    assert!((ev[5] - norm2).abs() < 1e-12);
    let two = Ellipticity::new(1.0, 2.0, 2).unwrap();
    let v = pucci_eval(&outer(&[1.0, 1.0]), &two, OperatorSign::Plus).unwrap();
    assert!((v - 4.0).abs() < 1e-14);
}

#[test]
fn inverse_weighting_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ell = Ellipticity::new(1.0, 2.0, 3).unwrap();
    for _ in 0..1000 {
        let t: f64 = rng.gen_range(-100.0..100.0);
        for sign in [OperatorSign::Plus, OperatorSign::Minus] {
            let back = ell.weighting(invert_pucci_1d(t, &ell, sign), sign);
            assert!((back - t).abs() <= 1e-14 * t.abs().max(1.0));
        }
    }
}

fn sym_strategy(dim: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-10.0f64..10.0, dim * (dim + 1) / 2)
        .prop_map(move |upper| SymMatrix::from_upper(dim, upper).unwrap())
}

fn case() -> impl Strategy<Value = (Ellipticity, SymMatrix, SymMatrix)> {
    (2usize..=6, 0.1f64..3.0, 1.0f64..4.0).prop_flat_map(|(dim, l, ratio)| {
        let ell = Ellipticity::new(l, l * ratio, dim).unwrap();
        (Just(ell), sym_strategy(dim), sym_strategy(dim))
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * 1f64.max(a.abs()).max(b.abs())
}

fn le(a: f64, b: f64) -> bool {
    a - b <= 1e-10 * 1f64.max(a.abs()).max(b.abs())
}

proptest! {
    #[test]
    fn sub_and_superadditivity((ell, a, b) in case()) {
        use OperatorSign::{Minus, Plus};
        let ab = a.add(&b).unwrap();
        let m = |x: &SymMatrix, s| pucci_eval(x, &ell, s).unwrap();
        prop_assert!(le(m(&a, Plus) + m(&b, Minus), m(&ab, Plus)));
        prop_assert!(le(m(&ab, Plus), m(&a, Plus) + m(&b, Plus)));
        prop_assert!(le(m(&a, Minus) + m(&b, Minus), m(&ab, Minus)));
        prop_assert!(le(m(&ab, Minus), m(&a, Plus) + m(&b, Minus)));
    }

    #[test]
    fn homogeneity_and_duality((ell, a, _b) in case(), alpha in 0.0f64..50.0) {
        for s in [OperatorSign::Plus, OperatorSign::Minus] {
            let lhs = pucci_eval(&a.scale(alpha), &ell, s).unwrap();
            prop_assert!(close(lhs, alpha * pucci_eval(&a, &ell, s).unwrap()));
            let dual = -pucci_eval(&a.scale(-1.0), &ell, s.flip()).unwrap();
            prop_assert!(close(pucci_eval(&a, &ell, s).unwrap(), dual));
        }
    }

    #[test]
    fn orthogonal_invariance((ell, a, b) in case()) {
        let q = eigen_decompose(&b).unwrap().vectors;
        let rotated = a.congruence(&q).unwrap();
        for s in [OperatorSign::Plus, OperatorSign::Minus] {
            prop_assert!(close(pucci_eval(&rotated, &ell, s).unwrap(), pucci_eval(&a, &ell, s).unwrap()));
        }
    }

    #[test]
    fn decomposition_is_orthonormal_and_exact((_ell, a, _b) in case()) {
        let d = eigen_decompose(&a).unwrap();
        prop_assert!(d.ortho_residual() <= 1e-10);
        prop_assert!(d.reconstruction_residual(&a) <= 1e-10 * a.frobenius_norm().max(1.0));
        prop_assert!(d.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn radial_eval_matches_diagonal(
        up in -5.0f64..5.0, upp in -5.0f64..5.0, r in 0.01f64..10.0, n in 2usize..7
    ) {
        let ell = Ellipticity::new(1.0, 2.0, n).unwrap();
        let mut diag = vec![up / r; n - 1];
        diag.push(upp);
        let m = SymMatrix::diag(&diag);
        for s in [OperatorSign::Plus, OperatorSign::Minus] {
            let radial = pucci_radial_eval(up, upp, r, &ell, s).unwrap();
            prop_assert!(close(radial, pucci_eval(&m, &ell, s).unwrap()));
        }
    }
}
