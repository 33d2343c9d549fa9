use nalgebra::DMatrix;
use poisprox_core::linops::{
    make_convolution, make_dictionary, FrameKind, LinearOperator, TightFrame,
};
use poisprox_core::prox::{project_ker_l1, project_ker_l2, ProductPoint};
use poisprox_core::rng::SplitMix64;
use poisprox_core::vecops::{dot, norm};
use poisprox_core::ImageGrid;

fn random(n: usize, rng: &mut SplitMix64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    rng.fill_signed(&mut v);
    v
}

fn random_point(rng: &mut SplitMix64, pixels: usize, atoms: usize) -> ProductPoint {
    ProductPoint {
        x1: random(pixels, rng),
        x2: random(pixels, rng),
        alpha: random(atoms, rng),
    }
}

fn gaussian_psf(size: usize, sigma: f64) -> ImageGrid {
    let c = (size / 2) as f64;
    let px = (0..size * size)
        .map(|k| {
            let (r, q) = ((k / size) as f64 - c, (k % size) as f64 - c);
            (-(r * r + q * q) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    ImageGrid::new(size, size, px).unwrap()
}

/// Asymmetric kernel, so a wrong adjoint cannot hide behind symmetry.
fn skewed_psf() -> ImageGrid {
    ImageGrid::new(3, 2, vec![0.5, 0.2, 0.05, 0.1, 0.1, 0.05]).unwrap()
}

fn dense(op: &dyn LinearOperator) -> DMatrix<f64> {
    let (m, n) = (op.output_dim(), op.input_dim());
    let mut a = DMatrix::zeros(m, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = op.apply(&e).unwrap();
        for i in 0..m {
            a[(i, j)] = col[i];
        }
    }
    a
}

#[test]
fn convolution_adjoint_on_100_random_pairs() {
    let mut rng = SplitMix64::new(11);
    for (psf, w, h) in [
        (skewed_psf(), 16, 8),
        (gaussian_psf(7, 1.5), 32, 32),
        (skewed_psf(), 5, 3),
    ] {
        let op = make_convolution(&psf, w, h).unwrap();
        for _ in 0..100 {
            let (u, v) = (random(w * h, &mut rng), random(w * h, &mut rng));
            let lhs = dot(&op.apply(&u).unwrap(), &v);
            let rhs = dot(&u, &op.adjoint_apply(&v).unwrap());
            assert!(
                (lhs - rhs).abs() <= 1e-10 * norm(&u) * norm(&v),
                "{lhs} vs {rhs}"
            );
        }
    }
}

#[test]
fn frames_are_tight_on_100_random_vectors() {
    let mut rng = SplitMix64::new(12);
    for (kind, c) in [
        (FrameKind::OrthonormalHaar, 1.0),
        (FrameKind::UndecimatedHaar, 4.0),
        (FrameKind::Identity, 1.0),
    ] {
        let phi = make_dictionary(kind, 16, 16).unwrap();
        assert!((phi.frame_constant() - c).abs() <= 1e-10);
        for _ in 0..100 {
            let v = random(256, &mut rng);
            let back = phi.apply(&phi.adjoint_apply(&v).unwrap()).unwrap();
            let err: f64 = back
                .iter()
                .zip(&v)
                .map(|(b, x)| (b - c * x).powi(2))
                .sum::<f64>();
            assert!(err.sqrt() <= 1e-10 * norm(&v), "{kind:?}: {}", err.sqrt());
            let a = random(phi.atoms(), &mut rng);
            let lhs = dot(&phi.apply(&a).unwrap(), &v);
            let rhs = dot(&a, &phi.adjoint_apply(&v).unwrap());
            assert!((lhs - rhs).abs() <= 1e-10 * norm(&a) * norm(&v));
        }
    }
}

#[test]
fn frame_check_rejects_a_non_tight_operator() {
    // A convolution is not a tight frame unless its spectrum is flat.
    let op = make_convolution(&skewed_psf(), 8, 8).unwrap();
    assert!(TightFrame::verify(Box::new(op), FrameKind::Identity).is_err());
}

/// `I − A⁺A`, the orthogonal projector onto `ker A`.
fn null_space_projector(a: &DMatrix<f64>) -> DMatrix<f64> {
    let pinv = a.clone().pseudo_inverse(1e-12).unwrap();
    DMatrix::identity(a.ncols(), a.ncols()) - pinv * a
}

fn stack(p: &ProductPoint) -> Vec<f64> {
    p.x1.iter().chain(&p.x2).chain(&p.alpha).copied().collect()
}

#[test]
fn kernel_projectors_match_dense_null_space_oracle() {
    // 2×2 image, 4 orthonormal Haar coefficients, asymmetric 2×2 blur.
    let n = 4;
    let phi = make_dictionary(FrameKind::OrthonormalHaar, 2, 2).unwrap();
    let psf = ImageGrid::new(2, 2, vec![0.6, 0.25, 0.1, 0.05]).unwrap();
    let h = make_convolution(&psf, 2, 2).unwrap();
    let (phi_d, h_d) = (dense(&phi), dense(&h));
    let eye = DMatrix::<f64>::identity(n, n);
    let zero = DMatrix::<f64>::zeros(n, n);

    // L₁ = [I 0 −Φ], L₂ = [−H I 0]
    let mut l1 = DMatrix::zeros(n, 3 * n);
    l1.view_mut((0, 0), (n, n)).copy_from(&eye);
    l1.view_mut((0, n), (n, n)).copy_from(&zero);
    l1.view_mut((0, 2 * n), (n, n)).copy_from(&(-&phi_d));
    let mut l2 = DMatrix::zeros(n, 3 * n);
    l2.view_mut((0, 0), (n, n)).copy_from(&(-&h_d));
    l2.view_mut((0, n), (n, n)).copy_from(&eye);
    let (p1, p2) = (null_space_projector(&l1), null_space_projector(&l2));

    let mut rng = SplitMix64::new(13);
    for _ in 0..50 {
        let p = random_point(&mut rng, n, n);
        let v = nalgebra::DVector::from_vec(stack(&p));
        for (got, want) in [
            (stack(&project_ker_l1(&p, &phi).unwrap()), &p1 * &v),
            (stack(&project_ker_l2(&p, &h).unwrap()), &p2 * &v),
        ] {
            for (g, w) in got.iter().zip(want.iter()) {
                assert!((g - w).abs() <= 1e-10, "{g} vs {w}");
            }
        }
    }
}

#[test]
fn kernel_projectors_idempotent_and_self_adjoint_16x16() {
    let mut rng = SplitMix64::new(14);
    let h = make_convolution(&gaussian_psf(7, 1.5), 16, 16).unwrap();
    for kind in [FrameKind::OrthonormalHaar, FrameKind::UndecimatedHaar] {
        let phi = make_dictionary(kind, 16, 16).unwrap();
        let l1 = |p: &ProductPoint| project_ker_l1(p, &phi).unwrap();
        let l2 = |p: &ProductPoint| project_ker_l2(p, &h).unwrap();
        let projectors: [&dyn Fn(&ProductPoint) -> ProductPoint; 2] = [&l1, &l2];
        for proj in projectors {
            for _ in 0..20 {
                let u = random_point(&mut rng, 256, phi.atoms());
                let v = random_point(&mut rng, 256, phi.atoms());
                let pu = proj(&u);
                assert!(proj(&pu).distance(&pu) <= 1e-10 * u.norm());
                let (a, b) = (pu.dot(&v), u.dot(&proj(&v)));
                assert!((a - b).abs() <= 1e-10 * u.norm() * v.norm(), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn projected_points_satisfy_their_constraint() {
    let mut rng = SplitMix64::new(15);
    let phi = make_dictionary(FrameKind::UndecimatedHaar, 16, 16).unwrap();
    let h = make_convolution(&gaussian_psf(5, 1.0), 16, 16).unwrap();
    let p = random_point(&mut rng, 256, phi.atoms());
    let q = project_ker_l1(&p, &phi).unwrap();
    let r: Vec<f64> = phi
        .apply(&q.alpha)
        .unwrap()
        .iter()
        .zip(&q.x1)
        .map(|(a, b)| a - b)
        .collect();
    assert!(norm(&r) <= 1e-10 * p.norm());
    let q = project_ker_l2(&p, &h).unwrap();
    let r: Vec<f64> = h
        .apply(&q.x1)
        .unwrap()
        .iter()
        .zip(&q.x2)
        .map(|(a, b)| a - b)
        .collect();
    assert!(norm(&r) <= 1e-10 * p.norm());
}
