use lietraj::liegroup::{exp_map, log_map, pose_distance, Pose, Space, Twist};
use lietraj::workspace::{
    compound_gaussians, forward_kinematics, inverse_kinematics, link_pose_distribution, workspace_density, Joint,
    KinematicChain, IK_TOLERANCE,
};
use nalgebra::{DVector, Matrix6, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_x() -> Pose {
    Pose::from_translation(Vector3::x(), Space::Se3)
}

fn planar(limits: &[(f64, f64)]) -> KinematicChain {
    let joints = limits.iter().map(|&l| Joint::revolute_z(unit_x(), l)).collect();
    KinematicChain::new(joints, Pose::identity(Space::Se3)).unwrap()
}

fn random_q(rng: &mut ChaCha8Rng, chain: &KinematicChain, margin: f64) -> DVector<f64> {
    DVector::from_iterator(
        chain.dof(),
        chain.joints().iter().map(|j| rng.random_range(j.limits.0 + margin..j.limits.1 - margin)),
    )
}

/// Scatter of `log(mu^-1 g)` with the same 1/N normalization as the library.
fn scatter_about(poses: &[Pose], mu: &Pose) -> Matrix6<f64> {
    let mut cov = Matrix6::zeros();
    for g in poses {
        let x = log_map(&mu.relative(g).unwrap()).unwrap();
        cov += x * x.transpose();
    }
    cov / poses.len() as f64
}

#[test]
fn ik_reaches_random_targets() {
    let chain = KinematicChain::reference_arm();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let q_true = random_q(&mut rng, &chain, 0.5);
        let (target, _) = forward_kinematics(&chain, &q_true).unwrap();
        let seed = &q_true + DVector::from_fn(chain.dof(), |_, _| rng.random_range(-0.2..0.2));
        let q = inverse_kinematics(&chain, &target, &seed).unwrap();
        assert!(chain.within_limits(&q));
        let (reached, _) = forward_kinematics(&chain, &q).unwrap();
        let err = log_map(&reached.relative(&target).unwrap()).unwrap();
        assert!(err.fixed_rows::<3>(0).norm() < IK_TOLERANCE);
        assert!((reached.translation() - target.translation()).norm() < IK_TOLERANCE);
    }
}

#[test]
fn fk_splits_into_sub_chains() {
    let full = KinematicChain::reference_arm();
    let head = KinematicChain::new(full.joints()[..3].to_vec(), Pose::identity(Space::Se3)).unwrap();
    let tail = KinematicChain::new(full.joints()[3..].to_vec(), *full.ee_offset()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let q = random_q(&mut rng, &full, 0.0);
        let (ee, _) = forward_kinematics(&full, &q).unwrap();
        let (a, _) = forward_kinematics(&head, &q.rows(0, 3).into_owned()).unwrap();
        let (b, _) = forward_kinematics(&tail, &q.rows(3, 4).into_owned()).unwrap();
        let (r, t) = pose_distance(&ee, &(a * b));
        assert!(r < 1e-12 && t < 1e-12);
    }
}

#[test]
fn link_rotational_variance_matches_monte_carlo() {
    let a = 1.2;
    let chain = planar(&[(-a, a)]);
    let (mu, cov) = link_pose_distribution(&chain, 0, 10_000, 3).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let joint = &chain.joints()[0];
    let poses: Vec<Pose> = (0..200_000).map(|_| joint.transform(rng.random_range(-a..a))).collect();
    let oracle = scatter_about(&poses, &mu);
    let rel = (cov[(2, 2)] - oracle[(2, 2)]).abs() / oracle[(2, 2)];
    assert!(rel < 0.02, "rotational variance {} vs {}", cov[(2, 2)], oracle[(2, 2)]);
    // Uniform on [-a, a] has variance a^2 / 3.
    assert!((cov[(2, 2)] - a * a / 3.0).abs() < 0.02 * a * a / 3.0);
}

#[test]
fn compounded_links_match_monte_carlo_convolution() {
    let chain = planar(&[(-0.2, 0.2), (-0.15, 0.25)]);
    let (m1, s1) = link_pose_distribution(&chain, 0, 200, 5).unwrap();
    let (m2, s2) = link_pose_distribution(&chain, 1, 200, 5).unwrap();
    assert!(s1.norm() <= 0.05 && s2.norm() <= 0.05);
    let (mu, sigma) = compound_gaussians(&m1, &s1, &m2, &s2);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (j1, j2) = (&chain.joints()[0], &chain.joints()[1]);
    let poses: Vec<Pose> = (0..100_000)
        .map(|_| j1.transform(rng.random_range(-0.2..0.2)) * j2.transform(rng.random_range(-0.15..0.25)))
        .collect();
    let oracle = scatter_about(&poses, &mu);
    let rel = (sigma - oracle).norm() / oracle.norm();
    assert!(rel < 0.10, "relative Frobenius gap {rel}");
}

#[test]
fn compounded_gaussians_match_sampled_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let twist = |rng: &mut ChaCha8Rng, s: f64| Twist::from_fn(|_, _| rng.random_range(-1.0..1.0) * s);
    let mu1 = exp_map(&twist(&mut rng, 0.8), Space::Se3).unwrap();
    let mu2 = exp_map(&twist(&mut rng, 0.8), Space::Se3).unwrap();
    let s1 = Matrix6::from_diagonal(&Twist::from_fn(|i, _| 1e-3 * (1.0 + i as f64)));
    let s2 = Matrix6::from_diagonal(&Twist::from_fn(|i, _| 2e-3 * (6.0 - i as f64)));
    let (mu, sigma) = compound_gaussians(&mu1, &s1, &mu2, &s2);

    let normal = rand_distr::StandardNormal;
    let draw = |cov: &Matrix6<f64>, rng: &mut ChaCha8Rng| {
        let l = cov.cholesky().unwrap().l();
        l * Twist::from_fn(|_, _| rng.sample::<f64, _>(normal))
    };
    let poses: Vec<Pose> = (0..100_000)
        .map(|_| {
            let g1 = mu1 * exp_map(&draw(&s1, &mut rng), Space::Se3).unwrap();
            let g2 = mu2 * exp_map(&draw(&s2, &mut rng), Space::Se3).unwrap();
            g1 * g2
        })
        .collect();
    let oracle = scatter_about(&poses, &mu);
    let rel = (sigma - oracle).norm() / oracle.norm();
    assert!(rel < 0.10, "relative Frobenius gap {rel}");
}

#[test]
fn planar_translation_marginal_matches_monte_carlo() {
    let limits = [(-0.3, 0.3), (-0.3, 0.3)];
    let chain = planar(&limits);
    let wd = workspace_density(&chain, 100, 8).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let poses: Vec<Pose> = (0..100_000)
        .map(|_| forward_kinematics(&chain, &random_q(&mut rng, &chain, 0.0)).unwrap().0)
        .collect();
    let oracle = scatter_about(&poses, &wd.g_wd);
    let got = wd.sigma_wd.fixed_view::<3, 3>(3, 3);
    let want = oracle.fixed_view::<3, 3>(3, 3);
    let rel = (got - want).norm() / want.norm();
    assert!(rel < 0.15, "translation marginal gap {rel}");
}

#[test]
fn density_mean_is_product_of_link_means() {
    let chain = KinematicChain::reference_arm();
    let wd = workspace_density(&chain, 25, 11).unwrap();
    let product = (0..chain.dof())
        .map(|i| link_pose_distribution(&chain, i, 25, 11).unwrap().0)
        .reduce(|a, b| a * b)
        .unwrap();
    let (r, t) = pose_distance(&wd.g_wd, &product);
    assert!(r < 1e-12 && t < 1e-12);
    assert!(wd.sigma_wd.symmetric_eigenvalues().min() > -1e-12);
}
