use hessdamp::objective::min_eigenvalue;
use hessdamp::problems::operators::{blur_adjoint, blur_apply, kx_apply, ky_apply, Kernel};
use hessdamp::problems::pgm::{pgm_decode, pgm_encode};
use hessdamp::problems::{
    deblur_objective, double_well, gradient_check, phantom, pgm_read, pgm_write, quadratic,
    random_points, rosenbrock, synthesize_observation, DeblurProblem, DoubleWell, Image,
};
use hessdamp::{run, GammaSchedule, Matrix, Method, Objective, Point, Scheme, SolverParams};
use nalgebra::{dmatrix, dvector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(nx: usize, ny: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Image::from_fn(nx, ny, |_, _| rng.random::<f64>())
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let pts = random_points(2, 100, -2.0, 2.0, 1);
    assert!(gradient_check(&rosenbrock(), &pts, 1e-6).max_rel_error < 1e-6);
    assert!(gradient_check(&double_well(), &pts, 1e-6).max_rel_error < 1e-6);

    let a = dmatrix![2.0, 0.5, 0.0; 0.5, -1.0, 0.3; 0.0, 0.3, 4.0];
    let q = quadratic(a, dvector![1.0, 0.0, -2.0]).unwrap();
    let pts = random_points(3, 50, -3.0, 3.0, 2);
    assert!(gradient_check(&q, &pts, 1e-5).max_rel_error < 1e-8);

    let kernel = Kernel::default_blur();
    let b = synthesize_observation(&phantom(8), &kernel, 0.01, 3);
    let f = deblur_objective(DeblurProblem::new(kernel, b, 5e-5, 1e-3).unwrap());
    let pts: Vec<Point> = (0..20).map(|s| random_image(8, 8, 100 + s).to_point()).collect();
    let check = gradient_check(&f, &pts, 1e-5);
    assert!(check.max_rel_error < 1e-5, "{check:?}");
    assert_eq!(check.n_points, 20);
}

#[test]
fn deblur_without_regularization_is_least_squares() {
    let kernel = Kernel::gaussian(3, 0.8).unwrap();
    let b = random_image(9, 7, 4);
    // Built directly: the constructor insists on mu > 0.
    let f = deblur_objective(DeblurProblem {
        kernel: kernel.clone(),
        b: b.clone(),
        mu: 0.0,
        rho: 1e-3,
    });
    let u = random_image(9, 7, 5);
    let direct = blur_adjoint(&kernel, &blur_apply(&kernel, &u).zip_map(&b, |a, b| a - b));
    let g = f.grad_image(&u);
    for (x, y) in g.pixels().iter().zip(direct.pixels()) {
        assert!((x - y).abs() <= 1e-14);
    }
}

#[test]
fn deblur_at_zero() {
    let (mu, rho) = (5e-5, 1e-3);
    let f = deblur_objective(DeblurProblem::new(Kernel::default_blur(), Image::zeros(6, 5), mu, rho).unwrap());
    let zero = Point::zeros(30);
    let expected = 0.5 * mu * 30.0 * rho.ln();
    assert!((f.eval(&zero) - expected).abs() <= 1e-15 * expected.abs());
    assert_eq!(f.grad(&zero), zero);
}

#[test]
fn observation_noise() {
    let kernel = Kernel::default_blur();
    let u = phantom(256);
    let clean = synthesize_observation(&u, &kernel, 0.0, 1);
    assert_eq!(clean, blur_apply(&kernel, &u));

    let sigma = 0.01;
    let b = synthesize_observation(&u, &kernel, sigma, 7);
    assert_eq!(b, synthesize_observation(&u, &kernel, sigma, 7));
    assert_ne!(b, synthesize_observation(&u, &kernel, sigma, 8));
    let n = b.len() as f64;
    let mean = b.pixels().iter().zip(clean.pixels()).map(|(x, y)| x - y).sum::<f64>() / n;
    assert!(mean.abs() <= 4.0 * sigma / n.sqrt(), "{mean}");
}

#[test]
fn difference_operators_by_hand() {
    let ramp = Image::from_fn(5, 4, |_, j| j as f64);
    let kx = kx_apply(&ramp);
    for i in 0..4 {
        for j in 0..5 {
            assert_eq!(kx.get(i, j), if j == 4 { 0.0 } else { 1.0 });
        }
    }
    assert!(ky_apply(&ramp).pixels().iter().all(|&p| p == 0.0));

    let flat = Image::filled(6, 6, 0.3);
    let blurred = blur_apply(&Kernel::default_blur(), &flat);
    assert!(blurred.pixels().iter().all(|p| (p - 0.3).abs() < 1e-15));
    assert_eq!(blur_apply(&Kernel::identity(), &ramp), ramp);
}

#[test]
fn flattening_round_trips() {
    let img = random_image(5, 3, 9);
    let p = img.to_point();
    assert_eq!(p[1], img.get(1, 0));
    assert_eq!(Image::from_point(5, 3, &p).unwrap(), img);
}

#[test]
fn deblur_objective_trends_down() {
    let kernel = Kernel::default_blur();
    let b = synthesize_observation(&phantom(32), &kernel, 0.01, 42);
    let f = deblur_objective(DeblurProblem::new(kernel, b.clone(), 5e-5, 1e-3).unwrap());
    let x0 = b.to_point();
    let p = SolverParams::new(0.5, 1.3, GammaSchedule::constant(0.25).unwrap())
        .unwrap()
        .with_max_iter(250);
    for scheme in [Scheme::Isehd, Scheme::Isihd] {
        let t = run(&Method::new(scheme, p.clone()), &f, &x0, &x0).unwrap();
        let fs: Vec<f64> = t.records.iter().map(|r| r.f_value).collect();
        let tail = &fs[fs.len() / 5..];
        assert!(tail.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{scheme}");
        assert!(fs.last() < fs.first());
    }
}

#[test]
fn critical_point_curvature() {
    let h = rosenbrock().hess(&dvector![1.0, 1.0]).unwrap();
    assert!(min_eigenvalue(&h) > 0.0);
    let f = double_well();
    for p in DoubleWell::critical_points() {
        let h = f.hess(&p).unwrap();
        let eig = h.symmetric_eigenvalues();
        assert!(eig.iter().all(|e| e.abs() > 0.5), "{p}");
    }
    let saddle = quadratic(dmatrix![1.0, 0.0; 0.0, -1.0], Point::zeros(2)).unwrap();
    assert_eq!(min_eigenvalue(&saddle.hess(&Point::zeros(2)).unwrap()), -1.0);
    assert!(quadratic(Matrix::identity(2, 3), Point::zeros(2)).is_err());
}

#[test]
fn pgm_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.pgm");
    let img = random_image(13, 7, 11);
    pgm_write(&path, &img).unwrap();
    let back = pgm_read(&path).unwrap();
    assert_eq!((back.width(), back.height()), (13, 7));
    for (a, b) in img.pixels().iter().zip(back.pixels()) {
        assert!((a - b).abs() <= 1.0 / 255.0);
    }
    pgm_write(&path, &back).unwrap();
    assert_eq!(pgm_read(&path).unwrap(), back);
    assert_eq!(pgm_decode(&pgm_encode(&back)).unwrap(), back);
    assert!(pgm_read(dir.path().join("missing.pgm")).is_err());
}
