//! Numerical results checked against independent implementations that live
//! only in this file.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ksrobust::dense::{certified_correlation_bound, DenseProgramParams};
use ksrobust::linalg::{DenseMatrix, Factor};
use ksrobust::model::{balanced_labels, center_adjacency, sample_sbm, sample_z2, Graph, SbmParams, Z2Instance};
use ksrobust::rounding::gaussian_sign_rounding;
use ksrobust::sdp::{
    certify_optimality, grothendieck_norm, inf_to_one_norm_bruteforce, solve_basic_sdp, SdpOptions,
};
use ksrobust::spectral::{largest_eigenvalue, operator_norm, prune_high_degree};
use ksrobust::{evaluate_overlap, LabelVector};

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng, zero_diag: bool) -> DenseMatrix<f64> {
    let mut m = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            if i == j && zero_diag {
                continue;
            }
            let v = rng.random_range(-1.0..1.0);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}

fn random_square(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<f64> {
    DenseMatrix::new(n, (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn to_na(m: &DenseMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.n(), m.n(), |i, j| m.get(i, j))
}

/// `max xᵀ M x` over all of `{±1}ⁿ`.
fn maxcut_bruteforce(m: &DenseMatrix<f64>) -> f64 {
    let n = m.n();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
        let v: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| x[i] * m.get(i, j) * x[j]).sum();
        best = best.max(v);
    }
    best
}

/// Full-rank block coordinate ascent: `vᵢ ← normalize(Σ_{j≠i} Mᵢⱼ vⱼ)` with
/// `n`-dimensional vectors, run until the objective stalls.
fn sdp_coordinate_ascent(m: &DenseMatrix<f64>, seed: u64) -> f64 {
    let n = m.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            r.into_iter().map(|x| x / s).collect()
        })
        .collect();
    let value = |v: &Vec<Vec<f64>>| -> f64 {
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j) * v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    };
    let mut last = value(&v);
    for _ in 0..20_000 {
        for i in 0..n {
            let mut g = vec![0.0; n];
            for j in (0..n).filter(|&j| j != i) {
                for (gk, vk) in g.iter_mut().zip(&v[j]) {
                    *gk += m.get(i, j) * vk;
                }
            }
            let s = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if s > 0.0 {
                v[i] = g.into_iter().map(|x| x / s).collect();
            }
        }
        let now = value(&v);
        if (now - last).abs() < 1e-13 * now.abs().max(1.0) {
            break;
        }
        last = now;
    }
    value(&v)
}

#[test]
fn sdp_trivial_values() {
    let opts = SdpOptions::default();
    let swap = DenseMatrix::<f64>::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    assert!((solve_basic_sdp(&swap, &opts).unwrap().value - 2.0).abs() < 1e-6);
    let neg = DenseMatrix::<f64>::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap();
    assert!((solve_basic_sdp(&neg, &opts).unwrap().value - 2.0).abs() < 1e-6);
    let ones = DenseMatrix::<f64>::from_fn(7, |_, _| 1.0);
    assert!((solve_basic_sdp(&ones, &opts).unwrap().value - 49.0).abs() < 49e-6);
}

#[test]
fn sdp_dominates_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..5 {
        let m = random_symmetric(10, &mut rng, true);
        let sdp = solve_basic_sdp(&m, &SdpOptions::default()).unwrap();
        assert!(sdp.value >= maxcut_bruteforce(&m) - 1e-6);
    }
}

#[test]
fn sdp_matches_full_rank_coordinate_ascent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..6 {
        let n = 6 + 4 * k;
        let m = random_symmetric(n, &mut rng, false);
        let ours = solve_basic_sdp(&m, &SdpOptions { seed: k as u64, ..SdpOptions::default() }).unwrap();
        let oracle = sdp_coordinate_ascent(&m, 99 + k as u64);
        let gap = ours.dual_gap.unwrap();
        assert!((ours.value - oracle).abs() <= 1e-5 * oracle.abs(), "n={n}: {} vs {oracle}", ours.value);
        assert!(gap / ours.value.abs() <= 1e-3, "n={n}: gap {gap}");
        assert!(gap >= -1e-6 * ours.value.abs());
    }
}

#[test]
fn dual_certificate_values() {
    let swap = DenseMatrix::<f64>::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let opt = Factor::<f64>::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
    assert!(certify_optimality(&swap, &opt).abs() <= 1e-6);
    let id = Factor::<f64>::identity(2);
    assert!((certify_optimality(&swap, &id) - 2.0).abs() < 1e-6);
}

#[test]
fn dual_certificate_matches_dense_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let m = random_symmetric(20, &mut rng, true);
    let f = Factor::<f64>::random_unit(20, 5, &mut rng);
    let v = DMatrix::from_fn(20, 5, |i, j| f.row(i)[j]);
    let mx = to_na(&m) * &v * v.transpose();
    let lambda: Vec<f64> = (0..20).map(|i| mx[(i, i)]).collect();
    let shifted = to_na(&m) - DMatrix::from_diagonal(&nalgebra::DVector::from_vec(lambda.clone()));
    let top = SymmetricEigen::new(shifted).eigenvalues.max();
    // Σλ equals the objective, so only the eigenvalue term survives.
    let want = 20.0 * top.max(0.0);
    let got = certify_optimality(&m, &f);
    assert!((got - want).abs() <= 1e-5 * want.abs().max(1.0), "{got} vs {want}");
}

#[test]
fn operator_norm_matches_dense_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..3 {
        let m = random_symmetric(50, &mut rng, false);
        let eig = SymmetricEigen::new(to_na(&m)).eigenvalues;
        let want = eig.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let got = operator_norm(&m, 1e-4, &mut rng);
        assert!((got.value - want).abs() <= 1e-4 * want, "{} vs {want}", got.value);
        let top = largest_eigenvalue(&m, 1e-6, &mut rng).value;
        assert!((top - eig.max()).abs() <= 1e-4 * want);
    }
}

#[test]
fn centered_matvec_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let labels = balanced_labels(200, &mut rng).unwrap();
    let g = sample_sbm(&SbmParams::new(200, 8.0, 0.3).unwrap(), &labels, &mut rng).unwrap();
    let c = center_adjacency::<f64>(&g, 8.0);
    let dense = to_na(&c.to_dense());
    for _ in 0..20 {
        let x: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut y = vec![0.0; 200];
        ksrobust::SymOperator::apply(&c, &x, &mut y);
        let want = &dense * nalgebra::DVector::from_vec(x);
        let err = (nalgebra::DVector::from_vec(y) - &want).norm();
        assert!(err <= 1e-10 * want.norm());
    }
}

#[test]
fn grothendieck_examples() {
    let opts = SdpOptions::default();
    let swap = DenseMatrix::<f64>::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    assert!(grothendieck_norm(&swap, &opts).unwrap() >= 2.0 - 1e-6);
    let e11 = DenseMatrix::<f64>::from_fn(3, |i, j| if i == 0 && j == 0 { 1.0 } else { 0.0 });
    assert!((grothendieck_norm(&e11, &opts).unwrap() - 1.0).abs() < 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..5 {
        let m = random_square(8, &mut rng);
        let gr = grothendieck_norm(&m, &opts).unwrap();
        let inf1 = inf_to_one_norm_bruteforce(&m).unwrap();
        assert!(gr <= 1.7822 * inf1 * (1.0 + 1e-6));
        assert!(gr >= inf1 - 1e-6);
    }
}

/// Independent `max xᵀ M y` over both sign vectors.
fn inf_to_one_full(m: &DenseMatrix<f64>) -> f64 {
    let n = m.n();
    let sign = |mask: u32, i: usize| if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
    let mut best = f64::NEG_INFINITY;
    for a in 0u32..(1 << n) {
        for b in 0u32..(1 << n) {
            let v: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| sign(a, i) * m.get(i, j) * sign(b, j)).sum();
            best = best.max(v);
        }
    }
    best
}

#[test]
fn inf_to_one_examples_and_full_enumeration() {
    let swap = DenseMatrix::<f64>::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    assert_eq!(inf_to_one_norm_bruteforce(&swap).unwrap(), 2.0);
    assert_eq!(inf_to_one_norm_bruteforce(&DenseMatrix::<f64>::identity(3)).unwrap(), 3.0);
    let h = DenseMatrix::<f64>::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
    assert_eq!(inf_to_one_norm_bruteforce(&h).unwrap(), 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for n in 3..8 {
        let m = random_square(n, &mut rng);
        assert!((inf_to_one_norm_bruteforce(&m).unwrap() - inf_to_one_full(&m)).abs() < 1e-9);
    }
    assert!(inf_to_one_norm_bruteforce(&DenseMatrix::<f64>::zeros(23)).is_err());
}

#[test]
fn rounding_follows_arcsine_law() {
    // E[sign⟨vᵢ,g⟩ sign⟨vⱼ,g⟩] = (2/π) arcsin⟨vᵢ,vⱼ⟩.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let f = Factor::<f64>::random_unit(6, 3, &mut rng);
    let trials = 20_000;
    let draws = gaussian_sign_rounding(&f, trials, &mut rng);
    for i in 0..6 {
        for j in i + 1..6 {
            let emp = draws.iter().map(|x| (x.get(i) * x.get(j)) as f64).sum::<f64>() / trials as f64;
            let want = 2.0 / std::f64::consts::PI * f.gram(i, j).asin();
            let sd = ((1.0 - want * want) / trials as f64).sqrt();
            assert!((emp - want).abs() <= 4.0 * sd, "({i},{j}): {emp} vs {want}");
        }
    }
}

#[test]
fn rounding_overlap_lower_bound() {
    // X = (1−t) I + t x xᵀ is PSD with unit diagonal; ⟨X, xxᵀ⟩/n² ≈ t.
    let n = 400;
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let x = balanced_labels(n, &mut rng).unwrap();
    let t: f64 = 0.3;
    let mut f = Factor::zeros(n, n + 1);
    for i in 0..n {
        f.row_mut(i)[0] = t.sqrt() * x.get(i) as f64;
        f.row_mut(i)[i + 1] = (1.0 - t).sqrt();
    }
    let c = (t * (n * n) as f64 + (1.0 - t) * n as f64) / (n * n) as f64;
    let draws = gaussian_sign_rounding(&f, 100, &mut rng);
    let mean = draws.iter().map(|d| evaluate_overlap(d, &x).unwrap()).sum::<f64>() / 100.0;
    assert!(mean >= (2.0 * c / std::f64::consts::PI).powi(2) * 0.5, "{mean}");
}

#[test]
fn identity_factor_rounds_to_chance() {
    let n = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let x = balanced_labels(n, &mut rng).unwrap();
    let draws = gaussian_sign_rounding(&Factor::<f64>::identity(n), 200, &mut rng);
    let mean = draws.iter().map(|d| evaluate_overlap(d, &x).unwrap()).sum::<f64>() / 200.0;
    // E = 1/n, variance of each draw ≈ 2/n².
    let sd = (2.0f64).sqrt() / n as f64 / (200.0f64).sqrt();
    assert!((mean - 1.0 / n as f64).abs() <= 4.0 * sd, "{mean}");
}

#[test]
fn erdos_renyi_edge_count_within_three_sigma() {
    let (n, d) = (300, 6.0);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let labels = balanced_labels(n, &mut rng).unwrap();
    let params = SbmParams::new(n, d, 0.0).unwrap();
    let trials = 200;
    let total: usize = (0..trials).map(|_| sample_sbm(&params, &labels, &mut rng).unwrap().edge_count()).sum();
    let pairs = (n * (n - 1) / 2) as f64;
    let p = d / n as f64;
    let mean = total as f64 / trials as f64;
    let sd = (pairs * p * (1.0 - p) / trials as f64).sqrt();
    assert!((mean - d * (n - 1) as f64 / 2.0).abs() <= 3.0 * sd);
}

#[test]
fn intra_community_frequency_matches_binomial() {
    let (n, d, eps) = (1000, 20.0, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let labels = balanced_labels(n, &mut rng).unwrap();
    let g = sample_sbm(&SbmParams::new(n, d, eps).unwrap(), &labels, &mut rng).unwrap();
    let x = labels.as_slice();
    let same = g.edges().iter().filter(|&&(u, v)| x[u] == x[v]).count() as f64;
    let pairs = 2.0 * (500.0 * 499.0 / 2.0);
    let p = (1.0 + eps) * d / n as f64;
    let sd = (pairs * p * (1.0 - p)).sqrt();
    assert!((same - pairs * p).abs() <= 3.0 * sd, "{same} vs {}", pairs * p);
}

#[test]
fn z2_noise_variance_and_spike() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let n = 200;
    let labels = balanced_labels(n, &mut rng).unwrap();
    let a: Z2Instance<f64> = sample_z2(n, 0.0, &labels, &mut rng).unwrap();
    let off: Vec<f64> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| a.matrix.get(i, j)).collect();
    let var = off.iter().map(|v| v * v).sum::<f64>() / off.len() as f64;
    assert!((var / n as f64 - 1.0).abs() < 0.05, "{var}");

    let strong: Z2Instance<f64> = sample_z2(n, 10.0, &labels, &mut rng).unwrap();
    let eig = SymmetricEigen::new(to_na(&strong.matrix));
    let k = eig.eigenvalues.imax();
    let v = eig.eigenvectors.column(k);
    let ip: f64 = (0..n).map(|i| v[i] * labels.get(i) as f64).sum();
    assert!(ip * ip / n as f64 >= 0.9);
}

#[test]
fn center_adjacency_examples() {
    let empty = center_adjacency::<f64>(&Graph::empty(4), 4.0);
    let d = empty.to_dense();
    assert!((0..4).all(|i| (0..4).all(|j| d.get(i, j) == -1.0)));
    let g = Graph::from_edges(2, [(0, 1)]).unwrap();
    let c = center_adjacency::<f64>(&g, 1.0).to_dense();
    assert_eq!(c.get(0, 1), 0.5);
    assert_eq!(c.get(0, 0), -0.5);
}

#[test]
fn prune_examples() {
    let star = Graph::from_edges(50, (1..50).map(|j| (0, j))).unwrap();
    let r = prune_high_degree::<f64>(&star, 1.0, 1.0);
    assert_eq!(r.removed, vec![0]);
    let path = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let r = prune_high_degree::<f64>(&path, 1.0, 1.6);
    assert_eq!(r.kept.len(), 5);
    assert_eq!(r.removed_fraction, 0.0);
}

#[test]
fn certified_bound_matches_rederivation() {
    let mut p = DenseProgramParams::new(0.005, 0.1, 0.02);
    p.beta = 0.01;
    p.c_s = 3.0;
    let (n, d, eps) = (1000usize, 40.0f64, 0.2236f64);
    let got = certified_correlation_bound(&p, n, d, eps);
    // Term by term: margin on the shrunken support, transfer loss, then the
    // entries outside S ∩ S* bounded by 1 in absolute value.
    let n2 = 1.0e6;
    let margin = (0.1 - 0.02) * 0.98 * n2 / (eps * d.sqrt());
    let transfer = 2.0 * 3.0 * 0.005 * n2 / (eps * d.sqrt());
    let outside = 2.0 * 0.02 * n2;
    assert!((got - (margin - transfer - outside)).abs() < 1e-6 * n2);
    let mut big = p.clone();
    big.mu = 0.2;
    assert!(certified_correlation_bound(&big, n, d, eps) <= 0.0);
}

#[test]
fn f32_solver_agrees_with_f64() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let m = random_symmetric(12, &mut rng, true);
    let m32 = DenseMatrix::from_fn(12, |i, j| m.get(i, j) as f32);
    let a = solve_basic_sdp(&m, &SdpOptions::default()).unwrap().value;
    let b = solve_basic_sdp(&m32, &SdpOptions { tol: 1e-6, ..SdpOptions::default() }).unwrap().value;
    assert!((a - b as f64).abs() <= 1e-3 * a.abs(), "{a} vs {b}");
}

#[test]
fn overlap_orthogonal_pattern_is_zero() {
    let x = LabelVector::new(vec![1, 1, -1, -1]).unwrap();
    let y = LabelVector::new(vec![1, -1, 1, -1]).unwrap();
    assert_eq!(evaluate_overlap(&x, &y).unwrap(), 0.0);
}
