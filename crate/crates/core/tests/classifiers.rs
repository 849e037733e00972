use ispear::ml::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use Class::{Emotional as P, NonEmotional as N};

fn set(rows: Vec<Vec<f64>>, labels: Vec<Class>) -> LabeledSet {
    LabeledSet::new(rows, labels).unwrap()
}

/// Exact dual maximum by enumerating which variables sit at 0, at C, or free,
/// solving the equality-constrained stationarity system for the free ones.
fn brute_force_dual(data: &LabeledSet, kernel: &PolyKernel, c: f64) -> (f64, Vec<f64>) {
    let n = data.len();
    let y: Vec<f64> = data.labels().iter().map(|l| l.sign()).collect();
    let k = kernel.resolve(data.dim());
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k.eval(data.row(i), data.row(j)));
    let mut best = (f64::NEG_INFINITY, vec![]);
    for code in 0..3usize.pow(n as u32) {
        let state: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        let m = free.len();
        if m > 0 {
            // [Q_FF y_F; y_F^T 0] [a_F; nu] = [1 - Q_FB a_B; -y_B^T a_B]
            let mut a = DMatrix::zeros(m + 1, m + 1);
            let mut b = DVector::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = q[(i, j)];
                }
                a[(r, m)] = y[i];
                a[(m, r)] = y[i];
                b[r] = 1.0 - (0..n).filter(|j| state[*j] != 2).map(|j| q[(i, j)] * alpha[j]).sum::<f64>();
            }
            b[m] = -(0..n).filter(|j| state[*j] != 2).map(|j| y[j] * alpha[j]).sum::<f64>();
            let Some(sol) = a.lu().solve(&b) else { continue };
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
        }
        let feasible = alpha.iter().all(|&v| (-1e-9..=c + 1e-9).contains(&v))
            && alpha.iter().zip(&y).map(|(a, y)| a * y).sum::<f64>().abs() < 1e-9;
        if feasible {
            let obj = dual_objective(data, kernel, &alpha);
            if obj > best.0 {
                best = (obj, alpha);
            }
        }
    }
    best
}

fn random_feasible(rng: &mut ChaCha8Rng, labels: &[Class], c: f64) -> Vec<f64> {
    let mut a: Vec<f64> = labels.iter().map(|_| rng.gen_range(0.0..=c)).collect();
    let pos: f64 = a.iter().zip(labels).filter(|(_, l)| **l == P).map(|(v, _)| v).sum();
    let neg: f64 = a.iter().zip(labels).filter(|(_, l)| **l == N).map(|(v, _)| v).sum();
    let (shrink, factor) = if pos > neg { (P, neg / pos) } else { (N, pos / neg) };
    for (v, l) in a.iter_mut().zip(labels) {
        if *l == shrink {
            *v *= factor;
        }
    }
    a
}

#[test]
fn xor_matches_exact_dual() {
    let data = set(
        vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![N, N, P, P],
    );
    let kernel = PolyKernel { degree: 2, coef0: 1.0, gamma: Some(1.0) };
    let cfg = SvmConfig { kernel, c: 100.0, tol: 1e-9, ..Default::default() };
    let m = train_svm(&data, &cfg, 0).unwrap();
    assert!(m.converged);
    for i in 0..4 {
        assert_eq!(m.predict(data.row(i)).unwrap(), data.labels()[i]);
    }
    let (exact, _) = brute_force_dual(&data, &kernel, 100.0);
    let got = dual_objective(&data, &kernel, &m.alphas);
    assert!((got - exact).abs() < 1e-6 * exact.abs().max(1.0), "{got} vs {exact}");
}

#[test]
fn small_problems_match_exact_dual() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let rows: Vec<Vec<f64>> = (0..6).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
        let labels = vec![N, N, P, P, P, N];
        let data = set(rows, labels);
        let c = rng.gen_range(0.1..5.0);
        let cfg = SvmConfig { c, tol: 1e-10, ..Default::default() };
        let m = train_svm(&data, &cfg, 0).unwrap();
        let (exact, _) = brute_force_dual(&data, &cfg.kernel, c);
        let got = dual_objective(&data, &cfg.kernel, &m.alphas);
        assert!((got - exact).abs() < 1e-6 * exact.abs().max(1.0), "{got} vs {exact}");
    }
}

#[test]
fn dual_beats_random_feasible_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = (0..24).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
    let labels: Vec<Class> = rows.iter().map(|r| if r[0] + rng.gen_range(-1.0..1.0) > 0.0 { P } else { N }).collect();
    let data = set(rows, labels.clone());
    let cfg = SvmConfig::default();
    let m = train_svm(&data, &cfg, 3).unwrap();
    assert!(m.converged);
    let balance: f64 = m.alphas.iter().zip(&labels).map(|(a, l)| a * l.sign()).sum();
    assert!(balance.abs() < 1e-8);
    assert!(m.alphas.iter().all(|&a| (0.0..=cfg.c).contains(&a)));
    let obj = dual_objective(&data, &cfg.kernel, &m.alphas);
    for _ in 0..10_000 {
        let a = random_feasible(&mut rng, &labels, cfg.c);
        assert!(dual_objective(&data, &cfg.kernel, &a) <= obj + 1e-9);
    }
}

#[test]
fn permutation_leaves_decision_function_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
    let labels: Vec<Class> = rows.iter().map(|r| if r[0] > 0.3 { P } else { N }).collect();
    let mut perm: Vec<usize> = (0..30).collect();
    perm.reverse();
    perm.swap(3, 17);
    let data = set(rows.clone(), labels.clone());
    let shuffled = set(perm.iter().map(|&i| rows[i].clone()).collect(), perm.iter().map(|&i| labels[i]).collect());
    let cfg = SvmConfig { c: 10.0, tol: 1e-10, ..Default::default() };
    let a = train_svm(&data, &cfg, 1).unwrap();
    let b = train_svm(&shuffled, &cfg, 2).unwrap();
    for t in -20..=20 {
        let x = [t as f64 * 0.1];
        let (da, db) = (a.decision_value(&x).unwrap(), b.decision_value(&x).unwrap());
        assert!((da - db).abs() < 1e-6, "{x:?}: {da} vs {db}");
    }
}

#[test]
fn sigmoid_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let d = rng.gen_range(1..4);
        let rows: Vec<Vec<f64>> = (0..15).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let labels: Vec<Class> = (0..15).map(|i| if i % 3 == 0 { N } else { P }).collect();
        let data = set(rows, labels);
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let cw = [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)];
        let (_, gw, gb) = loss_and_gradient(&data, cw, &w, b);
        let eps = 1e-5;
        let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
        for k in 0..d {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[k] += eps;
            wm[k] -= eps;
            let num = (loss_and_gradient(&data, cw, &wp, b).0 - loss_and_gradient(&data, cw, &wm, b).0) / (2.0 * eps);
            assert!(rel(gw[k], num) < 1e-5, "w{k}: {} vs {num}", gw[k]);
        }
        let num = (loss_and_gradient(&data, cw, &w, b + eps).0 - loss_and_gradient(&data, cw, &w, b - eps).0) / (2.0 * eps);
        assert!(rel(gb, num) < 1e-5);
    }
}

#[test]
fn published_confusion_matrices() {
    let pct = |v: Option<f64>| v.map(|x| (x * 1000.0).round() / 10.0);
    let svm = confusion_metrics(&ConfusionMatrix::new([[684, 456], [336, 1944]])).unwrap();
    assert!((svm.accuracy - 2628.0 / 3420.0).abs() < 1e-15);
    assert_eq!((svm.accuracy * 1000.0).round() / 10.0, 76.8);
    let [ne, em] = svm.per_class;
    assert_eq!((pct(ne.precision), pct(ne.recall)), (Some(60.0), Some(67.1)));
    assert_eq!((pct(em.precision), pct(em.recall)), (Some(85.3), Some(81.0)));
    assert_eq!((ne.tp_row, ne.fp_row, em.tp_row, em.fp_row), (684, 456, 1944, 336));
    assert_eq!((ne.std_precision, ne.std_recall), (ne.recall, ne.precision));

    let nn = confusion_metrics(&ConfusionMatrix::new([[0, 1140], [0, 2280]])).unwrap();
    assert_eq!((nn.accuracy * 1000.0).round() / 10.0, 66.7);
    let [ne, em] = nn.per_class;
    assert_eq!(ne.precision, Some(0.0));
    assert_eq!(ne.recall, None);
    assert_eq!(em.precision, Some(1.0));
    assert_eq!(pct(em.recall), Some(66.7));
}

#[test]
fn leaked_label_is_perfect() {
    let labels: Vec<Class> = (0..60).map(|i| if i % 3 == 0 { N } else { P }).collect();
    let rows = labels.iter().map(|l| vec![l.sign()]).collect();
    let data = set(rows, labels);
    for cfg in [
        ClassifierConfig::Svm(SvmConfig::default()),
        ClassifierConfig::Sigmoid(SigmoidConfig::default()),
    ] {
        let r = evaluate_cv(&data, &cfg, 5, 9).unwrap();
        assert_eq!(r.pooled_accuracy, 1.0, "{}", cfg.name());
    }
}

#[test]
fn evaluation_is_deterministic_and_pooled() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let labels: Vec<Class> = (0..150).map(|i| if i % 3 == 0 { N } else { P }).collect();
    let rows = labels.iter().map(|l| vec![rng.gen_range(-1.0..1.0) + 0.7 * l.sign()]).collect();
    let data = set(rows, labels);
    let cfg = ClassifierConfig::Svm(SvmConfig::default());
    let a = evaluate_cv(&data, &cfg, 10, 4).unwrap();
    assert_eq!(a, evaluate_cv(&data, &cfg, 10, 4).unwrap());
    let mut sum = ConfusionMatrix::default();
    for f in &a.folds {
        sum.add(&f.confusion);
    }
    assert_eq!(sum, a.pooled);
    // Equal fold sizes make both accuracy summaries agree.
    assert!((a.pooled_accuracy - a.mean_fold_accuracy).abs() < 1e-12);
    assert!(a.pooled_accuracy > 0.75);
}

proptest! {
    #[test]
    fn precision_times_row_total_is_trace(c in prop::array::uniform4(0u64..500)) {
        let cm = ConfusionMatrix::new([[c[0], c[1]], [c[2], c[3]]]);
        prop_assume!(cm.total() > 0);
        let m = confusion_metrics(&cm).unwrap();
        let s: f64 = m.per_class.iter().map(|p| p.precision.unwrap_or(0.0) * p.row_total as f64).sum();
        prop_assert!((s - cm.trace() as f64).abs() < 1e-9);
        prop_assert!((m.accuracy * cm.total() as f64 - cm.trace() as f64).abs() < 1e-9);
    }

    #[test]
    fn folds_stay_proportional(n_neg in 10usize..80, n_pos in 10usize..160, k in 2usize..10, seed: u64) {
        let labels: Vec<Class> = (0..n_neg + n_pos).map(|i| if i < n_neg { N } else { P }).collect();
        let data = set(labels.iter().map(|_| vec![0.0]).collect(), labels);
        let folds = stratified_kfold(&data, k, seed).unwrap();
        for f in &folds {
            let neg = f.test.iter().filter(|&&i| data.labels()[i] == N).count();
            let pos = f.test.len() - neg;
            prop_assert!((neg as f64 - n_neg as f64 / k as f64).abs() < 1.0);
            prop_assert!((pos as f64 - n_pos as f64 / k as f64).abs() < 1.0);
        }
    }
}
