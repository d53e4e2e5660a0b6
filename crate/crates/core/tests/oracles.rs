use shapebench::denoise::{train_eigenshape, Baseline, Denoiser, DenoiserConfig, Method};
use shapebench::noise::{circle_noise, salt_pepper};
use shapebench::stats::{paired_one_sided_t_test, student_t_cdf};
use shapebench::{iou, synth, BinaryShape};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::sync::Arc;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                #[allow(clippy::needless_range_loop)]
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

fn ellipse_family() -> Vec<BinaryShape> {
    let mut out = Vec::new();
    for a in [14.0, 18.0, 22.0, 26.0] {
        for b in [12.0, 16.0, 20.0, 24.0, 28.0] {
            out.push(synth::ellipse(64, 64, 32.0, 32.0, a, b).unwrap());
        }
    }
    out
}

#[test]
fn student_t_matches_statrs() {
    for df in [1.0, 2.0, 3.0, 5.0, 9.0, 30.0, 199.0] {
        let reference = StudentsT::new(0.0, 1.0, df).unwrap();
        for t in [-8.0, -3.0, -1.2, -0.1, 0.0, 0.4, 1.0, 2.5, 3.4641, 6.0, 12.0] {
            let got = student_t_cdf(t, df);
            let want = reference.cdf(t);
            assert!((got - want).abs() < 1e-10, "df={df} t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn t_test_reference_case() {
    let best = [1.0, 2.0, 3.0];
    let cand = [0.0; 3];
    let r = paired_one_sided_t_test(&cand, &best, 0.05).unwrap();
    assert!((r.t_stat - 2.0 * 3f64.sqrt()).abs() < 1e-12);
    assert_eq!(r.df, 2);
    let want = 1.0 - StudentsT::new(0.0, 1.0, 2.0).unwrap().cdf(r.t_stat);
    assert!((r.p_value - want).abs() < 1e-12);
    assert!(r.significant);
}

#[test]
fn ellipse_variance_matches_gram_oracle() {
    let shapes = ellipse_family();
    let n = shapes.len();
    let vecs: Vec<Vec<f64>> = shapes.iter().map(BinaryShape::to_f64_vec).collect();
    let d = vecs[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|i| vecs.iter().map(|v| v[i]).sum::<f64>() / n as f64)
        .collect();
    let centered: Vec<Vec<f64>> = vecs
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(a, b)| a - b).collect())
        .collect();
    let gram: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let ev = jacobi_eigenvalues(gram);
    let variances: Vec<f64> = ev.iter().map(|l| l.max(0.0) / (n - 1) as f64).collect();

    let model = train_eigenshape(&shapes, n - 1).unwrap();
    for (got, want) in model.variances().iter().zip(&variances) {
        assert!((got - want).abs() < 1e-6 * (1.0 + want), "{got} vs {want}");
    }
    let total: f64 = variances.iter().sum();
    let top2 = (variances[0] + variances[1]) / total;
    let top4 = variances[..4].iter().sum::<f64>() / total;
    // Rasterized ellipses are not a 2-dimensional family in pixel space:
    // moving an edge flips whole pixels, so variance spreads over many
    // directions. The top two carry about 62% on any grid of semi-axes.
    assert!(top2 > 0.60 && top2 < 0.65, "top-2 fraction {top2}");
    assert!(top4 > 0.75, "top-4 fraction {top4}");
}

#[test]
fn two_shapes_span_their_difference() {
    let a = synth::disk(24, 24, 12.0, 12.0, 5.0).unwrap();
    let b = synth::rectangle(24, 24, 4, 6, 14, 9).unwrap();
    let model = train_eigenshape(&[a.clone(), b.clone()], 1).unwrap();
    let diff: Vec<f64> = a.to_f64_vec().iter().zip(b.to_f64_vec()).map(|(x, y)| x - y).collect();
    let norm = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot: f64 = model.components()[0].iter().zip(&diff).map(|(c, d)| c * d / norm).sum();
    assert!((dot.abs() - 1.0).abs() < 1e-9);
    assert_eq!(model.denoise(&a, 1, 0.5).unwrap(), a);
    assert_eq!(model.denoise(&b, 1, 0.5).unwrap(), b);
}

#[test]
fn eigenshape_cleans_noisy_training_ellipse() {
    let shapes = ellipse_family();
    let model = Arc::new(train_eigenshape(&shapes, 5).unwrap());
    let cfg = DenoiserConfig {
        method: Method::Eigenshape,
        n_components: 5,
        ..Default::default()
    };
    let d = Baseline::new(cfg, Some(model)).unwrap();
    let clean = &shapes[7];
    let noisy = salt_pepper(clean, 0.1, 11).unwrap();
    let before = iou(&noisy, clean).unwrap();
    let after = iou(&d.denoise(&noisy).unwrap(), clean).unwrap();
    assert!(after > before, "{after} <= {before}");
}

fn mean_input_iou(clean: &BinaryShape, seeds: u64, noise: impl Fn(u64) -> BinaryShape) -> f64 {
    (0..seeds).map(|s| iou(clean, &noise(s)).unwrap()).sum::<f64>() / seeds as f64
}

#[test]
fn salt_pepper_matches_expected_iou() {
    let clean = synth::disk(64, 64, 32.0, 32.0, 20.0).unwrap();
    let f = clean.foreground_count() as f64;
    let n = clean.len() as f64;
    for p in [0.05, 0.10, 0.15] {
        let got = mean_input_iou(&clean, 200, |s| salt_pepper(&clean, p, s).unwrap());
        let want = f * (1.0 - p) / (f + (n - f) * p);
        assert!((got - want).abs() < 0.02, "p={p}: {got} vs {want}");
    }
}

#[test]
fn noise_levels_are_monotone() {
    let clean = synth::disk(64, 64, 32.0, 32.0, 20.0).unwrap();
    let by_p: Vec<f64> = [0.0, 0.02, 0.05, 0.1, 0.15]
        .iter()
        .map(|&p| mean_input_iou(&clean, 200, |s| salt_pepper(&clean, p, s).unwrap()))
        .collect();
    assert!(by_p.windows(2).all(|w| w[1] <= w[0]), "{by_p:?}");
    let by_r: Vec<f64> = (0..=6)
        .map(|r| mean_input_iou(&clean, 200, |s| circle_noise(&clean, r, 8, s).unwrap()))
        .collect();
    assert!(by_r.windows(2).all(|w| w[1] <= w[0]), "{by_r:?}");
}
