use hmgan::metrics::{gap_series, load_log, parse_log, render_svg, series_from_log, trend_slope, CurveSeries};
use hmgan::training::{EpochRecord, TrainLog};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Textbook normal-equation form, kept separate from the centered form in the library.
fn slope_oracle(pts: &[(usize, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let x = x as f64;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn sample_log(seed: u64) -> TrainLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = TrainLog::new("wgan");
    for epoch in 0..25 {
        let metrics = ["west_real", "west_fake", "loss_g"]
            .iter()
            .map(|n| (n.to_string(), rng.random_range(-10.0..10.0) * 10f64.powi(rng.random_range(-6..6))))
            .collect();
        log.push(EpochRecord { epoch, metrics, seconds: 0.5 }).unwrap();
    }
    log
}

#[test]
fn csv_round_trip_is_exact() {
    let log = sample_log(3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wgan_log.csv");
    log.write_csv(&path).unwrap();
    let loaded = load_log(&path).unwrap();
    assert_eq!(loaded, series_from_log(&log));
    assert_eq!(loaded.len(), 3);
    assert!(loaded.iter().all(|s| s.points.len() == 25));
}

#[test]
fn rows_may_arrive_out_of_order() {
    let s = parse_log("epoch,metric_name,value\n2,a,3\n0,a,1\n1,a,2\n", "x.csv".as_ref()).unwrap();
    assert_eq!(s[0].points, vec![(0, 1.0), (1, 2.0), (2, 3.0)]);
}

#[test]
fn malformed_rows_report_their_line() {
    for (text, line) in [
        ("epoch,metric_name,value\n0,a,1\n1,a\n", 3),
        ("epoch,metric_name,value\n0,a,1\n1,a,2\n2,a,nope\n", 4),
        ("epoch,metric_name,value\n-1,a,1\n", 2),
        ("epoch,name,value\n0,a,1\n", 1),
    ] {
        match parse_log(text, "bad.csv".as_ref()) {
            Err(hmgan::Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
            other => panic!("expected parse error for {text:?}, got {other:?}"),
        }
    }
}

#[test]
fn gap_of_identical_series_is_zero() {
    let s = series_from_log(&sample_log(9));
    let g = gap_series(&s[0], &s[0]).unwrap();
    assert!(g.points.iter().all(|p| p.1 == 0.0));
}

#[test]
fn svg_is_deterministic_and_lists_every_series() {
    let s = series_from_log(&sample_log(4));
    let a = render_svg(&s, "run").unwrap();
    let b = render_svg(&s, "run").unwrap();
    assert_eq!(a, b);
    assert_eq!(a.matches("<polyline").count(), 3);
    for name in ["west_real", "west_fake", "loss_g"] {
        assert!(a.contains(&format!(">{name}<")));
    }
    assert!(a.contains(">epoch<") && a.contains(">value<"));

    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    hmgan::metrics::render_curves(&s, &p1, "run").unwrap();
    hmgan::metrics::render_curves(&s, &p2, "run").unwrap();
    assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
}

proptest! {
    #[test]
    fn slope_matches_normal_equations(
        ys in prop::collection::vec(-1e3f64..1e3, 2..60),
        start in 0usize..500,
        window in 0.05f64..=1.0,
    ) {
        let pts: Vec<(usize, f64)> = ys.iter().enumerate().map(|(i, &y)| (start + 3 * i, y)).collect();
        let s = CurveSeries::new("s", pts.clone()).unwrap();
        let k = ((pts.len() as f64) * window).ceil() as usize;
        match trend_slope(&s, window) {
            Ok(m) => {
                let want = slope_oracle(&pts[pts.len() - k..]);
                prop_assert!((m - want).abs() <= 1e-9 * (1.0 + want.abs()), "{m} vs {want}");
            }
            Err(_) => prop_assert!(k < 2),
        }
    }

    #[test]
    fn slope_ignores_constant_offsets(ys in prop::collection::vec(-100f64..100.0, 2..40), c in -1e4f64..1e4) {
        let a = CurveSeries::new("a", ys.iter().enumerate().map(|(i, &y)| (i, y)).collect()).unwrap();
        let b = CurveSeries::new("b", ys.iter().enumerate().map(|(i, &y)| (i, y + c)).collect()).unwrap();
        let (sa, sb) = (trend_slope(&a, 1.0).unwrap(), trend_slope(&b, 1.0).unwrap());
        prop_assert!((sa - sb).abs() <= 1e-9 * (1.0 + c.abs()));
    }

    #[test]
    fn permuted_residuals_keep_unit_slope(seed in any::<u64>(), n in 3usize..80, noise in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r: Vec<f64> = (0..n).map(|_| rng.random_range(-noise..=noise)).collect();
        r.shuffle(&mut rng);
        let pts: Vec<(usize, f64)> = (0..n).map(|i| (i, i as f64 + r[i])).collect();
        let m = trend_slope(&CurveSeries::new("line", pts).unwrap(), 1.0).unwrap();
        // Cauchy-Schwarz bound on the residual contribution to the slope.
        let mean = (n - 1) as f64 / 2.0;
        let sxx: f64 = (0..n).map(|i| (i as f64 - mean).powi(2)).sum();
        let eps = (r.iter().map(|v| v * v).sum::<f64>() / sxx).sqrt() + 1e-12;
        prop_assert!((m - 1.0).abs() <= eps, "slope {m}, bound {eps}");
    }
}
