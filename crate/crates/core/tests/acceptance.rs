//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

mod common;

use std::time::Instant;

use common::*;
use landsuit::aggregate::{ahp_weights, random_ahp, ComparisonMatrix, SAATY_SCALE};
use landsuit::bench::{run_bench, BenchSuite};
use landsuit::geom::{Column, FeatureLayer, LineString, Point2, Polygon};
use landsuit::index::{KdTree, Metric, DEFAULT_LEAF_SIZE};
use landsuit::io::{ascii_grid_string, geojson_string, parse_geojson, GeoJsonOptions};
use landsuit::ops::{distance_to_line, idw_estimate, IdwConfig, Neighbors, RepresentativePoint};
use landsuit::pipeline::{load_model, run_model};
use landsuit::raster::{AffineTransform, Grid};
use landsuit::rescale::{linear, natural_breaks, LinearScale, ScaleOrder};
use rand::Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn nn_oracle() -> Check {
    let start = Instant::now();
    let mut queries = 0;
    for seed in 0..20 {
        let mut r = rng(1000 + seed);
        let targets = random_points(&mut r, 1000, 0.0, 1000.0);
        let sources = random_points(&mut r, 1000, 0.0, 1000.0);
        let tree = KdTree::build(&targets, DEFAULT_LEAF_SIZE).map_err(|e| e.to_string())?;
        for metric in [Metric::Euclidean, Metric::Manhattan] {
            for &p in &sources {
                let got = tree.nearest(p, metric).map_err(|e| e.to_string())?;
                let (i, d) = scan_nearest(p, &targets, metric);
                ensure!(got.index == i, "seed {seed} {metric:?}: index {} vs {i}", got.index);
                ensure!((got.distance - d).abs() <= 1e-9, "seed {seed}: distance {} vs {d}", got.distance);
                queries += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.2} s");
    Ok(format!("{queries} queries match, {secs:.2} s"))
}

fn line_distance_bound() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let mut r = rng(2000 + seed);
        let line = LineString::new(random_points(&mut r, 10, 0.0, 1000.0)).map_err(|e| e.to_string())?;
        let b = line.bbox();
        let c = b.width().max(b.height()) / 100.0;
        let bound = (std::f64::consts::SQRT_2 / 2.0 + 1.0) * c;
        let sources = random_points(&mut r, 500, 0.0, 1000.0);
        let got = distance_to_line(
            &FeatureLayer::from_points(sources.clone()),
            &FeatureLayer::from_line_strings([line.clone()]),
            c,
            Metric::Euclidean,
            &RepresentativePoint::Centroid,
        )
        .map_err(|e| e.to_string())?;
        for (p, v) in sources.iter().zip(&got.values) {
            let err = (v.ok_or("nodata distance")? - polyline_distance(*p, line.vertices())).abs();
            ensure!(err <= bound, "seed {seed}: error {err} exceeds {bound}");
            worst = worst.max(err / c);
        }
    }
    Ok(format!("2500 points within bound, worst error {worst:.3} c"))
}

fn idw_at(p: Point2, known: &[Point2], zs: &[f64], cfg: &IdwConfig) -> Result<Option<f64>, String> {
    let est = idw_estimate(
        &FeatureLayer::from_points([p]),
        &point_layer(known, "z", zs),
        "z",
        cfg,
        &RepresentativePoint::Centroid,
    )
    .map_err(|e| e.to_string())?;
    Ok(est.values[0])
}

fn idw_correctness() -> Check {
    let u2 = IdwConfig::with_power(2.0);
    let hand = idw_at(
        Point2::new(0.0, 0.0),
        &[Point2::new(1.0, 0.0), Point2::new(0.0, 2.0)],
        &[10.0, 40.0],
        &u2,
    )?;
    ensure!(hand == Some(16.0), "hand example gave {hand:?}");

    let mut r = rng(3000);
    let known = random_points(&mut r, 200, 0.0, 100.0);
    let zs: Vec<f64> = (0..200).map(|_| r.random_range(-500.0..500.0)).collect();
    let layer = point_layer(&known, "z", &zs);
    let queries = random_points(&mut r, 10_000, -20.0, 120.0);
    let mut evaluated = 0;
    for (k, u) in [(Neighbors::Count(12), 2.0), (Neighbors::Count(5), 0.7), (Neighbors::All, 3.5)] {
        let cfg = IdwConfig { power: u, neighbors: k, search_radius: None };
        let est = idw_estimate(
            &FeatureLayer::from_points(queries.clone()),
            &layer,
            "z",
            &cfg,
            &RepresentativePoint::Centroid,
        )
        .map_err(|e| e.to_string())?;
        let take = match k {
            Neighbors::All => known.len(),
            Neighbors::Count(k) => k,
        };
        for (q, v) in queries.iter().zip(&est.values) {
            let used: Vec<f64> = scan_sorted(*q, &known, Metric::Euclidean)
                .into_iter()
                .take(take)
                .map(|(i, _)| zs[i])
                .collect();
            let lo = used.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = used.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let v = v.ok_or("nodata estimate")?;
            ensure!(v >= lo - 1e-9 && v <= hi + 1e-9, "estimate {v} outside [{lo}, {hi}]");
            evaluated += 1;
        }
    }

    for (i, &p) in known.iter().enumerate().take(50) {
        let v = idw_at(p, &known, &zs, &u2)?;
        ensure!(v == Some(zs[i]), "zero-distance query at known {i} gave {v:?}");
    }
    let dup = idw_at(
        Point2::new(1.0, 1.0),
        &[Point2::new(1.0, 1.0), Point2::new(1.0, 1.0), Point2::new(3.0, 1.0)],
        &[42.0, 7.0, 0.0],
        &u2,
    )?;
    ensure!(dup == Some(42.0), "coincident knowns gave {dup:?}");
    Ok(format!("hand example 16.0, {evaluated} convex-bound checks, zero-distance exact"))
}

fn jenks_exactness() -> Check {
    let start = Instant::now();
    let mut r = rng(4000);
    let mut trials = 0;
    while trials < 200 {
        let n = r.random_range(2..=15);
        let k = r.random_range(2..=4);
        let xs: Vec<f64> = (0..n).map(|_| r.random_range(0..60) as f64 * 0.5).collect();
        let mut distinct = xs.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < k {
            continue;
        }
        let cb = natural_breaks(&xs, k).map_err(|e| e.to_string())?;
        let best = enumerate_min_sdcm(&xs, k);
        ensure!(
            (cb.sdcm - best).abs() <= 1e-9 * cb.sdam.max(1.0),
            "trial {trials}: SDCM {} vs enumerated {best}",
            cb.sdcm
        );
        trials += 1;
    }
    let cb = natural_breaks(&[1.0, 2.0, 3.0, 10.0, 11.0, 12.0], 2).map_err(|e| e.to_string())?;
    ensure!(cb.gvf == 121.5 / 125.5, "worked example GVF {}", cb.gvf);
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 5.0, "took {secs:.2} s");
    Ok(format!("200 trials optimal, worked example GVF {:.5}, {secs:.2} s", cb.gvf))
}

fn linear_identities() -> Check {
    let mut r = rng(5000);
    let xs: Vec<f64> = (0..1000).map(|_| r.random_range(-1e3..1e3)).collect();
    let input: Vec<Option<f64>> = xs.iter().map(|&x| Some(x)).collect();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let pairs = [(1.0, 9.0), (0.0, 1.0), (0.0, 100.0), (-5.0, 5.0), (0.25, 0.75)];
    for (a, b) in pairs {
        let run = |order| -> Result<Vec<f64>, String> {
            let s = LinearScale::new(a, b, order).map_err(|e| e.to_string())?;
            let out = linear(&input, &s).map_err(|e| e.to_string())?;
            Ok(out.values.into_iter().map(|v| v.unwrap()).collect())
        };
        let (reg, inv) = (run(ScaleOrder::Regular)?, run(ScaleOrder::Inverse)?);
        for i in 0..xs.len() {
            ensure!(reg[i] + inv[i] == a + b, "[{a}, {b}] x={}: {} + {} != {}", xs[i], reg[i], inv[i], a + b);
            if xs[i] == lo {
                ensure!(reg[i] == a && inv[i] == b, "[{a}, {b}]: minimum maps to {} / {}", reg[i], inv[i]);
            }
            if xs[i] == hi {
                ensure!(reg[i] == b && inv[i] == a, "[{a}, {b}]: maximum maps to {} / {}", reg[i], inv[i]);
            }
        }
        let (pr, pi) = (pearson(&xs, &reg), pearson(&xs, &inv));
        ensure!((pr - 1.0).abs() <= 1e-12 && (pi + 1.0).abs() <= 1e-12, "[{a}, {b}]: r = {pr}, {pi}");
    }
    Ok(format!("{} scales on 1000 values: sum exact, endpoints exact, |r| = 1", pairs.len()))
}

fn ahp_recovery() -> Check {
    let mut r = rng(6000);
    let mut worst: f64 = 0.0;
    for t in 0..1000 {
        let n = 3 + t % 7;
        let raw: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let pv = ahp_weights(&ComparisonMatrix::from_weights(&w).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for (g, e) in pv.weights.iter().zip(&w) {
            worst = worst.max((g - e).abs());
        }
        ensure!(worst <= 1e-6, "matrix {t}: weight error {worst}");
        ensure!(pv.cr < 1e-9, "matrix {t}: CR {}", pv.cr);
    }
    let bad = ComparisonMatrix::from_rows(vec![
        vec![1.0, 7.0, 1.0 / 5.0],
        vec![1.0 / 7.0, 1.0, 3.0],
        vec![5.0, 1.0 / 3.0, 1.0],
    ])
    .map_err(|e| e.to_string())?;
    let bad_cr = ahp_weights(&bad).map_err(|e| e.to_string())?.cr;
    ensure!(bad_cr > 0.1, "inconsistent example CR {bad_cr}");
    for n in 2..=15 {
        let ones = ComparisonMatrix::from_rows(vec![vec![1.0; n]; n]).map_err(|e| e.to_string())?;
        let pv = ahp_weights(&ones).map_err(|e| e.to_string())?;
        ensure!(pv.cr == 0.0, "all-ones n={n}: CR {}", pv.cr);
        ensure!(
            pv.weights.iter().all(|w| (w - 1.0 / n as f64).abs() <= 1e-15),
            "all-ones n={n}: weights {:?}",
            pv.weights
        );
    }
    Ok(format!("1000 matrices, worst error {worst:.1e}; example CR {bad_cr:.3}; all-ones CR 0"))
}

fn random_ahp_validity() -> Check {
    let mut draws = 0;
    for n in [3, 4, 5] {
        for seed in 0..1000 {
            let out = random_ahp(n, seed).map_err(|e| e.to_string())?;
            draws += out.draws;
            let m = &out.matrix;
            for i in 0..n {
                for j in 0..n {
                    let a = m.get(i, j);
                    let ok = if i == j { a == 1.0 } else { SAATY_SCALE.contains(&a) };
                    ensure!(ok, "n={n} seed {seed}: entry ({i}, {j}) = {a}");
                }
            }
            ensure!(out.priority.cr < 0.1, "n={n} seed {seed}: CR {}", out.priority.cr);
            let sum: f64 = out.priority.weights.iter().sum();
            ensure!((sum - 1.0).abs() <= 1e-12, "n={n} seed {seed}: weights sum {sum}");
        }
    }
    for seed in [0, 7, 12345] {
        let (a, b) = (random_ahp(5, seed).unwrap(), random_ahp(5, seed).unwrap());
        let bits = |w: &[f64]| w.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        ensure!(
            a.matrix == b.matrix && bits(&a.priority.weights) == bits(&b.priority.weights) && a.draws == b.draws,
            "seed {seed} not reproducible"
        );
    }
    Ok(format!("3000 samples valid ({draws} draws), seeds reproducible"))
}

fn pipeline_composition() -> Check {
    use common::compose::{fixtures, manual_one, manual_three, manual_two};
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cases: [(&str, fn() -> String); 3] = [
        ("one_criterion.json", manual_one),
        ("two_criteria.json", manual_two),
        ("three_criteria.json", manual_three),
    ];
    for (name, manual) in cases {
        let mut m = load_model(fixtures().join(name)).map_err(|e| e.to_string())?;
        let out = dir.path().join(name.replace(".json", ".geojson"));
        m.output.path = Some(out.clone());
        let (_, report) = run_model(&m).map_err(|e| e.to_string())?;
        let text = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
        ensure!(text == manual(), "{name}: output differs from manual composition");
        let datasets = m.datasets();
        ensure!(report.io.reads.len() == datasets.len(), "{name}: read counter has {:?}", report.io.reads);
        ensure!(
            datasets.iter().all(|d| report.io.reads.get(d) == Some(&1)),
            "{name}: reads {:?}",
            report.io.reads
        );
        ensure!(report.io.writes == 1, "{name}: {} writes", report.io.writes);
    }
    Ok("3 models byte-identical to manual composition, one read per dataset".into())
}

fn bench_scaling() -> Check {
    let start = Instant::now();
    let t = run_bench(BenchSuite::Nn, &[1_000, 10_000, 100_000], 42).map_err(|e| e.to_string())?;
    let last = t.rows.last().expect("three rows");
    let (bs, is) = (t.brute_slope.unwrap_or(f64::NAN), t.indexed_slope.unwrap_or(f64::NAN));
    let secs = start.elapsed().as_secs_f64();
    let summary = format!(
        "speedup {:.1}x at 1e5, brute slope {bs:.3}, indexed slope {is:.3}, {secs:.1} s",
        last.speedup
    );
    ensure!(last.speedup >= 5.0, "{summary}");
    ensure!((bs - 2.0).abs() <= 0.3, "{summary}");
    ensure!(is <= 1.7, "{summary}");
    ensure!(secs < 120.0, "{summary}");
    Ok(summary)
}

fn format_fidelity() -> Check {
    let mut r = rng(10_000);
    let polys: Vec<Polygon> = (0..155)
        .map(|_| {
            let (x, y) = (r.random_range(0.0..1e5), r.random_range(0.0..1e5));
            let s = r.random_range(1.0..100.0);
            Polygon::new(
                vec![
                    Point2::new(x, y),
                    Point2::new(x + s, y + s * 0.1),
                    Point2::new(x + s * 0.9, y + s),
                    Point2::new(x - s * 0.2, y + s * 0.7),
                ],
                vec![],
            )
            .unwrap()
        })
        .collect();
    let layer = FeatureLayer::from_polygons(polys)
        .with_column("id", Column::Integer((0..155).map(Some).collect()))
        .and_then(|l| l.with_column("v", Column::Number((0..155).map(|_| Some(r.random_range(-1.0..1.0))).collect())))
        .and_then(|l| l.with_column("tag", Column::Text((0..155).map(|i| Some(format!("t{i}"))).collect())))
        .map_err(|e| e.to_string())?;
    let back = parse_geojson(&geojson_string(&layer), GeoJsonOptions::default()).map_err(|e| e.to_string())?;
    ensure!(back.len() == 155, "{} features after round trip", back.len());
    for (a, b) in layer.polygons().unwrap().iter().zip(back.polygons().map_err(|e| e.to_string())?) {
        let ok = a.exterior().len() == b.exterior().len()
            && a.exterior()
                .iter()
                .zip(b.exterior())
                .all(|(p, q)| (p.x - q.x).abs() <= 1e-9 && (p.y - q.y).abs() <= 1e-9);
        ensure!(ok, "geometry drifted");
    }
    for name in ["id", "v", "tag"] {
        ensure!(back.attributes().get(name) == layer.attributes().get(name), "column {name} changed");
    }
    let tf = AffineTransform::new(100.0, 5000.0, 4500.0).map_err(|e| e.to_string())?;
    let text = ascii_grid_string(&Grid::filled(tf, 2, 2, 1.0).map_err(|e| e.to_string())?);
    let lines: Vec<&str> = text.lines().collect();
    ensure!(lines.contains(&"xllcorner 5000"), "header {:?}", &lines[..6]);
    ensure!(lines.contains(&"cellsize 100"), "header {:?}", &lines[..6]);
    Ok("155 features round trip; ASCII header xllcorner 5000, cellsize 100".into())
}

fn main() {
    let checks: [(&str, fn() -> Check); 10] = [
        ("nearest-neighbor oracle", nn_oracle),
        ("distance-to-line bound", line_distance_bound),
        ("idw correctness", idw_correctness),
        ("natural breaks exactness", jenks_exactness),
        ("linear rescale identities", linear_identities),
        ("ahp recovery", ahp_recovery),
        ("random ahp", random_ahp_validity),
        ("pipeline composition", pipeline_composition),
        ("indexed scaling", bench_scaling),
        ("format fidelity", format_fidelity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
