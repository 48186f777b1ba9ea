mod common;

use common::*;
use landsuit::aggregate::{ahp_weights, weighted_sum, ComparisonMatrix};
use landsuit::geom::{Column, FeatureLayer, LineString, Point2, Polygon, Value};
use landsuit::index::{KdTree, Metric};
use landsuit::ops::{idw_cv, idw_estimate, IdwConfig, Neighbors, RepresentativePoint};
use landsuit::raster::{rasterize_lines, zonal_cell_count, AffineTransform};
use landsuit::rescale::{linear, natural_breaks, reclassify, Category, LinearScale, ReclassifyTable, ScaleOrder};
use proptest::prelude::*;

fn signed_area(ring: &[Point2]) -> f64 {
    ring.windows(2).map(|w| w[0].x * w[1].y - w[1].x * w[0].y).sum::<f64>() / 2.0
}

fn coords(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), n)
}

/// Points snapped to a coarse lattice so ties and duplicates are common.
fn lattice(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec((0i32..20, 0i32..20), n)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point2::new(x as f64 * 0.5, y as f64 * 0.5)).collect())
}

fn convex_polygon() -> impl Strategy<Value = Polygon> {
    (
        prop::collection::btree_set(0u32..3600, 3..12),
        -50.0..50.0f64,
        -50.0..50.0f64,
        1.0..40.0f64,
        any::<bool>(),
    )
        .prop_map(|(angles, cx, cy, r, clockwise)| {
            let mut ring: Vec<Point2> = angles
                .into_iter()
                .map(|a| {
                    let t = a as f64 / 3600.0 * std::f64::consts::TAU;
                    Point2::new(cx + r * t.cos(), cy + r * t.sin())
                })
                .collect();
            if clockwise {
                ring.reverse();
            }
            Polygon::new(ring, vec![]).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polygon_rings_closed_and_oriented(poly in convex_polygon()) {
        let ext = poly.exterior();
        prop_assert_eq!(ext.first(), ext.last());
        prop_assert!(signed_area(ext) > 0.0);
        prop_assert!((poly.area() - signed_area(ext)).abs() <= 1e-9 * poly.area().max(1.0));
        let c = poly.centroid();
        prop_assert!(!c.degenerate);
        prop_assert!(poly.contains(c.point));
    }

    #[test]
    fn polygon_containment_matches_oracle(poly in convex_polygon(), pts in coords(1..40)) {
        for (x, y) in pts {
            let p = Point2::new(x, y);
            prop_assert_eq!(poly.contains(p), polygon_contains(&poly, p));
        }
    }

    #[test]
    fn polygon_translation_invariance(poly in convex_polygon(), dx in -1e3..1e3f64, dy in -1e3..1e3f64, pts in coords(1..20)) {
        let moved = poly.translate(dx, dy);
        prop_assert!((moved.area() - poly.area()).abs() <= 1e-9 * poly.area().max(1.0) * (1.0 + dx.abs() + dy.abs()));
        for (x, y) in pts {
            let p = Point2::new(x, y);
            // Skip points within rounding reach of an edge.
            let near = poly.exterior().windows(2).any(|w| segment_distance(p, w[0], w[1]) < 1e-6);
            if !near {
                prop_assert_eq!(poly.contains(p), moved.contains(p.translate(dx, dy)));
            }
        }
    }

    #[test]
    fn kdtree_matches_scan(targets in lattice(1..300), queries in lattice(1..30), leaf in 1usize..20) {
        let tree = KdTree::build(&targets, leaf).unwrap();
        prop_assert!(tree.validate().is_ok());
        prop_assert!(tree.nodes().len() < 2 * targets.len().max(1) + 1);
        for metric in [Metric::Euclidean, Metric::Manhattan] {
            for &q in &queries {
                let got = tree.nearest(q, metric).unwrap();
                let (i, d) = scan_nearest(q, &targets, metric);
                prop_assert_eq!(got.index, i);
                prop_assert!((got.distance - d).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn k_nearest_matches_sorted_scan(targets in lattice(1..200), q in (0.0..10.0f64, 0.0..10.0f64), k in 1usize..30) {
        let tree = KdTree::build(&targets, 4).unwrap();
        let q = Point2::new(q.0, q.1);
        for metric in [Metric::Euclidean, Metric::Manhattan] {
            let got: Vec<usize> = tree.k_nearest(q, k, metric).unwrap().iter().map(|n| n.index).collect();
            let want: Vec<usize> = scan_sorted(q, &targets, metric).into_iter().take(k).map(|(i, _)| i).collect();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn affine_round_trip(c in 0.01..500.0f64, l in -1e5..1e5f64, t in -1e5..1e5f64, col in 0i64..10_000, row in 0i64..10_000) {
        let tf = AffineTransform::new(c, l, t).unwrap();
        prop_assert_eq!(tf.world_to_cell(tf.cell_to_world(col, row)), (col, row));
        let b = tf.cell_bounds(col, row);
        let center = tf.cell_to_world(col, row);
        prop_assert!(b.contains(center));
        prop_assert!((b.width() - c).abs() <= 1e-9 * c.max(1.0) * (1.0 + l.abs().max(t.abs()) / c));
    }

    #[test]
    fn supercover_is_conservative(verts in coords(2..6), c in 0.5..20.0f64) {
        let pts: Vec<Point2> = verts.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let Ok(line) = LineString::new(pts.clone()) else { return Ok(()); };
        let layer = FeatureLayer::from_line_strings([line.clone()]);
        let grid = rasterize_lines(&layer, c).unwrap();
        let tf = *grid.transform();
        // Every vertex lies in a set cell.
        for &p in line.vertices() {
            let (col, row) = tf.world_to_cell(p);
            let col = col.min(grid.n_cols() as i64 - 1) as usize;
            let row = row.min(grid.n_rows() as i64 - 1) as usize;
            prop_assert!(grid.is_set(col, row), "vertex {:?} not in a set cell", p);
        }
        // Every set cell center is within half a cell diagonal of the line.
        let reach = c * std::f64::consts::SQRT_2 / 2.0 * (1.0 + 1e-9);
        for (col, row) in grid.set_cells() {
            let d = polyline_distance(grid.cell_center(col, row), line.vertices());
            prop_assert!(d <= reach, "cell ({}, {}) is {} from the line", col, row, d);
        }
    }

    #[test]
    fn zonal_count_is_additive(verts in coords(2..6), c in 1.0..20.0f64, split in 0.0..1.0f64) {
        let pts: Vec<Point2> = verts.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let Ok(line) = LineString::new(pts) else { return Ok(()); };
        let grid = rasterize_lines(&FeatureLayer::from_line_strings([line]), c).unwrap();
        let e = grid.extent();
        // Split on a cell edge so no center lies on the shared boundary.
        let m = (split * grid.n_cols() as f64).floor();
        let x = e.min_x + m * c;
        let whole = Polygon::rectangle(e.min_x, e.min_y, e.max_x, e.max_y).unwrap();
        let total = zonal_cell_count(&grid, &whole);
        prop_assert_eq!(total, grid.set_count());
        if m > 0.0 && x < e.max_x {
            let left = Polygon::rectangle(e.min_x, e.min_y, x, e.max_y).unwrap();
            let right = Polygon::rectangle(x, e.min_y, e.max_x, e.max_y).unwrap();
            prop_assert_eq!(zonal_cell_count(&grid, &left) + zonal_cell_count(&grid, &right), total);
        }
    }

    #[test]
    fn linear_preserves_order_and_sums(xs in prop::collection::vec(-1e6..1e6f64, 2..60), a in -100i32..100, span in 1i32..100) {
        let (a, b) = (a as f64, (a + span) as f64);
        let input: Vec<Option<f64>> = xs.iter().map(|&x| Some(x)).collect();
        let reg = linear(&input, &LinearScale::new(a, b, ScaleOrder::Regular).unwrap()).unwrap();
        let inv = linear(&input, &LinearScale::new(a, b, ScaleOrder::Inverse).unwrap()).unwrap();
        let r: Vec<f64> = reg.values.iter().map(|v| v.unwrap()).collect();
        let s: Vec<f64> = inv.values.iter().map(|v| v.unwrap()).collect();
        for i in 0..xs.len() {
            prop_assert_eq!(r[i] + s[i], a + b);
            prop_assert!(r[i] >= a && r[i] <= b);
            for j in 0..xs.len() {
                if xs[i] < xs[j] {
                    prop_assert!(r[i] <= r[j]);
                    prop_assert!(s[i] >= s[j]);
                }
            }
        }
        if !reg.constant_input {
            prop_assert!((pearson(&xs, &r) - 1.0).abs() <= 1e-12);
            prop_assert!((pearson(&xs, &s) + 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn natural_breaks_is_optimal(xs in prop::collection::vec(0i32..40, 2..=15), k in 2usize..=4) {
        let xs: Vec<f64> = xs.into_iter().map(|v| v as f64 * 0.25).collect();
        let mut distinct = xs.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < k {
            prop_assert!(natural_breaks(&xs, k).is_err());
            return Ok(());
        }
        let cb = natural_breaks(&xs, k).unwrap();
        let best = enumerate_min_sdcm(&xs, k);
        prop_assert!((cb.sdcm - best).abs() <= 1e-9 * cb.sdam.max(1.0), "dp {} vs enumeration {}", cb.sdcm, best);
        // The reported SDCM is the SDCM of the classes the breaks induce.
        let mut classes: Vec<Vec<f64>> = vec![Vec::new(); k];
        for &x in &xs {
            classes[cb.class_of(x)].push(x);
        }
        prop_assert!(classes.iter().all(|c| !c.is_empty()));
        let refs: Vec<&[f64]> = classes.iter().map(Vec::as_slice).collect();
        prop_assert!((sdcm_of(&refs) - cb.sdcm).abs() <= 1e-9 * cb.sdam.max(1.0));
        prop_assert!(cb.breaks.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ahp_recovers_consistent_weights(raw in prop::collection::vec(0.1..10.0f64, 3..=9)) {
        let s: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let pv = ahp_weights(&ComparisonMatrix::from_weights(&w).unwrap()).unwrap();
        for (got, want) in pv.weights.iter().zip(&w) {
            prop_assert!((got - want).abs() <= 1e-6);
        }
        prop_assert!(pv.cr < 1e-9);
    }

    #[test]
    fn ahp_is_permutation_equivariant(upper in prop::collection::vec(0usize..17, 10), perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
        let upper: Vec<f64> = upper.iter().map(|&i| landsuit::aggregate::SAATY_SCALE[i]).collect();
        let m = ComparisonMatrix::from_upper(5, &upper).unwrap();
        let pv = ahp_weights(&m).unwrap();
        let pp = ahp_weights(&m.permuted(&perm).unwrap()).unwrap();
        for (i, &p) in perm.iter().enumerate() {
            prop_assert!((pp.weights[i] - pv.weights[p]).abs() <= 1e-9);
        }
        prop_assert!((pp.lambda_max - pv.lambda_max).abs() <= 1e-9);
        prop_assert!(pv.lambda_max >= 5.0);
        let sum: f64 = pv.weights.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn weighted_sum_is_linear_on_dyadics(
        x in prop::collection::vec(prop::collection::vec(-256i32..256, 12), 3),
        y in prop::collection::vec(prop::collection::vec(-256i32..256, 12), 3),
        w in (0u32..=8).prop_flat_map(|a| (Just(a), 0..=8 - a)),
    ) {
        let weights = [w.0 as f64 / 8.0, w.1 as f64 / 8.0, (8 - w.0 - w.1) as f64 / 8.0];
        let col = |v: &Vec<i32>| v.iter().map(|&i| Some(i as f64 / 4.0)).collect::<Vec<_>>();
        let xs: Vec<Vec<Option<f64>>> = x.iter().map(col).collect();
        let ys: Vec<Vec<Option<f64>>> = y.iter().map(col).collect();
        let sums: Vec<Vec<Option<f64>>> = xs
            .iter()
            .zip(&ys)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| Some(p.unwrap() + q.unwrap())).collect())
            .collect();
        let run = |cols: &Vec<Vec<Option<f64>>>| {
            let refs: Vec<&[Option<f64>]> = cols.iter().map(Vec::as_slice).collect();
            weighted_sum(&refs, &weights, false).unwrap()
        };
        let (sx, sy, ss) = (run(&xs), run(&ys), run(&sums));
        for i in 0..12 {
            prop_assert_eq!(ss[i].unwrap(), sx[i].unwrap() + sy[i].unwrap());
        }
    }

    #[test]
    fn reclassify_with_idempotent_map_is_idempotent(images in prop::collection::vec(0usize..4, 10), values in prop::collection::vec(0usize..10, 1..50)) {
        // Categories 0..10 map into {0..4}, and each of 0..4 maps to itself.
        let entries = (0..10).map(|c| {
            let score = if c < 4 { c as f64 } else { images[c] as f64 };
            (Category::Number(c as f64), score)
        });
        let table = ReclassifyTable::categorical(entries, None).unwrap();
        let vals: Vec<Value> = values.iter().map(|&v| Value::Integer(v as i64)).collect();
        let once = reclassify(&vals, &table).unwrap();
        let again: Vec<Value> = once.iter().map(|v| Value::Number(v.unwrap())).collect();
        prop_assert_eq!(reclassify(&again, &table).unwrap(), once);
    }

    #[test]
    fn idw_stays_within_neighbor_bounds(known in coords(2..40), zs in prop::collection::vec(-50.0..50.0f64, 40), q in coords(1..10), u in 0.5..6.0f64, k in 1usize..12) {
        let pts: Vec<Point2> = known.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let zs = &zs[..pts.len()];
        let layer = point_layer(&pts, "z", zs);
        let queries = FeatureLayer::from_points(q.iter().map(|&(x, y)| Point2::new(x, y)));
        let cfg = IdwConfig { power: u, neighbors: Neighbors::Count(k), search_radius: None };
        let est = idw_estimate(&queries, &layer, "z", &cfg, &RepresentativePoint::Centroid).unwrap();
        for (v, &(x, y)) in est.values.iter().zip(&q) {
            let p = Point2::new(x, y);
            let used: Vec<f64> = scan_sorted(p, &pts, Metric::Euclidean).into_iter().take(k).map(|(i, _)| zs[i]).collect();
            let (lo, hi) = used.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &z| (l.min(z), h.max(z)));
            let v = v.unwrap();
            prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
        }
    }

    #[test]
    fn idw_large_power_approaches_nearest(known in coords(2..30), zs in prop::collection::vec(-50.0..50.0f64, 30), q in (-100.0..100.0f64, -100.0..100.0f64)) {
        let pts: Vec<Point2> = known.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let zs = &zs[..pts.len()];
        let p = Point2::new(q.0, q.1);
        let sorted = scan_sorted(p, &pts, Metric::Euclidean);
        let layer = point_layer(&pts, "z", zs);
        let cfg = IdwConfig { power: 32.0, neighbors: Neighbors::All, search_radius: None };
        let est = idw_estimate(&FeatureLayer::from_points([p]), &layer, "z", &cfg, &RepresentativePoint::Centroid).unwrap();
        let nearest = zs[sorted[0].0];
        let spread = zs.iter().fold(0.0f64, |m, z| m.max((z - nearest).abs()));
        // Every other weight is at most (d0 / d1)^32 of the nearest one.
        let ratio = if sorted.len() < 2 || sorted[1].1 == 0.0 { 0.0 } else { sorted[0].1 / sorted[1].1 };
        let bound = spread * (pts.len() as f64) * ratio.powi(32) + 1e-9;
        prop_assert!((est.values[0].unwrap() - nearest).abs() <= bound);
    }

    #[test]
    fn idw_cv_is_reproducible(known in coords(3..40), zs in prop::collection::vec(-50.0..50.0f64, 40)) {
        let pts: Vec<Point2> = known.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let layer = point_layer(&pts, "z", &zs[..pts.len()]);
        let base = IdwConfig::default();
        let candidates = landsuit::ops::DEFAULT_CANDIDATE_POWERS;
        let a = idw_cv(&layer, "z", &candidates, &base);
        let b = idw_cv(&layer, "z", &candidates, &base);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "runs disagree"),
        }
    }
}

#[test]
fn weighted_sum_propagates_nodata() {
    let a = [Some(1.0), None, Some(3.0)];
    let b = [Some(2.0), Some(2.0), None];
    let out = weighted_sum(&[&a, &b], &[0.5, 0.5], false).unwrap();
    assert_eq!(out, vec![Some(1.5), None, None]);
    let c = Column::Number(out);
    assert_eq!(c.len(), 3);
}
