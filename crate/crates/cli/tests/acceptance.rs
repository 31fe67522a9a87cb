//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p amodal-cli --test acceptance`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use amodal_core::eval::{
    average_recall, depth_order_accuracy, edge_benchmark, region_consistency, thin, ConsistencyMode, DepthRankOrderer,
    EdgeBenchConfig, EdgeBenchImage, GtSegment, Negated, Orderer, SoftMap, Stratum, MAX_PROPOSALS,
};
use amodal_core::stats::{build_overlap_dag, connected_components, depth_layers, OverlapDag};
use amodal_core::synth::{GenConfig, GeneratedScene, OrderMode, REFERENCE_STRATA};
use amodal_core::{
    generate_corpus, render_scene, render_scene_reference, shape_convexity, shape_simplicity, AreaOrderer, MaskGrid,
    Point, Polygon, Region, Scene, SceneRender, YAxisOrderer, YKey,
};

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

struct Corpora {
    varied: Vec<GeneratedScene>,
    strata: Vec<GeneratedScene>,
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
    Polygon::from_coords(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1)]).unwrap()
}

fn regular(n: usize, r: f64, cx: f64, cy: f64) -> Polygon {
    Polygon::new(
        (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                Point::new(cx + r * t.cos(), cy + r * t.sin())
            })
            .collect(),
    )
    .unwrap()
}

fn varied_corpus() -> Vec<GeneratedScene> {
    // 200 scenes over a spread of image sizes, region counts and order modes
    let mut out = Vec::with_capacity(200);
    for batch in 0..10u64 {
        let w = 64 + 16 * (batch as u32 % 5);
        let h = 48 + 16 * (batch as u32 % 6);
        let side = w.min(h) as f64;
        let cfg = GenConfig {
            seed: 1000 + batch,
            width: w,
            height: h,
            regions: (1, 10),
            size: (side * 0.08, side * 0.3),
            order: [OrderMode::Free, OrderMode::SmallerInFront, OrderMode::LargerInFront][batch as usize % 3],
            ..GenConfig::default()
        };
        out.extend(generate_corpus(&cfg, 20).expect("varied corpus generates"));
    }
    out
}

fn strata_corpus() -> Vec<GeneratedScene> {
    let cfg = GenConfig { seed: 2024, strata: Some(REFERENCE_STRATA), ..GenConfig::default() };
    generate_corpus(&cfg, 1000).expect("strata corpus generates")
}

// 1
fn renderer_equivalence(c: &Corpora) -> Outcome {
    let start = Instant::now();
    for (i, g) in c.varied.iter().enumerate() {
        ensure!(
            g.scene.regions.len() <= 10 && g.scene.width <= 128 && g.scene.height <= 128,
            "scene {i} out of bounds"
        );
        let fast = render_scene(&g.scene).map_err(|e| e.to_string())?;
        let slow = render_scene_reference(&g.scene).map_err(|e| e.to_string())?;
        ensure!(fast == slow, "scene {i}: optimized render differs from per-pixel oracle");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed <= Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{} scenes bit-identical in {:.2}s", c.varied.len(), elapsed.as_secs_f64()))
}

// 2
fn shape_metrics() -> Outcome {
    let circle = regular(256, 50.0, 0.0, 0.0);
    let s = shape_simplicity(&circle).unwrap();
    let cv = shape_convexity(&circle).unwrap();
    ensure!((s - 1.0).abs() <= 1e-3, "256-gon simplicity {s}");
    ensure!((cv - 1.0).abs() <= 1e-9, "256-gon convexity {cv}");
    let square = rect(0.0, 0.0, 7.0, 7.0);
    let sq = shape_simplicity(&square).unwrap();
    let want = std::f64::consts::PI.sqrt() / 2.0;
    ensure!((sq - want).abs() <= 1e-9, "square simplicity {sq} vs {want}");

    let mut convex = vec![
        square,
        rect(1.5, 2.0, 40.0, 3.0),
        Polygon::from_coords(&[(0.0, 0.0), (10.0, 0.0), (3.0, 8.0)]).unwrap(),
        regular(5, 10.0, 3.0, 4.0),
        regular(37, 2.5, -1.0, 9.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let n = rng.gen_range(3..12);
        let pts: Vec<Point> =
            (0..n).map(|_| Point::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0))).collect();
        if let Ok(hull) = amodal_core::convex_hull(&Polygon::new(pts).unwrap()) {
            convex.push(hull);
        }
    }
    for (i, p) in convex.iter().enumerate() {
        let v = shape_convexity(p).unwrap();
        ensure!((v - 1.0).abs() <= 1e-9, "convex fixture {i} has convexity {v}");
    }
    Ok(format!("circle s={s:.6} c={cv:.12}, square s={sq:.12}, {} convex fixtures", convex.len()))
}

// 3
fn partition(c: &Corpora) -> Outcome {
    let mut n = 0;
    for g in c.varied.iter().chain(&c.strata) {
        let r = &g.render;
        let mut seen = MaskGrid::new(r.width, r.height);
        let mut sum = 0;
        for l in &r.regions {
            ensure!(!seen.intersects(&l.visible), "overlapping visible masks in seed {}", g.truth.seed);
            seen.union_with(&l.visible);
            sum += l.visible.count();
        }
        ensure!(sum == r.amodal_union().count(), "visible sum != amodal union for seed {}", g.truth.seed);
        n += 1;
    }
    Ok(format!("{n} scenes"))
}

fn strip(w: u32, c0: u32, c1: u32) -> MaskGrid {
    MaskGrid::from_fn(w, 1, |_, c| c >= c0 && c < c1)
}

// 4
fn average_recall_checks() -> Outcome {
    let masks: Vec<MaskGrid> = (0..4).map(|i| strip(40, i * 10, i * 10 + 7)).collect();
    let gts = BTreeMap::from([(
        "img".to_string(),
        masks.iter().zip([0.0, 0.1, 0.25, 0.9]).map(|(m, q)| GtSegment { mask: m.clone(), occlusion: q }).collect(),
    )]);
    let perfect = average_recall(&BTreeMap::from([("img".to_string(), masks.clone())]), &gts, MAX_PROPOSALS).unwrap();
    ensure!(perfect.ar_all == 1.0, "proposals = gt gives AR {}", perfect.ar_all);

    let gt = BTreeMap::from([("x".to_string(), vec![GtSegment { mask: strip(30, 0, 25), occlusion: 0.25 }])]);
    let single =
        average_recall(&BTreeMap::from([("x".to_string(), vec![strip(30, 0, 18)])]), &gt, MAX_PROPOSALS).unwrap();
    ensure!(single.ar_all == 0.5, "IoU 0.72 gives AR {}", single.ar_all);
    ensure!(Stratum::of(0.25) == Stratum::Partial, "q = 0.25 not partial");
    ensure!(single.counts.partial == 1 && single.ar_partial == Some(0.5), "q = 0.25 segment not scored as partial");

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for corpus in 0..50 {
        let mut gts = BTreeMap::new();
        let mut props = BTreeMap::new();
        for img in 0..rng.gen_range(1..4) {
            let (w, h) = (rng.gen_range(8..24), rng.gen_range(8..24));
            let rmask = |rng: &mut ChaCha8Rng| {
                let (r0, c0) = (rng.gen_range(0..h), rng.gen_range(0..w));
                let (r1, c1) = (rng.gen_range(r0..h), rng.gen_range(c0..w));
                MaskGrid::from_fn(w, h, |r, c| (r0..=r1).contains(&r) && (c0..=c1).contains(&c))
            };
            let g: Vec<GtSegment> = (0..rng.gen_range(1..5))
                .map(|_| GtSegment { mask: rmask(&mut rng), occlusion: rng.gen_range(0.0..1.0) })
                .collect();
            let p: Vec<MaskGrid> = (0..rng.gen_range(0..12)).map(|_| rmask(&mut rng)).collect();
            gts.insert(format!("i{img}"), g);
            props.insert(format!("i{img}"), p);
        }
        let longest = props.values().map(Vec::len).max().unwrap_or(0);
        let mut prev = -1.0;
        for k in 0..=longest {
            let ar = average_recall(&props, &gts, k).unwrap().ar_all;
            ensure!(ar >= prev, "corpus {corpus}: AR drops from {prev} to {ar} at k = {k}");
            prev = ar;
        }
    }
    Ok("AR=1, AR(0.72)=0.5, q=0.25 partial, monotone on 50 corpora".into())
}

// 5
fn consistency() -> Outcome {
    let base = Scene::new(
        60,
        40,
        vec![
            Region::new(1, "a", rect(2.0, 2.0, 20.0, 20.0)),
            Region::new(2, "b", rect(15.0, 10.0, 40.0, 35.0)),
            Region::new(3, "c", rect(0.0, 0.0, 60.0, 40.0)),
        ],
    );
    let same = vec![base.clone(), base.clone(), base.clone(), base.clone()];
    for mode in [ConsistencyMode::Amodal, ConsistencyMode::Modal] {
        let scores = region_consistency(&same, mode).unwrap();
        ensure!(scores.len() == 12, "expected n(n-1) = 12 scores, got {}", scores.len());
        ensure!(scores.iter().all(|s| s.prf.f == 1.0), "identical annotations below F = 1");
    }

    let two = Scene::new(
        60,
        40,
        vec![Region::new(1, "a", rect(2.0, 2.0, 20.0, 20.0)), Region::new(2, "b", rect(30.0, 5.0, 55.0, 35.0))],
    );
    let one = Scene::new(60, 40, vec![Region::new(7, "a", rect(2.0, 2.0, 20.0, 20.0))]);
    let scores = region_consistency(&[two, one], ConsistencyMode::Amodal).unwrap();
    ensure!(
        scores.iter().all(|s| s.prf.f == 2.0 / 3.0),
        "2-region/1-match F = {:?}",
        scores.iter().map(|s| s.prf.f).collect::<Vec<_>>()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random_scene = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(1..6);
        let regions = (0..n)
            .map(|k| {
                let (x0, y0) = (rng.gen_range(0.0..40.0), rng.gen_range(0.0..25.0));
                let (x1, y1) = (rng.gen_range(x0 + 4.0..60.0), rng.gen_range(y0 + 4.0..40.0));
                Region::new(k + 1, "r", rect(x0, y0, x1, y1))
            })
            .collect();
        Scene::new(60, 40, regions)
    };
    for pair in 0..100 {
        let a = random_scene(&mut rng);
        let b = random_scene(&mut rng);
        let mode = if pair % 2 == 0 { ConsistencyMode::Amodal } else { ConsistencyMode::Modal };
        let s = region_consistency(&[a, b], mode).unwrap();
        let (ab, ba) = (s.iter().find(|p| p.gt == 0).unwrap(), s.iter().find(|p| p.gt == 1).unwrap());
        ensure!(ab.prf.precision == ba.prf.recall && ab.prf.recall == ba.prf.precision, "duality fails on pair {pair}");
    }
    Ok("identical F=1, fixture F=2/3, duality on 100 pairs".into())
}

fn exhaustive_longest_path(dag: &OverlapDag, comp: &[u64]) -> usize {
    let succ: HashMap<u64, Vec<u64>> =
        comp.iter().map(|&n| (n, dag.edges.iter().filter(|e| e.0 == n).map(|e| e.1).collect())).collect();
    fn walk(n: u64, succ: &HashMap<u64, Vec<u64>>) -> usize {
        1 + succ[&n].iter().map(|&m| walk(m, succ)).max().unwrap_or(0)
    }
    comp.iter().map(|&n| walk(n, &succ)).max().unwrap_or(0)
}

fn layers_of(render: &SceneRender) -> Vec<usize> {
    let dag = build_overlap_dag(render);
    connected_components(&dag).iter().map(|c| depth_layers(&dag, c)).collect()
}

// 6
fn dag_layering() -> Outcome {
    for k in 1..=10u64 {
        // concentric squares, smallest in front: every pair overlaps
        let regions = (0..k)
            .map(|i| {
                let r = 4.0 + 4.0 * i as f64;
                Region::new(i + 1, format!("s{i}"), rect(50.0 - r, 50.0 - r, 50.0 + r, 50.0 + r))
            })
            .collect();
        let render = render_scene(&Scene::new(100, 100, regions)).unwrap();
        let layers = layers_of(&render);
        ensure!(layers == vec![k as usize], "{k}-stack gives {layers:?}");
    }
    for k in 1..=8u64 {
        let mut regions: Vec<Region> = (0..k)
            .map(|i| Region::new(i + 1, "obj", rect(2.0 + 12.0 * i as f64, 10.0, 10.0 + 12.0 * i as f64, 30.0)))
            .collect();
        regions.push(Region::new(99, "background", rect(0.0, 0.0, 100.0, 40.0)));
        let render = render_scene(&Scene::new(100, 40, regions)).unwrap();
        let layers = layers_of(&render);
        ensure!(layers == vec![2], "{k} objects over background give {layers:?}");
    }
    let mut checked = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=12u64);
        let p = rng.gen_range(0.05..0.6);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(p) {
                    edges.push((a * 3 + 7, b * 3 + 7));
                }
            }
        }
        let dag = OverlapDag::from_edges((0..n).map(|a| a * 3 + 7).collect(), edges);
        for comp in connected_components(&dag) {
            let got = depth_layers(&dag, &comp);
            let want = exhaustive_longest_path(&dag, &comp);
            ensure!(got == want, "seed {seed}: layers {got} vs exhaustive {want}");
            checked += 1;
        }
    }
    Ok(format!("stacks 1..10, background=2, {checked} random components"))
}

fn order_eval(corpus: &[GeneratedScene], orderer: &dyn Orderer) -> (f64, usize) {
    let mut credit = 0.0;
    let mut n = 0;
    for g in corpus {
        let preds: Vec<(u64, MaskGrid)> = g.render.regions.iter().map(|r| (r.id, r.amodal.clone())).collect();
        let r = depth_order_accuracy(&preds, orderer, &g.render).unwrap();
        if let Some(a) = r.accuracy {
            credit += a * r.evaluated_pairs as f64;
            n += r.evaluated_pairs;
        }
    }
    (if n == 0 { f64::NAN } else { credit / n as f64 }, n)
}

// 7
fn depth_order(c: &Corpora) -> Outcome {
    let make = |seed, order| generate_corpus(&GenConfig { seed, order, ..GenConfig::default() }, 60).unwrap();
    let smaller = make(71, OrderMode::SmallerInFront);
    let larger = make(72, OrderMode::LargerInFront);
    let free = make(73, OrderMode::Free);
    let corpora: [(&str, &[GeneratedScene]); 5] = [
        ("free", &free),
        ("smaller-in-front", &smaller),
        ("larger-in-front", &larger),
        ("strata", &c.strata[..200]),
        ("varied", &c.varied),
    ];
    let mut lines = Vec::new();
    for (name, corpus) in corpora {
        let oracle_rank =
            |g: &GeneratedScene| g.scene.regions.iter().enumerate().map(|(i, r)| (r.id, i)).collect::<HashMap<_, _>>();
        let mut oracle_acc = (0.0, 0);
        let mut negated_acc = (0.0, 0);
        for g in corpus {
            let o = DepthRankOrderer::new(oracle_rank(g));
            let (a, n) = order_eval(std::slice::from_ref(g), &o);
            let (b, _) = order_eval(std::slice::from_ref(g), &Negated(&o));
            if n > 0 {
                ensure!(a == 1.0 && b == 0.0, "{name}: oracle {a}, negated {b} on seed {}", g.truth.seed);
                oracle_acc = (oracle_acc.0 + a * n as f64, oracle_acc.1 + n);
                negated_acc = (negated_acc.0 + b * n as f64, negated_acc.1 + n);
            }
        }
        let heuristics: [(&str, Box<dyn Orderer>); 3] = [
            ("area", Box::new(AreaOrderer)),
            ("yaxis", Box::new(YAxisOrderer(YKey::TopRow))),
            ("yaxis-centroid", Box::new(YAxisOrderer(YKey::CentroidRow))),
        ];
        for (hname, h) in &heuristics {
            let (a, _) = order_eval(corpus, h.as_ref());
            let (b, _) = order_eval(corpus, &Negated(h.as_ref()));
            ensure!((a + b - 1.0).abs() < 1e-12, "{name}/{hname}: {a} + {b} != 1");
            if *hname == "area" {
                lines.push(format!("{name}: area {a:.3}"));
                if name == "smaller-in-front" {
                    ensure!(a == 1.0, "area heuristic scores {a} on smaller-in-front");
                }
                if name == "larger-in-front" {
                    ensure!(a == 0.0, "area heuristic scores {a} on larger-in-front");
                }
            }
        }
    }
    Ok(format!("oracle 1 / negated 0 everywhere; {}", lines.join(", ")))
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Kuhn's augmenting-path matching between edge pixel lists.
fn kuhn(pred: &[(i64, i64)], gt: &[(i64, i64)], tol: f64) -> usize {
    let adj: Vec<Vec<usize>> = pred
        .iter()
        .map(|&(r, c)| {
            (0..gt.len())
                .filter(|&j| {
                    let (dr, dc) = ((gt[j].0 - r) as f64, (gt[j].1 - c) as f64);
                    (dr * dr + dc * dc).sqrt() <= tol
                })
                .collect()
        })
        .collect();
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                if owner[v].is_none_or(|w| augment(w, adj, seen, owner)) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; gt.len()];
    (0..pred.len()).filter(|&u| augment(u, &adj, &mut vec![false; gt.len()], &mut owner)).count()
}

fn pixels(m: &MaskGrid) -> Vec<(i64, i64)> {
    m.iter_set().map(|(r, c)| (r as i64, c as i64)).collect()
}

/// Independent sweep: (ODS, AP, R50).
fn sweep_oracle(images: &[EdgeBenchImage], k: usize, tol: Option<f64>) -> (f64, f64, f64) {
    let mut points = Vec::new();
    for i in 1..=k {
        let t = i as f64 / (k + 1) as f64;
        let (mut matched, mut np, mut ng) = (0, 0, 0);
        for im in images {
            let mut gt = MaskGrid::new(im.prediction.width(), im.prediction.height());
            im.ground_truth.iter().for_each(|g| gt.union_with(g));
            assert_eq!(thin(&gt), gt, "fixture ground truth must be thin");
            let bin = MaskGrid::from_fn(gt.width(), gt.height(), |r, c| im.prediction.get(r, c) >= t);
            assert_eq!(thin(&bin), bin, "fixture prediction must stay thin");
            let tau = tol.unwrap_or_else(|| (0.0075 * f64::from(gt.width()).hypot(f64::from(gt.height()))).ceil());
            let (p, g) = (pixels(&bin), pixels(&gt));
            matched += kuhn(&p, &g, tau);
            np += p.len();
            ng += g.len();
        }
        let (pr, rc) = (ratio(matched, np), ratio(matched, ng));
        let f = if pr + rc > 0.0 { 2.0 * pr * rc / (pr + rc) } else { 0.0 };
        points.push((pr, rc, f));
    }
    let ods = points.iter().map(|p| p.2).fold(0.0, f64::max);
    let r50 = points.iter().filter(|p| p.0 >= 0.5).map(|p| p.1).fold(0.0, f64::max);
    let mut recalls: Vec<f64> = points.iter().map(|p| p.1).collect();
    recalls.sort_by(f64::total_cmp);
    recalls.dedup();
    let mut ap = 0.0;
    let mut prev = 0.0;
    for r in recalls {
        let envelope = points.iter().filter(|p| p.1 >= r).map(|p| p.0).fold(0.0, f64::max);
        ap += (r - prev) * envelope;
        prev = r;
    }
    (ods, ap, r50)
}

/// Horizontal runs on every third row stay thin under any thresholding.
fn run_fixture(rng: &mut ChaCha8Rng, w: u32, h: u32, soft: bool) -> Vec<f64> {
    let mut v = vec![0.0; (w * h) as usize];
    for r in (0..h).step_by(3) {
        for _ in 0..rng.gen_range(0..3) {
            let c0 = rng.gen_range(0..w);
            let c1 = rng.gen_range(c0..w.min(c0 + 10));
            for c in c0..=c1 {
                v[(r * w + c) as usize] = if soft {
                    // mix of values on and between the threshold grid
                    if rng.gen_bool(0.5) {
                        rng.gen_range(1..=100) as f64 / 100.0
                    } else {
                        rng.gen_range(0.0..=1.0)
                    }
                } else {
                    1.0
                };
            }
        }
    }
    v
}

// 8
fn edge_benchmark_checks() -> Outcome {
    let outline = MaskGrid::from_fn(32, 32, |r, c| {
        (4..28).contains(&r) && (4..28).contains(&c) && (r == 4 || r == 27 || c == 4 || c == 27)
    });
    let perfect = EdgeBenchImage { prediction: SoftMap::from_mask(&outline, 1.0), ground_truth: vec![outline.clone()] };
    let r = edge_benchmark(&[perfect], &EdgeBenchConfig::default()).unwrap();
    ensure!(r.ods == 1.0 && r.ap == 1.0 && r.r50 == 1.0, "perfect detector: ods {} ap {} r50 {}", r.ods, r.ap, r.r50);

    for (w, tau) in [(32u32, None), (64, Some(3.0)), (48, Some(1.5))] {
        let t = tau.unwrap_or_else(|| amodal_core::eval::default_tolerance(w, w));
        let shift = (2.0 * t).ceil() as u32;
        let spacing = 3 * shift + 2;
        let gt = MaskGrid::from_fn(w, w, |r, c| r % spacing == 1 && c > 2 && c + 3 < w);
        let shifted = gt.shifted(shift as i64, 0);
        let im = EdgeBenchImage { prediction: SoftMap::from_mask(&shifted, 1.0), ground_truth: vec![gt] };
        let r = edge_benchmark(&[im], &EdgeBenchConfig { thresholds: 99, tolerance: tau }).unwrap();
        ensure!(r.curve.iter().all(|p| p.f == 0.0), "shift by 2τ (τ = {t}) leaves F > 0");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut fixtures = 0;
    for round in 0..40 {
        let n = rng.gen_range(1..4);
        let images: Vec<EdgeBenchImage> = (0..n)
            .map(|_| {
                let (w, h) = (rng.gen_range(4..=32), rng.gen_range(4..=32));
                let pred = SoftMap::new(w, h, run_fixture(&mut rng, w, h, true)).unwrap();
                let gt = (0..rng.gen_range(1..3))
                    .map(|_| SoftMap::new(w, h, run_fixture(&mut rng, w, h, false)).unwrap().binarize(0.5))
                    .collect();
                EdgeBenchImage { prediction: pred, ground_truth: gt }
            })
            .collect();
        let tol = [None, Some(0.0), Some(1.0), Some(1.5), Some(2.0), Some(3.0)][round % 6];
        let k = [99, 9, 24][round % 3];
        let r = edge_benchmark(&images, &EdgeBenchConfig { thresholds: k, tolerance: tol }).unwrap();
        let (ods, ap, r50) = sweep_oracle(&images, k, tol);
        ensure!(
            (r.ods - ods).abs() <= 1e-9 && (r.ap - ap).abs() <= 1e-9 && (r.r50 - r50).abs() <= 1e-9,
            "round {round}: ({}, {}, {}) vs oracle ({ods}, {ap}, {r50})",
            r.ods,
            r.ap,
            r.r50
        );
        fixtures += images.len();
    }
    Ok(format!("perfect = 1, shifted F = 0, {fixtures} fixtures match the sweep oracle"))
}

// 9
fn strata_targets(c: &Corpora) -> Outcome {
    let mut counts = [0usize; 3];
    for g in &c.strata {
        for r in &g.render.regions {
            counts[Stratum::of(r.occlusion).index()] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    let share: Vec<f64> = counts.iter().map(|&n| n as f64 / total as f64).collect();
    for (k, (&got, &want)) in share.iter().zip(REFERENCE_STRATA.iter()).enumerate() {
        ensure!((got - want).abs() <= 0.03, "stratum {k}: {got:.4} vs target {want}");
    }
    Ok(format!(
        "{} scenes, {total} regions: none {:.4}, partial {:.4}, heavy {:.4}",
        c.strata.len(),
        share[0],
        share[1],
        share[2]
    ))
}

fn run_cli(args: &[String], threads: &str, cwd: &Path) -> (i32, Vec<u8>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_amodal"))
        .args(args)
        .current_dir(cwd)
        .env("AMODAL_THREADS", threads)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout, out.stderr)
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

// 10
fn cli_determinism() -> Outcome {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = work.path();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<String>>();

    // shared inputs
    let (code, _, err) =
        run_cli(&s(&["synth", "--seed", "7", "--count", "12", "--out-dir", "corpus", "--baselines"]), "2", root);
    ensure!(code == 0, "synth failed: {}", String::from_utf8_lossy(&err));
    let scenes: Vec<String> = (0..12).map(|i| format!("corpus/scene-{i:04}.json")).collect();
    let mut edge_images = Vec::new();
    for i in 0..3 {
        let g = render_scene(&amodal_core::io::parse_scene(&std::fs::read(root.join(&scenes[i])).unwrap()).unwrap())
            .unwrap();
        let soft = SoftMap::new(
            g.width,
            g.height,
            (0..g.height)
                .flat_map(|r| (0..g.width).map(move |c| (r, c)))
                .map(|(r, c)| {
                    if g.edges.visible.get(r, c) {
                        0.9
                    } else if g.edges.hidden.get(r, c) {
                        0.4
                    } else {
                        0.0
                    }
                })
                .collect(),
        )
        .unwrap();
        std::fs::write(root.join(format!("edge-{i}.pgm")), amodal_core::io::write_pgm(&soft)).unwrap();
        edge_images.push(serde_json::json!({
            "image": format!("e{i}"),
            "prediction": format!("edge-{i}.pgm"),
            "ground_truth": [scenes[i].clone(), scenes[(i + 1) % 3].clone()],
        }));
    }
    std::fs::write(
        root.join("edges.json"),
        serde_json::json!({"format": "amodal-edges-v1", "images": edge_images}).to_string(),
    )
    .unwrap();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corner");
    let corner: Vec<String> = {
        let mut v: Vec<String> =
            std::fs::read_dir(&fixtures).unwrap().map(|e| e.unwrap().path().display().to_string()).collect();
        v.sort();
        v
    };

    let with = |head: &[&str], tail: &[String]| {
        let mut v = s(head);
        v.extend(tail.iter().cloned());
        v
    };
    let cases: Vec<(&str, Vec<String>)> = vec![
        ("validate", with(&["validate"], &corner)),
        ("render", s(&["render", "corpus/scene-0003.json", "--pbm-dir", "OUT/pbm"])),
        ("stats", with(&["stats", "--csv-dir", "OUT/csv", "--shapes"], &scenes)),
        ("eval-ar", with(&["eval-ar", "--pred", "corpus/predictions-hull.json", "--gt"], &scenes)),
        ("eval-order", with(&["eval-order", "--orderer", "yaxis", "--gt"], &scenes)),
        (
            "eval-order(bundle)",
            with(&["eval-order", "--orderer", "bundle", "--pred", "corpus/predictions-identity.json", "--gt"], &scenes),
        ),
        ("eval-consistency", with(&["eval-consistency", "--mode", "modal"], &scenes[..4])),
        ("eval-edges", s(&["eval-edges", "--manifest", "edges.json", "--thresholds", "49"])),
        ("eval-edges(human)", s(&["eval-edges", "--manifest", "edges.json", "--human"])),
        (
            "synth",
            s(&[
                "synth",
                "--seed",
                "7",
                "--count",
                "30",
                "--strata",
                "0.39,0.31,0.30",
                "--out-dir",
                "OUT/synth",
                "--baselines",
            ]),
        ),
    ];
    let mut checked = Vec::new();
    for (name, args) in cases {
        let mut results = Vec::new();
        for (run, threads) in ["1", "4", "4"].iter().enumerate() {
            let out_dir = format!("out-{}-{run}", name.replace(['(', ')'], "_"));
            std::fs::create_dir_all(root.join(&out_dir)).unwrap();
            let args: Vec<String> = args.iter().map(|a| a.replace("OUT", &out_dir)).collect();
            let (code, stdout, stderr) = run_cli(&args, threads, root);
            let expected = if name == "validate" { 1 } else { 0 };
            ensure!(code == expected, "{name}: exit {code}: {}", String::from_utf8_lossy(&stderr));
            results.push((stdout, stderr, snapshot(&root.join(&out_dir))));
        }
        ensure!(results.windows(2).all(|w| w[0] == w[1]), "{name}: outputs differ between runs");
        checked.push(name);
    }
    Ok(format!("{} invocations x 3 runs (threads 1/4/4) byte-identical", checked.len()))
}

fn main() {
    let started = Instant::now();
    let corpora = Corpora { varied: varied_corpus(), strata: strata_corpus() };
    let criteria: Vec<(&str, Check)> = vec![
        ("renderer-oracle equivalence", Box::new(|| renderer_equivalence(&corpora))),
        ("shape metrics", Box::new(shape_metrics)),
        ("mask partition invariant", Box::new(|| partition(&corpora))),
        ("average recall", Box::new(average_recall_checks)),
        ("consistency protocol", Box::new(consistency)),
        ("DAG layering", Box::new(dag_layering)),
        ("depth-order harness", Box::new(|| depth_order(&corpora))),
        ("edge benchmark", Box::new(edge_benchmark_checks)),
        ("strata-targeted generation", Box::new(|| strata_targets(&corpora))),
        ("CLI determinism", Box::new(cli_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
