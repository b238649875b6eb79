//! Acceptance checks over the shipped models; one line per criterion.

mod sim;

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use reach_cli::plot::parse_csv;
use reach_cli::{run, PlotFormat, PlotRequest, RunConfig};
use subspace_reach::decomposition::Subspace;
use subspace_reach::linalg::{lp_optimize, mat_exp, LinearProgram, LpOutcome};
use subspace_reach::reach::{contained_in, jump_successor, match_segments, Origin};
use subspace_reach::{
    analyze, classify, decompose, parse_model, projective_of, BoxSet, DecompositionMode, Matrix, Model, ReachResult,
    Representation, StateSet, SubspaceTag, TemplateDirections, VariablePartition,
};

use sim::Simulator;

type Outcome = Result<String, String>;

const MODELS: [(&str, usize); 3] = [("thermostat", 95), ("leaking_tank", 662), ("two_tanks", 470)];
const MODES: [DecompositionMode; 4] = [
    DecompositionMode::None,
    DecompositionMode::Timed,
    DecompositionMode::Discrete,
    DecompositionMode::All,
];
const OCTAGONAL_LIMIT: usize = 10;

fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(format!("{name}.model"))
}

fn load(name: &str) -> Model {
    let text = std::fs::read_to_string(model_path(name)).expect("model file");
    parse_model(&text).expect("model parses")
}

fn analyze_as(m: &Model, mode: DecompositionMode, rep: Representation, aggregation: bool) -> ReachResult {
    let mut s = m.settings.clone();
    s.decomposition = mode;
    s.representation = rep;
    s.aggregation = aggregation;
    analyze(&m.automaton, &s, &m.unsafe_spec).expect("analysis runs")
}

fn template(dim: usize) -> TemplateDirections {
    if dim <= OCTAGONAL_LIMIT {
        TemplateDirections::octagonal(dim)
    } else {
        TemplateDirections::boxed(dim)
    }
}

fn within(limit: Duration, took: Duration) -> Result<(), String> {
    if took <= limit {
        Ok(())
    } else {
        Err(format!("took {:.2?}, limit {:.0?}", took, limit))
    }
}

/// Random boxes split along random partitions recompose exactly.
fn criterion_1() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let start = Instant::now();
    for case in 0..1000 {
        let n = rng.gen_range(1..=8);
        let lo: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|&l| l + rng.gen_range(0.0..5.0)).collect();
        let b = BoxSet::new(lo.clone(), hi.clone());
        let mut vars: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            vars.swap(i, rng.gen_range(0..=i));
        }
        let mut subspaces = Vec::new();
        let mut rest = vars.as_slice();
        while !rest.is_empty() {
            let k = rng.gen_range(1..=rest.len());
            let mut part = rest[..k].to_vec();
            part.sort_unstable();
            subspaces.push(Subspace {
                tag: SubspaceTag::Rest,
                vars: part,
            });
            rest = &rest[k..];
        }
        let p = VariablePartition { dim: n, subspaces };
        let parts = projective_of(&StateSet::Box(b), &p).map_err(|e| e.to_string())?;
        let (mut rlo, mut rhi) = (vec![f64::NAN; n], vec![f64::NAN; n]);
        for (set, sub) in parts.iter().zip(&p.subspaces) {
            let bb = set.bounding_box();
            for (k, &v) in sub.vars.iter().enumerate() {
                rlo[v] = bb.lo()[k];
                rhi[v] = bb.hi()[k];
            }
        }
        if rlo != lo || rhi != hi {
            return Err(format!("case {case}: recomposed box differs"));
        }
    }
    within(Duration::from_secs(5), start.elapsed())?;
    Ok(format!("1000 boxes recomposed exactly in {:.2?}", start.elapsed()))
}

/// The undecomposed thermostat flowpipe lies inside the fully decomposed one.
fn criterion_2() -> Outcome {
    let m = load("thermostat");
    let start = Instant::now();
    let none = analyze_as(
        &m,
        DecompositionMode::None,
        Representation::Support,
        m.settings.aggregation,
    );
    let all = analyze_as(
        &m,
        DecompositionMode::All,
        Representation::Support,
        m.settings.aggregation,
    );
    let dirs = template(m.automaton.dim());
    let mut checked = 0;
    for (i, j) in match_segments(&none, &all) {
        let j = j.ok_or_else(|| format!("segment {i} of the undecomposed run has no counterpart"))?;
        let ok = contained_in(
            &none.segments[i],
            &none.partition,
            &all.segments[j],
            &all.partition,
            dirs.directions(),
            1e-9,
        )
        .map_err(|e| e.to_string())?;
        if !ok {
            return Err(format!("segment {i} not contained in segment {j}"));
        }
        checked += 1;
    }
    within(Duration::from_secs(60), start.elapsed())?;
    Ok(format!(
        "{checked} segment pairs contained, {} template directions",
        dirs.len()
    ))
}

/// Flowpipe counts agree across modes and sit near the published counts.
fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    for (name, target) in MODELS {
        let m = load(name);
        let counts: Vec<usize> = MODES
            .iter()
            .map(|&mode| {
                let r = analyze_as(&m, mode, Representation::Box, m.settings.aggregation);
                if r.stats.truncated {
                    usize::MAX
                } else {
                    r.stats.flowpipes
                }
            })
            .collect();
        if counts.iter().any(|&c| c != counts[0]) {
            return Err(format!("{name}: counts differ across modes {counts:?}"));
        }
        let c = counts[0] as f64;
        if (c - target as f64).abs() > 0.2 * target as f64 {
            return Err(format!("{name}: {} flowpipes, expected {target} within 20%", counts[0]));
        }
        detail.push(format!("{name} {}", counts[0]));
    }
    within(Duration::from_secs(120), start.elapsed())?;
    Ok(detail.join(", "))
}

/// Segments of one location indexed by start time.
struct Cover<'a> {
    by_location: Vec<Vec<usize>>,
    result: &'a ReachResult,
}

impl<'a> Cover<'a> {
    fn new(result: &'a ReachResult, locations: usize) -> Self {
        let mut by_location = vec![Vec::new(); locations];
        for (k, s) in result.segments.iter().enumerate() {
            by_location[s.location].push(k);
        }
        for v in &mut by_location {
            v.sort_by(|&a, &b| result.segments[a].t1.total_cmp(&result.segments[b].t1));
        }
        Cover { by_location, result }
    }

    fn covers(&self, s: &sim::Sample, tau: f64) -> bool {
        let tol = 1e-9;
        let segs = &self.by_location[s.location];
        let end = segs.partition_point(|&k| self.result.segments[k].t1 <= tau + tol);
        segs[..end].iter().rev().any(|&k| {
            let seg = &self.result.segments[k];
            seg.t2 >= tau - tol
                && seg.sets.iter().zip(&self.result.partition.subspaces).all(|(set, sub)| {
                    let local: Vec<f64> = sub.vars.iter().map(|&v| s.x[v]).collect();
                    set.contains(&local, 1e-6)
                })
        })
    }
}

/// Simulated executions stay inside the computed flowpipes.
fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(4);
    let mut detail = Vec::new();
    let runs = 100;
    for (name, _) in MODELS {
        let m = load(name);
        let h = &m.automaton;
        let simulator = Simulator::new(h, m.settings.delta, m.settings.horizon);
        let mut seen = HashSet::new();
        let mut samples = Vec::new();
        for _ in 0..runs {
            let (loc, x) = simulator
                .initial_state(&mut rng)
                .ok_or_else(|| format!("{name}: no initial state"))?;
            for s in simulator.execute(&mut rng, loc, x) {
                let key = (s.location, s.step, s.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
                if seen.insert(key) {
                    samples.push(s);
                }
            }
        }
        let mut configs = vec![
            (DecompositionMode::None, Representation::Box),
            (DecompositionMode::All, Representation::Box),
        ];
        if name == "thermostat" {
            configs.push((DecompositionMode::None, Representation::Support));
            configs.push((DecompositionMode::All, Representation::Support));
        }
        for (mode, rep) in configs {
            let r = analyze_as(&m, mode, rep, m.settings.aggregation);
            if r.stats.truncated {
                return Err(format!("{name} {mode} {rep}: search truncated"));
            }
            let cover = Cover::new(&r, h.locations.len());
            for s in &samples {
                let tau = s.step as f64 * m.settings.delta;
                if !cover.covers(s, tau) {
                    return Err(format!(
                        "{name} {mode} {rep}: state at t={tau:.2} in {} not covered: {:?}",
                        h.locations[s.location].name, s.x
                    ));
                }
            }
        }
        detail.push(format!("{name} {} states", samples.len()));
    }
    within(Duration::from_secs(180), start.elapsed())?;
    Ok(format!("{runs} runs per model; {}", detail.join(", ")))
}

/// Sub-space sizes under full decomposition.
fn criterion_5() -> Outcome {
    let start = Instant::now();
    let expected = [
        ("thermostat", (5, 2, 1)),
        ("leaking_tank", (9, 2, 1)),
        ("two_tanks", (17, 3, 2)),
    ];
    let mut detail = Vec::new();
    for (name, sizes) in expected {
        let m = load(name);
        let got = classify(&m.automaton, &m.unsafe_spec, DecompositionMode::All).sizes();
        if got != sizes {
            return Err(format!("{name}: sizes {got:?}, expected {sizes:?}"));
        }
        detail.push(format!("{name} {got:?}"));
    }
    within(Duration::from_secs(1), start.elapsed())?;
    Ok(detail.join(", "))
}

/// Full decomposition at least halves the two-tank analysis time.
fn criterion_6() -> Outcome {
    let m = load("two_tanks");
    let none = analyze_as(&m, DecompositionMode::None, Representation::Support, false);
    let all = analyze_as(&m, DecompositionMode::All, Representation::Support, false);
    for (label, r) in [("none", &none), ("all", &all)] {
        if r.stats.truncated {
            return Err(format!("{label}: search truncated"));
        }
        within(Duration::from_secs(300), r.stats.wall_time).map_err(|e| format!("{label}: {e}"))?;
    }
    let (a, b) = (none.stats.wall_time.as_secs_f64(), all.stats.wall_time.as_secs_f64());
    if b > 0.5 * a {
        return Err(format!("all {b:.3}s vs none {a:.3}s"));
    }
    Ok(format!("none {a:.3}s, all {b:.3}s, ratio {:.3}", b / a))
}

/// A clock bounded by its invariant stops the rest sub-space in step.
fn criterion_7() -> Outcome {
    let src = "vars t, x;\n\
               settings { delta 0.01; horizon 1; decompose all; }\n\
               location a { flow t' = 1; flow x' = -x; inv t <= 0.05; }\n\
               init a { t = 0; x >= 1; x <= 2; }\n";
    let m = parse_model(src).map_err(|e| e.to_string())?;
    let r = analyze(&m.automaton, &m.settings, &m.unsafe_spec).map_err(|e| e.to_string())?;
    if r.partition.len() != 2 {
        return Err(format!("expected two sub-spaces, got {:?}", r.partition.sizes()));
    }
    let idx: Vec<usize> = r.segments.iter().map(|s| s.index).collect();
    if idx != (0..6).collect::<Vec<_>>() {
        return Err(format!("segment indices {idx:?}"));
    }
    if r.segments.iter().any(|s| s.sets.iter().any(|x| x.is_empty())) {
        return Err("a recorded segment has an empty sub-space set".into());
    }
    Ok("6 segments, indices 0 to 5".into())
}

fn series_exp(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=60 {
        term = term.mul(a).scale(1.0 / k as f64);
        sum = sum.add(&term);
    }
    sum
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-9 {
        return None;
    }
    let mut x = [0.0; 3];
    for (k, xk) in x.iter_mut().enumerate() {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        *xk = det(m) / d;
    }
    Some(x)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Vertices and extreme rays of a pointed 3-D polyhedron.
fn lp_oracle(rows: &[[f64; 3]], d: &[f64], obj: [f64; 3]) -> LpOutcome {
    let feas = |x: [f64; 3]| rows.iter().zip(d).all(|(r, &b)| dot3(*r, x) <= b + 1e-9);
    let m = rows.len();
    let mut best: Option<(f64, [f64; 3])> = None;
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                if let Some(x) = solve3([rows[i], rows[j], rows[k]], [d[i], d[j], d[k]]) {
                    if feas(x) && best.is_none_or(|(v, _)| dot3(obj, x) > v) {
                        best = Some((dot3(obj, x), x));
                    }
                }
            }
        }
    }
    let Some((value, point)) = best else {
        return LpOutcome::Infeasible;
    };
    for i in 0..m {
        for j in i + 1..m {
            let r = cross(rows[i], rows[j]);
            for dir in [r, [-r[0], -r[1], -r[2]]] {
                let norm = dot3(dir, dir).sqrt();
                if norm < 1e-9 {
                    continue;
                }
                let u = [dir[0] / norm, dir[1] / norm, dir[2] / norm];
                if rows.iter().all(|row| dot3(*row, u) <= 1e-12) && dot3(obj, u) > 1e-9 {
                    return LpOutcome::Unbounded;
                }
            }
        }
    }
    LpOutcome::Optimum {
        value,
        point: point.to_vec(),
    }
}

/// Matrix exponential and LP agree with independent references.
fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = rng.gen_range(1..=10);
        let raw = Matrix::from_vec(n, n, (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let a = raw.scale(rng.gen_range(0.01..5.0) / raw.inf_norm().max(1e-12));
        let e = mat_exp(&a, 1.0).map_err(|e| e.to_string())?;
        let diff = e
            .sub(&series_exp(&a))
            .as_slice()
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        if diff > 1e-10 {
            return Err(format!("exponential case {case}: deviation {diff:e}"));
        }
        worst = worst.max(diff);
    }
    let mut counts = [0usize; 3];
    for case in 0..500 {
        let m = rng.gen_range(3..=8);
        let rows: Vec<[f64; 3]> = (0..m)
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]
            })
            .collect();
        let d: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let obj = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let got = lp_optimize(&LinearProgram::new(
            Matrix::from_vec(m, 3, flat),
            d.clone(),
            obj.to_vec(),
        ));
        let want = lp_oracle(&rows, &d, obj);
        let agree = match (&got, &want) {
            (LpOutcome::Optimum { value: a, .. }, LpOutcome::Optimum { value: b, .. }) => {
                counts[0] += 1;
                (a - b).abs() <= 1e-6 * (1.0 + b.abs())
            }
            (LpOutcome::Infeasible, LpOutcome::Infeasible) => {
                counts[1] += 1;
                true
            }
            (LpOutcome::Unbounded, LpOutcome::Unbounded) => {
                counts[2] += 1;
                true
            }
            _ => false,
        };
        if !agree {
            return Err(format!("LP case {case}: solver {got:?}, oracle {want:?}"));
        }
    }
    within(Duration::from_secs(30), start.elapsed())?;
    Ok(format!(
        "exponential max deviation {worst:.1e}; LP optimum {} infeasible {} unbounded {}",
        counts[0], counts[1], counts[2]
    ))
}

/// Aggregated successors contain every per-segment successor.
fn criterion_9() -> Outcome {
    let m = load("leaking_tank");
    let mut detail = Vec::new();
    for (mode, rep) in [
        (DecompositionMode::None, Representation::Box),
        (DecompositionMode::All, Representation::Box),
        (DecompositionMode::All, Representation::Support),
    ] {
        let r = analyze_as(&m, mode, rep, true);
        let d = decompose(&m.automaton, &m.unsafe_spec, &r.partition).map_err(|e| e.to_string())?;
        let dirs: Vec<TemplateDirections> = r.partition.subspaces.iter().map(|s| template(s.vars.len())).collect();
        let (mut aggregated, mut checked) = (0, 0);
        for fp in &r.flowpipes {
            let Origin::Jump {
                parent,
                jump,
                segment: None,
            } = fp.origin
            else {
                continue;
            };
            aggregated += 1;
            let jp = &d.jumps[jump];
            let target = &d.locations[jp.target];
            for seg in r.flowpipe_segments(parent) {
                let mut succ = Vec::with_capacity(seg.sets.len());
                for k in 0..seg.sets.len() {
                    let s = jump_successor(&seg.sets[k], &jp.guard[k], &jp.reset[k], &target.invariant[k])
                        .map_err(|e| e.to_string())?;
                    succ.push(s);
                }
                if succ.iter().any(|s| s.is_empty()) {
                    continue;
                }
                for k in 0..succ.len() {
                    for l in dirs[k].directions() {
                        let a = succ[k].support(l).map_err(|e| e.to_string())?;
                        let b = fp.initial[k].support(l).map_err(|e| e.to_string())?;
                        if a > b + 1e-9 * (1.0 + a.abs().max(b.abs())) {
                            return Err(format!(
                                "{mode} {rep}: successor of segment {} escapes aggregate",
                                seg.index
                            ));
                        }
                    }
                }
                checked += 1;
            }
        }
        if aggregated == 0 || checked == 0 {
            return Err(format!("{mode} {rep}: no aggregated successors to check"));
        }
        detail.push(format!("{mode} {rep} {aggregated} aggregates/{checked} successors"));
    }
    Ok(detail.join(", "))
}

/// Area of the union of polygons, by horizontal scanlines.
fn union_area(polys: &[Vec<[f64; 2]>]) -> f64 {
    let ymin = polys.iter().flatten().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let ymax = polys.iter().flatten().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    let lines = 20_000;
    let dy = (ymax - ymin) / lines as f64;
    let mut spans_by_poly: Vec<(f64, f64, &Vec<[f64; 2]>)> = polys
        .iter()
        .map(|p| {
            let lo = p.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min);
            let hi = p.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max);
            (lo, hi, p)
        })
        .collect();
    spans_by_poly.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut area = 0.0;
    let mut spans: Vec<(f64, f64)> = Vec::new();
    for i in 0..lines {
        let y = ymin + (i as f64 + 0.5) * dy;
        spans.clear();
        for &(lo, hi, p) in &spans_by_poly {
            if lo > y {
                break;
            }
            if hi < y {
                continue;
            }
            let (mut xl, mut xr) = (f64::INFINITY, f64::NEG_INFINITY);
            for k in 0..p.len() {
                let (a, b) = (p[k], p[(k + 1) % p.len()]);
                if (a[1] - y) * (b[1] - y) <= 0.0 && a[1] != b[1] {
                    let x = a[0] + (y - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                    xl = xl.min(x);
                    xr = xr.max(x);
                }
            }
            if xl <= xr {
                spans.push((xl, xr));
            }
        }
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut cur_l, mut cur_r) = (f64::NAN, f64::NAN);
        for &(l, r) in &spans {
            if cur_r.is_nan() || l > cur_r {
                if !cur_r.is_nan() {
                    area += (cur_r - cur_l) * dy;
                }
                cur_l = l;
                cur_r = r;
            } else {
                cur_r = cur_r.max(r);
            }
        }
        if !cur_r.is_nan() {
            area += (cur_r - cur_l) * dy;
        }
    }
    area
}

fn plotted_area(mode: DecompositionMode, rep: Representation) -> Result<f64, String> {
    let out = std::env::temp_dir().join(format!("acceptance-{}-{mode}-{rep}.csv", std::process::id()));
    let mut cfg = RunConfig::new(model_path("thermostat"));
    cfg.decomposition = Some(mode);
    cfg.representation = Some(rep);
    cfg.plot = Some(PlotRequest {
        x: "T".into(),
        y: "g".into(),
        path: out.clone(),
        format: PlotFormat::Csv,
    });
    run(&cfg).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_file(&out);
    let records = parse_csv(&text).map_err(|e| e.to_string())?;
    let polys: Vec<Vec<[f64; 2]>> = records.into_iter().map(|r| r.vertices).collect();
    Ok(union_area(&polys))
}

/// Decomposition widens the thermostat's temperature-time projection by at
/// most half.
fn criterion_10() -> Outcome {
    let none = plotted_area(DecompositionMode::None, Representation::Support)?;
    let all = plotted_area(DecompositionMode::All, Representation::Support)?;
    let box_none = plotted_area(DecompositionMode::None, Representation::Box)?;
    let box_all = plotted_area(DecompositionMode::All, Representation::Box)?;
    let ratio = all / none;
    let detail = format!(
        "sf none {none:.4}, sf all {all:.4}, ratio {ratio:.3}; box ratio {:.3} (informational)",
        box_all / box_none
    );
    if (1.0..=1.5).contains(&ratio) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let checks: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = 0;
    for (n, check) in checks {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        match outcome {
            Ok(d) => println!("criterion {n}: PASS ({took:.2?}) {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n}: FAIL ({took:.2?}) {d}");
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
