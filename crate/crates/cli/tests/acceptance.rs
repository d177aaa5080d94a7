//! Acceptance criteria 1–9, one PASS/FAIL line each. Exits non-zero if any
//! criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use relaxforge::construct::*;
use relaxforge::envelope::*;
use relaxforge::geometry::{dot, norm, sub, ConvexPolygon, HalfPlane};
use relaxforge::mesh::*;
use relaxforge::relax::*;

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_relaxforge")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(bin()).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

// 1 ──────────────────────────────────────────────────────────────────────

fn random_values(rng: &mut ChaCha8Rng, n: usize, need: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.3) { f64::INFINITY } else { rng.gen_range(0.0..10.0) }).collect();
        if v.iter().filter(|x| x.is_finite()).count() >= need {
            return v;
        }
    }
}

/// Pairs (and single samples) bracketing each node, in index coordinates.
fn line_oracle(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut best = v[i];
            for a in 0..i {
                for b in i + 1..n {
                    if v[a].is_finite() && v[b].is_finite() {
                        let t = (i - a) as f64 / (b - a) as f64;
                        best = best.min((1.0 - t) * v[a] + t * v[b]);
                    }
                }
            }
            best
        })
        .collect()
}

/// Triples (degenerate ones included) containing each node, with exact
/// integer containment tests on the index lattice.
fn plane_oracle(v: &[f64], m: usize) -> Vec<f64> {
    let pts: Vec<(i64, i64, f64)> =
        (0..v.len()).filter(|&i| v[i].is_finite()).map(|i| ((i % m) as i64, (i / m) as i64, v[i])).collect();
    let mut best: Vec<f64> = v.to_vec();
    let partial: Vec<Vec<f64>> = (0..pts.len())
        .into_par_iter()
        .map(|a| {
            let mut local = vec![f64::INFINITY; v.len()];
            let pa = pts[a];
            for b in a + 1..pts.len() {
                let pb = pts[b];
                for c in b..pts.len() {
                    let pc = pts[c];
                    let det = (pb.0 - pa.0) * (pc.1 - pa.1) - (pb.1 - pa.1) * (pc.0 - pa.0);
                    let (x0, x1) = (pa.0.min(pb.0).min(pc.0), pa.0.max(pb.0).max(pc.0));
                    let (y0, y1) = (pa.1.min(pb.1).min(pc.1), pa.1.max(pb.1).max(pc.1));
                    if det == 0 {
                        // Segment a–b (c = b) covers the collinear case.
                        if c != b {
                            continue;
                        }
                        let (dx, dy) = (pb.0 - pa.0, pb.1 - pa.1);
                        let len2 = (dx * dx + dy * dy) as f64;
                        for y in y0..=y1 {
                            for x in x0..=x1 {
                                if (x - pa.0) * dy - (y - pa.1) * dx == 0 {
                                    let t = ((x - pa.0) * dx + (y - pa.1) * dy) as f64 / len2;
                                    let val = (1.0 - t) * pa.2 + t * pb.2;
                                    let k = y as usize * m + x as usize;
                                    local[k] = local[k].min(val);
                                }
                            }
                        }
                        continue;
                    }
                    for y in y0..=y1 {
                        for x in x0..=x1 {
                            let l1 = (pb.0 - x) * (pc.1 - y) - (pb.1 - y) * (pc.0 - x);
                            let l2 = (pc.0 - x) * (pa.1 - y) - (pc.1 - y) * (pa.0 - x);
                            let l3 = (pa.0 - x) * (pb.1 - y) - (pa.1 - y) * (pb.0 - x);
                            let inside = if det > 0 { l1 >= 0 && l2 >= 0 && l3 >= 0 } else { l1 <= 0 && l2 <= 0 && l3 <= 0 };
                            if inside {
                                let d = det as f64;
                                let val = (l1 as f64 * pa.2 + l2 as f64 * pb.2 + l3 as f64 * pc.2) / d;
                                let k = y as usize * m + x as usize;
                                local[k] = local[k].min(val);
                            }
                        }
                    }
                }
            }
            local
        })
        .collect();
    for local in partial {
        for (b, l) in best.iter_mut().zip(local) {
            *b = b.min(l);
        }
    }
    best
}

fn compare(got: &[f64], want: &[f64]) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        if w.is_finite() {
            let e = (g - w).abs();
            worst = worst.max(e);
            if !(e <= 1e-9) {
                return Err(format!("node {i}: f** = {g}, oracle {w}"));
            }
        } else if g.is_finite() {
            return Err(format!("node {i}: f** = {g} but no finite combination reaches it"));
        }
    }
    Ok(worst)
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let axis: Vec<f64> = (0..41).map(|i| -1.0 + i as f64 / 20.0).collect();
    let (mut t1, mut worst1) = (Duration::ZERO, 0.0f64);
    for _ in 0..20 {
        let v = random_values(&mut rng, 41, 3);
        let f = SampledLagrangian::new(vec![axis.clone()], v.clone(), Minorant::quadratic(1.0, -1.0), None).unwrap();
        let start = Instant::now();
        let env = biconjugate(&f).map_err(|e| e.to_string())?;
        t1 += start.elapsed();
        worst1 = worst1.max(compare(env.node_values(), &line_oracle(&v))?);
    }
    ensure(t1 < Duration::from_secs(1), || format!("1D envelopes took {}", secs(t1)))?;
    let m = 21;
    let ax: Vec<f64> = (0..m).map(|i| -1.0 + i as f64 / 10.0).collect();
    let (mut t2, mut worst2) = (Duration::ZERO, 0.0f64);
    for _ in 0..20 {
        let v = random_values(&mut rng, m * m, 4);
        let f = SampledLagrangian::new(vec![ax.clone(), ax.clone()], v.clone(), Minorant::quadratic(1.0, -2.0), None).unwrap();
        let start = Instant::now();
        let env = biconjugate(&f).map_err(|e| e.to_string())?;
        t2 += start.elapsed();
        worst2 = worst2.max(compare(env.node_values(), &plane_oracle(&v, m))?);
    }
    ensure(t2 < Duration::from_secs(30), || format!("2D envelopes took {}", secs(t2)))?;
    Ok(format!("20×1D max err {worst1:.1e} in {}, 20×2D max err {worst2:.1e} in {}", secs(t1), secs(t2)))
}

// 2 ──────────────────────────────────────────────────────────────────────

fn criterion_2(dir: &Path) -> Verdict {
    let cfg = write_config(
        dir,
        "dw.toml",
        r#"
epsilon = 1e-3
schedule_steps = 3
output_dir = "dw"
[lagrangian]
builtin = "double_well_1d"
[domain]
bounds = [[0.0, 1.0]]
resolution = [16]
"#,
    );
    let start = Instant::now();
    let (code, err) = run_cli(&["run", cfg.to_str().unwrap()]);
    let took = start.elapsed();
    ensure(code == 0, || format!("exit {code}: {err}"))?;
    let summary = &csv_rows(&dir.join("dw/summary.csv"))[0];
    let (min, best, gap) = (num(&summary[0]), num(&summary[1]), num(&summary[2]));
    ensure(min <= 1e-6, || format!("min F** = {min}"))?;
    let gaps = csv_rows(&dir.join("dw/gap.csv"));
    ensure(gaps.iter().all(|r| num(&r[3]) == 0.0), || "some F(v_n) is not exactly 0".into())?;
    ensure(best == 0.0 && gap <= 1e-3, || format!("best F = {best}, gap = {gap}"))?;
    let cover = csv_rows(&dir.join("dw/cover.csv"));
    ensure(cover.iter().any(|r| r[2] == "laminate"), || "no sawtooth laminate in the cover".into())?;
    ensure(took < Duration::from_secs(5), || format!("took {}", secs(took)))?;
    Ok(format!("min F** = {min:e}, F(v) = 0 exactly, gap = {gap:e}, exit 0 in {}", secs(took)))
}

// 3 ──────────────────────────────────────────────────────────────────────

fn criterion_3() -> Verdict {
    let f = SampledLagrangian::from_builtin(Builtin::LatticeQuadratic1d).unwrap();
    let env = biconjugate(&f).unwrap();
    let mesh = Arc::new(build_box_mesh(&[(0.0, 1.0)], &[16]).unwrap());
    let mut notes = Vec::new();
    for beta in [0.25, 0.5, 0.75] {
        let start = Instant::now();
        let phi = Expression::Affine { constant: 0.0, gradient: [beta, 0.0] };
        let opts = ConstructOptions { epsilon: 1e-3, ..Default::default() };
        let r = gap_report(&mesh, &phi, &f, &env, &[1e-3], &SolverOptions::default(), &opts).map_err(|e| e.to_string())?;
        ensure((r.min_relaxed - beta).abs() <= 1e-6, || format!("β = {beta}: min F** = {}", r.min_relaxed))?;
        let a = &r.last;
        ensure(a.ledger.f_v == beta, || format!("β = {beta}: F(v) = {}", a.ledger.f_v))?;
        for lam in &a.cover.laminates {
            for (s, w) in lam.slopes.iter().zip(lam.weights) {
                let want = if *s == 0.0 { 1.0 - beta } else { beta };
                ensure((*s == 0.0 || *s == 1.0) && w == want, || format!("β = {beta}: slope {s} with weight {w}"))?;
            }
        }
        ensure(r.gap.abs() <= 1e-6, || format!("β = {beta}: gap {}", r.gap))?;
        let took = start.elapsed();
        ensure(took < Duration::from_secs(5), || format!("β = {beta} took {}", secs(took)))?;
        notes.push(format!("β={beta}: F(v)={} in {}", a.ledger.f_v, secs(took)));
    }
    Ok(notes.join(", "))
}

// 4 ──────────────────────────────────────────────────────────────────────

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let f = SampledLagrangian::from_builtin(Builtin::RadialDoubleWell2d).unwrap();
    let env = biconjugate(&f).unwrap();
    let mesh = Arc::new(build_box_mesh(&[(0.0, 1.0), (0.0, 1.0)], &[8, 8]).unwrap());
    let opts = ConstructOptions { epsilon: 0.05, mode: Mode::Practical, ..Default::default() };
    let r = gap_report(&mesh, &Expression::Zero, &f, &env, &[0.05], &SolverOptions::default(), &opts)
        .map_err(|e| e.to_string())?;
    ensure(r.min_relaxed <= 1e-6, || format!("min F** = {}", r.min_relaxed))?;
    let a = &r.last;
    let l = &a.ledger;
    ensure(a.certified && l.f_v <= 0.05, || format!("F(v) = {}, certified = {}", l.f_v, a.certified))?;
    ensure(l.flux_term == 0.0, || format!("flux term {}", l.flux_term))?;
    ensure(l.cap_energy <= l.cap_energy_budget && l.cap_energy_budget <= 0.05 / 3.0, || {
        format!("cap energy {} against budget {}", l.cap_energy, l.cap_energy_budget)
    })?;
    ensure(l.cap_measure <= l.cap_measure_budget, || {
        format!("cap measure {} against budget {}", l.cap_measure, l.cap_measure_budget)
    })?;
    for i in 0..mesh.num_nodes() {
        if mesh.is_boundary(i) {
            let v = a.v.eval(mesh.node(i));
            ensure(v == Some(0.0), || format!("v at boundary node {i} is {v:?}"))?;
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {}", secs(took)))?;
    Ok(format!(
        "F(v) = {:.6}, flux 0, cap energy {:.3e} ≤ {:.3e}, cap measure {:.3e} ≤ {:.3e}, {} patches in {}",
        l.f_v,
        l.cap_energy,
        l.cap_energy_budget,
        l.cap_measure,
        l.cap_measure_budget,
        a.v.num_patches(),
        secs(took)
    ))
}

// 5 ──────────────────────────────────────────────────────────────────────

fn criterion_5(dir: &Path) -> Verdict {
    let cfg = write_config(
        dir,
        "ex23.toml",
        r#"
epsilon = 0.05
output_dir = "ex23"
[lagrangian]
builtin = "example_2_3_exact"
[domain]
bounds = [[0.0, 1.0], [0.0, 1.0]]
resolution = [4, 4]
"#,
    );
    let (code, err) = run_cli(&["run", cfg.to_str().unwrap()]);
    ensure(code == 2, || format!("exit {code}: {err}"))?;
    ensure(err.contains("flat face") && err.contains("contact set is empty"), || format!("diagnostic: {err}"))?;
    let (code, _) = run_cli(&["run", dir.join("absent.toml").to_str().unwrap()]);
    ensure(code == 1, || format!("missing config gave exit {code}"))?;
    Ok("exit 2 naming the flat face with empty contact set".into())
}

// 6 ──────────────────────────────────────────────────────────────────────

fn affine_rank(points: &[Vector]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let d: Vec<Vector> = points[1..].iter().map(|p| sub(*p, points[0])).collect();
    if d.iter().all(|v| norm(*v) == 0.0) {
        return 0;
    }
    let cross = d.iter().flat_map(|a| d.iter().map(move |b| (a[0] * b[1] - a[1] * b[0]).abs())).fold(0.0, f64::max);
    if cross > 1e-9 {
        2
    } else {
        1
    }
}

fn witness_invariants(b: Builtin, f: &SampledLagrangian, env: &ConvexEnvelope, x: Vector) -> Result<(), String> {
    let tol = 1e-8;
    let w = match caratheodory_witness(f, env, x) {
        Ok(w) => w,
        Err(EnvelopeError::NoWitness { .. }) if b == Builtin::Example23Exact && norm(x) <= 1.0 => return Ok(()),
        Err(e) => return Err(format!("{b} at {x:?}: {e}")),
    };
    let fss = env.value(x).map_err(|e| e.to_string())?;
    let rel = |v: f64| tol * v.abs().max(1.0);
    if w.contact {
        let exact = b.exact_envelope(x);
        ensure((b.eval(x) - exact).abs() <= rel(exact), || format!("{b} at {x:?}: contact without f = f**"))?;
        return ensure(w.values.iter().all(|v| (v - w.envelope_value).abs() <= rel(w.envelope_value)), || {
            format!("{b} at {x:?}: contact witness reports f ≠ f**")
        });
    }
    ensure(b != Builtin::Example23Exact || norm(x) > 1.0, || format!("{b}: witness inside the flat face at {x:?}"))?;
    ensure(w.weights.iter().all(|a| *a > 0.0), || format!("{b} at {x:?}: non-positive weight"))?;
    ensure((w.weights.iter().sum::<f64>() - 1.0).abs() <= tol, || format!("{b} at {x:?}: weights sum"))?;
    let mut mean = [0.0; 2];
    let mut fsum = 0.0;
    for (p, a) in w.points.iter().zip(&w.weights) {
        mean = [mean[0] + a * p[0], mean[1] + a * p[1]];
        fsum += a * b.eval(*p);
    }
    ensure(norm(sub(mean, x)) <= tol * norm(x).max(1.0), || format!("{b} at {x:?}: reconstruction {mean:?}"))?;
    ensure((fsum - fss).abs() <= rel(fss), || format!("{b} at {x:?}: Σ α f(ξ_i) = {fsum}, f** = {fss}"))?;
    ensure(affine_rank(&w.points) == w.k && w.points.len() == w.k + 1, || format!("{b} at {x:?}: dimension"))?;
    for p in &w.points {
        let fp = b.eval(*p);
        let fss_p = env.value(*p).map_err(|e| e.to_string())?;
        ensure((fp - fss_p).abs() <= rel(fss_p), || format!("{b} at {x:?}: f({p:?}) = {fp} ≠ f** = {fss_p}"))?;
        let plane = fss + dot(w.subgradient, sub(*p, x));
        ensure((fss_p - plane).abs() <= rel(fss_p), || format!("{b} at {x:?}: {p:?} off the shared plane"))?;
    }
    for (i, v) in env.node_values().iter().enumerate() {
        if v.is_finite() {
            let plane = fss + dot(w.subgradient, sub(env.node(i), x));
            ensure(*v >= plane - rel(*v), || format!("{b} at {x:?}: subgradient inequality fails at node {i}"))?;
        }
    }
    Ok(())
}

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    for b in Builtin::ALL {
        let f = SampledLagrangian::from_builtin(b).unwrap();
        let env = biconjugate(&f).unwrap();
        let (bounds, _) = b.default_grid();
        for _ in 0..200 {
            let mut x = [0.0; 2];
            for (d, (lo, hi)) in bounds.iter().enumerate() {
                x[d] = rng.gen_range(*lo * 0.95..*hi * 0.95);
            }
            witness_invariants(b, &f, &env, x)?;
            checked += 1;
        }
    }
    Ok(format!("{checked} queries over {} builtins", Builtin::ALL.len()))
}

// 7 ──────────────────────────────────────────────────────────────────────

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mesh = Arc::new(build_box_mesh(&[(0.0, 1.0), (0.0, 1.0)], &[2, 2]).unwrap());
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let xi = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let u = interpolate(&mesh, &Expression::Affine { constant: rng.gen_range(-1.0..1.0), gradient: xi }).unwrap();
        let base = rng.gen_range(0.0..std::f64::consts::TAU);
        let points: Vec<Vector> = (0..3)
            .map(|k| {
                let t = base + k as f64 * std::f64::consts::TAU / 3.0 + rng.gen_range(-0.5..0.5);
                let r = rng.gen_range(0.2..3.0);
                [xi[0] + r * t.cos(), xi[1] + r * t.sin()]
            })
            .collect();
        let hps: Vec<HalfPlane> = points.iter().map(|p| HalfPlane::new(sub(*p, xi), 1.0)).collect();
        let support = ConvexPolygon::from_box([-1e3, -1e3], [1e3, 1e3]).clip_all(hps.iter());
        let cell = rng.gen_range(0..mesh.num_cells());
        let c = mesh.cell_polygon(cell).centroid();
        let s = rng.gen_range(0.1..1.0) * admissible_scale(&u, cell, c, &support, &Frame::IDENTITY).map_err(|e| e.to_string())?;
        let spec = PatchSpec {
            kind: PatchKind::Cone,
            anchor: c,
            scale: s,
            xi,
            points,
            zetas: Vec::new(),
            gamma: 0.5,
            s_eta: 1.5,
            rho: 0.25,
            cellina_rounds: 8,
        };
        let patch = build_patch_cone(&u, cell, &spec).map_err(|e| format!("patch {trial}: {e}"))?;
        let up = vec![Piece { polygon: mesh.cell_polygon(cell), grad: xi, offset: u.cell_offset(cell) }];
        let a = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let flux = gradient_integral(&up, &patch.pieces, a, &patch.support);
        worst = worst.max(flux.abs());
        ensure(flux.abs() <= 1e-10, || format!("patch {trial}: ∫ a·(∇u − ∇ũ) = {flux:e}"))?;
    }
    Ok(format!("50 cone patches, max |flux| = {worst:.1e}"))
}

// 8 ──────────────────────────────────────────────────────────────────────

fn criterion_8() -> Verdict {
    let p = select_params(0.27, 1.0, 2, 1, 1.0, 1.0, 1.0, Mode::Certified).map_err(|e| e.to_string())?;
    ensure(p.gamma == 1.0 / 300.0, || format!("γ = {}", p.gamma))?;
    let q = select_params(0.01, 1.0, 2, 1, 1.0, 225.0, 1.0, Mode::Certified).map_err(|e| e.to_string())?;
    ensure(q.s_eta_terms[0] == 607500.0, || format!("first S term = {}", q.s_eta_terms[0]))?;
    Ok(format!("γ = {}, first S term = {}", p.gamma, q.s_eta_terms[0]))
}

// 9 ──────────────────────────────────────────────────────────────────────

fn radial_config(dir: &Path) -> PathBuf {
    write_config(
        dir,
        "radial.toml",
        r#"
epsilon = 0.05
mode = "practical"
seed = 11
output_dir = "radial"
[lagrangian]
builtin = "radial_double_well_2d"
[domain]
bounds = [[0.0, 1.0], [0.0, 1.0]]
resolution = [8, 8]
"#,
    )
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    ["envelope.csv", "solution.csv", "cover.csv", "gap.csv", "summary.csv"]
        .iter()
        .map(|n| (n.to_string(), fs::read(dir.join(n)).unwrap_or_default()))
        .collect()
}

fn criterion_9(dir: &Path) -> Verdict {
    let cfg = radial_config(dir);
    let cfg = cfg.to_str().unwrap();
    let mut runs = Vec::new();
    for (threads, out) in [("4", "a"), ("4", "b"), ("1", "c")] {
        let out = dir.join(out);
        let (code, err) = run_cli(&["--threads", threads, "--out", out.to_str().unwrap(), "run", cfg]);
        ensure(code == 0, || format!("{threads} threads: exit {code}: {err}"))?;
        runs.push(artifacts(&out));
    }
    for (name, bytes) in &runs[0] {
        ensure(!bytes.is_empty(), || format!("{name} is empty"))?;
    }
    for (i, label) in [(1, "same seed"), (2, "1 vs 4 threads")] {
        for ((name, a), (_, b)) in runs[0].iter().zip(&runs[i]) {
            ensure(a == b, || format!("{label}: {name} differs"))?;
        }
    }
    let bytes: usize = runs[0].iter().map(|(_, b)| b.len()).sum();
    Ok(format!("5 CSVs ({bytes} bytes) identical across reruns and 1/4 threads"))
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("envelope oracle", Box::new(criterion_1)),
        ("double well end to end", Box::new(|| criterion_2(dir))),
        ("lattice laminates", Box::new(criterion_3)),
        ("radial double well", Box::new(criterion_4)),
        ("flat face without contact", Box::new(|| criterion_5(dir))),
        ("witness invariants", Box::new(criterion_6)),
        ("flux identity", Box::new(criterion_7)),
        ("certified parameters", Box::new(criterion_8)),
        ("determinism", Box::new(|| criterion_9(dir))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
