#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use memshift::edit::{edit_rows, layerwise_edit};
use memshift::hyperplane::fit_with_validation;
use memshift::metrics::{
    fid, fid_from_moments, kendall_tau, kid, realness_ratio, spearman_rho, sweep_report, FeatureSet,
    GaussianMoments, KidConfig,
};
use memshift::synthetic::layer_mean_projection;
use memshift::{
    compare_spaces, condition_direction, edit, make_world, sample_latents, score, split, sweep, EditSpec,
    FitConfig, Hyperplane, LabeledDataset, LayerStructure, Matrix, SamplerConfig, SplitSpec, SyntheticWorld,
    ThresholdStrategy, WorldConfig, Xoshiro256StarStar,
};

type Outcome = Result<String, String>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normal_vec(rng: &mut Xoshiro256StarStar, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.next_normal()).collect()
}

fn unit_vec(rng: &mut Xoshiro256StarStar, d: usize) -> Vec<f64> {
    let v = normal_vec(rng, d);
    let n = norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

fn normal_matrix(rng: &mut Xoshiro256StarStar, rows: usize, cols: usize, shift: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.next_normal() + shift).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

struct Recovery {
    world: SyntheticWorld,
    hyperplane: Hyperplane,
    cosine: f64,
    val_accuracy: f64,
    seconds: f64,
}

fn recover(sigma: f64) -> Result<Recovery, String> {
    let world = ok(make_world(&WorldConfig::new(512, 2024, sigma)))?;
    let latents = ok(sample_latents(&world, &SamplerConfig::new(20_000)))?;
    let scores = ok(score(&world, &latents, false))?;
    let pool = ok(rayon::ThreadPoolBuilder::new().num_threads(1).build())?;
    let start = Instant::now();
    let outcome = pool.install(|| -> memshift::Result<_> {
        let (data, _) = LabeledDataset::from_scores(latents, scores, ThresholdStrategy::Mean, None)?;
        let (train, val) = split(&data, SplitSpec::default())?;
        fit_with_validation(&train, &val, &FitConfig::default())
    });
    let seconds = start.elapsed().as_secs_f64();
    let hyperplane = ok(outcome)?.hyperplane;
    let cosine = dot(hyperplane.normal(), &world.true_direction) / norm(&world.true_direction);
    let val_accuracy = hyperplane.val_accuracy.ok_or("validation accuracy missing")?;
    Ok(Recovery { world, hyperplane, cosine, val_accuracy, seconds })
}

fn c1(r: &Recovery) -> Outcome {
    check!(r.cosine.abs() >= 0.95, "|cos| = {:.4} < 0.95", r.cosine.abs());
    check!(r.seconds < 60.0, "single-threaded fit took {:.1} s", r.seconds);
    Ok(format!("|cos| = {:.4}, {:.1} s on one thread", r.cosine.abs(), r.seconds))
}

fn c2() -> Outcome {
    let r = recover(0.10)?;
    check!(r.val_accuracy >= 0.80, "validation accuracy {:.4} < 0.80", r.val_accuracy);
    Ok(format!("validation accuracy {:.4}", r.val_accuracy))
}

fn c3() -> Outcome {
    let mut rng = Xoshiro256StarStar::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = 2 + rng.next_below(511) as usize;
        let h = ok(Hyperplane::from_direction(&normal_vec(&mut rng, d)))?;
        let x: Vec<f64> = normal_vec(&mut rng, d).into_iter().map(|v| 3.0 * v).collect();
        let alpha = -5.0 + 10.0 * rng.next_f64();
        let moved = ok(edit(&x, &h, alpha))?;
        let shift = dot(h.normal(), &moved) - dot(h.normal(), &x) - alpha;
        worst = worst.max(shift.abs());
    }
    check!(worst <= 1e-10, "max deviation {worst:e}");
    Ok(format!("max |n·x' - n·x - alpha| = {worst:.2e}"))
}

fn c4(r: &Recovery) -> Outcome {
    let alphas = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
    let test = ok(sample_latents(&r.world, &SamplerConfig { stream: 1, ..SamplerConfig::new(100) }))?;
    let mut per_alpha = Vec::new();
    for &alpha in &alphas {
        let edited = ok(edit_rows(&test, &r.hyperplane, alpha, None))?;
        per_alpha.push((alpha, ok(score(&r.world, &edited, true))?));
    }
    let increasing = (0..test.rows())
        .filter(|&i| per_alpha.windows(2).all(|w| w[1].1[i] > w[0].1[i]))
        .count();
    check!(increasing >= 99, "only {increasing}/100 latents increase strictly");
    let report = ok(sweep_report(&per_alpha))?;
    let means = report.means();
    check!(means.windows(2).all(|w| w[1] > w[0]), "sweep means not strictly increasing: {means:?}");
    Ok(format!("{increasing}/100 strictly increasing; means {:.3} .. {:.3}", means[0], means[means.len() - 1]))
}

fn c5() -> Outcome {
    let d = 64;
    let mut rng = Xoshiro256StarStar::seed_from_u64(5);
    let h = ok(Hyperplane::from_direction(&normal_vec(&mut rng, d)))?;
    let attrs: Vec<Vec<f64>> = (0..3).map(|_| unit_vec(&mut rng, d)).collect();
    let conditioned = ok(condition_direction(&h, &attrs))?;
    let leak = attrs.iter().map(|a| dot(conditioned.normal(), a).abs()).fold(0.0, f64::max);
    check!(leak <= 1e-6, "conditioned direction leaks {leak:e} onto an attribute");

    let alphas: Vec<f64> = (-5..=5).map(f64::from).collect();
    let spec = EditSpec { conditions: attrs.clone(), ..EditSpec::default() };
    let mut drift = 0.0f64;
    for _ in 0..50 {
        let x = normal_vec(&mut rng, d);
        let traj = ok(sweep(&x, &h, &alphas, &spec))?;
        for a in &attrs {
            let base = dot(a, &x);
            for p in &traj.latents {
                drift = drift.max((dot(a, p) - base).abs());
            }
        }
    }
    check!(drift <= 1e-5, "attribute projection drifts by {drift:e}");
    Ok(format!("max |c·a| = {leak:.1e}, max projection drift = {drift:.1e}"))
}

fn c6() -> Outcome {
    let (layers, width) = (18, 32);
    let mut rng = Xoshiro256StarStar::seed_from_u64(6);
    let h = ok(Hyperplane::from_direction(&normal_vec(&mut rng, layers * width)))?;
    let w = normal_matrix(&mut rng, layers, width, 0.0);
    for layer in 0..layers {
        let edited = ok(layerwise_edit(&w, &h, 2.5, &[layer]))?;
        let changed = w.as_slice().iter().zip(edited.as_slice()).filter(|(a, b)| a != b).count();
        let outside = (0..layers)
            .filter(|&l| l != layer)
            .any(|l| edited.row(l) != w.row(l));
        check!(changed == width && !outside, "mask {{{layer}}} changed {changed} entries");
    }
    let all: Vec<usize> = (0..layers).collect();
    let full = ok(layerwise_edit(&w, &h, 2.5, &all))?;
    let flat = ok(edit(w.as_slice(), &h, 2.5))?;
    let gap = full.as_slice().iter().zip(&flat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check!(gap <= 1e-12, "full mask differs from flat edit by {gap:e}");
    Ok(format!("each single-layer mask changed exactly {width} entries; full-mask gap {gap:.1e}"))
}

fn brute_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let (mut concordant, mut discordant, mut untied_x, mut untied_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let sx = (x[i] - x[j]).signum() * f64::from(u8::from(x[i] != x[j]));
            let sy = (y[i] - y[j]).signum() * f64::from(u8::from(y[i] != y[j]));
            untied_x += i64::from(sx != 0.0);
            untied_y += i64::from(sy != 0.0);
            match (sx * sy).partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => concordant += 1,
                Some(std::cmp::Ordering::Less) => discordant += 1,
                _ => {}
            }
        }
    }
    (concordant - discordant) as f64 / ((untied_x as f64) * (untied_y as f64)).sqrt()
}

fn brute_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&a| {
            let below = v.iter().filter(|&&b| b < a).count() as f64;
            let equal = v.iter().filter(|&&b| b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn brute_spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (brute_ranks(x), brute_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn c7() -> Outcome {
    let mut rng = Xoshiro256StarStar::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut cases = 0;
    while cases < 100 {
        let n = 2 + rng.next_below(499) as usize;
        let levels = 2 + rng.next_below(40);
        let x: Vec<f64> = (0..n).map(|_| rng.next_below(levels) as f64).collect();
        let y: Vec<f64> = (0..n).map(|i| if rng.next_f64() < 0.5 { x[i] } else { rng.next_below(levels) as f64 }).collect();
        let distinct = |v: &[f64]| v.iter().any(|&a| a != v[0]);
        if !distinct(&x) || !distinct(&y) {
            continue;
        }
        worst = worst.max((ok(kendall_tau(&x, &y))? - brute_tau_b(&x, &y)).abs());
        worst = worst.max((ok(spearman_rho(&x, &y))? - brute_spearman(&x, &y)).abs());
        cases += 1;
    }
    check!(worst <= 1e-12, "fast and brute-force statistics differ by {worst:e}");

    let x: Vec<f64> = (0..300).map(|_| rng.next_normal()).collect();
    let up: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
    let down: Vec<f64> = x.iter().map(|v| -v).collect();
    let extremes = [
        ok(kendall_tau(&x, &up))?,
        ok(spearman_rho(&x, &up))?,
        ok(kendall_tau(&x, &down))?,
        ok(spearman_rho(&x, &down))?,
    ];
    check!(extremes == [1.0, 1.0, -1.0, -1.0], "perfect/reversed rankings gave {extremes:?}");
    Ok(format!("100 tied instances agree within {worst:.1e}; perfect/reversed give exactly +1/-1"))
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| (0..d).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = a.len();
    let mut m = a.to_vec();
    let mut inv = identity(d);
    for col in 0..d {
        let pivot = (col..d).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col];
        for j in 0..d {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..d {
            if i != col {
                let f = m[i][col];
                for j in 0..d {
                    m[i][j] -= f * m[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

fn denman_beavers_sqrt(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = a.len();
    let mut y = a.to_vec();
    let mut z = identity(d);
    for _ in 0..100 {
        let (yi, zi) = (gauss_jordan_inverse(&y), gauss_jordan_inverse(&z));
        let next_y: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| 0.5 * (y[i][j] + zi[i][j])).collect()).collect();
        let next_z: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| 0.5 * (z[i][j] + yi[i][j])).collect()).collect();
        let step: f64 = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| (next_y[i][j] - y[i][j]).abs()).sum();
        y = next_y;
        z = next_z;
        if step < 1e-15 {
            break;
        }
    }
    y
}

fn random_spd(rng: &mut Xoshiro256StarStar, d: usize) -> Vec<Vec<f64>> {
    let b: Vec<Vec<f64>> = (0..d).map(|_| normal_vec(rng, d)).collect();
    (0..d)
        .map(|i| (0..d).map(|j| dot(&b[i], &b[j]) / d as f64 + if i == j { 0.1 } else { 0.0 }).collect())
        .collect()
}

fn oracle_fid(m1: &[f64], s1: &[Vec<f64>], m2: &[f64], s2: &[Vec<f64>]) -> f64 {
    let d = m1.len();
    let mean_term: f64 = m1.iter().zip(m2).map(|(a, b)| (a - b) * (a - b)).sum();
    let root = denman_beavers_sqrt(&mat_mul(s1, s2));
    mean_term + (0..d).map(|i| s1[i][i] + s2[i][i] - 2.0 * root[i][i]).sum::<f64>()
}

fn moments_of(mean: &[f64], cov: &[Vec<f64>]) -> Result<GaussianMoments, String> {
    let d = mean.len();
    ok(GaussianMoments::new(mean.to_vec(), ok(Matrix::from_vec(d, d, cov.concat()))?))
}

fn c8() -> Outcome {
    let mut rng = Xoshiro256StarStar::seed_from_u64(8);
    let p = ok(FeatureSet::new(normal_matrix(&mut rng, 400, 12, 0.3), "p"))?;
    let self_distance = ok(fid(&p, &p))?;
    check!(self_distance.abs() <= 1e-8, "fid(p, p) = {self_distance:e}");

    let d = 16;
    let m = normal_vec(&mut rng, d);
    let shifted = ok(fid_from_moments(&moments_of(&vec![0.0; d], &identity(d))?, &moments_of(&m, &identity(d))?))?;
    let expected = dot(&m, &m);
    check!((shifted - expected).abs() <= 1e-8, "shifted identity FID {shifted} vs |m|^2 {expected}");

    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (s1, s2) = (random_spd(&mut rng, 6), random_spd(&mut rng, 6));
        let (m1, m2) = (normal_vec(&mut rng, 6), normal_vec(&mut rng, 6));
        let got = ok(fid_from_moments(&moments_of(&m1, &s1)?, &moments_of(&m2, &s2)?))?;
        worst = worst.max((got - oracle_fid(&m1, &s1, &m2, &s2)).abs());
    }
    check!(worst <= 1e-8, "random SPD cases differ from the Denman-Beavers oracle by {worst:e}");
    Ok(format!("fid(p,p) = {self_distance:.1e}; mean-shift exact; 50 SPD cases within {worst:.1e}"))
}

fn c9() -> Outcome {
    let mut rng = Xoshiro256StarStar::seed_from_u64(9);
    let features = ok(FeatureSet::new(normal_matrix(&mut rng, 1000, 16, 0.0), "a"))?;
    let cfg = KidConfig { subset_size: 200, num_subsets: 20, seed: 9 };
    let est = ok(kid(&features, &features, &cfg))?;
    check!(est.mean.abs() <= 3.0 * est.std, "|KID| = {:e} exceeds 3 std = {:e}", est.mean.abs(), 3.0 * est.std);

    let baseline = ok(FeatureSet::new(normal_matrix(&mut rng, 600, 16, 0.2), "baseline"))?;
    let reference = ok(FeatureSet::new(normal_matrix(&mut rng, 600, 16, 0.0), "reference"))?;
    let ratio = ok(realness_ratio(&baseline, &baseline, &reference, &cfg))?;
    check!(
        (ratio.fid_ratio - 1.0).abs() <= 1e-6 && (ratio.kid_ratio - 1.0).abs() <= 1e-6,
        "self realness ratio fid {} kid {}",
        ratio.fid_ratio,
        ratio.kid_ratio
    );
    Ok(format!(
        "KID self = {:.2e} +/- {:.2e} over 20 subsets; realness ratios {} / {}",
        est.mean, est.std, ratio.fid_ratio, ratio.kid_ratio
    ))
}

fn c10() -> Outcome {
    let structure = LayerStructure { layers: 18, layer_dim: 32 };
    let config = WorldConfig {
        layer_structure: Some(structure),
        sparse_layer: Some(5),
        ..WorldConfig::new(structure.dim(), 10, 0.05)
    };
    let world = ok(make_world(&config))?;
    let w = ok(sample_latents(&world, &SamplerConfig::new(4000)))?;
    let scores = ok(score(&world, &w, false))?;
    let z = ok(layer_mean_projection(&w, structure))?;
    let (w_data, _) = ok(LabeledDataset::from_scores(w, scores.clone(), ThresholdStrategy::Mean, Some(structure)))?;
    let (z_data, _) = ok(LabeledDataset::from_scores(z, scores, ThresholdStrategy::Mean, None))?;
    let cmp = ok(compare_spaces(&z_data, &w_data, &FitConfig::default(), SplitSpec::default()))?;
    check!(
        cmp.w_val_accuracy > cmp.z_val_accuracy,
        "w+ accuracy {:.4} not above z accuracy {:.4}",
        cmp.w_val_accuracy,
        cmp.z_val_accuracy
    );
    Ok(format!("w+ {:.4} > z {:.4} (difference {:+.4})", cmp.w_val_accuracy, cmp.z_val_accuracy, cmp.difference()))
}

fn memshift(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = ok(Command::new(env!("CARGO_BIN_EXE_memshift")).args(args).current_dir(dir).env_remove("MEMSHIFT_SEED").output())?;
    check!(
        out.status.success(),
        "memshift {} failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(())
}

fn find_manifests(dir: &Path, found: &mut Vec<PathBuf>) {
    for entry in std::fs::read_dir(dir).unwrap().flatten() {
        let path = entry.path();
        if path.is_dir() {
            find_manifests(&path, found);
        } else if path.to_string_lossy().ends_with("manifest.json") {
            found.push(path);
        }
    }
}

fn recorded_outputs(manifest: &Path, dir: &Path) -> Result<Vec<PathBuf>, String> {
    let json: serde_json::Value = ok(serde_json::from_str(&ok(std::fs::read_to_string(manifest))?))?;
    let outputs = json["outputs"].as_array().ok_or("manifest has no outputs")?;
    Ok(outputs.iter().map(|o| dir.join(o["path"].as_str().unwrap_or_default())).collect())
}

fn c11() -> Outcome {
    let tmp = ok(tempfile::tempdir())?;
    let dir = tmp.path();
    let pipeline: &[&[&str]] = &[
        &["synth", "--dim", "24", "--n", "600", "--seed", "5", "--out-dir", "w"],
        &["synth", "--dim", "24", "--n", "600", "--seed", "6", "--psi", "0.7", "--out-dir", "w2"],
        &["synth", "--dim", "96", "--layers", "6x16", "--sparse-layer", "2", "--n", "600", "--emit-z", "--f32", "--out-dir", "lw"],
        &["fit", "--latents", "w/latents.ltm", "--scores", "w/scores.csv", "--out", "h.json"],
        &["fit", "--latents", "w2/latents.ltm", "--scores", "w2/scores.csv", "--seed", "3", "--out", "h2.json"],
        &["fit", "--latents", "lw/latents.ltm", "--scores", "lw/scores.csv", "--out", "hl.json"],
        &["compare", "--z-latents", "lw/latents_z.ltm", "--w-latents", "lw/latents.ltm", "--scores", "lw/scores.csv", "--out", "cmp.json"],
        &["condition", "--hyperplane", "h.json", "--attrs", "h2.json", "--out", "c.json"],
        &["edit", "--latents", "w/latents.ltm", "--hyperplane", "h.json", "--alpha", "1.5", "--condition", "h2.json", "--out", "e.ltm"],
        &["layerwise", "--latents", "lw/latents.ltm", "--hyperplane", "hl.json", "--alpha", "-2", "--layers", "2", "--out", "le.ltm", "--world", "lw/world.json", "--report", "le.csv"],
        &["sweep", "--latents", "w/latents.ltm", "--hyperplane", "h.json", "--alphas", "-1,0,1", "--world", "w/world.json", "--save-latents", "--out-dir", "sw"],
        &["metrics", "rank", "--a", "w/scores.csv", "--b", "w2/scores.csv", "--out-prefix", "rank"],
        &["metrics", "realness", "--reference", "w2/latents.ltm", "--baseline", "w/latents.ltm", "--modified", "e.ltm", "--alphas", "1.5", "--kid-subset-size", "100", "--kid-subsets", "5", "--out-prefix", "real"],
    ];
    for args in pipeline {
        memshift(dir, args)?;
    }
    let mut manifests = Vec::new();
    find_manifests(dir, &mut manifests);
    manifests.sort();
    check!(manifests.len() == pipeline.len(), "{} manifests for {} runs", manifests.len(), pipeline.len());

    let mut commands = BTreeMap::new();
    let mut files = 0;
    for manifest in &manifests {
        let outputs = recorded_outputs(manifest, dir)?;
        let before: Vec<Vec<u8>> = outputs.iter().map(std::fs::read).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        for out in &outputs {
            ok(std::fs::remove_file(out))?;
        }
        memshift(dir, &["replay", "--manifest", &manifest.to_string_lossy()])?;
        for (out, bytes) in outputs.iter().zip(&before) {
            let after = ok(std::fs::read(out))?;
            check!(&after == bytes, "{} differs after replaying {}", out.display(), manifest.display());
        }
        files += outputs.len();
        let json: serde_json::Value = ok(serde_json::from_str(&ok(std::fs::read_to_string(manifest))?))?;
        *commands.entry(json["command"].as_str().unwrap_or("?").to_string()).or_insert(0) += 1;
    }
    check!(commands.len() == 9, "only {} distinct commands replayed: {:?}", commands.len(), commands.keys());
    Ok(format!("{} runs over {} commands replayed; {files} output files bit-identical", manifests.len(), commands.len()))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    }
}

fn main() -> ExitCode {
    let shared = catch_unwind(|| recover(0.05)).unwrap_or_else(|_| Err("panicked".into()));
    let shared_err = |e: &String| Err::<String, _>(format!("direction recovery failed: {e}"));

    let criteria: Vec<(&str, Outcome)> = vec![
        ("C1 direction recovery", shared.as_ref().map_or_else(shared_err, |r| guarded(|| c1(r)))),
        ("C2 held-out accuracy", guarded(c2)),
        ("C3 edit shift exactness", guarded(c3)),
        ("C4 monotone sweep", shared.as_ref().map_or_else(shared_err, |r| guarded(|| c4(r)))),
        ("C5 conditional editing", guarded(c5)),
        ("C6 layerwise locality", guarded(c6)),
        ("C7 rank-correlation oracle", guarded(c7)),
        ("C8 FID identities", guarded(c8)),
        ("C9 KID self-distance", guarded(c9)),
        ("C10 extended vs plain space", guarded(c10)),
        ("C11 replay determinism", guarded(c11)),
    ];
    let mut failed = 0;
    for (name, outcome) in &criteria {
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
