use std::path::PathBuf;

use clap::{Args, Subcommand};
use memshift::metrics::{kendall_tau, realness_ratio, spearman_rho, FeatureSet, KidConfig};
use serde_json::json;

use super::{load_scores, load_tensor, usage, write_text};
use crate::manifest::Run;

#[derive(Debug, Subcommand)]
pub enum MetricsCommand {
    /// Kendall tau-b and Spearman rho between two score files.
    Rank(RankArgs),
    /// FID and KID ratios of modified vs. baseline features against a reference set.
    Realness(RealnessArgs),
}

impl MetricsCommand {
    pub fn name(&self) -> &'static str {
        match self {
            MetricsCommand::Rank(_) => "metrics rank",
            MetricsCommand::Realness(_) => "metrics realness",
        }
    }
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Writes `<prefix>.json` and `<prefix>.csv`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Args)]
pub struct RealnessArgs {
    /// Reference features (e.g. real images), n×d LTM1.
    #[arg(long)]
    pub reference: PathBuf,
    /// Features of unmodified generated images.
    #[arg(long)]
    pub baseline: PathBuf,
    /// Features of modified images; comma-separated for several coefficients.
    #[arg(long, value_delimiter = ',', required = true)]
    pub modified: Vec<PathBuf>,
    /// Edit coefficient of each --modified file, for the CSV.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub kid_subset_size: usize,
    #[arg(long, default_value_t = 10)]
    pub kid_subsets: usize,
    #[arg(long, env = crate::SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_prefix: PathBuf,
}

fn with_ext(prefix: &std::path::Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn run(cmd: &MetricsCommand, run: &mut Run) -> anyhow::Result<Option<u64>> {
    match cmd {
        MetricsCommand::Rank(a) => rank(a, run).map(|()| None),
        MetricsCommand::Realness(a) => realness(a, run).map(|()| Some(a.seed)),
    }
}

fn rank(a: &RankArgs, run: &mut Run) -> anyhow::Result<()> {
    let x = load_scores(&a.a, run)?;
    let y = load_scores(&a.b, run)?;
    let tau = kendall_tau(&x, &y)?;
    let rho = spearman_rho(&x, &y)?;
    let body = json!({ "n": x.len(), "kendall_tau_b": tau, "spearman_rho": rho });
    write_text(&with_ext(&a.out_prefix, "json"), &(serde_json::to_string_pretty(&body)? + "\n"), run)?;
    write_text(
        &with_ext(&a.out_prefix, "csv"),
        &format!("metric,value\nkendall_tau_b,{tau}\nspearman_rho,{rho}\n"),
        run,
    )?;
    run.set_manifest_path(with_ext(&a.out_prefix, "manifest.json"));
    println!("n = {}  kendall tau-b = {tau:.4}  spearman rho = {rho:.4}", x.len());
    Ok(())
}

fn features(path: &std::path::Path, run: &mut Run) -> anyhow::Result<FeatureSet> {
    let (m, _) = load_tensor(path, run)?.to_matrix();
    Ok(FeatureSet::new(m, path.display().to_string())?)
}

fn realness(a: &RealnessArgs, run: &mut Run) -> anyhow::Result<()> {
    if !a.alphas.is_empty() && a.alphas.len() != a.modified.len() {
        return Err(usage(format!("{} alphas for {} modified feature sets", a.alphas.len(), a.modified.len())));
    }
    let reference = features(&a.reference, run)?;
    let baseline = features(&a.baseline, run)?;
    let cfg = KidConfig { subset_size: a.kid_subset_size, num_subsets: a.kid_subsets, seed: a.seed };
    let mut rows = Vec::new();
    let mut csv = String::from("alpha,modified,fid_ratio,kid_ratio,fid_modified,kid_modified,fid_baseline,kid_baseline\n");
    for (i, path) in a.modified.iter().enumerate() {
        let modified = features(path, run)?;
        let r = realness_ratio(&modified, &baseline, &reference, &cfg)?;
        let alpha = a.alphas.get(i).map_or(String::new(), ToString::to_string);
        csv.push_str(&format!(
            "{alpha},{},{},{},{},{},{},{}\n",
            path.display(),
            r.fid_ratio,
            r.kid_ratio,
            r.fid_modified,
            r.kid_modified,
            r.fid_baseline,
            r.kid_baseline
        ));
        println!("{} fid_ratio = {:.4}  kid_ratio = {:.4}", path.display(), r.fid_ratio, r.kid_ratio);
        rows.push(json!({ "alpha": a.alphas.get(i), "modified": path, "ratio": r }));
    }
    let body = json!({ "kid_subset_size": a.kid_subset_size, "kid_subsets": a.kid_subsets, "seed": a.seed, "results": rows });
    write_text(&with_ext(&a.out_prefix, "json"), &(serde_json::to_string_pretty(&body)? + "\n"), run)?;
    write_text(&with_ext(&a.out_prefix, "csv"), &csv, run)?;
    run.config("kid_subset_size", a.kid_subset_size);
    run.config("kid_subsets", a.kid_subsets);
    run.config("seed", a.seed);
    run.set_manifest_path(with_ext(&a.out_prefix, "manifest.json"));
    Ok(())
}
