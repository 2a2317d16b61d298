//! Command implementations behind the `inkscreen` binary.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use inkscreen_core::bundle::{train_bundle, ScreeningPrediction, TrainedBundle};
use inkscreen_core::config::{parse_config, Config};
use inkscreen_core::dataset::{align_labels, read_features_csv, read_labels_csv, write_labels_csv, FeatureTable};
use inkscreen_core::evaluation::{nested_cv, permutation_test, CvConfig, CvResult, PermutationResult, Target};
use inkscreen_core::features::{extract_session_features, FeatureConfig, SessionFeatureVector};
use inkscreen_core::stroke::{parse_session, SubjectRecord};
use inkscreen_core::synth::{generate_cohort, CohortSpec, ThetaDistribution};
use ndarray::Axis;
use rayon::prelude::*;
use serde::Serialize;

pub fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let bytes = fs::read(p).with_context(|| format!("reading config {}", p.display()))?;
            parse_config(&bytes).with_context(|| format!("config {}", p.display()))
        }
    }
}

/// Files as given; directories contribute their `*.json` entries in name order.
pub fn session_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("listing {}", input.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            found.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"));
            found.sort();
            out.extend(found);
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}

#[derive(Debug)]
pub struct Extraction {
    pub table: FeatureTable,
    /// Files that could not be read or parsed, with the reason.
    pub failures: Vec<(PathBuf, String)>,
}

fn extract_one(path: &Path, cfg: &FeatureConfig) -> Result<SessionFeatureVector> {
    let bytes = fs::read(path).context("cannot read")?;
    let session = parse_session(&bytes)?;
    Ok(extract_session_features(&session, cfg))
}

/// Extracts every file independently; a bad file never stops the rest.
pub fn extract(paths: &[PathBuf], cfg: &FeatureConfig) -> Extraction {
    let results: Vec<Result<SessionFeatureVector>> = paths.par_iter().map(|p| extract_one(p, cfg)).collect();
    let mut vectors = Vec::new();
    let mut failures = Vec::new();
    let mut seen = BTreeSet::new();
    for (path, r) in paths.iter().zip(results) {
        match r {
            Ok(v) if !seen.insert(v.session_id.clone()) => {
                failures.push((path.clone(), format!("duplicate session id {:?}", v.session_id)));
            }
            Ok(v) => vectors.push(v),
            Err(e) => failures.push((path.clone(), format!("{e:#}"))),
        }
    }
    Extraction {
        table: FeatureTable::from_vectors(&vectors),
        failures,
    }
}

/// Feature rows with their labels; both files must hold the same ids.
pub fn load_dataset(features: &Path, labels: &Path) -> Result<(FeatureTable, Vec<SubjectRecord>)> {
    let table = read_features_csv(fs::File::open(features).with_context(|| format!("opening {}", features.display()))?)
        .with_context(|| format!("features {}", features.display()))?;
    let rows = read_labels_csv(fs::File::open(labels).with_context(|| format!("opening {}", labels.display()))?)
        .with_context(|| format!("labels {}", labels.display()))?;
    let subjects = align_labels(&table, &rows)?;
    Ok((table, subjects))
}

fn target_rows(table: &FeatureTable, subjects: &[SubjectRecord], target: Target) -> Result<(ndarray::Array2<f64>, inkscreen_core::learners::Labels)> {
    let (rows, labels) = target.labels(subjects);
    if rows.is_empty() {
        bail!("no rows carry a {target} label");
    }
    Ok((table.values.select(Axis(0), &rows), labels))
}

pub fn evaluate(table: &FeatureTable, subjects: &[SubjectRecord], target: Target, cv: &CvConfig, seed: u64) -> Result<CvResult> {
    let (x, labels) = target_rows(table, subjects, target)?;
    Ok(nested_cv(x.view(), &labels, cv, seed, None)?)
}

pub fn permtest(
    table: &FeatureTable,
    subjects: &[SubjectRecord],
    target: Target,
    cv: &CvConfig,
    n_perm: usize,
    seed: u64,
) -> Result<PermutationResult> {
    let (x, labels) = target_rows(table, subjects, target)?;
    Ok(permutation_test(x.view(), &labels, cv, n_perm, seed)?)
}

/// Fits the three screening pipelines. With `with_cv`, nested-CV summary
/// means for each target are stored in the metadata.
pub fn train(
    table: &FeatureTable,
    subjects: &[SubjectRecord],
    config: &Config,
    seed: u64,
    created_at: String,
    with_cv: bool,
) -> Result<TrainedBundle> {
    let mut bundle = train_bundle(table, subjects, config.features, &config.evaluation, seed, created_at)?;
    if with_cv {
        for target in [Target::Diagnosis, Target::Mmse, Target::Mtl] {
            let res = evaluate(table, subjects, target, &config.evaluation, seed)?;
            let means = res.summary.iter().map(|(k, v)| (k.clone(), v.mean)).collect();
            bundle.metadata.cv_metrics.insert(target.to_string(), means);
        }
    }
    Ok(bundle)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRecord {
    pub session_id: String,
    #[serde(flatten)]
    pub prediction: ScreeningPrediction,
}

pub fn predict(bundle: &TrainedBundle, table: &FeatureTable) -> Result<Vec<PredictionRecord>> {
    let preds = bundle.predict(table.values.view())?;
    Ok(table
        .ids
        .iter()
        .zip(preds)
        .map(|(id, prediction)| PredictionRecord {
            session_id: id.clone(),
            prediction,
        })
        .collect())
}

/// Writes `n` session files plus `labels.csv` into `out_dir`.
pub fn synth(out_dir: &Path, n: usize, thetas: &ThetaDistribution, spec: &CohortSpec, seed: u64) -> Result<Vec<PathBuf>> {
    let cohort = generate_cohort(n, thetas, spec, seed)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut written = Vec::with_capacity(n);
    for s in &cohort.sessions {
        let path = out_dir.join(format!("{}.json", s.session_id()));
        fs::write(&path, s.to_json()).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    let labels: Vec<(String, SubjectRecord)> = cohort
        .sessions
        .iter()
        .zip(cohort.subjects())
        .map(|(s, l)| (s.session_id().to_string(), l))
        .collect();
    let path = out_dir.join("labels.csv");
    write_labels_csv(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?, &labels)?;
    Ok(written)
}

/// Class counts of a label set, for progress messages.
pub fn diagnosis_counts(subjects: &[SubjectRecord]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for d in subjects.iter().filter_map(|s| s.diagnosis) {
        *out.entry(d.as_str().to_string()).or_default() += 1;
    }
    out
}
