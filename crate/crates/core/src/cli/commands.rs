use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::cli::*;
use crate::comparisons::{self, ComparisonConfig};
use crate::compat::synthetic::{catalog_over_images, CatalogConfig};
use crate::compat::{embed_table, CompatibilityIndex, Registry};
use crate::dataset::synthetic::{generate, SyntheticConfig};
use crate::dataset::{
    assign_splits, clean_ground_truth, read_annotations, DatasetManifest, FeatureTable, SplitAssignment,
    SplitFractions, StyleMembership, ValidationSetSpec,
};
use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::service::{self, SceneStore, ServiceState};
use crate::style::Styles;
use crate::stylenet::{grid_search, train, Checkpoint, GridSpec, ScoreSource, TrainConfig};

pub(crate) fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Ingest(a) => ingest(a),
        Command::GenComparisons(a) => gen_comparisons(a),
        Command::Train(a) => train_cmd(a),
        Command::GridSearch(a) => grid_cmd(a),
        Command::Embed(a) => embed(a),
        Command::BuildIndex(a) => build_index(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Suggest(a) => suggest(a),
        Command::Serve(a) => serve(a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

fn synth(a: SynthArgs) -> Result<()> {
    let data = generate(&SyntheticConfig {
        images: a.images,
        experts: a.experts,
        styles: Styles::default(),
        feature_dim: a.feature_dim,
        concentration: a.concentration,
        expert_noise: a.expert_noise,
        feature_noise: a.feature_noise,
        feature_scale: 1.0,
        seed: a.seed,
    })?;
    let registry = catalog_over_images(
        data.features.ids(),
        &CatalogConfig {
            items: a.items,
            seed: crate::rng::derive_seed(a.seed, 1),
            ..CatalogConfig::default()
        },
    )?;
    write_text(&a.out_dir.join("annotations.jsonl"), &data.annotations_jsonl())?;
    data.features.save(&a.out_dir.join("features.bin"))?;
    registry.save(&a.out_dir.join("registry.json"))?;
    tracing::info!(images = a.images, items = a.items, dir = %a.out_dir.display(), "synthetic corpus written");
    Ok(())
}

fn ingest(a: IngestArgs) -> Result<()> {
    let styles = if a.styles.is_empty() {
        Styles::default()
    } else {
        Styles::new(a.styles)?
    };
    let fractions: [f64; 3] = a
        .fractions
        .as_slice()
        .try_into()
        .map_err(|_| Error::InvalidConfig("--fractions takes exactly three values".into()))?;
    let fractions = SplitFractions(fractions);
    let store = read_annotations(&a.annotations, &styles)?;
    let splits = assign_splits(store.image_ids(), fractions, a.seed)?;
    DatasetManifest::new(&store, &splits, a.seed, fractions)?.save(&a.out)?;
    let [tr, va, te] = splits.sizes();
    tracing::info!(
        images = store.len(),
        train = tr,
        validation = va,
        test = te,
        "dataset manifest written"
    );
    Ok(())
}

fn gen_comparisons(a: GenComparisonsArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&a.dataset)?;
    let store = manifest.store()?;
    let splits = manifest.splits();
    let config = ComparisonConfig {
        t: a.t,
        n_c: a.n,
        seed: a.seed,
        split: Some(a.split),
    };
    let labels = comparisons::sample_comparisons(&store, Some(&splits), &config)?;
    let w = create(&a.out)?;
    comparisons::write_jsonl(&labels, store.styles(), w)?;
    tracing::info!(comparisons = labels.len(), "comparisons written");
    Ok(())
}

/// Clean single-label ground truth restricted to one split.
fn split_truth(
    store: &crate::dataset::AnnotationStore,
    splits: &SplitAssignment,
    split: crate::dataset::Split,
    l_min: Vec<u32>,
) -> Result<StyleMembership> {
    let spec = ValidationSetSpec { l_min };
    Ok(clean_ground_truth(store, &spec)?.retain_images(|id| splits.get(id) == Some(split)))
}

fn train_config(t: &TrainingFlags, lambda: f64, seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: t.learning_rate,
        lambda,
        batch_size: t.batch_size,
        max_epochs: t.epochs,
        early_stop_patience: t.patience,
        seed,
        hidden_dim: t.hidden,
        score_source: if t.logit_scores {
            ScoreSource::Logit
        } else {
            ScoreSource::Probability
        },
        ..TrainConfig::default()
    }
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&a.dataset)?;
    let store = manifest.store()?;
    let features = FeatureTable::load(&a.features)?;
    let file = File::open(&a.comparisons).map_err(|e| Error::io(&a.comparisons, e))?;
    let labels = comparisons::read_jsonl(BufReader::new(file), store.styles())?;
    let validation = split_truth(
        &store,
        &manifest.splits(),
        crate::dataset::Split::Validation,
        a.training.l_min.clone(),
    )?;
    let config = train_config(&a.training, a.lambda, a.seed);
    let outcome = train(
        &features,
        &labels,
        (!validation.is_empty()).then_some(&validation),
        store.styles().len(),
        &config,
    )?;
    Checkpoint::new(&outcome.head, store.styles().clone(), config)?.save(&a.out)?;
    if let Some(path) = &a.metrics {
        let w = create(path)?;
        outcome.write_metrics(w)?;
    }
    tracing::info!(
        epochs = outcome.history.len(),
        best_epoch = outcome.best_epoch,
        initial_loss = outcome.initial_loss,
        final_loss = outcome.final_loss(),
        "training finished"
    );
    Ok(())
}

fn grid_cmd(a: GridSearchArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&a.dataset)?;
    let store = manifest.store()?;
    let splits = manifest.splits();
    let features = FeatureTable::load(&a.features)?;
    let validation = split_truth(
        &store,
        &splits,
        crate::dataset::Split::Validation,
        a.training.l_min.clone(),
    )?;
    let grid = GridSpec {
        lambdas: a.lambdas,
        thresholds: a.thresholds,
        comparison_counts: a.counts,
    };
    let base = train_config(&a.training, 0.0, a.seed);
    let outcome = grid_search(&store, &splits, &features, &validation, &grid, &base)?;
    if let Some(path) = &a.report {
        let json = serde_json::to_string_pretty(&outcome.cells).map_err(|e| Error::json("grid report", e))?;
        write_text(path, &(json + "\n"))?;
    }
    let (Some(best), Some(head)) = (outcome.best, outcome.best_head.as_ref()) else {
        return Err(Error::Empty("successful grid cell set"));
    };
    let cell = &outcome.cells[best];
    let config = TrainConfig {
        lambda: cell.lambda,
        ..base
    };
    Checkpoint::new(head, store.styles().clone(), config)?.save(&a.out)?;
    tracing::info!(
        lambda = cell.lambda,
        t = cell.t,
        n_c = cell.n_c,
        val_acc = cell.val_acc,
        "best grid cell"
    );
    Ok(())
}

fn embed(a: EmbedArgs) -> Result<()> {
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let features = FeatureTable::load(&a.features)?;
    embed_table(&ckpt.head, &features)?.save(&a.out)
}

fn build_index(a: BuildIndexArgs) -> Result<()> {
    let registry = Registry::load(&a.registry)?;
    let embeddings = FeatureTable::load(&a.embeddings)?;
    let index = CompatibilityIndex::build(&registry, &embeddings)?;
    index.save(&a.out)?;
    tracing::info!(
        items = index.len(),
        unrankable = index.unrankable().len(),
        generation = %index.generation_hex(),
        "index written"
    );
    Ok(())
}

fn eval_cmd(a: EvalArgs) -> Result<()> {
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let manifest = DatasetManifest::load(&a.dataset)?;
    let store = manifest.store()?;
    let features = FeatureTable::load(&a.features)?;
    let truth = split_truth(&store, &manifest.splits(), a.split, a.l_min)?;
    let report = evaluate(&ckpt.head, &features, &truth, store.styles(), Some(&store), a.cutoff)?;
    write_text(&a.out, &(report.to_json()? + "\n"))?;
    if let Some(path) = &a.csv {
        let mut w = create(path)?;
        report.write_csv(&mut w).map_err(|e| Error::io(path, e))?;
        finish(w, path)?;
    }
    Ok(())
}

fn load_index(path: &Path, registry: Option<&Path>) -> Result<CompatibilityIndex> {
    let index = CompatibilityIndex::load(path)?;
    if let Some(r) = registry {
        index.check_fresh(&Registry::load(r)?)?;
    }
    Ok(index)
}

fn suggest(a: SuggestArgs) -> Result<()> {
    let index = load_index(&a.index, a.registry.as_deref())?;
    let ranked = match &a.seed_item {
        Some(seed) => index.rank_single_seed(seed, &a.class, a.k)?,
        None => index.rank_multi_seed(&a.scene, &a.class, a.k)?,
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (r, s) in ranked.iter().enumerate() {
        writeln!(out, "{},{},{}", r + 1, s.furniture_id, s.distance).map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let index = load_index(&a.index, a.registry.as_deref())?;
    let scenes = match &a.scenes_dir {
        Some(dir) => SceneStore::open(dir)?,
        None => SceneStore::in_memory(),
    };
    let state = Arc::new(ServiceState::new(index, scenes));
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::io("<runtime>", e))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&a.addr)
            .await
            .map_err(|e| Error::io(&a.addr, e))?;
        let addr = listener.local_addr().map_err(|e| Error::io(&a.addr, e))?;
        tracing::info!(%addr, generation = %state.index().generation_hex(), "serving");
        #[cfg(unix)]
        spawn_reloader(state.clone(), a.index.clone(), a.registry.clone());
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        service::serve(listener, state, shutdown)
            .await
            .map_err(|e| Error::io(addr.to_string(), e))
    })
}

/// Reloads the index file on SIGHUP and swaps it in atomically.
#[cfg(unix)]
fn spawn_reloader(state: Arc<ServiceState>, path: std::path::PathBuf, registry: Option<std::path::PathBuf>) {
    use tokio::signal::unix::{signal, SignalKind};
    tokio::spawn(async move {
        let Ok(mut hup) = signal(SignalKind::hangup()) else {
            return;
        };
        while hup.recv().await.is_some() {
            match load_index(&path, registry.as_deref()) {
                Ok(index) => {
                    let generation = index.generation_hex();
                    let old = state.swap_index(index);
                    tracing::info!(from = %old.generation_hex(), to = %generation, "index reloaded");
                }
                Err(e) => tracing::error!(error = %e, "index reload failed; keeping current index"),
            }
        }
    });
}
