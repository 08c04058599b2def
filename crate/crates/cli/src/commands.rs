//! Subcommand implementations.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sybil_lowpass::dataset::sybil_truth;
use sybil_lowpass::eval::{
    auc_masked, detectability_experiment, flip_labels_with, isolated_low_eigenvalues, mix_seed,
    run_experiment, spectral_distribution, ShiftFamily,
};
use sybil_lowpass::{
    detect, detectability_margin, sample_block_model, sample_labels, Dataset, Graph, LabelBudget,
    LabelSet, ScoreVector, SpectrumCache,
};

use crate::args::{DetectArgs, GenerateArgs, InputArgs, SpectrumArgs, SweepArgs};
use crate::config::{parse_methods, Model, RunConfig, Task};

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let mut cfg = RunConfig::default();
    args.model.apply(&mut cfg);
    let params = cfg.block_model(cfg.d_ave)?;
    let pg = sample_block_model(&params, args.seed)?;
    let edges = args.out.join("edges.txt");
    let comms = args.out.join("communities.txt");
    let mut w = create(&edges)?;
    pg.graph.write_edge_list(&mut w)?;
    w.flush()?;
    let mut w = create(&comms)?;
    pg.write_communities(&mut w, cfg.model == Model::Dcsbm)?;
    w.flush()?;
    let phi = pg.phi();
    println!(
        "wrote {} ({} nodes, {} edges) and {}; c_in={} c_out={} phi={:.4} margin={:.4}",
        edges.display(),
        pg.graph.n(),
        pg.graph.num_edges(),
        comms.display(),
        params.c_in,
        params.c_out,
        phi,
        detectability_margin(params.c_in, params.c_out, phi)
    );
    Ok(())
}

fn load_input(input: &InputArgs) -> Result<Option<Dataset>> {
    Ok(match (&input.dataset, &input.edges, &input.communities) {
        (Some(d), _, _) => {
            let dir = resolve_dataset(d, input.datasets_dir.as_deref());
            Some(Dataset::load_dir(&dir).with_context(|| format!("loading {}", dir.display()))?)
        }
        (None, Some(e), Some(c)) => Some(Dataset::load(e, c)?),
        (None, Some(e), None) => Some(Dataset::load_edges(e)?),
        (None, None, _) => None,
    })
}

/// Reads `node sybil|benign` lines (node names as in the edge list).
fn read_labels(path: &Path, ds: &Dataset) -> Result<LabelSet> {
    let reader =
        BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut sybil = Vec::new();
    let mut benign = Vec::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut f = body.split_whitespace();
        let (Some(node), Some(kind)) = (f.next(), f.next()) else {
            bail!(
                "{} line {}: expected `node sybil|benign`",
                path.display(),
                no + 1
            );
        };
        let Some(id) = ds.names.iter().position(|n| n == node) else {
            log::warn!("label for `{node}` ignored: not in the largest component");
            continue;
        };
        match kind {
            "sybil" | "s" => sybil.push(id),
            "benign" | "b" => benign.push(id),
            _ => bail!(
                "{} line {}: label must be sybil or benign",
                path.display(),
                no + 1
            ),
        }
    }
    Ok(LabelSet::new(ds.n(), sybil, benign)?)
}

fn write_scores(path: &Path, scores: &ScoreVector, names: &[String]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "node,score,orientation")?;
    for (name, s) in names.iter().zip(&scores.scores) {
        writeln!(w, "{name},{s:e},{}", scores.orientation.as_str())?;
    }
    w.flush()?;
    Ok(())
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub fn detect_cmd(args: &DetectArgs) -> Result<()> {
    let ds = load_input(&args.input)?.context("give --dataset or --edges")?;
    let methods = parse_methods(&args.method)?;
    let mut params = sybil_lowpass::DetectorParams::default();
    args.params.apply(&mut params);
    if args.auc && !ds.has_communities {
        bail!("--auc needs ground truth: give a community file");
    }
    if args.labels.is_none() && !ds.has_communities {
        bail!("labels need either --labels or a community file to sample from");
    }
    if args.reps == 0 {
        bail!("--reps must be at least 1");
    }
    let benign = ds.benign_communities(args.split_seed);
    let truth = sybil_truth(ds.communities.assignment(), &benign);
    let budget = LabelBudget {
        fraction: args.label_fraction,
        min_count: args.min_labels,
        base: args.label_base,
    };
    let fixed = args
        .labels
        .as_ref()
        .map(|p| read_labels(p, &ds))
        .transpose()?;
    let cache = SpectrumCache::new();
    let mut aucs: Vec<Vec<f64>> = vec![Vec::new(); methods.len()];
    for rep in 0..args.reps {
        let seed = mix_seed(args.seed, 0, rep as u64);
        let labels = match &fixed {
            Some(l) => l.clone(),
            None => sample_labels(
                ds.communities.assignment(),
                &benign,
                budget,
                mix_seed(seed, 2, 0),
            )?,
        };
        let labels = if args.epsilon > 0.0 {
            flip_labels_with(&labels, args.epsilon, args.noise, mix_seed(seed, 3, 0))?
        } else {
            labels
        };
        let mask: Option<Vec<bool>> = args
            .exclude_training
            .then(|| (0..ds.n()).map(|i| !labels.is_labeled(i)).collect());
        for (mi, &m) in methods.iter().enumerate() {
            let scores = detect(m, &ds.graph, &labels, &params, Some(&cache))
                .with_context(|| format!("running {m}"))?;
            if rep == 0 {
                write_scores(
                    &args.out.join(format!("scores_{m}.csv")),
                    &scores,
                    &ds.names,
                )?;
            }
            if args.auc {
                aucs[mi].push(auc_masked(&scores, &truth, mask.as_deref())?);
            }
        }
    }
    println!(
        "{} nodes, {} edges; scores in {}",
        ds.n(),
        ds.graph.num_edges(),
        args.out.display()
    );
    if args.auc {
        for (m, a) in methods.iter().zip(&aucs) {
            let (mean, std) = mean_std(a);
            if a.len() > 1 {
                println!("{m}\tauc={mean:.4}\tstd={std:.4}\truns={}", a.len());
            } else {
                println!("{m}\tauc={mean:.4}");
            }
        }
    }
    Ok(())
}

/// Resolves a `--dataset` value: an existing directory, else a name looked
/// up under `datasets_dir`, `./datasets` and the bundled datasets.
fn resolve_dataset(d: &Path, datasets_dir: Option<&Path>) -> PathBuf {
    if d.is_dir() {
        return d.to_path_buf();
    }
    let bundled = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../datasets");
    let found = datasets_dir
        .into_iter()
        .chain([Path::new("datasets"), bundled.as_path()])
        .map(|base| base.join(d))
        .find(|p| p.is_dir());
    found.unwrap_or_else(|| d.to_path_buf())
}

/// Builds the resolved configuration of a sweep from preset, config file
/// and flags, in that order.
pub fn sweep_config(args: &SweepArgs) -> Result<RunConfig> {
    let mut cfg = match args.preset {
        Some(p) => p.config(args.quick),
        None => RunConfig::default(),
    };
    if let Some(path) = &args.config {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        // A preset named in the file is the base its other keys apply to.
        let mut from_file = RunConfig::default();
        from_file.apply_text(&text)?;
        if let (Some(p), None) = (from_file.preset, args.preset) {
            cfg = p.config(args.quick);
        }
        cfg.apply_text(&text)?;
    }
    args.model.apply(&mut cfg);
    args.params.apply(&mut cfg.params);
    if let Some(v) = args.reps {
        cfg.reps = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = &args.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &args.values {
        cfg.set("values", v)?;
    }
    if let Some(v) = &args.method {
        cfg.methods = parse_methods(v)?;
    }
    if let Some(v) = args.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = args.noise {
        cfg.noise = v;
    }
    if args.split_seed.is_some() {
        cfg.split_seed = args.split_seed;
    }
    if args.exclude_training {
        cfg.exclude_training = true;
    }
    if let Some(d) = &args.dataset {
        cfg.dataset = Some(d.clone());
    }
    if let Some(d) = cfg.dataset.clone() {
        cfg.dataset = Some(resolve_dataset(&d, args.datasets_dir.as_deref()));
    }
    Ok(cfg)
}

/// Files written by a sweep.
#[derive(Debug)]
pub struct SweepOutput {
    pub files: Vec<PathBuf>,
    pub missing: usize,
}

pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutput> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = cfg.run_name();
    let config_path = dir.join(format!("{name}_config.txt"));
    fs::write(&config_path, cfg.to_text())?;
    let mut files = vec![config_path];
    if cfg.task == Task::Spectrum {
        files.extend(run_spectrum_task(cfg, &dir, &name)?);
        return Ok(SweepOutput { files, missing: 0 });
    }
    let spec = cfg.to_spec()?;
    let table = match cfg.task {
        Task::Auc => run_experiment(&spec)?,
        Task::Detectability => detectability_experiment(&spec)?,
        Task::Spectrum => unreachable!(),
    };
    let raw = dir.join(format!("{name}_raw.csv"));
    let agg = dir.join(format!("{name}_aggregate.csv"));
    let mut w = create(&raw)?;
    table.write_raw_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&agg)?;
    table.write_aggregate_csv(&mut w)?;
    w.flush()?;
    for a in table.aggregates() {
        println!(
            "{}\t{}\tmean={:.4}\tstd={:.4}\tn={}",
            a.method, a.sweep, a.mean, a.std, a.n
        );
    }
    let missing = table.missing();
    if missing > 0 {
        log::warn!("{missing} cells failed; see the log above");
    }
    files.push(raw);
    files.push(agg);
    Ok(SweepOutput { files, missing })
}

fn write_spectra(
    g: &Graph,
    labels: &LabelSet,
    families: &[ShiftFamily],
    window: usize,
    prefix: &Path,
    summary: &mut impl Write,
    tag: &str,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for (fam, spec) in spectral_distribution(g, labels, families)? {
        let path = PathBuf::from(format!("{}_{fam}.csv", prefix.display()));
        let mut w = create(&path)?;
        spec.write_eigenvalues_csv(&mut w)?;
        w.flush()?;
        let iso = isolated_low_eigenvalues(spec.eigenvalues(), window);
        writeln!(summary, "{tag}{fam},{iso},{}", g.n())?;
        println!("{tag}{fam}\tisolated={iso}\tn={}", g.n());
        files.push(path);
    }
    Ok(files)
}

const ISOLATED_WINDOW: usize = 10;

fn run_spectrum_task(cfg: &RunConfig, dir: &Path, name: &str) -> Result<Vec<PathBuf>> {
    let summary_path = dir.join(format!("{name}_isolated.csv"));
    let mut summary = create(&summary_path)?;
    writeln!(summary, "d_ave,shift,isolated,n")?;
    let mut files = Vec::new();
    for (i, &d) in cfg.values.iter().enumerate() {
        let seed = mix_seed(cfg.seed, i as u64, 0);
        let pg = sample_block_model(&cfg.block_model(d)?, mix_seed(seed, 1, 0))?;
        let (pg, _) = pg.largest_connected_component();
        let benign: Vec<usize> = (0..pg.k.div_ceil(2)).collect();
        let budget = LabelBudget {
            fraction: cfg.label_fraction,
            min_count: cfg.min_labels,
            base: cfg.label_base,
        };
        let labels = sample_labels(&pg.communities, &benign, budget, mix_seed(seed, 2, 0))?;
        let prefix = dir.join(format!("{name}_d{d}"));
        files.extend(write_spectra(
            &pg.graph,
            &labels,
            &cfg.shifts,
            ISOLATED_WINDOW,
            &prefix,
            &mut summary,
            &format!("{d},"),
        )?);
    }
    summary.flush()?;
    files.push(summary_path);
    Ok(files)
}

/// Dense eigensolvers recurse deeply; the default 2 MiB is not enough for
/// n in the thousands.
const WORKER_STACK: usize = 64 << 20;

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let cfg = sweep_config(args)?;
    if args.dump_config {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let out = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .stack_size(WORKER_STACK)
        .build()?
        .install(|| run_sweep(&cfg))?;
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

pub fn spectrum(args: &SpectrumArgs) -> Result<()> {
    let families: Vec<ShiftFamily> = if args.shift == "all" {
        ShiftFamily::ALL.to_vec()
    } else {
        args.shift
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_, _>>()?
    };
    let (graph, communities, has_comm, name) = match load_input(&args.input)? {
        Some(ds) => {
            let comm = ds.communities.assignment().to_vec();
            (ds.graph, comm, ds.has_communities, ds.name)
        }
        None => {
            let mut cfg = RunConfig::default();
            args.model.apply(&mut cfg);
            let pg = sample_block_model(&cfg.block_model(cfg.d_ave)?, args.seed)?;
            let (pg, _) = pg.largest_connected_component();
            (
                pg.graph,
                pg.communities,
                true,
                cfg.model.as_str().to_string(),
            )
        }
    };
    let k = communities.iter().max().map_or(1, |m| m + 1);
    let benign: Vec<usize> = (0..k.div_ceil(2)).collect();
    let families: Vec<ShiftFamily> = if has_comm && k >= 2 {
        families
    } else {
        log::warn!("no community split: skipping the augmented Laplacian");
        families
            .into_iter()
            .filter(|f| *f != ShiftFamily::Augmented)
            .collect()
    };
    let labels = if families.contains(&ShiftFamily::Augmented) {
        sample_labels(
            &communities,
            &benign,
            LabelBudget::per_region(0.1),
            mix_seed(args.seed, 2, 0),
        )?
    } else {
        LabelSet::empty()
    };
    let summary_path = args.out.join(format!("{name}_isolated.csv"));
    let mut summary = create(&summary_path)?;
    writeln!(summary, "shift,isolated,n")?;
    let files = write_spectra(
        &graph,
        &labels,
        &families,
        args.window,
        &args.out.join(format!("{name}_eigenvalues")),
        &mut summary,
        "",
    )?;
    summary.flush()?;
    for f in files.iter().chain([&summary_path]) {
        println!("wrote {}", f.display());
    }
    Ok(())
}
