//! Command-line interface. Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use skintone_core::analysis::{agreement_matrix, fairness_by_type, type_distribution};
use skintone_core::splits::{
    datashift_split, stratified_split, stratified_split_with_test_size, Subset,
};

use crate::batch::{list_images, run_batch, BatchOptions, MethodChoice};
use crate::config::{default_config_hash, Settings};
use crate::error::{Error, Result};
use crate::report::{
    agreement_table, distribution_series, distribution_table, fairness_series, fairness_table,
    svg_grouped_bars, type_labels,
};
use crate::synth::{load_corpus_spec, write_corpus};
use crate::tables::{
    load_labels, load_predictions, load_tones, save_agreement, save_distribution, save_fairness,
    save_id_list, save_splits, save_tones,
};

#[derive(Debug, Parser)]
#[command(
    name = "skintone",
    about = "Estimate skin tone (ITA) from dermoscopy images and analyse subgroup fairness",
    disable_version_flag = true
)]
struct Cli {
    /// Settings file (`key = value` lines), applied before --set and flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set ght.tau=0.1`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Seed for splits and synthetic corpora.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the version and the hash of the default settings.
    #[arg(long)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate ITA for every image in a directory and write a tones CSV.
    Estimate(EstimateArgs),
    /// Cross-tabulate the skin types of two tones CSVs.
    Compare(CompareArgs),
    /// Skin-type distribution of a tones CSV.
    Distribution(DistributionArgs),
    /// Classification metrics per skin type.
    Fairness(FairnessArgs),
    /// Train/validation/test split (baseline or data shift).
    Split(SplitArgs),
    /// Generate a synthetic corpus with known ITA.
    Synth(SynthArgs),
    /// Bundle distributions, agreement and fairness into one report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// dlhss, colorseg, rp, rp2 or ght.
    #[arg(long, value_parser = parse_method)]
    method: MethodChoice,
    /// Directory of .png/.jpg images; the file stem is the image id.
    #[arg(long, value_name = "DIR")]
    images: PathBuf,
    /// Directory with `<id>_mask.png` healthy-skin masks (required for dlhss).
    #[arg(long, value_name = "DIR")]
    masks: Option<PathBuf>,
    /// Directory with optional `<id>_lesion.png` masks (rp, rp2 diagnostics).
    #[arg(long, value_name = "DIR")]
    lesion_masks: Option<PathBuf>,
    /// Tones CSV.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, value_name = "FILE")]
    a: PathBuf,
    #[arg(long, value_name = "FILE")]
    b: PathBuf,
    /// ITA at or below which both rows count as dark.
    #[arg(long)]
    dark_cutoff: Option<f64>,
    /// 6x6 matrix CSV.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Jointly dark ids, one per line; defaults to `<out stem>_dark_ids.txt`.
    #[arg(long, value_name = "FILE")]
    dark_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DistributionArgs {
    #[arg(long, value_name = "FILE")]
    tones: PathBuf,
    /// Distribution CSV.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Bar chart.
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FairnessArgs {
    /// `image_id,true_label,pred_label` CSV.
    #[arg(long, value_name = "FILE")]
    preds: PathBuf,
    #[arg(long, value_name = "FILE")]
    tones: PathBuf,
    /// Per-type metrics CSV.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Balanced-accuracy bar chart.
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitModeArg {
    Baseline,
    Datashift,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long, value_enum)]
    mode: SplitModeArg,
    /// `image_id,label` CSV, or a predictions CSV (its true labels are used).
    #[arg(long, value_name = "FILE")]
    labels: PathBuf,
    /// Tones CSV (datashift mode).
    #[arg(long, value_name = "FILE")]
    tones: Option<PathBuf>,
    /// Train,val,test ratios (baseline mode).
    #[arg(long, value_name = "R,R,R")]
    ratios: Option<String>,
    /// Exact test-set size (baseline mode).
    #[arg(long)]
    test_size: Option<usize>,
    /// ITA cutoff separating training and test images (datashift mode).
    #[arg(long)]
    cutoff: Option<f64>,
    /// Split CSV.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Corpus spec (`key = value` lines).
    #[arg(long, value_name = "FILE")]
    spec: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Tones CSVs, one per method. Repeatable.
    #[arg(long, value_name = "FILE", required = true)]
    tones: Vec<PathBuf>,
    #[arg(long, value_name = "FILE")]
    preds: Option<PathBuf>,
    #[arg(long)]
    dark_cutoff: Option<f64>,
    /// Output directory for report.txt and SVG charts.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

fn parse_method(s: &str) -> std::result::Result<MethodChoice, String> {
    s.parse()
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Usage(_)) {
                eprintln!("\nFor more information, try '--help'.");
            }
            e.exit_code()
        }
    }
}

fn version_text() -> String {
    format!(
        "skintone {}\ndefault config sha256 {}",
        env!("CARGO_PKG_VERSION"),
        default_config_hash()
    )
}

fn resolve_settings(cli: &Cli) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &cli.config {
        s.apply_file(path)?;
    }
    for pair in &cli.overrides {
        s.set_pair(pair)?;
    }
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn echo(command: &str, details: &[(&str, String)], settings: &Settings) {
    let mut text = format!("# skintone {} {command}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in details {
        text.push_str(&format!("# {k} = {v}\n"));
    }
    for line in settings.render().lines() {
        text.push_str(&format!("# {line}\n"));
    }
    eprint!("{text}");
}

fn require_dir(path: &Path) -> Result<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "directory not found"),
        ))
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ))
    }
}

/// The parent directory of an output file must already exist.
fn require_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => require_dir(dir),
        _ => Ok(()),
    }
}

fn show(p: &Path) -> String {
    p.display().to_string()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn run(cli: Cli) -> Result<()> {
    if cli.version {
        println!("{}", version_text());
        return Ok(());
    }
    let mut settings = resolve_settings(&cli)?;
    let Some(command) = cli.command else {
        return Err(Error::Usage("a subcommand is required".into()));
    };
    match command {
        Command::Estimate(a) => {
            settings.validate()?;
            if a.method == MethodChoice::Dlhss && a.masks.is_none() {
                return Err(Error::Usage("--method dlhss requires --masks".into()));
            }
            echo(
                "estimate",
                &[
                    ("method", a.method.as_str().into()),
                    ("images", show(&a.images)),
                    ("masks", a.masks.as_deref().map(show).unwrap_or_default()),
                    (
                        "lesion_masks",
                        a.lesion_masks.as_deref().map(show).unwrap_or_default(),
                    ),
                    ("out", show(&a.out)),
                ],
                &settings,
            );
            for dir in std::iter::once(&a.images)
                .chain(&a.masks)
                .chain(&a.lesion_masks)
            {
                require_dir(dir)?;
            }
            require_output(&a.out)?;
            let entries = list_images(&a.images)?;
            let opts = BatchOptions {
                method: a.method,
                config: settings.estimator.clone(),
                mask_dir: a.masks,
                lesion_dir: a.lesion_masks,
            };
            let rows = run_batch(&entries, &opts)?;
            save_tones(&a.out, &rows)?;
            let ok = rows.iter().filter(|r| r.is_ok()).count();
            eprintln!("estimated {} images ({ok} Ok)", rows.len());
        }
        Command::Compare(a) => {
            if let Some(c) = a.dark_cutoff {
                settings.dark_cutoff = c;
            }
            settings.validate()?;
            let dark_out = a.dark_out.clone().unwrap_or_else(|| {
                let stem = a
                    .out
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("agreement");
                a.out.with_file_name(format!("{stem}_dark_ids.txt"))
            });
            echo(
                "compare",
                &[
                    ("a", show(&a.a)),
                    ("b", show(&a.b)),
                    ("out", show(&a.out)),
                    ("dark_out", show(&dark_out)),
                ],
                &settings,
            );
            require_output(&a.out)?;
            require_output(&dark_out)?;
            let ta = load_tones(&a.a)?;
            let tb = load_tones(&a.b)?;
            let m = agreement_matrix(&ta, &tb, settings.dark_cutoff);
            save_agreement(&a.out, &m)?;
            save_id_list(&dark_out, &m.joint_dark)?;
            print!("{}", agreement_table(&show(&a.a), &show(&a.b), &m));
        }
        Command::Distribution(a) => {
            echo("distribution", &[("tones", show(&a.tones))], &settings);
            for p in a.out.iter().chain(&a.svg) {
                require_output(p)?;
            }
            let tones = load_tones(&a.tones)?;
            let d = type_distribution(&tones);
            if let Some(out) = &a.out {
                save_distribution(out, &d)?;
            }
            if let Some(svg) = &a.svg {
                let series = [distribution_series(&show(&a.tones), &d)];
                write_text(
                    svg,
                    &svg_grouped_bars("Skin type distribution (%)", &type_labels(), &series, 100.0),
                )?;
            }
            print!("{}", distribution_table(&show(&a.tones), &d));
        }
        Command::Fairness(a) => {
            echo(
                "fairness",
                &[("preds", show(&a.preds)), ("tones", show(&a.tones))],
                &settings,
            );
            for p in a.out.iter().chain(&a.svg) {
                require_output(p)?;
            }
            let preds = load_predictions(&a.preds)?;
            let tones = load_tones(&a.tones)?;
            let report = fairness_by_type(&preds, &tones).map_err(|e| Error::data(&a.tones, e))?;
            if let Some(out) = &a.out {
                save_fairness(out, &report)?;
            }
            if let Some(svg) = &a.svg {
                let series = [fairness_series(&show(&a.tones), &report)];
                write_text(
                    svg,
                    &svg_grouped_bars(
                        "Balanced accuracy per skin type",
                        &type_labels(),
                        &series,
                        1.0,
                    ),
                )?;
            }
            print!("{}", fairness_table(&show(&a.tones), &report));
        }
        Command::Split(a) => run_split(a, settings)?,
        Command::Synth(a) => {
            echo(
                "synth",
                &[("spec", show(&a.spec)), ("out", show(&a.out))],
                &settings,
            );
            let mut spec = load_corpus_spec(&a.spec)?;
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
            let rows = write_corpus(&spec, &a.spec, &a.out)?;
            eprintln!("wrote {} synthetic images (seed {})", rows.len(), spec.seed);
        }
        Command::Report(a) => {
            if let Some(c) = a.dark_cutoff {
                settings.dark_cutoff = c;
            }
            settings.validate()?;
            echo("report", &[("out", show(&a.out))], &settings);
            run_report(&a, &settings)?;
        }
    }
    Ok(())
}

fn run_split(a: SplitArgs, mut settings: Settings) -> Result<()> {
    if let Some(r) = &a.ratios {
        settings.set("split.ratios", r).map_err(Error::Usage)?;
    }
    if let Some(c) = a.cutoff {
        settings.split_cutoff = c;
    }
    settings.validate()?;
    let mode = match a.mode {
        SplitModeArg::Baseline => "baseline",
        SplitModeArg::Datashift => "datashift",
    };
    echo(
        "split",
        &[
            ("mode", mode.into()),
            ("labels", show(&a.labels)),
            ("tones", a.tones.as_deref().map(show).unwrap_or_default()),
            (
                "test_size",
                a.test_size.map(|n| n.to_string()).unwrap_or_default(),
            ),
            ("out", show(&a.out)),
        ],
        &settings,
    );
    require_output(&a.out)?;
    let records = load_labels(&a.labels)?;
    let split = match a.mode {
        SplitModeArg::Baseline => {
            if a.tones.is_some() {
                return Err(Error::Usage(
                    "--tones is only used in datashift mode".into(),
                ));
            }
            match a.test_size {
                Some(n) => stratified_split_with_test_size(
                    &records,
                    settings.split_ratios,
                    settings.seed,
                    n,
                ),
                None => stratified_split(&records, settings.split_ratios, settings.seed),
            }
            .map_err(|e| Error::data(&a.labels, e))?
        }
        SplitModeArg::Datashift => {
            if a.test_size.is_some() {
                return Err(Error::Usage(
                    "--test-size is only used in baseline mode".into(),
                ));
            }
            let tones_path = a
                .tones
                .as_ref()
                .ok_or_else(|| Error::Usage("datashift mode requires --tones".into()))?;
            require_file(tones_path)?;
            let tones = load_tones(tones_path)?;
            datashift_split(&tones, &records, settings.seed, settings.split_cutoff)
                .map_err(|e| Error::data(tones_path, e))?
        }
    };
    save_splits(&a.out, &split)?;
    eprintln!(
        "train {}, val {}, test {}, skipped {}",
        split.count(Subset::Train),
        split.count(Subset::Val),
        split.count(Subset::Test),
        split.skipped.len()
    );
    Ok(())
}

fn label_of(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("tones")
        .to_string()
}

fn run_report(a: &ReportArgs, settings: &Settings) -> Result<()> {
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut tables = Vec::new();
    for p in &a.tones {
        tables.push((label_of(p), p, load_tones(p)?));
    }
    let preds = a.preds.as_deref().map(load_predictions).transpose()?;

    let mut text = String::from("Skin tone report\n================\n\n");
    let mut dist_series = Vec::new();
    for (name, _, rows) in &tables {
        let d = type_distribution(rows);
        text.push_str(&distribution_table(name, &d));
        text.push('\n');
        dist_series.push(distribution_series(name, &d));
    }
    write_text(
        &a.out.join("distribution.svg"),
        &svg_grouped_bars(
            "Skin type distribution (%)",
            &type_labels(),
            &dist_series,
            100.0,
        ),
    )?;

    for (i, (na, _, ra)) in tables.iter().enumerate() {
        for (nb, _, rb) in &tables[i + 1..] {
            let m = agreement_matrix(ra, rb, settings.dark_cutoff);
            text.push_str(&agreement_table(na, nb, &m));
            text.push('\n');
        }
    }

    if let (Some(preds), Some(preds_path)) = (&preds, &a.preds) {
        let mut ba_series = Vec::new();
        for (name, path, rows) in &tables {
            match fairness_by_type(preds, rows) {
                Ok(r) => {
                    text.push_str(&fairness_table(name, &r));
                    ba_series.push(fairness_series(name, &r));
                }
                Err(e) => text.push_str(&format!(
                    "Per-type classification metrics: {name}: {e} ({} vs {})\n",
                    show(preds_path),
                    show(path)
                )),
            }
            text.push('\n');
        }
        write_text(
            &a.out.join("fairness.svg"),
            &svg_grouped_bars(
                "Balanced accuracy per skin type",
                &type_labels(),
                &ba_series,
                1.0,
            ),
        )?;
    }
    write_text(&a.out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}
