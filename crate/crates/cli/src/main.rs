//! `cadlabel` command-line front end.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::json;

use cadlabel::cloud::{read_ascii, read_cloud_file, voxel_subsample, write_ascii, write_cloud_file};
use cadlabel::ingest::{load_scene, write_scene, ClassManifest};
use cadlabel::labeler::{compute_pseudo_labels, LabelOptions, LabelReport, DEFAULT_GRID_CELL};
use cadlabel::metrics::{confusion, report, row_normalize_rounded};
use cadlabel::scenegen::{build_scene, sample_cloud, RoomSpec};
use cadlabel::taxonomy::simplify_cloud;
use cadlabel::{class_histogram, Error, LabelColumn, LabeledCloud, TaxonomyId, ThresholdPolicy};

#[derive(Parser, Debug)]
#[command(name = "cadlabel", version, about = "Pseudo-label indoor point clouds from classed CAD meshes")]
struct Cli {
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Print reports as JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic room: meshes, manifest and labeled cloud.
    Gen(GenArgs),
    /// Pseudo-label a cloud against a scene directory.
    Label(LabelArgs),
    /// Map Gold labels onto the Silver taxonomy.
    Simplify(SimplifyArgs),
    /// Score predicted labels against reference labels.
    Eval(EvalArgs),
    /// Point count, extent and per-class histograms.
    Stats(StatsArgs),
    /// Keep one point per voxel.
    Subsample(SubsampleArgs),
    /// Convert between the binary and ASCII cloud formats.
    Convert(ConvertArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Room spec (TOML). Without it the built-in furnished room is used.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory; receives scene/, manifest.txt and cloud.pcl.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct LabelArgs {
    #[arg(long)]
    cloud: PathBuf,
    /// Directory of per-object .obj files.
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    /// Defaults to the cloud's taxonomy.
    #[arg(long)]
    taxonomy: Option<TaxonomyId>,
    /// Threshold override `Class=VALUE`, VALUE in meters or with a `cm`
    /// suffix; `default=VALUE` sets the fallback. Repeatable.
    #[arg(long = "tau", value_name = "CLASS=VALUE")]
    tau: Vec<String>,
    /// Culling grid cell in meters; does not change the labels.
    #[arg(long, default_value_t = DEFAULT_GRID_CELL)]
    grid_cell: f64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the per-object timing report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimplifyArgs {
    #[arg(long)]
    cloud: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// One cloud: its real labels are the reference, its pseudo labels the prediction.
    #[arg(long, conflicts_with_all = ["reference", "predicted"])]
    cloud: Option<PathBuf>,
    /// Cloud whose real labels are the reference.
    #[arg(long, requires = "predicted")]
    reference: Option<PathBuf>,
    /// Cloud whose pseudo labels are the prediction.
    #[arg(long, requires = "reference")]
    predicted: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    cloud: PathBuf,
    /// Timing report written by `label --report`, summarized per class.
    #[arg(long)]
    label_report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SubsampleArgs {
    #[arg(long)]
    cloud: PathBuf,
    /// Voxel edge in meters.
    #[arg(long, default_value_t = 0.01)]
    cell: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Output format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    to: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Binary,
    Ascii,
}

impl Format {
    fn of(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("txt" | "asc" | "xyz") => Format::Ascii,
            _ => Format::Binary,
        }
    }
}

type Res<T> = Result<T, Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            return fail(&Error::Invariant(format!("thread pool: {e}")));
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("cadlabel: error: {}: {}", e.kind(), e);
    ExitCode::from(exit_code(e))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::IoPath { .. } => 1,
        Error::Invariant(_) => 3,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Res<()> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, cli.json),
        Command::Label(a) => cmd_label(a, cli.json),
        Command::Simplify(a) => cmd_simplify(a),
        Command::Eval(a) => cmd_eval(a, cli.json),
        Command::Stats(a) => cmd_stats(a, cli.json),
        Command::Subsample(a) => cmd_subsample(a, cli.json),
        Command::Convert(a) => cmd_convert(a),
    }
}

fn need_file(path: &Path) -> Res<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(not_found(path))
    }
}

fn need_dir(path: &Path) -> Res<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(not_found(path))
    }
}

fn not_found(path: &Path) -> Error {
    Error::IoPath { path: path.to_path_buf(), source: std::io::Error::from(std::io::ErrorKind::NotFound) }
}

/// The directory an output file goes into must exist.
fn need_parent(path: &Path) -> Res<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => need_dir(p),
        _ => Ok(()),
    }
}

fn read_any(path: &Path) -> Res<LabeledCloud> {
    need_file(path)?;
    match Format::of(path) {
        Format::Binary => read_cloud_file(path),
        Format::Ascii => {
            let file = File::open(path).map_err(|e| Error::IoPath { path: path.into(), source: e })?;
            let mut cloud = read_ascii(BufReader::new(file))?;
            cloud.scan_id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(cloud)
        }
    }
}

fn write_as(cloud: &LabeledCloud, path: &Path, format: Format) -> Res<()> {
    match format {
        Format::Binary => write_cloud_file(cloud, path),
        Format::Ascii => {
            let file = File::create(path).map_err(|e| Error::IoPath { path: path.into(), source: e })?;
            write_ascii(cloud, BufWriter::new(file))
        }
    }
}

fn write_any(cloud: &LabeledCloud, path: &Path) -> Res<()> {
    write_as(cloud, path, Format::of(path))
}

fn print_json(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("json value serializes"));
}

fn cmd_gen(a: &GenArgs, json_out: bool) -> Res<()> {
    let mut spec = match &a.spec {
        Some(path) => {
            need_file(path)?;
            RoomSpec::read(path)?
        }
        None => RoomSpec::standard(),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let scene = build_scene(&spec)?;
    let cloud = sample_cloud(&scene, &spec)?;
    let scene_dir = a.out.join("scene");
    let manifest = write_scene(&scene, &scene_dir)?;
    let manifest_path = a.out.join("manifest.txt");
    fs::write(&manifest_path, manifest.to_string()).map_err(|e| Error::IoPath { path: manifest_path.clone(), source: e })?;
    let cloud_path = a.out.join("cloud.pcl");
    write_cloud_file(&cloud, &cloud_path)?;
    if json_out {
        print_json(json!({
            "objects": scene.len(),
            "points": cloud.len(),
            "scene": scene_dir,
            "manifest": manifest_path,
            "cloud": cloud_path,
        }));
    } else {
        println!("objects\t{}", scene.len());
        println!("points\t{}", cloud.len());
        println!("scene\t{}", scene_dir.display());
        println!("manifest\t{}", manifest_path.display());
        println!("cloud\t{}", cloud_path.display());
    }
    Ok(())
}

/// Parses `Class=VALUE` overrides into `policy`. VALUE is meters, or
/// centimeters with a `cm` suffix.
fn apply_tau_overrides(policy: &mut ThresholdPolicy, taxonomy: TaxonomyId, overrides: &[String]) -> Res<()> {
    let tax = taxonomy.taxonomy();
    for raw in overrides {
        let (class, value) = raw
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("--tau '{raw}': expected CLASS=VALUE")))?;
        let tau = parse_distance(value.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("--tau '{raw}': bad distance '{value}'")))?;
        if tau < 0.0 {
            return Err(Error::InvalidArgument(format!("--tau '{raw}': distance must be >= 0")));
        }
        let class = class.trim();
        if class.eq_ignore_ascii_case("default") {
            policy.default_tau = tau;
        } else {
            policy.set(tax.resolve(class)?, tau)?;
        }
    }
    policy.validate()
}

fn parse_distance(s: &str) -> Option<f64> {
    let (num, scale) = match s.strip_suffix("cm") {
        Some(n) => (n, 0.01),
        None => (s.strip_suffix('m').unwrap_or(s), 1.0),
    };
    let v: f64 = num.trim().parse().ok()?;
    v.is_finite().then_some(v * scale)
}

fn cmd_label(a: &LabelArgs, json_out: bool) -> Res<()> {
    need_file(&a.cloud)?;
    need_dir(&a.scene)?;
    need_file(&a.manifest)?;
    need_parent(&a.out)?;
    if let Some(r) = &a.report {
        need_parent(r)?;
    }
    if !(a.grid_cell.is_finite() && a.grid_cell > 0.0) {
        return Err(Error::InvalidArgument(format!("--grid-cell must be positive, got {}", a.grid_cell)));
    }

    let mut cloud = read_any(&a.cloud)?;
    let taxonomy = a.taxonomy.unwrap_or(cloud.taxonomy);
    let mut policy = ThresholdPolicy::for_taxonomy(taxonomy);
    apply_tau_overrides(&mut policy, taxonomy, &a.tau)?;
    let manifest = ClassManifest::read(&a.manifest)?;
    let scene = load_scene(&a.scene, &manifest, taxonomy)?;
    info!("{} objects, {} points", scene.len(), cloud.len());

    let (labels, rep) = compute_pseudo_labels(&cloud, &scene, &policy, LabelOptions { grid_cell: a.grid_cell })?;
    cloud.pseudo_label = labels;
    write_any(&cloud, &a.out)?;
    if let Some(path) = &a.report {
        fs::write(path, rep.to_text()).map_err(|e| Error::IoPath { path: path.clone(), source: e })?;
    }
    if json_out {
        print_json(serde_json::to_value(&rep).expect("report serializes"));
    } else {
        print_label_report(&rep);
    }
    Ok(())
}

fn print_label_report(rep: &LabelReport) {
    let tax = rep.taxonomy.taxonomy();
    println!("{:>5}  {:<14} {:>10} {:>10} {:>10}  name", "id", "class", "seconds", "claimed", "tested");
    for o in &rep.objects {
        println!(
            "{:>5}  {:<14} {:>10.4} {:>10} {:>10}  {}",
            o.object_id, o.class_name, o.elapsed_s, o.claimed, o.candidates, o.name
        );
    }
    println!();
    println!("{:<14} {:>10} {:>12}", "class", "seconds", "points");
    for (c, secs, _) in rep.class_timing() {
        println!("{:<14} {:>10.4} {:>12}", tax.name(c), secs, rep.class_counts[c as usize]);
    }
    println!();
    println!("points {}  clutter fallback {}  non-finite {}  total {:.3} s",
        rep.points, rep.clutter_fallback, rep.non_finite, rep.total_elapsed_s);
}

fn cmd_simplify(a: &SimplifyArgs) -> Res<()> {
    need_parent(&a.out)?;
    let cloud = read_any(&a.cloud)?;
    write_any(&simplify_cloud(&cloud)?, &a.out)
}

fn cmd_eval(a: &EvalArgs, json_out: bool) -> Res<()> {
    let (reference, predicted) = match (&a.cloud, &a.reference, &a.predicted) {
        (Some(c), None, None) => {
            let cloud = read_any(c)?;
            (cloud.clone(), cloud)
        }
        (None, Some(r), Some(p)) => (read_any(r)?, read_any(p)?),
        _ => return Err(Error::InvalidArgument("give --cloud, or --reference with --predicted".into())),
    };
    if reference.taxonomy != predicted.taxonomy {
        return Err(Error::TaxonomyMismatch {
            cloud: predicted.taxonomy.to_string(),
            expected: reference.taxonomy.to_string(),
        });
    }
    let tax = reference.taxonomy.taxonomy();
    let m = confusion(reference.labels(LabelColumn::Real), predicted.labels(LabelColumn::Pseudo), tax.len())?;
    let r = report(&m)?;
    let normalized = row_normalize_rounded(&m, 1);
    if json_out {
        print_json(json!({
            "taxonomy": reference.taxonomy,
            "classes": tax.names,
            "points": m.total(),
            "skipped_unlabeled": m.skipped_unlabeled,
            "report": r,
            "confusion": (0..m.k).map(|i| m.counts[i * m.k..(i + 1) * m.k].to_vec()).collect::<Vec<_>>(),
            "row_normalized_percent": normalized,
        }));
        return Ok(());
    }
    let pct = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.2}", 100.0 * x));
    println!("{:<14} {:>8} {:>8} {:>12}", "class", "IoU%", "recall%", "reference");
    for c in 0..m.k {
        println!("{:<14} {:>8} {:>8} {:>12}", tax.names[c], pct(r.iou[c]), pct(r.recall[c]), m.row_sum(c));
    }
    println!();
    println!("mIoU {:.2}%  OA {:.2}%  AA {:.2}%  points {}  skipped {}",
        100.0 * r.miou, 100.0 * r.oa, 100.0 * r.aa, m.total(), m.skipped_unlabeled);
    println!();
    println!("row-normalized confusion (%), rows = reference, columns = predicted");
    print!("{:<14}", "");
    for c in 0..m.k {
        print!(" {:>5}", c);
    }
    println!();
    for (i, row) in normalized.iter().enumerate() {
        print!("{:<14}", tax.names[i]);
        for v in row {
            print!(" {:>5.1}", v);
        }
        println!();
    }
    Ok(())
}

fn cmd_stats(a: &StatsArgs, json_out: bool) -> Res<()> {
    if let Some(r) = &a.label_report {
        need_file(r)?;
    }
    let cloud = read_any(&a.cloud)?;
    let tax = cloud.taxonomy.taxonomy();
    let real = class_histogram(&cloud, LabelColumn::Real);
    let pseudo = class_histogram(&cloud, LabelColumn::Pseudo);
    let extent = cloud.extent();
    let timing = match &a.label_report {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::IoPath { path: path.clone(), source: e })?;
            Some(LabelReport::parse_text(&text)?)
        }
        None => None,
    };
    if json_out {
        let timing = timing.map(|objects| serde_json::to_value(objects).expect("timings serialize"));
        print_json(json!({
            "taxonomy": cloud.taxonomy,
            "points": cloud.len(),
            "extent": { "min": extent.min, "max": extent.max },
            "classes": tax.names,
            "real": real,
            "pseudo": pseudo,
            "objects": timing,
        }));
        return Ok(());
    }
    println!("taxonomy {}  points {}", cloud.taxonomy, cloud.len());
    if extent.is_empty() {
        println!("extent   (empty)");
    } else {
        println!("extent   [{:.3}, {:.3}, {:.3}] .. [{:.3}, {:.3}, {:.3}]",
            extent.min.x, extent.min.y, extent.min.z, extent.max.x, extent.max.y, extent.max.z);
    }
    println!();
    println!("{:<14} {:>12} {:>12}", "class", "real", "pseudo");
    for c in 0..tax.len() {
        println!("{:<14} {:>12} {:>12}", tax.names[c], real.counts[c], pseudo.counts[c]);
    }
    println!("{:<14} {:>12} {:>12}", "(unlabeled)", real.unlabeled, pseudo.unlabeled);
    if let Some(objects) = timing {
        let mut per_class = vec![(0.0f64, 0u64, 0usize); tax.len()];
        for o in &objects {
            if let Some(e) = per_class.get_mut(o.class_id as usize) {
                e.0 += o.elapsed_s;
                e.1 += o.claimed;
                e.2 += 1;
            }
        }
        println!();
        println!("{:<14} {:>8} {:>10} {:>12}", "class", "objects", "seconds", "claimed");
        for (c, (secs, claimed, n)) in per_class.iter().enumerate().filter(|(_, e)| e.2 > 0) {
            println!("{:<14} {:>8} {:>10.4} {:>12}", tax.names[c], n, secs, claimed);
        }
    }
    Ok(())
}

fn cmd_subsample(a: &SubsampleArgs, json_out: bool) -> Res<()> {
    if !(a.cell.is_finite() && a.cell > 0.0) {
        return Err(Error::InvalidArgument(format!("--cell must be positive, got {}", a.cell)));
    }
    need_parent(&a.out)?;
    let cloud = read_any(&a.cloud)?;
    let out = voxel_subsample(&cloud, a.cell);
    write_any(&out, &a.out)?;
    if json_out {
        print_json(json!({ "input": cloud.len(), "output": out.len(), "cell": a.cell }));
    } else {
        println!("{} -> {} points (cell {} m)", cloud.len(), out.len(), a.cell);
    }
    Ok(())
}

fn cmd_convert(a: &ConvertArgs) -> Res<()> {
    need_parent(&a.output)?;
    let cloud = read_any(&a.input)?;
    let format = a.to.unwrap_or_else(|| Format::of(&a.output));
    write_as(&cloud, &a.output, format)?;
    let _ = std::io::stdout().flush();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        assert_eq!(parse_distance("10cm"), Some(0.1));
        assert_eq!(parse_distance("0.15"), Some(0.15));
        assert_eq!(parse_distance("0.15m"), Some(0.15));
        assert_eq!(parse_distance("4 cm"), Some(0.04));
        assert_eq!(parse_distance("abc"), None);
        assert_eq!(parse_distance("inf"), None);
    }

    #[test]
    fn overrides() {
        let mut p = ThresholdPolicy::for_taxonomy(TaxonomyId::Gold);
        let args = ["Wall=10cm".to_string(), "exit_sign=0.2".into(), "default=5cm".into()];
        apply_tau_overrides(&mut p, TaxonomyId::Gold, &args).unwrap();
        assert_eq!(p.tau(15), 0.1);
        assert_eq!(p.tau(5), 0.2);
        assert_eq!(p.tau(0), 0.05);
        assert_eq!(p.tau(4), 0.10);
        for bad in ["Wall", "Wall=-1cm", "Sofa=1cm", "Wall=x"] {
            let r = apply_tau_overrides(&mut p, TaxonomyId::Gold, &[bad.to_string()]);
            assert!(r.is_err(), "{bad}");
        }
    }

    #[test]
    fn formats_by_extension() {
        assert_eq!(Format::of(Path::new("a.txt")), Format::Ascii);
        assert_eq!(Format::of(Path::new("a.PCL")), Format::Binary);
        assert_eq!(Format::of(Path::new("a")), Format::Binary);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&not_found(Path::new("x"))), 1);
        assert_eq!(exit_code(&Error::LengthMismatch { left: 1, right: 2 }), 2);
        assert_eq!(exit_code(&Error::Invariant("x".into())), 3);
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
