//! Benchmark matrices: instances x methods, resumable records, summary
//! tables and performance profiles.
//!
//! A manifest looks like
//!
//! ```toml
//! time_limit = 60.0
//!
//! [instances]
//! presets = ["small:0-23"]
//! seeds = [1, 2, 3]
//!
//! [[methods]]
//! label = "lbbd"
//! method = "lbbd-exact"
//! warm-start = "greedy"
//!
//! [[methods]]
//! method = "mip-direct"
//! backend = "external"
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Deserialize;

use wildfire_lbbd::instance::{self, generate_grid, preset, random_instance, Instance};
use wildfire_lbbd::milp::ExternalConfig;

use crate::run::{self, Params, RunRecord};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSet {
    /// `small:3`, `small:0-23`, `small:*`, `large:L2B`, `large:*` or
    /// `random`.
    #[serde(default)]
    pub presets: Vec<String>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Instance files, relative to the manifest.
    #[serde(default)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct MethodEntry {
    pub label: String,
    pub params: Params,
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub instances: InstanceSet,
    pub methods: Vec<MethodEntry>,
    pub base: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    time_limit: Option<f64>,
    instances: InstanceSet,
    methods: Vec<toml::Table>,
}

impl Manifest {
    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let raw: RawManifest = toml::from_str(text).map_err(|e| e.to_string())?;
        let mut methods = Vec::new();
        let mut labels = HashSet::new();
        for (i, mut table) in raw.methods.into_iter().enumerate() {
            let label = match table.remove("label") {
                Some(toml::Value::String(s)) => Some(s),
                Some(_) => return Err(format!("methods[{i}].label must be a string")),
                None => None,
            };
            let mut params: Params = table.try_into().map_err(|e| format!("methods[{i}]: {e}"))?;
            if params.time_limit.is_none() {
                params.time_limit = raw.time_limit;
            }
            if let run::WarmStart::File(p) = &params.warm_start {
                params.warm_start = run::WarmStart::File(base.join(p));
            }
            let label = label.unwrap_or_else(|| params.method.to_string());
            if !labels.insert(label.clone()) {
                return Err(format!("duplicate method label `{label}`"));
            }
            methods.push(MethodEntry { label, params });
        }
        if methods.is_empty() {
            return Err("the manifest lists no methods".into());
        }
        Ok(Manifest {
            instances: raw.instances,
            methods,
            base: base.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Every instance of the matrix, in manifest order.
    pub fn sources(&self) -> Result<Vec<Source>, String> {
        let mut out = Vec::new();
        let seeds = if self.instances.seeds.is_empty() {
            vec![1]
        } else {
            self.instances.seeds.clone()
        };
        for pattern in &self.instances.presets {
            let names = expand_preset(pattern)?;
            for &seed in &seeds {
                for name in &names {
                    out.push(Source::Preset {
                        name: name.clone(),
                        seed,
                    });
                }
            }
        }
        for f in &self.instances.files {
            out.push(Source::File(self.base.join(f)));
        }
        Ok(out)
    }
}

/// Expands the range and wildcard forms of a preset name.
pub fn expand_preset(pattern: &str) -> Result<Vec<String>, String> {
    if pattern == "random" {
        return Ok(vec![pattern.to_string()]);
    }
    if pattern == "small:*" {
        return expand_preset("small:0-23");
    }
    if pattern == "large:*" {
        return Ok((0..8)
            .flat_map(|r| ["A", "B"].map(|k| format!("large:L{r}{k}")))
            .collect());
    }
    if let Some((lo, hi)) = pattern
        .strip_prefix("small:")
        .and_then(|r| r.split_once('-'))
    {
        let bad = || format!("bad preset range `{pattern}`");
        let lo: usize = lo.parse().map_err(|_| bad())?;
        let hi: usize = hi.parse().map_err(|_| bad())?;
        return Ok((lo..=hi).map(|i| format!("small:{i}")).collect());
    }
    preset(pattern, 1).map_err(|e| e.to_string())?;
    Ok(vec![pattern.to_string()])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Preset { name: String, seed: u64 },
    File(PathBuf),
}

impl Source {
    pub fn instance(&self) -> Result<Instance, String> {
        match self {
            Source::Preset { name, seed } if name == "random" => {
                Ok(random_instance(*seed).with_id(format!("random-s{seed}")))
            }
            Source::Preset { name, seed } => {
                let spec = preset(name, *seed).map_err(|e| e.to_string())?;
                let inst = generate_grid(&spec).map_err(|e| e.to_string())?;
                Ok(inst.with_id(format!("{}-s{seed}", name.replace(':', "-"))))
            }
            Source::File(path) => {
                instance::load(path).map_err(|e| format!("{}: {e}", path.display()))
            }
        }
    }
}

/// Reads the records of a records file, skipping lines that do not parse.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>, String> {
    let file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(format!("{}: {e}", path.display())),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => out.push(r),
            Err(e) => eprintln!("{}:{}: skipping record: {e}", path.display(), i + 1),
        }
    }
    Ok(out)
}

pub struct BenchOptions {
    pub jobs: usize,
    pub time_limit: Option<f64>,
    pub external: Option<ExternalConfig>,
    pub quiet: bool,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct BenchTally {
    pub ran: usize,
    pub skipped: usize,
    pub failed: usize,
}

/// Runs every (instance, method) pair of `manifest` whose config hash is
/// not yet in `out_dir/records.jsonl`, then rewrites the summaries.
pub fn bench(
    manifest: &Manifest,
    out_dir: &Path,
    options: &BenchOptions,
) -> Result<BenchTally, String> {
    std::fs::create_dir_all(out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;
    let records_path = out_dir.join("records.jsonl");
    let done: HashSet<String> = read_records(&records_path)?
        .into_iter()
        .map(|r| r.config_hash)
        .collect();
    repair_tail(&records_path)?;
    let sources = manifest.sources()?;
    let jobs: Vec<(Source, MethodEntry)> = sources
        .iter()
        .flat_map(|s| manifest.methods.iter().map(move |m| (s.clone(), m.clone())))
        .collect();
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&records_path)
        .map_err(|e| format!("{}: {e}", records_path.display()))?;
    let sink = Mutex::new(file);
    let tally = Mutex::new(BenchTally::default());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..options.jobs.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((source, entry)) = jobs.get(i) else {
                    break;
                };
                let result = run_job(source, entry, options, &done);
                let mut t = tally.lock().unwrap();
                match result {
                    Ok(None) => t.skipped += 1,
                    Ok(Some(rec)) => {
                        let line = serde_json::to_string(&rec).expect("records serialize");
                        let mut f = sink.lock().unwrap();
                        if let Err(e) = writeln!(f, "{line}").and_then(|_| f.flush()) {
                            eprintln!("cannot append record: {e}");
                            t.failed += 1;
                            continue;
                        }
                        if !options.quiet {
                            eprintln!("{}", rec.summary());
                        }
                        t.ran += 1;
                    }
                    Err(e) => {
                        eprintln!("{} on {source:?}: {e}", entry.label);
                        t.failed += 1;
                    }
                }
            });
        }
    });
    let records = read_records(&records_path)?;
    let labels: Vec<String> = manifest.methods.iter().map(|m| m.label.clone()).collect();
    write_summaries(&records, &labels, out_dir)?;
    Ok(tally.into_inner().unwrap())
}

fn run_job(
    source: &Source,
    entry: &MethodEntry,
    options: &BenchOptions,
    done: &HashSet<String>,
) -> Result<Option<RunRecord>, String> {
    let inst = source.instance()?;
    let mut params = entry.params.clone();
    if options.time_limit.is_some() {
        params.time_limit = options.time_limit;
    }
    let hash = run::config_hash(&inst, &params).map_err(|e| e.to_string())?;
    if done.contains(&hash) {
        return Ok(None);
    }
    let outcome = run::run(&inst, &params, options.external.as_ref()).map_err(|e| e.to_string())?;
    Ok(Some(run::record(
        &inst,
        &entry.label,
        &params,
        &outcome,
        hash,
    )))
}

/// Terminates a final line cut short by an interrupted run.
fn repair_tail(path: &Path) -> Result<(), String> {
    let Ok(bytes) = std::fs::read(path) else {
        return Ok(());
    };
    if bytes.last().is_some_and(|&b| b != b'\n') {
        let mut f = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| e.to_string())?;
        f.write_all(b"\n").map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn group_of(r: &RunRecord) -> String {
    r.grid
        .clone()
        .unwrap_or_else(|| format!("{} nodes", r.nodes))
}

/// Per-instance table with objective, bound, time and cut counts for each
/// method label.
pub fn instance_table(records: &[RunRecord], labels: &[String]) -> String {
    let mut by_instance: BTreeMap<&str, BTreeMap<&str, &RunRecord>> = BTreeMap::new();
    for r in records {
        by_instance
            .entry(r.instance.as_str())
            .or_default()
            .insert(r.label.as_str(), r);
    }
    let mut out = String::from("| Instance |");
    let mut rule = String::from("|---|");
    for l in labels {
        let _ = write!(out, " {l} Obj | LB | Time (s) | Opt Cuts | Feas Cuts |");
        rule.push_str("---:|---:|---:|---:|---:|");
    }
    out.push('\n');
    out.push_str(&rule);
    out.push('\n');
    let show = |v: Option<u32>| v.map_or("-".to_string(), |v| v.to_string());
    for (inst, runs) in &by_instance {
        let _ = write!(out, "| {inst} |");
        for l in labels {
            match runs.get(l.as_str()) {
                Some(r) => {
                    let _ = write!(
                        out,
                        " {} | {} | {:.2} | {} | {} |",
                        show(r.objective),
                        show(r.lower_bound),
                        r.wall_time,
                        r.optimality_cuts,
                        r.feasibility_cuts
                    );
                }
                None => out.push_str(" | | | | |"),
            }
        }
        out.push('\n');
    }
    out
}

/// Mean and standard deviation of the run time per instance group and
/// method label, with the number of runs proven optimal.
pub fn group_table(records: &[RunRecord], labels: &[String]) -> String {
    let mut groups: BTreeMap<(String, &str), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((group_of(r), r.label.as_str()))
            .or_default()
            .push(r);
    }
    let mut out = String::from(
        "| Group | Method | Runs | Optimal | Mean Time (s) | SD Time (s) | Mean Obj |\n|---|---|---:|---:|---:|---:|---:|\n",
    );
    let mut keys: Vec<&(String, &str)> = groups.keys().collect();
    keys.sort_by_key(|(g, l)| {
        let rank = labels.iter().position(|x| x == l).unwrap_or(usize::MAX);
        (g.clone(), rank)
    });
    for key in keys {
        let runs = &groups[key];
        let times: Vec<f64> = runs.iter().map(|r| r.wall_time).collect();
        let objs: Vec<f64> = runs
            .iter()
            .filter_map(|r| r.objective.map(f64::from))
            .collect();
        let (mean, sd) = mean_sd(&times);
        let optimal = runs.iter().filter(|r| r.status == "optimal").count();
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {:.3} | {:.3} | {:.2} |",
            key.0,
            key.1,
            runs.len(),
            optimal,
            mean,
            sd,
            mean_sd(&objs).0
        );
    }
    out
}

/// Cumulative fraction of runs proven optimal within each time, per label:
/// `(label, [(time, fraction)])`, times ascending.
pub fn profile(records: &[RunRecord], labels: &[String]) -> Vec<(String, Vec<(f64, f64)>)> {
    labels
        .iter()
        .map(|l| {
            let runs: Vec<&RunRecord> = records.iter().filter(|r| &r.label == l).collect();
            let mut times: Vec<f64> = runs
                .iter()
                .filter(|r| r.status == "optimal")
                .map(|r| r.wall_time)
                .collect();
            times.sort_by(f64::total_cmp);
            let total = runs.len().max(1) as f64;
            let points = times
                .iter()
                .enumerate()
                .map(|(i, &t)| (t, (i + 1) as f64 / total))
                .collect();
            (l.clone(), points)
        })
        .collect()
}

pub fn profile_csv(curves: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut out = String::from("method,time_s,solved_fraction\n");
    for (l, points) in curves {
        for (t, f) in points {
            let _ = writeln!(out, "{l},{t:.6},{f:.6}");
        }
    }
    out
}

/// Step plot of the profile on a logarithmic time axis.
pub fn profile_svg(curves: &[(String, Vec<(f64, f64)>)]) -> String {
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    ];
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let all: Vec<f64> = curves
        .iter()
        .flat_map(|(_, p)| p.iter().map(|x| x.0.max(1e-3)))
        .collect();
    let lo = all
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .min(1.0)
        .log10()
        .floor();
    let hi = all
        .iter()
        .copied()
        .fold(1.0, f64::max)
        .log10()
        .ceil()
        .max(lo + 1.0);
    let x = |t: f64| pad + (t.max(1e-3).log10() - lo) / (hi - lo) * (w - 2.0 * pad);
    let y = |f: f64| h - pad - f * (h - 2.0 * pad);
    let mut out = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">
<rect width="{w}" height="{h}" fill="white"/>
"#
    );
    let _ = writeln!(
        out,
        r#"<path d="M{pad},{pad} V{} H{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad
    );
    for e in (lo as i32)..=(hi as i32) {
        let px = x(10f64.powi(e));
        let _ = writeln!(
            out,
            r#"<text x="{px}" y="{}" text-anchor="middle">1e{e}</text>"#,
            h - pad + 16.0
        );
    }
    for k in 0..=4 {
        let f = f64::from(k) / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{:.0}%</text>"#,
            pad - 6.0,
            y(f) + 4.0,
            f * 100.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">time (s)</text>"#,
        w / 2.0,
        h - 10.0
    );
    for (i, (label, points)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = format!("M{},{}", x(10f64.powf(lo)), y(0.0));
        let mut last = 0.0;
        for &(t, f) in points {
            let _ = write!(d, " H{:.2} V{:.2}", x(t), y(f));
            last = f;
        }
        let _ = write!(d, " H{:.2}", x(10f64.powf(hi)));
        let _ = writeln!(
            out,
            r#"<path class="profile" d="{d}" fill="none" stroke="{color}" stroke-width="2"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{label} ({:.0}%)</text>"#,
            pad + 10.0,
            pad + 16.0 * (i as f64 + 1.0),
            last * 100.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Writes `summary.md`, `profile.csv` and `profile.svg`. Labels found in
/// the records but not in `labels` are appended.
pub fn write_summaries(
    records: &[RunRecord],
    labels: &[String],
    out_dir: &Path,
) -> Result<(), String> {
    let mut labels = labels.to_vec();
    for r in records {
        if !labels.contains(&r.label) {
            labels.push(r.label.clone());
        }
    }
    let summary = format!(
        "# Benchmark summary\n\n{} records.\n\n## By group\n\n{}\n## By instance\n\n{}",
        records.len(),
        group_table(records, &labels),
        instance_table(records, &labels)
    );
    let curves = profile(records, &labels);
    let write = |name: &str, text: String| {
        let p = out_dir.join(name);
        std::fs::write(&p, text).map_err(|e| format!("{}: {e}", p.display()))
    };
    write("summary.md", summary)?;
    write("profile.csv", profile_csv(&curves))?;
    write("profile.svg", profile_svg(&curves))
}
