//! Markdown summary of a comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use trajmatch_core::analysis::{SeriesRow, SimilarityMatrix, SERIES_COLUMNS};

use crate::manifest::file_digest;
use crate::CliError;

pub struct ReportInputs<'a> {
    pub matrix_path: &'a Path,
    pub matrix: &'a SimilarityMatrix,
    pub series_path: Option<&'a Path>,
    pub series: &'a [SeriesRow],
    pub top_k: usize,
}

/// Report text plus the per-pair series extracts it links to.
pub struct Report {
    pub markdown: String,
    pub extracts: Vec<(PathBuf, String)>,
}

fn file_stub(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Directory holding per-pair series extracts for report `out`.
pub fn extract_dir(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_series"))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn pair_rows<'r>(series: &'r [SeriesRow], a: &str, b: &str) -> Vec<&'r SeriesRow> {
    series
        .iter()
        .filter(|r| (r.algorithm_a == a && r.algorithm_b == b) || (r.algorithm_a == b && r.algorithm_b == a))
        .collect()
}

fn series_csv(rows: &[&SeriesRow]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(SERIES_COLUMNS).map_err(CliError::internal)?;
    for r in rows {
        w.serialize(r).map_err(CliError::internal)?;
    }
    let bytes = w.into_inner().map_err(CliError::internal)?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn build(inputs: &ReportInputs<'_>, out: &Path) -> Result<Report, CliError> {
    let ranked = inputs.matrix.ranked_pairs();
    let top: Vec<_> = ranked.iter().take(inputs.top_k).collect();
    let mut md = String::new();
    let mut extracts = Vec::new();

    writeln!(md, "# Algorithm similarity report\n").unwrap();
    writeln!(
        md,
        "- matrix: `{}` (sha256 `{}`)",
        inputs.matrix_path.display(),
        file_digest(inputs.matrix_path)?
    )
    .unwrap();
    if let Some(p) = inputs.series_path {
        writeln!(md, "- series: `{}` (sha256 `{}`)", p.display(), file_digest(p)?).unwrap();
    }
    writeln!(md, "- algorithms: {}\n", inputs.matrix.ids().join(", ")).unwrap();

    writeln!(md, "## Most similar pairs\n").unwrap();
    writeln!(md, "Overall similarity, highest first; ties ordered by algorithm id.\n").unwrap();
    writeln!(md, "| rank | algorithm a | algorithm b | similarity |").unwrap();
    writeln!(md, "|---:|---|---|---:|").unwrap();
    for (rank, (a, b, s)) in top.iter().enumerate() {
        writeln!(md, "| {} | {a} | {b} | {s:.6} |", rank + 1).unwrap();
    }
    writeln!(md).unwrap();

    if inputs.series_path.is_none() {
        return Ok(Report { markdown: md, extracts });
    }

    let dir = extract_dir(out);
    let dir_name = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut supplementary = Vec::new();
    writeln!(md, "## Statistic series\n").unwrap();
    writeln!(md, "| algorithm a | algorithm b | file | runs | tests | rejected |").unwrap();
    writeln!(md, "|---|---|---|---:|---:|---:|").unwrap();
    for (a, b, _) in &top {
        let rows = pair_rows(inputs.series, a, b);
        let mut runs: BTreeMap<(&str, usize, usize), (usize, usize)> = BTreeMap::new();
        for r in &rows {
            let e = runs.entry((r.problem.as_str(), r.dim, r.run)).or_default();
            e.0 += 1;
            e.1 += usize::from(r.rejected);
        }
        let rejected: usize = runs.values().map(|v| v.1).sum();
        let name = format!("{}__{}.csv", file_stub(a), file_stub(b));
        writeln!(
            md,
            "| {a} | {b} | [`{dir_name}/{name}`]({dir_name}/{name}) | {} | {} | {rejected} |",
            runs.len(),
            rows.len()
        )
        .unwrap();
        extracts.push((dir.join(&name), series_csv(&rows)?));
        let mut per_run: Vec<f64> = runs.values().map(|&(n, r)| 1.0 - r as f64 / n as f64).collect();
        if !per_run.is_empty() {
            let mean = per_run.iter().sum::<f64>() / per_run.len() as f64;
            supplementary.push((a, b, median(&mut per_run), mean));
        }
    }
    writeln!(md).unwrap();

    writeln!(md, "## Supplementary: median per-run similarity\n").unwrap();
    writeln!(
        md,
        "Not part of the similarity score, which is a mean. The median over all runs \
         is shown only as a robustness check; the mean column pools runs across \
         dimensions and can differ from the overall score.\n"
    )
    .unwrap();
    writeln!(md, "| algorithm a | algorithm b | median | pooled mean |").unwrap();
    writeln!(md, "|---|---|---:|---:|").unwrap();
    for (a, b, med, mean) in supplementary {
        writeln!(md, "| {a} | {b} | {med:.6} | {mean:.6} |").unwrap();
    }
    Ok(Report { markdown: md, extracts })
}

pub fn write(report: &Report, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    if let Some((first, _)) = report.extracts.first() {
        let dir = first.parent().expect("extract path has a parent");
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    for (path, text) in &report.extracts {
        fs::write(path, text).map_err(|e| CliError::io(path, e))?;
        written.push(path.clone());
    }
    fs::write(out, &report.markdown).map_err(|e| CliError::io(out, e))?;
    written.push(out.to_owned());
    Ok(written)
}
