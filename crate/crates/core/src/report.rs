//! CSV persistence and summary tables.
//!
//! Every file starts with `#` metadata lines. The timestamp sits on its own
//! line so that two runs can be compared after dropping it. Floats are written
//! with 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sem::EnvDataset;
use crate::trainer::{Method, SweepReport, SweepRow};
use crate::SUITE_VERSION;

pub const SUITE_NAME: &str = "ibirm";
pub const SWEEP_COLUMNS: [&str; 11] = [
    "example",
    "n_envs",
    "method",
    "data_seed",
    "hparam_id",
    "lambda",
    "gamma",
    "lr",
    "val_risk",
    "test_metric",
    "test_metric_worst",
];
pub const SUMMARY_COLUMNS: [&str; 6] = ["example", "n_envs", "method", "mean_metric", "std_metric", "n_seeds"];

/// Metadata written at the top of every output file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub root_seed: u64,
    pub config_hash: String,
    pub timestamp: Option<String>,
}

impl Header {
    /// Header stamped with the current Unix time.
    pub fn now(root_seed: u64, config_hash: impl Into<String>) -> Self {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            root_seed,
            config_hash: config_hash.into(),
            timestamp: Some(secs.to_string()),
        }
    }

    pub fn without_timestamp(root_seed: u64, config_hash: impl Into<String>) -> Self {
        Self {
            root_seed,
            config_hash: config_hash.into(),
            timestamp: None,
        }
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "# suite={SUITE_NAME} version={SUITE_VERSION} root_seed={} config_hash={}\n",
            self.root_seed, self.config_hash
        );
        if let Some(t) = &self.timestamp {
            let _ = writeln!(s, "# timestamp={t}");
        }
        s
    }
}

/// Hex SHA-256 of a canonical config serialization, truncated to 16 digits.
pub fn config_hash(canonical: &[u8]) -> String {
    Sha256::digest(canonical)
        .iter()
        .take(8)
        .fold(String::with_capacity(16), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Lossless float formatting: 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

/// Remove `# timestamp=` lines; what remains must be identical across reruns.
pub fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# timestamp="))
        .fold(String::new(), |mut s, l| {
            s.push_str(l);
            s.push('\n');
            s
        })
}

/// Write via a sibling temporary file and rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::from(e)
    })
}

pub fn sweep_to_csv(report: &SweepReport, header: &Header) -> String {
    let mut s = header.render();
    s.push_str(&SWEEP_COLUMNS.join(","));
    s.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.example,
            r.n_envs,
            r.method.name(),
            r.data_seed,
            r.hparam_id,
            fmt_f64(r.lambda),
            fmt_f64(r.gamma),
            fmt_f64(r.lr),
            fmt_f64(r.val_risk),
            fmt_f64(r.test_metric),
            fmt_f64(r.test_metric_worst),
        );
    }
    s
}

fn parse_err(file: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Parse a sweep CSV; `file` only labels error messages.
pub fn parse_sweep_csv(text: &str, file: &str) -> Result<SweepReport> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.starts_with('#') || raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if !seen_header {
            if fields != SWEEP_COLUMNS {
                return Err(parse_err(file, line, format!("unexpected header `{raw}`")));
            }
            seen_header = true;
            continue;
        }
        if fields.len() != SWEEP_COLUMNS.len() {
            return Err(parse_err(
                file,
                line,
                format!("expected {} fields, found {}", SWEEP_COLUMNS.len(), fields.len()),
            ));
        }
        let int = |k: usize| {
            fields[k]
                .parse::<usize>()
                .map_err(|_| parse_err(file, line, format!("bad integer in column {}", SWEEP_COLUMNS[k])))
        };
        let real = |k: usize| {
            fields[k]
                .parse::<f64>()
                .map_err(|_| parse_err(file, line, format!("bad number in column {}", SWEEP_COLUMNS[k])))
        };
        rows.push(SweepRow {
            example: fields[0].to_string(),
            n_envs: int(1)?,
            method: Method::parse(fields[2])
                .ok_or_else(|| parse_err(file, line, format!("unknown method `{}`", fields[2])))?,
            data_seed: int(3)?,
            hparam_id: int(4)?,
            lambda: real(5)?,
            gamma: real(6)?,
            lr: real(7)?,
            val_risk: real(8)?,
            test_metric: real(9)?,
            test_metric_worst: real(10)?,
        });
    }
    if !seen_header {
        return Err(parse_err(file, text.lines().count(), "missing column header"));
    }
    Ok(SweepReport { rows })
}

pub fn read_sweep_csv(path: &Path) -> Result<SweepReport> {
    let text = std::fs::read_to_string(path)?;
    parse_sweep_csv(&text, &path.display().to_string())
}

/// `env_id,y,x_0..[,zinv_..,zspu_..]`, latents only when present.
pub fn dataset_to_csv(env: &EnvDataset, header: &Header) -> String {
    let mut s = header.render();
    let mut cols = vec!["env_id".to_string(), "y".to_string()];
    cols.extend((0..env.x.cols()).map(|j| format!("x_{j}")));
    if let Some(z) = &env.z_inv {
        cols.extend((0..z.cols()).map(|j| format!("zinv_{j}")));
    }
    if let Some(z) = &env.z_spu {
        cols.extend((0..z.cols()).map(|j| format!("zspu_{j}")));
    }
    s.push_str(&cols.join(","));
    s.push('\n');
    for i in 0..env.len() {
        let _ = write!(s, "{},{}", env.env_id, fmt_f64(env.y[i]));
        let mut push_row = |r: &[f64]| {
            for v in r {
                s.push(',');
                s.push_str(&fmt_f64(*v));
            }
        };
        push_row(env.x.row(i));
        if let Some(z) = &env.z_inv {
            push_row(z.row(i));
        }
        if let Some(z) = &env.z_spu {
            push_row(z.row(i));
        }
        s.push('\n');
    }
    s
}

/// Rows of `(t, w_inv, w_spu, ratio)`.
pub fn trajectory_to_csv(rows: &[[f64; 4]], header: &Header) -> String {
    let mut s = header.render();
    s.push_str("t,w_inv,w_spu,ratio\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", fmt_f64(r[0]), fmt_f64(r[1]), fmt_f64(r[2]), fmt_f64(r[3]));
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub example: String,
    pub n_envs: usize,
    pub method: Method,
    pub mean_metric: f64,
    /// Population standard deviation over seeds.
    pub std_metric: f64,
    pub n_seeds: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Select the best query per seed, then average the test metric over seeds.
/// Groups appear in order of first occurrence.
pub fn aggregate(report: &SweepReport) -> SummaryTable {
    let mut groups: Vec<((String, usize, Method), Vec<f64>)> = Vec::new();
    for row in report.selected() {
        let key = (row.example.clone(), row.n_envs, row.method);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(row.test_metric),
            None => groups.push((key, vec![row.test_metric])),
        }
    }
    SummaryTable {
        rows: groups
            .into_iter()
            .map(|((example, n_envs, method), v)| {
                let (mean_metric, std_metric) = mean_std(&v);
                SummaryRow {
                    example,
                    n_envs,
                    method,
                    mean_metric,
                    std_metric,
                    n_seeds: v.len(),
                }
            })
            .collect(),
    }
}

/// Read and merge sweep files, then [`aggregate`].
pub fn aggregate_report<P: AsRef<Path>>(paths: &[P]) -> Result<SummaryTable> {
    let mut all = SweepReport::default();
    for p in paths {
        all.rows.extend(read_sweep_csv(p.as_ref())?.rows);
    }
    Ok(aggregate(&all))
}

impl SummaryTable {
    pub fn get(&self, example: &str, method: Method) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.example == example && r.method == method)
    }

    pub fn to_csv(&self, header: &Header) -> String {
        let mut s = header.render();
        s.push_str(&SUMMARY_COLUMNS.join(","));
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.example,
                r.n_envs,
                r.method.name(),
                fmt_f64(r.mean_metric),
                fmt_f64(r.std_metric),
                r.n_seeds
            );
        }
        s
    }

    /// Fixed-width table with `mean ± std` to two decimals.
    pub fn to_text(&self) -> String {
        let mut s = format!("{:<8} {:>6} {:<8} {:>14} {:>7}\n", "example", "envs", "method", "metric", "seeds");
        for r in &self.rows {
            let cell = format!("{:.2} ± {:.2}", r.mean_metric, r.std_metric);
            let _ = writeln!(
                s,
                "{:<8} {:>6} {:<8} {:>14} {:>7}",
                r.example,
                r.n_envs,
                r.method.name(),
                cell,
                r.n_seeds
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(seed: usize, q: usize, val: f64, test: f64) -> SweepRow {
        SweepRow {
            example: "ex2".into(),
            n_envs: 3,
            method: Method::IbErm,
            data_seed: seed,
            hparam_id: q,
            lambda: 0.0,
            gamma: 0.5,
            lr: 0.01,
            val_risk: val,
            test_metric: test,
            test_metric_worst: test,
        }
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE, f64::MAX, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert!(fmt_f64(f64::NAN).parse::<f64>().unwrap().is_nan());
        assert_eq!(fmt_f64(f64::INFINITY).parse::<f64>().unwrap(), f64::INFINITY);
    }

    #[test]
    fn single_row_summary() {
        let t = aggregate(&SweepReport {
            rows: vec![row(0, 0, 0.1, 0.37)],
        });
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].mean_metric, 0.37);
        assert_eq!(t.rows[0].std_metric, 0.0);
    }

    #[test]
    fn two_seed_population_std() {
        let t = aggregate(&SweepReport {
            rows: vec![row(0, 0, 0.1, 0.4), row(1, 0, 0.1, 0.5)],
        });
        assert!((t.rows[0].mean_metric - 0.45).abs() < 1e-15);
        assert!((t.rows[0].std_metric - 0.05).abs() < 1e-15);
    }

    #[test]
    fn selection_uses_validation_risk() {
        let t = aggregate(&SweepReport {
            rows: vec![row(0, 0, 0.3, 0.9), row(0, 1, 0.1, 0.2), row(0, 2, f64::INFINITY, f64::NAN)],
        });
        assert_eq!(t.rows[0].mean_metric, 0.2);
    }

    #[test]
    fn sweep_csv_round_trip() {
        let rep = SweepReport {
            rows: vec![row(0, 0, 0.123456789, 0.4), row(0, 1, f64::INFINITY, f64::NAN)],
        };
        let text = sweep_to_csv(&rep, &Header::now(7, "abc"));
        let back = parse_sweep_csv(&text, "mem").unwrap();
        assert_eq!(back.rows[0], rep.rows[0]);
        assert!(back.rows[1].test_metric.is_nan());
        assert_eq!(aggregate(&back), aggregate(&rep));
    }

    #[test]
    fn parse_errors_name_file_and_line() {
        let text = "# x\nexample,n_envs\n";
        match parse_sweep_csv(text, "a.csv") {
            Err(Error::Parse { file, line, .. }) => assert_eq!((file.as_str(), line), ("a.csv", 2)),
            other => panic!("{other:?}"),
        }
        let good = sweep_to_csv(&SweepReport { rows: vec![row(0, 0, 0.1, 0.2)] }, &Header::now(1, "h"));
        let bad = good.replace("IB-ERM", "SGD");
        match parse_sweep_csv(&bad, "b.csv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_and_timestamp_stripping() {
        let h = Header::now(42, config_hash(b"{}"));
        let text = h.render();
        assert!(text.starts_with("# suite=ibirm"));
        assert!(text.contains("root_seed=42"));
        assert!(!strip_timestamp(&text).contains("timestamp"));
        assert_eq!(config_hash(b"{}").len(), 16);
    }

    #[test]
    fn text_table_format() {
        let t = aggregate(&SweepReport {
            rows: vec![row(0, 0, 0.1, 0.4), row(1, 0, 0.1, 0.5)],
        });
        assert!(t.to_text().contains("0.45 ± 0.05"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("ibirm-report-{}", std::process::id()));
        let p = dir.join("f.csv");
        write_atomic(&p, "a").unwrap();
        write_atomic(&p, "b").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b");
        std::fs::remove_dir_all(dir).unwrap();
    }
}
