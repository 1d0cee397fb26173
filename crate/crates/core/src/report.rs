//! CSV and JSON output.
//!
//! A CSV document is a block of `#` comment lines (tool, version, seed,
//! config) followed by a body: the header row and one row per SNR point, LF
//! line endings, `.` decimals. Bodies depend only on the numbers, so reruns
//! with the same seed give byte-identical bodies.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::simulator::{OutagePoint, SnrPoint};
use crate::Result;

pub const CSV_HEADER: &str = "snr_db,trials,errors,pe,ci_lo,ci_hi";

fn row(out: &mut String, snr_db: f64, trials: u64, errors: u64, p: f64, lo: f64, hi: f64) {
    writeln!(out, "{snr_db},{trials},{errors},{p:.9e},{lo:.9e},{hi:.9e}").expect("writing to a String");
}

pub fn error_csv_body(points: &[SnrPoint]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for p in points {
        row(&mut out, p.snr_db, p.trials, p.errors, p.pe, p.ci_lo, p.ci_hi);
    }
    out
}

/// Outage rows reuse the error columns: `errors` holds the hit count.
pub fn outage_csv_body(points: &[OutagePoint]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for p in points {
        row(&mut out, p.snr_db, p.trials, p.hits, p.p, p.ci_lo, p.ci_hi);
    }
    out
}

/// Prefixes `body` with one `# key: value` line per entry.
pub fn csv_document(meta: &[(&str, String)], body: &str) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        // Keep each comment on one line whatever the value contains.
        let v = v.replace(['\n', '\r'], " ");
        writeln!(out, "# {k}: {v}").expect("writing to a String");
    }
    out.push_str(body);
    out
}

/// The non-comment lines of a CSV document.
pub fn csv_body(doc: &str) -> String {
    doc.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(db: f64, e: u64) -> SnrPoint {
        SnrPoint {
            snr_db: db,
            pam_size: 2,
            trials: 1000,
            errors: e,
            pe: e as f64 / 1000.0,
            ci_lo: 0.0,
            ci_hi: 0.5,
            fallbacks: 0,
            mean_nodes: 4.0,
        }
    }

    #[test]
    fn body_layout() {
        let body = error_csv_body(&[point(14.0, 12), point(16.5, 0)]);
        let lines: Vec<&str> = body.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "14,1000,12,1.200000000e-2,0.000000000e0,5.000000000e-1");
        assert!(lines[2].starts_with("16.5,1000,0,"));
        assert!(!body.contains('\r'));
        let doc = csv_document(&[("tool", "x".into()), ("config", "{\n}".into())], &body);
        assert!(doc.starts_with("# tool: x\n# config: { }\n"));
        assert_eq!(csv_body(&doc), body);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("stbc-report-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("a.csv");
        write_atomic(&p, "one\n").unwrap();
        write_atomic(&p, "two\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two\n");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
