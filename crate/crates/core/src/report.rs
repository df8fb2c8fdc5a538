//! CSV output with a commented manifest header, plus the sidecar manifest
//! that records the run's wall-clock time.

use std::fmt::Write as _;

/// Identifies a run: re-running with the same manifest reproduces the CSV
/// byte for byte.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    pub experiment: String,
    pub config: Vec<(String, String)>,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
    pub wall_clock_secs: Option<f64>,
}

impl RunManifest {
    pub fn new(experiment: &str, seed: u64) -> Self {
        Self { experiment: experiment.into(), seed, version: env!("CARGO_PKG_VERSION").into(), ..Default::default() }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        // kept sorted so the header does not depend on resolution order
        match self.config.binary_search_by(|(k, _)| k.as_str().cmp(key)) {
            Ok(i) => self.config[i].1 = value,
            Err(i) => self.config.insert(i, (key.into(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.config.binary_search_by(|(k, _)| k.as_str().cmp(key)).ok().map(|i| self.config[i].1.as_str())
    }

    /// The `#` header lines; deterministic, no timing.
    pub fn header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# experiment={}", self.experiment);
        let _ = writeln!(s, "# version={}", self.version);
        let _ = writeln!(s, "# seed={}", self.seed);
        for (k, v) in &self.config {
            let _ = writeln!(s, "# {k}={v}");
        }
        s
    }

    /// Sidecar text: the header plus outputs and wall-clock time. The
    /// `key=value` lines are readable by `--config`.
    pub fn sidecar(&self) -> String {
        let mut s = self.header().replace("# ", "");
        for o in &self.outputs {
            let _ = writeln!(s, "output={o}");
        }
        if let Some(t) = self.wall_clock_secs {
            let _ = writeln!(s, "wall_clock_secs={t:.3}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub gamma_db: f64,
    pub user: Option<usize>,
    pub source: String,
    pub value: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub trials: Option<u64>,
}

impl CsvRow {
    pub fn analytic(gamma_db: f64, user: Option<usize>, source: &str, value: f64) -> Self {
        Self { gamma_db, user, source: source.into(), value, ci_lo: None, ci_hi: None, trials: None }
    }
}

pub const CSV_COLUMNS: &str = "gamma_db,user,source,value,ci_lo,ci_hi,trials";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv(manifest: &RunManifest, rows: &[CsvRow]) -> String {
    let mut s = manifest.header();
    s.push_str(CSV_COLUMNS);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.gamma_db,
            opt(r.user),
            r.source,
            r.value,
            opt(r.ci_lo),
            opt(r.ci_hi),
            opt(r.trials)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_then_columns() {
        let mut m = RunManifest::new("conditional", 7);
        m.set("K", 2);
        m.set("K", 3);
        let csv = write_csv(&m, &[CsvRow::analytic(10.0, None, "bound", 0.25)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# experiment=conditional");
        assert!(lines.contains(&"# K=3"));
        assert_eq!(lines[lines.len() - 2], CSV_COLUMNS);
        assert_eq!(lines[lines.len() - 1], "10,,bound,0.25,,,");
    }
}
