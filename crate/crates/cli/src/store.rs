//! Append-only result store with crash-safe resume.
//!
//! - A [`PointSpec`] names one grid point by its physical knobs; its key
//!   string is the resume identity together with the config hash.
//! - `journal.csv` receives one line per finished point, flushed
//!   immediately; it survives a killed sweep.
//! - `finalize` folds the journal into `results.csv` (canonically sorted,
//!   written atomically via a temp file) and deletes the journal, so a
//!   completed store holds one file whose bytes are order-independent.
//! - Every row carries its config hash, point seed, and tool version;
//!   loaders reject unknown schema tags.

use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qeclab_core::analysis::DataPoint;
use qeclab_core::circuit::{Basis, CzErrorSource, NoiseParams, ShuttleChannel};

/// Schema tag of the finalized results table.
pub const RESULTS_VERSION: &str = "rows-v1";
/// Schema tag of the in-flight journal.
pub const JOURNAL_VERSION: &str = "journal-v1";
/// Column header shared by journal and results.
pub const COLUMNS: &str =
    "d,rounds,basis,shuttle,cz_source,cer,ber,shots,failures,p_fail,se,point_seed,config_hash,version";

const RESULTS_FILE: &str = "results.csv";
const JOURNAL_FILE: &str = "journal.csv";

/// Physical identity of one Monte Carlo grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSpec {
    pub d: u32,
    pub rounds: u32,
    pub basis: Basis,
    pub shuttle: ShuttleChannel,
    pub cz_source: CzErrorSource,
    pub cer: f64,
    pub ber: f64,
    pub shots: u64,
}

fn basis_name(b: Basis) -> &'static str {
    match b {
        Basis::Z => "Z",
        Basis::X => "X",
    }
}

fn shuttle_name(s: ShuttleChannel) -> &'static str {
    match s {
        ShuttleChannel::Unbiased => "Unbiased",
        ShuttleChannel::Biased => "Biased",
    }
}

fn cz_name(c: CzErrorSource) -> &'static str {
    match c {
        CzErrorSource::Cer => "Cer",
        CzErrorSource::Ber => "Ber",
    }
}

impl PointSpec {
    /// Canonical key: every physical knob, no bookkeeping. Floats use the
    /// shortest round-trip form, so equal values always print equally.
    pub fn key(&self) -> String {
        format!(
            "d={} rounds={} basis={} shuttle={} cz={} cer={} ber={} shots={}",
            self.d,
            self.rounds,
            basis_name(self.basis),
            shuttle_name(self.shuttle),
            cz_name(self.cz_source),
            self.cer,
            self.ber,
            self.shots
        )
    }

    /// Noise model of this point.
    pub fn noise(&self) -> NoiseParams {
        NoiseParams {
            cer: self.cer,
            ber: self.ber,
            shuttle: self.shuttle,
            cz_source: self.cz_source,
        }
    }
}

/// One finished grid point with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub spec: PointSpec,
    pub failures: u64,
    pub point_seed: u64,
    pub config_hash: String,
    pub version: String,
}

impl Row {
    /// Resume identity within one config.
    pub fn key(&self) -> String {
        self.spec.key()
    }

    /// CSV line; p_fail and se are derived columns for human readers.
    pub fn to_csv(&self) -> String {
        let s = &self.spec;
        let p_fail = self.failures as f64 / s.shots as f64;
        let se = (p_fail * (1.0 - p_fail) / s.shots as f64).sqrt();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.d,
            s.rounds,
            basis_name(s.basis),
            shuttle_name(s.shuttle),
            cz_name(s.cz_source),
            s.cer,
            s.ber,
            s.shots,
            self.failures,
            p_fail,
            se,
            self.point_seed,
            self.config_hash,
            self.version
        )
    }

    /// Parse one CSV line; derived columns are ignored in favor of counts.
    pub fn from_csv(line: &str) -> Result<Row> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 14 {
            bail!("row has {} fields, expected 14: {line:?}", fields.len());
        }
        let basis = match fields[2] {
            "Z" => Basis::Z,
            "X" => Basis::X,
            other => bail!("unknown basis {other:?}"),
        };
        let shuttle = match fields[3] {
            "Unbiased" => ShuttleChannel::Unbiased,
            "Biased" => ShuttleChannel::Biased,
            other => bail!("unknown shuttle channel {other:?}"),
        };
        let cz_source = match fields[4] {
            "Cer" => CzErrorSource::Cer,
            "Ber" => CzErrorSource::Ber,
            other => bail!("unknown cz source {other:?}"),
        };
        let spec = PointSpec {
            d: fields[0].parse().context("d")?,
            rounds: fields[1].parse().context("rounds")?,
            basis,
            shuttle,
            cz_source,
            cer: fields[5].parse().context("cer")?,
            ber: fields[6].parse().context("ber")?,
            shots: fields[7].parse().context("shots")?,
        };
        let row = Row {
            spec,
            failures: fields[8].parse().context("failures")?,
            point_seed: fields[11].parse().context("point_seed")?,
            config_hash: fields[12].to_string(),
            version: fields[13].to_string(),
        };
        if row.failures > spec.shots {
            bail!("row has failures {} > shots {}", row.failures, spec.shots);
        }
        Ok(row)
    }

    /// Analysis-layer view of this row.
    pub fn data_point(&self) -> Result<DataPoint> {
        DataPoint::from_counts(
            self.spec.d,
            self.spec.cer,
            self.spec.ber,
            self.spec.shots,
            self.failures,
        )
        .map_err(Into::into)
    }
}

/// Canonical row order: grid coordinates first, then provenance.
fn canonical_cmp(a: &Row, b: &Row) -> std::cmp::Ordering {
    a.config_hash
        .cmp(&b.config_hash)
        .then(a.spec.d.cmp(&b.spec.d))
        .then(a.spec.cer.total_cmp(&b.spec.cer))
        .then(a.spec.ber.total_cmp(&b.spec.ber))
        .then(a.spec.rounds.cmp(&b.spec.rounds))
        .then(basis_name(a.spec.basis).cmp(basis_name(b.spec.basis)))
        .then(shuttle_name(a.spec.shuttle).cmp(shuttle_name(b.spec.shuttle)))
        .then(cz_name(a.spec.cz_source).cmp(cz_name(b.spec.cz_source)))
        .then(a.spec.shots.cmp(&b.spec.shots))
}

/// Directory-backed store for one experiment output tree.
#[derive(Debug, Clone)]
pub struct Store {
    dir: PathBuf,
}

impl Store {
    /// Open (creating if needed) the store under `dir`.
    pub fn open(dir: &Path) -> Result<Store> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Store { dir: dir.to_path_buf() })
    }

    /// Root directory of the store.
    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Path of the finalized results table.
    pub fn results_path(&self) -> PathBuf {
        self.dir.join(RESULTS_FILE)
    }

    fn journal_path(&self) -> PathBuf {
        self.dir.join(JOURNAL_FILE)
    }

    fn load_table(&self, path: &Path, schema: &str) -> Result<Vec<Row>> {
        if !path.exists() {
            return Ok(vec![]);
        }
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut lines = text.lines();
        match lines.next() {
            Some(first) if first == format!("# {schema}") => {}
            Some(first) => bail!(
                "{}: unknown schema {:?}, this tool reads {schema:?}",
                path.display(),
                first.trim_start_matches("# ")
            ),
            None => bail!("{}: empty table", path.display()),
        }
        let mut rows = vec![];
        for line in lines {
            if line == COLUMNS || line.is_empty() {
                continue;
            }
            rows.push(Row::from_csv(line).with_context(|| format!("in {}", path.display()))?);
        }
        Ok(rows)
    }

    /// Rows already finalized; empty if no results file exists yet.
    pub fn load_results(&self) -> Result<Vec<Row>> {
        self.load_table(&self.results_path(), RESULTS_VERSION)
    }

    /// Rows sitting in the journal of an interrupted run.
    pub fn journal_rows(&self) -> Result<Vec<Row>> {
        self.load_table(&self.journal_path(), JOURNAL_VERSION)
    }

    /// Identities of every stored point: (config hash, point key).
    pub fn completed(&self) -> Result<HashSet<(String, String)>> {
        let mut done = HashSet::new();
        for row in self.load_results()?.iter().chain(self.journal_rows()?.iter()) {
            done.insert((row.config_hash.clone(), row.key()));
        }
        Ok(done)
    }

    /// Append one finished point to the journal, flushing to disk.
    pub fn append_journal(&self, row: &Row) -> Result<()> {
        let path = self.journal_path();
        let fresh = !path.exists();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .with_context(|| format!("opening {}", path.display()))?;
        if fresh {
            writeln!(file, "# {JOURNAL_VERSION}")?;
            writeln!(file, "{COLUMNS}")?;
        }
        writeln!(file, "{}", row.to_csv())?;
        file.flush()?;
        Ok(())
    }

    /// Fold the journal into the results table and delete it.
    ///
    /// Rows are deduplicated by (config hash, key) and sorted canonically, so
    /// the final bytes do not depend on completion order or worker count.
    pub fn finalize(&self) -> Result<usize> {
        let mut rows = self.load_results()?;
        rows.extend(self.journal_rows()?);
        let mut seen = HashSet::new();
        rows.retain(|row| seen.insert((row.config_hash.clone(), row.key())));
        rows.sort_by(canonical_cmp);
        let tmp = self.dir.join(format!("{RESULTS_FILE}.tmp"));
        let mut text = format!("# {RESULTS_VERSION}\n{COLUMNS}\n");
        for row in &rows {
            text.push_str(&row.to_csv());
            text.push('\n');
        }
        fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, self.results_path())?;
        let journal = self.journal_path();
        if journal.exists() {
            fs::remove_file(&journal)?;
        }
        Ok(rows.len())
    }

    /// Finalized rows produced under one config hash.
    pub fn rows_for(&self, config_hash: &str) -> Result<Vec<Row>> {
        Ok(self
            .load_results()?
            .into_iter()
            .filter(|row| row.config_hash == config_hash)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row(d: u32, cer: f64) -> Row {
        Row {
            spec: PointSpec {
                d,
                rounds: d,
                basis: Basis::Z,
                shuttle: ShuttleChannel::Unbiased,
                cz_source: CzErrorSource::Cer,
                cer,
                ber: 0.0,
                shots: 50_000,
            },
            failures: 321,
            point_seed: 0xdead_beef,
            config_hash: "abc123abc123".into(),
            version: "0.1.0".into(),
        }
    }

    #[test]
    fn test_row_csv_round_trip() {
        let row = sample_row(7, 0.0037);
        let parsed = Row::from_csv(&row.to_csv()).unwrap();
        assert_eq!(parsed, row);
        assert!(row.to_csv().starts_with("7,7,Z,Unbiased,Cer,0.0037,0,50000,321,"));
        assert_eq!(
            row.key(),
            "d=7 rounds=7 basis=Z shuttle=Unbiased cz=Cer cer=0.0037 ber=0 shots=50000"
        );
    }

    #[test]
    fn test_malformed_rows_rejected() {
        assert!(Row::from_csv("1,2,3").is_err());
        let row = sample_row(7, 0.0037);
        let bad = row.to_csv().replace(",Z,", ",Q,");
        assert!(Row::from_csv(&bad).is_err());
        let inconsistent = row.to_csv().replace(",321,", ",70000,");
        assert!(Row::from_csv(&inconsistent).is_err());
    }

    #[test]
    fn test_journal_then_finalize_then_idempotent_reload() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.append_journal(&sample_row(9, 0.004)).unwrap();
        store.append_journal(&sample_row(7, 0.003)).unwrap();
        assert_eq!(store.journal_rows().unwrap().len(), 2);
        assert_eq!(store.finalize().unwrap(), 2);
        assert!(!dir.path().join("journal.csv").exists());
        let rows = store.load_results().unwrap();
        // Canonical order puts the smaller distance first regardless of
        // journal arrival order.
        assert_eq!(rows[0].spec.d, 7);
        let first = fs::read(store.results_path()).unwrap();
        // A second finalize (or a duplicate journal entry) changes nothing.
        store.append_journal(&sample_row(7, 0.003)).unwrap();
        assert_eq!(store.finalize().unwrap(), 2);
        assert_eq!(fs::read(store.results_path()).unwrap(), first);
    }

    #[test]
    fn test_unknown_schema_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        fs::write(store.results_path(), "# rows-v9\n").unwrap();
        let err = store.load_results().unwrap_err().to_string();
        assert!(err.contains("rows-v9"), "{err}");
    }

    #[test]
    fn test_completed_merges_results_and_journal() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.append_journal(&sample_row(9, 0.004)).unwrap();
        store.finalize().unwrap();
        store.append_journal(&sample_row(11, 0.004)).unwrap();
        let done = store.completed().unwrap();
        assert_eq!(done.len(), 2);
        assert!(done.contains(&("abc123abc123".into(), sample_row(9, 0.004).key())));
    }
}
