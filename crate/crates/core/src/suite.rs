//! Batch runs over the base-case lists.

use std::fmt::{self, Write as _};
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::certs::{round_seconds, Certificate};
use crate::checker::{
    check_configuration_with, matrix_dims, CheckOptions, DefectVerdict, DEFAULT_RETRIES,
};
use crate::families::{base_cases, catalog_lookup, family_eval, Suite};
use crate::ffrank::DEFAULT_PRIME;

/// Default largest matrix (in entries) a suite run will build.
pub const DEFAULT_SIZE_CAP: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub master_seed: u64,
    pub prime: u32,
    pub retries: u32,
    pub size_cap: u64,
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            master_seed: 0,
            prime: DEFAULT_PRIME,
            retries: DEFAULT_RETRIES,
            size_cap: DEFAULT_SIZE_CAP,
            workers: None,
        }
    }
}

/// Seed for one entry: the first eight bytes of
/// `sha256("<master>|<family>|<m>|<n>")`, little endian.
pub fn derive_seed(master: u64, family: &str, m: i64, n: i64) -> u64 {
    let h = Sha256::digest(format!("{master}|{family}|{m}|{n}").as_bytes());
    u64::from_le_bytes(h[..8].try_into().expect("digest is 32 bytes"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntryStatus {
    Checked(DefectVerdict),
    Skipped,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub family: String,
    pub m: i64,
    pub n: i64,
    pub seed: u64,
    pub rows: u64,
    pub cols: u64,
    pub status: EntryStatus,
    pub seconds: f64,
    pub certificate: Option<Certificate>,
}

impl SuiteEntry {
    pub fn passed(&self) -> bool {
        match &self.status {
            EntryStatus::Checked(v) => v.is_nondefective(),
            EntryStatus::Skipped => true,
            EntryStatus::Failed(_) => false,
        }
    }

    fn status_label(&self) -> String {
        match &self.status {
            EntryStatus::Checked(v) => v.outcome.to_string(),
            EntryStatus::Skipped => "SKIPPED(size)".into(),
            EntryStatus::Failed(e) => format!("ERROR({e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    /// True when no entry failed; skipped entries count as passing.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(SuiteEntry::passed)
    }

    pub fn skipped(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.status == EntryStatus::Skipped)
            .count()
    }

    /// Tab-separated table with a header row.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from(
            "family\tm\tn\tseed\trows\tcols\tstatus\tdim\texpected\tabundancy\tseconds\n",
        );
        for e in &self.entries {
            let (dim, exp, ab) = match &e.status {
                EntryStatus::Checked(v) => (
                    v.computed_dim.to_string(),
                    v.expected_dim.to_string(),
                    v.abundancy.to_string(),
                ),
                _ => ("-".into(), "-".into(), "-".into()),
            };
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{dim}\t{exp}\t{ab}\t{}",
                e.family,
                e.m,
                e.n,
                e.seed,
                e.rows,
                e.cols,
                e.status_label(),
                e.seconds
            );
        }
        s
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(
                f,
                "{}({},{}) {}x{} {} {}s",
                e.family,
                e.m,
                e.n,
                e.rows,
                e.cols,
                e.status_label(),
                e.seconds
            )?;
        }
        write!(
            f,
            "suite {}: {} ({} entries, {} skipped)",
            self.suite,
            if self.passed() { "PASS" } else { "FAIL" },
            self.entries.len(),
            self.skipped()
        )
    }
}

/// Checks one `(family, m, n)` entry.
pub fn run_entry(family: &str, m: i64, n: i64, opts: &SuiteOptions) -> SuiteEntry {
    let seed = derive_seed(opts.master_seed, family, m, n);
    let mut entry = SuiteEntry {
        family: family.to_string(),
        m,
        n,
        seed,
        rows: 0,
        cols: 0,
        status: EntryStatus::Skipped,
        seconds: 0.0,
        certificate: None,
    };
    let shape = match catalog_lookup(family).and_then(|f| family_eval(&f, m, n)) {
        Ok(s) => s,
        Err(e) => {
            entry.status = EntryStatus::Failed(e.to_string());
            return entry;
        }
    };
    (entry.rows, entry.cols) = matrix_dims(&shape);
    if entry.rows as u128 * entry.cols as u128 > opts.size_cap as u128 {
        return entry;
    }
    let started = Instant::now();
    let check = CheckOptions {
        prime: opts.prime,
        retries: opts.retries,
        max_entries: opts.size_cap,
    };
    match check_configuration_with(&shape, seed, &check) {
        Ok((v, cert)) => {
            entry.status = EntryStatus::Checked(v);
            entry.certificate = Some(cert);
        }
        Err(e) => entry.status = EntryStatus::Failed(e.to_string()),
    }
    entry.seconds = round_seconds(started.elapsed().as_secs_f64());
    entry
}

/// Runs every base case of `suite`, in list order.
pub fn run_basecases(suite: Suite, opts: &SuiteOptions) -> SuiteReport {
    let cases = base_cases(suite);
    let run = || -> Vec<SuiteEntry> {
        cases
            .par_iter()
            .map(|&(f, m, n)| run_entry(f, m, n, opts))
            .collect()
    };
    let entries = match opts.workers {
        Some(w) => match rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
        {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    };
    SuiteReport { suite, entries }
}
