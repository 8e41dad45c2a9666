//! Workload generation and the profiling database.
//!
//! The database is a line-delimited text file: one JSON header object, then
//! one JSON record per line. The header carries `schema_version`, the hash of
//! the hardware profile that produced the cycle counts, the creation seed,
//! and the record count; loading re-validates all of it, including that every
//! record's utilization is consistent with its cycles. Field order and float
//! formatting are deterministic, so equal inputs produce byte-identical
//! files.
//!
//! Sparsity fields inside descriptors are serialized in 1/10000 units (see
//! `workload::Sparsity`).

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::GenerationRanges;
use crate::oracle::{profile_task, HardwareProfile};
use crate::scheduler::{enumerate_splits, materialize_tasks, LayerSpec, ScheduleError};
use crate::workload::{
    canonical_key, legal_modes, output_extent, ActivationFunction, DataType, Operation, Sparsity,
    ValidatedDescriptor, WorkloadDescriptor,
};

/// Schema version of the dataset file format.
pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// Where a record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordSource {
    Generated,
    NetworkDerived,
}

/// One database row: a profiled task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilingRecord {
    pub record_id: u64,
    pub source: RecordSource,
    pub cycles: u64,
    pub utilization: f64,
    pub descriptor: ValidatedDescriptor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub schema_version: u32,
    pub profile_hash: String,
    pub creation_seed: u64,
    pub record_count: u64,
}

/// A loaded or freshly built dataset.
#[derive(Debug, Clone)]
pub struct DatasetFile {
    pub header: DatasetHeader,
    pub records: Vec<ProfilingRecord>,
    /// Duplicate descriptors dropped while building (0 for loaded files).
    pub duplicates_dropped: usize,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset schema_version {found} unsupported (expected {expected})")]
    SchemaMismatch { found: u32, expected: u32 },
    #[error("dataset profile hash {found} does not match configured profile {expected}")]
    ProfileMismatch { found: String, expected: String },
    #[error("corrupt record at line {line}: {reason}")]
    CorruptRecord { line: usize, reason: String },
    #[error("generation count {got} below minimum {minimum} (one per operation and dtype class)")]
    CountTooSmall { minimum: u64, got: u64 },
    #[error("generation ranges admit no valid {operation} workload: {reason}")]
    RangeInfeasible {
        operation: Operation,
        reason: String,
    },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Log-uniform integer draw over `lo..=hi`.
fn log_uniform(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> u32 {
    if lo >= hi {
        return lo;
    }
    let a = (lo as f64).ln();
    let b = ((hi + 1) as f64).ln();
    let x = rng.gen_range(a..b).exp().floor() as u32;
    x.clamp(lo, hi)
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.gen_range(0..items.len())]
}

/// Draws one raw descriptor for the given operation and input dtype.
fn sample_descriptor(
    rng: &mut ChaCha8Rng,
    operation: Operation,
    input_dtype: DataType,
    ranges: &GenerationRanges,
) -> Result<WorkloadDescriptor, DatasetError> {
    let (ch_lo, ch_hi) = ranges.channels;
    let in_c = match operation {
        Operation::CMConvolution => {
            let hi = ch_hi.min(15);
            if ch_lo > hi {
                return Err(DatasetError::RangeInfeasible {
                    operation,
                    reason: format!(
                        "channel-major needs in_c <= 15 but channels start at {ch_lo}"
                    ),
                });
            }
            log_uniform(rng, ch_lo.min(hi), hi)
        }
        _ => log_uniform(rng, ch_lo, ch_hi),
    };
    let out_c = match operation {
        Operation::DWConvolution | Operation::Elementwise | Operation::MaxPool
        | Operation::AveragePool => in_c,
        _ => log_uniform(rng, ch_lo, ch_hi),
    };

    let batch = log_uniform(rng, ranges.batch.0, ranges.batch.1);
    let in_h = log_uniform(rng, ranges.spatial.0, ranges.spatial.1);
    let in_w = log_uniform(rng, ranges.spatial.0, ranges.spatial.1);

    let elementwise = operation == Operation::Elementwise;
    let (k_h, k_w, s_h, s_w) = if elementwise {
        (1, 1, 1, 1)
    } else {
        let k_hi_h = ranges.kernel.1.min(in_h);
        let k_hi_w = ranges.kernel.1.min(in_w);
        if ranges.kernel.0 > k_hi_h || ranges.kernel.0 > k_hi_w {
            return Err(DatasetError::RangeInfeasible {
                operation,
                reason: format!(
                    "minimum kernel {} exceeds sampled spatial extent",
                    ranges.kernel.0
                ),
            });
        }
        (
            log_uniform(rng, ranges.kernel.0, k_hi_h),
            log_uniform(rng, ranges.kernel.0, k_hi_w),
            log_uniform(rng, ranges.stride.0, ranges.stride.1),
            log_uniform(rng, ranges.stride.0, ranges.stride.1),
        )
    };

    let pad = |rng: &mut ChaCha8Rng, k: u32| {
        if elementwise {
            0
        } else {
            rng.gen_range(0..=ranges.padding_max.min(k.saturating_sub(1)))
        }
    };
    let p_top = pad(rng, k_h);
    let p_bottom = pad(rng, k_h);
    let p_left = pad(rng, k_w);
    let p_right = pad(rng, k_w);

    let out_h = output_extent(in_h, p_top, p_bottom, k_h, s_h).expect("kernel clamped to input");
    let out_w = output_extent(in_w, p_left, p_right, k_w, s_w).expect("kernel clamped to input");

    let weights_dtype = input_dtype;
    let output_dtype = pick(rng, &DataType::ALL);
    let execution_mode = pick(rng, &legal_modes(operation, input_dtype, weights_dtype));
    let activation = pick(rng, &ActivationFunction::ALL);

    let sparsity = |rng: &mut ChaCha8Rng| {
        Sparsity::from_fraction(pick(rng, &ranges.sparsity_levels)).expect("validated range")
    };
    let input_sparsity = sparsity(rng);
    let weight_sparsity = if operation.has_weights() {
        sparsity(rng)
    } else {
        Sparsity::ZERO
    };

    Ok(WorkloadDescriptor {
        operation,
        input_dtype,
        weights_dtype,
        output_dtype,
        execution_mode,
        activation,
        batch,
        in_h,
        in_w,
        in_c,
        out_h,
        out_w,
        out_c,
        k_h,
        k_w,
        s_h,
        s_w,
        p_top,
        p_bottom,
        p_left,
        p_right,
        input_sparsity,
        weight_sparsity,
        output_write_tiles: log_uniform(rng, ranges.output_write_tiles.0, ranges.output_write_tiles.1),
        reserved_a: 0,
        reserved_b: 0,
    })
}

/// Generates `count` distinct valid descriptors, balanced across the six
/// operations (counts differ by at most 1) and, within each operation, across
/// the four input dtype classes (again at most 1 apart). Deterministic under
/// `seed`.
pub fn generate_balanced(
    count: u64,
    seed: u64,
    ranges: &GenerationRanges,
) -> Result<Vec<ValidatedDescriptor>, DatasetError> {
    let minimum = (Operation::ALL.len() * DataType::ALL.len()) as u64;
    if count < minimum {
        return Err(DatasetError::CountTooSmall { minimum, got: count });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count as usize);
    let mut seen: HashSet<Vec<u8>> = HashSet::with_capacity(count as usize);

    let per_op = count / 6;
    let op_extra = (count % 6) as usize;
    for (oi, &operation) in Operation::ALL.iter().enumerate() {
        let op_count = per_op + u64::from(oi < op_extra);
        let per_dtype = op_count / 4;
        let dtype_extra = (op_count % 4) as usize;
        for (di, &dtype) in DataType::ALL.iter().enumerate() {
            let cell_count = per_dtype + u64::from(di < dtype_extra);
            let mut produced = 0u64;
            let mut attempts = 0u64;
            while produced < cell_count {
                attempts += 1;
                if attempts > cell_count.max(1) * 10_000 {
                    return Err(DatasetError::RangeInfeasible {
                        operation,
                        reason: "could not produce enough distinct valid descriptors".into(),
                    });
                }
                let raw = sample_descriptor(&mut rng, operation, dtype, ranges)?;
                let validated = match raw.validate() {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                if seen.insert(canonical_key(&validated)) {
                    out.push(validated);
                    produced += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Expands every layer into the tasks of every split option the scheduler
/// can enumerate, so the database covers what the compiler will later query.
pub fn derive_from_network(layers: &[LayerSpec]) -> Result<Vec<ValidatedDescriptor>, DatasetError> {
    let mut out = Vec::new();
    for layer in layers {
        for option in enumerate_splits(layer)? {
            out.extend(materialize_tasks(layer, &option)?);
        }
    }
    Ok(out)
}

/// Profiles descriptors into records: duplicates (by canonical key) are
/// dropped keeping the first occurrence, and record ids are assigned in input
/// order.
pub fn profile_records(
    items: &[(ValidatedDescriptor, RecordSource)],
    profile: &HardwareProfile,
) -> (Vec<ProfilingRecord>, usize) {
    let mut seen: HashSet<Vec<u8>> = HashSet::with_capacity(items.len());
    let mut records = Vec::with_capacity(items.len());
    let mut dropped = 0usize;
    for (descriptor, source) in items {
        if !seen.insert(canonical_key(descriptor)) {
            dropped += 1;
            continue;
        }
        let cost = profile_task(descriptor, profile);
        records.push(ProfilingRecord {
            record_id: records.len() as u64,
            source: *source,
            cycles: cost.cycles,
            utilization: cost.utilization,
            descriptor: *descriptor,
        });
    }
    (records, dropped)
}

/// Profiles descriptors and writes the database file.
pub fn build_dataset(
    items: &[(ValidatedDescriptor, RecordSource)],
    profile: &HardwareProfile,
    creation_seed: u64,
    path: &Path,
) -> Result<DatasetFile, DatasetError> {
    let (records, duplicates_dropped) = profile_records(items, profile);
    let header = DatasetHeader {
        schema_version: DATASET_SCHEMA_VERSION,
        profile_hash: profile.profile_hash(),
        creation_seed,
        record_count: records.len() as u64,
    };

    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "{}", serde_json::to_string(&header).expect("header serializes"))?;
    for record in &records {
        writeln!(file, "{}", serde_json::to_string(record).expect("record serializes"))?;
    }
    file.flush()?;

    Ok(DatasetFile {
        header,
        records,
        duplicates_dropped,
    })
}

/// Loads a database file and re-validates every invariant: schema version,
/// profile hash, strictly increasing record ids, record count, and that each
/// record's utilization equals `ideal_cycles / cycles` under `profile`.
pub fn load_dataset(path: &Path, profile: &HardwareProfile) -> Result<DatasetFile, DatasetError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();

    let header_line = lines
        .next()
        .ok_or_else(|| DatasetError::CorruptRecord {
            line: 1,
            reason: "empty file, missing header".into(),
        })??;
    let header: DatasetHeader =
        serde_json::from_str(&header_line).map_err(|e| DatasetError::CorruptRecord {
            line: 1,
            reason: format!("bad header: {e}"),
        })?;
    if header.schema_version != DATASET_SCHEMA_VERSION {
        return Err(DatasetError::SchemaMismatch {
            found: header.schema_version,
            expected: DATASET_SCHEMA_VERSION,
        });
    }
    let expected_hash = profile.profile_hash();
    if header.profile_hash != expected_hash {
        return Err(DatasetError::ProfileMismatch {
            found: header.profile_hash,
            expected: expected_hash,
        });
    }

    let mut records: Vec<ProfilingRecord> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ProfilingRecord =
            serde_json::from_str(&line).map_err(|e| DatasetError::CorruptRecord {
                line: line_no,
                reason: e.to_string(),
            })?;
        if let Some(prev) = records.last() {
            if record.record_id <= prev.record_id {
                return Err(DatasetError::CorruptRecord {
                    line: line_no,
                    reason: format!(
                        "record_id {} not strictly increasing after {}",
                        record.record_id, prev.record_id
                    ),
                });
            }
        }
        let fresh = profile_task(&record.descriptor, profile);
        if fresh.cycles != record.cycles || fresh.utilization != record.utilization {
            return Err(DatasetError::CorruptRecord {
                line: line_no,
                reason: format!(
                    "cycles/utilization ({}, {}) disagree with profile ({}, {})",
                    record.cycles, record.utilization, fresh.cycles, fresh.utilization
                ),
            });
        }
        records.push(record);
    }

    if records.len() as u64 != header.record_count {
        return Err(DatasetError::CorruptRecord {
            line: records.len() + 1,
            reason: format!(
                "header claims {} records, found {}",
                header.record_count,
                records.len()
            ),
        });
    }

    Ok(DatasetFile {
        header,
        records,
        duplicates_dropped: 0,
    })
}

/// Content hash over record ids, canonical keys, and cycles; embedded in
/// model files to tie a model to its training data.
pub fn dataset_hash(records: &[ProfilingRecord]) -> String {
    let mut hasher = Sha256::new();
    hasher.update((records.len() as u64).to_le_bytes());
    for r in records {
        hasher.update(r.record_id.to_le_bytes());
        hasher.update(canonical_key(&r.descriptor));
        hasher.update(r.cycles.to_le_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_config;
    use std::collections::BTreeMap;

    fn ranges() -> GenerationRanges {
        default_config().generation
    }

    #[test]
    fn count_below_minimum_is_rejected() {
        assert!(matches!(
            generate_balanced(23, 1, &ranges()),
            Err(DatasetError::CountTooSmall { minimum: 24, .. })
        ));
    }

    #[test]
    fn twenty_four_descriptors_balance_exactly() {
        let descs = generate_balanced(24, 7, &ranges()).unwrap();
        assert_eq!(descs.len(), 24);
        let mut per_op: BTreeMap<&str, usize> = BTreeMap::new();
        let mut per_cell: BTreeMap<(&str, &str), usize> = BTreeMap::new();
        for d in &descs {
            *per_op.entry(d.operation.name()).or_default() += 1;
            *per_cell
                .entry((d.operation.name(), d.input_dtype.name()))
                .or_default() += 1;
        }
        assert!(per_op.values().all(|&c| c == 4));
        assert_eq!(per_cell.len(), 24);
        assert!(per_cell.values().all(|&c| c == 1));
    }

    #[test]
    fn generation_is_deterministic_and_distinct() {
        let a = generate_balanced(100, 11, &ranges()).unwrap();
        let b = generate_balanced(100, 11, &ranges()).unwrap();
        assert_eq!(a, b);
        let keys: HashSet<_> = a.iter().map(canonical_key).collect();
        assert_eq!(keys.len(), a.len());

        let c = generate_balanced(100, 12, &ranges()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn balance_holds_at_larger_counts() {
        let descs = generate_balanced(1000, 5, &ranges()).unwrap();
        let mut per_op: BTreeMap<u8, u64> = BTreeMap::new();
        for d in &descs {
            *per_op.entry(d.operation.ordinal()).or_default() += 1;
        }
        let max = per_op.values().max().unwrap();
        let min = per_op.values().min().unwrap();
        assert!(max - min <= 1, "operation histogram spread {max}-{min}");
    }

    #[test]
    fn infeasible_ranges_error_for_channel_major() {
        let mut r = ranges();
        r.channels = (64, 128);
        let err = generate_balanced(24, 1, &r).unwrap_err();
        assert!(matches!(
            err,
            DatasetError::RangeInfeasible {
                operation: Operation::CMConvolution,
                ..
            }
        ));
    }

    #[test]
    fn build_deduplicates_and_reports() {
        let profile = default_config().profile;
        let descs = generate_balanced(90, 3, &ranges()).unwrap();
        let mut items: Vec<_> = descs.iter().map(|d| (*d, RecordSource::Generated)).collect();
        // Duplicate ten of them.
        for d in descs.iter().take(10) {
            items.push((*d, RecordSource::Generated));
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        let file = build_dataset(&items, &profile, 3, &path).unwrap();
        assert_eq!(file.records.len(), 90);
        assert_eq!(file.duplicates_dropped, 10);
        assert_eq!(file.header.record_count, 90);
        assert_eq!(file.header.profile_hash, profile.profile_hash());
    }

    #[test]
    fn empty_dataset_round_trips() {
        let profile = default_config().profile;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        let built = build_dataset(&[], &profile, 0, &path).unwrap();
        assert!(built.records.is_empty());
        let loaded = load_dataset(&path, &profile).unwrap();
        assert!(loaded.records.is_empty());
        assert_eq!(loaded.header, built.header);
    }

    #[test]
    fn round_trip_preserves_every_record() {
        let profile = default_config().profile;
        let descs = generate_balanced(48, 9, &ranges()).unwrap();
        let items: Vec<_> = descs.iter().map(|d| (*d, RecordSource::Generated)).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        let built = build_dataset(&items, &profile, 9, &path).unwrap();
        let loaded = load_dataset(&path, &profile).unwrap();
        assert_eq!(built.records, loaded.records);
        assert_eq!(built.header, loaded.header);
    }

    #[test]
    fn builds_are_byte_identical_across_runs() {
        let profile = default_config().profile;
        let descs = generate_balanced(30, 21, &ranges()).unwrap();
        let items: Vec<_> = descs.iter().map(|d| (*d, RecordSource::Generated)).collect();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        build_dataset(&items, &profile, 21, &a).unwrap();
        build_dataset(&items, &profile, 21, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn tampered_cycles_are_detected() {
        let profile = default_config().profile;
        let descs = generate_balanced(24, 13, &ranges()).unwrap();
        let items: Vec<_> = descs.iter().map(|d| (*d, RecordSource::Generated)).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        build_dataset(&items, &profile, 13, &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[3] = lines[3].replace("\"cycles\":", "\"cycles\":9");
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();

        match load_dataset(&path, &profile) {
            Err(DatasetError::CorruptRecord { line: 4, .. }) => {}
            other => panic!("expected corrupt record at line 4, got {other:?}"),
        }
    }

    #[test]
    fn schema_and_profile_mismatches_are_detected() {
        let profile = default_config().profile;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        build_dataset(&[], &profile, 0, &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace("\"schema_version\":1", "\"schema_version\":2"))
            .unwrap();
        assert!(matches!(
            load_dataset(&path, &profile),
            Err(DatasetError::SchemaMismatch { found: 2, .. })
        ));

        build_dataset(&[], &profile, 0, &path).unwrap();
        let other = HardwareProfile::new(
            [1, 1, 1, 1, 1, 1],
            [10_000, 10_000, 5_000, 5_000],
            0,
            16,
            [0; 6],
            5_000,
        )
        .unwrap();
        assert!(matches!(
            load_dataset(&path, &other),
            Err(DatasetError::ProfileMismatch { .. })
        ));
    }

    #[test]
    fn dataset_hash_tracks_content() {
        let profile = default_config().profile;
        let descs = generate_balanced(24, 2, &ranges()).unwrap();
        let items: Vec<_> = descs.iter().map(|d| (*d, RecordSource::Generated)).collect();
        let (records, _) = profile_records(&items, &profile);
        let h1 = dataset_hash(&records);
        let h2 = dataset_hash(&records);
        assert_eq!(h1, h2);
        let h3 = dataset_hash(&records[..23]);
        assert_ne!(h1, h3);
    }
}
