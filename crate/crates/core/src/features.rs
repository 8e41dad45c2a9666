//! Preprocessing from descriptors to the 71-dimensional model input.
//!
//! Layout of a [`FeatureVector`]:
//!
//! | indices | content                                              |
//! |---------|------------------------------------------------------|
//! | 0..=5   | operation one-hot                                    |
//! | 6..=9   | input dtype one-hot                                  |
//! | 10..=13 | weights dtype one-hot                                |
//! | 14..=17 | output dtype one-hot                                 |
//! | 18..=23 | execution mode one-hot                               |
//! | 24..=29 | activation one-hot                                   |
//! | 30..=49 | `ln(1 + x)` of the 20 numeric fields in declaration order (sparsity scaled x100 first) |
//! | 50..=70 | reserved, exactly 0                                  |
//!
//! The target side maps cycles to the utilization rate in `(0, 1]` and back,
//! so models learn a bounded quantity instead of raw cycle magnitudes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::ProfilingRecord;
use crate::oracle::{ideal_cycles, HardwareProfile};
use crate::workload::{
    canonical_key, numeric_fields, ActivationFunction, DataType, ExecutionMode, Operation,
    ValidatedDescriptor,
};

/// Total feature dimension.
pub const FEATURE_LEN: usize = 71;
/// First index of the log-numeric block.
pub const NUMERIC_BASE: usize = 30;
/// First index of the reserved zero block.
pub const RESERVED_BASE: usize = 50;
/// Predictions below this utilization are clamped before cycle conversion.
pub const UTILIZATION_CLAMP_EPSILON: f64 = 1e-4;

/// One-hot group boundaries: (start, width).
const GROUPS: [(usize, usize); 6] = [(0, 6), (6, 4), (10, 4), (14, 4), (18, 6), (24, 6)];

/// The encoded input both cost-model variants consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Byte-exact key over the raw f64 bits, used for exact-match indexing.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut bytes = Vec::with_capacity(self.0.len() * 8);
        for v in &self.0 {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("one-hot group {group} at indices {start}..{end} sums to {sum}, expected exactly 1")]
    MalformedOneHot {
        group: &'static str,
        start: usize,
        end: usize,
        sum: f64,
    },
    #[error("feature vector has {0} values, expected {}", FEATURE_LEN)]
    WrongLength(usize),
    #[error("record {record_id} utilization {utilization} inconsistent with cycles")]
    InconsistentRecord { record_id: u64, utilization: f64 },
    #[error("need at least {minimum} records to split, got {got}")]
    TooFewRecords { minimum: usize, got: usize },
}

/// Encodes a validated descriptor into the 71-feature layout. Deterministic
/// and injective: distinct descriptors produce distinct vectors.
pub fn encode(d: &ValidatedDescriptor) -> FeatureVector {
    let mut v = vec![0.0f64; FEATURE_LEN];
    v[d.operation.ordinal() as usize] = 1.0;
    v[GROUPS[1].0 + d.input_dtype.ordinal() as usize] = 1.0;
    v[GROUPS[2].0 + d.weights_dtype.ordinal() as usize] = 1.0;
    v[GROUPS[3].0 + d.output_dtype.ordinal() as usize] = 1.0;
    v[GROUPS[4].0 + d.execution_mode.ordinal() as usize] = 1.0;
    v[GROUPS[5].0 + d.activation.ordinal() as usize] = 1.0;

    for (i, raw) in numeric_fields(d).iter().enumerate() {
        // Sparsity fields sit at numeric positions 15 and 16 and are stored
        // in 1/10000 units; scale to x100 of the fraction before the log.
        let x = if i == 15 || i == 16 {
            *raw as f64 / 100.0
        } else {
            *raw as f64
        };
        v[NUMERIC_BASE + i] = (1.0 + x).ln();
    }
    FeatureVector(v)
}

/// Categorical fields recovered from the one-hot blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodedCategoricals {
    pub operation: Operation,
    pub input_dtype: DataType,
    pub weights_dtype: DataType,
    pub output_dtype: DataType,
    pub execution_mode: ExecutionMode,
    pub activation: ActivationFunction,
}

fn one_hot_index(
    values: &[f64],
    group: &'static str,
    start: usize,
    width: usize,
) -> Result<u8, FeatureError> {
    let slice = &values[start..start + width];
    let sum: f64 = slice.iter().sum();
    let ones = slice.iter().filter(|&&x| x == 1.0).count();
    let zeros = slice.iter().filter(|&&x| x == 0.0).count();
    if sum != 1.0 || ones != 1 || zeros != width - 1 {
        return Err(FeatureError::MalformedOneHot {
            group,
            start,
            end: start + width,
            sum,
        });
    }
    Ok(slice.iter().position(|&x| x == 1.0).unwrap() as u8)
}

/// Inverts the six one-hot blocks; `encode` followed by this is the identity
/// on categorical fields.
pub fn decode_categoricals(vector: &FeatureVector) -> Result<DecodedCategoricals, FeatureError> {
    let v = vector.values();
    if v.len() != FEATURE_LEN {
        return Err(FeatureError::WrongLength(v.len()));
    }
    let op = one_hot_index(v, "operation", GROUPS[0].0, GROUPS[0].1)?;
    let in_dt = one_hot_index(v, "input_dtype", GROUPS[1].0, GROUPS[1].1)?;
    let w_dt = one_hot_index(v, "weights_dtype", GROUPS[2].0, GROUPS[2].1)?;
    let out_dt = one_hot_index(v, "output_dtype", GROUPS[3].0, GROUPS[3].1)?;
    let mode = one_hot_index(v, "execution_mode", GROUPS[4].0, GROUPS[4].1)?;
    let act = one_hot_index(v, "activation", GROUPS[5].0, GROUPS[5].1)?;
    Ok(DecodedCategoricals {
        operation: Operation::from_ordinal(op).unwrap(),
        input_dtype: DataType::from_ordinal(in_dt).unwrap(),
        weights_dtype: DataType::from_ordinal(w_dt).unwrap(),
        output_dtype: DataType::from_ordinal(out_dt).unwrap(),
        execution_mode: ExecutionMode::from_ordinal(mode).unwrap(),
        activation: ActivationFunction::from_ordinal(act).unwrap(),
    })
}

/// The learning target: utilization recomputed from the record's cycles.
pub fn target_from_record(
    record: &ProfilingRecord,
    profile: &HardwareProfile,
) -> Result<f64, FeatureError> {
    let ideal = ideal_cycles(&record.descriptor, profile);
    let utilization = ideal as f64 / record.cycles as f64;
    if !(utilization > 0.0 && utilization <= 1.0) {
        return Err(FeatureError::InconsistentRecord {
            record_id: record.record_id,
            utilization,
        });
    }
    Ok(utilization)
}

/// Converts a predicted utilization back to cycles given the ideal cost.
/// The prediction is clamped to `[1e-4, 1]` first, so pathological model
/// outputs cannot produce infinite or zero cycle counts.
pub fn cycles_from_utilization(ideal_cycles: u64, predicted_utilization: f64) -> u64 {
    let u = if predicted_utilization.is_nan() {
        UTILIZATION_CLAMP_EPSILON
    } else {
        predicted_utilization.clamp(UTILIZATION_CLAMP_EPSILON, 1.0)
    };
    ((ideal_cycles as f64 / u).round() as u64).max(1)
}

/// [`cycles_from_utilization`] with the ideal cost computed from the
/// descriptor under `profile`.
pub fn cycles_from_prediction(
    descriptor: &ValidatedDescriptor,
    predicted_utilization: f64,
    profile: &HardwareProfile,
) -> u64 {
    cycles_from_utilization(ideal_cycles(descriptor, profile), predicted_utilization)
}

/// Outlier filter: drops records with utilization outside `(0, 1]`, then
/// iteratively drops records whose `ln(cycles)` lies more than 4 standard
/// deviations from the mean of the remaining corpus until nothing moves.
/// The fixpoint makes the operation idempotent. Order is preserved in both
/// outputs.
pub fn remove_outliers(records: &[ProfilingRecord]) -> (Vec<ProfilingRecord>, Vec<ProfilingRecord>) {
    let mut removed = Vec::new();
    let mut kept: Vec<ProfilingRecord> = Vec::with_capacity(records.len());
    for r in records {
        if r.utilization > 0.0 && r.utilization <= 1.0 {
            kept.push(r.clone());
        } else {
            removed.push(r.clone());
        }
    }

    loop {
        if kept.len() < 2 {
            break;
        }
        let logs: Vec<f64> = kept.iter().map(|r| (r.cycles as f64).ln()).collect();
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        let var = logs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / logs.len() as f64;
        let limit = 4.0 * var.sqrt();

        let mut next = Vec::with_capacity(kept.len());
        let mut dropped_any = false;
        for (r, log) in kept.into_iter().zip(logs) {
            if (log - mean).abs() > limit {
                removed.push(r);
                dropped_any = true;
            } else {
                next.push(r);
            }
        }
        kept = next;
        if !dropped_any {
            break;
        }
    }
    (kept, removed)
}

/// One preprocessed example: everything the models and metrics need.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub descriptor: ValidatedDescriptor,
    pub features: FeatureVector,
    /// Learning target in `(0, 1]`.
    pub utilization: f64,
    pub ideal_cycles: u64,
    pub cycles: u64,
    pub record_id: u64,
}

impl Sample {
    pub fn from_record(
        record: &ProfilingRecord,
        profile: &HardwareProfile,
    ) -> Result<Self, FeatureError> {
        let utilization = target_from_record(record, profile)?;
        Ok(Sample {
            descriptor: record.descriptor,
            features: encode(&record.descriptor),
            utilization,
            ideal_cycles: ideal_cycles(&record.descriptor, profile),
            cycles: record.cycles,
            record_id: record.record_id,
        })
    }
}

/// An 80/20 train/validation partition.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub split_seed: u64,
}

/// Deterministic shuffle-and-split: validation takes `n / 5` records
/// (integer division), training the rest. Records are first deduplicated by
/// canonical key (first record wins) so the two sides are disjoint.
pub fn split_dataset(
    records: &[ProfilingRecord],
    seed: u64,
    profile: &HardwareProfile,
) -> Result<SplitDataset, FeatureError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let mut seen = std::collections::HashSet::new();
    let mut samples = Vec::with_capacity(records.len());
    for r in records {
        if seen.insert(canonical_key(&r.descriptor)) {
            samples.push(Sample::from_record(r, profile)?);
        }
    }
    if samples.len() < 10 {
        return Err(FeatureError::TooFewRecords {
            minimum: 10,
            got: samples.len(),
        });
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    samples.shuffle(&mut rng);
    let val_len = samples.len() / 5;
    let validation = samples.split_off(samples.len() - val_len);
    Ok(SplitDataset {
        train: samples,
        validation,
        split_seed: seed,
    })
}

/// One entry of the exported feature-layout map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDescription {
    pub index: usize,
    pub name: String,
    pub kind: String,
}

/// The machine-readable layout sidecar: external tools use this to interpret
/// feature vectors, and its hash pins model/feature compatibility.
pub fn feature_layout() -> Vec<FeatureDescription> {
    let mut layout = Vec::with_capacity(FEATURE_LEN);
    let mut one_hot = |names: Vec<String>, layout: &mut Vec<FeatureDescription>| {
        for name in names {
            let index = layout.len();
            layout.push(FeatureDescription {
                index,
                name,
                kind: "one_hot".into(),
            });
        }
    };
    one_hot(
        Operation::ALL.iter().map(|o| format!("operation={o}")).collect(),
        &mut layout,
    );
    one_hot(
        DataType::ALL.iter().map(|d| format!("input_dtype={d}")).collect(),
        &mut layout,
    );
    one_hot(
        DataType::ALL.iter().map(|d| format!("weights_dtype={d}")).collect(),
        &mut layout,
    );
    one_hot(
        DataType::ALL.iter().map(|d| format!("output_dtype={d}")).collect(),
        &mut layout,
    );
    one_hot(
        ExecutionMode::ALL.iter().map(|m| format!("execution_mode={m}")).collect(),
        &mut layout,
    );
    one_hot(
        ActivationFunction::ALL.iter().map(|a| format!("activation={a}")).collect(),
        &mut layout,
    );

    const NUMERIC_NAMES: [&str; 20] = [
        "batch", "in_h", "in_w", "in_c", "out_h", "out_w", "out_c", "k_h", "k_w", "s_h", "s_w",
        "p_top", "p_bottom", "p_left", "p_right", "input_sparsity_x100", "weight_sparsity_x100",
        "output_write_tiles", "reserved_a", "reserved_b",
    ];
    for name in NUMERIC_NAMES {
        let index = layout.len();
        layout.push(FeatureDescription {
            index,
            name: format!("log1p_{name}"),
            kind: "log_numeric".into(),
        });
    }
    while layout.len() < FEATURE_LEN {
        let index = layout.len();
        layout.push(FeatureDescription {
            index,
            name: format!("reserved_{index}"),
            kind: "reserved_zero".into(),
        });
    }
    layout
}

/// JSON rendering of [`feature_layout`] written next to trained models.
pub fn feature_layout_json() -> String {
    #[derive(Serialize)]
    struct LayoutFile {
        version: u32,
        length: usize,
        features: Vec<FeatureDescription>,
    }
    serde_json::to_string_pretty(&LayoutFile {
        version: 1,
        length: FEATURE_LEN,
        features: feature_layout(),
    })
    .expect("layout serializes")
}

/// SHA-256 of the layout JSON; embedded in model files so a model can refuse
/// vectors produced under a different layout.
pub fn feature_layout_hash() -> String {
    let digest = Sha256::digest(feature_layout_json().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
