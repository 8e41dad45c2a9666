//! Descriptors for hardware tasks: the unit of work the cost model prices.
//!
//! A [`WorkloadDescriptor`] captures one hardware-native operation instance
//! (a convolution chunk, a pool, an elementwise op) as 6 categorical and
//! 20 numeric fields — 26 raw features in total. Descriptors are plain
//! value objects; [`WorkloadDescriptor::validate`] checks the geometry and
//! combination rules and yields a [`ValidatedDescriptor`], which is what the
//! rest of the crate operates on.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use thiserror::Error;

/// Hardware-native operation kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operation {
    Convolution,
    /// Channel-major convolution: a convolution variant for small input
    /// channel counts (`in_c <= 15`).
    CMConvolution,
    /// Depthwise convolution: one filter per channel, `in_c == out_c`.
    DWConvolution,
    Elementwise,
    MaxPool,
    AveragePool,
}

impl Operation {
    pub const ALL: [Operation; 6] = [
        Operation::Convolution,
        Operation::CMConvolution,
        Operation::DWConvolution,
        Operation::Elementwise,
        Operation::MaxPool,
        Operation::AveragePool,
    ];

    pub fn ordinal(self) -> u8 {
        Self::ALL.iter().position(|&op| op == self).unwrap() as u8
    }

    pub fn from_ordinal(ord: u8) -> Option<Self> {
        Self::ALL.get(ord as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Operation::Convolution => "Convolution",
            Operation::CMConvolution => "CMConvolution",
            Operation::DWConvolution => "DWConvolution",
            Operation::Elementwise => "Elementwise",
            Operation::MaxPool => "MaxPool",
            Operation::AveragePool => "AveragePool",
        }
    }

    /// True for operations that carry a weights tensor.
    pub fn has_weights(self) -> bool {
        matches!(
            self,
            Operation::Convolution | Operation::CMConvolution | Operation::DWConvolution
        )
    }
}

impl FromStr for Operation {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .find(|op| op.name() == s)
            .copied()
            .ok_or_else(|| ParseEnumError::new("Operation", s))
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Tensor element types supported by the accelerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataType {
    UInt8,
    Int8,
    Float16,
    BFloat16,
}

impl DataType {
    pub const ALL: [DataType; 4] = [
        DataType::UInt8,
        DataType::Int8,
        DataType::Float16,
        DataType::BFloat16,
    ];

    pub fn ordinal(self) -> u8 {
        Self::ALL.iter().position(|&d| d == self).unwrap() as u8
    }

    pub fn from_ordinal(ord: u8) -> Option<Self> {
        Self::ALL.get(ord as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            DataType::UInt8 => "uint8",
            DataType::Int8 => "int8",
            DataType::Float16 => "float16",
            DataType::BFloat16 => "bfloat16",
        }
    }

    /// Storage width of one element in bytes.
    pub fn byte_width(self) -> u32 {
        match self {
            DataType::UInt8 | DataType::Int8 => 1,
            DataType::Float16 | DataType::BFloat16 => 2,
        }
    }
}

impl FromStr for DataType {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .find(|d| d.name() == s)
            .copied()
            .ok_or_else(|| ParseEnumError::new("DataType", s))
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Compute-grid configuration of the accelerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExecutionMode {
    Vector,
    Matrix,
    VectorFP16,
    Cuboid16x16,
    Cuboid8x16,
    Cuboid4x16,
}

impl ExecutionMode {
    pub const ALL: [ExecutionMode; 6] = [
        ExecutionMode::Vector,
        ExecutionMode::Matrix,
        ExecutionMode::VectorFP16,
        ExecutionMode::Cuboid16x16,
        ExecutionMode::Cuboid8x16,
        ExecutionMode::Cuboid4x16,
    ];

    pub fn ordinal(self) -> u8 {
        Self::ALL.iter().position(|&m| m == self).unwrap() as u8
    }

    pub fn from_ordinal(ord: u8) -> Option<Self> {
        Self::ALL.get(ord as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ExecutionMode::Vector => "Vector",
            ExecutionMode::Matrix => "Matrix",
            ExecutionMode::VectorFP16 => "VectorFP16",
            ExecutionMode::Cuboid16x16 => "Cuboid16x16",
            ExecutionMode::Cuboid8x16 => "Cuboid8x16",
            ExecutionMode::Cuboid4x16 => "Cuboid4x16",
        }
    }
}

impl FromStr for ExecutionMode {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .find(|m| m.name() == s)
            .copied()
            .ok_or_else(|| ParseEnumError::new("ExecutionMode", s))
    }
}

impl fmt::Display for ExecutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Activation fused onto the end of a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActivationFunction {
    None,
    RELU,
    LRELU,
    Add,
    Sub,
    Mult,
}

impl ActivationFunction {
    pub const ALL: [ActivationFunction; 6] = [
        ActivationFunction::None,
        ActivationFunction::RELU,
        ActivationFunction::LRELU,
        ActivationFunction::Add,
        ActivationFunction::Sub,
        ActivationFunction::Mult,
    ];

    pub fn ordinal(self) -> u8 {
        Self::ALL.iter().position(|&a| a == self).unwrap() as u8
    }

    pub fn from_ordinal(ord: u8) -> Option<Self> {
        Self::ALL.get(ord as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationFunction::None => "None",
            ActivationFunction::RELU => "RELU",
            ActivationFunction::LRELU => "LRELU",
            ActivationFunction::Add => "Add",
            ActivationFunction::Sub => "Sub",
            ActivationFunction::Mult => "Mult",
        }
    }
}

impl FromStr for ActivationFunction {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .find(|a| a.name() == s)
            .copied()
            .ok_or_else(|| ParseEnumError::new("ActivationFunction", s))
    }
}

impl fmt::Display for ActivationFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Failed enum parse, with the offending input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {kind} value {value:?}")]
pub struct ParseEnumError {
    pub kind: &'static str,
    pub value: String,
}

impl ParseEnumError {
    fn new(kind: &'static str, value: &str) -> Self {
        Self {
            kind,
            value: value.to_string(),
        }
    }
}

/// A zero-value fraction in `[0, 1]`, stored in units of 1/10000.
///
/// The fixed-point representation keeps descriptors exactly comparable and
/// lets the canonical key serialize sparsity as a plain `u32`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Sparsity(u32);

/// Fixed-point scale used by [`Sparsity`] and by the hardware-profile factors.
pub const MYRIAD: u32 = 10_000;

impl Sparsity {
    pub const ZERO: Sparsity = Sparsity(0);

    /// Builds a sparsity from raw 1/10000 units. Values above 10000 are out of range.
    pub fn from_myriad(units: u32) -> Result<Self, ValidationError> {
        if units > MYRIAD {
            return Err(ValidationError::SparsityOutOfRange {
                value: units as f64 / MYRIAD as f64,
            });
        }
        Ok(Sparsity(units))
    }

    /// Builds a sparsity from a fraction in `[0, 1]`, rounding to the nearest
    /// 1/10000.
    pub fn from_fraction(fraction: f64) -> Result<Self, ValidationError> {
        if !fraction.is_finite() || !(0.0..=1.0).contains(&fraction) {
            return Err(ValidationError::SparsityOutOfRange { value: fraction });
        }
        Ok(Sparsity((fraction * MYRIAD as f64).round() as u32))
    }

    pub fn myriad(self) -> u32 {
        self.0
    }

    pub fn fraction(self) -> f64 {
        self.0 as f64 / MYRIAD as f64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// One hardware task: 6 categorical plus 20 numeric fields, 26 raw input
/// features in total. Geometry is in elements, sparsity is the fraction of
/// zero values, and the two reserved fields must stay 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorkloadDescriptor {
    pub operation: Operation,
    pub input_dtype: DataType,
    pub weights_dtype: DataType,
    pub output_dtype: DataType,
    pub execution_mode: ExecutionMode,
    pub activation: ActivationFunction,
    pub batch: u32,
    pub in_h: u32,
    pub in_w: u32,
    pub in_c: u32,
    pub out_h: u32,
    pub out_w: u32,
    pub out_c: u32,
    pub k_h: u32,
    pub k_w: u32,
    pub s_h: u32,
    pub s_w: u32,
    pub p_top: u32,
    pub p_bottom: u32,
    pub p_left: u32,
    pub p_right: u32,
    pub input_sparsity: Sparsity,
    pub weight_sparsity: Sparsity,
    pub output_write_tiles: u32,
    pub reserved_a: u32,
    pub reserved_b: u32,
}

/// Spatial axis named in a geometry error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Height,
    Width,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Height => f.write_str("height"),
            Axis::Width => f.write_str("width"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("{axis} geometry mismatch: declared out extent {declared}, formula gives {expected}")]
    GeometryMismatch {
        axis: Axis,
        declared: u32,
        expected: u32,
    },
    #[error("illegal field combination: {0}")]
    IllegalCombination(String),
    #[error("reserved fields must be zero")]
    ReservedNonZero,
    #[error("sparsity {value} outside [0, 1]")]
    SparsityOutOfRange { value: f64 },
}

/// Output extent produced by a strided window over a padded input, or `None`
/// when the padded input is smaller than the kernel.
pub fn output_extent(in_extent: u32, pad_lo: u32, pad_hi: u32, kernel: u32, stride: u32) -> Option<u32> {
    let padded = in_extent as u64 + pad_lo as u64 + pad_hi as u64;
    if padded < kernel as u64 || stride == 0 {
        return None;
    }
    Some(((padded - kernel as u64) / stride as u64 + 1) as u32)
}

impl WorkloadDescriptor {
    /// Checks every descriptor invariant and wraps the descriptor as
    /// validated.
    ///
    /// The geometry equation `out = floor((in + pads - k) / s) + 1` is checked
    /// exactly on both spatial axes. Elementwise tasks must be an identity
    /// geometry (`in == out`, `k = s = 1`, no padding) with zero weight
    /// sparsity; depthwise convolutions must preserve the channel count; and
    /// channel-major convolutions are restricted to `in_c <= 15`.
    pub fn validate(self) -> Result<ValidatedDescriptor, ValidationError> {
        let d = &self;
        for (name, v) in [
            ("batch", d.batch),
            ("in_h", d.in_h),
            ("in_w", d.in_w),
            ("in_c", d.in_c),
            ("out_h", d.out_h),
            ("out_w", d.out_w),
            ("out_c", d.out_c),
            ("k_h", d.k_h),
            ("k_w", d.k_w),
            ("s_h", d.s_h),
            ("s_w", d.s_w),
            ("output_write_tiles", d.output_write_tiles),
        ] {
            if v == 0 {
                return Err(ValidationError::IllegalCombination(format!(
                    "{name} must be positive"
                )));
            }
        }
        if d.reserved_a != 0 || d.reserved_b != 0 {
            return Err(ValidationError::ReservedNonZero);
        }
        if d.input_sparsity.myriad() > MYRIAD {
            return Err(ValidationError::SparsityOutOfRange {
                value: d.input_sparsity.fraction(),
            });
        }
        if d.weight_sparsity.myriad() > MYRIAD {
            return Err(ValidationError::SparsityOutOfRange {
                value: d.weight_sparsity.fraction(),
            });
        }

        match d.operation {
            Operation::Elementwise => {
                if d.k_h != 1 || d.k_w != 1 || d.s_h != 1 || d.s_w != 1 {
                    return Err(ValidationError::IllegalCombination(
                        "elementwise requires k = s = 1".into(),
                    ));
                }
                if d.p_top != 0 || d.p_bottom != 0 || d.p_left != 0 || d.p_right != 0 {
                    return Err(ValidationError::IllegalCombination(
                        "elementwise requires zero padding".into(),
                    ));
                }
                if (d.in_h, d.in_w, d.in_c) != (d.out_h, d.out_w, d.out_c) {
                    return Err(ValidationError::IllegalCombination(
                        "elementwise requires identical input and output geometry".into(),
                    ));
                }
                if !d.weight_sparsity.is_zero() {
                    return Err(ValidationError::IllegalCombination(
                        "elementwise has no weights, weight sparsity must be zero".into(),
                    ));
                }
            }
            Operation::DWConvolution => {
                if d.in_c != d.out_c {
                    return Err(ValidationError::IllegalCombination(format!(
                        "depthwise convolution requires in_c == out_c ({} != {})",
                        d.in_c, d.out_c
                    )));
                }
            }
            Operation::CMConvolution => {
                if d.in_c > 15 {
                    return Err(ValidationError::IllegalCombination(format!(
                        "channel-major convolution requires in_c <= 15 (got {})",
                        d.in_c
                    )));
                }
            }
            _ => {}
        }

        // Spatial geometry applies to every operation; for elementwise the
        // k = s = 1, p = 0 constraints above reduce it to out == in.
        let expected_h = output_extent(d.in_h, d.p_top, d.p_bottom, d.k_h, d.s_h);
        if expected_h != Some(d.out_h) {
            return Err(ValidationError::GeometryMismatch {
                axis: Axis::Height,
                declared: d.out_h,
                expected: expected_h.unwrap_or(0),
            });
        }
        let expected_w = output_extent(d.in_w, d.p_left, d.p_right, d.k_w, d.s_w);
        if expected_w != Some(d.out_w) {
            return Err(ValidationError::GeometryMismatch {
                axis: Axis::Width,
                declared: d.out_w,
                expected: expected_w.unwrap_or(0),
            });
        }

        Ok(ValidatedDescriptor(self))
    }

    /// The widest of the input and weights element types. Ties resolve to the
    /// input type.
    pub fn widest_compute_dtype(&self) -> DataType {
        if self.weights_dtype.byte_width() > self.input_dtype.byte_width() {
            self.weights_dtype
        } else {
            self.input_dtype
        }
    }
}

/// A descriptor that passed [`WorkloadDescriptor::validate`]. Immutable;
/// everything downstream (profiling, encoding, scheduling) consumes this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ValidatedDescriptor(WorkloadDescriptor);

impl Deref for ValidatedDescriptor {
    type Target = WorkloadDescriptor;

    fn deref(&self) -> &WorkloadDescriptor {
        &self.0
    }
}

impl ValidatedDescriptor {
    pub fn descriptor(&self) -> &WorkloadDescriptor {
        &self.0
    }
}

impl<'de> Deserialize<'de> for ValidatedDescriptor {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = WorkloadDescriptor::deserialize(deserializer)?;
        raw.validate().map_err(serde::de::Error::custom)
    }
}

/// Version byte leading every canonical key.
pub const KEY_VERSION: u8 = 0x01;

/// Byte length of a canonical key: version byte, 6 enum ordinals, 20
/// little-endian `u32` numeric fields.
pub const KEY_LEN: usize = 1 + 6 + 20 * 4;

/// Deterministic, injective serialization of all 26 descriptor fields.
///
/// Layout: version byte `0x01`; one ordinal byte each for operation, input
/// dtype, weights dtype, output dtype, execution mode, activation; then the
/// 20 numeric fields in declaration order as little-endian `u32` (sparsity in
/// 1/10000 units). Equal descriptors produce byte-identical keys on every
/// platform.
pub fn canonical_key(d: &ValidatedDescriptor) -> Vec<u8> {
    let mut key = Vec::with_capacity(KEY_LEN);
    key.push(KEY_VERSION);
    key.push(d.operation.ordinal());
    key.push(d.input_dtype.ordinal());
    key.push(d.weights_dtype.ordinal());
    key.push(d.output_dtype.ordinal());
    key.push(d.execution_mode.ordinal());
    key.push(d.activation.ordinal());
    for v in numeric_fields(d) {
        key.extend_from_slice(&v.to_le_bytes());
    }
    debug_assert_eq!(key.len(), KEY_LEN);
    key
}

/// The 20 numeric fields in canonical declaration order.
pub fn numeric_fields(d: &WorkloadDescriptor) -> [u32; 20] {
    [
        d.batch,
        d.in_h,
        d.in_w,
        d.in_c,
        d.out_h,
        d.out_w,
        d.out_c,
        d.k_h,
        d.k_w,
        d.s_h,
        d.s_w,
        d.p_top,
        d.p_bottom,
        d.p_left,
        d.p_right,
        d.input_sparsity.myriad(),
        d.weight_sparsity.myriad(),
        d.output_write_tiles,
        d.reserved_a,
        d.reserved_b,
    ]
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeyError {
    #[error("canonical key has {0} bytes, expected {}", KEY_LEN)]
    WrongLength(usize),
    #[error("canonical key version {0:#04x} not supported")]
    UnsupportedVersion(u8),
    #[error("canonical key field {field} holds invalid ordinal {ordinal}")]
    BadOrdinal { field: &'static str, ordinal: u8 },
    #[error("decoded descriptor fails validation: {0}")]
    Invalid(#[from] ValidationError),
}

/// Inverse of [`canonical_key`]: re-validates the decoded descriptor.
pub fn parse_key(key: &[u8]) -> Result<ValidatedDescriptor, KeyError> {
    if key.len() != KEY_LEN {
        return Err(KeyError::WrongLength(key.len()));
    }
    if key[0] != KEY_VERSION {
        return Err(KeyError::UnsupportedVersion(key[0]));
    }
    let ord = |i: usize| key[1 + i];
    let operation = Operation::from_ordinal(ord(0)).ok_or(KeyError::BadOrdinal {
        field: "operation",
        ordinal: ord(0),
    })?;
    let input_dtype = DataType::from_ordinal(ord(1)).ok_or(KeyError::BadOrdinal {
        field: "input_dtype",
        ordinal: ord(1),
    })?;
    let weights_dtype = DataType::from_ordinal(ord(2)).ok_or(KeyError::BadOrdinal {
        field: "weights_dtype",
        ordinal: ord(2),
    })?;
    let output_dtype = DataType::from_ordinal(ord(3)).ok_or(KeyError::BadOrdinal {
        field: "output_dtype",
        ordinal: ord(3),
    })?;
    let execution_mode = ExecutionMode::from_ordinal(ord(4)).ok_or(KeyError::BadOrdinal {
        field: "execution_mode",
        ordinal: ord(4),
    })?;
    let activation = ActivationFunction::from_ordinal(ord(5)).ok_or(KeyError::BadOrdinal {
        field: "activation",
        ordinal: ord(5),
    })?;

    let mut nums = [0u32; 20];
    for (i, chunk) in key[7..].chunks_exact(4).enumerate() {
        nums[i] = u32::from_le_bytes(chunk.try_into().unwrap());
    }
    let raw = WorkloadDescriptor {
        operation,
        input_dtype,
        weights_dtype,
        output_dtype,
        execution_mode,
        activation,
        batch: nums[0],
        in_h: nums[1],
        in_w: nums[2],
        in_c: nums[3],
        out_h: nums[4],
        out_w: nums[5],
        out_c: nums[6],
        k_h: nums[7],
        k_w: nums[8],
        s_h: nums[9],
        s_w: nums[10],
        p_top: nums[11],
        p_bottom: nums[12],
        p_left: nums[13],
        p_right: nums[14],
        input_sparsity: Sparsity::from_myriad(nums[15])?,
        weight_sparsity: Sparsity::from_myriad(nums[16])?,
        output_write_tiles: nums[17],
        reserved_a: nums[18],
        reserved_b: nums[19],
    };
    Ok(raw.validate()?)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("MAC count overflows u64 for this descriptor")]
pub struct MacOverflow;

/// Ideal MAC (or comparison/accumulate) operation count for a task.
///
/// Convolutions count `batch * out_h * out_w * out_c * in_c * k_h * k_w`;
/// depthwise convolutions and pooling drop the `in_c` factor; elementwise is
/// one op per output element. Pooling comparisons are priced like MACs so all
/// operations share one ideal-cost currency.
pub fn mac_count(d: &ValidatedDescriptor) -> Result<u64, MacOverflow> {
    let out_elems = [d.batch, d.out_h, d.out_w, d.out_c];
    let extra: &[u32] = match d.operation {
        Operation::Convolution | Operation::CMConvolution => &[d.in_c, d.k_h, d.k_w],
        Operation::DWConvolution | Operation::MaxPool | Operation::AveragePool => {
            &[d.k_h, d.k_w]
        }
        Operation::Elementwise => &[],
    };
    out_elems
        .iter()
        .chain(extra.iter())
        .try_fold(1u64, |acc, &v| acc.checked_mul(v as u64))
        .ok_or(MacOverflow)
}

/// Per-output-element inner MAC depth (the kernel-tap inner loop length used
/// by the oracle's per-tap simulation).
pub fn macs_per_output_element_tap(d: &WorkloadDescriptor) -> u64 {
    match d.operation {
        Operation::Convolution | Operation::CMConvolution => d.in_c as u64,
        _ => 1,
    }
}

/// Execution modes legal for an operation with the given element types.
///
/// The vector engine is dtype-specific: 8-bit tasks use `Vector`, 16-bit
/// tasks use `VectorFP16`. Convolutions may additionally run on the MAC-grid
/// modes (`Matrix` and the cuboid shapes); elementwise and pooling tasks are
/// vector-engine only.
pub fn legal_modes(
    operation: Operation,
    input_dtype: DataType,
    weights_dtype: DataType,
) -> Vec<ExecutionMode> {
    let wide = input_dtype.byte_width().max(weights_dtype.byte_width()) == 2;
    let vector = if wide {
        ExecutionMode::VectorFP16
    } else {
        ExecutionMode::Vector
    };
    match operation {
        Operation::Convolution | Operation::CMConvolution | Operation::DWConvolution => vec![
            vector,
            ExecutionMode::Matrix,
            ExecutionMode::Cuboid16x16,
            ExecutionMode::Cuboid8x16,
            ExecutionMode::Cuboid4x16,
        ],
        Operation::Elementwise | Operation::MaxPool | Operation::AveragePool => vec![vector],
    }
}

/// The mode a rule-based scheduler assigns when it does not search: `Matrix`
/// for dense convolutions, the dtype-matched vector engine otherwise.
pub fn default_mode(
    operation: Operation,
    input_dtype: DataType,
    weights_dtype: DataType,
) -> ExecutionMode {
    let wide = input_dtype.byte_width().max(weights_dtype.byte_width()) == 2;
    match operation {
        Operation::Convolution | Operation::CMConvolution => ExecutionMode::Matrix,
        _ if wide => ExecutionMode::VectorFP16,
        _ => ExecutionMode::Vector,
    }
}
