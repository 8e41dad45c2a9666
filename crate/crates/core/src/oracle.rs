//! Deterministic reference hardware model.
//!
//! [`profile_task`] walks a task's output tensor tile by tile — row by row
//! and kernel tap by kernel tap inside each tile — and charges cycles the
//! way the compute grid would spend them. It is the slow, faithful model:
//! query cost grows with tile count, while [`ideal_cycles`] is the cheap
//! closed-form perfect-utilization cost. All arithmetic is integer
//! fixed-point, so equal inputs give bit-identical results on every run.
//!
//! Cost structure, in order of application:
//! 1. ragged tiles: a tile is always charged its full lane width and a full
//!    channel group, so partial tiles waste lanes;
//! 2. fused-activation overhead inflates per-tap work multiplicatively;
//! 3. sparse acceleration shrinks the compute total by
//!    `1 - skip_fraction * sparsity_speedup_cap`, where the skip fraction
//!    combines input and weight sparsity as `1 - (1-si)*(1-sw)`, floored so
//!    a task never beats its dense ideal cost;
//! 4. a fixed startup charge per task (covers descriptor load and DMA setup).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::workload::{
    mac_count, macs_per_output_element_tap, ActivationFunction, DataType, ExecutionMode,
    ValidatedDescriptor, MYRIAD,
};

/// Output-tile footprint (rows, columns) processed per grid pass in each
/// execution mode.
pub fn mode_block(mode: ExecutionMode) -> (u32, u32) {
    match mode {
        ExecutionMode::Vector => (1, 16),
        ExecutionMode::VectorFP16 => (1, 8),
        ExecutionMode::Matrix => (4, 4),
        ExecutionMode::Cuboid16x16 => (16, 16),
        ExecutionMode::Cuboid8x16 => (8, 16),
        ExecutionMode::Cuboid4x16 => (4, 16),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("profile field {field} out of range: {reason}")]
    OutOfRange { field: &'static str, reason: String },
}

/// Synthetic accelerator parameters. Factors are fixed-point 1/10000 units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardwareProfile {
    macs_per_cycle: [u64; 6],
    dtype_factor_myriad: [u32; 4],
    fixed_startup_cycles: u64,
    channel_alignment: u32,
    activation_overhead_myriad: [u32; 6],
    sparsity_cap_myriad: u32,
}

impl HardwareProfile {
    pub fn new(
        macs_per_cycle: [u64; 6],
        dtype_factor_myriad: [u32; 4],
        fixed_startup_cycles: u64,
        channel_alignment: u32,
        activation_overhead_myriad: [u32; 6],
        sparsity_cap_myriad: u32,
    ) -> Result<Self, ProfileError> {
        if macs_per_cycle.iter().any(|&m| m == 0) {
            return Err(ProfileError::OutOfRange {
                field: "macs_per_cycle",
                reason: "every mode needs positive throughput".into(),
            });
        }
        if dtype_factor_myriad.iter().any(|&f| f == 0 || f > MYRIAD) {
            return Err(ProfileError::OutOfRange {
                field: "dtype_throughput_factor",
                reason: "factors must lie in (0, 1]".into(),
            });
        }
        if channel_alignment == 0 {
            return Err(ProfileError::OutOfRange {
                field: "channel_alignment",
                reason: "must be positive".into(),
            });
        }
        if sparsity_cap_myriad == 0 || sparsity_cap_myriad > MYRIAD {
            return Err(ProfileError::OutOfRange {
                field: "sparsity_speedup_cap",
                reason: "must lie in (0, 1]".into(),
            });
        }
        Ok(Self {
            macs_per_cycle,
            dtype_factor_myriad,
            fixed_startup_cycles,
            channel_alignment,
            activation_overhead_myriad,
            sparsity_cap_myriad,
        })
    }

    pub fn macs_per_cycle(&self, mode: ExecutionMode) -> u64 {
        self.macs_per_cycle[mode.ordinal() as usize]
    }

    pub fn dtype_factor_myriad(&self, dtype: DataType) -> u32 {
        self.dtype_factor_myriad[dtype.ordinal() as usize]
    }

    pub fn fixed_startup_cycles(&self) -> u64 {
        self.fixed_startup_cycles
    }

    pub fn channel_alignment(&self) -> u32 {
        self.channel_alignment
    }

    pub fn activation_overhead_myriad(&self, act: ActivationFunction) -> u32 {
        self.activation_overhead_myriad[act.ordinal() as usize]
    }

    pub fn sparsity_cap_myriad(&self) -> u32 {
        self.sparsity_cap_myriad
    }

    /// SHA-256 over the canonical byte encoding of every profile parameter.
    /// Dataset and model files embed this to tie records to the hardware
    /// semantics that produced them.
    pub fn profile_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update([1u8]); // encoding version
        for m in self.macs_per_cycle {
            hasher.update(m.to_le_bytes());
        }
        for f in self.dtype_factor_myriad {
            hasher.update(f.to_le_bytes());
        }
        hasher.update(self.fixed_startup_cycles.to_le_bytes());
        hasher.update(self.channel_alignment.to_le_bytes());
        for a in self.activation_overhead_myriad {
            hasher.update(a.to_le_bytes());
        }
        hasher.update(self.sparsity_cap_myriad.to_le_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Ground-truth cost of one profiled task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfiledCost {
    pub cycles: u64,
    pub ideal_cycles: u64,
    /// `ideal_cycles / cycles`, always in `(0, 1]`.
    pub utilization: f64,
}

fn ceil_div(n: u128, d: u128) -> u128 {
    (n + d - 1) / d
}

/// Cycles at perfect utilization: MAC count over peak throughput for the
/// task's execution mode, derated by the widest compute element type.
/// Never less than 1.
pub fn ideal_cycles(d: &ValidatedDescriptor, profile: &HardwareProfile) -> u64 {
    let macs = mac_count(d).expect("validated descriptor MAC count fits u64") as u128;
    let cap = profile.macs_per_cycle(d.execution_mode) as u128
        * profile.dtype_factor_myriad(d.widest_compute_dtype()) as u128;
    (ceil_div(macs * MYRIAD as u128, cap).max(1)) as u64
}

/// Per-tile charged work in mac-myriad units for one (row, tap) step.
fn tap_units(d: &ValidatedDescriptor, profile: &HardwareProfile) -> u128 {
    let (_, block_w) = mode_block(d.execution_mode);
    let act = (MYRIAD + profile.activation_overhead_myriad(d.activation)) as u128;
    block_w as u128
        * profile.channel_alignment() as u128
        * macs_per_output_element_tap(d) as u128
        * act
}

/// Simulates one task and returns its measured cost.
///
/// The output is cut into tiles of one execution-mode block by one channel
/// group. Within a tile the grid issues work row by row and kernel tap by
/// kernel tap, carrying the partial-cycle remainder between issues and
/// flushing the pipeline at the tile boundary. Lane and channel raggedness
/// is charged at full width.
pub fn profile_task(d: &ValidatedDescriptor, profile: &HardwareProfile) -> ProfiledCost {
    let ideal = ideal_cycles(d, profile);
    let (block_h, block_w) = mode_block(d.execution_mode);
    let ca = profile.channel_alignment();

    let cap_units = profile.macs_per_cycle(d.execution_mode) as u128
        * profile.dtype_factor_myriad(d.widest_compute_dtype()) as u128;
    let per_tap = tap_units(d, profile);
    let taps = (d.k_h as u64 * d.k_w as u64).max(1);

    let tiles_h = (d.out_h + block_h - 1) / block_h;
    let tiles_w = (d.out_w + block_w - 1) / block_w;
    let tiles_c = (d.out_c + ca - 1) / ca;

    let mut total_compute: u128 = 0;
    for _ in 0..d.batch {
        for th in 0..tiles_h {
            let rows = (d.out_h - th * block_h).min(block_h);
            for _ in 0..tiles_w {
                for _ in 0..tiles_c {
                    // One tile: issue row by row, tap by tap, carrying the
                    // partial-cycle remainder; flush at the tile boundary.
                    let mut tile_cycles: u128 = 0;
                    let mut rem: u128 = 0;
                    for _ in 0..rows {
                        for _ in 0..taps {
                            rem += per_tap;
                            tile_cycles += rem / cap_units;
                            rem %= cap_units;
                        }
                    }
                    if rem > 0 {
                        tile_cycles += 1;
                    }
                    total_compute += tile_cycles;
                }
            }
        }
    }

    // Sparse acceleration: a MAC is skippable when either operand is zero.
    let si = d.input_sparsity.myriad() as u128;
    let sw = d.weight_sparsity.myriad() as u128;
    let myriad = MYRIAD as u128;
    let skip = myriad * myriad - (myriad - si) * (myriad - sw); // denominator MYRIAD^2
    let mult_num = myriad * myriad * myriad - skip * profile.sparsity_cap_myriad() as u128;
    let accelerated = ceil_div(total_compute * mult_num, myriad * myriad * myriad);

    // Sparse skipping never beats the dense ideal issue rate.
    let compute = accelerated.max(ideal as u128);
    let cycles_wide = compute + profile.fixed_startup_cycles() as u128;
    let cycles = u64::try_from(cycles_wide).unwrap_or(u64::MAX);

    ProfiledCost {
        cycles,
        ideal_cycles: ideal,
        utilization: ideal as f64 / cycles as f64,
    }
}

/// Elementwise [`profile_task`], order preserved.
pub fn profile_batch(
    descriptors: &[ValidatedDescriptor],
    profile: &HardwareProfile,
) -> Vec<ProfiledCost> {
    descriptors.iter().map(|d| profile_task(d, profile)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_config;
    use crate::workload::{Operation, Sparsity, WorkloadDescriptor};

    fn base_conv() -> WorkloadDescriptor {
        WorkloadDescriptor {
            operation: Operation::Convolution,
            input_dtype: DataType::Int8,
            weights_dtype: DataType::Int8,
            output_dtype: DataType::Int8,
            execution_mode: ExecutionMode::Matrix,
            activation: ActivationFunction::None,
            batch: 1,
            in_h: 16,
            in_w: 16,
            in_c: 16,
            out_h: 16,
            out_w: 16,
            out_c: 16,
            k_h: 1,
            k_w: 1,
            s_h: 1,
            s_w: 1,
            p_top: 0,
            p_bottom: 0,
            p_left: 0,
            p_right: 0,
            input_sparsity: Sparsity::ZERO,
            weight_sparsity: Sparsity::ZERO,
            output_write_tiles: 1,
            reserved_a: 0,
            reserved_b: 0,
        }
    }

    /// Profile with no startup charge, for exact-utilization tests.
    fn no_startup_profile() -> HardwareProfile {
        let p = default_config().profile;
        HardwareProfile::new(
            core::array::from_fn(|i| {
                p.macs_per_cycle(ExecutionMode::ALL[i])
            }),
            core::array::from_fn(|i| p.dtype_factor_myriad(DataType::ALL[i])),
            0,
            p.channel_alignment(),
            core::array::from_fn(|i| p.activation_overhead_myriad(ActivationFunction::ALL[i])),
            p.sparsity_cap_myriad(),
        )
        .unwrap()
    }

    #[test]
    fn ideal_cycles_matches_exact_division() {
        let profile = default_config().profile;
        let d = base_conv().validate().unwrap();
        // 65,536 MACs at 256 MAC/cycle.
        assert_eq!(ideal_cycles(&d, &profile), 256);

        let mut fp16 = base_conv();
        fp16.input_dtype = DataType::Float16;
        fp16.weights_dtype = DataType::Float16;
        let fp16 = fp16.validate().unwrap();
        assert_eq!(ideal_cycles(&fp16, &profile), 512);
    }

    #[test]
    fn ideal_cycles_depthwise_vector_mode() {
        let profile = default_config().profile;
        let mut d = base_conv();
        d.operation = Operation::DWConvolution;
        d.execution_mode = ExecutionMode::Vector;
        d.in_h = 30;
        d.in_w = 30;
        d.in_c = 64;
        d.out_h = 28;
        d.out_w = 28;
        d.out_c = 64;
        d.k_h = 3;
        d.k_w = 3;
        let v = d.validate().unwrap();
        // 451,584 MACs at 16 MAC/cycle = 28,224; one-line independent check.
        assert_eq!(mac_count(&v).unwrap(), 451_584);
        assert_eq!(ideal_cycles(&v, &profile), 451_584 / 16);
        assert_eq!(ideal_cycles(&v, &profile), 28_224);
    }

    #[test]
    fn perfectly_aligned_workload_has_unit_utilization() {
        let profile = no_startup_profile();
        let d = base_conv().validate().unwrap();
        let cost = profile_task(&d, &profile);
        assert_eq!(cost.cycles, cost.ideal_cycles);
        assert_eq!(cost.utilization, 1.0);
    }

    #[test]
    fn ragged_channel_group_lowers_utilization() {
        let profile = no_startup_profile();
        let mut d = base_conv();
        d.out_c = 15;
        let v = d.validate().unwrap();
        let cost = profile_task(&v, &profile);
        assert!(cost.utilization < 1.0);
        assert!(cost.cycles > cost.ideal_cycles);
    }

    #[test]
    fn startup_charge_always_applies() {
        let profile = default_config().profile;
        let d = base_conv().validate().unwrap();
        let cost = profile_task(&d, &profile);
        assert_eq!(cost.cycles, 256 + 1000);
        assert!(cost.utilization < 1.0);
    }

    #[test]
    fn determinism_over_repeated_calls() {
        let profile = default_config().profile;
        let mut d = base_conv();
        d.out_c = 37;
        d.in_c = 37;
        d.activation = ActivationFunction::LRELU;
        d.input_sparsity = Sparsity::from_fraction(0.3).unwrap();
        let v = d.validate().unwrap();
        let first = profile_task(&v, &profile);
        for _ in 0..1000 {
            assert_eq!(profile_task(&v, &profile), first);
        }
    }

    #[test]
    fn sparsity_speeds_up_but_never_beats_ideal() {
        let profile = default_config().profile;
        let mut d = base_conv();
        d.input_sparsity = Sparsity::from_fraction(0.5).unwrap();
        d.weight_sparsity = Sparsity::from_fraction(0.5).unwrap();
        let sparse = profile_task(&d.validate().unwrap(), &profile);
        let dense = profile_task(&base_conv().validate().unwrap(), &profile);
        assert!(sparse.cycles <= dense.cycles);
        assert!(sparse.cycles >= sparse.ideal_cycles);
        // Fully aligned task: acceleration is clamped at the ideal floor.
        assert_eq!(sparse.cycles - profile.fixed_startup_cycles(), sparse.ideal_cycles);
    }

    #[test]
    fn activation_overhead_costs_cycles() {
        let profile = no_startup_profile();
        let mut d = base_conv();
        d.activation = ActivationFunction::LRELU;
        let with_act = profile_task(&d.validate().unwrap(), &profile);
        let without = profile_task(&base_conv().validate().unwrap(), &profile);
        assert!(with_act.cycles > without.cycles);
    }

    #[test]
    fn batch_is_elementwise_and_order_preserving() {
        let profile = default_config().profile;
        assert!(profile_batch(&[], &profile).is_empty());

        let a = base_conv().validate().unwrap();
        let mut d = base_conv();
        d.out_c = 24;
        let b = d.validate().unwrap();
        let batch = profile_batch(&[a, b], &profile);
        assert_eq!(batch[0], profile_task(&a, &profile));
        assert_eq!(batch[1], profile_task(&b, &profile));

        let flipped = profile_batch(&[b, a], &profile);
        assert_eq!(flipped[0], batch[1]);
        assert_eq!(flipped[1], batch[0]);
    }

    #[test]
    fn profile_hash_is_stable_and_value_sensitive() {
        let p1 = default_config().profile;
        let p2 = default_config().profile;
        assert_eq!(p1.profile_hash(), p2.profile_hash());

        let tweaked = HardwareProfile::new(
            core::array::from_fn(|i| p1.macs_per_cycle(ExecutionMode::ALL[i]) + 1),
            core::array::from_fn(|i| p1.dtype_factor_myriad(DataType::ALL[i])),
            p1.fixed_startup_cycles(),
            p1.channel_alignment(),
            core::array::from_fn(|i| p1.activation_overhead_myriad(ActivationFunction::ALL[i])),
            p1.sparsity_cap_myriad(),
        )
        .unwrap();
        assert_ne!(p1.profile_hash(), tweaked.profile_hash());
    }

    #[test]
    fn channel_split_conserves_ideal_and_never_wins_on_actual() {
        let profile = default_config().profile;
        let mut whole = base_conv();
        whole.out_c = 64;
        let whole_v = whole.validate().unwrap();
        let whole_cost = profile_task(&whole_v, &profile);

        let parts = 4;
        let mut ideal_sum = 0u64;
        let mut actual_sum = 0u64;
        for _ in 0..parts {
            let mut chunk = whole;
            chunk.out_c = 64 / parts;
            let v = chunk.validate().unwrap();
            let c = profile_task(&v, &profile);
            ideal_sum += c.ideal_cycles;
            actual_sum += c.cycles;
        }
        assert_eq!(ideal_sum, whole_cost.ideal_cycles);
        assert!(actual_sum >= whole_cost.cycles);
    }
}
