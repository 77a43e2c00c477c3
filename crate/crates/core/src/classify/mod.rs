//! Deciders for weak approximate conjugacy, approximate tau-conjugacy and
//! approximate K-conjugacy of stationary and explicit systems, with the
//! finite witnesses they emit.
//!
//! A "no" verdict is only ever produced from an invariant that separates the
//! two systems; exhausted searches report `Unknown`. The first K-group of a
//! Cantor minimal system is not modelled: it is always `Z` and its matching
//! never constrains anything here.

mod frobenius;
mod ladder;
mod lift;
mod morphism;
mod resolution;

pub use frobenius::{frobenius, represent};
pub use ladder::{search_ladder, verify_ladder, IntertwiningLadder, LadderCheck};
pub use lift::{
    bezout_lift, lift_class_under, partition_from_classes, partition_homeomorphism_from_hom, BezoutLift,
    PartitionHomeomorphism,
};
pub use morphism::{build_k0_morphism, build_positive_k0_morphism, K0Morphism};
pub use resolution::{conjugate_at_resolution, verify_resolution, Resolution, VERIFY_LOOKAHEAD};

use serde::{Deserialize, Serialize};

use crate::dimgroup::{Answer, DimGroup};
use crate::error::{Error, Result};
use crate::invariants::{
    divisor_witness, spectra_equal, trace_image_group, trace_images_isomorphic, DivisorWitness, SpectraComparison,
    SpectrumBounds, SupernaturalTruncation,
};

/// Search and decision bounds shared by every decider.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub depth: usize,
    pub prime_cutoff: u64,
    pub valuation_cutoff: u32,
    pub ladder_span: usize,
    /// Refinement levels tried above the partition level by the conjugator.
    pub max_level: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            depth: 40,
            prime_cutoff: 97,
            valuation_cutoff: 20,
            ladder_span: 12,
            max_level: 8,
        }
    }
}

impl Bounds {
    pub fn spectrum(&self) -> SpectrumBounds {
        SpectrumBounds {
            prime_cutoff: self.prime_cutoff,
            valuation_cutoff: self.valuation_cutoff,
            depth: self.depth,
        }
    }
}

/// Levels at which the weak-conjugacy schedule builds morphisms.
pub const SCHEDULE_LEVELS: [usize; 3] = [1, 2, 3];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismSchedule {
    pub a_to_b: Vec<K0Morphism>,
    pub b_to_a: Vec<K0Morphism>,
}

impl MorphismSchedule {
    pub fn verify(&self, a: &DimGroup, b: &DimGroup) -> Result<()> {
        if self.a_to_b.is_empty() || self.b_to_a.is_empty() {
            return Err(Error::Certificate("schedule must run in both directions".into()));
        }
        self.a_to_b.iter().try_for_each(|t| t.verify(a, b))?;
        self.b_to_a.iter().try_for_each(|t| t.verify(b, a))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum WeakVerdict {
    WeaklyConjugate { schedule: MorphismSchedule },
    Not { n: u64, witness: Option<DivisorWitness> },
    Unknown { reason: String },
}

fn schedule_direction(x: &DimGroup, y: &DimGroup, depth: usize) -> Result<Vec<K0Morphism>> {
    SCHEDULE_LEVELS
        .iter()
        .map(|&l| build_k0_morphism(x, l, y, l, depth))
        .collect()
}

/// Weak approximate conjugacy: equality of divisor sets of the order units.
pub fn decide_weak(a: &DimGroup, b: &DimGroup, bounds: &Bounds) -> Result<WeakVerdict> {
    match spectra_equal(a, b, &bounds.spectrum())? {
        SpectraComparison::Distinct { n, witness } => Ok(WeakVerdict::Not { n, witness }),
        SpectraComparison::Unknown { .. } => Ok(WeakVerdict::Unknown {
            reason: format!("spectra undecided below prime {}", bounds.prime_cutoff),
        }),
        SpectraComparison::Equal { .. } => {
            let built = schedule_direction(a, b, bounds.depth)
                .and_then(|ab| Ok((ab, schedule_direction(b, a, bounds.depth)?)));
            match built {
                Ok((a_to_b, b_to_a)) => Ok(WeakVerdict::WeaklyConjugate {
                    schedule: MorphismSchedule { a_to_b, b_to_a },
                }),
                Err(Error::Obstruction { n, .. }) => Ok(WeakVerdict::Not {
                    n,
                    witness: divisor_witness(a, b, n, bounds.depth)?,
                }),
                Err(e) if e.is_capability() => Ok(WeakVerdict::Unknown { reason: e.to_string() }),
                Err(e) => Err(e),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TauVerdict {
    TauConjugate {
        spectrum_a: SupernaturalTruncation,
        spectrum_b: SupernaturalTruncation,
        trace_image: String,
    },
    Not {
        invariant: String,
        n: Option<u64>,
        reason: String,
    },
    Unknown {
        reason: String,
    },
}

/// Approximate tau-conjugacy: equal divisor sets and equal trace images.
pub fn decide_tau(a: &DimGroup, b: &DimGroup, bounds: &Bounds) -> Result<TauVerdict> {
    let spectra = spectra_equal(a, b, &bounds.spectrum())?;
    if let SpectraComparison::Distinct { n, .. } = spectra {
        return Ok(TauVerdict::Not {
            invariant: "spectrum".into(),
            n: Some(n),
            reason: format!("{n} divides exactly one order unit"),
        });
    }
    let (ta, tb) = (trace_image_group(a)?, trace_image_group(b)?);
    let traces = trace_images_isomorphic(&ta, &tb, bounds.depth);
    match (spectra, traces.answer) {
        (_, Answer::No) => Ok(TauVerdict::Not {
            invariant: "trace-image".into(),
            n: None,
            reason: traces.reason,
        }),
        (SpectraComparison::Equal { a: sa, b: sb }, Answer::Yes) => Ok(TauVerdict::TauConjugate {
            spectrum_a: sa,
            spectrum_b: sb,
            trace_image: ta.to_string(),
        }),
        (SpectraComparison::Equal { .. }, _) => Ok(TauVerdict::Unknown { reason: traces.reason }),
        _ => Ok(TauVerdict::Unknown {
            reason: format!("spectra undecided below prime {}", bounds.prime_cutoff),
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KObstruction {
    Spectrum { n: u64 },
    Rank { a: usize, b: usize },
    TraceImage { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum KVerdict {
    KConjugate { ladder: IntertwiningLadder },
    /// Every obstruction that applies, in the order they are tried.
    Not { obstructions: Vec<KObstruction> },
    Unknown { span: usize, reason: String },
}

/// Approximate K-conjugacy (unital order isomorphism of dimension groups).
///
/// Obstructions are tried first in a fixed order: divisor sets, eventual
/// rank, trace images. Only when none applies does a bounded ladder search
/// run.
pub fn decide_k_conjugacy(a: &DimGroup, b: &DimGroup, bounds: &Bounds) -> Result<KVerdict> {
    let mut obstructions = Vec::new();
    if let SpectraComparison::Distinct { n, .. } = spectra_equal(a, b, &bounds.spectrum())? {
        obstructions.push(KObstruction::Spectrum { n });
    }
    if let (Some(ra), Some(rb)) = (a.eventual_rank(), b.eventual_rank()) {
        if ra != rb {
            obstructions.push(KObstruction::Rank { a: ra, b: rb });
        }
    }
    let traces = trace_images_isomorphic(&trace_image_group(a)?, &trace_image_group(b)?, bounds.depth);
    if traces.answer == Answer::No {
        obstructions.push(KObstruction::TraceImage { reason: traces.reason });
    }
    if !obstructions.is_empty() {
        return Ok(KVerdict::Not { obstructions });
    }
    if !a.is_stationary() || !b.is_stationary() {
        return Ok(KVerdict::Unknown {
            span: 0,
            reason: "ladder search needs stationary presentations".into(),
        });
    }
    match search_ladder(a, b, bounds.ladder_span) {
        Ok(Some(ladder)) => Ok(KVerdict::KConjugate { ladder }),
        Ok(None) => Ok(KVerdict::Unknown {
            span: bounds.ladder_span,
            reason: "no ladder within the level span".into(),
        }),
        Err(e) if e.is_capability() => Ok(KVerdict::Unknown { span: bounds.ladder_span, reason: e.to_string() }),
        Err(e) => Err(e),
    }
}
