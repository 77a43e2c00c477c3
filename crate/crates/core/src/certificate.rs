//! Self-contained certificate files binding a claim and its witness to the
//! canonical serialisations of the systems it is about.
//!
//! ```json
//! {"claim":"k-conjugate","systems":["sha256:..."],"inputs":["{...}\n"],
//!  "verifier":"ladder","witness_digest":"sha256:...","witness":{...}}
//! ```
//!
//! `witness_digest` hashes the claim, verifier, system digests and the
//! canonical (compact, sorted-key) form of the witness, so any change to the
//! payload is caught before the witness is interpreted, while re-indenting
//! the file is harmless.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::bratteli::{parse_diagram, serialize_diagram, system_digest, ClopenSet, OrderedBratteliDiagram};
use crate::classify::{
    verify_ladder, verify_resolution, IntertwiningLadder, KObstruction, MorphismSchedule, Resolution,
};
use crate::dimgroup::{Answer, DimGroup};
use crate::error::{Error, Result};
use crate::fullgroup::{verify_conjugator, FullGroupElement};
use crate::invariants::{
    divisor_witness, trace_image_group, trace_images_isomorphic, verify_spectrum, DivisorWitness,
    SupernaturalTruncation, Valuation,
};

const DEPTH: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Claim {
    Weak,
    NotWeak,
    Tau,
    KConjugate,
    NotK,
    Conjugator,
    PartitionConjugator,
    Spectrum,
}

impl Claim {
    pub const ALL: [Claim; 8] = [
        Claim::Weak,
        Claim::NotWeak,
        Claim::Tau,
        Claim::KConjugate,
        Claim::NotK,
        Claim::Conjugator,
        Claim::PartitionConjugator,
        Claim::Spectrum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Claim::Weak => "weak",
            Claim::NotWeak => "not-weak",
            Claim::Tau => "tau",
            Claim::KConjugate => "k-conjugate",
            Claim::NotK => "not-k",
            Claim::Conjugator => "conjugator",
            Claim::PartitionConjugator => "partition-conjugator",
            Claim::Spectrum => "spectrum",
        }
    }

    pub fn verifier(self) -> &'static str {
        match self {
            Claim::Weak => "morphism-schedule",
            Claim::NotWeak => "divisor-witness",
            Claim::Tau => "spectra-and-trace-image",
            Claim::KConjugate => "ladder",
            Claim::NotK => "k-obstruction",
            Claim::Conjugator => "full-group",
            Claim::PartitionConjugator => "partition-conjugator",
            Claim::Spectrum => "spectrum",
        }
    }

    fn systems(self) -> usize {
        if matches!(self, Claim::Spectrum | Claim::PartitionConjugator) {
            1
        } else {
            2
        }
    }

    pub fn from_name(s: &str) -> Option<Claim> {
        Claim::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Witness for [`Claim::Tau`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauWitness {
    pub spectrum_a: SupernaturalTruncation,
    pub spectrum_b: SupernaturalTruncation,
}

/// Witness for [`Claim::PartitionConjugator`]: `element` conjugates the
/// system so that each block goes to its image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionConjugatorWitness {
    pub blocks: Vec<ClopenSet>,
    pub images: Vec<ClopenSet>,
    pub element: FullGroupElement,
    pub lookahead: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub claim: String,
    pub systems: Vec<String>,
    pub inputs: Vec<String>,
    pub verifier: String,
    pub witness_digest: String,
    pub witness: Box<RawValue>,
}

fn canonical(raw: &str) -> Result<String> {
    let v: serde_json::Value = serde_json::from_str(raw).map_err(|e| Error::Certificate(format!("malformed witness: {e}")))?;
    Ok(v.to_string())
}

fn witness_digest(claim: &str, verifier: &str, systems: &[String], witness: &str) -> String {
    let mut h = Sha256::new();
    for part in [claim, verifier] {
        h.update(part.as_bytes());
        h.update([0]);
    }
    for s in systems {
        h.update(s.as_bytes());
        h.update([0]);
    }
    h.update(witness.as_bytes());
    format!("sha256:{}", hex::encode(h.finalize()))
}

impl Certificate {
    pub fn issue<W: Serialize>(claim: Claim, systems: &[&OrderedBratteliDiagram], witness: &W) -> Result<Self> {
        if systems.len() != claim.systems() {
            return Err(Error::InvalidArgument(format!(
                "a {} certificate is about {} system(s)",
                claim.name(),
                claim.systems()
            )));
        }
        let raw = serde_json::to_string(witness).map_err(|e| Error::Certificate(e.to_string()))?;
        let raw = canonical(&raw)?;
        let digests: Vec<String> = systems.iter().map(|d| system_digest(d)).collect();
        Ok(Certificate {
            claim: claim.name().into(),
            witness_digest: witness_digest(claim.name(), claim.verifier(), &digests, &raw),
            systems: digests,
            inputs: systems.iter().map(|d| serialize_diagram(d)).collect(),
            verifier: claim.verifier().into(),
            witness: RawValue::from_string(raw).map_err(|e| Error::Certificate(e.to_string()))?,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificates always serialise");
        s.push('\n');
        s
    }

    /// Reads a certificate file, or a command report with the certificate
    /// embedded under `"certificate"`.
    pub fn from_json(text: &str) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::Certificate(format!("unreadable certificate: {e}"));
        match serde_json::from_str(text) {
            Ok(c) => Ok(c),
            Err(e) => {
                #[derive(Deserialize)]
                struct Wrapped {
                    certificate: Certificate,
                }
                serde_json::from_str::<Wrapped>(text).map(|w| w.certificate).map_err(|_| bad(e))
            }
        }
    }

    /// Checks the bindings, then runs the claim's verifier on the witness.
    pub fn verify(&self) -> Result<Claim> {
        let claim = Claim::from_name(&self.claim)
            .ok_or_else(|| Error::Certificate(format!("unknown claim {:?}", self.claim)))?;
        if self.verifier != claim.verifier() {
            return Err(Error::Certificate(format!("claim {} is not checked by {}", self.claim, self.verifier)));
        }
        if self.inputs.len() != claim.systems() || self.systems.len() != claim.systems() {
            return Err(Error::Certificate("wrong number of systems".into()));
        }
        let mut ds = Vec::new();
        for (text, digest) in self.inputs.iter().zip(&self.systems) {
            let d = parse_diagram(text).map_err(|e| Error::Certificate(format!("embedded system: {e}")))?;
            if &system_digest(&d) != digest || &serialize_diagram(&d) != text {
                return Err(Error::Certificate("embedded system does not match its digest".into()));
            }
            ds.push(d);
        }
        let raw = self.witness.get();
        if witness_digest(&self.claim, &self.verifier, &self.systems, &canonical(raw)?) != self.witness_digest {
            return Err(Error::Certificate("witness digest mismatch".into()));
        }
        let dgs: Vec<DimGroup> = ds.iter().map(DimGroup::new).collect();
        match claim {
            Claim::Spectrum => verify_spectrum(&dgs[0], &parse::<SupernaturalTruncation>(raw)?)?,
            Claim::Weak => parse::<MorphismSchedule>(raw)?.verify(&dgs[0], &dgs[1])?,
            Claim::NotWeak => parse::<DivisorWitness>(raw)?.verify(&dgs[0], &dgs[1])?,
            Claim::KConjugate => {
                let l = parse::<IntertwiningLadder>(raw)?;
                if !l.periodic && l.a_levels.len() > 1 {
                    return Err(Error::Certificate("a finite ladder does not prove isomorphism".into()));
                }
                let check = verify_ladder(&l, &dgs[0], &dgs[1])?;
                if !check.is_verified() {
                    return Err(Error::Certificate(format!("{check:?}")));
                }
            }
            Claim::NotK => verify_obstructions(&dgs[0], &dgs[1], &parse::<Vec<KObstruction>>(raw)?)?,
            Claim::Tau => verify_tau(&dgs[0], &dgs[1], &parse::<TauWitness>(raw)?)?,
            Claim::Conjugator => verify_resolution(&ds[0], &ds[1], &parse::<Resolution>(raw)?, DEPTH)?,
            Claim::PartitionConjugator => verify_partition_conjugator(&ds[0], &parse(raw)?)?,
        }
        Ok(claim)
    }
}

fn parse<T: DeserializeOwned>(raw: &str) -> Result<T> {
    serde_json::from_str(raw).map_err(|e| Error::Certificate(format!("malformed witness: {e}")))
}

fn verify_obstructions(a: &DimGroup, b: &DimGroup, obs: &[KObstruction]) -> Result<()> {
    if obs.is_empty() {
        return Err(Error::Certificate("no obstruction given".into()));
    }
    for o in obs {
        match o {
            KObstruction::Spectrum { n } => match divisor_witness(a, b, *n, DEPTH)? {
                Some(w) => w.verify(a, b)?,
                None => return Err(Error::Certificate(format!("{n} does not separate the divisor sets"))),
            },
            KObstruction::Rank { a: ra, b: rb } => {
                if ra == rb || a.eventual_rank() != Some(*ra) || b.eventual_rank() != Some(*rb) {
                    return Err(Error::Certificate("eventual ranks do not differ as stated".into()));
                }
            }
            KObstruction::TraceImage { .. } => {
                let c = trace_images_isomorphic(&trace_image_group(a)?, &trace_image_group(b)?, DEPTH);
                if c.answer != Answer::No {
                    return Err(Error::Certificate("trace images are not shown to differ".into()));
                }
            }
        }
    }
    Ok(())
}

fn verify_partition_conjugator(d: &OrderedBratteliDiagram, w: &PartitionConjugatorWitness) -> Result<()> {
    if w.lookahead == 0 || w.blocks.len() != w.images.len() {
        return Err(Error::Certificate("malformed partition pair".into()));
    }
    let dg = DimGroup::new(d);
    for (i, (u, v)) in w.blocks.iter().zip(&w.images).enumerate() {
        if dg.equal(&d.class_of_clopen(u)?, &d.class_of_clopen(v)?, DEPTH)? != Answer::Yes {
            return Err(Error::Certificate(format!("block {i} and its image have different classes")));
        }
    }
    let check = verify_conjugator(d, &w.element, &w.blocks, &w.images, w.lookahead)
        .map_err(|e| Error::Certificate(e.to_string()))?;
    if !check.is_verified() {
        return Err(Error::Certificate(format!("{check:?}")));
    }
    Ok(())
}

fn same_valuation(x: &Valuation, y: &Valuation) -> bool {
    match (x, y) {
        (Valuation::Exact { v: a, .. }, Valuation::Exact { v: b, .. }) => a == b,
        (Valuation::Infinite(_), Valuation::Infinite(_)) => true,
        _ => false,
    }
}

fn verify_tau(a: &DimGroup, b: &DimGroup, w: &TauWitness) -> Result<()> {
    verify_spectrum(a, &w.spectrum_a)?;
    verify_spectrum(b, &w.spectrum_b)?;
    if w.spectrum_a.prime_cutoff != w.spectrum_b.prime_cutoff
        || w.spectrum_a.entries.len() != w.spectrum_b.entries.len()
        || w.spectrum_a.entries.iter().zip(&w.spectrum_b.entries).any(|(x, y)| !same_valuation(&x.valuation, &y.valuation))
    {
        return Err(Error::Certificate("spectra differ".into()));
    }
    let c = trace_images_isomorphic(&trace_image_group(a)?, &trace_image_group(b)?, DEPTH);
    if c.answer != Answer::Yes {
        return Err(Error::Certificate(format!("trace images not shown equal: {}", c.reason)));
    }
    Ok(())
}
