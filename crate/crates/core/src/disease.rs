//! Parametric stenosis and aneurysm profiles and their random sampling.
//!
//! A disease occupies the normalised interval `[b, e]` of a vessel chain. The
//! area relative to the healthy vessel follows a raised-cosine bump that is
//! exactly 1 at both ends and reaches `1 - S` (stenosis) or `1 + S`
//! (aneurysm) at the centre.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::ArterialNetworkModel;
use crate::sites::Side;

pub const REFERENCE_BOUNDS: (f64, f64) = (0.2, 0.8);
pub const START_MIN: f64 = 0.1;
pub const END_MAX: f64 = 0.9;
/// Minimum gap between the reference location and either end of the profile.
pub const MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiseaseKind {
    CAS,
    SAS,
    PAD,
    AAA,
    /// Low-severity abdominal aortic aneurysm.
    #[serde(rename = "AAA_L")]
    AaaL,
}

impl DiseaseKind {
    pub const ALL: [DiseaseKind; 5] = [
        DiseaseKind::CAS,
        DiseaseKind::SAS,
        DiseaseKind::PAD,
        DiseaseKind::AAA,
        DiseaseKind::AaaL,
    ];

    pub fn is_stenosis(self) -> bool {
        matches!(self, DiseaseKind::CAS | DiseaseKind::SAS | DiseaseKind::PAD)
    }

    pub fn is_aneurysm(self) -> bool {
        !self.is_stenosis()
    }

    pub fn is_lateral(self) -> bool {
        self.is_stenosis()
    }

    /// Closed interval the severity is drawn from.
    pub fn severity_bounds(self) -> (f64, f64) {
        match self {
            DiseaseKind::CAS | DiseaseKind::SAS | DiseaseKind::PAD => (0.5, 0.95),
            DiseaseKind::AAA => (7.13, 25.93),
            DiseaseKind::AaaL => (3.0, 7.0),
        }
    }

    pub fn chain_family(self) -> ChainFamily {
        match self {
            DiseaseKind::CAS => ChainFamily::Carotid,
            DiseaseKind::SAS => ChainFamily::Subclavian,
            DiseaseKind::PAD => ChainFamily::Peripheral,
            DiseaseKind::AAA | DiseaseKind::AaaL => ChainFamily::AbdominalAortic,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            DiseaseKind::CAS => "CAS",
            DiseaseKind::SAS => "SAS",
            DiseaseKind::PAD => "PAD",
            DiseaseKind::AAA => "AAA",
            DiseaseKind::AaaL => "AAA_L",
        }
    }

    /// Small stable integer used for seed derivation.
    pub fn code(self) -> u64 {
        match self {
            DiseaseKind::CAS => 1,
            DiseaseKind::SAS => 2,
            DiseaseKind::PAD => 3,
            DiseaseKind::AAA => 4,
            DiseaseKind::AaaL => 5,
        }
    }
}

impl fmt::Display for DiseaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for DiseaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "cas" => Ok(DiseaseKind::CAS),
            "sas" => Ok(DiseaseKind::SAS),
            "pad" => Ok(DiseaseKind::PAD),
            "aaa" => Ok(DiseaseKind::AAA),
            "aaa_l" | "aaal" => Ok(DiseaseKind::AaaL),
            other => Err(Error::InvalidConfig(format!("unknown disease '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiseaseSide {
    Left,
    Right,
    NotApplicable,
}

impl DiseaseSide {
    pub fn side(self) -> Option<Side> {
        match self {
            DiseaseSide::Left => Some(Side::Left),
            DiseaseSide::Right => Some(Side::Right),
            DiseaseSide::NotApplicable => None,
        }
    }
}

impl From<Option<Side>> for DiseaseSide {
    fn from(side: Option<Side>) -> Self {
        match side {
            Some(Side::Left) => DiseaseSide::Left,
            Some(Side::Right) => DiseaseSide::Right,
            None => DiseaseSide::NotApplicable,
        }
    }
}

/// Floats written with 17 significant digits so files round-trip exactly.
mod f17 {
    use serde::Serializer;
    use serde_json::value::RawValue;

    pub fn format(v: f64) -> String {
        if v == 0.0 || !v.is_finite() {
            return format!("{v:?}");
        }
        let exp = v.abs().log10().floor() as i32;
        let precision = (16 - exp).max(1) as usize;
        format!("{v:.precision$}")
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(format(*v)).map_err(serde::ser::Error::custom)?;
        serde::Serialize::serialize(&raw, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiseaseSpec {
    pub kind: DiseaseKind,
    #[serde(serialize_with = "f17::serialize")]
    pub severity: f64,
    #[serde(serialize_with = "f17::serialize")]
    pub b: f64,
    #[serde(serialize_with = "f17::serialize")]
    pub e: f64,
    #[serde(serialize_with = "f17::serialize")]
    pub r: f64,
    pub side: DiseaseSide,
}

impl DiseaseSpec {
    /// Builds a spec and checks every sampling bound for its kind.
    pub fn new(
        kind: DiseaseKind,
        severity: f64,
        b: f64,
        e: f64,
        r: f64,
        side: DiseaseSide,
    ) -> Result<Self> {
        let spec = DiseaseSpec {
            kind,
            severity,
            b,
            e,
            r,
            side,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Full check: geometry plus the kind's sampling bounds.
    pub fn validate(&self) -> Result<()> {
        self.validate_geometry()?;
        let (lo, hi) = self.kind.severity_bounds();
        if !(lo..=hi).contains(&self.severity) {
            return Err(Error::InvalidDisease(format!(
                "severity {} outside [{lo}, {hi}] for {}",
                self.severity, self.kind
            )));
        }
        let (rlo, rhi) = REFERENCE_BOUNDS;
        let ok = (rlo..=rhi).contains(&self.r)
            && self.b >= START_MIN
            && self.b <= self.r - MARGIN
            && self.e >= self.r + MARGIN
            && self.e <= END_MAX;
        if !ok {
            return Err(Error::InvalidDisease(format!(
                "location (b={}, r={}, e={}) violates sampling bounds",
                self.b, self.r, self.e
            )));
        }
        Ok(())
    }

    /// Weaker check used when applying a profile: any `0 <= b < e <= 1` and a
    /// severity that keeps the area positive. Zero severity is allowed as an
    /// identity probe.
    pub fn validate_geometry(&self) -> Result<()> {
        let finite = [self.severity, self.b, self.e, self.r]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.b < 0.0 || self.e > 1.0 || self.b >= self.e {
            return Err(Error::InvalidDisease(format!(
                "need 0 <= b < e <= 1, got b={} e={}",
                self.b, self.e
            )));
        }
        if self.severity < 0.0 || (self.kind.is_stenosis() && self.severity >= 1.0) {
            return Err(Error::InvalidDisease(format!(
                "severity {} invalid for {}",
                self.severity, self.kind
            )));
        }
        match (self.kind.is_lateral(), self.side) {
            (true, DiseaseSide::NotApplicable) => Err(Error::InvalidDisease(format!(
                "{} requires a side",
                self.kind
            ))),
            (false, DiseaseSide::Left | DiseaseSide::Right) => {
                Err(Error::InvalidDisease(format!("{} has no side", self.kind)))
            }
            _ => Ok(()),
        }
    }

    /// Relative area `A / A_healthy` at normalised chain coordinate `x`.
    pub fn area_multiplier(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::CoordinateOutOfRange(x));
        }
        Ok(self.profile(x))
    }

    /// Unchecked profile evaluation; `x` is assumed to be in `[0, 1]`.
    pub(crate) fn profile(&self, x: f64) -> f64 {
        if x < self.b || x > self.e {
            return 1.0;
        }
        let half = 0.5 * self.severity;
        let c = (2.0 * (x - self.b) * PI / (self.e - self.b)).cos();
        if self.kind.is_stenosis() {
            (1.0 - half) + half * c
        } else {
            (1.0 + half) - half * c
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.b + self.e)
    }
}

/// Draws `r`, then `b`, then `e`, then the severity and finally the side.
pub fn sample_disease<R: Rng + ?Sized>(kind: DiseaseKind, rng: &mut R) -> DiseaseSpec {
    let mut uniform = |lo: f64, hi: f64| lo + rng.gen::<f64>() * (hi - lo);
    let r = uniform(REFERENCE_BOUNDS.0, REFERENCE_BOUNDS.1);
    let b = uniform(START_MIN, r - MARGIN);
    let e = uniform(r + MARGIN, END_MAX);
    let (lo, hi) = kind.severity_bounds();
    let severity = uniform(lo, hi);
    let side = if kind.is_lateral() {
        if rng.gen::<f64>() < 0.5 {
            DiseaseSide::Left
        } else {
            DiseaseSide::Right
        }
    } else {
        DiseaseSide::NotApplicable
    };
    DiseaseSpec {
        kind,
        severity,
        b,
        e,
        r,
        side,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChainFamily {
    Carotid,
    Subclavian,
    Peripheral,
    AbdominalAortic,
}

impl ChainFamily {
    pub fn prefix(self) -> &'static str {
        match self {
            ChainFamily::Carotid => "CA",
            ChainFamily::Subclavian => "SA",
            ChainFamily::Peripheral => "PA",
            ChainFamily::AbdominalAortic => "AA",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChainId {
    pub family: ChainFamily,
    pub side: Option<Side>,
}

impl fmt::Display for ChainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Some(s) => write!(f, "{}_{}", self.family.prefix(), s.letter()),
            None => f.write_str(self.family.prefix()),
        }
    }
}

/// An ordered run of segments in which a disease may be placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselChain {
    pub id: ChainId,
    pub segments: Vec<usize>,
    /// `segments.len() + 1` normalised boundaries, first 0 and last 1.
    pub boundaries: Vec<f64>,
}

impl VesselChain {
    /// Places segment boundaries proportionally to segment length.
    pub fn from_lengths(id: ChainId, segments: Vec<usize>, lengths: &[f64]) -> Result<Self> {
        if segments.is_empty() || segments.len() != lengths.len() {
            return Err(Error::InvalidNetwork(format!(
                "chain {id} needs one length per segment"
            )));
        }
        if lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidNetwork(format!(
                "chain {id} has non-positive length"
            )));
        }
        let total: f64 = lengths.iter().sum();
        let mut boundaries = Vec::with_capacity(lengths.len() + 1);
        let mut acc = 0.0;
        boundaries.push(0.0);
        for l in &lengths[..lengths.len() - 1] {
            acc += l;
            boundaries.push(acc / total);
        }
        boundaries.push(1.0);
        let chain = VesselChain {
            id,
            segments,
            boundaries,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.boundaries;
        let ok = b.len() == self.segments.len() + 1
            && b.first() == Some(&0.0)
            && b.last() == Some(&1.0)
            && b.windows(2).all(|w| w[1] > w[0]);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidNetwork(format!(
                "chain {} boundaries must increase strictly from 0 to 1",
                self.id
            )))
        }
    }
}

/// Returns a copy of `network` whose chain segments have their area scaled
/// by the disease profile relative to the healthy baseline. Segments outside
/// the chain are copied untouched.
pub fn apply_disease(
    network: &ArterialNetworkModel,
    chain: &VesselChain,
    spec: &DiseaseSpec,
) -> Result<ArterialNetworkModel> {
    spec.validate_geometry()?;
    let known = network
        .chains
        .iter()
        .find(|c| c.id == chain.id)
        .ok_or_else(|| Error::UnknownChain(chain.id.to_string()))?;
    if known != chain {
        return Err(Error::UnknownChain(format!(
            "{} (segments differ from network)",
            chain.id
        )));
    }
    if chain.id.family != spec.kind.chain_family() || chain.id.side != spec.side.side() {
        return Err(Error::ChainMismatch {
            kind: format!("{} ({:?})", spec.kind, spec.side),
            chain: chain.id.to_string(),
        });
    }

    let mut out = network.clone();
    for (i, &seg_id) in chain.segments.iter().enumerate() {
        let (x0, x1) = (chain.boundaries[i], chain.boundaries[i + 1]);
        let seg = out.segments.get_mut(seg_id).ok_or_else(|| {
            Error::UnknownChain(format!("{} references segment {seg_id}", chain.id))
        })?;
        let n = seg.baseline_areas.len() as f64;
        for (k, (area, &healthy)) in seg.areas.iter_mut().zip(&seg.baseline_areas).enumerate() {
            let local = (k as f64 + 0.5) / n;
            let x = (x0 + local * (x1 - x0)).clamp(0.0, 1.0);
            *area = healthy * spec.profile(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::RngCore;

    /// Stream returning the lowest quantile for every draw.
    struct Zeros;

    impl RngCore for Zeros {
        fn next_u32(&mut self) -> u32 {
            0
        }
        fn next_u64(&mut self) -> u64 {
            0
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            dest.fill(0)
        }
        fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
            dest.fill(0);
            Ok(())
        }
    }

    fn spec(kind: DiseaseKind, s: f64, b: f64, e: f64) -> DiseaseSpec {
        let side = if kind.is_lateral() {
            DiseaseSide::Right
        } else {
            DiseaseSide::NotApplicable
        };
        DiseaseSpec {
            kind,
            severity: s,
            b,
            e,
            r: 0.5 * (b + e),
            side,
        }
    }

    #[test]
    fn figure_profiles_hit_their_extrema() {
        let st = spec(DiseaseKind::CAS, 0.6, 0.2, 0.8);
        assert!((st.area_multiplier(0.5).unwrap() - 0.4).abs() < 1e-15);
        let an = spec(DiseaseKind::AAA, 8.0, 0.2, 0.8);
        assert!((an.area_multiplier(0.5).unwrap() - 9.0).abs() < 1e-15);
        assert_eq!(an.area_multiplier(0.05).unwrap(), 1.0);
        assert_eq!(st.area_multiplier(0.95).unwrap(), 1.0);
    }

    #[test]
    fn ends_of_profile_are_unity() {
        let st = spec(DiseaseKind::PAD, 0.9, 0.13, 0.71);
        assert!((st.area_multiplier(0.13).unwrap() - 1.0).abs() < 1e-15);
        assert!((st.area_multiplier(0.71).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_coordinate_is_rejected() {
        let st = spec(DiseaseKind::CAS, 0.6, 0.2, 0.8);
        assert!(matches!(
            st.area_multiplier(1.5),
            Err(Error::CoordinateOutOfRange(_))
        ));
        assert!(st.area_multiplier(-0.01).is_err());
    }

    #[test]
    fn zero_quantile_stream_gives_lower_bounds() {
        let s = sample_disease(DiseaseKind::AAA, &mut Zeros);
        assert_eq!(s.r, 0.2);
        assert_eq!(s.b, 0.1);
        assert!((s.e - 0.25).abs() < 1e-15);
        assert_eq!(s.severity, 7.13);
        assert_eq!(s.side, DiseaseSide::NotApplicable);
    }

    #[test]
    fn sampled_stenosis_respects_bounds() {
        let mut rng = seed::stream(11);
        for _ in 0..2000 {
            let s = sample_disease(DiseaseKind::CAS, &mut rng);
            s.validate().unwrap();
            assert!(s.e - s.b >= 0.1 - 1e-12);
            assert!(s.side != DiseaseSide::NotApplicable);
        }
    }

    #[test]
    fn laterality_rules() {
        let mut s = spec(DiseaseKind::AAA, 8.0, 0.2, 0.8);
        s.side = DiseaseSide::Left;
        assert!(s.validate_geometry().is_err());
        let mut s = spec(DiseaseKind::SAS, 0.6, 0.2, 0.8);
        s.side = DiseaseSide::NotApplicable;
        assert!(s.validate_geometry().is_err());
    }

    #[test]
    fn json_uses_seventeen_significant_digits() {
        let s = DiseaseSpec::new(
            DiseaseKind::AAA,
            7.13,
            0.1,
            0.25,
            0.2,
            DiseaseSide::NotApplicable,
        )
        .unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"severity\":7.1299999999999999"), "{json}");
        assert!(json.contains("\"kind\":\"AAA\""));
        let back: DiseaseSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn chain_boundaries_follow_lengths() {
        let id = ChainId {
            family: ChainFamily::Subclavian,
            side: Some(Side::Left),
        };
        let c = VesselChain::from_lengths(id, vec![3, 4], &[1.0, 3.0]).unwrap();
        assert_eq!(c.boundaries, vec![0.0, 0.25, 1.0]);
        assert_eq!(id.to_string(), "SA_L");
    }
}
