//! Arterial tree geometry, terminal loads and the 71-segment reference network.
//!
//! Units are CGS throughout: lengths in cm, areas in cm², wave speeds in cm/s,
//! resistances in dyn·s/cm⁵ and compliances in cm⁵/dyn.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::disease::{ChainFamily, ChainId, DiseaseSpec, VesselChain};
use crate::error::{Error, Result};
use crate::sites::{Measurement, Side, Site};

pub const BLOOD_DENSITY: f64 = 1.06;
pub const BLOOD_VISCOSITY: f64 = 0.035;
pub const DEFAULT_NODES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub parent: Option<usize>,
    pub length: f64,
    /// Cross-sectional area of each of the equal-length axial elements.
    pub areas: Vec<f64>,
    /// Healthy areas the disease profile is applied against.
    pub baseline_areas: Vec<f64>,
    pub wave_speed: f64,
    pub density: f64,
}

impl Segment {
    pub fn nodes(&self) -> usize {
        self.areas.len()
    }

    pub fn element_length(&self) -> f64 {
        self.length / self.areas.len() as f64
    }
}

/// Three-element Windkessel closing a leaf segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindkesselLoad {
    pub segment: usize,
    pub r_proximal: f64,
    pub r_distal: f64,
    pub compliance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteLocation {
    pub segment: usize,
    /// Fractional position along the segment, 0 = inlet.
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArterialNetworkModel {
    pub segments: Vec<Segment>,
    pub loads: Vec<WindkesselLoad>,
    pub root: usize,
    pub sites: BTreeMap<Site, SiteLocation>,
    pub chains: Vec<VesselChain>,
    pub viscosity: f64,
}

impl ArterialNetworkModel {
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.segments.len()];
        for (i, s) in self.segments.iter().enumerate() {
            if let Some(p) = s.parent {
                if p < children.len() {
                    children[p].push(i);
                }
            }
        }
        children
    }

    /// Breadth-first order from the root; parents precede children.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let children = self.children();
        let mut order = Vec::with_capacity(self.segments.len());
        let mut seen = vec![false; self.segments.len()];
        let mut queue = std::collections::VecDeque::from([self.root]);
        while let Some(s) = queue.pop_front() {
            if std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidNetwork(format!("segment {s} reached twice")));
            }
            order.push(s);
            queue.extend(children[s].iter().copied());
        }
        if order.len() != self.segments.len() {
            return Err(Error::InvalidNetwork(format!(
                "{} of {} segments unreachable from the root",
                self.segments.len() - order.len(),
                self.segments.len()
            )));
        }
        Ok(order)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.segments.len();
        if self.root >= n {
            return Err(Error::InvalidNetwork("root index out of range".into()));
        }
        for (i, s) in self.segments.iter().enumerate() {
            match s.parent {
                None if i != self.root => {
                    return Err(Error::InvalidNetwork(format!(
                        "segment {} has no parent",
                        s.name
                    )))
                }
                Some(_) if i == self.root => {
                    return Err(Error::InvalidNetwork("root has a parent".into()))
                }
                Some(p) if p >= n => {
                    return Err(Error::InvalidNetwork(format!(
                        "segment {} has unknown parent",
                        s.name
                    )))
                }
                _ => {}
            }
            if s.areas.is_empty() || s.areas.len() != s.baseline_areas.len() {
                return Err(Error::InvalidNetwork(format!(
                    "segment {} has no axial elements",
                    s.name
                )));
            }
            let positive = s.length > 0.0
                && s.wave_speed > 0.0
                && s.density > 0.0
                && s.areas
                    .iter()
                    .chain(&s.baseline_areas)
                    .all(|&a| a > 0.0 && a.is_finite());
            if !positive {
                return Err(Error::InvalidNetwork(format!(
                    "segment {} has a non-positive length, area or wave speed",
                    s.name
                )));
            }
        }
        self.topological_order()?;
        let children = self.children();
        for (i, c) in children.iter().enumerate() {
            let loads = self.loads.iter().filter(|l| l.segment == i).count();
            if c.is_empty() && loads != 1 {
                return Err(Error::InvalidNetwork(format!(
                    "leaf {} needs exactly one terminal load",
                    self.segments[i].name
                )));
            }
            if !c.is_empty() && loads != 0 {
                return Err(Error::InvalidNetwork(format!(
                    "internal segment {} carries a terminal load",
                    self.segments[i].name
                )));
            }
        }
        for l in &self.loads {
            if !(l.r_proximal > 0.0 && l.r_distal > 0.0 && l.compliance > 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "invalid Windkessel on segment {}",
                    l.segment
                )));
            }
        }
        for site in Site::all() {
            let loc = self
                .sites
                .get(&site)
                .ok_or_else(|| Error::MissingSite(site.key()))?;
            if loc.segment >= n || !(0.0..=1.0).contains(&loc.position) {
                return Err(Error::InvalidNetwork(format!(
                    "site {site} does not resolve"
                )));
            }
        }
        for c in &self.chains {
            c.validate()?;
            if c.segments.iter().any(|&s| s >= n) {
                return Err(Error::InvalidNetwork(format!(
                    "chain {} references unknown segment",
                    c.id
                )));
            }
        }
        if !(self.viscosity > 0.0) {
            return Err(Error::InvalidNetwork("viscosity must be positive".into()));
        }
        Ok(())
    }

    pub fn segment_index(&self, name: &str) -> Option<usize> {
        self.segments.iter().position(|s| s.name == name)
    }

    pub fn chain(&self, id: ChainId) -> Result<&VesselChain> {
        self.chains
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::UnknownChain(id.to_string()))
    }

    /// The chain a disease spec belongs in (family plus side).
    pub fn chain_for(&self, spec: &DiseaseSpec) -> Result<&VesselChain> {
        self.chain(ChainId {
            family: spec.kind.chain_family(),
            side: spec.side.side(),
        })
    }
}

/// Subject-level scalings applied to the reference geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Multiplies every baseline area.
    pub area_scale: f64,
    /// Multiplies every wave speed.
    pub stiffness_scale: f64,
    /// Multiplies every terminal resistance.
    pub resistance_scale: f64,
    /// Per-segment wave-speed factors; empty means all ones.
    #[serde(default)]
    pub segment_wave_speed: Vec<f64>,
    /// Per-terminal resistance factors in leaf order; empty means all ones.
    #[serde(default)]
    pub terminal_resistance: Vec<f64>,
    pub nodes_per_segment: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            area_scale: 1.0,
            stiffness_scale: 1.0,
            resistance_scale: 1.0,
            segment_wave_speed: Vec::new(),
            terminal_resistance: Vec::new(),
            nodes_per_segment: DEFAULT_NODES,
        }
    }
}

/// Total peripheral resistance of the reference subject (≈95 mmHg mean
/// pressure at 78 mL/s mean flow).
pub const TOTAL_RESISTANCE: f64 = 1600.0;
/// Total arterial compliance (≈1.3 mL/mmHg).
pub const TOTAL_COMPLIANCE: f64 = 1.0e-3;

/// Name, parent name, length, inlet radius, outlet radius.
type Row = (String, Option<String>, f64, f64, f64);

/// Abdominal aortic chain areas at its inlet and outlet, cm².
pub const AA_INLET_AREA: f64 = 1.76;
pub const AA_OUTLET_AREA: f64 = 1.09;
const AA_LENGTHS: [f64; 4] = [4.0, 2.0, 2.0, 8.0];

fn radius_of(area: f64) -> f64 {
    (area / std::f64::consts::PI).sqrt()
}

/// Radius tapers linearly so the chain runs from 1.76 to 1.09 cm².
fn aa_radius(distance: f64) -> f64 {
    let total: f64 = AA_LENGTHS.iter().sum();
    let (r0, r1) = (radius_of(AA_INLET_AREA), radius_of(AA_OUTLET_AREA));
    r0 + (r1 - r0) * distance / total
}

fn row(name: &str, parent: Option<&str>, length: f64, r0: f64, r1: f64) -> Row {
    (name.to_string(), parent.map(str::to_string), length, r0, r1)
}

fn reference_rows() -> Vec<Row> {
    let mut rows: Vec<Row> = [
        ("ascending_aorta_1", None, 2.0, 1.525, 1.510),
        (
            "ascending_aorta_2",
            Some("ascending_aorta_1"),
            2.0,
            1.510,
            1.497,
        ),
        (
            "brachiocephalic",
            Some("ascending_aorta_2"),
            3.4,
            0.950,
            0.700,
        ),
        (
            "aortic_arch_1",
            Some("ascending_aorta_2"),
            2.0,
            1.200,
            1.150,
        ),
        ("aortic_arch_2", Some("aortic_arch_1"), 3.9, 1.150, 1.100),
        ("thoracic_aorta_1", Some("aortic_arch_2"), 5.2, 1.000, 0.950),
        (
            "thoracic_aorta_2",
            Some("thoracic_aorta_1"),
            5.2,
            0.950,
            0.900,
        ),
        (
            "thoracic_aorta_3",
            Some("thoracic_aorta_2"),
            5.5,
            0.900,
            0.800,
        ),
        ("intercostals", Some("thoracic_aorta_1"), 8.0, 0.300, 0.250),
        ("celiac_1", Some("thoracic_aorta_3"), 1.0, 0.390, 0.370),
        ("celiac_2", Some("celiac_1"), 1.0, 0.370, 0.350),
        ("hepatic", Some("celiac_1"), 6.6, 0.220, 0.220),
        ("gastric", Some("celiac_2"), 7.1, 0.180, 0.180),
        ("splenic", Some("celiac_2"), 6.3, 0.275, 0.275),
    ]
    .into_iter()
    .map(|(n, p, l, r0, r1)| row(n, p, l, r0, r1))
    .collect();

    let mut d = 0.0;
    let mut parent = "thoracic_aorta_3".to_string();
    for (k, &len) in AA_LENGTHS.iter().enumerate() {
        let name = format!("abdominal_aorta_{}", k + 1);
        rows.push(row(
            &name,
            Some(&parent),
            len,
            aa_radius(d),
            aa_radius(d + len),
        ));
        d += len;
        parent = name;
    }
    let aa_outlet = radius_of(AA_OUTLET_AREA);
    for (n, p, l, r0, r1) in [
        (
            "superior_mesenteric",
            "abdominal_aorta_1",
            5.9,
            0.350,
            0.350,
        ),
        ("renal_right", "abdominal_aorta_2", 3.2, 0.260, 0.260),
        ("renal_left", "abdominal_aorta_3", 3.2, 0.260, 0.260),
        (
            "inferior_mesenteric",
            "abdominal_aorta_4",
            5.0,
            0.160,
            0.160,
        ),
        (
            "abdominal_aorta_5",
            "abdominal_aorta_4",
            2.0,
            aa_outlet,
            0.575,
        ),
    ] {
        rows.push(row(n, Some(p), l, r0, r1));
    }

    for (side, cca_parent, sub_parent, cca_len) in [
        ("right", "brachiocephalic", "brachiocephalic", 8.0),
        ("left", "aortic_arch_1", "aortic_arch_2", 10.0),
    ] {
        let n = |base: &str| format!("{base}_{side}");
        let limb: [(&str, Option<&str>, f64, f64, f64); 24] = [
            ("common_carotid_1", None, cca_len, 0.370, 0.360),
            (
                "common_carotid_2",
                Some("common_carotid_1"),
                cca_len,
                0.360,
                0.350,
            ),
            (
                "external_carotid",
                Some("common_carotid_2"),
                11.8,
                0.200,
                0.150,
            ),
            (
                "internal_carotid",
                Some("common_carotid_2"),
                17.6,
                0.250,
                0.200,
            ),
            ("subclavian_1", None, 3.4, 0.450, 0.420),
            ("vertebral", Some("subclavian_1"), 14.8, 0.190, 0.180),
            ("subclavian_2", Some("subclavian_1"), 6.8, 0.420, 0.400),
            ("brachial_1", Some("subclavian_2"), 20.0, 0.400, 0.330),
            ("brachial_2", Some("brachial_1"), 22.0, 0.330, 0.290),
            ("radial", Some("brachial_2"), 23.5, 0.175, 0.140),
            ("ulnar_1", Some("brachial_2"), 6.7, 0.215, 0.200),
            ("interosseous", Some("ulnar_1"), 7.9, 0.091, 0.091),
            ("ulnar_2", Some("ulnar_1"), 17.1, 0.200, 0.180),
            ("common_iliac", None, 5.8, 0.400, 0.370),
            ("internal_iliac", Some("common_iliac"), 5.0, 0.200, 0.200),
            ("external_iliac", Some("common_iliac"), 14.4, 0.370, 0.320),
            ("femoral_1", Some("external_iliac"), 6.0, 0.320, 0.300),
            ("deep_femoral", Some("femoral_1"), 12.6, 0.200, 0.200),
            ("femoral_2", Some("femoral_1"), 30.0, 0.300, 0.270),
            ("popliteal_1", Some("femoral_2"), 9.4, 0.270, 0.250),
            ("anterior_tibial", Some("popliteal_1"), 32.2, 0.130, 0.100),
            ("popliteal_2", Some("popliteal_1"), 9.4, 0.250, 0.240),
            ("posterior_tibial", Some("popliteal_2"), 34.4, 0.180, 0.175),
            ("peroneal", Some("popliteal_2"), 32.0, 0.130, 0.120),
        ];
        for (base, parent, l, r0, r1) in limb {
            let parent = match (base, parent) {
                ("common_carotid_1", _) => cca_parent.to_string(),
                ("subclavian_1", _) => sub_parent.to_string(),
                ("common_iliac", _) => "abdominal_aorta_5".to_string(),
                (_, Some(p)) => n(p),
                (_, None) => unreachable!("limb roots are listed above"),
            };
            rows.push((n(base), Some(parent), l, r0, r1));
        }
    }
    rows
}

/// Empirical stiffness law `Eh/r0 = k1 exp(k2 r0) + k3` and the resulting
/// Moens-Korteweg-type wave speed `c = sqrt(2/3 · Eh/(ρ r0))`.
pub fn reference_wave_speed(mean_radius: f64) -> f64 {
    const K1: f64 = 2.0e7;
    const K2: f64 = -22.53;
    const K3: f64 = 8.65e5;
    let eh_r0 = K1 * (K2 * mean_radius).exp() + K3;
    (2.0 / 3.0 * eh_r0 / BLOOD_DENSITY).sqrt()
}

fn site_table() -> [(Site, &'static str, f64); 12] {
    use Measurement::*;
    let s = |m, side| Site::new(m, side);
    [
        (s(Q1, Side::Right), "common_carotid_2_right", 0.5),
        (s(Q1, Side::Left), "common_carotid_2_left", 0.5),
        (s(Q2, Side::Right), "brachial_1_right", 0.5),
        (s(Q2, Side::Left), "brachial_1_left", 0.5),
        (s(Q3, Side::Right), "femoral_2_right", 0.5),
        (s(Q3, Side::Left), "femoral_2_left", 0.5),
        (s(P1, Side::Right), "common_carotid_2_right", 0.5),
        (s(P1, Side::Left), "common_carotid_2_left", 0.5),
        (s(P2, Side::Right), "brachial_1_right", 0.5),
        (s(P2, Side::Left), "brachial_1_left", 0.5),
        (s(P3, Side::Right), "radial_right", 0.5),
        (s(P3, Side::Left), "radial_left", 0.5),
    ]
}

fn chain_table() -> Vec<(ChainId, Vec<String>)> {
    let mut out = Vec::new();
    for (side, sfx) in [(Side::Right, "right"), (Side::Left, "left")] {
        let names = |bases: &[&str]| {
            bases
                .iter()
                .map(|b| format!("{b}_{sfx}"))
                .collect::<Vec<_>>()
        };
        let id = |family| ChainId {
            family,
            side: Some(side),
        };
        out.push((
            id(ChainFamily::Carotid),
            names(&["common_carotid_1", "common_carotid_2"]),
        ));
        out.push((
            id(ChainFamily::Subclavian),
            names(&["subclavian_1", "subclavian_2"]),
        ));
        out.push((
            id(ChainFamily::Peripheral),
            names(&[
                "common_iliac",
                "external_iliac",
                "femoral_1",
                "femoral_2",
                "popliteal_1",
            ]),
        ));
    }
    out.push((
        ChainId {
            family: ChainFamily::AbdominalAortic,
            side: None,
        },
        (1..=4).map(|k| format!("abdominal_aorta_{k}")).collect(),
    ));
    out
}

/// Number of segments in the reference tree.
pub const REFERENCE_SEGMENTS: usize = 71;

/// Builds the deterministic reference tree with subject scalings applied.
pub fn build_reference_network(config: &NetworkConfig) -> Result<ArterialNetworkModel> {
    for (name, v) in [
        ("area_scale", config.area_scale),
        ("stiffness_scale", config.stiffness_scale),
        ("resistance_scale", config.resistance_scale),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    if config.nodes_per_segment == 0 {
        return Err(Error::InvalidConfig(
            "nodes_per_segment must be at least 1".into(),
        ));
    }

    let rows = reference_rows();
    debug_assert_eq!(rows.len(), REFERENCE_SEGMENTS);
    if !config.segment_wave_speed.is_empty() && config.segment_wave_speed.len() != rows.len() {
        return Err(Error::InvalidConfig(format!(
            "segment_wave_speed needs {} factors, got {}",
            rows.len(),
            config.segment_wave_speed.len()
        )));
    }
    let index: BTreeMap<&str, usize> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.0.as_str(), i))
        .collect();
    let nodes = config.nodes_per_segment;

    let mut segments = Vec::with_capacity(rows.len());
    for (i, (name, parent, length, r0, r1)) in rows.iter().enumerate() {
        let (length, r0, r1) = (*length, *r0, *r1);
        let areas: Vec<f64> = (0..nodes)
            .map(|k| {
                let x = (k as f64 + 0.5) / nodes as f64;
                let r = r0 + (r1 - r0) * x;
                std::f64::consts::PI * r * r * config.area_scale
            })
            .collect();
        let local = config.segment_wave_speed.get(i).copied().unwrap_or(1.0);
        if !(local > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "wave-speed factor {i} must be positive"
            )));
        }
        segments.push(Segment {
            name: name.clone(),
            parent: parent.as_deref().map(|p| index[p]),
            length,
            baseline_areas: areas.clone(),
            areas,
            wave_speed: reference_wave_speed(0.5 * (r0 + r1)) * config.stiffness_scale * local,
            density: BLOOD_DENSITY,
        });
    }

    // Terminal resistance shares follow the cube of the outlet radius.
    let mut has_child = vec![false; segments.len()];
    for s in &segments {
        if let Some(p) = s.parent {
            has_child[p] = true;
        }
    }
    let leaves: Vec<usize> = (0..segments.len()).filter(|&i| !has_child[i]).collect();
    if !config.terminal_resistance.is_empty() && config.terminal_resistance.len() != leaves.len() {
        return Err(Error::InvalidConfig(format!(
            "terminal_resistance needs {} factors, got {}",
            leaves.len(),
            config.terminal_resistance.len()
        )));
    }
    let weights: Vec<f64> = leaves.iter().map(|&i| rows[i].4.powi(3)).collect();
    let total_w: f64 = weights.iter().sum();
    let mut loads = Vec::with_capacity(leaves.len());
    for (j, (&leaf, &w)) in leaves.iter().zip(&weights).enumerate() {
        let factor = config.terminal_resistance.get(j).copied().unwrap_or(1.0);
        if !(factor > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "terminal resistance factor {j} must be positive"
            )));
        }
        let r_total = TOTAL_RESISTANCE * config.resistance_scale * factor * total_w / w;
        let seg = &segments[leaf];
        let z_outlet = seg.density * seg.wave_speed / seg.areas[nodes - 1];
        let r_proximal = z_outlet.min(0.2 * r_total);
        loads.push(WindkesselLoad {
            segment: leaf,
            r_proximal,
            r_distal: r_total - r_proximal,
            compliance: TOTAL_COMPLIANCE * w / total_w,
        });
    }

    let sites = site_table()
        .into_iter()
        .map(|(site, seg, position)| {
            (
                site,
                SiteLocation {
                    segment: index[seg],
                    position,
                },
            )
        })
        .collect();

    let chains = chain_table()
        .into_iter()
        .map(|(id, names)| {
            let ids: Vec<usize> = names.iter().map(|n| index[n.as_str()]).collect();
            let lengths: Vec<f64> = ids.iter().map(|&i| segments[i].length).collect();
            VesselChain::from_lengths(id, ids, &lengths)
        })
        .collect::<Result<Vec<_>>>()?;

    let network = ArterialNetworkModel {
        segments,
        loads,
        root: 0,
        sites,
        chains,
        viscosity: BLOOD_VISCOSITY,
    };
    network.validate()?;
    Ok(network)
}
