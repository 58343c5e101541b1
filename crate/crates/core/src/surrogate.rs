//! Linear frequency-domain waveform surrogate.
//!
//! Every axial element of a segment is a lossless transmission line with
//! characteristic impedance `ρc/A`. A narrowed element also carries a series
//! resistance equal to its excess Poiseuille resistance over the healthy
//! element, so stenoses raise the DC resistance of their subtree while dilated
//! elements only alter the AC impedance. Leaves close on three-element
//! Windkessels. Per harmonic, input impedances are composed leaf-to-root and
//! pressures/flows propagated root-to-leaf.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::network::{ArterialNetworkModel, WindkesselLoad};
use crate::sites::{Measurement, Site};

/// dyn/cm² per mmHg.
pub const MMHG: f64 = 1333.22;

const J: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeartInflow {
    pub period: f64,
    /// Root flow phasors `Q_0 ..= Q_N` in cm³/s.
    pub harmonics: Vec<Complex64>,
}

impl HeartInflow {
    pub fn new(period: f64, harmonics: Vec<Complex64>) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "period must be positive, got {period}"
            )));
        }
        match harmonics.first() {
            Some(q0) if q0.im == 0.0 && q0.re > 0.0 => Ok(HeartInflow { period, harmonics }),
            _ => Err(Error::InvalidConfig(
                "mean inflow must be real and positive".into(),
            )),
        }
    }

    /// Half-sine ejection lasting `ejection_fraction * period`, zero flow for
    /// the rest of the cycle, expanded analytically to `order` harmonics.
    pub fn half_sine(
        period: f64,
        stroke_volume: f64,
        ejection_fraction: f64,
        order: usize,
    ) -> Result<Self> {
        if !(stroke_volume > 0.0) || !(ejection_fraction > 0.0 && ejection_fraction <= 1.0) {
            return Err(Error::InvalidConfig(
                "stroke volume must be positive and ejection fraction in (0, 1]".into(),
            ));
        }
        let ts = ejection_fraction * period;
        let q_max = PI * stroke_volume / (2.0 * ts);
        let alpha = PI / ts;
        let w = 2.0 * PI / period;

        // Integrals over [0, ts] with their k -> 0 limits.
        let int_sin = |k: f64| {
            if k.abs() < 1e-12 {
                0.0
            } else {
                (1.0 - (k * ts).cos()) / k
            }
        };
        let int_cos = |k: f64| {
            if k.abs() < 1e-12 {
                ts
            } else {
                (k * ts).sin() / k
            }
        };

        let mut harmonics = Vec::with_capacity(order + 1);
        harmonics.push(Complex64::new(stroke_volume / period, 0.0));
        for n in 1..=order {
            let beta = n as f64 * w;
            let scale = q_max / period;
            let b = scale * (int_sin(alpha + beta) + int_sin(alpha - beta));
            let a = scale * (int_cos(alpha - beta) - int_cos(alpha + beta));
            harmonics.push(Complex64::new(b, -a));
        }
        HeartInflow::new(period, harmonics)
    }

    pub fn max_order(&self) -> usize {
        self.harmonics.len() - 1
    }

    pub fn as_series(&self) -> FourierSeries {
        FourierSeries::from_phasors(self.period, &self.harmonics)
            .expect("inflow has at least the mean")
    }
}

/// Truncated Fourier series of all twelve sites for one patient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformSet {
    pub period: f64,
    pub series: BTreeMap<Site, FourierSeries>,
}

impl WaveformSet {
    pub fn new(series: BTreeMap<Site, FourierSeries>) -> Result<Self> {
        let first = series
            .values()
            .next()
            .ok_or_else(|| Error::MissingSite("all".into()))?;
        let (period, order) = (first.period, first.order());
        if series
            .values()
            .any(|s| s.period != period || s.order() != order)
        {
            return Err(Error::InvalidRecord(
                "sites disagree on period or truncation order".into(),
            ));
        }
        Ok(WaveformSet { period, series })
    }

    pub fn get(&self, site: Site) -> Result<&FourierSeries> {
        self.series
            .get(&site)
            .ok_or_else(|| Error::MissingSite(site.key()))
    }

    pub fn order(&self) -> usize {
        self.series.values().next().map_or(0, FourierSeries::order)
    }
}

/// Pressure and flow at every element boundary of every segment for one
/// harmonic. Pressures in dyn/cm², flows in cm³/s.
#[derive(Debug, Clone)]
pub struct HarmonicSolution {
    pub omega: f64,
    /// `pressure[s][k]` is at boundary `k` (0 = inlet) of segment `s`.
    pub pressure: Vec<Vec<Complex64>>,
    pub flow: Vec<Vec<Complex64>>,
    /// Input impedance at each boundary.
    pub impedance: Vec<Vec<Complex64>>,
}

impl HarmonicSolution {
    pub fn inlet_impedance(&self, segment: usize) -> Complex64 {
        self.impedance[segment][0]
    }
}

fn windkessel(load: &WindkesselLoad, omega: f64) -> Complex64 {
    load.r_proximal + load.r_distal / (1.0 + J * omega * load.r_distal * load.compliance)
}

/// Series resistance an element gains from narrowing below its healthy area.
fn stenotic_resistance(viscosity: f64, dx: f64, area: f64, healthy: f64) -> f64 {
    if area < healthy {
        8.0 * PI * viscosity * dx * (1.0 / (area * area) - 1.0 / (healthy * healthy))
    } else {
        0.0
    }
}

struct Element {
    resistance: f64,
    a: Complex64,
    b: Complex64,
    c: Complex64,
}

fn element(network: &ArterialNetworkModel, seg: usize, k: usize, omega: f64) -> Element {
    let s = &network.segments[seg];
    let dx = s.element_length();
    let area = s.areas[k];
    let zc = s.density * s.wave_speed / area;
    let (sin, cos) = (omega * dx / s.wave_speed).sin_cos();
    Element {
        resistance: stenotic_resistance(network.viscosity, dx, area, s.baseline_areas[k]),
        a: Complex64::new(cos, 0.0),
        b: J * zc * sin,
        c: J * sin / zc,
    }
}

/// Solves one harmonic with root inflow phasor `q_root`. The network is
/// assumed valid.
pub fn solve_harmonic(
    network: &ArterialNetworkModel,
    omega: f64,
    q_root: Complex64,
) -> Result<HarmonicSolution> {
    let order = network.topological_order()?;
    let children = network.children();
    let n_seg = network.segments.len();
    let mut impedance: Vec<Vec<Complex64>> = network
        .segments
        .iter()
        .map(|s| vec![Complex64::new(0.0, 0.0); s.nodes() + 1])
        .collect();
    let mut load_of = vec![None; n_seg];
    for l in &network.loads {
        load_of[l.segment] = Some(*l);
    }

    for &s in order.iter().rev() {
        let z_out = if children[s].is_empty() {
            let load = load_of[s].ok_or_else(|| {
                Error::InvalidNetwork(format!("leaf {} has no load", network.segments[s].name))
            })?;
            windkessel(&load, omega)
        } else {
            let admittance: Complex64 = children[s].iter().map(|&c| 1.0 / impedance[c][0]).sum();
            1.0 / admittance
        };
        let nodes = network.segments[s].nodes();
        impedance[s][nodes] = z_out;
        for k in (0..nodes).rev() {
            let el = element(network, s, k, omega);
            let zd = impedance[s][k + 1];
            let z_line = (el.a * zd + el.b) / (el.c * zd + el.a);
            impedance[s][k] = z_line + el.resistance;
        }
        if impedance[s][0].norm() == 0.0 || !impedance[s][0].is_finite() {
            return Err(Error::InvalidNetwork(format!(
                "degenerate impedance in segment {}",
                network.segments[s].name
            )));
        }
    }

    let mut pressure: Vec<Vec<Complex64>> = impedance
        .iter()
        .map(|z| vec![Complex64::default(); z.len()])
        .collect();
    let mut flow = pressure.clone();
    let root = network.root;
    pressure[root][0] = q_root * impedance[root][0];
    flow[root][0] = q_root;
    for &s in &order {
        if s != root {
            let parent = network.segments[s].parent.expect("validated tree");
            let p = *pressure[parent].last().expect("non-empty");
            pressure[s][0] = p;
            flow[s][0] = p / impedance[s][0];
        }
        for k in 0..network.segments[s].nodes() {
            let el = element(network, s, k, omega);
            let q_in = flow[s][k];
            let p_mid = pressure[s][k] - el.resistance * q_in;
            pressure[s][k + 1] = el.a * p_mid - el.b * q_in;
            flow[s][k + 1] = -el.c * p_mid + el.a * q_in;
        }
    }

    Ok(HarmonicSolution {
        omega,
        pressure,
        flow,
        impedance,
    })
}

/// Computes the Fourier series of pressure (mmHg) and flow (mL/s) at all
/// twelve measurement sites, truncated at `order` harmonics.
pub fn solve_network(
    network: &ArterialNetworkModel,
    inflow: &HeartInflow,
    order: usize,
) -> Result<WaveformSet> {
    if order < 1 {
        return Err(Error::InvalidConfig(
            "truncation order must be at least 1".into(),
        ));
    }
    if order > inflow.max_order() {
        return Err(Error::NotEnoughHarmonics {
            requested: order,
            available: inflow.max_order(),
        });
    }
    network.validate()?;
    let w = 2.0 * PI / inflow.period;
    let solutions = (0..=order)
        .map(|n| solve_harmonic(network, n as f64 * w, inflow.harmonics[n]))
        .collect::<Result<Vec<_>>>()?;

    let mut series = BTreeMap::new();
    for site in Site::all() {
        let loc = network.sites[&site];
        let nodes = network.segments[loc.segment].nodes();
        let k = (loc.position * nodes as f64).round() as usize;
        let phasors: Vec<Complex64> = solutions
            .iter()
            .map(|sol| {
                if site.measurement.is_pressure() {
                    sol.pressure[loc.segment][k] / MMHG
                } else {
                    sol.flow[loc.segment][k]
                }
            })
            .collect();
        series.insert(site, FourierSeries::from_phasors(inflow.period, &phasors)?);
    }
    WaveformSet::new(series)
}

/// Display unit of a measurement's series.
pub fn unit_of(m: Measurement) -> &'static str {
    if m.is_pressure() {
        "mmHg"
    } else {
        "mL/s"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disease::{apply_disease, DiseaseKind, DiseaseSide, DiseaseSpec};
    use crate::fourier::fit_fourier;
    use crate::network::{build_reference_network, NetworkConfig, Segment, SiteLocation};

    fn single_segment(load: WindkesselLoad, nodes: usize) -> ArterialNetworkModel {
        let area = 2.0;
        ArterialNetworkModel {
            segments: vec![Segment {
                name: "tube".into(),
                parent: None,
                length: 40.0,
                areas: vec![area; nodes],
                baseline_areas: vec![area; nodes],
                wave_speed: 500.0,
                density: 1.06,
            }],
            loads: vec![load],
            root: 0,
            sites: Site::all()
                .map(|s| {
                    (
                        s,
                        SiteLocation {
                            segment: 0,
                            position: 0.5,
                        },
                    )
                })
                .collect(),
            chains: vec![],
            viscosity: 0.035,
        }
    }

    #[test]
    fn half_sine_coefficients_match_sampled_waveform() {
        let (t, sv) = (0.9, 70.0);
        let inflow = HeartInflow::half_sine(t, sv, 1.0 / 3.0, 5).unwrap();
        let ts = t / 3.0;
        let q_max = PI * sv / (2.0 * ts);
        let m = 1 << 16;
        let samples: Vec<f64> = (0..m)
            .map(|k| {
                let tk = k as f64 * t / m as f64;
                if tk < ts {
                    q_max * (PI * tk / ts).sin()
                } else {
                    0.0
                }
            })
            .collect();
        let fitted = fit_fourier(&samples, t, 5).unwrap();
        let analytic = inflow.as_series();
        for (a, b) in analytic.coefficients().iter().zip(fitted.coefficients()) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
        assert!((analytic.cosine[0] - sv / t).abs() < 1e-12);
    }

    #[test]
    fn matched_line_has_constant_pressure_magnitude() {
        let zc = 1.06 * 500.0 / 2.0;
        let load = WindkesselLoad {
            segment: 0,
            r_proximal: zc,
            r_distal: 1e-9,
            compliance: 1e-12,
        };
        let net = single_segment(load, 40);
        for n in 1..=5 {
            let sol = solve_harmonic(&net, n as f64 * 7.0, Complex64::new(10.0, 3.0)).unwrap();
            let p0 = sol.pressure[0][0].norm();
            for p in &sol.pressure[0] {
                assert!((p.norm() - p0).abs() <= 1e-9 * p0);
            }
        }
    }

    #[test]
    fn y_junction_splits_flow_evenly() {
        let mut net = single_segment(
            WindkesselLoad {
                segment: 1,
                r_proximal: 300.0,
                r_distal: 5000.0,
                compliance: 1e-4,
            },
            8,
        );
        let child = Segment {
            name: "child".into(),
            parent: Some(0),
            ..net.segments[0].clone()
        };
        net.segments.push(child.clone());
        net.segments.push(child);
        net.loads.push(WindkesselLoad {
            segment: 2,
            ..net.loads[0]
        });
        net.validate().unwrap();
        for n in 0..=5 {
            let sol = solve_harmonic(&net, n as f64 * 6.5, Complex64::new(50.0, -20.0)).unwrap();
            let q_parent = *sol.flow[0].last().unwrap();
            let (za, zb) = (sol.impedance[1][0], sol.impedance[2][0]);
            // Kirchhoff: qa + qb = q, za qa - zb qb = 0.
            let det = -zb - za;
            let qa = (-zb * q_parent) / det;
            let qb = (-za * q_parent) / det;
            assert!((sol.flow[1][0] - qa).norm() <= 1e-12 * q_parent.norm());
            assert!((sol.flow[2][0] - qb).norm() <= 1e-12 * q_parent.norm());
            assert!((sol.flow[1][0] - 0.5 * q_parent).norm() <= 1e-12 * q_parent.norm());
        }
    }

    fn reference() -> (ArterialNetworkModel, HeartInflow) {
        let net = build_reference_network(&NetworkConfig::default()).unwrap();
        let inflow = HeartInflow::half_sine(0.9, 70.0, 1.0 / 3.0, 5).unwrap();
        (net, inflow)
    }

    #[test]
    fn junction_flow_is_conserved_at_every_harmonic() {
        let (net, inflow) = reference();
        let children = net.children();
        for n in 0..=5 {
            let sol = solve_harmonic(&net, n as f64 * 2.0 * PI / 0.9, inflow.harmonics[n]).unwrap();
            for (s, kids) in children.iter().enumerate() {
                if kids.is_empty() {
                    continue;
                }
                let q_parent = *sol.flow[s].last().unwrap();
                let q_kids: Complex64 = kids.iter().map(|&c| sol.flow[c][0]).sum();
                assert!(
                    (q_parent - q_kids).norm() <= 1e-9 * q_parent.norm(),
                    "segment {s}"
                );
            }
        }
    }

    #[test]
    fn dc_pressure_never_rises_towards_the_leaves() {
        let (net, inflow) = reference();
        let spec =
            DiseaseSpec::new(DiseaseKind::PAD, 0.9, 0.2, 0.7, 0.45, DiseaseSide::Left).unwrap();
        let sick = apply_disease(&net, net.chain_for(&spec).unwrap(), &spec).unwrap();
        for model in [&net, &sick] {
            let sol = solve_harmonic(model, 0.0, inflow.harmonics[0]).unwrap();
            for (s, seg) in model.segments.iter().enumerate() {
                let p = &sol.pressure[s];
                assert!(p
                    .windows(2)
                    .all(|w| w[1].re <= w[0].re + 1e-9 * w[0].re.abs()));
                if let Some(parent) = seg.parent {
                    assert!(p[0].re <= sol.pressure[parent].last().unwrap().re * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn stenosis_raises_and_aneurysm_keeps_dc_impedance() {
        let (net, _) = reference();
        let base = solve_harmonic(&net, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        let sten =
            DiseaseSpec::new(DiseaseKind::CAS, 0.7, 0.3, 0.6, 0.45, DiseaseSide::Right).unwrap();
        let chain = net.chain_for(&sten).unwrap();
        let sick = apply_disease(&net, chain, &sten).unwrap();
        let sol = solve_harmonic(&sick, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        let top = chain.segments[0];
        assert!(sol.inlet_impedance(top).re > base.inlet_impedance(top).re);
        assert!(sol.inlet_impedance(0).re > base.inlet_impedance(0).re);

        let an = DiseaseSpec::new(
            DiseaseKind::AAA,
            12.0,
            0.3,
            0.6,
            0.45,
            DiseaseSide::NotApplicable,
        )
        .unwrap();
        let chain = net.chain_for(&an).unwrap();
        let sick = apply_disease(&net, chain, &an).unwrap();
        let sol = solve_harmonic(&sick, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        for s in 0..net.segments.len() {
            assert_eq!(sol.inlet_impedance(s), base.inlet_impedance(s));
        }
        // ... but the AC response does change.
        let ac_base = solve_harmonic(&net, 7.0, Complex64::new(1.0, 0.0)).unwrap();
        let ac_sick = solve_harmonic(&sick, 7.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!((ac_base.inlet_impedance(0) - ac_sick.inlet_impedance(0)).norm() > 0.0);
    }

    #[test]
    fn zero_severity_probe_is_an_identity() {
        let (net, inflow) = reference();
        let probe = DiseaseSpec {
            kind: DiseaseKind::SAS,
            severity: 0.0,
            b: 0.2,
            e: 0.8,
            r: 0.5,
            side: DiseaseSide::Left,
        };
        let same = apply_disease(&net, net.chain_for(&probe).unwrap(), &probe).unwrap();
        assert_eq!(same, net);
        let a = solve_network(&net, &inflow, 5).unwrap();
        let b = solve_network(&same, &inflow, 5).unwrap();
        for (sa, sb) in a.series.values().zip(b.series.values()) {
            for (x, y) in sa.coefficients().iter().zip(sb.coefficients()) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn solve_is_deterministic_and_physiological() {
        let (net, inflow) = reference();
        let a = solve_network(&net, &inflow, 5).unwrap();
        let b = solve_network(&net, &inflow, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.series.len(), 12);
        let p1 = a
            .get(Site::new(Measurement::P1, crate::sites::Side::Right))
            .unwrap();
        assert!(
            (60.0..130.0).contains(&p1.cosine[0]),
            "mean carotid pressure {}",
            p1.cosine[0]
        );
        let q1 = a
            .get(Site::new(Measurement::Q1, crate::sites::Side::Right))
            .unwrap();
        assert!(q1.cosine[0] > 0.0);
    }

    #[test]
    fn rejects_excess_order() {
        let (net, _) = reference();
        let inflow = HeartInflow::half_sine(0.9, 70.0, 1.0 / 3.0, 3).unwrap();
        assert!(matches!(
            solve_network(&net, &inflow, 5),
            Err(Error::NotEnoughHarmonics {
                requested: 5,
                available: 3
            })
        ));
    }

    #[test]
    fn doubling_heart_rate_halves_period() {
        let (net, _) = reference();
        let slow = HeartInflow::half_sine(1.0, 70.0, 1.0 / 3.0, 5).unwrap();
        let fast = HeartInflow::half_sine(0.5, 70.0, 1.0 / 3.0, 5).unwrap();
        let a = solve_network(&net, &slow, 5).unwrap();
        let b = solve_network(&net, &fast, 5).unwrap();
        assert_eq!(b.period, 0.5 * a.period);
    }

    #[test]
    fn zero_area_is_rejected() {
        let (mut net, inflow) = reference();
        net.segments[3].areas[2] = 0.0;
        assert!(matches!(
            solve_network(&net, &inflow, 5),
            Err(Error::InvalidNetwork(_))
        ));
    }
}
