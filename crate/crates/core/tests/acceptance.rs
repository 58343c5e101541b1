//! Acceptance gate. Each criterion runs in isolation and reports one line;
//! the test fails if any criterion fails.
//!
//! Run: `cargo test --release --test acceptance -- --nocapture`

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use haemoscreen::commands;
use haemoscreen::disease::{
    sample_disease, DiseaseKind, DiseaseSide, DiseaseSpec, END_MAX, MARGIN, REFERENCE_BOUNDS,
    START_MIN,
};
use haemoscreen::evaluation::{
    compute_metrics, run_combination_search, unilateral_study, ConfusionCounts, EvaluationReport,
    MetricKind, PairedCohorts,
};
use haemoscreen::features::{MeasurementCombination, StandardizationStats};
use haemoscreen::fourier::fit_fourier;
use haemoscreen::learners::{
    self, aggregate_by_measurement, split_improvement_importance, Dataset, Label, Method,
    NaiveBayes, NbParams,
};
use haemoscreen::learners::{logistic, Mlp, MlpParams};
use haemoscreen::persistence::RunConfig;
use haemoscreen::population::{generate_population, PopulationConfig, VirtualPatient};
use haemoscreen::seed;
use haemoscreen::sites::Measurement;

const DESK_SEED: u64 = 20_240_611;
const DESK_N: usize = 1000;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn timed(limit: Duration, start: Instant) -> Result<String, String> {
    let t = start.elapsed();
    ensure(t < limit, format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(format!("{t:.2?}"))
}

fn random_spec<R: Rng>(rng: &mut R) -> DiseaseSpec {
    let kind = *DiseaseKind::ALL.choose(rng).unwrap();
    sample_disease(kind, rng)
}

fn area_profile_exact() -> Check {
    let start = Instant::now();
    let mut rng = seed::stream(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let s = random_spec(&mut rng);
        let at = |x: f64| s.area_multiplier(x).unwrap();
        worst = worst.max((at(s.b) - 1.0).abs()).max((at(s.e) - 1.0).abs());
        let extremum = if s.kind.is_stenosis() {
            1.0 - s.severity
        } else {
            1.0 + s.severity
        };
        worst = worst.max((at(s.midpoint()) - extremum).abs());
        for k in 0..=50 {
            let x = k as f64 / 50.0;
            let v = at(x);
            if x < s.b || x > s.e {
                ensure(v == 1.0, format!("A({x}) = {v} outside [b, e]"))?;
            } else if s.kind.is_stenosis() {
                ensure(
                    v >= extremum - 1e-12 && v <= 1.0 + 1e-12,
                    "stenosis profile out of range",
                )?;
            } else {
                ensure(
                    v <= extremum + 1e-12 && v >= 1.0 - 1e-12,
                    "aneurysm profile out of range",
                )?;
            }
        }
    }
    ensure(worst <= 1e-12, format!("max error {worst:e}"))?;
    Ok(format!(
        "max error {worst:.1e}, {}",
        timed(Duration::from_secs(1), start)?
    ))
}

/// Kolmogorov-Smirnov distance of `u` from U(0, 1).
fn ks_uniform(mut u: Vec<f64>) -> f64 {
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).max((i + 1) as f64 / n - v))
        .fold(0.0, f64::max)
}

fn sampler_bounds() -> Check {
    let start = Instant::now();
    let mut worst_ks: f64 = 0.0;
    for kind in DiseaseKind::ALL {
        let mut rng = seed::derived_stream(2, &[kind.code()]);
        let (lo, hi) = kind.severity_bounds();
        let mut u: [Vec<f64>; 4] = Default::default();
        let mut sides = 0usize;
        let n = 100_000;
        for _ in 0..n {
            let s = sample_disease(kind, &mut rng);
            s.validate().map_err(|e| format!("{kind}: {e}"))?;
            let (rlo, rhi) = REFERENCE_BOUNDS;
            u[0].push((s.r - rlo) / (rhi - rlo));
            u[1].push((s.b - START_MIN) / (s.r - MARGIN - START_MIN));
            u[2].push((s.e - s.r - MARGIN) / (END_MAX - s.r - MARGIN));
            u[3].push((s.severity - lo) / (hi - lo));
            sides += (s.side == DiseaseSide::Left) as usize;
        }
        for (name, v) in ["r", "b", "e", "S"].iter().zip(u) {
            let d = ks_uniform(v);
            ensure(d < 0.01, format!("{kind} {name}: KS {d:.4}"))?;
            worst_ks = worst_ks.max(d);
        }
        if kind.is_lateral() {
            let p = sides as f64 / n as f64;
            ensure(
                (p - 0.5).abs() < 0.01,
                format!("{kind} left fraction {p:.4}"),
            )?;
        }
    }
    Ok(format!(
        "max KS {worst_ks:.4}, {}",
        timed(Duration::from_secs(5), start)?
    ))
}

fn oracle_equivalence() -> Check {
    // Naive Bayes against a direct Gaussian Bayes computation.
    let mut rng = seed::stream(3);
    let rows: Vec<Vec<f64>> = (0..50)
        .map(|i| {
            (0..4)
                .map(|j| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z + (i % 2) as f64 * j as f64 * 0.5
                })
                .collect()
        })
        .collect();
    let y: Vec<Label> = (0..50).map(|i| Label::from_diseased(i % 2 == 1)).collect();
    let data = Dataset::from_rows(&rows, y.clone()).unwrap();
    let nb = NaiveBayes::fit(&NbParams::default(), &data).unwrap();
    let overall_var = |j: usize| {
        let m = rows.iter().map(|r| r[j]).sum::<f64>() / 50.0;
        rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / 50.0
    };
    let eps = 1e-9 * (0..4).map(overall_var).fold(0.0, f64::max);
    let mut nb_err: f64 = 0.0;
    for x in &rows {
        for c in 0..2 {
            let members: Vec<&Vec<f64>> = rows
                .iter()
                .zip(&y)
                .filter(|(_, l)| l.is_diseased() == (c == 1))
                .map(|(r, _)| r)
                .collect();
            let k = members.len() as f64;
            let mut lj = (k / 50.0).ln();
            for j in 0..4 {
                let mu = members.iter().map(|r| r[j]).sum::<f64>() / k;
                let var = members.iter().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / k + eps;
                lj += -0.5 * (2.0 * PI * var).ln() - (x[j] - mu).powi(2) / (2.0 * var);
            }
            nb_err = nb_err.max((nb.log_joint(x)[c] - lj).abs());
        }
    }
    ensure(nb_err <= 1e-12, format!("NB log-score error {nb_err:e}"))?;

    // Metrics against a per-sample recount.
    let truth: Vec<Label> = (0..1000).map(|_| Label::from_diseased(rng.gen())).collect();
    let pred: Vec<Label> = (0..1000).map(|_| Label::from_diseased(rng.gen())).collect();
    let counts = ConfusionCounts::tally(&truth, &pred).unwrap();
    let m = compute_metrics(counts).unwrap();
    let (mut tp, mut fn_, mut fp, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (t, p) in truth.iter().zip(&pred) {
        match (t.is_diseased(), p.is_diseased()) {
            (true, true) => tp += 1,
            (true, false) => fn_ += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    ensure(
        m.sensitivity == tp as f64 / (tp + fn_) as f64
            && m.specificity == tn as f64 / (tn + fp) as f64
            && m.precision == tp as f64 / (tp + fp) as f64
            && m.f1 == (2 * tp) as f64 / (2 * tp + fp + fn_) as f64,
        "metrics differ from the recount",
    )?;

    // Fourier fit against a direct DFT.
    let mut ft_err: f64 = 0.0;
    for trial in 0..20 {
        let m = 64 + trial;
        let samples: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let fs = fit_fourier(&samples, 0.9, 5).unwrap();
        let coeffs = fs.coefficients();
        let scale = samples.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for n in 0..=5 {
            let (mut re, mut im) = (0.0, 0.0);
            for (k, &u) in samples.iter().enumerate() {
                let th = -2.0 * PI * (n * k) as f64 / m as f64;
                re += u * th.cos();
                im += u * th.sin();
            }
            let (a, b) = if n == 0 {
                (re / m as f64, 0.0)
            } else {
                (2.0 * re / m as f64, -2.0 * im / m as f64)
            };
            let got_a = if n == 0 { coeffs[0] } else { coeffs[5 + n] };
            ft_err = ft_err.max((got_a - a).abs() / scale);
            if n > 0 {
                ft_err = ft_err.max((coeffs[n] - b).abs() / scale);
            }
        }
    }
    ensure(ft_err <= 1e-9, format!("Fourier relative error {ft_err:e}"))?;
    Ok(format!(
        "NB {nb_err:.1e}, metrics exact, Fourier {ft_err:.1e}"
    ))
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = a.iter().chain(b).map(|v| v * v).sum::<f64>().sqrt();
    diff / scale.max(1e-12)
}

fn central_difference(theta: &[f64], loss: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let h = 1e-6;
    (0..theta.len())
        .map(|k| {
            let mut up = theta.to_vec();
            let mut dn = theta.to_vec();
            up[k] += h;
            dn[k] -= h;
            (loss(&up) - loss(&dn)) / (2.0 * h)
        })
        .collect()
}

fn gradient_checks() -> Check {
    let mut rng = seed::stream(4);
    let rows: Vec<Vec<f64>> = (0..40)
        .map(|_| (0..5).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let y = rows
        .iter()
        .map(|r| Label::from_diseased(r[0] - r[2] + 0.3 * rng.gen::<f64>() > 0.0))
        .collect();
    let data = Dataset::from_rows(&rows, y).unwrap();

    let mut lr: f64 = 0.0;
    for _ in 0..25 {
        let theta: Vec<f64> = (0..6).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let (_, g) = logistic::loss_and_gradient(&data, 1.0, &theta);
        let numeric = central_difference(&theta, |t| logistic::loss_and_gradient(&data, 1.0, t).0);
        lr = lr.max(relative_error(&g, &numeric));
    }
    let small = data.subset(&(0..12).collect::<Vec<_>>());
    let p = MlpParams {
        neurons_per_layer: 4,
        n_hidden_layers: 2,
        ..MlpParams::default()
    };
    let mut mlp: f64 = 0.0;
    for s in 0..25 {
        let mut net = Mlp::init(5, &p, s);
        net.params
            .iter_mut()
            .for_each(|w| *w += 0.1 * (rng.gen::<f64>() - 0.5));
        let (_, g) = net.loss_and_gradient(&small, 0.01);
        let numeric = central_difference(&net.params, |t| {
            let mut probe = net.clone();
            probe.params = t.to_vec();
            probe.loss_and_gradient(&small, 0.01).0
        });
        mlp = mlp.max(relative_error(&g, &numeric));
    }
    ensure(lr <= 1e-4, format!("LR gradient relative error {lr:e}"))?;
    ensure(mlp <= 1e-3, format!("MLP gradient relative error {mlp:e}"))?;
    Ok(format!("LR {lr:.1e}, MLP {mlp:.1e} over 25 points each"))
}

/// Two concentric rings: the class is set by the radius, which no linear
/// boundary can express.
fn nonlinear_set(n: usize, s: u64) -> Dataset {
    let mut rng = seed::stream(s);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let diseased = i % 2 == 1;
        let radius = if diseased { 2.0 } else { 1.0 } + 0.25 * rng.gen::<f64>();
        let th = 2.0 * PI * rng.gen::<f64>();
        rows.push(vec![
            radius * th.cos(),
            radius * th.sin(),
            StandardNormal.sample(&mut rng),
        ]);
        y.push(Label::from_diseased(diseased));
    }
    Dataset::from_rows(&rows, y).unwrap()
}

fn five_fold_f1(data: &Dataset, method: Method, s: u64) -> f64 {
    let mut idx: Vec<usize> = (0..data.n_rows()).collect();
    idx.shuffle(&mut seed::stream(s));
    let folds = 5;
    let mut total = 0.0;
    for f in 0..folds {
        let test: Vec<usize> = idx.iter().copied().skip(f).step_by(folds).collect();
        let train: Vec<usize> = idx.iter().copied().filter(|i| !test.contains(i)).collect();
        let (train, test) = (data.subset(&train), data.subset(&test));
        let stats = StandardizationStats::fit(train.x()).unwrap();
        let train = train
            .with_features(stats.transform(train.x()).unwrap())
            .unwrap();
        let test = test
            .with_features(stats.transform(test.x()).unwrap())
            .unwrap();
        let model = learners::fit(&method.default_hyperparams(), &train, s + f as u64).unwrap();
        let pred = model.predict_all(test.x()).unwrap();
        total += compute_metrics(ConfusionCounts::tally(test.y(), &pred).unwrap())
            .unwrap()
            .f1;
    }
    total / folds as f64
}

fn nonlinearity_trend() -> Check {
    let start = Instant::now();
    let data = nonlinear_set(500, 5);
    let gb = five_fold_f1(&data, Method::GB, 5);
    let lr = five_fold_f1(&data, Method::LR, 5);
    ensure(gb - lr >= 0.15, format!("GB {gb:.4} vs LR {lr:.4}"))?;
    Ok(format!(
        "GB {gb:.4}, LR {lr:.4}, {}",
        timed(Duration::from_secs(30), start)?
    ))
}

struct Desk {
    healthy: Vec<VirtualPatient>,
    diseased: BTreeMap<DiseaseKind, Vec<VirtualPatient>>,
    elapsed: Duration,
}

fn desk() -> &'static Desk {
    static DESK: OnceLock<Desk> = OnceLock::new();
    DESK.get_or_init(|| {
        let start = Instant::now();
        let cfg = PopulationConfig::default();
        let healthy = generate_population(DESK_N, None, &cfg, DESK_SEED).unwrap();
        let diseased = DiseaseKind::ALL
            .into_iter()
            .map(|k| {
                (
                    k,
                    generate_population(DESK_N, Some(k), &cfg, DESK_SEED).unwrap(),
                )
            })
            .collect();
        Desk {
            healthy,
            diseased,
            elapsed: start.elapsed(),
        }
    })
}

fn desk_report(kind: DiseaseKind, combos: &[MeasurementCombination]) -> EvaluationReport {
    let d = desk();
    let cohorts = PairedCohorts::from_patients(&d.healthy, &d.diseased[&kind]).unwrap();
    let plan = cohorts.split_plan(5, DESK_SEED).unwrap();
    run_combination_search(
        &cohorts,
        &plan,
        &[Method::GB.default_hyperparams()],
        combos,
        DESK_SEED,
    )
    .unwrap()
}

fn pipeline_trend() -> Check {
    let start = Instant::now();
    let all = MeasurementCombination::bilateral(&Measurement::ALL).unwrap();
    let mut f1 = BTreeMap::new();
    for kind in [
        DiseaseKind::CAS,
        DiseaseKind::SAS,
        DiseaseKind::PAD,
        DiseaseKind::AAA,
    ] {
        let rep = desk_report(kind, &[all]);
        rep.check_complete().map_err(|e| e.to_string())?;
        f1.insert(kind, rep.aggregate(Method::GB, &all).unwrap().f1);
    }
    let (aaa, cas, sas) = (
        f1[&DiseaseKind::AAA],
        f1[&DiseaseKind::CAS],
        f1[&DiseaseKind::SAS],
    );
    let line = format!(
        "AAA {aaa:.4}, CAS {cas:.4}, SAS {sas:.4}, PAD {:.4}",
        f1[&DiseaseKind::PAD]
    );
    ensure(aaa >= cas && cas >= sas - 0.05, line.clone())?;
    // Cohort generation is shared with the low-severity study and counted here.
    let total = start.elapsed() + desk().elapsed;
    ensure(
        total < Duration::from_secs(15 * 60),
        format!("{line}; took {total:.2?}"),
    )?;
    Ok(format!("{line}, {total:.2?}"))
}

fn low_severity_degradation() -> Check {
    let combos = MeasurementCombination::all_bilateral();
    let reference = desk_report(DiseaseKind::AAA, &combos);
    let low = desk_report(DiseaseKind::AaaL, &combos);
    let rows = haemoscreen::evaluation::low_severity_ratio_study(&reference, &low)
        .map_err(|e| e.to_string())?;
    let ok = rows.iter().filter(|r| r.ratio <= 1.02).count();
    let mean = rows.iter().map(|r| r.ratio).sum::<f64>() / rows.len() as f64;
    let line = format!(
        "{ok}/{} cells with ratio <= 1.02, mean ratio {mean:.4}",
        rows.len()
    );
    ensure(rows.len() == 63 && ok as f64 >= 0.9 * 63.0, line.clone())?;
    Ok(line)
}

fn structural_counts() -> Check {
    let combos = MeasurementCombination::all_bilateral();
    let mut hist = [0usize; 6];
    for c in &combos {
        hist[c.len() - 1] += 1;
    }
    ensure(
        combos.len() == 63 && hist == [6, 15, 20, 15, 6, 1],
        format!("histogram {hist:?}"),
    )?;
    let with_q1 = combos
        .iter()
        .filter(|c| c.contains(Measurement::Q1))
        .count();
    ensure(
        with_q1 == 32 && combos.len() - with_q1 == 31,
        format!("Q1 partition {with_q1}"),
    )?;

    let cfg = PopulationConfig::default();
    let healthy = generate_population(30, None, &cfg, 8).unwrap();
    let sick = generate_population(30, Some(DiseaseKind::AAA), &cfg, 8).unwrap();
    let cohorts = PairedCohorts::from_patients(&healthy, &sick).unwrap();
    let plan = cohorts.split_plan(5, 8).unwrap();
    let methods: Vec<_> = Method::ALL
        .iter()
        .map(|m| m.default_hyperparams())
        .collect();
    let report = run_combination_search(&cohorts, &plan, &methods, &combos, 8).unwrap();
    for kind in MetricKind::ALL {
        let mut buf = Vec::new();
        report.write_wide_csv(&mut buf, kind).unwrap();
        let mut r = csv::Reader::from_reader(&buf[..]);
        let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
        let rows = r.records().count();
        ensure(
            rows == 63 && header[1..] == ["NB", "LR", "SVM", "RF", "MLP", "GB"],
            format!("{} table has {rows} rows, header {header:?}", kind.name()),
        )?;
    }
    let uni = unilateral_study(
        &cohorts,
        &plan,
        &[Measurement::Q1, Measurement::P3],
        &Method::GB.default_hyperparams(),
        8,
    )
    .unwrap();
    ensure(
        uni.len() == 6,
        format!("unilateral table has {} rows", uni.len()),
    )?;
    Ok("63 combinations [6,15,20,15,6,1], Q1 32/31, 63x6 tables, 6 unilateral rows".into())
}

fn importance_algebra() -> Check {
    // Single informative feature among noise.
    let mut rng = seed::stream(9);
    let rows: Vec<Vec<f64>> = (0..400)
        .map(|_| (0..22).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let y: Vec<Label> = rows
        .iter()
        .map(|r| Label::from_diseased(r[7] > 0.0))
        .collect();
    let data = Dataset::from_rows(&rows, y).unwrap();
    let model = learners::fit(&Method::GB.default_hyperparams(), &data, 9).unwrap();
    let imp = split_improvement_importance(&model).map_err(|e| e.to_string())?;
    let sum: f64 = imp.weights.iter().sum();
    ensure(
        (sum - 1.0).abs() <= 1e-9,
        format!("importances sum to {sum}"),
    )?;
    ensure(
        imp.weights[7] >= 0.99,
        format!("informative feature weight {:.4}", imp.weights[7]),
    )?;

    let combo = MeasurementCombination::bilateral(&[Measurement::Q1]).unwrap();
    let by = aggregate_by_measurement(&imp, &combo, 5).map_err(|e| e.to_string())?;
    let agg: f64 = by.iter().map(|(_, w)| w).sum();
    ensure(
        (agg - 1.0).abs() <= 1e-9 && by.len() == 1,
        "single-measurement aggregation",
    )?;

    // Partition of unity over a surrogate-data model with all six measurements.
    let cfg = PopulationConfig::default();
    let h = generate_population(60, None, &cfg, 10).unwrap();
    let d = generate_population(60, Some(DiseaseKind::CAS), &cfg, 10).unwrap();
    let cohorts = PairedCohorts::from_patients(&h, &d).unwrap();
    let plan = cohorts.split_plan(5, 10).unwrap();
    let all = MeasurementCombination::bilateral(&Measurement::ALL).unwrap();
    let (train, _) = cohorts.fold_datasets(&plan.folds[0], &all).unwrap();
    let model = learners::fit(&Method::GB.default_hyperparams(), &train, 10).unwrap();
    let imp = split_improvement_importance(&model).map_err(|e| e.to_string())?;
    let by = aggregate_by_measurement(&imp, &all, 5).map_err(|e| e.to_string())?;
    let total: f64 = by.iter().map(|(_, w)| w).sum();
    ensure(
        by.len() == 6 && (total - 1.0).abs() <= 1e-9 && by.iter().all(|(_, w)| *w >= 0.0),
        format!("measurement weights sum to {total}"),
    )?;
    Ok(format!(
        "sum error {:.1e}, informative weight {:.4}",
        (sum - 1.0).abs(),
        imp_weight(&data)
    ))
}

fn imp_weight(data: &Dataset) -> f64 {
    let model = learners::fit(&Method::GB.default_hyperparams(), data, 9).unwrap();
    split_improvement_importance(&model).unwrap().weights[7]
}

fn determinism_and_leakage() -> Check {
    // Identical files from two independent runs.
    let mut cfg = RunConfig::with_seed(77);
    cfg.population.healthy = 40;
    cfg.population.diseases = [(DiseaseKind::SAS, 40), (DiseaseKind::AaaL, 30)]
        .into_iter()
        .collect();
    let combos = vec![
        MeasurementCombination::bilateral(&[Measurement::Q1]).unwrap(),
        MeasurementCombination::bilateral(&[Measurement::P1, Measurement::Q3]).unwrap(),
    ];
    let methods = [Method::NB, Method::RF, Method::GB];
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        commands::generate(&cfg, dir.path(), &[]).unwrap();
        commands::sweep(&cfg, dir.path(), &[], &methods, &combos).unwrap();
        let mut files = BTreeMap::new();
        for entry in std::fs::read_dir(dir.path()).unwrap() {
            let p = entry.unwrap().path();
            if p.extension()
                .is_some_and(|e| e != "json" || !p.to_string_lossy().contains("manifest"))
            {
                files.insert(
                    p.file_name().unwrap().to_owned(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
        files
    };
    let (a, b) = (run(), run());
    ensure(a.len() >= 10, format!("only {} files produced", a.len()))?;
    ensure(a == b, "two runs with the same seed differ")?;

    // Exhaustive leakage check over the desk-scale split of every disease.
    let d = desk();
    let mut checked = 0usize;
    for (kind, sick) in &d.diseased {
        let cohorts = PairedCohorts::from_patients(&d.healthy, sick).unwrap();
        let plan = cohorts.split_plan(5, DESK_SEED).unwrap();
        plan.validate().map_err(|e| e.to_string())?;
        let h: BTreeSet<u64> = plan.healthy_ids.iter().copied().collect();
        ensure(
            plan.diseased_ids.iter().all(|id| !h.contains(id)),
            format!("{kind}: subject in both classes"),
        )?;
        for fold in &plan.folds {
            let train: BTreeSet<u64> = fold.train.iter().map(|m| m.id).collect();
            ensure(
                train.len() == fold.train.len(),
                format!("{kind}: duplicate training subject"),
            )?;
            for m in &fold.test {
                ensure(
                    !train.contains(&m.id),
                    format!("{kind}: subject {} leaks", m.id),
                )?;
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{} identical files, {checked} test memberships checked",
        a.len()
    ))
}

#[test]
fn acceptance_gate() {
    let criteria: [Criterion; 10] = [
        ("area profile exactness", area_profile_exact),
        ("sampler bounds and uniformity", sampler_bounds),
        ("oracle equivalence", oracle_equivalence),
        ("gradient checks", gradient_checks),
        ("nonlinearity trend", nonlinearity_trend),
        ("pipeline trend", pipeline_trend),
        ("low-severity degradation", low_severity_degradation),
        ("structural counts", structural_counts),
        ("importance algebra", importance_algebra),
        ("determinism and leakage", determinism_and_leakage),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let line = match &outcome {
            Ok(detail) => format!("criterion {:>2} PASS  {name}: {detail}\n", i + 1),
            Err(why) => format!("criterion {:>2} FAIL  {name}: {why}\n", i + 1),
        };
        // Written past the test harness capture so the gate is always visible.
        let _ = std::io::stderr().write_all(line.as_bytes());
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
