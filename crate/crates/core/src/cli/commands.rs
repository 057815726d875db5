use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::output::Artifacts;
use super::{
    ApdArgs, CurveArgs, EfficiencyArgs, Figure, G2Args, G2Preset, GeometryArgs, HIntegralArgs,
    InterferenceArgs, LossArgs, PatternKind, RenderArgs, SmfArgs,
};
use crate::config::ExperimentConfig;
use crate::conversion::{
    check_reported_quantum_efficiency, efficiency_report_with_p_max, normalized_efficiency_curve,
    p_max_with_h, sfg_power_closed_form, EfficiencyReport, QuantumEfficiencyCheck, DESIGN_H_TOL,
};
use crate::error::{invalid, Result};
use crate::imaging::{analyze_petals, iccd_acquire, render, GridSpec, IccdConfig, PgmScaling};
use crate::overlap::{h_integral, FocusGeometry, QuadratureResult};
use crate::rng::{stream_key, stream_rng};
use crate::states::{
    fit_fringe, fringe_scan, hwp_transform, prepare_sagnac, upconvert_vertical_projection,
    FringeFit, OamPolState, Polarization,
};
use crate::statistics::{
    analytic_g2, apd_calibrate, coincidence_histogram, g2_estimate, g2_vs_position,
    loss_chain_internal_efficiency, signal_noise_for_target_g2, simulate_pairs, smf_coupling_scan,
    Channel, G2Estimate, PositionScan,
};

const CLI_DOMAIN: u16 = 32;

fn derived_seed(seed: u64, index: u64) -> u64 {
    stream_rng(seed, stream_key(CLI_DOMAIN, index)).random()
}

pub fn resolve_geometry(cfg: &ExperimentConfig, g: &GeometryArgs) -> Result<FocusGeometry> {
    FocusGeometry::for_crystal(
        g.xi.unwrap_or(cfg.geometry.xi),
        g.alpha.unwrap_or(cfg.geometry.alpha),
        &cfg.wavelengths()?,
        &cfg.crystal,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct HIntegralReport {
    pub l: i32,
    pub geometry: FocusGeometry,
    pub h: QuadratureResult,
}

pub fn h_integral_cmd(
    cfg: &ExperimentConfig,
    a: &HIntegralArgs,
    out: &mut Artifacts,
) -> Result<HIntegralReport> {
    let geometry = resolve_geometry(cfg, &a.geometry)?;
    let report = HIntegralReport {
        l: a.l,
        geometry,
        h: h_integral(a.l, &geometry, a.tol)?,
    };
    out.json("h_integral.json", &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct PmaxReport {
    pub geometry: FocusGeometry,
    pub h0: f64,
    pub p_max: f64,
}

fn pmax_for(cfg: &ExperimentConfig, geometry: &FocusGeometry) -> Result<PmaxReport> {
    let h0 = h_integral(0, geometry, DESIGN_H_TOL)?.value;
    Ok(PmaxReport {
        geometry: *geometry,
        h0,
        p_max: p_max_with_h(&cfg.crystal, &cfg.wavelengths()?, h0)?,
    })
}

pub fn pmax_cmd(
    cfg: &ExperimentConfig,
    a: &GeometryArgs,
    out: &mut Artifacts,
) -> Result<PmaxReport> {
    let report = pmax_for(cfg, &resolve_geometry(cfg, a)?)?;
    out.json("pmax.json", &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyOutput {
    pub l: i32,
    pub geometry: FocusGeometry,
    /// Low-power efficiency of mode l relative to l = 0.
    pub relative_to_gaussian: f64,
    /// P_max of mode l: the Gaussian value divided by the relative efficiency.
    pub report: EfficiencyReport,
    pub check: Option<QuantumEfficiencyCheck>,
}

/// Low-power SFG power of mode l relative to l = 0 for the configured crystal.
fn relative_efficiency(cfg: &ExperimentConfig, l: i32, geometry: &FocusGeometry) -> Result<f64> {
    let wl = cfg.wavelengths()?;
    let p = |l| sfg_power_closed_form(&cfg.crystal, &wl, 1.0, 1.0, l, geometry);
    Ok(p(l)? / p(0)?)
}

fn efficiency_for(
    cfg: &ExperimentConfig,
    l: i32,
    pump: f64,
    geometry: &FocusGeometry,
) -> Result<EfficiencyOutput> {
    let base = pmax_for(cfg, geometry)?;
    let rel = relative_efficiency(cfg, l, geometry)?;
    Ok(EfficiencyOutput {
        l,
        geometry: *geometry,
        relative_to_gaussian: rel,
        report: efficiency_report_with_p_max(&cfg.wavelengths()?, base.p_max / rel, pump)?,
        check: None,
    })
}

pub fn efficiency_cmd(
    cfg: &ExperimentConfig,
    a: &EfficiencyArgs,
    out: &mut Artifacts,
) -> Result<EfficiencyOutput> {
    let geometry = resolve_geometry(cfg, &a.geometry)?;
    let mut report = efficiency_for(
        cfg,
        a.l,
        a.pump_power.unwrap_or(cfg.circulating_pump),
        &geometry,
    )?;
    if let (Some(measured), Some(reported)) =
        (a.measured_power_efficiency, a.reported_quantum_efficiency)
    {
        let wl = cfg.wavelengths()?;
        report.check = Some(check_reported_quantum_efficiency(
            measured,
            reported,
            wl.signal,
            wl.sfg,
            a.flag_tolerance,
        )?);
    }
    out.json("efficiency.json", &report)?;
    Ok(report)
}

pub fn efficiency_curve_cmd(
    cfg: &ExperimentConfig,
    a: &CurveArgs,
    out: &mut Artifacts,
) -> Result<Vec<(i32, f64)>> {
    let geometry = resolve_geometry(cfg, &a.geometry)?;
    let curve = normalized_efficiency_curve(a.l_max, &geometry)?;
    let rows: Vec<Vec<f64>> = curve.iter().map(|&(l, r)| vec![f64::from(l), r]).collect();
    out.csv("efficiency_curve.csv", &["l", "relative_efficiency"], &rows)?;
    Ok(curve)
}

/// Up-converted superposition (|l⟩ + e^{iθ}|−l⟩)/√2 or a single mode |l⟩.
pub fn pattern_state(l: i32, theta: f64, kind: PatternKind) -> Result<OamPolState> {
    match kind {
        PatternKind::Donut => {
            OamPolState::from_terms([(l, Polarization::V, Complex64::new(1.0, 0.0))])
        }
        PatternKind::Superposition => {
            Ok(upconvert_vertical_projection(&hwp_transform(&prepare_sagnac(l, theta)?))?.0)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RenderReport {
    pub l: i32,
    pub theta: f64,
    pub pattern: PatternKind,
    pub grid: GridSpec,
    pub ring_radius_px: Option<f64>,
    pub petals: Option<usize>,
    pub iccd: Option<IccdConfig>,
    pub iccd_petals: Option<usize>,
    /// Why a petal count is missing, if it is.
    pub notes: Vec<String>,
}

pub fn render_cmd(
    cfg: &ExperimentConfig,
    a: &RenderArgs,
    out: &mut Artifacts,
) -> Result<RenderReport> {
    let kind = if a.superposition {
        PatternKind::Superposition
    } else {
        PatternKind::Donut
    };
    let state = pattern_state(a.l, a.theta, kind)?;
    let waist = cfg.imaging.mode_waist;
    let grid = GridSpec::for_ring(waist, a.l.unsigned_abs())?;
    let img = render(&state, waist, grid)?;
    let stem = format!(
        "render_l{}_{}",
        a.l,
        match kind {
            PatternKind::Donut => "donut",
            PatternKind::Superposition => "superposition",
        }
    );
    let mut notes = Vec::new();
    let analysis = analyze_petals(&img)
        .map_err(|e| notes.push(format!("noiseless: {e}")))
        .ok();
    out.pgm(&format!("{stem}.pgm"), &img, PgmScaling::Normalize)?;
    let radial: Vec<Vec<f64>> = img
        .radial_profile()
        .into_iter()
        .map(|(r, v)| vec![r, v])
        .collect();
    out.csv(
        &format!("{stem}_radial.csv"),
        &["r_m", "mean_intensity"],
        &radial,
    )?;

    let (iccd, iccd_petals) = if a.iccd || a.frames.is_some() || a.dark.is_some() {
        let iccd = IccdConfig {
            frames_per_image: a.frames.unwrap_or(cfg.imaging.iccd.frames_per_image),
            dark_count_mean: a.dark.unwrap_or(cfg.imaging.iccd.dark_count_mean),
            ..cfg.imaging.iccd
        };
        let counts = iccd_acquire(&img, &iccd)?;
        out.pgm(&format!("{stem}_iccd.pgm"), &counts, PgmScaling::Raw)?;
        let petals = analyze_petals(&counts)
            .map_err(|e| notes.push(format!("iccd: {e}")))
            .ok()
            .map(|p| p.petals);
        (Some(iccd), petals)
    } else {
        (None, None)
    };
    let report = RenderReport {
        l: a.l,
        theta: a.theta,
        pattern: kind,
        grid,
        ring_radius_px: analysis.as_ref().map(|p| p.peak_radius_px),
        petals: analysis.map(|p| p.petals),
        iccd,
        iccd_petals,
        notes,
    };
    out.json(&format!("{stem}.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct InterferenceReport {
    pub l: i32,
    pub visibility_model: f64,
    pub peak_counts: f64,
    pub noiseless: bool,
    pub fit: FringeFit,
}

pub fn interference_cmd(
    cfg: &ExperimentConfig,
    a: &InterferenceArgs,
    out: &mut Artifacts,
) -> Result<InterferenceReport> {
    if a.l == 0 {
        return Err(invalid("l", "the interferometer needs |l| >= 1"));
    }
    let v = a.visibility.unwrap_or(cfg.interference.visibility);
    let peak = a.peak_counts.unwrap_or(cfg.interference.peak_counts);
    let phases = a.phases.unwrap_or(cfg.interference.phases);
    let seed = (!a.noiseless).then(|| derived_seed(cfg.seed, u64::from(a.l.unsigned_abs())));
    let scan = fringe_scan(v, peak, cfg.interference.pinhole_phi, phases, seed)?;
    let fit = fit_fringe(&scan.thetas, &scan.counts)?;
    let rows: Vec<Vec<f64>> = scan
        .thetas
        .iter()
        .zip(&scan.counts)
        .map(|(t, c)| vec![*t, *c])
        .collect();
    out.csv(
        &format!("interference_l{}.csv", a.l),
        &["theta_rad", "counts"],
        &rows,
    )?;
    let report = InterferenceReport {
        l: a.l,
        visibility_model: v,
        peak_counts: peak,
        noiseless: a.noiseless,
        fit,
    };
    out.json(&format!("interference_l{}.json", a.l), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SmfG2Summary {
    pub signal_noise_rate: f64,
    pub target_max_g2: f64,
    pub max_g2: f64,
    pub max_err: f64,
    pub d_at_max: f64,
    pub centre_g2: f64,
    pub centre_err: f64,
    /// Centre lies below the maximum by more than three combined sigmas.
    pub dip: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmfReport {
    pub l: i32,
    pub mode_waist: f64,
    pub fiber_waist: f64,
    pub max_coupling: f64,
    pub centre_coupling: f64,
    pub g2: Option<SmfG2Summary>,
}

pub fn smf_displacements(cfg: &ExperimentConfig, points: usize) -> Vec<f64> {
    let half = cfg.smf.span_waists * cfg.smf.mode_waist;
    (0..points)
        .map(|k| -half + 2.0 * half * k as f64 / (points - 1) as f64)
        .collect()
}

pub fn smf_scan_cmd(cfg: &ExperimentConfig, a: &SmfArgs, out: &mut Artifacts) -> Result<SmfReport> {
    let points = a.points.unwrap_or(cfg.smf.points);
    if points < 2 {
        return Err(invalid("points", "need at least 2"));
    }
    let ds = smf_displacements(cfg, points);
    let scan = smf_coupling_scan(a.l, &ds, cfg.smf.mode_waist, cfg.smf.fiber_waist)?;
    let rows: Vec<Vec<f64>> = scan.iter().map(|&(d, c)| vec![d, c]).collect();
    out.csv(
        &format!("smf_scan_l{}.csv", a.l),
        &["d_m", "efficiency"],
        &rows,
    )?;
    let centre = scan
        .iter()
        .min_by(|x, y| x.0.abs().total_cmp(&y.0.abs()))
        .map_or(0.0, |p| p.1);
    let max = scan.iter().map(|p| p.1).fold(0.0, f64::max);

    let g2 = if a.g2 {
        let target = match (a.target_max_g2, a.l.unsigned_abs()) {
            (Some(t), _) => t,
            (None, 1) => cfg.smf.target_max_g2_l1,
            (None, 2) => cfg.smf.target_max_g2_l2,
            (None, _) => {
                return Err(invalid(
                    "target_max_g2",
                    "required for |l| other than 1 or 2",
                ))
            }
        };
        let mut pscan = PositionScan {
            l: a.l,
            displacements: ds,
            mode_waist: cfg.smf.mode_waist,
            fiber_waist: cfg.smf.fiber_waist,
            source: crate::statistics::SourceModel {
                duration: cfg.smf.duration_per_point,
                ..cfg.herald.source
            },
            channel_efficiency: cfg.herald.channel_efficiency,
        };
        let noise = pscan.calibrate_noise_floor(target)?;
        let res = g2_vs_position(&pscan)?;
        let rows: Vec<Vec<f64>> = res
            .iter()
            .map(|p| vec![p.d, p.coupling, p.estimate.g2, p.estimate.err])
            .collect();
        out.csv(
            &format!("smf_g2_l{}.csv", a.l),
            &["d_m", "coupling", "g2", "err"],
            &rows,
        )?;
        let best = res
            .iter()
            .max_by(|x, y| x.estimate.g2.total_cmp(&y.estimate.g2))
            .expect("at least two points");
        let mid = res
            .iter()
            .min_by(|x, y| x.d.abs().total_cmp(&y.d.abs()))
            .expect("at least two points");
        Some(SmfG2Summary {
            signal_noise_rate: noise,
            target_max_g2: target,
            max_g2: best.estimate.g2,
            max_err: best.estimate.err,
            d_at_max: best.d,
            centre_g2: mid.estimate.g2,
            centre_err: mid.estimate.err,
            dip: best.estimate.g2 - mid.estimate.g2
                > 3.0 * best.estimate.err.hypot(mid.estimate.err),
        })
    } else {
        None
    };
    let report = SmfReport {
        l: a.l,
        mode_waist: cfg.smf.mode_waist,
        fiber_waist: cfg.smf.fiber_waist,
        max_coupling: max,
        centre_coupling: centre,
        g2,
    };
    out.json(&format!("smf_scan_l{}.json", a.l), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct G2Report {
    pub preset: G2Preset,
    #[serde(flatten)]
    pub estimate: G2Estimate,
    pub analytic_g2: f64,
    pub nonclassical: bool,
    pub channel_efficiency: f64,
    pub signal_noise_rate: f64,
    pub duration: f64,
}

pub fn g2_sim_cmd(cfg: &ExperimentConfig, a: &G2Args, out: &mut Artifacts) -> Result<G2Report> {
    let mut src = cfg.herald.source;
    if let Some(d) = a.duration {
        src.duration = d;
    }
    let eta = match a.preset {
        G2Preset::Source => 1.0,
        G2Preset::PostConversion => {
            let eta = cfg.herald.channel_efficiency;
            src.signal_noise_rate =
                signal_noise_for_target_g2(&src, eta, cfg.herald.post_conversion_g2)?;
            eta
        }
    };
    let streams = simulate_pairs(&src, Channel::Fixed(eta))?;
    let estimate = g2_estimate(&streams, src.coincidence_window, 0.0)?;
    let name = match a.preset {
        G2Preset::Source => "source",
        G2Preset::PostConversion => "post_conversion",
    };
    if a.clicks {
        out.text(&format!("clicks_{name}.csv"), &streams.to_csv())?;
    }
    if a.histogram {
        let w = src.coincidence_window;
        let h = coincidence_histogram(&streams, w, 50.0 * w)?;
        let rows: Vec<Vec<f64>> = h
            .delays
            .iter()
            .zip(&h.counts)
            .map(|(d, c)| vec![*d, *c as f64])
            .collect();
        out.csv(
            &format!("histogram_{name}.csv"),
            &["delay_s", "coincidences"],
            &rows,
        )?;
    }
    let report = G2Report {
        preset: a.preset,
        estimate,
        analytic_g2: analytic_g2(&src, eta)?,
        nonclassical: crate::statistics::nonclassical_witness(estimate.g2)?,
        channel_efficiency: eta,
        signal_noise_rate: src.signal_noise_rate,
        duration: src.duration,
    };
    out.json(&format!("g2_{name}.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct LossReport {
    pub herald_rate: f64,
    pub stages: Vec<(String, f64)>,
    pub product: f64,
    pub internal_efficiency: f64,
}

pub fn loss_chain_cmd(
    cfg: &ExperimentConfig,
    a: &LossArgs,
    out: &mut Artifacts,
) -> Result<LossReport> {
    let herald = a.herald_rate.unwrap_or(cfg.losses.herald_rate);
    let chain = &cfg.losses.chain;
    let report = LossReport {
        herald_rate: herald,
        stages: chain.stages().to_vec(),
        product: chain.product(),
        internal_efficiency: loss_chain_internal_efficiency(herald, chain)?,
    };
    out.json("loss_chain.json", &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ApdRow {
    pub label: String,
    pub count_rate: f64,
    pub optics_transmission: f64,
    pub duty: f64,
    pub photon_rate: f64,
}

pub fn calibrate_apd_cmd(
    cfg: &ExperimentConfig,
    a: &ApdArgs,
    out: &mut Artifacts,
) -> Result<Vec<ApdRow>> {
    let states = match (a.count_rate, a.transmission) {
        (Some(count_rate), Some(t)) => vec![crate::config::ApdState {
            label: "input".into(),
            count_rate,
            optics_transmission: t,
        }],
        _ => cfg.apd.states.clone(),
    };
    let rows = states
        .iter()
        .map(|s| {
            let cal = cfg.apd.calibration(s);
            Ok(ApdRow {
                label: s.label.clone(),
                count_rate: s.count_rate,
                optics_transmission: s.optics_transmission,
                duty: cal.duty(),
                photon_rate: apd_calibrate(s.count_rate, &cal)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let csv: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(k, r)| vec![k as f64, r.count_rate, r.optics_transmission, r.photon_rate])
        .collect();
    out.csv(
        "apd_calibration.csv",
        &[
            "state_index",
            "count_rate",
            "optics_transmission",
            "photon_rate",
        ],
        &csv,
    )?;
    out.json("apd_calibration.json", &rows)?;
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
struct PowerCurveSummary {
    l: i32,
    p_max: f64,
    eta_quantum: f64,
    eta_power: f64,
}

/// SFG output power against input signal power for l = 0, 1, 2 at the
/// configured circulating pump power.
fn fig2a(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let geometry = cfg.geometry()?;
    let summaries = (0..=2)
        .map(|l| {
            let e = efficiency_for(cfg, l, cfg.circulating_pump, &geometry)?;
            Ok(PowerCurveSummary {
                l,
                p_max: e.report.p_max,
                eta_quantum: e.report.eta_quantum,
                eta_power: e.report.eta_power,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<f64>> = (0..=10)
        .map(|k| {
            let ps = k as f64 * 1e-3;
            let mut row = vec![ps];
            row.extend(summaries.iter().map(|s| ps * s.eta_power));
            row
        })
        .collect();
    out.csv(
        "sfg_power.csv",
        &[
            "signal_power_w",
            "sfg_power_l0_w",
            "sfg_power_l1_w",
            "sfg_power_l2_w",
        ],
        &rows,
    )?;
    out.json("sfg_power.json", &summaries)
}

#[derive(Debug, Clone, Serialize)]
struct CurveRow {
    l: i32,
    relative_efficiency: f64,
    quantum_efficiency: f64,
}

/// Relative and absolute efficiency against l.
fn fig2b(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let geometry = cfg.geometry()?;
    let curve = normalized_efficiency_curve(3, &geometry)?;
    let base = pmax_for(cfg, &geometry)?;
    let wl = cfg.wavelengths()?;
    let rows = curve
        .iter()
        .map(|&(l, rel)| {
            let r = efficiency_report_with_p_max(&wl, base.p_max / rel, cfg.circulating_pump)?;
            Ok(CurveRow {
                l,
                relative_efficiency: rel,
                quantum_efficiency: r.eta_quantum,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let csv: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![f64::from(r.l), r.relative_efficiency, r.quantum_efficiency])
        .collect();
    out.csv(
        "efficiency_curve.csv",
        &["l", "relative_efficiency", "quantum_efficiency"],
        &csv,
    )?;
    out.json("efficiency_curve.json", &rows)
}

/// Runs the preset for one figure panel into `<out>/<figure id>/`.
pub fn reproduce(cfg: &ExperimentConfig, figure: Figure, out: &mut Artifacts) -> Result<()> {
    let mut sub = out.subdir(figure.id())?;
    let render = |l, superposition| RenderArgs {
        l,
        theta: 0.0,
        superposition,
        iccd: true,
        frames: None,
        dark: None,
    };
    let smf = |l, g2| SmfArgs {
        l,
        points: None,
        g2,
        target_max_g2: None,
    };
    match figure {
        Figure::Fig2a => fig2a(cfg, &mut sub)?,
        Figure::Fig2b => fig2b(cfg, &mut sub)?,
        Figure::Fig2c => {
            render_cmd(cfg, &render(1, false), &mut sub)?;
        }
        Figure::Fig2d => {
            render_cmd(cfg, &render(2, false), &mut sub)?;
        }
        Figure::Fig2e => {
            render_cmd(cfg, &render(1, true), &mut sub)?;
        }
        Figure::Fig2f => {
            render_cmd(cfg, &render(2, true), &mut sub)?;
        }
        Figure::Fig3e => {
            g2_sim_cmd(
                cfg,
                &G2Args {
                    preset: G2Preset::PostConversion,
                    duration: None,
                    clicks: false,
                    histogram: true,
                },
                &mut sub,
            )?;
        }
        Figure::Fig3f => {
            smf_scan_cmd(cfg, &smf(1, false), &mut sub)?;
        }
        Figure::Fig3g => {
            smf_scan_cmd(cfg, &smf(1, true), &mut sub)?;
        }
        Figure::Fig3h => {
            smf_scan_cmd(cfg, &smf(2, false), &mut sub)?;
        }
        Figure::Fig3i => {
            smf_scan_cmd(cfg, &smf(2, true), &mut sub)?;
        }
        Figure::Fig3jk => {
            for l in [1, 2] {
                interference_cmd(
                    cfg,
                    &InterferenceArgs {
                        l,
                        visibility: None,
                        peak_counts: None,
                        phases: None,
                        noiseless: false,
                    },
                    &mut sub,
                )?;
            }
        }
    }
    out.absorb(sub);
    Ok(())
}
