//! Analytic multi-span link model: ASE accumulation, modulation-dependent
//! nonlinear interference, effective SNR, optimal launch power and reach.
//!
//! Launch power `P` is the total per-channel power over both polarizations.
//! The effective SNR is taken per polarization (two real dimensions), the
//! same convention as [`crate::air::AwgnSpec`]:
//!
//! ```text
//! SNR_eff = (P / 2) / (sigma2_ase + sigma2_nli)
//! sigma2_ase = N (G - 1) h f_c n_sp R_s
//! sigma2_nli = N^(1 + eps) P^3 [eta1 + eta2 (mu4 - 2) + eta3 (mu4 - 2)^2 + eta4 mu6]
//! ```
//!
//! The `eta` coefficients are per span and are configuration inputs; the
//! shipped set ([`LinkSpec::calibrated`]) is a calibration, see
//! [`calibrate_eta`].

use serde::{Deserialize, Serialize};

use crate::air::{snr_at_rate, GmiCurve};
use crate::constellation::{LabeledConstellation, MomentSet};
use crate::error::{Error, Result};
use crate::scalar::{norm2, Real};

const PLANCK: f64 = 6.626_070_15e-34;
const LIGHT_SPEED: f64 = 299_792_458.0;

/// Per-span `[eta1, eta2, eta3, eta4]` of the shipped calibration, W^-2,
/// fitted by [`calibrate_eta`] with [`CalibrationTargets::default`] against
/// table1 and PM-8QAM GMI curves (400k samples per SNR, seed 11).
pub const CALIBRATED_ETA: [f64; 4] = [836.4, 213.9, 0.0, 0.0];

/// Which moments drive the modulation-dependent NLI terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    /// Pooled per-polarization complex-modulus moments.
    PerPolarization,
    /// Moments derived from the 4D symbol energy `|x|^2 + |y|^2`, mapped so
    /// that polarization-multiplexed formats get exactly their
    /// per-polarization moments and 4D constant-modulus formats get `(1, 1)`.
    #[default]
    FourDEnergy,
}

/// Provenance-only fiber parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberMetadata {
    pub dispersion_ps_nm_km: f64,
    pub gamma_per_w_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    /// km
    pub span_length: f64,
    pub n_spans: u32,
    pub alpha_db_per_km: f64,
    pub noise_figure_db: f64,
    /// GBaud
    pub symbol_rate: f64,
    /// nm
    pub carrier_wavelength: f64,
    /// Per-span `[eta1, eta2, eta3, eta4]`, W^-2.
    pub eta: [f64; 4],
    /// NLI accumulates as `N^(1 + eps)`; zero means incoherent.
    #[serde(default)]
    pub coherence_epsilon: f64,
    #[serde(default)]
    pub moment_source: MomentSource,
    pub metadata: Option<FiberMetadata>,
}

impl LinkSpec {
    /// 80 km spans of 0.21 dB/km fiber, NF 5 dB, 45 GBaud at 1550 nm, 100
    /// spans, with the shipped calibrated `eta` set.
    pub fn calibrated() -> Self {
        Self {
            span_length: 80.0,
            n_spans: 100,
            alpha_db_per_km: 0.21,
            noise_figure_db: 5.0,
            symbol_rate: 45.0,
            carrier_wavelength: 1550.0,
            eta: CALIBRATED_ETA,
            coherence_epsilon: 0.0,
            moment_source: MomentSource::FourDEnergy,
            metadata: Some(FiberMetadata {
                dispersion_ps_nm_km: 16.9,
                gamma_per_w_km: 1.3175,
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("span_length", self.span_length),
            ("alpha_db_per_km", self.alpha_db_per_km),
            ("symbol_rate", self.symbol_rate),
            ("carrier_wavelength", self.carrier_wavelength),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.noise_figure_db.is_finite() && self.noise_figure_db > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise figure must be positive, got {} dB",
                self.noise_figure_db
            )));
        }
        if self.n_spans == 0 {
            return Err(Error::InvalidParameter("n_spans must be at least 1".into()));
        }
        if self.eta.iter().any(|e| !e.is_finite()) || self.eta[0] < 0.0 {
            return Err(Error::InvalidParameter("eta must be finite with eta1 >= 0".into()));
        }
        if !self.coherence_epsilon.is_finite() || self.coherence_epsilon < 0.0 {
            return Err(Error::InvalidParameter("coherence_epsilon must be >= 0".into()));
        }
        Ok(())
    }

    pub fn with_spans(&self, n_spans: u32) -> Self {
        Self { n_spans, ..self.clone() }
    }

    pub fn distance_km(&self) -> f64 {
        self.span_length * self.n_spans as f64
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("link spec serializes")
    }

    fn nli_scale(&self) -> f64 {
        (self.n_spans as f64).powf(1.0 + self.coherence_epsilon)
    }
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watt_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// Accumulated ASE noise power per polarization in the signal bandwidth, W.
pub fn ase_variance(link: &LinkSpec) -> f64 {
    let gain = 10f64.powf(link.alpha_db_per_km * link.span_length / 10.0);
    let n_sp = 10f64.powf(link.noise_figure_db / 10.0) / 2.0;
    let f_c = LIGHT_SPEED / (link.carrier_wavelength * 1e-9);
    link.n_spans as f64 * (gain - 1.0) * PLANCK * f_c * n_sp * link.symbol_rate * 1e9
}

/// Moments used by the NLI model for `c` under `source`.
pub fn nli_moments<T: Real>(c: &LabeledConstellation<T>, source: MomentSource) -> Result<MomentSet<f64>> {
    match source {
        MomentSource::PerPolarization => {
            let m = c.moments()?;
            Ok(MomentSet {
                mu4: m.mu4.as_f64(),
                mu6: m.mu6.as_f64(),
            })
        }
        MomentSource::FourDEnergy => {
            let n = c.len() as f64;
            let mut mean = [0.0; 4];
            for p in c.points() {
                for (m, v) in mean.iter_mut().zip(p) {
                    *m += v.as_f64() / n;
                }
            }
            let energies: Vec<f64> = c
                .points()
                .iter()
                .map(|p| {
                    let q = [0, 1, 2, 3].map(|k| p[k].as_f64() - mean[k]);
                    norm2(&q)
                })
                .collect();
            let e1 = energies.iter().sum::<f64>() / n;
            if e1 <= 0.0 {
                return Err(Error::Degenerate("zero second moment".into()));
            }
            let m2 = e1 / 2.0;
            let var = energies.iter().map(|e| (e - e1).powi(2)).sum::<f64>() / n;
            let e3 = energies.iter().map(|e| e.powi(3)).sum::<f64>() / n;
            let mu4 = 1.0 + var / (2.0 * m2 * m2);
            let mu6 = (e3 - 6.0 * mu4 * m2.powi(3)) / (2.0 * m2.powi(3));
            Ok(MomentSet { mu4, mu6 })
        }
    }
}

/// Per-span bracketed `P^3` coefficient for the given moments.
pub fn eta_eff_for(eta: &[f64; 4], m: &MomentSet<f64>) -> f64 {
    let d = m.mu4 - 2.0;
    eta[0] + eta[1] * d + eta[2] * d * d + eta[3] * m.mu6
}

/// Total (all spans) coefficient of `P^3` in the NLI variance for `c`.
pub fn eta_eff<T: Real>(link: &LinkSpec, c: &LabeledConstellation<T>) -> Result<f64> {
    let m = nli_moments(c, link.moment_source)?;
    Ok(link.nli_scale() * eta_eff_for(&link.eta, &m))
}

/// NLI variance at launch power `p` (W).
pub fn nli_variance<T: Real>(link: &LinkSpec, c: &LabeledConstellation<T>, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("launch power {p} W must be positive")));
    }
    let v = eta_eff(link, c)? * p.powi(3);
    if v < 0.0 {
        return Err(Error::ModelDomain(format!("negative NLI variance {v} W; check the eta set")));
    }
    Ok(v)
}

fn snr_linear(p: f64, ase: f64, nli: f64) -> f64 {
    (p / 2.0) / (ase + nli)
}

/// Effective SNR in dB at launch power `p` (W).
pub fn effective_snr<T: Real>(link: &LinkSpec, c: &LabeledConstellation<T>, p: f64) -> Result<f64> {
    let nli = nli_variance(link, c, p)?;
    Ok(10.0 * snr_linear(p, ase_variance(link), nli).log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkOperatingPoint {
    pub launch_power_dbm: f64,
    pub sigma2_ase: f64,
    pub sigma2_nli: f64,
    pub snr_eff_db: f64,
    pub gmi: Option<f64>,
}

impl LinkOperatingPoint {
    fn at<T: Real>(link: &LinkSpec, c: &LabeledConstellation<T>, p: f64) -> Result<Self> {
        let ase = ase_variance(link);
        let nli = nli_variance(link, c, p)?;
        Ok(Self {
            launch_power_dbm: watt_to_dbm(p),
            sigma2_ase: ase,
            sigma2_nli: nli,
            snr_eff_db: 10.0 * snr_linear(p, ase, nli).log10(),
            gmi: None,
        })
    }

    /// Effective SNR recomputed from the stored variances.
    pub fn recomputed_snr_db(&self) -> f64 {
        10.0 * snr_linear(dbm_to_watt(self.launch_power_dbm), self.sigma2_ase, self.sigma2_nli).log10()
    }
}

/// Launch power maximizing the effective SNR, `p* = (sigma2_ase / (2 eta_eff))^(1/3)`.
///
/// Returns `(p*_dBm, SNR_eff(p*)_dB)`.
pub fn optimal_launch_power<T: Real>(link: &LinkSpec, c: &LabeledConstellation<T>) -> Result<(f64, f64)> {
    let eta = eta_eff(link, c)?;
    if !(eta > 0.0) {
        return Err(Error::ModelDomain(format!(
            "effective NLI coefficient {eta} W^-2 is not positive; no finite optimal power"
        )));
    }
    let ase = ase_variance(link);
    let p = (ase / (2.0 * eta)).cbrt();
    let snr = 10.0 * snr_linear(p, ase, eta * p.powi(3)).log10();
    let numeric = numeric_optimum(|x| snr_linear(dbm_to_watt(x), ase, eta * dbm_to_watt(x).powi(3)), watt_to_dbm(p));
    if (numeric - snr).abs() > 0.01 {
        return Err(Error::ModelDomain(format!(
            "closed-form optimum {snr} dB disagrees with numeric search {numeric} dB"
        )));
    }
    Ok((watt_to_dbm(p), snr))
}

/// Golden-section maximum of `f` (linear SNR) over `center +- 10` dB, in dB.
fn numeric_optimum(f: impl Fn(f64) -> f64, center: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (center - 10.0, center + 10.0);
    while b - a > 1e-6 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    10.0 * f((a + b) / 2.0).log10()
}

/// Operating points over a list of launch powers (dBm).
pub fn power_sweep<T: Real>(
    link: &LinkSpec,
    c: &LabeledConstellation<T>,
    powers_dbm: &[f64],
) -> Result<Vec<LinkOperatingPoint>> {
    powers_dbm
        .iter()
        .map(|&dbm| LinkOperatingPoint::at(link, c, dbm_to_watt(dbm)))
        .collect()
}

/// One point of an AIR-versus-distance curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistancePoint {
    pub distance_km: f64,
    pub p_opt_dbm: f64,
    pub snr_eff_db: f64,
    pub gmi: f64,
}

/// AIR at the optimal launch power for each distance. `air` maps an
/// effective SNR in dB to a GMI (typically `gmi_mc` on an `AwgnSpec`, or an
/// interpolated [`GmiCurve`]).
pub fn air_vs_distance<T: Real>(
    template: &LinkSpec,
    c: &LabeledConstellation<T>,
    distances_km: &[f64],
    air: impl Fn(f64) -> Result<f64>,
) -> Result<Vec<DistancePoint>> {
    distances_km
        .iter()
        .map(|&d| {
            let spans = d / template.span_length;
            if spans < 0.5 || (spans - spans.round()).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "distance {d} km is not a positive multiple of the {} km span",
                    template.span_length
                )));
            }
            let link = template.with_spans(spans.round() as u32);
            let (p, snr) = optimal_launch_power(&link, c)?;
            Ok(DistancePoint {
                distance_km: d,
                p_opt_dbm: p,
                snr_eff_db: snr,
                gmi: air(snr)?,
            })
        })
        .collect()
}

/// GMI lookup by linear interpolation of a sampled curve, clamped at its
/// ends.
pub fn interpolate_gmi(curve: &GmiCurve, snr_db: f64) -> f64 {
    let (s, g) = (&curve.snr_db, &curve.gmi);
    if snr_db <= s[0] {
        return g[0];
    }
    for k in 0..s.len() - 1 {
        if snr_db <= s[k + 1] {
            let t = (snr_db - s[k]) / (s[k + 1] - s[k]);
            return g[k] + t * (g[k + 1] - g[k]);
        }
    }
    *g.last().expect("non-empty")
}

/// Distance at which the GMI first drops to `threshold`, linearly
/// interpolated between curve samples.
pub fn reach_at_threshold(curve: &[DistancePoint], threshold: f64) -> Result<f64> {
    for w in curve.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.gmi >= threshold && b.gmi <= threshold {
            if a.gmi == b.gmi {
                return Ok(a.distance_km);
            }
            let t = (a.gmi - threshold) / (a.gmi - b.gmi);
            return Ok(a.distance_km + t * (b.distance_km - a.distance_km));
        }
    }
    if let [only] = curve {
        if only.gmi == threshold {
            return Ok(only.distance_km);
        }
    }
    Err(Error::OutOfRange(format!("GMI threshold {threshold} is never crossed by the curve")))
}

/// Targets of the shipped `eta` calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTargets {
    /// Effective-SNR advantage of constant-modulus formats over PM-8QAM at
    /// their optimal powers, dB.
    pub gap_at_optimum_db: f64,
    /// Same advantage in the NLI-dominated high-power limit, dB.
    pub high_power_penalty_db: f64,
    /// Reach advantage of the shaped format over PM-8QAM, km.
    pub reach_delta_km: f64,
    /// GMI at which reach is measured.
    pub reach_gmi: f64,
    /// Fixed `eta3 / eta1` and `eta4 / eta1` (not identifiable from the targets).
    pub eta3_ratio: f64,
    pub eta4_ratio: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        Self {
            gap_at_optimum_db: 0.16,
            high_power_penalty_db: 0.47,
            reach_delta_km: 1100.0,
            reach_gmi: 5.2,
            eta3_ratio: 0.0,
            eta4_ratio: 0.0,
        }
    }
}

/// Ratio `rho = eta_eff(PM-8QAM) / eta_eff(CM)` fitting both gap targets in
/// least squares: the optimum-power gap is `(10/3) log10 rho` and the
/// high-power gap `10 log10 rho`.
pub fn fitted_eta_ratio(t: &CalibrationTargets) -> f64 {
    // minimize (x/3 - g)^2 + (x - h)^2 over x = 10 log10 rho
    let x = (t.gap_at_optimum_db / 3.0 + t.high_power_penalty_db) / (1.0 + 1.0 / 9.0);
    10f64.powf(x / 10.0)
}

/// `eta2 / eta1` giving the ratio `rho` between a format with moments `qam`
/// and a constant-modulus format.
pub fn eta2_ratio_for(rho: f64, qam: &MomentSet<f64>, t: &CalibrationTargets) -> Result<f64> {
    let (f3, f4) = (t.eta3_ratio, t.eta4_ratio);
    let dq = qam.mu4 - 2.0;
    // eta_eff / eta1 = 1 + u (mu4 - 2) + f3 (mu4 - 2)^2 + f4 mu6; CM has mu4 = mu6 = 1
    let denom = rho + dq;
    if denom.abs() < 1e-12 {
        return Err(Error::ModelDomain("calibration is singular for these moments".into()));
    }
    let num = rho * (1.0 + f3 + f4) - 1.0 - f3 * dq * dq - f4 * qam.mu6;
    Ok(num / denom)
}

/// Fits the per-span `eta` set.
///
/// The shape (`eta2 / eta1`) follows from the two SNR gap targets; the
/// absolute scale is then chosen so that the continuous-span reach
/// difference between `shaped` and `pm8qam` at `reach_gmi` equals
/// `reach_delta_km`. `curve_*` are AWGN GMI-vs-SNR curves of the two
/// formats. Reach at the optimal power scales as `eta^(-1/3)`, so the scale
/// has a closed form.
pub fn calibrate_eta<T: Real>(
    template: &LinkSpec,
    shaped: &LabeledConstellation<T>,
    curve_shaped: &GmiCurve,
    pm8qam: &LabeledConstellation<T>,
    curve_pm8qam: &GmiCurve,
    t: &CalibrationTargets,
) -> Result<[f64; 4]> {
    let rho = fitted_eta_ratio(t);
    let qam = nli_moments(pm8qam, template.moment_source)?;
    let u = eta2_ratio_for(rho, &qam, t)?;
    let unit = [1.0, u, t.eta3_ratio, t.eta4_ratio];
    let probe = LinkSpec {
        eta: unit,
        coherence_epsilon: 0.0,
        ..template.with_spans(1)
    };
    let reach = |c: &LabeledConstellation<T>, curve: &GmiCurve| -> Result<f64> {
        let (p_dbm, _) = optimal_launch_power(&probe, c)?;
        let snr_req = 10f64.powf(snr_at_rate(curve, t.reach_gmi)? / 10.0);
        // SNR*(N) = (p*/2) / (3/2 N a) with a the per-span ASE
        let spans = dbm_to_watt(p_dbm) / (3.0 * ase_variance(&probe) * snr_req);
        Ok(spans * template.span_length)
    };
    let delta = reach(shaped, curve_shaped)? - reach(pm8qam, curve_pm8qam)?;
    if !(delta > 0.0) {
        return Err(Error::ModelDomain(format!(
            "shaped format does not out-reach PM-8QAM (delta {delta} km); cannot calibrate"
        )));
    }
    let scale = (delta / t.reach_delta_km).powi(3);
    Ok(unit.map(|e| e * scale))
}
