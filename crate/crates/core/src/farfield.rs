//! Far-field emission of the phased dipole ring: array factors, the
//! coherence-matrix intensity map, the isotropic surrogate, NA-cone
//! collection and Monte-Carlo pump-phase jitter.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::wavenumber_per_um;
use crate::error::{Error, Result};
use crate::quadrature::trapezoid;
use crate::selection::{EmissionOrders, Helicity};
use crate::special::bessel_j_orders;

pub const SIDECAR_SCHEMA_VERSION: u32 = 1;
pub const FARFIELD_CSV_HEADER: &str = "theta_deg,phi_rad,intensity";

/// Minimum θ samples that must fall inside an NA cone.
const MIN_CONE_SAMPLES: usize = 8;

/// Ring deviations below this fraction of the ring maximum are treated as zero
/// when counting fringes.
const FRINGE_FLOOR: f64 = 1e-9;

/// Coherent sum over `N` point emitters at `φ_n = 2πn/N`:
/// `Σ e^{imφ_n} e^{−i k3 R sinθ cos(φ_n − φ)}`.
pub fn array_factor_discrete(m: i64, sites: u32, theta: f64, phi: f64, k3: f64, radius_um: f64) -> Complex64 {
    assert!(sites >= 1, "array needs at least one site");
    let x = k3 * radius_um * theta.sin();
    let step = 2.0 * PI / sites as f64;
    (0..sites)
        .map(|n| {
            let phi_n = step * n as f64;
            // reduce m·φ_n exactly in integers before converting to an angle
            let winding = ((m * n as i64).rem_euclid(sites as i64)) as f64 * step;
            Complex64::from_polar(1.0, winding - x * (phi_n - phi).cos())
        })
        .sum()
}

/// Dense-ring limit `N (−i)^m e^{imφ} J_m(k3 R sinθ)`.
pub fn array_factor_dense(m: i64, theta: f64, phi: f64, k3: f64, radius_um: f64, sites: u32) -> Complex64 {
    let x = k3 * radius_um * theta.sin();
    let j = crate::special::bessel_j(m as i32, x);
    let minus_i_pow = match m.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    sites as f64 * j * minus_i_pow * Complex64::from_polar(1.0, m as f64 * phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldChannel {
    pub m: i64,
    pub helicity: Helicity,
    pub population: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherencePair {
    pub magnitude: f64,
    pub phase: f64,
}

impl CoherencePair {
    /// Pure-state coherence `|Γ| = √(n₊n₋)`, `ψ = 0`.
    pub fn full(n_plus: f64, n_minus: f64) -> Self {
        Self { magnitude: (n_plus * n_minus).sqrt(), phase: 0.0 }
    }
}

/// The four radiating channels `[R+, R−, L+, L−]` and the two helicity coherences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionState {
    pub channels: [FarFieldChannel; 4],
    pub coherence_r: CoherencePair,
    pub coherence_l: CoherencePair,
}

impl EmissionState {
    /// Channels of a design with the given populations `[R+, R−, L+, L−]`,
    /// fully coherent within each helicity.
    pub fn coherent(orders: &EmissionOrders, populations: [f64; 4]) -> Self {
        let m = orders.as_array();
        let h = [Helicity::R, Helicity::R, Helicity::L, Helicity::L];
        let channels = std::array::from_fn(|i| FarFieldChannel { m: m[i], helicity: h[i], population: populations[i] });
        Self {
            channels,
            coherence_r: CoherencePair::full(populations[0], populations[1]),
            coherence_l: CoherencePair::full(populations[2], populations[3]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let expect = [Helicity::R, Helicity::R, Helicity::L, Helicity::L];
        for (c, h) in self.channels.iter().zip(expect) {
            if c.helicity != h {
                return Err(Error::contract("channels must be ordered [R+, R−, L+, L−]"));
            }
            if !(c.population >= 0.0) {
                return Err(Error::contract(format!("population {} must be non-negative", c.population)));
            }
        }
        for (label, g, a, b) in [
            ("Γ_R", self.coherence_r, self.channels[0], self.channels[1]),
            ("Γ_L", self.coherence_l, self.channels[2], self.channels[3]),
        ] {
            let bound = (a.population * b.population).sqrt();
            if !(g.magnitude >= 0.0) || g.magnitude > bound * (1.0 + 1e-12) {
                return Err(Error::contract(format!(
                    "|{label}| = {} exceeds the Cauchy–Schwarz bound {bound}",
                    g.magnitude
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub theta_max_deg: f64,
    pub theta_step_deg: f64,
    pub phi_step_deg: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { theta_max_deg: 30.0, theta_step_deg: 0.25, phi_step_deg: 1.0 }
    }
}

impl GridSpec {
    /// Same steps, extended to the full forward hemisphere.
    pub fn hemisphere(&self) -> Self {
        Self { theta_max_deg: 90.0, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta_max_deg > 0.0 && self.theta_max_deg <= 90.0) {
            return Err(Error::config("farfield.grid.theta_max_deg", "must lie in (0, 90]"));
        }
        if !(self.theta_step_deg > 0.0 && self.theta_step_deg <= self.theta_max_deg) {
            return Err(Error::config("farfield.grid.theta_step_deg", "must lie in (0, theta_max_deg]"));
        }
        if !(self.phi_step_deg > 0.0 && self.phi_step_deg <= 180.0) {
            return Err(Error::config("farfield.grid.phi_step_deg", "must lie in (0, 180]"));
        }
        Ok(())
    }

    pub fn theta_deg(&self) -> Vec<f64> {
        let n = (self.theta_max_deg / self.theta_step_deg).round() as usize;
        (0..=n).map(|i| i as f64 * self.theta_step_deg).collect()
    }

    /// Uniform samples of `[0, 2π)`.
    pub fn phi_rad(&self) -> Vec<f64> {
        let n = (360.0 / self.phi_step_deg).round().max(1.0) as usize;
        (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Peak,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FarFieldModel {
    Full,
    Isotropic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldDesign {
    pub m_wgm: u32,
    pub sites: u32,
    pub ell: i64,
    pub output_nm: f64,
    pub radius_um: f64,
}

impl FarFieldDesign {
    pub fn k3(&self) -> f64 {
        wavenumber_per_um(self.output_nm)
    }

    pub fn orders(&self) -> EmissionOrders {
        EmissionOrders::for_design(self.m_wgm, self.sites, self.ell)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub model: FarFieldModel,
    pub design: FarFieldDesign,
    /// Orders `[R+, R−, L+, L−]` (full model) or `[Q₊, Q′₊, Q₋, Q′₋]` (isotropic).
    pub orders: [i64; 4],
    pub envelope: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// `I(θ, φ)` sampled row-major over θ.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldGrid {
    pub spec: GridSpec,
    pub theta_deg: Vec<f64>,
    pub phi_rad: Vec<f64>,
    pub intensity: Vec<f64>,
    pub normalization: Normalization,
    /// Maximum before normalisation.
    pub peak_raw: f64,
    pub metadata: GridMetadata,
}

impl FarFieldGrid {
    pub fn n_theta(&self) -> usize {
        self.theta_deg.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi_rad.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_phi();
        &self.intensity[i * n..(i + 1) * n]
    }

    pub fn at(&self, i_theta: usize, j_phi: usize) -> f64 {
        self.intensity[i_theta * self.n_phi() + j_phi]
    }

    pub fn max(&self) -> f64 {
        self.intensity.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the θ row at `theta_deg`, which must be a grid sample.
    pub fn theta_index(&self, theta_deg: f64) -> Result<usize> {
        self.theta_deg
            .iter()
            .position(|&t| (t - theta_deg).abs() < 1e-9)
            .ok_or_else(|| Error::Resolution(format!("θ = {theta_deg}° is not a grid sample")))
    }

    /// Azimuthal fringe count on the ring at `theta_deg`: half the number
    /// of circular sign changes of `I − ⟨I⟩`.
    pub fn fringe_count(&self, theta_deg: f64) -> Result<u32> {
        Ok(count_fringes(self.row(self.theta_index(theta_deg)?)))
    }

    /// True when the on-axis intensity is at least half the grid maximum.
    pub fn on_axis_bright(&self) -> bool {
        let peak = self.max();
        peak > 0.0 && self.at(0, 0) >= 0.5 * peak
    }

    fn finish(
        spec: GridSpec,
        theta_deg: Vec<f64>,
        phi_rad: Vec<f64>,
        mut intensity: Vec<f64>,
        normalization: Normalization,
        metadata: GridMetadata,
    ) -> Self {
        let peak_raw = intensity.iter().copied().fold(0.0, f64::max);
        if normalization == Normalization::Peak && peak_raw > 0.0 {
            for v in intensity.iter_mut() {
                *v /= peak_raw;
            }
        }
        Self { spec, theta_deg, phi_rad, intensity, normalization, peak_raw, metadata }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.intensity.len() * 32);
        out.push_str(FARFIELD_CSV_HEADER);
        out.push('\n');
        for (i, t) in self.theta_deg.iter().enumerate() {
            for (j, p) in self.phi_rad.iter().enumerate() {
                out.push_str(&format!("{t},{p},{}\n", self.at(i, j)));
            }
        }
        out
    }

    pub fn sidecar(&self) -> FarFieldSidecar {
        FarFieldSidecar {
            schema_version: SIDECAR_SCHEMA_VERSION,
            kind: "farfield".into(),
            csv_header: FARFIELD_CSV_HEADER.into(),
            grid: self.spec,
            n_theta: self.n_theta(),
            n_phi: self.n_phi(),
            normalization: self.normalization,
            peak_raw: self.peak_raw,
            metadata: self.metadata.clone(),
        }
    }

    /// Rebuilds a grid from its CSV body and sidecar.
    pub fn from_parts(csv: &str, sidecar: &FarFieldSidecar) -> Result<Self> {
        if sidecar.schema_version != SIDECAR_SCHEMA_VERSION {
            return Err(Error::contract(format!("unsupported sidecar schema {}", sidecar.schema_version)));
        }
        let mut lines = csv.lines();
        if lines.next() != Some(FARFIELD_CSV_HEADER) {
            return Err(Error::contract("far-field CSV header mismatch"));
        }
        let mut theta = Vec::with_capacity(sidecar.n_theta);
        let mut phi = Vec::with_capacity(sidecar.n_phi);
        let mut intensity = Vec::with_capacity(sidecar.n_theta * sidecar.n_phi);
        for (k, line) in lines.enumerate() {
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::contract(format!("far-field CSV row {}: malformed", k + 2)))
            };
            let mut f = line.split(',');
            let (t, p, v) = (parse(f.next())?, parse(f.next())?, parse(f.next())?);
            if k % sidecar.n_phi == 0 {
                theta.push(t);
            }
            if k < sidecar.n_phi {
                phi.push(p);
            }
            intensity.push(v);
        }
        if theta.len() != sidecar.n_theta || intensity.len() != sidecar.n_theta * sidecar.n_phi {
            return Err(Error::contract("far-field CSV size does not match sidecar"));
        }
        Ok(Self {
            spec: sidecar.grid,
            theta_deg: theta,
            phi_rad: phi,
            intensity,
            normalization: sidecar.normalization,
            peak_raw: sidecar.peak_raw,
            metadata: sidecar.metadata.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarFieldSidecar {
    pub schema_version: u32,
    pub kind: String,
    pub csv_header: String,
    pub grid: GridSpec,
    pub n_theta: usize,
    pub n_phi: usize,
    pub normalization: Normalization,
    pub peak_raw: f64,
    pub metadata: GridMetadata,
}

/// Half the number of circular sign changes of `ring − mean(ring)`.
pub fn count_fringes(ring: &[f64]) -> u32 {
    if ring.is_empty() {
        return 0;
    }
    let mean = ring.iter().sum::<f64>() / ring.len() as f64;
    let scale = ring.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let floor = FRINGE_FLOOR * scale;
    let signs: Vec<bool> = ring.iter().map(|v| v - mean).filter(|d| d.abs() > floor).map(|d| d > 0.0).collect();
    if signs.is_empty() {
        return 0;
    }
    let changes = (0..signs.len()).filter(|&i| signs[i] != signs[(i + 1) % signs.len()]).count();
    (changes / 2) as u32
}

fn evaluate_rows<F>(spec: &GridSpec, max_order: usize, k3r: f64, point: F) -> (Vec<f64>, Vec<f64>, Vec<f64>)
where
    F: Fn(&[f64], f64) -> f64 + Sync,
{
    let theta = spec.theta_deg();
    let phi = spec.phi_rad();
    let rows: Vec<Vec<f64>> = theta
        .par_iter()
        .map(|t| {
            let table = bessel_j_orders(max_order, k3r * t.to_radians().sin());
            phi.iter().map(|&p| point(&table, p)).collect()
        })
        .collect();
    let intensity = rows.into_iter().flatten().collect();
    (theta, phi, intensity)
}

/// The coherence-matrix intensity: per helicity
/// `n₊J²_{|m₊|} + n₋J²_{|m₋|} + 2|Γ| J_{|m₊|} J_{|m₋|} cos(Δm φ + ψ)`,
/// with `x = k3 R sinθ` and `Δm = m₋ − m₊`, times `envelope`.
pub fn intensity_map(
    design: &FarFieldDesign,
    state: &EmissionState,
    spec: &GridSpec,
    envelope: f64,
    normalization: Normalization,
) -> Result<FarFieldGrid> {
    state.validate()?;
    spec.validate()?;
    if !(envelope >= 0.0) {
        return Err(Error::contract("envelope must be non-negative"));
    }
    let ch = state.channels;
    let max_order = ch.iter().map(|c| c.m.unsigned_abs() as usize).max().unwrap_or(0);
    let pairs = [(ch[0], ch[1], state.coherence_r), (ch[2], ch[3], state.coherence_l)];
    let k3r = design.k3() * design.radius_um;
    let (theta, phi, intensity) = evaluate_rows(spec, max_order, k3r, |table, p| {
        let mut total = 0.0;
        for (a, b, g) in &pairs {
            let ja = table[a.m.unsigned_abs() as usize];
            let jb = table[b.m.unsigned_abs() as usize];
            let dm = (b.m - a.m) as f64;
            total += a.population * ja * ja
                + b.population * jb * jb
                + 2.0 * g.magnitude * ja * jb * (dm * p + g.phase).cos();
        }
        // rounding can leave −ε where the bound is saturated
        (envelope * total).max(0.0)
    });
    let metadata =
        GridMetadata { model: FarFieldModel::Full, design: *design, orders: ch.map(|c| c.m), envelope, seed: None };
    Ok(FarFieldGrid::finish(*spec, theta, phi, intensity, normalization, metadata))
}

/// Orders `(Q₊, Q′₊, Q₋, Q′₋)` of the isotropic surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotropicOrders {
    pub q_plus: i64,
    pub q_plus_prime: i64,
    pub q_minus: i64,
    pub q_minus_prime: i64,
}

impl IsotropicOrders {
    /// `Q₊ = M − N + 2`, `Q′₊ = M − N − 2`, `Q₋ = −Q′₊`, `Q′₋ = −Q₊`.
    pub fn for_design(m_wgm: u32, sites: u32) -> Self {
        let d = m_wgm as i64 - sites as i64;
        Self { q_plus: d + 2, q_plus_prime: d - 2, q_minus: 2 - d, q_minus_prime: -d - 2 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_minus != -self.q_plus_prime || self.q_minus_prime != -self.q_plus {
            return Err(Error::contract(format!("isotropic orders {self:?} violate Q₋ = −Q′₊ and Q′₋ = −Q₊")));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [i64; 4] {
        [self.q_plus, self.q_plus_prime, self.q_minus, self.q_minus_prime]
    }
}

/// `2A[J²_{Q₊} + J²_{Q′₊} + J²_{Q₋} + J²_{Q′₋} + 2J²_{Q₊}cos(2Q₊φ) + 2J²_{Q₋}cos(2Q₋φ)]`.
pub fn intensity_isotropic(
    design: &FarFieldDesign,
    orders: &IsotropicOrders,
    spec: &GridSpec,
    amplitude: f64,
    normalization: Normalization,
) -> Result<FarFieldGrid> {
    orders.validate()?;
    spec.validate()?;
    if !(amplitude >= 0.0) {
        return Err(Error::contract("isotropic amplitude must be non-negative"));
    }
    let q = orders.as_array();
    let max_order = q.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0);
    let k3r = design.k3() * design.radius_um;
    let (theta, phi, intensity) = evaluate_rows(spec, max_order, k3r, |table, p| {
        let j2 = |n: i64| table[n.unsigned_abs() as usize].powi(2);
        let value = j2(q[0])
            + j2(q[1])
            + j2(q[2])
            + j2(q[3])
            + 2.0 * j2(q[0]) * (2.0 * q[0] as f64 * p).cos()
            + 2.0 * j2(q[2]) * (2.0 * q[2] as f64 * p).cos();
        (2.0 * amplitude * value).max(0.0)
    });
    let metadata =
        GridMetadata { model: FarFieldModel::Isotropic, design: *design, orders: q, envelope: amplitude, seed: None };
    Ok(FarFieldGrid::finish(*spec, theta, phi, intensity, normalization, metadata))
}

/// Fraction of the grid's power inside the cone `θ ≤ asin(NA)`, weighting
/// by `sinθ` and using the trapezoid rule on the grid samples.
pub fn spatial_efficiency(grid: &FarFieldGrid, na: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&na) {
        return Err(Error::contract(format!("NA {na} outside [0, 1]")));
    }
    if na == 0.0 {
        return Ok(0.0);
    }
    let cone = na.asin();
    let theta: Vec<f64> = grid.theta_deg.iter().map(|t| t.to_radians()).collect();
    let theta_max = *theta.last().expect("grid has θ samples");
    if cone > theta_max + 1e-9 {
        return Err(Error::Resolution(format!(
            "NA {na} reaches θ = {:.3}° beyond the grid limit {:.3}°",
            cone.to_degrees(),
            theta_max.to_degrees()
        )));
    }
    let inside = theta.iter().filter(|&&t| t <= cone + 1e-12).count();
    if inside < MIN_CONE_SAMPLES {
        return Err(Error::Resolution(format!(
            "only {inside} θ samples inside the NA {na} cone, need {MIN_CONE_SAMPLES}"
        )));
    }
    let dphi = 2.0 * PI / grid.n_phi() as f64;
    let weighted: Vec<f64> =
        (0..grid.n_theta()).map(|i| grid.row(i).iter().sum::<f64>() * dphi * theta[i].sin()).collect();
    let total = trapezoid(&theta, &weighted);
    if total == 0.0 {
        return Ok(0.0);
    }
    let mut xs: Vec<f64> = theta[..inside].to_vec();
    let mut ys: Vec<f64> = weighted[..inside].to_vec();
    if inside < theta.len() && cone > theta[inside - 1] + 1e-12 {
        let (t0, t1) = (theta[inside - 1], theta[inside]);
        let s = (cone - t0) / (t1 - t0);
        xs.push(cone);
        ys.push(weighted[inside - 1] + s * (weighted[inside] - weighted[inside - 1]));
    }
    Ok((trapezoid(&xs, &ys) / total).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterDesign {
    pub m_wgm: u32,
    pub sites: u32,
    pub ell: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterResult {
    pub sigma_deg: f64,
    pub trials: u32,
    pub seed: u64,
    pub mean_drop: f64,
    pub std_error: f64,
}

/// On-axis intensity of the discrete ring for the design's four equally
/// populated, fully coherent channels with per-site phase offsets.
fn on_axis_peak(orders: &[i64; 4], sites: u32, offsets: &[f64]) -> f64 {
    let step = 2.0 * PI / sites as f64;
    let field = |m: i64| -> Complex64 {
        offsets
            .iter()
            .enumerate()
            .map(|(n, d)| {
                let winding = ((m * n as i64).rem_euclid(sites as i64)) as f64 * step;
                Complex64::from_polar(1.0, winding + d)
            })
            .sum()
    };
    let r = field(orders[0]) + field(orders[1]);
    let l = field(orders[2]) + field(orders[3]);
    r.norm_sqr() + l.norm_sqr()
}

/// Mean fractional drop of the on-axis peak under i.i.d. Gaussian site
/// phases of standard deviation `sigma_deg`. Trial `t` draws from a ChaCha8
/// stream `t` keyed by `seed`, so the result does not depend on scheduling.
pub fn phase_jitter_peak_drop(sigma_deg: f64, trials: u32, design: &JitterDesign, seed: u64) -> Result<JitterResult> {
    if trials < 100 {
        return Err(Error::contract(format!("phase jitter needs at least 100 trials, got {trials}")));
    }
    if !(sigma_deg >= 0.0 && sigma_deg.is_finite()) {
        return Err(Error::contract("phase standard deviation must be finite and non-negative"));
    }
    let orders = EmissionOrders::for_design(design.m_wgm, design.sites, design.ell).as_array();
    if !orders.contains(&0) {
        return Err(Error::contract("design has no on-axis (m = 0) channel; the peak drop is undefined"));
    }
    let n = design.sites as usize;
    let reference = on_axis_peak(&orders, design.sites, &vec![0.0; n]);
    let normal = Normal::new(0.0, sigma_deg.to_radians()).map_err(|e| Error::contract(e.to_string()))?;
    let drops: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let offsets: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            1.0 - on_axis_peak(&orders, design.sites, &offsets) / reference
        })
        .collect();
    let count = drops.len() as f64;
    let mean = drops.iter().sum::<f64>() / count;
    let var = drops.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (count - 1.0);
    Ok(JitterResult { sigma_deg, trials, seed, mean_drop: mean, std_error: (var / count).sqrt() })
}
