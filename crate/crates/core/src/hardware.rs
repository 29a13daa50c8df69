//! Physical-layer models: cavity ray matrices, mode frequencies,
//! degeneracy-deviation detuning, optical-element rate conversions, and
//! disorder generators for robustness studies.
//!
//! The rectangular main cavity has four identical curved mirrors at its
//! corners and side lengths X and Y. Treating the quoted focal parameter
//! F as the mirror radius of curvature (lens equivalent f = F/2), the
//! round-trip ray matrix is exactly the identity at X = Y = F and the
//! cavity is stable iff (X-F)(Y-F) ≥ 0 — the degeneracy and stability
//! statements this module is calibrated against. The thin-lens reading
//! (f = F) satisfies neither and is provided only for comparison.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Free spectral range of a typical tabletop main cavity, 2π × 1 GHz.
pub const DEFAULT_OMEGA_F: f64 = 2.0 * PI * 1.0e9;
/// Typical on-site modulation strength, 2π × 20 MHz.
pub const DEFAULT_J0: f64 = 2.0 * PI * 20.0e6;
/// Typical hopping strength, 2π × 4 MHz.
pub const DEFAULT_J1: f64 = 2.0 * PI * 4.0e6;

/// Convert a rate given in units of J₁ to rad/s.
pub fn rate_to_physical(x_in_j1: f64, j1_phys: f64) -> f64 {
    x_in_j1 * j1_phys
}

/// Convert a time given in units of 1/J₁ to seconds.
pub fn time_to_physical(t_in_inv_j1: f64, j1_phys: f64) -> f64 {
    t_in_inv_j1 / j1_phys
}

/// Rectangular degenerate-cavity geometry.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CavityGeometry {
    /// Width (m).
    pub x: f64,
    /// Length (m).
    pub y: f64,
    /// Mirror focal parameter (m); interpreted per [`AbcdConvention`].
    pub f: f64,
    /// Wavelength (m).
    pub lambda: f64,
    /// Free spectral range (rad/s).
    pub omega_f: f64,
    /// Longitudinal mode index (bookkeeping only).
    pub n_index: u64,
}

impl CavityGeometry {
    pub fn new(x: f64, y: f64, f: f64, lambda: f64, omega_f: f64) -> Result<Self> {
        if !(x > 0.0 && y > 0.0 && f > 0.0 && lambda > 0.0 && omega_f > 0.0) {
            return Err(Error::InvalidParams(
                "cavity lengths, wavelength and FSR must be positive".into(),
            ));
        }
        Ok(Self {
            x,
            y,
            f,
            lambda,
            omega_f,
            n_index: 1,
        })
    }

    /// The F = 10 cm, λ = 1 μm, Ω_F = 2π·1 GHz reference cavity, offset
    /// from exact degeneracy by (dx, dy).
    pub fn reference(dx: f64, dy: f64) -> Self {
        let f = 0.10;
        Self {
            x: f + dx,
            y: f + dy,
            f,
            lambda: 1.0e-6,
            omega_f: DEFAULT_OMEGA_F,
            n_index: 1,
        }
    }
}

/// How the mirror focal parameter F enters the ray matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbcdConvention {
    /// F is the mirror radius of curvature: each reflection acts as a
    /// lens of focal length F/2. Shipped default; gives identity at
    /// X = Y = F.
    MirrorRadius,
    /// F is a thin-lens focal length. Does not reach the identity at
    /// X = Y = F; kept for comparison only.
    ThinLens,
}

/// Round-trip ray matrix [[A, B], [C, D]]: four focusing reflections
/// alternating with propagations over X, Y, X, Y.
pub fn round_trip_abcd(geom: &CavityGeometry, convention: AbcdConvention) -> [[f64; 2]; 2] {
    let f_lens = match convention {
        AbcdConvention::MirrorRadius => geom.f / 2.0,
        AbcdConvention::ThinLens => geom.f,
    };
    let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
        [
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ]
    };
    let lens = [[1.0, 0.0], [-1.0 / f_lens, 1.0]];
    let prop = |d: f64| [[1.0, d], [0.0, 1.0]];
    let half = mul(lens, mul(prop(geom.y), mul(lens, prop(geom.x))));
    mul(half, half)
}

/// (A + D)/2 of the shipped convention; the cavity is stable iff this
/// lies in [-1, 1], equivalently (X-F)(Y-F) ≥ 0 near degeneracy.
pub fn half_trace(geom: &CavityGeometry) -> f64 {
    let m = round_trip_abcd(geom, AbcdConvention::MirrorRadius);
    (m[0][0] + m[1][1]) / 2.0
}

fn stable_half_trace(geom: &CavityGeometry) -> Result<f64> {
    let ht = half_trace(geom);
    if ht.abs() > 1.0 + 1e-12 {
        return Err(Error::Unstable { half_trace: ht.abs() });
    }
    Ok(ht.clamp(-1.0, 1.0))
}

/// Transverse mode spacing arccos((A+D)/2)/(2π) · Ω_F (rad/s).
pub fn transverse_spacing(geom: &CavityGeometry) -> Result<f64> {
    Ok(stable_half_trace(geom)?.acos() / (2.0 * PI) * geom.omega_f)
}

/// Resonance frequency of the LG mode with radial index `p` and OAM `l`:
/// ω = n·Ω_F + (2p + |l| + 1) · arccos((A+D)/2)/(2π) · Ω_F.
pub fn mode_frequency(p: u32, l: i64, geom: &CavityGeometry) -> Result<f64> {
    let spacing = transverse_spacing(geom)?;
    Ok(geom.n_index as f64 * geom.omega_f + (2.0 * p as f64 + l.unsigned_abs() as f64 + 1.0) * spacing)
}

/// Beam waist of the stable cavity: w₀² = (λF/2π)·√((X-F)/(Y-F)).
pub fn beam_waist(geom: &CavityGeometry) -> Result<f64> {
    let (u, v) = (geom.x - geom.f, geom.y - geom.f);
    if v == 0.0 || u * v < 0.0 {
        return Err(Error::Unstable {
            half_trace: half_trace(geom).abs(),
        });
    }
    let w0_sq = geom.lambda * geom.f / (2.0 * PI) * (u / v).sqrt();
    Ok(w0_sq.sqrt())
}

/// Degeneracy-deviation detuning per OAM unit:
/// δω = 3 · arccos((A+D)/2)/(2π) · Ω_F, with per-site shift |l|·δω.
/// The factor 3 accounts for the radial index running with |l|.
pub fn degeneracy_detuning(geom: &CavityGeometry) -> Result<f64> {
    Ok(3.0 * transverse_spacing(geom)?)
}

/// On-site energy shifts |l|·δω for a set of OAM sites (rad/s).
pub fn detuning_profile(geom: &CavityGeometry, sites: &[i64]) -> Result<Vec<f64>> {
    let dw = degeneracy_detuning(geom)?;
    Ok(sites.iter().map(|l| l.unsigned_abs() as f64 * dw).collect())
}

/// Largest usable |l|: the detuning at l_max must stay below the
/// smallest band gap, l_max·δω ≤ 4J₁.
pub fn max_usable_oam(geom: &CavityGeometry, j1_phys: f64) -> Result<f64> {
    let dw = degeneracy_detuning(geom)?;
    if dw == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(4.0 * j1_phys / dw)
}

/// Reflectivity/transmissivity of a coupling beam splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterSpec {
    pub r: num_complex::Complex64,
    pub t: num_complex::Complex64,
}

impl BeamSplitterSpec {
    pub fn new(r: num_complex::Complex64, t: num_complex::Complex64) -> Result<Self> {
        if r.norm_sqr() + t.norm_sqr() > 1.0 + 1e-12 {
            return Err(Error::InvalidParams(format!(
                "|r|² + |t|² = {} exceeds 1",
                r.norm_sqr() + t.norm_sqr()
            )));
        }
        Ok(Self { r, t })
    }

    pub fn lossless(r_mag: f64) -> Result<Self> {
        let t = (1.0 - r_mag * r_mag).max(0.0).sqrt();
        Self::new(
            num_complex::Complex64::new(r_mag, 0.0),
            num_complex::Complex64::new(t, 0.0),
        )
    }
}

/// Tunneling rate realized by an auxiliary-cavity beam splitter:
/// J = Ω_F · |r|² / (2π (1 + |t|²)).
pub fn tunneling_from_bs(bs: &BeamSplitterSpec, omega_f: f64) -> f64 {
    omega_f * bs.r.norm_sqr() / (2.0 * PI * (1.0 + bs.t.norm_sqr()))
}

/// Input/output coupling set by the tunable beam splitter:
/// √κ_e ≈ |r_P|·√(Ω_F/2π) for r_P² ≪ 1.
pub fn kappa_e_from_tbs(r_p: f64, omega_f: f64) -> f64 {
    r_p * r_p * omega_f / (2.0 * PI)
}

/// What kind of imperfection an ensemble draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderKind {
    /// Constant offsets (δβ₀, δβ₁) per trial; tunneling phases are set
    /// by shared auxiliary cavities, so there is no per-link disorder.
    Phase,
    /// Independent per-site Gaussian energy shifts with std |l|·σ.
    OnsitePerSite,
    /// One Gaussian δω per trial, applied as |l|·δω to every site.
    OnsiteCommon,
}

/// Seeded description of a disorder ensemble.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DisorderSpec {
    pub kind: DisorderKind,
    /// Std of δβ₀ and δβ₁ (radians).
    pub sigma_phase: f64,
    /// Std scale of on-site shifts: per-site std is |l|·σ (energy units).
    pub sigma_detune: f64,
    pub seed: u64,
    pub trials: u32,
}

impl DisorderSpec {
    pub fn phase(sigma_phase: f64, seed: u64, trials: u32) -> Self {
        Self {
            kind: DisorderKind::Phase,
            sigma_phase,
            sigma_detune: 0.0,
            seed,
            trials: trials.max(1),
        }
    }

    pub fn onsite(sigma_detune: f64, seed: u64, trials: u32) -> Self {
        Self {
            kind: DisorderKind::OnsitePerSite,
            sigma_phase: 0.0,
            sigma_detune,
            seed,
            trials: trials.max(1),
        }
    }
}

/// One disorder realization.
#[derive(Debug, Clone, PartialEq)]
pub enum DisorderSample {
    Phase { dbeta0: f64, dbeta1: f64 },
    Onsite(Vec<f64>),
}

/// Draw realization `trial` of the ensemble. Each trial uses its own
/// ChaCha stream, so draws are reproducible and order-independent.
pub fn sample_disorder(spec: &DisorderSpec, trial: u32, sites: &[i64]) -> DisorderSample {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(trial as u64 + 1);
    match spec.kind {
        DisorderKind::Phase => {
            if spec.sigma_phase == 0.0 {
                return DisorderSample::Phase {
                    dbeta0: 0.0,
                    dbeta1: 0.0,
                };
            }
            let normal = Normal::new(0.0, spec.sigma_phase).expect("positive std");
            DisorderSample::Phase {
                dbeta0: normal.sample(&mut rng),
                dbeta1: normal.sample(&mut rng),
            }
        }
        DisorderKind::OnsitePerSite => {
            let unit = Normal::new(0.0, 1.0).expect("positive std");
            DisorderSample::Onsite(
                sites
                    .iter()
                    .map(|l| l.unsigned_abs() as f64 * spec.sigma_detune * unit.sample(&mut rng))
                    .collect(),
            )
        }
        DisorderKind::OnsiteCommon => {
            let unit = Normal::new(0.0, 1.0).expect("positive std");
            let dw = spec.sigma_detune * unit.sample(&mut rng);
            DisorderSample::Onsite(
                sites
                    .iter()
                    .map(|l| l.unsigned_abs() as f64 * dw)
                    .collect(),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn abcd_is_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let geom = CavityGeometry::new(
                rng.gen_range(0.01..0.5),
                rng.gen_range(0.01..0.5),
                rng.gen_range(0.01..0.5),
                1e-6,
                DEFAULT_OMEGA_F,
            )
            .unwrap();
            for conv in [AbcdConvention::MirrorRadius, AbcdConvention::ThinLens] {
                let m = round_trip_abcd(&geom, conv);
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                assert!((det - 1.0).abs() < 1e-9, "det {det}");
            }
        }
    }

    #[test]
    fn shipped_convention_is_degenerate_at_x_y_f() {
        let geom = CavityGeometry::reference(0.0, 0.0);
        let m = round_trip_abcd(&geom, AbcdConvention::MirrorRadius);
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-9, "M[{i}][{j}] = {v}");
            }
        }
        assert!((half_trace(&geom) - 1.0).abs() < 1e-12);
        // The thin-lens reading does not reach the identity.
        let naive = round_trip_abcd(&geom, AbcdConvention::ThinLens);
        assert!(((naive[0][0] + naive[1][1]) / 2.0 - 1.0).abs() > 0.5);
    }

    #[test]
    fn stability_matches_sign_of_offset_product() {
        for (du_um, dv_um) in [
            (5.0, 5.0),
            (50.0, 20.0),
            (-30.0, -10.0),
            (5.0, -5.0),
            (-40.0, 25.0),
        ] {
            let geom = CavityGeometry::reference(du_um * 1e-6, dv_um * 1e-6);
            let stable = half_trace(&geom).abs() <= 1.0;
            assert_eq!(stable, du_um * dv_um >= 0.0, "offsets {du_um}, {dv_um}");
        }
    }

    #[test]
    fn mode_frequencies_at_degeneracy() {
        let geom = CavityGeometry::reference(0.0, 0.0);
        let base = geom.n_index as f64 * geom.omega_f;
        for (p, l) in [(0u32, 0i64), (1, 3), (2, -7)] {
            assert!((mode_frequency(p, l, &geom).unwrap() - base).abs() < 1e-3);
        }
    }

    #[test]
    fn mode_frequency_depends_on_abs_l() {
        let geom = CavityGeometry::reference(20e-6, 14e-6);
        let a = mode_frequency(0, 5, &geom).unwrap();
        let b = mode_frequency(0, -5, &geom).unwrap();
        assert_eq!(a, b);
        let spacing = transverse_spacing(&geom).unwrap();
        let c = mode_frequency(0, 6, &geom).unwrap();
        assert!((c - a - spacing).abs() < 1e-6 * spacing.abs().max(1.0));
    }

    #[test]
    fn unstable_geometry_is_rejected() {
        let geom = CavityGeometry::reference(30e-6, -30e-6);
        assert!(matches!(
            mode_frequency(0, 0, &geom),
            Err(Error::Unstable { .. })
        ));
        assert!(matches!(beam_waist(&geom), Err(Error::Unstable { .. })));
        assert!(matches!(
            degeneracy_detuning(&geom),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn beam_waist_reference_value() {
        // Equal offsets: w₀ = √(λF/2π) ≈ 126 μm at λ = 1 μm, F = 10 cm.
        let geom = CavityGeometry::reference(10e-6, 10e-6);
        let w0 = beam_waist(&geom).unwrap();
        assert!((w0 - 126.2e-6).abs() < 0.5e-6, "w0 = {w0}");
        // Swapping X and Y inverts the ratio under the root.
        let swapped = CavityGeometry::reference(40e-6, 10e-6);
        let mirrored = CavityGeometry::reference(10e-6, 40e-6);
        let prod = beam_waist(&swapped).unwrap() * beam_waist(&mirrored).unwrap();
        assert!((prod - geom.lambda * geom.f / (2.0 * PI)).abs() < 1e-12);
        assert!(beam_waist(&CavityGeometry::reference(10e-6, 0.0)).is_err());
    }

    #[test]
    fn detuning_vanishes_at_degeneracy() {
        let geom = CavityGeometry::reference(0.0, 0.0);
        assert!(degeneracy_detuning(&geom).unwrap().abs() < 1e-9);
    }

    #[test]
    fn detuning_calibration_contour() {
        // δω = 0.05 J₁ with J₁ = 0.004 Ω_F should sit near
        // √((X-F)(Y-F)) ≈ 10 μm; root-find along the diagonal.
        let j1 = 0.004 * DEFAULT_OMEGA_F;
        let target = 0.05 * j1;
        let f_of = |d: f64| {
            let geom = CavityGeometry::reference(d, d);
            degeneracy_detuning(&geom).unwrap() - target
        };
        let (mut lo, mut hi) = (1e-7, 1e-4);
        assert!(f_of(lo) < 0.0 && f_of(hi) > 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f_of(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let d = 0.5 * (lo + hi);
        assert!(
            (d - 10e-6).abs() < 0.2 * 10e-6,
            "contour at {} μm, expected within 20% of 10 μm",
            d * 1e6
        );
        // Frozen value of the shipped convention.
        assert!((d - 10.47e-6).abs() < 0.02e-6, "{}", d * 1e6);
    }

    #[test]
    fn usable_oam_bound() {
        // l_max·√((X-F)(Y-F)) is a geometry-independent constant of
        // order 1000 μm·... for J₁ = 0.004 Ω_F and F = 10 cm.
        let j1 = 0.004 * DEFAULT_OMEGA_F;
        for d_um in [1.0, 5.0, 25.0] {
            let d = d_um * 1e-6;
            let geom = CavityGeometry::reference(d, d);
            let lmax = max_usable_oam(&geom, j1).unwrap();
            let product_um = lmax * d * 1e6;
            assert!(
                (product_um - 837.8).abs() < 2.0,
                "l_max·√(uv) = {product_um} μm"
            );
            assert!(product_um < 1000.0);
        }
    }

    #[test]
    fn tunneling_rate_from_beam_splitter() {
        let bs = BeamSplitterSpec::lossless(0.0).unwrap();
        assert_eq!(tunneling_from_bs(&bs, DEFAULT_OMEGA_F), 0.0);
        // |r|² = 0.2, |t|² = 0.8 at Ω_F = 2π·1 GHz → J ≈ 2π × 17.7 MHz.
        let bs = BeamSplitterSpec::lossless(0.2f64.sqrt()).unwrap();
        let j = tunneling_from_bs(&bs, DEFAULT_OMEGA_F);
        assert!((j / (2.0 * PI) - 17.68e6).abs() < 0.05e6, "{}", j / (2.0 * PI));
    }

    #[test]
    fn tbs_coupling_scale() {
        let kappa = kappa_e_from_tbs(0.05, DEFAULT_OMEGA_F);
        assert!((kappa.sqrt() - 0.05 * (DEFAULT_OMEGA_F / (2.0 * PI)).sqrt()).abs() < 1e-6);
        assert!(BeamSplitterSpec::lossless(1.2).is_err());
    }

    #[test]
    fn disorder_draws_are_deterministic() {
        let sites: Vec<i64> = (-5..=5).collect();
        let spec = DisorderSpec::phase(0.1, 7, 10);
        assert_eq!(
            sample_disorder(&spec, 3, &sites),
            sample_disorder(&spec, 3, &sites)
        );
        assert_ne!(
            sample_disorder(&spec, 3, &sites),
            sample_disorder(&spec, 4, &sites)
        );
        let zero = DisorderSpec::phase(0.0, 7, 1);
        assert_eq!(
            sample_disorder(&zero, 0, &sites),
            DisorderSample::Phase {
                dbeta0: 0.0,
                dbeta1: 0.0
            }
        );
    }

    #[test]
    fn onsite_disorder_scales_with_site_index() {
        let sites: Vec<i64> = (-40..=40).collect();
        let spec = DisorderSpec::onsite(0.05, 11, 400);
        let mut sq_sum = vec![0.0; sites.len()];
        for trial in 0..spec.trials {
            if let DisorderSample::Onsite(shifts) = sample_disorder(&spec, trial, &sites) {
                for (acc, s) in sq_sum.iter_mut().zip(shifts) {
                    *acc += s * s;
                }
            }
        }
        for (i, l) in sites.iter().enumerate() {
            let std = (sq_sum[i] / spec.trials as f64).sqrt();
            let expected = l.unsigned_abs() as f64 * spec.sigma_detune;
            if *l == 0 {
                assert_eq!(std, 0.0);
            } else {
                assert!(
                    (std - expected).abs() < 0.15 * expected,
                    "site {l}: std {std} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn common_onsite_disorder_is_rank_one() {
        let sites: Vec<i64> = (-6..=6).collect();
        let spec = DisorderSpec {
            kind: DisorderKind::OnsiteCommon,
            sigma_phase: 0.0,
            sigma_detune: 0.1,
            seed: 5,
            trials: 3,
        };
        if let DisorderSample::Onsite(shifts) = sample_disorder(&spec, 0, &sites) {
            let dw = shifts[sites.iter().position(|&l| l == 1).unwrap()];
            for (l, s) in sites.iter().zip(&shifts) {
                assert!((s - l.unsigned_abs() as f64 * dw).abs() < 1e-12);
            }
        } else {
            panic!("expected onsite sample");
        }
    }
}
