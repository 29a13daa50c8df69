//! Band topology over the (k, t) torus of a pump schedule.
//!
//! The pump loop plus the Brillouin zone form a torus on which each band
//! carries a Chern number. It is computed with the lattice field-strength
//! (link-variable plaquette) method, which returns an exact integer on
//! any grid fine enough to resolve the gap. The same invariant is
//! obtained independently as the degree of the map (k, t) → ±h/|h| onto
//! the Bloch sphere, summed from signed solid angles of grid triangles.
//!
//! Curvature orientation: Ω_kt = ∂_t A_k - ∂_k A_t, so that the Chern
//! number equals the change in polarization (Wannier-center displacement
//! in unit cells) over one cycle. With the clockwise default loop the
//! lower band gives +1.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{bloch_hamiltonian, Band, BlochVector, PumpSchedule, RiceMeleParams};

const TWO_PI: f64 = 2.0 * PI;

/// Default grid resolution in k and t.
pub const DEFAULT_GRID: usize = 64;

/// Gap tolerance factor: loops with 2|h| < this × J₁ anywhere on the
/// grid are rejected as ill-posed (non-adiabatic).
pub const GAP_TOL_FACTOR: f64 = 1e-6;

fn check_grid(n_k: usize, n_t: usize) -> Result<()> {
    if n_k < 2 || n_t < 2 {
        return Err(Error::InvalidParams(format!(
            "grid must be at least 2x2, got {n_k}x{n_t}"
        )));
    }
    Ok(())
}

fn bloch_at(schedule: &PumpSchedule, p: &RiceMeleParams, k: f64, t: f64) -> BlochVector {
    let (b0, b1) = schedule.beta_at(t);
    bloch_hamiltonian(k, b0, b1, p)
}

/// Band energies E₊(k, t) over one pump period, with E₋ = -E₊.
#[derive(Debug, Clone)]
pub struct BandGrid {
    pub n_k: usize,
    pub n_t: usize,
    /// Upper-band energy, row-major over (t, k): index `it * n_k + ik`.
    pub e_upper: Vec<f64>,
    /// Smallest gap 2|h| over the grid.
    pub min_gap: f64,
    /// (ik, it) where the minimum gap is attained.
    pub min_gap_at: (usize, usize),
}

impl BandGrid {
    pub fn energy(&self, band: Band, ik: usize, it: usize) -> f64 {
        band.sign() * self.e_upper[it * self.n_k + ik]
    }

    pub fn k_value(&self, ik: usize) -> f64 {
        TWO_PI * ik as f64 / self.n_k as f64
    }

    pub fn t_value(&self, period: f64, it: usize) -> f64 {
        period * it as f64 / self.n_t as f64
    }
}

/// Evaluate both band energies on an n_k × n_t grid over one period.
pub fn band_energies(
    schedule: &PumpSchedule,
    p: &RiceMeleParams,
    n_k: usize,
    n_t: usize,
) -> Result<BandGrid> {
    check_grid(n_k, n_t)?;
    let period = schedule.period();
    let mut e_upper = Vec::with_capacity(n_k * n_t);
    let mut min_gap = f64::INFINITY;
    let mut min_gap_at = (0, 0);
    for it in 0..n_t {
        let t = period * it as f64 / n_t as f64;
        for ik in 0..n_k {
            let k = TWO_PI * ik as f64 / n_k as f64;
            let e = bloch_at(schedule, p, k, t).norm();
            if 2.0 * e < min_gap {
                min_gap = 2.0 * e;
                min_gap_at = (ik, it);
            }
            e_upper.push(e);
        }
    }
    Ok(BandGrid {
        n_k,
        n_t,
        e_upper,
        min_gap,
        min_gap_at,
    })
}

/// Berry curvature plaquette field over the (k, t) torus.
#[derive(Debug, Clone)]
pub struct CurvatureGrid {
    pub n_k: usize,
    pub n_t: usize,
    pub band: Band,
    /// Plaquette field strengths in (-π, π], row-major over (t, k).
    pub values: Vec<f64>,
}

impl CurvatureGrid {
    /// Sum of all plaquette values; 2π × (integer) for a closed loop.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// The integer Chern number, with a consistency check that the
    /// plaquette sum is an integer multiple of 2π to 1e-9.
    pub fn chern(&self) -> Result<i32> {
        let c = self.total() / TWO_PI;
        let rounded = c.round();
        if (c - rounded).abs() > 1e-9 {
            return Err(Error::StepFailure(format!(
                "plaquette sum {c} is not an integer; grid too coarse"
            )));
        }
        Ok(rounded as i32)
    }
}

/// Plaquette curvature field computed from gauge-invariant link products.
pub fn berry_curvature(
    schedule: &PumpSchedule,
    p: &RiceMeleParams,
    band: Band,
    n_k: usize,
    n_t: usize,
) -> Result<CurvatureGrid> {
    let provider = |k: f64, t: f64| bloch_at(schedule, p, k, t).eigenvector(band);
    berry_curvature_with(schedule, p, band, n_k, n_t, provider)
}

/// Same as [`berry_curvature`] but with an injectable eigenvector
/// provider; the gauge-invariance test feeds randomly re-phased vectors.
pub(crate) fn berry_curvature_with<F>(
    schedule: &PumpSchedule,
    p: &RiceMeleParams,
    band: Band,
    n_k: usize,
    n_t: usize,
    provider: F,
) -> Result<CurvatureGrid>
where
    F: Fn(f64, f64) -> [Complex64; 2],
{
    check_grid(n_k, n_t)?;
    let period = schedule.period();
    let gap_tol = GAP_TOL_FACTOR * p.j1;

    let kv: Vec<f64> = (0..n_k).map(|i| TWO_PI * i as f64 / n_k as f64).collect();
    let tv: Vec<f64> = (0..n_t).map(|j| period * j as f64 / n_t as f64).collect();

    // Gap check on all grid vertices first.
    for &t in &tv {
        for &k in &kv {
            let gap = 2.0 * bloch_at(schedule, p, k, t).norm();
            if gap < gap_tol {
                return Err(Error::GapClosed { k, t, gap });
            }
        }
    }

    let u: Vec<[Complex64; 2]> = tv
        .iter()
        .flat_map(|&t| kv.iter().map(move |&k| (k, t)))
        .map(|(k, t)| provider(k, t))
        .collect();
    let idx = |ik: usize, it: usize| (it % n_t) * n_k + (ik % n_k);
    let overlap = |a: &[Complex64; 2], b: &[Complex64; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];

    let mut values = Vec::with_capacity(n_k * n_t);
    for it in 0..n_t {
        for ik in 0..n_k {
            let u00 = &u[idx(ik, it)];
            let u10 = &u[idx(ik + 1, it)];
            let u11 = &u[idx(ik + 1, it + 1)];
            let u01 = &u[idx(ik, it + 1)];
            let prod =
                overlap(u00, u10) * overlap(u10, u11) * overlap(u11, u01) * overlap(u01, u00);
            if prod.norm() < 1e-24 {
                return Err(Error::GapClosed {
                    k: kv[ik],
                    t: tv[it],
                    gap: 0.0,
                });
            }
            // The (k,t)-ordered plaquette argument is (∂_k A_t - ∂_t A_k)
            // dk dt; Ω_kt is its negative, oriented so that the Chern
            // number equals the cell displacement per cycle.
            values.push(-prod.arg());
        }
    }
    Ok(CurvatureGrid {
        n_k,
        n_t,
        band,
        values,
    })
}

/// Chern number of `band` on the closed pump loop.
pub fn chern_number(
    schedule: &PumpSchedule,
    p: &RiceMeleParams,
    band: Band,
    n_k: usize,
    n_t: usize,
) -> Result<i32> {
    berry_curvature(schedule, p, band, n_k, n_t)?.chern()
}

/// Winding number of the map (k, t) → ±h/|h| onto the Bloch sphere
/// (+ for the upper band, - for the lower band), computed as the summed
/// signed solid angle of grid triangles. Equals the Chern number.
pub fn winding_number(
    schedule: &PumpSchedule,
    p: &RiceMeleParams,
    band: Band,
    n_k: usize,
    n_t: usize,
) -> Result<i32> {
    check_grid(n_k, n_t)?;
    let period = schedule.period();
    let gap_tol = GAP_TOL_FACTOR * p.j1;
    let sign = band.sign();

    let mut nodes: Vec<[f64; 3]> = Vec::with_capacity(n_k * n_t);
    for it in 0..n_t {
        let t = period * it as f64 / n_t as f64;
        for ik in 0..n_k {
            let k = TWO_PI * ik as f64 / n_k as f64;
            let h = bloch_at(schedule, p, k, t);
            if 2.0 * h.norm() < gap_tol {
                return Err(Error::GapClosed {
                    k,
                    t,
                    gap: 2.0 * h.norm(),
                });
            }
            let u = h.unit();
            nodes.push([sign * u[0], sign * u[1], sign * u[2]]);
        }
    }

    let idx = |ik: usize, it: usize| (it % n_t) * n_k + (ik % n_k);
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let triple = |a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]| {
        a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0])
    };
    // Van Oosterom-Strackee signed solid angle of a spherical triangle.
    let solid_angle = |a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]| {
        2.0 * triple(a, b, c).atan2(1.0 + dot(a, b) + dot(b, c) + dot(c, a))
    };

    let mut total = 0.0;
    for it in 0..n_t {
        for ik in 0..n_k {
            let v00 = &nodes[idx(ik, it)];
            let v10 = &nodes[idx(ik + 1, it)];
            let v11 = &nodes[idx(ik + 1, it + 1)];
            let v01 = &nodes[idx(ik, it + 1)];
            total += solid_angle(v00, v10, v11) + solid_angle(v00, v11, v01);
        }
    }
    // Triangles are (k, t)-oriented like the plaquettes; same flip.
    let deg = -total / (4.0 * PI);
    let rounded = deg.round();
    if (deg - rounded).abs() > 1e-6 {
        return Err(Error::StepFailure(format!(
            "solid-angle sum {deg} is not an integer; grid too coarse"
        )));
    }
    Ok(rounded as i32)
}

/// Fix the gauge of a Bloch eigenvector: the largest-magnitude component
/// is made real and positive.
pub(crate) fn fix_gauge(mut u: [Complex64; 2]) -> [Complex64; 2] {
    let pick = if u[0].norm_sqr() >= u[1].norm_sqr() { 0 } else { 1 };
    let phase = u[pick] / u[pick].norm();
    u[0] /= phase;
    u[1] /= phase;
    u
}

/// Berry phase γ_n(k, t) = i ∫₀ᵗ ⟨u|∂_t' u⟩ dt' accumulated along the
/// schedule at fixed momentum, in the fixed gauge of [`fix_gauge`] with
/// parallel-transport increments between time steps.
pub fn berry_phase(
    k: f64,
    schedule: &PumpSchedule,
    p: &RiceMeleParams,
    band: Band,
    t: f64,
    n_steps: usize,
) -> Result<f64> {
    if t < 0.0 || t > schedule.duration() + 1e-12 {
        return Err(Error::InvalidParams(format!(
            "t = {t} outside the schedule span [0, {}]",
            schedule.duration()
        )));
    }
    if t == 0.0 || n_steps == 0 {
        return Ok(0.0);
    }
    let gap_tol = GAP_TOL_FACTOR * p.j1;
    let mut gamma = 0.0;
    let mut prev = {
        let h = bloch_at(schedule, p, k, 0.0);
        if 2.0 * h.norm() < gap_tol {
            return Err(Error::GapClosed {
                k,
                t: 0.0,
                gap: 2.0 * h.norm(),
            });
        }
        fix_gauge(h.eigenvector(band))
    };
    for i in 1..=n_steps {
        let ti = t * i as f64 / n_steps as f64;
        let h = bloch_at(schedule, p, k, ti);
        if 2.0 * h.norm() < gap_tol {
            return Err(Error::GapClosed {
                k,
                t: ti,
                gap: 2.0 * h.norm(),
            });
        }
        let cur = fix_gauge(h.eigenvector(band));
        let ov = prev[0].conj() * cur[0] + prev[1].conj() * cur[1];
        gamma -= ov.arg();
        prev = cur;
    }
    Ok(gamma)
}

/// Flat-band expansion of the upper band for β₀ ∈ {0, π} (|Δ| = 4J₀):
/// E₊ ≈ 2J₀ + J₁²/J₀ + (J₁²/2J₀)[cos k - cos(k + 2β₁)].
/// The lower band is its negative. The next correction is fourth order
/// in J₁/J₀, and the band is exactly flat for β₁ = 0 or π.
pub fn flat_band_approx(k: f64, beta1: f64, p: &RiceMeleParams) -> f64 {
    2.0 * p.j0
        + p.j1 * p.j1 / p.j0
        + p.j1 * p.j1 / (2.0 * p.j0) * (k.cos() - (k + 2.0 * beta1).cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{circular_pump_loop, default_pump_loop, Orientation};
    use rand::prelude::*;

    fn params(j0: f64, j1: f64) -> RiceMeleParams {
        RiceMeleParams::new(j0, j1).unwrap()
    }

    fn default_loop() -> PumpSchedule {
        default_pump_loop(21.0, Orientation::Clockwise).unwrap()
    }

    #[test]
    fn bands_flat_at_start() {
        let p = params(5.0, 1.0);
        let grid = band_energies(&default_loop(), &p, 32, 32).unwrap();
        let e = (4.0 * p.j0 * p.j0 + 4.0 * p.j1 * p.j1).sqrt();
        for ik in 0..32 {
            assert!((grid.energy(Band::Upper, ik, 0) - e).abs() < 1e-12);
            assert!((grid.energy(Band::Lower, ik, 0) + e).abs() < 1e-12);
        }
    }

    #[test]
    fn min_gap_on_default_loop_is_4j1() {
        let p = params(5.0, 1.0);
        // n_t multiple of 8 puts β₀ = π/2 (t = 3T/8) on the grid.
        let grid = band_energies(&default_loop(), &p, 64, 64).unwrap();
        assert!(
            (grid.min_gap - 4.0 * p.j1).abs() < 1e-6,
            "min gap {}",
            grid.min_gap
        );
        // Attained while β₁ is parked at 0 or π (segments 2 and 4).
        let (_, it) = grid.min_gap_at;
        let t = grid.t_value(21.0, it);
        let (b0, b1) = default_loop().beta_at(t);
        assert!((b0.rem_euclid(PI) - PI / 2.0).abs() < 1e-9);
        let b1m = b1.rem_euclid(PI);
        assert!(b1m < 1e-9 || (PI - b1m) < 1e-9);
    }

    #[test]
    fn gap_vanishes_on_a_loop_through_the_critical_point() {
        let p = params(5.0, 1.0);
        // This circle passes exactly through (π/2, π/2).
        let sched = circular_pump_loop(
            (PI / 2.0 + 0.25, PI / 2.0),
            0.25,
            1.0,
            64,
            Orientation::Clockwise,
        )
        .unwrap();
        let grid = band_energies(&sched, &p, 64, 256).unwrap();
        assert!(grid.min_gap < 0.05 * p.j1, "min gap {}", grid.min_gap);
    }

    #[test]
    fn chern_numbers_of_default_loop() {
        let p = params(5.0, 1.0);
        let sched = default_loop();
        for n in [32usize, 64] {
            assert_eq!(chern_number(&sched, &p, Band::Lower, n, n).unwrap(), 1);
            assert_eq!(chern_number(&sched, &p, Band::Upper, n, n).unwrap(), -1);
        }
    }

    #[test]
    fn chern_grid_stability() {
        let p = params(5.0, 1.0);
        let sched = default_loop();
        let c32 = chern_number(&sched, &p, Band::Lower, 32, 32).unwrap();
        let c128 = chern_number(&sched, &p, Band::Lower, 128, 128).unwrap();
        assert_eq!(c32, c128);
    }

    #[test]
    fn non_enclosing_loop_is_trivial() {
        let p = params(5.0, 1.0);
        let sched = circular_pump_loop((1.0, 0.4), 0.25, 1.0, 32, Orientation::Clockwise).unwrap();
        assert_eq!(chern_number(&sched, &p, Band::Lower, 32, 32).unwrap(), 0);
        assert_eq!(chern_number(&sched, &p, Band::Upper, 32, 32).unwrap(), 0);
    }

    #[test]
    fn counterclockwise_flips_the_sign() {
        let p = params(5.0, 1.0);
        let sched = default_pump_loop(21.0, Orientation::Counterclockwise).unwrap();
        assert_eq!(chern_number(&sched, &p, Band::Lower, 32, 32).unwrap(), -1);
    }

    #[test]
    fn band_chern_numbers_sum_to_zero() {
        let p = params(2.0, 1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let c = (rng.gen_range(0.0..TWO_PI), rng.gen_range(0.0..TWO_PI));
            let r = rng.gen_range(0.15..0.8);
            let sched = circular_pump_loop(c, r, 1.0, 48, Orientation::Clockwise).unwrap();
            match (
                chern_number(&sched, &p, Band::Lower, 48, 48),
                chern_number(&sched, &p, Band::Upper, 48, 48),
            ) {
                (Ok(cl), Ok(cu)) => assert_eq!(cl + cu, 0),
                // Loop brushed a gap closing; not a counterexample.
                _ => continue,
            }
        }
    }

    #[test]
    fn invariance_under_loop_deformation() {
        let p = params(5.0, 1.0);
        let rect = default_loop();
        let circle =
            circular_pump_loop((PI / 2.0, PI / 2.0), 1.0, 1.0, 64, Orientation::Clockwise).unwrap();
        let c_rect = chern_number(&rect, &p, Band::Lower, 64, 64).unwrap();
        let c_circ = chern_number(&circle, &p, Band::Lower, 64, 64).unwrap();
        assert_eq!(c_rect, c_circ);
    }

    #[test]
    fn gap_closed_error_on_critical_loop() {
        let p = params(5.0, 1.0);
        // Loop passing exactly through the critical point.
        let sched = circular_pump_loop(
            (PI / 2.0 + 0.3, PI / 2.0),
            0.3,
            1.0,
            64,
            Orientation::Clockwise,
        )
        .unwrap();
        let r = chern_number(&sched, &p, Band::Lower, 64, 64);
        assert!(matches!(r, Err(Error::GapClosed { .. })));
    }

    #[test]
    fn curvature_is_gauge_invariant() {
        let p = params(3.0, 1.0);
        let sched = default_loop();
        let base = berry_curvature(&sched, &p, Band::Lower, 24, 24).unwrap();
        // Deterministic pseudo-random re-phasing of every eigenvector.
        let provider = |k: f64, t: f64| {
            let u = bloch_at(&sched, &p, k, t).eigenvector(Band::Lower);
            let phi = (1000.0 * k).sin() * 2.9 + (777.0 * t).cos() * 1.3;
            let ph = (crate::model::I * phi).exp();
            [u[0] * ph, u[1] * ph]
        };
        let twisted = berry_curvature_with(&sched, &p, Band::Lower, 24, 24, provider).unwrap();
        for (a, b) in base.values.iter().zip(twisted.values.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn winding_equals_chern_for_random_loops() {
        let p = params(2.0, 1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let mut checked = 0;
        while checked < 20 {
            let c = (rng.gen_range(0.0..TWO_PI), rng.gen_range(0.0..TWO_PI));
            let r = rng.gen_range(0.1..1.2);
            let band = if rng.gen::<bool>() {
                Band::Lower
            } else {
                Band::Upper
            };
            let sched = circular_pump_loop(c, r, 1.0, 48, Orientation::Clockwise).unwrap();
            let ch = match chern_number(&sched, &p, band, 48, 48) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let w = winding_number(&sched, &p, band, 48, 48).unwrap();
            assert_eq!(ch, w, "center {c:?} radius {r} band {band:?}");
            checked += 1;
        }
    }

    #[test]
    fn winding_of_default_loop() {
        let p = params(5.0, 1.0);
        assert_eq!(
            winding_number(&default_loop(), &p, Band::Lower, 64, 64).unwrap(),
            1
        );
        assert_eq!(
            winding_number(&default_loop(), &p, Band::Upper, 64, 64).unwrap(),
            -1
        );
    }

    #[test]
    fn degenerate_loop_has_zero_winding() {
        let p = params(5.0, 1.0);
        // Point-like loop: β frozen at the start corner.
        let sched = PumpSchedule::new(
            vec![crate::model::Segment {
                duration: 1.0,
                beta0: (0.0, 0.0),
                beta1: (0.0, 0.0),
            }],
            1.0,
            2,
            Orientation::Clockwise,
        )
        .unwrap();
        assert_eq!(winding_number(&sched, &p, Band::Lower, 32, 32).unwrap(), 0);
        assert_eq!(chern_number(&sched, &p, Band::Lower, 32, 32).unwrap(), 0);
    }

    #[test]
    fn berry_phase_vanishes_at_t_zero() {
        let p = params(5.0, 1.0);
        let g = berry_phase(0.3, &default_loop(), &p, Band::Lower, 0.0, 100).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn berry_phase_winding_over_k_reproduces_chern() {
        // The closed-cycle Berry phase γ(k, T), followed around the
        // Brillouin zone, winds by 2π × C.
        let p = params(5.0, 1.0);
        let sched = default_loop();
        let t = sched.period();
        let n_k = 64;
        let mut phases = Vec::with_capacity(n_k + 1);
        for i in 0..=n_k {
            let k = TWO_PI * i as f64 / n_k as f64;
            phases.push(berry_phase(k, &sched, &p, Band::Lower, t, 2048).unwrap());
        }
        let mut winding = 0.0;
        for w in phases.windows(2) {
            let mut d = w[1] - w[0];
            while d > PI {
                d -= TWO_PI;
            }
            while d < -PI {
                d += TWO_PI;
            }
            winding += d;
        }
        let c = chern_number(&sched, &p, Band::Lower, 64, 64).unwrap();
        // γ decreases by 2π per unit of polarization gain; see the
        // orientation note in the module docs.
        assert!(
            (winding / TWO_PI + c as f64).abs() < 1e-3,
            "winding {winding}, chern {c}"
        );
    }

    #[test]
    fn curvature_equals_mixed_connection_derivatives() {
        // Finite-difference consistency at a generic (k, t) point:
        // Ω_kt = ∂_t A_k - ∂_k A_t with A in the fixed gauge.
        let p = params(2.0, 1.0);
        let sched = default_loop();
        let (k0, t0) = (1.1, 0.31 * sched.period());
        let eps_k = 1e-4;
        let eps_t = 1e-4 * sched.period();

        let u_at = |k: f64, t: f64| fix_gauge(bloch_at(&sched, &p, k, t).eigenvector(Band::Lower));
        let a_k = |k: f64, t: f64| {
            let a = u_at(k, t);
            let b = u_at(k + eps_k, t);
            -(a[0].conj() * b[0] + a[1].conj() * b[1]).arg() / eps_k
        };
        let a_t = |k: f64, t: f64| {
            let a = u_at(k, t);
            let b = u_at(k, t + eps_t);
            -(a[0].conj() * b[0] + a[1].conj() * b[1]).arg() / eps_t
        };
        // Plaquette value whose cell is centered on the FD point.
        let n = 256;
        let grid = berry_curvature(&sched, &p, Band::Lower, n, n).unwrap();
        let ik = (k0 / TWO_PI * n as f64).round() as usize;
        let it = (t0 / sched.period() * n as f64).round() as usize;
        let area = (TWO_PI / n as f64) * (sched.period() / n as f64);
        let omega_plaq = grid.values[it * n + ik] / area;
        let (kc, tc) = (
            TWO_PI * (ik as f64 + 0.5) / n as f64,
            sched.period() * (it as f64 + 0.5) / n as f64,
        );
        let omega_fd = (a_k(kc, tc + eps_t) - a_k(kc, tc - eps_t)) / (2.0 * eps_t)
            - (a_t(kc + eps_k, tc) - a_t(kc - eps_k, tc)) / (2.0 * eps_k);

        assert!(
            (omega_fd - omega_plaq).abs() < 2e-3 * omega_plaq.abs().max(1e-3),
            "fd {omega_fd} vs plaquette {omega_plaq}"
        );
    }

    #[test]
    fn flat_band_approx_is_constant_at_beta1_zero() {
        let p = params(5.0, 1.0);
        let e0 = flat_band_approx(0.0, 0.0, &p);
        assert!((e0 - (2.0 * p.j0 + p.j1 * p.j1 / p.j0)).abs() < 1e-14);
        for i in 0..40 {
            let k = TWO_PI * i as f64 / 40.0;
            assert!((flat_band_approx(k, 0.0, &p) - e0).abs() < 1e-12);
            assert!((flat_band_approx(k, PI, &p) - e0).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_band_approx_bandwidth_at_half_pi() {
        let p = params(5.0, 1.0);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..400 {
            let k = TWO_PI * i as f64 / 400.0;
            let e = flat_band_approx(k, PI / 2.0, &p);
            lo = lo.min(e);
            hi = hi.max(e);
        }
        let bandwidth = hi - lo;
        // Peak-to-peak of (J₁²/2J₀)·2 sin β₁ sin(k + β₁) at β₁ = π/2,
        // matching the exact bandwidth √(4J₀²+8J₁²) - 2J₀ to O(J₁⁴).
        assert!((bandwidth - 2.0 * p.j1 * p.j1 / p.j0).abs() < 1e-6 * p.j1);
        let exact_bw = (4.0 * p.j0 * p.j0 + 8.0 * p.j1 * p.j1).sqrt() - 2.0 * p.j0;
        assert!((bandwidth - exact_bw).abs() < 0.02 * exact_bw);
    }

    #[test]
    fn flat_band_error_shrinks_sixteenfold() {
        let exact = |k: f64, beta1: f64, p: &RiceMeleParams| {
            bloch_hamiltonian(k, 0.0, beta1, p).band_energy(Band::Upper)
        };
        let max_err = |ratio_inv: f64| {
            let p = params(1.0, ratio_inv);
            (0..800)
                .map(|i| {
                    let k = TWO_PI * i as f64 / 800.0;
                    (exact(k, PI / 2.0, &p) - flat_band_approx(k, PI / 2.0, &p)).abs()
                })
                .fold(0.0f64, f64::max)
        };
        let ratio = max_err(0.2) / max_err(0.1);
        assert!(
            (14.0..=18.0).contains(&ratio),
            "error ratio {ratio}, expected ~16"
        );
    }
}
