//! Synthetic OAM-lattice model: parameters, pump loops, and Hamiltonians.
//!
//! The degenerate main cavity with three auxiliary cavities realizes the
//! tight-binding Hamiltonian
//!
//! ```text
//! H = -Σ_l Σ_s J_s e^{iφ_s} a†_{l+M_s} a_l + h.c.,   φ_s = l·α_s + β_s,
//! ```
//!
//! with SLM steps M₀ = 0 and M₁ = M₂ = M (M = 1 for the base device),
//! J₂ = J₁ and φ₂ = 0. For α₀ = α₁ = π this is a Rice-Mele double-well
//! lattice with staggered detuning Δ = -4J₀cos β₀ and alternating bond
//! amplitudes J± = J₁(1 ± e^{iβ₁}). Sweeping (β₀, β₁) around the critical
//! point (π/2, π/2) pumps a photon by one unit cell (two OAM quanta) per
//! cycle.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Complex unit i.
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Band label of the two-band lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Lower,
    Upper,
}

impl Band {
    /// +1 for the upper band, -1 for the lower band.
    pub fn sign(self) -> f64 {
        match self {
            Band::Lower => -1.0,
            Band::Upper => 1.0,
        }
    }
}

/// Static couplings and phase gradients of the synthetic lattice.
///
/// Energies are in units of `j1` by convention (set `j1 = 1.0`), though
/// nothing in the crate assumes it. `step` is the SLM step M₁ = M₂: the
/// hopping connects OAM sites `l` and `l + step`. The base device has
/// `step = 1` and α₀ = α₁ = π; stage `n` of a multistage switch uses
/// `step = N^n` with α = π/N^n, so that `mod(α·step, 2π) = π` and every
/// decoupled sub-chain is again a Rice-Mele lattice.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RiceMeleParams {
    /// On-site modulation strength (the s = 0 auxiliary cavity).
    pub j0: f64,
    /// Hopping strength (the s = 1, 2 auxiliary cavities, J₁ = J₂).
    pub j1: f64,
    /// Phase gradient of the on-site modulation, radians per OAM unit.
    pub alpha0: f64,
    /// Phase gradient of the hopping modulation, radians per OAM unit.
    pub alpha1: f64,
    /// SLM step M₁ = M₂ in OAM units.
    pub step: u32,
}

impl RiceMeleParams {
    /// Base device: step 1, α₀ = α₁ = π.
    pub fn new(j0: f64, j1: f64) -> Result<Self> {
        Self::with_alphas(j0, j1, PI, PI)
    }

    /// Generalized AAH phase gradients with step 1.
    pub fn with_alphas(j0: f64, j1: f64, alpha0: f64, alpha1: f64) -> Result<Self> {
        if !(j0 > 0.0) || !(j1 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tunneling rates must be positive (J0 = {j0}, J1 = {j1})"
            )));
        }
        Ok(Self {
            j0,
            j1,
            alpha0,
            alpha1,
            step: 1,
        })
    }

    /// Parameters of the `stage`-th cascade stage with digit base `base`:
    /// step N^n and α₀ = α₁ = π/N^n.
    pub fn for_stage(j0: f64, j1: f64, base: u32, stage: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidParams(format!("base must be >= 2, got {base}")));
        }
        let step = base
            .checked_pow(stage)
            .ok_or_else(|| Error::InvalidParams(format!("step {base}^{stage} overflows")))?;
        let alpha = PI / step as f64;
        let mut p = Self::with_alphas(j0, j1, alpha, alpha)?;
        p.step = step;
        Ok(p)
    }

    /// Ratio J₀/J₁ controlling Wannier localization and purity.
    pub fn ratio(&self) -> f64 {
        self.j0 / self.j1
    }
}

/// Instantaneous Rice-Mele couplings derived from the pump phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCouplings {
    /// Neighboring-site energy detuning Δ = -4J₀ cos β₀.
    pub delta: f64,
    /// Intra-cell bond J₊ = J₁(1 + e^{iβ₁}).
    pub j_plus: Complex64,
    /// Inter-cell bond J₋ = J₁(1 - e^{iβ₁}).
    pub j_minus: Complex64,
}

impl DerivedCouplings {
    /// Bond imbalance δJ = |J₊| - |J₋| = 2J₁(|cos(β₁/2)| - |sin(β₁/2)|).
    pub fn delta_j(&self) -> f64 {
        self.j_plus.norm() - self.j_minus.norm()
    }
}

/// Evaluate Δ, J₊ and J₋ at the pump phases (β₀, β₁).
pub fn derived_couplings(beta0: f64, beta1: f64, p: &RiceMeleParams) -> DerivedCouplings {
    let phase = (I * beta1).exp();
    DerivedCouplings {
        delta: -4.0 * p.j0 * beta0.cos(),
        j_plus: p.j1 * (c64(1.0) + phase),
        j_minus: p.j1 * (c64(1.0) - phase),
    }
}

/// The real vector h(k, t) of the two-band Bloch Hamiltonian
/// H_k = h·σ, with h_x + i h_y = -[J₊ + J₋* e^{-ik}] and h_z = Δ/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
}

impl BlochVector {
    /// |h|; half the band gap at this (k, t).
    pub fn norm(&self) -> f64 {
        (self.hx * self.hx + self.hy * self.hy + self.hz * self.hz).sqrt()
    }

    /// Band energy E_± = ±|h|.
    pub fn band_energy(&self, band: Band) -> f64 {
        band.sign() * self.norm()
    }

    /// Unit vector h/|h| on the Bloch sphere.
    pub fn unit(&self) -> [f64; 3] {
        let r = self.norm();
        [self.hx / r, self.hy / r, self.hz / r]
    }

    /// The 2x2 matrix h·σ in the (b₁, b₂) cell basis.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [c64(self.hz), Complex64::new(self.hx, -self.hy)],
            [Complex64::new(self.hx, self.hy), c64(-self.hz)],
        ]
    }

    /// Normalized eigenvector of h·σ for the requested band.
    ///
    /// Branch is chosen away from the vanishing component, so the result
    /// is well-conditioned everywhere off the degeneracy |h| = 0.
    pub fn eigenvector(&self, band: Band) -> [Complex64; 2] {
        let r = self.norm();
        let hxy = Complex64::new(self.hx, self.hy);
        let (a, b) = match band {
            // (hz - r, hx + i hy) is singular near h ~ +z; switch there.
            Band::Lower => {
                if self.hz <= 0.0 {
                    (c64(self.hz - r), hxy)
                } else {
                    (-hxy.conj(), c64(self.hz + r))
                }
            }
            Band::Upper => {
                if self.hz >= 0.0 {
                    (c64(self.hz + r), hxy)
                } else {
                    (-hxy.conj(), c64(self.hz - r))
                }
            }
        };
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        [a / n, b / n]
    }
}

/// Bloch Hamiltonian vector at momentum `k` and pump phases (β₀, β₁).
pub fn bloch_hamiltonian(k: f64, beta0: f64, beta1: f64, p: &RiceMeleParams) -> BlochVector {
    let dc = derived_couplings(beta0, beta1, p);
    let off = -(dc.j_plus + dc.j_minus.conj() * (-I * k).exp());
    BlochVector {
        hx: off.re,
        hy: off.im,
        hz: dc.delta / 2.0,
    }
}

/// Boundary condition of the truncated chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Truncation of the infinite OAM lattice to sites l ∈ [l_min, l_max].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LatticeConfig {
    pub l_min: i64,
    pub l_max: i64,
    pub boundary: Boundary,
}

impl LatticeConfig {
    pub fn new(l_min: i64, l_max: i64, boundary: Boundary) -> Result<Self> {
        if l_max < l_min {
            return Err(Error::InvalidParams(format!(
                "l_max ({l_max}) < l_min ({l_min})"
            )));
        }
        let cfg = Self {
            l_min,
            l_max,
            boundary,
        };
        if boundary == Boundary::Periodic && cfg.site_count() % 2 != 0 {
            return Err(Error::InvalidParams(
                "periodic chains need an even site count (whole unit cells)".into(),
            ));
        }
        Ok(cfg)
    }

    /// Default open chain of 42 sites centered on `l0`, aligned to whole
    /// unit cells (even `l_min`).
    pub fn centered(l0: i64) -> Self {
        let mut l_min = l0 - 20;
        if l_min.rem_euclid(2) != 0 {
            l_min -= 1;
        }
        Self {
            l_min,
            l_max: l_min + 41,
            boundary: Boundary::Open,
        }
    }

    /// Open chain covering [l_lo, l_hi] padded by `margin` sites on each side.
    pub fn spanning(l_lo: i64, l_hi: i64, margin: i64) -> Self {
        Self {
            l_min: l_lo.min(l_hi) - margin,
            l_max: l_lo.max(l_hi) + margin,
            boundary: Boundary::Open,
        }
    }

    pub fn site_count(&self) -> usize {
        (self.l_max - self.l_min + 1) as usize
    }

    /// OAM index of site `i` (array index -> physical l).
    pub fn site(&self, i: usize) -> i64 {
        self.l_min + i as i64
    }

    /// Array index of OAM site `l`, if inside the truncation.
    pub fn index_of(&self, l: i64) -> Option<usize> {
        (l >= self.l_min && l <= self.l_max).then(|| (l - self.l_min) as usize)
    }
}

/// Complex amplitude per OAM site; the photon wavefunction on the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    amplitudes: Vec<Complex64>,
    l_min: i64,
    time: f64,
}

impl LatticeState {
    /// Zero state on the chain at time 0.
    pub fn zero(cfg: &LatticeConfig) -> Self {
        Self {
            amplitudes: vec![Complex64::new(0.0, 0.0); cfg.site_count()],
            l_min: cfg.l_min,
            time: 0.0,
        }
    }

    /// Unit amplitude on a single OAM site.
    pub fn site_state(cfg: &LatticeConfig, l: i64) -> Result<Self> {
        let mut s = Self::zero(cfg);
        let i = cfg
            .index_of(l)
            .ok_or(Error::InvalidParams(format!("site {l} outside chain")))?;
        s.amplitudes[i] = c64(1.0);
        Ok(s)
    }

    pub fn from_amplitudes(cfg: &LatticeConfig, amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        if amplitudes.len() != cfg.site_count() {
            return Err(Error::InvalidParams(format!(
                "amplitude count {} != site count {}",
                amplitudes.len(),
                cfg.site_count()
            )));
        }
        Ok(Self {
            amplitudes,
            l_min: cfg.l_min,
            time,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn l_min(&self) -> i64 {
        self.l_min
    }

    /// OAM index of amplitude slot `i`.
    pub fn site(&self, i: usize) -> i64 {
        self.l_min + i as i64
    }

    /// Amplitude on OAM site `l` (zero outside the truncation).
    pub fn amplitude(&self, l: i64) -> Complex64 {
        let i = l - self.l_min;
        if i < 0 || i as usize >= self.amplitudes.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.amplitudes[i as usize]
        }
    }

    /// Occupation probability of OAM site `l`.
    pub fn population(&self, l: i64) -> f64 {
        self.amplitude(l).norm_sqr()
    }

    /// P_l for every site of the chain.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Squared norm Σ_l |a_l|².
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
    }

    /// Re-embed the amplitudes into a different truncation, dropping
    /// anything outside it. Returns the dropped probability.
    pub fn reembed(&self, cfg: &LatticeConfig) -> (Self, f64) {
        let mut out = Self::zero(cfg);
        out.time = self.time;
        let mut dropped = 0.0;
        for (i, &a) in self.amplitudes.iter().enumerate() {
            let l = self.site(i);
            match cfg.index_of(l) {
                Some(j) => out.amplitudes[j] = a,
                None => dropped += a.norm_sqr(),
            }
        }
        (out, dropped)
    }
}

/// Sparse description of the chain Hamiltonian at fixed pump phases:
/// real on-site energies plus two disjoint sets of bonds. Bonds within
/// one set share no site, so their exponentials factorize exactly; this
/// is what the split-step propagator in [`crate::dynamics`] exploits.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    /// On-site energies (real).
    pub diag: Vec<f64>,
    /// Bonds (row, col, amplitude) with even source-cell parity;
    /// H[row, col] = amplitude, H[col, row] = amplitude*.
    pub bonds_even: Vec<(usize, usize, Complex64)>,
    /// Bonds with odd source-cell parity.
    pub bonds_odd: Vec<(usize, usize, Complex64)>,
}

impl HamiltonianTerms {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Dense Hermitian matrix (row-major nalgebra).
    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            m[(i, i)] = c64(self.diag[i]);
        }
        for &(i, j, a) in self.bonds_even.iter().chain(self.bonds_odd.iter()) {
            m[(i, j)] += a;
            m[(j, i)] += a.conj();
        }
        m
    }

    /// y = H x.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (yi, (&xi, &d)) in y.iter_mut().zip(x.iter().zip(self.diag.iter())) {
            *yi = xi * d;
        }
        for &(i, j, a) in self.bonds_even.iter().chain(self.bonds_odd.iter()) {
            y[i] += a * x[j];
            y[j] += a.conj() * x[i];
        }
    }
}

/// Assemble the chain Hamiltonian at pump phases (β₀, β₁).
///
/// Matrix elements (with M = `p.step`):
/// `H(l,l) = -2 J₀ cos(l α₀ + β₀) + onsite_shift(l)` and
/// `H(l+M, l) = -J₁ (e^{i(l α₁ + β₁)} + 1)`; Hermitian by construction.
/// `onsite_shift`, when given, must have one entry per site.
pub fn hamiltonian_terms(
    cfg: &LatticeConfig,
    beta0: f64,
    beta1: f64,
    p: &RiceMeleParams,
    onsite_shift: Option<&[f64]>,
) -> Result<HamiltonianTerms> {
    let n = cfg.site_count();
    let m = p.step as usize;
    if let Some(shift) = onsite_shift {
        if shift.len() != n {
            return Err(Error::InvalidParams(format!(
                "onsite shift has {} entries for {} sites",
                shift.len(),
                n
            )));
        }
    }
    if cfg.boundary == Boundary::Periodic && n % (2 * m) != 0 {
        return Err(Error::InvalidParams(format!(
            "periodic chain length {n} is not a multiple of the cell size {}",
            2 * m
        )));
    }

    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let l = cfg.site(i) as f64;
        let mut e = -2.0 * p.j0 * (l * p.alpha0 + beta0).cos();
        if let Some(shift) = onsite_shift {
            e += shift[i];
        }
        diag.push(e);
    }

    let mut bonds_even = Vec::new();
    let mut bonds_odd = Vec::new();
    let bond_count = match cfg.boundary {
        Boundary::Open => n.saturating_sub(m),
        Boundary::Periodic => n,
    };
    for i in 0..bond_count {
        let j = (i + m) % n;
        let l = cfg.site(i);
        // Coefficient of a†_{l+M} a_l, i.e. H[l+M, l].
        let amp = -p.j1 * ((I * (l as f64 * p.alpha1 + beta1)).exp() + 1.0);
        // Cell parity of the source site; sets within one parity are
        // site-disjoint for any step M.
        if l.div_euclid(m as i64) % 2 == 0 {
            bonds_even.push((j, i, amp));
        } else {
            bonds_odd.push((j, i, amp));
        }
    }

    Ok(HamiltonianTerms {
        diag,
        bonds_even,
        bonds_odd,
    })
}

/// Dense chain Hamiltonian; see [`hamiltonian_terms`].
pub fn real_space_hamiltonian(
    cfg: &LatticeConfig,
    beta0: f64,
    beta1: f64,
    p: &RiceMeleParams,
    onsite_shift: Option<&[f64]>,
) -> Result<nalgebra::DMatrix<Complex64>> {
    Ok(hamiltonian_terms(cfg, beta0, beta1, p, onsite_shift)?.to_dense())
}

/// Traversal direction of the pump loop.
///
/// "Clockwise" labels the traversal for which the lower band carries
/// Chern number +1: a lower-band photon gains two OAM quanta per cycle,
/// an upper-band photon loses two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Clockwise,
    Counterclockwise,
}

/// One linear leg of the pump loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub duration: f64,
    /// (start, end) of β₀ on this leg.
    pub beta0: (f64, f64),
    /// (start, end) of β₁ on this leg.
    pub beta1: (f64, f64),
}

/// Piecewise-linear closed path β(t) = (β₀(t), β₁(t)) over one period,
/// repeated for a (half-)integer number of cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpSchedule {
    segments: Vec<Segment>,
    period: f64,
    half_cycles: u32,
    orientation: Orientation,
}

const TWO_PI: f64 = 2.0 * PI;

fn mod_2pi(x: f64) -> f64 {
    x.rem_euclid(TWO_PI)
}

impl PumpSchedule {
    /// Build a schedule from explicit segments. The segments must tile
    /// `[0, period]` exactly, join continuously, and close modulo 2π.
    pub fn new(
        segments: Vec<Segment>,
        period: f64,
        half_cycles: u32,
        orientation: Orientation,
    ) -> Result<Self> {
        if segments.is_empty() || !(period > 0.0) {
            return Err(Error::InvalidParams(
                "schedule needs at least one segment and a positive period".into(),
            ));
        }
        let total: f64 = segments.iter().map(|s| s.duration).sum();
        if (total - period).abs() > 1e-9 * period {
            return Err(Error::InvalidParams(format!(
                "segment durations sum to {total}, period is {period}"
            )));
        }
        for w in segments.windows(2) {
            if (w[0].beta0.1 - w[1].beta0.0).abs() > 1e-9
                || (w[0].beta1.1 - w[1].beta1.0).abs() > 1e-9
            {
                return Err(Error::InvalidParams("segments do not join continuously".into()));
            }
        }
        let first = segments.first().unwrap();
        let last = segments.last().unwrap();
        let d0 = mod_2pi(last.beta0.1 - first.beta0.0 + PI) - PI;
        let d1 = mod_2pi(last.beta1.1 - first.beta1.0 + PI) - PI;
        if d0.abs() > 1e-9 || d1.abs() > 1e-9 {
            return Err(Error::InvalidParams(
                "β-path is not closed modulo 2π over one period".into(),
            ));
        }
        Ok(Self {
            segments,
            period,
            half_cycles,
            orientation,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn half_cycles(&self) -> u32 {
        self.half_cycles
    }

    pub fn n_cycles(&self) -> f64 {
        self.half_cycles as f64 / 2.0
    }

    /// Total modulation time, `period * half_cycles / 2`.
    pub fn duration(&self) -> f64 {
        self.period * self.half_cycles as f64 / 2.0
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Same loop traversed for a different number of half cycles.
    pub fn with_half_cycles(mut self, half_cycles: u32) -> Self {
        self.half_cycles = half_cycles;
        self
    }

    /// Rigid offset of the whole path (used for phase disorder and for
    /// referencing a cascade stage to the photon's current OAM site).
    pub fn with_offset(mut self, dbeta0: f64, dbeta1: f64) -> Self {
        for s in &mut self.segments {
            s.beta0.0 += dbeta0;
            s.beta0.1 += dbeta0;
            s.beta1.0 += dbeta1;
            s.beta1.1 += dbeta1;
        }
        self
    }

    /// Time-reversed traversal of the same loop.
    pub fn reversed(mut self) -> Self {
        self.segments.reverse();
        for s in &mut self.segments {
            s.beta0 = (s.beta0.1, s.beta0.0);
            s.beta1 = (s.beta1.1, s.beta1.0);
        }
        self.orientation = match self.orientation {
            Orientation::Clockwise => Orientation::Counterclockwise,
            Orientation::Counterclockwise => Orientation::Clockwise,
        };
        self
    }

    /// β(t) for any t ≥ 0, extending the loop continuously over repeated
    /// periods (each full period adds the loop's net winding to β).
    pub fn beta_at(&self, t: f64) -> (f64, f64) {
        let cycles = (t / self.period).floor();
        let mut tau = t - cycles * self.period;
        // Guard against rounding placing tau just past the period.
        if tau >= self.period {
            tau -= self.period;
        }
        let first = self.segments.first().unwrap();
        let last = self.segments.last().unwrap();
        let wind0 = last.beta0.1 - first.beta0.0;
        let wind1 = last.beta1.1 - first.beta1.0;

        let mut b = (first.beta0.0, first.beta1.0);
        let mut remaining = tau;
        for s in &self.segments {
            if remaining <= s.duration {
                let f = if s.duration > 0.0 {
                    remaining / s.duration
                } else {
                    1.0
                };
                b = (
                    s.beta0.0 + f * (s.beta0.1 - s.beta0.0),
                    s.beta1.0 + f * (s.beta1.1 - s.beta1.0),
                );
                remaining = 0.0;
                break;
            }
            remaining -= s.duration;
            b = (s.beta0.1, s.beta1.1);
        }
        debug_assert!(remaining <= 1e-9 * self.period);
        (b.0 + cycles * wind0, b.1 + cycles * wind1)
    }

    /// Instantaneous couplings along the schedule.
    pub fn couplings_at(&self, t: f64, p: &RiceMeleParams) -> DerivedCouplings {
        let (b0, b1) = self.beta_at(t);
        derived_couplings(b0, b1, p)
    }
}

/// Fraction of a β₀ leg traversed after fraction `tau` of its duration.
///
/// Local-adiabatic profile: the traversal rate is proportional to
/// cos²(πs) + b², i.e. to the squared dimer detuning plus a floor, so
/// the avoided crossing at mid-leg (detuning zero, gap 4J₁) is swept at
/// a rate b² relative to linear while the deep-detuned wings catch up.
/// Closed form of the inverted rate integral.
fn crossing_eased(tau: f64, b: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    if tau >= 1.0 {
        return 1.0;
    }
    let g = (1.0 + b * b).sqrt();
    let s = ((g / b) * (PI * tau).tan()).atan() / PI;
    if tau <= 0.5 {
        s
    } else {
        s + 1.0
    }
}

/// Chords per eased β₀ leg in the piecewise-linear sampling.
const LEG_CHORDS: usize = 32;

/// Slow-region scale b of [`crossing_eased`], in units of the full
/// detuning range 4J₀. At b = 0.25 and T = 21/J₁ the Landau-Zener
/// exponent at the 4J₁ crossing is ~15, against ~2 for a linear sweep.
const CROSSING_SOFTNESS: f64 = 0.25;

/// Fraction of the period spent on each β₀ leg; the β₁ legs take the
/// remaining 2 × T/16. Short β₁ legs curb the k-dependent dynamical
/// phase (the bands are only non-flat while β₁ is between 0 and π),
/// which would otherwise diffuse the photon over neighboring cells.
const BETA0_LEG_FRACTION: f64 = 7.0 / 16.0;

/// The canonical rectangular pump loop through the corners
/// (β₀, β₁): (2π,2π) → (π,2π) → (π,π) → (0,π) → (0,0).
///
/// It starts dimerized (δJ = 2J₁, Δ = -4J₀), keeps β₀ frozen at 0 or π
/// while β₁ sweeps (so the bands are exactly flat during β₀ motion and
/// nearly flat throughout), and winds once around the gap-closing point
/// (π/2, π/2) with 𝒞₋ = +1. The β₀ legs last 7T/16 each and follow the
/// local-adiabatic profile of [`crossing_eased`], sampled as
/// piecewise-linear chords; the β₁ legs last T/16 each and are linear.
/// Corners sit at t = 7T/16, T/2, 15T/16 and T, so half-cycle sampling
/// times land on the dimerized configurations. The default number of
/// half cycles is 2 (one full cycle).
pub fn default_pump_loop(period: f64, orientation: Orientation) -> Result<PumpSchedule> {
    if !(period > 0.0) {
        return Err(Error::InvalidParams(format!(
            "period must be positive, got {period}"
        )));
    }
    let q0 = period * BETA0_LEG_FRACTION;
    let q1 = period * (0.5 - BETA0_LEG_FRACTION);
    let corners = [
        (TWO_PI, TWO_PI),
        (PI, TWO_PI),
        (PI, PI),
        (0.0, PI),
        (0.0, 0.0),
    ];
    let mut segments = Vec::new();
    for w in corners.windows(2) {
        let beta0_moves = (w[1].0 - w[0].0).abs() > 1e-12;
        if beta0_moves {
            let mut prev = (w[0].0, w[0].1);
            for c in 1..=LEG_CHORDS {
                let tau = c as f64 / LEG_CHORDS as f64;
                let s = crossing_eased(tau, CROSSING_SOFTNESS);
                let next = (
                    w[0].0 + s * (w[1].0 - w[0].0),
                    w[0].1 + s * (w[1].1 - w[0].1),
                );
                segments.push(Segment {
                    duration: q0 / LEG_CHORDS as f64,
                    beta0: (prev.0, next.0),
                    beta1: (prev.1, next.1),
                });
                prev = next;
            }
        } else {
            segments.push(Segment {
                duration: q1,
                beta0: (w[0].0, w[1].0),
                beta1: (w[0].1, w[1].1),
            });
        }
    }
    let schedule = PumpSchedule::new(segments, period, 2, Orientation::Clockwise)?;
    Ok(match orientation {
        Orientation::Clockwise => schedule,
        Orientation::Counterclockwise => schedule.reversed(),
    })
}

/// A smooth circular loop around `center` in the (β₀, β₁) plane,
/// approximated by `n_segments` chords. Used for topology-invariance
/// checks against the rectangular loop. `Clockwise` traverses the circle
/// the same way the default rectangle winds around the critical point.
pub fn circular_pump_loop(
    center: (f64, f64),
    radius: f64,
    period: f64,
    n_segments: usize,
    orientation: Orientation,
) -> Result<PumpSchedule> {
    if !(period > 0.0) || !(radius > 0.0) || n_segments < 3 {
        return Err(Error::InvalidParams(
            "circular loop needs positive period/radius and >= 3 segments".into(),
        ));
    }
    let q = period / n_segments as f64;
    let point = |i: usize| {
        let th = TWO_PI * i as f64 / n_segments as f64;
        (center.0 + radius * th.cos(), center.1 + radius * th.sin())
    };
    let segments: Vec<Segment> = (0..n_segments)
        .map(|i| {
            let a = point(i);
            let b = point(i + 1);
            Segment {
                duration: q,
                beta0: (a.0, b.0),
                beta1: (a.1, b.1),
            }
        })
        .collect();
    let schedule = PumpSchedule::new(segments, period, 2, Orientation::Clockwise)?;
    Ok(match orientation {
        Orientation::Clockwise => schedule,
        Orientation::Counterclockwise => schedule.reversed(),
    })
}
