//! Stationary fading laws.
//!
//! A scalar fading law is a zero-mean proper-complex-normal stationary
//! process, described interchangeably by its autocorrelation R(nu) and
//! its spectral density S(omega) on [-pi, pi], normalized so that
//! R(m) = (1/2pi) int S(w) e^{imw} dw. Three representations are
//! supported: closed-form parametric families, finite (truncated)
//! autocorrelation sequences, and spectral densities tabulated on a
//! uniform grid.
//!
//! Every law carries the spectral energy
//!
//!   lambda = sum_nu |R(nu)|^2 = (1/2pi) int S(w)^2 dw,
//!
//! which drives all the low-SNR asymptotics, and laws are classified as
//! *ephemeral* when lambda < 2 R(0)^2 (too little memory for the
//! long-memory capacity branch).
//!
//! Variances need not be one; R(0) is carried explicitly and the
//! downstream formulas use it.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::quad;

const PSD_NEGATIVITY_TOL: f64 = 1e-12;
const MAX_LAG_CAP: usize = 100_000;

/// Closed-form parametric families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParametricFamily {
    /// R(nu) = scale * [nu == 0]; flat spectrum.
    Memoryless,
    /// R(nu) = scale * a^|nu|; Poisson-kernel spectrum.
    GaussMarkov { a: f64 },
    /// S(w) = scale * pi/omega0 on |w| <= omega0, zero outside.
    BandlimitedFlat { omega0: f64 },
}

#[derive(Debug, Clone)]
enum Repr {
    Memoryless {
        scale: f64,
    },
    GaussMarkov {
        a: f64,
        scale: f64,
    },
    BandlimitedFlat {
        omega0: f64,
        scale: f64,
    },
    /// Lags 0..=L; negative lags come from Hermitian symmetry.
    Sequence {
        r: Vec<Complex64>,
    },
    /// Uniform grid over [-pi, pi], endpoints included.
    PsdTable {
        omega: Vec<f64>,
        s: Vec<f64>,
        r0: f64,
    },
}

/// One stationary scalar fading law.
#[derive(Debug, Clone)]
pub struct ScalarFadingSpec {
    repr: Repr,
}

impl ScalarFadingSpec {
    /// Build a law from a closed-form family with variance `scale`.
    pub fn parametric(family: ParametricFamily, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "scale must be finite and >= 0, got {scale}"
            )));
        }
        let repr = match family {
            ParametricFamily::Memoryless => Repr::Memoryless { scale },
            ParametricFamily::GaussMarkov { a } => {
                if !(a.is_finite() && (0.0..1.0).contains(&a)) {
                    return Err(Error::InvalidSpec(format!(
                        "gauss_markov coefficient must lie in [0, 1), got {a}"
                    )));
                }
                Repr::GaussMarkov { a, scale }
            }
            ParametricFamily::BandlimitedFlat { omega0 } => {
                if !(omega0.is_finite() && omega0 > 0.0 && omega0 <= PI) {
                    return Err(Error::InvalidSpec(format!(
                        "bandlimited_flat edge must lie in (0, pi], got {omega0}"
                    )));
                }
                Repr::BandlimitedFlat { omega0, scale }
            }
        };
        Ok(ScalarFadingSpec { repr })
    }

    /// Convenience: unit-variance Gauss-Markov law.
    pub fn gauss_markov(a: f64) -> Result<Self> {
        Self::parametric(ParametricFamily::GaussMarkov { a }, 1.0)
    }

    /// Convenience: unit-variance memoryless law.
    pub fn memoryless() -> Self {
        ScalarFadingSpec {
            repr: Repr::Memoryless { scale: 1.0 },
        }
    }

    /// Build a law from the lags R(0), R(1), ..., R(L).
    ///
    /// R(0) must be real nonnegative, and the derived trigonometric-sum
    /// spectrum must be nonnegative: values below -1e-12 reject the
    /// sequence, values in [-1e-12, 0] are clamped to zero at
    /// evaluation.
    pub fn from_sequence(r: Vec<Complex64>) -> Result<Self> {
        if r.is_empty() {
            return Err(Error::InvalidSpec("empty autocorrelation sequence".into()));
        }
        if r[0].im.abs() > 1e-14 || r[0].re < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "R(0) must be real and >= 0, got {}",
                r[0]
            )));
        }
        let spec = ScalarFadingSpec {
            repr: Repr::Sequence { r },
        };
        // dense nonnegativity scan of the finite trigonometric sum
        let l = spec.sequence_len();
        let grid = (16 * l).max(512);
        for j in 0..=grid {
            let w = -PI + 2.0 * PI * j as f64 / grid as f64;
            let s = spec.psd_raw(w);
            if s < -PSD_NEGATIVITY_TOL {
                return Err(Error::InvalidSpec(format!(
                    "autocorrelation sequence is not a valid PSD: S({w:.6}) = {s:.3e}"
                )));
            }
        }
        Ok(spec)
    }

    /// Build a law from a spectral density tabulated on a uniform grid
    /// spanning [-pi, pi] (both endpoints present).
    pub fn from_psd_table(omega: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if omega.len() != s.len() || omega.len() < 3 {
            return Err(Error::InvalidSpec(
                "psd table needs matching omega/s arrays with at least 3 points".into(),
            ));
        }
        let n = omega.len();
        if (omega[0] + PI).abs() > 1e-9 || (omega[n - 1] - PI).abs() > 1e-9 {
            return Err(Error::InvalidSpec(
                "psd table grid must span [-pi, pi]".into(),
            ));
        }
        let h = 2.0 * PI / (n - 1) as f64;
        for (j, w) in omega.iter().enumerate() {
            if (w - (-PI + h * j as f64)).abs() > 1e-9 {
                return Err(Error::InvalidSpec("psd table grid must be uniform".into()));
            }
        }
        let mut cleaned = Vec::with_capacity(n);
        for &v in &s {
            if !v.is_finite() || v < -PSD_NEGATIVITY_TOL {
                return Err(Error::InvalidSpec(format!(
                    "psd table value {v:.3e} is negative"
                )));
            }
            cleaned.push(v.max(0.0));
        }
        let r0 = trapezoid_period(&cleaned, h) / (2.0 * PI);
        Ok(ScalarFadingSpec {
            repr: Repr::PsdTable {
                omega,
                s: cleaned,
                r0,
            },
        })
    }

    /// Fading variance R(0).
    pub fn r0(&self) -> f64 {
        match &self.repr {
            Repr::Memoryless { scale }
            | Repr::GaussMarkov { scale, .. }
            | Repr::BandlimitedFlat { scale, .. } => *scale,
            Repr::Sequence { r } => r[0].re,
            Repr::PsdTable { r0, .. } => *r0,
        }
    }

    fn sequence_len(&self) -> usize {
        match &self.repr {
            Repr::Sequence { r } => r.len() - 1,
            _ => 0,
        }
    }

    /// Autocorrelation at integer lag `nu` (Hermitian in `nu`).
    ///
    /// Tabulated-spectrum laws evaluate the Fourier integral with the
    /// periodic trapezoid rule on their own grid; accuracy degrades for
    /// lags near the grid's resolution limit (`to_autocorr_sequence`
    /// enforces that limit, this accessor does not).
    pub fn autocorr(&self, nu: i64) -> Complex64 {
        let n = nu.unsigned_abs();
        let v = match &self.repr {
            Repr::Memoryless { scale } => {
                Complex64::new(if n == 0 { *scale } else { 0.0 }, 0.0)
            }
            Repr::GaussMarkov { a, scale } => Complex64::new(scale * a.powi(n as i32), 0.0),
            Repr::BandlimitedFlat { omega0, scale } => {
                if n == 0 {
                    Complex64::new(*scale, 0.0)
                } else {
                    let x = omega0 * n as f64;
                    Complex64::new(scale * x.sin() / x, 0.0)
                }
            }
            Repr::Sequence { r } => {
                if (n as usize) < r.len() {
                    r[n as usize]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Repr::PsdTable { s, .. } => {
                let h = 2.0 * PI / (s.len() - 1) as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &sv) in s.iter().enumerate() {
                    let w = -PI + h * j as f64;
                    let weight = if j == 0 || j == s.len() - 1 { 0.5 } else { 1.0 };
                    acc += Complex64::new(0.0, n as f64 * w).exp() * (sv * weight);
                }
                acc * (h / (2.0 * PI))
            }
        };
        if nu < 0 {
            v.conj()
        } else {
            v
        }
    }

    fn psd_raw(&self, w: f64) -> f64 {
        match &self.repr {
            Repr::Memoryless { scale } => *scale,
            Repr::GaussMarkov { a, scale } => {
                scale * (1.0 - a * a) / (1.0 - 2.0 * a * w.cos() + a * a)
            }
            Repr::BandlimitedFlat { omega0, scale } => {
                if w.abs() <= *omega0 {
                    scale * PI / omega0
                } else {
                    0.0
                }
            }
            Repr::Sequence { r } => {
                let mut s = r[0].re;
                for (nu, rv) in r.iter().enumerate().skip(1) {
                    s += 2.0 * (rv * Complex64::new(0.0, -(nu as f64) * w).exp()).re;
                }
                s
            }
            Repr::PsdTable { omega, s, .. } => {
                // linear interpolation on the uniform grid
                let n = s.len();
                let h = 2.0 * PI / (n - 1) as f64;
                let w = w.clamp(-PI, PI);
                let t = (w - omega[0]) / h;
                let j = (t.floor() as usize).min(n - 2);
                let frac = t - j as f64;
                s[j] * (1.0 - frac) + s[j + 1] * frac
            }
        }
    }

    /// Spectral density S(omega), clamped to be nonnegative.
    pub fn psd(&self, w: f64) -> f64 {
        self.psd_raw(w).max(0.0)
    }

    /// Points in (-pi, pi) where S is not smooth; quadrature panels are
    /// aligned to these.
    pub fn psd_breakpoints(&self) -> Vec<f64> {
        match &self.repr {
            Repr::BandlimitedFlat { omega0, .. } => vec![-*omega0, *omega0],
            Repr::PsdTable { omega, .. } => omega[1..omega.len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }

    /// Spectral energy lambda = sum |R(nu)|^2, from the native
    /// representation (closed form where available, grid quadrature of
    /// S^2 for tabulated spectra).
    pub fn lambda(&self) -> f64 {
        match &self.repr {
            Repr::Memoryless { scale } => scale * scale,
            Repr::GaussMarkov { a, scale } => scale * scale * (1.0 + a * a) / (1.0 - a * a),
            Repr::BandlimitedFlat { omega0, scale } => scale * scale * PI / omega0,
            Repr::Sequence { r } => {
                r[0].norm_sqr() + 2.0 * r.iter().skip(1).map(|v| v.norm_sqr()).sum::<f64>()
            }
            Repr::PsdTable { s, .. } => {
                let h = 2.0 * PI / (s.len() - 1) as f64;
                let sq: Vec<f64> = s.iter().map(|v| v * v).collect();
                trapezoid_period(&sq, h) / (2.0 * PI)
            }
        }
    }

    /// lambda through the spectral route (1/2pi) int S^2 by adaptive
    /// quadrature, for cross-checks against `lambda`.
    pub fn lambda_spectral(&self) -> f64 {
        let bps = self.psd_breakpoints();
        quad::integrate_default(|w| self.psd(w) * self.psd(w), -PI, PI, &bps) / (2.0 * PI)
    }

    /// True iff lambda < 2 R(0)^2.
    pub fn is_ephemeral(&self) -> bool {
        self.lambda() < 2.0 * self.r0() * self.r0()
    }

    /// Same law with the variance multiplied by `c` (R -> c R).
    pub fn scaled_by(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "variance factor must be finite and >= 0, got {c}"
            )));
        }
        let repr = match &self.repr {
            Repr::Memoryless { scale } => Repr::Memoryless { scale: scale * c },
            Repr::GaussMarkov { a, scale } => Repr::GaussMarkov {
                a: *a,
                scale: scale * c,
            },
            Repr::BandlimitedFlat { omega0, scale } => Repr::BandlimitedFlat {
                omega0: *omega0,
                scale: scale * c,
            },
            Repr::Sequence { r } => Repr::Sequence {
                r: r.iter().map(|v| v * c).collect(),
            },
            Repr::PsdTable { omega, s, r0 } => Repr::PsdTable {
                omega: omega.clone(),
                s: s.iter().map(|v| v * c).collect(),
                r0: r0 * c,
            },
        };
        Ok(ScalarFadingSpec { repr })
    }

    /// Whether sum |R(nu)| is finite and computable from the
    /// representation. Bandlimited-flat decays like 1/nu (not
    /// absolutely summable) and tabulated spectra cannot be checked
    /// from data.
    pub fn absolutely_summable(&self) -> bool {
        matches!(
            self.repr,
            Repr::Memoryless { .. } | Repr::GaussMarkov { .. } | Repr::Sequence { .. }
        )
    }

    /// Q = sum_nu |R(nu)| for absolutely summable representations.
    pub fn autocorr_abs_sum(&self) -> Option<f64> {
        match &self.repr {
            Repr::Memoryless { scale } => Some(*scale),
            Repr::GaussMarkov { a, scale } => Some(scale * (1.0 + a) / (1.0 - a)),
            Repr::Sequence { r } => {
                Some(r[0].re + 2.0 * r.iter().skip(1).map(|v| v.norm()).sum::<f64>())
            }
            _ => None,
        }
    }

    /// Tabulate S on a uniform grid (default 4097 points); the inverse
    /// of `to_autocorr_sequence` up to quadrature tolerance.
    pub fn to_psd_table(&self, points: Option<usize>) -> Result<ScalarFadingSpec> {
        let n = points.unwrap_or(4097);
        if n < 3 {
            return Err(Error::InvalidSpec("psd table needs at least 3 points".into()));
        }
        let h = 2.0 * PI / (n - 1) as f64;
        let omega: Vec<f64> = (0..n).map(|j| -PI + h * j as f64).collect();
        let s: Vec<f64> = omega.iter().map(|&w| self.psd(w)).collect();
        ScalarFadingSpec::from_psd_table(omega, s)
    }

    /// Smallest lag M with |R(M)| < 1e-12 R(0), capped at 1e5.
    pub fn default_max_lag(&self) -> usize {
        let r0 = self.r0();
        if r0 == 0.0 {
            return 1;
        }
        let tol = 1e-12 * r0;
        match &self.repr {
            Repr::Memoryless { .. } => 1,
            Repr::GaussMarkov { a, scale } => {
                if *a == 0.0 {
                    1
                } else {
                    let m = ((tol / scale).ln() / a.ln()).ceil();
                    (m.max(1.0) as usize).min(MAX_LAG_CAP)
                }
            }
            Repr::BandlimitedFlat { omega0, scale } => {
                // |R(M)| <= scale / (omega0 M)
                let m = (scale / (omega0 * tol)).ceil();
                (m.max(1.0) as usize).min(MAX_LAG_CAP)
            }
            Repr::Sequence { r } => {
                let mut m = r.len();
                while m > 1 && r[m - 1].norm() < tol {
                    m -= 1;
                }
                m.min(MAX_LAG_CAP)
            }
            Repr::PsdTable { s, .. } => ((s.len() - 1) / 8).max(1).min(MAX_LAG_CAP),
        }
    }

    /// Truncated autocorrelation sequence R(0..=max_lag) through the
    /// spectral representation.
    ///
    /// For tabulated spectra the grid must resolve the requested lag
    /// (at least 8 samples per oscillation of e^{i nu w}), otherwise a
    /// resolution error is returned.
    pub fn to_autocorr_sequence(&self, max_lag: Option<usize>) -> Result<ScalarFadingSpec> {
        let m = max_lag.unwrap_or_else(|| self.default_max_lag());
        if let Repr::PsdTable { s, .. } = &self.repr {
            let limit = (s.len() - 1) / 8;
            if m > limit {
                return Err(Error::Resolution(format!(
                    "psd grid of {} points resolves lags up to {limit}, requested {m}",
                    s.len()
                )));
            }
        }
        let bps = self.psd_breakpoints();
        let mut r = Vec::with_capacity(m + 1);
        for nu in 0..=m {
            let v = match &self.repr {
                Repr::PsdTable { .. } => self.autocorr(nu as i64),
                _ => {
                    quad::integrate_default(
                        |w| self.psd(w) * Complex64::new(0.0, nu as f64 * w).exp(),
                        -PI,
                        PI,
                        &bps,
                    ) / (2.0 * PI)
                }
            };
            r.push(v);
        }
        // quadrature leaves a tiny imaginary part on R(0); drop it
        r[0] = Complex64::new(r[0].re, 0.0);
        ScalarFadingSpec::from_sequence(r)
    }
}

fn trapezoid_period(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (0.5 * (values[0] + values[n - 1]) + inner)
}

/// Transmit-separable factorization of a MIMO law:
/// R_{r,t}(k) = alpha_t * R_r(k).
#[derive(Debug, Clone)]
pub struct SeparableMimo {
    pub alpha: Vec<f64>,
    pub bases: Vec<ScalarFadingSpec>,
}

/// An nr x nt grid of mutually independent scalar fading laws.
#[derive(Debug, Clone)]
pub struct MimoFadingSpec {
    entries: Vec<Vec<ScalarFadingSpec>>,
    separable: Option<SeparableMimo>,
}

impl MimoFadingSpec {
    pub fn new(entries: Vec<Vec<ScalarFadingSpec>>) -> Result<Self> {
        if entries.is_empty() || entries[0].is_empty() {
            return Err(Error::InvalidSpec("empty MIMO grid".into()));
        }
        let nt = entries[0].len();
        if entries.iter().any(|row| row.len() != nt) {
            return Err(Error::InvalidSpec("ragged MIMO grid".into()));
        }
        Ok(MimoFadingSpec {
            entries,
            separable: None,
        })
    }

    /// Build a transmit-separable grid from per-antenna gains and
    /// per-receiver base laws.
    pub fn separable(alpha: Vec<f64>, bases: Vec<ScalarFadingSpec>) -> Result<Self> {
        validate_alpha(&alpha)?;
        if bases.is_empty() {
            return Err(Error::InvalidSpec("no base laws".into()));
        }
        let mut entries = Vec::with_capacity(bases.len());
        for base in &bases {
            let mut row = Vec::with_capacity(alpha.len());
            for &a in &alpha {
                row.push(base.scaled_by(a)?);
            }
            entries.push(row);
        }
        Ok(MimoFadingSpec {
            entries,
            separable: Some(SeparableMimo { alpha, bases }),
        })
    }

    /// Attach a separable factorization to a full grid; the factorization
    /// is validated against the entries on sampled lags.
    pub fn with_separability(entries: Vec<Vec<ScalarFadingSpec>>, alpha: Vec<f64>) -> Result<Self> {
        let grid = MimoFadingSpec::new(entries)?;
        validate_alpha(&alpha)?;
        if alpha.len() != grid.nt() {
            return Err(Error::InvalidSpec(format!(
                "alpha has {} entries for {} transmit antennas",
                alpha.len(),
                grid.nt()
            )));
        }
        let (t_star, a_star) = alpha
            .iter()
            .cloned()
            .enumerate()
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        let mut bases = Vec::with_capacity(grid.nr());
        for r in 0..grid.nr() {
            bases.push(grid.entries[r][t_star].scaled_by(1.0 / a_star)?);
        }
        for r in 0..grid.nr() {
            for t in 0..grid.nt() {
                for k in 0..=16i64 {
                    let lhs = grid.entries[r][t].autocorr(k);
                    let rhs = bases[r].autocorr(k) * alpha[t];
                    let tol = 1e-9 * (1.0 + grid.entries[r][t].r0());
                    if (lhs - rhs).norm() > tol {
                        return Err(Error::InvalidSpec(format!(
                            "separable factorization mismatch at (r={r}, t={t}, k={k}): {lhs} vs {rhs}"
                        )));
                    }
                }
            }
        }
        Ok(MimoFadingSpec {
            entries: grid.entries,
            separable: Some(SeparableMimo { alpha, bases }),
        })
    }

    pub fn nr(&self) -> usize {
        self.entries.len()
    }

    pub fn nt(&self) -> usize {
        self.entries[0].len()
    }

    pub fn entry(&self, r: usize, t: usize) -> &ScalarFadingSpec {
        &self.entries[r][t]
    }

    pub fn separability(&self) -> Option<&SeparableMimo> {
        self.separable.as_ref()
    }

    /// Same grid with every entry's variance multiplied by `c`.
    pub fn scaled_by(&self, c: f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(self.nr());
        for row in &self.entries {
            let mut new_row = Vec::with_capacity(row.len());
            for e in row {
                new_row.push(e.scaled_by(c)?);
            }
            entries.push(new_row);
        }
        let separable = match &self.separable {
            None => None,
            Some(sep) => Some(SeparableMimo {
                alpha: sep.alpha.iter().map(|a| a * c).collect(),
                bases: sep.bases.clone(),
            }),
        };
        Ok(MimoFadingSpec { entries, separable })
    }
}

fn validate_alpha(alpha: &[f64]) -> Result<()> {
    if alpha.is_empty() {
        return Err(Error::InvalidSpec("empty alpha vector".into()));
    }
    if alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
        return Err(Error::InvalidSpec("alpha entries must be >= 0".into()));
    }
    if alpha.iter().all(|a| *a == 0.0) {
        return Err(Error::InvalidSpec("alpha must have a positive entry".into()));
    }
    Ok(())
}

/// Delay-separable factorization of a delay-spread law:
/// R_t(k) = alpha_t * R(k).
#[derive(Debug, Clone)]
pub struct SeparableDelay {
    pub alpha: Vec<f64>,
    pub base: ScalarFadingSpec,
}

/// T independent tap fading laws of a frequency-selective channel.
#[derive(Debug, Clone)]
pub struct DelaySpreadSpec {
    taps: Vec<ScalarFadingSpec>,
    separable: Option<SeparableDelay>,
}

impl DelaySpreadSpec {
    pub fn new(taps: Vec<ScalarFadingSpec>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidSpec("no taps".into()));
        }
        Ok(DelaySpreadSpec {
            taps,
            separable: None,
        })
    }

    pub fn separable(alpha: Vec<f64>, base: ScalarFadingSpec) -> Result<Self> {
        validate_alpha(&alpha)?;
        let mut taps = Vec::with_capacity(alpha.len());
        for &a in &alpha {
            taps.push(base.scaled_by(a)?);
        }
        Ok(DelaySpreadSpec {
            taps,
            separable: Some(SeparableDelay { alpha, base }),
        })
    }

    /// Attach a separable factorization to explicit taps, validated on
    /// sampled lags.
    pub fn with_separability(taps: Vec<ScalarFadingSpec>, alpha: Vec<f64>) -> Result<Self> {
        let ds = DelaySpreadSpec::new(taps)?;
        validate_alpha(&alpha)?;
        if alpha.len() != ds.t() {
            return Err(Error::InvalidSpec(format!(
                "alpha has {} entries for {} taps",
                alpha.len(),
                ds.t()
            )));
        }
        let (t_star, a_star) = alpha
            .iter()
            .cloned()
            .enumerate()
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        let base = ds.taps[t_star].scaled_by(1.0 / a_star)?;
        for t in 0..ds.t() {
            for k in 0..=16i64 {
                let lhs = ds.taps[t].autocorr(k);
                let rhs = base.autocorr(k) * alpha[t];
                let tol = 1e-9 * (1.0 + ds.taps[t].r0());
                if (lhs - rhs).norm() > tol {
                    return Err(Error::InvalidSpec(format!(
                        "delay-separable factorization mismatch at (t={t}, k={k})"
                    )));
                }
            }
        }
        Ok(DelaySpreadSpec {
            taps: ds.taps,
            separable: Some(SeparableDelay { alpha, base }),
        })
    }

    pub fn t(&self) -> usize {
        self.taps.len()
    }

    pub fn tap(&self, t: usize) -> &ScalarFadingSpec {
        &self.taps[t]
    }

    pub fn separability(&self) -> Option<&SeparableDelay> {
        self.separable.as_ref()
    }
}

/// Peak SNR plus peak-to-average ratio.
#[derive(Debug, Clone, Copy)]
pub struct PowerBudget {
    pub rho: f64,
    pub beta: f64,
}

impl PowerBudget {
    pub fn new(rho: f64, beta: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::Domain(format!("rho must be > 0, got {rho}")));
        }
        validate_beta(beta)?;
        Ok(PowerBudget { rho, beta })
    }
}

pub fn validate_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta >= 1.0) {
        return Err(Error::Domain(format!("beta must be >= 1, got {beta}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// JSON loading
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ScalarJson {
    Memoryless {
        #[serde(default = "default_scale")]
        scale: f64,
    },
    GaussMarkov {
        a: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    BandlimitedFlat {
        omega0: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    Sequence {
        r: Vec<[f64; 2]>,
    },
    PsdTable {
        omega: Vec<f64>,
        s: Vec<f64>,
    },
}

fn default_scale() -> f64 {
    1.0
}

impl ScalarJson {
    fn build(self) -> Result<ScalarFadingSpec> {
        match self {
            ScalarJson::Memoryless { scale } => {
                ScalarFadingSpec::parametric(ParametricFamily::Memoryless, scale)
            }
            ScalarJson::GaussMarkov { a, scale } => {
                ScalarFadingSpec::parametric(ParametricFamily::GaussMarkov { a }, scale)
            }
            ScalarJson::BandlimitedFlat { omega0, scale } => {
                ScalarFadingSpec::parametric(ParametricFamily::BandlimitedFlat { omega0 }, scale)
            }
            ScalarJson::Sequence { r } => ScalarFadingSpec::from_sequence(
                r.into_iter().map(|p| Complex64::new(p[0], p[1])).collect(),
            ),
            ScalarJson::PsdTable { omega, s } => ScalarFadingSpec::from_psd_table(omega, s),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ChannelJson {
    Mimo {
        entries: Vec<Vec<ScalarJson>>,
        alpha: Option<Vec<f64>>,
    },
    Delay {
        taps: Vec<ScalarJson>,
        alpha: Option<Vec<f64>>,
    },
    Scalar(ScalarJson),
}

/// Any channel the tools operate on.
#[derive(Debug, Clone)]
pub enum ChannelSpec {
    Scalar(ScalarFadingSpec),
    Mimo(MimoFadingSpec),
    Delay(DelaySpreadSpec),
}

/// Parse a channel description from its JSON document.
pub fn channel_from_json_str(text: &str) -> Result<ChannelSpec> {
    let parsed: ChannelJson = serde_json::from_str(text)?;
    match parsed {
        ChannelJson::Scalar(s) => Ok(ChannelSpec::Scalar(s.build()?)),
        ChannelJson::Mimo { entries, alpha } => {
            let mut grid = Vec::with_capacity(entries.len());
            for row in entries {
                let mut out = Vec::with_capacity(row.len());
                for e in row {
                    out.push(e.build()?);
                }
                grid.push(out);
            }
            let spec = match alpha {
                Some(alpha) => MimoFadingSpec::with_separability(grid, alpha)?,
                None => MimoFadingSpec::new(grid)?,
            };
            Ok(ChannelSpec::Mimo(spec))
        }
        ChannelJson::Delay { taps, alpha } => {
            let mut out = Vec::with_capacity(taps.len());
            for t in taps {
                out.push(t.build()?);
            }
            let spec = match alpha {
                Some(alpha) => DelaySpreadSpec::with_separability(out, alpha)?,
                None => DelaySpreadSpec::new(out)?,
            };
            Ok(ChannelSpec::Delay(spec))
        }
    }
}

pub fn channel_from_json_file(path: &std::path::Path) -> Result<ChannelSpec> {
    let text = std::fs::read_to_string(path)?;
    channel_from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn gm(a: f64) -> ScalarFadingSpec {
        ScalarFadingSpec::gauss_markov(a).unwrap()
    }

    #[test]
    fn parametric_lambdas_match_their_oracles() {
        // memoryless: flat spectrum
        assert_relative_eq!(ScalarFadingSpec::memoryless().lambda(), 1.0);

        // gauss_markov(0.5): geometric series vs direct truncated summation
        let spec = gm(0.5);
        let direct: f64 = (1..200).map(|nu| 2.0 * 0.5f64.powi(2 * nu)).sum::<f64>() + 1.0;
        assert_relative_eq!(spec.lambda(), 5.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(spec.lambda(), direct, max_relative = 1e-13);

        // gauss_markov(0.99) closed form vs truncated sum
        let spec = gm(0.99);
        let mut direct = 1.0;
        let mut term = 0.99f64 * 0.99;
        let mut pow = term;
        let mut nu = 1;
        while pow > 1e-20 && nu < 1_000_000 {
            direct += 2.0 * pow;
            pow *= term;
            nu += 1;
        }
        term = (1.0 + 0.99f64 * 0.99) / (1.0 - 0.99f64 * 0.99);
        assert_relative_eq!(spec.lambda(), term, max_relative = 1e-12);
        assert_relative_eq!(spec.lambda(), direct, max_relative = 1e-10);

        // bandlimited_flat(pi/2): rectangle integral of S^2 vs grid quadrature
        let spec =
            ScalarFadingSpec::parametric(ParametricFamily::BandlimitedFlat { omega0: PI / 2.0 }, 1.0)
                .unwrap();
        assert_relative_eq!(spec.lambda(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(spec.lambda_spectral(), 2.0, max_relative = 1e-9);
    }

    #[test]
    fn lambda_spectral_route_agrees_for_parametric_families() {
        for spec in [
            ScalarFadingSpec::memoryless(),
            gm(0.5),
            gm(0.9),
            gm(0.99),
            ScalarFadingSpec::parametric(ParametricFamily::BandlimitedFlat { omega0: 1.0 }, 2.0)
                .unwrap(),
        ] {
            let l = spec.lambda();
            assert_relative_eq!(spec.lambda_spectral(), l, max_relative = 1e-8);
        }
    }

    #[test]
    fn truncated_sequence_lambda() {
        let spec = ScalarFadingSpec::from_sequence(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
        ])
        .unwrap();
        assert_relative_eq!(spec.lambda(), 1.5);
        assert_relative_eq!(spec.psd(0.0), 2.0);
        assert!(spec.psd(PI) >= 0.0);
    }

    #[test]
    fn ephemerality_classification() {
        assert!(ScalarFadingSpec::memoryless().is_ephemeral()); // 1 < 2
        assert!(!gm(0.99).is_ephemeral()); // lambda ~ 99.5
        // exact boundary lambda = 2 R0^2 is nonephemeral
        let boundary =
            ScalarFadingSpec::parametric(ParametricFamily::BandlimitedFlat { omega0: PI / 2.0 }, 1.0)
                .unwrap();
        assert!(!boundary.is_ephemeral());
    }

    #[test]
    fn gauss_markov_psd_closed_form() {
        // Poisson kernel at omega = 0: (1+a)/(1-a)
        for a in [0.3, 0.5, 0.9] {
            let spec = gm(a);
            assert_relative_eq!(spec.psd(0.0), (1.0 + a) / (1.0 - a), max_relative = 1e-14);
            // sum the series directly as an oracle
            let summed: f64 = 1.0 + 2.0 * (1..400).map(|nu| a.powi(nu)).sum::<f64>();
            assert_relative_eq!(spec.psd(0.0), summed, max_relative = 1e-12);
        }
    }

    #[test]
    fn psd_autocorr_round_trip() {
        let spec = gm(0.6);
        let table = spec.to_psd_table(Some(2049)).unwrap();
        assert_relative_eq!(table.r0(), 1.0, max_relative = 1e-10);
        let seq = table.to_autocorr_sequence(Some(12)).unwrap();
        for nu in 0..=12i64 {
            assert_relative_eq!(
                seq.autocorr(nu).re,
                0.6f64.powi(nu as i32),
                epsilon = 1e-8
            );
        }
        // table -> sequence -> psd: sup-norm error small
        let back = seq.to_psd_table(Some(257)).unwrap();
        for j in 0..257 {
            let w = -PI + 2.0 * PI * j as f64 / 256.0;
            // truncation at lag 12 leaves a 0.6^13 ~ 1e-3 tail
            assert!((back.psd(w) - spec.psd(w)).abs() < 2e-2);
        }
    }

    #[test]
    fn psd_integrates_to_the_variance() {
        let seq = ScalarFadingSpec::from_sequence(vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.4, 0.3),
            Complex64::new(-0.2, 0.1),
        ])
        .unwrap();
        for spec in [
            ScalarFadingSpec::memoryless(),
            gm(0.9).scaled_by(1.5).unwrap(),
            ScalarFadingSpec::parametric(ParametricFamily::BandlimitedFlat { omega0: 1.0 }, 0.7)
                .unwrap(),
            seq,
            gm(0.6).to_psd_table(Some(513)).unwrap(),
        ] {
            let bps = spec.psd_breakpoints();
            let integral =
                crate::quad::integrate_default(|w| spec.psd(w), -PI, PI, &bps) / (2.0 * PI);
            assert_relative_eq!(integral, spec.r0(), max_relative = 1e-8);
        }
    }

    #[test]
    fn resolution_guard_on_coarse_tables() {
        let table = gm(0.5).to_psd_table(Some(33)).unwrap();
        assert!(matches!(
            table.to_autocorr_sequence(Some(16)),
            Err(Error::Resolution(_))
        ));
        assert!(table.to_autocorr_sequence(Some(4)).is_ok());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(ScalarFadingSpec::parametric(ParametricFamily::GaussMarkov { a: 1.0 }, 1.0).is_err());
        assert!(ScalarFadingSpec::parametric(ParametricFamily::GaussMarkov { a: -0.1 }, 1.0).is_err());
        assert!(
            ScalarFadingSpec::parametric(ParametricFamily::BandlimitedFlat { omega0: 0.0 }, 1.0)
                .is_err()
        );
        assert!(
            ScalarFadingSpec::parametric(ParametricFamily::BandlimitedFlat { omega0: 4.0 }, 1.0)
                .is_err()
        );
        assert!(ScalarFadingSpec::parametric(ParametricFamily::Memoryless, -1.0).is_err());
        // R(0) = 1, R(1) = 1 gives S(pi) = -1: not a PSD
        assert!(ScalarFadingSpec::from_sequence(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ])
        .is_err());
    }

    #[test]
    fn separable_mimo_validation() {
        let base = gm(0.5);
        let spec = MimoFadingSpec::separable(vec![1.0, 0.5], vec![base.clone(), gm(0.7)]).unwrap();
        assert_eq!(spec.nr(), 2);
        assert_eq!(spec.nt(), 2);
        assert_relative_eq!(spec.entry(0, 1).r0(), 0.5);
        assert_relative_eq!(spec.entry(0, 1).autocorr(3).re, 0.5 * 0.125);

        // full grid + alpha round trip
        let entries = vec![
            vec![base.clone(), base.scaled_by(0.5).unwrap()],
            vec![gm(0.7), gm(0.7).scaled_by(0.5).unwrap()],
        ];
        assert!(MimoFadingSpec::with_separability(entries, vec![1.0, 0.5]).is_ok());

        // inconsistent grid rejected
        let bad = vec![
            vec![base.clone(), gm(0.9)],
            vec![gm(0.7), gm(0.7).scaled_by(0.5).unwrap()],
        ];
        assert!(MimoFadingSpec::with_separability(bad, vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn channel_json_variants() {
        let scalar = channel_from_json_str(r#"{"kind": "gauss_markov", "a": 0.99, "scale": 1.0}"#)
            .unwrap();
        match scalar {
            ChannelSpec::Scalar(s) => assert_relative_eq!(s.autocorr(1).re, 0.99),
            _ => panic!("expected scalar"),
        }

        let seq = channel_from_json_str(r#"{"kind": "sequence", "r": [[1.0, 0.0], [0.5, 0.0]]}"#)
            .unwrap();
        match seq {
            ChannelSpec::Scalar(s) => assert_relative_eq!(s.lambda(), 1.5),
            _ => panic!("expected scalar"),
        }

        let mimo = channel_from_json_str(
            r#"{"entries": [[{"kind": "gauss_markov", "a": 0.5}, {"kind": "gauss_markov", "a": 0.5, "scale": 0.25}]], "alpha": [1.0, 0.25]}"#,
        )
        .unwrap();
        match mimo {
            ChannelSpec::Mimo(m) => {
                assert_eq!(m.nt(), 2);
                assert!(m.separability().is_some());
            }
            _ => panic!("expected mimo"),
        }

        let delay = channel_from_json_str(
            r#"{"taps": [{"kind": "gauss_markov", "a": 0.5}, {"kind": "gauss_markov", "a": 0.5, "scale": 0.5}], "alpha": [1.0, 0.5]}"#,
        )
        .unwrap();
        match delay {
            ChannelSpec::Delay(d) => assert_eq!(d.t(), 2),
            _ => panic!("expected delay"),
        }

        assert!(channel_from_json_str(r#"{"kind": "gauss_markov", "a": 2.0}"#).is_err());
    }

    proptest! {
        // Hermitian symmetry survives construction and conversions, and
        // lambda >= R0^2 with scaling leaving ephemerality invariant.
        #[test]
        fn sequence_invariants(
            re in proptest::collection::vec(-0.15f64..0.15, 1..6),
            im in proptest::collection::vec(-0.1f64..0.1, 1..6),
            c in 0.1f64..4.0,
        ) {
            let mut r = vec![Complex64::new(2.0, 0.0)];
            for (x, y) in re.iter().zip(im.iter()) {
                r.push(Complex64::new(*x, *y));
            }
            // R(0) dominant enough that the trig sum stays nonnegative
            let spec = ScalarFadingSpec::from_sequence(r).unwrap();
            for nu in 0..6i64 {
                let fwd = spec.autocorr(nu);
                let bwd = spec.autocorr(-nu);
                prop_assert!((fwd - bwd.conj()).norm() < 1e-15);
            }
            let l = spec.lambda();
            prop_assert!(l >= spec.r0() * spec.r0() - 1e-12);

            let scaled = spec.scaled_by(c).unwrap();
            prop_assert!((scaled.lambda() - c * c * l).abs() < 1e-9 * (1.0 + c * c * l));
            prop_assert_eq!(scaled.is_ephemeral(), spec.is_ephemeral());
        }
    }
}
