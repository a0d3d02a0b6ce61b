//! Time evolution, fidelity and quasi-revivals.
//!
//! Times are the dimensionless `t1 = v_F sqrt(omega) t` (monolayer) and
//! `t2 = omega t / 2` (bilayer); `Psi_n` evolves with phase `e^{-i h(n) t}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coherent::CoherentSeries;
use crate::error::{Error, Result};
use crate::numeric::{fmt17, golden_section_max, CompensatedSum};
use crate::spinors::LayerKind;

/// Default fidelity level a local maximum must reach to count as a quasiperiod.
pub const DEFAULT_THRESHOLD: f64 = 0.8;
/// Resolution of quasiperiod refinement.
pub const REFINE_TOL: f64 = 1e-6;

/// `a_n -> a_n e^{-i h(n) t}`.
pub fn evolve(series: &CoherentSeries, t: f64) -> CoherentSeries {
    let kind = series.kind();
    series.with_coefficients(
        series
            .terms()
            .map(|(n, a)| a * Complex64::from_polar(1.0, -kind.frequency(n) * t))
            .collect(),
    )
}

/// `|Σ |a_n|² e^{-i h(n) t}|² / (Σ |a_n|²)²`, exactly 1 at `t = 0`.
pub fn fidelity(series: &CoherentSeries, t: f64) -> f64 {
    let kind = series.kind();
    let mass = series.norm_sqr();
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for (n, a) in series.terms() {
        let w = a.norm_sqr();
        let (s, c) = (kind.frequency(n) * t).sin_cos();
        re.add(w * c);
        im.add(-w * s);
    }
    let (re, im) = (re.value(), im.value());
    (re * re + im * im) / (mass * mass)
}

/// Double sum `Σ_{n,m} |a_n|² |a_m|² cos((h(n) - h(m)) t)`, quadratic in `N`.
pub fn fidelity_double_sum(series: &CoherentSeries, t: f64) -> f64 {
    let kind = series.kind();
    let mut acc = CompensatedSum::new();
    for (n, an) in series.terms() {
        for (m, am) in series.terms() {
            acc.add(an.norm_sqr() * am.norm_sqr() * ((kind.frequency(n) - kind.frequency(m)) * t).cos());
        }
    }
    acc.value()
}

/// Leading large-`r` approximation of the bilayer fidelity, `e^{-4r² sin²(t/2)}`.
pub fn fidelity_envelope(r: f64, t2: f64) -> f64 {
    let s = (0.5 * t2).sin();
    (-4.0 * r * r * s * s).exp()
}

/// Residual of the linearized bilayer spectrum `sqrt(n(n-1)) ≈ n - 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearResidual {
    /// Norm of `a_n (e^{-i sqrt(n(n-1)) t} - e^{-i(n-1/2)t})` over `n < N`.
    pub norm: f64,
    /// `2 Re(<Psi'(t)|Psi> <Psi|gamma(t)>)`, where `Psi'` is the state evolved
    /// with the linear spectrum.
    pub cross_term: f64,
}

pub fn linear_residual(series: &CoherentSeries, t: f64, n_cut: usize) -> Result<LinearResidual> {
    if series.kind() != LayerKind::Bilayer {
        return Err(Error::InvalidArgument("linear residual is defined for bilayer series".into()));
    }
    let mut norm = CompensatedSum::new();
    let (mut pg_re, mut pg_im) = (CompensatedSum::new(), CompensatedSum::new());
    let (mut lp_re, mut lp_im) = (CompensatedSum::new(), CompensatedSum::new());
    for (n, a) in series.terms() {
        let nf = n as f64;
        let lin = Complex64::from_polar(1.0, -(nf - 0.5) * t);
        // <Psi'(t)|Psi>
        let lp = (a * lin).conj() * a;
        lp_re.add(lp.re);
        lp_im.add(lp.im);
        if n < n_cut {
            let g = a * (Complex64::from_polar(1.0, -LayerKind::Bilayer.frequency(n) * t) - lin);
            norm.add(g.norm_sqr());
            let pg = a.conj() * g;
            pg_re.add(pg.re);
            pg_im.add(pg.im);
        }
    }
    let lp = Complex64::new(lp_re.value(), lp_im.value());
    let pg = Complex64::new(pg_re.value(), pg_im.value());
    Ok(LinearResidual { norm: norm.value().sqrt(), cross_term: 2.0 * (lp * pg).re })
}

/// Sampled fidelity with detected quasiperiods.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTrace {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub quasiperiods: Vec<f64>,
}

impl FidelityTrace {
    /// CSV with header `t,fidelity`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,fidelity\n");
        for (t, f) in self.ts.iter().zip(&self.values) {
            out.push_str(&fmt17(*t));
            out.push(',');
            out.push_str(&fmt17(*f));
            out.push('\n');
        }
        out
    }

    /// Quasiperiods as a JSON list.
    pub fn quasiperiods_json(&self) -> String {
        serde_json::to_string(&self.quasiperiods).expect("floats serialize")
    }
}

/// Sample `F` uniformly on `[0, t_max]` and report interior local maxima with
/// `F >= threshold`, each refined by golden-section search.
pub fn quasiperiod_scan(series: &CoherentSeries, t_max: f64, samples: usize, threshold: f64) -> Result<FidelityTrace> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {samples}")));
    }
    let dt = t_max / (samples - 1) as f64;
    let ts: Vec<f64> = (0..samples).map(|i| i as f64 * dt).collect();
    let values: Vec<f64> = ts.par_iter().map(|&t| fidelity(series, t)).collect();
    let mut quasiperiods = Vec::new();
    for i in 1..samples.saturating_sub(1) {
        let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
        if c >= l && c > r && c >= threshold {
            let (t, f) = golden_section_max(|t| fidelity(series, t), ts[i - 1], ts[i + 1], REFINE_TOL);
            if f >= threshold {
                quasiperiods.push(t);
            }
        }
    }
    Ok(FidelityTrace { ts, values, quasiperiods })
}
