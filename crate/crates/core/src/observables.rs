//! Observables of a coherent series: densities on an x-grid, mean energy and
//! position-momentum moments.
//!
//! Grid quantities are kernel double sums over `(n, m)`, taken in ascending
//! `n` then ascending `m` with compensated accumulation, so the result at a
//! point does not depend on how grid points are scheduled across threads.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coherent::CoherentSeries;
use crate::error::{Error, Result};
use crate::fields::UnitSystem;
use crate::numeric::{fmt17, CompensatedSum};
use crate::oscillator::{eval_psi_all, zp_matrix_elements};
use crate::spinors::{current_kernel_from, energy, norm_constant, rho_kernel_from, CurrentSign, LayerKind};

/// Closed-form and oracle moments may differ by at most this much.
pub const MOMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Density,
    CurrentX,
    CurrentY,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMeta {
    pub kind: LayerKind,
    pub alpha: [f64; 2],
    pub quantity: Quantity,
}

/// A real quantity sampled on a strictly increasing x-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: GridMeta,
}

impl DensityGrid {
    /// CSV with header `x,value`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.xs.iter().zip(&self.values) {
            out.push_str(&fmt17(*x));
            out.push(',');
            out.push_str(&fmt17(*v));
            out.push('\n');
        }
        out
    }
}

fn check_grid(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("grid is empty".into()));
    }
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// `a_m^* a_n` for all stored pairs, row `n`, column `m` (relative indices).
fn bilinears(series: &CoherentSeries) -> Vec<Vec<Complex64>> {
    let c = series.coefficients();
    c.iter().map(|an| c.iter().map(|am| am.conj() * an).collect()).collect()
}

fn kernel_sum<K>(series: &CoherentSeries, pairs: &[Vec<Complex64>], x: f64, units: &UnitSystem, part: fn(Complex64) -> f64, kernel: K) -> f64
where
    K: Fn(usize, usize, &[f64]) -> f64,
{
    let base = series.base_index();
    let psi = eval_psi_all(series.n_max(), x, units);
    let mut acc = CompensatedSum::new();
    for (i, row) in pairs.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            let weight = part(*w);
            if weight != 0.0 {
                acc.add(weight * kernel(base + i, base + j, &psi));
            }
        }
    }
    acc.value()
}

fn meta(series: &CoherentSeries, quantity: Quantity) -> GridMeta {
    GridMeta {
        kind: series.kind(),
        alpha: [series.alpha().re, series.alpha().im],
        quantity,
    }
}

/// `rho(x) = Σ_{n,m} Re(a_m^* a_n) rho_{n,m}(x)`.
pub fn probability_density(series: &CoherentSeries, xs: &[f64], units: &UnitSystem) -> Result<DensityGrid> {
    check_grid(xs)?;
    let kind = series.kind();
    let pairs = bilinears(series);
    let values = xs
        .par_iter()
        .map(|&x| kernel_sum(series, &pairs, x, units, |c| c.re, |n, m, psi| rho_kernel_from(kind, n, m, psi)))
        .collect();
    Ok(DensityGrid { xs: xs.to_vec(), values, meta: meta(series, Quantity::Density) })
}

/// Current density components `(J_x, J_y)`.
///
/// Monolayer: `J_x = Σ Im(a_m^* a_n) j^-`, `J_y = Σ Re(a_m^* a_n) j^+`.
/// Bilayer: the same sums with prefactors `sqrt(omega)` and `-sqrt(omega)`.
pub fn current_density(series: &CoherentSeries, xs: &[f64], units: &UnitSystem) -> Result<(DensityGrid, DensityGrid)> {
    check_grid(xs)?;
    let kind = series.kind();
    let pairs = bilinears(series);
    let (px, py) = match kind {
        LayerKind::Monolayer => (1.0, 1.0),
        LayerKind::Bilayer => {
            let s = units.omega().sqrt();
            (s, -s)
        }
    };
    let jx: Vec<f64> = xs
        .par_iter()
        .map(|&x| {
            px * kernel_sum(series, &pairs, x, units, |c| c.im, |n, m, psi| {
                current_kernel_from(kind, CurrentSign::Minus, n, m, psi)
            })
        })
        .collect();
    let jy: Vec<f64> = xs
        .par_iter()
        .map(|&x| {
            py * kernel_sum(series, &pairs, x, units, |c| c.re, |n, m, psi| {
                current_kernel_from(kind, CurrentSign::Plus, n, m, psi)
            })
        })
        .collect();
    Ok((
        DensityGrid { xs: xs.to_vec(), values: jx, meta: meta(series, Quantity::CurrentX) },
        DensityGrid { xs: xs.to_vec(), values: jy, meta: meta(series, Quantity::CurrentY) },
    ))
}

/// `Σ |a_n|² E_n`.
pub fn mean_energy_oracle(series: &CoherentSeries, units: &UnitSystem) -> f64 {
    series
        .terms()
        .map(|(n, a)| a.norm_sqr() * energy(series.kind(), n, units))
        .collect::<CompensatedSum>()
        .value()
}

/// Sum `Σ_n t_n` of a positive series given `t_0` and the ratio `t_{n+1}/t_n`,
/// stopped once terms no longer change the sum.
fn positive_series<R: Fn(f64) -> f64>(t0: f64, ratio: R) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut t = t0;
    let mut n = 0.0;
    loop {
        acc.add(t);
        let rho = ratio(n);
        t *= rho;
        n += 1.0;
        if t == 0.0 || (rho < 0.5 && t < acc.value() * 1e-18) {
            break;
        }
    }
    acc.value()
}

/// Closed-form mean energy of the `f = 1` family, depending on `r` only.
pub fn mean_energy_closed_form(kind: LayerKind, r: f64, units: &UnitSystem) -> f64 {
    let lam = r * r;
    let e = (-lam).exp();
    let s = units.branch().sign();
    match kind {
        // sqrt(omega) e^{-r²} r² Σ r^{2n} / (sqrt(n+1) n!)
        LayerKind::Monolayer => {
            let sum = positive_series(e * lam, |n| lam / (n + 1.0) * ((n + 1.0) / (n + 2.0)).sqrt());
            s * units.omega().sqrt() * sum
        }
        // (omega/2) e^{-r²} r⁴ Σ r^{2n} / (sqrt((n+2)(n+1)) n!)
        LayerKind::Bilayer => {
            let sum = positive_series(e * lam * lam / 2f64.sqrt(), |n| {
                lam / (n + 1.0) * ((n + 1.0) / (n + 3.0)).sqrt()
            });
            s * 0.5 * units.omega() * sum
        }
    }
}

/// Mean energy: closed form for the `f = 1` family (checked against the
/// oracle), otherwise the oracle `Σ |a_n|² E_n`.
pub fn mean_energy(series: &CoherentSeries, units: &UnitSystem) -> Result<f64> {
    let oracle = mean_energy_oracle(series, units);
    if !series.is_canonical() {
        return Ok(oracle);
    }
    let closed = mean_energy_closed_form(series.kind(), series.r(), units);
    if (closed - oracle).abs() > 1e-10 * closed.abs().max(1.0) {
        return Err(Error::OracleMismatch { quantity: "mean energy", closed, oracle });
    }
    Ok(closed)
}

/// Means of `z`, `z²`, `p_z`, `p_z²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean_z: f64,
    pub mean_z2: f64,
    pub mean_p: f64,
    pub mean_p2: f64,
}

impl Moments {
    pub fn delta_z(&self) -> f64 {
        (self.mean_z2 - self.mean_z * self.mean_z).max(0.0).sqrt()
    }

    pub fn delta_p(&self) -> f64 {
        (self.mean_p2 - self.mean_p * self.mean_p).max(0.0).sqrt()
    }

    /// `Δz Δp_z` in units of ħ.
    pub fn uncertainty_product(&self) -> f64 {
        self.delta_z() * self.delta_p()
    }

    fn max_abs_diff(&self, o: &Moments) -> (f64, &'static str, f64, f64) {
        [
            ("<z>", self.mean_z, o.mean_z),
            ("<z^2>", self.mean_z2, o.mean_z2),
            ("<p_z>", self.mean_p, o.mean_p),
            ("<p_z^2>", self.mean_p2, o.mean_p2),
        ]
        .into_iter()
        .map(|(q, a, b)| ((a - b).abs(), q, a, b))
        .fold((0.0, "<z>", 0.0, 0.0), |best, c| if c.0 > best.0 { c } else { best })
    }
}

/// Closed-form moments of the `f = 1` coherent state labelled `alpha`.
pub fn zp_moments_closed_form(kind: LayerKind, alpha: Complex64) -> Moments {
    let lam = alpha.norm_sqr();
    let e = (-lam).exp();
    let a2 = (alpha * alpha).re;
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let r2m1 = 2f64.sqrt() - 1.0;
    let (linear, quad_iso, quad_aniso) = match kind {
        LayerKind::Monolayer => {
            // Σ r^{2n+2} / sqrt(n! (n+2)!)
            let s1 = positive_series(e * lam / 2f64.sqrt(), |n| lam / ((n + 1.0) * (n + 3.0)).sqrt());
            // Σ sqrt(n+2) r^{2n+2} / sqrt(n! (n+3)!)
            let s2 = positive_series(e * lam * 2f64.sqrt() / 6f64.sqrt(), |n| {
                lam * ((n + 3.0) / (n + 2.0)).sqrt() / ((n + 1.0) * (n + 4.0)).sqrt()
            });
            (1.0 + e * r2m1 + s1, e + 2.0 * lam, 1.0 + e * r2m1 + s2)
        }
        LayerKind::Bilayer => {
            // Σ sqrt(n+1) r^{2n+4} / sqrt((n+2)! (n+3)!)
            let b1 = positive_series(e * lam * lam / 12f64.sqrt(), |n| {
                lam * ((n + 2.0) / (n + 1.0)).sqrt() / ((n + 3.0) * (n + 4.0)).sqrt()
            });
            // Σ r^{2n+4} / sqrt(n! (n+4)!)
            let b2 = positive_series(e * lam * lam / 24f64.sqrt(), |n| lam / ((n + 1.0) * (n + 5.0)).sqrt());
            (
                1.0 + e * (1.0 + r2m1 * lam) + b1,
                2.0 * e * (lam + 1.0) + 2.0 * lam - 1.0,
                1.0 + e * r2m1 * (1.0 + lam) + b2,
            )
        }
    };
    Moments {
        mean_z: c * alpha.re * linear,
        mean_z2: 0.5 * (quad_iso + a2 * quad_aniso),
        mean_p: c * alpha.im * linear,
        mean_p2: 0.5 * (quad_iso - a2 * quad_aniso),
    }
}

/// Spinor matrix element `<Psi_m|O|Psi_n>` from scalar oscillator elements.
/// Both spinor components carry the same operator; the monolayer `i` on the
/// bottom entry cancels in the bilinear.
fn spinor_element<S: Fn(usize, usize) -> f64>(kind: LayerKind, m: usize, n: usize, scalar: &S) -> f64 {
    let sh = kind.shift();
    let top = if m >= sh && n >= sh { scalar(m - sh, n - sh) } else { 0.0 };
    norm_constant(kind, m) * norm_constant(kind, n) * (top + scalar(m, n))
}

fn z_elem(a: usize, b: usize) -> f64 {
    zp_matrix_elements(a, b).0
}

fn p_elem(a: usize, b: usize) -> f64 {
    zp_matrix_elements(a, b).1
}

fn z2_elem(a: usize, b: usize) -> f64 {
    let up = z_elem(a, b + 1) * z_elem(b + 1, b);
    let down = if b > 0 { z_elem(a, b - 1) * z_elem(b - 1, b) } else { 0.0 };
    up + down
}

// (i P)(i P) = -P P
fn p2_elem(a: usize, b: usize) -> f64 {
    let up = p_elem(a, b + 1) * p_elem(b + 1, b);
    let down = if b > 0 { p_elem(a, b - 1) * p_elem(b - 1, b) } else { 0.0 };
    -(up + down)
}

/// Moments from `Σ_{m,n} a_m^* a_n <Psi_m|O|Psi_n>`, valid for any series.
pub fn zp_moments_oracle(series: &CoherentSeries) -> Moments {
    let kind = series.kind();
    let i = Complex64::i();
    let mut sums = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
    for (n, an) in series.terms() {
        let lo = n.saturating_sub(2).max(series.base_index());
        let hi = (n + 2).min(series.n_max());
        for m in lo..=hi {
            let w = series.coefficient(m).conj() * an;
            sums[0].add(w.re * spinor_element(kind, m, n, &z_elem));
            sums[1].add(w.re * spinor_element(kind, m, n, &z2_elem));
            sums[2].add((w * i).re * spinor_element(kind, m, n, &p_elem));
            sums[3].add(w.re * spinor_element(kind, m, n, &p2_elem));
        }
    }
    Moments {
        mean_z: sums[0].value(),
        mean_z2: sums[1].value(),
        mean_p: sums[2].value(),
        mean_p2: sums[3].value(),
    }
}

/// Moments of `z` and `p_z`. For the `f = 1` family the closed forms are
/// returned after checking them against the oracle.
pub fn zp_moments(series: &CoherentSeries) -> Result<Moments> {
    let oracle = zp_moments_oracle(series);
    if !series.is_canonical() {
        return Ok(oracle);
    }
    let closed = zp_moments_closed_form(series.kind(), series.alpha());
    let (diff, quantity, c, o) = closed.max_abs_diff(&oracle);
    if diff > MOMENT_TOL {
        return Err(Error::OracleMismatch { quantity, closed: c, oracle: o });
    }
    Ok(closed)
}

/// `Δz Δp_z` (units of ħ).
pub fn uncertainty_product(series: &CoherentSeries) -> Result<f64> {
    Ok(zp_moments(series)?.uncertainty_product())
}
