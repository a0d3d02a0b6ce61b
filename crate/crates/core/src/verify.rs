//! Independent cross-checks and the self-test suite behind `gcs check`.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::coherent::{bgcs, eigen_residual, gpcs, gpcs_from, mucs, truncation_order};
use crate::dynamics::{fidelity, fidelity_double_sum, fidelity_envelope};
use crate::error::Result;
use crate::fields::{bilayer_fields, monolayer_fields, UnitSystem};
use crate::ladder::{gamma_n, hw_f_sequence, LadderSpec, Weight};
use crate::numeric::{golden_section_max, CompensatedSum};
use crate::observables::{
    current_density, mean_energy_closed_form, mean_energy_oracle, probability_density, zp_moments_closed_form,
    zp_moments_oracle,
};
use crate::oscillator::{eval_psi, eval_psi_all, QuadratureGrid};
use crate::spinors::{rho_kernel_from, LayerKind};

/// Bilayer `r = 5` fidelity at its local maximum next to `2π` (50-digit reference).
pub const BILAYER_REVIVAL_F: f64 = 0.999_994_393_578_94;
/// Location of that maximum.
pub const BILAYER_REVIVAL_T: f64 = 6.281_749_398_29;

/// Density of the `f = 1` state from the expanded trigonometric series,
/// grouping the terms touching the zero modes separately.
pub fn density_trig_series(kind: LayerKind, alpha: Complex64, x: f64, units: &UnitSystem, tol: f64) -> f64 {
    let (r, th) = (alpha.norm(), alpha.arg());
    let n_max = truncation_order(r, tol);
    let psi = eval_psi_all(n_max, x, units);
    // w_n = r^n / sqrt(n!)
    let mut w = vec![1.0f64; n_max + 1];
    for n in 1..=n_max {
        w[n] = w[n - 1] * r / (n as f64).sqrt();
    }
    let rho = |n: usize, m: usize| rho_kernel_from(kind, n, m, &psi);
    let cos = |k: isize| (k as f64 * th).cos();
    let mut acc = CompensatedSum::new();
    let lo = kind.zero_modes();
    for n in lo..=n_max {
        for m in lo..=n_max {
            acc.add(w[n] * w[m] * cos(n as isize - m as isize) * rho(n, m));
        }
    }
    acc.add(rho(0, 0));
    match kind {
        LayerKind::Monolayer => {
            for n in 1..=n_max {
                acc.add(2.0 * w[n] * cos(n as isize) * rho(n, 0));
            }
        }
        LayerKind::Bilayer => {
            acc.add(r * r * rho(1, 1));
            acc.add(2.0 * r * th.cos() * rho(1, 0));
            for n in 2..=n_max {
                acc.add(2.0 * w[n] * (cos(n as isize) * rho(n, 0) + r * cos(n as isize - 1) * rho(n, 1)));
            }
        }
    }
    (-r * r).exp() * acc.value()
}

/// Finite-difference convergence of one SUSY identity at one level.
#[derive(Debug, Clone, Serialize)]
pub struct FdConvergence {
    pub n: usize,
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `log2` of successive residual ratios.
    pub orders: Vec<f64>,
}

impl FdConvergence {
    fn from_residuals(n: usize, steps: Vec<f64>, residuals: Vec<f64>) -> Self {
        let orders = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        Self { n, steps, residuals, orders }
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Sample points: 161 points across `±8/sqrt(omega)`, offset so that none
/// sits exactly on the centre, where `eta` vanishes.
fn fd_points(units: &UnitSystem) -> Vec<f64> {
    let l = 8.0 / units.omega().sqrt();
    (0..161).map(|i| units.center() - l + 2.0 * l * (i as f64 + 0.37) / 161.0).collect()
}

/// Which potential supplies `V^-` in the Schrödinger residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SusyLayer {
    Monolayer,
    /// Bilayer construction with factorization energies `0` and `omega`.
    Bilayer,
}

fn v_minus(layer: SusyLayer, x: f64, units: &UnitSystem) -> Result<f64> {
    let p = units.profile();
    Ok(match layer {
        SusyLayer::Monolayer => monolayer_fields(&p, x, units.k()).v_minus,
        SusyLayer::Bilayer => bilayer_fields(&p, x, units.k(), 0.0, units.omega())?.v_minus,
    })
}

/// `max |(-D² + V^-) psi_n - n omega psi_n|` with central differences of step `h`,
/// for `h`, `h/2`, `h/4`.
pub fn schrodinger_fd(layer: SusyLayer, n: usize, units: &UnitSystem, h: f64) -> Result<FdConvergence> {
    let xs = fd_points(units);
    let steps = vec![h, h / 2.0, h / 4.0];
    let mut residuals = Vec::new();
    for &s in &steps {
        let mut worst = 0.0f64;
        for &x in &xs {
            let (l, c, r) = (eval_psi(n, x - s, units), eval_psi(n, x, units), eval_psi(n, x + s, units));
            let d2 = (r - 2.0 * c + l) / (s * s);
            let res = -d2 + v_minus(layer, x, units)? * c - n as f64 * units.omega() * c;
            worst = worst.max(res.abs());
        }
        residuals.push(worst);
    }
    Ok(FdConvergence::from_residuals(n, steps, residuals))
}

/// `max |(D + W) psi_n - sqrt(n omega) psi_{n-1}|` with central differences.
pub fn intertwiner_fd(n: usize, units: &UnitSystem, h: f64) -> FdConvergence {
    let xs = fd_points(units);
    let steps = vec![h, h / 2.0, h / 4.0];
    let p = units.profile();
    let residuals = steps
        .iter()
        .map(|&s| {
            xs.iter()
                .map(|&x| {
                    let d1 = (eval_psi(n, x + s, units) - eval_psi(n, x - s, units)) / (2.0 * s);
                    let w = monolayer_fields(&p, x, units.k()).w;
                    let lower = if n == 0 { 0.0 } else { eval_psi(n - 1, x, units) };
                    (d1 + w * eval_psi(n, x, units) - (n as f64 * units.omega()).sqrt() * lower).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    FdConvergence::from_residuals(n, steps, residuals)
}

/// Outcome of one self-test.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, passed: value <= limit, value, limit }
    }

    fn at_least(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, passed: value >= limit, value, limit }
    }

    fn failed(name: &'static str) -> Self {
        Self { name, passed: false, value: f64::NAN, limit: f64::NAN }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<28} value={:.3e} limit={:.3e}", self.name, self.value, self.limit)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const KINDS: [LayerKind; 2] = [LayerKind::Monolayer, LayerKind::Bilayer];

pub fn check_hw_fixed_point(tol: f64) -> Result<Vec<Check>> {
    let f = hw_f_sequence(|n| n as f64, |n| (n + 1) as f64, 500)?;
    let dev = (1..=500).map(|n| (f.value(n) - 1.0).abs()).fold(0.0, f64::max);
    let spec = LadderSpec::oscillator_with(f, vec![])?;
    let gap = (0..500)
        .map(|n| (gamma_n(&spec, n + 1) - gamma_n(&spec, n) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(vec![Check::at_most("hw fixed point", dev, tol), Check::at_most("hw commutator", gap, tol)])
}

pub fn check_equivalence() -> Result<Vec<Check>> {
    let spec = LadderSpec::oscillator();
    let mut diff = 0.0f64;
    let mut eig = 0.0f64;
    for kind in KINDS {
        for r in [0.5, 1.0, 3.0, 5.0] {
            for th in [0.0, PI / 4.0] {
                let a = Complex64::from_polar(r, th);
                let b = bgcs(&spec, kind, a, 1e-12)?;
                let g = gpcs(&spec, kind, a, 1e-12)?;
                let m = mucs(&spec, kind, a, 1e-12)?;
                if b.n_max() != g.n_max() || b.n_max() != m.n_max() {
                    diff = f64::INFINITY;
                }
                for n in 0..=b.n_max() {
                    diff = diff.max((b.coefficient(n) - g.coefficient(n)).norm());
                    diff = diff.max((b.coefficient(n) - m.coefficient(n)).norm());
                }
                eig = eig.max(eigen_residual(&spec, &b) / (10.0 * b.tail_bound()));
            }
        }
    }
    Ok(vec![
        Check::at_most("definition equivalence", diff, 1e-12),
        Check::at_most("eigenvector (x 10 tail)", eig, 1.0),
    ])
}

pub fn check_densities(tol: f64) -> Result<Vec<Check>> {
    let units = UnitSystem::unit();
    let spec = LadderSpec::oscillator();
    let (mut norm, mut rho_sym, mut j_sym, mut trig) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for kind in KINDS {
        for r in [1.0, 3.0, 5.0] {
            let th = 0.8;
            let plus = bgcs(&spec, kind, Complex64::from_polar(r, th), 1e-12)?;
            let minus = bgcs(&spec, kind, Complex64::from_polar(r, -th), 1e-12)?;
            let grid = QuadratureGrid::for_state(&units, r).with_step(0.02);
            let xs = grid.points();
            let rp = probability_density(&plus, &xs, &units)?;
            norm = norm.max((grid.integrate_values(&rp.values) - 1.0).abs());
            let probe: Vec<f64> = xs.iter().step_by(25).copied().collect();
            let a = probability_density(&plus, &probe, &units)?;
            let b = probability_density(&minus, &probe, &units)?;
            let (ax, ay) = current_density(&plus, &probe, &units)?;
            let (bx, by) = current_density(&minus, &probe, &units)?;
            for i in 0..probe.len() {
                rho_sym = rho_sym.max((a.values[i] - b.values[i]).abs());
                j_sym = j_sym.max((ax.values[i] + bx.values[i]).abs()).max((ay.values[i] - by.values[i]).abs());
                let t = density_trig_series(kind, plus.alpha(), probe[i], &units, 1e-12);
                trig = trig.max((t - a.values[i]).abs());
            }
        }
    }
    Ok(vec![
        Check::at_most("density normalization", norm, 1e-6),
        Check::at_most("density reflection", rho_sym, 1e-12),
        Check::at_most("current reflection", j_sym, 1e-12),
        Check::at_most("density series oracle", trig, tol),
    ])
}

pub fn check_moments(tol: f64) -> Result<Vec<Check>> {
    let spec = LadderSpec::oscillator();
    let units = UnitSystem::unit();
    let (mut diff, mut low, mut at0, mut at5, mut energy, mut phase) = (0.0f64, f64::INFINITY, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for kind in KINDS {
        for r in [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0] {
            let e0 = mean_energy_closed_form(kind, r, &units);
            for th in [0.0, PI / 4.0, PI / 3.0, 1.0, PI] {
                let s = bgcs(&spec, kind, Complex64::from_polar(r, th), 1e-12)?;
                let c = zp_moments_closed_form(kind, s.alpha());
                let o = zp_moments_oracle(&s);
                diff = diff
                    .max((c.mean_z - o.mean_z).abs())
                    .max((c.mean_z2 - o.mean_z2).abs())
                    .max((c.mean_p - o.mean_p).abs())
                    .max((c.mean_p2 - o.mean_p2).abs());
                let p = c.uncertainty_product();
                low = low.min(p);
                if r == 0.0 {
                    at0 = at0.max((p - 0.5).abs());
                }
                if r == 5.0 {
                    at5 = at5.max((p - 0.5).abs());
                }
                energy = energy.max((mean_energy_oracle(&s, &units) - e0).abs());
                phase = phase.max((mean_energy_closed_form(kind, s.r(), &units) - e0).abs());
            }
        }
    }
    Ok(vec![
        Check::at_most("moment closed forms", diff, 1e-8),
        Check::at_least("uncertainty lower bound", low, 0.5 - 1e-10),
        Check::at_most("uncertainty at alpha = 0", at0, 1e-10),
        Check::at_most("uncertainty at r = 5", at5, 2e-2),
        Check::at_most("mean energy oracle", energy, tol),
        Check::at_most("mean energy phase", phase, 1e-14),
    ])
}

pub fn check_fidelity(tol: f64) -> Result<Vec<Check>> {
    let spec = LadderSpec::oscillator();
    let mut at0 = 0.0f64;
    let mut sums = 0.0f64;
    for kind in KINDS {
        for r in [0.5, 1.0, 3.0, 5.0] {
            let s = bgcs(&spec, kind, Complex64::from_polar(r, 0.3), 1e-12)?;
            at0 = at0.max((fidelity(&s, 0.0) - 1.0).abs());
            for i in 0..40 {
                let t = 0.75 * i as f64;
                sums = sums.max((fidelity(&s, t) - fidelity_double_sum(&s, t)).abs());
            }
        }
    }
    let s = bgcs(&spec, LayerKind::Bilayer, Complex64::new(5.0, 0.0), 1e-12)?;
    let (t, f) = golden_section_max(|t| fidelity(&s, t), 2.0 * PI - 0.5, 2.0 * PI + 0.5, 1e-8);
    let env = (0..=700)
        .map(|i| 5.8 + 0.001 * i as f64)
        .map(|t| (fidelity(&s, t) - fidelity_envelope(5.0, t)).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("fidelity at t = 0", at0, 0.0),
        Check::at_most("fidelity double sum", sums, tol),
        Check::at_most("revival location", (t - 2.0 * PI).abs(), 0.1),
        Check::at_most("revival height", (f - BILAYER_REVIVAL_F).abs(), 0.05),
        Check::at_most("revival envelope", env, 0.05),
    ])
}

pub fn check_susy() -> Result<Vec<Check>> {
    let units = UnitSystem::unit();
    let mut order = f64::INFINITY;
    let mut inter = f64::INFINITY;
    for n in 0..=10 {
        for layer in [SusyLayer::Monolayer, SusyLayer::Bilayer] {
            order = order.min(schrodinger_fd(layer, n, &units, 0.1)?.min_order());
        }
        if n > 0 {
            inter = inter.min(intertwiner_fd(n, &units, 0.1).min_order());
        }
    }
    Ok(vec![
        Check::at_least("schrodinger fd order", order, 1.8),
        Check::at_least("intertwiner fd order", inter, 1.8),
    ])
}

pub fn check_roots() -> Result<Vec<Check>> {
    let f = Weight::func(|n| if n == 2 || n == 5 { 0.0 } else { 1.0 });
    let spec = LadderSpec::oscillator_with(f, vec![2, 5])?;
    let a = Complex64::new(0.9, 0.4);
    let b = bgcs(&spec, LayerKind::Monolayer, a, 1e-12)?;
    let g = gpcs_from(&spec, LayerKind::Monolayer, a, 2, 1e-12)?;
    let support_ok = b.base_index() == 5 && g.base_index() == 2 && g.n_max() == 4;
    Ok(vec![
        Check { name: "root support", passed: support_ok, value: b.base_index() as f64, limit: 5.0 },
        Check::at_most("root segment norm", (g.norm_sqr() - 1.0).abs(), 1e-12),
    ])
}

/// Every self-test; `tol` bounds the identities that hold to rounding.
pub fn run_check_suite(tol: f64) -> CheckReport {
    let groups: [(&'static str, fn(f64) -> Result<Vec<Check>>); 7] = [
        ("hw fixed point", check_hw_fixed_point),
        ("definition equivalence", |_| check_equivalence()),
        ("densities", check_densities),
        ("moments", check_moments),
        ("fidelity", check_fidelity),
        ("susy", |_| check_susy()),
        ("roots", |_| check_roots()),
    ];
    let mut checks = Vec::new();
    for (name, run) in groups {
        match run(tol) {
            Ok(mut c) => checks.append(&mut c),
            Err(_) => checks.push(Check::failed(name)),
        }
    }
    CheckReport { checks }
}
