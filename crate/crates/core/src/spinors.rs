//! Constant-field spinor eigenstates, energies, and the pairwise density and
//! current kernels from which every observable is assembled.
//!
//! The common plane-wave factor `e^{iky}` cancels in every bilinear and is not
//! stored. The monolayer bottom component carries an explicit `i`; it is
//! tracked by a flag and cancels in all kernels below, so samples are real.

use serde::{Deserialize, Serialize};

use crate::fields::UnitSystem;
use crate::oscillator::eval_psi_all;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Monolayer,
    Bilayer,
}

impl LayerKind {
    /// Number of lowest states with an empty top component.
    pub fn zero_modes(self) -> usize {
        match self {
            LayerKind::Monolayer => 1,
            LayerKind::Bilayer => 2,
        }
    }

    /// Offset between the bottom and top oscillator indices.
    pub fn shift(self) -> usize {
        self.zero_modes()
    }

    /// Dimensionless evolution frequency: `sqrt(n)` or `sqrt(n(n-1))`.
    pub fn frequency(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            LayerKind::Monolayer => nf.sqrt(),
            LayerKind::Bilayer => (nf * (nf - 1.0)).max(0.0).sqrt(),
        }
    }
}

impl std::fmt::Display for LayerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LayerKind::Monolayer => "monolayer",
            LayerKind::Bilayer => "bilayer",
        })
    }
}

impl std::str::FromStr for LayerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "monolayer" | "m" => Ok(LayerKind::Monolayer),
            "bilayer" | "b" => Ok(LayerKind::Bilayer),
            other => Err(format!("unknown layer kind '{other}'")),
        }
    }
}

/// Sign selecting the `j^+` (y) or `j^-` (x) current kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurrentSign {
    Plus,
    Minus,
}

impl CurrentSign {
    fn value(self) -> f64 {
        match self {
            CurrentSign::Plus => 1.0,
            CurrentSign::Minus => -1.0,
        }
    }
}

/// Spinor value at one point. `bottom_times_i` marks the monolayer convention
/// where the stored bottom value multiplies an implicit `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorSample {
    pub top: f64,
    pub bottom: f64,
    pub bottom_times_i: bool,
}

/// Normalization constant `c_n`: 1 when the top entry vanishes, 1/sqrt(2) otherwise.
#[inline]
pub fn norm_constant(kind: LayerKind, n: usize) -> f64 {
    if n < kind.zero_modes() {
        1.0
    } else {
        std::f64::consts::FRAC_1_SQRT_2
    }
}

#[inline]
fn top_from(kind: LayerKind, n: usize, psi: &[f64]) -> f64 {
    if n < kind.shift() {
        0.0
    } else {
        psi[n - kind.shift()]
    }
}

/// Eigenspinor `Psi_n` at `x` (up to `e^{iky}`).
pub fn eigenstate(kind: LayerKind, n: usize, x: f64, units: &UnitSystem) -> SpinorSample {
    let psi = eval_psi_all(n, x, units);
    eigenstate_from(kind, n, &psi)
}

/// Eigenspinor from precomputed `psi_0..psi_n` at one point.
pub fn eigenstate_from(kind: LayerKind, n: usize, psi: &[f64]) -> SpinorSample {
    let c = norm_constant(kind, n);
    SpinorSample {
        top: c * top_from(kind, n, psi),
        bottom: c * psi[n],
        bottom_times_i: kind == LayerKind::Monolayer,
    }
}

/// Energy `E_n` in natural units.
pub fn energy(kind: LayerKind, n: usize, units: &UnitSystem) -> f64 {
    let s = units.branch().sign();
    let nf = n as f64;
    match kind {
        LayerKind::Monolayer => s * (nf * units.omega()).sqrt(),
        LayerKind::Bilayer => s * 0.5 * units.omega() * (nf * (nf - 1.0)).max(0.0).sqrt(),
    }
}

/// `rho_{n,m}(x) = Psi_m^dagger Psi_n`.
pub fn rho_kernel(kind: LayerKind, n: usize, m: usize, x: f64, units: &UnitSystem) -> f64 {
    let psi = eval_psi_all(n.max(m), x, units);
    rho_kernel_from(kind, n, m, &psi)
}

#[inline]
pub fn rho_kernel_from(kind: LayerKind, n: usize, m: usize, psi: &[f64]) -> f64 {
    norm_constant(kind, n)
        * norm_constant(kind, m)
        * (top_from(kind, n, psi) * top_from(kind, m, psi) + psi[n] * psi[m])
}

/// Current kernel `j^±_{n,m}(x)` (monolayer) or its bilayer counterpart.
pub fn current_kernel(kind: LayerKind, sign: CurrentSign, n: usize, m: usize, x: f64, units: &UnitSystem) -> f64 {
    let psi = eval_psi_all(n.max(m), x, units);
    current_kernel_from(kind, sign, n, m, &psi)
}

#[inline]
fn gate(cond: bool) -> f64 {
    if cond {
        1.0
    } else {
        0.0
    }
}

#[inline]
fn at(psi: &[f64], i: isize) -> f64 {
    if i < 0 {
        0.0
    } else {
        psi[i as usize]
    }
}

/// Kernel from precomputed `psi_0..psi_max(n,m)` at one point.
///
/// Monolayer:
/// `[(1-δ_{n0}) ψ_{n-1} ψ_m ± (1-δ_{m0}) ψ_n ψ_{m-1}] / sqrt(2^{2-δ_{n0}-δ_{m0}})`.
///
/// Bilayer, with `δ'_k = δ_{k0} + δ_{k1}`:
/// `[(1-δ'_m) sqrt(n) ψ_{m-2} ψ_{n-1} ± (1-δ'_n) sqrt(n-1) ψ_m ψ_{n-1}] / sqrt(2^{2-δ'_n-δ'_m})`.
/// This is `Psi_m^dagger (j Psi_n)` with `j` reduced to oscillator ladder operators.
pub fn current_kernel_from(kind: LayerKind, sign: CurrentSign, n: usize, m: usize, psi: &[f64]) -> f64 {
    let s = sign.value();
    let (ni, mi) = (n as isize, m as isize);
    match kind {
        LayerKind::Monolayer => {
            let a = gate(n != 0) * at(psi, ni - 1) * psi[m];
            let b = gate(m != 0) * psi[n] * at(psi, mi - 1);
            (a + s * b) * norm_constant(kind, n) * norm_constant(kind, m)
        }
        LayerKind::Bilayer => {
            let nf = n as f64;
            let a = gate(m >= 2) * nf.sqrt() * at(psi, mi - 2) * at(psi, ni - 1);
            let b = gate(n >= 2) * (nf - 1.0).max(0.0).sqrt() * psi[m] * at(psi, ni - 1);
            (a + s * b) * norm_constant(kind, n) * norm_constant(kind, m)
        }
    }
}
